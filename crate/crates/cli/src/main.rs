//! Command-line front end for the `rir` library.
//!
//! Subcommands:
//!
//! * `analyze`  - full bound-and-certificate report for one system,
//! * `table2`   - benchmark table over the one-parameter example family,
//! * `allpass`  - all-pass exactness certificate for one system,
//! * `fhn`      - FitzHugh-Nagumo case study: critical gain, perturbation
//!   synthesis, and trajectory CSVs for the four reference scenarios,
//! * `nyquist`  - frequency-response curve CSV with peak annotation.
//!
//! Exit status: 0 on success, 2 on input errors (bad flags, malformed
//! systems, a nominal plant that is already stable), 3 on numerical
//! failures during analysis. Outputs are deterministic: no timestamps,
//! no RNG, all floats at nine significant digits.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rir::fhn::{self, FhnModel, Perturbation, SimParams};
use rir::fmt::{poly_desc, sig9};
use rir::second_order::{self, CaseLabel, ExampleRow, TABLE2_Z};
use rir::xfer::{nyquist, GridScale};
use rir::bounds::{report_with, BoundsError, GridParams};
use rir::{certify_exact_rir, CertTag, ExtReal, RationalTF, RirReport};

/// Instability-radius analysis for unstable SISO feedback loops.
#[derive(Parser, Debug)]
#[command(name = "rir", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute every bound and certificate for one system.
    Analyze(AnalyzeCmd),
    /// Reproduce the five-row benchmark table (or any z sweep).
    #[command(name = "table2")]
    Table2(Table2Cmd),
    /// Search for a first-order all-pass exactness certificate.
    Allpass(AllpassCmd),
    /// Run the FitzHugh-Nagumo case study end to end.
    Fhn(FhnCmd),
    /// Sample a Nyquist curve to CSV.
    Nyquist(NyquistCmd),
}

/// One transfer function, as coefficient lists or a named preset.
#[derive(Args, Debug)]
struct SystemArgs {
    /// Numerator coefficients, ascending degree (constant term first).
    #[arg(long, num_args = 1.., allow_negative_numbers = true, value_name = "C", requires = "den")]
    num: Option<Vec<f64>>,
    /// Denominator coefficients, ascending degree.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, value_name = "C", requires = "num")]
    den: Option<Vec<f64>>,
    /// Named system: `z=VALUE` (benchmark family member) or `fhn-nominal`.
    #[arg(long, value_name = "NAME", conflicts_with_all = ["num", "den"])]
    preset: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TableFormat {
    Csv,
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ScaleArg {
    Log,
    Lin,
}

#[derive(Args, Debug)]
struct AnalyzeCmd {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// D-partition grid resolution (points per axis).
    #[arg(long, default_value_t = 600, value_name = "N")]
    grid_res: usize,
    /// D-partition search box half-width (default: scaled to the peak gain).
    #[arg(long, value_name = "W")]
    grid_halfwidth: Option<f64>,
}

#[derive(Args, Debug)]
struct Table2Cmd {
    /// Zero locations to tabulate (default: the five reference rows).
    #[arg(long, num_args = 1.., allow_negative_numbers = true, value_name = "Z")]
    z: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// D-partition grid resolution (points per axis).
    #[arg(long, default_value_t = 600, value_name = "N")]
    grid_res: usize,
    /// D-partition search box half-width (default: scaled to the peak gain).
    #[arg(long, value_name = "W")]
    grid_halfwidth: Option<f64>,
}

#[derive(Args, Debug)]
struct AllpassCmd {
    #[command(flatten)]
    system: SystemArgs,
    /// Sharpness margins to try, in order.
    #[arg(long, num_args = 1.., value_name = "EPS", default_values_t = vec![1e-3, 1e-4])]
    eps: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FhnCmd {
    /// Relative detuning of the marginal all-pass perturbation.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    eps: f64,
    /// Directory for the trajectory CSV files.
    #[arg(long, default_value = ".", value_name = "DIR")]
    outdir: PathBuf,
    /// Integrator step size.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Simulation horizon for every scenario. Default: 200, except 500
    /// for the destabilized run, whose interspike period is much longer.
    #[arg(long, value_name = "T")]
    t_end: Option<f64>,
}

#[derive(Args, Debug)]
struct NyquistCmd {
    #[command(flatten)]
    system: SystemArgs,
    /// Lowest sampled frequency (must be positive for log spacing).
    #[arg(long, default_value_t = 0.01, value_name = "W")]
    wmin: f64,
    /// Highest sampled frequency.
    #[arg(long, default_value_t = 100.0, value_name = "W")]
    wmax: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, value_enum, default_value_t = ScaleArg::Log)]
    scale: ScaleArg,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

/// Failure classified by exit status: input problems exit 2, numerical
/// problems exit 3.
enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn input(e: impl ToString) -> Self {
        Failure::Input(e.to_string())
    }

    fn numerical(e: impl ToString) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(cmd) => run_analyze(cmd),
        Command::Table2(cmd) => run_table2(cmd),
        Command::Allpass(cmd) => run_allpass(cmd),
        Command::Fhn(cmd) => run_fhn(cmd),
        Command::Nyquist(cmd) => run_nyquist(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

impl SystemArgs {
    /// Builds the transfer function; construction problems are input errors.
    fn build(&self) -> Result<RationalTF, Failure> {
        match (&self.preset, &self.num, &self.den) {
            (Some(name), None, None) => build_preset(name),
            (None, Some(num), Some(den)) => {
                if !num.iter().chain(den).all(|c| c.is_finite()) {
                    return Err(Failure::Input("coefficients must be finite".into()));
                }
                RationalTF::from_coeffs(num, den).map_err(Failure::input)
            }
            _ => Err(Failure::Input(
                "provide a system: either --preset or both --num and --den".into(),
            )),
        }
    }
}

fn build_preset(name: &str) -> Result<RationalTF, Failure> {
    if let Some(text) = name.strip_prefix("z=") {
        let z: f64 = text
            .parse()
            .map_err(|_| Failure::Input(format!("preset `{name}`: `{text}` is not a number")))?;
        if !z.is_finite() {
            return Err(Failure::Input(format!("preset `{name}`: z must be finite")));
        }
        let (_, g) = second_order::example_family(z).map_err(Failure::input)?;
        Ok(g)
    } else if name == "fhn-nominal" {
        let m = FhnModel::nominal();
        let eq = fhn::equilibrium(&m, 0.0).map_err(Failure::numerical)?;
        fhn::linearize(&m, &eq).map_err(Failure::numerical)
    } else {
        Err(Failure::Input(format!(
            "unknown preset `{name}`; expected `z=VALUE` or `fhn-nominal`"
        )))
    }
}

/// Analysis-time failures are numerical, except a stable nominal plant,
/// which means the input is outside the tool's domain.
fn classify_bounds(e: BoundsError) -> Failure {
    match e {
        BoundsError::StableNominal => Failure::input(e),
        other => Failure::numerical(other),
    }
}

fn emit(target: Option<&PathBuf>, content: &str) -> Result<(), Failure> {
    match target {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn ext_str(x: ExtReal) -> String {
    if x.is_finite() {
        sig9(x.0)
    } else {
        "inf".into()
    }
}

fn opt_str(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_else(|| "-".into())
}

fn opt_ext_str(x: Option<ExtReal>) -> String {
    x.map(ext_str).unwrap_or_else(|| "-".into())
}

fn tag_str(tag: CertTag) -> &'static str {
    match tag {
        CertTag::InfinitePip => "infinite_pip",
        CertTag::Prop2Exact => "prop2_exact",
        CertTag::AllpassExact => "allpass_exact",
        CertTag::Unknown => "unknown",
    }
}

fn case_str(label: CaseLabel) -> &'static str {
    match label {
        CaseLabel::A => "a",
        CaseLabel::B => "b",
        CaseLabel::PipViolated => "pip_violated",
        CaseLabel::C => "c",
        CaseLabel::D => "d",
        CaseLabel::E => "e",
    }
}

fn tf_str(g: &RationalTF) -> String {
    format!(
        "({}) / ({})",
        poly_desc(g.num().coeffs()),
        poly_desc(g.den().coeffs())
    )
}

fn run_analyze(cmd: AnalyzeCmd) -> Result<(), Failure> {
    let g = cmd.system.build()?;
    let grid = GridParams { resolution: cmd.grid_res, half_width: cmd.grid_halfwidth };
    let rep = report_with(&g, &grid).map_err(classify_bounds)?;
    let content = match cmd.format {
        ReportFormat::Json => json_line(&rep),
        ReportFormat::Text => render_report(&g, &rep),
    };
    emit(cmd.output.as_ref(), &content)
}

fn render_report(g: &RationalTF, r: &RirReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("g(s)     = {}\n", tf_str(g)));
    out.push_str(&format!("pip      = {}\n", if r.pip { "holds" } else { "fails" }));
    out.push_str(&format!(
        "rho_p    = {}   (peak at omega = {})\n",
        sig9(r.rho_p),
        ext_str(r.omega_p)
    ));
    out.push_str(&format!("rho_o    = {}\n", opt_str(r.rho_o)));
    out.push_str(&format!("rho_r    = {}\n", ext_str(r.rho_r)));
    out.push_str(&format!(
        "rho_c    = {}   (grid {}x{}, half-width {})\n",
        ext_str(r.rho_c.value),
        r.rho_c.resolution.0,
        r.rho_c.resolution.1,
        sig9(r.rho_c.half_width)
    ));
    out.push_str(&format!(
        "rho_star = {}   [{}]\n",
        opt_ext_str(r.rho_star),
        tag_str(r.rho_star_tag)
    ));
    out
}

fn run_table2(cmd: Table2Cmd) -> Result<(), Failure> {
    let zs = cmd.z.unwrap_or_else(|| TABLE2_Z.to_vec());
    if !zs.iter().all(|z| z.is_finite()) {
        return Err(Failure::Input("z values must be finite".into()));
    }
    let grid = GridParams { resolution: cmd.grid_res, half_width: cmd.grid_halfwidth };
    let rows = second_order::table2_with(&zs, &grid);
    let content = match cmd.format {
        TableFormat::Csv => render_table_csv(&rows),
        TableFormat::Text => render_table_text(&rows),
        TableFormat::Json => json_line(&rows),
    };
    emit(cmd.output.as_ref(), &content)
}

/// Minimal CSV quoting: only error messages can contain delimiters.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn table_cells(row: &ExampleRow) -> [String; 9] {
    [
        sig9(row.z),
        case_str(row.case_label).to_string(),
        opt_ext_str(row.rho_star),
        tag_str(row.rho_star_tag).to_string(),
        row.rho_r.map(ext_str).unwrap_or_else(|| "-".into()),
        opt_str(row.rho_o),
        opt_str(row.rho_p),
        opt_str(row.omega_p),
        row.error.clone().unwrap_or_default(),
    ]
}

const TABLE_HEADER: [&str; 9] =
    ["z", "case", "rho_star", "tag", "rho_r", "rho_o", "rho_p", "omega_p", "error"];

fn render_table_csv(rows: &[ExampleRow]) -> String {
    let mut out = TABLE_HEADER.join(",");
    out.push('\n');
    for row in rows {
        let cells = table_cells(row);
        let quoted: Vec<String> = cells.iter().map(|c| csv_field(c)).collect();
        out.push_str(&quoted.join(","));
        out.push('\n');
    }
    out
}

fn render_table_text(rows: &[ExampleRow]) -> String {
    let mut grid: Vec<[String; 9]> = vec![TABLE_HEADER.map(String::from)];
    grid.extend(rows.iter().map(table_cells));
    let mut widths = [0usize; 9];
    for row in &grid {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for row in &grid {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn run_allpass(cmd: AllpassCmd) -> Result<(), Failure> {
    if !cmd.eps.iter().all(|e| e.is_finite() && *e > 0.0) {
        return Err(Failure::Input("sharpness margins must be positive".into()));
    }
    let g = cmd.system.build()?;
    let cert = certify_exact_rir(&g, &cmd.eps).map_err(Failure::numerical)?;
    let content = match cmd.format {
        ReportFormat::Json => json_line(&cert),
        ReportFormat::Text => match &cert {
            None => "no certificate\n".to_string(),
            Some(c) => {
                let d = &c.delta;
                format!(
                    "certificate: rho_star = {}\n\
                     delta(s) = b (a - s) / (a + s) with b = {}, a = {}\n\
                     marginal frequency omega_c = {}\n\
                     stable cofactor psi(s) = {}   (residual {})\n\
                     sharpness margin eps = {}\n",
                    sig9(c.rho_star),
                    sig9(d.b),
                    sig9(d.a),
                    sig9(d.omega_c),
                    poly_desc(d.psi.coeffs()),
                    sig9(d.residual),
                    sig9(c.eps_used)
                )
            }
        },
    };
    emit(cmd.output.as_ref(), &content)
}

/// Stdout summary of the `fhn` run; scenario order is fixed.
#[derive(Serialize)]
struct FhnSummary {
    eps: f64,
    /// Critical static gain: `delta = e0` places the shifted linearization
    /// on the stability boundary.
    e0: f64,
    /// Peak frequency of the critical linearization.
    omega_p: f64,
    /// All-pass pole/zero location of the synthesized perturbation.
    a: f64,
    /// Marginal all-pass gain (equals `e0`).
    b: f64,
    /// H-infinity norm of the stabilizing perturbation `(1+eps) delta_0`.
    delta_plus_norm: f64,
    /// H-infinity norm of the destabilizing perturbation `(1-eps) delta_0`.
    delta_minus_norm: f64,
    scenarios: Vec<ScenarioSummary>,
}

#[derive(Serialize)]
struct ScenarioSummary {
    name: String,
    perturbation: Perturbation,
    file: String,
    #[serde(flatten)]
    result: fhn::TrajectorySummary,
}

fn run_fhn(cmd: FhnCmd) -> Result<(), Failure> {
    if !cmd.eps.is_finite() {
        return Err(Failure::Input("--eps must be finite".into()));
    }
    if !(cmd.dt.is_finite() && cmd.dt > 0.0) {
        return Err(Failure::Input("--dt must be positive".into()));
    }
    if let Some(t) = cmd.t_end {
        if !(t.is_finite() && t > cmd.dt) {
            return Err(Failure::Input("--t-end must exceed --dt".into()));
        }
    }
    fs::create_dir_all(&cmd.outdir)
        .map_err(|e| Failure::Input(format!("cannot create {}: {e}", cmd.outdir.display())))?;

    let m = FhnModel::nominal();
    let (e0, omega_p) = fhn::critical_static_gain(&m).map_err(Failure::numerical)?;
    let d_plus = fhn::synthesize_perturbation(&m, cmd.eps).map_err(Failure::numerical)?;
    let d_minus = fhn::synthesize_perturbation(&m, -cmd.eps).map_err(Failure::numerical)?;

    let t_default = cmd.t_end.unwrap_or(200.0);
    // The near-critical destabilizing run has a much longer interspike
    // period; give it room for several cycles unless overridden.
    let t_destab = cmd.t_end.unwrap_or(500.0);

    let near = |p: &Perturbation| -> Result<[f64; 3], Failure> {
        let mut x0 = fhn::shifted_state(&m, p).map_err(Failure::numerical)?;
        x0[0] += 1e-4;
        Ok(x0)
    };

    let pert_plus = Perturbation::from(&d_plus);
    let pert_minus = Perturbation::from(&d_minus);
    let pert_static = Perturbation::Static(-0.2);
    let runs: [(&str, Perturbation, [f64; 3], f64); 4] = [
        ("nominal", Perturbation::Nominal, [0.0; 3], t_default),
        ("stabilized", pert_plus, near(&pert_plus)?, t_default),
        ("destabilized", pert_minus, [0.0; 3], t_destab),
        ("static", pert_static, near(&pert_static)?, t_default),
    ];

    let mut scenarios = Vec::new();
    for (name, pert, x0, t_end) in runs {
        let params = SimParams { x0, t_end, dt: cmd.dt };
        let traj = fhn::simulate(&m, &pert, &params).map_err(Failure::numerical)?;
        let file = format!("fhn_{name}.csv");
        let path = cmd.outdir.join(&file);
        fs::write(&path, traj.to_csv())
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
        scenarios.push(ScenarioSummary {
            name: name.to_string(),
            perturbation: pert,
            file,
            result: traj.summary(),
        });
    }

    let summary = FhnSummary {
        eps: cmd.eps,
        e0,
        omega_p,
        a: d_plus.a,
        b: e0,
        delta_plus_norm: d_plus.hinf_norm(),
        delta_minus_norm: d_minus.hinf_norm(),
        scenarios,
    };
    print!("{}", json_line(&summary));
    Ok(())
}

fn run_nyquist(cmd: NyquistCmd) -> Result<(), Failure> {
    let g = cmd.system.build()?;
    if !(cmd.wmin.is_finite() && cmd.wmax.is_finite() && cmd.wmin >= 0.0 && cmd.wmin < cmd.wmax) {
        return Err(Failure::Input("need 0 <= wmin < wmax".into()));
    }
    if cmd.scale == ScaleArg::Log && cmd.wmin <= 0.0 {
        return Err(Failure::Input("log spacing needs wmin > 0".into()));
    }
    if cmd.n < 2 {
        return Err(Failure::Input("need at least two samples".into()));
    }
    let scale = match cmd.scale {
        ScaleArg::Log => GridScale::Log,
        ScaleArg::Lin => GridScale::Linear,
    };
    let label = format!("g(s) = {}", tf_str(&g));
    let curve = nyquist(&g, &label, cmd.wmin, cmd.wmax, cmd.n, scale)
        .with_projection(&g, &g)
        .map_err(Failure::numerical)?;
    emit(cmd.output.as_ref(), &curve.to_csv())
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}
