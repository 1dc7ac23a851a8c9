//! `specasym`: verification suites, 2-form splittings, residues and torus spectra.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use spectral_asymmetry::holonomy::{decompose_two_form, instanton_check, standard_structure, HolonomyKind};
use spectral_asymmetry::io::{
    exact_pi_json, float_value, parse_curvature_json, parse_form, parse_rational, to_canonical_json,
    write_levels_csv,
};
use spectral_asymmetry::model_heat::{
    duhamel_diag_trace, mehler_diag_trace, residue_twice_power, CurvatureData, HeatModel,
};
use spectral_asymmetry::residue::{compute_residue, sign_report, SignStatus};
use spectral_asymmetry::scalar::{q, rational_to_string, Rational};
use spectral_asymmetry::torus::{enumerate_levels, twisted_levels, SpectralWeight};
use spectral_asymmetry::verify::{all_passed, run_suite, Check, Status, Suite};
use spectral_asymmetry::Error;

const ORACLE_TOL: f64 = 1e-8;
const INSTANTON_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "specasym", version, about = "G2 / Spin(7) spectral asymmetry toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Split a 2-form into its Λ_7 part and the complement.
    Decompose {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, allow_hyphen_values = true)]
        form: String,
    },
    /// Residue of the spectral asymmetry zeta function from curvature data.
    Residue {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        input: PathBuf,
        /// Cross-check the Mehler coefficient against the Duhamel expansion.
        #[arg(long)]
        oracle: bool,
    },
    /// Enumerate 2-form Laplacian levels on the flat torus.
    Spectrum {
        #[arg(long, value_parser = clap::value_parser!(u8).range(7..=8))]
        n: u8,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        qmax: u64,
        /// Comma-separated holonomy angles (one per coordinate), e.g. "1/2,0,0,0,0,0,0".
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Algebra,
    Holonomy,
    Heat,
    Spectrum,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Algebra => Suite::Algebra,
            SuiteArg::Holonomy => Suite::Holonomy,
            SuiteArg::Heat => Suite::Heat,
            SuiteArg::Spectrum => Suite::Spectrum,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    G2,
    Spin7,
}

impl From<KindArg> for HolonomyKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::G2 => HolonomyKind::G2,
            KindArg::Spin7 => HolonomyKind::Spin7,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Failure carrying its exit code: 1 invariant, 2 input, 3 I/O.
#[derive(Debug)]
enum Failure {
    Invariant(String),
    Input(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invariant(m) | Failure::Input(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::WrongDegree { .. }
            | Error::SymmetryViolation(_)
            | Error::NotSkewHermitian(_)
            | Error::DimensionMismatch { .. }
            | Error::RankMismatch { .. }
            | Error::IndexOutOfRange { .. }
            | Error::NotStrictlyIncreasing(_)
            | Error::UnsupportedDimension(_)
            | Error::InvalidArgument(_) => Failure::Input(e.to_string()),
            other => Failure::Invariant(other.to_string()),
        }
    }
}

fn checks_json(checks: &[Check]) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|c| json!({"name": c.name, "status": c.status.as_str(), "detail": c.detail}))
            .collect(),
    )
}

fn check(name: &str, status: Status, detail: String) -> Check {
    Check {
        name: name.to_string(),
        status,
        detail,
    }
}

fn cmd_verify(suite: Suite, format: Format) -> Result<(), Failure> {
    let checks = run_suite(suite);
    match format {
        Format::Json => {
            let report = json!({"suite": suite.to_string(), "checks": checks_json(&checks)});
            print!("{}", to_canonical_json(&report));
        }
        Format::Text => {
            for c in &checks {
                println!("[{}] {}: {}", c.status.as_str(), c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
            println!("suite {suite}: {} checks, {failed} failed", checks.len());
        }
    }
    if all_passed(&checks) {
        Ok(())
    } else {
        let names: Vec<&str> = checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure::Invariant(format!("failed invariants: {}", names.join(", "))))
    }
}

fn cmd_decompose(kind: HolonomyKind, form: &str) -> Result<(), Failure> {
    let s = standard_structure(kind)?;
    let alpha = parse_form(form, s.n)?;
    let (p7, rest) = decompose_two_form(&s, &alpha)?;
    let report = json!({
        "kind": kind.to_string(),
        "form": alpha.to_string(),
        "p7": p7.to_string(),
        "p_big": rest.to_string(),
        "norms": [rational_to_string(&p7.norm_sq()), rational_to_string(&rest.norm_sq())],
    });
    print!("{}", to_canonical_json(&report));
    Ok(())
}

fn read_input(path: &PathBuf) -> Result<CurvatureData<Rational>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_curvature_json(&text)?)
}

fn cmd_residue(kind: HolonomyKind, input: &PathBuf, oracle: bool) -> Result<(), Failure> {
    let s = standard_structure(kind)?;
    let cd = read_input(input)?;
    if cd.n() != s.n {
        return Err(Failure::Input(format!(
            "kind {kind} needs n = {}, input has n = {}",
            s.n,
            cd.n()
        )));
    }
    let report = compute_residue(&s, &cd)?;
    let sign = sign_report(&s, &cd, INSTANTON_TOL)?;
    let inst = instanton_check(&s, &cd, INSTANTON_TOL)?;

    let mut checks = vec![check("input_symmetry", Status::Pass, "symmetry closure consistent".into())];
    checks.push(check(
        "constants_consistent",
        if report.constants_consistent { Status::Pass } else { Status::Fail },
        "twisted constant × 1/3 = untwisted constant".into(),
    ));
    let bianchi = cd.satisfies_bianchi();
    checks.push(check(
        "bianchi",
        if bianchi { Status::Pass } else { Status::Info },
        if bianchi {
            "first Bianchi identity holds".into()
        } else {
            format!("first Bianchi identity fails (defect {:.3e}); the density formula assumes it", cd.bianchi_defect())
        },
    ));

    let mut res = Map::new();
    res.insert("kind".into(), json!(kind.to_string()));
    res.insert("twisted".into(), json!(report.twisted));
    res.insert("pole_location".into(), json!(rational_to_string(&report.pole_location)));
    let mut density = Map::new();
    density.insert("form".into(), json!(report.density.form.to_string()));
    density.insert("pi_power".into(), json!(rational_to_string(&q(report.density.pi_half as i64, 2))));
    res.insert("density".into(), Value::Object(density));
    res.insert("density_integral".into(), exact_pi_json(&report.integral));
    res.insert("b_coefficient".into(), exact_pi_json(&report.b_coefficient));
    res.insert("gamma_factor".into(), exact_pi_json(&report.gamma_factor));
    res.insert("residue".into(), exact_pi_json(&report.residue));
    res.insert("constant".into(), exact_pi_json(&report.constant));
    res.insert("matches_displayed_constant".into(), json!(report.matches_displayed_constant));
    res.insert("constants_consistent".into(), json!(report.constants_consistent));
    res.insert(
        "sign_report".into(),
        json!({
            "status": sign.status.label(),
            "residue": float_value(sign.residue),
            "max_lambda7_component": float_value(sign.max_lambda7_component),
        }),
    );
    let warning = match sign.status {
        SignStatus::NotInstanton => Some(format!(
            "bundle curvature has a Λ_7 component (max {:.3e}); not an instanton",
            inst.max_lambda7_component
        )),
        SignStatus::Violation => Some("positive residue for an instanton: nonpositivity violated".to_string()),
        _ => None,
    };
    if let Some(w) = &warning {
        res.insert("warning".into(), json!(w));
        eprintln!("warning: {w}");
    }

    let mut out = Map::new();
    if oracle {
        let model = HeatModel::calibrated(&s)?;
        let target = residue_twice_power(&s);
        let cf = cd.to_f64();
        let a = mehler_diag_trace(&model, &cf)?.truncated(target);
        let b = duhamel_diag_trace(&model, &cf, 2)?.truncated(target);
        let gap = a.relative_distance(&b);
        let exact = mehler_diag_trace(&model, &cd)?;
        let model_b = exact.coefficient_pi(target);
        checks.push(check(
            "heat_model_vs_density",
            Status::Info,
            format!(
                "calibrated model coefficient {} vs density b {} (both × π^({}/2))",
                rational_to_string(&model_b.coeff),
                rational_to_string(&report.b_coefficient.coeff),
                model_b.pi_half
            ),
        ));
        res.insert("heat_model_coefficient".into(), exact_pi_json(&model_b));
        checks.push(check(
            "mehler_vs_duhamel",
            if gap < ORACLE_TOL { Status::Pass } else { Status::Fail },
            format!("relative discrepancy {gap:.3e} through t^({target}/2), tolerance {ORACLE_TOL:e}"),
        ));
        out.insert("discrepancy".into(), float_value(gap));
        eprintln!("discrepancy = {gap:.6e}");
    }
    out.insert("suite".into(), json!("residue"));
    out.insert("checks".into(), checks_json(&checks));
    out.insert("residue".into(), Value::Object(res));
    print!("{}", to_canonical_json(&Value::Object(out)));
    if all_passed(&checks) {
        Ok(())
    } else {
        Err(Failure::Invariant("residue checks failed".into()))
    }
}

fn parse_theta(text: &str, n: usize) -> Result<Vec<Rational>, Failure> {
    let theta = text
        .split(',')
        .map(|t| parse_rational(t.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if theta.len() != n {
        return Err(Failure::Input(format!("--theta needs {n} entries, got {}", theta.len())));
    }
    Ok(theta)
}

fn cmd_spectrum(n: usize, qmax: u64, theta: Option<&str>, out: &PathBuf) -> Result<(), Failure> {
    let sp = match theta {
        Some(t) => twisted_levels(&parse_theta(t, n)?, qmax)?,
        None => enumerate_levels(n, qmax)?,
    };
    let mut buf = Vec::new();
    write_levels_csv(&sp, &mut buf)?;
    std::fs::write(out, buf).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;

    println!("levels = {} (q ≤ {qmax}), written to {}", sp.levels.len(), out.display());
    let big = sp.kind.big_dimension();
    let mut ratios_ok = true;
    for frac in [4.0, 2.0, 1.0] {
        let x = sp.lambda_max() / frac;
        let (n7, nbig) = sp.counting_functions(x)?;
        ratios_ok &= nbig * 7 == n7 * big as u64;
        let ratio = if n7 == 0 { "undefined".to_string() } else { format!("{}", nbig as f64 / n7 as f64) };
        println!("N_7({x:.6}) = {n7}, N_{big}({x:.6}) = {nbig}, ratio = {ratio}");
    }
    let s = n as f64 / 2.0 + 0.5;
    let z = sp.zeta_partial(SpectralWeight::delta(sp.kind), s, qmax, false)?;
    if z.sum == 0.0 {
        println!("zeta_delta_partial = 0");
    } else {
        println!("zeta_delta_partial = {:e}", z.sum);
    }
    let z7 = sp.zeta_partial(SpectralWeight { w7: 1, w_big: 0 }, s, qmax, false)?;
    println!("zeta_7_partial(s = {s}) = {:.16e} (tail ≤ {:.3e})", z7.sum, z7.tail_bound);
    if ratios_ok && z.sum == 0.0 {
        Ok(())
    } else {
        Err(Failure::Invariant("spectral asymmetry does not cancel".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Verify { suite, format } => cmd_verify(suite.into(), format),
        Command::Decompose { kind, form } => cmd_decompose(kind.into(), &form),
        Command::Residue { kind, input, oracle } => cmd_residue(kind.into(), &input, oracle),
        Command::Spectrum { n, qmax, theta, out } => cmd_spectrum(n as usize, qmax, theta.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
