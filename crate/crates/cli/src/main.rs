//! Command-line driver: cross-section synthesis, thickness sweeps with
//! exponent verdicts, and explicit test-field studies.
//!
//! Exit codes: 0 on success, 2 for configuration and precondition problems,
//! 3 when the numerics fail (diverged solves, empty sweeps, fits without
//! enough points). Partial results are still written before a 3.

mod config;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use shellbuck::assemble::{assemble_pencil, dump_pencils, BForm, PencilKind, SymMat};
use shellbuck::field::{DenomKind, Space};
use shellbuck::geometry::{self, synthesize_curve, CrossSection};
use shellbuck::scaling::{
    self, bracket_check, fit_exponent, run_sweep_on, solver_ntheta, PointFailure, Quantity,
    SweepPoint, SweepResult, SweepSpec,
};
use shellbuck::scan::{korn_constant, DEFAULT_M_MAX};
use shellbuck::{Error, ShellConfig};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "shellbuck",
    version,
    about = "Buckling loads and Korn constants of thin cylindrical shells, traced over wall thickness"
)]
struct Cli {
    /// Output directory (default: the config's `out`, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Accepted for batch-script compatibility; every estimator here is
    /// deterministic, so the value changes nothing.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Omit the generation timestamp from SVG plots (byte-stable output).
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a cross-section and write its curve and curvature report.
    Curve(CurveArgs),
    /// Run the sweeps of an experiment file; fit and judge the exponents.
    Sweep(SweepArgs),
    /// Trace one test-field family over a thickness grid (L = 2, E = 1,
    /// nu = 0.3) and compare it against the solver infimum.
    Ansatz(AnsatzArgs),
}

#[derive(Args)]
struct CurveArgs {
    /// Profile: circle, oval, flat-spot, quartic.
    #[arg(long)]
    profile: String,
    /// Cross-section perimeter.
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    p: f64,
    /// Number of curvature zeros for the flat profiles.
    #[arg(long, default_value_t = 1)]
    zeros: u32,
    /// Curvature-zero order for flat-spot (even).
    #[arg(long, default_value_t = 2)]
    beta: u32,
    /// Profile samples.
    #[arg(long, default_value_t = 512)]
    n: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override solver.m_max.
    #[arg(long)]
    m_max: Option<u32>,
    /// Override solver.nt.
    #[arg(long)]
    nt: Option<usize>,
    /// Override solver.ntheta.
    #[arg(long)]
    ntheta: Option<usize>,
    /// Override the bracket slack for every quantity.
    #[arg(long)]
    slack: Option<f64>,
    /// Also write the minimizing-mode matrix pencil of each solver point.
    #[arg(long)]
    dump_pencils: bool,
}

#[derive(Args)]
struct AnsatzArgs {
    /// Family: kirchhoff, localized, linearized-t.
    #[arg(long)]
    family: String,
    /// Geometry id; a per-family default when omitted.
    #[arg(long)]
    geometry: Option<String>,
    /// Curvature-zero order for localized (even, >= 2).
    #[arg(long)]
    beta: Option<u32>,
    /// Bump center (kirchhoff) or curvature-zero location (other families).
    #[arg(long)]
    theta1: Option<f64>,
    /// Thicknesses, comma separated, strictly decreasing.
    #[arg(long)]
    h: Option<String>,
    /// Verify the curvature-zero precondition for localized fields instead
    /// of evaluating the shape wherever it was asked for.
    #[arg(long)]
    strict: bool,
    /// Slack around the expected exponent.
    #[arg(long, default_value_t = 0.05)]
    slack: f64,
    /// Skip the eigensolver comparison (much faster).
    #[arg(long)]
    no_compare: bool,
    /// Through-thickness nodes for the comparison solve.
    #[arg(long, default_value_t = 8)]
    nt: usize,
    /// Angular collocation for the comparison solve; per-geometry policy
    /// when omitted.
    #[arg(long)]
    ntheta: Option<usize>,
    /// Mode cap for the comparison solve.
    #[arg(long)]
    m_max: Option<u32>,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    });
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::SolverDiverged { .. }
            | Error::ZeroDenominator { .. }
            | Error::QuadratureNotConverged { .. }
            | Error::TooFewPoints { .. }
            | Error::AllPointsFailed { .. },
        ) => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(seed) = cli.seed {
        eprintln!("note: --seed {seed} has no effect; the pipeline is deterministic");
    }
    match &cli.cmd {
        Cmd::Curve(a) => cmd_curve(cli, a),
        Cmd::Sweep(a) => cmd_sweep(cli, a),
        Cmd::Ansatz(a) => cmd_ansatz(cli, a),
    }
}

fn out_dir(cli: &Cli, from_config: Option<&str>) -> anyhow::Result<PathBuf> {
    let out = cli
        .out
        .clone()
        .or_else(|| from_config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out)
}

fn timestamp(cli: &Cli) -> Option<u64> {
    if cli.no_timestamp {
        return None;
    }
    Some(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    )
}

/// Keep filenames shell-friendly when labels come from user paths.
fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn cmd_curve(cli: &Cli, a: &CurveArgs) -> anyhow::Result<()> {
    use shellbuck::geometry::CurvatureProfile;
    if a.beta < 2 || a.beta % 2 != 0 {
        return Err(Error::Config(format!("--beta must be an even integer >= 2, got {}", a.beta)).into());
    }
    let profile = match a.profile.as_str() {
        "circle" => CurvatureProfile::circle(a.p, a.n),
        "oval" => CurvatureProfile::cosine_series(a.p, a.n, &[(2, 0.3)]),
        "flat-spot" => {
            if a.beta == 2 {
                CurvatureProfile::flat_spot(a.p, a.n, a.zeros)
            } else {
                CurvatureProfile::flat_spot_of_order(a.p, a.n, a.zeros, a.beta)
            }
        }
        "quartic" => CurvatureProfile::flat_spot_of_order(a.p, a.n, a.zeros, 4),
        other => {
            return Err(Error::Config(format!(
                "unknown profile '{other}'; valid: circle, oval, flat-spot, quartic"
            ))
            .into());
        }
    };
    profile.validate()?;
    let cs = synthesize_curve(&profile, 1e-12)?;
    let out = out_dir(cli, None)?;
    let csv_path = out.join(format!("curve_{}.csv", sanitize(&a.profile)));
    fs::write(&csv_path, geometry::to_csv(&cs))?;

    let k_max = cs.k.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let extrema = geometry::curvature_extrema(&cs, 1e-3 * k_max.max(0.0));
    let report = serde_json::json!({
        "profile": a.profile,
        "period": cs.p,
        "samples": cs.n_theta(),
        "total_turning": profile.total_turning(),
        "closure_residual": cs.closure_residual,
        "correction_magnitude": cs.correction_magnitude,
        "extrema": extrema,
    });
    let report_path = out.join(format!("curve_{}.json", sanitize(&a.profile)));
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;

    println!("wrote {}", csv_path.display());
    println!("wrote {}", report_path.display());
    println!(
        "k in [{:.6}, {:.6}], {} curvature zero(s)",
        extrema.k_min,
        extrema.k_max,
        extrema.zeros.len()
    );
    Ok(())
}

/// Resolve the configured geometry. CSV paths are taken relative to the
/// config file, and the file's stem becomes the output label.
fn load_geometry(
    cfg: &ExperimentConfig,
    config_path: &Path,
) -> anyhow::Result<(String, CrossSection)> {
    if let Some(id) = &cfg.geometry.id {
        let cs = scaling::build_geometry(id, cfg.geometry.samples)?;
        return Ok((id.clone(), cs));
    }
    let csv_rel = cfg.geometry.csv.as_ref().expect("validated: id or csv");
    let csv_path = match config_path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(csv_rel),
        _ => PathBuf::from(csv_rel),
    };
    let text = fs::read_to_string(&csv_path)
        .with_context(|| format!("reading {}", csv_path.display()))?;
    let profile = geometry::profile_from_csv(&text)?;
    profile.validate()?;
    let cs = synthesize_curve(&profile, 1e-12)?;
    let label = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("csv");
    Ok((sanitize(label), cs))
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.config)
        .with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(m) = a.m_max {
        cfg.solver.m_max = m;
    }
    if let Some(nt) = a.nt {
        cfg.solver.nt = nt;
    }
    if let Some(nth) = a.ntheta {
        cfg.solver.ntheta = Some(nth);
    }
    if let Some(s) = a.slack {
        cfg.solver.slack = s;
    }
    cfg.validate()?;
    let out = out_dir(cli, cfg.out.as_deref())?;
    let (label, cs) = load_geometry(&cfg, &a.config)?;

    // Resolve every bracket up front so a missing one fails before any solve.
    let mut planned = Vec::new();
    for q in &cfg.quantities {
        let mut spec = cfg.spec_for(q, &label)?;
        spec.jobs = cli.jobs;
        let bracket = q
            .bracket
            .map(|b| (b[0], b[1]))
            .or_else(|| config::default_bracket(&label, &spec.quantity));
        let Some((lo, hi)) = bracket else {
            return Err(Error::Config(format!(
                "{} on {label} has no built-in exponent bracket; add `bracket = [lo, hi]` to the quantity",
                spec.quantity.tag()
            ))
            .into());
        };
        let slack = q.slack.unwrap_or(cfg.solver.slack);
        planned.push((spec, lo, hi, slack));
    }

    let mut first_numerical: Option<Error> = None;
    let note_failure = |e: Error, first: &mut Option<Error>| {
        eprintln!("error: {e}");
        if first.is_none() {
            *first = Some(e);
        }
    };

    for (spec, lo, hi, slack) in planned {
        let tag = spec.quantity.tag();
        let stem = format!("{tag}_{label}");
        let csv_path = out.join(format!("sweep_{stem}.csv"));
        let result = match run_sweep_on(&spec, &cs) {
            Ok(r) => r,
            Err(e) => {
                fs::write(&csv_path, "h,value,m_star,residual\n")?;
                note_failure(e, &mut first_numerical);
                continue;
            }
        };
        for f in &result.failures {
            eprintln!("note: {tag} at h = {} failed: {}", f.h, f.message);
        }
        fs::write(&csv_path, result.to_csv())?;
        if a.dump_pencils {
            dump_point_pencils(&out, &stem, &spec, &cs, &result)?;
        }
        let fit = match fit_exponent(&result) {
            Ok(f) => f,
            Err(e) => {
                note_failure(e, &mut first_numerical);
                continue;
            }
        };
        let verdict = bracket_check(&result, &fit, lo, hi, slack);
        fs::write(
            out.join(format!("fit_{stem}.json")),
            scaling::summary_json(&fit, &verdict),
        )?;
        let pts: Vec<(f64, f64)> = result.points.iter().map(|p| (p.h, p.value)).collect();
        let plot = svg::scaling_plot(&svg::PlotSpec {
            title: &format!("{tag} on {label}"),
            points: &pts,
            alpha: fit.alpha,
            intercept: fit.intercept,
            timestamp: timestamp(cli),
        });
        fs::write(out.join(format!("plot_{stem}.svg")), plot)?;
        println!(
            "{tag} on {label}: alpha = {:.4} (r2 = {:.5}), bracket [{:.4}, {:.4}] +- {}: {}",
            fit.alpha,
            fit.r2,
            lo,
            hi,
            slack,
            if verdict.pass { "pass" } else { "fail" }
        );
    }
    if let Some(e) = first_numerical {
        return Err(e.into());
    }
    Ok(())
}

/// Re-assemble and dump the minimizing-mode pencil of each solver point.
fn dump_point_pencils(
    out: &Path,
    stem: &str,
    spec: &SweepSpec,
    cs: &CrossSection,
    result: &SweepResult,
) -> anyhow::Result<()> {
    let kind = match spec.quantity {
        Quantity::BucklingLoad => PencilKind::Buckling,
        Quantity::KornGrad => PencilKind::KornGrad,
        Quantity::KornCol3 => PencilKind::KornCol3,
        _ => {
            eprintln!("note: --dump-pencils applies to solver quantities only");
            return Ok(());
        }
    };
    for pt in &result.points {
        let shell = ShellConfig::new(pt.h, spec.length, spec.e_mod, spec.nu)?;
        let ntheta = spec
            .ntheta
            .unwrap_or_else(|| solver_ntheta(&spec.geometry, pt.h));
        let (a_mat, b_form, _mass) =
            assemble_pencil(cs, &shell, spec.space, pt.m_star, spec.nt, ntheta, kind)?;
        let b_mat = densify(&b_form);
        let path = out.join(format!("pencil_{stem}_h{}.bin", pt.h));
        let mut file = fs::File::create(&path)?;
        dump_pencils(&mut file, &[&a_mat, &b_mat])?;
        println!("wrote {} (n = {})", path.display(), a_mat.n);
    }
    Ok(())
}

fn densify(b: &BForm) -> SymMat {
    match b {
        BForm::Dense(m) => m.clone(),
        BForm::Diag(d) => {
            let mut m = SymMat::zeros(d.len());
            for (i, &v) in d.iter().enumerate() {
                m.add(i, i, v);
            }
            m
        }
    }
}

#[derive(Clone, Copy)]
enum Family {
    Kirchhoff,
    Localized,
    LinearizedT,
}

fn parse_h_list(text: &str) -> shellbuck::Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let v: f64 = part
            .parse()
            .map_err(|_| Error::Config(format!("bad thickness '{part}'")))?;
        out.push(v);
    }
    if !(*out.last().unwrap() > 0.0) {
        return Err(Error::Config("thicknesses must be positive".into()));
    }
    for w in out.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config(format!(
                "thicknesses must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(out)
}

fn cmd_ansatz(cli: &Cli, a: &AnsatzArgs) -> anyhow::Result<()> {
    let family = match a.family.as_str() {
        "kirchhoff" => Family::Kirchhoff,
        "localized" => Family::Localized,
        "linearized-t" => Family::LinearizedT,
        other => {
            return Err(Error::Config(format!(
                "unknown family '{other}'; valid: kirchhoff, localized, linearized-t"
            ))
            .into());
        }
    };
    let beta = a.beta.unwrap_or(2);
    if beta < 2 || beta % 2 != 0 {
        return Err(Error::Config(format!("--beta must be an even integer >= 2, got {beta}")).into());
    }
    let geometry = match (family, a.geometry.as_deref()) {
        (_, Some(g)) => g.to_string(),
        (Family::Kirchhoff, None) => "circle".to_string(),
        (Family::Localized, None) => match beta {
            2 => "flat-spot".to_string(),
            4 => "quartic".to_string(),
            _ => {
                return Err(Error::Config(format!(
                    "no built-in geometry has a curvature zero of order {beta}; pass --geometry"
                ))
                .into());
            }
        },
        (Family::LinearizedT, None) => "flat-spot".to_string(),
    };
    let theta1 = a.theta1.unwrap_or(match family {
        Family::Kirchhoff => std::f64::consts::PI,
        _ => 0.0,
    });
    let h_list = match &a.h {
        Some(text) => parse_h_list(text)?,
        None => scaling::ansatz_h_grid(),
    };
    let samples = 512;
    if let Some(nth) = a.ntheta {
        if nth < 8 || samples % nth != 0 {
            return Err(
                Error::Config(format!("--ntheta must be >= 8 and divide {samples}, got {nth}")).into(),
            );
        }
    }
    let cs = scaling::build_geometry(&geometry, samples)?;
    let out = out_dir(cli, None)?;

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for &h in &h_list {
        match ansatz_point(family, &cs, h, theta1, beta, a.strict) {
            Ok(value) => points.push(SweepPoint {
                h,
                value,
                m_star: 0,
                residual: 0.0,
            }),
            Err(e @ (Error::NotAZero { .. } | Error::RegularityViolation { .. })) => {
                return Err(e.into());
            }
            Err(e) => {
                eprintln!("note: {} at h = {h} failed: {e}", a.family);
                failures.push(PointFailure {
                    h,
                    message: e.to_string(),
                });
            }
        }
    }
    if points.is_empty() {
        return Err(Error::AllPointsFailed {
            last: failures
                .last()
                .map(|f| f.message.clone())
                .unwrap_or_default(),
        }
        .into());
    }

    let quantity = match family {
        Family::Kirchhoff => Quantity::AnsatzKirchhoff { center: theta1 },
        Family::Localized => Quantity::AnsatzLocalized { theta1, beta },
        Family::LinearizedT => Quantity::AnsatzLinearizedT { theta1 },
    };
    let result = SweepResult {
        geometry: geometry.clone(),
        quantity,
        points,
        failures,
    };
    let stem = format!("{}_{}", quantity.tag(), sanitize(&geometry));
    fs::write(out.join(format!("sweep_{stem}.csv")), result.to_csv())?;

    let fit = fit_exponent(&result)?;
    let (lo, hi) =
        config::default_bracket(&geometry, &quantity).expect("test-field brackets are built in");
    let verdict = bracket_check(&result, &fit, lo, hi, a.slack);
    fs::write(
        out.join(format!("fit_{stem}.json")),
        scaling::summary_json(&fit, &verdict),
    )?;
    let pts: Vec<(f64, f64)> = result.points.iter().map(|p| (p.h, p.value)).collect();
    let plot = svg::scaling_plot(&svg::PlotSpec {
        title: &format!("{} on {}", quantity.tag(), geometry),
        points: &pts,
        alpha: fit.alpha,
        intercept: fit.intercept,
        timestamp: timestamp(cli),
    });
    fs::write(out.join(format!("plot_{stem}.svg")), plot)?;
    println!(
        "{} on {}: alpha = {:.4} (r2 = {:.5}), target [{:.4}, {:.4}] +- {}: {}",
        quantity.tag(),
        geometry,
        fit.alpha,
        fit.r2,
        lo,
        hi,
        a.slack,
        if verdict.pass { "pass" } else { "fail" }
    );

    if !a.no_compare {
        let pt0 = result.points[0];
        let shell = ShellConfig::new(pt0.h, 2.0, 1.0, 0.3)?;
        let denom = match family {
            Family::LinearizedT => DenomKind::Grad,
            _ => DenomKind::Col3,
        };
        let ntheta = a
            .ntheta
            .unwrap_or_else(|| solver_ntheta(&geometry, pt0.h));
        let outcome = korn_constant(
            &cs,
            &shell,
            Space::Vh,
            a.nt,
            ntheta,
            denom,
            a.m_max.unwrap_or(DEFAULT_M_MAX),
        )?;
        let ratio = pt0.value / outcome.value;
        let compare_path = out.join(format!("compare_{stem}.csv"));
        fs::write(
            &compare_path,
            format!(
                "h,quotient,infimum,ratio\n{},{},{},{}\n",
                pt0.h, pt0.value, outcome.value, ratio
            ),
        )?;
        println!(
            "upper bound at h = {}: quotient {} vs solver infimum {} (ratio {:.4}, m* = {})",
            pt0.h, pt0.value, outcome.value, ratio, outcome.m_star
        );
    }
    Ok(())
}

fn ansatz_point(
    family: Family,
    cs: &CrossSection,
    h: f64,
    theta1: f64,
    beta: u32,
    strict: bool,
) -> shellbuck::Result<f64> {
    let cfg = ShellConfig::new(h, 2.0, 1.0, 0.3)?;
    let field = match family {
        Family::Kirchhoff => shellbuck::ansatz::kirchhoff_on(&cfg, cs.p, theta1)?,
        Family::Localized => {
            if strict {
                shellbuck::ansatz::localized_ansatz(cs, &cfg, theta1, beta)?
            } else {
                shellbuck::ansatz::localized_shape(&cfg, cs.p, theta1, beta)?
            }
        }
        Family::LinearizedT => shellbuck::ansatz::linearized_t_ansatz(cs, &cfg, theta1)?,
    };
    let q = shellbuck::ansatz::evaluate_ansatz_quotients(&field, cs, &cfg)?;
    Ok(match family {
        Family::LinearizedT => q.korn_grad,
        _ => q.korn_col3,
    })
}
