//! Thickness sweeps, power-law fits, and exponent bracket verdicts.
//!
//! A sweep names a geometry, a quantity, and a decreasing list of shell
//! thicknesses; each point comes from the modal eigensolver ([`crate::scan`])
//! or from an explicit test field ([`crate::ansatz`]). Fits are least squares
//! on (log h, log value); bracket verdicts compare the fitted exponent
//! against a target band and report the envelope constants.

use crate::ansatz::{
    evaluate_ansatz_quotients, kirchhoff_on, linearized_t_ansatz, localized_ansatz,
};
use crate::error::{Error, Result};
use crate::field::{DenomKind, Space};
use crate::geometry::{synthesize_curve, CrossSection, CurvatureProfile};
use crate::scan::{buckling_load, korn_constant, DEFAULT_M_MAX};
use crate::shell::ShellConfig;

/// What a sweep measures at each thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    /// Constitutively linearized buckling load, minimized over modes.
    BucklingLoad,
    /// Korn quotient with the full gradient in the denominator.
    KornGrad,
    /// Korn-like quotient with the z-column of the gradient below.
    KornCol3,
    /// z-column quotient of the Kirchhoff-type bump at `center`.
    AnsatzKirchhoff { center: f64 },
    /// z-column quotient of the localized bump at a curvature zero.
    AnsatzLocalized { theta1: f64, beta: u32 },
    /// Full-gradient quotient of the linearized-t field.
    AnsatzLinearizedT { theta1: f64 },
}

impl Quantity {
    pub fn tag(&self) -> &'static str {
        match self {
            Quantity::BucklingLoad => "lambda_cl",
            Quantity::KornGrad => "korn_grad",
            Quantity::KornCol3 => "korn_col3",
            Quantity::AnsatzKirchhoff { .. } => "ansatz_kirchhoff",
            Quantity::AnsatzLocalized { .. } => "ansatz_localized",
            Quantity::AnsatzLinearizedT { .. } => "ansatz_linearized_t",
        }
    }

    fn is_ansatz(&self) -> bool {
        matches!(
            self,
            Quantity::AnsatzKirchhoff { .. }
                | Quantity::AnsatzLocalized { .. }
                | Quantity::AnsatzLinearizedT { .. }
        )
    }
}

pub const GEOMETRY_IDS: [&str; 4] = ["circle", "oval", "flat-spot", "quartic"];

/// Cross-section registry used by sweeps and the command line.
///
/// `oval` is k = 1 + 0.3·cos 2θ; `flat-spot` has one quadratic curvature
/// zero at θ = 0 and `quartic` a single zero of order four. All have period
/// 2π and are synthesized from `n` profile samples.
pub fn build_geometry(id: &str, n: usize) -> Result<CrossSection> {
    let p = 2.0 * std::f64::consts::PI;
    let profile = match id {
        "circle" => CurvatureProfile::circle(p, n),
        "oval" => CurvatureProfile::cosine_series(p, n, &[(2, 0.3)]),
        "flat-spot" => CurvatureProfile::flat_spot(p, n, 1),
        "quartic" => CurvatureProfile::flat_spot_of_order(p, n, 1, 4),
        other => {
            return Err(Error::Config(format!(
                "unknown geometry '{other}'; valid ids: {}",
                GEOMETRY_IDS.join(", ")
            )));
        }
    };
    synthesize_curve(&profile, 1e-12)
}

/// Default eigensolver grid: geometric with ratio 2 over [2.5e-3, 4e-2].
pub fn default_h_grid() -> Vec<f64> {
    vec![0.04, 0.02, 0.01, 0.005, 0.0025]
}

/// Default grid for test-field sweeps, reaching thinner shells than the
/// eigensolver grid since quadrature cost does not grow as h shrinks.
pub fn ansatz_h_grid() -> Vec<f64> {
    vec![4e-3, 1e-3, 2.5e-4]
}

/// Angular resolution for the modal solve. The smooth geometries get away
/// with 64 collocation angles until the mode structure tightens near
/// h = 0.01; the flat-spot profiles are band-limited enough for 64 across
/// the whole default grid.
pub fn solver_ntheta(geometry: &str, h: f64) -> usize {
    match geometry {
        "circle" | "oval" if h < 0.01 => 128,
        _ => 64,
    }
}

/// One experiment: a quantity traced over a thickness grid.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub geometry: String,
    pub space: Space,
    pub quantity: Quantity,
    /// Strictly decreasing, all positive.
    pub h_list: Vec<f64>,
    pub length: f64,
    pub e_mod: f64,
    pub nu: f64,
    /// Through-thickness collocation nodes.
    pub nt: usize,
    /// Angular collocation override; the per-geometry policy when absent.
    pub ntheta: Option<usize>,
    /// Profile samples for geometry synthesis.
    pub geometry_n: usize,
    pub m_max: u32,
    /// Worker threads for the points.
    pub jobs: usize,
}

impl SweepSpec {
    pub fn new(geometry: &str, quantity: Quantity) -> Self {
        let h_list = if quantity.is_ansatz() {
            ansatz_h_grid()
        } else {
            default_h_grid()
        };
        SweepSpec {
            geometry: geometry.to_string(),
            space: Space::Vh,
            quantity,
            h_list,
            length: 2.0,
            e_mod: 1.0,
            nu: 0.3,
            nt: 8,
            ntheta: None,
            geometry_n: 512,
            m_max: DEFAULT_M_MAX,
            jobs: 1,
        }
    }
}

/// One converged sweep point.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub h: f64,
    pub value: f64,
    /// Minimizing axial mode; 0 for test-field quantities.
    pub m_star: u32,
    /// Eigensolver residual; 0 for test-field quantities.
    pub residual: f64,
}

/// A point that failed, kept for the report.
#[derive(Debug, Clone)]
pub struct PointFailure {
    pub h: f64,
    pub message: String,
}

/// Quantity values over the thickness grid, with per-point failures kept
/// aside rather than aborting the sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub geometry: String,
    pub quantity: Quantity,
    pub points: Vec<SweepPoint>,
    pub failures: Vec<PointFailure>,
}

impl SweepResult {
    /// CSV with header `h,value,m_star,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,value,m_star,residual\n");
        for pt in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                pt.h, pt.value, pt.m_star, pt.residual
            ));
        }
        out
    }

    /// Copy with point `i` removed, for leave-one-out stability checks.
    pub fn without_point(&self, i: usize) -> SweepResult {
        let mut out = self.clone();
        out.points.remove(i);
        out
    }
}

fn eval_point(spec: &SweepSpec, cs: &CrossSection, h: f64) -> Result<SweepPoint> {
    let cfg = ShellConfig::new(h, spec.length, spec.e_mod, spec.nu)?;
    let ntheta = spec
        .ntheta
        .unwrap_or_else(|| solver_ntheta(&spec.geometry, h));
    let scan_point = |outcome: crate::scan::ScanOutcome| SweepPoint {
        h,
        value: outcome.value,
        m_star: outcome.m_star,
        residual: outcome.eigen.residual,
    };
    let quotients = |a: &crate::ansatz::AnsatzField| evaluate_ansatz_quotients(a, cs, &cfg);
    let point = match spec.quantity {
        Quantity::BucklingLoad => scan_point(buckling_load(
            cs, &cfg, spec.space, spec.nt, ntheta, spec.m_max,
        )?),
        Quantity::KornGrad => scan_point(korn_constant(
            cs,
            &cfg,
            spec.space,
            spec.nt,
            ntheta,
            DenomKind::Grad,
            spec.m_max,
        )?),
        Quantity::KornCol3 => scan_point(korn_constant(
            cs,
            &cfg,
            spec.space,
            spec.nt,
            ntheta,
            DenomKind::Col3,
            spec.m_max,
        )?),
        Quantity::AnsatzKirchhoff { center } => {
            let a = kirchhoff_on(&cfg, cs.p, center)?;
            SweepPoint {
                h,
                value: quotients(&a)?.korn_col3,
                m_star: 0,
                residual: 0.0,
            }
        }
        Quantity::AnsatzLocalized { theta1, beta } => {
            let a = localized_ansatz(cs, &cfg, theta1, beta)?;
            SweepPoint {
                h,
                value: quotients(&a)?.korn_col3,
                m_star: 0,
                residual: 0.0,
            }
        }
        Quantity::AnsatzLinearizedT { theta1 } => {
            let a = linearized_t_ansatz(cs, &cfg, theta1)?;
            SweepPoint {
                h,
                value: quotients(&a)?.korn_grad,
                m_star: 0,
                residual: 0.0,
            }
        }
    };
    if !(point.value > 0.0) {
        return Err(Error::ZeroDenominator { value: point.value });
    }
    Ok(point)
}

/// Run every point of the sweep, concurrently when `jobs > 1`.
///
/// The geometry is resolved before any solve, so a bad id fails fast.
/// Individual point failures are recorded in the result; only a sweep with
/// no surviving points is an error.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let cs = build_geometry(&spec.geometry, spec.geometry_n)?;
    run_sweep_on(spec, &cs)
}

/// As [`run_sweep`] on an externally supplied cross-section; `spec.geometry`
/// is then only a label (and the angular-resolution policy key).
pub fn run_sweep_on(spec: &SweepSpec, cs: &CrossSection) -> Result<SweepResult> {
    if spec.h_list.is_empty() {
        return Err(Error::Config("sweep has an empty h list".into()));
    }
    for w in spec.h_list.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config(format!(
                "h list must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !(*spec.h_list.last().unwrap() > 0.0) {
        return Err(Error::Config("h list must be positive".into()));
    }

    let jobs = spec.jobs.max(1).min(spec.h_list.len());
    let mut slots: Vec<Option<std::result::Result<SweepPoint, String>>> =
        vec![None; spec.h_list.len()];
    if jobs == 1 {
        for (i, &h) in spec.h_list.iter().enumerate() {
            slots[i] = Some(eval_point(spec, &cs, h).map_err(|e| e.to_string()));
        }
    } else {
        let cs_ref = cs;
        let computed: Vec<Vec<(usize, std::result::Result<SweepPoint, String>)>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..jobs)
                    .map(|j| {
                        scope.spawn(move || {
                            spec.h_list
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| i % jobs == j)
                                .map(|(i, &h)| {
                                    (i, eval_point(spec, cs_ref, h).map_err(|e| e.to_string()))
                                })
                                .collect()
                        })
                    })
                    .collect();
                handles.into_iter().map(|t| t.join().unwrap()).collect()
            });
        for chunk in computed {
            for (i, r) in chunk {
                slots[i] = Some(r);
            }
        }
    }

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.expect("every slot filled") {
            Ok(pt) => points.push(pt),
            Err(message) => failures.push(PointFailure {
                h: spec.h_list[i],
                message,
            }),
        }
    }
    if points.is_empty() {
        return Err(Error::AllPointsFailed {
            last: failures
                .last()
                .map(|f| f.message.clone())
                .unwrap_or_default(),
        });
    }
    Ok(SweepResult {
        geometry: spec.geometry.clone(),
        quantity: spec.quantity,
        points,
        failures,
    })
}

/// Least-squares power law value ≈ exp(intercept)·h^alpha.
#[derive(Debug, Clone)]
pub struct ExponentFit {
    pub alpha: f64,
    /// Intercept of the fit in log space (natural log).
    pub intercept: f64,
    pub r2: f64,
    /// log value − fitted log value, per point.
    pub residuals: Vec<f64>,
}

/// Fit log value against log h. Exact power laws are recovered to rounding.
pub fn fit_exponent(s: &SweepResult) -> Result<ExponentFit> {
    let n = s.points.len();
    if n < 3 {
        return Err(Error::TooFewPoints { got: n });
    }
    let xs: Vec<f64> = s.points.iter().map(|p| p.h.ln()).collect();
    let ys: Vec<f64> = s.points.iter().map(|p| p.value.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n as f64;
    let ybar = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let alpha = sxy / sxx;
    let intercept = ybar - alpha * xbar;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + alpha * x))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ExponentFit {
        alpha,
        intercept,
        r2,
        residuals,
    })
}

/// Outcome of comparing a fitted exponent against a theorem band.
#[derive(Debug, Clone, Copy)]
pub struct BracketVerdict {
    pub alpha: f64,
    pub lo: f64,
    pub hi: f64,
    pub slack: f64,
    pub pass: bool,
    /// Largest constant with value ≥ c1·h^hi over all points.
    pub c1: f64,
    /// Smallest constant with value ≤ c2·h^lo over all points.
    pub c2: f64,
}

/// Pass iff alpha ∈ [lo − slack, hi + slack], with the envelope constants of
/// the two-sided bound c1·h^hi ≤ value ≤ c2·h^lo fitted from the points.
pub fn bracket_check(
    s: &SweepResult,
    f: &ExponentFit,
    lo: f64,
    hi: f64,
    slack: f64,
) -> BracketVerdict {
    assert!(lo <= hi, "bracket bounds out of order");
    let c1 = s
        .points
        .iter()
        .map(|p| p.value / p.h.powf(hi))
        .fold(f64::INFINITY, f64::min);
    let c2 = s
        .points
        .iter()
        .map(|p| p.value / p.h.powf(lo))
        .fold(0.0_f64, f64::max);
    BracketVerdict {
        alpha: f.alpha,
        lo,
        hi,
        slack,
        pass: f.alpha >= lo - slack && f.alpha <= hi + slack,
        c1,
        c2,
    }
}

/// Fit summary JSON with keys `alpha, intercept, r2, c1, c2, verdict`.
pub fn summary_json(f: &ExponentFit, v: &BracketVerdict) -> String {
    format!(
        "{{\"alpha\":{},\"intercept\":{},\"r2\":{},\"c1\":{},\"c2\":{},\"verdict\":\"{}\"}}",
        f.alpha,
        f.intercept,
        f.r2,
        v.c1,
        v.c2,
        if v.pass { "pass" } else { "fail" }
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(values: &[(f64, f64)]) -> SweepResult {
        SweepResult {
            geometry: "circle".into(),
            quantity: Quantity::BucklingLoad,
            points: values
                .iter()
                .map(|&(h, value)| SweepPoint {
                    h,
                    value,
                    m_star: 1,
                    residual: 0.0,
                })
                .collect(),
            failures: Vec::new(),
        }
    }

    fn power_law(c: f64, alpha: f64) -> SweepResult {
        let pts: Vec<(f64, f64)> = default_h_grid()
            .iter()
            .map(|&h| (h, c * h.powf(alpha)))
            .collect();
        synthetic(&pts)
    }

    #[test]
    fn exact_power_laws_are_recovered() {
        let fit = fit_exponent(&power_law(1.0, 1.0)).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);

        let fit = fit_exponent(&power_law(3.0, 1.5)).unwrap();
        assert!((fit.alpha - 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0_f64.ln()).abs() < 1e-12);
        for r in &fit.residuals {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn fit_requires_three_points() {
        let s = synthetic(&[(0.04, 0.04), (0.02, 0.02)]);
        assert!(matches!(
            fit_exponent(&s),
            Err(Error::TooFewPoints { got: 2 })
        ));
    }

    #[test]
    fn fit_is_deterministic() {
        let s = power_law(2.7, 1.613);
        let a = fit_exponent(&s).unwrap();
        let b = fit_exponent(&s).unwrap();
        assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
        assert_eq!(a.intercept.to_bits(), b.intercept.to_bits());
    }

    #[test]
    fn one_percent_noise_leaves_the_exponent_near_eight_fifths() {
        let mut state = 0x5eed_u64;
        let mut unit = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let pts: Vec<(f64, f64)> = default_h_grid()
            .iter()
            .map(|&h| (h, h.powf(1.6) * (1.0 + 0.01 * unit())))
            .collect();
        let fit = fit_exponent(&synthetic(&pts)).unwrap();
        assert!(
            (1.55..=1.65).contains(&fit.alpha),
            "alpha drifted to {}",
            fit.alpha
        );
    }

    #[test]
    fn leave_one_out_is_stable_on_exact_data() {
        let s = power_law(0.8, 1.6);
        let full = fit_exponent(&s).unwrap().alpha;
        for i in 0..s.points.len() {
            let alpha = fit_exponent(&s.without_point(i)).unwrap().alpha;
            assert!((alpha - full).abs() < 1e-12);
        }
    }

    #[test]
    fn bracket_verdicts_and_envelope_constants() {
        let s = power_law(1.0, 1.55);
        let fit = fit_exponent(&s).unwrap();
        assert!((fit.alpha - 1.55).abs() < 1e-12);
        let v = bracket_check(&s, &fit, 1.5, 1.6, 0.1);
        assert!(v.pass);
        // value = h^{1.55}: both envelope ratios are extremal at the largest h
        let h_big = 0.04_f64;
        let h_small = 0.0025_f64;
        assert!((v.c1 - h_big.powf(1.55 - 1.6)).abs() / v.c1 < 1e-12);
        assert!((v.c2 - h_big.powf(1.55 - 1.5)).abs() / v.c2 < 1e-12);
        assert!(v.c1 > 0.0 && v.c2.is_finite());
        assert!(h_small.powf(1.55 - 1.6) > v.c1);

        let shallow = power_law(1.0, 1.0);
        let fit = fit_exponent(&shallow).unwrap();
        assert!(!bracket_check(&shallow, &fit, 1.5, 1.6, 0.1).pass);
    }

    #[test]
    fn summary_json_has_the_agreed_keys() {
        let s = power_law(3.0, 1.5);
        let fit = fit_exponent(&s).unwrap();
        let v = bracket_check(&s, &fit, 1.5, 1.6, 0.1);
        let json = summary_json(&fit, &v);
        for key in ["alpha", "intercept", "r2", "c1", "c2", "verdict"] {
            assert!(json.contains(&format!("\"{key}\":")), "missing {key}");
        }
        assert!(json.contains("\"verdict\":\"pass\""));
        assert!(json.starts_with('{') && json.ends_with('}'));
    }

    #[test]
    fn csv_round_trips_through_parse() {
        let s = synthetic(&[(0.04, 0.123), (0.02, 0.061)]);
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("h,value,m_star,residual"));
        let fields: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|f| f.parse().unwrap())
            .collect();
        assert_eq!(fields, vec![0.04, 0.123, 1.0, 0.0]);
    }

    #[test]
    fn unknown_geometry_fails_before_any_solve() {
        let spec = SweepSpec::new("hexagon", Quantity::BucklingLoad);
        match run_sweep(&spec) {
            Err(Error::Config(msg)) => assert!(msg.contains("circle")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn bad_h_lists_are_rejected() {
        let mut spec = SweepSpec::new("circle", Quantity::BucklingLoad);
        spec.h_list = vec![0.01, 0.02];
        assert!(matches!(run_sweep(&spec), Err(Error::Config(_))));
        spec.h_list = vec![];
        assert!(matches!(run_sweep(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn point_failures_are_recorded_not_fatal() {
        // h = 1.5 makes the localized support taller than the cylinder
        let mut spec = SweepSpec::new(
            "flat-spot",
            Quantity::AnsatzLocalized {
                theta1: 0.0,
                beta: 2,
            },
        );
        spec.h_list = vec![1.5, 4e-3, 2e-3];
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.points.len(), 2);
        assert_eq!(result.failures.len(), 1);
        assert_eq!(result.failures[0].h, 1.5);
        assert!(result.failures[0].message.contains("support"));
        assert!(result.points.iter().all(|p| p.value > 0.0));

        spec.h_list = vec![1.5];
        assert!(matches!(
            run_sweep(&spec),
            Err(Error::AllPointsFailed { .. })
        ));
    }

    #[test]
    fn kirchhoff_sweep_has_the_expected_shape() {
        let mut spec = SweepSpec::new(
            "circle",
            Quantity::AnsatzKirchhoff {
                center: std::f64::consts::PI,
            },
        );
        spec.jobs = 2;
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.points.len(), 3);
        for pt in &result.points {
            assert!(pt.value > 0.0);
            assert_eq!(pt.m_star, 0);
        }
        // the quotient shrinks with the shell: first-order zero in h
        for w in result.points.windows(2) {
            assert!(w[1].value < w[0].value);
        }
        let fit = fit_exponent(&result).unwrap();
        assert!(
            (fit.alpha - 1.0).abs() < 0.05,
            "kirchhoff z-column exponent {}",
            fit.alpha
        );
    }
}
