//! Closed convex cross-section curves synthesized from prescribed curvature.
//!
//! A curve is recovered from its curvature k(θ) (θ = arc length, period p) by
//! integrating the tangent angle ψ(θ) = ∫₀^θ k and then the unit tangent
//! (cos ψ, sin ψ). A sampled curvature profile generally fails to close the
//! curve exactly, so synthesis applies a two-parameter multiplicative
//! correction k ← k·(1 + b₁ cos ψ + b₂ sin ψ) and solves for closure by a
//! damped Newton iteration. The multiplicative family keeps k ≥ 0, keeps the
//! locations and orders of curvature zeros, and the total turning ∫k = 2π is
//! re-imposed exactly after every step.

use crate::error::{Error, Result};
use crate::fourier;
use serde::{Deserialize, Serialize};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// How a curvature profile was built; sampled data is the source of truth,
/// the tag records the analytic origin where one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileForm {
    /// k ≡ 2π/p (a circle).
    Constant,
    /// Finite cosine/sine series around the circle value.
    TrigSeries,
    /// (1 − cos(2πnθ/p))^{β/2} normalized; n zeros of order β.
    FlatSpot { zeros: u32, beta: u32 },
    /// Imported or otherwise unstructured samples.
    Sampled,
}

/// Curvature of a closed convex curve on a uniform θ grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureProfile {
    /// Period in arc length.
    pub p: f64,
    /// Samples k(j·p/N), j = 0..N.
    pub samples: Vec<f64>,
    pub form: ProfileForm,
}

impl CurvatureProfile {
    /// Constant curvature 2π/p: the circle of circumference p.
    pub fn circle(p: f64, n: usize) -> Self {
        CurvatureProfile {
            p,
            samples: vec![TAU / p; n],
            form: ProfileForm::Constant,
        }
    }

    /// k(θ) = (2π/p)·(1 + Σ amp_q·cos(q·2πθ/p)) for the given harmonics.
    pub fn cosine_series(p: f64, n: usize, harmonics: &[(u32, f64)]) -> Self {
        let samples = (0..n)
            .map(|j| {
                let theta = j as f64 * p / n as f64;
                let mut k = 1.0;
                for &(q, amp) in harmonics {
                    k += amp * (q as f64 * TAU * theta / p).cos();
                }
                k * TAU / p
            })
            .collect();
        CurvatureProfile {
            p,
            samples,
            form: ProfileForm::TrigSeries,
        }
    }

    /// Curvature with `zeros` equally spaced zeros of quadratic order:
    /// k ∝ 1 − cos(2π·zeros·θ/p), normalized to total turning 2π.
    pub fn flat_spot(p: f64, n: usize, zeros: u32) -> Self {
        Self::flat_spot_of_order(p, n, zeros, 2)
    }

    /// Curvature with zeros of even order β: k ∝ (1 − cos(2π·zeros·θ/p))^{β/2}.
    pub fn flat_spot_of_order(p: f64, n: usize, zeros: u32, beta: u32) -> Self {
        assert!(beta >= 2 && beta % 2 == 0, "zero order must be even");
        let raw: Vec<f64> = (0..n)
            .map(|j| {
                let theta = j as f64 * p / n as f64;
                (1.0 - (zeros as f64 * TAU * theta / p).cos()).powi(beta as i32 / 2)
            })
            .collect();
        let mean = fourier::mean(&raw);
        let scale = TAU / (p * mean);
        CurvatureProfile {
            p,
            samples: raw.iter().map(|&k| k * scale).collect(),
            form: ProfileForm::FlatSpot { zeros, beta },
        }
    }

    /// Arbitrary nonnegative samples; normalized to total turning 2π.
    pub fn from_samples(p: f64, samples: Vec<f64>) -> Self {
        let mean = fourier::mean(&samples);
        let scale = TAU / (p * mean);
        CurvatureProfile {
            p,
            samples: samples.iter().map(|&k| k * scale).collect(),
            form: ProfileForm::Sampled,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total turning ∫₀^p k dθ by the periodic trapezoid rule.
    pub fn total_turning(&self) -> f64 {
        fourier::mean(&self.samples) * self.p
    }

    /// Check nonnegativity and total turning; call before synthesis.
    pub fn validate(&self) -> Result<()> {
        if let Some((i, &k)) = self
            .samples
            .iter()
            .enumerate()
            .find(|&(_, &k)| k < 0.0)
        {
            return Err(Error::NegativeCurvature { k_min: k, index: i });
        }
        let turning = self.total_turning();
        if (turning - TAU).abs() > 1e-10 {
            return Err(Error::Config(format!(
                "total turning {turning} differs from 2π; profile does not close a simple curve"
            )));
        }
        Ok(())
    }
}

/// A synthesized closed curve: positions, frame, and (corrected) curvature on
/// the same uniform grid as the input profile.
#[derive(Debug, Clone)]
pub struct CrossSection {
    pub p: f64,
    /// α(θ_j) in the plane.
    pub alpha: Vec<[f64; 2]>,
    /// Unit tangent e_θ = α'.
    pub e_theta: Vec<[f64; 2]>,
    /// Outward unit normal e_t, with α'' = −k e_t.
    pub e_t: Vec<[f64; 2]>,
    /// Curvature samples after closure correction.
    pub k: Vec<f64>,
    /// ‖α(p) − α(0)‖ of the final curve.
    pub closure_residual: f64,
    /// Relative sup-norm change applied to the curvature by the correction.
    pub correction_magnitude: f64,
}

impl CrossSection {
    pub fn n_theta(&self) -> usize {
        self.k.len()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.p / self.k.len() as f64
    }

    /// Curvature and derivatives off the grid via the trigonometric interpolant.
    pub fn curvature_series(&self) -> fourier::TrigSeries {
        fourier::TrigSeries::fit(&self.k, self.p)
    }

    /// Curvature samples on a coarser grid whose size divides the native one.
    pub fn curvature_on(&self, n_coarse: usize) -> Vec<f64> {
        fourier::subsample(&self.k, n_coarse)
    }
}

/// Closure defect F(k) = α(p) − α(0) = (∫cos ψ, ∫sin ψ) and the tangent angle.
fn closure_defect(k: &[f64], p: f64) -> ([f64; 2], Vec<f64>) {
    let psi = fourier::antiderivative(k, p);
    let cosv: Vec<f64> = psi.iter().map(|&x| x.cos()).collect();
    let sinv: Vec<f64> = psi.iter().map(|&x| x.sin()).collect();
    let f = [fourier::mean(&cosv) * p, fourier::mean(&sinv) * p];
    (f, psi)
}

fn renormalize_turning(k: &mut [f64], p: f64) {
    let turning = fourier::mean(k) * p;
    let scale = TAU / turning;
    for v in k.iter_mut() {
        *v *= scale;
    }
}

/// Synthesize the closed curve for a curvature profile.
///
/// The returned curvature is the input minimally corrected for closure; the
/// correction magnitude is reported on the result. Fails with [`Error::NonClosable`]
/// if Newton does not converge and [`Error::NegativeCurvature`] if the
/// correction factor loses positivity.
pub fn synthesize_curve(profile: &CurvatureProfile, tol: f64) -> Result<CrossSection> {
    profile.validate()?;
    let p = profile.p;
    let n = profile.len();
    let w = p / n as f64;

    let mut k = profile.samples.clone();
    renormalize_turning(&mut k, p);
    let k_input = k.clone();

    let (mut f, mut psi) = closure_defect(&k, p);
    let mut res = f[0].hypot(f[1]);
    let max_iter = 50;
    let mut converged = res < tol;

    for _ in 0..max_iter {
        if converged {
            break;
        }
        let cosv: Vec<f64> = psi.iter().map(|&x| x.cos()).collect();
        let sinv: Vec<f64> = psi.iter().map(|&x| x.sin()).collect();

        // Jacobian of F w.r.t. (b₁, b₂): perturbing k by k·cos ψ or k·sin ψ
        // perturbs ψ by the antiderivative of that direction.
        let mut jac = [[0.0; 2]; 2];
        for (col, dir) in [&cosv, &sinv].into_iter().enumerate() {
            let g: Vec<f64> = k.iter().zip(dir).map(|(&ki, &di)| ki * di).collect();
            let dpsi = fourier::antiderivative(&g, p);
            jac[0][col] = -sinv.iter().zip(&dpsi).map(|(&s, &d)| s * d).sum::<f64>() * w;
            jac[1][col] = cosv.iter().zip(&dpsi).map(|(&c, &d)| c * d).sum::<f64>() * w;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::NonClosable {
                iterations: max_iter,
                residual: res,
            });
        }
        let b = [
            (-f[0] * jac[1][1] + f[1] * jac[0][1]) / det,
            (-f[1] * jac[0][0] + f[0] * jac[1][0]) / det,
        ];

        // Keep the multiplicative factor positive: cap the step amplitude.
        let amp = b[0].hypot(b[1]);
        let mut step = if amp > 0.9 { 0.9 / amp } else { 1.0 };

        let mut accepted = false;
        for _ in 0..30 {
            let mut kn: Vec<f64> = k
                .iter()
                .zip(cosv.iter().zip(&sinv))
                .map(|(&ki, (&c, &s))| ki * (1.0 + step * (b[0] * c + b[1] * s)))
                .collect();
            renormalize_turning(&mut kn, p);
            let (fn_, psin) = closure_defect(&kn, p);
            let resn = fn_[0].hypot(fn_[1]);
            if resn < res * (1.0 - 0.25 * step) || resn < tol {
                k = kn;
                psi = psin;
                f = fn_;
                res = resn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        converged = res < tol;
    }

    if !converged {
        return Err(Error::NonClosable {
            iterations: max_iter,
            residual: res,
        });
    }
    if let Some((i, &ki)) = k.iter().enumerate().find(|&(_, &ki)| ki < 0.0) {
        return Err(Error::NegativeCurvature { k_min: ki, index: i });
    }

    let cosv: Vec<f64> = psi.iter().map(|&x| x.cos()).collect();
    let sinv: Vec<f64> = psi.iter().map(|&x| x.sin()).collect();
    let ax = fourier::antiderivative(&cosv, p);
    let ay = fourier::antiderivative(&sinv, p);

    let k_max_in = k_input.iter().cloned().fold(0.0_f64, f64::max);
    let correction = k
        .iter()
        .zip(&k_input)
        .map(|(&a, &b)| (a - b).abs())
        .fold(0.0_f64, f64::max)
        / k_max_in;

    Ok(CrossSection {
        p,
        alpha: ax.iter().zip(&ay).map(|(&x, &y)| [x, y]).collect(),
        e_theta: cosv.iter().zip(&sinv).map(|(&c, &s)| [c, s]).collect(),
        e_t: cosv.iter().zip(&sinv).map(|(&c, &s)| [s, -c]).collect(),
        k,
        closure_residual: res,
        correction_magnitude: correction,
    })
}

/// ‖α(p) − α(0)‖ recomputed from the tangent samples.
pub fn closure_residual(cs: &CrossSection) -> f64 {
    let cosv: Vec<f64> = cs.e_theta.iter().map(|e| e[0]).collect();
    let sinv: Vec<f64> = cs.e_theta.iter().map(|e| e[1]).collect();
    let f = [
        fourier::mean(&cosv) * cs.p,
        fourier::mean(&sinv) * cs.p,
    ];
    f[0].hypot(f[1])
}

/// A curvature zero refined by a local quadratic fit k ≈ c·(θ − θ₀)².
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurvatureZero {
    pub theta: f64,
    /// Quadratic growth coefficient c of the fit.
    pub c: f64,
}

/// Extremes and zeros of the sampled curvature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureExtrema {
    pub k_min: f64,
    pub k_max: f64,
    pub zeros: Vec<CurvatureZero>,
}

/// Locate curvature extremes; grid samples below `zero_threshold` are grouped
/// into zeros and each zero is refined by fitting a quadratic through the
/// neighborhood minimum and its two neighbors.
pub fn curvature_extrema(cs: &CrossSection, zero_threshold: f64) -> CurvatureExtrema {
    let n = cs.k.len();
    let k_min = cs.k.iter().cloned().fold(f64::INFINITY, f64::min);
    let k_max = cs.k.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut zeros = Vec::new();
    let mut in_zero = vec![false; n];
    for j in 0..n {
        in_zero[j] = cs.k[j] < zero_threshold;
    }
    let mut visited = vec![false; n];
    for j in 0..n {
        if !in_zero[j] || visited[j] {
            continue;
        }
        // Collect the wrapped run of below-threshold samples containing j.
        let mut lo = j;
        while in_zero[(lo + n - 1) % n] && (lo + n - 1) % n != j {
            lo = (lo + n - 1) % n;
        }
        let mut idx = lo;
        let mut best = lo;
        loop {
            visited[idx] = true;
            if cs.k[idx] < cs.k[best] {
                best = idx;
            }
            let next = (idx + 1) % n;
            if !in_zero[next] || next == lo {
                break;
            }
            idx = next;
        }
        zeros.push(refine_zero(cs, best));
    }
    zeros.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    CurvatureExtrema { k_min, k_max, zeros }
}

fn refine_zero(cs: &CrossSection, j: usize) -> CurvatureZero {
    let n = cs.k.len();
    let dth = cs.p / n as f64;
    let km = cs.k[(j + n - 1) % n];
    let k0 = cs.k[j];
    let kp = cs.k[(j + 1) % n];
    // Parabola through the three samples; vertex gives θ₀ and the curvature
    // of the parabola gives c.
    let half_dd = 0.5 * (kp - 2.0 * k0 + km);
    if half_dd <= 0.0 {
        return CurvatureZero {
            theta: cs.theta(j),
            c: 0.0,
        };
    }
    let slope = 0.5 * (kp - km);
    let offset = -slope / (2.0 * half_dd);
    CurvatureZero {
        theta: cs.theta(j) + offset * dth,
        c: half_dd / (dth * dth),
    }
}

/// Write the curve as CSV rows `theta,x,y,k`.
pub fn to_csv(cs: &CrossSection) -> String {
    let mut out = String::from("theta,x,y,k\n");
    for j in 0..cs.n_theta() {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e}\n",
            cs.theta(j),
            cs.alpha[j][0],
            cs.alpha[j][1],
            cs.k[j]
        ));
    }
    out
}

/// Parse a curvature profile from curve CSV (`theta,x,y,k` with header).
/// Positions are ignored; the curve is re-synthesized from curvature.
pub fn profile_from_csv(text: &str) -> Result<CurvatureProfile> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "theta,x,y,k" => {}
        other => {
            return Err(Error::Config(format!(
                "expected CSV header 'theta,x,y,k', got {other:?}"
            )));
        }
    }
    let mut thetas = Vec::new();
    let mut ks = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Config(format!(
                "line {}: expected 4 columns, got {}",
                ln + 2,
                cols.len()
            )));
        }
        let theta: f64 = cols[0]
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("line {}: bad theta: {e}", ln + 2)))?;
        let k: f64 = cols[3]
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("line {}: bad k: {e}", ln + 2)))?;
        thetas.push(theta);
        ks.push(k);
    }
    if ks.len() < 8 {
        return Err(Error::Config(format!(
            "need at least 8 samples, got {}",
            ks.len()
        )));
    }
    let n = ks.len();
    let p = thetas[n - 1] * n as f64 / (n as f64 - 1.0);
    Ok(CurvatureProfile::from_samples(p, ks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_synthesizes_exactly() {
        let profile = CurvatureProfile::circle(TAU, 256);
        let cs = synthesize_curve(&profile, 1e-11).unwrap();
        assert!(cs.closure_residual < 1e-12);
        for j in 0..256 {
            assert!((cs.k[j] - 1.0).abs() < 1e-10);
            // center at (alpha - e_t) should be constant = (0, -1) + ... :
            // for the unit circle started at ψ=0, α(θ) = (sin θ, 1−cos θ) − (0,0)
            let theta = cs.theta(j);
            assert!((cs.alpha[j][0] - theta.sin()).abs() < 1e-12);
            assert!((cs.alpha[j][1] - (1.0 - theta.cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn oval_closes_after_correction() {
        let profile = CurvatureProfile::cosine_series(TAU, 256, &[(2, 0.3)]);
        let cs = synthesize_curve(&profile, 1e-11).unwrap();
        assert!(cs.closure_residual < 1e-11);
        let ex = curvature_extrema(&cs, 1e-8);
        assert!((ex.k_min - 0.7).abs() < 1e-6);
        assert!((ex.k_max - 1.3).abs() < 1e-6);
        assert!(ex.zeros.is_empty());
    }

    #[test]
    fn flat_spot_keeps_one_quadratic_zero() {
        let profile = CurvatureProfile::flat_spot(TAU, 512, 1);
        let cs = synthesize_curve(&profile, 1e-11).unwrap();
        let ex = curvature_extrema(&cs, 1e-8);
        assert_eq!(ex.zeros.len(), 1);
        let z = ex.zeros[0];
        assert!(z.theta.abs() < 1e-6 || (z.theta - TAU).abs() < 1e-6);
        assert!(z.c > 0.0);
        // quadratic envelope c|θ|² ≤ k ≤ c⁻¹|θ|² near the zero, checked on
        // |θ| ≤ 0.5 with the fitted c relaxed by 10% for grid effects
        let c = z.c;
        for j in 0..cs.n_theta() {
            let mut th = cs.theta(j) - z.theta;
            if th > cs.p / 2.0 {
                th -= cs.p;
            }
            if th.abs() > 0.5 || th.abs() < 1e-3 {
                continue;
            }
            let k = cs.k[j];
            assert!(k >= 0.9 * c.min(1.0 / c) * th * th * 0.5);
            assert!(k <= 1.1 * c.max(1.0 / c) * th * th * 2.0);
        }
    }

    #[test]
    fn quartic_zero_builder_closes() {
        let profile = CurvatureProfile::flat_spot_of_order(TAU, 512, 1, 4);
        let cs = synthesize_curve(&profile, 1e-11).unwrap();
        assert!(cs.closure_residual < 1e-11);
        let ex = curvature_extrema(&cs, 1e-8);
        assert!(!ex.zeros.is_empty());
    }

    #[test]
    fn asymmetric_profile_closes() {
        let samples: Vec<f64> = (0..256)
            .map(|j| {
                let t = j as f64 * TAU / 256.0;
                (0.6 * t.cos() + 0.3 * (2.0 * t).sin()).exp()
            })
            .collect();
        let profile = CurvatureProfile::from_samples(TAU, samples);
        let cs = synthesize_curve(&profile, 1e-10).unwrap();
        assert!(cs.closure_residual < 1e-10);
        assert!((profile.total_turning() - TAU).abs() < 1e-10);
    }

    #[test]
    fn unit_tangents_and_total_turning() {
        let profile = CurvatureProfile::cosine_series(TAU, 128, &[(2, 0.3), (3, 0.05)]);
        let cs = synthesize_curve(&profile, 1e-10).unwrap();
        for e in &cs.e_theta {
            assert!((e[0].hypot(e[1]) - 1.0).abs() < 1e-10);
        }
        let turning = fourier::mean(&cs.k) * cs.p;
        assert!((turning - TAU).abs() < 1e-10);
        assert!(closure_residual(&cs) < 1e-10);
    }

    #[test]
    fn tangent_angle_monotone_for_convex_curve() {
        let profile = CurvatureProfile::flat_spot(TAU, 256, 2);
        let cs = synthesize_curve(&profile, 1e-10).unwrap();
        let psi = fourier::antiderivative(&cs.k, cs.p);
        for w in psi.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn curvature_recovered_from_positions_converges_quadratically() {
        // second-order central differences of α recover k with O(Δθ²) error;
        // halving the spacing must cut the error by ≥ 3.5×. The curve closes
        // to 1e-12 so periodic indexing of α is safe.
        let err_at = |n: usize| -> f64 {
            let profile = CurvatureProfile::cosine_series(TAU, n, &[(2, 0.3)]);
            let cs = synthesize_curve(&profile, 1e-12).unwrap();
            let dth = cs.p / n as f64;
            let mut emax = 0.0_f64;
            for j in 0..n {
                let am = cs.alpha[(j + n - 1) % n];
                let a0 = cs.alpha[j];
                let ap = cs.alpha[(j + 1) % n];
                let dd = [
                    ap[0] + am[0] - 2.0 * a0[0],
                    ap[1] + am[1] - 2.0 * a0[1],
                ];
                let k_fd = dd[0].hypot(dd[1]) / (dth * dth);
                emax = emax.max((k_fd - cs.k[j]).abs());
            }
            emax
        };
        let e1 = err_at(64);
        let e2 = err_at(128);
        assert!(e1 / e2 >= 3.5, "error ratio {} too small", e1 / e2);
    }

    #[test]
    fn non_closable_when_tolerance_unreachable() {
        let profile = CurvatureProfile::cosine_series(TAU, 64, &[(2, 0.3)]);
        let err = synthesize_curve(&profile, 1e-30).unwrap_err();
        assert!(matches!(err, Error::NonClosable { .. }));
    }

    #[test]
    fn csv_roundtrip() {
        let profile = CurvatureProfile::cosine_series(TAU, 128, &[(2, 0.3)]);
        let cs = synthesize_curve(&profile, 1e-10).unwrap();
        let text = to_csv(&cs);
        assert_eq!(text.lines().count(), 129);
        let back = profile_from_csv(&text).unwrap();
        assert_eq!(back.len(), 128);
        assert!((back.p - TAU).abs() < 1e-12);
        for (a, b) in back.samples.iter().zip(&cs.k) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_curvature_profile() {
        let profile = CurvatureProfile {
            p: TAU,
            samples: vec![1.0, -0.1, 1.0, 1.0],
            form: ProfileForm::Sampled,
        };
        assert!(matches!(
            profile.validate(),
            Err(Error::NegativeCurvature { .. })
        ));
    }
}
