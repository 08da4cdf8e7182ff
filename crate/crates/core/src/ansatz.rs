//! Explicit test fields whose quotients witness the scaling upper bounds.
//!
//! Three families share a polynomial bump envelope. The Kirchhoff-type field
//! pairs a normal bump with tangential corrections linear in t; the localized
//! variant is the same shape concentrated at a curvature zero with the scale
//! δ = h^{1/(β+2)} tuned to the zero's order β; the linearized-t field keeps
//! the full construction with curvature jets up to third order and a bump
//! spanning the whole axial length.
//!
//! Unlike the modal machinery, these are genuine three-dimensional fields in
//! (t, θ, z); their quotients are evaluated by tensor-product quadrature over
//! the support with fourth-order finite-difference gradients.

use crate::error::{Error, Result};
use crate::fourier::TrigSeries;
use crate::geometry::CrossSection;
use crate::shell::ShellConfig;

/// 1D bump w(s) = (1−s²)⁴ and derivatives up to order 4, zero outside [−1,1].
fn w1d(s: f64, d: u32) -> f64 {
    if s.abs() > 1.0 {
        return 0.0;
    }
    let u = 1.0 - s * s;
    match d {
        0 => u.powi(4),
        1 => -8.0 * s * u.powi(3),
        2 => u * u * (56.0 * s * s - 8.0),
        3 => u * (-336.0 * s.powi(3) + 144.0 * s),
        4 => 1680.0 * s.powi(4) - 1440.0 * s * s + 144.0,
        _ => panic!("bump derivative order {d} not implemented"),
    }
}

/// Separable polynomial bump W(x, y) = (1−x²)⁴(1−y²)⁴ on [−1,1]².
///
/// C³ across the support boundary with closed-form partials; the recorded
/// sup-norms bound every derivative the field constructions use.
#[derive(Debug, Clone)]
pub struct BumpFunction {
    pub tag: &'static str,
    /// Support rectangle, per axis.
    pub support: [(f64, f64); 2],
    sup_norms: [[f64; 4]; 4],
}

impl BumpFunction {
    pub fn new() -> Self {
        let mut sup = [[0.0_f64; 4]; 4];
        let n = 2001;
        for (dx, row) in sup.iter_mut().enumerate() {
            for (dy, cell) in row.iter_mut().enumerate() {
                let mut mx = 0.0_f64;
                let mut my = 0.0_f64;
                for i in 0..n {
                    let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                    mx = mx.max(w1d(s, dx as u32).abs());
                    my = my.max(w1d(s, dy as u32).abs());
                }
                *cell = mx * my;
            }
        }
        BumpFunction {
            tag: "polynomial-bump",
            support: [(-1.0, 1.0), (-1.0, 1.0)],
            sup_norms: sup,
        }
    }

    /// ∂^dx_x ∂^dy_y W at (x, y); derivatives up to total order 3.
    pub fn eval(&self, x: f64, y: f64, dx: u32, dy: u32) -> f64 {
        assert!(dx + dy <= 3, "bump partials available up to order 3");
        w1d(x, dx) * w1d(y, dy)
    }

    /// Recorded sup-norm of the (dx, dy) partial over the support.
    pub fn sup_norm(&self, dx: u32, dy: u32) -> f64 {
        self.sup_norms[dx as usize][dy as usize]
    }
}

impl Default for BumpFunction {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzFamily {
    /// Normal bump with t-linear tangential corrections, δ = √h.
    Kirchhoff,
    /// Same shape at a curvature zero of order β, δ = h^{1/(β+2)}.
    Localized,
    /// Full construction with curvature jets, δ = h^{1/6}.
    LinearizedT,
}

/// Curvature and derivatives at one angle, with the guarded ratio k′²/k.
#[derive(Debug, Clone, Copy)]
pub struct JetValues {
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// k′²/k, continued by its series limit 2k″(θ₁) near the zero.
    pub r: f64,
    /// d/dθ of the guarded ratio, continued by 0 near the zero.
    pub rp: f64,
}

/// Half-width of the window around θ₁ where the ratio k′²/k switches to its
/// analytic limit.
pub const JET_GUARD: f64 = 1e-6;

/// One closed-form test field (φ_t, φ_θ, φ_z)(t, θ, z).
#[derive(Debug, Clone)]
pub struct AnsatzField {
    pub family: AnsatzFamily,
    pub h: f64,
    pub delta: f64,
    /// Order of the curvature zero the scaling targets; 0 for Kirchhoff.
    pub beta: u32,
    /// Overall factor; the quotients are invariant under it.
    pub amplitude: f64,
    /// (θ_c, z_c) of the bump.
    pub center: (f64, f64),
    pub theta_support: (f64, f64),
    pub z_support: (f64, f64),
    /// Cross-section period, for wrapped angular distances.
    pub period: f64,
    /// Axial length (the linearized-t z-envelope spans all of it).
    pub length: f64,
    /// Curvature series; present only for the linearized-t family.
    jet_series: Option<TrigSeries>,
}

fn wrap_centered(d: f64, p: f64) -> f64 {
    let mut r = d % p;
    if r < -p / 2.0 {
        r += p;
    } else if r >= p / 2.0 {
        r -= p;
    }
    r
}

impl AnsatzField {
    /// Same field with every component multiplied by c.
    pub fn scaled(&self, c: f64) -> AnsatzField {
        let mut out = self.clone();
        out.amplitude *= c;
        out
    }

    /// Curvature jet at θ, guarded near the zero point.
    pub fn jet_at(&self, theta: f64) -> Option<JetValues> {
        let series = self.jet_series.as_ref()?;
        let k = series.eval(theta, 0);
        let k1 = series.eval(theta, 1);
        let k2 = series.eval(theta, 2);
        let k3 = series.eval(theta, 3);
        let dist = wrap_centered(theta - self.center.0, self.period);
        let (r, rp) = if dist.abs() < JET_GUARD {
            (2.0 * series.eval(self.center.0, 2), 0.0)
        } else {
            let den = if k.abs() < 1e-300 { 1.0 } else { k };
            (
                k1 * k1 / den,
                (2.0 * k1 * k2 * k - k1.powi(3)) / (den * den),
            )
        };
        Some(JetValues {
            k,
            k1,
            k2,
            k3,
            r,
            rp,
        })
    }

    /// Component c ∈ {0: φ_t, 1: φ_θ, 2: φ_z} at (t, θ, z).
    pub fn eval(&self, c: usize, t: f64, theta: f64, z: f64) -> f64 {
        let jet = self.jet_at(theta);
        self.eval_with_jet(c, t, theta, z, jet.as_ref())
    }

    /// As [`eval`](Self::eval) with the curvature jet precomputed by the
    /// caller (quadrature loops reuse jets across t and z).
    pub fn eval_with_jet(
        &self,
        c: usize,
        t: f64,
        theta: f64,
        z: f64,
        jet: Option<&JetValues>,
    ) -> f64 {
        let a = self.amplitude;
        let d = self.delta;
        let x = wrap_centered(theta - self.center.0, self.period) / d;
        match self.family {
            AnsatzFamily::Kirchhoff | AnsatzFamily::Localized => {
                let y = (z - self.center.1) / d;
                match c {
                    0 => a * w1d(x, 0) * w1d(y, 0),
                    1 => -a * (t / d) * w1d(x, 1) * w1d(y, 0),
                    _ => -a * (t / d) * w1d(x, 0) * w1d(y, 1),
                }
            }
            AnsatzFamily::LinearizedT => {
                let y = 2.0 * z / self.length - 1.0;
                let yd = 2.0 / self.length;
                let j = jet.expect("linearized-t field carries a curvature series");
                let (k, k1, k2, k3, r, rp) = (j.k, j.k1, j.k2, j.k3, j.r, j.rp);
                let a00 = w1d(x, 0) * w1d(y, 0);
                let a10 = w1d(x, 1) * w1d(y, 0);
                let a20 = w1d(x, 2) * w1d(y, 0);
                match c {
                    0 => a * (-2.0 * r * a00 - 2.0 * k2 * a00 - (4.0 * k1 / d) * a10
                        - (k / (d * d)) * a20),
                    1 => {
                        let a30 = w1d(x, 3) * w1d(y, 0);
                        let v2 = 2.0 * k * k1 * a00 + (k * k / d) * a10;
                        let u_th = -2.0 * rp * a00 - 2.0 * r * a10 / d - 2.0 * k3 * a00
                            - 2.0 * k2 * a10 / d
                            - (4.0 * k2 / d) * a10
                            - (4.0 * k1 / (d * d)) * a20
                            - (k1 / (d * d)) * a20
                            - (k / d.powi(3)) * a30;
                        a * (-t * u_th + v2)
                    }
                    _ => {
                        let a01 = w1d(x, 0) * w1d(y, 1) * yd;
                        let a11 = w1d(x, 1) * w1d(y, 1) * yd;
                        let a21 = w1d(x, 2) * w1d(y, 1) * yd;
                        let w2 = -k * k * a01;
                        let u_z = -2.0 * r * a01 - 2.0 * k2 * a01 - (4.0 * k1 / d) * a11
                            - (k / (d * d)) * a21;
                        a * (-t * u_z + w2)
                    }
                }
            }
        }
    }

    /// Largest boundary sample |φ_c(·, ·, z ∈ {0, L})| over the largest
    /// interior sample; admissible fields push this to rounding level.
    pub fn boundary_to_peak_ratio(&self) -> f64 {
        let (tlo, thi) = self.theta_support;
        let ts = [-self.h / 2.0, 0.0, self.h / 2.0];
        let mut boundary = 0.0_f64;
        let mut peak = 0.0_f64;
        for i in 0..64 {
            let theta = tlo + (thi - tlo) * (i as f64 + 0.5) / 64.0;
            let jet = self.jet_at(theta);
            for &t in &ts {
                for &z in &[0.0, self.length] {
                    for c in 0..3 {
                        boundary = boundary.max(self.eval_with_jet(c, t, theta, z, jet.as_ref()).abs());
                    }
                }
                let (zlo, zhi) = self.z_support;
                for l in 0..32 {
                    let z = zlo + (zhi - zlo) * (l as f64 + 0.5) / 32.0;
                    for c in 0..3 {
                        peak = peak.max(self.eval_with_jet(c, t, theta, z, jet.as_ref()).abs());
                    }
                }
            }
        }
        if peak == 0.0 {
            return 0.0;
        }
        boundary / peak
    }
}

fn check_support(
    cfg: &ShellConfig,
    p: f64,
    delta: f64,
    z_lo: f64,
    z_hi: f64,
) -> Result<()> {
    // the angular arc lives on the periodic cross-section; it must not cover
    // the whole circle, and the axial support must fit the cylinder
    if 2.0 * delta >= p {
        return Err(Error::SupportOverflow {
            lo: -delta,
            hi: delta,
        });
    }
    if z_lo < 0.0 || z_hi > cfg.length {
        return Err(Error::SupportOverflow { lo: z_lo, hi: z_hi });
    }
    Ok(())
}

/// Kirchhoff-type field on any cross-section: normal bump at `center` with
/// δ = √h and t-linear tangential corrections.
pub fn kirchhoff_ansatz(cfg: &ShellConfig, center: f64) -> Result<AnsatzField> {
    let p = 2.0 * std::f64::consts::PI;
    kirchhoff_on(cfg, p, center)
}

/// As [`kirchhoff_ansatz`] on a cross-section of period `p`.
pub fn kirchhoff_on(cfg: &ShellConfig, p: f64, center: f64) -> Result<AnsatzField> {
    let delta = cfg.h.sqrt();
    let zc = cfg.length / 2.0;
    check_support(cfg, p, delta, zc - delta, zc + delta)?;
    Ok(AnsatzField {
        family: AnsatzFamily::Kirchhoff,
        h: cfg.h,
        delta,
        beta: 0,
        amplitude: 1.0,
        center: (center, zc),
        theta_support: (center - delta, center + delta),
        z_support: (zc - delta, zc + delta),
        period: p,
        length: cfg.length,
        jet_series: None,
    })
}

/// The localized bump shape with δ = h^{1/(β+2)} at an arbitrary angle,
/// without checking the curvature there. [`localized_ansatz`] is the checked
/// entry point; this one exists to measure how the scaling degrades away
/// from a curvature zero.
pub fn localized_shape(cfg: &ShellConfig, p: f64, theta1: f64, beta: u32) -> Result<AnsatzField> {
    let delta = cfg.h.powf(1.0 / (beta as f64 + 2.0));
    let zc = cfg.length / 2.0;
    check_support(cfg, p, delta, zc - delta, zc + delta)?;
    Ok(AnsatzField {
        family: AnsatzFamily::Localized,
        h: cfg.h,
        delta,
        beta,
        amplitude: 1.0,
        center: (theta1, zc),
        theta_support: (theta1 - delta, theta1 + delta),
        z_support: (zc - delta, zc + delta),
        period: p,
        length: cfg.length,
        jet_series: None,
    })
}

/// The curvature must vanish at θ₁ and grow like |θ−θ₁|^β next to it.
fn check_zero_order(cs: &CrossSection, theta1: f64, beta: u32) -> Result<()> {
    let series = cs.curvature_series();
    let k_max = cs.k.iter().cloned().fold(0.0_f64, f64::max);
    let k0 = series.eval(theta1, 0);
    if k0.abs() > 1e-6 * k_max {
        return Err(Error::NotAZero {
            theta: theta1,
            k: k0,
            beta,
        });
    }
    // doubling distance from the zero must scale k by about 2^β
    let w = 0.01 * cs.p;
    for s in [-1.0, 1.0] {
        let outer = series.eval(theta1 + s * w, 0);
        let inner = series.eval(theta1 + s * w / 2.0, 0);
        let measured = (outer / inner).log2();
        if !measured.is_finite() || (measured - beta as f64).abs() > 0.4 {
            return Err(Error::NotAZero {
                theta: theta1,
                k: k0,
                beta,
            });
        }
    }
    Ok(())
}

/// Localized field at a verified curvature zero of order β.
pub fn localized_ansatz(
    cs: &CrossSection,
    cfg: &ShellConfig,
    theta1: f64,
    beta: u32,
) -> Result<AnsatzField> {
    check_zero_order(cs, theta1, beta)?;
    localized_shape(cfg, cs.p, theta1, beta)
}

/// Linearized-t field at a verified quadratic curvature zero, δ = h^{1/6}.
///
/// The tangential components carry curvature jets up to k‴; the axial bump
/// spans the whole length so only the angular scale shrinks with h.
pub fn linearized_t_ansatz(
    cs: &CrossSection,
    cfg: &ShellConfig,
    theta1: f64,
) -> Result<AnsatzField> {
    check_zero_order(cs, theta1, 2)?;
    let delta = cfg.h.powf(1.0 / 6.0);
    check_support(cfg, cs.p, delta, 0.0, cfg.length)?;
    let series = cs.curvature_series();
    // third derivative must stay finite across the support
    let mut worst = (theta1, 0.0_f64);
    for i in 0..=64 {
        let theta = theta1 - delta + 2.0 * delta * i as f64 / 64.0;
        let k3 = series.eval(theta, 3);
        if !k3.is_finite() {
            return Err(Error::RegularityViolation { theta, k3 });
        }
        if k3.abs() > worst.1 {
            worst = (theta, k3.abs());
        }
    }
    Ok(AnsatzField {
        family: AnsatzFamily::LinearizedT,
        h: cfg.h,
        delta,
        beta: 2,
        amplitude: 1.0,
        center: (theta1, cfg.length / 2.0),
        theta_support: (theta1 - delta, theta1 + delta),
        z_support: (0.0, cfg.length),
        period: cs.p,
        length: cfg.length,
        jet_series: Some(series),
    })
}

/// Quotients of one field, with the raw integrals they came from.
#[derive(Debug, Clone, Copy)]
pub struct AnsatzQuotients {
    pub korn_grad: f64,
    pub korn_col3: f64,
    pub rayleigh_cl: f64,
    pub energy: f64,
    pub strain_sq: f64,
    pub grad_sq: f64,
    pub col3_sq: f64,
}

struct QuadLevel {
    t_nodes: Vec<f64>,
    t_weights: Vec<f64>,
    th_nodes: Vec<f64>,
    th_weights: Vec<f64>,
    z_nodes: Vec<f64>,
    z_weights: Vec<f64>,
}

fn quad_level(a: &AnsatzField, cfg: &ShellConfig, panels: usize) -> QuadLevel {
    let (t_nodes, t_weights) = crate::quad::gauss_on(-cfg.h / 2.0, cfg.h / 2.0, 8);
    let (tl, th) = a.theta_support;
    let (th_nodes, th_weights) = crate::quad::composite_gauss(tl, th, panels, 10);
    let (zl, zh) = a.z_support;
    let (z_nodes, z_weights) = crate::quad::composite_gauss(zl, zh, panels, 10);
    QuadLevel {
        t_nodes,
        t_weights,
        th_nodes,
        th_weights,
        z_nodes,
        z_weights,
    }
}

fn integrate_level(
    a: &AnsatzField,
    cs: &CrossSection,
    cfg: &ShellConfig,
    q: &QuadLevel,
) -> AnsatzQuotients {
    let kser = cs.curvature_series();
    let lam = cfg.lame_lambda();
    let mu = cfg.lame_mu();
    let (tl, th_hi) = a.theta_support;
    let (zl, zh) = a.z_support;
    let et = cfg.h * 1e-3;
    let eth = (th_hi - tl) * 2e-5;
    let ez = (zh - zl) * 2e-5;

    // jets for the five θ offsets the angular stencil needs
    let offsets = [-2.0 * eth, -eth, 0.0, eth, 2.0 * eth];
    let jets: Vec<[Option<JetValues>; 5]> = q
        .th_nodes
        .iter()
        .map(|&theta| std::array::from_fn(|s| a.jet_at(theta + offsets[s])))
        .collect();

    let mut energy = 0.0;
    let mut e2 = 0.0;
    let mut g2 = 0.0;
    let mut c32 = 0.0;

    for (jt, (&theta, &wth)) in q.th_nodes.iter().zip(&q.th_weights).enumerate() {
        let k = kser.eval(theta, 0);
        let jrow = &jets[jt];
        let jet0 = jrow[2].as_ref();
        for (&t, &wt) in q.t_nodes.iter().zip(&q.t_weights) {
            let jac = 1.0 + t * k;
            for (&z, &wz) in q.z_nodes.iter().zip(&q.z_weights) {
                let weight = wt * wth * wz * jac;
                let mut comp = [0.0_f64; 3];
                let mut dp = [[0.0_f64; 3]; 3];
                for (c, cv) in comp.iter_mut().enumerate() {
                    *cv = a.eval_with_jet(c, t, theta, z, jet0);
                    let f = |dt: f64, dth_i: usize, dz: f64| {
                        a.eval_with_jet(
                            c,
                            t + dt,
                            theta + offsets[dth_i],
                            z + dz,
                            jrow[dth_i].as_ref(),
                        )
                    };
                    dp[c][0] = (-f(2.0 * et, 2, 0.0) + 8.0 * f(et, 2, 0.0) - 8.0 * f(-et, 2, 0.0)
                        + f(-2.0 * et, 2, 0.0))
                        / (12.0 * et);
                    dp[c][1] = (-f(0.0, 4, 0.0) + 8.0 * f(0.0, 3, 0.0) - 8.0 * f(0.0, 1, 0.0)
                        + f(0.0, 0, 0.0))
                        / (12.0 * eth);
                    dp[c][2] = (-f(0.0, 2, 2.0 * ez) + 8.0 * f(0.0, 2, ez) - 8.0 * f(0.0, 2, -ez)
                        + f(0.0, 2, -2.0 * ez))
                        / (12.0 * ez);
                }
                let g = [
                    [dp[0][0], (dp[0][1] - k * comp[1]) / jac, dp[0][2]],
                    [dp[1][0], (dp[1][1] + k * comp[0]) / jac, dp[1][2]],
                    [dp[2][0], dp[2][1] / jac, dp[2][2]],
                ];
                let mut tr = 0.0;
                let mut e2p = 0.0;
                let mut g2p = 0.0;
                for r in 0..3 {
                    tr += g[r][r];
                    for cc in 0..3 {
                        let e = 0.5 * (g[r][cc] + g[cc][r]);
                        e2p += e * e;
                        g2p += g[r][cc] * g[r][cc];
                    }
                }
                let c3p = g[0][2] * g[0][2] + g[1][2] * g[1][2] + g[2][2] * g[2][2];
                energy += (lam * tr * tr + 2.0 * mu * e2p) * weight;
                e2 += e2p * weight;
                g2 += g2p * weight;
                c32 += c3p * weight;
            }
        }
    }
    AnsatzQuotients {
        korn_grad: e2 / g2,
        korn_col3: e2 / c32,
        rayleigh_cl: energy / (cfg.e_mod * c32),
        energy,
        strain_sq: e2,
        grad_sq: g2,
        col3_sq: c32,
    }
}

/// The three quotients by two-level quadrature over the support.
///
/// The base level resolves the bump scale with 40 Gauss points per δ per
/// direction; a doubled-panel refinement must agree to 1e-4 relative or the
/// call reports [`Error::QuadratureNotConverged`]. Refined values are
/// returned.
pub fn evaluate_ansatz_quotients(
    a: &AnsatzField,
    cs: &CrossSection,
    cfg: &ShellConfig,
) -> Result<AnsatzQuotients> {
    let coarse_q = quad_level(a, cfg, 8);
    let fine_q = quad_level(a, cfg, 16);
    let coarse = integrate_level(a, cs, cfg, &coarse_q);
    let fine = integrate_level(a, cs, cfg, &fine_q);
    if !(fine.grad_sq > 0.0) || !(fine.col3_sq > 0.0) {
        return Err(Error::ZeroDenominator {
            value: fine.grad_sq.min(fine.col3_sq),
        });
    }
    let rel = [
        (coarse.korn_grad, fine.korn_grad),
        (coarse.korn_col3, fine.korn_col3),
        (coarse.rayleigh_cl, fine.rayleigh_cl),
    ]
    .iter()
    .map(|&(c, f)| (c - f).abs() / f.abs())
    .fold(0.0_f64, f64::max);
    if rel > 1e-4 {
        return Err(Error::QuadratureNotConverged { rel });
    }
    Ok(fine)
}
