//! Displacement modes on the shell, their gradients, strains, and weighted
//! norms.
//!
//! A displacement is expanded in z-Fourier modes over the cylinder height:
//! φ_t and φ_θ carry cos(πmz/L), φ_z carries sin(πmz/L). One [`ModeField`]
//! stores the (t, θ) profiles of a single mode on a tensor grid of N_t Gauss
//! points across the wall and N_θ uniform points along the cross-section.
//! The m = 0 field is plainly z-independent.
//!
//! Gradients are taken in the local orthonormal frame (e_t, e_θ, e_z): entry
//! (a, b) is ∂φ_a in direction e_b, with the frame-rotation couplings through
//! the curvature k and the Jacobian J = 1 + t·k in the θ column. z-derivatives
//! act analytically on the mode factors, θ-derivatives by Fourier collocation,
//! t-derivatives by the Gauss-node differentiation matrix.

use crate::error::{Error, Result};
use crate::geometry::CrossSection;
use crate::material::IsotropicTensor;
use crate::shell::ShellConfig;
use crate::{fourier, quad};
use serde::{Deserialize, Serialize};

/// Which admissible space a field is meant for. V_h pins all components at
/// z = 0, L and therefore has no m = 0 content; V_h^θ relaxes the θ-component
/// to a zero-average condition, keeping an m = 0 block with only φ_t active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Vh,
    VhTheta,
}

/// Volume weight for L² integrals: the curvilinear element (1+tk) dt dθ dz or
/// the flat product measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    ExactJacobian,
    Flat,
}

/// Denominator choice for [`korn_quotient`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenomKind {
    Grad,
    Col3,
}

/// One z-Fourier mode of a displacement field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeField {
    pub m: u32,
    pub space: Space,
    pub nt: usize,
    pub ntheta: usize,
    /// Grids in row-major (t, θ) order: index i·N_θ + j.
    pub phi_t: Vec<f64>,
    pub phi_theta: Vec<f64>,
    pub phi_z: Vec<f64>,
}

impl ModeField {
    pub fn zero(m: u32, space: Space, nt: usize, ntheta: usize) -> Self {
        let n = nt * ntheta;
        ModeField {
            m,
            space,
            nt,
            ntheta,
            phi_t: vec![0.0; n],
            phi_theta: vec![0.0; n],
            phi_z: vec![0.0; n],
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ntheta + j
    }

    /// Sample a fixed smooth pseudo-random function onto the grid: trig
    /// polynomials of degree ≤ 8 in the angle times cubics in the normalized
    /// wall coordinate, with coefficients drawn from `seed`. The underlying
    /// function depends only on the seed, so resampling at a finer grid
    /// represents the same field.
    pub fn seeded(m: u32, space: Space, nt: usize, ntheta: usize, seed: u64) -> Self {
        const QMAX: usize = 8;
        let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut coefs = [[[0.0_f64; 2 * QMAX + 1]; 4]; 3];
        for comp in coefs.iter_mut() {
            for (d, row) in comp.iter_mut().enumerate() {
                for (qi, c) in row.iter_mut().enumerate() {
                    let q = if qi == 0 { 0 } else { (qi + 1) / 2 };
                    *c = split_unit(&mut state) * 0.5_f64.powi(d as i32) / (1.0 + q as f64);
                }
            }
        }
        let (tn, _) = quad::gauss_legendre(nt);
        let mut f = ModeField::zero(m, space, nt, ntheta);
        for i in 0..nt {
            let th = tn[i];
            for j in 0..ntheta {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / ntheta as f64;
                for (c, grid) in [&mut f.phi_t, &mut f.phi_theta, &mut f.phi_z]
                    .into_iter()
                    .enumerate()
                {
                    let mut v = 0.0;
                    for d in 0..4 {
                        let mut row = coefs[c][d][0];
                        for q in 1..=QMAX {
                            row += coefs[c][d][2 * q - 1] * (q as f64 * ang).cos()
                                + coefs[c][d][2 * q] * (q as f64 * ang).sin();
                        }
                        v += th.powi(d as i32) * row;
                    }
                    grid[i * ntheta + j] = v;
                }
            }
        }
        if m == 0 {
            f.phi_z.fill(0.0);
            if space == Space::VhTheta {
                f.phi_theta.fill(0.0);
            }
        }
        f
    }

    /// Check the space/mode constraints that the solver relies on.
    pub fn validate(&self) -> Result<()> {
        let n = self.nt * self.ntheta;
        for g in [&self.phi_t, &self.phi_theta, &self.phi_z] {
            if g.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.len(),
                });
            }
        }
        if self.m == 0 {
            match self.space {
                Space::Vh => {
                    return Err(Error::Config(
                        "V_h has no m=0 mode: all components vanish at z=0,L".into(),
                    ));
                }
                Space::VhTheta => {
                    let bad = self.phi_theta.iter().chain(&self.phi_z).any(|&v| v != 0.0);
                    if bad {
                        return Err(Error::Config(
                            "V_h^theta at m=0 admits only the t-component".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for g in [&mut out.phi_t, &mut out.phi_theta, &mut out.phi_z] {
            for v in g.iter_mut() {
                *v *= c;
            }
        }
        out
    }

    /// CSV rows `t,theta,phi_t,phi_theta,phi_z` over the grid.
    pub fn to_csv(&self, cs: &CrossSection, cfg: &ShellConfig) -> Result<String> {
        let grid = SolverGrid::new(cs, cfg, self.nt, self.ntheta)?;
        let mut out = String::from("t,theta,phi_t,phi_theta,phi_z\n");
        for i in 0..self.nt {
            for j in 0..self.ntheta {
                let id = self.idx(i, j);
                out.push_str(&format!(
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                    grid.t[i],
                    grid.theta(j),
                    self.phi_t[id],
                    self.phi_theta[id],
                    self.phi_z[id]
                ));
            }
        }
        Ok(out)
    }
}

fn split_unit(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Discretization data shared by gradients, norms, and assembly: Gauss nodes
/// across the wall, the uniform angular grid with the curvature subsampled
/// onto it, and both differentiation matrices.
#[derive(Debug, Clone)]
pub struct SolverGrid {
    pub nt: usize,
    pub ntheta: usize,
    pub p: f64,
    /// Gauss nodes on [−h/2, h/2] and their weights.
    pub t: Vec<f64>,
    pub wt: Vec<f64>,
    /// Differentiation matrix on the t nodes, nt×nt row-major.
    pub dt: Vec<f64>,
    /// Curvature on the angular grid.
    pub k: Vec<f64>,
    /// Fourier differentiation matrix on the angular grid, row-major.
    pub dtheta: Vec<f64>,
    /// Trapezoid weight p/N_θ.
    pub wtheta: f64,
}

impl SolverGrid {
    pub fn new(cs: &CrossSection, cfg: &ShellConfig, nt: usize, ntheta: usize) -> Result<Self> {
        let (t, wt) = quad::gauss_on(-cfg.h / 2.0, cfg.h / 2.0, nt);
        let dt = quad::lagrange_diff_matrix(&t);
        let k = if ntheta == cs.n_theta() {
            cs.k.clone()
        } else {
            cs.curvature_on(ntheta)
        };
        let grid = SolverGrid {
            nt,
            ntheta,
            p: cs.p,
            t,
            wt,
            dt,
            k,
            dtheta: fourier::diff_matrix(ntheta, cs.p),
            wtheta: cs.p / ntheta as f64,
        };
        let j_min = grid.min_jacobian();
        if j_min <= 0.0 {
            return Err(Error::SingularJacobian { j_min });
        }
        Ok(grid)
    }

    #[inline]
    pub fn jac(&self, i: usize, j: usize) -> f64 {
        1.0 + self.t[i] * self.k[j]
    }

    pub fn min_jacobian(&self) -> f64 {
        let mut jm = f64::INFINITY;
        for i in 0..self.nt {
            for j in 0..self.ntheta {
                jm = jm.min(self.jac(i, j));
            }
        }
        jm
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.p / self.ntheta as f64
    }

    /// d/dθ applied along the angular index of a (t, θ) grid.
    pub fn d_theta(&self, g: &[f64]) -> Vec<f64> {
        let (nt, n) = (self.nt, self.ntheta);
        let mut out = vec![0.0; nt * n];
        for i in 0..nt {
            let row = &g[i * n..(i + 1) * n];
            for jj in 0..n {
                let drow = &self.dtheta[jj * n..(jj + 1) * n];
                let mut acc = 0.0;
                for (l, &gl) in row.iter().enumerate() {
                    acc += drow[l] * gl;
                }
                out[i * n + jj] = acc;
            }
        }
        out
    }

    /// d/dt applied along the wall index of a (t, θ) grid.
    pub fn d_t(&self, g: &[f64]) -> Vec<f64> {
        let (nt, n) = (self.nt, self.ntheta);
        let mut out = vec![0.0; nt * n];
        for i in 0..nt {
            for l in 0..nt {
                let c = self.dt[i * nt + l];
                if c == 0.0 {
                    continue;
                }
                let src = &g[l * n..(l + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
        out
    }
}

/// Axial wavenumber πm/L of a mode.
pub fn mode_mu(m: u32, cfg: &ShellConfig) -> f64 {
    std::f64::consts::PI * m as f64 / cfg.length
}

/// z-integral of the squared mode factor: L/2 for m ≥ 1, L for the
/// z-independent m = 0 block.
fn z_factor(m: u32, cfg: &ShellConfig) -> f64 {
    if m == 0 {
        cfg.length
    } else {
        cfg.length / 2.0
    }
}

/// Nine gradient entries of one mode, (component a, direction b) at slot
/// 3a + b with a, b ∈ {t, θ, z}.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub m: u32,
    pub nt: usize,
    pub ntheta: usize,
    pub entries: [Vec<f64>; 9],
    pub simplified: bool,
    pub symmetric: bool,
}

impl GradientField {
    /// (G + Gᵀ)/2.
    pub fn symmetrize(&self) -> GradientField {
        let mut out = self.clone();
        for a in 0..3 {
            for b in (a + 1)..3 {
                let (lo, hi) = (3 * a + b, 3 * b + a);
                for idx in 0..self.entries[lo].len() {
                    let avg = 0.5 * (self.entries[lo][idx] + self.entries[hi][idx]);
                    out.entries[lo][idx] = avg;
                    out.entries[hi][idx] = avg;
                }
            }
        }
        out.symmetric = true;
        out
    }
}

fn gradient_impl(
    f: &ModeField,
    cs: &CrossSection,
    cfg: &ShellConfig,
    simplified: bool,
) -> Result<GradientField> {
    let grid = SolverGrid::new(cs, cfg, f.nt, f.ntheta)?;
    let mu = mode_mu(f.m, cfg);
    let n = f.nt * f.ntheta;

    let dth_t = grid.d_theta(&f.phi_t);
    let dth_h = grid.d_theta(&f.phi_theta);
    let dth_z = grid.d_theta(&f.phi_z);
    let dt_t = grid.d_t(&f.phi_t);
    let dt_h = grid.d_t(&f.phi_theta);
    let dt_z = grid.d_t(&f.phi_z);

    let mut entries: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; n]);
    for i in 0..f.nt {
        for j in 0..f.ntheta {
            let id = i * f.ntheta + j;
            let k = grid.k[j];
            let jac = if simplified { 1.0 } else { grid.jac(i, j) };
            entries[0][id] = dt_t[id];
            entries[1][id] = (dth_t[id] - k * f.phi_theta[id]) / jac;
            entries[2][id] = -mu * f.phi_t[id];
            entries[3][id] = dt_h[id];
            entries[4][id] = (dth_h[id] + k * f.phi_t[id]) / jac;
            entries[5][id] = -mu * f.phi_theta[id];
            entries[6][id] = dt_z[id];
            entries[7][id] = dth_z[id] / jac;
            entries[8][id] = mu * f.phi_z[id];
        }
    }
    Ok(GradientField {
        m: f.m,
        nt: f.nt,
        ntheta: f.ntheta,
        entries,
        simplified,
        symmetric: false,
    })
}

/// The curvilinear gradient with exact 1/J denominators in the θ column.
pub fn full_gradient(f: &ModeField, cs: &CrossSection, cfg: &ShellConfig) -> Result<GradientField> {
    gradient_impl(f, cs, cfg, false)
}

/// The simplified gradient: the θ-column denominators frozen at t = 0.
pub fn simplified_gradient(
    f: &ModeField,
    cs: &CrossSection,
    cfg: &ShellConfig,
) -> Result<GradientField> {
    gradient_impl(f, cs, cfg, true)
}

/// Symmetrized full gradient e(φ).
pub fn strain(f: &ModeField, cs: &CrossSection, cfg: &ShellConfig) -> Result<GradientField> {
    Ok(full_gradient(f, cs, cfg)?.symmetrize())
}

fn quad_weight(grid: &SolverGrid, i: usize, j: usize, weight: Weight) -> f64 {
    let jac = match weight {
        Weight::ExactJacobian => grid.jac(i, j),
        Weight::Flat => 1.0,
    };
    grid.wt[i] * grid.wtheta * jac
}

/// ∫ |φ|² over the shell.
pub fn weighted_field_norm_sq(
    f: &ModeField,
    cs: &CrossSection,
    cfg: &ShellConfig,
    weight: Weight,
) -> Result<f64> {
    let grid = SolverGrid::new(cs, cfg, f.nt, f.ntheta)?;
    let zf = z_factor(f.m, cfg);
    let mut acc = 0.0;
    for i in 0..f.nt {
        for j in 0..f.ntheta {
            let id = i * f.ntheta + j;
            let s = f.phi_t[id] * f.phi_t[id]
                + f.phi_theta[id] * f.phi_theta[id]
                + f.phi_z[id] * f.phi_z[id];
            acc += s * quad_weight(&grid, i, j, weight);
        }
    }
    Ok(acc * zf)
}

/// ∫ Σ_ab |G_ab|² over the shell.
pub fn weighted_grad_norm_sq(
    g: &GradientField,
    cs: &CrossSection,
    cfg: &ShellConfig,
    weight: Weight,
) -> Result<f64> {
    let grid = SolverGrid::new(cs, cfg, g.nt, g.ntheta)?;
    let zf = z_factor(g.m, cfg);
    let mut acc = 0.0;
    for i in 0..g.nt {
        for j in 0..g.ntheta {
            let id = i * g.ntheta + j;
            let mut s = 0.0;
            for e in &g.entries {
                s += e[id] * e[id];
            }
            acc += s * quad_weight(&grid, i, j, weight);
        }
    }
    Ok(acc * zf)
}

/// ∫ |col₃ G|²: the squared z-derivative column.
pub fn col3_norm_sq(
    g: &GradientField,
    cs: &CrossSection,
    cfg: &ShellConfig,
    weight: Weight,
) -> Result<f64> {
    let grid = SolverGrid::new(cs, cfg, g.nt, g.ntheta)?;
    let zf = z_factor(g.m, cfg);
    let mut acc = 0.0;
    for i in 0..g.nt {
        for j in 0..g.ntheta {
            let id = i * g.ntheta + j;
            let s = g.entries[2][id] * g.entries[2][id]
                + g.entries[5][id] * g.entries[5][id]
                + g.entries[8][id] * g.entries[8][id];
            acc += s * quad_weight(&grid, i, j, weight);
        }
    }
    Ok(acc * zf)
}

/// ∫ ⟨L₀ e(φ), e(φ)⟩ with the exact-Jacobian weight.
pub fn elastic_energy(f: &ModeField, cs: &CrossSection, cfg: &ShellConfig) -> Result<f64> {
    let grid = SolverGrid::new(cs, cfg, f.nt, f.ntheta)?;
    let e = strain(f, cs, cfg)?;
    let tensor = IsotropicTensor::from_config(cfg);
    let zf = z_factor(f.m, cfg);
    let mut acc = 0.0;
    for i in 0..f.nt {
        for j in 0..f.ntheta {
            let id = i * f.ntheta + j;
            let den = tensor.energy_density(
                e.entries[0][id],
                e.entries[4][id],
                e.entries[8][id],
                e.entries[1][id],
                e.entries[2][id],
                e.entries[5][id],
            );
            acc += den * quad_weight(&grid, i, j, Weight::ExactJacobian);
        }
    }
    Ok(acc * zf)
}

fn check_denominator(
    f: &ModeField,
    cs: &CrossSection,
    cfg: &ShellConfig,
    denom: f64,
) -> Result<()> {
    let phi2 = weighted_field_norm_sq(f, cs, cfg, Weight::ExactJacobian)?;
    if denom < 1e-14 * phi2 {
        return Err(Error::ZeroDenominator { value: denom });
    }
    Ok(())
}

/// The buckling Rayleigh quotient ∫⟨L₀e, e⟩ / (E‖col₃∇φ‖²).
pub fn rayleigh_cl(f: &ModeField, cs: &CrossSection, cfg: &ShellConfig) -> Result<f64> {
    let g = full_gradient(f, cs, cfg)?;
    let denom = cfg.e_mod * col3_norm_sq(&g, cs, cfg, Weight::ExactJacobian)?;
    check_denominator(f, cs, cfg, denom)?;
    Ok(elastic_energy(f, cs, cfg)? / denom)
}

/// Korn-type quotient ‖e(φ)‖² / ‖∇φ‖² or ‖e(φ)‖² / ‖col₃∇φ‖².
pub fn korn_quotient(
    f: &ModeField,
    cs: &CrossSection,
    cfg: &ShellConfig,
    denom: DenomKind,
) -> Result<f64> {
    let g = full_gradient(f, cs, cfg)?;
    let den = match denom {
        DenomKind::Grad => weighted_grad_norm_sq(&g, cs, cfg, Weight::ExactJacobian)?,
        DenomKind::Col3 => col3_norm_sq(&g, cs, cfg, Weight::ExactJacobian)?,
    };
    check_denominator(f, cs, cfg, den)?;
    let e = g.symmetrize();
    let num = weighted_grad_norm_sq(&e, cs, cfg, Weight::ExactJacobian)?;
    Ok(num / den)
}

/// −∫ ⟨σ_h, ∇φᵀ∇φ⟩ for the trivial prestress σ_h = diag(0, 0, −E).
///
/// Entry (a, b) of ∇φᵀ∇φ mixes gradient entries of different z-parity; the
/// parity table decides whether a product integrates to the z-factor or to
/// zero.
pub fn destabilizing_term(f: &ModeField, cs: &CrossSection, cfg: &ShellConfig) -> Result<f64> {
    let g = full_gradient(f, cs, cfg)?;
    let grid = SolverGrid::new(cs, cfg, f.nt, f.ntheta)?;
    let sigma = crate::material::trivial_stress(cfg);
    let zf = z_factor(f.m, cfg);
    // parity of entry (c, dir): the component's mode factor, flipped by ∂_z
    let is_sin = |c: usize, dir: usize| -> bool {
        let comp_sin = c == 2;
        if dir == 2 { !comp_sin } else { comp_sin }
    };
    let mut acc = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            if sigma[a][b] == 0.0 {
                continue;
            }
            for c in 0..3 {
                if is_sin(c, a) != is_sin(c, b) {
                    continue;
                }
                if f.m == 0 && is_sin(c, a) {
                    continue;
                }
                let (ea, eb) = (&g.entries[3 * c + a], &g.entries[3 * c + b]);
                let mut s = 0.0;
                for i in 0..f.nt {
                    for j in 0..f.ntheta {
                        let id = i * f.ntheta + j;
                        s += ea[id] * eb[id] * quad_weight(&grid, i, j, Weight::ExactJacobian);
                    }
                }
                acc -= sigma[a][b] * s * zf;
            }
        }
    }
    Ok(acc)
}
