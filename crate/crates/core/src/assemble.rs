//! Per-mode assembly of the quadratic forms as symmetric matrix pencils.
//!
//! For a fixed wavenumber m every form (elastic energy, squared strain,
//! squared gradient, squared z-column, mass) is a quadratic functional of the
//! stacked grid vector x = [φ_t; φ_θ; φ_z]. Each strain or gradient entry is a
//! short sum of elementary operators (t-differentiation, θ-differentiation,
//! pointwise scaling), so the matrices are accumulated pairwise from those
//! terms against the quadrature weight, without ever materializing the huge
//! entry-by-DOF operator matrices.
//!
//! The m = 0 block is reduced: V_h has no m = 0 mode at all, and V_h^θ keeps
//! only the φ_t degrees of freedom there.

use crate::error::{Error, Result};
use crate::field::{ModeField, SolverGrid, Space};
use crate::geometry::CrossSection;
use crate::shell::ShellConfig;
use std::io::Write;

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone)]
pub struct SymMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        SymMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] += v;
    }

    /// Largest absolute entry.
    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, &v| a.max(v.abs()))
    }

    /// Largest |a_rc − a_cr|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.n {
            for c in (r + 1)..self.n {
                worst = worst.max((self.at(r, c) - self.at(c, r)).abs());
            }
        }
        worst
    }

    /// Replace by (A + Aᵀ)/2.
    pub fn symmetrize(&mut self) {
        for r in 0..self.n {
            for c in (r + 1)..self.n {
                let avg = 0.5 * (self.at(r, c) + self.at(c, r));
                self.data[r * self.n + c] = avg;
                self.data[c * self.n + r] = avg;
            }
        }
    }

    pub fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.n, self.n, |i, j| self.at(i, j))
    }

    /// xᵀ A x.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.n {
            let row = &self.data[r * self.n..(r + 1) * self.n];
            let mut s = 0.0;
            for (c, &a) in row.iter().enumerate() {
                s += a * x[c];
            }
            acc += x[r] * s;
        }
        acc
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let row = &self.data[r * self.n..(r + 1) * self.n];
            let mut s = 0.0;
            for (c, &a) in row.iter().enumerate() {
                s += a * x[c];
            }
            y[r] = s;
        }
    }
}

/// Denominator form of a pencil: the z-column form is exactly diagonal, the
/// gradient form is dense.
#[derive(Debug, Clone)]
pub enum BForm {
    Diag(Vec<f64>),
    Dense(SymMat),
}

impl BForm {
    pub fn n(&self) -> usize {
        match self {
            BForm::Diag(d) => d.len(),
            BForm::Dense(m) => m.n,
        }
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        match self {
            BForm::Diag(d) => d.iter().zip(x).map(|(&b, &v)| b * v * v).sum(),
            BForm::Dense(m) => m.quadratic(x),
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        match self {
            BForm::Diag(d) => {
                for ((yv, &b), &xv) in y.iter_mut().zip(d).zip(x) {
                    *yv = b * xv;
                }
            }
            BForm::Dense(m) => m.matvec(x, y),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            BForm::Diag(d) => d.iter().sum(),
            BForm::Dense(m) => (0..m.n).map(|i| m.at(i, i)).sum(),
        }
    }
}

/// All per-mode forms at one (cross-section, shell, grid, space, m).
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub m: u32,
    pub space: Space,
    /// DOF count after the m = 0 reduction.
    pub n: usize,
    pub a_energy: SymMat,
    pub b_grad: SymMat,
    /// Diagonal of the z-column form μ²‖φ‖² (zero for m = 0).
    pub b_col3: Vec<f64>,
    /// Diagonal of the mass form.
    pub mass: Vec<f64>,
}

/// Which pencil a scan solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PencilKind {
    /// (∫⟨L₀e, e⟩, E‖col₃∇φ‖²) whose infimum over m is the buckling load.
    Buckling,
    /// (‖e‖², ‖∇φ‖²).
    KornGrad,
    /// (‖e‖², ‖col₃∇φ‖²).
    KornCol3,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Dt,
    Dth,
    Id,
}

struct Term {
    comp: usize,
    kind: Kind,
    /// Pointwise factor on the (t, θ) grid, one value per node.
    scale: Vec<f64>,
}

fn components(space: Space, m: u32) -> Result<Vec<usize>> {
    if m == 0 {
        match space {
            Space::Vh => Err(Error::Config(
                "V_h has no m=0 mode: all components vanish at z=0,L".into(),
            )),
            Space::VhTheta => Ok(vec![0]),
        }
    } else {
        Ok(vec![0, 1, 2])
    }
}

/// Stack the active component grids of a field into a DOF vector.
pub fn encode(f: &ModeField) -> Result<Vec<f64>> {
    f.validate()?;
    let comps = components(f.space, f.m)?;
    let mut x = Vec::with_capacity(comps.len() * f.nt * f.ntheta);
    for &c in &comps {
        let g = match c {
            0 => &f.phi_t,
            1 => &f.phi_theta,
            _ => &f.phi_z,
        };
        x.extend_from_slice(g);
    }
    Ok(x)
}

/// Rebuild a mode field from a DOF vector; inactive components come back zero.
pub fn decode(x: &[f64], m: u32, space: Space, nt: usize, ntheta: usize) -> Result<ModeField> {
    let comps = components(space, m)?;
    let nn = nt * ntheta;
    if x.len() != comps.len() * nn {
        return Err(Error::DimensionMismatch {
            expected: comps.len() * nn,
            got: x.len(),
        });
    }
    let mut f = ModeField::zero(m, space, nt, ntheta);
    for (slot, &c) in comps.iter().enumerate() {
        let g = match c {
            0 => &mut f.phi_t,
            1 => &mut f.phi_theta,
            _ => &mut f.phi_z,
        };
        g.copy_from_slice(&x[slot * nn..(slot + 1) * nn]);
    }
    Ok(f)
}

struct Builder<'a> {
    grid: &'a SolverGrid,
    /// Quadrature weight per node including the z-factor.
    w: Vec<f64>,
    /// Position of each component in the DOF vector, if active.
    pos: [Option<usize>; 3],
    n: usize,
}

impl<'a> Builder<'a> {
    fn new(grid: &'a SolverGrid, cfg: &ShellConfig, m: u32, comps: &[usize]) -> Self {
        let zf = if m == 0 {
            cfg.length
        } else {
            cfg.length / 2.0
        };
        let nn = grid.nt * grid.ntheta;
        let mut w = vec![0.0; nn];
        for i in 0..grid.nt {
            for l in 0..grid.ntheta {
                w[i * grid.ntheta + l] = grid.wt[i] * grid.wtheta * grid.jac(i, l) * zf;
            }
        }
        let mut pos = [None; 3];
        for (slot, &c) in comps.iter().enumerate() {
            pos[c] = Some(slot);
        }
        Builder {
            grid,
            w,
            pos,
            n: comps.len() * nn,
        }
    }

    fn scale_const(&self, v: f64) -> Vec<f64> {
        vec![v; self.grid.nt * self.grid.ntheta]
    }

    fn scale_inv_j(&self, v: f64) -> Vec<f64> {
        let g = self.grid;
        let mut s = vec![0.0; g.nt * g.ntheta];
        for i in 0..g.nt {
            for l in 0..g.ntheta {
                s[i * g.ntheta + l] = v / g.jac(i, l);
            }
        }
        s
    }

    fn scale_k_over_j(&self, v: f64) -> Vec<f64> {
        let g = self.grid;
        let mut s = vec![0.0; g.nt * g.ntheta];
        for i in 0..g.nt {
            for l in 0..g.ntheta {
                s[i * g.ntheta + l] = v * g.k[l] / g.jac(i, l);
            }
        }
        s
    }

    /// The six strain entries as term sums, ordered tt, θθ, zz, tθ, tz, θz.
    fn strain_entries(&self, mu: f64) -> [Vec<Term>; 6] {
        [
            vec![Term {
                comp: 0,
                kind: Kind::Dt,
                scale: self.scale_const(1.0),
            }],
            vec![
                Term {
                    comp: 1,
                    kind: Kind::Dth,
                    scale: self.scale_inv_j(1.0),
                },
                Term {
                    comp: 0,
                    kind: Kind::Id,
                    scale: self.scale_k_over_j(1.0),
                },
            ],
            vec![Term {
                comp: 2,
                kind: Kind::Id,
                scale: self.scale_const(mu),
            }],
            vec![
                Term {
                    comp: 1,
                    kind: Kind::Dt,
                    scale: self.scale_const(0.5),
                },
                Term {
                    comp: 0,
                    kind: Kind::Dth,
                    scale: self.scale_inv_j(0.5),
                },
                Term {
                    comp: 1,
                    kind: Kind::Id,
                    scale: self.scale_k_over_j(-0.5),
                },
            ],
            vec![
                Term {
                    comp: 2,
                    kind: Kind::Dt,
                    scale: self.scale_const(0.5),
                },
                Term {
                    comp: 0,
                    kind: Kind::Id,
                    scale: self.scale_const(-0.5 * mu),
                },
            ],
            vec![
                Term {
                    comp: 2,
                    kind: Kind::Dth,
                    scale: self.scale_inv_j(0.5),
                },
                Term {
                    comp: 1,
                    kind: Kind::Id,
                    scale: self.scale_const(-0.5 * mu),
                },
            ],
        ]
    }

    /// The nine gradient entries, (component a, direction b) in slot 3a + b.
    fn grad_entries(&self, mu: f64) -> [Vec<Term>; 9] {
        let dt = |comp: usize| Term {
            comp,
            kind: Kind::Dt,
            scale: self.scale_const(1.0),
        };
        let dth = |comp: usize| Term {
            comp,
            kind: Kind::Dth,
            scale: self.scale_inv_j(1.0),
        };
        let id = |comp: usize, v: f64| Term {
            comp,
            kind: Kind::Id,
            scale: self.scale_const(v),
        };
        [
            vec![dt(0)],
            vec![
                dth(0),
                Term {
                    comp: 1,
                    kind: Kind::Id,
                    scale: self.scale_k_over_j(-1.0),
                },
            ],
            vec![id(0, -mu)],
            vec![dt(1)],
            vec![
                dth(1),
                Term {
                    comp: 0,
                    kind: Kind::Id,
                    scale: self.scale_k_over_j(1.0),
                },
            ],
            vec![id(1, -mu)],
            vec![dt(2)],
            vec![dth(2)],
            vec![id(2, mu)],
        ]
    }

    /// a += c · Σ_{T₁∈e1, T₂∈e2} T₁ᵀ W T₂ over active components.
    fn quad_form(&self, a: &mut SymMat, e1: &[Term], e2: &[Term], c: f64) {
        for t1 in e1 {
            for t2 in e2 {
                if self.pos[t1.comp].is_none() || self.pos[t2.comp].is_none() {
                    continue;
                }
                self.accumulate(a, t1, t2, c);
            }
        }
    }

    fn accumulate(&self, a: &mut SymMat, t1: &Term, t2: &Term, c: f64) {
        let g = self.grid;
        let (nt, nth) = (g.nt, g.ntheta);
        let nn = nt * nth;
        let r0 = self.pos[t1.comp].unwrap() * nn;
        let c0 = self.pos[t2.comp].unwrap() * nn;
        // effective nodal weight of the pair
        let aw: Vec<f64> = (0..nn)
            .map(|id| c * self.w[id] * t1.scale[id] * t2.scale[id])
            .collect();
        let dt = &g.dt;
        let dth = &g.dtheta;
        match (t1.kind, t2.kind) {
            (Kind::Id, Kind::Id) => {
                for id in 0..nn {
                    a.add(r0 + id, c0 + id, aw[id]);
                }
            }
            (Kind::Id, Kind::Dt) => {
                for i in 0..nt {
                    for l in 0..nth {
                        let v = aw[i * nth + l];
                        for j in 0..nt {
                            a.add(r0 + i * nth + l, c0 + j * nth + l, v * dt[i * nt + j]);
                        }
                    }
                }
            }
            (Kind::Dt, Kind::Id) => {
                for i in 0..nt {
                    for l in 0..nth {
                        let v = aw[i * nth + l];
                        for j in 0..nt {
                            a.add(r0 + j * nth + l, c0 + i * nth + l, v * dt[i * nt + j]);
                        }
                    }
                }
            }
            (Kind::Id, Kind::Dth) => {
                for i in 0..nt {
                    for l in 0..nth {
                        let v = aw[i * nth + l];
                        let row = &dth[l * nth..(l + 1) * nth];
                        for lp in 0..nth {
                            a.add(r0 + i * nth + l, c0 + i * nth + lp, v * row[lp]);
                        }
                    }
                }
            }
            (Kind::Dth, Kind::Id) => {
                for i in 0..nt {
                    for l in 0..nth {
                        let v = aw[i * nth + l];
                        let row = &dth[l * nth..(l + 1) * nth];
                        for lp in 0..nth {
                            a.add(r0 + i * nth + lp, c0 + i * nth + l, v * row[lp]);
                        }
                    }
                }
            }
            (Kind::Dt, Kind::Dt) => {
                for l in 0..nth {
                    for i in 0..nt {
                        let v = aw[i * nth + l];
                        for j1 in 0..nt {
                            let v1 = v * dt[i * nt + j1];
                            for j2 in 0..nt {
                                a.add(r0 + j1 * nth + l, c0 + j2 * nth + l, v1 * dt[i * nt + j2]);
                            }
                        }
                    }
                }
            }
            (Kind::Dth, Kind::Dth) => {
                for i in 0..nt {
                    for l in 0..nth {
                        let v = aw[i * nth + l];
                        let row = &dth[l * nth..(l + 1) * nth];
                        for l1 in 0..nth {
                            let v1 = v * row[l1];
                            if v1 == 0.0 {
                                continue;
                            }
                            let dst =
                                &mut a.data[(r0 + i * nth + l1) * a.n + c0 + i * nth
                                    ..(r0 + i * nth + l1) * a.n + c0 + (i + 1) * nth];
                            for (d, &r) in dst.iter_mut().zip(row) {
                                *d += v1 * r;
                            }
                        }
                    }
                }
            }
            (Kind::Dt, Kind::Dth) => {
                for i in 0..nt {
                    for l in 0..nth {
                        let v = aw[i * nth + l];
                        let row = &dth[l * nth..(l + 1) * nth];
                        for j in 0..nt {
                            let v1 = v * dt[i * nt + j];
                            let dst = &mut a.data[(r0 + j * nth + l) * a.n + c0 + i * nth
                                ..(r0 + j * nth + l) * a.n + c0 + (i + 1) * nth];
                            for (d, &r) in dst.iter_mut().zip(row) {
                                *d += v1 * r;
                            }
                        }
                    }
                }
            }
            (Kind::Dth, Kind::Dt) => {
                for i in 0..nt {
                    for l in 0..nth {
                        let v = aw[i * nth + l];
                        let row = &dth[l * nth..(l + 1) * nth];
                        for lp in 0..nth {
                            let v1 = v * row[lp];
                            if v1 == 0.0 {
                                continue;
                            }
                            for j in 0..nt {
                                a.add(r0 + i * nth + lp, c0 + j * nth + l, v1 * dt[i * nt + j]);
                            }
                        }
                    }
                }
            }
        }
    }

    /// ∫⟨L₀e, e⟩ with Lamé constants (λ_L, μ_lame); (0, 1/2) gives ‖e‖².
    fn energy_matrix(&self, mu: f64, lam_l: f64, mu_lame: f64) -> SymMat {
        let mut a = SymMat::zeros(self.n);
        let es = self.strain_entries(mu);
        for (idx, entry) in es.iter().enumerate() {
            let mult = if idx < 3 { 1.0 } else { 2.0 };
            self.quad_form(&mut a, entry, entry, 2.0 * mu_lame * mult);
        }
        if lam_l != 0.0 {
            let trace: Vec<Term> = es
                .into_iter()
                .take(3)
                .flatten()
                .collect();
            self.quad_form(&mut a, &trace, &trace, lam_l);
        }
        a.symmetrize();
        a
    }

    fn grad_matrix(&self, mu: f64) -> SymMat {
        let mut a = SymMat::zeros(self.n);
        for entry in self.grad_entries(mu).iter() {
            self.quad_form(&mut a, entry, entry, 1.0);
        }
        a.symmetrize();
        a
    }

    fn mass_diag(&self) -> Vec<f64> {
        let nn = self.grid.nt * self.grid.ntheta;
        let blocks = self.n / nn;
        let mut d = Vec::with_capacity(self.n);
        for _ in 0..blocks {
            d.extend_from_slice(&self.w);
        }
        d
    }
}

/// Assemble every form of one mode.
///
/// The matrices act on the encoded DOF vector: xᵀ A_energy x equals
/// [`crate::field::elastic_energy`] of the decoded field, and likewise for the
/// denominator forms. Memory is quadratic in N_t·N_θ; prefer
/// [`assemble_pencil`] inside scans.
pub fn assemble_mode(
    cs: &CrossSection,
    cfg: &ShellConfig,
    space: Space,
    m: u32,
    nt: usize,
    ntheta: usize,
) -> Result<AssembledForms> {
    let comps = components(space, m)?;
    let grid = SolverGrid::new(cs, cfg, nt, ntheta)?;
    let b = Builder::new(&grid, cfg, m, &comps);
    let mu = crate::field::mode_mu(m, cfg);
    let mass = b.mass_diag();
    let b_col3 = mass.iter().map(|&w| mu * mu * w).collect();
    Ok(AssembledForms {
        m,
        space,
        n: b.n,
        a_energy: b.energy_matrix(mu, cfg.lame_lambda(), cfg.lame_mu()),
        b_grad: b.grad_matrix(mu),
        b_col3,
        mass,
    })
}

/// Assemble only the (numerator, denominator, mass) triple that one scan
/// pencil needs.
pub fn assemble_pencil(
    cs: &CrossSection,
    cfg: &ShellConfig,
    space: Space,
    m: u32,
    nt: usize,
    ntheta: usize,
    kind: PencilKind,
) -> Result<(SymMat, BForm, Vec<f64>)> {
    let comps = components(space, m)?;
    let grid = SolverGrid::new(cs, cfg, nt, ntheta)?;
    let b = Builder::new(&grid, cfg, m, &comps);
    let mu = crate::field::mode_mu(m, cfg);
    let mass = b.mass_diag();
    let a = match kind {
        PencilKind::Buckling => b.energy_matrix(mu, cfg.lame_lambda(), cfg.lame_mu()),
        PencilKind::KornGrad | PencilKind::KornCol3 => b.energy_matrix(mu, 0.0, 0.5),
    };
    let bf = match kind {
        PencilKind::Buckling => {
            BForm::Diag(mass.iter().map(|&w| cfg.e_mod * mu * mu * w).collect())
        }
        PencilKind::KornCol3 => BForm::Diag(mass.iter().map(|&w| mu * mu * w).collect()),
        PencilKind::KornGrad => BForm::Dense(b.grad_matrix(mu)),
    };
    Ok((a, bf, mass))
}

/// Dump matrices in the inspection layout: header `n (u64 LE), count (u64 LE)`
/// then each matrix dense row-major as little-endian f64.
pub fn dump_pencils<W: Write>(out: &mut W, mats: &[&SymMat]) -> std::io::Result<()> {
    let n = mats.first().map_or(0, |m| m.n) as u64;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&(mats.len() as u64).to_le_bytes())?;
    for m in mats {
        for v in &m.data {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{
        col3_norm_sq, elastic_energy, full_gradient, weighted_field_norm_sq,
        weighted_grad_norm_sq, Weight,
    };
    use crate::geometry::{synthesize_curve, CurvatureProfile};
    use std::sync::OnceLock;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn oval() -> &'static CrossSection {
        static CS: OnceLock<CrossSection> = OnceLock::new();
        CS.get_or_init(|| {
            let p = CurvatureProfile::cosine_series(TAU, 128, &[(2, 0.3)]);
            synthesize_curve(&p, 1e-12).unwrap()
        })
    }

    fn circle() -> &'static CrossSection {
        static CS: OnceLock<CrossSection> = OnceLock::new();
        CS.get_or_init(|| {
            let p = CurvatureProfile::circle(TAU, 128);
            synthesize_curve(&p, 1e-12).unwrap()
        })
    }

    fn cfg() -> ShellConfig {
        ShellConfig::new(0.02, 2.0, 1.0, 0.3).unwrap()
    }

    fn random_x(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn mass_form_matches_field_norm() {
        let c = cfg();
        let forms = assemble_mode(circle(), &c, Space::Vh, 1, 2, 8).unwrap();
        for seed in 0..5_u64 {
            let x = random_x(forms.n, 100 + seed);
            let f = decode(&x, 1, Space::Vh, 2, 8).unwrap();
            let want = weighted_field_norm_sq(&f, circle(), &c, Weight::ExactJacobian).unwrap();
            let got: f64 = forms
                .mass
                .iter()
                .zip(&x)
                .map(|(&m, &v)| m * v * v)
                .sum();
            assert!((got - want).abs() < 1e-12 * want.abs().max(1e-3));
        }
    }

    #[test]
    fn energy_form_matches_functional() {
        let c = cfg();
        let (nt, nth, m) = (4, 16, 2);
        let forms = assemble_mode(oval(), &c, Space::Vh, m, nt, nth).unwrap();
        for seed in 0..20_u64 {
            let x = random_x(forms.n, 7 + seed);
            let f = decode(&x, m, Space::Vh, nt, nth).unwrap();
            let want = elastic_energy(&f, oval(), &c).unwrap();
            let got = forms.a_energy.quadratic(&x);
            assert!(
                (got - want).abs() < 1e-10 * want.abs().max(1e-10),
                "seed {seed}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn denominator_forms_match_functionals() {
        let c = cfg();
        let (nt, nth, m) = (4, 16, 3);
        let forms = assemble_mode(oval(), &c, Space::Vh, m, nt, nth).unwrap();
        for seed in 0..10_u64 {
            let x = random_x(forms.n, 31 + seed);
            let f = decode(&x, m, Space::Vh, nt, nth).unwrap();
            let g = full_gradient(&f, oval(), &c).unwrap();
            let grad_want = weighted_grad_norm_sq(&g, oval(), &c, Weight::ExactJacobian).unwrap();
            let col3_want = col3_norm_sq(&g, oval(), &c, Weight::ExactJacobian).unwrap();
            let grad_got = forms.b_grad.quadratic(&x);
            let col3_got: f64 = forms
                .b_col3
                .iter()
                .zip(&x)
                .map(|(&b, &v)| b * v * v)
                .sum();
            assert!((grad_got - grad_want).abs() < 1e-10 * grad_want);
            assert!((col3_got - col3_want).abs() < 1e-10 * col3_want.max(1e-10));
        }
    }

    #[test]
    fn forms_are_symmetric_and_mass_is_positive() {
        let c = cfg();
        let forms = assemble_mode(oval(), &c, Space::Vh, 2, 4, 16).unwrap();
        let scale = forms.a_energy.inf_norm();
        assert!(forms.a_energy.max_asymmetry() <= 1e-12 * scale);
        assert!(forms.b_grad.max_asymmetry() <= 1e-12 * forms.b_grad.inf_norm());
        let min_mass = forms.mass.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_mass > 0.0);
    }

    #[test]
    fn grad_dominates_col3_as_forms() {
        let c = cfg();
        let forms = assemble_mode(oval(), &c, Space::Vh, 2, 4, 16).unwrap();
        // B_grad − B_col3 must be PSD
        let mut diff = forms.b_grad.clone();
        for i in 0..forms.n {
            diff.data[i * forms.n + i] -= forms.b_col3[i];
        }
        let evs = diff
            .to_faer()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap();
        assert!(evs[0] >= -1e-10 * forms.b_grad.inf_norm());
    }

    #[test]
    fn mode_zero_reduction_keeps_only_normal_dofs() {
        let c = cfg();
        assert!(assemble_mode(circle(), &c, Space::Vh, 0, 4, 16).is_err());
        let forms = assemble_mode(circle(), &c, Space::VhTheta, 0, 4, 16).unwrap();
        assert_eq!(forms.n, 4 * 16);
        assert!(forms.b_col3.iter().all(|&v| v == 0.0));
        // roundtrip with a t-only field
        let x = random_x(forms.n, 5);
        let f = decode(&x, 0, Space::VhTheta, 4, 16).unwrap();
        assert!(f.validate().is_ok());
        let want = weighted_field_norm_sq(&f, circle(), &c, Weight::ExactJacobian).unwrap();
        let got: f64 = forms.mass.iter().zip(&x).map(|(&m, &v)| m * v * v).sum();
        assert!((got - want).abs() < 1e-12 * want.max(1e-6));
        let e_want = elastic_energy(&f, circle(), &c).unwrap();
        let e_got = forms.a_energy.quadratic(&x);
        assert!((e_got - e_want).abs() < 1e-10 * e_want.max(1e-10));
    }

    #[test]
    fn encode_decode_roundtrip() {
        let f = ModeField::seeded(2, Space::Vh, 4, 16, 77);
        let x = encode(&f).unwrap();
        let back = decode(&x, 2, Space::Vh, 4, 16).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn pencil_matches_full_assembly() {
        let c = cfg();
        let forms = assemble_mode(oval(), &c, Space::Vh, 2, 4, 16).unwrap();
        let (a, b, _) = assemble_pencil(oval(), &c, Space::Vh, 2, 4, 16, PencilKind::Buckling)
            .unwrap();
        let x = random_x(forms.n, 9);
        assert!((a.quadratic(&x) - forms.a_energy.quadratic(&x)).abs() < 1e-12);
        let bc: f64 = forms
            .b_col3
            .iter()
            .zip(&x)
            .map(|(&bb, &v)| bb * v * v)
            .sum();
        assert!((b.quadratic(&x) - c.e_mod * bc).abs() < 1e-12 * bc.max(1e-12));
    }

    #[test]
    fn pencil_dump_layout() {
        let mut m1 = SymMat::zeros(2);
        m1.data = vec![1.0, 2.0, 2.0, 3.0];
        let mut m2 = SymMat::zeros(2);
        m2.data = vec![5.0, 0.0, 0.0, 7.0];
        let mut buf = Vec::new();
        dump_pencils(&mut buf, &[&m1, &m2]).unwrap();
        assert_eq!(buf.len(), 16 + 2 * 4 * 8);
        assert_eq!(u64::from_le_bytes(buf[0..8].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
        let v = f64::from_le_bytes(buf[16..24].try_into().unwrap());
        assert_eq!(v, 1.0);
        let last = f64::from_le_bytes(buf[buf.len() - 8..].try_into().unwrap());
        assert_eq!(last, 7.0);
    }
}
