//! Isotropic elasticity tensor and the compressed trivial branch.
//!
//! The buckling problem is linearized around a family of homogeneous axial
//! compressions y(λ) with ∇y = diag(1+a, 1+a, 1−λ). For a Saint
//! Venant–Kirchhoff material the in-plane stretch a(λ) has a closed form, and
//! the linearization data that actually enters the buckling computation are
//! a'(0) = ν and the prestress σ_h = diag(0, 0, −E).

use crate::error::{Error, Result};
use crate::shell::ShellConfig;

pub type Mat3 = [[f64; 3]; 3];

/// The linearly elastic tensor L₀ξ = λ_L tr(ξ) I + 2μ ξ on symmetric ξ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicTensor {
    pub lambda_l: f64,
    pub mu: f64,
}

impl IsotropicTensor {
    pub fn from_config(cfg: &ShellConfig) -> Self {
        IsotropicTensor {
            lambda_l: cfg.lame_lambda(),
            mu: cfg.lame_mu(),
        }
    }

    /// ⟨L₀e, e⟩ for a symmetric strain given by its six distinct entries
    /// (e_tt, e_θθ, e_zz, e_tθ, e_tz, e_θz); off-diagonals count twice.
    pub fn energy_density(
        &self,
        e_tt: f64,
        e_hh: f64,
        e_zz: f64,
        e_th: f64,
        e_tz: f64,
        e_hz: f64,
    ) -> f64 {
        let tr = e_tt + e_hh + e_zz;
        let frob2 = e_tt * e_tt
            + e_hh * e_hh
            + e_zz * e_zz
            + 2.0 * (e_th * e_th + e_tz * e_tz + e_hz * e_hz);
        self.lambda_l * tr * tr + 2.0 * self.mu * frob2
    }
}

/// σ = λ_L tr(e) I + 2μ e. Errors on a non-symmetric input.
pub fn apply_l0(t: &IsotropicTensor, e: &Mat3) -> Result<Mat3> {
    let scale = e
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    let mut max_asym = 0.0_f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            max_asym = max_asym.max((e[i][j] - e[j][i]).abs());
        }
    }
    if max_asym > 1e-12 * scale {
        return Err(Error::NonSymmetricInput { max_asym });
    }
    let tr = e[0][0] + e[1][1] + e[2][2];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = 2.0 * t.mu * e[i][j];
        }
        out[i][i] += t.lambda_l * tr;
    }
    Ok(out)
}

/// Prestress of the trivial branch at unit load rate: diag(0, 0, −E).
pub fn trivial_stress(cfg: &ShellConfig) -> Mat3 {
    let mut s = [[0.0; 3]; 3];
    s[2][2] = -cfg.e_mod;
    s
}

/// A point on the trivial branch: load λ and in-plane stretch a(λ), with
/// ∇y = diag(1+a, 1+a, 1−λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrivialBranch {
    pub lambda: f64,
    pub a: f64,
}

impl TrivialBranch {
    pub fn grad_y(&self) -> Mat3 {
        let mut g = [[0.0; 3]; 3];
        g[0][0] = 1.0 + self.a;
        g[1][1] = 1.0 + self.a;
        g[2][2] = 1.0 - self.lambda;
        g
    }

    /// Green strain of the branch, diag(e₁, e₁, e₃).
    pub fn green_strain(&self) -> Mat3 {
        let e1 = ((1.0 + self.a).powi(2) - 1.0) / 2.0;
        let e3 = ((1.0 - self.lambda).powi(2) - 1.0) / 2.0;
        let mut e = [[0.0; 3]; 3];
        e[0][0] = e1;
        e[1][1] = e1;
        e[2][2] = e3;
        e
    }
}

/// Solve for the in-plane stretch of the Saint Venant–Kirchhoff trivial
/// branch under axial load λ.
///
/// The lateral stress balance λ_L(2e₁+e₃) + 2μe₁ = 0 gives e₁ = −ν e₃ with
/// Green strains e₁ = ((1+a)²−1)/2, e₃ = ((1−λ)²−1)/2, hence
/// a = √(1+2e₁) − 1. Loads are restricted to the small-compression regime
/// λ ∈ [−0.01, 0.1]; the negative sliver admits derivative probes at 0.
pub fn solve_trivial_branch(cfg: &ShellConfig, lambda: f64) -> Result<TrivialBranch> {
    if !(-0.01..=0.1).contains(&lambda) {
        return Err(Error::LoadTooLarge {
            lambda,
            arg: lambda,
        });
    }
    let e3 = ((1.0 - lambda).powi(2) - 1.0) / 2.0;
    let e1 = -cfg.nu * e3;
    let arg = 1.0 + 2.0 * e1;
    if arg <= 0.0 {
        return Err(Error::LoadTooLarge { lambda, arg });
    }
    Ok(TrivialBranch {
        lambda,
        a: arg.sqrt() - 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ShellConfig {
        ShellConfig::new(0.01, 2.0, 1.0, 0.3).unwrap()
    }

    #[test]
    fn identity_strain_maps_to_bulk_response() {
        let t = IsotropicTensor::from_config(&cfg());
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let s = apply_l0(&t, &e).unwrap();
        let want = 3.0 * t.lambda_l + 2.0 * t.mu;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { want } else { 0.0 };
                assert!((s[i][j] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pure_shear_is_traceless_response() {
        let t = IsotropicTensor::from_config(&cfg());
        let mut e = [[0.0; 3]; 3];
        e[0][1] = 1.0;
        e[1][0] = 1.0;
        let s = apply_l0(&t, &e).unwrap();
        assert!((s[0][1] - 2.0 * t.mu).abs() < 1e-15);
        assert!((s[0][0]).abs() < 1e-15);
        assert!((s[2][2]).abs() < 1e-15);
    }

    #[test]
    fn poisson_strain_gives_uniaxial_stress() {
        let c = cfg();
        let t = IsotropicTensor::from_config(&c);
        let nu = c.nu;
        let e = [[nu, 0.0, 0.0], [0.0, nu, 0.0], [0.0, 0.0, -1.0]];
        let s = apply_l0(&t, &e).unwrap();
        assert!(s[0][0].abs() < 1e-15);
        assert!(s[1][1].abs() < 1e-15);
        assert!((s[2][2] + c.e_mod).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonsymmetric_strain() {
        let t = IsotropicTensor::from_config(&cfg());
        let mut e = [[0.0; 3]; 3];
        e[0][1] = 1.0;
        assert!(matches!(
            apply_l0(&t, &e),
            Err(Error::NonSymmetricInput { .. })
        ));
    }

    #[test]
    fn trivial_stress_is_pure_axial_compression() {
        for (e_mod, nu) in [(1.0, 0.3), (2.5, 0.1), (2.5, 0.45)] {
            let c = ShellConfig::new(0.01, 2.0, e_mod, nu).unwrap();
            let s = trivial_stress(&c);
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == 2 && j == 2 { -e_mod } else { 0.0 };
                    assert_eq!(s[i][j], expect);
                }
            }
        }
    }

    #[test]
    fn zero_load_is_undeformed() {
        let b = solve_trivial_branch(&cfg(), 0.0).unwrap();
        assert_eq!(b.a, 0.0);
        assert_eq!(b.grad_y(), [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    #[test]
    fn stretch_matches_independent_newton_solve() {
        // oracle: scalar Newton on the lateral balance
        // g(a) = λ_L(2e₁(a)+e₃) + 2μe₁(a), e₁(a) = ((1+a)²−1)/2
        let c = cfg();
        let (ll, mu) = (c.lame_lambda(), c.lame_mu());
        let lambda = 0.05_f64;
        let e3 = ((1.0 - lambda).powi(2) - 1.0) / 2.0;
        let mut a = 0.0_f64;
        for _ in 0..60 {
            let e1 = ((1.0 + a).powi(2) - 1.0) / 2.0;
            let g = ll * (2.0 * e1 + e3) + 2.0 * mu * e1;
            let dg = (2.0 * ll + 2.0 * mu) * (1.0 + a);
            let step = g / dg;
            a -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let b = solve_trivial_branch(&c, lambda).unwrap();
        assert!((b.a - a).abs() < 1e-12, "closed form {} vs newton {}", b.a, a);
        let e1_closed = -c.nu * e3;
        assert!((b.a - ((1.0 + 2.0 * e1_closed).sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn stretch_slope_at_zero_is_poisson_ratio() {
        let c = cfg();
        let d = 1e-5;
        let ap = solve_trivial_branch(&c, d).unwrap().a;
        let am = solve_trivial_branch(&c, -d).unwrap().a;
        let slope = (ap - am) / (2.0 * d);
        assert!((slope - c.nu).abs() < 1e-8);
    }

    #[test]
    fn rejects_loads_outside_small_compression() {
        assert!(matches!(
            solve_trivial_branch(&cfg(), 0.2),
            Err(Error::LoadTooLarge { .. })
        ));
        assert!(matches!(
            solve_trivial_branch(&cfg(), -0.5),
            Err(Error::LoadTooLarge { .. })
        ));
    }

    #[test]
    fn stress_of_linearized_branch_strain_is_trivial_stress() {
        let c = cfg();
        let t = IsotropicTensor::from_config(&c);
        let e = [
            [c.nu, 0.0, 0.0],
            [0.0, c.nu, 0.0],
            [0.0, 0.0, -1.0],
        ];
        let s = apply_l0(&t, &e).unwrap();
        let want = trivial_stress(&c);
        for i in 0..3 {
            for j in 0..3 {
                assert!((s[i][j] - want[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn energy_density_bounds() {
        use rand::prelude::*;
        let t = IsotropicTensor::from_config(&cfg());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let frob2 = v[0] * v[0]
                + v[1] * v[1]
                + v[2] * v[2]
                + 2.0 * (v[3] * v[3] + v[4] * v[4] + v[5] * v[5]);
            let en = t.energy_density(v[0], v[1], v[2], v[3], v[4], v[5]);
            assert!(en >= 2.0 * t.mu * frob2 - 1e-12);
            assert!(en <= (3.0 * t.lambda_l + 2.0 * t.mu) * frob2 + 1e-12);
        }
    }
}
