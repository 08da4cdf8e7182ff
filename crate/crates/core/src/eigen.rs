//! Smallest eigenvalue of the symmetric pencils A x = λ (B + εM) x.
//!
//! The denominator form B can be singular (fields with vanishing z-column,
//! say), so a small multiple of the mass form is added before solving; the
//! shift is chosen far below every eigenvalue of interest and its effect is
//! visible in the reported residual.
//!
//! Both solvers work with the reciprocal operator: with A = LLᵀ the pencil
//! eigenvalues are the reciprocals of those of Op = L⁻¹(B+εM)L⁻ᵀ, and the
//! largest eigenvalue of Op is insensitive to the near-null directions of B
//! that make the direct congruence with a factor of B + εM ill-conditioned.
//! The dense solver diagonalizes Op outright; the iterative one finds its top
//! eigenpair by Lanczos with full reorthogonalization. If A itself is only
//! semidefinite the dense solver falls back to the B-side congruence. Either
//! way the reported value is the Rayleigh quotient of the computed
//! eigenvector, so refining the grid can only lower it.

use crate::assemble::{BForm, SymMat};
use crate::error::{Error, Result};
use faer::linalg::triangular_solve::{
    solve_lower_triangular_in_place, solve_upper_triangular_in_place,
};
use faer::{Mat, Par, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverTag {
    Dense,
    Iterative,
}

/// Raw pencil solve: the smallest eigenpair in DOF coordinates.
#[derive(Debug, Clone)]
pub struct PencilEig {
    pub lambda: f64,
    pub x: Vec<f64>,
    /// ‖A x − λ (B+εM) x‖ / ‖x‖.
    pub residual: f64,
    pub tag: SolverTag,
    /// Regularization actually applied.
    pub eps: f64,
}

/// Crossover dimension between the dense and iterative solvers.
pub const DENSE_LIMIT: usize = 2000;

/// Residual acceptance threshold, relative to ‖A‖.
pub const RESIDUAL_TOL: f64 = 1e-9;

const LANCZOS_MAX_ITERS: usize = 400;

/// Smallest eigenvalue of A x = λ (B + εM) x.
///
/// `eps` defaults to 1e-12·trace(B)/n. Dense solver for n ≤ 2000, iterative
/// above; a diverged iteration surfaces as [`Error::SolverDiverged`] so the
/// caller can retry dense.
pub fn smallest_eig(
    a: &SymMat,
    b: &BForm,
    mass: &[f64],
    eps: Option<f64>,
) -> Result<PencilEig> {
    let tag = if a.n <= DENSE_LIMIT {
        SolverTag::Dense
    } else {
        SolverTag::Iterative
    };
    smallest_eig_with(a, b, mass, eps, tag)
}

/// Same contract as [`smallest_eig`] with the solver chosen explicitly.
pub fn smallest_eig_with(
    a: &SymMat,
    b: &BForm,
    mass: &[f64],
    eps: Option<f64>,
    tag: SolverTag,
) -> Result<PencilEig> {
    let n = a.n;
    if b.n() != n || mass.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.n().min(mass.len()),
        });
    }
    let tr_b = b.trace();
    if !(tr_b > 0.0) {
        return Err(Error::ZeroDenominator { value: tr_b });
    }
    let eps = eps.unwrap_or(1e-12 * tr_b / n as f64);
    match tag {
        SolverTag::Dense => solve_dense(a, b, mass, eps),
        SolverTag::Iterative => solve_iterative(a, b, mass, eps),
    }
}

fn bprime_matvec(b: &BForm, mass: &[f64], eps: f64, x: &[f64], y: &mut [f64]) {
    b.matvec(x, y);
    for ((yv, &m), &xv) in y.iter_mut().zip(mass).zip(x) {
        *yv += eps * m * xv;
    }
}

fn bprime_quadratic(b: &BForm, mass: &[f64], eps: f64, x: &[f64]) -> f64 {
    let m: f64 = mass.iter().zip(x).map(|(&w, &v)| w * v * v).sum();
    b.quadratic(x) + eps * m
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|&v| v * v).sum::<f64>().sqrt()
}

/// Rayleigh quotient, residual, and divergence check shared by both solvers.
fn finish(
    a: &SymMat,
    b: &BForm,
    mass: &[f64],
    eps: f64,
    x: Vec<f64>,
    tag: SolverTag,
    iterations: usize,
) -> Result<PencilEig> {
    let n = a.n;
    let denom = bprime_quadratic(b, mass, eps, &x);
    if !(denom > 0.0) {
        return Err(Error::ZeroDenominator { value: denom });
    }
    let lambda = (a.quadratic(&x) / denom).max(0.0);
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    let mut bx = vec![0.0; n];
    bprime_matvec(b, mass, eps, &x, &mut bx);
    for (rv, &bv) in r.iter_mut().zip(&bx) {
        *rv -= lambda * bv;
    }
    let residual = norm2(&r) / norm2(&x);
    if !(residual < RESIDUAL_TOL * a.inf_norm()) {
        return Err(Error::SolverDiverged {
            residual,
            iterations,
        });
    }
    Ok(PencilEig {
        lambda,
        x,
        residual,
        tag,
        eps,
    })
}

fn bprime_faer(b: &BForm, mass: &[f64], eps: f64) -> Mat<f64> {
    let n = mass.len();
    let mut bp = match b {
        BForm::Dense(m) => m.to_faer(),
        BForm::Diag(d) => Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 }),
    };
    for i in 0..n {
        bp[(i, i)] += eps * mass[i];
    }
    bp
}

fn solve_dense(a: &SymMat, b: &BForm, mass: &[f64], eps: f64) -> Result<PencilEig> {
    let n = a.n;
    if let Ok(llt) = a.to_faer().llt(Side::Lower) {
        let l = llt.L();
        // Op = L⁻¹ (B+εM) L⁻ᵀ by two triangular solves
        let mut c = bprime_faer(b, mass, eps);
        solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
        let mut c = c.transpose().to_owned();
        solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
        let eig = c
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::SolverDiverged {
                residual: f64::INFINITY,
                iterations: 0,
            })?;
        // eigenvalues come back nondecreasing; the top one is 1/λ_min
        let mut y = Mat::from_fn(n, 1, |i, _| eig.U()[(i, n - 1)]);
        solve_upper_triangular_in_place(l.transpose(), y.as_mut(), Par::Seq);
        let x: Vec<f64> = (0..n).map(|i| y[(i, 0)]).collect();
        return finish(a, b, mass, eps, x, SolverTag::Dense, 0);
    }
    // A is only semidefinite: congruence with the regularized denominator
    let llt = bprime_faer(b, mass, eps)
        .llt(Side::Lower)
        .map_err(|_| Error::SolverDiverged {
            residual: f64::INFINITY,
            iterations: 0,
        })?;
    let l = llt.L();
    let mut c = a.to_faer();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let mut c = c.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let eig = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::SolverDiverged {
            residual: f64::INFINITY,
            iterations: 0,
        })?;
    let mut y = Mat::from_fn(n, 1, |i, _| eig.U()[(i, 0)]);
    solve_upper_triangular_in_place(l.transpose(), y.as_mut(), Par::Seq);
    let x: Vec<f64> = (0..n).map(|i| y[(i, 0)]).collect();
    finish(a, b, mass, eps, x, SolverTag::Dense, 0)
}

fn seeded_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect();
    let nrm = norm2(&v);
    for vv in &mut v {
        *vv /= nrm;
    }
    v
}

/// Largest eigenpair of the tridiagonal (alpha, beta) via a dense solve of
/// the small matrix; returns (θ_max, Ritz coefficients).
fn tridiag_top(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = alpha.len();
    let t = Mat::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if j + 1 == i || i + 1 == j {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::SolverDiverged {
            residual: f64::INFINITY,
            iterations: k,
        })?;
    let theta = eig.S()[k - 1];
    let s: Vec<f64> = (0..k).map(|i| eig.U()[(i, k - 1)]).collect();
    Ok((theta, s))
}

fn solve_iterative(a: &SymMat, b: &BForm, mass: &[f64], eps: f64) -> Result<PencilEig> {
    let n = a.n;
    let fa = a.to_faer();
    let llt = fa.llt(Side::Lower).map_err(|_| Error::SolverDiverged {
        residual: f64::INFINITY,
        iterations: 0,
    })?;
    let l = llt.L();

    // Op y = L⁻¹ (B+εM) L⁻ᵀ y; pencil eigenvalues are 1/θ.
    let apply = |y: &[f64]| -> Vec<f64> {
        let mut u = Mat::from_fn(n, 1, |i, _| y[i]);
        solve_upper_triangular_in_place(l.transpose(), u.as_mut(), Par::Seq);
        let uv: Vec<f64> = (0..n).map(|i| u[(i, 0)]).collect();
        let mut z = vec![0.0; n];
        bprime_matvec(b, mass, eps, &uv, &mut z);
        let mut w = Mat::from_fn(n, 1, |i, _| z[i]);
        solve_lower_triangular_in_place(l, w.as_mut(), Par::Seq);
        (0..n).map(|i| w[(i, 0)]).collect()
    };

    let max_iters = LANCZOS_MAX_ITERS.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iters);
    basis.push(seeded_unit(n, 0x5eed_cafe_f00d));
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut converged: Option<Vec<f64>> = None;
    let mut op_scale = 0.0_f64;

    for k in 0..max_iters {
        let mut w = apply(&basis[k]);
        let ak: f64 = w.iter().zip(&basis[k]).map(|(&a, &b)| a * b).sum();
        alpha.push(ak);
        op_scale = op_scale.max(ak.abs());
        // full reorthogonalization, twice
        for _ in 0..2 {
            for v in &basis {
                let c: f64 = w.iter().zip(v).map(|(&a, &b)| a * b).sum();
                for (wv, &vv) in w.iter_mut().zip(v) {
                    *wv -= c * vv;
                }
            }
        }
        let bk = norm2(&w);
        let exhausted = bk <= 1e-14 * op_scale.max(1.0) || k + 1 == max_iters;
        if exhausted || (k >= 10 && (k + 1) % 10 == 0) {
            let (theta, s) = tridiag_top(&alpha, &beta)?;
            let ritz_res = if exhausted { 0.0 } else { bk * s[k].abs() };
            if ritz_res <= 1e-13 * theta.abs().max(f64::MIN_POSITIVE) || exhausted {
                let mut y = vec![0.0; n];
                for (j, v) in basis.iter().enumerate() {
                    for (yv, &vv) in y.iter_mut().zip(v) {
                        *yv += s[j] * vv;
                    }
                }
                converged = Some(y);
                break;
            }
        }
        beta.push(bk);
        for wv in &mut w {
            *wv /= bk;
        }
        basis.push(w);
    }

    let iterations = alpha.len();
    let y = converged.ok_or(Error::SolverDiverged {
        residual: f64::INFINITY,
        iterations,
    })?;
    // back-transform: x = L⁻ᵀ y
    let mut xm = Mat::from_fn(n, 1, |i, _| y[i]);
    solve_upper_triangular_in_place(l.transpose(), xm.as_mut(), Par::Seq);
    let x: Vec<f64> = (0..n).map(|i| xm[(i, 0)]).collect();
    finish(a, b, mass, eps, x, SolverTag::Iterative, iterations)
}
