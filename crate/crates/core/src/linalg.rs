//! Dense real matrix primitives: exponential, polar decomposition,
//! symmetric square root, nullspace, and small spectral helpers.
//!
//! Everything is dense `f64`; the intended regime is `d ≤ 50`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::subspace::Subspace;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Returns an error naming `what` if any entry of `m` is NaN or infinite.
pub fn check_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Operator (spectral) norm: the largest singular value.
pub fn op_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Symmetrizes a matrix: `(M + Mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &Matrix) -> Vec<f64> {
    let mut eigs: Vec<f64> = nalgebra::SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Largest eigenvalue of a symmetric matrix.
pub fn sym_max_eigenvalue(m: &Matrix) -> f64 {
    sym_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Largest real part among the (complex) eigenvalues of a general matrix.
pub fn spectral_abscissa(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

// Padé [13/13] coefficients for the matrix exponential (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential `e^{tA}` by scaling and squaring with a Padé [13/13]
/// approximant.
///
/// Accuracy target: relative error below `1e-12` for `‖tA‖ ≤ 50`.
pub fn expm(a: &Matrix, t: f64) -> Result<Matrix> {
    check_finite(a, "matrix exponential input")?;
    if !t.is_finite() {
        return Err(Error::NonFinite("matrix exponential time"));
    }
    let d = square_dim(a)?;
    let m = a * t;
    if t == 0.0 {
        return Ok(Matrix::identity(d, d));
    }

    let norm = one_norm(&m);
    let s = if norm > THETA13 {
        libm::ceil(libm::log2(norm / THETA13)) as i32
    } else {
        0
    };
    let scaled = &m * libm::exp2(-f64::from(s));

    let id = Matrix::identity(d, d);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6 * PADE13[13] + &a4 * PADE13[11] + &a2 * PADE13[9])
        + &a6 * PADE13[7]
        + &a4 * PADE13[5]
        + &a2 * PADE13[3]
        + &id * PADE13[1];
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * PADE13[12] + &a4 * PADE13[10] + &a2 * PADE13[8])
        + &a6 * PADE13[6]
        + &a4 * PADE13[4]
        + &a2 * PADE13[2]
        + &id * PADE13[0];

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut result = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::invalid("singular Padé denominator in expm"))?;
    for _ in 0..s {
        result = &result * &result;
    }
    Ok(result)
}

fn one_norm(m: &Matrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| libm::fabs(*x)).sum::<f64>())
        .fold(0.0, f64::max)
}

fn square_dim(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::invalid("matrix must be square and nonempty"));
    }
    Ok(m.nrows())
}

/// Polar decomposition `M = O·S` with `O` orthogonal and `S` the unique
/// symmetric PSD square root of `MᵀM`.
///
/// When `det M > 0`, `det O = +1`. For singular `M` the orthogonal factor is
/// not unique; the sign of the column matching the smallest singular value is
/// chosen so that `det O = +1` whenever possible.
pub fn polar_decompose(m: &Matrix) -> Result<(Matrix, Matrix)> {
    check_finite(m, "polar decomposition input")?;
    square_dim(m)?;
    let svd = m.clone().svd(true, true);
    let mut u = svd.u.ok_or_else(|| Error::invalid("SVD failed"))?;
    let v_t = svd.v_t.ok_or_else(|| Error::invalid("SVD failed"))?;
    let sigma = svd.singular_values;

    let s = v_t.transpose() * Matrix::from_diagonal(&sigma) * &v_t;

    // When M is singular the column of U paired with a vanishing singular
    // value is free; flip it if that restores det(O) = +1. For invertible M
    // with det > 0 the product already has positive determinant.
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    if (&u * &v_t).determinant() < 0.0 {
        let (jmin, &smin) = sigma
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty");
        if smin <= 1e-12 * (1.0 + sigma_max) {
            let col = -u.column(jmin);
            u.set_column(jmin, &col);
        }
    }
    let o = u * v_t;
    Ok((o, symmetrize(&s)))
}

/// Unique symmetric PSD square root of a symmetric PSD matrix.
///
/// Eigenvalues in `[−1e-10, 0]` are clamped to zero (Gram matrices built
/// from products of exponentials accumulate roundoff); anything more
/// negative is rejected.
pub fn sym_sqrt(s2: &Matrix) -> Result<Matrix> {
    check_finite(s2, "symmetric square root input")?;
    square_dim(s2)?;
    let asym = op_norm(&(s2 - s2.transpose()));
    if asym > 1e-10 * (1.0 + op_norm(s2)) {
        return Err(Error::NotSymmetric { residual: asym });
    }
    let eig = nalgebra::SymmetricEigen::new(symmetrize(s2));
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < -1e-10 * (1.0 + libm::fabs(*v)) && *v < -1e-10 {
            return Err(Error::NotPsd { min_eig: *v });
        }
        *v = libm::sqrt(v.max(0.0));
    }
    let q = eig.eigenvectors;
    Ok(symmetrize(&(&q * Matrix::from_diagonal(&vals) * q.transpose())))
}

/// Orthonormal basis of the (numerical) nullspace of `A`.
///
/// The nullspace is spanned by the right singular vectors whose singular
/// values satisfy `σ ≤ rel_tol·σ_max`. For `A = 0` the whole space is
/// returned.
pub fn nullspace(a: &Matrix, rel_tol: f64) -> Result<Subspace> {
    check_finite(a, "nullspace input")?;
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::invalid("nullspace rel_tol must lie in (0, 1)"));
    }
    let d = a.ncols();
    // Pad wide matrices with zero rows so the thin SVD still yields a full
    // set of right singular vectors.
    let a = if a.nrows() < d {
        let mut padded = Matrix::zeros(d, d);
        padded.view_mut((0, 0), (a.nrows(), d)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::invalid("SVD failed"))?;
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Ok(Subspace::full(d));
    }
    let cols: Vec<Vector> = (0..d)
        .filter(|&j| sigma.get(j).copied().unwrap_or(0.0) <= rel_tol * sigma_max)
        .map(|j| v_t.row(j).transpose())
        .collect();
    Subspace::from_orthonormal_columns(d, cols)
}

/// Rank of `A` at the given relative singular-value threshold.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    let sigma = a.clone().singular_values();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel_tol * sigma_max).count()
}
