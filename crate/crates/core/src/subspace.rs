//! Orthonormal-basis representation of linear subspaces of ℝ^d and the
//! subspace algebra (intersection, sum, membership) used by the geometric
//! stability certificates.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// A linear subspace of ℝ^d, stored as a `d×k` matrix with orthonormal
/// columns. `k = 0` represents the trivial subspace `{0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl Subspace {
    /// The trivial subspace `{0}` of ℝ^d.
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::zeros(ambient, 0),
        }
    }

    /// The full space ℝ^d.
    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::identity(ambient, ambient),
        }
    }

    /// Builds a subspace from columns that are already orthonormal;
    /// orthonormality is verified to `1e-12`.
    pub fn from_orthonormal_columns(ambient: usize, cols: Vec<Vector>) -> Result<Self> {
        let k = cols.len();
        if k > ambient {
            return Err(Error::invalid("more basis vectors than ambient dimension"));
        }
        let mut basis = Matrix::zeros(ambient, k);
        for (j, c) in cols.iter().enumerate() {
            if c.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    found: c.len(),
                });
            }
            basis.set_column(j, c);
        }
        let gram = basis.transpose() * &basis;
        let dev = linalg::op_norm(&(&gram - Matrix::identity(k, k)));
        if dev > 1e-12 && k > 0 {
            return Err(Error::invalid("basis columns are not orthonormal"));
        }
        Ok(Subspace { ambient, basis })
    }

    /// Builds the span of arbitrary (possibly dependent) columns, using the
    /// left singular vectors above the relative rank threshold.
    pub fn span(ambient: usize, cols: &[Vector], rank_rel: f64) -> Result<Self> {
        if cols.is_empty() {
            return Ok(Subspace::zero(ambient));
        }
        let mut m = Matrix::zeros(ambient, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    found: c.len(),
                });
            }
            m.set_column(j, c);
        }
        Self::column_space(&m, rank_rel)
    }

    /// Orthonormal basis of the column space of `m`.
    pub fn column_space(m: &Matrix, rank_rel: f64) -> Result<Self> {
        linalg::check_finite(m, "column space input")?;
        let ambient = m.nrows();
        let svd = m.clone().svd(true, false);
        let u = svd.u.ok_or_else(|| Error::invalid("SVD failed"))?;
        let sigma = &svd.singular_values;
        let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
        if sigma_max == 0.0 {
            return Ok(Subspace::zero(ambient));
        }
        let cols: Vec<Vector> = (0..sigma.len())
            .filter(|&j| sigma[j] > rank_rel * sigma_max)
            .map(|j| u.column(j).into())
            .collect();
        Self::from_orthonormal_columns(ambient, cols)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// The `d×k` orthonormal basis matrix.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        (0..self.dim()).map(|j| self.basis.column(j).into()).collect()
    }

    /// Orthogonal projector `QQᵀ` onto the subspace.
    pub fn projector(&self) -> Matrix {
        if self.dim() == 0 {
            return Matrix::zeros(self.ambient, self.ambient);
        }
        &self.basis * self.basis.transpose()
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &Vector) -> Vector {
        if self.dim() == 0 {
            return Vector::zeros(self.ambient);
        }
        &self.basis * (self.basis.transpose() * x)
    }

    /// Euclidean distance from `x` to the subspace.
    pub fn distance(&self, x: &Vector) -> f64 {
        (x - self.project(x)).norm()
    }

    /// True iff the distance from `x` to the subspace is at most `tol·‖x‖`
    /// (the zero vector is always contained).
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        let n = x.norm();
        if n == 0.0 {
            return true;
        }
        self.distance(x) <= tol * n
    }

    /// Intersection `U ∩ W`, as the nullspace of `(I − P_U) + (I − P_W)`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let d = self.ambient;
        let id = Matrix::identity(d, d);
        // Stack the complement projectors instead of summing them: the sum
        // squares small principal angles and lets near-parallel directions
        // slip under the rank threshold.
        let mut a = Matrix::zeros(2 * d, d);
        a.view_mut((0, 0), (d, d))
            .copy_from(&(&id - self.projector()));
        a.view_mut((d, 0), (d, d))
            .copy_from(&(&id - other.projector()));
        linalg::nullspace(&a, 1e-9)
    }

    /// Sum `U + W`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let mut cols = self.basis_vectors();
        cols.extend(other.basis_vectors());
        Subspace::span(self.ambient, &cols, 1e-9)
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient);
        }
        if self.dim() == self.ambient {
            return Subspace::zero(self.ambient);
        }
        linalg::nullspace(&self.basis.transpose(), 1e-9)
            .expect("complement of a valid subspace")
    }

    /// True iff every basis vector of `self` is within `tol` of `other`.
    pub fn is_subset_of(&self, other: &Subspace, tol: f64) -> bool {
        (0..self.dim()).all(|j| {
            let v: Vector = self.basis.column(j).into();
            other.distance(&v) <= tol
        })
    }

    /// Largest principal angle between two subspaces of equal dimension,
    /// in radians. Returns `None` when dimensions differ.
    pub fn max_principal_angle(&self, other: &Subspace) -> Option<f64> {
        if self.dim() != other.dim() || self.ambient != other.ambient {
            return None;
        }
        if self.dim() == 0 {
            return Some(0.0);
        }
        let m = self.basis.transpose() * &other.basis;
        let cosines = m.singular_values();
        let min_cos = cosines.iter().copied().fold(f64::INFINITY, f64::min);
        Some(libm::acos(min_cos.clamp(-1.0, 1.0)))
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: other.ambient,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(i: usize, d: usize) -> Vector {
        let mut v = Vector::zeros(d);
        v[i] = 1.0;
        v
    }

    fn random_subspace(d: usize, k: usize, rng: &mut impl Rng) -> Subspace {
        let cols: Vec<Vector> = (0..k)
            .map(|_| Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        Subspace::span(d, &cols, 1e-9).unwrap()
    }

    #[test]
    fn intersect_and_sum_of_coordinate_lines() {
        // 𝒱₂ = span{e₃}, 𝒱₃ = span{e₂}: intersection {0}, sum = {x = 0}.
        let v2 = Subspace::span(3, &[e(2, 3)], 1e-9).unwrap();
        let v3 = Subspace::span(3, &[e(1, 3)], 1e-9).unwrap();
        let inter = v2.intersect(&v3).unwrap();
        assert_eq!(inter.dim(), 0);
        let sum = v2.sum(&v3).unwrap();
        assert_eq!(sum.dim(), 2);
        let plane = Subspace::span(3, &[e(1, 3), e(2, 3)], 1e-9).unwrap();
        assert!(sum.is_subset_of(&plane, 1e-10) && plane.is_subset_of(&sum, 1e-10));
    }

    #[test]
    fn idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_subspace(4, 2, &mut rng);
        let uu = u.intersect(&u).unwrap();
        assert_eq!(uu.dim(), u.dim());
        assert!(uu.is_subset_of(&u, 1e-8) && u.is_subset_of(&uu, 1e-8));
        let s = u.sum(&u).unwrap();
        assert_eq!(s.dim(), u.dim());
    }

    #[test]
    fn generic_position_in_r4() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let u = random_subspace(4, 2, &mut rng);
            let w = random_subspace(4, 2, &mut rng);
            // Generic-position oracle: rank of the stacked bases.
            let mut cols = u.basis_vectors();
            cols.extend(w.basis_vectors());
            let mut m = Matrix::zeros(4, 4);
            for (j, c) in cols.iter().enumerate() {
                m.set_column(j, c);
            }
            let stacked_rank = linalg::rank(&m, 1e-9);
            assert_eq!(stacked_rank, 4, "random planes should be generic");
            assert_eq!(u.intersect(&w).unwrap().dim(), 0);
            assert_eq!(u.sum(&w).unwrap().dim(), 4);
        }
    }

    #[test]
    fn containment_and_distance() {
        let u = Subspace::span(3, &[e(0, 3), e(1, 3)], 1e-9).unwrap();
        let x = Vector::from_vec(vec![1.0, 2.0, 0.0]);
        assert!(u.contains(&x, 1e-12));
        let y = Vector::from_vec(vec![0.0, 0.0, 3.0]);
        assert!(!u.contains(&y, 1e-6));
        assert!((u.distance(&y) - 3.0).abs() < 1e-12);
        assert!(u.contains(&Vector::zeros(3), 0.0));
    }

    #[test]
    fn ambient_mismatch_rejected() {
        let u = Subspace::full(2);
        let w = Subspace::full(3);
        assert!(matches!(
            u.intersect(&w),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn complement_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=4 {
            let u = random_subspace(4, k, &mut rng);
            let c = u.complement();
            assert_eq!(u.dim() + c.dim(), 4);
            assert_eq!(u.intersect(&c).unwrap().dim(), 0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn grassmann_identity(seed in 0u64..1000, ku in 0usize..=3, kw in 0usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 4;
            let u = random_subspace(d, ku, &mut rng);
            let w = random_subspace(d, kw, &mut rng);
            let inter = u.intersect(&w).unwrap();
            let sum = u.sum(&w).unwrap();
            prop_assert_eq!(sum.dim() + inter.dim(), u.dim() + w.dim());
        }

        #[test]
        fn shared_direction_is_detected(seed in 0u64..1000) {
            // Force a common vector; the intersection must pick it up.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 4;
            let shared = Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0_f64));
            let u = Subspace::span(d, &[shared.clone(),
                Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))], 1e-9).unwrap();
            let w = Subspace::span(d, &[shared.clone(),
                Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))], 1e-9).unwrap();
            let inter = u.intersect(&w).unwrap();
            prop_assert!(inter.dim() >= 1);
            prop_assert!(inter.contains(&shared, 1e-6));
        }
    }
}
