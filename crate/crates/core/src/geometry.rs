//! Vectors, symmetric positive-definite matrices and projections onto the
//! feasible ball `{x : ‖x‖ ≤ D}`.
//!
//! Projections in a quadratic metric reduce to a one-dimensional search over
//! the multiplier of the ball constraint: for `min ½zᵀHz − bᵀz` subject to
//! `‖z‖ ≤ D`, the minimizer on the boundary is `z(λ) = (H + λI)⁻¹b` with the
//! unique `λ ≥ 0` for which `‖z(λ)‖ = D`. After one eigendecomposition of `H`
//! each evaluation of `‖z(λ)‖` costs `O(n)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{invalid, Error, Result};

/// Dense real vector. Entries are kept finite by every constructor in the crate.
pub type Vector = DVector<f64>;

const BISECTION_MAX_ITER: usize = 200;

pub(crate) fn ensure_finite(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_dim(v: &Vector, expected: usize) -> Result<()> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found: v.len() })
    }
}

/// A symmetric matrix intended to be positive definite.
///
/// Construction symmetrizes the input as `(M + Mᵀ)/2`. Positive definiteness
/// is checked lazily, when a factorization is requested.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let sym = (&m + m.transpose()) * 0.5;
        SpdMatrix(sym)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        SpdMatrix(DMatrix::identity(n, n) * c)
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// `γ·self + other`, symmetrized.
    pub fn discounted_add(&self, gamma: f64, other: &DMatrix<f64>) -> SpdMatrix {
        Self::symmetrized(&self.0 * gamma + other)
    }

    pub fn quad_form(&self, v: &Vector) -> f64 {
        v.dot(&(&self.0 * v))
    }

    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.0.clone()).ok_or(Error::SingularMetric)
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        ensure_dim(b, self.dim())?;
        Ok(self.cholesky()?.solve(b))
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let inv = self.cholesky()?.inverse();
        Ok((&inv + inv.transpose()) * 0.5)
    }

    pub fn eigenvalues(&self) -> Vector {
        SymmetricEigen::new(self.0.clone()).eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }

    /// Induced 2-norm; for a symmetric matrix the largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().amax()
    }
}

/// The feasible set: a Euclidean ball of radius `D ≥ 1` centred at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibleBall {
    radius: f64,
    dim: usize,
}

impl FeasibleBall {
    pub fn new(radius: f64, dim: usize) -> Result<Self> {
        if !radius.is_finite() || radius < 1.0 {
            return Err(invalid(format!("ball radius must be finite and at least 1, got {radius}")));
        }
        if dim == 0 {
            return Err(invalid("ball dimension must be at least 1"));
        }
        Ok(FeasibleBall { radius, dim })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `‖x‖ ≤ D(1 + rel_tol)`.
    pub fn contains(&self, x: &Vector, rel_tol: f64) -> bool {
        x.norm() <= self.radius * (1.0 + rel_tol)
    }

    pub(crate) fn check_point(&self, x: &Vector, what: &'static str) -> Result<()> {
        ensure_dim(x, self.dim)?;
        ensure_finite(x, what)?;
        Ok(())
    }

    pub(crate) fn require_feasible(&self, x: &Vector, what: &'static str) -> Result<()> {
        self.check_point(x, what)?;
        if self.contains(x, 1e-12) {
            Ok(())
        } else {
            Err(Error::Infeasible { norm: x.norm(), radius: self.radius })
        }
    }

    /// Euclidean projection: `y` itself when inside, otherwise `D·y/‖y‖`.
    pub fn project_euclidean(&self, y: &Vector) -> Result<Vector> {
        self.check_point(y, "projection input")?;
        let norm = y.norm();
        if norm <= self.radius {
            Ok(y.clone())
        } else {
            Ok(y * (self.radius / norm))
        }
    }

    /// Projection in the metric `‖z − y‖²_P`.
    pub fn project_metric(&self, y: &Vector, p: &SpdMatrix) -> Result<Vector> {
        self.check_point(y, "projection input")?;
        ensure_dim(y, p.dim())?;
        // Factorization doubles as the positive-definiteness check.
        p.cholesky()?;
        if y.norm() <= self.radius {
            return Ok(y.clone());
        }
        let b = p.as_matrix() * y;
        self.minimize_on_boundary(p, &b)
    }

    /// Minimizes `½zᵀHz − bᵀz` over the ball for positive definite `H`.
    ///
    /// Returns the unconstrained minimizer `H⁻¹b` when it is feasible.
    pub fn minimize_quadratic(&self, h: &SpdMatrix, b: &Vector) -> Result<Vector> {
        self.check_point(b, "linear term")?;
        ensure_dim(b, h.dim())?;
        let unconstrained = h.solve(b)?;
        let norm = unconstrained.norm();
        if norm <= self.radius {
            return Ok(unconstrained);
        }
        if norm <= self.radius * (1.0 + 1e-12) {
            return Ok(unconstrained * (self.radius / norm));
        }
        self.minimize_on_boundary(h, b)
    }

    fn minimize_on_boundary(&self, h: &SpdMatrix, b: &Vector) -> Result<Vector> {
        let eig = SymmetricEigen::new(h.as_matrix().clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::SingularMetric);
        }
        let coeffs = eig.eigenvectors.transpose() * b;
        let norm_at = |lambda: f64| -> f64 {
            coeffs
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, l)| (c / (l + lambda)).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let d = self.radius;

        let mut lo = 0.0;
        let mut hi = 1.0;
        while norm_at(hi) >= d {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() || hi > 1e300 {
                return Err(Error::Internal("multiplier search failed to bracket the boundary".into()));
            }
        }
        // Invariant: norm_at(lo) ≥ D > norm_at(hi).
        for _ in 0..BISECTION_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if norm_at(mid) >= d {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c / (l + hi)),
        );
        Ok(&eig.eigenvectors * scaled)
    }
}
