//! Chebyshev lattices and their orthogonal representation.
//!
//! The Chebyshev lattice of dimension `d` is generated by the Vandermonde
//! matrix `T` of the scaled Chebyshev roots `xi_k = 2 cos(pi (2k-1) / (2d))`.
//! A unimodular integer matrix `S` maps it onto a basis `T~ = T S` whose
//! columns are `2 cos((l-1) theta_k)` (the first column is all ones). That
//! basis has Gram matrix `diag(d, 2d, ..., 2d)`, so it factors as `T~ = Q D`
//! with `Q` orthogonal, and the dual lattice is generated by `Q D^-1`.
//!
//! The lattice is admissible exactly when `d` is a power of two.

use std::f64::consts::PI;

use crate::error::{FrolovError, Result};
use crate::matrix::{IntMatrix, Matrix};

/// Relative tolerance used when a cached determinant is checked against LU.
pub const DET_REL_TOL: f64 = 1e-10;

/// A full-rank lattice given by the columns of a square generating matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    matrix: Matrix,
    det: f64,
}

impl LatticeBasis {
    /// Wrap a generating matrix, computing its determinant by LU.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(FrolovError::domain("generating matrix must be square and non-empty"));
        }
        let det = matrix.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(FrolovError::SingularMatrix);
        }
        Ok(LatticeBasis { matrix, det })
    }

    /// Wrap a matrix whose determinant is known in closed form.
    pub(crate) fn with_determinant(matrix: Matrix, det: f64) -> Self {
        debug_assert!(matrix.is_square());
        LatticeBasis { matrix, det }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// Generator `a_j` (zero-based column index).
    pub fn generator(&self, j: usize) -> Vec<f64> {
        self.matrix.column(j)
    }

    /// The lattice point `A k`.
    pub fn apply(&self, k: &[i64]) -> Vec<f64> {
        self.matrix.mul_int(k)
    }
}

/// Scaled Chebyshev roots `xi_k = 2 cos(pi (2k-1) / (2d))` for `k = 1..d`,
/// strictly decreasing.
pub fn chebyshev_roots(d: usize) -> Result<Vec<f64>> {
    check_dim(d)?;
    Ok((1..=d).map(|k| 2.0 * cos_pi_ratio((2 * k - 1) as u64, 2 * d as u64)).collect())
}

/// Vandermonde generating matrix with rows `(1, xi_k, ..., xi_k^{d-1})`.
pub fn vandermonde_basis(roots: &[f64]) -> Result<LatticeBasis> {
    let d = roots.len();
    if d == 0 {
        return Err(FrolovError::domain("need at least one root"));
    }
    if roots.iter().any(|r| !r.is_finite()) {
        return Err(FrolovError::domain("roots must be finite"));
    }
    // det of a Vandermonde matrix is prod_{i<j} (xi_j - xi_i)
    let mut det = 1.0;
    for i in 0..d {
        for j in i + 1..d {
            det *= roots[j] - roots[i];
        }
    }
    if det == 0.0 {
        return Err(FrolovError::SingularMatrix);
    }
    let matrix = Matrix::from_fn(d, d, |k, l| roots[k].powi(l as i32));
    Ok(LatticeBasis::with_determinant(matrix, det))
}

/// Integer coefficients expressing `eta_1^l - eta_l` in terms of
/// `1, eta_1, ..., eta_{l-2}`, where `eta_j = 2 cos(j w pi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnReduction {
    order: usize,
    coeffs: Vec<i64>,
}

impl ColumnReduction {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `(m_0, m_1, ..., m_{l-2})`.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `eta_1^l - eta_l - (m_0 + sum_j m_j eta_j)` evaluated at `omega`.
    pub fn residual(&self, omega: f64) -> f64 {
        let eta = |j: usize| 2.0 * (j as f64 * omega * PI).cos();
        let lhs = eta(1).powi(self.order as i32) - eta(self.order);
        let rhs = self.coeffs[0] as f64
            + self.coeffs.iter().enumerate().skip(1).map(|(j, &m)| m as f64 * eta(j)).sum::<f64>();
        lhs - rhs
    }
}

/// Coefficients of `eta_1^l - eta_l` from the binomial expansion of
/// `(e^{iw pi} + e^{-iw pi})^l`: `m_j = C(l, (l-j)/2)` when `l - j` is even,
/// and the constant term `m_0 = C(l, l/2)` for even `l`.
pub fn column_reduction_coeffs(l: usize) -> Result<ColumnReduction> {
    if l < 2 {
        return Err(FrolovError::domain(format!("reduction order must be >= 2, got {l}")));
    }
    let mut coeffs = vec![0i64; l - 1];
    for (j, c) in coeffs.iter_mut().enumerate() {
        if (l - j).is_multiple_of(2) {
            *c = binomial(l as u64, ((l - j) / 2) as u64).ok_or(FrolovError::Overflow(l))?;
        }
    }
    Ok(ColumnReduction { order: l, coeffs })
}

/// The orthogonal generating matrix `T~` with entries `1` in the first
/// column and `2 cos(pi (l-1)(2k-1) / (2d))` elsewhere.
pub fn orthogonal_basis(d: usize) -> Result<LatticeBasis> {
    check_dim(d)?;
    let matrix =
        Matrix::from_fn(
            d,
            d,
            |k, l| {
                if l == 0 {
                    1.0
                } else {
                    2.0 * cos_pi_ratio((l * (2 * k + 1)) as u64, 2 * d as u64)
                }
            },
        );
    Ok(LatticeBasis::with_determinant(matrix, chebyshev_det(d)))
}

/// The unimodular matrix `S = S^(3) ... S^(d)` with `T S = T~`.
///
/// Column `l` of `S^(l)` carries the negated coefficients of order `l - 1`,
/// which rewrite the power `xi^{l-1}` as `2 cos((l-1) theta)`.
pub fn reduction_matrix(d: usize) -> Result<IntMatrix> {
    check_dim(d)?;
    let mut s = IntMatrix::identity(d);
    for l in 3..=d {
        let red = column_reduction_coeffs(l - 1)?;
        let mut step = IntMatrix::identity(d);
        for (row, &m) in red.coeffs().iter().enumerate() {
            step[(row, l - 1)] = -m;
        }
        s = s.checked_matmul(&step).ok_or(FrolovError::Overflow(d))?;
    }
    Ok(s)
}

/// Factor the orthogonal Chebyshev basis as `T~ = Q D`.
///
/// `D` is fixed to `(sqrt d, sqrt 2d, ..., sqrt 2d)`; the input is rejected if
/// its Gram matrix deviates from `D^2` by more than `1e-9 d`.
pub fn qd_decomposition(basis: &LatticeBasis) -> Result<(Matrix, Vec<f64>)> {
    let d = basis.dim();
    check_dim(d)?;
    let deviation = gram_residual(basis);
    let tolerance = 1e-9 * d as f64;
    if deviation.is_nan() || deviation > tolerance {
        return Err(FrolovError::NonOrthogonal { deviation, tolerance });
    }
    let diag = d_factor(d);
    let inv: Vec<f64> = diag.iter().map(|x| 1.0 / x).collect();
    Ok((basis.matrix().scale_columns(&inv), diag))
}

/// `max |T~^T T~ - diag(d, 2d, ..., 2d)|`.
pub fn gram_residual(basis: &LatticeBasis) -> f64 {
    let d = basis.dim();
    let expected = Matrix::diagonal(&d_factor(d).iter().map(|x| x * x).collect::<Vec<_>>());
    basis.matrix().gram().max_abs_diff(&expected)
}

/// `(sqrt d, sqrt 2d, ..., sqrt 2d)`.
pub fn d_factor(d: usize) -> Vec<f64> {
    let mut v = vec![((2 * d) as f64).sqrt(); d];
    v[0] = (d as f64).sqrt();
    v
}

/// `|det T~| = sqrt(d (2d)^{d-1})`, equal to `det D`.
pub fn abs_det(d: usize) -> f64 {
    det_d_squared(d).sqrt()
}

/// `d (2d)^{d-1}`.
pub(crate) fn det_d_squared(d: usize) -> f64 {
    d as f64 * ((2 * d) as f64).powi(d as i32 - 1)
}

/// Signed determinant of `T` and of `T~` (they agree because `det S = 1`).
/// With decreasing roots every Vandermonde factor `xi_j - xi_i` is negative.
fn chebyshev_det(d: usize) -> f64 {
    let sign = if (d * (d - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * abs_det(d)
}

/// Everything derived from one dimension: roots, both bases, the reduction
/// matrix, the `Q D` factors and the admissibility flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevSystem {
    dim: usize,
    roots: Vec<f64>,
    vandermonde: LatticeBasis,
    orthogonal: LatticeBasis,
    reduction: IntMatrix,
    q_factor: Matrix,
    d_factor: Vec<f64>,
    admissible: bool,
}

impl ChebyshevSystem {
    pub fn new(d: usize) -> Result<Self> {
        let roots = chebyshev_roots(d)?;
        let vandermonde = vandermonde_basis(&roots)?;
        let orthogonal = orthogonal_basis(d)?;
        let reduction = reduction_matrix(d)?;
        let (q_factor, d_factor) = qd_decomposition(&orthogonal)?;
        Ok(ChebyshevSystem {
            dim: d,
            roots,
            vandermonde,
            orthogonal,
            reduction,
            q_factor,
            d_factor,
            admissible: d.is_power_of_two(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// `T`.
    pub fn vandermonde(&self) -> &LatticeBasis {
        &self.vandermonde
    }

    /// `T~`.
    pub fn orthogonal(&self) -> &LatticeBasis {
        &self.orthogonal
    }

    /// `S`.
    pub fn reduction(&self) -> &IntMatrix {
        &self.reduction
    }

    pub fn q_factor(&self) -> &Matrix {
        &self.q_factor
    }

    /// Diagonal of `D`.
    pub fn d_factor(&self) -> &[f64] {
        &self.d_factor
    }

    pub fn admissible(&self) -> bool {
        self.admissible
    }

    /// `max |(T S - T~)_{kl}| / max |T S|`. Cancellation in `T S` grows with
    /// `d`; this stays below `1e-7` up to `d = 12`.
    pub fn reduction_residual(&self) -> f64 {
        let ts = self.vandermonde.matrix().matmul(&self.reduction.to_f64());
        ts.max_abs_diff(self.orthogonal.matrix()) / ts.max_abs()
    }

    pub fn gram_residual(&self) -> f64 {
        gram_residual(&self.orthogonal)
    }

    /// `max |Q^T Q - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        self.q_factor.gram().max_abs_diff(&Matrix::identity(self.dim))
    }
}

/// Generating matrix `Q D^-1` of the dual lattice. Checks that it pairs with
/// `T~` to the identity within `1e-8`.
pub fn dual_basis(system: &ChebyshevSystem) -> Result<LatticeBasis> {
    let inv: Vec<f64> = system.d_factor().iter().map(|x| 1.0 / x).collect();
    let dual = system.q_factor().scale_columns(&inv);
    let pairing = dual.transpose().matmul(system.orthogonal().matrix());
    let deviation = pairing.max_abs_diff(&Matrix::identity(system.dim()));
    if deviation > 1e-8 {
        return Err(FrolovError::NonOrthogonal { deviation, tolerance: 1e-8 });
    }
    Ok(LatticeBasis::with_determinant(dual, 1.0 / system.orthogonal().det()))
}

/// `min |prod_i (A k)_i|` over a finite set of nonzero integer vectors: a
/// finite-sample upper witness for the norm form of the lattice.
pub fn admissibility_witness(basis: &LatticeBasis, points: &[Vec<i64>]) -> Result<f64> {
    if points.is_empty() {
        return Err(FrolovError::domain("admissibility witness needs at least one point"));
    }
    let mut best = f64::INFINITY;
    for k in points {
        if k.len() != basis.dim() {
            return Err(FrolovError::DimensionMismatch { expected: basis.dim(), actual: k.len() });
        }
        if k.iter().all(|&x| x == 0) {
            return Err(FrolovError::domain("zero vector is not allowed in the witness set"));
        }
        let prod: f64 = basis.apply(k).iter().product();
        best = best.min(prod.abs());
    }
    Ok(best)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(FrolovError::DegenerateDimension(d));
    }
    Ok(())
}

/// `cos(pi num / den)`, reducing `num` modulo `2 den` first.
fn cos_pi_ratio(num: u64, den: u64) -> f64 {
    let r = num % (2 * den);
    (PI * r as f64 / den as f64).cos()
}

fn binomial(n: u64, k: u64) -> Option<i64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    i64::try_from(acc).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    /// Q_n(x) = 2 T_n(x/2) in the monomial basis, via Q_{n+1} = x Q_n - Q_{n-1}.
    fn scaled_chebyshev_coeffs(n: usize) -> Vec<i64> {
        let mut prev = vec![2i64];
        let mut cur = vec![0i64, 1];
        if n == 0 {
            return prev;
        }
        for _ in 1..n {
            let mut next = vec![0i64; cur.len() + 1];
            for (i, &c) in cur.iter().enumerate() {
                next[i + 1] += c;
            }
            for (i, &c) in prev.iter().enumerate() {
                next[i] -= c;
            }
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn roots_small_dims() {
        let r = chebyshev_roots(2).unwrap();
        assert!((r[0] - SQRT2).abs() < 1e-15 && (r[1] + SQRT2).abs() < 1e-15);
        let r4 = chebyshev_roots(4).unwrap();
        assert!((r4[0] - 1.847_759_065_022_573_5).abs() < 1e-14);
        assert_eq!(chebyshev_roots(1), Err(FrolovError::DegenerateDimension(1)));
        assert_eq!(chebyshev_roots(0), Err(FrolovError::DegenerateDimension(0)));
    }

    #[test]
    fn roots_are_zeros_of_chebyshev_and_decreasing() {
        for d in 2..=32 {
            let r = chebyshev_roots(d).unwrap();
            assert!(r.windows(2).all(|w| w[0] > w[1]));
            assert!(r.iter().all(|x| x.abs() < 2.0));
            for &x in &r {
                let t = (d as f64 * (x / 2.0).acos()).cos();
                assert!((2.0 * t).abs() < 1e-9, "d={d} x={x}");
            }
        }
    }

    #[test]
    fn vandermonde_d2() {
        let b = vandermonde_basis(&chebyshev_roots(2).unwrap()).unwrap();
        let want = Matrix::from_rows(&[vec![1.0, SQRT2], vec![1.0, -SQRT2]]);
        assert!(b.matrix().max_abs_diff(&want) < 1e-15);
        assert!((b.det() + 2.0 * SQRT2).abs() < 1e-14);
        assert!((b.matrix().determinant() - b.det()).abs() < 1e-14);
    }

    #[test]
    fn vandermonde_duplicate_roots_are_singular() {
        assert_eq!(vandermonde_basis(&[1.0, 0.5, 1.0]), Err(FrolovError::SingularMatrix));
    }

    #[test]
    fn vandermonde_d4_determinant() {
        let sys = ChebyshevSystem::new(4).unwrap();
        let expected = (4.0f64 * 512.0).sqrt();
        assert!((expected - 45.254_833_995_939_04).abs() < 1e-12);
        assert!((sys.vandermonde().det().abs() - expected).abs() < 1e-10 * expected);
        assert!((sys.orthogonal().det().abs() - expected).abs() < 1e-10 * expected);
        let lu = sys.vandermonde().matrix().determinant();
        assert!((lu - sys.vandermonde().det()).abs() < DET_REL_TOL * expected);
    }

    #[test]
    fn cached_determinants_match_lu() {
        for d in 2..=16 {
            let sys = ChebyshevSystem::new(d).unwrap();
            for b in [sys.vandermonde(), sys.orthogonal()] {
                let lu = b.matrix().determinant();
                assert!((lu - b.det()).abs() <= DET_REL_TOL * b.det().abs(), "d={d}: {lu} vs {}", b.det());
            }
        }
    }

    #[test]
    fn reduction_coeffs_examples() {
        assert_eq!(column_reduction_coeffs(2).unwrap().coeffs(), &[2]);
        assert_eq!(column_reduction_coeffs(3).unwrap().coeffs(), &[0, 3]);
        assert_eq!(column_reduction_coeffs(4).unwrap().coeffs(), &[6, 0, 4]);
        assert!(column_reduction_coeffs(1).is_err());
        assert!(column_reduction_coeffs(3).unwrap().residual(0.3).abs() < 1e-12);
        let mut rng = rand_chacha();
        let red = column_reduction_coeffs(4).unwrap();
        for _ in 0..10 {
            assert!(red.residual(rng.gen_range(0.0..1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn reduction_identity_holds_to_order_20() {
        let mut rng = rand_chacha();
        for l in 2..=20 {
            let red = column_reduction_coeffs(l).unwrap();
            for _ in 0..50 {
                let w: f64 = rng.gen_range(0.0..1.0);
                assert!(red.residual(w).abs() < 1e-6, "l={l} w={w}");
            }
        }
        assert_eq!(column_reduction_coeffs(20).unwrap().coeffs()[0], 184_756);
    }

    #[test]
    fn orthogonal_basis_d2_and_gram() {
        let b = orthogonal_basis(2).unwrap();
        let rows = b.matrix().to_rows();
        assert_eq!(rows[0][0], 1.0);
        assert!((rows[0][1] - SQRT2).abs() < 1e-15 && (rows[1][1] + SQRT2).abs() < 1e-15);
        let g = orthogonal_basis(4).unwrap().matrix().gram();
        for (i, want) in [4.0, 8.0, 8.0, 8.0].iter().enumerate() {
            assert!((g[(i, i)] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_gram_identity_to_32() {
        for d in 2..=32 {
            let b = orthogonal_basis(d).unwrap();
            assert!(b.matrix().max_abs() <= 2.0);
            assert!(gram_residual(&b) <= 1e-9 * d as f64, "d={d}");
        }
    }

    #[test]
    fn reduction_matrix_small() {
        assert_eq!(reduction_matrix(2).unwrap(), IntMatrix::identity(2));
        let s3 = reduction_matrix(3).unwrap();
        assert_eq!(s3.to_rows(), vec![vec![1, 0, -2], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn reduction_matrix_columns_are_chebyshev_coefficients() {
        // column l of S holds the monomial coefficients of Q_{l-1}, except the
        // first column (the constant 1 rather than Q_0 = 2)
        for d in 2..=24 {
            let s = reduction_matrix(d).unwrap();
            for l in 1..d {
                let q = scaled_chebyshev_coeffs(l);
                for row in 0..d {
                    let want = q.get(row).copied().unwrap_or(0);
                    assert_eq!(s[(row, l)], want, "d={d} col={l} row={row}");
                }
            }
            assert_eq!(s.determinant(), Some(1));
        }
    }

    #[test]
    fn t_times_s_is_orthogonal_basis() {
        for d in 2..=12 {
            let sys = ChebyshevSystem::new(d).unwrap();
            assert!(sys.reduction_residual() <= 1e-7, "d={d}: {}", sys.reduction_residual());
        }
    }

    #[test]
    fn qd_d2() {
        let sys = ChebyshevSystem::new(2).unwrap();
        assert!((sys.d_factor()[0] - SQRT2).abs() < 1e-15);
        assert_eq!(sys.d_factor()[1], 2.0);
        let h = 1.0 / SQRT2;
        let want = Matrix::from_rows(&[vec![h, h], vec![h, -h]]);
        assert!(sys.q_factor().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn qd_rejects_non_orthogonal() {
        let sys = ChebyshevSystem::new(3).unwrap();
        let err = qd_decomposition(sys.vandermonde()).unwrap_err();
        assert!(matches!(err, FrolovError::NonOrthogonal { .. }));
    }

    #[test]
    fn q_is_orthogonal_with_unit_det() {
        for d in 2..=32 {
            let sys = ChebyshevSystem::new(d).unwrap();
            assert!(sys.orthogonality_residual() <= 1e-9 * (d as f64).sqrt());
            assert!((sys.q_factor().determinant().abs() - 1.0).abs() <= 1e-8);
            let expect = (d as f64).sqrt();
            assert_eq!(sys.d_factor()[0], expect);
        }
    }

    #[test]
    fn dual_basis_pairs_to_identity() {
        let sys2 = ChebyshevSystem::new(2).unwrap();
        let dual2 = dual_basis(&sys2).unwrap();
        let want = sys2.q_factor().scale_columns(&[1.0 / SQRT2, 0.5]);
        assert!(dual2.matrix().max_abs_diff(&want) < 1e-15);

        let sys4 = ChebyshevSystem::new(4).unwrap();
        let g = dual_basis(&sys4).unwrap().matrix().gram();
        let want = Matrix::diagonal(&[0.25, 0.125, 0.125, 0.125]);
        assert!(g.max_abs_diff(&want) < 1e-14);

        for d in 2..=32 {
            let sys = ChebyshevSystem::new(d).unwrap();
            let dual = dual_basis(&sys).unwrap();
            let pairing = dual.matrix().transpose().matmul(sys.orthogonal().matrix());
            assert!(pairing.max_abs_diff(&Matrix::identity(d)) < 1e-8);
        }
    }

    #[test]
    fn admissible_flag() {
        for d in 2..=32 {
            let sys = ChebyshevSystem::new(d).unwrap();
            assert_eq!(sys.admissible(), [2, 4, 8, 16, 32].contains(&d), "d={d}");
        }
    }

    #[test]
    fn witness_examples() {
        let b2 = orthogonal_basis(2).unwrap();
        assert_eq!(admissibility_witness(&b2, &[vec![1, 0]]).unwrap(), 1.0);
        assert!(admissibility_witness(&b2, &[]).is_err());
        assert!(admissibility_witness(&b2, &[vec![0, 0]]).is_err());

        // exhaustive over the box |k|_inf <= 3 in d = 4
        let b4 = orthogonal_basis(4).unwrap();
        let mut pts = Vec::new();
        for idx in 0..7usize.pow(4) {
            let k: Vec<i64> = (0..4).map(|j| (idx / 7usize.pow(j)) as i64 % 7 - 3).collect();
            if k.iter().any(|&x| x != 0) {
                pts.push(k);
            }
        }
        assert_eq!(pts.len(), 2400);
        assert!(admissibility_witness(&b4, &pts).unwrap() > 0.0);

        let sys3 = ChebyshevSystem::new(3).unwrap();
        assert!(!sys3.admissible());
        assert!(admissibility_witness(sys3.orthogonal(), &[vec![1, 1, 0]]).unwrap() > 0.0);
    }

    fn rand_chacha() -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(0x5eed)
    }
}
