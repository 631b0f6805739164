//! Dense complex linear algebra: the universal operator carrier plus the
//! spectral routines everything else is built on.
//!
//! Eigendecomposition (cyclic Jacobi for Hermitian matrices) is the reference
//! path for `matrix_exponential`, `hermitian_psd_sqrt` and `spectral_norm`;
//! faster alternatives are cross-checked against it in tests.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tol;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense square matrix of complex amplitudes, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexOperator {
    dim: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexOperator(dim={})", self.dim)?;
        if self.dim <= 8 {
            for r in 0..self.dim {
                for c in 0..self.dim {
                    let z = self[(r, c)];
                    write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexOperator {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexOperator {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl ComplexOperator {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be >= 1");
        ComplexOperator {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim);
            for (c, v) in row.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        m
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut m = self.clone();
        for a in m.data.iter_mut() {
            *a *= z;
        }
        m
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator product dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == ZERO {
                    continue;
                }
                let row_b = &other.data[k * n..(k + 1) * n];
                let row_o = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in row_o.iter_mut().zip(row_b) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += self.data[i * n + k] * v[k];
            }
            out[i] = acc;
        }
        out
    }

    /// Largest entry magnitude, `||A||_max`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `||A - B||_max`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `||A - A†||_max`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.hermiticity_deviation() <= tolerance
    }

    /// `||U†U - I||_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        self.dagger().mul(self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tolerance: f64) -> bool {
        self.unitarity_deviation() <= tolerance
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > tol::HERMITIAN_INPUT {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol: tol::HERMITIAN_INPUT,
            });
        }
        Ok(())
    }

    /// Kronecker product with `self` on the high-order bits.
    pub fn kron(&self, low: &Self) -> Self {
        let n = self.dim * low.dim;
        let mut out = Self::zeros(n);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self[(r1, c1)];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..low.dim {
                    for c2 in 0..low.dim {
                        out[(r1 * low.dim + r2, c1 * low.dim + c2)] = a * low[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn pauli_x() -> Self {
        Self::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(&[&[ZERO, -I], &[I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]])
    }
}

/// Complex amplitude vector with the handful of operations circuits need.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(dim: usize) -> Self {
        StateVector {
            amps: vec![ZERO; dim],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut s = Self::zero(dim);
        s.amps[index] = ONE;
        s
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.inner(self).re - 1.0).abs() <= tol::STATE_NORM
    }

    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        let mut s = Self::zero(dim);
        for a in s.amps.iter_mut() {
            *a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let n = s.norm();
        for a in s.amps.iter_mut() {
            *a /= n;
        }
        s
    }
}

/// Eigendecomposition of a Hermitian matrix: `H = V diag(lambda) V†`.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, same order as `values`.
    pub vectors: ComplexOperator,
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Converges quadratically; dimensions in this crate stay <= a few hundred,
/// where this is both fast and very accurate.
pub fn hermitian_eigen(h: &ComplexOperator) -> Result<HermitianEigen> {
    h.require_hermitian()?;
    let n = h.dim();
    let mut a = h.clone();
    // Symmetrize exactly so rounding in the input cannot bias the sweep.
    for r in 0..n {
        for c in 0..n {
            if r == c {
                a[(r, c)] = Complex64::new(a[(r, c)].re, 0.0);
            } else {
                let avg = 0.5 * (a[(r, c)] + a[(c, r)].conj());
                a[(r, c)] = avg;
                a[(c, r)] = avg.conj();
            }
        }
    }
    let mut v = ComplexOperator::identity(n);
    let scale = a.max_abs().max(1e-300);

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / mag; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Real 2x2 rotation that annihilates |apq|.
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s],[-s e^{-i phi}, c e^{-i phi}]] on (p, q):
                // A <- J† A J, V <- V J.
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * jpp + aiq * jqp;
                    a[(i, q)] = aip * jpq + aiq * jqq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = jpp.conj() * apj + jqp.conj() * aqj;
                    a[(q, j)] = jpq.conj() * apj + jqq.conj() * aqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * jpp + viq * jqp;
                    v[(i, q)] = vip * jpq + viq * jqq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = ComplexOperator::zeros(n);
    for (new_col, (_, old_col)) in pairs.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_col)] = v[(r, *old_col)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// `V f(Lambda) V†` for Hermitian input.
pub fn hermitian_function(
    h: &ComplexOperator,
    f: impl Fn(f64) -> Complex64,
) -> Result<ComplexOperator> {
    let eig = hermitian_eigen(h)?;
    let n = h.dim();
    let mut out = ComplexOperator::zeros(n);
    // V diag(f) V† accumulated column by column.
    for k in 0..n {
        let fk = f(eig.values[k]);
        if fk == ZERO {
            continue;
        }
        for r in 0..n {
            let vr = eig.vectors[(r, k)] * fk;
            if vr == ZERO {
                continue;
            }
            for c in 0..n {
                out[(r, c)] += vr * eig.vectors[(c, k)].conj();
            }
        }
    }
    Ok(out)
}

/// `e^{-i theta H}` for Hermitian `H`, by eigendecomposition.
///
/// The result is unitary to [`tol::UNITARY_OUTPUT`]; non-Hermitian input is
/// rejected with the measured deviation.
pub fn matrix_exponential(h: &ComplexOperator, theta: f64) -> Result<ComplexOperator> {
    if !h.is_finite() {
        return Err(Error::domain("matrix_exponential", "non-finite entries"));
    }
    hermitian_function(h, |lambda| (-I * (theta * lambda)).exp())
}

/// Hermitian PSD square root: returns `S` with `S·S = P`.
///
/// Eigenvalues in `[PSD_REJECT, 0)` are clamped to zero; anything lower is
/// rejected as not positive semidefinite.
pub fn hermitian_psd_sqrt(p: &ComplexOperator) -> Result<ComplexOperator> {
    let eig = hermitian_eigen(p)?;
    let min_eig = eig.values.first().copied().unwrap_or(0.0);
    if min_eig < tol::PSD_REJECT {
        return Err(Error::NotPsd { min_eig });
    }
    hermitian_function(p, |lambda| Complex64::new(lambda.max(0.0).sqrt(), 0.0))
}

/// Largest singular value, computed as `sqrt(lambda_max(A†A))`.
pub fn spectral_norm(op: &ComplexOperator) -> f64 {
    if op.dim() == 1 {
        return op[(0, 0)].norm();
    }
    let gram = op.dagger().mul(op);
    let eig = hermitian_eigen(&gram).expect("Gram matrix is Hermitian by construction");
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Independent route to the spectral norm: power iteration on `A†A`.
/// Retained as the cross-check partner for [`spectral_norm`].
pub fn spectral_norm_power_iteration(op: &ComplexOperator, iters: usize) -> f64 {
    let n = op.dim();
    let gram = op.dagger().mul(op);
    // Deterministic start vector with all-components support.
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64) * 0.137, 0.31 * ((i * i) as f64).sin()))
        .collect();
    let mut lambda = 0.0f64;
    for _ in 0..iters {
        let w = gram.apply(&v);
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.into_iter().map(|z| z / norm).collect();
    }
    lambda.sqrt()
}

/// Unitary whose first column is exactly the given unit vector, built from a
/// single Householder reflection (times a phase).
pub fn unitary_with_first_column(v: &[Complex64]) -> Result<ComplexOperator> {
    let n = v.len();
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::domain(
            "unitary_with_first_column",
            format!("input vector has norm {:.3e}, expected 1", norm2.sqrt()),
        ));
    }
    // Phase chosen so the reflector is far from singular: c = -e^{i arg v0}.
    let c = if v[0].norm() > 1e-300 {
        -(v[0] / v[0].norm())
    } else {
        -ONE
    };
    // w = v - c e0; H = I - 2 w w† / ||w||²; then (c·H) e0 = v.
    let mut w: Vec<Complex64> = v.to_vec();
    w[0] -= c;
    let w2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let mut u = ComplexOperator::identity(n);
    if w2 > 1e-300 {
        for r in 0..n {
            for col in 0..n {
                u[(r, col)] -= w[r] * w[col].conj() * (2.0 / w2);
            }
        }
    }
    Ok(u.scale(c))
}

/// Random Hermitian matrix with entries of order `scale`.
pub fn random_hermitian(dim: usize, scale: f64, rng: &mut impl Rng) -> ComplexOperator {
    let mut m = ComplexOperator::zeros(dim);
    for r in 0..dim {
        m[(r, r)] = Complex64::new(scale * (rng.random::<f64>() - 0.5), 0.0);
        for c in (r + 1)..dim {
            let z = Complex64::new(
                scale * (rng.random::<f64>() - 0.5),
                scale * (rng.random::<f64>() - 0.5),
            );
            m[(r, c)] = z;
            m[(c, r)] = z.conj();
        }
    }
    m
}

/// Random unitary, as the exponential of a random Hermitian generator.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexOperator {
    let h = random_hermitian(dim, 2.0, rng);
    matrix_exponential(&h, 1.0).expect("random Hermitian generator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent expm route for cross-checks: scaling and squaring with a
    /// plain Taylor series on the scaled matrix.
    fn expm_taylor_scaled(h: &ComplexOperator, theta: f64) -> ComplexOperator {
        let n = h.dim();
        let a = h.scale(Complex64::new(0.0, -theta)); // -i theta H
        let norm = a.max_abs() * n as f64;
        let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
        let scaled = a.scale(Complex64::new(1.0 / 2f64.powi(squarings as i32), 0.0));
        let mut term = ComplexOperator::identity(n);
        let mut sum = ComplexOperator::identity(n);
        for k in 1..=24 {
            term = term.mul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }

    #[test]
    fn expm_zero_generator_is_identity() {
        let h = ComplexOperator::zeros(2);
        let u = matrix_exponential(&h, 1.0).unwrap();
        assert!(u.max_abs_diff(&ComplexOperator::identity(2)) < 1e-14);
    }

    #[test]
    fn expm_pauli_z_pi_is_minus_identity() {
        let u = matrix_exponential(&ComplexOperator::pauli_z(), std::f64::consts::PI).unwrap();
        let expected = ComplexOperator::identity(2).scale(-ONE);
        assert!(u.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn expm_cross_checks_against_taylor_scaling_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let h = random_hermitian(4, 2.0, &mut rng);
            let a = matrix_exponential(&h, 0.3).unwrap();
            let b = expm_taylor_scaled(&h, 0.3);
            assert!(a.max_abs_diff(&b) < 1e-10, "delta {}", a.max_abs_diff(&b));
        }
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut m = ComplexOperator::zeros(2);
        m[(0, 1)] = ONE;
        let err = matrix_exponential(&m, 1.0).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn expm_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let h = random_hermitian(4, 1.0, &mut rng);
            let a = 2.0 * rng.random::<f64>() - 1.0;
            let b = 2.0 * rng.random::<f64>() - 1.0;
            let lhs = matrix_exponential(&h, a + b).unwrap();
            let rhs = matrix_exponential(&h, a)
                .unwrap()
                .mul(&matrix_exponential(&h, b).unwrap());
            assert!(lhs.max_abs_diff(&rhs) < 1e-9);
        }
    }

    #[test]
    fn expm_output_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dim in [2usize, 4, 8, 16] {
            let h = random_hermitian(dim, 3.0, &mut rng);
            let u = matrix_exponential(&h, 0.7).unwrap();
            assert!(u.unitarity_deviation() < tol::UNITARY_OUTPUT);
        }
    }

    #[test]
    fn psd_sqrt_closed_forms() {
        let id = ComplexOperator::identity(3);
        assert!(hermitian_psd_sqrt(&id).unwrap().max_abs_diff(&id) < 1e-12);

        let p = ComplexOperator::from_diagonal(&[Complex64::new(4.0, 0.0), Complex64::new(9.0, 0.0)]);
        let s = hermitian_psd_sqrt(&p).unwrap();
        let expected =
            ComplexOperator::from_diagonal(&[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
        assert!(s.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn psd_sqrt_reconstructs_subnormalized_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let h = random_hermitian(4, 1.0, &mut rng);
            let alpha = spectral_norm(&h) * 1.5;
            let a = h.scale(Complex64::new(1.0 / alpha, 0.0));
            let p = ComplexOperator::identity(4).sub(&a.dagger().mul(&a));
            let s = hermitian_psd_sqrt(&p).unwrap();
            assert!(s.mul(&s).max_abs_diff(&p) < 1e-10);
            assert!(s.is_hermitian(1e-10));
        }
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let p = ComplexOperator::from_diagonal(&[ONE, Complex64::new(-0.5, 0.0)]);
        assert!(matches!(
            hermitian_psd_sqrt(&p).unwrap_err(),
            Error::NotPsd { .. }
        ));
    }

    #[test]
    fn spectral_norm_closed_forms() {
        assert!((spectral_norm(&ComplexOperator::pauli_x()) - 1.0).abs() < 1e-12);
        let d = ComplexOperator::from_diagonal(&[Complex64::new(3.0, 0.0), Complex64::new(-5.0, 0.0)]);
        assert!((spectral_norm(&d) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_cross_checks_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let mut m = ComplexOperator::zeros(8);
            for r in 0..8 {
                for c in 0..8 {
                    m[(r, c)] =
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                }
            }
            let a = spectral_norm(&m);
            let b = spectral_norm_power_iteration(&m, 3000);
            assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn spectral_norm_submultiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let a = random_hermitian(4, 1.0, &mut rng);
            let b = random_hermitian(4, 1.0, &mut rng);
            let ab = spectral_norm(&a.mul(&b));
            assert!(ab <= spectral_norm(&a) * spectral_norm(&b) + 1e-9);
        }
    }

    #[test]
    fn eigen_reconstructs_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for dim in [2usize, 3, 5, 16] {
            let h = random_hermitian(dim, 2.0, &mut rng);
            let eig = hermitian_eigen(&h).unwrap();
            let lambda = ComplexOperator::from_diagonal(
                &eig.values
                    .iter()
                    .map(|&x| Complex64::new(x, 0.0))
                    .collect::<Vec<_>>(),
            );
            let rebuilt = eig.vectors.mul(&lambda).mul(&eig.vectors.dagger());
            assert!(rebuilt.max_abs_diff(&h) < 1e-11);
            assert!(eig.vectors.unitarity_deviation() < 1e-11);
        }
    }

    #[test]
    fn householder_column_prep() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in [2usize, 4, 8] {
            let s = StateVector::random(n, &mut rng);
            let u = unitary_with_first_column(&s.amps).unwrap();
            assert!(u.unitarity_deviation() < 1e-12);
            for r in 0..n {
                assert!((u[(r, 0)] - s.amps[r]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn state_vector_norms() {
        let s = StateVector::basis(4, 2);
        assert!(s.is_normalized());
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        assert!(StateVector::random(8, &mut rng).is_normalized());
    }
}
