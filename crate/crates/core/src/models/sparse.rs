//! d-sparse Hamiltonians behind entry/position oracles, the classical
//! stand-ins for O_H and O_f.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::ComplexOperator;

/// `(time index, row, col) -> H_{row,col}(t)`.
pub type EntryFn = dyn Fn(usize, usize, usize) -> Complex64 + Send + Sync;
/// `(time index, row, slot) -> column of the slot-th nonzero in the row`
/// (a zero element, conventionally the row itself, when the slot is unused).
pub type PositionFn = dyn Fn(usize, usize, usize) -> usize + Send + Sync;

/// Dense-materialization budget for sparse specs.
pub const MAX_SPARSE_DIM: usize = 1 << 10;

#[derive(Clone)]
pub struct SparseHamiltonianSpec {
    pub dim: usize,
    /// Max nonzeros per row at any time index.
    pub d: usize,
    /// Promised bound on `max_t ||H(t)||_max`.
    pub hmax: f64,
    pub entry: Arc<EntryFn>,
    pub position: Arc<PositionFn>,
    /// Optional O_H output precision: entries rounded to this many
    /// fractional bits before use.
    pub precision_bits: Option<u32>,
}

impl SparseHamiltonianSpec {
    /// Entry oracle output, after the optional n_p-bit quantizer.
    pub fn entry_value(&self, t: usize, row: usize, col: usize) -> Complex64 {
        let raw = (self.entry)(t, row, col);
        match self.precision_bits {
            None => raw,
            Some(bits) => {
                let scale = 2f64.powi(bits as i32);
                Complex64::new(
                    (raw.re * scale).round() / scale,
                    (raw.im * scale).round() / scale,
                )
            }
        }
    }

    pub fn position_value(&self, t: usize, row: usize, slot: usize) -> usize {
        (self.position)(t, row, slot)
    }

    /// True when every listed entry sits on the main diagonal.
    pub fn is_diagonal(&self, t: usize) -> bool {
        for row in 0..self.dim {
            for slot in 0..self.d {
                let col = self.position_value(t, row, slot);
                if col != row && self.entry_value(t, row, col).norm() > 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// Assemble the dense matrix at one time index purely through the oracles,
/// validating Hermiticity, per-row sparsity, and the `hmax` promise.
pub fn sparse_matrix_materialize(
    spec: &SparseHamiltonianSpec,
    time_index: usize,
) -> Result<ComplexOperator> {
    if spec.dim > MAX_SPARSE_DIM {
        return Err(Error::Budget {
            what: "sparse materialization",
            needed: spec.dim as u64,
            available: MAX_SPARSE_DIM as u64,
        });
    }
    let mut m = ComplexOperator::zeros(spec.dim);
    for row in 0..spec.dim {
        for slot in 0..spec.d {
            let col = spec.position_value(time_index, row, slot);
            if col >= spec.dim {
                return Err(Error::Sparsity {
                    row,
                    col,
                    detail: "position oracle returned an out-of-range column".into(),
                });
            }
            let v = spec.entry_value(time_index, row, col);
            if v.norm() > spec.hmax + 1e-12 {
                return Err(Error::Sparsity {
                    row,
                    col,
                    detail: format!("|H_xy| = {} exceeds Hmax = {}", v.norm(), spec.hmax),
                });
            }
            m[(row, col)] = v;
        }
        // Entries outside the listed slots must vanish (true d-sparsity).
        let listed: Vec<usize> = (0..spec.d)
            .map(|s| spec.position_value(time_index, row, s))
            .collect();
        for col in 0..spec.dim {
            if !listed.contains(&col) && spec.entry_value(time_index, row, col).norm() > 0.0 {
                return Err(Error::Sparsity {
                    row,
                    col,
                    detail: "nonzero entry outside the positions listed by O_f".into(),
                });
            }
        }
    }
    let dev = m.hermiticity_deviation();
    if dev > 1e-12 {
        // Locate one offending pair for the diagnostic.
        for r in 0..spec.dim {
            for c in 0..spec.dim {
                if (m[(r, c)] - m[(c, r)].conj()).norm() > 1e-12 {
                    return Err(Error::Sparsity {
                        row: r,
                        col: c,
                        detail: format!("Hermiticity violated by {dev:.3e}"),
                    });
                }
            }
        }
    }
    Ok(m)
}

/// Wrap a fixed dense Hermitian matrix as a (time-independent) sparse spec.
///
/// Unused slots point at distinct zero-valued columns so every row lists `d`
/// different positions.
pub fn spec_from_dense(matrix: &ComplexOperator, hmax: f64) -> Result<SparseHamiltonianSpec> {
    matrix.require_hermitian()?;
    let dim = matrix.dim();
    let mut positions: Vec<Vec<usize>> = Vec::with_capacity(dim);
    let mut d = 1usize;
    for row in 0..dim {
        let nz: Vec<usize> = (0..dim).filter(|&c| matrix[(row, c)].norm() > 0.0).collect();
        d = d.max(nz.len().max(1));
        positions.push(nz);
    }
    for row_positions in positions.iter_mut() {
        let mut filler = 0usize;
        while row_positions.len() < d {
            while row_positions.contains(&filler) {
                filler += 1;
            }
            row_positions.push(filler);
        }
    }
    let m = matrix.clone();
    let entry: Arc<EntryFn> = Arc::new(move |_t, r, c| m[(r, c)]);
    let position: Arc<PositionFn> = Arc::new(move |_t, r, slot| positions[r][slot]);
    Ok(SparseHamiltonianSpec {
        dim,
        d,
        hmax,
        entry,
        position,
        precision_bits: None,
    })
}

/// Random banded Hermitian spec: nonzeros on the diagonal band |r - c| <= band,
/// complex phases off the diagonal. Sparsity d = 2*band + 1.
pub fn random_banded_spec(
    dim: usize,
    band: usize,
    hmax: f64,
    rng: &mut impl Rng,
) -> SparseHamiltonianSpec {
    let mut m = ComplexOperator::zeros(dim);
    for r in 0..dim {
        m[(r, r)] = Complex64::new(hmax * (2.0 * rng.random::<f64>() - 1.0), 0.0);
        for c in (r + 1)..dim.min(r + band + 1) {
            let z = Complex64::from_polar(
                hmax * rng.random::<f64>(),
                std::f64::consts::TAU * rng.random::<f64>(),
            );
            m[(r, c)] = z;
            m[(c, r)] = z.conj();
        }
    }
    spec_from_dense(&m, hmax).expect("banded matrix is Hermitian by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ONE;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_oracle_gives_zero_matrix() {
        let spec = SparseHamiltonianSpec {
            dim: 4,
            d: 1,
            hmax: 1.0,
            entry: Arc::new(|_, _, _| Complex64::new(0.0, 0.0)),
            position: Arc::new(|_, r, _| r),
            precision_bits: None,
        };
        let m = sparse_matrix_materialize(&spec, 0).unwrap();
        assert!(m.max_abs() == 0.0);
    }

    #[test]
    fn hand_assembled_pauli_x() {
        let spec = SparseHamiltonianSpec {
            dim: 2,
            d: 1,
            hmax: 1.0,
            entry: Arc::new(|_, r, c| {
                if (r, c) == (0, 1) || (r, c) == (1, 0) {
                    ONE
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            position: Arc::new(|_, r, _| 1 - r),
            precision_bits: None,
        };
        let m = sparse_matrix_materialize(&spec, 0).unwrap();
        assert!(m.max_abs_diff(&ComplexOperator::pauli_x()) < 1e-15);
    }

    #[test]
    fn banded_spec_round_trips_through_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let spec = random_banded_spec(8, 1, 1.0, &mut rng);
        let via_oracles = sparse_matrix_materialize(&spec, 0).unwrap();
        // Direct construction from the same callbacks.
        let mut direct = ComplexOperator::zeros(8);
        for r in 0..8 {
            for c in 0..8 {
                direct[(r, c)] = spec.entry_value(0, r, c);
            }
        }
        assert!(via_oracles.max_abs_diff(&direct) < 1e-15);
        assert!(via_oracles.is_hermitian(1e-12));
        for r in 0..8 {
            let nonzeros = (0..8).filter(|&c| via_oracles[(r, c)].norm() > 0.0).count();
            assert!(nonzeros <= spec.d);
        }
    }

    #[test]
    fn hermiticity_violation_rejected_with_location() {
        let spec = SparseHamiltonianSpec {
            dim: 2,
            d: 1,
            hmax: 2.0,
            entry: Arc::new(|_, r, c| {
                if (r, c) == (0, 1) {
                    ONE
                } else if (r, c) == (1, 0) {
                    Complex64::new(0.5, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            position: Arc::new(|_, r, _| 1 - r),
            precision_bits: None,
        };
        assert!(matches!(
            sparse_matrix_materialize(&spec, 0).unwrap_err(),
            Error::Sparsity { .. }
        ));
    }

    #[test]
    fn over_norm_entry_rejected() {
        let spec = SparseHamiltonianSpec {
            dim: 2,
            d: 1,
            hmax: 0.5,
            entry: Arc::new(|_, r, c| if r != c { ONE } else { Complex64::new(0.0, 0.0) }),
            position: Arc::new(|_, r, _| 1 - r),
            precision_bits: None,
        };
        assert!(sparse_matrix_materialize(&spec, 0).is_err());
    }

    #[test]
    fn quantizer_rounds_entries() {
        let mut spec = SparseHamiltonianSpec {
            dim: 2,
            d: 1,
            hmax: 1.0,
            entry: Arc::new(|_, r, c| {
                if r != c {
                    Complex64::new(0.333333333, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            position: Arc::new(|_, r, _| 1 - r),
            precision_bits: Some(4),
        };
        let v = spec.entry_value(0, 0, 1);
        assert!((v.re - 0.3125).abs() < 1e-15); // 5/16
        spec.precision_bits = None;
        assert!((spec.entry_value(0, 0, 1).re - 0.333333333).abs() < 1e-15);
    }

    #[test]
    fn diagonal_detection() {
        let diag = ComplexOperator::from_diagonal(&[ONE, ONE * 2.0, ONE * 3.0, ONE * -1.0]);
        let spec = spec_from_dense(&diag, 3.0).unwrap();
        assert!(spec.is_diagonal(0));
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        assert!(!random_banded_spec(4, 1, 1.0, &mut rng).is_diagonal(0));
    }
}
