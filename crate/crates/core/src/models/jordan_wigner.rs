//! Jordan-Wigner encoding of fermionic modes into qubits.
//!
//! Mode `i` maps to qubit `i` (bit `i` of the Fock index is the occupation
//! of mode `i`); the Z string sits on the lower-indexed modes, so number
//! operators land on single qubits.

use crate::error::{Error, Result};
use crate::operator::{ComplexOperator, ONE, ZERO};

/// Dense budget: 2^12 is the largest Fock space we materialize.
pub const MAX_MODES: usize = 12;

/// Creation/annihilation pair for one mode.
#[derive(Debug)]
pub struct LadderPair {
    pub creation: ComplexOperator,
    pub annihilation: ComplexOperator,
}

/// Jordan-Wigner ladder operators for `n_modes` fermionic modes.
pub fn jordan_wigner_operators(n_modes: usize) -> Result<Vec<LadderPair>> {
    if n_modes == 0 {
        return Err(Error::domain("jordan_wigner", "need at least one mode"));
    }
    if n_modes > MAX_MODES {
        return Err(Error::Budget {
            what: "Jordan-Wigner dense Fock space",
            needed: n_modes as u64,
            available: MAX_MODES as u64,
        });
    }
    let dim = 1usize << n_modes;
    let mut out = Vec::with_capacity(n_modes);
    for mode in 0..n_modes {
        let mut annihilation = ComplexOperator::zeros(dim);
        let bit = 1usize << mode;
        for idx in 0..dim {
            if idx & bit != 0 {
                // a_i |..1_i..> = (-1)^{#occupied below i} |..0_i..>
                let parity = (idx & (bit - 1)).count_ones();
                let sign = if parity % 2 == 0 { ONE } else { -ONE };
                annihilation[(idx ^ bit, idx)] = sign;
            }
        }
        let creation = annihilation.dagger();
        out.push(LadderPair {
            creation,
            annihilation,
        });
    }
    Ok(out)
}

/// Number operator `n_i = a_i† a_i` as a diagonal in the occupation basis.
pub fn number_operator(n_modes: usize, mode: usize) -> ComplexOperator {
    let dim = 1usize << n_modes;
    let bit = 1usize << mode;
    let mut m = ComplexOperator::zeros(dim);
    for idx in 0..dim {
        m[(idx, idx)] = if idx & bit != 0 { ONE } else { ZERO };
    }
    m
}

/// Total particle number `Σ_i n_i`.
pub fn total_number_operator(n_modes: usize) -> ComplexOperator {
    let dim = 1usize << n_modes;
    let mut m = ComplexOperator::zeros(dim);
    for idx in 0..dim {
        m[(idx, idx)] = ONE * (idx.count_ones() as f64);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anticommutator(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
        a.mul(b).add(&b.mul(a))
    }

    #[test]
    fn single_mode_matrix() {
        let ops = jordan_wigner_operators(1).unwrap();
        let a = &ops[0].annihilation;
        assert!((a[(0, 1)] - ONE).norm() < 1e-15);
        assert!(a[(0, 0)].norm() + a[(1, 0)].norm() + a[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn two_mode_mixed_anticommutator_vanishes() {
        let ops = jordan_wigner_operators(2).unwrap();
        let acc = anticommutator(&ops[0].annihilation, &ops[1].creation);
        assert!(acc.max_abs() < 1e-15);
    }

    #[test]
    fn canonical_anticommutation_exhaustive() {
        let n = 4;
        let ops = jordan_wigner_operators(n).unwrap();
        let id = ComplexOperator::identity(1 << n);
        for i in 0..n {
            for j in 0..n {
                let aa = anticommutator(&ops[i].annihilation, &ops[j].annihilation);
                assert!(aa.max_abs() < 1e-12, "{{a_{i}, a_{j}}} != 0");
                let ac = anticommutator(&ops[i].annihilation, &ops[j].creation);
                let want = if i == j {
                    id.clone()
                } else {
                    ComplexOperator::zeros(1 << n)
                };
                assert!(ac.max_abs_diff(&want) < 1e-12, "{{a_{i}, a_{j}†}} wrong");
            }
        }
    }

    #[test]
    fn number_operators_are_binary_diagonals() {
        let n = 3;
        let ops = jordan_wigner_operators(n).unwrap();
        for mode in 0..n {
            let num = ops[mode].creation.mul(&ops[mode].annihilation);
            assert!(num.max_abs_diff(&number_operator(n, mode)) < 1e-14);
            for (i, v) in num.diagonal().iter().enumerate() {
                let expect = ((i >> mode) & 1) as f64;
                assert!((v.re - expect).abs() < 1e-14 && v.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(
            jordan_wigner_operators(13).unwrap_err(),
            Error::Budget { .. }
        ));
    }
}
