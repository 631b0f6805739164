//! Block encodings: unitaries whose ancilla-zero block is a target operator
//! over a declared normalization, realized as matrix-free circuits.
//!
//! Covers the unitary dilation of a raw matrix, LCU PREP/SEL, the
//! time-indexed encoding of sampled Hamiltonians, the interaction-picture
//! conjugated encoding, the sparse-oracle synthesis, and diagonal
//! fast-forwarding.

use std::sync::Arc;

use num_complex::Complex64;

use crate::circuit::{
    apply_block_column, Circuit, CounterKind, Op, OpKind, QueryCounts, RegisterLayout,
};
use crate::error::{Error, Result};
use crate::models::sparse::SparseHamiltonianSpec;
use crate::models::SampledHamiltonian;
use crate::operator::{
    self, hermitian_psd_sqrt, spectral_norm, unitary_with_first_column, ComplexOperator,
    StateVector, ONE, ZERO,
};
use crate::tol;

/// A unitary circuit with a declared encoded block:
/// `(<0|_ancilla ⊗ 1) circuit (|0>_ancilla ⊗ 1) = target / alpha`.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub circuit: Circuit,
    /// Normalization: extracted block times `alpha` reproduces the target.
    pub alpha: f64,
    /// Registers carrying the encoded operator (low-to-high significance).
    pub system: Vec<char>,
    /// Registers projected to zero around the block.
    pub ancilla: Vec<char>,
}

impl BlockEncoding {
    pub fn layout(&self) -> &RegisterLayout {
        &self.circuit.layout
    }

    pub fn system_dim(&self) -> usize {
        1usize << self.circuit.layout.joint_width(&self.system).unwrap_or(0)
    }

    /// Assemble the encoded block `<0|_a U |0>_a` column by column.
    pub fn extract_block(&self) -> Result<ComplexOperator> {
        extract_sector(&self.circuit, &self.ancilla, &[], &self.system)
    }

    /// Max deviation from unit-norm preservation over random states; the
    /// cheap unitarity certificate for matrix-free circuits.
    pub fn norm_preservation_deviation(
        &self,
        draws: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        let mut scratch = QueryCounts::default();
        for _ in 0..draws {
            let mut state = StateVector::random(self.circuit.layout.dim(), rng);
            self.circuit.apply(&mut state, &mut scratch)?;
            worst = worst.max((state.norm() - 1.0).abs());
        }
        Ok(worst)
    }
}

/// A block encoding indexed by a time register: the block at index `m` is
/// `H(m dt)/alpha`.
#[derive(Clone, Debug)]
pub struct TimeIndexedBlockEncoding {
    pub enc: BlockEncoding,
    pub time_reg: char,
    /// Padded number of time indices (a power of two).
    pub m_padded: usize,
    /// Grid points actually supplied; higher indices repeat the last sample.
    pub m_logical: usize,
    /// Duration of the encoded window.
    pub t: f64,
}

impl TimeIndexedBlockEncoding {
    /// Extract the block at one time index.
    pub fn block_at(&self, m: usize) -> Result<ComplexOperator> {
        if m >= self.m_padded {
            return Err(Error::domain("block_at", format!("index {m} out of range")));
        }
        extract_sector(
            &self.enc.circuit,
            &self.enc.ancilla,
            &[(self.time_reg, m as u64)],
            &self.enc.system,
        )
    }
}

/// A block encoding wrapped with a per-run query tally.
///
/// The tally counts applications of the tagged oracle ops (adjoints
/// included) executed through this instance; reset is explicit.
#[derive(Clone, Debug)]
pub struct InstrumentedOracle {
    pub oracle: TimeIndexedBlockEncoding,
    pub counts: QueryCounts,
}

impl InstrumentedOracle {
    pub fn new(oracle: TimeIndexedBlockEncoding) -> Self {
        InstrumentedOracle {
            oracle,
            counts: QueryCounts::default(),
        }
    }

    pub fn apply(&mut self, state: &mut StateVector) -> Result<()> {
        self.oracle.enc.circuit.apply(state, &mut self.counts)
    }

    pub fn reset_counter(&mut self) {
        self.counts.reset();
    }
}

/// Project a circuit onto a sector and assemble the resulting operator:
/// `zero_regs` are prepared and projected at zero, `fixed` registers at the
/// given values, and `column_regs` index the operator's rows/columns.
pub fn extract_sector(
    circuit: &Circuit,
    zero_regs: &[char],
    fixed: &[(char, u64)],
    column_regs: &[char],
) -> Result<ComplexOperator> {
    let layout = &circuit.layout;
    let width = layout.joint_width(column_regs)?;
    let dim = 1usize << width;
    if dim > tol::DENSE_DIM_BUDGET {
        return Err(Error::Budget {
            what: "dense block assembly",
            needed: dim as u64,
            available: tol::DENSE_DIM_BUDGET as u64,
        });
    }
    for &z in zero_regs {
        layout.reg(z)?;
    }
    let fixed_base = layout.pack(fixed)?;
    let mut block = ComplexOperator::zeros(dim);
    let mut scratch = QueryCounts::default();
    for col in 0..dim {
        let index = fixed_base | layout.pack_joint(column_regs, col as u64)?;
        let state = circuit.apply_to_basis(index, &mut scratch)?;
        for row in 0..dim {
            let out_index = fixed_base | layout.pack_joint(column_regs, row as u64)?;
            block[(row, col)] = state.amps[out_index as usize];
        }
    }
    Ok(block)
}

/// Tag the first op of a sequence as one oracle query.
fn tag_once(ops: &mut [Op], kind: CounterKind, weight: u64) {
    if let Some(first) = ops.first_mut() {
        first.counter = Some((kind, weight));
    }
}

fn require_power_of_two_dim(dim: usize, what: &'static str) -> Result<u32> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::domain(
            what,
            format!("dimension {dim} is not a power of two (qubit registers)"),
        ));
    }
    Ok(dim.trailing_zeros().max(1))
}

/// The two-block unitary dilation of a subnormalized matrix:
/// `W = [[A, sqrt(1-AA†)], [sqrt(1-A†A), -A†]]` with `A = H/alpha`, giving a
/// one-ancilla-qubit encoding of `H/alpha`.
pub fn unitary_completion(h: &ComplexOperator, alpha: f64) -> Result<BlockEncoding> {
    let dim = h.dim();
    let n_s = require_power_of_two_dim(dim, "unitary_completion")?;
    let norm = spectral_norm(h);
    if norm > alpha {
        return Err(Error::AlphaTooSmall { alpha, norm });
    }
    if alpha <= 0.0 {
        return Err(Error::domain("unitary_completion", "alpha must be positive"));
    }
    let a = h.scale(ONE / alpha);
    let id = ComplexOperator::identity(dim);
    let s_right = hermitian_psd_sqrt(&id.sub(&a.dagger().mul(&a)))?;
    let s_left = hermitian_psd_sqrt(&id.sub(&a.mul(&a.dagger())))?;
    let mut w = ComplexOperator::zeros(2 * dim);
    for r in 0..dim {
        for c in 0..dim {
            w[(r, c)] = a[(r, c)];
            w[(r, dim + c)] = s_left[(r, c)];
            w[(dim + r, c)] = s_right[(r, c)];
            w[(dim + r, dim + c)] = -a[(c, r)].conj();
        }
    }
    let dev = w.unitarity_deviation();
    if dev > tol::UNITARY_OUTPUT {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let layout = RegisterLayout::new(&[('s', n_s), ('a', 1)])?;
    let mut circuit = Circuit::new(layout);
    circuit.push(Op::new(OpKind::Dense {
        targets: vec!['s', 'a'],
        matrix: Arc::new(w),
    }));
    Ok(BlockEncoding {
        circuit,
        alpha,
        system: vec!['s'],
        ancilla: vec!['a'],
    })
}

/// Linear-combination-of-unitaries encoding:
/// `HAM = (PREP† ⊗ 1) · SEL · (PREP ⊗ 1)` with block `Σ a_j U_j / Σ a_j`.
///
/// The term list is padded to a power of two with zero-coefficient
/// identities.
pub fn lcu_encode(coeffs: &[f64], unitaries: &[ComplexOperator]) -> Result<BlockEncoding> {
    if coeffs.is_empty() || coeffs.len() != unitaries.len() {
        return Err(Error::domain("lcu_encode", "need matching non-empty lists"));
    }
    let dim = unitaries[0].dim();
    let n_s = require_power_of_two_dim(dim, "lcu_encode")?;
    for (j, u) in unitaries.iter().enumerate() {
        if u.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: u.dim(),
                right: dim,
            });
        }
        let dev = u.unitarity_deviation();
        if dev > tol::UNITARY_OUTPUT {
            return Err(Error::NotUnitary { deviation: dev });
        }
        if coeffs[j] <= 0.0 {
            return Err(Error::domain(
                "lcu_encode",
                format!("coefficient {j} must be positive"),
            ));
        }
    }
    let n_a = coeffs.len().next_power_of_two().trailing_zeros().max(1);
    let padded = 1usize << n_a;
    let alpha: f64 = coeffs.iter().sum();

    let mut prep_column = vec![ZERO; padded];
    for (j, &a) in coeffs.iter().enumerate() {
        prep_column[j] = Complex64::new((a / alpha).sqrt(), 0.0);
    }
    let prep = unitary_with_first_column(&prep_column)?;

    let mut selected: Vec<ComplexOperator> = unitaries.to_vec();
    selected.resize(padded, ComplexOperator::identity(dim));

    let layout = RegisterLayout::new(&[('s', n_s), ('a', n_a)])?;
    let mut circuit = Circuit::new(layout);
    circuit.push(Op::new(OpKind::Dense {
        targets: vec!['a'],
        matrix: Arc::new(prep.clone()),
    }));
    circuit.push(Op::new(OpKind::Select {
        selector: vec!['a'],
        targets: vec!['s'],
        matrices: Arc::new(selected),
    }));
    circuit.push(Op::new(OpKind::Dense {
        targets: vec!['a'],
        matrix: Arc::new(prep.dagger()),
    }));
    Ok(BlockEncoding {
        circuit,
        alpha,
        system: vec!['s'],
        ancilla: vec!['a'],
    })
}

/// Time-indexed encoding of a sampled Hamiltonian: a time-controlled direct
/// sum of per-sample unitary completions. The grid is padded to a power of
/// two by repeating the final sample.
pub fn ham_t_from_samples(hs: &SampledHamiltonian) -> Result<TimeIndexedBlockEncoding> {
    hs.validate()?;
    let dim = hs.dim();
    let n_s = require_power_of_two_dim(dim, "ham_t_from_samples")?;
    let n_d = hs.m.next_power_of_two().trailing_zeros().max(1);
    let m_padded = 1usize << n_d;

    let mut dilations = Vec::with_capacity(m_padded);
    for m in 0..m_padded {
        let sample = &hs.samples[m.min(hs.m - 1)];
        let enc = unitary_completion(sample, hs.alpha)?;
        let OpKind::Dense { matrix, .. } = &enc.circuit.ops[0].kind else {
            unreachable!("unitary_completion emits one dense op");
        };
        dilations.push(matrix.as_ref().clone());
    }

    let layout = RegisterLayout::new(&[('s', n_s), ('a', 1), ('d', n_d)])?;
    let mut circuit = Circuit::new(layout);
    circuit.push(
        Op::new(OpKind::Select {
            selector: vec!['d'],
            targets: vec!['s', 'a'],
            matrices: Arc::new(dilations),
        })
        .counted(CounterKind::HamT, 1),
    );
    Ok(TimeIndexedBlockEncoding {
        enc: BlockEncoding {
            circuit,
            alpha: hs.alpha,
            system: vec!['s'],
            ancilla: vec!['a'],
        },
        time_reg: 'd',
        m_padded,
        m_logical: hs.m,
        t: hs.t,
    })
}

/// Interaction-picture HAM-T for `H = A + B`:
/// `(Σ_m |m><m| ⊗ e^{iA tau m/M}) · (1 ⊗ O_B) · (Σ_m |m><m| ⊗ e^{-iA tau m/M})`,
/// whose block at index `m` is `e^{iA tau m/M} B e^{-iA tau m/M} / alpha_B`.
///
/// Each application queries the wrapped `O_B` exactly once.
pub fn interaction_ham_t(
    a: &ComplexOperator,
    enc_b: &BlockEncoding,
    tau: f64,
    m: usize,
) -> Result<InstrumentedOracle> {
    a.require_hermitian()?;
    if tau < 0.0 {
        return Err(Error::domain("interaction_ham_t", "tau must be >= 0"));
    }
    let sys_dim = enc_b.system_dim();
    if a.dim() != sys_dim {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: sys_dim,
        });
    }
    if enc_b.system != vec!['s'] {
        return Err(Error::Register(
            "interaction_ham_t expects the B encoding on register 's'".into(),
        ));
    }
    let n_d = m.next_power_of_two().trailing_zeros().max(1);
    let m_padded = 1usize << n_d;

    let eig = operator::hermitian_eigen(a)?;
    let conj_at = |sign: f64, idx: usize| -> ComplexOperator {
        let s = sign * tau * idx as f64 / m_padded as f64;
        let n = a.dim();
        let mut vd = eig.vectors.clone();
        for r in 0..n {
            for c in 0..n {
                vd[(r, c)] *= (operator::I * (eig.values[c] * s)).exp();
            }
        }
        vd.mul(&eig.vectors.dagger())
    };
    let forward: Vec<ComplexOperator> = (0..m_padded).map(|i| conj_at(1.0, i)).collect();
    let backward: Vec<ComplexOperator> = (0..m_padded).map(|i| conj_at(-1.0, i)).collect();

    let layout = enc_b.layout().extended(&[('d', n_d)])?;
    let mut circuit = Circuit::new(layout);
    circuit.push(Op::new(OpKind::Select {
        selector: vec!['d'],
        targets: vec!['s'],
        matrices: Arc::new(backward),
    }));
    let mut b_ops: Vec<Op> = enc_b.circuit.ops.clone();
    tag_once(&mut b_ops, CounterKind::HamT, 1);
    circuit.extend(b_ops);
    circuit.push(Op::new(OpKind::Select {
        selector: vec!['d'],
        targets: vec!['s'],
        matrices: Arc::new(forward),
    }));

    Ok(InstrumentedOracle::new(TimeIndexedBlockEncoding {
        enc: BlockEncoding {
            circuit,
            alpha: enc_b.alpha,
            system: vec!['s'],
            ancilla: enc_b.ancilla.clone(),
        },
        time_reg: 'd',
        m_padded,
        m_logical: m,
        t: tau,
    }))
}

/// Synthesize HAM-T from sparse entry/position oracles as `U_row† · U_col`;
/// the block at each time index is `H(m)/(d ||H||_max)`.
///
/// Register `a` holds the column index and `g` the 2-qubit flag whose
/// failure markers are 1 (column route) and 2 (row route). The row-side ket
/// amplitudes carry the conjugate of the principal square root so the bra
/// coefficients reproduce the matrix element, not its modulus.
pub fn sparse_ham_t(
    spec: &SparseHamiltonianSpec,
    time_points: usize,
) -> Result<TimeIndexedBlockEncoding> {
    let n_s = require_power_of_two_dim(spec.dim, "sparse_ham_t")?;
    if spec.dim > 1 << 8 {
        return Err(Error::Budget {
            what: "sparse HAM-T synthesis",
            needed: spec.dim as u64,
            available: 1 << 8,
        });
    }
    if time_points == 0 {
        return Err(Error::domain("sparse_ham_t", "need at least one time point"));
    }
    let n_d = time_points.next_power_of_two().trailing_zeros().max(1);
    let m_padded = 1usize << n_d;
    let storage = m_padded as u64 * spec.dim as u64 * (4 * spec.dim as u64).pow(2);
    if storage > 1 << 28 {
        return Err(Error::Budget {
            what: "sparse HAM-T select storage",
            needed: storage,
            available: 1 << 28,
        });
    }
    let n = spec.dim;
    let sub_dim = 4 * n;
    // (a, g) joint index with 'a' low: value = a + g * 2^{n_s}.
    let pack_ag = |a_val: usize, g_val: usize| -> usize { a_val + (g_val << n_s) };

    let mut col_mats: Vec<ComplexOperator> = Vec::with_capacity(m_padded * n);
    let mut row_mats: Vec<ComplexOperator> = Vec::with_capacity(m_padded * n);
    for t in 0..m_padded {
        let t_clamped = t.min(time_points - 1);
        for k in 0..n {
            let mut cols = Vec::with_capacity(spec.d);
            for slot in 0..spec.d {
                let p = spec.position_value(t_clamped, k, slot);
                if p >= n {
                    return Err(Error::Sparsity {
                        row: k,
                        col: p,
                        detail: "position oracle out of range".into(),
                    });
                }
                if cols.contains(&p) {
                    return Err(Error::Sparsity {
                        row: k,
                        col: p,
                        detail: "position oracle listed a column twice".into(),
                    });
                }
                cols.push(p);
            }
            let inv_sqrt_d = 1.0 / (spec.d as f64).sqrt();

            // |chi_k>: sqrt(H_{p,k}/Hmax)|p>|0> + sqrt(1-|H_{k,p}|/Hmax)|p>|1>.
            let mut chi = vec![ZERO; sub_dim];
            for &p in &cols {
                let h_pk = spec.entry_value(t_clamped, p, k);
                if h_pk.norm() > spec.hmax + 1e-12 {
                    return Err(Error::Sparsity {
                        row: p,
                        col: k,
                        detail: format!("|H_xy| = {} exceeds Hmax", h_pk.norm()),
                    });
                }
                let h_kp_abs = spec.entry_value(t_clamped, k, p).norm();
                chi[pack_ag(p, 0)] = (h_pk / spec.hmax).sqrt() * inv_sqrt_d;
                chi[pack_ag(p, 1)] =
                    Complex64::new((1.0 - h_kp_abs / spec.hmax).max(0.0).sqrt(), 0.0) * inv_sqrt_d;
            }
            col_mats.push(unitary_with_first_column(&chi)?);

            // |chi-bar_j> (as a ket, before the s<->a swap):
            // conj(sqrt(H_{j,q}/Hmax))|q>|0> + sqrt(1-|H_{q,j}|/Hmax)|q>|2>.
            let mut chi_bar = vec![ZERO; sub_dim];
            for &q in &cols {
                let h_jq = spec.entry_value(t_clamped, k, q);
                let h_qj_abs = spec.entry_value(t_clamped, q, k).norm();
                chi_bar[pack_ag(q, 0)] = (h_jq / spec.hmax).sqrt().conj() * inv_sqrt_d;
                chi_bar[pack_ag(q, 2)] =
                    Complex64::new((1.0 - h_qj_abs / spec.hmax).max(0.0).sqrt(), 0.0) * inv_sqrt_d;
            }
            row_mats.push(unitary_with_first_column(&chi_bar)?);
        }
    }

    let layout = RegisterLayout::new(&[('s', n_s), ('a', n_s), ('g', 2), ('d', n_d)])?;
    let mut circuit = Circuit::new(layout);
    // U_col = Σ_{t,k} |t,k><t,k| ⊗ V_{t,k} on (a,g).
    circuit.push(
        Op::new(OpKind::Select {
            selector: vec!['s', 'd'],
            targets: vec!['a', 'g'],
            matrices: Arc::new(col_mats),
        })
        .counted(CounterKind::HamT, 1),
    );
    // U_row† = (Select_row ∘ SWAP_{s,a})† = SWAP_{s,a} ∘ Select_row†.
    circuit.push(Op::new(OpKind::SwapRegs { a: 's', b: 'a' }));
    circuit.push(
        Op::new(OpKind::Select {
            selector: vec!['s', 'd'],
            targets: vec!['a', 'g'],
            matrices: Arc::new(row_mats),
        })
        .dagger(),
    );

    Ok(TimeIndexedBlockEncoding {
        enc: BlockEncoding {
            circuit,
            alpha: spec.d as f64 * spec.hmax,
            system: vec!['s'],
            ancilla: vec!['a', 'g'],
        },
        time_reg: 'd',
        m_padded,
        m_logical: time_points,
        t: 0.0,
    })
}

/// Exact evolution under a diagonal Hamiltonian via the phase-gadget route:
/// two entry-oracle queries per application, independent of `t`.
#[derive(Clone, Debug)]
pub struct DiagonalFastForward {
    /// One-op circuit applying `e^{-iAt}` on register 's'.
    pub circuit: Circuit,
    /// Exact dense `e^{-iAt}` (diagonal).
    pub matrix: ComplexOperator,
    /// O_H queries per application of the circuit.
    pub queries_per_application: u64,
}

pub fn diagonal_fast_forward(
    spec: &SparseHamiltonianSpec,
    t: f64,
) -> Result<DiagonalFastForward> {
    let n_s = require_power_of_two_dim(spec.dim, "diagonal_fast_forward")?;
    for row in 0..spec.dim {
        for slot in 0..spec.d {
            let col = spec.position_value(0, row, slot);
            if col != row && spec.entry_value(0, row, col).norm() > 0.0 {
                return Err(Error::Sparsity {
                    row,
                    col,
                    detail: "diagonal fast-forward requires zero off-diagonal entries".into(),
                });
            }
        }
    }
    let phases: Vec<Complex64> = (0..spec.dim)
        .map(|k| {
            let h_kk = spec.entry_value(0, k, k);
            (-operator::I * (h_kk.re * t)).exp()
        })
        .collect();
    let matrix = ComplexOperator::from_diagonal(&phases);
    let layout = RegisterLayout::new(&[('s', n_s)])?;
    let mut circuit = Circuit::new(layout);
    // One O_H call computes H_kk, one uncomputes it: 2 queries whatever t is.
    circuit.push(
        Op::new(OpKind::DiagonalPhase {
            regs: vec!['s'],
            phases: Arc::new(phases),
        })
        .counted(CounterKind::OracleH, 2),
    );
    Ok(DiagonalFastForward {
        circuit,
        matrix,
        queries_per_application: 2,
    })
}

/// Full post-circuit state for one encoded column (ancillas in, zeros).
pub fn encoded_column(
    enc: &BlockEncoding,
    basis_index: u64,
    counts: &mut QueryCounts,
) -> Result<StateVector> {
    apply_block_column(&enc.circuit, &enc.ancilla, basis_index, counts)
}
