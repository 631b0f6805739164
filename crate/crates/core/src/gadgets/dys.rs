//! DYS_K: the compressed block encoding of all Riemann terms,
//! `<0|_{acdef} DYS_K |0>_{acdef} = Σ_k |k><k|_b ⊗ B_k / M^k`,
//! assembled from HAM-T, the uniform preparer on the time register, and the
//! triangular ladder.
//!
//! The ladder enters as the adjoint of the comparator encoding: the index
//! raised strictly upward between HAM-T applications is what makes the
//! products come out time-ordered, matching the Riemann terms.

use crate::circuit::{Circuit, Op, OpKind};
use crate::encoding::{extract_sector, BlockEncoding, InstrumentedOracle, TimeIndexedBlockEncoding};
use crate::error::{Error, Result};
use crate::gadgets::{compression_gadget, lt_ops_dagger, CompressionGadget};
use crate::operator::ComplexOperator;

/// The assembled DYS_K circuit plus its bookkeeping.
#[derive(Clone, Debug)]
pub struct DysK {
    pub gadget: CompressionGadget,
    /// Registers projected to zero when reading sectors (wrapped ancillas,
    /// the gadget counter `c`, and the coherent time registers d, e).
    pub zero_regs: Vec<char>,
    pub k: usize,
    pub m: usize,
    /// HAM-T normalization: sectors hold Riemann terms of `H/alpha`.
    pub alpha: f64,
}

impl DysK {
    pub fn circuit(&self) -> &Circuit {
        &self.gadget.circuit
    }

    /// Sector `k`: the operator `B_k / M^k` of the alpha-normalized samples
    /// on the system register.
    pub fn sector(&self, logical_k: usize) -> Result<ComplexOperator> {
        if logical_k > self.k {
            return Err(Error::domain(
                "DysK::sector",
                format!("sector {logical_k} exceeds K = {}", self.k),
            ));
        }
        extract_sector(
            self.circuit(),
            &self.zero_regs,
            &[('b', self.gadget.info.physical_counter(logical_k))],
            &['s'],
        )
    }
}

/// Build DYS_K over a time-indexed encoding.
///
/// `U_1 = (U† ⊗ 1) · HAM-T · (U ⊗ 1)` and
/// `U_{k>1} = (U† ⊗ 1) · HAM-T · LT† · (U ⊗ 1)`, wrapped by the compression
/// gadget conditioned on the encoding's ancillas plus the ladder ancillas
/// (e, f); the time register d is passed through coherently and projected
/// only at the end.
pub fn dys_k(ham_t: &TimeIndexedBlockEncoding, k: usize) -> Result<DysK> {
    if k > ham_t.m_padded {
        return Err(Error::domain(
            "dys_k",
            format!("need K <= M, got K = {k}, M = {}", ham_t.m_padded),
        ));
    }
    if ham_t.time_reg != 'd' {
        return Err(Error::Register("dys_k expects the time register 'd'".into()));
    }
    let n_d = ham_t.enc.layout().reg('d')?.width;
    let unit_layout = ham_t.enc.layout().extended(&[('e', n_d), ('f', 1)])?;

    let mut condition = ham_t.enc.ancilla.clone();
    condition.push('e');
    condition.push('f');

    if k == 0 {
        // Degenerate order: the empty circuit carries the lone identity
        // sector.
        let info = crate::gadgets::CompressionLayout::new(0)?;
        let layout = unit_layout.extended(&[('b', info.n_b), ('c', info.n_c)])?;
        let gadget = CompressionGadget {
            circuit: Circuit::new(layout),
            info,
            condition: condition.clone(),
            system: vec!['s', 'd'],
        };
        let mut zero_regs = condition;
        zero_regs.push('c');
        zero_regs.push('d');
        return Ok(DysK {
            gadget,
            zero_regs,
            k: 0,
            m: ham_t.m_padded,
            alpha: ham_t.enc.alpha,
        });
    }

    let mut units = Vec::with_capacity(k);
    for j in 1..=k {
        let mut ops: Vec<Op> = vec![Op::new(OpKind::Hadamards { reg: 'd' })];
        if j > 1 {
            ops.extend(lt_ops_dagger());
        }
        ops.extend(ham_t.enc.circuit.ops.iter().cloned());
        ops.push(Op::new(OpKind::Hadamards { reg: 'd' }));
        let mut circuit = Circuit::new(unit_layout.clone());
        circuit.extend(ops);
        units.push(BlockEncoding {
            circuit,
            alpha: 1.0,
            system: vec!['s', 'd'],
            ancilla: condition.clone(),
        });
    }

    let gadget = compression_gadget(&units)?;
    let mut zero_regs = condition;
    zero_regs.push('c');
    zero_regs.push('d');
    Ok(DysK {
        gadget,
        zero_regs,
        k,
        m: ham_t.m_padded,
        alpha: ham_t.enc.alpha,
    })
}

/// Convenience: DYS_K over an instrumented oracle (tags travel with the ops).
pub fn dys_k_instrumented(oracle: &InstrumentedOracle, k: usize) -> Result<DysK> {
    dys_k(&oracle.oracle, k)
}
