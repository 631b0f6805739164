//! Circuit gadgets: modular adders, the comparator encoding of the strictly
//! triangular ladder operator, the compression gadget that chains encoded
//! blocks with logarithmic counter registers, coefficient preparation, and
//! the assembled DYS_K / TDS / TTS constructions.

pub mod dys;
pub mod taylor;
pub mod tds;

use std::sync::Arc;

use num_complex::Complex64;

use crate::circuit::{Circuit, Control, Op, OpKind, RegisterLayout};
use crate::encoding::{extract_sector, BlockEncoding};
use crate::error::{Error, Result};
use crate::operator::{unitary_with_first_column, ComplexOperator};

pub use dys::{dys_k, DysK};
pub use taylor::{tts_step, TtsStep};
pub use tds::{
    multi_segment_evolve, pad_to_half, robust_oaa, tds_segment, EvolveRecord, PictureInput,
    SegmentRecord, TdsSegment, TdsSegmentPlan, Tier,
};

/// `|l> -> |l + increment mod 2^n>` on the named register.
pub fn modular_adder(reg: char, increment: u64) -> Op {
    Op::new(OpKind::ModularAdd {
        reg,
        delta: increment,
    })
}

/// The success-conditioned counter update `ADD_ca`: decrement `b` when every
/// conditioning register is zero, else decrement `c`.
pub fn controlled_success_adder(b: char, c: char, condition: &[char]) -> Op {
    Op::new(OpKind::SuccessAdd {
        b,
        c,
        cond: condition.to_vec(),
        invert: false,
    })
}

/// Comparator encoding of the strictly upper triangular ladder
/// `G_ij = 1/M for i < j` on registers (d, e, f):
/// `LT = (U†_e) · SWAP_de · COMP · (U_e)` with `U` the uniform preparer.
pub fn comparator_lt_encoding(m: usize) -> Result<BlockEncoding> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::domain(
            "comparator_lt_encoding",
            format!("M = {m} must be a power of two >= 2"),
        ));
    }
    let n_d = m.trailing_zeros();
    let layout = RegisterLayout::new(&[('d', n_d), ('e', n_d), ('f', 1)])?;
    let mut circuit = Circuit::new(layout);
    circuit.extend(lt_ops());
    Ok(BlockEncoding {
        circuit,
        alpha: 1.0,
        system: vec!['d'],
        ancilla: vec!['e', 'f'],
    })
}

/// The four LT ops over registers (d, e, f); every constituent is
/// self-inverse, so the adjoint is the reversed sequence.
pub(crate) fn lt_ops() -> Vec<Op> {
    vec![
        Op::new(OpKind::Hadamards { reg: 'e' }),
        Op::new(OpKind::CompareGe {
            lhs: 'e',
            rhs: 'd',
            flag: 'f',
        }),
        Op::new(OpKind::SwapRegs { a: 'd', b: 'e' }),
        Op::new(OpKind::Hadamards { reg: 'e' }),
    ]
}

pub(crate) fn lt_ops_dagger() -> Vec<Op> {
    let mut ops = lt_ops();
    ops.reverse();
    ops.iter().map(Op::dagger).collect()
}

/// Counter-register bookkeeping of the compression gadget.
#[derive(Clone, Copy, Debug)]
pub struct CompressionLayout {
    pub k: usize,
    pub n_b: u32,
    pub n_c: u32,
}

impl CompressionLayout {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            // Degenerate order: one idle qubit per counter register.
            return Ok(CompressionLayout { k: 0, n_b: 1, n_c: 1 });
        }
        let n_b = ((k + 1) as f64).log2().ceil() as u32 + 1;
        Ok(CompressionLayout {
            k,
            n_b,
            n_c: n_b - 1,
        })
    }

    /// Physical counter state applying `H_k ... H_1`: `l_b = (k - 1) mod 2^{n_b}`.
    /// Logical 0 maps to the all-ones state, whose leading bit blocks every
    /// application.
    pub fn physical_counter(&self, logical_k: usize) -> u64 {
        let modulus = 1u64 << self.n_b;
        ((logical_k as u64).wrapping_sub(1)) & (modulus - 1)
    }
}

/// The compression gadget `V`: applies the product `H_k ... H_2 H_1` of the
/// wrapped encoded blocks, controlled on the counter state `|k>_b`, with the
/// two counter registers replacing K-fold register duplication.
#[derive(Clone, Debug)]
pub struct CompressionGadget {
    pub circuit: Circuit,
    pub info: CompressionLayout,
    /// Registers the success adder conditions on (the wrapped ancillas).
    pub condition: Vec<char>,
    /// Registers carrying the chained blocks.
    pub system: Vec<char>,
}

impl CompressionGadget {
    /// Extract the logical-k sector: condition registers and `c` projected to
    /// zero, `b` prepared and read back at the mapped counter state.
    pub fn sector(&self, logical_k: usize) -> Result<ComplexOperator> {
        if logical_k > self.info.k {
            return Err(Error::domain(
                "sector",
                format!("logical index {logical_k} exceeds K = {}", self.info.k),
            ));
        }
        let mut zeros = self.condition.clone();
        zeros.push('c');
        extract_sector(
            &self.circuit,
            &zeros,
            &[('b', self.info.physical_counter(logical_k))],
            &self.system,
        )
    }
}

/// Build the gadget from K block encodings sharing one layout, system, and
/// ancilla set. Sequence per step: controlled-controlled `U_k` (controls on
/// the leading bits of `b` and `c` being zero), then `ADD_ca`; a final
/// `ADD_b^K` restores the counter on the success branch.
pub fn compression_gadget(units: &[BlockEncoding]) -> Result<CompressionGadget> {
    let Some(first) = units.first() else {
        return Err(Error::domain("compression_gadget", "need at least one unit"));
    };
    for u in units {
        if u.circuit.layout != first.circuit.layout
            || u.ancilla != first.ancilla
            || u.system != first.system
        {
            return Err(Error::Register(
                "compression gadget units must share layout, system, and ancillas".into(),
            ));
        }
        // Encoded blocks of unitary circuits are contractions; verify the
        // subnormalization directly whenever dense extraction is cheap.
        if u.system_dim() <= 64 {
            let norm = crate::operator::spectral_norm(&u.extract_block()?);
            if norm > 1.0 + 1e-9 {
                return Err(Error::domain(
                    "compression_gadget",
                    format!("wrapped block has norm {norm} > 1"),
                ));
            }
        }
    }
    let info = CompressionLayout::new(units.len())?;
    let layout = first
        .circuit
        .layout
        .extended(&[('b', info.n_b), ('c', info.n_c)])?;

    let b_msb = {
        let r = layout.reg('b')?;
        1u64 << (r.offset + r.width - 1)
    };
    let c_msb = {
        let r = layout.reg('c')?;
        1u64 << (r.offset + r.width - 1)
    };
    let cc = Control {
        mask: b_msb | c_msb,
        value: 0,
    };

    let mut circuit = Circuit::new(layout);
    for unit in units {
        for op in &unit.circuit.ops {
            circuit.push(op.clone().controlled(cc));
        }
        circuit.push(controlled_success_adder('b', 'c', &first.ancilla));
    }
    circuit.push(modular_adder('b', units.len() as u64));

    Ok(CompressionGadget {
        circuit,
        info,
        condition: first.ancilla.clone(),
        system: first.system.clone(),
    })
}

/// Unitary on the counter register whose first column carries the given
/// logical-k amplitudes at their mapped physical counter states.
pub fn coef_prep(
    amplitudes: &[Complex64],
    info: &CompressionLayout,
) -> Result<ComplexOperator> {
    if amplitudes.len() > info.k + 1 {
        return Err(Error::domain(
            "coef_prep",
            format!(
                "{} amplitudes exceed the K+1 = {} logical sectors",
                amplitudes.len(),
                info.k + 1
            ),
        ));
    }
    let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::domain(
            "coef_prep",
            format!("amplitudes have squared norm {norm2}, expected 1"),
        ));
    }
    let dim = 1usize << info.n_b;
    let mut column = vec![Complex64::new(0.0, 0.0); dim];
    for (k, amp) in amplitudes.iter().enumerate() {
        column[info.physical_counter(k) as usize] = *amp;
    }
    unitary_with_first_column(&column)
}

/// Dense op helper used by the assembled algorithms.
pub(crate) fn dense_op(targets: &[char], matrix: ComplexOperator) -> Op {
    Op::new(OpKind::Dense {
        targets: targets.to_vec(),
        matrix: Arc::new(matrix),
    })
}
