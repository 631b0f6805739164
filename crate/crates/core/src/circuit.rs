//! Named qubit registers and matrix-free application of register-local
//! operations to state vectors.
//!
//! Circuits too large to materialize as dense matrices (anything past 2^12
//! total dimension) exist only as sequences of [`Op`]s applied to
//! [`StateVector`]s. Dense materialization of encoded blocks happens
//! column-by-column through [`apply_block_column`].

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{ComplexOperator, StateVector, ZERO};
use crate::tol;

/// One named register: `width` qubits starting at bit `offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: char,
    pub width: u32,
    pub offset: u32,
}

impl Register {
    pub fn mask(&self) -> u64 {
        (((1u128 << self.width) - 1) as u64) << self.offset
    }

    pub fn field(&self, index: u64) -> u64 {
        (index >> self.offset) & ((1u64 << self.width) - 1)
    }
}

/// Ordered set of registers; the first register occupies the lowest bits of
/// the state index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    regs: Vec<Register>,
}

impl RegisterLayout {
    /// Build a layout from `(name, width)` pairs, assigning contiguous offsets.
    pub fn new(spec: &[(char, u32)]) -> Result<Self> {
        let mut regs = Vec::with_capacity(spec.len());
        let mut offset = 0u32;
        for &(name, width) in spec {
            if width == 0 {
                return Err(Error::Register(format!("register '{name}' has zero width")));
            }
            if regs.iter().any(|r: &Register| r.name == name) {
                return Err(Error::Register(format!("duplicate register '{name}'")));
            }
            regs.push(Register {
                name,
                width,
                offset,
            });
            offset += width;
        }
        // Hard cap beyond any state-vector budget this engine runs under;
        // the configurable 26-qubit default is enforced where circuits are
        // chosen over the matrix tier.
        if offset > 30 {
            return Err(Error::Budget {
                what: "register layout",
                needed: offset as u64,
                available: 30,
            });
        }
        Ok(RegisterLayout { regs })
    }

    pub fn total_qubits(&self) -> u32 {
        self.regs.iter().map(|r| r.width).sum()
    }

    pub fn dim(&self) -> usize {
        1usize << self.total_qubits()
    }

    pub fn registers(&self) -> &[Register] {
        &self.regs
    }

    pub fn reg(&self, name: char) -> Result<Register> {
        self.regs
            .iter()
            .copied()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::Register(format!("no register named '{name}'")))
    }

    pub fn has(&self, name: char) -> bool {
        self.regs.iter().any(|r| r.name == name)
    }

    /// Append further registers above the existing ones.
    pub fn extended(&self, extra: &[(char, u32)]) -> Result<Self> {
        let mut spec: Vec<(char, u32)> = self.regs.iter().map(|r| (r.name, r.width)).collect();
        spec.extend_from_slice(extra);
        RegisterLayout::new(&spec)
    }

    /// Joint mask of the named registers.
    pub fn mask_of(&self, names: &[char]) -> Result<u64> {
        let mut m = 0u64;
        for &n in names {
            m |= self.reg(n)?.mask();
        }
        Ok(m)
    }

    /// Extract the named register's value from a basis index.
    pub fn field(&self, name: char, index: u64) -> Result<u64> {
        Ok(self.reg(name)?.field(index))
    }

    /// Assemble a basis index from `(register, value)` pairs; unlisted
    /// registers are zero.
    pub fn pack(&self, fields: &[(char, u64)]) -> Result<u64> {
        let mut idx = 0u64;
        for &(name, value) in fields {
            let r = self.reg(name)?;
            if value >= (1u64 << r.width) {
                return Err(Error::Register(format!(
                    "value {value} does not fit register '{name}' of width {}",
                    r.width
                )));
            }
            idx |= value << r.offset;
        }
        Ok(idx)
    }

    /// Pack a joint index over several registers (first register = low bits)
    /// into a full basis index.
    pub fn pack_joint(&self, names: &[char], joint: u64) -> Result<u64> {
        let mut idx = 0u64;
        let mut consumed = 0u32;
        for &n in names {
            let r = self.reg(n)?;
            let field = (joint >> consumed) & ((1u64 << r.width) - 1);
            idx |= field << r.offset;
            consumed += r.width;
        }
        if joint >> consumed != 0 {
            return Err(Error::Register(format!(
                "joint value {joint} does not fit registers {names:?}"
            )));
        }
        Ok(idx)
    }

    /// Extract the joint value of several registers from a basis index.
    pub fn joint_field(&self, names: &[char], index: u64) -> Result<u64> {
        let mut joint = 0u64;
        let mut consumed = 0u32;
        for &n in names {
            let r = self.reg(n)?;
            joint |= r.field(index) << consumed;
            consumed += r.width;
        }
        Ok(joint)
    }

    pub fn joint_width(&self, names: &[char]) -> Result<u32> {
        let mut w = 0;
        for &n in names {
            w += self.reg(n)?.width;
        }
        Ok(w)
    }
}

/// Classical control: the op acts only on amplitudes whose index matches
/// `value` on `mask`. Control bits must be disjoint from the op's targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Control {
    pub mask: u64,
    pub value: u64,
}

impl Control {
    pub fn free() -> Self {
        Control::default()
    }

    pub fn matches(&self, index: u64) -> bool {
        index & self.mask == self.value
    }

    pub fn and(&self, other: Control) -> Control {
        Control {
            mask: self.mask | other.mask,
            value: self.value | other.value,
        }
    }
}

/// Which query tally an op application contributes to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CounterKind {
    /// Applications of HAM-T (or its inverse).
    HamT,
    /// Applications of e^{-iA tau} (or its inverse).
    ExpA,
    /// Queries to the sparse entry oracle O_H.
    OracleH,
}

/// Per-run query tallies. Owned by a single run; reset is explicit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryCounts {
    pub ham_t: u64,
    pub exp_a: u64,
    pub oracle_h: u64,
}

impl QueryCounts {
    pub fn reset(&mut self) {
        *self = QueryCounts::default();
    }

    pub fn add(&mut self, other: QueryCounts) {
        self.ham_t += other.ham_t;
        self.exp_a += other.exp_a;
        self.oracle_h += other.oracle_h;
    }

    fn bump(&mut self, kind: CounterKind, weight: u64) {
        match kind {
            CounterKind::HamT => self.ham_t += weight,
            CounterKind::ExpA => self.exp_a += weight,
            CounterKind::OracleH => self.oracle_h += weight,
        }
    }
}

#[derive(Clone, Debug)]
pub enum OpKind {
    /// Dense unitary on the joint subspace of `targets`; the first listed
    /// register supplies the low bits of the matrix index.
    Dense {
        targets: Vec<char>,
        matrix: Arc<ComplexOperator>,
    },
    /// Σ_v |v⟩⟨v|_selector ⊗ U_v on `targets`.
    Select {
        selector: Vec<char>,
        targets: Vec<char>,
        matrices: Arc<Vec<ComplexOperator>>,
    },
    /// H^{⊗width} on one register (uniform-superposition preparer).
    Hadamards { reg: char },
    /// |l⟩ → |l + delta mod 2^width⟩ on one register.
    ModularAdd { reg: char, delta: u64 },
    /// Flip the `flag` qubit on basis states with value(lhs) >= value(rhs).
    CompareGe { lhs: char, rhs: char, flag: char },
    /// Exchange the contents of two equal-width registers.
    SwapRegs { a: char, b: char },
    /// 1 - 2|0⟩⟨0| on the joint zero state of `regs`.
    ReflectAboutZero { regs: Vec<char> },
    /// Diagonal phases indexed by the joint value of `regs`.
    DiagonalPhase {
        regs: Vec<char>,
        phases: Arc<Vec<Complex64>>,
    },
    /// Global scalar factor (must be unimodular).
    GlobalPhase { phase: Complex64 },
    /// Success-conditioned counter update: decrement `b` when every `cond`
    /// register is zero, else decrement `c`. `invert` increments instead.
    SuccessAdd {
        b: char,
        c: char,
        cond: Vec<char>,
        invert: bool,
    },
}

#[derive(Clone, Debug)]
pub struct Op {
    pub kind: OpKind,
    pub control: Control,
    pub counter: Option<(CounterKind, u64)>,
}

impl Op {
    pub fn new(kind: OpKind) -> Self {
        Op {
            kind,
            control: Control::free(),
            counter: None,
        }
    }

    pub fn counted(mut self, kind: CounterKind, weight: u64) -> Self {
        self.counter = Some((kind, weight));
        self
    }

    pub fn controlled(mut self, extra: Control) -> Self {
        self.control = self.control.and(extra);
        self
    }

    /// Inverse op; counter tags survive so adjoint queries are tallied too.
    pub fn dagger(&self) -> Op {
        let kind = match &self.kind {
            OpKind::Dense { targets, matrix } => OpKind::Dense {
                targets: targets.clone(),
                matrix: Arc::new(matrix.dagger()),
            },
            OpKind::Select {
                selector,
                targets,
                matrices,
            } => OpKind::Select {
                selector: selector.clone(),
                targets: targets.clone(),
                matrices: Arc::new(matrices.iter().map(|m| m.dagger()).collect()),
            },
            OpKind::Hadamards { reg } => OpKind::Hadamards { reg: *reg },
            OpKind::ModularAdd { reg, delta } => OpKind::ModularAdd {
                reg: *reg,
                delta: delta.wrapping_neg(),
            },
            OpKind::CompareGe { lhs, rhs, flag } => OpKind::CompareGe {
                lhs: *lhs,
                rhs: *rhs,
                flag: *flag,
            },
            OpKind::SwapRegs { a, b } => OpKind::SwapRegs { a: *a, b: *b },
            OpKind::ReflectAboutZero { regs } => OpKind::ReflectAboutZero { regs: regs.clone() },
            OpKind::DiagonalPhase { regs, phases } => OpKind::DiagonalPhase {
                regs: regs.clone(),
                phases: Arc::new(phases.iter().map(|z| z.conj()).collect()),
            },
            OpKind::GlobalPhase { phase } => OpKind::GlobalPhase {
                phase: phase.conj(),
            },
            OpKind::SuccessAdd { b, c, cond, invert } => OpKind::SuccessAdd {
                b: *b,
                c: *c,
                cond: cond.clone(),
                invert: !invert,
            },
        };
        Op {
            kind,
            control: self.control,
            counter: self.counter,
        }
    }
}

/// Visit every submask of `mask` (including 0 and `mask`) in increasing order.
#[inline]
fn for_each_submask(mask: u64, mut f: impl FnMut(u64)) {
    let mut s = 0u64;
    loop {
        f(s);
        if s == mask {
            break;
        }
        s = s.wrapping_sub(mask) & mask;
    }
}

fn joint_positions(layout: &RegisterLayout, names: &[char]) -> Result<Vec<u32>> {
    let mut pos = Vec::new();
    for &n in names {
        let r = layout.reg(n)?;
        pos.extend(r.offset..r.offset + r.width);
    }
    Ok(pos)
}

fn apply_dense_family(
    layout: &RegisterLayout,
    state: &mut [Complex64],
    targets: &[char],
    control: Control,
    matrices: &[ComplexOperator],
    selector_names: Option<&[char]>,
) -> Result<()> {
    let positions = joint_positions(layout, targets)?;
    let w = positions.len() as u32;
    let block = 1usize << w;
    let mut spread = vec![0u64; block];
    for (j, s) in spread.iter_mut().enumerate() {
        let mut v = 0u64;
        for (b, &p) in positions.iter().enumerate() {
            v |= (((j >> b) & 1) as u64) << p;
        }
        *s = v;
    }
    let tmask: u64 = spread[block - 1];
    debug_assert_eq!(control.mask & tmask, 0, "control bits overlap targets");
    let full = (layout.dim() - 1) as u64;
    let rest = full & !tmask;

    let sel_regs: Vec<Register> = match selector_names {
        Some(names) => names
            .iter()
            .map(|&n| layout.reg(n))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    for m in matrices {
        if m.dim() != block {
            return Err(Error::DimensionMismatch {
                left: m.dim(),
                right: block,
            });
        }
    }

    let mut scratch = vec![ZERO; block];
    for_each_submask(rest, |base| {
        if !control.matches(base) {
            return;
        }
        let mut sel_val = 0u64;
        let mut consumed = 0u32;
        for r in &sel_regs {
            sel_val |= r.field(base) << consumed;
            consumed += r.width;
        }
        let m = &matrices[sel_val as usize];
        for (j, s) in spread.iter().enumerate() {
            scratch[j] = state[(base | s) as usize];
        }
        for (r, s) in spread.iter().enumerate() {
            let mut acc = ZERO;
            for (c, x) in scratch.iter().enumerate() {
                let a = m[(r, c)];
                if a != ZERO {
                    acc += a * x;
                }
            }
            state[(base | s) as usize] = acc;
        }
    });
    Ok(())
}

fn apply_op(
    layout: &RegisterLayout,
    state: &mut [Complex64],
    op: &Op,
    counts: &mut QueryCounts,
) -> Result<()> {
    if let Some((kind, weight)) = op.counter {
        counts.bump(kind, weight);
    }
    let control = op.control;
    let full = (layout.dim() - 1) as u64;

    match &op.kind {
        OpKind::Dense { targets, matrix } => {
            apply_dense_family(
                layout,
                state,
                targets,
                control,
                std::slice::from_ref(Arc::as_ref(matrix)),
                None,
            )?;
        }
        OpKind::Select {
            selector,
            targets,
            matrices,
        } => {
            let sel_width = layout.joint_width(selector)?;
            if matrices.len() != 1usize << sel_width {
                return Err(Error::DimensionMismatch {
                    left: matrices.len(),
                    right: 1usize << sel_width,
                });
            }
            apply_dense_family(layout, state, targets, control, matrices, Some(selector))?;
        }
        OpKind::Hadamards { reg } => {
            let r = layout.reg(*reg)?;
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            for q in r.offset..r.offset + r.width {
                let bit = 1u64 << q;
                let rest = full & !bit;
                for_each_submask(rest, |i| {
                    if !control.matches(i) {
                        return;
                    }
                    let lo = i as usize;
                    let hi = (i | bit) as usize;
                    let x = state[lo];
                    let y = state[hi];
                    state[lo] = (x + y) * inv_sqrt2;
                    state[hi] = (x - y) * inv_sqrt2;
                });
            }
        }
        OpKind::ModularAdd { reg, delta } => {
            let r = layout.reg(*reg)?;
            let n = 1usize << r.width;
            let delta = (*delta as u128 % n as u128) as usize;
            if delta == 0 {
                return Ok(());
            }
            let rest = full & !r.mask();
            let mut scratch = vec![ZERO; n];
            for_each_submask(rest, |base| {
                if !control.matches(base) {
                    return;
                }
                for v in 0..n {
                    scratch[(v + delta) % n] = state[(base | ((v as u64) << r.offset)) as usize];
                }
                for (v, z) in scratch.iter().enumerate() {
                    state[(base | ((v as u64) << r.offset)) as usize] = *z;
                }
            });
        }
        OpKind::CompareGe { lhs, rhs, flag } => {
            let l = layout.reg(*lhs)?;
            let r = layout.reg(*rhs)?;
            let f = layout.reg(*flag)?;
            if f.width != 1 {
                return Err(Error::Register("comparator flag must be one qubit".into()));
            }
            let bit = 1u64 << f.offset;
            let rest = full & !bit;
            for_each_submask(rest, |i| {
                if !control.matches(i) {
                    return;
                }
                if l.field(i) >= r.field(i) {
                    state.swap(i as usize, (i | bit) as usize);
                }
            });
        }
        OpKind::SwapRegs { a, b } => {
            let ra = layout.reg(*a)?;
            let rb = layout.reg(*b)?;
            if ra.width != rb.width {
                return Err(Error::Register(format!(
                    "cannot swap registers '{a}' (width {}) and '{b}' (width {})",
                    ra.width, rb.width
                )));
            }
            for i in 0..=full {
                if !control.matches(i) {
                    continue;
                }
                let va = ra.field(i);
                let vb = rb.field(i);
                if va < vb {
                    let j = (i & !ra.mask() & !rb.mask()) | (vb << ra.offset) | (va << rb.offset);
                    state.swap(i as usize, j as usize);
                }
            }
        }
        OpKind::ReflectAboutZero { regs } => {
            let zmask = layout.mask_of(regs)?;
            let rest = full & !zmask;
            for_each_submask(rest, |i| {
                if control.matches(i) {
                    state[i as usize] = -state[i as usize];
                }
            });
        }
        OpKind::DiagonalPhase { regs, phases } => {
            let width = layout.joint_width(regs)?;
            if phases.len() != 1usize << width {
                return Err(Error::DimensionMismatch {
                    left: phases.len(),
                    right: 1usize << width,
                });
            }
            let reg_list: Vec<Register> = regs
                .iter()
                .map(|&n| layout.reg(n))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..=full {
                if !control.matches(i) {
                    continue;
                }
                let mut v = 0u64;
                let mut consumed = 0u32;
                for r in &reg_list {
                    v |= r.field(i) << consumed;
                    consumed += r.width;
                }
                state[i as usize] *= phases[v as usize];
            }
        }
        OpKind::GlobalPhase { phase } => {
            for (i, z) in state.iter_mut().enumerate() {
                if control.matches(i as u64) {
                    *z *= phase;
                }
            }
        }
        OpKind::SuccessAdd { b, c, cond, invert } => {
            let rb = layout.reg(*b)?;
            let rc = layout.reg(*c)?;
            let cmask = layout.mask_of(cond)?;
            let nb = 1usize << rb.width;
            let nc = 1usize << rc.width;
            // Subtraction wraps modulo the register size; `invert` turns the
            // decrements into increments (the op's inverse).
            let db = if *invert { 1 } else { nb - 1 };
            let dc = if *invert { 1 } else { nc - 1 };
            let rest = full & !rb.mask() & !rc.mask();
            // Permutation over the full (b, c) product space: the untouched
            // register keeps its value whatever it is.
            let mut scratch = vec![ZERO; nb * nc];
            for_each_submask(rest, |base| {
                if !control.matches(base) {
                    return;
                }
                let success = base & cmask == 0;
                for bv in 0..nb {
                    for cv in 0..nc {
                        let (tb, tc) = if success {
                            ((bv + db) % nb, cv)
                        } else {
                            (bv, (cv + dc) % nc)
                        };
                        let src = base
                            | ((bv as u64) << rb.offset)
                            | ((cv as u64) << rc.offset);
                        scratch[tb * nc + tc] = state[src as usize];
                    }
                }
                for bv in 0..nb {
                    for cv in 0..nc {
                        let dst = base
                            | ((bv as u64) << rb.offset)
                            | ((cv as u64) << rc.offset);
                        state[dst as usize] = scratch[bv * nc + cv];
                    }
                }
            });
        }
    }
    Ok(())
}

/// A sequence of register-local operations over a fixed layout.
#[derive(Clone, Debug)]
pub struct Circuit {
    pub layout: RegisterLayout,
    pub ops: Vec<Op>,
}

impl Circuit {
    pub fn new(layout: RegisterLayout) -> Self {
        Circuit {
            layout,
            ops: Vec::new(),
        }
    }

    pub fn push(&mut self, op: Op) {
        self.ops.push(op);
    }

    pub fn extend(&mut self, ops: impl IntoIterator<Item = Op>) {
        self.ops.extend(ops);
    }

    pub fn dagger(&self) -> Circuit {
        Circuit {
            layout: self.layout.clone(),
            ops: self.ops.iter().rev().map(Op::dagger).collect(),
        }
    }

    pub fn apply(&self, state: &mut StateVector, counts: &mut QueryCounts) -> Result<()> {
        if state.dim() != self.layout.dim() {
            return Err(Error::DimensionMismatch {
                left: state.dim(),
                right: self.layout.dim(),
            });
        }
        for op in &self.ops {
            apply_op(&self.layout, &mut state.amps, op, counts)?;
        }
        Ok(())
    }

    /// Apply to a computational basis state of the full layout.
    pub fn apply_to_basis(&self, index: u64, counts: &mut QueryCounts) -> Result<StateVector> {
        if index as usize >= self.layout.dim() {
            return Err(Error::Register(format!(
                "basis index {index} out of range for {} qubits",
                self.layout.total_qubits()
            )));
        }
        let mut state = StateVector::basis(self.layout.dim(), index as usize);
        self.apply(&mut state, counts)?;
        Ok(state)
    }

    /// Materialize the full unitary (debug path; small layouts only).
    pub fn to_matrix(&self) -> Result<ComplexOperator> {
        let dim = self.layout.dim();
        if dim > tol::DENSE_DIM_BUDGET {
            return Err(Error::Budget {
                what: "dense circuit materialization",
                needed: dim as u64,
                available: tol::DENSE_DIM_BUDGET as u64,
            });
        }
        let mut m = ComplexOperator::zeros(dim);
        let mut scratch = QueryCounts::default();
        for c in 0..dim {
            let col = self.apply_to_basis(c as u64, &mut scratch)?;
            for r in 0..dim {
                m[(r, c)] = col.amps[r];
            }
        }
        Ok(m)
    }
}

/// Apply a circuit to the basis state addressed by `basis_index` on the
/// non-ancilla registers, ancillas initialized to zero; returns the full
/// post-circuit state. Projecting the result onto ancilla-zero rows yields
/// one column of the encoded block.
pub fn apply_block_column(
    circuit: &Circuit,
    ancilla: &[char],
    basis_index: u64,
    counts: &mut QueryCounts,
) -> Result<StateVector> {
    let system: Vec<char> = circuit
        .layout
        .registers()
        .iter()
        .map(|r| r.name)
        .filter(|n| !ancilla.contains(n))
        .collect();
    for &a in ancilla {
        circuit.layout.reg(a)?;
    }
    let index = circuit.layout.pack_joint(&system, basis_index)?;
    circuit.apply_to_basis(index, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{self, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_op(targets: &[char], m: ComplexOperator) -> Op {
        Op::new(OpKind::Dense {
            targets: targets.to_vec(),
            matrix: Arc::new(m),
        })
    }

    #[test]
    fn layout_packing_roundtrip() {
        let l = RegisterLayout::new(&[('s', 2), ('a', 1), ('d', 3)]).unwrap();
        assert_eq!(l.total_qubits(), 6);
        let idx = l.pack(&[('s', 3), ('a', 1), ('d', 5)]).unwrap();
        assert_eq!(l.field('s', idx).unwrap(), 3);
        assert_eq!(l.field('a', idx).unwrap(), 1);
        assert_eq!(l.field('d', idx).unwrap(), 5);
        assert!(l.pack(&[('s', 4)]).is_err());
        assert!(l.reg('x').is_err());
    }

    #[test]
    fn dense_on_register_matches_kron() {
        // X on 's' (low), Z on 'a' (high): full = Z ⊗ X.
        let l = RegisterLayout::new(&[('s', 1), ('a', 1)]).unwrap();
        let mut circ = Circuit::new(l);
        circ.push(dense_op(&['s'], ComplexOperator::pauli_x()));
        circ.push(dense_op(&['a'], ComplexOperator::pauli_z()));
        let got = circ.to_matrix().unwrap();
        let want = ComplexOperator::pauli_z().kron(&ComplexOperator::pauli_x());
        assert!(got.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn multi_register_dense_bit_order() {
        // Joint op on (s, a) with s the low bits of the matrix index.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = operator::random_unitary(8, &mut rng);
        let l = RegisterLayout::new(&[('s', 2), ('a', 1)]).unwrap();
        let mut circ = Circuit::new(l);
        circ.push(dense_op(&['s', 'a'], u.clone()));
        let got = circ.to_matrix().unwrap();
        assert!(got.max_abs_diff(&u) < 1e-14);
    }

    #[test]
    fn controlled_dense() {
        // X on 's' controlled on a = 1.
        let l = RegisterLayout::new(&[('s', 1), ('a', 1)]).unwrap();
        let ctrl = Control {
            mask: l.mask_of(&['a']).unwrap(),
            value: l.pack(&[('a', 1)]).unwrap(),
        };
        let mut circ = Circuit::new(l);
        circ.push(dense_op(&['s'], ComplexOperator::pauli_x()).controlled(ctrl));
        let got = circ.to_matrix().unwrap();
        // CNOT with control on high bit.
        let mut want = ComplexOperator::zeros(4);
        want[(0, 0)] = ONE;
        want[(1, 1)] = ONE;
        want[(2, 3)] = ONE;
        want[(3, 2)] = ONE;
        assert!(got.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn select_applies_per_index_matrices() {
        let l = RegisterLayout::new(&[('s', 1), ('d', 2)]).unwrap();
        let mats = vec![
            ComplexOperator::identity(2),
            ComplexOperator::pauli_x(),
            ComplexOperator::pauli_z(),
            ComplexOperator::pauli_x().mul(&ComplexOperator::pauli_z()),
        ];
        let mut circ = Circuit::new(l.clone());
        circ.push(Op::new(OpKind::Select {
            selector: vec!['d'],
            targets: vec!['s'],
            matrices: Arc::new(mats.clone()),
        }));
        let got = circ.to_matrix().unwrap();
        for (m, mat) in mats.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    let row = l.pack(&[('d', m as u64), ('s', r as u64)]).unwrap() as usize;
                    let col = l.pack(&[('d', m as u64), ('s', c as u64)]).unwrap() as usize;
                    assert!((got[(row, col)] - mat[(r, c)]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn hadamards_prepare_uniform_superposition() {
        let l = RegisterLayout::new(&[('d', 3)]).unwrap();
        let mut circ = Circuit::new(l);
        circ.push(Op::new(OpKind::Hadamards { reg: 'd' }));
        let out = circ
            .apply_to_basis(0, &mut QueryCounts::default())
            .unwrap();
        for a in &out.amps {
            assert!((a - Complex64::new(1.0 / 8f64.sqrt(), 0.0)).norm() < 1e-14);
        }
        // Self-inverse.
        let m = circ.to_matrix().unwrap();
        assert!(m.mul(&m).max_abs_diff(&ComplexOperator::identity(8)) < 1e-13);
    }

    #[test]
    fn modular_add_wraps() {
        let l = RegisterLayout::new(&[('b', 2)]).unwrap();
        let mut circ = Circuit::new(l);
        circ.push(Op::new(OpKind::ModularAdd { reg: 'b', delta: 1 }));
        let out = circ.apply_to_basis(3, &mut QueryCounts::default()).unwrap();
        assert!((out.amps[0] - ONE).norm() < 1e-15);
        // (adder)^(2^n) = identity, exhaustively for widths <= 4.
        for width in 1..=4u32 {
            let l = RegisterLayout::new(&[('b', width)]).unwrap();
            let mut c = Circuit::new(l);
            let n = 1u64 << width;
            for _ in 0..n {
                c.push(Op::new(OpKind::ModularAdd { reg: 'b', delta: 1 }));
            }
            let m = c.to_matrix().unwrap();
            assert!(m.max_abs_diff(&ComplexOperator::identity(n as usize)) < 1e-13);
        }
    }

    #[test]
    fn dagger_inverts_every_op_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l = RegisterLayout::new(&[('s', 2), ('a', 1), ('d', 2), ('e', 2), ('f', 1)]).unwrap();
        let mut circ = Circuit::new(l.clone());
        circ.push(dense_op(&['s'], operator::random_unitary(4, &mut rng)));
        circ.push(Op::new(OpKind::Select {
            selector: vec!['d'],
            targets: vec!['s', 'a'],
            matrices: Arc::new((0..4).map(|_| operator::random_unitary(8, &mut rng)).collect()),
        }));
        circ.push(Op::new(OpKind::Hadamards { reg: 'd' }));
        circ.push(Op::new(OpKind::ModularAdd { reg: 'd', delta: 3 }));
        circ.push(Op::new(OpKind::CompareGe {
            lhs: 'e',
            rhs: 'd',
            flag: 'f',
        }));
        circ.push(Op::new(OpKind::SwapRegs { a: 'd', b: 'e' }));
        circ.push(Op::new(OpKind::ReflectAboutZero {
            regs: vec!['a', 'f'],
        }));
        circ.push(Op::new(OpKind::DiagonalPhase {
            regs: vec!['d', 'f'],
            phases: Arc::new(
                (0..8)
                    .map(|k| Complex64::from_polar(1.0, 0.3 * k as f64))
                    .collect(),
            ),
        }));
        circ.push(Op::new(OpKind::GlobalPhase {
            phase: Complex64::from_polar(1.0, 1.234),
        }));
        circ.push(Op::new(OpKind::SuccessAdd {
            b: 'd',
            c: 'e',
            cond: vec!['a', 'f'],
            invert: false,
        }));

        let mut state = StateVector::random(l.dim(), &mut rng);
        let original = state.clone();
        let mut counts = QueryCounts::default();
        circ.apply(&mut state, &mut counts).unwrap();
        assert!((state.norm() - 1.0).abs() < 1e-12, "not norm-preserving");
        circ.dagger().apply(&mut state, &mut counts).unwrap();
        let dev: f64 = state
            .amps
            .iter()
            .zip(&original.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12, "dagger does not invert: dev = {dev}");
    }

    #[test]
    fn counters_tally_per_application() {
        let l = RegisterLayout::new(&[('s', 1)]).unwrap();
        let mut circ = Circuit::new(l);
        circ.push(
            dense_op(&['s'], ComplexOperator::pauli_x()).counted(CounterKind::HamT, 1),
        );
        circ.push(dense_op(&['s'], ComplexOperator::pauli_z()));
        let mut counts = QueryCounts::default();
        circ.apply_to_basis(0, &mut counts).unwrap();
        circ.dagger().apply_to_basis(0, &mut counts).unwrap();
        assert_eq!(counts.ham_t, 2);
        counts.reset();
        assert_eq!(counts.ham_t, 0);
    }

    #[test]
    fn block_column_of_identity_is_basis_state() {
        let l = RegisterLayout::new(&[('s', 2), ('a', 2)]).unwrap();
        let circ = Circuit::new(l.clone());
        let out =
            apply_block_column(&circ, &['a'], 2, &mut QueryCounts::default()).unwrap();
        let expect = l.pack(&[('s', 2)]).unwrap() as usize;
        for (i, a) in out.amps.iter().enumerate() {
            let want = if i == expect { 1.0 } else { 0.0 };
            assert!((a.re - want).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
        assert!(apply_block_column(&circ, &['a'], 4, &mut QueryCounts::default()).is_err());
    }
}
