//! Compressed truncated Taylor series for time-independent Hamiltonians:
//! the compression gadget chained over `(-i)·HAM` realizes
//! `Σ_k |k><k|_b ⊗ (-iH/alpha)^k`, and the same COEF on both sides selects
//! the Taylor weights `sqrt(t^k/k!)`.

use num_complex::Complex64;

use crate::circuit::{Circuit, Op, OpKind};
use crate::encoding::BlockEncoding;
use crate::error::{Error, Result};
use crate::gadgets::tds::{pad_to_half, robust_oaa};
use crate::gadgets::{coef_prep, compression_gadget, dense_op};
use crate::operator::ONE;

/// The assembled Taylor step.
#[derive(Clone, Debug)]
pub struct TtsStep {
    /// Amplified encoding whose block approximates `e^{-iHt}`.
    pub encoding: BlockEncoding,
    pub k: usize,
    /// `beta' = Σ_{k<=K} (alpha t)^k / k! <= 2` before padding.
    pub beta_prime: f64,
    pub t: f64,
}

/// Smallest truncation order with tail bound `2 (alpha t)^{K+1}/(K+1)! <= eps`.
pub fn taylor_truncation_order(x: f64, eps: f64) -> Result<usize> {
    if eps <= 0.0 {
        return Err(Error::domain("taylor_truncation_order", "eps must be positive"));
    }
    let mut tail = 2.0 * x; // K = 0 term: 2 x^1 / 1!
    let mut k = 0usize;
    while tail > eps {
        k += 1;
        tail *= x / (k + 1) as f64;
        if k > 64 {
            return Err(Error::domain(
                "taylor_truncation_order",
                "truncation order did not settle below 64",
            ));
        }
    }
    Ok(k)
}

/// Build one compressed Taylor step `e^{-iHt}` over an encoding of a
/// time-independent `H`, valid for `alpha·t <= ln 2`.
pub fn tts_step(enc: &BlockEncoding, t: f64, eps: f64) -> Result<TtsStep> {
    let x = enc.alpha * t;
    // Small slack above ln 2 absorbs the headroom that measured norm bounds
    // carry; the beta' <= 2 check below still rejects anything unpaddable.
    if x < 0.0 || x > std::f64::consts::LN_2 * (1.0 + 1e-5) {
        return Err(Error::domain(
            "tts_step",
            format!("alpha*t = {x} outside [0, ln 2]"),
        ));
    }
    let k = taylor_truncation_order(x, eps)?;
    if k == 0 {
        // Degenerate order: the series is the identity, which is its own
        // amplified encoding.
        return Ok(TtsStep {
            encoding: BlockEncoding {
                circuit: Circuit::new(enc.layout().clone()),
                alpha: 1.0,
                system: enc.system.clone(),
                ancilla: enc.ancilla.clone(),
            },
            k: 0,
            beta_prime: 1.0,
            t,
        });
    }

    // U_j = (-i) * HAM for every j.
    let mut unit_ops: Vec<Op> = enc.circuit.ops.clone();
    unit_ops.push(Op::new(OpKind::GlobalPhase {
        phase: Complex64::new(0.0, -1.0),
    }));
    let mut unit_circuit = Circuit::new(enc.layout().clone());
    unit_circuit.extend(unit_ops);
    let unit = BlockEncoding {
        circuit: unit_circuit,
        alpha: enc.alpha,
        system: enc.system.clone(),
        ancilla: enc.ancilla.clone(),
    };
    let units = vec![unit; k];
    let gadget = compression_gadget(&units)?;

    // beta' = Σ x^j / j!; amplitudes sqrt(x^j / j! / beta').
    let mut weights = Vec::with_capacity(k + 1);
    let mut w = 1.0f64;
    for j in 0..=k {
        weights.push(w);
        w *= x / (j + 1) as f64;
    }
    let beta_prime: f64 = weights.iter().sum();
    if beta_prime > 2.0 {
        return Err(Error::Plan(format!("beta' = {beta_prime} exceeds 2")));
    }
    let amps: Vec<Complex64> = weights
        .iter()
        .map(|&v| ONE * (v / beta_prime).sqrt())
        .collect();
    let coef = coef_prep(&amps, &gadget.info)?;

    let layout = gadget.circuit.layout.clone();
    let mut circuit = Circuit::new(layout.clone());
    circuit.push(dense_op(&['b'], coef.clone()));
    circuit.extend(gadget.circuit.ops.iter().cloned());
    circuit.push(dense_op(&['b'], coef.dagger()));

    let ancilla: Vec<char> = layout
        .registers()
        .iter()
        .map(|r| r.name)
        .filter(|n| !enc.system.contains(n))
        .collect();
    let tts_beta = BlockEncoding {
        circuit,
        alpha: beta_prime,
        system: enc.system.clone(),
        ancilla,
    };
    let amplified = robust_oaa(&pad_to_half(&tts_beta)?)?;
    Ok(TtsStep {
        encoding: amplified,
        k,
        beta_prime,
        t,
    })
}
