//! Named, seeded property suites behind the command-line `verify` command.
//!
//! Each check reports the measured quantity, the tolerance it was held to,
//! and the relative margin. A tolerance scale of 1.0 runs the suite as
//! specified; other scales exist to prove the harness actually fails when
//! tolerances are tightened (fault injection).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::QueryCounts;
use crate::dyson;
use crate::encoding;
use crate::error::{Error, Result};
use crate::gadgets;
use crate::models::{self, hubbard, sparse};
use crate::operator::{self, matrix_exponential, spectral_norm, ComplexOperator, ONE};

/// Outcome of one named invariant check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    /// The measured deviation / quantity the tolerance applies to.
    pub measured: f64,
    pub tolerance: f64,
    /// `(tolerance - measured) / tolerance`; 1.0 means maximal headroom.
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const SUITES: &[&str] = &["core", "dyson", "gadgets", "sparse", "hubbard"];

fn check(name: &str, measured: f64, tolerance: f64) -> CheckOutcome {
    let pass = measured <= tolerance;
    let margin = if tolerance > 0.0 {
        (tolerance - measured) / tolerance
    } else if measured == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    CheckOutcome {
        name: name.into(),
        pass,
        measured,
        tolerance,
        margin,
    }
}

fn rotating_family(s: f64) -> ComplexOperator {
    ComplexOperator::pauli_x()
        .scale(ONE * s.cos())
        .add(&ComplexOperator::pauli_z().scale(ONE * s.sin()))
}

/// Run one named suite. `tolerance_scale` multiplies every tolerance.
pub fn run_suite(suite: &str, seed: u64, tolerance_scale: f64) -> Result<SuiteReport> {
    let checks = match suite {
        "core" => core_suite(seed, tolerance_scale),
        "dyson" => dyson_suite(seed, tolerance_scale),
        "gadgets" => gadget_suite(seed, tolerance_scale),
        "sparse" => sparse_suite(seed, tolerance_scale),
        "hubbard" => hubbard_suite(seed, tolerance_scale),
        other => {
            return Err(Error::domain(
                "verify",
                format!("unknown suite '{other}'; expected one of {SUITES:?} or 'all'"),
            ))
        }
    }?;
    Ok(SuiteReport {
        suite: suite.into(),
        seed,
        checks,
    })
}

/// Run every suite under one seed.
pub fn run_all(seed: u64, tolerance_scale: f64) -> Result<Vec<SuiteReport>> {
    SUITES
        .iter()
        .map(|s| run_suite(s, seed, tolerance_scale))
        .collect()
}

fn core_suite(seed: u64, scale: f64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Exponential group law over random Hermitian generators.
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = operator::random_hermitian(4, 1.0, &mut rng);
        let a = 2.0 * rng.random::<f64>() - 1.0;
        let b = 2.0 * rng.random::<f64>() - 1.0;
        let lhs = matrix_exponential(&h, a + b)?;
        let rhs = matrix_exponential(&h, a)?.mul(&matrix_exponential(&h, b)?);
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    checks.push(check("expm-group-law", worst, 1e-9 * scale));

    // Unitarity of constructed exponentials.
    let mut worst = 0.0f64;
    for dim in [2usize, 4, 8] {
        let h = operator::random_hermitian(dim, 2.0, &mut rng);
        worst = worst.max(matrix_exponential(&h, 0.7)?.unitarity_deviation());
    }
    checks.push(check("expm-unitarity", worst, 1e-10 * scale));

    // Spectral norm: submultiplicativity and the power-iteration cross-check.
    let mut worst_sub = 0.0f64;
    let mut worst_cross = 0.0f64;
    for _ in 0..10 {
        let a = operator::random_hermitian(4, 1.0, &mut rng);
        let b = operator::random_hermitian(4, 1.0, &mut rng);
        let excess = spectral_norm(&a.mul(&b)) - spectral_norm(&a) * spectral_norm(&b);
        worst_sub = worst_sub.max(excess);
        let n1 = spectral_norm(&a);
        let n2 = operator::spectral_norm_power_iteration(&a, 2000);
        worst_cross = worst_cross.max((n1 - n2).abs() / n1.max(1.0));
    }
    checks.push(check("norm-submultiplicative", worst_sub.max(0.0), 1e-9 * scale));
    checks.push(check("norm-two-route-agreement", worst_cross, 1e-9 * scale));

    // PSD square-root reconstruction.
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let h = operator::random_hermitian(4, 1.0, &mut rng);
        let a = h.scale(ONE / (spectral_norm(&h) * 1.5));
        let p = ComplexOperator::identity(4).sub(&a.dagger().mul(&a));
        let s = operator::hermitian_psd_sqrt(&p)?;
        worst = worst.max(s.mul(&s).max_abs_diff(&p));
    }
    checks.push(check("psd-sqrt-reconstruction", worst, 1e-10 * scale));

    // Block assembly agrees with the dense product for an LCU instance.
    let enc = encoding::lcu_encode(
        &[0.5, 0.5],
        &[ComplexOperator::pauli_x(), ComplexOperator::pauli_z()],
    )?;
    let want = ComplexOperator::pauli_x()
        .add(&ComplexOperator::pauli_z())
        .scale(ONE * 0.5);
    let dev = enc.extract_block()?.max_abs_diff(&want);
    checks.push(check("lcu-block-assembly", dev, 1e-10 * scale));

    Ok(checks)
}

fn dyson_suite(seed: u64, scale: f64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Recursion vs enumeration for the Riemann terms.
    let mut worst = 0.0f64;
    for m in 2..=5usize {
        let samples: Vec<ComplexOperator> = (0..m)
            .map(|_| operator::random_hermitian(2, 1.0, &mut rng))
            .collect();
        let hs = models::SampledHamiltonian {
            t: 0.3,
            m,
            samples,
            alpha: 3.0,
            avg_deriv: 0.0,
        };
        for k in 0..=3.min(m) {
            let fast = dyson::riemann_terms(&hs, k)?;
            let slow = dyson::riemann_terms_enumerated(&hs, k)?;
            worst = worst.max(fast[k].max_abs_diff(&slow));
        }
    }
    checks.push(check("riemann-dp-vs-enumeration", worst, 1e-12 * scale));

    // Combined truncation + discretization error on random smooth families.
    let mut worst_ratio = 0.0f64;
    for _ in 0..5 {
        let a = operator::random_hermitian(2, 0.4, &mut rng);
        let b = operator::random_hermitian(2, 0.4, &mut rng);
        let c = operator::random_hermitian(2, 0.4, &mut rng);
        let gen = move |s: f64| {
            a.add(&b.scale(ONE * s.cos()))
                .add(&c.scale(ONE * s.sin()))
        };
        let eps = 0.01;
        let (alpha, deriv) = models::norm_metadata(&gen, 1.0, 64);
        let t = (0.9 * std::f64::consts::LN_2 / alpha).min(0.6);
        let k = dyson::choose_truncation_order(eps)?;
        let m = dyson::choose_discretization(alpha, deriv, t, eps, k);
        let hs = models::sample_hamiltonian(&gen, t, m)?;
        let sum = dyson::truncated_dyson_sum(&hs, k)?;
        let oracle = dyson::exact_propagator(&gen, t, eps / 100.0)?;
        worst_ratio = worst_ratio.max(spectral_norm(&sum.sub(&oracle.op)) / eps);
    }
    checks.push(check("series-error-bound-ratio", worst_ratio, 1.0 * scale));

    // Sequence-product inequality for contractions vs unitaries.
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut prod_a = ComplexOperator::identity(4);
        let mut prod_b = ComplexOperator::identity(4);
        let mut sum = 0.0;
        for _ in 0..4 {
            let b = operator::random_unitary(4, &mut rng);
            let e = operator::random_hermitian(4, 0.05, &mut rng);
            let a_raw = b.add(&e);
            let a = a_raw.scale(ONE / spectral_norm(&a_raw).max(1.0));
            sum += spectral_norm(&a.sub(&b));
            prod_a = a.mul(&prod_a);
            prod_b = b.mul(&prod_b);
        }
        worst = worst.max(spectral_norm(&prod_a.sub(&prod_b)) - sum);
    }
    checks.push(check("sequence-product-inequality", worst.max(0.0), 1e-9 * scale));

    Ok(checks)
}

fn gadget_suite(seed: u64, scale: f64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Compression sectors vs direct products.
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let blocks: Vec<ComplexOperator> = (0..3)
            .map(|_| {
                let h = operator::random_hermitian(2, 1.0, &mut rng);
                h.scale(ONE / (spectral_norm(&h) * (1.0 + rng.random::<f64>())))
            })
            .collect();
        let units: Vec<_> = blocks
            .iter()
            .map(|b| encoding::unitary_completion(b, 1.0))
            .collect::<Result<_>>()?;
        let gadget = gadgets::compression_gadget(&units)?;
        let mut product = ComplexOperator::identity(2);
        for (j, b) in blocks.iter().enumerate() {
            product = b.mul(&product);
            worst = worst.max(gadget.sector(j + 1)?.max_abs_diff(&product));
        }
    }
    checks.push(check("compression-sector-products", worst, 1e-10 * scale));

    // Comparator ladder block.
    let enc = gadgets::comparator_lt_encoding(4)?;
    let g = enc.extract_block()?;
    let mut dev = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let want = if i < j { 0.25 } else { 0.0 };
            dev = dev.max((g[(i, j)] - ONE * want).norm());
        }
    }
    checks.push(check("comparator-ladder-block", dev, 1e-12 * scale));

    // DYS_K sectors vs the Riemann recursion.
    let samples: Vec<ComplexOperator> = (0..4)
        .map(|_| operator::random_hermitian(2, 1.0, &mut rng))
        .collect();
    let alpha = samples.iter().map(spectral_norm).fold(0.0f64, f64::max) * 1.1;
    let hs = models::SampledHamiltonian {
        t: 0.3,
        m: 4,
        samples,
        alpha,
        avg_deriv: 0.0,
    };
    let tibe = encoding::ham_t_from_samples(&hs)?;
    let dys = gadgets::dys_k(&tibe, 3)?;
    let normalized = models::SampledHamiltonian {
        samples: hs.samples.iter().map(|s| s.scale(ONE / alpha)).collect(),
        ..hs.clone()
    };
    let terms = dyson::riemann_terms(&normalized, 3)?;
    let mut worst = 0.0f64;
    for k in 0..=3usize {
        let want = terms[k].scale(ONE / 4f64.powi(k as i32));
        worst = worst.max(dys.sector(k)?.max_abs_diff(&want));
    }
    checks.push(check("dys-sectors-vs-riemann", worst, 1e-10 * scale));

    // Robust OAA exactness on half-unitaries.
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let u = operator::random_unitary(2, &mut rng);
        let enc = encoding::unitary_completion(&u.scale(ONE * 0.5), 1.0)?;
        let half = encoding::BlockEncoding { alpha: 2.0, ..enc };
        let w = gadgets::robust_oaa(&half)?;
        worst = worst.max(w.extract_block()?.max_abs_diff(&u));
    }
    checks.push(check("oaa-exact-amplification", worst, 1e-12 * scale));

    // Full single-segment error against the brute-force propagator.
    let eps = 0.05;
    let tau = 0.1;
    let k = dyson::choose_truncation_order(eps)?;
    let meta = models::norm_metadata(&rotating_family, tau, 64);
    let m = dyson::choose_discretization(meta.0, meta.1, tau, eps, k);
    let mut hs = models::sample_hamiltonian(&rotating_family, tau, m)?;
    hs.alpha = hs.alpha.max(1.0);
    let plan = gadgets::TdsSegmentPlan::new(k, m, tau, hs.alpha, eps)?;
    let oracle = encoding::InstrumentedOracle::new(encoding::ham_t_from_samples(&hs)?);
    let segment = gadgets::tds_segment(&oracle, &plan)?;
    let block = gadgets::tds::segment_block(&segment)?;
    let reference = dyson::exact_propagator(&rotating_family, tau, eps / 100.0)?;
    let err = spectral_norm(&block.sub(&reference.op));
    checks.push(check("tds-segment-error-over-4eps", err / (4.0 * eps), 1.0 * scale));

    // Query count of one segment application.
    let mut counts = QueryCounts::default();
    segment
        .encoding
        .circuit
        .apply_to_basis(0, &mut counts)?;
    let count_error = (counts.ham_t as f64 - 3.0 * k as f64).abs();
    checks.push(check("tds-segment-3k-queries", count_error, 0.0));

    Ok(checks)
}

fn sparse_suite(seed: u64, scale: f64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Oracle synthesis block identity.
    let mut worst = 0.0f64;
    let mut worst_herm = 0.0f64;
    for _ in 0..5 {
        let spec = sparse::random_banded_spec(4, 1, 1.0, &mut rng);
        let dense = sparse::sparse_matrix_materialize(&spec, 0)?;
        let enc = encoding::sparse_ham_t(&spec, 1)?;
        let block = enc.block_at(0)?;
        let want = dense.scale(ONE / (spec.d as f64 * spec.hmax));
        worst = worst.max(block.max_abs_diff(&want));
        worst_herm = worst_herm.max(block.hermiticity_deviation());
    }
    checks.push(check("sparse-block-identity", worst, 1e-9 * scale));
    checks.push(check("sparse-block-hermitian", worst_herm, 1e-9 * scale));

    // Diagonal fast-forwarding: exactness and the 2-query invariance.
    let diag = ComplexOperator::from_diagonal(
        &(0..4)
            .map(|_| ONE * (2.0 * rng.random::<f64>() - 1.0))
            .collect::<Vec<_>>(),
    );
    let spec = sparse::spec_from_dense(&diag, 1.0)?;
    let mut worst = 0.0f64;
    let mut count_dev = 0.0f64;
    for t in [0.1, 1.0, 10.0] {
        let ff = encoding::diagonal_fast_forward(&spec, t)?;
        worst = worst.max(ff.matrix.max_abs_diff(&matrix_exponential(&diag, t)?));
        count_dev = count_dev.max((ff.queries_per_application as f64 - 2.0).abs());
    }
    checks.push(check("diagonal-fast-forward-exact", worst, 1e-12 * scale));
    checks.push(check("diagonal-fast-forward-2-queries", count_dev, 0.0));

    // Materialization round-trips the defining callbacks.
    let spec = sparse::random_banded_spec(8, 2, 1.0, &mut rng);
    let via = sparse::sparse_matrix_materialize(&spec, 0)?;
    let mut direct = ComplexOperator::zeros(8);
    for r in 0..8 {
        for c in 0..8 {
            direct[(r, c)] = spec.entry_value(0, r, c);
        }
    }
    checks.push(check(
        "sparse-materialize-roundtrip",
        via.max_abs_diff(&direct),
        1e-12 * scale,
    ));

    Ok(checks)
}

fn hubbard_suite(seed: u64, scale: f64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let spec = hubbard::HubbardSpec {
        sites: 2,
        t_coeffs: vec![0.0, -1.0],
        u_coeffs: vec![[0.3, -0.2], [0.0, 0.1]],
        v_coeffs: vec![1.0, 0.25],
    };
    let ops = hubbard::build_hubbard(&spec)?;
    let comm = ops.total.mul(&ops.number).sub(&ops.number.mul(&ops.total));
    checks.push(check("hubbard-number-conservation", comm.max_abs(), 1e-10 * scale));
    checks.push(check(
        "hubbard-hermitian",
        ops.total.hermiticity_deviation(),
        1e-12 * scale,
    ));

    // Fourier-convolution identity for random symmetric couplings.
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let mut v = vec![0.0f64; n];
        for s in 0..=n / 2 {
            let val = rng.random::<f64>() - 0.5;
            v[s] = val;
            v[(n - s) % n] = val;
        }
        worst = worst.max(hubbard::fourier_potential_identity_check(n, &v)?);
    }
    checks.push(check("fourier-potential-identity", worst, 1e-10 * scale));

    // DFT diagonalizes the circulant hopping matrix.
    let t_coeffs = [0.0, -1.0, 0.5, -1.0];
    let tm = hubbard::single_particle_kinetic_matrix(4, &t_coeffs);
    let f = hubbard::dft_matrix(4);
    let diag = f.dagger().mul(&tm).mul(&f);
    let want = ComplexOperator::from_diagonal(
        &hubbard::kinetic_dispersion(4, &t_coeffs)
            .iter()
            .map(|&x| ONE * x)
            .collect::<Vec<_>>(),
    );
    checks.push(check(
        "kinetic-dft-diagonalization",
        diag.max_abs_diff(&want),
        1e-10 * scale,
    ));

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_under_default_tolerances() {
        for report in run_all(42, 1.0).unwrap() {
            for c in &report.checks {
                assert!(c.pass, "{}::{} measured {}", report.suite, c.name, c.measured);
            }
        }
    }

    #[test]
    fn suites_are_deterministic_under_seed() {
        let a = run_suite("dyson", 7, 1.0).unwrap();
        let b = run_suite("dyson", 7, 1.0).unwrap();
        for (x, y) in a.checks.iter().zip(&b.checks) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.measured.to_bits(), y.measured.to_bits());
        }
    }

    #[test]
    fn zero_tolerance_injection_fails() {
        let report = run_suite("core", 42, 0.0).unwrap();
        assert!(!report.all_pass());
        let failing: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        assert!(!failing.is_empty());
    }

    #[test]
    fn unknown_suite_rejected() {
        assert!(run_suite("nope", 1, 1.0).is_err());
    }
}
