//! Matrix-level Dyson machinery: the brute-force time-ordered propagator
//! oracle, strictly-ordered Riemann terms B_k, truncation/discretization
//! parameter selection, and the truncated-series assembly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::SampledHamiltonian;
use crate::operator::{matrix_exponential, spectral_norm, ComplexOperator, ONE};
use crate::tol;

/// Parameters of one truncated-Dyson run.
#[derive(Clone, Copy, Debug)]
pub struct DysonParameters {
    pub k: usize,
    pub m: usize,
    pub t: f64,
    pub eps: f64,
}

impl DysonParameters {
    /// Bound-backed domain: eps in (0, 2^(1-e)], max||H||·t <= ln 2, M >= K².
    pub fn validate(&self, max_norm: f64) -> Result<()> {
        if self.eps <= 0.0 || self.eps > tol::eps_domain_limit() {
            return Err(Error::domain(
                "DysonParameters",
                format!(
                    "eps = {} outside bound-backed domain (0, {:.6}]",
                    self.eps,
                    tol::eps_domain_limit()
                ),
            ));
        }
        if max_norm * self.t > std::f64::consts::LN_2 + 1e-12 {
            return Err(Error::domain(
                "DysonParameters",
                format!("max||H||·t = {} exceeds ln 2", max_norm * self.t),
            ));
        }
        if self.m < self.k * self.k {
            return Err(Error::domain(
                "DysonParameters",
                format!("M = {} below K² = {}", self.m, self.k * self.k),
            ));
        }
        Ok(())
    }
}

/// Result of the step-doubled product-formula propagator.
#[derive(Clone, Debug)]
pub struct PropagatorResult {
    pub op: ComplexOperator,
    /// Steps in the final refinement level.
    pub steps: u64,
    /// Spectral-norm distance between the last two refinement levels.
    pub delta: f64,
}

/// Independent brute-force oracle for the time-ordered propagator:
/// left-endpoint product formula `Π_j e^{-iH(t(j-1)/r) t/r}` with step
/// doubling until successive refinements differ by less than `tol_target`.
pub fn exact_propagator(
    generator: &dyn Fn(f64) -> ComplexOperator,
    t: f64,
    tol_target: f64,
) -> Result<PropagatorResult> {
    let dim = generator(0.0).dim();
    if t == 0.0 {
        return Ok(PropagatorResult {
            op: ComplexOperator::identity(dim),
            steps: 0,
            delta: 0.0,
        });
    }
    if tol_target <= 0.0 {
        return Err(Error::domain("exact_propagator", "tolerance must be positive"));
    }
    let product_at = |r: u64| -> Result<ComplexOperator> {
        let dt = t / r as f64;
        let mut u = ComplexOperator::identity(dim);
        for j in 0..r {
            let h = generator(j as f64 * dt);
            h.require_hermitian()?;
            // Later times multiply on the left.
            u = matrix_exponential(&h, dt)?.mul(&u);
        }
        Ok(u)
    };

    let mut r: u64 = 16;
    let mut current = product_at(r)?;
    loop {
        let next = product_at(2 * r)?;
        let delta = spectral_norm(&next.sub(&current));
        if delta < tol_target {
            return Ok(PropagatorResult {
                op: next,
                steps: 2 * r,
                delta,
            });
        }
        if 2 * r >= 1 << 22 {
            return Err(Error::NoConvergence {
                steps: 2 * r,
                delta,
            });
        }
        current = next;
        r *= 2;
    }
}

/// Strictly-ordered Riemann terms
/// `B_k = Σ_{0 <= m_1 < ... < m_k < M} H(m_k Δ)···H(m_1 Δ)` for k = 0..K,
/// via the prefix recursion `C_k(m) = C_k(m-1) + H(mΔ)·C_{k-1}(m-1)`
/// (O(K·M) operator products). `B_0 = 1`.
pub fn riemann_terms(hs: &SampledHamiltonian, k_max: usize) -> Result<Vec<ComplexOperator>> {
    if k_max > hs.m {
        return Err(Error::domain(
            "riemann_terms",
            format!("K = {k_max} exceeds M = {} (no strictly ordered tuples)", hs.m),
        ));
    }
    let dim = hs.dim();
    let mut c: Vec<ComplexOperator> = Vec::with_capacity(k_max + 1);
    c.push(ComplexOperator::identity(dim));
    for _ in 0..k_max {
        c.push(ComplexOperator::zeros(dim));
    }
    for m in 0..hs.m {
        let h = &hs.samples[m];
        // Descending k so C_{k-1} still holds the (m-1) value.
        for k in (1..=k_max).rev() {
            let add = h.mul(&c[k - 1]);
            c[k] = c[k].add(&add);
        }
    }
    Ok(c)
}

/// Brute-force oracle for `B_k`: explicit enumeration over strictly ordered
/// index tuples. Exponential in `k`; used to validate the recursion.
pub fn riemann_terms_enumerated(
    hs: &SampledHamiltonian,
    k: usize,
) -> Result<ComplexOperator> {
    let dim = hs.dim();
    if k == 0 {
        return Ok(ComplexOperator::identity(dim));
    }
    if k > hs.m {
        return Err(Error::domain("riemann_terms_enumerated", "K exceeds M"));
    }
    let mut acc = ComplexOperator::zeros(dim);
    let mut indices: Vec<usize> = (0..k).collect();
    loop {
        // Product H(m_k)···H(m_1) with m_1 < ... < m_k.
        let mut prod = ComplexOperator::identity(dim);
        for &m in indices.iter() {
            prod = hs.samples[m].mul(&prod);
        }
        acc = acc.add(&prod);
        // Next strictly increasing tuple.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(acc);
            }
            i -= 1;
            if indices[i] < hs.m - (k - i) {
                indices[i] += 1;
                for j in i + 1..k {
                    indices[j] = indices[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Truncation order `K = ceil(-1 + 2 ln(2/eps) / (ln ln(2/eps) + 1))`.
pub fn choose_truncation_order(eps: f64) -> Result<usize> {
    if eps <= 0.0 || eps > tol::eps_domain_limit() {
        return Err(Error::domain(
            "choose_truncation_order",
            format!(
                "eps = {eps} outside (0, {:.6}]",
                tol::eps_domain_limit()
            ),
        ));
    }
    let x = (2.0 / eps).ln();
    let k = (-1.0 + 2.0 * x / (x.ln() + 1.0)).ceil();
    Ok(k.max(1.0) as usize)
}

/// Discretization count: smallest power of two at or above
/// `max{ 16 t²/eps (avg_deriv + max_norm²), K² }`.
pub fn choose_discretization(alpha: f64, avg_deriv: f64, t: f64, eps: f64, k: usize) -> usize {
    let error_bound = 16.0 * t * t / eps * (avg_deriv + alpha * alpha);
    let floor = error_bound.max((k * k) as f64).max(1.0);
    let mut m = 1usize;
    while (m as f64) < floor {
        m *= 2;
    }
    m
}

/// `Σ_{k=0}^{K} (-i t/M)^k B_k` over the sampled grid.
pub fn truncated_dyson_sum(hs: &SampledHamiltonian, k_max: usize) -> Result<ComplexOperator> {
    let terms = riemann_terms(hs, k_max)?;
    let step = Complex64::new(0.0, -hs.t / hs.m as f64); // -i t/M
    let mut acc = ComplexOperator::zeros(hs.dim());
    let mut factor = ONE;
    for term in terms.iter() {
        acc = acc.add(&term.scale(factor));
        factor *= step;
    }
    Ok(acc)
}

/// Segment schedule of the multi-segment driver: `L = ceil(2 alpha t)` and
/// `tau = t/L`, so `alpha·tau <= 1/2`. Degenerate `t = 0` gives one empty
/// segment.
///
/// The ceiling discounts the multiplicative headroom that numerically
/// measured norm bounds carry, so exact integer boundaries (alpha·t = 1/2,
/// 1, ...) do not spill into an extra segment.
pub fn segment_schedule(t_total: f64, alpha: f64) -> (usize, f64) {
    if t_total <= 0.0 {
        return (1, 0.0);
    }
    let raw = 2.0 * alpha * t_total;
    let discounted = raw * (1.0 - 2.0 * tol::ALPHA_HEADROOM);
    let l = discounted.ceil().max(1.0) as usize;
    (l, t_total / l as f64)
}
