//! Periodic Hubbard model with single-site disorder and translationally
//! invariant long-ranged density-density couplings, on a 1D spinful lattice
//! small enough for dense Fock-space construction.

use num_complex::Complex64;

use super::jordan_wigner::{jordan_wigner_operators, total_number_operator, MAX_MODES};
use crate::error::{Error, Result};
use crate::operator::{ComplexOperator, ONE};

/// Largest spinful lattice built as a full `H = T + U + V`.
pub const MAX_SITES: usize = 3;

#[derive(Clone, Debug)]
pub struct HubbardSpec {
    /// Lattice sites N (1D).
    pub sites: usize,
    /// Kinetic hoppings T(s), indexed by displacement s = (x - y) mod N.
    pub t_coeffs: Vec<f64>,
    /// Single-site potentials U(x, sigma); `u_coeffs[x][spin]`.
    pub u_coeffs: Vec<[f64; 2]>,
    /// Translation-invariant couplings V(s), s = (x - y) mod N.
    pub v_coeffs: Vec<f64>,
}

impl HubbardSpec {
    pub fn n_modes(&self) -> usize {
        2 * self.sites
    }

    /// Mode index of site `x`, spin `sigma` (0 = up, 1 = down).
    pub fn mode(&self, x: usize, sigma: usize) -> usize {
        sigma * self.sites + x
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.sites;
        if n == 0 {
            return Err(Error::Model("lattice needs at least one site".into()));
        }
        if self.t_coeffs.len() != n || self.v_coeffs.len() != n || self.u_coeffs.len() != n {
            return Err(Error::Model(format!(
                "coefficient arrays must have length N = {n}"
            )));
        }
        for s in 0..n {
            let sr = (n - s) % n;
            if (self.v_coeffs[s] - self.v_coeffs[sr]).abs() > 1e-12 {
                return Err(Error::Model(format!(
                    "V must be symmetric: V({s}) = {} but V(-{s}) = {}",
                    self.v_coeffs[s], self.v_coeffs[sr]
                )));
            }
            if (self.t_coeffs[s] - self.t_coeffs[sr]).abs() > 1e-12 {
                return Err(Error::Model(format!(
                    "T must be symmetric for a Hermitian hopping term: T({s}) != T(-{s})"
                )));
            }
        }
        Ok(())
    }
}

/// The assembled Fock-space operators of one Hubbard spec.
#[derive(Debug)]
pub struct HubbardOperators {
    pub total: ComplexOperator,
    pub t_part: ComplexOperator,
    pub u_part: ComplexOperator,
    pub v_part: ComplexOperator,
    pub number: ComplexOperator,
}

/// Build `H = T + U + V` on the dense Fock space of `2N` modes.
pub fn build_hubbard(spec: &HubbardSpec) -> Result<HubbardOperators> {
    spec.validate()?;
    if spec.sites > MAX_SITES {
        return Err(Error::Budget {
            what: "dense spinful Hubbard lattice",
            needed: spec.sites as u64,
            available: MAX_SITES as u64,
        });
    }
    let n = spec.sites;
    let modes = spec.n_modes();
    let dim = 1usize << modes;
    let ladders = jordan_wigner_operators(modes)?;

    let mut t_part = ComplexOperator::zeros(dim);
    for sigma in 0..2 {
        for x in 0..n {
            for y in 0..n {
                let coeff = spec.t_coeffs[(n + x - y) % n];
                if coeff == 0.0 {
                    continue;
                }
                let hop = ladders[spec.mode(x, sigma)]
                    .creation
                    .mul(&ladders[spec.mode(y, sigma)].annihilation);
                t_part = t_part.add(&hop.scale(ONE * coeff));
            }
        }
    }

    let u_part = {
        let mut diag = vec![0.0f64; dim];
        for (idx, d) in diag.iter_mut().enumerate() {
            for sigma in 0..2 {
                for x in 0..n {
                    if idx >> spec.mode(x, sigma) & 1 == 1 {
                        *d += spec.u_coeffs[x][sigma];
                    }
                }
            }
        }
        diagonal_operator(&diag)
    };

    let v_part = density_coupling_operator(n, &spec.v_coeffs)?;
    let total = t_part.add(&u_part).add(&v_part);
    Ok(HubbardOperators {
        total,
        t_part,
        u_part,
        v_part,
        number: total_number_operator(modes),
    })
}

/// `Σ_{(x,σ)≠(y,σ')} V((x-y) mod N) n_{xσ} n_{yσ'}` as a diagonal operator,
/// evaluated directly from occupations (sum over ordered mode pairs).
pub fn density_coupling_operator(n_sites: usize, v_coeffs: &[f64]) -> Result<ComplexOperator> {
    let n = n_sites;
    if v_coeffs.len() != n {
        return Err(Error::Model("V coefficient array must have length N".into()));
    }
    let modes = 2 * n;
    if modes > MAX_MODES {
        return Err(Error::Budget {
            what: "dense density-coupling operator",
            needed: modes as u64,
            available: MAX_MODES as u64,
        });
    }
    let dim = 1usize << modes;
    let mut diag = vec![0.0f64; dim];
    for (idx, d) in diag.iter_mut().enumerate() {
        let occupied: Vec<usize> = (0..modes).filter(|m| idx >> m & 1 == 1).collect();
        // Ordered pairs of distinct occupied modes; site = mode mod N.
        for &m1 in &occupied {
            for &m2 in &occupied {
                if m1 != m2 {
                    *d += v_coeffs[(n + (m1 % n) - (m2 % n)) % n];
                }
            }
        }
    }
    Ok(diagonal_operator(&diag))
}

fn diagonal_operator(diag: &[f64]) -> ComplexOperator {
    ComplexOperator::from_diagonal(
        &diag
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect::<Vec<_>>(),
    )
}

/// Single-particle hopping matrix `T_{xy} = T((x-y) mod N)`.
pub fn single_particle_kinetic_matrix(n_sites: usize, t_coeffs: &[f64]) -> ComplexOperator {
    let n = n_sites;
    let mut m = ComplexOperator::zeros(n);
    for x in 0..n {
        for y in 0..n {
            m[(x, y)] = ONE * t_coeffs[(n + x - y) % n];
        }
    }
    m
}

/// Discrete Fourier transform matrix with columns `v_k[x] = e^{i2πkx/N}/√N`,
/// which diagonalizes any circulant hopping matrix.
pub fn dft_matrix(n: usize) -> ComplexOperator {
    let mut f = ComplexOperator::zeros(n);
    let w = 2.0 * std::f64::consts::PI / n as f64;
    for x in 0..n {
        for k in 0..n {
            f[(x, k)] = Complex64::from_polar(1.0 / (n as f64).sqrt(), w * (x * k) as f64);
        }
    }
    f
}

/// Kinetic dispersion `T̃(k) = Σ_s T(s) e^{-i2πks/N}` (real for symmetric T).
pub fn kinetic_dispersion(n_sites: usize, t_coeffs: &[f64]) -> Vec<f64> {
    let n = n_sites;
    let w = 2.0 * std::f64::consts::PI / n as f64;
    (0..n)
        .map(|k| {
            (0..n)
                .map(|s| t_coeffs[s] * (w * (k * s) as f64).cos())
                .sum()
        })
        .collect()
}

/// Build both sides of the Fourier-convolution identity for the two-body
/// coupling and return the max-norm deviation:
/// `V = Σ_k Ṽ(k) χ̃_k χ̃_k† - V(0) N̂`, with
/// `χ̃_k = (1/√N) Σ_x e^{-i2πxk/N} Σ_σ n_{xσ}`.
pub fn fourier_potential_identity_check(n_sites: usize, v_coeffs: &[f64]) -> Result<f64> {
    let n = n_sites;
    let modes = 2 * n;
    let lhs = density_coupling_operator(n, v_coeffs)?;

    let ladders = jordan_wigner_operators(modes)?;
    let dim = 1usize << modes;
    let site_density: Vec<ComplexOperator> = (0..n)
        .map(|x| {
            let up = x;
            let down = n + x;
            ladders[up]
                .creation
                .mul(&ladders[up].annihilation)
                .add(&ladders[down].creation.mul(&ladders[down].annihilation))
        })
        .collect();

    let w = 2.0 * std::f64::consts::PI / n as f64;
    let v_tilde: Vec<f64> = (0..n)
        .map(|k| {
            (0..n)
                .map(|x| v_coeffs[x] * (w * (x * k) as f64).cos())
                .sum()
        })
        .collect();

    let mut rhs = ComplexOperator::zeros(dim);
    for k in 0..n {
        let mut chi = ComplexOperator::zeros(dim);
        for (x, nx) in site_density.iter().enumerate() {
            let phase = Complex64::from_polar(1.0 / (n as f64).sqrt(), -w * (x * k) as f64);
            chi = chi.add(&nx.scale(phase));
        }
        rhs = rhs.add(&chi.mul(&chi.dagger()).scale(ONE * v_tilde[k]));
    }
    rhs = rhs.sub(&total_number_operator(modes).scale(ONE * v_coeffs[0]));

    Ok(lhs.max_abs_diff(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{self, hermitian_eigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_site_spec(t1: f64, v0: f64, v1: f64) -> HubbardSpec {
        HubbardSpec {
            sites: 2,
            t_coeffs: vec![0.0, t1],
            u_coeffs: vec![[0.0; 2]; 2],
            v_coeffs: vec![v0, v1],
        }
    }

    #[test]
    fn empty_model_is_zero() {
        let ops = build_hubbard(&two_site_spec(0.0, 0.0, 0.0)).unwrap();
        assert!(ops.total.max_abs() < 1e-15);
    }

    #[test]
    fn parts_are_hermitian_and_commute_with_number() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut specs = vec![two_site_spec(-1.0, 1.0, 0.25)];
        // Random disorder and couplings keep the conservation law.
        for _ in 0..3 {
            let n = 3usize;
            let mut t = vec![0.0f64; n];
            let mut v = vec![0.0f64; n];
            for s in 0..=n / 2 {
                t[s] = rng.random::<f64>() - 0.5;
                t[(n - s) % n] = t[s];
                v[s] = rng.random::<f64>() - 0.5;
                v[(n - s) % n] = v[s];
            }
            let u = (0..n)
                .map(|_| [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5])
                .collect();
            specs.push(HubbardSpec {
                sites: n,
                t_coeffs: t,
                u_coeffs: u,
                v_coeffs: v,
            });
        }
        for spec in &specs {
            let ops = build_hubbard(spec).unwrap();
            for part in [&ops.total, &ops.t_part, &ops.u_part, &ops.v_part] {
                assert!(part.is_hermitian(1e-12));
            }
            let comm = ops.total.mul(&ops.number).sub(&ops.number.mul(&ops.total));
            assert!(comm.max_abs() < 1e-10);
            // U and V are diagonal in the occupation basis.
            for part in [&ops.u_part, &ops.v_part] {
                let diag = ComplexOperator::from_diagonal(&part.diagonal());
                assert!(part.max_abs_diff(&diag) < 1e-14);
            }
        }
    }

    #[test]
    fn hopping_spectrum_is_subset_sums_of_single_particle_levels() {
        let spec = two_site_spec(-1.0, 0.0, 0.0);
        let ops = build_hubbard(&spec).unwrap();
        let single = single_particle_kinetic_matrix(2, &spec.t_coeffs);
        let levels = hermitian_eigen(&single).unwrap().values;
        // Two spin copies of each single-particle level.
        let mut doubled = levels.clone();
        doubled.extend_from_slice(&levels);
        let mut expected: Vec<f64> = (0..1usize << doubled.len())
            .map(|subset| {
                doubled
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| subset >> i & 1 == 1)
                    .map(|(_, e)| e)
                    .sum()
            })
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = hermitian_eigen(&ops.t_part).unwrap().values;
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-10, "{g} vs {e}");
        }
    }

    #[test]
    fn doubly_occupied_site_coupling_entry() {
        // N = 2, V(0) = 1 (onsite opposite-spin), V(1) = 0.25.
        let spec = two_site_spec(0.0, 1.0, 0.25);
        let ops = build_hubbard(&spec).unwrap();
        // State with both spins on site 0: modes 0 (up) and 2 (down).
        let idx = (1usize << 0) | (1 << 2);
        let got = ops.v_part[(idx, idx)].re;
        // Ordered pairs (0,up)->(0,down) and (0,down)->(0,up): 2 * V(0).
        assert!((got - 2.0).abs() < 1e-12, "got {got}");
        // State with up on site 0, down on site 1: 2 * V(1).
        let idx2 = (1usize << 0) | (1 << 3);
        assert!((ops.v_part[(idx2, idx2)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dft_diagonalizes_kinetic_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 3, 4, 5] {
            let mut t = vec![0.0f64; n];
            for s in 0..=n / 2 {
                let v = rng.random::<f64>() - 0.5;
                t[s] = v;
                t[(n - s) % n] = v;
            }
            let tm = single_particle_kinetic_matrix(n, &t);
            let f = dft_matrix(n);
            let diag = f.dagger().mul(&tm).mul(&f);
            let want = ComplexOperator::from_diagonal(
                &kinetic_dispersion(n, &t)
                    .iter()
                    .map(|&x| Complex64::new(x, 0.0))
                    .collect::<Vec<_>>(),
            );
            assert!(diag.max_abs_diff(&want) < 1e-10);
        }
    }

    #[test]
    fn fourier_identity_zero_potential() {
        assert!(fourier_potential_identity_check(2, &[0.0, 0.0]).unwrap() < 1e-14);
    }

    #[test]
    fn fourier_identity_hand_spec() {
        let dev = fourier_potential_identity_check(2, &[1.0, 0.25]).unwrap();
        assert!(dev < 1e-10, "deviation {dev}");
    }

    #[test]
    fn fourier_identity_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in [2usize, 3, 4] {
            for _ in 0..3 {
                let mut v = vec![0.0f64; n];
                for s in 0..=n / 2 {
                    let val = rng.random::<f64>() - 0.5;
                    v[s] = val;
                    v[(n - s) % n] = val;
                }
                let dev = fourier_potential_identity_check(n, &v).unwrap();
                assert!(dev < 1e-10, "N = {n}: deviation {dev}");
            }
        }
    }

    #[test]
    fn asymmetric_v_rejected() {
        let spec = HubbardSpec {
            sites: 3,
            t_coeffs: vec![0.0; 3],
            u_coeffs: vec![[0.0; 2]; 3],
            v_coeffs: vec![0.0, 1.0, 0.5],
        };
        assert!(build_hubbard(&spec).is_err());
    }

    #[test]
    fn budget_rejected() {
        let spec = HubbardSpec {
            sites: 4,
            t_coeffs: vec![0.0; 4],
            u_coeffs: vec![[0.0; 2]; 4],
            v_coeffs: vec![0.0; 4],
        };
        assert!(matches!(
            build_hubbard(&spec).unwrap_err(),
            Error::Budget { .. }
        ));
    }

    #[test]
    fn norm_of_t_part_bounds() {
        let spec = two_site_spec(-1.0, 0.0, 0.0);
        let ops = build_hubbard(&spec).unwrap();
        // Fock-space norm of the hopping term: fill all negative levels.
        let n = operator::spectral_norm(&ops.t_part);
        assert!((n - 2.0).abs() < 1e-9, "||T|| = {n}");
    }
}
