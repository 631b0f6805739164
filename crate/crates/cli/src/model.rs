//! Model-spec JSON: the file format feeding the simulate/estimate commands,
//! and its conversion to concrete operators and alpha splits.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use dysonsim_core::error::{Error, Result};
use dysonsim_core::models::hubbard::{build_hubbard, HubbardSpec};
use dysonsim_core::models::plane_wave::{plane_wave_coefficients, Nucleus, PlaneWaveSpec};
use dysonsim_core::models::sparse::{
    sparse_matrix_materialize, EntryFn, PositionFn, SparseHamiltonianSpec,
};
use dysonsim_core::operator::{spectral_norm, ComplexOperator, ONE, ZERO};
use dysonsim_core::tol;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpecFile {
    Spins {
        qubits: u32,
        terms: Vec<SpinTerm>,
        #[serde(default)]
        alpha_split: Option<AlphaSplit>,
    },
    Hubbard {
        sites: usize,
        t_coeffs: Vec<f64>,
        u_coeffs: Vec<[f64; 2]>,
        v_coeffs: Vec<f64>,
        #[serde(default)]
        alpha_split: Option<AlphaSplit>,
    },
    PlaneWave {
        spin_orbitals: usize,
        omega: f64,
        nuclei: Vec<NucleusSpec>,
        #[serde(default)]
        reduced_1d: bool,
    },
    Sparse {
        dim: usize,
        d: usize,
        hmax: f64,
        /// Explicit entries [row, col, re, im]; the matrix must be Hermitian.
        entries: Vec<(usize, usize, f64, f64)>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinTerm {
    pub name: String,
    /// Pauli string over the qubits, e.g. "ZZ" or "XI".
    pub pauli: String,
    pub coeff: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSplit {
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleusSpec {
    pub charge: f64,
    pub position: [f64; 3],
}

/// A model resolved into operators (when buildable at desk scale) plus the
/// alpha parameters feeding the estimators.
pub struct ResolvedModel {
    pub name: String,
    /// Full Hamiltonian, when the Fock/spin space fits the dense budget.
    pub hamiltonian: Option<ComplexOperator>,
    /// Interaction split H = A + B, when the model defines one.
    pub split: Option<(ComplexOperator, ComplexOperator)>,
    pub alpha: f64,
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub n_s: u32,
    pub n_a: u32,
    /// Oracle parameters of sparse models (for promise-level sweeps).
    pub sparse: Option<SparseParams>,
}

/// Sparse oracle promises: normalizations scale linearly in `d`.
#[derive(Clone, Copy, Debug)]
pub struct SparseParams {
    pub hmax: f64,
    /// Largest off-diagonal magnitude (the rotating-frame max-norm).
    pub b_max: f64,
}

impl ResolvedModel {
    /// Re-derive the oracle normalizations under a different sparsity
    /// promise; the entries themselves are untouched (estimate-level sweep).
    pub fn with_sparsity_promise(mut self, d: usize) -> Result<Self> {
        let params = self.sparse.ok_or_else(|| {
            Error::Model("parameter 'd' applies to sparse models".into())
        })?;
        self.alpha = d as f64 * params.hmax;
        self.alpha_b = d as f64 * params.b_max;
        Ok(self)
    }
}

fn pauli_matrix(c: char) -> Result<ComplexOperator> {
    Ok(match c {
        'I' => ComplexOperator::identity(2),
        'X' => ComplexOperator::pauli_x(),
        'Y' => ComplexOperator::pauli_y(),
        'Z' => ComplexOperator::pauli_z(),
        other => {
            return Err(Error::Model(format!(
                "unknown Pauli letter '{other}' (expected I, X, Y, Z)"
            )))
        }
    })
}

fn pauli_string(qubits: u32, s: &str) -> Result<ComplexOperator> {
    if s.len() != qubits as usize {
        return Err(Error::Model(format!(
            "Pauli string '{s}' does not match {qubits} qubits"
        )));
    }
    // Leftmost letter acts on the highest qubit.
    let mut op = ComplexOperator::identity(1);
    for c in s.chars() {
        op = op.kron(&pauli_matrix(c)?);
    }
    Ok(op)
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Model(format!("{what} must be finite")))
    }
}

/// Reinterpret a displacement-coefficient array for a different lattice size
/// via the distance profile `coeff[s] = given[min(s, N - s)]` (zero beyond
/// the profile). Keeps the couplings symmetric for any N.
pub fn resize_profile(profile: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|s| {
            let dist = s.min(n - s);
            profile.get(dist).copied().unwrap_or(0.0)
        })
        .collect()
}

impl ModelSpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Model(format!("model JSON: {e}")))
    }

    /// Override the lattice size (N sweeps).
    pub fn with_size(&self, n: usize) -> Result<ModelSpecFile> {
        match self {
            ModelSpecFile::Hubbard {
                t_coeffs,
                u_coeffs,
                v_coeffs,
                alpha_split,
                ..
            } => {
                let mut u = u_coeffs.clone();
                u.resize(n, [0.0; 2]);
                Ok(ModelSpecFile::Hubbard {
                    sites: n,
                    t_coeffs: resize_profile(t_coeffs, n),
                    u_coeffs: u,
                    v_coeffs: resize_profile(v_coeffs, n),
                    alpha_split: alpha_split.clone(),
                })
            }
            ModelSpecFile::PlaneWave {
                omega,
                nuclei,
                reduced_1d,
                ..
            } => Ok(ModelSpecFile::PlaneWave {
                spin_orbitals: n,
                omega: *omega,
                nuclei: nuclei.clone(),
                reduced_1d: *reduced_1d,
            }),
            _ => Err(Error::Model(
                "parameter 'N' applies to hubbard and plane_wave models".into(),
            )),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedModel> {
        match self {
            ModelSpecFile::Spins {
                qubits,
                terms,
                alpha_split,
            } => resolve_spins(*qubits, terms, alpha_split.as_ref()),
            ModelSpecFile::Hubbard {
                sites,
                t_coeffs,
                u_coeffs,
                v_coeffs,
                alpha_split,
            } => resolve_hubbard(*sites, t_coeffs, u_coeffs, v_coeffs, alpha_split.as_ref()),
            ModelSpecFile::PlaneWave {
                spin_orbitals,
                omega,
                nuclei,
                reduced_1d,
            } => resolve_plane_wave(*spin_orbitals, *omega, nuclei, *reduced_1d),
            ModelSpecFile::Sparse {
                dim,
                d,
                hmax,
                entries,
            } => resolve_sparse(*dim, *d, *hmax, entries),
        }
    }
}

fn headroom(x: f64) -> f64 {
    x * (1.0 + tol::ALPHA_HEADROOM)
}

fn resolve_spins(
    qubits: u32,
    terms: &[SpinTerm],
    split: Option<&AlphaSplit>,
) -> Result<ResolvedModel> {
    if qubits == 0 || qubits > 6 {
        return Err(Error::Budget {
            what: "spins model qubits",
            needed: qubits as u64,
            available: 6,
        });
    }
    let dim = 1usize << qubits;
    let mut total = ComplexOperator::zeros(dim);
    let mut by_name: Vec<(String, ComplexOperator)> = Vec::new();
    for term in terms {
        finite(term.coeff, "term coefficient")?;
        let op = pauli_string(qubits, &term.pauli)?.scale(ONE * term.coeff);
        total = total.add(&op);
        by_name.push((term.name.clone(), op));
    }
    let split_ops = match split {
        None => None,
        Some(s) => Some(split_by_names(&by_name, s, dim)?),
    };
    let (alpha_a, alpha_b) = split_alphas(&split_ops, &total);
    Ok(ResolvedModel {
        name: "spins".into(),
        alpha: headroom(spectral_norm(&total)),
        hamiltonian: Some(total),
        split: split_ops,
        alpha_a,
        alpha_b,
        n_s: qubits,
        n_a: 1,
        sparse: None,
    })
}

fn split_by_names(
    by_name: &[(String, ComplexOperator)],
    split: &AlphaSplit,
    dim: usize,
) -> Result<(ComplexOperator, ComplexOperator)> {
    let mut a = ComplexOperator::zeros(dim);
    let mut b = ComplexOperator::zeros(dim);
    for (name, op) in by_name {
        let in_a = split.a.contains(name);
        let in_b = split.b.contains(name);
        match (in_a, in_b) {
            (true, false) => a = a.add(op),
            (false, true) => b = b.add(op),
            (true, true) => {
                return Err(Error::Model(format!("term '{name}' listed in both A and B")))
            }
            (false, false) => {
                return Err(Error::Model(format!(
                    "term '{name}' missing from the alpha split"
                )))
            }
        }
    }
    for listed in split.a.iter().chain(&split.b) {
        if !by_name.iter().any(|(n, _)| n == listed) {
            return Err(Error::Model(format!(
                "alpha split references unknown term '{listed}'"
            )));
        }
    }
    Ok((a, b))
}

fn split_alphas(
    split: &Option<(ComplexOperator, ComplexOperator)>,
    total: &ComplexOperator,
) -> (f64, f64) {
    match split {
        Some((a, b)) => (headroom(spectral_norm(a)), headroom(spectral_norm(b))),
        None => (0.0, headroom(spectral_norm(total))),
    }
}

fn resolve_hubbard(
    sites: usize,
    t_coeffs: &[f64],
    u_coeffs: &[[f64; 2]],
    v_coeffs: &[f64],
    split: Option<&AlphaSplit>,
) -> Result<ResolvedModel> {
    let spec = HubbardSpec {
        sites,
        t_coeffs: t_coeffs.to_vec(),
        u_coeffs: u_coeffs.to_vec(),
        v_coeffs: v_coeffs.to_vec(),
    };
    let ops = build_hubbard(&spec)?;
    let dim = ops.total.dim();
    let by_name = vec![
        ("T".to_string(), ops.t_part),
        ("U".to_string(), ops.u_part),
        ("V".to_string(), ops.v_part),
    ];
    let split_ops = match split {
        None => None,
        Some(s) => Some(split_by_names(&by_name, s, dim)?),
    };
    let (alpha_a, alpha_b) = split_alphas(&split_ops, &ops.total);
    Ok(ResolvedModel {
        name: "hubbard".into(),
        alpha: headroom(spectral_norm(&ops.total)),
        hamiltonian: Some(ops.total),
        split: split_ops,
        alpha_a,
        alpha_b,
        n_s: (2 * sites) as u32,
        n_a: 1,
        sparse: None,
    })
}

fn resolve_plane_wave(
    spin_orbitals: usize,
    omega: f64,
    nuclei: &[NucleusSpec],
    reduced_1d: bool,
) -> Result<ResolvedModel> {
    let spec = PlaneWaveSpec {
        spin_orbitals,
        omega,
        nuclei: nuclei
            .iter()
            .map(|n| Nucleus {
                charge: n.charge,
                position: n.position,
            })
            .collect(),
        reduced_1d,
    };
    let tables = plane_wave_coefficients(&spec)?;
    let n_spatial = spin_orbitals / 2;

    // Desk-scale 1D lattices build the dual-basis Hubbard model: T from the
    // inverse transform of the dispersion, U and V straight from the tables.
    let buildable = reduced_1d && n_spatial <= 3;
    let (hamiltonian, split, alpha_a, alpha_b, alpha) = if buildable {
        let n = n_spatial;
        let mut t_coeffs = vec![0.0f64; n];
        for (s, t_val) in t_coeffs.iter_mut().enumerate() {
            *t_val = tables
                .kinetic
                .iter()
                .map(|(p, v)| {
                    v / n as f64
                        * (2.0 * std::f64::consts::PI * (p[0] * s as i64) as f64 / n as f64).cos()
                })
                .sum();
        }
        let u_coeffs: Vec<[f64; 2]> = (0..n as i64)
            .map(|x| {
                let v = tables
                    .potential_u
                    .iter()
                    .find(|(p, _)| p[0].rem_euclid(n as i64) == x)
                    .map(|(_, v)| *v)
                    .unwrap_or(0.0);
                [v, v]
            })
            .collect();
        let v_coeffs: Vec<f64> = (0..n as i64)
            .map(|s| {
                tables
                    .coupling_v
                    .iter()
                    .find(|(p, _)| p[0].rem_euclid(n as i64) == s)
                    .map(|(_, v)| *v)
                    .unwrap_or(0.0)
            })
            .collect();
        let spec = HubbardSpec {
            sites: n,
            t_coeffs,
            u_coeffs,
            v_coeffs,
        };
        let ops = build_hubbard(&spec)?;
        let a = ops.u_part.add(&ops.v_part);
        let b = ops.t_part;
        let alpha_a = headroom(spectral_norm(&a));
        let alpha_b = headroom(spectral_norm(&b));
        let alpha = headroom(spectral_norm(&ops.total));
        (Some(ops.total), Some((a, b)), alpha_a, alpha_b, alpha)
    } else {
        // Estimate-only: alpha_T from the tables, potentials by 1-norms.
        let alpha_b = tables.alpha_t;
        let alpha_a: f64 = tables.potential_u.iter().map(|(_, v)| v.abs()).sum::<f64>()
            + tables.coupling_v.iter().map(|(_, v)| v.abs()).sum::<f64>()
                * spin_orbitals as f64;
        (None, None, alpha_a, alpha_b, alpha_a + alpha_b)
    };

    Ok(ResolvedModel {
        name: "plane_wave".into(),
        hamiltonian,
        split,
        alpha,
        alpha_a,
        alpha_b,
        n_s: (2 * n_spatial) as u32,
        n_a: 1,
        sparse: None,
    })
}

fn resolve_sparse(
    dim: usize,
    d: usize,
    hmax: f64,
    entries: &[(usize, usize, f64, f64)],
) -> Result<ResolvedModel> {
    if dim == 0 || d == 0 {
        return Err(Error::Model("sparse model needs dim >= 1 and d >= 1".into()));
    }
    if d > dim {
        return Err(Error::Model(format!(
            "sparsity d = {d} cannot exceed the dimension {dim}"
        )));
    }
    let mut matrix = ComplexOperator::zeros(dim);
    for &(r, c, re, im) in entries {
        if r >= dim || c >= dim {
            return Err(Error::Model(format!("entry ({r},{c}) outside dim {dim}")));
        }
        matrix[(r, c)] = Complex64::new(finite(re, "entry")?, finite(im, "entry")?);
    }
    matrix.require_hermitian()?;

    // Positions per row: the nonzero columns, padded with distinct zeros.
    let mut positions: Vec<Vec<usize>> = Vec::with_capacity(dim);
    for row in 0..dim {
        let nz: Vec<usize> = (0..dim).filter(|&c| matrix[(row, c)] != ZERO).collect();
        if nz.len() > d {
            return Err(Error::Sparsity {
                row,
                col: nz[d],
                detail: format!("row has {} nonzeros, more than d = {d}", nz.len()),
            });
        }
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
    let spec = SparseHamiltonianSpec {
        dim,
        d,
        hmax,
        entry,
        position,
        precision_bits: None,
    };
    let dense = sparse_matrix_materialize(&spec, 0)?;

    // Diagonally-dominant split: A = diagonal, B = off-diagonal.
    let mut a = ComplexOperator::zeros(dim);
    let mut b = ComplexOperator::zeros(dim);
    let mut b_max = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            if r == c {
                a[(r, c)] = dense[(r, c)];
            } else {
                b[(r, c)] = dense[(r, c)];
                b_max = b_max.max(dense[(r, c)].norm());
            }
        }
    }
    let n_s = if dim.is_power_of_two() {
        dim.trailing_zeros().max(1)
    } else {
        (dim as f64).log2().ceil() as u32
    };
    Ok(ResolvedModel {
        name: "sparse".into(),
        hamiltonian: Some(dense),
        // Oracle-model normalizations: alpha = d * Hmax for the full matrix,
        // alpha_B = d * max off-diagonal entry for the rotating frame.
        alpha: d as f64 * hmax,
        alpha_a: headroom(spectral_norm(&a)),
        alpha_b: d as f64 * b_max,
        split: Some((a, b)),
        n_s,
        n_a: n_s + 2,
        sparse: Some(SparseParams { hmax, b_max }),
    })
}
