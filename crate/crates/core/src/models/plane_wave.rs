//! Plane-wave / dual-basis electronic-structure coefficients: the kinetic
//! dispersion, nuclear attraction and electron-electron coupling tables that
//! specialize the Hubbard builder to chemistry.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Nucleus {
    pub charge: f64,
    pub position: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct PlaneWaveSpec {
    /// Spin-orbital count N (two spin species per spatial orbital).
    pub spin_orbitals: usize,
    /// Cell volume (cell length in the reduced 1D analogue).
    pub omega: f64,
    pub nuclei: Vec<Nucleus>,
    /// Reduced one-dimensional analogue, flagged explicitly.
    pub reduced_1d: bool,
}

pub type GridIndex = [i64; 3];

/// Coefficient tables over the reciprocal / real-space grids.
#[derive(Clone, Debug)]
pub struct PlaneWaveTables {
    /// Kinetic dispersion T̃(p) = |k_p|²/2 per grid point.
    pub kinetic: Vec<(GridIndex, f64)>,
    /// Nuclear potential U(p) at the dual-basis grid point r_p.
    pub potential_u: Vec<(GridIndex, f64)>,
    /// Translation-invariant coupling V(s) at displacement r_s.
    pub coupling_v: Vec<(GridIndex, f64)>,
    /// alpha_T = Σ_{p,σ} |T̃(p)| (spin factor 2).
    pub alpha_t: f64,
}

fn frequency_axis(n: usize) -> Vec<i64> {
    // n centered frequencies: -floor(n/2) ..= ceil(n/2)-1.
    let lo = -(n as i64 / 2);
    let hi = (n as i64 + 1) / 2 - 1;
    (lo..=hi).collect()
}

fn grid_points(side: usize, one_d: bool) -> Vec<GridIndex> {
    let axis = frequency_axis(side);
    if one_d {
        return axis.iter().map(|&x| [x, 0, 0]).collect();
    }
    let mut out = Vec::with_capacity(side * side * side);
    for &x in &axis {
        for &y in &axis {
            for &z in &axis {
                out.push([x, y, z]);
            }
        }
    }
    out
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm_sq(a: [f64; 3]) -> f64 {
    dot(a, a)
}

/// Evaluate the three displayed coefficient formulas on the finite grid.
pub fn plane_wave_coefficients(spec: &PlaneWaveSpec) -> Result<PlaneWaveTables> {
    if spec.omega <= 0.0 {
        return Err(Error::domain("plane_wave", "cell volume must be positive"));
    }
    if spec.spin_orbitals == 0 || spec.spin_orbitals % 2 != 0 {
        return Err(Error::Model(
            "spin-orbital count must be a positive even number".into(),
        ));
    }
    let n_spatial = spec.spin_orbitals / 2;
    let side = if spec.reduced_1d {
        n_spatial
    } else {
        let side = (n_spatial as f64).cbrt().round() as usize;
        if side * side * side != n_spatial {
            return Err(Error::Model(format!(
                "spatial orbital count {n_spatial} is not a perfect cube; \
                 set reduced_1d for the line analogue"
            )));
        }
        side
    };

    // Reciprocal and real-space spacings.
    let length = if spec.reduced_1d {
        spec.omega
    } else {
        spec.omega.cbrt()
    };
    let k_of = |nu: GridIndex| -> [f64; 3] {
        let c = 2.0 * std::f64::consts::PI / length;
        [c * nu[0] as f64, c * nu[1] as f64, c * nu[2] as f64]
    };
    let r_of = |p: GridIndex| -> [f64; 3] {
        let c = length / side as f64;
        [c * p[0] as f64, c * p[1] as f64, c * p[2] as f64]
    };

    let points = grid_points(side, spec.reduced_1d);

    let kinetic: Vec<(GridIndex, f64)> = points
        .iter()
        .map(|&p| (p, 0.5 * norm_sq(k_of(p))))
        .collect();
    let alpha_t = 2.0 * kinetic.iter().map(|(_, t)| t.abs()).sum::<f64>();

    let four_pi = 4.0 * std::f64::consts::PI;
    let potential_u: Vec<(GridIndex, f64)> = points
        .iter()
        .map(|&p| {
            let rp = r_of(p);
            let mut sum = 0.0;
            for nu in &points {
                if *nu == [0, 0, 0] {
                    continue;
                }
                let k = k_of(*nu);
                let k2 = norm_sq(k);
                for nuc in &spec.nuclei {
                    let sep = [
                        nuc.position[0] - rp[0],
                        nuc.position[1] - rp[1],
                        nuc.position[2] - rp[2],
                    ];
                    sum += nuc.charge * dot(k, sep).cos() / k2;
                }
            }
            (p, -four_pi / spec.omega * sum)
        })
        .collect();

    let two_pi = 2.0 * std::f64::consts::PI;
    let coupling_v: Vec<(GridIndex, f64)> = points
        .iter()
        .map(|&s| {
            let rs = r_of(s);
            let mut sum = 0.0;
            for nu in &points {
                if *nu == [0, 0, 0] {
                    continue;
                }
                let k = k_of(*nu);
                sum += dot(k, rs).cos() / norm_sq(k);
            }
            (s, two_pi / spec.omega * sum)
        })
        .collect();

    Ok(PlaneWaveTables {
        kinetic,
        potential_u,
        coupling_v,
        alpha_t,
    })
}
