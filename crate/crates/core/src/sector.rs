//! One-excitation sector dynamics.
//!
//! States with a single site in a nonzero level `μ` evolve under an `N × N`
//! hopping matrix that does not depend on `μ`; the field only adds the phase
//! `e^{-iμBt}`. Times are dimensionless (`Jt`) everywhere in this module and
//! energies are stored in units of `J`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::C64;

/// Static parameters of a uniform chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub d: usize,
    /// Exchange coupling `J` (ferromagnetic, `J > 0`).
    pub j: f64,
    /// Magnetic field `B`.
    pub b_field: f64,
}

impl ChainSpec {
    pub fn new(n_sites: usize, d: usize, j: f64, b_field: f64) -> Result<Self> {
        let spec = ChainSpec {
            n_sites,
            d,
            j,
            b_field,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(invalid(
                "n_sites",
                format!("sender and receiver must be distinct, got N = {}", self.n_sites),
            ));
        }
        if self.d < 3 {
            return Err(invalid(
                "d",
                format!("need d >= 3 to leave a spare level, got {}", self.d),
            ));
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(invalid("j", format!("must be positive, got {}", self.j)));
        }
        if !(self.b_field.is_finite() && self.b_field >= 0.0) {
            return Err(invalid(
                "b_field",
                format!("must be non-negative, got {}", self.b_field),
            ));
        }
        Ok(())
    }

    /// `B / J`, the level-phase rate per unit of `Jt`.
    pub fn field_ratio(&self) -> f64 {
        self.b_field / self.j
    }
}

/// How the sector propagator is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorMode {
    /// Closed-form sine eigenbasis with `E_p = -2J cos((2p+1)π/(2N+1))`.
    Spectral,
    /// Numerical diagonalisation of the hopping matrix derived from the swaps.
    Exact,
}

impl PropagatorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PropagatorMode::Spectral => "spectral",
            PropagatorMode::Exact => "exact",
        }
    }
}

impl std::fmt::Display for PropagatorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PropagatorMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(PropagatorMode::Spectral),
            "exact" => Ok(PropagatorMode::Exact),
            other => Err(invalid("mode", format!("expected spectral|exact, got `{other}`"))),
        }
    }
}

/// Field-free chain Hamiltonian restricted to one excitation.
#[derive(Debug, Clone)]
pub struct OneParticleHamiltonian {
    /// Hopping `-J` between neighbours, `J · (number of bonds at site k)` on
    /// the diagonal.
    pub matrix: DMatrix<f64>,
    /// Constant removed from every diagonal entry; `matrix + offset · I` is
    /// the exact restriction of `-J Σ P_{k,k+1}`.
    pub offset: f64,
}

/// Restricts `-J Σ_k P_{k,k+1}` to one-excitation states by applying every
/// bond swap to every basis state `|μ_k⟩`.
pub fn build_one_particle_hamiltonian(spec: &ChainSpec) -> OneParticleHamiltonian {
    let n = spec.n_sites;
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for site in 0..n {
        for bond in 0..n - 1 {
            let moved = if site == bond {
                bond + 1
            } else if site == bond + 1 {
                bond
            } else {
                site
            };
            matrix[(moved, site)] -= spec.j;
        }
    }
    // Every state sees N-1 bonds; drop the bond count as a constant.
    let offset = -spec.j * (n as f64 - 1.0);
    for k in 0..n {
        matrix[(k, k)] -= offset;
    }
    OneParticleHamiltonian { matrix, offset }
}

/// Sector time-evolution matrix `F(t)` with `f^μ(t) = e^{-iμBt} F(t)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub mode: PropagatorMode,
    /// Dimensionless time `Jt`.
    pub time: f64,
    pub f_matrix: DMatrix<C64>,
}

impl Propagator {
    /// `max |F†F - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.f_matrix.nrows();
        (self.f_matrix.adjoint() * &self.f_matrix - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `max |F - Fᵀ|`.
    pub fn symmetry_deviation(&self) -> f64 {
        (&self.f_matrix - self.f_matrix.transpose())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn identity_deviation(&self) -> f64 {
        let n = self.f_matrix.nrows();
        (&self.f_matrix - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `|F_{N1}|²`, the transfer probability from sender to receiver.
    pub fn end_to_end_probability(&self) -> f64 {
        let n = self.f_matrix.nrows();
        self.f_matrix[(n - 1, 0)].norm_sqr()
    }
}

fn sine_angle(n: usize, p: usize) -> f64 {
    (2 * p + 1) as f64 * PI / (2 * n + 1) as f64
}

/// Cached eigendecomposition of the sector Hamiltonian for one chain and mode.
///
/// Both modes are real orthogonal transforms, so `F(t) = V e^{-iEt} Vᵀ`.
#[derive(Debug, Clone)]
pub struct SectorDynamics {
    spec: ChainSpec,
    mode: PropagatorMode,
    /// Energies in units of `J`.
    energies: DVector<f64>,
    /// Eigenvectors as columns.
    modes: DMatrix<f64>,
}

impl SectorDynamics {
    pub fn new(spec: &ChainSpec, mode: PropagatorMode) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_sites;
        let (energies, modes) = match mode {
            PropagatorMode::Spectral => {
                let norm = (4.0 / (2 * n + 1) as f64).sqrt();
                let energies = DVector::from_fn(n, |p, _| -2.0 * sine_angle(n, p).cos());
                let modes = DMatrix::from_fn(n, n, |k, p| norm * (sine_angle(n, p) * (k + 1) as f64).sin());
                (energies, modes)
            }
            PropagatorMode::Exact => {
                let h = build_one_particle_hamiltonian(spec);
                let eig = SymmetricEigen::new(h.matrix / spec.j);
                (eig.eigenvalues, eig.eigenvectors)
            }
        };
        Ok(SectorDynamics {
            spec: *spec,
            mode,
            energies,
            modes,
        })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn mode(&self) -> PropagatorMode {
        self.mode
    }

    pub fn n_sites(&self) -> usize {
        self.spec.n_sites
    }

    /// Energies in units of `J`, in the order of [`Self::eigenvectors`].
    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.modes
    }

    fn phases(&self, jt: f64) -> DVector<C64> {
        self.energies.map(|e| C64::from_polar(1.0, -e * jt))
    }

    pub fn propagator(&self, jt: f64) -> Propagator {
        let n = self.n_sites();
        let phases = self.phases(jt);
        let v = self.modes.map(|x| C64::new(x, 0.0));
        let mut scaled = v.clone();
        for (p, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[p];
        }
        let f_matrix = &scaled * v.transpose();
        debug_assert_eq!(f_matrix.nrows(), n);
        Propagator {
            mode: self.mode,
            time: jt,
            f_matrix,
        }
    }

    /// `F(t) · c` in `O(N²)` without forming `F`.
    pub fn evolve(&self, amplitudes: &DVector<C64>, jt: f64) -> DVector<C64> {
        let projected = self.project(amplitudes);
        let phases = self.phases(jt);
        let rotated = projected.component_mul(&phases);
        self.modes.map(|x| C64::new(x, 0.0)) * rotated
    }

    /// Coefficients of `amplitudes` in the eigenbasis.
    pub fn project(&self, amplitudes: &DVector<C64>) -> DVector<C64> {
        self.modes.transpose().map(|x| C64::new(x, 0.0)) * amplitudes
    }

    /// Closure evaluating `|(F(t) c)_N|²` in `O(N)` per time point.
    pub fn receiver_probability<'a>(&'a self, amplitudes: &DVector<C64>) -> impl Fn(f64) -> f64 + 'a {
        let last = self.n_sites() - 1;
        let weights: Vec<(f64, C64)> = self
            .project(amplitudes)
            .iter()
            .enumerate()
            .map(|(p, &c)| (self.energies[p], c * self.modes[(last, p)]))
            .collect();
        move |jt| {
            weights
                .iter()
                .map(|&(e, w)| w * C64::from_polar(1.0, -e * jt))
                .sum::<C64>()
                .norm_sqr()
        }
    }
}

/// Evaluates the closed-form sine-sum propagator element by element.
pub fn spectral_propagator(spec: &ChainSpec, jt: f64) -> Propagator {
    let n = spec.n_sites;
    let norm = 4.0 / (2 * n + 1) as f64;
    let f_matrix = DMatrix::from_fn(n, n, |row, col| {
        let (m, k) = ((row + 1) as f64, (col + 1) as f64);
        (0..n)
            .map(|p| {
                let theta = sine_angle(n, p);
                C64::from_polar(1.0, 2.0 * jt * theta.cos()) * ((theta * m).sin() * (theta * k).sin())
            })
            .sum::<C64>()
            * norm
    });
    Propagator {
        mode: PropagatorMode::Spectral,
        time: jt,
        f_matrix,
    }
}

pub fn exact_propagator(spec: &ChainSpec, jt: f64) -> Result<Propagator> {
    Ok(SectorDynamics::new(spec, PropagatorMode::Exact)?.propagator(jt))
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub energy: f64,
    pub vector: DVector<f64>,
}

/// Closed-form sector eigenpairs for level `mu`: sine vectors with energies
/// `μB - 2J cos((2m+1)π/(2N+1))`.
pub fn eigenpairs_formula(spec: &ChainSpec, mu: usize) -> Vec<Eigenpair> {
    let n = spec.n_sites;
    let norm = (4.0 / (2 * n + 1) as f64).sqrt();
    (0..n)
        .map(|m| {
            let theta = sine_angle(n, m);
            Eigenpair {
                energy: mu as f64 * spec.b_field - 2.0 * spec.j * theta.cos(),
                vector: DVector::from_fn(n, |k, _| norm * (theta * (k + 1) as f64).sin()),
            }
        })
        .collect()
}

/// Comparison of the closed-form eigenpairs against the swap-derived sector
/// Hamiltonian.
#[derive(Debug, Clone, Serialize)]
pub struct EigenpairDiagnostic {
    pub n_sites: usize,
    /// `max_m ||M v_m - (λ_m + shift) v_m||₂`, energies in units of `J`.
    pub max_residual: f64,
    /// Least-squares constant aligning the formula spectrum with `M`.
    pub shift: f64,
    /// Lowest gap of the formula spectrum, units of `J`.
    pub formula_gap: f64,
    /// Lowest gap of the swap-derived matrix, units of `J`.
    pub exact_gap: f64,
    /// `max |VᵀV - I|` of the formula eigenvectors.
    pub orthonormality_deviation: f64,
}

pub fn eigenpair_residual(spec: &ChainSpec) -> EigenpairDiagnostic {
    let n = spec.n_sites;
    let h = build_one_particle_hamiltonian(spec).matrix / spec.j;
    let pairs = eigenpairs_formula(
        &ChainSpec {
            b_field: 0.0,
            ..*spec
        },
        0,
    );

    let shift = pairs
        .iter()
        .map(|pair| {
            let v = &pair.vector;
            (v.dot(&(&h * v)) / v.norm_squared()) - pair.energy / spec.j
        })
        .sum::<f64>()
        / n as f64;
    let max_residual = pairs
        .iter()
        .map(|pair| (&h * &pair.vector - &pair.vector * (pair.energy / spec.j + shift)).norm())
        .fold(0.0, f64::max);

    let vectors = DMatrix::from_columns(&pairs.iter().map(|p| p.vector.clone()).collect::<Vec<_>>());
    let orthonormality_deviation = (vectors.transpose() * &vectors - DMatrix::<f64>::identity(n, n)).amax();

    let mut formula: Vec<f64> = pairs.iter().map(|p| p.energy / spec.j).collect();
    formula.sort_by(f64::total_cmp);
    let mut exact: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    exact.sort_by(f64::total_cmp);

    EigenpairDiagnostic {
        n_sites: n,
        max_residual,
        shift,
        formula_gap: formula[1] - formula[0],
        exact_gap: exact[1] - exact[0],
        orthonormality_deviation,
    }
}

/// `max_m ||M v_m - λ_m v_m||₂` for the numerically diagonalised sector.
pub fn exact_eigenpair_residual(spec: &ChainSpec) -> Result<f64> {
    let dynamics = SectorDynamics::new(spec, PropagatorMode::Exact)?;
    let h = build_one_particle_hamiltonian(spec).matrix / spec.j;
    Ok(dynamics
        .eigenvectors()
        .column_iter()
        .zip(dynamics.energies().iter())
        .map(|(v, &e)| (&h * v - v * e).norm())
        .fold(0.0, f64::max))
}
