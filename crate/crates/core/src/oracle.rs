//! Brute-force simulation on the full `d^N` Hilbert space.
//!
//! Basis states are ordered lexicographically by site labels with site 1 the
//! most significant digit, so the receiver (site N) is the fastest index.
//! The Hamiltonian is kept sparse and diagonalised exactly, one dense block
//! per connected component of its nonzero pattern.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::protocol::{LogicalPayload, Outcome, OutcomeSource, MIN_BRANCH_PROBABILITY};
use crate::sector::ChainSpec;
use crate::spin::solve_swap_coefficients;
use crate::C64;

/// Largest Hilbert space the oracle accepts.
pub const ORACLE_DIM_LIMIT: usize = 20_000;

/// Product basis of `n` sites with `d` levels each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    d: usize,
    n: usize,
    dim: usize,
}

impl Basis {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        let dim = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(d));
        match dim {
            Some(dim) if dim <= ORACLE_DIM_LIMIT => Ok(Basis { d, n, dim }),
            Some(dim) => Err(Error::SizeGuard {
                dim,
                limit: ORACLE_DIM_LIMIT,
            }),
            None => Err(Error::SizeGuard {
                dim: usize::MAX,
                limit: ORACLE_DIM_LIMIT,
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Site labels of basis state `index`, site 1 first.
    pub fn labels(&self, mut index: usize) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for slot in labels.iter_mut().rev() {
            *slot = index % self.d;
            index /= self.d;
        }
        labels
    }

    pub fn index(&self, labels: &[usize]) -> usize {
        labels.iter().fold(0, |acc, &mu| acc * self.d + mu)
    }

    /// Index of `|μ_k⟩` (zero-based `site`).
    pub fn one_particle(&self, mu: usize, site: usize) -> usize {
        mu * self.d.pow((self.n - 1 - site) as u32)
    }
}

/// Which representation of the nearest-neighbour swap builds the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapSource {
    /// Exchange the two site labels directly.
    Permutation,
    /// `Σ_p b_p (S·S)^p` with solved coefficients.
    Decomposition,
}

/// `-J Σ_k P_{k,k+1} + B Σ_k S^z_k` in sparse row form.
#[derive(Debug, Clone)]
pub struct FullHamiltonian {
    pub spec: ChainSpec,
    pub basis: Basis,
    /// `rows[i]` holds `(j, H_ij)` sorted by `j`.
    rows: Vec<Vec<(usize, f64)>>,
}

pub fn build_full_hamiltonian(spec: &ChainSpec, source: SwapSource) -> Result<FullHamiltonian> {
    spec.validate()?;
    let basis = Basis::new(spec.d, spec.n_sites)?;
    let d = spec.d;
    let local: Option<DMatrix<f64>> = match source {
        SwapSource::Permutation => None,
        SwapSource::Decomposition => {
            let swap = solve_swap_coefficients(d)?.reconstruct()?;
            Some(swap.map(|c| c.re))
        }
    };

    // Column-wise accumulation: H|i⟩ = Σ_j H_ji |j⟩.
    let mut columns: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); basis.dim()];
    for (i, column) in columns.iter_mut().enumerate() {
        let labels = basis.labels(i);
        let field: f64 = labels.iter().map(|&mu| mu as f64).sum::<f64>() * spec.b_field;
        if field != 0.0 {
            *column.entry(i).or_default() += field;
        }
        for bond in 0..spec.n_sites - 1 {
            match &local {
                None => {
                    let mut swapped = labels.clone();
                    swapped.swap(bond, bond + 1);
                    *column.entry(basis.index(&swapped)).or_default() -= spec.j;
                }
                Some(x) => {
                    let col = labels[bond] * d + labels[bond + 1];
                    for row in 0..d * d {
                        let value = x[(row, col)];
                        if value.abs() < 1e-13 {
                            continue;
                        }
                        let mut moved = labels.clone();
                        moved[bond] = row / d;
                        moved[bond + 1] = row % d;
                        *column.entry(basis.index(&moved)).or_default() -= spec.j * value;
                    }
                }
            }
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); basis.dim()];
    for (i, column) in columns.into_iter().enumerate() {
        for (j, value) in column {
            rows[j].push((i, value));
        }
    }
    Ok(FullHamiltonian {
        spec: *spec,
        basis,
        rows,
    })
}

impl FullHamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn apply(&self, state: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(
            self.dim(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|&(j, v)| state[j] * v).sum::<C64>()),
        )
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// `max |H - other|` over the union of nonzero patterns.
    pub fn max_deviation(&self, other: &FullHamiltonian) -> f64 {
        let forward = self
            .entries()
            .map(|(i, j, v)| (v - other.get(i, j)).abs())
            .fold(0.0, f64::max);
        let backward = other
            .entries()
            .map(|(i, j, v)| (v - self.get(i, j)).abs())
            .fold(0.0, f64::max);
        forward.max(backward)
    }

    /// `max |[H, Q]|` for a diagonal operator `Q`.
    pub fn commutator_with_diagonal(&self, q: &DVector<f64>) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v * (q[j] - q[i])).abs())
            .fold(0.0, f64::max)
    }

    /// Restriction to `|μ_1⟩ … |μ_N⟩` for one level `mu`.
    pub fn one_particle_block(&self, mu: usize) -> DMatrix<f64> {
        let n = self.spec.n_sites;
        DMatrix::from_fn(n, n, |r, c| {
            self.get(self.basis.one_particle(mu, r), self.basis.one_particle(mu, c))
        })
    }

    /// Exact eigendecomposition, block by block.
    pub fn diagonalize(&self) -> FullEigen {
        let dim = self.dim();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, j, v) in self.entries() {
            if v != 0.0 {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..dim {
            let r = root(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let blocks = groups
            .into_values()
            .map(|indices| {
                let m = indices.len();
                let dense = DMatrix::from_fn(m, m, |r, c| self.get(indices[r], indices[c]));
                let eig = SymmetricEigen::new(dense / self.spec.j);
                EigenBlock {
                    indices,
                    energies: eig.eigenvalues,
                    vectors: eig.eigenvectors,
                }
            })
            .collect();
        FullEigen { dim, blocks }
    }
}

#[derive(Debug, Clone)]
struct EigenBlock {
    indices: Vec<usize>,
    /// Units of `J`.
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

/// Cached eigendecomposition of a [`FullHamiltonian`].
#[derive(Debug, Clone)]
pub struct FullEigen {
    dim: usize,
    blocks: Vec<EigenBlock>,
}

impl FullEigen {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn largest_block(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).max().unwrap_or(0)
    }

    /// `e^{-iHt}` applied to `amplitudes`, `jt` dimensionless.
    pub fn evolve(&self, amplitudes: &DVector<C64>, jt: f64) -> DVector<C64> {
        let mut out = DVector::<C64>::zeros(self.dim);
        for block in &self.blocks {
            let local =
                DVector::from_iterator(block.indices.len(), block.indices.iter().map(|&i| amplitudes[i]));
            if local.iter().all(|c| c.norm_sqr() == 0.0) {
                continue;
            }
            let v = block.vectors.map(|x| C64::new(x, 0.0));
            let mut coeffs = v.transpose() * local;
            for (c, &e) in coeffs.iter_mut().zip(block.energies.iter()) {
                *c *= C64::from_polar(1.0, -e * jt);
            }
            let evolved = v * coeffs;
            for (&i, &c) in block.indices.iter().zip(evolved.iter()) {
                out[i] = c;
            }
        }
        out
    }

    /// Largest `|H v - E v|` residual, as a self-check.
    pub fn residual(&self, h: &FullHamiltonian) -> f64 {
        let dense_j = h.spec.j;
        self.blocks
            .iter()
            .flat_map(|block| {
                let m = block.indices.len();
                let local =
                    DMatrix::from_fn(m, m, |r, c| h.get(block.indices[r], block.indices[c]) / dense_j);
                (0..m)
                    .map(|p| {
                        let v = block.vectors.column(p);
                        (&local * v - v * block.energies[p]).amax()
                    })
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub basis: Basis,
    pub amplitudes: DVector<C64>,
}

impl FullState {
    pub fn basis_state(basis: Basis, labels: &[usize]) -> Result<Self> {
        if labels.len() != basis.n_sites() || labels.iter().any(|&mu| mu >= basis.d()) {
            return Err(invalid("labels", format!("{labels:?} is not a basis state")));
        }
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[basis.index(labels)] = C64::new(1.0, 0.0);
        Ok(FullState { basis, amplitudes })
    }

    /// `Σ_μ Σ_k a_μ c_k |μ_k⟩`.
    pub fn one_particle(basis: Basis, payload: &LogicalPayload, spatial: &DVector<C64>) -> Result<Self> {
        if payload.d() != basis.d() {
            return Err(Error::DimensionMismatch {
                expected: basis.d() - 1,
                actual: payload.coeffs.len(),
            });
        }
        if spatial.len() != basis.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: basis.n_sites(),
                actual: spatial.len(),
            });
        }
        let mut amplitudes = DVector::zeros(basis.dim());
        for mu in 1..basis.d() {
            for (site, &c) in spatial.iter().enumerate() {
                amplitudes[basis.one_particle(mu, site)] += payload.level(mu) * c;
            }
        }
        Ok(FullState { basis, amplitudes })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨O_m⟩` for every site: probability that site `m` is outside level 0.
    pub fn site_occupations(&self) -> Vec<f64> {
        let mut occ = vec![0.0; self.basis.n_sites()];
        for (i, c) in self.amplitudes.iter().enumerate() {
            let w = c.norm_sqr();
            if w == 0.0 {
                continue;
            }
            for (site, &mu) in self.basis.labels(i).iter().enumerate() {
                if mu != 0 {
                    occ[site] += w;
                }
            }
        }
        occ
    }

    pub fn expectation_diagonal(&self, q: &DVector<f64>) -> f64 {
        self.amplitudes
            .iter()
            .zip(q.iter())
            .map(|(c, &x)| c.norm_sqr() * x)
            .sum()
    }

    /// Weight on basis states with more than one site outside level 0.
    pub fn multi_excitation_weight(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.basis.labels(i).iter().filter(|&&mu| mu != 0).count() > 1)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    /// Amplitudes on `|μ_1⟩ … |μ_N⟩`.
    pub fn one_particle_amplitudes(&self, mu: usize) -> DVector<C64> {
        DVector::from_fn(self.basis.n_sites(), |site, _| {
            self.amplitudes[self.basis.one_particle(mu, site)]
        })
    }

    /// Reduced density matrix of the receiver (site N).
    pub fn receiver_density_matrix(&self) -> DMatrix<C64> {
        let d = self.basis.d();
        let mut rho = DMatrix::<C64>::zeros(d, d);
        for rest in 0..self.basis.dim() / d {
            for mu in 0..d {
                let a = self.amplitudes[rest * d + mu];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for nu in 0..d {
                    rho[(mu, nu)] += a * self.amplitudes[rest * d + nu].conj();
                }
            }
        }
        rho
    }
}

/// Projects site `site` (zero-based) onto the `O = Σ_{μ≥1}|μ⟩⟨μ|` branch
/// (`Success`) or onto level 0 (`Failure`). Returns the branch probability
/// and the renormalised state.
pub fn project_full(state: &FullState, site: usize, outcome: Outcome) -> Result<(f64, FullState)> {
    if site >= state.basis.n_sites() {
        return Err(invalid("site", format!("site {} outside chain", site + 1)));
    }
    let mut amplitudes = state.amplitudes.clone();
    for (i, c) in amplitudes.iter_mut().enumerate() {
        let excited = state.basis.labels(i)[site] != 0;
        if excited != (outcome == Outcome::Success) {
            *c = C64::new(0.0, 0.0);
        }
    }
    let probability = amplitudes.norm_squared();
    if probability < MIN_BRANCH_PROBABILITY {
        return Err(Error::ZeroProbabilityBranch { probability });
    }
    amplitudes /= C64::new(probability.sqrt(), 0.0);
    Ok((
        probability,
        FullState {
            basis: state.basis,
            amplitudes,
        },
    ))
}

/// Born-rule measurement of `O` at `site`.
pub fn measure_full(
    state: &FullState,
    site: usize,
    source: &mut OutcomeSource,
) -> Result<(Outcome, FullState)> {
    let p = state
        .site_occupations()
        .get(site)
        .copied()
        .ok_or_else(|| invalid("site", format!("site {} outside chain", site + 1)))?;
    let (outcome, _) = source.next(p);
    let (_, collapsed) = project_full(state, site, outcome)?;
    Ok((outcome, collapsed))
}

/// `⟨φ|ρ|φ⟩` for the payload embedded in the `d`-level receiver.
pub fn payload_fidelity(rho: &DMatrix<C64>, payload: &LogicalPayload) -> f64 {
    let d = rho.nrows();
    let phi = DVector::from_fn(d, |mu, _| payload.level(mu));
    (phi.adjoint() * rho * &phi)[(0, 0)].re
}

/// Applies `e^{+iμφ}` on the receiver, `φ = (B/J)·Jt`.
pub fn correct_receiver(rho: &DMatrix<C64>, field_ratio: f64, total_time: f64) -> DMatrix<C64> {
    let d = rho.nrows();
    let u = DMatrix::from_diagonal(&DVector::from_fn(d, |mu, _| {
        C64::from_polar(1.0, mu as f64 * field_ratio * total_time)
    }));
    &u * rho * u.adjoint()
}

#[derive(Debug, Clone)]
pub struct FullProtocolRun {
    /// Receiver success probability just before each measurement.
    pub probabilities: Vec<f64>,
    pub outcomes: Vec<Outcome>,
    /// Site occupations right after each measurement.
    pub occupations: Vec<Vec<f64>>,
    /// State right after each measurement.
    pub states: Vec<FullState>,
    pub total_time: f64,
    /// Receiver state on success, before and after phase correction.
    pub receiver: Option<DMatrix<C64>>,
    pub receiver_corrected: Option<DMatrix<C64>>,
}

impl FullProtocolRun {
    pub fn fidelity(&self, payload: &LogicalPayload) -> Option<f64> {
        self.receiver.as_ref().map(|rho| payload_fidelity(rho, payload))
    }

    pub fn corrected_fidelity(&self, payload: &LogicalPayload) -> Option<f64> {
        self.receiver_corrected
            .as_ref()
            .map(|rho| payload_fidelity(rho, payload))
    }
}

/// Replays a schedule of `(Jt_k, outcome_k)` on the full Hilbert space,
/// stopping after the first success.
pub fn run_full_protocol(
    hamiltonian: &FullHamiltonian,
    eigen: &FullEigen,
    payload: &LogicalPayload,
    schedule: &[(f64, Outcome)],
) -> Result<FullProtocolRun> {
    let spec = hamiltonian.spec;
    let basis = hamiltonian.basis;
    let mut sender = DVector::zeros(spec.n_sites);
    sender[0] = C64::new(1.0, 0.0);
    let mut state = FullState::one_particle(basis, payload, &sender)?;
    let receiver = spec.n_sites - 1;

    let mut run = FullProtocolRun {
        probabilities: Vec::new(),
        outcomes: Vec::new(),
        occupations: Vec::new(),
        states: Vec::new(),
        total_time: 0.0,
        receiver: None,
        receiver_corrected: None,
    };
    for &(jt, outcome) in schedule {
        state = FullState {
            basis,
            amplitudes: eigen.evolve(&state.amplitudes, jt),
        };
        run.total_time += jt;
        run.probabilities.push(state.site_occupations()[receiver]);
        let (_, collapsed) = project_full(&state, receiver, outcome)?;
        state = collapsed;
        run.outcomes.push(outcome);
        run.occupations.push(state.site_occupations());
        run.states.push(state.clone());
        if outcome == Outcome::Success {
            let rho = state.receiver_density_matrix();
            run.receiver_corrected = Some(correct_receiver(&rho, spec.field_ratio(), run.total_time));
            run.receiver = Some(rho);
            break;
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector::build_one_particle_hamiltonian;
    use crate::spin::conserved_charge;

    #[test]
    fn basis_round_trip_and_ordering() {
        let basis = Basis::new(3, 4).unwrap();
        assert_eq!(basis.dim(), 81);
        assert_eq!(basis.labels(1), vec![0, 0, 0, 1]);
        assert_eq!(basis.labels(27), vec![1, 0, 0, 0]);
        for i in 0..81 {
            assert_eq!(basis.index(&basis.labels(i)), i);
        }
        assert_eq!(basis.one_particle(2, 0), basis.index(&[2, 0, 0, 0]));
        assert!(matches!(Basis::new(4, 8), Err(Error::SizeGuard { .. })));
        assert!(Basis::new(3, 100).is_err());
    }

    #[test]
    fn two_site_swap_spectrum() {
        let spec = ChainSpec::new(2, 3, 1.0, 0.0).unwrap();
        let h = build_full_hamiltonian(&spec, SwapSource::Permutation).unwrap();
        let mut e: Vec<f64> = SymmetricEigen::new(h.to_dense())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        let minus = e.iter().filter(|&&x| (x + 1.0).abs() < 1e-12).count();
        let plus = e.iter().filter(|&&x| (x - 1.0).abs() < 1e-12).count();
        assert_eq!((minus, plus), (6, 3));
    }

    #[test]
    fn swap_sources_agree() {
        for (d, n) in [(3, 3), (4, 3), (3, 5)] {
            let spec = ChainSpec::new(n, d, 1.3, 0.4).unwrap();
            let a = build_full_hamiltonian(&spec, SwapSource::Permutation).unwrap();
            let b = build_full_hamiltonian(&spec, SwapSource::Decomposition).unwrap();
            assert!(a.max_deviation(&b) < 1e-10, "d={d} n={n}");
        }
    }

    #[test]
    fn hamiltonian_symmetries() {
        let spec = ChainSpec::new(4, 4, 1.0, 0.7).unwrap();
        let h = build_full_hamiltonian(&spec, SwapSource::Permutation).unwrap();
        assert!(h.hermiticity_deviation() < 1e-12);
        for m in 1..spec.d as u32 {
            let q = conserved_charge(m, &spec).unwrap();
            assert!(h.commutator_with_diagonal(&q) < 1e-10);
        }
        // |0…0⟩ is an eigenstate
        let zero = FullState::basis_state(h.basis, &[0; 4]).unwrap();
        let image = h.apply(&zero.amplitudes);
        let e = image[0];
        assert!(crate::max_modulus((image - zero.amplitudes * e).iter()) < 1e-12);
    }

    #[test]
    fn restriction_matches_sector_hamiltonian() {
        for n in 2..=5 {
            let spec = ChainSpec::new(n, 3, 0.9, 0.3).unwrap();
            let h = build_full_hamiltonian(&spec, SwapSource::Permutation).unwrap();
            let sector = build_one_particle_hamiltonian(&spec);
            for mu in 1..3 {
                let shift = sector.offset + mu as f64 * spec.b_field;
                let expected = &sector.matrix + DMatrix::<f64>::identity(n, n) * shift;
                assert!((h.one_particle_block(mu) - expected).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn block_diagonalisation_is_exact() {
        let spec = ChainSpec::new(4, 3, 1.0, 0.5).unwrap();
        let h = build_full_hamiltonian(&spec, SwapSource::Permutation).unwrap();
        let eig = h.diagonalize();
        assert!(eig.residual(&h) < 1e-10);
        assert!(eig.block_count() > 1);
        let psi = FullState::basis_state(h.basis, &[1, 0, 2, 0]).unwrap();
        let evolved = eig.evolve(&psi.amplitudes, 0.0);
        assert!(crate::max_modulus((evolved - &psi.amplitudes).iter()) < 1e-12);
        let evolved = eig.evolve(&psi.amplitudes, 3.0);
        assert!((evolved.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn measurement_edge_cases() {
        let basis = Basis::new(3, 3).unwrap();
        let at_receiver = FullState::basis_state(basis, &[0, 0, 2]).unwrap();
        let (p, _) = project_full(&at_receiver, 2, Outcome::Success).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(project_full(&at_receiver, 2, Outcome::Failure).is_err());
        let vacuum = FullState::basis_state(basis, &[0, 0, 0]).unwrap();
        for site in 0..3 {
            let mut source = OutcomeSource::seeded(site as u64);
            assert_eq!(
                measure_full(&vacuum, site, &mut source).unwrap().0,
                Outcome::Failure
            );
        }
        assert!(project_full(&vacuum, 3, Outcome::Failure).is_err());
    }

    #[test]
    fn receiver_state_of_product_state() {
        let basis = Basis::new(3, 2).unwrap();
        let payload = LogicalPayload::normalized(3, vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        let mut spatial = DVector::zeros(2);
        spatial[1] = C64::new(1.0, 0.0);
        let state = FullState::one_particle(basis, &payload, &spatial).unwrap();
        let rho = state.receiver_density_matrix();
        assert!((payload_fidelity(&rho, &payload) - 1.0).abs() < 1e-14);
        assert!(state.multi_excitation_weight() == 0.0);
    }
}
