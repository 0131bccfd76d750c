//! Cross-validation of the factorised sector engine against the full
//! Hilbert-space oracle.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::oracle::{build_full_hamiltonian, run_full_protocol, FullHamiltonian, FullState, SwapSource};
use crate::protocol::{self, LogicalPayload, Outcome};
use crate::sector::{build_one_particle_hamiltonian, ChainSpec, PropagatorMode, SectorDynamics};
use crate::spin::conserved_charge;
use crate::C64;

/// Agreement required between sector engine and oracle.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub d: usize,
    pub n_sites: usize,
    pub seeds: Vec<u64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl OracleReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Default)]
struct Tally {
    checks: Vec<Check>,
}

impl Tally {
    fn record(&mut self, name: &str, deviation: f64, tolerance: f64) {
        if let Some(check) = self.checks.iter_mut().find(|c| c.name == name) {
            check.max_deviation = check.max_deviation.max(deviation);
            check.passed = check.max_deviation <= tolerance;
        } else {
            self.checks.push(Check {
                name: name.to_string(),
                max_deviation: deviation,
                tolerance,
                passed: deviation <= tolerance,
            });
        }
    }
}

fn random_payload(rng: &mut ChaCha8Rng, d: usize) -> Result<LogicalPayload> {
    let coeffs = (1..d)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    LogicalPayload::normalized(d, coeffs)
}

/// Sector state written out in the full basis.
fn embed(state: &protocol::SectorState, h: &FullHamiltonian) -> DVector<C64> {
    let mut v = DVector::zeros(h.dim());
    for mu in 1..h.spec.d {
        for site in 0..h.spec.n_sites {
            v[h.basis.one_particle(mu, site)] = state.chain_amplitude(mu, site);
        }
    }
    v
}

/// `max |a - e^{iθ} b|` with the phase `θ` chosen from `⟨b|a⟩`.
fn phase_aligned_deviation(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}

/// Runs every oracle comparison for one `(d, N)` pair.
pub fn cross_validate(d: usize, n_sites: usize, seeds: &[u64]) -> Result<OracleReport> {
    let mut tally = Tally::default();
    let spec = ChainSpec::new(n_sites, d, 1.0, 0.0)?;

    // Static structure.
    let perm = build_full_hamiltonian(&spec, SwapSource::Permutation)?;
    let dec = build_full_hamiltonian(&spec, SwapSource::Decomposition)?;
    tally.record("swap_source_hamiltonian", perm.max_deviation(&dec), 1e-10);
    tally.record("hermiticity", perm.hermiticity_deviation(), 1e-12);
    let charges: Vec<DVector<f64>> = (1..d as u32)
        .map(|m| conserved_charge(m, &spec))
        .collect::<Result<_>>()?;
    for q in &charges {
        tally.record("charge_commutators", perm.commutator_with_diagonal(q), 1e-10);
    }
    let sector = build_one_particle_hamiltonian(&spec);
    for mu in 1..d {
        let expected = &sector.matrix + DMatrix::<f64>::identity(n_sites, n_sites) * sector.offset;
        tally.record(
            "sector_restriction",
            (perm.one_particle_block(mu) - expected).amax(),
            1e-12,
        );
    }

    let eig_perm = perm.diagonalize();
    let eig_dec = dec.diagonalize();
    tally.record("eigen_residual", eig_perm.residual(&perm), 1e-10);

    let times = [0.5, 1.7, 4.2, 9.0];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (d * 1000 + n_sites) as u64);
    let generic = {
        let v = DVector::from_fn(perm.dim(), |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    };
    let initial: Vec<f64> = charges
        .iter()
        .map(|q| {
            FullState {
                basis: perm.basis,
                amplitudes: generic.clone(),
            }
            .expectation_diagonal(q)
        })
        .collect();
    let mut mixed = vec![0; n_sites];
    mixed[0] = 2;
    let two_at_sender = FullState::basis_state(perm.basis, &mixed)?;
    let mut pair = vec![0; n_sites];
    pair[0] = 1;
    pair[1] = 1;
    let pair_index = perm.basis.index(&pair);
    for &t in &times {
        let evolved = FullState {
            basis: perm.basis,
            amplitudes: eig_perm.evolve(&generic, t),
        };
        tally.record("norm_preservation", (evolved.norm() - 1.0).abs(), 1e-10);
        for (q, q0) in charges.iter().zip(&initial) {
            tally.record(
                "charge_conservation",
                (evolved.expectation_diagonal(q) - q0).abs(),
                1e-10,
            );
        }
        let a = eig_perm.evolve(&generic, t);
        let b = eig_dec.evolve(&generic, t);
        tally.record(
            "swap_source_dynamics",
            crate::max_modulus((a - b).iter()),
            ORACLE_TOL,
        );

        let moved = eig_perm.evolve(&two_at_sender.amplitudes, t);
        tally.record("sector_mixing", moved[pair_index].norm(), 1e-10);
        let leaked = FullState {
            basis: perm.basis,
            amplitudes: moved,
        };
        tally.record("one_particle_leakage", leaked.multi_excitation_weight(), 1e-10);
    }

    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let payload = random_payload(&mut rng, d)?;
        let b_field = rng.gen_range(0.0..1.5);
        let failures = rng.gen_range(1..=3);
        let mut schedule: Vec<(f64, Outcome)> = (0..failures)
            .map(|_| (rng.gen_range(0.5..4.0), Outcome::Failure))
            .collect();
        schedule.push((rng.gen_range(0.5..4.0), Outcome::Success));

        let spec_b = ChainSpec { b_field, ..spec };
        let h = build_full_hamiltonian(&spec_b, SwapSource::Permutation)?;
        let eig = h.diagonalize();
        let full = run_full_protocol(&h, &eig, &payload, &schedule)?;

        let dynamics = SectorDynamics::new(&spec_b, PropagatorMode::Exact)?;
        let mut state = protocol::initialize(&spec_b, &payload)?;
        for (k, &(t, outcome)) in schedule.iter().enumerate() {
            state = protocol::evolve(&state, t, &dynamics)?;
            let p = protocol::success_probability(&state);
            tally.record("probabilities", (p - full.probabilities[k]).abs(), ORACLE_TOL);
            state = protocol::project(&state, outcome)?;
            let dist = protocol::excitation_distribution(&state);
            let dev = dist
                .iter()
                .zip(&full.occupations[k])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            tally.record("distributions", dev, ORACLE_TOL);
            tally.record(
                "post_measurement_states",
                phase_aligned_deviation(&full.states[k].amplitudes, &embed(&state, &h)),
                ORACLE_TOL,
            );
        }
        let corrected = full.corrected_fidelity(&payload).unwrap_or(0.0);
        tally.record("corrected_fidelity", 1.0 - corrected, ORACLE_TOL);
        let received = state.received_payload();
        let recovered = protocol::phase_correction(&received, spec_b.field_ratio(), state.total_time);
        tally.record(
            "sector_recovered_payload",
            1.0 - recovered.fidelity(&payload),
            ORACLE_TOL,
        );
    }

    let passed = tally.checks.iter().all(|c| c.passed);
    Ok(OracleReport {
        d,
        n_sites,
        seeds: seeds.to_vec(),
        checks: tally.checks,
        passed,
    })
}
