//! d-level spin operators, the two-site swap and its polynomial expansion in
//! `S·S`, conserved charges, and the spin-1 couplings of a Bose-Hubbard chain.
//!
//! Spin matrices use the standard spin-s representation with `s = (d-1)/2`.
//! Basis index `μ` corresponds to `m_z = s - μ`, so level `0` is the fully
//! polarised state. Charges and the field term use the level label `μ`
//! itself (eigenvalues `0..d`), which differs from `m_z` by a constant shift.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::oracle::Basis;
use crate::sector::ChainSpec;
use crate::C64;

/// Reconstruction tolerance for the swap decomposition.
pub const SWAP_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    pub d: usize,
    pub sx: DMatrix<C64>,
    pub sy: DMatrix<C64>,
    pub sz: DMatrix<C64>,
}

impl SpinOperatorSet {
    /// Spin quantum number `s = (d - 1) / 2`.
    pub fn spin(&self) -> f64 {
        (self.d as f64 - 1.0) / 2.0
    }

    pub fn casimir(&self) -> DMatrix<C64> {
        &self.sx * &self.sx + &self.sy * &self.sy + &self.sz * &self.sz
    }

    /// Two-site Heisenberg coupling `S⊗S = Σ_a S^a ⊗ S^a` on `C^d ⊗ C^d`.
    pub fn two_site_dot(&self) -> DMatrix<C64> {
        self.sx.kronecker(&self.sx) + self.sy.kronecker(&self.sy) + self.sz.kronecker(&self.sz)
    }
}

fn check_levels(d: usize) -> Result<()> {
    if d < 2 {
        return Err(invalid("d", format!("need at least 2 levels, got {d}")));
    }
    Ok(())
}

pub fn build_spin_operators(d: usize) -> Result<SpinOperatorSet> {
    check_levels(d)?;
    let s = (d as f64 - 1.0) / 2.0;
    let mut raise = DMatrix::<C64>::zeros(d, d);
    let mut sz = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        let m = s - i as f64;
        sz[(i, i)] = C64::new(m, 0.0);
        if i > 0 {
            // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and m+1 sits at index i-1.
            raise[(i - 1, i)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let lower = raise.adjoint();
    let sx = (&raise + &lower) * C64::new(0.5, 0.0);
    let sy = (&raise - &lower) * C64::new(0.0, -0.5);
    Ok(SpinOperatorSet { d, sx, sy, sz })
}

/// Permutation matrix exchanging two `d`-level sites, `P|μν⟩ = |νμ⟩`.
pub fn build_swap_operator(d: usize) -> Result<DMatrix<C64>> {
    check_levels(d)?;
    let mut p = DMatrix::<C64>::zeros(d * d, d * d);
    for mu in 0..d {
        for nu in 0..d {
            p[(nu * d + mu, mu * d + nu)] = C64::new(1.0, 0.0);
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct SwapDecomposition {
    pub d: usize,
    /// `b[p]` multiplies `(S·S)^p`.
    pub b: Vec<f64>,
    /// Max-norm error of `Σ b_p (S·S)^p - P`.
    pub residual: f64,
    /// Largest imaginary part discarded from the least-squares solution.
    pub max_imag: f64,
    /// Numerical rank of the `d^4 × d` design matrix.
    pub rank: usize,
}

impl SwapDecomposition {
    /// Rebuilds the swap operator from the coefficients.
    pub fn reconstruct(&self) -> Result<DMatrix<C64>> {
        let dot = build_spin_operators(self.d)?.two_site_dot();
        Ok(polynomial(&dot, &self.b))
    }
}

fn powers(x: &DMatrix<C64>, count: usize) -> Vec<DMatrix<C64>> {
    let mut out = Vec::with_capacity(count);
    let mut acc = DMatrix::<C64>::identity(x.nrows(), x.ncols());
    for _ in 0..count {
        let next = &acc * x;
        out.push(acc);
        acc = next;
    }
    out
}

fn polynomial(x: &DMatrix<C64>, coeffs: &[f64]) -> DMatrix<C64> {
    powers(x, coeffs.len())
        .into_iter()
        .zip(coeffs)
        .fold(DMatrix::zeros(x.nrows(), x.ncols()), |sum, (term, &c)| {
            sum + term * C64::new(c, 0.0)
        })
}

/// Solves `P = Σ_{p<d} b_p (S·S)^p` by least squares over every matrix
/// element of the `d² × d²` operators.
pub fn solve_swap_coefficients(d: usize) -> Result<SwapDecomposition> {
    let dot = build_spin_operators(d)?.two_site_dot();
    let swap = build_swap_operator(d)?;
    let terms = powers(&dot, d);
    let rows = swap.len();

    let design = DMatrix::<C64>::from_fn(rows, d, |r, p| terms[p][r]);
    let target = DVector::<C64>::from_iterator(rows, swap.iter().copied());

    let svd = design.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = sigma_max * 1e-12;
    let rank = svd.rank(eps);
    let solution = svd.solve(&target, eps).map_err(|e| Error::Fit(e.to_string()))?;

    let max_imag = solution.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let b: Vec<f64> = solution.iter().map(|c| c.re).collect();
    let residual = crate::max_modulus((polynomial(&dot, &b) - &swap).iter());

    if residual > SWAP_RESIDUAL_TOL || max_imag > SWAP_RESIDUAL_TOL {
        return Err(Error::DecompositionResidual {
            d,
            residual: residual.max(max_imag),
        });
    }
    Ok(SwapDecomposition {
        d,
        b,
        residual,
        max_imag,
        rank,
    })
}

/// Diagonal of `Q^(m) = Σ_k (S^z_k)^m` over the full chain basis, with
/// `S^z|μ⟩ = μ|μ⟩`.
pub fn conserved_charge(m: u32, spec: &ChainSpec) -> Result<DVector<f64>> {
    if m < 1 || m as usize > spec.d - 1 {
        return Err(invalid(
            "m",
            format!("charge order must lie in 1..={}, got {m}", spec.d - 1),
        ));
    }
    let basis = Basis::new(spec.d, spec.n_sites)?;
    Ok(DVector::from_iterator(
        basis.dim(),
        (0..basis.dim()).map(|i| basis.labels(i).iter().map(|&mu| (mu as f64).powi(m as i32)).sum()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    /// Coefficient of `S_n·S_{n+1}`.
    pub j: f64,
    /// Coefficient of `(S_n·S_{n+1})²`.
    pub k: f64,
}

/// Spin-1 couplings of a Mott-insulating Bose-Hubbard chain from the
/// tunneling `t` and the on-site energies `u0` (total spin 0) and `u2`
/// (total spin 2).
pub fn effective_couplings(t: f64, u0: f64, u2: f64) -> Result<EffectiveCouplings> {
    if u0 == 0.0 || !u0.is_finite() {
        return Err(invalid("u0", "on-site energy must be finite and nonzero"));
    }
    if u2 == 0.0 || !u2.is_finite() {
        return Err(invalid("u2", "on-site energy must be finite and nonzero"));
    }
    let t2 = t * t;
    Ok(EffectiveCouplings {
        j: -2.0 * t2 / u2,
        k: -2.0 * t2 / (3.0 * u2) - 4.0 * t2 / (3.0 * u0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        a * b - b * a
    }

    #[test]
    fn spin_half_and_spin_one_sz() {
        let half = build_spin_operators(2).unwrap();
        assert_eq!(half.sz[(0, 0)].re, 0.5);
        assert_eq!(half.sz[(1, 1)].re, -0.5);
        let one = build_spin_operators(3).unwrap();
        let diag: Vec<f64> = (0..3).map(|i| one.sz[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn spin_algebra_holds_for_small_d() {
        for d in 2..=7 {
            let ops = build_spin_operators(d).unwrap();
            let s = ops.spin();
            let i = C64::new(0.0, 1.0);
            assert!(max_abs(&(commutator(&ops.sx, &ops.sy) - &ops.sz * i)) < 1e-12);
            assert!(max_abs(&(commutator(&ops.sy, &ops.sz) - &ops.sx * i)) < 1e-12);
            assert!(max_abs(&(commutator(&ops.sz, &ops.sx) - &ops.sy * i)) < 1e-12);
            let id = DMatrix::<C64>::identity(d, d) * C64::new(s * (s + 1.0), 0.0);
            assert!(max_abs(&(ops.casimir() - id)) < 1e-12);
            for op in [&ops.sx, &ops.sy, &ops.sz] {
                assert!(max_abs(&(op - op.adjoint())) < 1e-15);
            }
        }
    }

    #[test]
    fn spin_three_halves_casimir() {
        let ops = build_spin_operators(4).unwrap();
        let c = ops.casimir();
        for i in 0..4 {
            assert!((c[(i, i)].re - 15.0 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_single_level() {
        assert!(build_spin_operators(1).is_err());
        assert!(build_swap_operator(0).is_err());
        assert!(solve_swap_coefficients(1).is_err());
    }

    #[test]
    fn swap_is_an_involutive_permutation() {
        for d in 2..=5 {
            let p = build_swap_operator(d).unwrap();
            let id = DMatrix::<C64>::identity(d * d, d * d);
            assert_eq!(&p * &p, id);
            let trace: f64 = (0..d * d).map(|i| p[(i, i)].re).sum();
            assert_eq!(trace, d as f64);
        }
        // P|01> = |10> for qubits
        let p = build_swap_operator(2).unwrap();
        assert_eq!(p[(2, 1)].re, 1.0);
        assert_eq!(p[(1, 1)].re, 0.0);
    }

    #[test]
    fn spin_one_swap_coefficients() {
        let dec = solve_swap_coefficients(3).unwrap();
        for (got, want) in dec.b.iter().zip([-1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-10, "{:?}", dec.b);
        }
        assert_eq!(dec.rank, 3);
    }

    #[test]
    fn spin_half_swap_coefficients() {
        // P = I/2 + 2 S·S, from the triplet (+1/4) and singlet (-3/4) eigenvalues of S·S.
        let dec = solve_swap_coefficients(2).unwrap();
        assert!((dec.b[0] - 0.5).abs() < 1e-10);
        assert!((dec.b[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn decomposition_reconstructs_swap_up_to_d6() {
        for d in 2..=6 {
            let dec = solve_swap_coefficients(d).unwrap();
            assert!(
                dec.residual <= SWAP_RESIDUAL_TOL,
                "d={d} residual {}",
                dec.residual
            );
            assert_eq!(dec.rank, d);
            let rebuilt = dec.reconstruct().unwrap();
            assert!(max_abs(&(&rebuilt - rebuilt.adjoint())) < 1e-10);
            let id = DMatrix::<C64>::identity(d * d, d * d);
            assert!(max_abs(&(&rebuilt * &rebuilt - id)) < 1e-10);
        }
    }

    #[test]
    fn heisenberg_coupling_conserves_magnetisation() {
        for d in 2..=6 {
            let ops = build_spin_operators(d).unwrap();
            let id = DMatrix::<C64>::identity(d, d);
            let total_z = ops.sz.kronecker(&id) + id.kronecker(&ops.sz);
            let dot = ops.two_site_dot();
            assert!(max_abs(&commutator(&dot, &total_z)) < 1e-12);
        }
    }

    #[test]
    fn charges_label_sectors() {
        let spec = ChainSpec::new(3, 3, 1.0, 0.0).unwrap();
        let basis = Basis::new(3, 3).unwrap();
        let q1 = conserved_charge(1, &spec).unwrap();
        let q2 = conserved_charge(2, &spec).unwrap();
        let s200 = basis.index(&[2, 0, 0]);
        let s110 = basis.index(&[1, 1, 0]);
        assert_eq!(q1[s200], 2.0);
        assert_eq!(q1[s110], 2.0);
        assert_eq!(q2[s110], 2.0);
        assert_eq!(q2[s200], 4.0);
        assert_eq!(q1[0], 0.0);
        assert_eq!(q2[0], 0.0);
    }

    #[test]
    fn charge_order_is_validated() {
        let spec = ChainSpec::new(3, 3, 1.0, 0.0).unwrap();
        assert!(conserved_charge(0, &spec).is_err());
        assert!(conserved_charge(3, &spec).is_err());
        let big = ChainSpec::new(20, 3, 1.0, 0.0).unwrap();
        assert!(matches!(conserved_charge(1, &big), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn bose_hubbard_couplings() {
        let c = effective_couplings(0.7, 1.3, 1.3).unwrap();
        assert!((c.j - c.k).abs() < 1e-15);
        assert_eq!(
            effective_couplings(0.0, 2.0, 3.0).unwrap(),
            EffectiveCouplings { j: 0.0, k: 0.0 }
        );
        let c = effective_couplings(1.0, -2.0, -2.0).unwrap();
        assert!((c.j - 1.0).abs() < 1e-15 && (c.k - 1.0).abs() < 1e-15);
        assert!(effective_couplings(1.0, 0.0, 1.0).is_err());
        assert!(effective_couplings(1.0, 1.0, 0.0).is_err());
    }
}
