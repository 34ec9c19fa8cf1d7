//! Reference, coherent, and squeezed states of n-qudit systems.
//!
//! The single-qudit reference state is the finite analog of the vacuum:
//! the Fourier-invariant, parity-symmetric Gaussian built from a Jacobi
//! theta sum,
//!
//! ```text
//! c_ℓ ∝ Σ_{k∈Z} exp(−πk²/d) cos(2πkℓ/d) ,
//! ```
//!
//! the unique ground-state-like +1 eigenvector of the finite Fourier
//! transform concentrated at ℓ = 0 (Mehta, J. Math. Phys. 28, 781 (1987)
//! studies the F eigenbasis; the theta sum is its Gaussian representative).
//! For d = 2 the analog is the Hadamard +1 eigenstate
//! `(|0⟩ + ξ|1⟩)/√(1+ξ²)` with `ξ = √2 − 1`.
//!
//! Multi-qudit reference states are tensor products of single-qudit ones
//! taken in the coordinates of a selfdual basis; in field labels the
//! amplitude at λ with coordinates `(ℓ_1, …, ℓ_n)` is `Π_j c_{ℓ_j}`.
//! Coherent states are displaced copies `|μ,ν⟩ = D(μ,ν)|Ψ₀⟩` and squeezed
//! states apply the scaling permutation first: `D(p) S_ς |Ψ₀⟩`.
//!
//! Uncertainty on the discrete grid uses the circular dispersion
//! `(ΔA)² = 1 − |⟨A⟩|²` appropriate for unitary observables
//! (Lévy-Leblond, Ann. Phys. 101, 319 (1976)).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::field::{Basis, FieldContext, FieldElement};
use crate::operators::{displacement_phase, Operator, PhasePoint};
use crate::{QpsError, Result};

/// Tolerance on the unit-norm invariant of [`StateVector`].
pub const STATE_NORM_TOL: f64 = 1e-12;

/// A normalized pure state on the d^n-dimensional space.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub dim: usize,
    pub amps: DVector<Complex64>,
}

impl StateVector {
    /// Wrap amplitudes, enforcing unit norm within [`STATE_NORM_TOL`].
    pub fn new(amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(QpsError::NotNormalized { norm });
        }
        Ok(StateVector { dim: amps.len(), amps })
    }

    /// Normalize and wrap (for raw construction sums).
    pub fn from_unnormalized(amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(QpsError::NotNormalized { norm });
        }
        let scaled = amps / Complex64::new(norm, 0.0);
        Ok(StateVector { dim: scaled.len(), amps: scaled })
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// Apply an operator (no re-normalization; meant for unitaries).
    pub fn apply(&self, op: &Operator) -> Result<StateVector> {
        if op.dim != self.dim {
            return Err(QpsError::DimensionMismatch(format!(
                "operator dim {} vs state dim {}",
                op.dim, self.dim
            )));
        }
        StateVector::new(&op.entries * &self.amps)
    }

    /// Density matrix |ψ⟩⟨ψ|.
    pub fn projector(&self) -> Result<Operator> {
        let m = &self.amps * self.amps.adjoint();
        Operator::new(m)
    }
}

/// ⟨ψ|A|ψ⟩.
pub fn expectation(state: &StateVector, op: &Operator) -> Result<Complex64> {
    if op.dim != state.dim {
        return Err(QpsError::DimensionMismatch(format!(
            "operator dim {} vs state dim {}",
            op.dim, state.dim
        )));
    }
    Ok(state.amps.dotc(&(&op.entries * &state.amps)))
}

/// Truncation and normalization bookkeeping of the theta sum.
#[derive(Clone, Copy, Debug)]
pub struct ThetaParams {
    /// Qudit dimension.
    pub d: u64,
    /// Half-width of the truncated k-sum; the tail beyond it is < 1e−17.
    pub k_cut: usize,
    /// Squared norm `C = Σ_ℓ a_ℓ²` of the raw amplitudes before
    /// normalization.
    pub c: f64,
}

/// Reference state together with its theta-sum parameters.
#[derive(Clone, Debug)]
pub struct ReferenceState {
    pub state: StateVector,
    pub params: ThetaParams,
}

/// Truncation half-width: `K = ⌈√(17·ln10·d/π)⌉ + 1`, making the dropped
/// Gaussian tail `exp(−πK²/d) < 1e−17`, below double-precision resolution
/// of the leading terms.
pub fn theta_cutoff(d: u64) -> usize {
    let k = (17.0 * std::f64::consts::LN_10 * d as f64 / std::f64::consts::PI).sqrt();
    k.ceil() as usize + 1
}

/// Raw (unnormalized) theta amplitudes for odd d with cut K.
///
/// Only ℓ ≤ d/2 is evaluated; the upper half is mirrored, so the parity
/// symmetry `a_ℓ = a_{d−ℓ}` holds bit-exactly rather than up to rounding
/// of `cos` at congruent arguments.
fn theta_amplitudes(d: u64, k_cut: usize) -> Vec<f64> {
    let df = d as f64;
    let mut out = vec![0.0; d as usize];
    for l in 0..=(d as usize / 2) {
        let mut a = 1.0;
        for k in 1..=k_cut {
            let kf = k as f64;
            a += 2.0
                * (-std::f64::consts::PI * kf * kf / df).exp()
                * (2.0 * std::f64::consts::PI * kf * l as f64 / df).cos();
        }
        out[l] = a;
        if l > 0 {
            out[d as usize - l] = a;
        }
    }
    out
}

/// The single-qudit reference state for odd d.
///
/// Fourier-invariant (`F|ψ₀⟩ = |ψ₀⟩`), parity-symmetric (`c_ℓ = c_{−ℓ}`
/// exactly, by the cosine form), and peaked at ℓ = 0. Returns
/// [`QpsError::EvenDimension`] for even d — see [`qubit_reference`].
pub fn reference_state(d: u64) -> Result<ReferenceState> {
    if d % 2 == 0 {
        return Err(QpsError::EvenDimension(d));
    }
    if d < 3 {
        return Err(QpsError::DimensionMismatch("reference state needs d ≥ 3".into()));
    }
    let k_cut = theta_cutoff(d);
    let raw = theta_amplitudes(d, k_cut);
    let c: f64 = raw.iter().map(|a| a * a).sum();
    let amps = DVector::from_iterator(d as usize, raw.iter().map(|&a| Complex64::new(a, 0.0)));
    Ok(ReferenceState {
        state: StateVector::from_unnormalized(amps)?,
        params: ThetaParams { d, k_cut, c },
    })
}

/// The qubit reference state `(|0⟩ + ξ|1⟩)/√(1+ξ²)`, `ξ = √2 − 1`:
/// the +1 eigenstate of the Hadamard transform.
pub fn qubit_reference() -> StateVector {
    let xi = std::f64::consts::SQRT_2 - 1.0;
    let norm = (1.0 + xi * xi).sqrt();
    let amps = DVector::from_vec(vec![
        Complex64::new(1.0 / norm, 0.0),
        Complex64::new(xi / norm, 0.0),
    ]);
    StateVector { dim: 2, amps }
}

/// Single-qudit reference amplitudes for the factors of a product state.
fn single_qudit_reference(d: u64) -> Result<Vec<f64>> {
    if d == 2 {
        let xi = std::f64::consts::SQRT_2 - 1.0;
        let norm = (1.0 + xi * xi).sqrt();
        Ok(vec![1.0 / norm, xi / norm])
    } else {
        let r = reference_state(d)?;
        Ok(r.state.amps.iter().map(|a| a.re).collect())
    }
}

/// n-qudit reference state: product of single-qudit reference states in
/// the coordinates of `basis`.
///
/// The amplitude at the field label λ with coordinates `(ℓ_1, …, ℓ_n)`
/// over `basis` is `Π_j c_{ℓ_j}`. Over a selfdual basis this state is
/// Fourier-invariant; over the almost-selfdual fallback (odd d, even n)
/// the construction still goes through — the caller should treat that
/// basis as non-canonical — and Fourier invariance survives because the
/// scaled Gram slot is compensated by the parity symmetry of `c_ℓ`.
pub fn multi_reference_state(ctx: &FieldContext, basis: &Basis) -> Result<StateVector> {
    let c = single_qudit_reference(ctx.d())?;
    let q = ctx.dim();
    let mut amps = DVector::zeros(q);
    for l in ctx.elements() {
        let coords = ctx.expand(&l, basis)?;
        let mut a = 1.0;
        for &co in &coords {
            a *= c[co as usize];
        }
        amps[l.index() as usize] = Complex64::new(a, 0.0);
    }
    StateVector::from_unnormalized(amps)
}

/// The canonical fiducial state of a field context: the product reference
/// state over the canonical (almost-)selfdual basis.
pub fn canonical_fiducial(ctx: &FieldContext) -> Result<StateVector> {
    let sd = ctx.find_selfdual_basis()?;
    multi_reference_state(ctx, &sd.basis)
}

/// Apply `D(μ,ν)` to raw amplitudes without building the matrix:
/// `(Dψ)_{λ+ν} = φ χ(μλ) ψ_λ`.
pub(crate) fn displaced_amplitudes(
    ctx: &FieldContext,
    p: &PhasePoint,
    amps: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    let phi = displacement_phase(ctx, p)?;
    let mut out = DVector::zeros(amps.len());
    for l in ctx.elements() {
        let row = ctx.add(&l, &p.nu)?.index() as usize;
        out[row] = phi * ctx.character(&ctx.mul(&p.mu, &l)?)? * amps[l.index() as usize];
    }
    Ok(out)
}

/// Coherent state `|μ,ν⟩ = D(μ,ν) |Ψ₀⟩` over the canonical fiducial.
pub fn coherent_state(ctx: &FieldContext, p: &PhasePoint) -> Result<StateVector> {
    let fid = canonical_fiducial(ctx)?;
    StateVector::new(displaced_amplitudes(ctx, p, &fid.amps)?)
}

/// Squeezed state `D(p) S_ς |Ψ₀⟩`; `p = (0,0)` gives the squeezed vacuum.
pub fn squeezed_state(
    ctx: &FieldContext,
    zeta: &FieldElement,
    p: &PhasePoint,
) -> Result<StateVector> {
    if zeta.is_zero() {
        return Err(QpsError::ZeroSqueeze);
    }
    let fid = canonical_fiducial(ctx)?;
    let q = ctx.dim();
    let mut squeezed = DVector::zeros(q);
    for l in ctx.elements() {
        squeezed[l.index() as usize] = fid.amps[ctx.mul(zeta, &l)?.index() as usize];
    }
    StateVector::new(displaced_amplitudes(ctx, p, &squeezed)?)
}

/// Circular dispersion `(ΔA)² = 1 − |⟨A⟩|²` of a unitary observable.
pub fn circular_dispersion(state: &StateVector, op: &Operator) -> Result<f64> {
    if !op.tags.unitary {
        return Err(QpsError::NotUnitary);
    }
    let e = expectation(state, op)?;
    Ok(1.0 - e.norm_sqr())
}

/// Index map of the squeeze on product coordinates: with `λ = Σ ℓ_i θ_i`,
/// the amplitude of `S_ς Ψ` at coordinates ℓ is the input amplitude at
/// `m_j = Σ_i tr(ς θ̄_j θ_i) ℓ_i mod d` — the coordinates of ςλ.
///
/// Equals, tuple for tuple, the permutation oracle
/// `expand(ς · compose(ℓ))`; exposing the linear form makes the per-qudit
/// reshuffling of product states explicit.
pub fn squeeze_coefficient_map(
    ctx: &FieldContext,
    zeta: &FieldElement,
    basis: &Basis,
    coords: &[u64],
) -> Result<Vec<u64>> {
    if zeta.is_zero() {
        return Err(QpsError::ZeroSqueeze);
    }
    if coords.len() != basis.elements.len() {
        return Err(QpsError::LengthMismatch {
            expected: basis.elements.len(),
            got: coords.len(),
        });
    }
    let dual = ctx.dual_basis(&basis.elements)?;
    let d = ctx.d();
    let mut out = Vec::with_capacity(dual.len());
    for th_bar in &dual {
        let mut acc = 0u64;
        for (th_i, &li) in basis.elements.iter().zip(coords) {
            let t = ctx.trace(&ctx.mul(&ctx.mul(zeta, th_bar)?, th_i)?)?;
            acc = (acc + t * (li % d)) % d;
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::operators::{fourier, generator_u, generator_v};

    #[test]
    fn reference_state_is_fourier_invariant() {
        for d in [3u64, 5, 7, 11] {
            let ctx = make_field(d, 1, None).unwrap();
            let psi = reference_state(d).unwrap().state;
            let f = fourier(&ctx).unwrap();
            let fpsi = psi.apply(&f).unwrap();
            let dev: f64 = (&fpsi.amps - &psi.amps).norm();
            assert!(dev < 1e-10, "F|ψ₀⟩ ≠ |ψ₀⟩ at d={d}: {dev:e}");
        }
    }

    #[test]
    fn reference_state_symmetry_and_truncation() {
        for d in [5u64, 31] {
            let r = reference_state(d).unwrap();
            let a = &r.state.amps;
            // c_ℓ = c_{−ℓ} exactly (cosine form).
            for l in 1..d as usize {
                assert_eq!(a[l], a[d as usize - l]);
            }
            // Doubling the cutoff changes nothing at double precision.
            let wide = theta_amplitudes(d, 2 * r.params.k_cut);
            let norm: f64 = wide.iter().map(|x| x * x).sum::<f64>().sqrt();
            for l in 0..d as usize {
                assert!((a[l].re - wide[l] / norm).abs() < 1e-15);
            }
        }
        assert!(matches!(reference_state(4), Err(QpsError::EvenDimension(4))));
    }

    #[test]
    fn reference_u_v_expectations_match() {
        // ⟨U⟩ = ⟨V⟩ follows from Fourier invariance.
        for d in [3u64, 7, 31] {
            let ctx = make_field(d, 1, None).unwrap();
            let psi = reference_state(d).unwrap().state;
            let u = generator_u(&ctx, &ctx.one()).unwrap();
            let v = generator_v(&ctx, &ctx.one()).unwrap();
            let eu = expectation(&psi, &u).unwrap();
            let ev = expectation(&psi, &v).unwrap();
            assert!((eu - ev).norm() < 1e-12, "⟨U⟩ ≠ ⟨V⟩ at d={d}");
        }
    }

    #[test]
    fn qubit_reference_is_hadamard_eigenstate() {
        let psi = qubit_reference();
        let xi = std::f64::consts::SQRT_2 - 1.0;
        assert!((psi.amps[1].re / psi.amps[0].re - xi).abs() < 1e-15);
        let ctx = make_field(2, 1, None).unwrap();
        let f = fourier(&ctx).unwrap();
        let fpsi = psi.apply(&f).unwrap();
        assert!((&fpsi.amps - &psi.amps).norm() < 1e-14);
    }

    #[test]
    fn two_qubit_reference_product_form() {
        let ctx = make_field(2, 2, None).unwrap();
        let sd = ctx.find_selfdual_basis().unwrap().basis;
        let psi = multi_reference_state(&ctx, &sd).unwrap();
        let xi = std::f64::consts::SQRT_2 - 1.0;
        let norm = 1.0 + xi * xi;
        // Amplitude at coordinates (ℓ₁, ℓ₂) is ξ^{ℓ₁+ℓ₂}/(1+ξ²).
        for l1 in 0..2u64 {
            for l2 in 0..2u64 {
                let lam = ctx.compose(&[l1, l2], &sd).unwrap();
                let expect = xi.powi((l1 + l2) as i32) / norm;
                let got = psi.amps[lam.index() as usize].re;
                assert!((got - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn three_qubit_reference_hamming_form() {
        let ctx = make_field(2, 3, None).unwrap();
        let sd = ctx.find_selfdual_basis().unwrap().basis;
        let psi = multi_reference_state(&ctx, &sd).unwrap();
        let xi = std::f64::consts::SQRT_2 - 1.0;
        let norm = (1.0 + xi * xi).powf(1.5);
        for l in ctx.elements() {
            let coords = ctx.expand(&l, &sd).unwrap();
            let h: u64 = coords.iter().sum();
            let expect = xi.powi(h as i32) / norm;
            assert!((psi.amps[l.index() as usize].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn multi_reference_fourier_invariance() {
        // Holds for strictly selfdual bases and for the GF(9)
        // almost-selfdual fallback (parity symmetry compensates the
        // scaled Gram slot).
        for (d, n) in [(2u64, 2usize), (2, 3), (3, 2), (3, 3)] {
            let ctx = make_field(d, n, None).unwrap();
            let sd = ctx.find_selfdual_basis().unwrap();
            let psi = multi_reference_state(&ctx, &sd.basis).unwrap();
            let f = fourier(&ctx).unwrap();
            let fpsi = psi.apply(&f).unwrap();
            let dev = (&fpsi.amps - &psi.amps).norm();
            assert!(dev < 1e-10, "F-invariance fails at GF({d}^{n}) ({:?}): {dev:e}", sd.basis.kind);
        }
    }

    #[test]
    fn coherent_states_are_displaced_copies() {
        let ctx = make_field(5, 1, None).unwrap();
        let p1 = PhasePoint::new(ctx.element_from_index(2).unwrap(), ctx.element_from_index(4).unwrap());
        let p2 = PhasePoint::new(ctx.element_from_index(1).unwrap(), ctx.element_from_index(3).unwrap());
        let c2 = coherent_state(&ctx, &p2).unwrap();
        // D(p₁)|p₂⟩ lands on |p₁+p₂⟩ up to a phase of unit modulus.
        let moved = StateVector::new(displaced_amplitudes(&ctx, &p1, &c2.amps).unwrap()).unwrap();
        let sum = PhasePoint::new(ctx.add(&p1.mu, &p2.mu).unwrap(), ctx.add(&p1.nu, &p2.nu).unwrap());
        let target = coherent_state(&ctx, &sum).unwrap();
        let overlap = target.inner(&moved).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squeezed_state_is_permuted_fiducial() {
        let ctx = make_field(7, 1, None).unwrap();
        let zeta = ctx.element_from_index(2).unwrap();
        let origin = PhasePoint::new(ctx.zero(), ctx.zero());
        let sq = squeezed_state(&ctx, &zeta, &origin).unwrap();
        let fid = canonical_fiducial(&ctx).unwrap();
        for l in ctx.elements() {
            let src = ctx.mul(&zeta, &l).unwrap();
            assert_eq!(sq.amps[l.index() as usize], fid.amps[src.index() as usize]);
        }
        assert!(matches!(
            squeezed_state(&ctx, &ctx.zero(), &origin),
            Err(QpsError::ZeroSqueeze)
        ));
    }

    #[test]
    fn dispersion_requires_unitary() {
        let ctx = make_field(5, 1, None).unwrap();
        let psi = reference_state(5).unwrap().state;
        let h = crate::operators::harper_hamiltonian(5).unwrap();
        assert!(matches!(circular_dispersion(&psi, &h), Err(QpsError::NotUnitary)));
        let u = generator_u(&ctx, &ctx.one()).unwrap();
        let disp = circular_dispersion(&psi, &u).unwrap();
        assert!(disp > 0.0 && disp < 1.0);
    }

    #[test]
    fn coefficient_map_equals_permutation_oracle() {
        for (d, n, poly) in [(2u64, 3usize, None), (3, 2, None), (3, 3, Some("x^3+2x^2+1"))] {
            let ctx = make_field(d, n, poly).unwrap();
            let sd = ctx.find_selfdual_basis().unwrap().basis;
            for zk in 0..(ctx.q() - 1) {
                let zeta = ctx.sigma_pow(zk);
                for enc in 0..ctx.q() {
                    let coords = crate::field::idx_to_coeffs(enc, d, n);
                    let lam = ctx.compose(&coords, &sd).unwrap();
                    let oracle = ctx.expand(&ctx.mul(&zeta, &lam).unwrap(), &sd).unwrap();
                    let got = squeeze_coefficient_map(&ctx, &zeta, &sd, &coords).unwrap();
                    assert_eq!(got, oracle, "map mismatch at GF({d}^{n}), ς=σ^{zk}");
                }
            }
        }
    }

    #[test]
    fn coefficient_map_general_basis() {
        // The linear form holds for any basis, not just selfdual ones.
        let ctx = make_field(3, 2, None).unwrap();
        let pb = ctx.polynomial_basis();
        let zeta = ctx.sigma_pow(3);
        for enc in 0..ctx.q() {
            let coords = crate::field::idx_to_coeffs(enc, 3, 2);
            let lam = ctx.compose(&coords, &pb).unwrap();
            let oracle = ctx.expand(&ctx.mul(&zeta, &lam).unwrap(), &pb).unwrap();
            let got = squeeze_coefficient_map(&ctx, &zeta, &pb, &coords).unwrap();
            assert_eq!(got, oracle);
        }
    }
}
