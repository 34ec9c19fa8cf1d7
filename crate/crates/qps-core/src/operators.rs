//! Generalized Pauli operators, displacements, and related unitaries on
//! the d^n-dimensional Hilbert space labeled by GF(d^n).
//!
//! The computational kets `|λ⟩` are labeled by field elements; their matrix
//! index is the canonical coefficient integer of λ. The basic pair is the
//! shift and modulation operators
//!
//! ```text
//! U_ν |λ⟩ = |λ + ν⟩ ,      V_μ |λ⟩ = χ(μλ) |λ⟩ ,
//! ```
//!
//! which obey the Weyl commutation form `V_μ U_ν = χ(μν) U_ν V_μ` — the
//! finite-dimensional analog of the exponentiated canonical commutation
//! relation (Weyl, *The Theory of Groups and Quantum Mechanics*;
//! Schwinger, Proc. Natl. Acad. Sci. 46, 570 (1960)). Displacement
//! operators attach a phase `D(μ,ν) = φ(μ,ν) U_ν V_μ` chosen so that D is
//! unitary, `D(μ,ν)† = D(−μ,−ν)`, and displacements compose up to the
//! symplectic phase `χ(2⁻¹(μ₁ν₂ − μ₂ν₁))`. In odd characteristic
//! `φ = χ(2⁻¹μν)`; in characteristic 2 no inverse of 2 exists and the
//! phase is the per-qudit power of i over a selfdual coordinate expansion,
//! `φ = i^{Σ_j m_j n_j}`, which preserves hermiticity of each D and exact
//! tensor factorization (Gibbons, Hoffman & Wootters, Phys. Rev. A 70,
//! 062101 (2004); Vourdas, Rep. Prog. Phys. 67, 267 (2004)).
//!
//! The finite Fourier transform `F = d^{−n/2} Σ χ(λλ′)|λ⟩⟨λ′|` rotates
//! U̇ into V (`F U_μ F† = V_μ`), squares to the parity permutation
//! `λ ↦ −λ`, and has fourth power 1. For odd characteristic the parity
//! equals the average of all displacements, `(1/d^n) Σ_{μν} D(μ,ν)` — the
//! identity that anchors the s = 0 quasidistribution kernel at the origin.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::field::{tuple_index_big_endian, Basis, BasisKind, FieldContext, FieldElement};
use crate::{QpsError, Result};

/// Tolerance for tagging an operator unitary: ‖MM† − I‖_max.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for tagging an operator hermitian: ‖M − M†‖_max.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Structural tags computed on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OperatorTags {
    pub unitary: bool,
    pub hermitian: bool,
}

/// A dense operator on the d^n-dimensional space.
#[derive(Clone, Debug)]
pub struct Operator {
    pub dim: usize,
    pub entries: DMatrix<Complex64>,
    pub tags: OperatorTags,
}

impl Operator {
    /// Wrap a square matrix, computing the unitary/hermitian tags at the
    /// pinned tolerances ([`UNITARY_TOL`], [`HERMITIAN_TOL`]).
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(QpsError::DimensionMismatch(format!(
                "operator must be square, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let dim = entries.nrows();
        let herm = max_abs_diff(&entries, &entries.adjoint()) < HERMITIAN_TOL;
        let prod = &entries * entries.adjoint();
        let unit = max_abs_diff(&prod, &DMatrix::identity(dim, dim)) < UNITARY_TOL;
        Ok(Operator { dim, entries, tags: OperatorTags { unitary: unit, hermitian: herm } })
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Operator {
        Operator::new(self.entries.adjoint()).expect("adjoint of square is square")
    }

    /// Matrix product.
    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        if self.dim != other.dim {
            return Err(QpsError::DimensionMismatch(format!(
                "cannot multiply operators of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        Operator::new(&self.entries * &other.entries)
    }

    /// Largest entrywise deviation from another operator.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }

    /// Trace.
    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }
}

/// Largest |a_ij − b_ij|.
pub(crate) fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// A point (μ, ν) of the d^n × d^n phase-space grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhasePoint {
    pub mu: FieldElement,
    pub nu: FieldElement,
}

impl PhasePoint {
    pub fn new(mu: FieldElement, nu: FieldElement) -> Self {
        PhasePoint { mu, nu }
    }
}

/// Shift operator `U_ν |λ⟩ = |λ + ν⟩`.
pub fn generator_u(ctx: &FieldContext, nu: &FieldElement) -> Result<Operator> {
    let q = ctx.dim();
    let mut m = DMatrix::zeros(q, q);
    for l in ctx.elements() {
        let row = ctx.add(&l, nu)?.index() as usize;
        m[(row, l.index() as usize)] = Complex64::new(1.0, 0.0);
    }
    Operator::new(m)
}

/// Modulation operator `V_μ |λ⟩ = χ(μλ) |λ⟩`.
pub fn generator_v(ctx: &FieldContext, mu: &FieldElement) -> Result<Operator> {
    let q = ctx.dim();
    let mut m = DMatrix::zeros(q, q);
    for l in ctx.elements() {
        let i = l.index() as usize;
        m[(i, i)] = ctx.character(&ctx.mul(mu, &l)?)?;
    }
    Operator::new(m)
}

/// Finite Fourier transform `F = d^{−n/2} Σ_{λλ′} χ(λλ′)|λ⟩⟨λ′|`.
///
/// Satisfies `F U_μ F† = V_μ`, `F² = parity`, `F⁴ = 1`.
pub fn fourier(ctx: &FieldContext) -> Result<Operator> {
    let q = ctx.dim();
    let scale = 1.0 / (q as f64).sqrt();
    let mut m = DMatrix::zeros(q, q);
    for a in ctx.elements() {
        for b in ctx.elements() {
            m[(a.index() as usize, b.index() as usize)] =
                scale * ctx.character(&ctx.mul(&a, &b)?)?;
        }
    }
    Operator::new(m)
}

/// Displacement phase φ(μ,ν); see the module docs for the two cases.
pub(crate) fn displacement_phase(ctx: &FieldContext, p: &PhasePoint) -> Result<Complex64> {
    if ctx.d() == 2 {
        let basis = char2_phase_basis(ctx)?;
        let m = ctx.expand(&p.mu, &basis)?;
        let n = ctx.expand(&p.nu, &basis)?;
        let e: u64 = m.iter().zip(&n).map(|(a, b)| a * b).sum::<u64>() % 4;
        Ok(match e {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        })
    } else {
        let half = ctx.half()?;
        let arg = ctx.mul(&half, &ctx.mul(&p.mu, &p.nu)?)?;
        ctx.character(&arg)
    }
}

/// The selfdual basis used for characteristic-2 displacement phases.
///
/// In characteristic 2 a strictly selfdual basis always exists; the search
/// result is cached on the context, so the phase convention is stable for
/// the lifetime of the field realization.
fn char2_phase_basis(ctx: &FieldContext) -> Result<Basis> {
    let search = ctx.find_selfdual_basis()?;
    if search.basis.kind != BasisKind::Selfdual {
        return Err(QpsError::NotSelfdual(
            "characteristic-2 phase needs a strictly selfdual basis".into(),
        ));
    }
    Ok(search.basis)
}

/// Displacement operator `D(μ,ν) = φ(μ,ν) U_ν V_μ`.
///
/// Unitary for every point; hermitian with `D² = 1` in characteristic 2;
/// `D(μ,ν)† = D(−μ,−ν)` and the composition rule
/// `D(p₁)D(p₂) = χ(2⁻¹(μ₁ν₂ − μ₂ν₁)) D(p₁+p₂)` in odd characteristic.
pub fn displacement(ctx: &FieldContext, p: &PhasePoint) -> Result<Operator> {
    let q = ctx.dim();
    let phi = displacement_phase(ctx, p)?;
    let mut m = DMatrix::zeros(q, q);
    for l in ctx.elements() {
        let row = ctx.add(&l, &p.nu)?.index() as usize;
        m[(row, l.index() as usize)] = phi * ctx.character(&ctx.mul(&p.mu, &l)?)?;
    }
    Operator::new(m)
}

/// Parity operator from the displacement average `(1/d^n) Σ_{μν} D(μ,ν)`.
///
/// Valid in odd characteristic, where it equals the permutation
/// `|λ⟩ ↦ |−λ⟩`; rejected for d = 2 (the average is not the parity there).
pub fn parity_from_displacements(ctx: &FieldContext) -> Result<Operator> {
    if ctx.d() == 2 {
        return Err(QpsError::EvenDimension(2));
    }
    let q = ctx.dim();
    let mut acc = DMatrix::<Complex64>::zeros(q, q);
    for mu in ctx.elements() {
        for nu in ctx.elements() {
            let phi = displacement_phase(ctx, &PhasePoint::new(mu, nu))?;
            for l in ctx.elements() {
                let row = ctx.add(&l, &nu)?.index() as usize;
                acc[(row, l.index() as usize)] +=
                    phi * ctx.character(&ctx.mul(&mu, &l)?)?;
            }
        }
    }
    acc /= Complex64::new(q as f64, 0.0);
    Operator::new(acc)
}

/// The parity permutation `|λ⟩ ↦ |−λ⟩` built directly.
pub fn parity_permutation(ctx: &FieldContext) -> Result<Operator> {
    let q = ctx.dim();
    let mut m = DMatrix::zeros(q, q);
    for l in ctx.elements() {
        let row = ctx.neg(&l)?.index() as usize;
        m[(row, l.index() as usize)] = Complex64::new(1.0, 0.0);
    }
    Operator::new(m)
}

/// Squeeze operator `S_ς = Σ_λ |λ⟩⟨ςλ|` for nonzero ς.
///
/// A permutation unitary scaling the two phase-space axes oppositely:
/// `S U_ν S† = U_{νς⁻¹}` and `S V_μ S† = V_{μς}`; on amplitudes
/// `(Sψ)_λ = ψ_{ςλ}`. Its only fixed basis ket for ς ≠ 1 is `|0⟩`.
pub fn squeeze_operator(ctx: &FieldContext, zeta: &FieldElement) -> Result<Operator> {
    if zeta.is_zero() {
        return Err(QpsError::ZeroSqueeze);
    }
    let q = ctx.dim();
    let mut m = DMatrix::zeros(q, q);
    for l in ctx.elements() {
        let col = ctx.mul(zeta, &l)?.index() as usize;
        m[(l.index() as usize, col)] = Complex64::new(1.0, 0.0);
    }
    Operator::new(m)
}

/// Harper Hamiltonian `H = 2 − (U + U†)/2 − (V + V†)/2` on Z_d (prime d).
///
/// The discrete analog of the harmonic oscillator `(p² + x²)/2` near the
/// bottom of its band: H commutes with the finite Fourier transform, and
/// its ground state converges to the theta-sum reference state as d grows
/// (Harper, Proc. Phys. Soc. A 68, 874 (1955)).
pub fn harper_hamiltonian(d: u64) -> Result<Operator> {
    let ctx = crate::field::make_field(d, 1, None)?;
    let one = ctx.one();
    let u = generator_u(&ctx, &one)?;
    let v = generator_v(&ctx, &one)?;
    let q = ctx.dim();
    let id = DMatrix::<Complex64>::identity(q, q);
    let two = Complex64::new(2.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let h = id * two
        - (&u.entries + u.entries.adjoint()) * half
        - (&v.entries + v.entries.adjoint()) * half;
    Operator::new(h)
}

/// Permutation taking field-label indices to big-endian coordinate indices
/// over `basis`: `P |λ⟩ = |tuple_index(expand(λ, basis))⟩`.
///
/// Conjugating by P re-expresses an operator in the per-qudit coordinate
/// ordering in which tensor factorizations take Kronecker form.
pub fn coordinate_permutation(ctx: &FieldContext, basis: &Basis) -> Result<Operator> {
    if basis.elements.len() != ctx.n() {
        return Err(QpsError::BasisMismatch(format!(
            "basis of length {} for extension degree {}",
            basis.elements.len(),
            ctx.n()
        )));
    }
    let q = ctx.dim();
    let d = ctx.d();
    let mut m = DMatrix::zeros(q, q);
    for l in ctx.elements() {
        let coords = ctx.expand(&l, basis)?;
        let row = tuple_index_big_endian(&coords, d);
        m[(row, l.index() as usize)] = Complex64::new(1.0, 0.0);
    }
    Operator::new(m)
}

/// Basis-change permutation between coordinate representations:
/// maps the big-endian coordinate index of λ over `from` to its coordinate
/// index over `to`, for every λ.
pub fn basis_change_operator(ctx: &FieldContext, from: &Basis, to: &Basis) -> Result<Operator> {
    let pf = coordinate_permutation(ctx, from)?;
    let pt = coordinate_permutation(ctx, to)?;
    pt.mul(&pf.dagger())
}

/// Factor `D(μ,ν)` into n single-qudit displacements over a selfdual basis.
///
/// Writing `m = expand(μ)`, `n = expand(ν)` over the basis, the j-th factor
/// is the d×d displacement `D_j = φ_j U_{n_j} V_{m_j}` with the single-qudit
/// phase convention (`φ_j = ω^{2⁻¹ m_j n_j}` for odd d, `i^{m_j n_j}` for
/// d = 2). The Kronecker product of the returned factors equals
/// `P D(μ,ν) P†` with P = [`coordinate_permutation`] over the same basis.
pub fn factorize_displacement(
    ctx: &FieldContext,
    p: &PhasePoint,
    basis: &Basis,
) -> Result<Vec<Operator>> {
    let n = ctx.n();
    if basis.elements.len() != n {
        return Err(QpsError::BasisMismatch(format!(
            "basis of length {} for extension degree {}",
            basis.elements.len(),
            n
        )));
    }
    for (i, a) in basis.elements.iter().enumerate() {
        for (j, b) in basis.elements.iter().enumerate() {
            let t = ctx.trace(&ctx.mul(a, b)?)?;
            if t != u64::from(i == j) {
                return Err(QpsError::NotSelfdual(format!(
                    "tr(θ_{i} θ_{j}) = {t} ≠ {}",
                    u64::from(i == j)
                )));
            }
        }
    }
    let d = ctx.d() as usize;
    let ms = ctx.expand(&p.mu, basis)?;
    let ns = ctx.expand(&p.nu, basis)?;
    let tau = 2.0 * std::f64::consts::PI / d as f64;
    let omega = |k: u64| {
        let th = tau * (k % d as u64) as f64;
        Complex64::new(th.cos(), th.sin())
    };
    let mut out = Vec::with_capacity(n);
    for (&mj, &nj) in ms.iter().zip(&ns) {
        let phi = if ctx.d() == 2 {
            match (mj * nj) % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            }
        } else {
            let inv2 = (ctx.d() + 1) / 2;
            omega(inv2 * mj * nj) // ω reduces its argument mod d
        };
        let mut f = DMatrix::zeros(d, d);
        for x in 0..d as u64 {
            let row = ((x + nj) % ctx.d()) as usize;
            f[(row, x as usize)] = phi * omega(mj * x);
        }
        out.push(Operator::new(f)?);
    }
    Ok(out)
}

/// Kronecker product of a list of operators (first factor most significant).
pub fn kron_all(factors: &[Operator]) -> Result<Operator> {
    let mut acc = DMatrix::<Complex64>::identity(1, 1);
    for f in factors {
        acc = acc.kronecker(&f.entries);
    }
    Operator::new(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weyl_commutation_small_field() {
        // V_μ U_ν = χ(μν) U_ν V_μ, exhaustive over GF(9).
        let ctx = make_field(3, 2, None).unwrap();
        for mu in ctx.elements() {
            for nu in ctx.elements() {
                let u = generator_u(&ctx, &nu).unwrap();
                let v = generator_v(&ctx, &mu).unwrap();
                let lhs = v.mul(&u).unwrap();
                let chi = ctx.character(&ctx.mul(&mu, &nu).unwrap()).unwrap();
                let rhs = &u.entries * &v.entries * chi;
                assert!(max_abs_diff(&lhs.entries, &rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_properties() {
        for (d, n) in [(2, 2), (3, 1), (5, 1), (3, 2)] {
            let ctx = make_field(d, n, None).unwrap();
            let f = fourier(&ctx).unwrap();
            assert!(f.tags.unitary);
            // F² = parity, F⁴ = 1.
            let f2 = f.mul(&f).unwrap();
            let par = parity_permutation(&ctx).unwrap();
            assert!(f2.max_abs_diff(&par) < 1e-12);
            let f4 = f2.mul(&f2).unwrap();
            let id = Operator::new(DMatrix::identity(ctx.dim(), ctx.dim())).unwrap();
            assert!(f4.max_abs_diff(&id) < 1e-12);
            // F U_μ F† = V_μ.
            let mu = ctx.sigma();
            let u = generator_u(&ctx, &mu).unwrap();
            let v = generator_v(&ctx, &mu).unwrap();
            let conj = f.mul(&u).unwrap().mul(&f.dagger()).unwrap();
            assert!(conj.max_abs_diff(&v) < 1e-12);
        }
    }

    #[test]
    fn displacement_unitary_and_adjoint() {
        for (d, n, poly) in [(5, 1, None), (2, 2, None), (3, 2, None)] {
            let ctx = make_field(d, n, poly).unwrap();
            for mu in ctx.elements() {
                for nu in ctx.elements() {
                    let p = PhasePoint::new(mu, nu);
                    let dd = displacement(&ctx, &p).unwrap();
                    assert!(dd.tags.unitary, "D not unitary at d={d} n={n}");
                    let pm = PhasePoint::new(ctx.neg(&mu).unwrap(), ctx.neg(&nu).unwrap());
                    let dneg = displacement(&ctx, &pm).unwrap();
                    assert!(dd.dagger().max_abs_diff(&dneg) < 1e-12, "D† ≠ D(−μ,−ν)");
                }
            }
        }
    }

    #[test]
    fn char2_displacements_are_hermitian_involutions() {
        let ctx = make_field(2, 3, None).unwrap();
        let id = Operator::new(DMatrix::identity(8, 8)).unwrap();
        for mu in ctx.elements() {
            for nu in ctx.elements() {
                let dd = displacement(&ctx, &PhasePoint::new(mu, nu)).unwrap();
                assert!(dd.tags.hermitian);
                assert!(dd.mul(&dd).unwrap().max_abs_diff(&id) < 1e-12);
            }
        }
    }

    #[test]
    fn composition_phase_odd_d() {
        // D(p₁)D(p₂) = χ(2⁻¹(μ₁ν₂ − μ₂ν₁)) D(p₁+p₂), exhaustive at d = 5.
        let ctx = make_field(5, 1, None).unwrap();
        let half = ctx.half().unwrap();
        for m1 in ctx.elements() {
            for n1 in ctx.elements() {
                for m2 in ctx.elements() {
                    for n2 in ctx.elements() {
                        let d1 = displacement(&ctx, &PhasePoint::new(m1, n1)).unwrap();
                        let d2 = displacement(&ctx, &PhasePoint::new(m2, n2)).unwrap();
                        let lhs = d1.mul(&d2).unwrap();
                        let sum = PhasePoint::new(
                            ctx.add(&m1, &m2).unwrap(),
                            ctx.add(&n1, &n2).unwrap(),
                        );
                        let cross = ctx
                            .sub(&ctx.mul(&m1, &n2).unwrap(), &ctx.mul(&m2, &n1).unwrap())
                            .unwrap();
                        let phase =
                            ctx.character(&ctx.mul(&half, &cross).unwrap()).unwrap();
                        let rhs = displacement(&ctx, &sum).unwrap().entries * phase;
                        assert!(max_abs_diff(&lhs.entries, &rhs) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn parity_average_equals_permutation() {
        for d in [3u64, 5, 7] {
            let ctx = make_field(d, 1, None).unwrap();
            let avg = parity_from_displacements(&ctx).unwrap();
            let perm = parity_permutation(&ctx).unwrap();
            assert!(avg.max_abs_diff(&perm) < 1e-11, "parity identity fails at d={d}");
        }
        let ctx2 = make_field(2, 1, None).unwrap();
        assert!(matches!(parity_from_displacements(&ctx2), Err(QpsError::EvenDimension(2))));
    }

    #[test]
    fn squeeze_is_permutation_with_expected_action() {
        let ctx = make_field(5, 1, None).unwrap();
        let two = ctx.element_from_index(2).unwrap();
        let s = squeeze_operator(&ctx, &two).unwrap();
        assert!(s.tags.unitary);
        // S_2 |1⟩ = |3⟩ at d = 5: (Sψ)_λ = ψ_{2λ} puts the ket at λ = 2⁻¹ = 3.
        assert_eq!(s.entries[(3, 1)], c(1.0, 0.0));
        // Only |0⟩ is fixed for ς ≠ 1.
        let fixed: Vec<usize> =
            (0..5).filter(|&i| s.entries[(i, i)] == c(1.0, 0.0)).collect();
        assert_eq!(fixed, vec![0]);
        assert!(matches!(
            squeeze_operator(&ctx, &ctx.zero()),
            Err(QpsError::ZeroSqueeze)
        ));
    }

    #[test]
    fn squeeze_conjugation_rules() {
        // S U_ν S† = U_{νς⁻¹} and S V_μ S† = V_{μς}.
        let ctx = make_field(7, 1, None).unwrap();
        let zeta = ctx.element_from_index(3).unwrap();
        let s = squeeze_operator(&ctx, &zeta).unwrap();
        let zinv = ctx.invert(&zeta).unwrap();
        for a in ctx.elements() {
            let u = generator_u(&ctx, &a).unwrap();
            let con = s.mul(&u).unwrap().mul(&s.dagger()).unwrap();
            let expect = generator_u(&ctx, &ctx.mul(&a, &zinv).unwrap()).unwrap();
            assert!(con.max_abs_diff(&expect) < 1e-12);

            let v = generator_v(&ctx, &a).unwrap();
            let con = s.mul(&v).unwrap().mul(&s.dagger()).unwrap();
            let expect = generator_v(&ctx, &ctx.mul(&a, &zeta).unwrap()).unwrap();
            assert!(con.max_abs_diff(&expect) < 1e-12);
        }
    }

    #[test]
    fn harper_is_hermitian_and_fourier_invariant() {
        let h = harper_hamiltonian(7).unwrap();
        assert!(h.tags.hermitian);
        let ctx = make_field(7, 1, None).unwrap();
        let f = fourier(&ctx).unwrap();
        let conj = f.mul(&h).unwrap().mul(&f.dagger()).unwrap();
        assert!(conj.max_abs_diff(&h) < 1e-12, "[H, F] ≠ 0");
        assert!(matches!(harper_hamiltonian(4), Err(QpsError::NotPrime(4))));
    }

    #[test]
    fn displacement_factorizes_over_selfdual_basis() {
        for (d, n, poly) in [(2u64, 3usize, None), (3, 3, Some("x^3+2x^2+1"))] {
            let ctx = make_field(d, n, poly).unwrap();
            let sd = ctx.find_selfdual_basis().unwrap().basis;
            let perm = coordinate_permutation(&ctx, &sd).unwrap();
            let mu = ctx.sigma_pow(4);
            let nu = ctx.sigma_pow(2);
            let p = PhasePoint::new(mu, nu);
            let dd = displacement(&ctx, &p).unwrap();
            let factors = factorize_displacement(&ctx, &p, &sd).unwrap();
            assert_eq!(factors.len(), n);
            let kron = kron_all(&factors).unwrap();
            let conj = perm.mul(&dd).unwrap().mul(&perm.dagger()).unwrap();
            assert!(kron.max_abs_diff(&conj) < 1e-12, "factorization fails at GF({d}^{n})");
        }
    }

    #[test]
    fn factorize_rejects_non_selfdual() {
        let ctx = make_field(2, 2, None).unwrap();
        let pb = ctx.polynomial_basis();
        let p = PhasePoint::new(ctx.sigma(), ctx.one());
        assert!(matches!(
            factorize_displacement(&ctx, &p, &pb),
            Err(QpsError::NotSelfdual(_))
        ));
    }

    #[test]
    fn basis_change_is_permutation() {
        let ctx = make_field(2, 2, None).unwrap();
        let s = ctx.sigma();
        let s3 = ctx.sigma_pow(3);
        let s2 = ctx.sigma_pow(2);
        let from = ctx.basis_from_elements(BasisKind::Custom, &[s, s3]).unwrap();
        let to = ctx.basis_from_elements(BasisKind::Selfdual, &[s, s2]).unwrap();
        let t = basis_change_operator(&ctx, &from, &to).unwrap();
        assert!(t.tags.unitary);
        // Internal (big-endian coordinate) form: swaps indices 1 and 3.
        let mut expect = DMatrix::<Complex64>::zeros(4, 4);
        expect[(0, 0)] = c(1.0, 0.0);
        expect[(1, 3)] = c(1.0, 0.0);
        expect[(2, 2)] = c(1.0, 0.0);
        expect[(3, 1)] = c(1.0, 0.0);
        assert!(max_abs_diff(&t.entries, &expect) < 1e-15);
    }
}
