//! s-parametrized quasidistributions on the d^n × d^n phase-space grid.
//!
//! For discrete systems the ordering parameter takes only the three values
//! `s = +1, 0, −1` (P, Wigner, Q). The generating object is the
//! hermitian s-ordered kernel, a symplectic Fourier transform of the
//! displacement family weighted by fiducial overlaps:
//!
//! ```text
//! w^{(s)}(μ,ν) = (1/d^n) Σ_{κ,λ} χ(μλ − νκ) ⟨Ψ₀|D(κ,λ)|Ψ₀⟩^{−s} D(κ,λ)
//! ```
//!
//! with `Ψ₀` the canonical fiducial (reference) state. The phase
//! convention is pinned by two requirements — displacement covariance
//! `D(μ,ν) w^{(s)}(0,0) D†(μ,ν) = w^{(s)}(μ,ν)` and, for s = 0 in odd
//! characteristic, `w^{(0)}(0,0) = parity` — which single out
//! `χ(μλ − νκ)` with the `D = φ U_ν V_μ` convention of [`crate::operators`].
//!
//! Quasidistributions are `W^{(s)}_ρ(μ,ν) = Tr[ρ w^{(s)}(μ,ν)]`, inverted
//! by `ρ = (1/d^n) Σ w^{(−s)}(μ,ν) W^{(s)}(μ,ν)` via the trace
//! orthogonality `Tr[w^{(s)}(p) w^{(−s)}(p′)] = d^n δ_{pp′}`. Grids carry
//! *raw* normalization `Σ W = d^n · Tr ρ`; marginals divide by d^n.
//! See Wootters, Ann. Phys. 176, 1 (1987); Gibbons, Hoffman & Wootters,
//! Phys. Rev. A 70, 062101 (2004); Vourdas, Rep. Prog. Phys. 67, 267
//! (2004) for the line/striation view that the [`line_sum`] diagnostics
//! connect to.
//!
//! Grid evaluation is deliberately sequential and transform-based (two
//! dense character-matrix products), so results are deterministic and
//! bit-identical run to run.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::field::{FieldContext, FieldElement};
use crate::operators::{displacement_phase, Operator, PhasePoint};
use crate::states::{canonical_fiducial, displaced_amplitudes, StateVector};
use crate::{QpsError, Result};

/// Regularity threshold on fiducial overlaps for the s = +1 family.
///
/// Dimensions where some `|⟨Ψ₀|D(κ,λ)|Ψ₀⟩|` falls at or below this bound
/// are reported as singular ([`QpsError::SingularPKernel`]), never
/// silently patched.
pub const P_SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Calibrated scale between [`q_function`] (direct coherent-state
/// overlaps) and `quasidist(ρ, s = −1)`.
///
/// The continuous analog carries a 1/π; on the discrete grid the two
/// constructions agree with scale exactly 1, calibrated numerically at
/// d = 3 (and holding to ~1e−16 at every tested dimension).
pub const Q_FUNCTION_SCALE: f64 = 1.0;

/// The discrete ordering parameter: s ∈ {+1, 0, −1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SOrder {
    /// s = +1 (P function; singular when fiducial overlaps vanish).
    P,
    /// s = 0 (Wigner function).
    W,
    /// s = −1 (Q / Husimi function).
    Q,
}

impl SOrder {
    /// The integer value of s.
    pub fn s(self) -> i32 {
        match self {
            SOrder::P => 1,
            SOrder::W => 0,
            SOrder::Q => -1,
        }
    }

    /// Parse from an integer; only {−1, 0, +1} are admissible.
    pub fn from_s(s: i32) -> Result<Self> {
        match s {
            1 => Ok(SOrder::P),
            0 => Ok(SOrder::W),
            -1 => Ok(SOrder::Q),
            other => Err(QpsError::Format(format!(
                "s must be one of -1, 0, +1; got {other}"
            ))),
        }
    }

    /// The opposite ordering (−s), used by reconstruction.
    pub fn dual(self) -> Self {
        match self {
            SOrder::P => SOrder::Q,
            SOrder::W => SOrder::W,
            SOrder::Q => SOrder::P,
        }
    }
}

/// Normalization convention of a stored grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `Σ values = d^n · Tr ρ` — preserves all algebraic identities.
    Raw,
    /// Values divided by the raw total, for probability readings.
    UnitSum,
}

/// Marginal direction; the axis ↔ basis assignment is a frozen convention
/// calibrated against projector states at d = 3 (see [`marginal`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginalAxis {
    /// Collapse the first (μ) index: yields the computational-basis
    /// ("position") distribution over ν.
    Horizontal,
    /// Collapse the second (ν) index: yields the conjugate-basis
    /// ("momentum") distribution over μ, i.e. probabilities in the
    /// Fourier-transformed basis.
    Vertical,
}

/// A quasidistribution on the full grid, indexed `[μ, ν]` in canonical
/// element order.
///
/// Values are stored real: for hermitian input the grid is real for every
/// admissible s, and the largest imaginary residual encountered while
/// evaluating is recorded in `max_imag` (diagnostic, asserted < 1e−10 by
/// the verification suite, never silently clamped above that).
#[derive(Clone, Debug)]
pub struct QuasiDistGrid {
    pub dim: usize,
    pub values: DMatrix<f64>,
    pub s: SOrder,
    pub normalization: Normalization,
    pub max_imag: f64,
}

impl QuasiDistGrid {
    /// Total of all values (raw grids: d^n · Tr ρ).
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Unit-sum view of a raw grid.
    pub fn unit_sum(&self) -> QuasiDistGrid {
        let total = self.total();
        QuasiDistGrid {
            dim: self.dim,
            values: &self.values / total,
            s: self.s,
            normalization: Normalization::UnitSum,
            max_imag: self.max_imag,
        }
    }
}

/// An s-ordered kernel at one phase-space point.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub point: PhasePoint,
    pub s: SOrder,
    pub op: Operator,
}

/// Table of fiducial displacement overlaps `⟨fid|D(κ,λ)|fid⟩`, indexed
/// `[κ, λ]`.
pub fn displacement_overlaps(
    ctx: &FieldContext,
    fid: &StateVector,
) -> Result<DMatrix<Complex64>> {
    if fid.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "fiducial dim {} vs field dim {}",
            fid.dim,
            ctx.dim()
        )));
    }
    let q = ctx.dim();
    let mut ov = DMatrix::zeros(q, q);
    for kappa in ctx.elements() {
        for lambda in ctx.elements() {
            let p = PhasePoint::new(kappa, lambda);
            let phi = displacement_phase(ctx, &p)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for x in ctx.elements() {
                let row = ctx.add(&x, &lambda)?.index() as usize;
                acc += fid.amps[row].conj()
                    * ctx.character(&ctx.mul(&kappa, &x)?)?
                    * fid.amps[x.index() as usize];
            }
            ov[(kappa.index() as usize, lambda.index() as usize)] = phi * acc;
        }
    }
    Ok(ov)
}

/// Elementwise `ov^{−s}`, with the P-family regularity check.
fn overlap_powers(ov: &DMatrix<Complex64>, s: SOrder) -> Result<DMatrix<Complex64>> {
    match s {
        SOrder::W => Ok(DMatrix::from_element(ov.nrows(), ov.ncols(), Complex64::new(1.0, 0.0))),
        SOrder::Q => Ok(ov.clone()),
        SOrder::P => {
            let min = ov.iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
            if min <= P_SINGULARITY_THRESHOLD {
                return Err(QpsError::SingularPKernel { min_overlap: min });
            }
            Ok(ov.map(|v| v.inv()))
        }
    }
}

/// Character matrix `A[a, b] = χ(ab)` (symmetric).
fn char_matrix(ctx: &FieldContext) -> DMatrix<Complex64> {
    let q = ctx.dim();
    DMatrix::from_fn(q, q, |a, b| ctx.pair_char(a as u64, b as u64))
}

/// The s-ordered kernel at a phase-space point for an explicit fiducial.
///
/// `w^{(s)}(μ,ν) = (1/d^n) Σ_{κλ} χ(μλ − νκ) ov^{−s}(κ,λ) D(κ,λ)`;
/// hermitian, unit trace, and displacement-covariant. At the origin with
/// s = 0 and odd characteristic it equals the parity operator.
pub fn kernel(
    ctx: &FieldContext,
    s: SOrder,
    p: &PhasePoint,
    fid: &StateVector,
) -> Result<Kernel> {
    let q = ctx.dim();
    let ov = displacement_overlaps(ctx, fid)?;
    let ovp = overlap_powers(&ov, s)?;
    let mut m = DMatrix::<Complex64>::zeros(q, q);
    let inv_q = 1.0 / q as f64;
    for kappa in ctx.elements() {
        for lambda in ctx.elements() {
            let phase = ctx
                .character(&ctx.sub(
                    &ctx.mul(&p.mu, &lambda)?,
                    &ctx.mul(&p.nu, &kappa)?,
                )?)?;
            let coeff = phase
                * ovp[(kappa.index() as usize, lambda.index() as usize)]
                * displacement_phase(ctx, &PhasePoint::new(kappa, lambda))?
                * inv_q;
            for x in ctx.elements() {
                let row = ctx.add(&x, &lambda)?.index() as usize;
                m[(row, x.index() as usize)] +=
                    coeff * ctx.character(&ctx.mul(&kappa, &x)?)?;
            }
        }
    }
    Ok(Kernel { point: *p, s, op: Operator::new(m)? })
}

/// `Tr[ρ D(κ,λ)]` for all (κ,λ) — the D-spectrum of ρ, O(q³).
fn displacement_spectrum(ctx: &FieldContext, rho: &Operator) -> Result<DMatrix<Complex64>> {
    let q = ctx.dim();
    let mut t = DMatrix::zeros(q, q);
    for kappa in ctx.elements() {
        for lambda in ctx.elements() {
            let phi = displacement_phase(ctx, &PhasePoint::new(kappa, lambda))?;
            let mut acc = Complex64::new(0.0, 0.0);
            for x in ctx.elements() {
                let col = ctx.add(&x, &lambda)?.index() as usize;
                acc += rho.entries[(x.index() as usize, col)]
                    * ctx.character(&ctx.mul(&kappa, &x)?)?;
            }
            t[(kappa.index() as usize, lambda.index() as usize)] = phi * acc;
        }
    }
    Ok(t)
}

/// The s-parametrized quasidistribution of a hermitian operator over the
/// canonical fiducial: `W^{(s)}(μ,ν) = Tr[ρ w^{(s)}(μ,ν)]`, raw
/// normalization.
///
/// Evaluated through the double character transform of the weighted
/// D-spectrum (two q×q matrix products) rather than point by point, which
/// is both O(q³) and exactly deterministic.
pub fn quasidist(ctx: &FieldContext, rho: &Operator, s: SOrder) -> Result<QuasiDistGrid> {
    if rho.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "operator dim {} vs field dim {}",
            rho.dim,
            ctx.dim()
        )));
    }
    if !rho.tags.hermitian {
        return Err(QpsError::NotHermitian);
    }
    let fid = canonical_fiducial(ctx)?;
    let ov = displacement_overlaps(ctx, &fid)?;
    let ovp = overlap_powers(&ov, s)?;
    let t = displacement_spectrum(ctx, rho)?;
    let m = ovp.component_mul(&t);
    let a = char_matrix(ctx);
    let w_complex = (a.map(|v| v.conj()) * &m * &a).transpose() / Complex64::new(ctx.dim() as f64, 0.0);
    let mut max_imag = 0.0f64;
    let values = DMatrix::from_fn(ctx.dim(), ctx.dim(), |i, j| {
        let v = w_complex[(i, j)];
        max_imag = max_imag.max(v.im.abs());
        v.re
    });
    Ok(QuasiDistGrid {
        dim: ctx.dim(),
        values,
        s,
        normalization: Normalization::Raw,
        max_imag,
    })
}

/// Invert a raw grid back to the operator:
/// `ρ = (1/d^n) Σ_{μν} W^{(s)}(μ,ν) w^{(−s)}(μ,ν)`.
///
/// Inverting an s = −1 (Q) grid involves the s = +1 kernel family, so the
/// P-regularity condition applies there.
pub fn reconstruct(ctx: &FieldContext, grid: &QuasiDistGrid) -> Result<Operator> {
    if grid.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "grid dim {} vs field dim {}",
            grid.dim,
            ctx.dim()
        )));
    }
    if grid.normalization != Normalization::Raw {
        return Err(QpsError::Format(
            "reconstruct requires a raw-normalized grid".into(),
        ));
    }
    let q = ctx.dim();
    let fid = canonical_fiducial(ctx)?;
    let ov = displacement_overlaps(ctx, &fid)?;
    // w^{(−s)} carries ov^{+s}.
    let ovp = overlap_powers(&ov, grid.s.dual())?;
    let w = grid.values.map(|v| Complex64::new(v, 0.0));
    let a = char_matrix(ctx);
    // B[κ,λ] = Σ_{μν} χ(μλ) χ(−νκ) W[μ,ν]
    let b = (&a * &w * a.map(|v| v.conj())).transpose();
    let mut rho = DMatrix::<Complex64>::zeros(q, q);
    let inv_q2 = 1.0 / (q as f64 * q as f64);
    for kappa in ctx.elements() {
        for lambda in ctx.elements() {
            let ki = kappa.index() as usize;
            let li = lambda.index() as usize;
            let coeff = ovp[(ki, li)]
                * b[(ki, li)]
                * displacement_phase(ctx, &PhasePoint::new(kappa, lambda))?
                * inv_q2;
            for x in ctx.elements() {
                let row = ctx.add(&x, &lambda)?.index() as usize;
                rho[(row, x.index() as usize)] +=
                    coeff * ctx.character(&ctx.mul(&kappa, &x)?)?;
            }
        }
    }
    Operator::new(rho)
}

/// The Q function by direct coherent-state overlaps:
/// `Q(μ,ν) = ⟨μ,ν|ρ|μ,ν⟩ · Q_FUNCTION_SCALE`.
///
/// Equals `quasidist(ρ, s = −1)` exactly (see [`Q_FUNCTION_SCALE`]).
pub fn q_function(ctx: &FieldContext, rho: &Operator) -> Result<QuasiDistGrid> {
    if rho.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "operator dim {} vs field dim {}",
            rho.dim,
            ctx.dim()
        )));
    }
    if !rho.tags.hermitian {
        return Err(QpsError::NotHermitian);
    }
    let q = ctx.dim();
    let fid = canonical_fiducial(ctx)?;
    let mut values = DMatrix::zeros(q, q);
    let mut max_imag = 0.0f64;
    for mu in ctx.elements() {
        for nu in ctx.elements() {
            let coh = displaced_amplitudes(ctx, &PhasePoint::new(mu, nu), &fid.amps)?;
            let v = coh.dotc(&(&rho.entries * &coh)) * Q_FUNCTION_SCALE;
            max_imag = max_imag.max(v.im.abs());
            values[(mu.index() as usize, nu.index() as usize)] = v.re;
        }
    }
    Ok(QuasiDistGrid {
        dim: q,
        values,
        s: SOrder::Q,
        normalization: Normalization::Raw,
        max_imag,
    })
}

/// Sum of a Wigner grid over the line `ν = αμ + β`, or over the vertical
/// line `μ = β` when `vertical` is set.
pub fn line_sum(
    ctx: &FieldContext,
    grid: &QuasiDistGrid,
    alpha: &FieldElement,
    beta: &FieldElement,
    vertical: bool,
) -> Result<f64> {
    if grid.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "grid dim {} vs field dim {}",
            grid.dim,
            ctx.dim()
        )));
    }
    if grid.s != SOrder::W {
        return Err(QpsError::NotWignerGrid);
    }
    if vertical {
        let bi = beta.index() as usize;
        return Ok((0..grid.dim).map(|nu| grid.values[(bi, nu)]).sum());
    }
    let mut acc = 0.0;
    for mu in ctx.elements() {
        let nu = ctx.add(&ctx.mul(alpha, &mu)?, beta)?;
        acc += grid.values[(mu.index() as usize, nu.index() as usize)];
    }
    Ok(acc)
}

/// Marginal of a raw Wigner grid of a density matrix: sums one index and
/// divides by d^n.
///
/// Calibration (frozen against projector states at d = 3):
/// [`MarginalAxis::Horizontal`] collapses μ and returns the
/// computational-basis distribution `⟨ν|ρ|ν⟩`;
/// [`MarginalAxis::Vertical`] collapses ν and returns the conjugate-basis
/// distribution `⟨μ̃|ρ|μ̃⟩` with `|μ̃⟩ = F|μ⟩`.
pub fn marginal(grid: &QuasiDistGrid, axis: MarginalAxis) -> Result<Vec<f64>> {
    if grid.s != SOrder::W {
        return Err(QpsError::NotWignerGrid);
    }
    let q = grid.dim;
    let scale = 1.0 / q as f64;
    let out = match axis {
        MarginalAxis::Horizontal => (0..q)
            .map(|nu| (0..q).map(|mu| grid.values[(mu, nu)]).sum::<f64>() * scale)
            .collect(),
        MarginalAxis::Vertical => (0..q)
            .map(|mu| (0..q).map(|nu| grid.values[(mu, nu)]).sum::<f64>() * scale)
            .collect(),
    };
    Ok(out)
}

/// A closed-form theta-sum evaluation of the reference-state Wigner grid,
/// kept as a numerical cross-check only.
///
/// The transcribed expression is suspected to carry a misprint (a missing
/// −π/d scale and ambiguous parenthesization in one exponent), so
/// [`closed_form_cross_check`] *reports* its deviation from the
/// definitional `quasidist` grid; the closed form is never used as ground
/// truth anywhere in the crate.
pub fn closed_form_reference_wigner(d: u64) -> Result<DMatrix<f64>> {
    let r = crate::states::reference_state(d)?;
    let c = r.params.c;
    let df = d as f64;
    let qd = d as usize;
    let t_window = 6i64;
    let mut out = DMatrix::zeros(qd, qd);
    for m in 0..qd as i64 {
        for n in 0..qd as i64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..qd as i64 {
                let phase_arg =
                    2.0 * std::f64::consts::PI * (((2 * k - 1 - 2 * m) * n) as f64) / df;
                let phase = Complex64::new(phase_arg.cos(), phase_arg.sin());
                let mut radial = 0.0;
                for p in -t_window..=t_window {
                    for qq in -t_window..=t_window {
                        let a1 = (-k + 2 * m) as f64 + (qq * d as i64) as f64
                            - (df - 1.0) / 2.0;
                        let a2 = k as f64 + (p * d as i64) as f64 - df / 2.0;
                        radial += (-a1 * a1).exp()
                            * (-std::f64::consts::PI / df * a2 * a2).exp();
                    }
                }
                acc += phase * radial;
            }
            out[(m as usize, n as usize)] = (df / c) * acc.re;
        }
    }
    Ok(out)
}

/// Max-norm deviation between [`closed_form_reference_wigner`] and the
/// definitional Wigner grid of the reference state. Reported, not
/// asserted: the closed form is a known-discrepant transcription.
pub fn closed_form_cross_check(d: u64) -> Result<f64> {
    let ctx = crate::field::make_field(d, 1, None)?;
    let psi = crate::states::reference_state(d)?.state;
    let rho = psi.projector()?;
    let grid = quasidist(&ctx, &rho, SOrder::W)?;
    let closed = closed_form_reference_wigner(d)?;
    let mut dev = 0.0f64;
    for i in 0..grid.dim {
        for j in 0..grid.dim {
            dev = dev.max((grid.values[(i, j)] - closed[(i, j)]).abs());
        }
    }
    Ok(dev)
}
