//! `qps verify` — recompute the library's invariant suite at configured
//! dimensions and report machine-readably. Exit is 0 iff every check
//! passes; informational notes (cross-checks, analytic context for
//! failures) never affect the exit code.
//!
//! Default dimensions are every prime power d^n ≤ 27 with d ≤ 7. Passing
//! `--dims 31` adds the d = 31 block: Fourier invariance, the Harper
//! ground-state diagnostics, the Q-function symmetry, and the
//! uncertainty-product bound. The bound check is asserted exactly as
//! stated (product ≥ π²/d²) and is expected to fail: the measured product
//! is (1 − e^{−π/d})²(1 + exponentially small), which approaches π²/d²
//! from *below* as d → ∞ — the accompanying note records the analysis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use qps_core::io::{
    grid_from_csv, grid_from_json, grid_to_csv, grid_to_json, ordering_dlog, state_from_json,
    state_to_json,
};
use qps_core::states::expectation;
use qps_core::*;

/// One verification outcome.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub scope: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Full machine-readable report.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub dims: Vec<String>,
    pub checks: Vec<CheckOutcome>,
    pub notes: Vec<String>,
    pub passed: bool,
}

/// Options resolved from the CLI flags.
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub dims: Option<Vec<(u64, usize)>>,
    pub state_file: Option<String>,
    pub tol: Option<f64>,
}

/// Default dimension set: prime powers d^n ≤ 27, d ≤ 7.
pub fn default_dims() -> Vec<(u64, usize)> {
    vec![
        (2, 1),
        (3, 1),
        (5, 1),
        (7, 1),
        (2, 2),
        (3, 2),
        (2, 3),
        (5, 2),
        (2, 4),
        (3, 3),
    ]
}

/// Parse `--dims` text: comma-separated `d` or `d^n` entries.
pub fn parse_dims(text: &str) -> Result<Vec<(u64, usize)>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (d, n) = match part.split_once('^') {
            Some((d, n)) => (
                d.trim().parse::<u64>().map_err(bad_dims(part))?,
                n.trim().parse::<usize>().map_err(bad_dims(part))?,
            ),
            None => (part.parse::<u64>().map_err(bad_dims(part))?, 1),
        };
        out.push((d, n));
    }
    if out.is_empty() {
        return Err(QpsError::Format("empty --dims list".into()));
    }
    Ok(out)
}

fn bad_dims(part: &str) -> impl Fn(std::num::ParseIntError) -> QpsError + '_ {
    move |_| QpsError::Format(format!("bad dims entry {part:?} (want d or d^n)"))
}

type Check = std::result::Result<String, String>;

struct Harness {
    checks: Vec<CheckOutcome>,
    notes: Vec<String>,
}

impl Harness {
    fn record(&mut self, scope: &str, name: &str, outcome: Check) {
        let (pass, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckOutcome {
            scope: scope.into(),
            name: name.into(),
            pass,
            detail,
        });
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }
}

/// Deterministic pseudo-random hermitian unit-trace operator (no RNG
/// dependency; fixed across runs and platforms).
fn lcg_density(dim: usize, mut seed: u64) -> Operator {
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = Complex64::new(next(), next());
        }
    }
    let h = (&m + m.adjoint()) / Complex64::new(2.0, 0.0);
    let p = &h + DMatrix::identity(dim, dim) * Complex64::new(2.0 * dim as f64, 0.0);
    let tr = p.trace();
    Operator::new(p / tr).expect("hermitian by construction")
}

fn sampled(ctx: &FieldContext, count: usize) -> Vec<FieldElement> {
    let q = ctx.dim();
    let stride = (q / count.max(1)).max(1);
    (0..q)
        .step_by(stride)
        .map(|i| ctx.element_from_index(i as u64).unwrap())
        .collect()
}

fn fmt_dev(dev: f64) -> String {
    format!("max dev {dev:.2e}")
}

fn gate(dev: f64, tol: f64, what: &str) -> Check {
    if dev <= tol {
        Ok(format!("{what}: {}", fmt_dev(dev)))
    } else {
        Err(format!("{what}: {} exceeds tol {tol:.1e}", fmt_dev(dev)))
    }
}

// ---------------------------------------------------------------------------
// Per-dimension checks
// ---------------------------------------------------------------------------

fn c_field_tables(ctx: &FieldContext) -> Check {
    let q = ctx.dim() as u64;
    for a in ctx.elements() {
        if !a.is_zero() {
            let inv = ctx.invert(&a).map_err(|e| e.to_string())?;
            if ctx.mul(&a, &inv).unwrap().index() != ctx.one().index() {
                return Err(format!("a·a⁻¹ ≠ 1 at index {}", a.index()));
            }
        }
        for b in ctx.elements() {
            let frob_sum = ctx.pow(&ctx.add(&a, &b).unwrap(), ctx.d()).unwrap();
            let sum_frob = ctx
                .add(&ctx.pow(&a, ctx.d()).unwrap(), &ctx.pow(&b, ctx.d()).unwrap())
                .unwrap();
            if frob_sum.index() != sum_frob.index() {
                return Err("Frobenius not additive".into());
            }
        }
    }
    // Character orthogonality: Σ_λ χ(μλ) = q δ_{μ,0}.
    let mut worst = 0.0f64;
    for mu in ctx.elements() {
        let mut acc = Complex64::new(0.0, 0.0);
        for lam in ctx.elements() {
            acc += ctx.character(&ctx.mul(&mu, &lam).unwrap()).unwrap();
        }
        let expect = if mu.is_zero() { q as f64 } else { 0.0 };
        worst = worst.max((acc - Complex64::new(expect, 0.0)).norm());
    }
    gate(worst, 1e-9, "inverses, Frobenius, character orthogonality")
}

fn c_dual_and_selfdual(ctx: &FieldContext) -> Check {
    let pb = ctx.polynomial_basis();
    let dual = ctx.dual_basis(&pb.elements).map_err(|e| e.to_string())?;
    for (i, ei) in dual.iter().enumerate() {
        for (j, tj) in pb.elements.iter().enumerate() {
            let tr = ctx.trace(&ctx.mul(ei, tj).unwrap()).unwrap();
            let expect = u64::from(i == j);
            if tr != expect {
                return Err(format!("dual Gram wrong at ({i},{j}): {tr}"));
            }
        }
    }
    let sd = ctx.find_selfdual_basis().map_err(|e| e.to_string())?;
    for (i, ei) in sd.basis.elements.iter().enumerate() {
        for (j, ej) in sd.basis.elements.iter().enumerate() {
            let tr = ctx.trace(&ctx.mul(ei, ej).unwrap()).unwrap();
            let expect = if i == j { sd.gram_diag[i] } else { 0 };
            if tr != expect {
                return Err(format!("selfdual Gram wrong at ({i},{j}): {tr}"));
            }
        }
    }
    Ok(format!("dual exact; {} basis Gram as tagged", sd.basis.kind))
}

fn c_weyl(ctx: &FieldContext, tol: f64) -> Check {
    let q = ctx.dim();
    let pts = if q <= 27 { ctx.elements().collect::<Vec<_>>() } else { sampled(ctx, 8) };
    let mut worst = 0.0f64;
    for mu in &pts {
        let v = generator_v(ctx, mu).unwrap();
        for nu in &pts {
            let u = generator_u(ctx, nu).unwrap();
            let chi = ctx.character(&ctx.mul(mu, nu).unwrap()).unwrap();
            let lhs = v.mul(&u).unwrap();
            let rhs_m = u.mul(&v).unwrap().entries.map(|x| x * chi);
            let dev = (&lhs.entries - &rhs_m).map(|x| x.norm()).max();
            worst = worst.max(dev);
        }
    }
    gate(worst, tol, &format!("V U = χ(μν) U V over {}² points", pts.len()))
}

fn c_fourier(ctx: &FieldContext, tol: f64) -> Check {
    let f = fourier(ctx).unwrap();
    if !f.tags.unitary {
        return Err("F not unitary".into());
    }
    let f2 = f.mul(&f).unwrap();
    let par = parity_permutation(ctx).unwrap();
    let mut worst = f2.max_abs_diff(&par);
    let f4 = f2.mul(&f2).unwrap();
    let id = Operator::new(DMatrix::identity(ctx.dim(), ctx.dim())).unwrap();
    worst = worst.max(f4.max_abs_diff(&id));
    for nu in ctx.elements() {
        let u = generator_u(ctx, &nu).unwrap();
        let v = generator_v(ctx, &nu).unwrap();
        let conj = f.mul(&u).unwrap().mul(&f.dagger()).unwrap();
        worst = worst.max(conj.max_abs_diff(&v));
    }
    gate(worst, tol, "F unitary, F²=parity, F⁴=1, FU F†=V")
}

fn c_displacement(ctx: &FieldContext, tol: f64) -> Check {
    let pts = sampled(ctx, 6);
    let mut worst = 0.0f64;
    for mu in &pts {
        for nu in &pts {
            let p = PhasePoint::new(*mu, *nu);
            let dop = displacement(ctx, &p).unwrap();
            if !dop.tags.unitary {
                return Err(format!("D not unitary at ({},{})", mu.index(), nu.index()));
            }
            let neg = PhasePoint::new(ctx.neg(mu).unwrap(), ctx.neg(nu).unwrap());
            let dneg = displacement(ctx, &neg).unwrap();
            worst = worst.max(dop.dagger().max_abs_diff(&dneg));
            if ctx.d() == 2 {
                // Characteristic 2: D hermitian and involutive.
                worst = worst.max(dop.max_abs_diff(&dop.dagger()));
                let sq = dop.mul(&dop).unwrap();
                let id = Operator::new(DMatrix::identity(ctx.dim(), ctx.dim())).unwrap();
                worst = worst.max(sq.max_abs_diff(&id));
            }
        }
    }
    gate(worst, tol, "D unitary, D† = D(−p), char-specific phases")
}

fn c_parity_average(ctx: &FieldContext, tol: f64) -> Check {
    let avg = parity_from_displacements(ctx).map_err(|e| e.to_string())?;
    let par = parity_permutation(ctx).unwrap();
    gate(avg.max_abs_diff(&par), tol, "d^{-n} Σ D = parity")
}

fn c_factorization(ctx: &FieldContext, tol: f64) -> Check {
    let sd = ctx.find_selfdual_basis().map_err(|e| e.to_string())?;
    if sd.gram_diag.iter().any(|&c| c != 1) {
        return Ok("skipped: no strictly selfdual basis".into());
    }
    let pts = sampled(ctx, 5);
    let mut worst = 0.0f64;
    for mu in &pts {
        for nu in &pts {
            let p = PhasePoint::new(*mu, *nu);
            let whole = displacement(ctx, &p).unwrap();
            let parts = factorize_displacement(ctx, &p, &sd.basis).map_err(|e| e.to_string())?;
            let perm = coordinate_permutation(ctx, &sd.basis).unwrap();
            let kron = kron_all(&parts).unwrap();
            let conj = perm.mul(&whole).unwrap().mul(&perm.dagger()).unwrap();
            worst = worst.max(kron.max_abs_diff(&conj));
        }
    }
    gate(worst, tol, "D = Π ⊗ D_j over selfdual coordinates")
}

fn c_reference_state(ctx: &FieldContext, tol: f64) -> Check {
    let psi = canonical_fiducial(ctx).map_err(|e| e.to_string())?;
    let mut worst = (psi.amps.norm() - 1.0).abs();
    let f = fourier(ctx).unwrap();
    let fpsi = psi.apply(&f).unwrap();
    let d = ctx.d();
    let sd = ctx.find_selfdual_basis().map_err(|e| e.to_string())?;
    let twisted = sd.gram_diag.iter().any(|&c| c % d != 1 && c % d != d - 1);
    let mut f_mode = "F-invariance";
    if !twisted {
        // All Gram entries ±1: F acts coordinatewise as the plain (or
        // parity-conjugated) DFT, both of which fix the single-qudit
        // reference, so the product fiducial is strictly F-invariant.
        worst = worst.max((&fpsi.amps - &psi.amps).norm());
    } else {
        // Almost-selfdual Gram diag(1,…,c) with c ≢ ±1 (first at GF(5²)):
        // the trace form gives tr(μλ) = Σ_j G_j m_j n_j exactly, so
        // F = ⊗_j F_{G_j} in these coordinates and the fiducial maps to
        // the product of twisted DFT images — covariance, not invariance.
        f_mode = "twisted F-covariance";
        let single = reference_state(d).map_err(|e| e.to_string())?.state;
        let df = d as f64;
        let omega = |e: i64| {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / df)
        };
        let images: Vec<Vec<Complex64>> = sd
            .gram_diag
            .iter()
            .map(|&c| {
                (0..d)
                    .map(|m| {
                        (0..d)
                            .map(|n| omega((c * m * n % d) as i64) * single.amps[n as usize])
                            .sum::<Complex64>()
                            / df.sqrt()
                    })
                    .collect()
            })
            .collect();
        for mu in ctx.elements() {
            let coords = ctx.expand(&mu, &sd.basis).unwrap();
            let expect: Complex64 = coords
                .iter()
                .enumerate()
                .map(|(j, &m)| images[j][m as usize])
                .product();
            worst = worst.max((fpsi.amps[mu.index() as usize] - expect).norm());
        }
    }
    // Parity symmetry of the single-qudit amplitudes (odd d).
    if ctx.d() % 2 == 1 {
        let c = reference_state(ctx.d()).map_err(|e| e.to_string())?.state;
        for l in 1..ctx.d() as usize {
            if c.amps[l] != c.amps[ctx.d() as usize - l] {
                return Err(format!("c_ℓ ≠ c_(−ℓ) at ℓ={l}"));
            }
        }
    }
    for p in [
        PhasePoint::new(ctx.sigma(), ctx.zero()),
        PhasePoint::new(ctx.zero(), ctx.sigma()),
        PhasePoint::new(ctx.sigma(), ctx.sigma()),
    ] {
        let coh = coherent_state(ctx, &p).unwrap();
        worst = worst.max((coh.amps.norm() - 1.0).abs());
    }
    gate(worst, tol, &format!("fiducial norm, {f_mode}, c-symmetry, coherent norms"))
}

fn c_squeeze(ctx: &FieldContext, tol: f64) -> Check {
    let mut worst = 0.0f64;
    let zetas: Vec<FieldElement> = (1..ctx.dim() as u64).step_by(2).take(4).map(|k| ctx.sigma_pow(k)).collect();
    for zeta in &zetas {
        let s = squeeze_operator(ctx, zeta).unwrap();
        if !s.tags.unitary {
            return Err("S not unitary".into());
        }
        let zinv = ctx.invert(zeta).unwrap();
        for nu in sampled(ctx, 4) {
            let u = generator_u(ctx, &nu).unwrap();
            let conj = s.mul(&u).unwrap().mul(&s.dagger()).unwrap();
            let target = generator_u(ctx, &ctx.mul(&nu, &zinv).unwrap()).unwrap();
            worst = worst.max(conj.max_abs_diff(&target));
            let v = generator_v(ctx, &nu).unwrap();
            let conj_v = s.mul(&v).unwrap().mul(&s.dagger()).unwrap();
            let target_v = generator_v(ctx, &ctx.mul(&nu, zeta).unwrap()).unwrap();
            worst = worst.max(conj_v.max_abs_diff(&target_v));
        }
    }
    gate(worst, tol, "S unitary; S U S† = U_{νς⁻¹}, S V S† = V_{μς}")
}

/// Minimum fiducial displacement overlap, deciding P-family regularity.
fn min_overlap(ctx: &FieldContext) -> Result<f64> {
    let fid = canonical_fiducial(ctx)?;
    let ov = displacement_overlaps(ctx, &fid)?;
    Ok(ov.iter().fold(f64::INFINITY, |m, v| m.min(v.norm())))
}

fn c_p_regularity(ctx: &FieldContext) -> Check {
    let min = min_overlap(ctx).map_err(|e| e.to_string())?;
    let fid = canonical_fiducial(ctx).unwrap();
    let origin = PhasePoint::new(ctx.zero(), ctx.zero());
    let attempt = kernel(ctx, SOrder::P, &origin, &fid);
    if min > P_SINGULARITY_THRESHOLD {
        match attempt {
            Ok(_) => Ok(format!("regular (min overlap {min:.3e})")),
            Err(e) => Err(format!("unexpected P-kernel error: {e}")),
        }
    } else {
        // Singular dimensions must *report*, never silently patch.
        match attempt {
            Err(QpsError::SingularPKernel { .. }) => {
                Ok(format!("singular (min overlap {min:.1e}); error surfaced as required"))
            }
            Ok(_) => Err("singular overlaps but P kernel did not report".into()),
            Err(e) => Err(format!("wrong error for singular P kernel: {e}")),
        }
    }
}

fn c_kernels(ctx: &FieldContext, tol: f64) -> Check {
    let fid = canonical_fiducial(ctx).map_err(|e| e.to_string())?;
    let origin = PhasePoint::new(ctx.zero(), ctx.zero());
    let mut worst = 0.0f64;
    // Origin s = 0 kernel is the parity operator (odd characteristic).
    let k0 = kernel(ctx, SOrder::W, &origin, &fid).unwrap();
    if ctx.d() % 2 == 1 {
        let par = parity_permutation(ctx).unwrap();
        worst = worst.max(k0.op.max_abs_diff(&par));
    }
    if !k0.op.tags.hermitian {
        return Err("origin kernel not hermitian".into());
    }
    worst = worst.max((k0.op.trace() - Complex64::new(1.0, 0.0)).norm());
    // Covariance at sampled points (kept to small grids for cost).
    if ctx.dim() <= 27 {
        for (mu, nu) in [(1u64, 2u64), (2, 0), (0, 1)] {
            let p = PhasePoint::new(
                ctx.element_from_index(mu % ctx.dim() as u64).unwrap(),
                ctx.element_from_index(nu % ctx.dim() as u64).unwrap(),
            );
            let kd = kernel(ctx, SOrder::W, &p, &fid).unwrap();
            let dop = displacement(ctx, &p).unwrap();
            let conj = dop.mul(&k0.op).unwrap().mul(&dop.dagger()).unwrap();
            worst = worst.max(kd.op.max_abs_diff(&conj));
        }
    }
    gate(worst, tol, "kernel hermitian, unit trace, parity origin, covariance")
}

fn c_kernel_orthogonality(ctx: &FieldContext, tol: f64) -> Check {
    let q = ctx.dim();
    if q > 25 {
        return Ok("skipped (exhaustive pairing restricted to d^n ≤ 25)".into());
    }
    let fid = canonical_fiducial(ctx).map_err(|e| e.to_string())?;
    let points: Vec<PhasePoint> = ctx
        .elements()
        .flat_map(|mu| ctx.elements().map(move |nu| PhasePoint::new(mu, nu)).collect::<Vec<_>>())
        .collect();
    let regular = min_overlap(ctx).map_err(|e| e.to_string())? > P_SINGULARITY_THRESHOLD;
    let mut families = vec![(SOrder::W, SOrder::W)];
    if regular {
        families.push((SOrder::P, SOrder::Q));
    }
    let mut worst = 0.0f64;
    for (sa, sb) in families {
        let ka: Vec<Operator> =
            points.iter().map(|p| kernel(ctx, sa, p, &fid).unwrap().op).collect();
        let kb: Vec<Operator> =
            points.iter().map(|p| kernel(ctx, sb, p, &fid).unwrap().op).collect();
        for (i, a) in ka.iter().enumerate() {
            for (j, b) in kb.iter().enumerate() {
                let tr = (&a.entries * &b.entries).trace();
                let expect = if i == j { q as f64 } else { 0.0 };
                worst = worst.max((tr - Complex64::new(expect, 0.0)).norm());
            }
        }
    }
    gate(worst, tol.max(1e-9), "Tr[w^{(s)}(p) w^{(−s)}(p')] = d^n δ")
}

fn c_grids(ctx: &FieldContext, tol: f64) -> Check {
    let q = ctx.dim();
    let rho = canonical_fiducial(ctx).map_err(|e| e.to_string())?.projector().unwrap();
    let regular = min_overlap(ctx).map_err(|e| e.to_string())? > P_SINGULARITY_THRESHOLD;
    let mut orders = vec![SOrder::W, SOrder::Q];
    if regular {
        orders.push(SOrder::P);
    }
    let mut worst = 0.0f64;
    for s in &orders {
        let grid = quasidist(ctx, &rho, *s).unwrap();
        worst = worst.max(grid.max_imag);
        worst = worst.max((grid.total() - q as f64).abs());
        // Inversion needs the dual-order overlaps; on singular dimensions
        // the Q grid's dual is the P family, which must *report*.
        if regular || *s == SOrder::W {
            let back = reconstruct(ctx, &grid).unwrap();
            worst = worst.max(back.max_abs_diff(&rho));
        } else {
            match reconstruct(ctx, &grid) {
                Err(QpsError::SingularPKernel { .. }) => {}
                Ok(_) => return Err("singular dual overlaps but reconstruct succeeded".into()),
                Err(e) => return Err(format!("wrong error on singular reconstruct: {e}")),
            }
        }
    }
    // Random (deterministic-seed) hermitian input, Wigner only.
    let rand_rho = lcg_density(q, 0x5eed + q as u64);
    let grid = quasidist(ctx, &rand_rho, SOrder::W).unwrap();
    worst = worst.max(grid.max_imag);
    worst = worst.max((grid.total() - q as f64).abs());
    let back = reconstruct(ctx, &grid).unwrap();
    worst = worst.max(back.max_abs_diff(&rand_rho));
    // Q function equals the s = −1 grid.
    let qdir = q_function(ctx, &rho).unwrap();
    let qker = quasidist(ctx, &rho, SOrder::Q).unwrap();
    worst = worst.max((&qdir.values - &qker.values).abs().max());
    // Translation covariance of the Wigner grid.
    let shift = PhasePoint::new(ctx.sigma(), ctx.zero());
    let dop = displacement(ctx, &shift).unwrap();
    let moved = dop.mul(&rho).unwrap().mul(&dop.dagger()).unwrap();
    let gshift = quasidist(ctx, &moved, SOrder::W).unwrap();
    let gbase = quasidist(ctx, &rho, SOrder::W).unwrap();
    for mu in ctx.elements() {
        for nu in ctx.elements() {
            let a = gshift.values[(mu.index() as usize, nu.index() as usize)];
            let src = (
                ctx.sub(&mu, &shift.mu).unwrap().index() as usize,
                ctx.sub(&nu, &shift.nu).unwrap().index() as usize,
            );
            worst = worst.max((a - gbase.values[src]).abs());
        }
    }
    let tol = tol.max(1e-9);
    gate(worst, tol, "reality, totals, inversion, Q-consistency, covariance")
}

fn c_marginals_and_lines(ctx: &FieldContext, tol: f64) -> Check {
    let q = ctx.dim();
    let mut worst = 0.0f64;
    // Basis-state projector pins the marginal axis convention.
    let l0 = 1usize.min(q - 1);
    let mut amps = nalgebra::DVector::zeros(q);
    amps[l0] = Complex64::new(1.0, 0.0);
    let basis_rho = StateVector::new(amps).unwrap().projector().unwrap();
    let grid = quasidist(ctx, &basis_rho, SOrder::W).unwrap();
    let pos = marginal(&grid, MarginalAxis::Horizontal).unwrap();
    for (nu, &p) in pos.iter().enumerate() {
        let expect = if nu == l0 { 1.0 } else { 0.0 };
        worst = worst.max((p - expect).abs());
    }
    let mom = marginal(&grid, MarginalAxis::Vertical).unwrap();
    for &p in &mom {
        worst = worst.max((p - 1.0 / q as f64).abs());
    }
    // Line sums partition the total; F-invariant states obey the slope
    // identity L(α,β) = L(−α⁻¹, α⁻¹β) and axis equality. Symmetrize the
    // fiducial projector under F so the premise holds at every dimension
    // (the bare fiducial is only F-covariant when the Gram has a
    // non-unimodular entry, first at GF(5²)).
    let rho = canonical_fiducial(ctx).map_err(|e| e.to_string())?.projector().unwrap();
    let f = fourier(ctx).unwrap();
    let mut acc = rho.entries.clone();
    let mut conj = rho.entries.clone();
    for _ in 0..3 {
        conj = &f.entries * conj * f.entries.adjoint();
        acc += &conj;
    }
    let rho = Operator::new(acc / Complex64::new(4.0, 0.0)).map_err(|e| e.to_string())?;
    let wg = quasidist(ctx, &rho, SOrder::W).unwrap();
    let alpha = ctx.sigma();
    let total: f64 = ctx
        .elements()
        .map(|beta| line_sum(ctx, &wg, &alpha, &beta, false).unwrap())
        .sum();
    worst = worst.max((total - wg.total()).abs());
    let alpha_inv = ctx.invert(&alpha).unwrap();
    let neg_alpha_inv = ctx.neg(&alpha_inv).unwrap();
    for beta in sampled(ctx, 4) {
        let lhs = line_sum(ctx, &wg, &alpha, &beta, false).unwrap();
        let mapped_beta = ctx.mul(&alpha_inv, &beta).unwrap();
        let rhs = line_sum(ctx, &wg, &neg_alpha_inv, &mapped_beta, false).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    let mu_axis = line_sum(ctx, &wg, &ctx.zero(), &ctx.zero(), false).unwrap();
    let nu_axis = line_sum(ctx, &wg, &ctx.zero(), &ctx.zero(), true).unwrap();
    worst = worst.max((mu_axis - nu_axis).abs());
    gate(worst, tol.max(1e-9), "marginal calibration, line partitions, slope identity")
}

fn c_io_round_trip(ctx: &FieldContext) -> Check {
    let psi = canonical_fiducial(ctx).map_err(|e| e.to_string())?;
    let ordering = ordering_dlog(ctx);
    let text = state_to_json(ctx, &psi, &ordering).unwrap();
    let (_, psi2) = state_from_json(&text).map_err(|e| e.to_string())?;
    for i in 0..psi.dim {
        if psi.amps[i] != psi2.amps[i] {
            return Err(format!("state amp {i} not bit-identical"));
        }
    }
    let grid = quasidist(ctx, &psi.projector().unwrap(), SOrder::W).unwrap();
    let gtext = grid_to_json(ctx, &grid, &ordering).unwrap();
    let (_, grid2) = grid_from_json(&gtext).map_err(|e| e.to_string())?;
    let ctext = grid_to_csv(ctx, &grid, &ordering).unwrap();
    let grid3 = grid_from_csv(ctx, &ctext, SOrder::W, Normalization::Raw).map_err(|e| e.to_string())?;
    for i in 0..grid.dim {
        for j in 0..grid.dim {
            if grid.values[(i, j)] != grid2.values[(i, j)]
                || grid.values[(i, j)] != grid3.values[(i, j)]
            {
                return Err(format!("grid value ({i},{j}) not bit-identical"));
            }
        }
    }
    Ok("state and grid exports re-import bit-identically (JSON and CSV)".into())
}

// ---------------------------------------------------------------------------
// d = 31 block
// ---------------------------------------------------------------------------

fn harper_energy_expansion(d: u64) -> f64 {
    let pi = std::f64::consts::PI;
    let df = d as f64;
    pi / df - pi * pi / (2.0 * df * df) + pi * pi * pi / (6.0 * df * df * df)
}

fn c31_fourier(tol: f64) -> Check {
    let ctx = make_field(31, 1, None).unwrap();
    let psi = reference_state(31).unwrap().state;
    let f = fourier(&ctx).unwrap();
    let dev = (&psi.apply(&f).unwrap().amps - &psi.amps).norm();
    gate(dev, tol, "F|ψ₀⟩ = |ψ₀⟩ at d = 31")
}

fn c31_harper() -> Check {
    let mut prev = f64::INFINITY;
    for d in [11u64, 17, 23, 31] {
        let h = harper_hamiltonian(d).unwrap();
        let psi = reference_state(d).unwrap().state;
        let e = expectation(&psi, &h).unwrap();
        let dev = (e.re - harper_energy_expansion(d)).abs();
        if dev >= prev {
            return Err(format!("expansion deviation not monotone at d={d}"));
        }
        prev = dev;
    }
    let h = harper_hamiltonian(31).unwrap();
    let eig = h.entries.clone().symmetric_eigen();
    let mut ground = 0usize;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[ground] {
            ground = i;
        }
    }
    let g = eig.eigenvectors.column(ground).into_owned();
    let overlap = reference_state(31).unwrap().state.amps.dotc(&g).norm();
    if overlap > 0.999 {
        Ok(format!("deviations monotone; ground overlap {overlap:.6}"))
    } else {
        Err(format!("ground overlap {overlap:.6} ≤ 0.999"))
    }
}

fn uncertainty_product(ctx: &FieldContext, psi: &StateVector) -> f64 {
    let u = generator_u(ctx, &ctx.one()).unwrap();
    let v = generator_v(ctx, &ctx.one()).unwrap();
    circular_dispersion(psi, &u).unwrap() * circular_dispersion(psi, &v).unwrap()
}

fn c31_uncertainty_bound(harness: &mut Harness) -> Check {
    let ctx = make_field(31, 1, None).unwrap();
    let bound = std::f64::consts::PI.powi(2) / (31.0f64 * 31.0);
    let psi = reference_state(31).unwrap().state;
    let base = uncertainty_product(&ctx, &psi);
    let mut min_product = base;
    for k in 0..20u64 {
        let p = PhasePoint::new(
            ctx.element_from_index((3 * k + 1) % 31).unwrap(),
            ctx.element_from_index((5 * k + 2) % 31).unwrap(),
        );
        let coh = coherent_state(&ctx, &p).unwrap();
        min_product = min_product.min(uncertainty_product(&ctx, &coh));
    }
    if min_product >= bound {
        Ok(format!("product {min_product:.6e} ≥ bound {bound:.6e}"))
    } else {
        harness.note(format!(
            "uncertainty-product bound: the measured product {min_product:.6e} lies below \
             π²/d² = {bound:.6e}. Analytically the reference (and every coherent) state \
             gives (1 − e^(−π/d))²·(1 + exponentially small), which approaches the bound \
             from below as d → ∞; at finite d the stated inequality is unattainable, so \
             this check fails by construction, not by numerical error."
        ));
        Err(format!(
            "product {min_product:.6e} < bound {bound:.6e} (asymptotic-only saturation; see note)"
        ))
    }
}

fn c31_uncertainty_window() -> Check {
    let ctx = make_field(31, 1, None).unwrap();
    let psi = reference_state(31).unwrap().state;
    let bound = std::f64::consts::PI.powi(2) / (31.0f64 * 31.0);
    let ratio = uncertainty_product(&ctx, &psi) / bound;
    if (0.9..=1.1).contains(&ratio) {
        Ok(format!("product/bound ratio {ratio:.6} within [0.9, 1.1]"))
    } else {
        Err(format!("ratio {ratio:.6} outside [0.9, 1.1]"))
    }
}

fn c31_q_symmetry(tol: f64) -> Check {
    let ctx = make_field(31, 1, None).unwrap();
    let rho = reference_state(31).unwrap().state.projector().unwrap();
    let grid = quasidist(&ctx, &rho, SOrder::Q).unwrap();
    let mut worst = 0.0f64;
    let q = 31usize;
    for m in 0..q {
        for n in 0..q {
            // Q(m, n) = Q(−n, m): the Fourier rotation of an invariant state.
            let a = grid.values[(m, n)];
            let b = grid.values[((q - n) % q, m)];
            worst = worst.max((a - b).abs());
            if grid.values[(m, n)] < -1e-12 {
                return Err(format!("negative Q at ({m},{n})"));
            }
        }
    }
    let mut peak = (0usize, 0usize);
    for m in 0..q {
        for n in 0..q {
            if grid.values[(m, n)] > grid.values[peak] {
                peak = (m, n);
            }
        }
    }
    if peak != (0, 0) {
        return Err(format!("Q maximum at {peak:?}, not the origin"));
    }
    gate(worst.max(0.0), tol.max(1e-12), "Q(m,n) = Q(−n,m), Q ≥ 0, peak at origin")
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Run the suite and build the report.
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let dims = opts.dims.clone().unwrap_or_else(default_dims);
    let tol = opts.tol.unwrap_or(1e-10);
    let mut h = Harness { checks: Vec::new(), notes: Vec::new() };

    for &(d, n) in &dims {
        let scope = format!("GF({d}^{n})");
        let ctx = match make_field_capped(d, n, None, crate::config::RunConfig::size_cap()) {
            Ok(c) => c,
            Err(e) => {
                h.record(&scope, "construct-field", Err(e.to_string()));
                continue;
            }
        };
        if d == 31 && n == 1 {
            // Base per-dim checks are sized for small grids; d = 31 has a
            // dedicated block below.
            continue;
        }
        h.record(&scope, "field-tables", c_field_tables(&ctx));
        h.record(&scope, "dual-and-selfdual", c_dual_and_selfdual(&ctx));
        h.record(&scope, "weyl-relation", c_weyl(&ctx, 1e-12));
        h.record(&scope, "fourier", c_fourier(&ctx, tol));
        h.record(&scope, "displacement", c_displacement(&ctx, tol));
        if d % 2 == 1 {
            h.record(&scope, "parity-average", c_parity_average(&ctx, 1e-11));
        }
        if n > 1 {
            h.record(&scope, "factorization", c_factorization(&ctx, tol));
        }
        h.record(&scope, "reference-state", c_reference_state(&ctx, tol));
        h.record(&scope, "squeeze", c_squeeze(&ctx, tol));
        h.record(&scope, "p-regularity", c_p_regularity(&ctx));
        h.record(&scope, "kernels", c_kernels(&ctx, tol));
        h.record(&scope, "kernel-orthogonality", c_kernel_orthogonality(&ctx, tol));
        h.record(&scope, "grids", c_grids(&ctx, tol));
        h.record(&scope, "marginals-and-lines", c_marginals_and_lines(&ctx, tol));
        h.record(&scope, "io-round-trip", c_io_round_trip(&ctx));
    }

    if dims.contains(&(31, 1)) {
        let scope = "d=31";
        h.record(scope, "fourier-invariance", c31_fourier(tol));
        h.record(scope, "harper-diagnostics", c31_harper());
        let bound_outcome = c31_uncertainty_bound(&mut h);
        h.record(scope, "uncertainty-product-bound", bound_outcome);
        h.record(scope, "uncertainty-window", c31_uncertainty_window());
        h.record(scope, "q-symmetry", c31_q_symmetry(1e-12));
    }

    if let Some(path) = &opts.state_file {
        let outcome = match std::fs::read_to_string(path) {
            Err(e) => Err(format!("unreadable: {e}")),
            Ok(text) => match state_from_json(&text) {
                Ok((fctx, psi)) => Ok(format!(
                    "valid GF({}^{}) state, norm {:.12}",
                    fctx.d(),
                    fctx.n(),
                    psi.amps.norm()
                )),
                Err(e) => Err(format!("invalid state file: {e}")),
            },
        };
        h.record("input", "state-file", outcome);
    }

    // Informational: closed-form theta-sum cross-check (never asserted).
    match closed_form_cross_check(5) {
        Ok(dev) => h.note(format!(
            "closed-form reference-Wigner cross-check at d = 5: max deviation {dev:.3e} \
             from the definitional grid (informational; the closed form is a \
             known-discrepant transcription and is not used as ground truth)"
        )),
        Err(e) => h.note(format!("closed-form cross-check unavailable: {e}")),
    }

    let passed = h.checks.iter().all(|c| c.pass);
    VerifyReport {
        schema: 1,
        dims: dims.iter().map(|(d, n)| format!("{d}^{n}")).collect(),
        checks: h.checks,
        notes: h.notes,
        passed,
    }
}

/// Human-readable rendering.
pub fn render_text(report: &VerifyReport) -> String {
    let mut out = String::from("qps verify — invariant suite\n");
    for c in &report.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        out.push_str(&format!("  {:10} {:24} {status} — {}\n", c.scope, c.name, c.detail));
    }
    for n in &report.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    out.push_str(&format!(
        "summary: {} checks, {} passed, {} failed\n",
        report.checks.len(),
        report.checks.len() - failed,
        failed
    ));
    out
}
