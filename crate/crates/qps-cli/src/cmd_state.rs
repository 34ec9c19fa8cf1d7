//! `qps state` — build the reference state over a chosen basis, apply an
//! optional squeeze and displacement, and export it as a schema-versioned
//! JSON state file.

use qps_core::io::state_to_json;
use qps_core::{
    canonical_fiducial, displacement, multi_reference_state, squeeze_operator, Basis, BasisKind,
    FieldContext, QpsError, Result, StateVector,
};

use crate::config::RunConfig;

/// A normal basis `{θ, θ^d, …, θ^{d^{n−1}}}`: the first Frobenius orbit
/// (by discrete log of θ) whose trace Gram matrix is nonsingular, i.e.
/// which is linearly independent.
pub fn find_normal_basis(ctx: &FieldContext) -> Result<Basis> {
    let q = ctx.dim() as u64;
    for k in 0..(q - 1) {
        let theta = ctx.sigma_pow(k);
        let mut orbit = Vec::with_capacity(ctx.n());
        let mut e = theta;
        for _ in 0..ctx.n() {
            orbit.push(e);
            e = ctx.pow(&e, ctx.d())?;
        }
        // Degenerate orbits (repeated elements, dependent sets) are not
        // errors — just unsuitable candidates.
        let Ok(basis) = ctx.basis_from_elements(BasisKind::Normal, &orbit) else {
            continue;
        };
        if ctx.dual_basis(&basis.elements).is_ok() {
            return Ok(basis);
        }
    }
    Err(QpsError::BasisMismatch(
        "no normal basis found (unreachable for a true field)".into(),
    ))
}

/// Resolve the basis selector into a concrete basis for the product
/// reference construction. `selfdual` defers to the canonical search.
pub(crate) fn base_state(ctx: &FieldContext, selector: &str) -> Result<StateVector> {
    match selector {
        "selfdual" => canonical_fiducial(ctx),
        "polynomial" => multi_reference_state(ctx, &ctx.polynomial_basis()),
        "normal" => multi_reference_state(ctx, &find_normal_basis(ctx)?),
        other => {
            if let Some(list) = other.strip_prefix("custom:") {
                let elems = list
                    .split(',')
                    .map(|t| ctx.parse_element(t.trim()))
                    .collect::<Result<Vec<_>>>()?;
                let basis = ctx.basis_from_elements(BasisKind::Custom, &elems)?;
                multi_reference_state(ctx, &basis)
            } else {
                Err(QpsError::Format(format!(
                    "basis must be selfdual, polynomial, normal, or custom:<labels>; got {other:?}"
                )))
            }
        }
    }
}

/// Build the configured state and return its JSON text.
pub fn cmd_state(cfg: &RunConfig) -> Result<String> {
    if cfg.format != "json" {
        return Err(QpsError::Format(
            "state export supports --format json only".into(),
        ));
    }
    let ctx = cfg.context()?;
    let mut psi = base_state(&ctx, &cfg.basis)?;
    if let Some(z) = &cfg.squeeze {
        let zeta = ctx.parse_element(z)?;
        let s = squeeze_operator(&ctx, &zeta)?;
        psi = psi.apply(&s)?;
    }
    if let Some(p) = cfg.phase_point(&ctx)? {
        let d = displacement(&ctx, &p)?;
        psi = psi.apply(&d)?;
    }
    let ordering = cfg.ordering_spec(&ctx)?;
    state_to_json(&ctx, &psi, &ordering)
}
