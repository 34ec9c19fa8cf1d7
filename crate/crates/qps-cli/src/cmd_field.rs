//! `qps field` — construct GF(d^n) and report its arithmetic landmarks:
//! modulus, defining relation, primitive element, dual basis, and the
//! selfdual (or almost-selfdual) basis with its Gram diagonal.

use qps_core::{Basis, BasisKind, FieldContext, Result};

use crate::config::RunConfig;

/// Threshold above which the selfdual basis search is skipped unless
/// forced: the subset search grows too fast to run casually on big
/// fields.
const SELFDUAL_SEARCH_LIMIT: usize = 2048;

/// Pretty element label: 0, 1, σ, σ^k.
pub fn sigma_label(ctx: &FieldContext, e: &qps_core::FieldElement) -> String {
    match ctx.dlog(e) {
        None => "0".into(),
        Some(0) => "1".into(),
        Some(1) => "σ".into(),
        Some(k) => format!("σ^{k}"),
    }
}

fn basis_label(ctx: &FieldContext, b: &Basis) -> String {
    let parts: Vec<String> = b.elements.iter().map(|e| sigma_label(ctx, e)).collect();
    format!("{{{}}}", parts.join(", "))
}

/// The reduction `σ^n = c_{n−1}σ^{n−1} + … + c_0` implied by the monic
/// modulus, as display text.
fn defining_relation(ctx: &FieldContext) -> String {
    let d = ctx.d();
    let coeffs = ctx.poly_coeffs();
    let n = ctx.n();
    let mut terms: Vec<String> = Vec::new();
    for k in (0..n).rev() {
        let c = (d - coeffs[k] % d) % d;
        if c == 0 {
            continue;
        }
        let var = match k {
            0 => String::new(),
            1 => "σ".into(),
            _ => format!("σ^{k}"),
        };
        let term = match (c, k) {
            (_, 0) => format!("{c}"),
            (1, _) => var,
            _ => format!("{c}{var}"),
        };
        terms.push(term);
    }
    let rhs = if terms.is_empty() { "0".into() } else { terms.join(" + ") };
    if n == 1 {
        format!("σ = {rhs}")
    } else {
        format!("σ^{n} = {rhs}")
    }
}

fn gram_text(diag: &[u64]) -> String {
    if diag.iter().all(|&c| c == 1) {
        "Gram = I".into()
    } else {
        let parts: Vec<String> = diag.iter().map(u64::to_string).collect();
        format!("Gram diag({})", parts.join(", "))
    }
}

/// Build the field report. `force_selfdual` runs the basis search even on
/// large fields.
pub fn cmd_field(cfg: &RunConfig, force_selfdual: bool) -> Result<String> {
    let ctx = cfg.context()?;
    let mut out = String::new();
    let source = if cfg.poly.is_some() { "given" } else { "default" };
    out.push_str(&format!(
        "GF({}^{}) — modulus {} ({source}), {} elements\n",
        ctx.d(),
        ctx.n(),
        ctx.poly_text(),
        ctx.dim()
    ));
    out.push_str(&format!("defining relation: {}\n", defining_relation(&ctx)));
    let sigma = ctx.sigma();
    out.push_str(&format!(
        "primitive element: σ, coefficients {}\n",
        ctx.format_element_tuple(&sigma)
    ));
    for w in ctx.warnings() {
        out.push_str(&format!("warning: {w}\n"));
    }
    let poly_basis = ctx.polynomial_basis();
    out.push_str(&format!(
        "polynomial basis: {}\n",
        basis_label(&ctx, &poly_basis)
    ));
    match ctx.dual_basis(&poly_basis.elements) {
        Ok(dual) => {
            let parts: Vec<String> = dual.iter().map(|e| sigma_label(&ctx, e)).collect();
            out.push_str(&format!("dual of polynomial basis: {{{}}}\n", parts.join(", ")));
        }
        Err(e) => out.push_str(&format!("dual of polynomial basis: error: {e}\n")),
    }
    if ctx.dim() > SELFDUAL_SEARCH_LIMIT && !force_selfdual {
        out.push_str(&format!(
            "selfdual search: skipped (d^n > {SELFDUAL_SEARCH_LIMIT}); pass --selfdual to force\n"
        ));
        return Ok(out);
    }
    match ctx.find_selfdual_basis() {
        Ok(found) => match found.basis.kind {
            BasisKind::Selfdual => out.push_str(&format!(
                "selfdual basis: {}  ({})\n",
                basis_label(&ctx, &found.basis),
                gram_text(&found.gram_diag)
            )),
            _ => out.push_str(&format!(
                "no selfdual basis; almost-selfdual {}  ({})\n",
                basis_label(&ctx, &found.basis),
                gram_text(&found.gram_diag)
            )),
        },
        Err(e) => out.push_str(&format!("selfdual search failed: {e}\n")),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: u64, n: usize, poly: Option<&str>) -> RunConfig {
        RunConfig {
            d,
            n,
            poly: poly.map(str::to_string),
            ..RunConfig::default()
        }
    }

    #[test]
    fn gf4_report_shows_relation_and_selfdual() {
        let report = cmd_field(&cfg(2, 2, None), false).unwrap();
        assert!(report.contains("modulus x^2+x+1"));
        assert!(report.contains("σ^2 = σ + 1"));
        assert!(report.contains("selfdual basis: {σ, σ^2}"));
        assert!(report.contains("Gram = I"));
    }

    #[test]
    fn gf9_reports_almost_selfdual() {
        let report = cmd_field(&cfg(3, 2, Some("x^2+x+2")), false).unwrap();
        assert!(report.contains("no selfdual basis; almost-selfdual {σ^2, σ^4}"));
        assert!(report.contains("Gram diag(1, 2)"));
    }

    #[test]
    fn prime_field_relation_is_sigma_equals_generator() {
        let report = cmd_field(&cfg(5, 1, None), false).unwrap();
        assert!(report.contains("σ = 2"), "report was: {report}");
    }

    #[test]
    fn composite_d_is_rejected() {
        assert!(cmd_field(&cfg(4, 1, None), false).is_err());
    }
}
