//! Versioned JSON and CSV interchange for states, operators, and grids.
//!
//! Every JSON document carries `schema: 1` plus the field parameters
//! `(d, n, poly)` needed to rebuild the arithmetic context, so files are
//! self-describing; imports re-derive the context and validate shape,
//! normalization, and ordering before returning anything.
//!
//! Rows may be written in different *orderings* (canonical lexicographic
//! index order, discrete-log order, or an explicit label list). The
//! ordering's element labels are stored alongside the data, so a reader
//! can always invert the permutation back to canonical order. Floating
//! point values are formatted with Rust's shortest round-trip
//! representation, which makes export → import → export byte-identical.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{make_field, FieldContext};
use crate::operators::Operator;
use crate::quasidist::{Normalization, QuasiDistGrid, SOrder};
use crate::states::StateVector;
use crate::{QpsError, Result};

/// Interchange schema version written to and required of every JSON file.
pub const SCHEMA_VERSION: u32 = 1;

/// A row/column ordering of the d^n field elements.
///
/// `perm[slot]` is the canonical element index displayed at that slot;
/// `labels[slot]` is its text form. Constructed via [`ordering_lex`],
/// [`ordering_dlog`], or [`ordering_from_labels`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingSpec {
    pub name: String,
    pub perm: Vec<usize>,
    pub labels: Vec<String>,
}

/// Canonical (lexicographic coefficient-index) ordering: 0, 1, …, d^n−1.
pub fn ordering_lex(ctx: &FieldContext) -> OrderingSpec {
    let perm: Vec<usize> = (0..ctx.dim()).collect();
    let labels = perm
        .iter()
        .map(|&i| ctx.format_element(&ctx.element_from_index(i as u64).unwrap()))
        .collect();
    OrderingSpec { name: "lex".into(), perm, labels }
}

/// Discrete-log ordering: 0 first, then σ⁰, σ¹, …, σ^{d^n−2}.
pub fn ordering_dlog(ctx: &FieldContext) -> OrderingSpec {
    let mut perm = Vec::with_capacity(ctx.dim());
    perm.push(0usize);
    for k in 0..(ctx.dim() as u64 - 1) {
        perm.push(ctx.sigma_pow(k).index() as usize);
    }
    let labels = perm
        .iter()
        .map(|&i| ctx.format_element(&ctx.element_from_index(i as u64).unwrap()))
        .collect();
    OrderingSpec { name: "dlog".into(), perm, labels }
}

/// Ordering from an explicit label list (one element per entry, any text
/// form accepted by `FieldContext::parse_element`). The list must be a
/// permutation of all d^n elements.
pub fn ordering_from_labels(ctx: &FieldContext, labels: &[String]) -> Result<OrderingSpec> {
    if labels.len() != ctx.dim() {
        return Err(QpsError::Format(format!(
            "ordering has {} labels; field has {} elements",
            labels.len(),
            ctx.dim()
        )));
    }
    let mut perm = Vec::with_capacity(labels.len());
    let mut seen = vec![false; ctx.dim()];
    for label in labels {
        let e = ctx.parse_element(label)?;
        let idx = e.index() as usize;
        if seen[idx] {
            return Err(QpsError::Format(format!(
                "ordering repeats element {label:?}"
            )));
        }
        seen[idx] = true;
        perm.push(idx);
    }
    let canonical_labels = perm
        .iter()
        .map(|&i| ctx.format_element(&ctx.element_from_index(i as u64).unwrap()))
        .collect();
    Ok(OrderingSpec { name: "file".into(), perm, labels: canonical_labels })
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct StateFile {
    schema: u32,
    d: u64,
    n: usize,
    poly: String,
    basis: String,
    ordering: String,
    labels: Vec<String>,
    amps: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    schema: u32,
    d: u64,
    n: usize,
    poly: String,
    basis: String,
    ordering: String,
    labels: Vec<String>,
    s: i32,
    normalization: String,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    schema: u32,
    d: u64,
    n: usize,
    poly: String,
    /// Row-major, canonical ordering; each entry is `[re, im]`.
    entries: Vec<Vec<[f64; 2]>>,
}

fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(QpsError::Format(format!(
            "unsupported schema version {schema} (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

fn rebuild_context(d: u64, n: usize, poly: &str) -> Result<FieldContext> {
    make_field(d, n, Some(poly))
}

fn normalization_name(n: Normalization) -> &'static str {
    match n {
        Normalization::Raw => "raw",
        Normalization::UnitSum => "unit_sum",
    }
}

fn normalization_from_name(name: &str) -> Result<Normalization> {
    match name {
        "raw" => Ok(Normalization::Raw),
        "unit_sum" => Ok(Normalization::UnitSum),
        other => Err(QpsError::Format(format!("unknown normalization {other:?}"))),
    }
}

/// Serialize a state to pretty JSON in the given ordering.
pub fn state_to_json(
    ctx: &FieldContext,
    state: &StateVector,
    ordering: &OrderingSpec,
) -> Result<String> {
    if state.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "state dim {} vs field dim {}",
            state.dim,
            ctx.dim()
        )));
    }
    let amps = ordering
        .perm
        .iter()
        .map(|&i| [state.amps[i].re, state.amps[i].im])
        .collect();
    let doc = StateFile {
        schema: SCHEMA_VERSION,
        d: ctx.d(),
        n: ctx.n(),
        poly: ctx.poly_text().to_string(),
        basis: "polynomial".into(),
        ordering: ordering.name.clone(),
        labels: ordering.labels.clone(),
        amps,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parse a state file; rebuilds the field context and restores canonical
/// amplitude order. The amplitudes must be normalized.
pub fn state_from_json(text: &str) -> Result<(FieldContext, StateVector)> {
    let doc: StateFile = serde_json::from_str(text)?;
    check_schema(doc.schema)?;
    let ctx = rebuild_context(doc.d, doc.n, &doc.poly)?;
    let ordering = ordering_from_labels(&ctx, &doc.labels)?;
    if doc.amps.len() != ctx.dim() {
        return Err(QpsError::LengthMismatch {
            expected: ctx.dim(),
            got: doc.amps.len(),
        });
    }
    let mut amps = DVector::zeros(ctx.dim());
    for (slot, &[re, im]) in doc.amps.iter().enumerate() {
        amps[ordering.perm[slot]] = Complex64::new(re, im);
    }
    let state = StateVector::new(amps)?;
    Ok((ctx, state))
}

/// Serialize a quasidistribution grid to pretty JSON in the given
/// ordering (applied to both axes).
pub fn grid_to_json(
    ctx: &FieldContext,
    grid: &QuasiDistGrid,
    ordering: &OrderingSpec,
) -> Result<String> {
    if grid.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "grid dim {} vs field dim {}",
            grid.dim,
            ctx.dim()
        )));
    }
    let values = ordering
        .perm
        .iter()
        .map(|&i| ordering.perm.iter().map(|&j| grid.values[(i, j)]).collect())
        .collect();
    let doc = GridFile {
        schema: SCHEMA_VERSION,
        d: ctx.d(),
        n: ctx.n(),
        poly: ctx.poly_text().to_string(),
        basis: "polynomial".into(),
        ordering: ordering.name.clone(),
        labels: ordering.labels.clone(),
        s: grid.s.s(),
        normalization: normalization_name(grid.normalization).into(),
        values,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parse a grid file; rebuilds the context and restores canonical index
/// order on both axes. (`max_imag` is an evaluation diagnostic, not part
/// of the interchange format; imported grids carry 0.)
pub fn grid_from_json(text: &str) -> Result<(FieldContext, QuasiDistGrid)> {
    let doc: GridFile = serde_json::from_str(text)?;
    check_schema(doc.schema)?;
    let ctx = rebuild_context(doc.d, doc.n, &doc.poly)?;
    let ordering = ordering_from_labels(&ctx, &doc.labels)?;
    let q = ctx.dim();
    if doc.values.len() != q {
        return Err(QpsError::LengthMismatch { expected: q, got: doc.values.len() });
    }
    let mut values = DMatrix::zeros(q, q);
    for (si, row) in doc.values.iter().enumerate() {
        if row.len() != q {
            return Err(QpsError::LengthMismatch { expected: q, got: row.len() });
        }
        for (sj, &v) in row.iter().enumerate() {
            values[(ordering.perm[si], ordering.perm[sj])] = v;
        }
    }
    let grid = QuasiDistGrid {
        dim: q,
        values,
        s: SOrder::from_s(doc.s)?,
        normalization: normalization_from_name(&doc.normalization)?,
        max_imag: 0.0,
    };
    Ok((ctx, grid))
}

/// Serialize an operator to pretty JSON (canonical ordering, row-major,
/// `[re, im]` entries).
pub fn operator_to_json(ctx: &FieldContext, op: &Operator) -> Result<String> {
    if op.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "operator dim {} vs field dim {}",
            op.dim,
            ctx.dim()
        )));
    }
    let entries = (0..op.dim)
        .map(|i| {
            (0..op.dim)
                .map(|j| {
                    let v = op.entries[(i, j)];
                    [v.re, v.im]
                })
                .collect()
        })
        .collect();
    let doc = OperatorFile {
        schema: SCHEMA_VERSION,
        d: ctx.d(),
        n: ctx.n(),
        poly: ctx.poly_text().to_string(),
        entries,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parse an operator file.
pub fn operator_from_json(text: &str) -> Result<(FieldContext, Operator)> {
    let doc: OperatorFile = serde_json::from_str(text)?;
    check_schema(doc.schema)?;
    let ctx = rebuild_context(doc.d, doc.n, &doc.poly)?;
    let q = ctx.dim();
    if doc.entries.len() != q {
        return Err(QpsError::LengthMismatch { expected: q, got: doc.entries.len() });
    }
    let mut m = DMatrix::zeros(q, q);
    for (i, row) in doc.entries.iter().enumerate() {
        if row.len() != q {
            return Err(QpsError::LengthMismatch { expected: q, got: row.len() });
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    let op = Operator::new(m)?;
    Ok((ctx, op))
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Grid as labelled CSV: header row `mu\nu, <ν labels…>`, then one row
/// per μ with its label in the first column.
pub fn grid_to_csv(
    ctx: &FieldContext,
    grid: &QuasiDistGrid,
    ordering: &OrderingSpec,
) -> Result<String> {
    if grid.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "grid dim {} vs field dim {}",
            grid.dim,
            ctx.dim()
        )));
    }
    let mut wtr = csv::Writer::from_writer(vec![]);
    let mut header = vec!["mu\\nu".to_string()];
    header.extend(ordering.labels.iter().cloned());
    wtr.write_record(&header)?;
    for (si, &i) in ordering.perm.iter().enumerate() {
        let mut row = vec![ordering.labels[si].clone()];
        for &j in &ordering.perm {
            row.push(format!("{}", grid.values[(i, j)]));
        }
        wtr.write_record(&row)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| QpsError::Format(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| QpsError::Format(format!("csv utf8: {e}")))
}

/// Parse a labelled grid CSV produced by [`grid_to_csv`]. The CSV itself
/// carries no field parameters, so the caller supplies the context and
/// grid metadata; row/column labels determine the permutation.
pub fn grid_from_csv(
    ctx: &FieldContext,
    text: &str,
    s: SOrder,
    normalization: Normalization,
) -> Result<QuasiDistGrid> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let q = ctx.dim();
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| QpsError::Format("empty csv".into()))??;
    if header.len() != q + 1 {
        return Err(QpsError::LengthMismatch { expected: q + 1, got: header.len() });
    }
    let col_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let col_order = ordering_from_labels(ctx, &col_labels)?;
    let mut values = DMatrix::zeros(q, q);
    let mut row_labels = Vec::with_capacity(q);
    for rec in records {
        let rec = rec?;
        if rec.len() != q + 1 {
            return Err(QpsError::LengthMismatch { expected: q + 1, got: rec.len() });
        }
        row_labels.push(rec[0].to_string());
        let i = ctx.parse_element(&rec[0])?.index() as usize;
        for (sj, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| QpsError::Format(format!("bad number {field:?}")))?;
            values[(i, col_order.perm[sj])] = v;
        }
    }
    if row_labels.len() != q {
        return Err(QpsError::LengthMismatch { expected: q, got: row_labels.len() });
    }
    // Row labels must also form a permutation (detects truncated files).
    ordering_from_labels(ctx, &row_labels)?;
    Ok(QuasiDistGrid { dim: q, values, s, normalization, max_imag: 0.0 })
}

/// Operator as CSV: row-major, canonical order, columns interleaved
/// `re(col0), im(col0), re(col1), …` with a label header.
pub fn operator_to_csv(ctx: &FieldContext, op: &Operator) -> Result<String> {
    if op.dim != ctx.dim() {
        return Err(QpsError::DimensionMismatch(format!(
            "operator dim {} vs field dim {}",
            op.dim,
            ctx.dim()
        )));
    }
    let mut wtr = csv::Writer::from_writer(vec![]);
    let mut header = vec!["row".to_string()];
    for j in 0..op.dim {
        let label = ctx.format_element(&ctx.element_from_index(j as u64).unwrap());
        header.push(format!("re({label})"));
        header.push(format!("im({label})"));
    }
    wtr.write_record(&header)?;
    for i in 0..op.dim {
        let mut row = vec![ctx.format_element(&ctx.element_from_index(i as u64).unwrap())];
        for j in 0..op.dim {
            let v = op.entries[(i, j)];
            row.push(format!("{}", v.re));
            row.push(format!("{}", v.im));
        }
        wtr.write_record(&row)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| QpsError::Format(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| QpsError::Format(format!("csv utf8: {e}")))
}
