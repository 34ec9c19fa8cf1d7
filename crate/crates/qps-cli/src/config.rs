//! Resolved run configuration: every subcommand normalizes its flags into
//! a [`RunConfig`], which round-trips through JSON text (so a config can
//! be logged, stored, and replayed).

use serde::{Deserialize, Serialize};

use qps_core::io::{ordering_dlog, ordering_from_labels, ordering_lex, OrderingSpec};
use qps_core::{make_field_capped, FieldContext, PhasePoint, QpsError, Result, DEFAULT_SIZE_CAP};

/// Environment variable overriding the d^n size cap.
pub const SIZE_CAP_ENV: &str = "QPS_SIZE_CAP";

/// A fully resolved command configuration. Selector fields keep their
/// textual form (`basis`, `ordering`, `point`, …) so the struct
/// round-trips losslessly through JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub d: u64,
    pub n: usize,
    /// Modulus polynomial text; `None` selects the default rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    /// `polynomial` | `selfdual` | `normal` | `custom:<label,label,…>`.
    pub basis: String,
    /// `lex` | `dlog` | `file:<path>`.
    pub ordering: String,
    /// Quasidistribution order s ∈ {−1, 0, +1}.
    pub s: i32,
    /// Phase-space point `"<mu>,<nu>"` for displacement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
    /// Squeeze element label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeeze: Option<String>,
    /// `json` | `csv`.
    pub format: String,
    /// Output path (stdout when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Optional tolerance override for verification checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 2,
            n: 1,
            poly: None,
            basis: "selfdual".into(),
            ordering: "lex".into(),
            s: 0,
            point: None,
            squeeze: None,
            format: "json".into(),
            out: None,
            tol: None,
        }
    }
}

impl RunConfig {
    /// Textual (JSON) form; [`RunConfig::from_text`] inverts it exactly.
    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parse the textual form produced by [`RunConfig::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The effective size cap: `QPS_SIZE_CAP` if set, else the default.
    pub fn size_cap() -> u64 {
        std::env::var(SIZE_CAP_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_SIZE_CAP)
    }

    /// Build the field context for this config, honoring the size cap.
    pub fn context(&self) -> Result<FieldContext> {
        make_field_capped(self.d, self.n, self.poly.as_deref(), Self::size_cap())
    }

    /// Resolve the ordering selector against a context. `file:<path>`
    /// reads one element label per line.
    pub fn ordering_spec(&self, ctx: &FieldContext) -> Result<OrderingSpec> {
        ordering_spec_for(ctx, &self.ordering)
    }

    /// Parse the `"<mu>,<nu>"` point selector, if present.
    pub fn phase_point(&self, ctx: &FieldContext) -> Result<Option<PhasePoint>> {
        match &self.point {
            None => Ok(None),
            Some(text) => {
                let (m, n) = text.split_once(',').ok_or_else(|| {
                    QpsError::Format(format!("point must be \"<mu>,<nu>\", got {text:?}"))
                })?;
                Ok(Some(PhasePoint::new(
                    ctx.parse_element(m)?,
                    ctx.parse_element(n)?,
                )))
            }
        }
    }
}

/// Resolve an ordering selector string against a context.
pub fn ordering_spec_for(ctx: &FieldContext, selector: &str) -> Result<OrderingSpec> {
    match selector {
        "lex" => Ok(ordering_lex(ctx)),
        "dlog" => Ok(ordering_dlog(ctx)),
        other => {
            if let Some(path) = other.strip_prefix("file:") {
                let text = std::fs::read_to_string(path)?;
                let labels: Vec<String> = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_string)
                    .collect();
                ordering_from_labels(ctx, &labels)
            } else {
                Err(QpsError::Format(format!(
                    "ordering must be lex, dlog, or file:<path>; got {other:?}"
                )))
            }
        }
    }
}

/// Resolve an ordering from in-memory label text (one label per line),
/// as used by the embedded figure presets.
pub fn ordering_from_label_text(ctx: &FieldContext, text: &str) -> Result<OrderingSpec> {
    let labels: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    ordering_from_labels(ctx, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_text() {
        let cfg = RunConfig {
            d: 3,
            n: 3,
            poly: Some("x^3+2x^2+1".into()),
            basis: "selfdual".into(),
            ordering: "file:data/fig2_ordering.txt".into(),
            s: -1,
            point: Some("s^2,0".into()),
            squeeze: Some("s^7".into()),
            format: "csv".into(),
            out: Some("grid.csv".into()),
            tol: Some(1e-9),
        };
        let text = cfg.to_text();
        let back = RunConfig::from_text(&text).unwrap();
        assert_eq!(back, cfg);
        // And again: text form is a fixed point.
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn minimal_config_round_trips() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn bad_ordering_selector_is_rejected() {
        let ctx = qps_core::make_field(3, 1, None).unwrap();
        assert!(ordering_spec_for(&ctx, "nope").is_err());
    }
}
