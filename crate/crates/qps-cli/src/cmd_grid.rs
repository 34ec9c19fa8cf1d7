//! `qps grid` — evaluate a P/W/Q grid for a built-in or file-supplied
//! state and export it as JSON or labelled CSV. Figure presets pin
//! ready-made parameter sets:
//!
//! * `fig1` — d = 31 Q function of the reference state;
//! * `fig2` — GF(27), modulus x³+2x²+1, Q function of the reference
//!   state, axes in the caption ordering shipped as a data file;
//! * `fig3` — same field, Wigner function of the squeezed vacuum with
//!   ς = σ⁷, same axis ordering.

use nalgebra::DMatrix;
use num_complex::Complex64;

use qps_core::io::{grid_to_csv, grid_to_json, state_from_json, OrderingSpec};
use qps_core::{
    displacement, quasidist, squeeze_operator, FieldContext, Operator, QpsError, Result, SOrder,
};

use crate::cmd_state::base_state;
use crate::config::{ordering_from_label_text, RunConfig};

/// Axis ordering for the 27×27 figure grids (one label per line); ships
/// as `data/fig2_ordering.txt` and is embedded so presets work from any
/// working directory.
pub const FIG_ORDERING_27: &str = include_str!("../data/fig2_ordering.txt");

/// Figure preset selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

impl Preset {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(QpsError::Format(format!(
                "preset must be fig1, fig2, or fig3; got {other:?}"
            ))),
        }
    }

    /// The run configuration this preset pins (format/out left to flags).
    pub fn config(self) -> RunConfig {
        match self {
            Preset::Fig1 => RunConfig {
                d: 31,
                n: 1,
                s: -1,
                ordering: "lex".into(),
                ..RunConfig::default()
            },
            Preset::Fig2 => RunConfig {
                d: 3,
                n: 3,
                poly: Some("x^3+2x^2+1".into()),
                s: -1,
                ordering: "file:data/fig2_ordering.txt".into(),
                ..RunConfig::default()
            },
            Preset::Fig3 => RunConfig {
                d: 3,
                n: 3,
                poly: Some("x^3+2x^2+1".into()),
                s: 0,
                squeeze: Some("s^7".into()),
                ordering: "file:data/fig2_ordering.txt".into(),
                ..RunConfig::default()
            },
        }
    }
}

/// Density operator from the state selector: `reference` (with the
/// config's squeeze/point applied), `mixed`, or a state-file path.
fn build_density(ctx: &FieldContext, cfg: &RunConfig, selector: &str) -> Result<Operator> {
    match selector {
        "reference" => {
            let mut psi = base_state(ctx, &cfg.basis)?;
            if let Some(z) = &cfg.squeeze {
                let s = squeeze_operator(ctx, &ctx.parse_element(z)?)?;
                psi = psi.apply(&s)?;
            }
            if let Some(p) = cfg.phase_point(ctx)? {
                psi = psi.apply(&displacement(ctx, &p)?)?;
            }
            psi.projector()
        }
        "mixed" => {
            let q = ctx.dim();
            Operator::new(DMatrix::identity(q, q) / Complex64::new(q as f64, 0.0))
        }
        path => {
            let text = std::fs::read_to_string(path)?;
            let (fctx, psi) = state_from_json(&text)?;
            if fctx.d() != ctx.d() || fctx.n() != ctx.n() || fctx.poly_text() != ctx.poly_text() {
                return Err(QpsError::DimensionMismatch(format!(
                    "state file is GF({}^{}) mod {}, config is GF({}^{}) mod {}",
                    fctx.d(),
                    fctx.n(),
                    fctx.poly_text(),
                    ctx.d(),
                    ctx.n(),
                    ctx.poly_text()
                )));
            }
            psi.projector()
        }
    }
}

/// Evaluate the configured grid and return its serialized text.
/// `embedded_ordering` (set by the figure presets) takes precedence over
/// the config's ordering selector.
pub fn cmd_grid(
    cfg: &RunConfig,
    state_selector: &str,
    embedded_ordering: Option<&str>,
) -> Result<String> {
    let ctx = cfg.context()?;
    let rho = build_density(&ctx, cfg, state_selector)?;
    let s = SOrder::from_s(cfg.s)?;
    let grid = quasidist(&ctx, &rho, s)?;
    let ordering: OrderingSpec = match embedded_ordering {
        Some(text) => ordering_from_label_text(&ctx, text)?,
        None => cfg.ordering_spec(&ctx)?,
    };
    match cfg.format.as_str() {
        "json" => grid_to_json(&ctx, &grid, &ordering),
        "csv" => grid_to_csv(&ctx, &grid, &ordering),
        other => Err(QpsError::Format(format!(
            "format must be json or csv; got {other:?}"
        ))),
    }
}
