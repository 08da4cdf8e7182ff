//! TOML experiment files: schema, defaults, validation, and the translation
//! into sweep specifications.

use serde::{Deserialize, Serialize};
use shellbuck::field::Space;
use shellbuck::scaling::{self, Quantity, SweepSpec};
use shellbuck::scan::DEFAULT_M_MAX;
use shellbuck::{Error, Result};

/// Root of an experiment file.
///
/// Unknown keys are rejected so a typo fails the run instead of silently
/// falling back to a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Output directory; an explicit `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub shell: ShellSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(rename = "quantity")]
    pub quantities: Vec<QuantitySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// Built-in profile id; see `shellbuck curve --help` for the list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Curve file with `theta,x,y,k` columns, as written by `shellbuck curve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    /// Sample count when synthesizing from an id.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialSection {
    pub e_mod: f64,
    pub nu: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        MaterialSection {
            e_mod: 1.0,
            nu: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShellSection {
    pub length: f64,
    /// Admissible space: "vh" or "vh-theta".
    pub space: String,
    /// Thickness grid, strictly decreasing; per-quantity defaults when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
}

impl Default for ShellSection {
    fn default() -> Self {
        ShellSection {
            length: 2.0,
            space: "vh".to_string(),
            h: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// Through-thickness collocation nodes.
    pub nt: usize,
    /// Angular collocation override; the per-geometry policy when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ntheta: Option<usize>,
    pub m_max: u32,
    /// Default slack around exponent brackets.
    pub slack: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            nt: 8,
            ntheta: None,
            m_max: DEFAULT_M_MAX,
            slack: 0.1,
        }
    }
}

/// One traced quantity. `kind` selects the estimator; the remaining fields
/// parametrize test-field kinds and override sweep defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantitySection {
    pub kind: String,
    /// Bump center for ansatz_kirchhoff.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    /// Curvature-zero location for the localized kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    /// Zero order for ansatz_localized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<u32>,
    /// Expected exponent bracket [lo, hi]; built-in table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    /// Thickness grid override for this quantity alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
}

fn default_samples() -> usize {
    512
}

pub const KIND_NAMES: [&str; 6] = [
    "lambda_cl",
    "korn_grad",
    "korn_col3",
    "ansatz_kirchhoff",
    "ansatz_localized",
    "ansatz_linearized_t",
];

impl QuantitySection {
    pub fn quantity(&self) -> Result<Quantity> {
        match self.kind.as_str() {
            "lambda_cl" => Ok(Quantity::BucklingLoad),
            "korn_grad" => Ok(Quantity::KornGrad),
            "korn_col3" => Ok(Quantity::KornCol3),
            "ansatz_kirchhoff" => Ok(Quantity::AnsatzKirchhoff {
                center: self.center.unwrap_or(std::f64::consts::PI),
            }),
            "ansatz_localized" => Ok(Quantity::AnsatzLocalized {
                theta1: self.theta1.unwrap_or(0.0),
                beta: self.beta.unwrap_or(2),
            }),
            "ansatz_linearized_t" => Ok(Quantity::AnsatzLinearizedT {
                theta1: self.theta1.unwrap_or(0.0),
            }),
            other => Err(Error::Config(format!(
                "quantity.kind {other:?} is not one of {KIND_NAMES:?}"
            ))),
        }
    }
}

pub fn space_of(name: &str) -> Result<Space> {
    match name {
        "vh" => Ok(Space::Vh),
        "vh-theta" => Ok(Space::VhTheta),
        other => Err(Error::Config(format!(
            "shell.space {other:?} must be \"vh\" or \"vh-theta\""
        ))),
    }
}

fn check_h_list(field: &str, h: Option<&[f64]>) -> Result<()> {
    let Some(h) = h else {
        return Ok(());
    };
    if h.is_empty() {
        return Err(Error::Config(format!("{field} must not be empty")));
    }
    if !(*h.last().unwrap() > 0.0) {
        return Err(Error::Config(format!("{field} entries must be positive")));
    }
    for w in h.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config(format!(
                "{field} must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.geometry.id, &self.geometry.csv) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "geometry: set either id or csv, not both".into(),
                ));
            }
            (None, None) => {
                return Err(Error::Config("geometry: one of id or csv is required".into()));
            }
            _ => {}
        }
        if let Some(id) = &self.geometry.id {
            if !scaling::GEOMETRY_IDS.contains(&id.as_str()) {
                return Err(Error::Config(format!(
                    "geometry.id {id:?} is unknown; built-ins are {:?}",
                    scaling::GEOMETRY_IDS
                )));
            }
        }
        if self.geometry.samples < 64 {
            return Err(Error::Config(format!(
                "geometry.samples must be at least 64, got {}",
                self.geometry.samples
            )));
        }
        if !(self.material.e_mod > 0.0) {
            return Err(Error::Config(format!(
                "material.e_mod must be positive, got {}",
                self.material.e_mod
            )));
        }
        if !(-1.0 < self.material.nu && self.material.nu < 0.5) {
            return Err(Error::Config(format!(
                "material.nu must lie in (-1, 1/2), got {}",
                self.material.nu
            )));
        }
        if !(self.shell.length > 0.0) {
            return Err(Error::Config(format!(
                "shell.length must be positive, got {}",
                self.shell.length
            )));
        }
        space_of(&self.shell.space)?;
        check_h_list("shell.h", self.shell.h.as_deref())?;
        if self.solver.nt < 2 {
            return Err(Error::Config(format!(
                "solver.nt must be at least 2, got {}",
                self.solver.nt
            )));
        }
        if let Some(nth) = self.solver.ntheta {
            if nth < 8 {
                return Err(Error::Config(format!(
                    "solver.ntheta must be at least 8, got {nth}"
                )));
            }
            if self.geometry.samples % nth != 0 {
                return Err(Error::Config(format!(
                    "solver.ntheta ({nth}) must divide geometry.samples ({})",
                    self.geometry.samples
                )));
            }
        }
        if self.solver.m_max < 1 {
            return Err(Error::Config("solver.m_max must be at least 1".into()));
        }
        if !(self.solver.slack >= 0.0) {
            return Err(Error::Config(format!(
                "solver.slack must be nonnegative, got {}",
                self.solver.slack
            )));
        }
        if self.quantities.is_empty() {
            return Err(Error::Config(
                "at least one [[quantity]] table is required".into(),
            ));
        }
        for (i, q) in self.quantities.iter().enumerate() {
            q.quantity()
                .map_err(|e| Error::Config(format!("quantity[{i}]: {e}")))?;
            if let Some(b) = q.beta {
                if b < 2 || b % 2 != 0 {
                    return Err(Error::Config(format!(
                        "quantity[{i}].beta must be an even integer >= 2, got {b}"
                    )));
                }
            }
            if let Some([lo, hi]) = q.bracket {
                if !(lo <= hi) {
                    return Err(Error::Config(format!(
                        "quantity[{i}].bracket must satisfy lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            if let Some(s) = q.slack {
                if !(s >= 0.0) {
                    return Err(Error::Config(format!(
                        "quantity[{i}].slack must be nonnegative, got {s}"
                    )));
                }
            }
            check_h_list(&format!("quantity[{i}].h"), q.h.as_deref())?;
        }
        Ok(())
    }

    /// Sweep specification for one quantity entry, under `label` (the
    /// geometry id, or a stand-in label for csv-sourced curves).
    pub fn spec_for(&self, q: &QuantitySection, label: &str) -> Result<SweepSpec> {
        let mut spec = SweepSpec::new(label, q.quantity()?);
        if let Some(h) = q.h.as_ref().or(self.shell.h.as_ref()) {
            spec.h_list = h.clone();
        }
        spec.space = space_of(&self.shell.space)?;
        spec.length = self.shell.length;
        spec.e_mod = self.material.e_mod;
        spec.nu = self.material.nu;
        spec.nt = self.solver.nt;
        spec.ntheta = self.solver.ntheta;
        spec.geometry_n = self.geometry.samples;
        spec.m_max = self.solver.m_max;
        Ok(spec)
    }
}

/// Expected exponent bracket for the built-in geometry/quantity pairs.
///
/// Quantities without a table entry (csv geometries, off-table combinations)
/// need an explicit `bracket` in the config.
pub fn default_bracket(geometry: &str, q: &Quantity) -> Option<(f64, f64)> {
    match q {
        Quantity::BucklingLoad => match geometry {
            "circle" | "oval" => Some((1.0, 1.0)),
            "flat-spot" => Some((1.5, 1.6)),
            _ => None,
        },
        Quantity::KornGrad => match geometry {
            "circle" | "oval" => Some((1.5, 1.5)),
            "flat-spot" => Some((5.0 / 3.0, 12.0 / 7.0)),
            _ => None,
        },
        Quantity::KornCol3 => match geometry {
            "circle" | "oval" => Some((1.0, 1.0)),
            "flat-spot" => Some((1.5, 8.0 / 5.0)),
            "quartic" => Some((5.0 / 3.0, 5.0 / 3.0)),
            _ => None,
        },
        Quantity::AnsatzKirchhoff { .. } => Some((1.0, 1.0)),
        Quantity::AnsatzLocalized { beta, .. } => {
            let b = *beta as f64;
            let a = 2.0 * (b + 1.0) / (b + 2.0);
            Some((a, a))
        }
        Quantity::AnsatzLinearizedT { .. } => Some((5.0 / 3.0, 5.0 / 3.0)),
    }
}
