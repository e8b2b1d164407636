//! Experiment configuration: TOML schema, field-precise validation, and
//! conversion into the domain types.

use serde::{Deserialize, Serialize};

use crossres::analysis::{ConditionalCase, InitialState, QubitInit, SweepAxis};
use crossres::interaction::solve_frame_integers;
use crossres::propagation::{default_dt, default_tail};
use crossres::targets::ConditionalKind;
use crossres::{Complex64, FrameIntegers, HilbertSpec, InteractionTerm, PropagationConfig, SystemSpec};

/// A real or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn to_complex(self) -> Complex64 {
        match self {
            Scalar::Real(re) => Complex64::new(re, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub system: RawSystem,
    pub hilbert: RawHilbert,
    #[serde(default)]
    pub frame: Option<RawFrame>,
    pub propagation: RawPropagation,
    pub case: RawCase,
    #[serde(default)]
    pub initial: Option<RawInitial>,
    #[serde(default)]
    pub sweep: Option<RawSweep>,
    #[serde(default)]
    pub output: Option<RawOutput>,
    #[serde(default)]
    pub validation: Option<RawValidation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    /// Declared unit of every frequency in this file (informational; all
    /// dynamics are run in these units with ħ = 1).
    #[serde(default = "one")]
    pub reference_frequency: f64,
    pub qubit_freq: f64,
    pub mode_freqs: Vec<f64>,
    pub drive_strength: f64,
    pub drive_freq: f64,
    pub terms: Vec<RawTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTerm {
    pub strength: Scalar,
    /// Per-mode `[m_k1, m_k2]` exponent pairs.
    pub exponents: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHilbert {
    pub mode_dims: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFrame {
    pub n: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPropagation {
    pub t_final: f64,
    /// Explicit step size; when absent, `2π/(ω_max · steps_per_cycle)`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub steps_per_cycle: Option<u32>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub truncation_tail: Option<usize>,
    #[serde(default)]
    pub tail_tolerance: Option<f64>,
    #[serde(default)]
    pub refine_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCase {
    /// displacement | squeeze | joint_displacement | beamsplitter |
    /// two_mode_squeeze | generic
    pub kind: String,
    #[serde(default)]
    pub m1: Option<u32>,
    #[serde(default)]
    pub m2: Option<u32>,
    /// Optional declared target amplitude at `t_final`; cross-checked
    /// against the closed-form map.
    #[serde(default)]
    pub amplitude: Option<Scalar>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    /// ground | excited | dressed_plus | dressed_minus
    #[serde(default = "default_qubit")]
    pub qubit: String,
    #[serde(default)]
    pub fock: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    /// drive_freq | drive_strength | coupling_scale
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawValidation {
    #[serde(default)]
    pub rwa_threshold: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_qubit() -> String {
    "ground".into()
}

/// A config error with the offending field path.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at `{}`: {}", self.field, self.message)
    }
}

fn err<T>(field: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { field: field.into(), message: message.into() })
}

/// Fully validated experiment, ready to run.
pub struct Experiment {
    pub raw: RawConfig,
    pub system: SystemSpec,
    pub hilbert: HilbertSpec,
    pub frame: FrameIntegers,
    pub propagation: PropagationConfig,
    pub case: ConditionalCase,
    pub initial: InitialState,
    pub sweep: Option<(SweepAxis, Vec<f64>)>,
    pub rwa_threshold: f64,
}

pub fn parse_file(path: &std::path::Path) -> Result<(RawConfig, String), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { field: path.display().to_string(), message: e.to_string() })?;
    let raw: RawConfig = toml::from_str(&text)
        .map_err(|e| ConfigError { field: "<toml>".into(), message: e.to_string() })?;
    Ok((raw, text))
}

/// Validate the raw config and build the domain objects. Frame solving is
/// deliberately excluded (it carries its own exit code); callers invoke
/// [`Experiment::new`] which runs both stages.
impl Experiment {
    pub fn new(raw: RawConfig) -> Result<Result<Self, crossres::Error>, ConfigError> {
        let sys = &raw.system;
        if sys.reference_frequency <= 0.0 {
            return err("system.reference_frequency", "must be positive");
        }
        for (i, &w) in sys.mode_freqs.iter().enumerate() {
            if !(w > 0.0) {
                return err(&format!("system.mode_freqs[{i}]"), "must be positive");
            }
        }
        if sys.drive_strength < 0.0 {
            return err("system.drive_strength", "must be non-negative");
        }
        if sys.terms.is_empty() {
            return err("system.terms", "at least one interaction term is required");
        }
        let n_modes = sys.mode_freqs.len();
        let mut terms = Vec::with_capacity(sys.terms.len());
        for (i, t) in sys.terms.iter().enumerate() {
            if t.exponents.len() != n_modes {
                return err(
                    &format!("system.terms[{i}].exponents"),
                    format!("expected {n_modes} per-mode pairs, got {}", t.exponents.len()),
                );
            }
            let pairs: Vec<(u32, u32)> = t.exponents.iter().map(|&[a, b]| (a, b)).collect();
            match InteractionTerm::new(t.strength.to_complex(), pairs) {
                Ok(term) => terms.push(term),
                Err(e) => return err(&format!("system.terms[{i}]"), e.to_string()),
            }
        }

        if raw.hilbert.mode_dims.len() != n_modes {
            return err(
                "hilbert.mode_dims",
                format!("expected {n_modes} entries, got {}", raw.hilbert.mode_dims.len()),
            );
        }
        let hilbert = match HilbertSpec::new(raw.hilbert.mode_dims.clone()) {
            Ok(h) => h,
            Err(e) => return err("hilbert.mode_dims", e.to_string()),
        };

        let system = match SystemSpec::new(
            sys.qubit_freq,
            sys.mode_freqs.clone(),
            terms,
            sys.drive_strength,
            sys.drive_freq,
        ) {
            Ok(s) => s,
            Err(e) => return err("system", e.to_string()),
        };

        let kind = match raw.case.kind.as_str() {
            "displacement" => ConditionalKind::Displacement,
            "squeeze" => ConditionalKind::Squeeze,
            "joint_displacement" => ConditionalKind::JointDisplacement,
            "beamsplitter" => ConditionalKind::Beamsplitter,
            "two_mode_squeeze" => ConditionalKind::TwoModeSqueeze,
            "generic" => {
                let m1 = match raw.case.m1 {
                    Some(m) if m >= 1 => m,
                    _ => return err("case.m1", "generic case needs m1 >= 1"),
                };
                let m2 = match raw.case.m2 {
                    Some(m) if m >= 1 => m,
                    _ => return err("case.m2", "generic case needs m2 >= 1"),
                };
                ConditionalKind::Generic { m1, m2 }
            }
            other => {
                return err(
                    "case.kind",
                    format!(
                        "unknown case `{other}` (expected displacement, squeeze, \
                         joint_displacement, beamsplitter, two_mode_squeeze, generic)"
                    ),
                )
            }
        };

        let prop = &raw.propagation;
        if prop.t_final < 0.0 {
            return err("propagation.t_final", "must be non-negative");
        }
        let dt = match (prop.dt, prop.steps_per_cycle) {
            (Some(dt), _) if dt > 0.0 => dt,
            (Some(_), _) => return err("propagation.dt", "must be positive"),
            (None, per_cycle) => {
                let scale = per_cycle.unwrap_or(200);
                if scale == 0 {
                    return err("propagation.steps_per_cycle", "must be positive");
                }
                default_dt(&system) * 200.0 / scale as f64
            }
        };
        let truncation_tail = prop.truncation_tail.unwrap_or_else(|| default_tail(&hilbert));
        let tail_tolerance = prop.tail_tolerance.unwrap_or(1e-6);
        let propagation = PropagationConfig {
            t_final: prop.t_final,
            dt,
            samples: prop.samples.unwrap_or(20),
            truncation_tail,
            tail_tolerance,
            refine_check: None,
        };
        if let Err(e) = propagation.validate(&hilbert) {
            return err("propagation", e.to_string());
        }

        let initial = match &raw.initial {
            None => InitialState::vacuum(QubitInit::Ground, n_modes),
            Some(init) => {
                let qubit = match init.qubit.as_str() {
                    "ground" => QubitInit::Ground,
                    "excited" => QubitInit::Excited,
                    "dressed_plus" => QubitInit::DressedPlus,
                    "dressed_minus" => QubitInit::DressedMinus,
                    other => {
                        return err(
                            "initial.qubit",
                            format!(
                                "unknown qubit state `{other}` (expected ground, excited, \
                                 dressed_plus, dressed_minus)"
                            ),
                        )
                    }
                };
                let fock = init.fock.clone().unwrap_or_else(|| vec![0; n_modes]);
                if fock.len() != n_modes {
                    return err("initial.fock", format!("expected {n_modes} occupations"));
                }
                for (k, &n) in fock.iter().enumerate() {
                    if n >= raw.hilbert.mode_dims[k] {
                        return err(
                            &format!("initial.fock[{k}]"),
                            format!("occupation {n} exceeds truncation {}", raw.hilbert.mode_dims[k]),
                        );
                    }
                }
                InitialState { qubit, fock }
            }
        };

        let sweep = match &raw.sweep {
            None => None,
            Some(s) => {
                let axis = match s.parameter.as_str() {
                    "drive_freq" => SweepAxis::DriveFreq,
                    "drive_strength" => SweepAxis::DriveStrength,
                    "coupling_scale" => SweepAxis::CouplingScale,
                    other => {
                        return err(
                            "sweep.parameter",
                            format!(
                                "unknown parameter `{other}` (expected drive_freq, \
                                 drive_strength, coupling_scale)"
                            ),
                        )
                    }
                };
                Some((axis, s.values.clone()))
            }
        };

        if let Some(fmt) = raw.output.as_ref().and_then(|o| o.format.as_deref()) {
            if fmt != "csv" && fmt != "json" {
                return err("output.format", format!("unknown format `{fmt}`"));
            }
        }

        let rwa_threshold = match raw.validation.as_ref().and_then(|v| v.rwa_threshold) {
            None => crossres::analysis::DEFAULT_RWA_THRESHOLD,
            Some(t) if t > 0.0 => t,
            Some(_) => return err("validation.rwa_threshold", "must be positive"),
        };

        // frame solving carries spec-level failure semantics, so it is
        // nested rather than flattened into the config error
        let built = match &raw.frame {
            Some(f) => {
                if f.n.len() != n_modes {
                    return err("frame.n", format!("expected {n_modes} entries"));
                }
                FrameIntegers::new(f.n.clone())
            }
            None => solve_frame_integers(system.terms()),
        };

        Ok(built.map(|frame| Experiment {
            raw,
            system,
            hilbert,
            frame,
            propagation,
            case: ConditionalCase { kind },
            initial,
            sweep,
            rwa_threshold,
        }))
    }
}
