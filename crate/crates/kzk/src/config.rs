//! Declarative run configuration for the `kzk` binary.
//!
//! A run is described by a small TOML file of flat `key = value` sections;
//! every field has a default, so the empty string already parses to a valid
//! baseline run. The sections:
//!
//! ```toml
//! [equation]                    # u_t - u_xxxxx + u_xxx + u_xyy + b u_x + g'(u) u_x = f
//! b = 0.0
//! nonlinearity = "quadratic"    # none | quadratic | cubic | power
//! p = 1.0                       # growth exponent (power kind only)
//! a = 1.0                       # cubic coefficient
//! sign = 1.0                    # power-law sign, +1 or -1
//! cutoff = 0.0                  # saturation strength for g'; 0 = no cutoff
//! uniqueness = "none"           # none | weak | strong: hypothesis class to enforce
//!
//! [domain]
//! family = "a"                  # lateral conditions: a | b | c | d
//! length = 1.0                  # strip width L
//! x_max = 30.0                  # truncation of the half-line
//!
//! [discretization]
//! nx = 601
//! ny_modes = 32
//! dt = 0.001
//! t_final = 1.0
//! sponge = 0.0                  # absorbing-layer strength; 0 = off
//!
//! [weights]
//! tracked = ["exp:0.1"]         # exp:A -> e^{2Ax}, pow:A -> (1+x)^{2A}, rho0, unit
//!
//! [initial]
//! kind = "gaussian"             # zero | gaussian
//! amplitude = 0.01
//! center = 12.0
//! width = 2.0
//! mode = 0                      # lateral mode index carrying the bump
//!
//! [forcing]
//! kind = "zero"                 # zero | pulse
//! amplitude = 0.0
//! center = 0.0
//! width = 1.0
//! decay = 0.0                   # temporal e^{-decay t} envelope of the pulse
//!
//! [experiment]
//! # preset = "decay_weak"       # decay_weak | decay_strong | continuous_dependence
//!                               # | oracle_convergence | conservation_drift
//!
//! [output]
//! directory = "out"
//! cadence = 50                  # record every this many steps
//! seed = 42
//! ```
//!
//! [`RunConfig::validate`] checks structural sanity (positive steps, mode
//! indices in range) together with the analytic hypotheses behind the
//! estimates the solver is meant to exhibit: the admissible growth range of
//! the nonlinearity, weight admissibility, the weight conditions of the
//! claimed uniqueness class, the spectral-gap gates of decay runs, and the
//! left-edge trace condition `u(0, y) = 0` of the initial data for strong
//! runs. Violations come back as human-readable strings; an empty list means
//! the run may proceed. Validation is pure: it never touches the
//! filesystem.
//!
//! The first entry of `weights.tracked` is the *analysis weight*: the one
//! uniqueness hypotheses are checked against and, for decay presets, the one
//! whose exponent plays the role of the decay rate parameter.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::decay_constants;
use crate::eigenbasis::{BcFamily, EigenBasis};
use crate::experiments::{Bump, DecayPreset, Preset};
use crate::nonlinearity::{Nonlinearity, MAX_POWER};
use crate::solver::ForcingFn;
use crate::weights::WeightSpec;
use crate::{Error, Result};

/// Absolute tolerance for the strong-run trace condition `u0(0, y) = 0`.
const TRACE_TOL: f64 = 1e-10;

/// Sample count for weight admissibility and hypothesis sweeps.
const WEIGHT_SAMPLES: usize = 513;

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquationSection {
    pub b: f64,
    pub nonlinearity: String,
    /// Growth exponent of the `power` kind; ignored by the other kinds.
    pub p: f64,
    /// Coefficient of the `cubic` kind.
    pub a: f64,
    /// Sign of the `power` kind, `+1` or `-1`.
    pub sign: f64,
    /// Saturation strength for `g'`; `0` disables the cutoff.
    pub cutoff: f64,
    /// Uniqueness class whose weight hypotheses should be enforced.
    pub uniqueness: String,
}

impl Default for EquationSection {
    fn default() -> Self {
        Self {
            b: 0.0,
            nonlinearity: "quadratic".into(),
            p: 1.0,
            a: 1.0,
            sign: 1.0,
            cutoff: 0.0,
            uniqueness: "none".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSection {
    pub family: String,
    pub length: f64,
    pub x_max: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self { family: "a".into(), length: 1.0, x_max: 30.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationSection {
    pub nx: usize,
    pub ny_modes: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Absorbing-layer strength near the right edge; `0` disables it.
    pub sponge: f64,
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self { nx: 601, ny_modes: 32, dt: 1e-3, t_final: 1.0, sponge: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsSection {
    /// Weight labels tracked by the diagnostics recorder; the first one is
    /// the analysis weight.
    pub tracked: Vec<String>,
}

impl Default for WeightsSection {
    fn default() -> Self {
        Self { tracked: vec!["exp:0.1".into()] }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub kind: String,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// Lateral mode index carrying the bump.
    pub mode: usize,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self { kind: "gaussian".into(), amplitude: 0.01, center: 12.0, width: 2.0, mode: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSection {
    pub kind: String,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// Temporal envelope rate: the pulse carries `e^{-decay t}`.
    pub decay: f64,
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self { kind: "zero".into(), amplitude: 0.0, center: 0.0, width: 1.0, decay: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Named experiment preset to run; absent means a plain simulation.
    pub preset: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    /// Record diagnostics every this many steps.
    pub cadence: usize,
    /// Ensemble seed; kept within 32 bits so the TOML integer type holds it.
    pub seed: u32,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "out".into(), cadence: 50, seed: 42 }
    }
}

/// Everything the binary needs to know about one run.
#[derive(Clone, Debug, PartialEq, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub equation: EquationSection,
    pub domain: DomainSection,
    pub discretization: DiscretizationSection,
    pub weights: WeightsSection,
    pub initial: InitialSection,
    pub forcing: ForcingSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

/// Parse a weight label: `exp:A`, `pow:A`, `rho0`, or `unit`.
pub fn parse_weight(label: &str) -> Result<WeightSpec> {
    let s = label.trim();
    let rate = |rest: &str| {
        rest.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad weight rate in {label:?}")))
    };
    if let Some(rest) = s.strip_prefix("exp:") {
        WeightSpec::exponential(rate(rest)?)
    } else if let Some(rest) = s.strip_prefix("pow:") {
        WeightSpec::power(rate(rest)?)
    } else {
        match s {
            "rho0" => Ok(WeightSpec::rho0()),
            "unit" => Ok(WeightSpec::unit()),
            other => Err(Error::Config(format!(
                "unknown weight label {other:?} (expected exp:A, pow:A, rho0, or unit)"
            ))),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("plain config data serializes")
    }

    pub fn family(&self) -> Result<BcFamily> {
        BcFamily::parse(&self.domain.family)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let e = &self.equation;
        let nl = match e.nonlinearity.as_str() {
            "none" | "linear" => return Ok(Nonlinearity::none()),
            "quadratic" => Nonlinearity::quadratic(),
            "cubic" => Nonlinearity::cubic(e.a)?,
            "power" => Nonlinearity::power_law(e.p, e.sign)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown nonlinearity {other:?} (expected none, quadratic, cubic, or power)"
                )))
            }
        };
        if e.cutoff != 0.0 {
            return nl.with_cutoff(e.cutoff);
        }
        Ok(nl)
    }

    pub fn tracked_weights(&self) -> Result<Vec<WeightSpec>> {
        self.weights.tracked.iter().map(|s| parse_weight(s)).collect()
    }

    /// The first tracked weight, against which hypothesis classes are
    /// checked.
    pub fn analysis_weight(&self) -> Option<WeightSpec> {
        self.weights.tracked.first().and_then(|s| parse_weight(s).ok())
    }

    /// Exponent of the first tracked exponential weight, if any: the `alpha`
    /// of a decay run.
    pub fn decay_alpha(&self) -> Option<f64> {
        self.weights
            .tracked
            .iter()
            .filter_map(|s| parse_weight(s).ok())
            .find(|w| w.label().starts_with("exp:"))
            .and_then(|w| w.alpha())
    }

    /// Initial datum as a modal bump; `None` for the zero datum.
    pub fn initial_bump(&self) -> Result<Option<Bump>> {
        match self.initial.kind.as_str() {
            "zero" => Ok(None),
            "gaussian" => Ok(Some(Bump {
                amplitude: self.initial.amplitude,
                center: self.initial.center,
                width: self.initial.width,
                mode: self.initial.mode,
            })),
            other => Err(Error::Config(format!(
                "unknown initial kind {other:?} (expected zero or gaussian)"
            ))),
        }
    }

    /// Forcing term as a closure; `None` for the unforced equation.
    pub fn forcing_fn(&self) -> Result<Option<Box<ForcingFn>>> {
        match self.forcing.kind.as_str() {
            "zero" => Ok(None),
            "pulse" => {
                let f = &self.forcing;
                let (a, c, w, r) = (f.amplitude, f.center, f.width, f.decay);
                Ok(Some(Box::new(move |t: f64, x: f64, _y: f64| {
                    a * (-((x - c) / w).powi(2)).exp() * (-r * t).exp()
                })))
            }
            other => {
                Err(Error::Config(format!("unknown forcing kind {other:?} (expected zero or pulse)")))
            }
        }
    }

    pub fn preset(&self) -> Result<Option<Preset>> {
        match self.experiment.preset.as_deref() {
            None | Some("") => Ok(None),
            Some(name) => Preset::parse(name).map(Some),
        }
    }

    /// Assemble the decay preset described by this config.
    ///
    /// The run's `alpha` is the exponent of the first tracked exponential
    /// weight; the initial bump, physics, and discretization come from their
    /// sections verbatim.
    pub fn to_decay_preset(&self) -> Result<DecayPreset> {
        let preset = self.preset()?;
        let strong = match preset {
            Some(Preset::DecayStrong) => true,
            Some(Preset::DecayWeak) => false,
            other => {
                return Err(Error::Config(format!(
                    "config selects {:?}, not a decay preset",
                    other.map(|p| p.name())
                )))
            }
        };
        let alpha = self.decay_alpha().ok_or_else(|| {
            Error::Config("decay runs need a tracked exponential weight exp:A".into())
        })?;
        let bump = self.initial_bump()?.unwrap_or(Bump {
            amplitude: 0.0,
            center: 1.0,
            width: 1.0,
            mode: 0,
        });
        Ok(DecayPreset {
            name: if strong { "decay_strong" } else { "decay_weak" },
            family: self.family()?,
            length: self.domain.length,
            b: self.equation.b,
            alpha,
            nl: self.nonlinearity()?,
            bump,
            x_max: self.domain.x_max,
            nx: self.discretization.nx,
            ny_modes: self.discretization.ny_modes,
            dt: self.discretization.dt,
            t_final: self.discretization.t_final,
            strong,
            cadence: self.output.cadence,
        })
    }

    /// Check every structural and analytic precondition; an empty list means
    /// the config is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();

        let family = match self.family() {
            Ok(f) => Some(f),
            Err(e) => {
                v.push(e.to_string());
                None
            }
        };

        // Structural geometry and stepping.
        let d = &self.domain;
        if !(d.length > 0.0) || !d.length.is_finite() {
            v.push(format!("strip width must be positive, got {}", d.length));
        }
        if !(d.x_max > 1.0) || !d.x_max.is_finite() {
            v.push(format!("x_max must exceed 1, got {}", d.x_max));
        }
        let n = &self.discretization;
        if n.nx < 11 {
            v.push(format!("nx must be at least 11, got {}", n.nx));
        }
        if n.ny_modes == 0 {
            v.push("ny_modes must be at least 1".into());
        }
        if !(n.dt > 0.0) || !n.dt.is_finite() {
            v.push(format!("dt must be positive, got {}", n.dt));
        }
        if !(n.t_final >= 0.0) || !n.t_final.is_finite() {
            v.push(format!("t_final must be nonnegative, got {}", n.t_final));
        }
        if !(n.sponge >= 0.0) {
            v.push(format!("sponge strength must be nonnegative, got {}", n.sponge));
        }
        if self.output.cadence == 0 {
            v.push("cadence must be at least 1".into());
        }

        // Nonlinearity growth range.
        if self.equation.nonlinearity == "power"
            && !(0.0..MAX_POWER).contains(&self.equation.p)
        {
            v.push(format!("p outside [0, 8/3): got p = {}", self.equation.p));
        } else if let Err(e) = self.nonlinearity() {
            v.push(e.to_string());
        }

        // Initial datum.
        match self.initial_bump() {
            Err(e) => v.push(e.to_string()),
            Ok(Some(bump)) => {
                if !(bump.width > 0.0) {
                    v.push(format!("initial width must be positive, got {}", bump.width));
                }
                if !bump.amplitude.is_finite() {
                    v.push(format!("initial amplitude must be finite, got {}", bump.amplitude));
                }
                if bump.mode >= n.ny_modes {
                    v.push(format!(
                        "initial mode index {} out of range (ny_modes = {})",
                        bump.mode, n.ny_modes
                    ));
                }
            }
            Ok(None) => {}
        }
        if let Err(e) = self.forcing_fn() {
            v.push(e.to_string());
        } else if self.forcing.kind == "pulse" && !(self.forcing.width > 0.0) {
            v.push(format!("forcing width must be positive, got {}", self.forcing.width));
        }

        // Tracked weights must parse and be admissible on the domain.
        let span = d.x_max.max(2.0);
        let mut weights = Vec::new();
        for label in &self.weights.tracked {
            match parse_weight(label) {
                Err(e) => v.push(e.to_string()),
                Ok(w) => {
                    if d.x_max.is_finite() && d.x_max > 1.0 {
                        let report = w.check_admissibility(span, WEIGHT_SAMPLES);
                        if !report.pass {
                            v.push(format!("weight {label} fails admissibility on [0, {span}]"));
                        }
                    }
                    weights.push(w);
                }
            }
        }

        // Uniqueness-class hypotheses against the analysis weight.
        match self.equation.uniqueness.as_str() {
            "none" => {}
            regime @ ("weak" | "strong") => {
                self.check_uniqueness(regime, weights.first(), span, &mut v)
            }
            other => v.push(format!(
                "unknown uniqueness regime {other:?} (expected none, weak, or strong)"
            )),
        }

        // Preset-specific gates.
        match self.preset() {
            Err(e) => v.push(e.to_string()),
            Ok(Some(p @ (Preset::DecayWeak | Preset::DecayStrong))) => {
                self.check_decay_gates(family, &mut v);
                if p == Preset::DecayStrong {
                    self.check_strong_trace(family, &mut v);
                }
            }
            Ok(_) => {}
        }

        v
    }

    fn check_uniqueness(
        &self,
        regime: &str,
        weight: Option<&WeightSpec>,
        span: f64,
        v: &mut Vec<String>,
    ) {
        let Some(w) = weight else {
            v.push(format!("{regime} uniqueness claimed but no tracked weight to check"));
            return;
        };
        let Ok(nl) = self.nonlinearity() else {
            return; // already reported above
        };
        let p = nl.p_exponent();
        let q = nl.q_exponent();
        if !span.is_finite() || span <= 1.0 {
            return; // geometry already reported above
        }
        let report = w.check_theorem_hypotheses(p, q.unwrap_or(0.0), span, WEIGHT_SAMPLES);
        match regime {
            "weak" => {
                if p > 2.0 {
                    v.push(format!("weak uniqueness needs p <= 2, got p = {p}"));
                }
                if !report.weak_ok {
                    v.push(format!(
                        "weight {} fails the weak-uniqueness condition (inf = {:.3e})",
                        w.label(),
                        report.weak_inf
                    ));
                }
            }
            "strong" => {
                if q.is_none() {
                    v.push(
                        "strong uniqueness needs a slope with a growth-bounded derivative".into(),
                    );
                } else if !report.strong_ok {
                    v.push(format!(
                        "weight {} fails the strong-uniqueness condition (inf = {:.3e})",
                        w.label(),
                        report.strong_inf
                    ));
                }
            }
            _ => unreachable!(),
        }
    }

    fn check_decay_gates(&self, family: Option<BcFamily>, v: &mut Vec<String>) {
        let Some(f) = family else { return };
        let Some(kappa) = f.steklov_kappa() else {
            v.push(format!(
                "decay presets cover families a and c; family {} has no first-mode gap",
                f.letter()
            ));
            return;
        };
        if !(self.domain.length > 0.0) {
            return; // geometry already reported above
        }
        let consts = match decay_constants(kappa, self.domain.length, self.equation.b) {
            Ok(c) => c,
            Err(e) => {
                v.push(e.to_string());
                return;
            }
        };
        if let Some(l0) = consts.l0 {
            if self.domain.length >= l0 {
                v.push(format!(
                    "strip width {} at or above the decay threshold {l0:.5}",
                    self.domain.length
                ));
            }
        }
        match self.decay_alpha() {
            None => v.push("decay runs need a tracked exponential weight exp:A".into()),
            Some(alpha) if alpha > consts.alpha0 + 1e-12 => v.push(format!(
                "weight exponent {alpha} above the admissible cap {:.5}",
                consts.alpha0
            )),
            Some(_) => {}
        }
    }

    fn check_strong_trace(&self, family: Option<BcFamily>, v: &mut Vec<String>) {
        let Some(f) = family else { return };
        let Ok(Some(bump)) = self.initial_bump() else {
            return; // zero datum satisfies the trace condition trivially
        };
        let n = &self.discretization;
        if !(self.domain.length > 0.0)
            || n.ny_modes == 0
            || bump.mode >= n.ny_modes
            || !(bump.width > 0.0)
        {
            return; // structure already reported above
        }
        let Ok(basis) = EigenBasis::new(f, self.domain.length, n.ny_modes) else {
            return;
        };
        let edge = basis
            .nodes()
            .iter()
            .map(|&y| {
                let shape = (-(bump.center / bump.width).powi(2)).exp();
                (bump.amplitude * shape * basis.mode(bump.mode).eval(y)).abs()
            })
            .fold(0.0f64, f64::max);
        if edge > TRACE_TOL {
            v.push(format!(
                "strong runs need vanishing initial data on the left edge; \
                 max |u0(0, y)| = {edge:.3e} exceeds {TRACE_TOL:.1e}"
            ));
        }
    }
}

/// Config equivalent of the stock weak-decay preset.
pub fn decay_weak_config() -> RunConfig {
    RunConfig {
        equation: EquationSection { b: 0.0, ..Default::default() },
        domain: DomainSection { family: "a".into(), length: 1.0, x_max: 30.0 },
        discretization: DiscretizationSection {
            nx: 601,
            ny_modes: 8,
            dt: 2e-3,
            t_final: 50.0,
            sponge: 0.0,
        },
        weights: WeightsSection { tracked: vec!["exp:0.1".into()] },
        initial: InitialSection {
            kind: "gaussian".into(),
            amplitude: 0.01,
            center: 12.0,
            width: 2.0,
            mode: 0,
        },
        experiment: ExperimentSection { preset: Some("decay_weak".into()) },
        ..Default::default()
    }
}

/// Config equivalent of the stock strong-decay preset.
pub fn decay_strong_config() -> RunConfig {
    let mut cfg = decay_weak_config();
    cfg.experiment.preset = Some("decay_strong".into());
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::decay_weak_preset;

    #[test]
    fn empty_text_is_the_default_baseline() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.validate(), Vec::<String>::new());
    }

    #[test]
    fn toml_round_trip_preserves_every_field() {
        let mut cfg = decay_weak_config();
        cfg.equation.uniqueness = "weak".into();
        cfg.forcing =
            ForcingSection { kind: "pulse".into(), amplitude: 0.3, center: 4.0, width: 1.5, decay: 2.0 };
        let text = cfg.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        assert!(RunConfig::from_toml("[domain]\nwidth = 2.0\n").is_err());
        assert!(RunConfig::from_toml("[simulation]\nnx = 100\n").is_err());
    }

    #[test]
    fn weight_labels_round_trip() {
        for label in ["exp:0.1", "exp:0.25", "pow:1", "rho0", "unit"] {
            assert_eq!(parse_weight(label).unwrap().label(), label);
        }
        assert!(parse_weight("exp:").is_err());
        assert!(parse_weight("exp:-1").is_err());
        assert!(parse_weight("gauss:2").is_err());
    }

    #[test]
    fn growth_exponent_out_of_range_is_flagged() {
        let mut cfg = RunConfig::default();
        cfg.equation.nonlinearity = "power".into();
        cfg.equation.p = 3.0;
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("p outside [0, 8/3)")), "{v:?}");
    }

    #[test]
    fn decay_preset_outside_gap_families_is_flagged() {
        let mut cfg = decay_weak_config();
        cfg.domain.family = "b".into();
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("families a and c")), "{v:?}");
    }

    #[test]
    fn decay_gates_flag_wide_strips_and_steep_weights() {
        let mut cfg = decay_weak_config();
        cfg.equation.b = 1.0; // threshold width ~0.70248 < length 1
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("decay threshold")), "{v:?}");

        let mut cfg = decay_weak_config();
        cfg.weights.tracked = vec!["exp:0.35".into()]; // above alpha0 ~ 0.30094
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("admissible cap")), "{v:?}");

        let mut cfg = decay_weak_config();
        cfg.weights.tracked = vec!["unit".into()];
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("exponential weight")), "{v:?}");
    }

    #[test]
    fn strong_preset_requires_vanishing_edge_data() {
        let mut cfg = decay_strong_config();
        assert_eq!(cfg.validate(), Vec::<String>::new()); // center 12, width 2: edge value ~ e^{-36}

        cfg.initial.center = 2.0;
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("left edge")), "{v:?}");

        cfg.initial.kind = "zero".into();
        assert_eq!(cfg.validate(), Vec::<String>::new());
    }

    #[test]
    fn uniqueness_regimes_accept_growing_weights_and_reject_flat_ones() {
        let mut cfg = RunConfig::default();
        cfg.equation.uniqueness = "weak".into();
        assert_eq!(cfg.validate(), Vec::<String>::new()); // exp:0.1 grows

        cfg.weights.tracked = vec!["unit".into()];
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("weak-uniqueness")), "{v:?}");

        let mut cfg = RunConfig::default();
        cfg.equation.uniqueness = "strong".into();
        assert_eq!(cfg.validate(), Vec::<String>::new());

        cfg.equation.nonlinearity = "power".into();
        cfg.equation.p = 0.5; // slope derivative unbounded near zero
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("strong uniqueness")), "{v:?}");
    }

    #[test]
    fn weak_uniqueness_enforces_the_growth_cap() {
        let mut cfg = RunConfig::default();
        cfg.equation.uniqueness = "weak".into();
        cfg.equation.nonlinearity = "power".into();
        cfg.equation.p = 2.5;
        let v = cfg.validate();
        assert!(v.iter().any(|s| s.contains("p <= 2")), "{v:?}");
    }

    #[test]
    fn structural_mistakes_are_each_reported() {
        let mut cfg = RunConfig::default();
        cfg.domain.length = -1.0;
        cfg.discretization.dt = 0.0;
        cfg.initial.mode = 40; // ny_modes = 32
        cfg.output.cadence = 0;
        let v = cfg.validate();
        for needle in ["strip width", "dt", "mode index", "cadence"] {
            assert!(v.iter().any(|s| s.contains(needle)), "missing {needle} in {v:?}");
        }
    }

    #[test]
    fn config_reproduces_the_stock_decay_preset() {
        let p = decay_weak_config().to_decay_preset().unwrap();
        let stock = decay_weak_preset();
        assert_eq!(p.name, stock.name);
        assert_eq!(p.family, stock.family);
        assert_eq!(p.length, stock.length);
        assert_eq!(p.alpha, stock.alpha);
        assert_eq!(p.bump.amplitude, stock.bump.amplitude);
        assert_eq!(p.bump.center, stock.bump.center);
        assert_eq!(p.nx, stock.nx);
        assert_eq!(p.ny_modes, stock.ny_modes);
        assert_eq!(p.dt, stock.dt);
        assert_eq!(p.t_final, stock.t_final);
        assert!(!p.strong);
        assert!(decay_strong_config().to_decay_preset().unwrap().strong);
    }

    #[test]
    fn non_decay_configs_refuse_preset_assembly() {
        assert!(RunConfig::default().to_decay_preset().is_err());
        let mut cfg = RunConfig::default();
        cfg.experiment.preset = Some("conservation_drift".into());
        assert!(cfg.to_decay_preset().is_err());
    }
}
