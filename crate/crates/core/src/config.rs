//! Scenario configuration.
//!
//! A scenario is a small TOML document with four sections:
//!
//! ```toml
//! [model]
//! p0 = 0.1
//! q0 = 0.05
//! lambda = 10.0
//! gamma = 20.0
//! horizon = 5.0
//!
//! [kernel]
//! kind = "behavioral"
//! phi1 = 0.24
//! phi2 = 0.28
//! window = 1.0
//! p_ss_norm = 0.9
//! p_ss_dist = 0.3
//! p_si_norm = 0.6
//! p_si_dist = 0.01
//! pi_ii = 0.3
//!
//! [solver]
//! n_steps = 1000
//! graphon_resolution = 100
//!
//! [sim]
//! n_vertices = 1000
//! base_seed = 7
//! replicates = 100
//! ```
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::kernel::{
    BehavioralKernel, EdgeKernel, Infectivity, KernelSet, PiecewiseLinear, DEFAULT_DENSITY_BOUND,
};

/// Largest supported horizon; the solver keeps cohort prefix sums scaled by
/// `exp(t)`.
pub const MAX_HORIZON: f64 = 600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelParams,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub sim: SimParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Initial edge density.
    pub p0: f64,
    /// Initial infection probability.
    pub q0: f64,
    /// Contact rate.
    pub lambda: f64,
    /// Edge resampling rate.
    pub gamma: f64,
    /// Time horizon `T`.
    pub horizon: f64,
    /// Optional piecewise-linear infectivity profile over infection age.
    /// Absent means infectivity identically one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infectivity_ages: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infectivity_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    /// Constant resampling probabilities.
    Constant { pi_ss: f64, pi_si: f64, pi_ii: f64 },
    /// Threat-level driven distancing between a normal and a distancing mode.
    Behavioral {
        phi1: f64,
        phi2: f64,
        window: f64,
        p_ss_norm: f64,
        p_ss_dist: f64,
        p_si_norm: f64,
        p_si_dist: f64,
        pi_ii: f64,
        /// Density bound of the type distributions over which the declared
        /// Lipschitz constant is claimed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density_bound: Option<f64>,
    },
    /// Constant `pi_ss`, `pi_ii` and a piecewise-linear `pi_si(age)`.
    Table {
        pi_ss: f64,
        pi_ii: f64,
        si_ages: Vec<f64>,
        si_values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    pub n_steps: usize,
    pub graphon_resolution: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            n_steps: 1000,
            graphon_resolution: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimParams {
    pub n_vertices: usize,
    pub base_seed: u64,
    pub replicates: usize,
    /// Number of uniform trajectory samples on `[0, T]`, endpoints included.
    pub sample_points: usize,
    /// Hard cap on the number of processed events per run.
    pub event_budget: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            n_vertices: 1000,
            base_seed: 0,
            replicates: 1,
            sample_points: 500,
            event_budget: 1 << 31,
        }
    }
}

fn check_unit_open(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn check_prob(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(field, format!("must lie in [0, 1], got {v}")))
    }
}

fn check_nonneg(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be finite and >= 0, got {v}")))
    }
}

fn check_table(prefix: &str, xs: &[f64], ys: &[f64], probability: bool) -> Result<()> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::config(
            prefix,
            "age and value tables must be non-empty and of equal length",
        ));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) || xs.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::config(
            prefix,
            "ages must be finite, non-negative and strictly increasing",
        ));
    }
    if probability {
        for y in ys {
            check_prob(prefix, *y)?;
        }
    }
    Ok(())
}

impl ScenarioConfig {
    /// Parses and validates a TOML scenario.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        check_unit_open("model.p0", m.p0)?;
        check_unit_open("model.q0", m.q0)?;
        check_nonneg("model.lambda", m.lambda)?;
        check_nonneg("model.gamma", m.gamma)?;
        if !(m.horizon.is_finite() && m.horizon > 0.0 && m.horizon <= MAX_HORIZON) {
            return Err(Error::config(
                "model.horizon",
                format!("must lie in (0, {MAX_HORIZON}], got {}", m.horizon),
            ));
        }
        match (&m.infectivity_ages, &m.infectivity_values) {
            (None, None) => {}
            (Some(xs), Some(ys)) => check_table("model.infectivity", xs, ys, true)?,
            _ => {
                return Err(Error::config(
                    "model.infectivity_ages",
                    "infectivity_ages and infectivity_values must be given together",
                ))
            }
        }
        match &self.kernel {
            KernelSpec::Constant { pi_ss, pi_si, pi_ii } => {
                check_prob("kernel.pi_ss", *pi_ss)?;
                check_prob("kernel.pi_si", *pi_si)?;
                check_prob("kernel.pi_ii", *pi_ii)?;
            }
            KernelSpec::Behavioral {
                phi1,
                phi2,
                window,
                p_ss_norm,
                p_ss_dist,
                p_si_norm,
                p_si_dist,
                pi_ii,
                density_bound,
            } => {
                if !(phi1.is_finite() && phi2.is_finite() && *phi1 > 0.0 && phi1 < phi2) {
                    return Err(Error::config(
                        "kernel.phi1",
                        format!("thresholds must satisfy 0 < phi1 < phi2, got {phi1}, {phi2}"),
                    ));
                }
                if !(window.is_finite() && *window > 0.0) {
                    return Err(Error::config("kernel.window", "must be > 0"));
                }
                check_prob("kernel.p_ss_norm", *p_ss_norm)?;
                check_prob("kernel.p_ss_dist", *p_ss_dist)?;
                check_prob("kernel.p_si_norm", *p_si_norm)?;
                check_prob("kernel.p_si_dist", *p_si_dist)?;
                check_prob("kernel.pi_ii", *pi_ii)?;
                if let Some(d) = density_bound {
                    check_nonneg("kernel.density_bound", *d)?;
                }
            }
            KernelSpec::Table {
                pi_ss,
                pi_ii,
                si_ages,
                si_values,
            } => {
                check_prob("kernel.pi_ss", *pi_ss)?;
                check_prob("kernel.pi_ii", *pi_ii)?;
                check_table("kernel.si", si_ages, si_values, true)?;
            }
        }
        if self.solver.n_steps < 10 {
            return Err(Error::config("solver.n_steps", "must be at least 10"));
        }
        if self.solver.graphon_resolution == 0 {
            return Err(Error::config("solver.graphon_resolution", "must be positive"));
        }
        if self.sim.n_vertices < 2 {
            return Err(Error::config("sim.n_vertices", "need at least 2 vertices"));
        }
        if self.sim.replicates == 0 {
            return Err(Error::config("sim.replicates", "must be positive"));
        }
        if self.sim.sample_points < 2 {
            return Err(Error::config("sim.sample_points", "must be at least 2"));
        }
        if self.sim.event_budget == 0 {
            return Err(Error::config("sim.event_budget", "must be positive"));
        }
        Ok(())
    }

    /// Window length used for the threat level `phi`. Kernels other than the
    /// behavioral one report `phi` over a unit window.
    pub fn phi_window(&self) -> f64 {
        match &self.kernel {
            KernelSpec::Behavioral { window, .. } => *window,
            _ => 1.0,
        }
    }

    /// Recovered-type sentinel `T + 1`.
    pub fn recovered_type(&self) -> f64 {
        self.model.horizon + 1.0
    }

    /// Builds the kernel set described by the `[kernel]` section.
    pub fn kernels(&self) -> KernelSet {
        let infectivity = match (&self.model.infectivity_ages, &self.model.infectivity_values) {
            (Some(xs), Some(ys)) => Infectivity::Table(PiecewiseLinear::new(xs.clone(), ys.clone())),
            _ => Infectivity::Unit,
        };
        match &self.kernel {
            KernelSpec::Constant { pi_ss, pi_si, pi_ii } => KernelSet::new(
                EdgeKernel::Constant {
                    ss: *pi_ss,
                    si: *pi_si,
                    ii: *pi_ii,
                },
                infectivity,
                0.0,
            ),
            KernelSpec::Behavioral {
                phi1,
                phi2,
                window,
                p_ss_norm,
                p_ss_dist,
                p_si_norm,
                p_si_dist,
                pi_ii,
                density_bound,
            } => {
                let k = BehavioralKernel {
                    phi1: *phi1,
                    phi2: *phi2,
                    window: *window,
                    ss_norm: *p_ss_norm,
                    ss_dist: *p_ss_dist,
                    si_norm: *p_si_norm,
                    si_dist: *p_si_dist,
                    pi_ii: *pi_ii,
                };
                let lipschitz = k.lipschitz_constant(density_bound.unwrap_or(DEFAULT_DENSITY_BOUND));
                KernelSet::new(EdgeKernel::Behavioral(k), infectivity, lipschitz)
            }
            KernelSpec::Table {
                pi_ss,
                pi_ii,
                si_ages,
                si_values,
            } => {
                let si = PiecewiseLinear::new(si_ages.clone(), si_values.clone());
                let lipschitz = si.lipschitz();
                KernelSet::new(
                    EdgeKernel::AgeTable {
                        ss: *pi_ss,
                        si,
                        ii: *pi_ii,
                    },
                    infectivity,
                    lipschitz,
                )
            }
        }
    }

    /// The threat-response scenario with two infection waves.
    pub fn behavioral_double_peak() -> Self {
        ScenarioConfig {
            model: ModelParams {
                p0: 0.1,
                q0: 0.05,
                lambda: 10.0,
                gamma: 20.0,
                horizon: 5.0,
                infectivity_ages: None,
                infectivity_values: None,
            },
            kernel: KernelSpec::Behavioral {
                phi1: 0.24,
                phi2: 0.28,
                window: 1.0,
                p_ss_norm: 0.9,
                p_ss_dist: 0.3,
                p_si_norm: 0.6,
                p_si_dist: 0.01,
                pi_ii: 0.3,
                density_bound: None,
            },
            solver: SolverParams::default(),
            sim: SimParams::default(),
        }
    }

    /// A scenario with constant resampling probabilities.
    pub fn constant(p0: f64, q0: f64, lambda: f64, gamma: f64, horizon: f64, pi: [f64; 3]) -> Self {
        ScenarioConfig {
            model: ModelParams {
                p0,
                q0,
                lambda,
                gamma,
                horizon,
                infectivity_ages: None,
                infectivity_values: None,
            },
            kernel: KernelSpec::Constant {
                pi_ss: pi[0],
                pi_si: pi[1],
                pi_ii: pi[2],
            },
            solver: SolverParams::default(),
            sim: SimParams::default(),
        }
    }

    pub fn with_steps(mut self, n_steps: usize) -> Self {
        self.solver.n_steps = n_steps;
        self
    }

    pub fn with_vertices(mut self, n: usize) -> Self {
        self.sim.n_vertices = n;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.model.horizon = horizon;
        self
    }
}
