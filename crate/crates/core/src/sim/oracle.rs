//! Monte-Carlo estimate of the probability that a single pair is active,
//! given prescribed endpoint histories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limit::LimitSolution;
use crate::model::PairState;

/// Prescribed history of one endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointPath {
    pub infection: Option<f64>,
    pub recovery: Option<f64>,
}

impl EndpointPath {
    pub const SUSCEPTIBLE: EndpointPath = EndpointPath {
        infection: None,
        recovery: None,
    };

    pub fn infected_at(time: f64) -> Self {
        EndpointPath {
            infection: Some(time),
            recovery: None,
        }
    }

    pub fn recovered(infection: f64, recovery: f64) -> Self {
        EndpointPath {
            infection: Some(infection),
            recovery: Some(recovery),
        }
    }

    /// Infection time if infected by `s`.
    fn infected_by(&self, s: f64) -> Option<f64> {
        self.infection.filter(|&tau| tau <= s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub estimate: f64,
    /// Half-width of the normal 95% confidence interval.
    pub half_width: f64,
    pub samples: usize,
}

impl OracleEstimate {
    pub fn std_error(&self) -> f64 {
        self.half_width / 1.96
    }

    pub fn covers(&self, value: f64) -> bool {
        (value - self.estimate).abs() <= self.half_width
    }
}

/// Resampling probability seen by the pair at time `s`, the distribution
/// being the limit's, linear in time between grid points.
fn pi_along(limit: &LimitSolution, u: &EndpointPath, v: &EndpointPath, s: f64) -> f64 {
    let (k, theta) = limit.locate(s).expect("ring inside the horizon");
    let kernels = limit.kernels();
    let at = |k: usize| {
        let view = limit.view(k);
        match (u.infected_by(s), v.infected_by(s)) {
            (None, None) => kernels.eval(PairState::SS, (0.0, 0.0), &view),
            (Some(a), None) | (None, Some(a)) => kernels.eval(PairState::SI, (s - a, 0.0), &view),
            (Some(a), Some(b)) => kernels.eval(PairState::II, (s - a, s - b), &view),
        }
    };
    if theta == 0.0 {
        at(k)
    } else {
        (1.0 - theta) * at(k) + theta * at(k + 1)
    }
}

/// Estimates `P(pair active at t)` from `samples` independent copies of the
/// pair's own dynamics: initial value Bernoulli(`p0`), a rate-`gamma` clock
/// redrawing it Bernoulli(`pi`) while neither endpoint has recovered, and a
/// Bernoulli(`p0`) redraw at each recovery after which the pair is frozen.
/// Only the last redraw before `t` matters: with no recovery by `t` it is the
/// last ring, at `t - Exp(gamma)` (the initial draw if that falls before 0).
pub fn edge_event_probability_oracle(
    limit: &LimitSolution,
    u: EndpointPath,
    v: EndpointPath,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    limit.locate(t)?;
    for p in [&u, &v] {
        if let (Some(a), Some(b)) = (p.infection, p.recovery) {
            if b < a {
                return Err(Error::Domain("recovery before infection".into()));
            }
        }
        if p.infection.is_none() && p.recovery.is_some() {
            return Err(Error::Domain("recovery without infection".into()));
        }
    }
    let p0 = limit.config().model.p0;
    let gamma = limit.config().model.gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let recovered = [u.recovery, v.recovery].iter().flatten().any(|&r| r <= t);
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = if recovered {
            p0
        } else {
            let back = if gamma > 0.0 {
                rng.sample::<f64, _>(Exp1) / gamma
            } else {
                f64::INFINITY
            };
            let s = t - back;
            if s < 0.0 {
                p0
            } else {
                pi_along(limit, &u, &v, s)
            }
        };
        if rng.random::<f64>() < p {
            hits += 1;
        }
    }
    let m = samples as f64;
    let est = hits as f64 / m;
    Ok(OracleEstimate {
        estimate: est,
        half_width: 1.96 * (est * (1.0 - est) / m).sqrt(),
        samples,
    })
}
