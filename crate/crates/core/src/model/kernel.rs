//! Edge resampling kernels and infectivity.
//!
//! When the clock of a pair fires, the edge is redrawn active with
//! probability `pi_SS`, `pi_SI(age)` or `pi_II(age, age)` depending on the
//! states of its endpoints. Kernels see the current type distribution only
//! through a [`DistributionView`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::distribution::{DistributionView, TypeDistribution};
use super::levy::levy_distance;
use crate::error::{Error, Result};

/// Default density bound for the declared Lipschitz constant of the
/// behavioral kernel.
pub const DEFAULT_DENSITY_BOUND: f64 = 10.0;

const CONTROL_LOW: f64 = 0.1;
const CONTROL_HIGH: f64 = 0.9;

/// Behavioral control `d(phi)`: 0.1 up to `phi1`, 0.9 from `phi2`, linear in
/// between.
pub fn behavioral_control(phi: f64, phi1: f64, phi2: f64) -> Result<f64> {
    if !(phi1 > 0.0 && phi1 < phi2) {
        return Err(Error::config(
            "kernel.phi1",
            format!("thresholds must satisfy 0 < phi1 < phi2, got {phi1}, {phi2}"),
        ));
    }
    Ok(control(phi, phi1, phi2))
}

#[inline]
fn control(phi: f64, phi1: f64, phi2: f64) -> f64 {
    if phi <= phi1 {
        CONTROL_LOW
    } else if phi >= phi2 {
        CONTROL_HIGH
    } else {
        CONTROL_LOW + (CONTROL_HIGH - CONTROL_LOW) * (phi - phi1) / (phi2 - phi1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairState {
    SS,
    SI,
    II,
}

/// Threat-driven mixture between a normal and a distancing mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehavioralKernel {
    pub phi1: f64,
    pub phi2: f64,
    pub window: f64,
    pub ss_norm: f64,
    pub ss_dist: f64,
    pub si_norm: f64,
    pub si_dist: f64,
    pub pi_ii: f64,
}

impl BehavioralKernel {
    pub fn control(&self, phi: f64) -> f64 {
        control(phi, self.phi1, self.phi2)
    }

    pub fn pi_ss_at(&self, phi: f64) -> f64 {
        let d = self.control(phi);
        (1.0 - d) * self.ss_norm + d * self.ss_dist
    }

    pub fn pi_si_at(&self, phi: f64) -> f64 {
        let d = self.control(phi);
        (1.0 - d) * self.si_norm + d * self.si_dist
    }

    /// Lipschitz constant with respect to the Lévy distance, valid for
    /// distributions whose infected part has density at most
    /// `density_bound`. Atoms break Lipschitz continuity of `phi`, hence the
    /// bound.
    pub fn lipschitz_constant(&self, density_bound: f64) -> f64 {
        let slope = (CONTROL_HIGH - CONTROL_LOW) / (self.phi2 - self.phi1);
        let spread = (self.ss_norm - self.ss_dist)
            .abs()
            .max((self.si_norm - self.si_dist).abs());
        slope * spread * 2.0 * (1.0 + density_bound)
    }
}

/// Piecewise-linear function through `(xs[k], ys[k])`, constant beyond the
/// end points.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    /// `xs` must be strictly increasing and of the same non-zero length as
    /// `ys` (checked by config validation).
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(!xs.is_empty() && xs.len() == ys.len());
        PiecewiseLinear { xs, ys }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&p| p <= x);
        if k == 0 {
            return self.ys[0];
        }
        if k == self.xs.len() {
            return self.ys[k - 1];
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn lipschitz(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max)
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }
}

/// User-supplied resampling probabilities. Values are clamped to `[0, 1]`.
pub trait PairKernel: Send + Sync {
    fn pi_ss(&self, view: &dyn DistributionView) -> f64;
    fn pi_si(&self, age: f64, view: &dyn DistributionView) -> f64;
    /// `older >= younger` are the two infection ages.
    fn pi_ii(&self, older: f64, younger: f64, view: &dyn DistributionView) -> f64;
}

#[derive(Clone)]
pub enum EdgeKernel {
    Constant { ss: f64, si: f64, ii: f64 },
    Behavioral(BehavioralKernel),
    AgeTable { ss: f64, si: PiecewiseLinear, ii: f64 },
    Custom(Arc<dyn PairKernel>),
}

impl fmt::Debug for EdgeKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKernel::Constant { ss, si, ii } => f
                .debug_struct("Constant")
                .field("ss", ss)
                .field("si", si)
                .field("ii", ii)
                .finish(),
            EdgeKernel::Behavioral(k) => f.debug_tuple("Behavioral").field(k).finish(),
            EdgeKernel::AgeTable { ss, si, ii } => f
                .debug_struct("AgeTable")
                .field("ss", ss)
                .field("si", si)
                .field("ii", ii)
                .finish(),
            EdgeKernel::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Infectivity as a function of infection age, with values in `[0, 1]`.
#[derive(Clone)]
pub enum Infectivity {
    Unit,
    Table(PiecewiseLinear),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Infectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infectivity::Unit => f.write_str("Unit"),
            Infectivity::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Infectivity::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Infectivity {
    #[inline]
    pub fn eval(&self, age: f64) -> f64 {
        match self {
            Infectivity::Unit => 1.0,
            Infectivity::Table(t) => t.eval(age).clamp(0.0, 1.0),
            Infectivity::Custom(g) => g(age).clamp(0.0, 1.0),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Infectivity::Unit)
    }
}

/// Everything the dynamics need to know about edges and infectivity.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub edges: EdgeKernel,
    pub infectivity: Infectivity,
    /// Declared Lipschitz constant.
    pub lipschitz: f64,
}

impl KernelSet {
    pub fn new(edges: EdgeKernel, infectivity: Infectivity, lipschitz: f64) -> Self {
        KernelSet {
            edges,
            infectivity,
            lipschitz,
        }
    }

    pub fn constant(ss: f64, si: f64, ii: f64) -> Self {
        KernelSet::new(EdgeKernel::Constant { ss, si, ii }, Infectivity::Unit, 0.0)
    }

    pub fn with_infectivity(mut self, infectivity: Infectivity) -> Self {
        self.infectivity = infectivity;
        self
    }

    /// Window of the threat level the kernel reacts to, if any.
    pub fn phi_window(&self) -> Option<f64> {
        match &self.edges {
            EdgeKernel::Behavioral(k) => Some(k.window),
            _ => None,
        }
    }

    /// Whether kernel values depend on the type distribution.
    pub fn depends_on_distribution(&self) -> bool {
        matches!(self.edges, EdgeKernel::Behavioral(_) | EdgeKernel::Custom(_))
    }

    pub fn pi_ss(&self, view: &dyn DistributionView) -> f64 {
        match &self.edges {
            EdgeKernel::Constant { ss, .. } | EdgeKernel::AgeTable { ss, .. } => *ss,
            EdgeKernel::Behavioral(k) => k.pi_ss_at(view.phi(k.window)),
            EdgeKernel::Custom(c) => c.pi_ss(view).clamp(0.0, 1.0),
        }
    }

    pub fn pi_si(&self, age: f64, view: &dyn DistributionView) -> f64 {
        match &self.edges {
            EdgeKernel::Constant { si, .. } => *si,
            EdgeKernel::AgeTable { si, .. } => si.eval(age).clamp(0.0, 1.0),
            EdgeKernel::Behavioral(k) => k.pi_si_at(view.phi(k.window)),
            EdgeKernel::Custom(c) => c.pi_si(age, view).clamp(0.0, 1.0),
        }
    }

    /// Ages may be passed in either order.
    pub fn pi_ii(&self, u: f64, v: f64, view: &dyn DistributionView) -> f64 {
        let (older, younger) = if u >= v { (u, v) } else { (v, u) };
        match &self.edges {
            EdgeKernel::Constant { ii, .. } | EdgeKernel::AgeTable { ii, .. } => *ii,
            EdgeKernel::Behavioral(k) => k.pi_ii,
            EdgeKernel::Custom(c) => c.pi_ii(older, younger, view).clamp(0.0, 1.0),
        }
    }

    /// Resampling probability for a pair in state `pair`. For `SI` the age of
    /// the infected endpoint is `ages.0`.
    pub fn eval(&self, pair: PairState, ages: (f64, f64), view: &dyn DistributionView) -> f64 {
        match pair {
            PairState::SS => self.pi_ss(view),
            PairState::SI => self.pi_si(ages.0, view),
            PairState::II => self.pi_ii(ages.0, ages.1, view),
        }
    }

    /// `pi_SS` when it is a constant.
    pub fn pi_ss_constant(&self) -> Option<f64> {
        match &self.edges {
            EdgeKernel::Constant { ss, .. } | EdgeKernel::AgeTable { ss, .. } => Some(*ss),
            EdgeKernel::Behavioral(k) if k.ss_norm == k.ss_dist => Some(k.ss_norm),
            _ => None,
        }
    }

    /// `pi_SI(age)` when it does not depend on the distribution.
    pub fn pi_si_age_only(&self, age: f64) -> Option<f64> {
        match &self.edges {
            EdgeKernel::Constant { si, .. } => Some(*si),
            EdgeKernel::AgeTable { si, .. } => Some(si.eval(age).clamp(0.0, 1.0)),
            EdgeKernel::Behavioral(k) if k.si_norm == k.si_dist => Some(k.si_norm),
            _ => None,
        }
    }

    /// No global feedback: `pi_SS` is identically `p0` and `pi_SI` depends on
    /// the infection age only.
    pub fn no_global_feedback(&self, p0: f64) -> bool {
        self.pi_ss_constant() == Some(p0) && self.pi_si_age_only(0.0).is_some()
    }

    /// Largest observed ratio `|pi(F) - pi(G)| / d_L(F, G)` over random pairs
    /// of distributions whose infected part has density at most
    /// `density_bound` (atoms of mass at most `density_bound * h` on an age
    /// grid of spacing `h`). Only the distribution-dependent `SS` and `SI`
    /// values are compared.
    pub fn sampled_lipschitz_ratio(&self, density_bound: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let horizon = 5.0;
        let h = 0.02;
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let t: f64 = rng.random_range(0.5..horizon);
            let cells = (t / h).floor() as usize;
            // window edges fall between grid points (cell centres carry the mass)
            let p_s: f64 = rng.random_range(0.2..0.6);
            let cap = density_bound * h;
            let budget = (1.0 - p_s) * rng.random_range(0.2..0.8);
            let mut masses = vec![0.0; cells];
            let mut left = budget;
            for m in masses.iter_mut() {
                let x: f64 = rng.random_range(0.0..cap).min(left);
                *m = x;
                left -= x;
            }
            let p_i: f64 = masses.iter().sum();
            let p_r = 1.0 - p_s - p_i;
            let base = build(t, horizon, p_s, &masses, h, p_r);
            // small perturbation of masses and of the susceptible atom
            let mut pert = masses.clone();
            let mut moved = 0.0;
            for m in pert.iter_mut() {
                let delta: f64 = rng.random_range(-0.002..0.002);
                let nm = (*m + delta).clamp(0.0, cap);
                moved += nm - *m;
                *m = nm;
            }
            let ds: f64 = rng.random_range(-0.003..0.003);
            let q_s = (p_s + ds).max(0.0);
            let q_r = 1.0 - q_s - (p_i + moved);
            if q_r < 0.0 {
                continue;
            }
            let other = build(t, horizon, q_s, &pert, h, q_r);
            let d = levy_distance(&base.to_step_cdf(), &other.to_step_cdf());
            if d <= 0.0 {
                continue;
            }
            let diff = (self.pi_ss(&base) - self.pi_ss(&other))
                .abs()
                .max((self.pi_si(0.5, &base) - self.pi_si(0.5, &other)).abs());
            worst = worst.max(diff / d);
        }
        worst
    }
}

fn build(t: f64, horizon: f64, p_s: f64, masses: &[f64], h: f64, p_r: f64) -> TypeDistribution {
    let atoms = masses.iter().enumerate().map(|(k, &m)| (((k as f64) + 0.5) * h, m));
    TypeDistribution::new(t, horizon, p_s, atoms, p_r.max(0.0)).expect("sampled distribution is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_kernel() -> BehavioralKernel {
        BehavioralKernel {
            phi1: 0.24,
            phi2: 0.28,
            window: 1.0,
            ss_norm: 0.9,
            ss_dist: 0.3,
            si_norm: 0.6,
            si_dist: 0.01,
            pi_ii: 0.3,
        }
    }

    #[test]
    fn control_branches() {
        assert_eq!(behavioral_control(0.1, 0.24, 0.28).unwrap(), 0.1);
        assert!((behavioral_control(0.26, 0.24, 0.28).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(behavioral_control(0.30, 0.24, 0.28).unwrap(), 0.9);
        assert!(matches!(behavioral_control(0.1, 0.3, 0.3), Err(Error::Config { .. })));
    }

    #[test]
    fn si_levels_in_the_two_modes() {
        let k = paper_kernel();
        assert!((k.pi_si_at(0.5) - 0.069).abs() < 1e-12);
        assert!((k.pi_si_at(0.0) - 0.541).abs() < 1e-12);
    }

    #[test]
    fn constant_kernel_ignores_view() {
        let ks = KernelSet::constant(0.2, 0.7, 0.4);
        let d = TypeDistribution::new(1.0, 5.0, 0.5, [(0.3, 0.3)], 0.2).unwrap();
        assert_eq!(ks.eval(PairState::SI, (0.3, 0.0), &d), 0.7);
        assert_eq!(ks.eval(PairState::II, (0.1, 0.9), &d), 0.4);
        assert!(ks.no_global_feedback(0.2));
        assert!(!ks.no_global_feedback(0.3));
    }

    #[test]
    fn declared_lipschitz_dominates_samples() {
        let k = paper_kernel();
        let ks = KernelSet::new(
            EdgeKernel::Behavioral(k),
            Infectivity::Unit,
            k.lipschitz_constant(DEFAULT_DENSITY_BOUND),
        );
        let ratio = ks.sampled_lipschitz_ratio(DEFAULT_DENSITY_BOUND, 300, 11);
        assert!(ratio <= ks.lipschitz, "{ratio} > {}", ks.lipschitz);
    }

    #[test]
    fn piecewise_linear_interpolates_and_clamps() {
        let p = PiecewiseLinear::new(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 0.0]);
        assert_eq!(p.eval(-1.0), 0.0);
        assert_eq!(p.eval(0.5), 0.5);
        assert_eq!(p.eval(2.0), 0.5);
        assert_eq!(p.eval(9.0), 0.0);
        assert_eq!(p.lipschitz(), 1.0);
    }
}
