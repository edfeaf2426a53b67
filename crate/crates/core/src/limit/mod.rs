//! Deterministic large-population limit.
//!
//! The limit is an age-structured system: susceptibles are lost at rate
//! `lambda * J(t) * p_S(t)`, newly infected mass enters at age `0+` and every
//! infected cohort recovers at rate one. The force of infection `J` couples
//! the system to the edge-connection kernel `H`, an exponentially weighted
//! average of the resampling probabilities over the history of a pair.
//!
//! [`solve`] marches a uniform grid with one cohort per step. `H` restricted
//! to susceptible-infected pairs is carried along per cohort; the full `H`
//! is evaluated on demand by quadrature over the stored history.

mod characteristics;
mod kernel_h;
mod solver;

pub use characteristics::CharacteristicsReport;
pub use solver::{solve, solve_with_kernels};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::format::csv_row;
use crate::model::{DistributionView, KernelSet, Masses, TypeDistribution};

/// One step of `X' = gamma (pi - X)` over an interval of length `h` with
/// `pi` linear from `pi0` to `pi1`; exact for piecewise-linear `pi`.
#[inline]
pub(crate) fn relax_step(x: f64, pi0: f64, pi1: f64, gamma: f64, h: f64) -> f64 {
    let gh = gamma * h;
    if gh == 0.0 {
        return x;
    }
    let e = (-gh).exp();
    let one_minus_e = -(-gh).exp_m1();
    // (1 - e) / (gamma h), accurate for small gamma h
    let c = if gh < 1e-8 { 1.0 - 0.5 * gh } else { one_minus_e / gh };
    e * x + one_minus_e * pi0 + (pi1 - pi0) * (1.0 - c)
}

/// Solution of the limit system on the grid `t_k = k * dt`, `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct LimitSolution {
    pub(crate) config: ScenarioConfig,
    pub(crate) kernels: KernelSet,
    pub(crate) dt: f64,
    pub(crate) times: Vec<f64>,
    pub(crate) p_s: Vec<f64>,
    pub(crate) p_i: Vec<f64>,
    pub(crate) p_r: Vec<f64>,
    pub(crate) j: Vec<f64>,
    pub(crate) phi: Vec<f64>,
    /// Cohort masses at birth; cohort 0 is the initial atom.
    pub(crate) birth_mass: Vec<f64>,
    /// `w[b] = sum_{c <= b} birth_mass[c] * exp(c * dt)`.
    pub(crate) w: Vec<f64>,
    /// `pi_SS` on the grid.
    pub(crate) pi_ss: Vec<f64>,
    /// Susceptible-susceptible background `B(t_k)`.
    pub(crate) background: Vec<f64>,
    /// `decay[j] = exp(-j * dt)`.
    pub(crate) decay: Vec<f64>,
}

/// The limiting type distribution at grid index `k`.
#[derive(Debug, Clone, Copy)]
pub struct GridView<'a> {
    k: usize,
    dt: f64,
    horizon: f64,
    p_s: f64,
    p_i: f64,
    p_r: f64,
    w: &'a [f64],
}

impl<'a> GridView<'a> {
    pub(crate) fn new(k: usize, dt: f64, horizon: f64, p_s: f64, p_i: f64, p_r: f64, w: &'a [f64]) -> Self {
        GridView {
            k,
            dt,
            horizon,
            p_s,
            p_i,
            p_r,
            w,
        }
    }

    /// Infected mass with age at most `j * dt`, age-zero cohort included.
    fn mass_up_to_steps(&self, j: usize) -> f64 {
        if j >= self.k {
            return self.p_i;
        }
        let lo = self.k - j;
        let scaled = self.w[self.k] - self.w[lo - 1];
        (scaled * (-(self.k as f64) * self.dt).exp()).clamp(0.0, self.p_i)
    }
}

impl DistributionView for GridView<'_> {
    fn time(&self) -> f64 {
        self.k as f64 * self.dt
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn masses(&self) -> Masses {
        Masses {
            susceptible: self.p_s,
            infected: self.p_i,
            recovered: self.p_r,
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        if y < -1.0 {
            0.0
        } else if y >= self.horizon + 1.0 {
            1.0
        } else if y <= 0.0 {
            self.p_s
        } else {
            let j = (y / self.dt + 1e-9).floor();
            let j = if j >= self.k as f64 { self.k } else { j as usize };
            self.p_s + self.mass_up_to_steps(j)
        }
    }

    fn phi(&self, window: f64) -> f64 {
        if window <= 0.0 {
            return 0.0;
        }
        let j = (window / self.dt + 1e-9).floor();
        let j = if j >= self.k as f64 { self.k } else { j as usize };
        self.mass_up_to_steps(j)
    }
}

impl LimitSolution {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn kernels(&self) -> &KernelSet {
        &self.kernels
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.config.model.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn p_s(&self) -> &[f64] {
        &self.p_s
    }

    pub fn p_i(&self) -> &[f64] {
        &self.p_i
    }

    pub fn p_r(&self) -> &[f64] {
        &self.p_r
    }

    /// Force of infection on the grid.
    pub fn force(&self) -> &[f64] {
        &self.j
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn view(&self, k: usize) -> GridView<'_> {
        GridView::new(
            k,
            self.dt,
            self.horizon(),
            self.p_s[k],
            self.p_i[k],
            self.p_r[k],
            &self.w,
        )
    }

    /// Mass at grid index `k` of the cohort born at grid index `b <= k`.
    pub fn cohort_mass(&self, b: usize, k: usize) -> f64 {
        debug_assert!(b <= k);
        self.birth_mass[b] * self.decay[k - b]
    }

    /// `(birth_time, mass_at_T)` for every cohort.
    pub fn cohorts_at_horizon(&self) -> Vec<(f64, f64)> {
        let n = self.n_steps();
        (0..=n).map(|b| (self.times[b], self.cohort_mass(b, n))).collect()
    }

    /// The limiting type distribution at grid index `k` as atoms.
    pub fn type_distribution(&self, k: usize) -> Result<TypeDistribution> {
        let atoms = (0..=k).map(|b| ((k - b) as f64 * self.dt, self.cohort_mass(b, k)));
        let p_r = (1.0 - self.p_s[k] - atoms.clone().map(|a| a.1).sum::<f64>()).max(0.0);
        TypeDistribution::new(self.times[k], self.horizon(), self.p_s[k], atoms, p_r)
    }

    /// Grid index and interpolation weight of `t`.
    pub(crate) fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let horizon = self.horizon();
        if !(t.is_finite() && t >= -1e-12 && t <= horizon + 1e-9) {
            return Err(Error::Domain(format!("time {t} outside [0, {horizon}]")));
        }
        let n = self.n_steps();
        let x = (t.max(0.0) / self.dt).min(n as f64);
        let k = x.floor() as usize;
        let theta = x - k as f64;
        if k >= n || theta < 1e-9 {
            Ok((k.min(n), 0.0))
        } else if theta > 1.0 - 1e-9 {
            Ok((k + 1, 0.0))
        } else {
            Ok((k, theta))
        }
    }

    /// Interpolates a grid array at `t`.
    fn interp(&self, values: &[f64], t: f64) -> Result<f64> {
        let (k, theta) = self.locate(t)?;
        if theta == 0.0 {
            Ok(values[k])
        } else {
            Ok((1.0 - theta) * values[k] + theta * values[k + 1])
        }
    }

    pub fn p_s_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.p_s, t)
    }

    pub fn p_i_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.p_i, t)
    }

    pub fn p_r_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.p_r, t)
    }

    pub fn force_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.j, t)
    }

    /// CSV with header `t,p_S,p_I,p_R,phi,J`.
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("t,p_S,p_I,p_R,phi,J\n");
        for k in 0..self.times.len() {
            out.push_str(&csv_row(&[
                self.times[k],
                self.p_s[k],
                self.p_i[k],
                self.p_r[k],
                self.phi[k],
                self.j[k],
            ]));
            out.push('\n');
        }
        out
    }

    /// CSV with header `birth_time,mass_at_T`.
    pub fn cohort_csv(&self) -> String {
        let mut out = String::from("birth_time,mass_at_T\n");
        for (b, m) in self.cohorts_at_horizon() {
            out.push_str(&csv_row(&[b, m]));
            out.push('\n');
        }
        out
    }
}
