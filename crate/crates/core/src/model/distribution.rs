//! Type distributions.
//!
//! A type distribution at time `t` is a distribution function on
//! `[-1, T + 1]` with an atom `p_S` at `-1`, the infected mass spread over
//! ages in `[0, t]` and an atom `p_R` at `T + 1`. Mass infected "now" sits at
//! age `0+`: it is not counted by `F(0)` (so `F(0) = p_S`) but is counted by
//! `F(y)` for every `y > 0`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Masses {
    pub susceptible: f64,
    pub infected: f64,
    pub recovered: f64,
}

impl Masses {
    pub fn total(&self) -> f64 {
        self.susceptible + self.infected + self.recovered
    }
}

/// Read-only queries on a type distribution at a fixed time.
pub trait DistributionView: Sync {
    fn time(&self) -> f64;
    fn horizon(&self) -> f64;
    fn masses(&self) -> Masses;
    /// Right-continuous distribution function `F(t; y)`.
    fn cdf(&self, y: f64) -> f64;

    /// Threat level `F(t; a) - F(t; 0)`: infected mass with age in `(0, a]`,
    /// age-zero mass included.
    fn phi(&self, window: f64) -> f64 {
        let m = self.masses();
        if window >= self.time() {
            return m.infected;
        }
        (self.cdf(window) - self.cdf(0.0)).clamp(0.0, m.infected)
    }
}

/// Shared CDF logic for a distribution stored as infected atoms.
fn atom_cdf(p_s: f64, ages: &[f64], cum: &[f64], time: f64, horizon: f64, y: f64) -> f64 {
    if y < -1.0 {
        0.0
    } else if y >= horizon + 1.0 {
        1.0
    } else if y <= 0.0 {
        p_s
    } else if y >= time {
        p_s + cum.last().copied().unwrap_or(0.0)
    } else {
        // number of atoms with age <= y
        let k = ages.partition_point(|&a| a <= y);
        if k == 0 {
            p_s
        } else {
            p_s + cum[k - 1]
        }
    }
}

/// A type distribution with finitely many infected atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeDistribution {
    time: f64,
    horizon: f64,
    p_s: f64,
    p_r: f64,
    ages: Vec<f64>,
    /// `cum[k]` is the infected mass with age `<= ages[k]`.
    cum: Vec<f64>,
}

impl TypeDistribution {
    /// Builds a distribution from the susceptible and recovered atoms and a
    /// list of `(age, mass)` infected atoms in any order. Atoms at equal ages
    /// are merged.
    pub fn new(
        time: f64,
        horizon: f64,
        p_s: f64,
        infected: impl IntoIterator<Item = (f64, f64)>,
        p_r: f64,
    ) -> Result<Self> {
        if !(time.is_finite() && time >= 0.0 && horizon.is_finite() && time <= horizon + 1e-9) {
            return Err(Error::Contract(format!(
                "time {time} must lie in [0, horizon = {horizon}]"
            )));
        }
        let mut atoms: Vec<(f64, f64)> = infected.into_iter().collect();
        for &(age, mass) in &atoms {
            if !(age.is_finite() && age >= 0.0 && age <= time + 1e-9) {
                return Err(Error::Contract(format!("infection age {age} outside [0, {time}]")));
            }
            if !(mass.is_finite() && mass >= 0.0) {
                return Err(Error::Contract(format!("negative or non-finite mass {mass}")));
            }
        }
        if !(p_s >= 0.0 && p_r >= 0.0) {
            return Err(Error::Contract("negative atom mass".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ages: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut cum: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for (age, mass) in atoms {
            if mass == 0.0 {
                continue;
            }
            acc += mass;
            if ages.last() == Some(&age) {
                *cum.last_mut().unwrap() = acc;
            } else {
                ages.push(age.min(time));
                cum.push(acc);
            }
        }
        let total = p_s + acc + p_r;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!("total mass {total} differs from one")));
        }
        Ok(TypeDistribution {
            time,
            horizon,
            p_s,
            p_r,
            ages,
            cum,
        })
    }

    /// Distribution of the given vertex types at time `t`.
    pub fn from_types(time: f64, horizon: f64, types: &[f64]) -> Result<Self> {
        let n = types.len();
        if n == 0 {
            return Err(Error::Contract("empty type list".into()));
        }
        let w = 1.0 / n as f64;
        let mut ns = 0usize;
        let mut nr = 0usize;
        let mut infected = Vec::new();
        for &y in types {
            if y == -1.0 {
                ns += 1;
            } else if y == horizon + 1.0 {
                nr += 1;
            } else {
                infected.push(y);
            }
        }
        let ni = infected.len();
        infected.sort_by(f64::total_cmp);
        // counts are merged before scaling so masses are exact multiples of 1/n
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut i = 0;
        while i < ni {
            let mut j = i;
            while j < ni && infected[j] == infected[i] {
                j += 1;
            }
            atoms.push((infected[i], (j - i) as f64 * w));
            i = j;
        }
        let p_s = ns as f64 * w;
        let p_r = nr as f64 * w;
        let mut d = Self::new(time, horizon, p_s, atoms, p_r)?;
        // exact cumulative counts, free of summation drift
        let mut count = 0usize;
        let mut k = 0;
        for idx in 0..d.ages.len() {
            while k < ni && infected[k] <= d.ages[idx] {
                k += 1;
                count += 1;
            }
            d.cum[idx] = count as f64 * w;
        }
        Ok(d)
    }

    pub fn infected_atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ages.iter().enumerate().map(move |(k, &a)| {
            let prev = if k == 0 { 0.0 } else { self.cum[k - 1] };
            (a, self.cum[k] - prev)
        })
    }

    /// `F̄(x) = inf{u : F(u) > x}` for `x` in `[0, 1)`.
    pub fn generalized_inverse(&self, x: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "generalized inverse needs a level in [0, 1), got {x}"
            )));
        }
        if x < self.p_s {
            return Ok(-1.0);
        }
        let k = self.cum.partition_point(|&c| self.p_s + c <= x);
        if k < self.ages.len() {
            Ok(self.ages[k])
        } else {
            Ok(self.horizon + 1.0)
        }
    }

    pub fn phi_window(&self, window: f64) -> f64 {
        self.phi(window)
    }

    /// The distribution function as a step function. The age-zero atom is
    /// placed at 0.
    pub fn to_step_cdf(&self) -> StepCdf {
        let mut locs = vec![-1.0];
        let mut levels = vec![self.p_s];
        for (k, &a) in self.ages.iter().enumerate() {
            locs.push(a);
            levels.push(self.p_s + self.cum[k]);
        }
        locs.push(self.horizon + 1.0);
        levels.push(1.0);
        StepCdf::from_sorted_unchecked(locs, levels)
    }
}

impl DistributionView for TypeDistribution {
    fn time(&self) -> f64 {
        self.time
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn masses(&self) -> Masses {
        let infected = self.cum.last().copied().unwrap_or(0.0);
        Masses {
            susceptible: self.p_s,
            infected,
            recovered: self.p_r,
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        atom_cdf(self.p_s, &self.ages, &self.cum, self.time, self.horizon, y)
    }
}

/// A right-continuous step distribution function with jumps at `locs`;
/// `levels[k]` is the value on `[locs[k], locs[k + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    locs: Vec<f64>,
    levels: Vec<f64>,
}

impl StepCdf {
    /// Validates strictly increasing finite locations and non-decreasing
    /// levels in `[0, 1]` ending at one.
    pub fn new(locs: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if locs.is_empty() || locs.len() != levels.len() {
            return Err(Error::Contract(
                "step cdf needs equally many (at least one) locations and levels".into(),
            ));
        }
        if locs.iter().any(|x| !x.is_finite()) || locs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract(
                "step cdf locations must be finite and strictly increasing".into(),
            ));
        }
        if levels.iter().any(|&l| !(0.0..=1.0).contains(&l)) {
            return Err(Error::Contract("step cdf levels must lie in [0, 1]".into()));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract("step cdf is not monotone".into()));
        }
        if (levels[levels.len() - 1] - 1.0).abs() > 1e-9 {
            return Err(Error::Contract("step cdf must end at level one".into()));
        }
        Ok(StepCdf { locs, levels })
    }

    /// Builds the distribution function of finitely many weighted atoms.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut atoms = atoms.to_vec();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locs: Vec<f64> = Vec::new();
        let mut levels: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for (x, m) in atoms {
            if m < 0.0 || !m.is_finite() {
                return Err(Error::Contract(format!("invalid atom mass {m}")));
            }
            acc += m;
            if locs.last() == Some(&x) {
                *levels.last_mut().unwrap() = acc.min(1.0);
            } else {
                locs.push(x);
                levels.push(acc.min(1.0));
            }
        }
        Self::new(locs, levels)
    }

    fn from_sorted_unchecked(locs: Vec<f64>, mut levels: Vec<f64>) -> Self {
        for l in levels.iter_mut() {
            *l = l.clamp(0.0, 1.0);
        }
        for k in 1..levels.len() {
            if levels[k] < levels[k - 1] {
                levels[k] = levels[k - 1];
            }
        }
        StepCdf { locs, levels }
    }

    pub fn locations(&self) -> &[f64] {
        &self.locs
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.locs.partition_point(|&l| l <= x);
        if k == 0 {
            0.0
        } else {
            self.levels[k - 1]
        }
    }
}
