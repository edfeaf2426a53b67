//! On-demand evaluation of `H`, `F` and `J` from the stored history.

use super::{relax_step, LimitSolution};
use crate::error::{Error, Result};
use crate::model::DistributionView;

/// What the pair looks like during a stretch of its history.
#[derive(Clone, Copy)]
enum Segment {
    /// Both endpoints susceptible.
    Ss,
    /// One endpoint infected at `tau`.
    Si { tau: f64 },
    /// Endpoints infected at `tau1 <= tau2`.
    Ii { tau1: f64, tau2: f64 },
}

impl LimitSolution {
    /// Kernel value for `seg` at node time `s` using the view at grid `k`.
    fn pi_at(&self, seg: Segment, k: usize, s: f64) -> f64 {
        let view = self.view(k);
        match seg {
            Segment::Ss => self.pi_ss[k],
            Segment::Si { tau } => self.kernels.pi_si((s - tau).max(0.0), &view),
            Segment::Ii { tau1, tau2 } => self.kernels.pi_ii((s - tau1).max(0.0), (s - tau2).max(0.0), &view),
        }
    }

    /// Kernel value at an arbitrary node, linear in `t` between grid views.
    fn pi_node(&self, seg: Segment, s: f64) -> f64 {
        let (k, theta) = self.locate(s).expect("node inside the horizon");
        if theta == 0.0 {
            self.pi_at(seg, k, s)
        } else {
            (1.0 - theta) * self.pi_at(seg, k, s) + theta * self.pi_at(seg, k + 1, s)
        }
    }

    /// Advances `X' = gamma (pi - X)` from `a` to `b` over the nodes
    /// `{a} ∪ grid ∩ (a, b) ∪ {b}`, `pi` linear between nodes.
    fn propagate(&self, x0: f64, a: f64, b: f64, seg: Segment) -> f64 {
        if b <= a {
            return x0;
        }
        let g = self.config.model.gamma;
        let dt = self.dt;
        let mut nodes = Vec::new();
        nodes.push(a);
        let first = (a / dt + 1e-9).floor() as usize + 1;
        let mut k = first;
        while (k as f64) * dt < b - 1e-9 * dt {
            let s = self.times[k];
            if s > a + 1e-9 * dt {
                nodes.push(s);
            }
            k += 1;
        }
        nodes.push(b);
        let mut x = x0;
        let mut prev = self.pi_node(seg, a);
        for win in nodes.windows(2) {
            let cur = self.pi_node(seg, win[1]);
            x = relax_step(x, prev, cur, g, win[1] - win[0]);
            prev = cur;
        }
        x
    }

    /// Susceptible-susceptible background `B(s)`; stored on the grid.
    fn background_at(&self, s: f64) -> f64 {
        match self.locate(s) {
            Ok((k, 0.0)) => self.background[k],
            _ => self.propagate(self.config.model.p0, 0.0, s, Segment::Ss),
        }
    }

    /// Checks a type value at time `t`; returns the infection time for
    /// infected types, `None` for a susceptible and `Err` otherwise.
    fn infection_time(&self, t: f64, y: f64) -> Result<Option<f64>> {
        if y == -1.0 {
            return Ok(None);
        }
        if y.is_finite() && y >= 0.0 && y <= t + 1e-9 {
            return Ok(Some((t - y).max(0.0)));
        }
        Err(Error::Domain(format!(
            "type {y} is not -1, an age in [0, {t}] or {}",
            self.horizon() + 1.0
        )))
    }

    /// Probability that an edge between vertices of types `u` and `v` is
    /// active at time `t`.
    pub fn eval_h(&self, t: f64, u: f64, v: f64) -> Result<f64> {
        self.locate(t)?;
        let recovered = self.horizon() + 1.0;
        let p0 = self.config.model.p0;
        if u == recovered || v == recovered {
            // still validate the other argument
            for y in [u, v] {
                if y != recovered {
                    self.infection_time(t, y)?;
                }
            }
            return Ok(p0);
        }
        let tu = self.infection_time(t, u)?;
        let tv = self.infection_time(t, v)?;
        let h = match (tu, tv) {
            (None, None) => self.background_at(t),
            (Some(tau), None) | (None, Some(tau)) => {
                let b = self.background_at(tau);
                self.propagate(b, tau, t, Segment::Si { tau })
            }
            (Some(x), Some(y)) => {
                let (tau1, tau2) = if x <= y { (x, y) } else { (y, x) };
                let b = self.background_at(tau1);
                let s = self.propagate(b, tau1, tau2, Segment::Si { tau: tau1 });
                self.propagate(s, tau2, t, Segment::Ii { tau1, tau2 })
            }
        };
        Ok(h.clamp(0.0, 1.0))
    }

    /// Limiting distribution function `F(t; y)`, linear in `t` between grid
    /// times.
    pub fn eval_f(&self, t: f64, y: f64) -> Result<f64> {
        let (k, theta) = self.locate(t)?;
        let a = self.view(k).cdf(y);
        if theta == 0.0 {
            Ok(a)
        } else {
            Ok((1.0 - theta) * a + theta * self.view(k + 1).cdf(y))
        }
    }

    /// Generalized inverse `inf{y : F(t; y) > x}` of the limiting
    /// distribution at grid index `k`.
    pub fn generalized_inverse(&self, k: usize, x: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "generalized inverse needs a level in [0, 1), got {x}"
            )));
        }
        let p_s = self.p_s[k];
        if x < p_s {
            return Ok(-1.0);
        }
        // infected cohorts ordered by increasing age: b = k, k-1, ..., 0
        let mut acc = p_s;
        for b in (0..=k).rev() {
            acc += self.cohort_mass(b, k);
            if acc > x {
                return Ok((k - b) as f64 * self.dt);
            }
        }
        Ok(self.horizon() + 1.0)
    }

    /// Recomputes the force of infection at grid index `k` from `eval_h`.
    pub fn eval_j(&self, k: usize) -> Result<f64> {
        let t = self.times[k];
        let mut total = 0.0;
        for b in 0..=k {
            let age = t - self.times[b];
            let h = self.eval_h(t, -1.0, age)?;
            total += self.cohort_mass(b, k) * h * self.kernels.infectivity.eval(age);
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use crate::config::ScenarioConfig;
    use crate::limit::solve;

    #[test]
    fn recovered_and_time_zero_give_p0() {
        let sol = solve(&ScenarioConfig::behavioral_double_peak().with_steps(200)).unwrap();
        assert_eq!(sol.eval_h(2.0, 6.0, -1.0).unwrap(), 0.1);
        assert_eq!(sol.eval_h(2.0, 0.5, 6.0).unwrap(), 0.1);
        assert_eq!(sol.eval_h(0.0, -1.0, -1.0).unwrap(), 0.1);
        assert_eq!(sol.eval_h(0.0, -1.0, 0.0).unwrap(), 0.1);
        assert!(sol.eval_h(1.0, 2.0, -1.0).is_err());
        assert!(sol.eval_h(1.0, -0.5, -1.0).is_err());
        assert!(sol.eval_h(7.0, -1.0, -1.0).is_err());
    }

    #[test]
    fn constant_p0_kernels_give_constant_h() {
        let p0 = 0.3;
        let cfg = ScenarioConfig::constant(p0, 0.1, 3.0, 7.0, 3.0, [p0; 3]).with_steps(300);
        let sol = solve(&cfg).unwrap();
        for &(t, u, v) in &[(1.0, -1.0, -1.0), (2.0, 0.5, -1.0), (2.5, 0.3, 1.7), (1.234, 0.9, 0.1)] {
            assert!((sol.eval_h(t, u, v).unwrap() - p0).abs() < 1e-12);
        }
    }

    #[test]
    fn recomputed_force_matches_stored() {
        let sol = solve(&ScenarioConfig::behavioral_double_peak().with_steps(200)).unwrap();
        for k in [0, 1, 17, 100, 200] {
            let j = sol.eval_j(k).unwrap();
            assert!((j - sol.force()[k]).abs() < 1e-12, "k = {k}: {j} vs {}", sol.force()[k]);
        }
    }

    #[test]
    fn h_is_symmetric() {
        let sol = solve(&ScenarioConfig::behavioral_double_peak().with_steps(200)).unwrap();
        for &(t, u, v) in &[(1.0, -1.0, 0.3), (2.0, 0.5, 1.5), (3.3, 0.2, 3.3)] {
            let a = sol.eval_h(t, u, v).unwrap();
            let b = sol.eval_h(t, v, u).unwrap();
            assert_eq!(a, b);
            assert!((0.0..=1.0).contains(&a));
        }
    }
}
