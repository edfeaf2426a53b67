use serde::Serialize;

use super::LimitSolution;

/// Residuals of the discrete solution against the characteristics form of
/// the infected density and against the infected balance law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicsReport {
    /// `max |m_b(k) / dt - e^{-u} lambda J(t_b) p_S(t_b)|` over cohorts
    /// `b >= 1` and grid times `k >= b`, `u = t_k - t_b`.
    pub density: f64,
    /// `max_k |(e^{dt} p_I(t_{k+1}) - p_I(t_k)) / dt - lambda J(t_k) p_S(t_k)|`.
    pub balance: f64,
    /// `max_k |p_S + p_I + p_R - 1|`.
    pub conservation: f64,
    /// `max_k |(p_R(t_{k+1}) - p_R(t_k)) / dt - p_I(t_k)|`.
    pub recovery: f64,
}

impl LimitSolution {
    pub fn check_characteristics(&self) -> CharacteristicsReport {
        let n = self.n_steps();
        let dt = self.dt;
        let lambda = self.config.model.lambda;
        let mut density: f64 = 0.0;
        // m_b(k) / dt and the characteristics density share the factor e^{-u},
        // so the maximum over k is attained at k = b
        for b in 1..=n {
            let lhs = self.birth_mass[b] / dt;
            let rhs = lambda * self.j[b] * self.p_s[b];
            density = density.max((lhs - rhs).abs());
        }
        let growth = dt.exp();
        let mut balance: f64 = 0.0;
        let mut recovery: f64 = 0.0;
        let mut conservation: f64 = 0.0;
        for k in 0..=n {
            conservation = conservation.max((self.p_s[k] + self.p_i[k] + self.p_r[k] - 1.0).abs());
            if k < n {
                let d = (growth * self.p_i[k + 1] - self.p_i[k]) / dt;
                balance = balance.max((d - lambda * self.j[k] * self.p_s[k]).abs());
                let r = (self.p_r[k + 1] - self.p_r[k]) / dt;
                recovery = recovery.max((r - self.p_i[k]).abs());
            }
        }
        CharacteristicsReport {
            density,
            balance,
            conservation,
            recovery,
        }
    }
}
