use super::{relax_step, GridView, LimitSolution};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::model::{DistributionView, KernelSet};

/// Solves the limit system for the scenario's own kernels.
pub fn solve(config: &ScenarioConfig) -> Result<LimitSolution> {
    solve_with_kernels(config, config.kernels())
}

/// Solves the limit system on `config.solver.n_steps` uniform steps.
///
/// Per step `k`: the background `B` and the per-cohort `H_SI` values `A_b`
/// advance along `X' = gamma (pi - X)` with `pi` linear over the step and the
/// decay integrated exactly, a new cohort starts from `A_k = B_k`, then
/// `J_k = sum_b m_b(k) A_b(k) I(age_b)`,
/// `p_S(t_{k+1}) = p_S(t_k) exp(-lambda J_k dt)` and the lost susceptible
/// mass becomes cohort `k + 1`.
pub fn solve_with_kernels(config: &ScenarioConfig, kernels: KernelSet) -> Result<LimitSolution> {
    config.validate()?;
    let m = &config.model;
    let n = config.solver.n_steps;
    let horizon = m.horizon;
    let dt = horizon / n as f64;
    let g = m.gamma;
    let lambda = m.lambda;
    let window = kernels.phi_window().unwrap_or_else(|| config.phi_window());

    let decay: Vec<f64> = (0..=n).map(|j| (-(j as f64) * dt).exp()).collect();
    let growth: Vec<f64> = (0..=n).map(|j| (j as f64 * dt).exp()).collect();

    let mut times = Vec::with_capacity(n + 1);
    let mut p_s = Vec::with_capacity(n + 1);
    let mut p_i = Vec::with_capacity(n + 1);
    let mut p_r = Vec::with_capacity(n + 1);
    let mut j_arr = Vec::with_capacity(n + 1);
    let mut phi = Vec::with_capacity(n + 1);
    let mut birth_mass = Vec::with_capacity(n + 1);
    let mut w: Vec<f64> = Vec::with_capacity(n + 1);
    let mut pi_ss = Vec::with_capacity(n + 1);
    let mut background = Vec::with_capacity(n + 1);

    // per-cohort H_SI and the pi_SI value used at the previous step
    let mut a_si: Vec<f64> = Vec::with_capacity(n + 1);
    let mut pi_si_prev: Vec<f64> = Vec::with_capacity(n + 1);

    p_s.push(1.0 - m.q0);
    birth_mass.push(m.q0);
    w.push(m.q0);

    for k in 0..=n {
        let t = k as f64 * dt;
        times.push(t);
        let pi_k = w[k] * decay[k];
        p_i.push(pi_k);
        // closure, grouped so that p_R(0) = 0 exactly
        p_r.push((m.q0 - pi_k) + ((1.0 - m.q0) - p_s[k]));

        let view = GridView::new(k, dt, horizon, p_s[k], pi_k, p_r[k], &w);
        phi.push(view.phi(window));
        let ss = kernels.pi_ss(&view);
        pi_ss.push(ss);

        if k == 0 {
            background.push(m.p0);
        } else {
            let b = relax_step(background[k - 1], pi_ss[k - 1], ss, g, dt);
            background.push(b);
        }

        // advance existing cohorts, then open cohort k
        for b in 0..k {
            let age = (k - b) as f64 * dt;
            let pi = kernels.pi_si(age, &view);
            a_si[b] = relax_step(a_si[b], pi_si_prev[b], pi, g, dt);
            pi_si_prev[b] = pi;
        }
        a_si.push(background[k]);
        pi_si_prev.push(kernels.pi_si(0.0, &view));

        let mut force = 0.0;
        if kernels.infectivity.is_unit() {
            for b in 0..=k {
                force += birth_mass[b] * decay[k - b] * a_si[b];
            }
        } else {
            for b in 0..=k {
                let age = (k - b) as f64 * dt;
                force += birth_mass[b] * decay[k - b] * a_si[b] * kernels.infectivity.eval(age);
            }
        }
        j_arr.push(force);

        if !(force.is_finite() && pi_k.is_finite() && p_s[k].is_finite() && background[k].is_finite()) {
            return Err(Error::Numerical {
                step: k,
                reason: format!("non-finite state (p_S = {}, p_I = {pi_k}, J = {force})", p_s[k]),
            });
        }

        if k < n {
            let next = p_s[k] * (-lambda * force * dt).exp();
            let born = p_s[k] - next;
            p_s.push(next);
            birth_mass.push(born);
            w.push(w[k] + born * growth[k + 1]);
        }
    }

    Ok(LimitSolution {
        config: config.clone(),
        kernels,
        dt,
        times,
        p_s,
        p_i,
        p_r,
        j: j_arr,
        phi,
        birth_mass,
        w,
        pi_ss,
        background,
        decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_zero_is_a_death_process() {
        let cfg = ScenarioConfig::constant(0.3, 0.2, 0.0, 5.0, 4.0, [0.5, 0.5, 0.5]).with_steps(400);
        let sol = solve(&cfg).unwrap();
        for (k, &t) in sol.times().iter().enumerate() {
            assert_eq!(sol.p_s()[k], 0.8);
            assert!((sol.p_i()[k] - 0.2 * (-t).exp()).abs() < 1e-12);
            assert!((sol.p_r()[k] - 0.2 * (1.0 - (-t).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_values() {
        let cfg = ScenarioConfig::behavioral_double_peak();
        let sol = solve(&cfg).unwrap();
        assert_eq!(sol.p_s()[0], 0.95);
        assert_eq!(sol.p_i()[0], 0.05);
        assert_eq!(sol.p_r()[0], 0.0);
        // J(0) = q0 * p0 * I(0)
        assert!((sol.force()[0] - 0.05 * 0.1).abs() < 1e-15);
    }
}
