//! Epidemic summaries: basic reproduction number, final size, peaks and the
//! effect of the edge resampling rate.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::limit::{relax_step, solve_with_kernels, LimitSolution};
use crate::model::KernelSet;

/// Default minimum prominence for [`detect_peaks`].
pub const DEFAULT_PROMINENCE: f64 = 1e-4;

const R0_RTOL: f64 = 1e-8;
const TAIL_TOL: f64 = 1e-10;

fn require_no_global_feedback(config: &ScenarioConfig, kernels: &KernelSet) -> Result<()> {
    if kernels.no_global_feedback(config.model.p0) {
        Ok(())
    } else {
        Err(Error::Contract(
            "the R0 formula requires no global feedback: pi_SS must equal p0 and pi_SI may depend \
             on the infection age only"
                .into(),
        ))
    }
}

/// Composite rule for `lambda int_0^inf e^{-u} I(u) p_SI(u) du` on `n`
/// intervals of `[0, upper]`: `I p_SI` is interpolated linearly on each
/// interval and integrated exactly against `e^{-u}`.
fn r0_composite(lambda: f64, p0: f64, gamma: f64, kernels: &KernelSet, upper: f64, n: usize) -> f64 {
    let h = upper / n as f64;
    let e = (-h).exp();
    let lin = (1.0 - e - h * e) / h;
    let si = |u: f64| kernels.pi_si_age_only(u).expect("age-only pi_SI");
    let mut x = p0;
    let mut pi_prev = si(0.0);
    let mut g_prev = kernels.infectivity.eval(0.0) * x;
    let mut sum = 0.0;
    for k in 0..n {
        let u0 = k as f64 * h;
        let pi = si(u0 + h);
        x = relax_step(x, pi_prev, pi, gamma, h);
        pi_prev = pi;
        let g = kernels.infectivity.eval(u0 + h) * x;
        sum += (-u0).exp() * (g_prev * (1.0 - e) + (g - g_prev) * lin);
        g_prev = g;
    }
    // tail beyond `upper` with the integrand frozen at its last value
    sum += (-upper).exp() * g_prev;
    lambda * sum
}

/// `R0 = int_0^inf p_SI(u) lambda I(u) e^{-u} du` with
/// `p_SI(u) = p0 e^{-gamma u} + int_0^u gamma e^{-gamma s} pi_SI(u - s) ds`.
pub fn r0_quadrature(config: &ScenarioConfig, kernels: &KernelSet) -> Result<f64> {
    require_no_global_feedback(config, kernels)?;
    let m = &config.model;
    if m.lambda == 0.0 {
        return Ok(0.0);
    }
    // the integrand is bounded by lambda e^{-u}
    let upper = (m.lambda / TAIL_TOL).ln().max(25.0);
    let mut n = 1024;
    let mut prev = r0_composite(m.lambda, m.p0, m.gamma, kernels, upper, n);
    loop {
        n *= 2;
        let cur = r0_composite(m.lambda, m.p0, m.gamma, kernels, upper, n);
        if (cur - prev).abs() <= R0_RTOL * cur.abs() || n >= 1 << 24 {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// `R0(gamma) = lambda (p0 + gamma C) / (gamma + 1)`, valid for unit
/// infectivity.
pub fn r0_closed_form(lambda: f64, p0: f64, gamma: f64, c: f64) -> f64 {
    lambda * (p0 + gamma * c) / (gamma + 1.0)
}

/// `C = int_0^inf e^{-v} pi_SI(v) dv` for an age-only `pi_SI`.
pub fn monotonicity_constant(config: &ScenarioConfig, kernels: &KernelSet) -> Result<f64> {
    require_no_global_feedback(config, kernels)?;
    let si = |v: f64| kernels.pi_si_age_only(v).expect("age-only pi_SI");
    let upper = 40.0;
    // exact for pi_SI linear on each interval
    let integrate = |n: usize| {
        let h = upper / n as f64;
        let e = (-h).exp();
        let lin = (1.0 - e - h * e) / h;
        let mut s = 0.0;
        let mut prev = si(0.0);
        for k in 0..n {
            let v0 = k as f64 * h;
            let cur = si(v0 + h);
            s += (-v0).exp() * (prev * (1.0 - e) + (cur - prev) * lin);
            prev = cur;
        }
        s
    };
    let mut n = 1024;
    let mut prev = integrate(n);
    loop {
        n *= 2;
        let cur = integrate(n);
        if (cur - prev).abs() <= 1e-12 + R0_RTOL * cur.abs() || n >= 1 << 24 {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// Unique root in `[0, 1 - q0]` of `p = (1 - q0) e^{-r0 (1 - p)}`.
///
/// `f(p) = p - (1 - q0) e^{-r0 (1 - p)}` is concave with `f(0) < 0` and
/// `f(1 - q0) >= 0`, so bisection on that bracket finds the only root.
pub fn final_size(r0: f64, q0: f64) -> Result<f64> {
    if !(r0.is_finite() && r0 >= 0.0) {
        return Err(Error::Domain(format!("R0 must be finite and >= 0, got {r0}")));
    }
    if !(q0 > 0.0 && q0 < 1.0) {
        return Err(Error::Domain(format!("q0 must lie in (0, 1), got {q0}")));
    }
    let s0 = 1.0 - q0;
    let f = |p: f64| p - s0 * (-r0 * (1.0 - p)).exp();
    let (mut lo, mut hi) = (0.0_f64, s0);
    if f(hi).abs() < 1e-15 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// Peak prevalence of the classical homogeneous SIR model,
/// `1 - 1/R0 + (1/R0) ln(1/R0)`, zero for `R0 <= 1`.
pub fn classical_peak(r0: f64) -> Result<f64> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::Domain(format!("R0 must be positive, got {r0}")));
    }
    if r0 <= 1.0 {
        return Ok(0.0);
    }
    let inv = 1.0 / r0;
    Ok(1.0 - inv + inv * inv.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub time: f64,
    pub height: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakReport {
    pub peaks: Vec<Extremum>,
    pub dips: Vec<Extremum>,
    /// Global maximum `(time, height)`, endpoints included.
    pub i_max: (f64, f64),
}

/// Interior local maxima of `values` (plateaus reported at their midpoint)
/// whose topographic prominence is at least `min_prominence`.
fn interior_maxima(times: &[f64], values: &[f64], min_prominence: f64) -> Vec<Extremum> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            // extend a plateau
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let h = values[i];
                // walk outwards until a strictly higher point
                let mut left_min = h;
                let mut l = i;
                while l > 0 {
                    l -= 1;
                    if values[l] > h {
                        break;
                    }
                    left_min = left_min.min(values[l]);
                }
                let mut right_min = h;
                let mut r = j;
                while r + 1 < n {
                    r += 1;
                    if values[r] > h {
                        break;
                    }
                    right_min = right_min.min(values[r]);
                }
                let prominence = h - left_min.max(right_min);
                if prominence >= min_prominence {
                    let mid = 0.5 * (times[i] + times[j]);
                    out.push(Extremum {
                        time: mid,
                        height: h,
                        prominence,
                    });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Local maxima and minima of a prevalence curve with a flat-plateau rule
/// and a minimum prominence.
pub fn detect_peaks_in(times: &[f64], values: &[f64], min_prominence: f64) -> PeakReport {
    assert_eq!(times.len(), values.len());
    let peaks = interior_maxima(times, values, min_prominence);
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    let dips = interior_maxima(times, &neg, min_prominence)
        .into_iter()
        .map(|e| Extremum { height: -e.height, ..e })
        .collect();
    let mut i_max = (f64::NAN, f64::NEG_INFINITY);
    for (&t, &v) in times.iter().zip(values) {
        if v > i_max.1 {
            i_max = (t, v);
        }
    }
    PeakReport { peaks, dips, i_max }
}

pub fn detect_peaks(solution: &LimitSolution) -> PeakReport {
    detect_peaks_in(solution.times(), solution.p_i(), DEFAULT_PROMINENCE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpidemicSummary {
    /// Absent when the kernel has global feedback.
    pub r0: Option<f64>,
    pub final_size_ps_inf: Option<f64>,
    pub peaks: Vec<Extremum>,
    pub dips: Vec<Extremum>,
    pub i_max: f64,
    pub i_max_time: f64,
    pub classical_i_max: Option<f64>,
    pub monotonicity_c: Option<f64>,
    /// Sign of `C - p0`.
    pub direction: Option<i8>,
    /// `p_S` at the horizon of the solved trajectory.
    pub p_s_at_horizon: f64,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub fn summarize(solution: &LimitSolution) -> Result<EpidemicSummary> {
    let config = solution.config();
    let kernels = solution.kernels();
    let report = detect_peaks(solution);
    let (r0, fs, classical, c, direction) = if kernels.no_global_feedback(config.model.p0) {
        let r0 = r0_quadrature(config, kernels)?;
        let c = monotonicity_constant(config, kernels)?;
        let classical = if r0 > 0.0 { Some(classical_peak(r0)?) } else { Some(0.0) };
        (
            Some(r0),
            Some(final_size(r0, config.model.q0)?),
            classical,
            Some(c),
            Some(sign(c - config.model.p0)),
        )
    } else {
        (None, None, None, None, None)
    };
    Ok(EpidemicSummary {
        r0,
        final_size_ps_inf: fs,
        peaks: report.peaks,
        dips: report.dips,
        i_max: report.i_max.1,
        i_max_time: report.i_max.0,
        classical_i_max: classical,
        monotonicity_c: c,
        direction,
        p_s_at_horizon: *solution.p_s().last().unwrap(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    NonDecreasing,
    NonIncreasing,
    Mixed,
}

/// Monotone direction of a sequence, differences within `tol` counting as
/// ties.
pub fn trend(values: &[f64], tol: f64) -> Trend {
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.iter().all(|d| d.abs() <= tol) {
        Trend::Constant
    } else if diffs.iter().all(|&d| d > tol) {
        Trend::Increasing
    } else if diffs.iter().all(|&d| d < -tol) {
        Trend::Decreasing
    } else if diffs.iter().all(|&d| d >= -tol) {
        Trend::NonDecreasing
    } else if diffs.iter().all(|&d| d <= tol) {
        Trend::NonIncreasing
    } else {
        Trend::Mixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub r0: f64,
    pub final_size: f64,
    pub i_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSweep {
    pub rows: Vec<SweepRow>,
    pub c: f64,
    pub p0: f64,
    pub r0_trend: Trend,
    pub final_size_trend: Trend,
    pub i_max_trend: Trend,
}

impl GammaSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,r0,final_size,i_max\n");
        for r in &self.rows {
            out.push_str(&crate::format::csv_row(&[r.gamma, r.r0, r.final_size, r.i_max]));
            out.push('\n');
        }
        out
    }
}

/// Solves the scenario at each `gamma` (in the given order) and tabulates
/// `R0`, the final size and the peak prevalence.
pub fn gamma_sweep(config: &ScenarioConfig, gammas: &[f64]) -> Result<GammaSweep> {
    let kernels = config.kernels();
    require_no_global_feedback(config, &kernels)?;
    for &g in gammas {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::config("gammas", format!("must be finite and >= 0, got {g}")));
        }
    }
    let c = monotonicity_constant(config, &kernels)?;
    let rows: Vec<SweepRow> = gammas
        .par_iter()
        .map(|&gamma| -> Result<SweepRow> {
            let mut cfg = config.clone();
            cfg.model.gamma = gamma;
            let r0 = if kernels.infectivity.is_unit() {
                r0_closed_form(cfg.model.lambda, cfg.model.p0, gamma, c)
            } else {
                r0_quadrature(&cfg, &kernels)?
            };
            let sol = solve_with_kernels(&cfg, kernels.clone())?;
            let report = detect_peaks(&sol);
            Ok(SweepRow {
                gamma,
                r0,
                final_size: final_size(r0, cfg.model.q0)?,
                i_max: report.i_max.1,
            })
        })
        .collect::<Result<_>>()?;
    let col = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Ok(GammaSweep {
        r0_trend: trend(&col(|r| r.r0), 1e-9),
        final_size_trend: trend(&col(|r| r.final_size), 1e-9),
        i_max_trend: trend(&col(|r| r.i_max), 1e-9),
        rows,
        c,
        p0: config.model.p0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_cfg(lambda: f64, p0: f64, gamma: f64, si: f64) -> ScenarioConfig {
        ScenarioConfig::constant(p0, 0.1, lambda, gamma, 5.0, [p0, si, 0.3])
    }

    #[test]
    fn r0_static_graph_is_lambda_p0() {
        let cfg = constant_cfg(4.0, 0.1, 0.0, 0.6);
        let r0 = r0_quadrature(&cfg, &cfg.kernels()).unwrap();
        assert!((r0 - 0.4).abs() < 1e-9, "{r0}");
        assert_eq!(r0_closed_form(4.0, 0.1, 0.0, 0.6), 4.0 * 0.1);
    }

    #[test]
    fn r0_quadrature_matches_closed_form() {
        let cfg = constant_cfg(10.0, 0.1, 20.0, 0.6);
        let q = r0_quadrature(&cfg, &cfg.kernels()).unwrap();
        let c = r0_closed_form(10.0, 0.1, 20.0, 0.6);
        assert!((c - 10.0 * (0.1 + 20.0 * 0.6) / 21.0).abs() < 1e-12);
        assert!((q - c).abs() < 1e-6, "{q} vs {c}");
    }

    #[test]
    fn global_feedback_is_rejected() {
        let cfg = ScenarioConfig::behavioral_double_peak();
        assert!(matches!(r0_quadrature(&cfg, &cfg.kernels()), Err(Error::Contract(_))));
        assert!(matches!(gamma_sweep(&cfg, &[1.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn closed_form_limits() {
        assert!((r0_closed_form(3.0, 0.2, 7.0, 0.2) - 0.6).abs() < 1e-15);
        let big = r0_closed_form(5.0, 0.1, 1e9, 0.4);
        assert!((big - 2.0).abs() < 1e-6 * 2.0);
    }

    #[test]
    fn final_size_examples() {
        assert_eq!(final_size(0.0, 0.3).unwrap(), 0.7);
        let p = final_size(2.0, 0.1).unwrap();
        assert!((p - 0.9 * (-2.0 * (1.0 - p)).exp()).abs() < 1e-12);
        // oracle: scan of the residual on a 1e-6 grid
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=900_000 {
            let x = i as f64 * 1e-6;
            let r = (x - 0.9 * (-2.0 * (1.0 - x)).exp()).abs();
            if r < best.0 {
                best = (r, x);
            }
        }
        assert!((p - best.1).abs() < 2e-6, "{p} vs {}", best.1);
        let tiny = final_size(50.0, 0.1).unwrap();
        assert!((0.0..1e-10).contains(&tiny));
    }

    #[test]
    fn classical_peak_examples() {
        assert_eq!(classical_peak(1.0).unwrap(), 0.0);
        assert!((classical_peak(2.0).unwrap() - (0.5 + 0.5 * 0.5f64.ln())).abs() < 1e-15);
        assert!((classical_peak(2.0).unwrap() - 0.15343).abs() < 1e-5);
        let e = std::f64::consts::E;
        assert!((classical_peak(e).unwrap() - (1.0 - 2.0 / e)).abs() < 1e-15);
        assert!(matches!(classical_peak(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn plateau_and_prominence() {
        let t: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let v = [0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 1.00001, 1.0, 0.0];
        let r = detect_peaks_in(&t, &v, 1e-4);
        assert_eq!(r.peaks.len(), 1);
        assert_eq!(r.peaks[0].time, 3.0);
        assert!(r.dips.is_empty());
        let r = detect_peaks_in(&t, &v, 1e-6);
        assert_eq!(r.peaks.len(), 2);
        assert_eq!(r.dips.len(), 1);
    }

    #[test]
    fn no_spread_has_no_interior_peak() {
        let cfg = ScenarioConfig::constant(0.2, 0.1, 0.0, 1.0, 5.0, [0.2, 0.5, 0.5]).with_steps(200);
        let sol = crate::limit::solve(&cfg).unwrap();
        let r = detect_peaks(&sol);
        assert!(r.peaks.is_empty());
        assert_eq!(r.i_max, (0.0, 0.1));
    }

    #[test]
    fn trend_classification() {
        assert_eq!(trend(&[1.0, 2.0, 3.0], 1e-9), Trend::Increasing);
        assert_eq!(trend(&[3.0, 2.0, 1.0], 1e-9), Trend::Decreasing);
        assert_eq!(trend(&[1.0, 1.0, 1.0], 1e-9), Trend::Constant);
        assert_eq!(trend(&[1.0, 1.0, 2.0], 1e-9), Trend::NonDecreasing);
        assert_eq!(trend(&[1.0, 2.0, 1.0], 1e-9), Trend::Mixed);
    }
}
