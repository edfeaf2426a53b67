//! Lévy and Kolmogorov distances between step distribution functions.

use super::distribution::StepCdf;

/// Above this many location pairs the candidate enumeration is replaced by
/// bisection on epsilon.
const MAX_CANDIDATE_PAIRS: usize = 250_000;
const SLACK: f64 = 1e-13;

#[inline]
fn eval(f: &StepCdf, x: f64) -> f64 {
    f.eval(x)
}

/// Whether `F(x - eps) - eps <= G(x) <= F(x + eps) + eps` for every `x`.
///
/// Both sides are piecewise constant with right-continuous pieces, so it is
/// enough to test the jump points of `G` and the shifted jump points of `F`.
/// At a shifted jump point the value of `F` is read off the level table
/// directly, which keeps the test exact at `x = f_j -/+ eps`.
fn feasible(f: &StepCdf, g: &StepCdf, eps: f64) -> bool {
    for &x in g.locations() {
        let gx = eval(g, x);
        if gx > eval(f, x + eps) + eps + SLACK {
            return false;
        }
        if eval(f, x - eps) - eps > gx + SLACK {
            return false;
        }
    }
    for (&fj, &level) in f.locations().iter().zip(f.levels()) {
        // upper bound at x = fj - eps: F(x + eps) = level
        if eval(g, fj - eps) > level + eps + SLACK {
            return false;
        }
        // lower bound at x = fj + eps: F(x - eps) = level
        if level - eps > eval(g, fj + eps) + SLACK {
            return false;
        }
    }
    true
}

fn bisect(f: &StepCdf, g: &StepCdf) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if feasible(f, g, 0.0) {
        return 0.0;
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if feasible(f, g, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Lévy distance `inf{eps > 0 : F(x - eps) - eps <= G(x) <= F(x + eps) + eps}`.
///
/// The infimum is one of the candidates `0`, `1`, a difference of jump
/// locations or a difference of levels. Feasibility is monotone in `eps` and
/// constant between consecutive candidates, so after locating the adjacent
/// pair (infeasible, feasible) the midpoint decides which one is the
/// infimum.
pub fn levy_distance(f: &StepCdf, g: &StepCdf) -> f64 {
    let (a, b) = (f.locations().len(), g.locations().len());
    if a.saturating_mul(b) > MAX_CANDIDATE_PAIRS {
        return bisect(f, g);
    }
    let mut cands: Vec<f64> = Vec::with_capacity(2 * a * b + 2);
    cands.push(0.0);
    cands.push(1.0);
    for (&x, &lx) in f.locations().iter().zip(f.levels()) {
        for (&y, &ly) in g.locations().iter().zip(g.levels()) {
            let d = (x - y).abs();
            if d < 1.0 {
                cands.push(d);
            }
            let l = (lx - ly).abs();
            if l < 1.0 {
                cands.push(l);
            }
        }
    }
    // levels at the far left are zero
    for &l in f.levels().iter().chain(g.levels()) {
        cands.push(l);
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);

    if feasible(f, g, cands[0]) {
        return cands[0];
    }
    // invariant: cands[lo] infeasible, cands[hi] feasible (eps = 1 always is)
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(f, g, cands[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mid = 0.5 * (cands[lo] + cands[hi]);
    if feasible(f, g, mid) {
        cands[lo]
    } else {
        cands[hi]
    }
}

/// `sup_x |F(x) - G(x)|`.
pub fn kolmogorov_distance(f: &StepCdf, g: &StepCdf) -> f64 {
    f.locations()
        .iter()
        .chain(g.locations())
        .map(|&x| (eval(f, x) - eval(g, x)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: f64) -> StepCdf {
        StepCdf::from_atoms(&[(x, 1.0)]).unwrap()
    }

    /// Brute-force oracle: smallest eps on a grid of step `h` for which the
    /// sandwich holds at every point of a dense x grid.
    fn grid_oracle(f: &StepCdf, g: &StepCdf, h: f64) -> f64 {
        let xs: Vec<f64> = (0..=4000).map(|i| -3.0 + i as f64 * 0.002).collect();
        let mut eps = 0.0;
        loop {
            let ok = xs
                .iter()
                .all(|&x| f.eval(x - eps) - eps <= g.eval(x) + 1e-12 && g.eval(x) <= f.eval(x + eps) + eps + 1e-12);
            if ok || eps >= 1.0 {
                return eps;
            }
            eps += h;
        }
    }

    #[test]
    fn identical_is_zero() {
        let f = StepCdf::from_atoms(&[(-1.0, 0.3), (0.4, 0.2), (2.0, 0.5)]).unwrap();
        assert_eq!(levy_distance(&f, &f), 0.0);
    }

    #[test]
    fn shifted_point_masses() {
        for &e in &[0.05, 0.25, 0.5, 0.9] {
            let d = levy_distance(&point(0.0), &point(e));
            assert!((d - e).abs() < 1e-12, "eps {e}: {d}");
            let oracle = grid_oracle(&point(0.0), &point(e), 1e-3);
            assert!((d - oracle).abs() <= 3e-3, "oracle {oracle} vs {d}");
        }
        assert_eq!(levy_distance(&point(0.0), &point(5.0)), 1.0);
    }

    #[test]
    fn two_atom_pair_matches_grid_oracle() {
        let f = StepCdf::from_atoms(&[(-1.0, 0.4), (0.3, 0.6)]).unwrap();
        let g = StepCdf::from_atoms(&[(-1.0, 0.55), (0.45, 0.45)]).unwrap();
        let d = levy_distance(&f, &g);
        let oracle = grid_oracle(&f, &g, 1e-3);
        assert!((d - oracle).abs() <= 3e-3, "{d} vs {oracle}");
        assert!(d <= kolmogorov_distance(&f, &g) + 1e-15);
    }

    #[test]
    fn bisection_fallback_agrees_with_enumeration() {
        let f = StepCdf::from_atoms(&[(-1.0, 0.2), (0.1, 0.3), (0.7, 0.5)]).unwrap();
        let g = StepCdf::from_atoms(&[(-1.0, 0.25), (0.2, 0.35), (0.6, 0.4)]).unwrap();
        let exact = levy_distance(&f, &g);
        assert!((bisect(&f, &g) - exact).abs() < 1e-12);
    }
}
