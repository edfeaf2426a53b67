//! Step-function graphons: empirical, limiting, and the distances between
//! them.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig9;
use crate::limit::LimitSolution;
use crate::sim::Snapshot;

/// Largest common refinement `l1_distance` will build.
pub const MAX_REFINED_RESOLUTION: usize = 4096;

/// Default number of random starts of the cut-norm search.
pub const DEFAULT_CUT_STARTS: usize = 32;

/// Symmetric step function on `[0,1]^2`, constant on the `r x r` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Graphon {
    r: usize,
    values: Vec<f64>,
}

impl Graphon {
    /// Row-major cell values; must be symmetric with entries in `[0, 1]`.
    pub fn new(r: usize, values: Vec<f64>) -> Result<Self> {
        if r == 0 || values.len() != r * r {
            return Err(Error::Contract(format!(
                "graphon of resolution {r} needs {} values, got {}",
                r * r,
                values.len()
            )));
        }
        for i in 0..r {
            for j in 0..r {
                let v = values[i * r + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Contract(format!("cell ({i}, {j}) = {v} outside [0, 1]")));
                }
                if v != values[j * r + i] {
                    return Err(Error::Contract(format!("cells ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(Graphon { r, values })
    }

    pub fn constant(r: usize, c: f64) -> Result<Self> {
        Graphon::new(r, vec![c; r * r])
    }

    pub fn resolution(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.r + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Integral over `[0,1]^2`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / (self.r * self.r) as f64
    }

    /// Plain-text matrix, one comma-separated row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.r {
            let row: Vec<String> = (0..self.r).map(|j| sig9(self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Binary 8-bit PGM, grey level `round(255 (1 - h))`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.r, self.r).into_bytes();
        out.extend(self.values.iter().map(|v| (255.0 * (1.0 - v)).round() as u8));
        out
    }
}

/// Graphon of a labeled snapshot at full resolution: cell `(i, j)` is one
/// exactly when labels `i` and `j` are adjacent.
pub fn empirical_graphon(snapshot: &Snapshot) -> Result<Graphon> {
    if !snapshot.is_labeled() {
        return Err(Error::Contract(
            "empirical graphons need a type-labeled snapshot".into(),
        ));
    }
    let n = snapshot.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if snapshot.adjacency.get(i, j) {
                values[i * n + j] = 1.0;
            }
        }
    }
    Graphon::new(n, values)
}

/// Empirical graphon averaged straight onto `r` cells per side, without the
/// full-resolution intermediate. Requires `r` to divide the vertex count.
pub fn empirical_graphon_coarse(snapshot: &Snapshot, r: usize) -> Result<Graphon> {
    if !snapshot.is_labeled() {
        return Err(Error::Contract(
            "empirical graphons need a type-labeled snapshot".into(),
        ));
    }
    let n = snapshot.n();
    if r == 0 || !n.is_multiple_of(r) {
        return Err(Error::Domain(format!("resolution {r} does not divide {n}")));
    }
    let b = n / r;
    let mut counts = vec![0usize; r * r];
    for i in 0..n {
        for j in 0..n {
            if snapshot.adjacency.get(i, j) {
                counts[(i / b) * r + j / b] += 1;
            }
        }
    }
    let cell = (b * b) as f64;
    Graphon::new(r, counts.into_iter().map(|c| c as f64 / cell).collect())
}

/// Limiting graphon at time `t` sampled at cell centres:
/// `g(i, j) = H(t; Fbar((i + 1/2) / r), Fbar((j + 1/2) / r))` with `Fbar` the
/// generalized inverse of the limiting type distribution. `t` is taken at the
/// nearest solver grid point.
pub fn limiting_graphon(solution: &LimitSolution, t: f64, r: usize) -> Result<Graphon> {
    if r == 0 {
        return Err(Error::Domain("resolution must be positive".into()));
    }
    if !(t.is_finite() && t >= 0.0 && t <= solution.horizon() + 1e-9) {
        return Err(Error::Domain(format!("time {t} outside [0, {}]", solution.horizon())));
    }
    let k = ((t / solution.dt()).round() as usize).min(solution.n_steps());
    let tk = solution.times()[k];
    let types: Vec<f64> = (0..r)
        .map(|i| solution.generalized_inverse(k, (i as f64 + 0.5) / r as f64))
        .collect::<Result<_>>()?;
    // H depends on the cell only through its type, and types repeat a lot
    let mut distinct: Vec<f64> = types.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let index: HashMap<u64, usize> = distinct.iter().enumerate().map(|(k, y)| (y.to_bits(), k)).collect();
    let d = distinct.len();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    let h: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| solution.eval_h(tk, distinct[a], distinct[b]))
        .collect::<Result<_>>()?;
    let mut table = vec![0.0; d * d];
    for (&(a, b), &v) in pairs.iter().zip(&h) {
        table[a * d + b] = v;
        table[b * d + a] = v;
    }
    let slot: Vec<usize> = types.iter().map(|y| index[&y.to_bits()]).collect();
    let mut values = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            values[i * r + j] = table[slot[i] * d + slot[j]];
        }
    }
    Graphon::new(r, values)
}

/// Force of infection at grid index `k` recovered from the limiting graphon:
/// `int_{p_S}^{p_S + p_I} g(y, 0) I(Fbar(y)) dy` by the midpoint rule on
/// `points` nodes.
pub fn force_from_graphon(solution: &LimitSolution, k: usize, points: usize) -> Result<f64> {
    let t = solution.times()[k];
    let lo = solution.p_s()[k];
    let width = solution.p_i()[k];
    if width <= 0.0 || points == 0 {
        return Ok(0.0);
    }
    let h = width / points as f64;
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut sum = 0.0;
    for m in 0..points {
        let x = lo + (m as f64 + 0.5) * h;
        let y = solution.generalized_inverse(k, x.min(1.0 - 1e-15))?;
        let v = match cache.get(&y.to_bits()) {
            Some(&v) => v,
            None => {
                let v = if y == solution.horizon() + 1.0 {
                    0.0
                } else {
                    solution.eval_h(t, -1.0, y)? * solution.kernels().infectivity.eval(y)
                };
                cache.insert(y.to_bits(), v);
                v
            }
        };
        sum += v;
    }
    Ok(sum * h)
}

/// Cell averages onto a divisor resolution.
pub fn coarsen(g: &Graphon, r: usize) -> Result<Graphon> {
    if r == 0 || !g.r.is_multiple_of(r) {
        return Err(Error::Domain(format!("{r} does not divide the resolution {}", g.r)));
    }
    let b = g.r / r;
    let mut values = vec![0.0; r * r];
    for i in 0..g.r {
        for j in 0..g.r {
            values[(i / b) * r + j / b] += g.get(i, j);
        }
    }
    let cell = (b * b) as f64;
    for v in &mut values {
        *v = (*v / cell).clamp(0.0, 1.0);
    }
    // summation order differs between mirrored cells; restore exact symmetry
    for i in 0..r {
        for j in 0..i {
            values[j * r + i] = values[i * r + j];
        }
    }
    Graphon::new(r, values)
}

/// Cell replication onto a multiple of the resolution.
pub fn refine(g: &Graphon, r: usize) -> Result<Graphon> {
    if r == 0 || !r.is_multiple_of(g.r) {
        return Err(Error::Domain(format!(
            "{r} is not a multiple of the resolution {}",
            g.r
        )));
    }
    let b = r / g.r;
    let mut values = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            values[i * r + j] = g.get(i / b, j / b);
        }
    }
    Ok(Graphon { r, values })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Both graphons on their least common refinement.
fn common_grid(g1: &Graphon, g2: &Graphon) -> Result<(Graphon, Graphon)> {
    if g1.r == g2.r {
        return Ok((g1.clone(), g2.clone()));
    }
    let l = g1.r / gcd(g1.r, g2.r) * g2.r;
    if l > MAX_REFINED_RESOLUTION {
        return Err(Error::Domain(format!(
            "resolutions {} and {} need a common refinement of {l} > {MAX_REFINED_RESOLUTION}",
            g1.r, g2.r
        )));
    }
    Ok((refine(g1, l)?, refine(g2, l)?))
}

/// L1 norm of the difference of the two step functions.
pub fn l1_distance(g1: &Graphon, g2: &Graphon) -> Result<f64> {
    let (a, b) = common_grid(g1, g2)?;
    let r = a.r;
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / (r * r) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutNormBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `max_S sum_{i in S} w_i` over sign `sign`: the positive part of `sign * w`.
fn best_response(w: &[f64], sign: f64, chosen: &mut [bool]) -> f64 {
    let mut total = 0.0;
    for (c, &x) in chosen.iter_mut().zip(w) {
        *c = sign * x > 0.0;
        if *c {
            total += sign * x;
        }
    }
    total
}

/// Alternating maximization of `sign * sum_{S x T} D` from the column set
/// `t`; returns the value reached.
fn alternate(d: &[f64], r: usize, sign: f64, t: &mut [bool]) -> f64 {
    let mut s = vec![false; r];
    let mut w = vec![0.0; r];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..4 * r + 8 {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = (0..r).filter(|&j| t[j]).map(|j| d[i * r + j]).sum();
        }
        best_response(&w, sign, &mut s);
        for (j, wj) in w.iter_mut().enumerate() {
            *wj = (0..r).filter(|&i| s[i]).map(|i| d[i * r + j]).sum();
        }
        let value = best_response(&w, sign, t);
        if value <= best + 1e-15 {
            return best.max(value);
        }
        best = value;
    }
    best
}

/// Bounds on the cut distance `sup_{S,T} |int_{S x T} (g1 - g2)|`.
///
/// For step functions the supremum is attained on unions of cells, so the
/// lower bound is the best cell-subset pair found by alternating best
/// responses. Starts: all cells, each half, and `starts` random column sets;
/// when `2^r <= starts` every column set is tried, which makes the bound
/// exact. The upper bound is the L1 distance.
pub fn cut_norm_estimate(g1: &Graphon, g2: &Graphon, starts: usize, seed: u64) -> Result<CutNormBounds> {
    let (a, b) = common_grid(g1, g2)?;
    let r = a.r;
    let d: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    let mut inits: Vec<Vec<bool>> = Vec::new();
    if r < usize::BITS as usize && (1usize << r) <= starts.max(1) {
        for mask in 1usize..(1 << r) {
            inits.push((0..r).map(|j| mask >> j & 1 == 1).collect());
        }
    } else {
        inits.push(vec![true; r]);
        inits.push((0..r).map(|j| j < r / 2).collect());
        inits.push((0..r).map(|j| j >= r / 2).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..starts {
            inits.push((0..r).map(|_| rng.random::<bool>()).collect());
        }
    }
    let mut lower: f64 = 0.0;
    for init in &inits {
        for sign in [1.0, -1.0] {
            let mut t = init.clone();
            lower = lower.max(alternate(&d, r, sign, &mut t));
        }
    }
    let cells = (r * r) as f64;
    let upper = d.iter().map(|x| x.abs()).sum::<f64>() / cells;
    Ok(CutNormBounds {
        lower: (lower / cells).min(upper),
        upper,
    })
}

/// Exact cut distance by enumerating all cell-subset pairs; exponential in
/// the resolution, meant for `r <= 12`.
pub fn cut_distance_exhaustive(g1: &Graphon, g2: &Graphon) -> Result<f64> {
    let (a, b) = common_grid(g1, g2)?;
    let r = a.r;
    if r > 12 {
        return Err(Error::Domain(format!(
            "exhaustive search at resolution {r} is too large"
        )));
    }
    let d: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    let mut best: f64 = 0.0;
    for tm in 1usize..(1 << r) {
        let w: Vec<f64> = (0..r)
            .map(|i| (0..r).filter(|&j| tm >> j & 1 == 1).map(|j| d[i * r + j]).sum())
            .collect();
        for sm in 1usize..(1 << r) {
            let v: f64 = (0..r).filter(|&i| sm >> i & 1 == 1).map(|i| w[i]).sum();
            best = best.max(v.abs());
        }
    }
    Ok(best / (r * r) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VertexState;
    use crate::sim::BitMatrix;

    fn snapshot_from_rows(rows: &[&str]) -> Snapshot {
        let n = rows.len();
        let mut adj = BitMatrix::new(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, c) in row.chars().enumerate() {
                if c == '1' {
                    adj.set(i, j, true);
                }
            }
        }
        // all susceptible: labeling by index keeps the order
        Snapshot::labeled(0.0, 1.0, vec![-1.0; n], vec![VertexState::Susceptible; n], &adj)
    }

    #[test]
    fn five_vertex_example_has_the_drawn_blocks() {
        let rows = ["00101", "00011", "10001", "01000", "11100"];
        let g = empirical_graphon(&snapshot_from_rows(&rows)).unwrap();
        assert_eq!(g.resolution(), 5);
        for (i, row) in rows.iter().enumerate() {
            for (j, c) in row.chars().enumerate() {
                assert_eq!(g.get(i, j), if c == '1' { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn unlabeled_snapshot_is_rejected() {
        let s = Snapshot::unlabeled(
            0.0,
            1.0,
            vec![-1.0; 3],
            vec![VertexState::Susceptible; 3],
            BitMatrix::new(3),
        );
        assert!(matches!(empirical_graphon(&s), Err(Error::Contract(_))));
    }

    #[test]
    fn empty_and_complete_graphs() {
        let empty = empirical_graphon(&snapshot_from_rows(&["000", "000", "000"])).unwrap();
        assert!(empty.values().iter().all(|&v| v == 0.0));
        let full = empirical_graphon(&snapshot_from_rows(&["011", "101", "110"])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(full.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn coarsen_averages_and_checks_divisors() {
        let g = Graphon::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(coarsen(&g, 1).unwrap().get(0, 0), 0.5);
        assert_eq!(coarsen(&g, 2).unwrap(), g);
        assert!(matches!(coarsen(&g, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn pgm_header_and_levels() {
        let g = Graphon::new(2, vec![0.0, 1.0, 1.0, 0.5]).unwrap();
        let pgm = g.to_pgm();
        assert!(pgm.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(&pgm[pgm.len() - 4..], &[255, 0, 0, 128]);
    }

    #[test]
    fn extreme_pair_bounds() {
        let ones = Graphon::constant(6, 1.0).unwrap();
        let zeros = Graphon::constant(6, 0.0).unwrap();
        let b = cut_norm_estimate(&ones, &zeros, DEFAULT_CUT_STARTS, 0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let b = cut_norm_estimate(&ones, &ones, DEFAULT_CUT_STARTS, 0).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn mixed_resolutions_use_a_common_refinement() {
        let a = Graphon::constant(2, 0.25).unwrap();
        let b = Graphon::constant(3, 0.75).unwrap();
        assert!((l1_distance(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        let big = Graphon::constant(4093, 0.0).unwrap();
        assert!(matches!(l1_distance(&a, &big), Err(Error::Domain(_))));
    }
}
