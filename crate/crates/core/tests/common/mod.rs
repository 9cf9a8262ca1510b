//! Independent oracles shared by the acceptance report and the invariant
//! tests. Nothing here calls the library code under test.
#![allow(dead_code)]

use oscail_core::metrics::DistanceMetric;
use oscail_core::Label;

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            for &o in &order[i..=j] {
                r[o] = (i + j) as f64 / 2.0 + 1.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Strictly monotone, except for at most one adjacent pair that moves the
/// wrong way by no more than 0.3 points.
pub fn monotone_with_slack(seq: &[f64], decreasing: bool) -> bool {
    let mut violations = 0;
    for w in seq.windows(2) {
        let progress = if decreasing { w[0] - w[1] } else { w[1] - w[0] };
        if progress > 0.0 {
            continue;
        }
        if -progress > 0.3 {
            return false;
        }
        violations += 1;
    }
    violations <= 1
}

pub fn brute_distance(metric: DistanceMetric, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        DistanceMetric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        DistanceMetric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        DistanceMetric::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            (1.0 - dot / (na * nb)).max(0.0)
        }
    }
}

pub fn sorted_distances(metric: DistanceMetric, from: &[f64], to: &[Vec<f64>], skip: Option<usize>) -> Vec<(f64, usize)> {
    let mut d: Vec<(f64, usize)> =
        to.iter().enumerate().filter(|(i, _)| Some(*i) != skip).map(|(i, t)| (brute_distance(metric, from, t), i)).collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    d
}

pub fn oracle_osknn(targets: &[Vec<f64>], x: &[f64], m: usize, k: usize, t: f64, metric: DistanceMetric) -> Label {
    let near = sorted_distances(metric, x, targets, None);
    let d1 = near[..m].iter().map(|p| p.0).sum::<f64>() / m as f64;
    let d2 = near[..m]
        .iter()
        .map(|&(_, j)| sorted_distances(metric, &targets[j], targets, Some(j))[..k].iter().map(|p| p.0).sum::<f64>() / k as f64)
        .sum::<f64>()
        / m as f64;
    let accept = if d2 == 0.0 { d1 == 0.0 } else { d1 / d2 <= t };
    if accept { Label::Target } else { Label::Other }
}

pub fn oracle_nnd(targets: &[Vec<f64>], x: &[f64], metric: DistanceMetric) -> Label {
    let (d, j) = sorted_distances(metric, x, targets, None)[0];
    let (e, _) = sorted_distances(metric, &targets[j], targets, Some(j))[0];
    let accept = if e == 0.0 { d == 0.0 } else { d <= e };
    if accept { Label::Target } else { Label::Other }
}

pub fn oracle_nnpc(targets: &[Vec<f64>], x: &[f64], metric: DistanceMetric) -> Label {
    let delta = (0..targets.len())
        .map(|i| sorted_distances(metric, &targets[i], targets, Some(i))[0].0)
        .fold(f64::NEG_INFINITY, f64::max);
    if sorted_distances(metric, x, targets, None)[0].0 <= delta { Label::Target } else { Label::Other }
}

pub fn gaussian(sigma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Euclidean projection onto {0 ≤ a ≤ c, Σa = 1} by bisection on the shift.
pub fn project_capped_simplex(v: &[f64], c: f64) -> Vec<f64> {
    let clip = |x: f64| x.clamp(0.0, c);
    let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - c - 1.0;
    let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if v.iter().map(|x| clip(x - mid)).sum::<f64>() > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    v.iter().map(|x| clip(x - tau)).collect()
}

pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Dense one-class dual by accelerated projected gradient, then an exact
/// solve of the KKT system on the identified free set. Returns `(α, ρ)`.
pub fn qp_oracle(k: &[Vec<f64>], nu: f64) -> (Vec<f64>, f64) {
    let l = k.len();
    let c = 1.0 / (nu * l as f64);
    let lip = k.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let grad = |a: &[f64]| -> Vec<f64> { (0..l).map(|i| (0..l).map(|j| k[i][j] * a[j]).sum()).collect() };
    let mut x = project_capped_simplex(&vec![1.0 / l as f64; l], c);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..40_000 {
        let g = grad(&y);
        let step: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - b / lip).collect();
        let next = project_capped_simplex(&step, c);
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = next.iter().zip(&x).map(|(n, o)| n + (t - 1.0) / tn * (n - o)).collect();
        x = next;
        t = tn;
    }

    let eps = 1e-7;
    let free: Vec<usize> = (0..l).filter(|&i| x[i] > eps && x[i] < c - eps).collect();
    if !free.is_empty() {
        let fixed: Vec<(usize, f64)> = (0..l).filter(|i| !free.contains(i)).map(|i| (i, if x[i] >= c - eps { c } else { 0.0 })).collect();
        let n = free.len();
        let mut a = vec![vec![0.0; n + 1]; n + 1];
        let mut b = vec![0.0; n + 1];
        for (r, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                a[r][s] = k[i][j];
            }
            a[r][n] = -1.0;
            b[r] = -fixed.iter().map(|&(j, v)| k[i][j] * v).sum::<f64>();
            a[n][r] = 1.0;
        }
        b[n] = 1.0 - fixed.iter().map(|p| p.1).sum::<f64>();
        if let Some(sol) = solve_linear(a, b) {
            let mut polished = vec![0.0; l];
            for &(j, v) in &fixed {
                polished[j] = v;
            }
            for (r, &i) in free.iter().enumerate() {
                polished[i] = sol[r];
            }
            let g = grad(&polished);
            let rho = sol[n];
            let feasible = polished.iter().all(|&v| (-1e-12..=c + 1e-12).contains(&v));
            let kkt = fixed.iter().all(|&(j, v)| if v == 0.0 { g[j] >= rho - 1e-9 } else { g[j] <= rho + 1e-9 });
            if feasible && kkt {
                x = polished.iter().map(|v| v.clamp(0.0, c)).collect();
            }
        }
    }
    let g = grad(&x);
    let free: Vec<f64> = (0..l).filter(|&i| x[i] > eps && x[i] < c - eps).map(|i| g[i]).collect();
    let pool: Vec<f64> = if free.is_empty() { (0..l).filter(|&i| x[i] > eps).map(|i| g[i]).collect() } else { free };
    let rho = pool.iter().sum::<f64>() / pool.len() as f64;
    (x, rho)
}
