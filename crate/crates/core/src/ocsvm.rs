//! Kernels, the one-class SVM dual solved by SMO, and the multi-cluster
//! variant that accepts a vector when any per-cluster SVM accepts it.
//!
//! The dual is
//!
//! ```text
//! min ½ αᵀKα   subject to   0 ≤ αᵢ ≤ 1/(νl),   Σαᵢ = 1
//! ```
//!
//! and the decision function is `f(x) = Σ αᵢ K(xᵢ, x) − ρ`.

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::kmeans;
use crate::metrics::squared_euclidean;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Gaussian { sigma: f64 },
    Polynomial { exponent: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { sigma } if !(sigma > 0.0) || !sigma.is_finite() => {
                Err(Error::training("OCSVM", format!("kernel width must be positive, got {sigma}")))
            }
            KernelSpec::Polynomial { exponent } if !(exponent >= 1.0) || !exponent.is_finite() => {
                Err(Error::training("OCSVM", format!("polynomial exponent must be at least 1, got {exponent}")))
            }
            _ => Ok(()),
        }
    }

    /// Single-letter token used on the command line and in model files.
    pub fn token(&self) -> &'static str {
        match self {
            KernelSpec::Gaussian { .. } => "g",
            KernelSpec::Polynomial { .. } => "p",
        }
    }

    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => (-squared_euclidean(x, y) / (2.0 * sigma * sigma)).exp(),
            KernelSpec::Polynomial { exponent } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                if exponent.fract() == 0.0 && exponent <= i32::MAX as f64 {
                    dot.powi(exponent as i32)
                } else {
                    dot.powf(exponent)
                }
            }
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Arity { expected: x.len(), found: y.len() });
    }
    Ok(spec.eval(x, y))
}

/// Stopping and iteration controls for the SMO solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// KKT tolerance, expressed on the dual scaled so that `Σα = νl`
    /// and `αᵢ ≤ 1`.
    pub tolerance: f64,
    /// Pair updates allowed per training vector.
    pub passes: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-3, passes: 10_000 }
    }
}

/// Dual solution together with the solver's trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub upper: f64,
    pub iterations: usize,
    /// Dual objective after initialization and after every pair update.
    pub objective: Vec<f64>,
    /// Final maximal KKT violation on the unscaled dual.
    pub gap: f64,
}

/// Solves the one-class dual for a precomputed kernel matrix.
pub fn solve_dual(kernel: &[Vec<f64>], nu: f64, options: SolverOptions) -> Result<DualSolution> {
    let l = kernel.len();
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::training("OCSVM", format!("nu must lie in (0, 1], got {nu}")));
    }
    if l < 2 {
        return Err(Error::training("OCSVM", "at least 2 targets are required"));
    }
    let upper = 1.0 / (nu * l as f64);
    let scale = nu * l as f64;

    let mut alpha = vec![0.0; l];
    let mut remaining = 1.0;
    for a in alpha.iter_mut() {
        if remaining <= 0.0 {
            break;
        }
        *a = upper.min(remaining);
        remaining -= *a;
    }

    let mut grad: Vec<f64> = (0..l).map(|t| (0..l).map(|s| kernel[t][s] * alpha[s]).sum()).collect();
    let objective_of = |alpha: &[f64], grad: &[f64]| 0.5 * alpha.iter().zip(grad).map(|(a, g)| a * g).sum::<f64>();
    let mut objective = vec![objective_of(&alpha, &grad)];
    let max_iter = options.passes.saturating_mul(l);
    let mut iterations = 0;

    let gap = loop {
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        for t in 0..l {
            if alpha[t] < upper && (i == usize::MAX || grad[t] < grad[i]) {
                i = t;
            }
            if alpha[t] > 0.0 && (j == usize::MAX || grad[t] > grad[j]) {
                j = t;
            }
        }
        let gap = if i == usize::MAX || j == usize::MAX { 0.0 } else { grad[j] - grad[i] };
        if gap * scale < options.tolerance {
            break gap;
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged { iterations, gap });
        }
        iterations += 1;

        let curvature = (kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j]).max(1e-12);
        let room = (upper - alpha[i]).min(alpha[j]);
        let step = (gap / curvature).min(room);
        if step == upper - alpha[i] {
            alpha[i] = upper;
        } else {
            alpha[i] += step;
        }
        if step == alpha[j] {
            alpha[j] = 0.0;
        } else {
            alpha[j] -= step;
        }
        for t in 0..l {
            grad[t] += step * (kernel[t][i] - kernel[t][j]);
        }
        objective.push(objective_of(&alpha, &grad));
    };

    let free: Vec<f64> = (0..l).filter(|&t| alpha[t] > 0.0 && alpha[t] < upper).map(|t| grad[t]).collect();
    let pool = if free.is_empty() {
        (0..l).filter(|&t| alpha[t] > 0.0).map(|t| grad[t]).collect()
    } else {
        free
    };
    let rho = pool.iter().sum::<f64>() / pool.len() as f64;
    Ok(DualSolution { alpha, rho, upper, iterations, objective, gap })
}

fn kernel_matrix(points: &[Vec<f64>], kernel: &KernelSpec) -> Result<Vec<Vec<f64>>> {
    let l = points.len();
    let mut k = vec![vec![0.0; l]; l];
    for i in 0..l {
        for j in i..l {
            let v = kernel.eval(&points[i], &points[j]);
            if !v.is_finite() {
                return Err(Error::training("OCSVM", format!("kernel value {v} between targets {i} and {j}")));
            }
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcSvmModel {
    support_vectors: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    rho: f64,
    nu: f64,
    kernel: KernelSpec,
}

impl OcSvmModel {
    pub fn fit(targets: &[Vec<f64>], nu: f64, kernel: KernelSpec) -> Result<Self> {
        Self::fit_with(targets, nu, kernel, SolverOptions::default()).map(|(m, _)| m)
    }

    /// Trains and also returns the full dual solution over all targets.
    pub fn fit_with(
        targets: &[Vec<f64>],
        nu: f64,
        kernel: KernelSpec,
        options: SolverOptions,
    ) -> Result<(Self, DualSolution)> {
        kernel.validate()?;
        if let Some(first) = targets.first() {
            if let Some(bad) = targets.iter().find(|t| t.len() != first.len()) {
                return Err(Error::Arity { expected: first.len(), found: bad.len() });
            }
        }
        if matches!(kernel, KernelSpec::Polynomial { .. }) {
            log::warn!("one-class training with a polynomial kernel is sensitive to vector norms");
        }
        let solution = solve_dual(&kernel_matrix(targets, &kernel)?, nu, options)?;
        let (support_vectors, alpha) = targets
            .iter()
            .zip(&solution.alpha)
            .filter(|(_, &a)| a > 0.0)
            .map(|(x, &a)| (x.clone(), a))
            .unzip();
        let model = OcSvmModel { support_vectors, alpha, rho: solution.rho, nu, kernel };
        Ok((model, solution))
    }

    pub fn from_parts(
        support_vectors: Vec<Vec<f64>>,
        alpha: Vec<f64>,
        rho: f64,
        nu: f64,
        kernel: KernelSpec,
    ) -> Result<Self> {
        kernel.validate()?;
        if support_vectors.is_empty() || support_vectors.len() != alpha.len() {
            return Err(Error::training("OCSVM", "support vectors and coefficients do not match"));
        }
        Ok(OcSvmModel { support_vectors, alpha, rho, nu, kernel })
    }

    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn arity(&self) -> usize {
        self.support_vectors[0].len()
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity() {
            return Err(Error::Arity { expected: self.arity(), found: x.len() });
        }
        let s: f64 = self.support_vectors.iter().zip(&self.alpha).map(|(sv, a)| a * self.kernel.eval(sv, x)).sum();
        Ok(s - self.rho)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.decision_value(x)? >= 0.0 { Label::Target } else { Label::Other })
    }
}

/// One one-class SVM per k-means cluster of the targets.
#[derive(Debug, Clone, PartialEq)]
pub struct McOcSvmModel {
    clusters: Vec<(Vec<f64>, OcSvmModel)>,
}

impl McOcSvmModel {
    /// Clusters with fewer than 2 members are merged into the cluster whose
    /// centroid is nearest before the per-cluster SVMs are trained.
    pub fn fit(targets: &[Vec<f64>], clusters: usize, nu: f64, kernel: KernelSpec, seed: u64) -> Result<Self> {
        if targets.len() < 2 * clusters {
            return Err(Error::training(
                "MCOCSVM",
                format!("{} targets cannot fill {clusters} clusters of at least 2", targets.len()),
            ));
        }
        let clustering = kmeans::lloyd(targets, clusters, seed, kmeans::MAX_ITER)?;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); clusters];
        for (i, &c) in clustering.assignments.iter().enumerate() {
            members[c].push(i);
        }
        let mut centroids = clustering.centroids;
        loop {
            let live: Vec<usize> = (0..members.len()).filter(|&c| !members[c].is_empty()).collect();
            let Some(&small) = live.iter().find(|&&c| members[c].len() < 2) else { break };
            let into = live
                .iter()
                .copied()
                .filter(|&c| c != small)
                .min_by(|&a, &b| {
                    squared_euclidean(&centroids[small], &centroids[a])
                        .total_cmp(&squared_euclidean(&centroids[small], &centroids[b]))
                })
                .ok_or_else(|| Error::training("MCOCSVM", "no cluster to merge into"))?;
            let moved = std::mem::take(&mut members[small]);
            members[into].extend(moved);
            members[into].sort_unstable();
            let dim = targets[0].len();
            let mut mean = vec![0.0; dim];
            for &i in &members[into] {
                for (m, v) in mean.iter_mut().zip(&targets[i]) {
                    *m += v;
                }
            }
            centroids[into] = mean.into_iter().map(|s| s / members[into].len() as f64).collect();
        }
        let mut out = Vec::new();
        for (c, idx) in members.iter().enumerate() {
            if idx.is_empty() {
                continue;
            }
            let rows: Vec<Vec<f64>> = idx.iter().map(|&i| targets[i].clone()).collect();
            out.push((centroids[c].clone(), OcSvmModel::fit(&rows, nu, kernel)?));
        }
        Ok(McOcSvmModel { clusters: out })
    }

    pub fn from_parts(clusters: Vec<(Vec<f64>, OcSvmModel)>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::training("MCOCSVM", "no clusters"));
        }
        Ok(McOcSvmModel { clusters })
    }

    pub fn clusters(&self) -> &[(Vec<f64>, OcSvmModel)] {
        &self.clusters
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        for (_, svm) in &self.clusters {
            if svm.predict(x)? == Label::Target {
                return Ok(Label::Target);
            }
        }
        Ok(Label::Other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_points(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
        let mut r = rng::seeded(seed);
        (0..n).map(|_| (0..dim).map(|_| StandardNormal.sample(&mut r)).collect()).collect()
    }

    #[test]
    fn kernel_examples() {
        let g = KernelSpec::Gaussian { sigma: 1.0 };
        assert_eq!(kernel_eval(&g, &[1.5, -2.0], &[1.5, -2.0]).unwrap(), 1.0);
        assert_eq!(kernel_eval(&g, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), (-12.5f64).exp());
        let p = KernelSpec::Polynomial { exponent: 1.0 };
        assert_eq!(kernel_eval(&p, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        let p2 = KernelSpec::Polynomial { exponent: 2.0 };
        assert_eq!(kernel_eval(&p2, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 121.0);
        assert!(kernel_eval(&g, &[1.0], &[1.0, 2.0]).is_err());
        assert!(KernelSpec::Gaussian { sigma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { exponent: 0.5 }.validate().is_err());
    }

    #[test]
    fn nu_one_forces_uniform_alpha() {
        let pts = normal_points(3, 12, 2);
        let (model, sol) = OcSvmModel::fit_with(&pts, 1.0, KernelSpec::Gaussian { sigma: 1.0 }, SolverOptions::default()).unwrap();
        assert_eq!(model.support_vectors().len(), 12);
        for a in &sol.alpha {
            assert!((a - 1.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_points_are_accepted() {
        let pts = vec![vec![0.5, 0.5]; 3];
        let model = OcSvmModel::fit(&pts, 0.5, KernelSpec::Gaussian { sigma: 1.0 }).unwrap();
        assert!(model.decision_value(&[0.5, 0.5]).unwrap() >= -1e-12);
        assert_eq!(model.predict(&[0.5, 0.5]).unwrap(), Label::Target);
    }

    #[test]
    fn far_points_are_rejected() {
        let pts = normal_points(5, 40, 2);
        let model = OcSvmModel::fit(&pts, 0.2, KernelSpec::Gaussian { sigma: 1.0 }).unwrap();
        assert!(model.decision_value(&[50.0, 50.0]).unwrap() < 0.0);
        assert_eq!(model.predict(&[50.0, 50.0]).unwrap(), Label::Other);
    }

    #[test]
    fn dual_constraints_and_monotone_objective() {
        for seed in 0..10 {
            let pts = normal_points(seed, 60, 2);
            let nu = 0.1 + 0.05 * seed as f64;
            let (_, sol) = OcSvmModel::fit_with(&pts, nu, KernelSpec::Gaussian { sigma: 1.0 }, SolverOptions::default()).unwrap();
            let sum: f64 = sol.alpha.iter().sum();
            assert!((sum - 1.0).abs() < 1e-6);
            assert!(sol.alpha.iter().all(|&a| (0.0..=sol.upper).contains(&a)));
            for w in sol.objective.windows(2) {
                assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0));
            }
        }
    }

    #[test]
    fn free_support_vectors_sit_on_the_boundary() {
        let pts = normal_points(11, 30, 2);
        let tight = SolverOptions { tolerance: 1e-9, ..SolverOptions::default() };
        let (model, sol) = OcSvmModel::fit_with(&pts, 0.3, KernelSpec::Gaussian { sigma: 1.0 }, tight).unwrap();
        for (x, &a) in pts.iter().zip(&sol.alpha) {
            if a > 0.0 && a < sol.upper {
                assert!(model.decision_value(x).unwrap().abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gaussian_gram_is_psd() {
        let mut r = rng::seeded(8);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
            let k = kernel_matrix(&pts, &KernelSpec::Gaussian { sigma: 0.7 }).unwrap();
            for i in 0..10 {
                for j in 0..10 {
                    assert_eq!(k[i][j], k[j][i]);
                }
            }
            assert!(smallest_eigenvalue(k) >= -1e-8);
        }
    }

    /// Cyclic Jacobi eigenvalue sweep for a small symmetric matrix.
    fn smallest_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
        let n = a.len();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-22 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn rejects_bad_inputs() {
        let pts = normal_points(1, 5, 2);
        let g = KernelSpec::Gaussian { sigma: 1.0 };
        assert!(OcSvmModel::fit(&pts, 0.0, g).is_err());
        assert!(OcSvmModel::fit(&pts, 1.5, g).is_err());
        assert!(OcSvmModel::fit(&pts[..1], 0.5, g).is_err());
        let stuck = solve_dual(&kernel_matrix(&pts, &g).unwrap(), 0.3, SolverOptions { tolerance: 0.0, passes: 1 });
        assert!(matches!(stuck, Err(Error::NotConverged { .. })));
    }

    #[test]
    fn multi_cluster_examples() {
        let g = KernelSpec::Gaussian { sigma: 1.0 };
        let pts = normal_points(2, 40, 2);
        let single = OcSvmModel::fit(&pts, 0.1, g).unwrap();
        let multi = McOcSvmModel::fit(&pts, 1, 0.1, g, 9).unwrap();
        for x in normal_points(99, 50, 2) {
            assert_eq!(single.predict(&x).unwrap(), multi.predict(&x).unwrap());
        }

        let mut blobs = normal_points(3, 20, 2);
        blobs.extend(normal_points(4, 20, 2).into_iter().map(|p| vec![p[0] + 20.0, p[1]]));
        let multi = McOcSvmModel::fit(&blobs, 2, 0.1, g, 1).unwrap();
        assert_eq!(multi.clusters().len(), 2);
        assert_eq!(multi.predict(&[0.0, 0.0]).unwrap(), Label::Target);
        assert_eq!(multi.predict(&[20.0, 0.0]).unwrap(), Label::Target);
        assert_eq!(multi.predict(&[10.0, 0.0]).unwrap(), Label::Other);
        for x in normal_points(7, 30, 2) {
            for (_, svm) in multi.clusters() {
                if svm.predict(&x).unwrap() == Label::Target {
                    assert_eq!(multi.predict(&x).unwrap(), Label::Target);
                }
            }
        }
    }

    #[test]
    fn singleton_clusters_are_merged() {
        let mut pts = normal_points(6, 10, 2);
        pts.push(vec![40.0, 40.0]);
        let multi = McOcSvmModel::fit(&pts, 2, 0.2, KernelSpec::Gaussian { sigma: 1.0 }, 0).unwrap();
        assert_eq!(multi.clusters().len(), 1);
    }
}
