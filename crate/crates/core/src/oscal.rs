//! Saving and loading trained classifiers as `.oscal` text files.
//!
//! ```text
//! OSCAL 1
//! algorithm KNN
//! created 2026-01-31T09:15:02Z
//! arity 4
//! param M 3
//! ...
//! normalization per_attribute
//! min 0.1 0.5 ...
//! max 7.9 4.4 ...
//! state
//! ...learner specific lines...
//! end
//! ```
//!
//! Reals are written in shortest round-trip form so loading is exact.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::kmeans::KMeansModel;
use crate::metrics::DistanceMetric;
use crate::model::{AlgorithmKind, Learner, ParamSet, ParamValue, TrainedModel};
use crate::neighbors::{BinaryKnnModel, NnPcModel, OsKnnModel};
use crate::ocsvm::{KernelSpec, McOcSvmModel, OcSvmModel};
use crate::preprocess::{NormalizationKind, NormalizationMode};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "OSCAL";

fn reals(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

fn push_rows(out: &mut String, tag: &str, rows: &[Vec<f64>]) {
    out.push_str(&format!("{tag} {}\n", rows.len()));
    for r in rows {
        out.push_str(&reals(r));
        out.push('\n');
    }
}

fn push_svm(out: &mut String, svm: &OcSvmModel) {
    out.push_str(&format!("rho {:?}\nnu {:?}\n", svm.rho(), svm.nu()));
    out.push_str(&format!("support {}\n", svm.alpha().len()));
    for (a, sv) in svm.alpha().iter().zip(svm.support_vectors()) {
        out.push_str(&format!("{a:?} {}\n", reals(sv)));
    }
}

/// Text form of a trained model.
pub fn to_text(model: &TrainedModel, created: DateTime<Utc>) -> String {
    let mut out = format!("{MAGIC} {FORMAT_VERSION}\n");
    out.push_str(&format!("algorithm {}\n", model.algorithm().id()));
    out.push_str(&format!("created {}\n", created.format("%Y-%m-%dT%H:%M:%SZ")));
    out.push_str(&format!("arity {}\n", model.arity()));
    for (spec, value) in model.params().rendered() {
        out.push_str(&format!("param {} {value}\n", spec.name));
    }
    let norm = model.normalization();
    out.push_str(&format!("normalization {}\n", norm.kind().token()));
    if let NormalizationMode::PerAttribute { min, max } = norm {
        out.push_str(&format!("min {}\nmax {}\n", reals(min), reals(max)));
    }
    out.push_str("state\n");
    match model.learner() {
        Learner::Knn(m) => push_rows(&mut out, "targets", m.targets()),
        Learner::Nnpc(m) => {
            out.push_str(&format!("delta {:?}\n", m.delta()));
            push_rows(&mut out, "targets", m.targets());
        }
        Learner::Kmeans(m) => push_rows(&mut out, "centroids", m.centroids()),
        Learner::Ocsvm(m) => push_svm(&mut out, m),
        Learner::McOcsvm(m) => {
            out.push_str(&format!("clusters {}\n", m.clusters().len()));
            for (centroid, svm) in m.clusters() {
                out.push_str(&format!("centroid {}\n", reals(centroid)));
                push_svm(&mut out, svm);
            }
        }
        Learner::Bknn(m) => {
            let stored: Vec<_> = m.stored().collect();
            out.push_str(&format!("stored {}\n", stored.len()));
            for (x, label) in stored {
                out.push_str(&format!("{label} {}\n", reals(x)));
            }
        }
    }
    out.push_str("end\n");
    out
}

/// `<ALGORITHM>_YYYYMMDDThhmmssZ.oscal`
pub fn file_name(algorithm: AlgorithmKind, created: DateTime<Utc>) -> String {
    format!("{}_{}.oscal", algorithm.id(), created.format("%Y%m%dT%H%M%SZ"))
}

/// Writes `model` into `directory` and returns the file path. An existing
/// file of the same name is never overwritten.
pub fn save_model(model: &TrainedModel, directory: &Path) -> Result<PathBuf> {
    let created = Utc::now();
    let mut path = directory.join(file_name(model.algorithm(), created));
    let mut n = 1;
    while path.exists() {
        n += 1;
        let stem = file_name(model.algorithm(), created);
        path = directory.join(stem.replace(".oscal", &format!("-{n}.oscal")));
    }
    std::fs::write(&path, to_text(model, created))?;
    Ok(path)
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path)?;
    from_text(&text).map_err(|e| match e {
        Error::ModelFormat { message, .. } => Error::ModelFormat { path: path.to_path_buf(), message },
        other => other,
    })
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::str::Lines<'a>>,
}

fn bad(message: impl Into<String>) -> Error {
    Error::ModelFormat { path: PathBuf::new(), message: message.into() }
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.lines.next().ok_or_else(|| bad("file is truncated"))
    }

    /// Next line, which must start with `key`; returns the remainder.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            _ if line == key => Ok(""),
            _ => Err(bad(format!("expected \"{key}\", found \"{line}\""))),
        }
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        parse_real(self.field(key)?)
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let v = self.field(key)?;
        v.trim().parse().map_err(|_| bad(format!("bad count \"{v}\" for {key}")))
    }

    fn row(&mut self, arity: usize) -> Result<Vec<f64>> {
        let line = self.next()?;
        let row = parse_reals(line)?;
        if row.len() != arity {
            return Err(bad(format!("row has {} values, expected {arity}", row.len())));
        }
        Ok(row)
    }

    fn rows(&mut self, key: &str, arity: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.count(key)?;
        (0..n).map(|_| self.row(arity)).collect()
    }

    fn svm(&mut self, arity: usize, kernel: KernelSpec) -> Result<OcSvmModel> {
        let rho = self.real("rho")?;
        let nu = self.real("nu")?;
        let n = self.count("support")?;
        let mut alpha = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row = self.row(arity + 1)?;
            alpha.push(row.remove(0));
            vectors.push(row);
        }
        OcSvmModel::from_parts(vectors, alpha, rho, nu, kernel)
    }
}

fn parse_real(token: &str) -> Result<f64> {
    token.trim().parse::<f64>().map_err(|_| bad(format!("bad number \"{token}\"")))
}

fn parse_reals(line: &str) -> Result<Vec<f64>> {
    line.split_whitespace().map(parse_real).collect()
}

pub fn from_text(text: &str) -> Result<TrainedModel> {
    let mut r = Reader { lines: text.lines().peekable() };
    let header = r.next()?;
    let Some(version) = header.strip_prefix(MAGIC).map(str::trim) else {
        return Err(bad("not an .oscal model file"));
    };
    if version != FORMAT_VERSION.to_string() {
        return Err(Error::ModelVersion { found: version.to_string(), expected: FORMAT_VERSION.to_string() });
    }
    let algorithm = r.field("algorithm")?;
    let algorithm = AlgorithmKind::from_id(algorithm).ok_or_else(|| bad(format!("unknown algorithm \"{algorithm}\"")))?;
    r.field("created")?;
    let arity = r.count("arity")?;

    let mut values = Vec::new();
    for spec in algorithm.switches() {
        let rest = r.field("param")?;
        let (name, value) = rest.split_once(' ').ok_or_else(|| bad(format!("bad parameter line \"{rest}\"")))?;
        if name != spec.name {
            return Err(bad(format!("expected parameter {}, found {name}", spec.name)));
        }
        values.push(ParamValue::parse(spec.kind, value).ok_or_else(|| bad(format!("bad value \"{value}\" for {name}")))?);
    }
    let params = ParamSet::new(algorithm, values)?;

    let norm_token = r.field("normalization")?;
    let norm = match NormalizationKind::from_token(norm_token) {
        Some(NormalizationKind::None) => NormalizationMode::None,
        Some(NormalizationKind::PerInstance) => NormalizationMode::PerInstance,
        Some(NormalizationKind::PerAttribute) => {
            let min = parse_reals(r.field("min")?)?;
            let max = parse_reals(r.field("max")?)?;
            if min.len() != arity || max.len() != arity {
                return Err(bad("normalization ranges do not match the arity"));
            }
            NormalizationMode::PerAttribute { min, max }
        }
        None => return Err(bad(format!("unknown normalization \"{norm_token}\""))),
    };
    r.field("state")?;

    let metric = match params.get("D") {
        Some(ParamValue::Metric(m)) => m,
        _ => DistanceMetric::Euclidean,
    };
    let number = |name: &str| params.get(name).and_then(|v| v.as_number()).unwrap_or(f64::NAN);
    let kernel = match params.get("G") {
        Some(ParamValue::Kernel(crate::model::KernelKind::Polynomial)) => KernelSpec::Polynomial { exponent: number("P") },
        _ => KernelSpec::Gaussian { sigma: number("S") },
    };

    let learner = match algorithm {
        AlgorithmKind::Knn => Learner::Knn(OsKnnModel::fit(
            r.rows("targets", arity)?,
            number("M") as usize,
            number("K") as usize,
            number("T"),
            metric,
        )?),
        AlgorithmKind::Nnpc => {
            let delta = r.real("delta")?;
            Learner::Nnpc(NnPcModel::from_parts(r.rows("targets", arity)?, delta, metric)?)
        }
        AlgorithmKind::Kmeans => {
            Learner::Kmeans(KMeansModel::from_centroids(r.rows("centroids", arity)?, number("T"), metric)?)
        }
        AlgorithmKind::Ocsvm => Learner::Ocsvm(r.svm(arity, kernel)?),
        AlgorithmKind::McOcsvm => {
            let n = r.count("clusters")?;
            let mut clusters = Vec::with_capacity(n);
            for _ in 0..n {
                let centroid = parse_reals(r.field("centroid")?)?;
                clusters.push((centroid, r.svm(arity, kernel)?));
            }
            Learner::McOcsvm(McOcSvmModel::from_parts(clusters)?)
        }
        AlgorithmKind::Bknn => {
            let n = r.count("stored")?;
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let line = r.next()?;
                let (label, rest) = line.split_once(' ').ok_or_else(|| bad("bad stored example"))?;
                let label = Label::from_token(label).ok_or_else(|| bad(format!("bad label \"{label}\"")))?;
                let x = parse_reals(rest)?;
                if x.len() != arity {
                    return Err(bad("stored example has the wrong arity"));
                }
                rows.push((x, label));
            }
            Learner::Bknn(BinaryKnnModel::fit(rows, number("K") as usize, metric)?)
        }
    };
    if r.next()? != "end" {
        return Err(bad("missing end marker"));
    }
    TrainedModel::from_parts(params, norm, arity, learner)
}
