//! Algorithm registry, hyperparameter switches and trained models.

use std::fmt;

use crate::dataset::{IndexView, Label};
use crate::error::{Error, Result};
use crate::kmeans::KMeansModel;
use crate::metrics::{evaluate, DistanceMetric, EvalReport};
use crate::neighbors::{BinaryKnnModel, NnPcModel, OsKnnModel};
use crate::ocsvm::{KernelSpec, McOcSvmModel, OcSvmModel};
use crate::preprocess::{NormalizationKind, NormalizationMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    /// One-sided kNN ratio test.
    Knn,
    Nnpc,
    Kmeans,
    Ocsvm,
    McOcsvm,
    /// Two-class kNN baseline.
    Bknn,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 6] = [
        AlgorithmKind::Knn,
        AlgorithmKind::Nnpc,
        AlgorithmKind::Kmeans,
        AlgorithmKind::Ocsvm,
        AlgorithmKind::McOcsvm,
        AlgorithmKind::Bknn,
    ];

    pub fn id(self) -> &'static str {
        match self {
            AlgorithmKind::Knn => "KNN",
            AlgorithmKind::Nnpc => "NNPC",
            AlgorithmKind::Kmeans => "KMEANS",
            AlgorithmKind::Ocsvm => "OCSVM",
            AlgorithmKind::McOcsvm => "MCOCSVM",
            AlgorithmKind::Bknn => "BKNN",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id().eq_ignore_ascii_case(id))
    }

    pub fn is_one_sided(self) -> bool {
        self != AlgorithmKind::Bknn
    }

    pub fn switches(self) -> &'static [SwitchSpec] {
        match self {
            AlgorithmKind::Knn => &[SW_M, SW_K, SW_T, SW_D],
            AlgorithmKind::Nnpc => &[SW_D],
            AlgorithmKind::Kmeans => &[SW_C, SW_KMEANS_T, SW_D],
            AlgorithmKind::Ocsvm => &[SW_S, SW_N, SW_G, SW_P],
            AlgorithmKind::McOcsvm => &[SW_MC_C, SW_S, SW_N, SW_G, SW_P],
            AlgorithmKind::Bknn => &[SW_BK, SW_D],
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Value domain of a switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    /// Integer ≥ 1.
    Count,
    /// Real > 0.
    Positive,
    /// Real in (0, 1].
    Fraction,
    /// Real ≥ 1.
    AtLeastOne,
    Metric,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
    Polynomial,
}

impl KernelKind {
    pub fn token(self) -> &'static str {
        match self {
            KernelKind::Gaussian => "g",
            KernelKind::Polynomial => "p",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "g" => Some(KernelKind::Gaussian),
            "p" => Some(KernelKind::Polynomial),
            _ => None,
        }
    }
}

/// A classifier option settable with `-X individual ...` or
/// `-X sequence start inc end`.
#[derive(Debug, PartialEq)]
pub struct SwitchSpec {
    pub name: &'static str,
    /// Text shown in the options echo, e.g. `M neighbours used`.
    pub label: &'static str,
    /// Name used in per-combination result lines.
    pub short: &'static str,
    /// Name used in the model selection summary.
    pub best: &'static str,
    pub help: &'static str,
    pub kind: ValueKind,
    pub default: &'static str,
}

const SW_M: SwitchSpec = SwitchSpec {
    name: "M",
    label: "M neighbours used",
    short: "M",
    best: "m",
    help: "The number of nearest neighbours of the test example",
    kind: ValueKind::Count,
    default: "3",
};
const SW_K: SwitchSpec = SwitchSpec {
    name: "K",
    label: "K neighbours of M",
    short: "K",
    best: "k",
    help: "The number of nearest neighbours of each of the M neighbours",
    kind: ValueKind::Count,
    default: "3",
};
const SW_T: SwitchSpec = SwitchSpec {
    name: "T",
    label: "Threshold used",
    short: "Threshold",
    best: "threshold",
    help: "The threshold on the ratio of the two average distances",
    kind: ValueKind::Positive,
    default: "1.5",
};
const SW_D: SwitchSpec = SwitchSpec {
    name: "D",
    label: "Distance metric used",
    short: "Dist metric",
    best: "distance metric",
    help: "The distance metric to use (Euclidean=e, Manhattan=m, Cosine=c)",
    kind: ValueKind::Metric,
    default: "e",
};
const SW_C: SwitchSpec = SwitchSpec {
    name: "C",
    label: "Number of clusters",
    short: "Clusters",
    best: "clusters",
    help: "The number of clusters fitted to the target examples",
    kind: ValueKind::Count,
    default: "10",
};
const SW_KMEANS_T: SwitchSpec = SwitchSpec {
    name: "T",
    label: "Threshold used",
    short: "Threshold",
    best: "threshold",
    help: "The largest distance to the nearest cluster centre accepted as a target",
    kind: ValueKind::Positive,
    default: "1.5",
};
const SW_MC_C: SwitchSpec = SwitchSpec {
    name: "C",
    label: "Number of clusters",
    short: "Clusters",
    best: "clusters",
    help: "The number of clusters, each described by its own support vector machine",
    kind: ValueKind::Count,
    default: "2",
};
const SW_S: SwitchSpec = SwitchSpec {
    name: "S",
    label: "Kernel width used",
    short: "Sigma",
    best: "kernel width",
    help: "The width of the gaussian kernel",
    kind: ValueKind::Positive,
    default: "1.0",
};
const SW_N: SwitchSpec = SwitchSpec {
    name: "N",
    label: "Nu used",
    short: "Nu",
    best: "nu",
    help: "The regularisation parameter nu, in (0, 1]",
    kind: ValueKind::Fraction,
    default: "0.01",
};
const SW_G: SwitchSpec = SwitchSpec {
    name: "G",
    label: "Kernel used",
    short: "Kernel",
    best: "kernel",
    help: "The kernel to use (Gaussian=g, Polynomial=p)",
    kind: ValueKind::Kernel,
    default: "g",
};
const SW_P: SwitchSpec = SwitchSpec {
    name: "P",
    label: "Polynomial exponent used",
    short: "Exponent",
    best: "exponent",
    help: "The exponent of the polynomial kernel",
    kind: ValueKind::AtLeastOne,
    default: "1.0",
};
const SW_BK: SwitchSpec = SwitchSpec {
    name: "K",
    label: "K neighbours used",
    short: "K",
    best: "k",
    help: "The number of nearest neighbours that vote",
    kind: ValueKind::Count,
    default: "1",
};

/// One setting of one switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Metric(DistanceMetric),
    Kernel(KernelKind),
}

impl ParamValue {
    /// Parses a token for a switch of the given kind, rejecting values
    /// outside the switch's domain.
    pub fn parse(kind: ValueKind, token: &str) -> Option<Self> {
        match kind {
            ValueKind::Metric => DistanceMetric::from_token(token).map(ParamValue::Metric),
            ValueKind::Kernel => KernelKind::from_token(token).map(ParamValue::Kernel),
            _ => token.parse::<f64>().ok().and_then(|v| Self::number(kind, v)),
        }
    }

    pub fn number(kind: ValueKind, v: f64) -> Option<Self> {
        let ok = v.is_finite()
            && match kind {
                ValueKind::Count => v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64,
                ValueKind::Positive => v > 0.0,
                ValueKind::Fraction => v > 0.0 && v <= 1.0,
                ValueKind::AtLeastOne => v >= 1.0,
                ValueKind::Metric | ValueKind::Kernel => false,
            };
        ok.then_some(ParamValue::Number(v))
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            ParamValue::Number(v) => Some(*v),
            _ => None,
        }
    }

    /// Text form used in echoes, logs and model files.
    pub fn render(&self, kind: ValueKind) -> String {
        match self {
            ParamValue::Number(v) if kind == ValueKind::Count => format!("{}", *v as u64),
            ParamValue::Number(v) => format!("{v:?}"),
            ParamValue::Metric(m) => m.token().to_string(),
            ParamValue::Kernel(k) => k.token().to_string(),
        }
    }
}

/// One value per switch, in the algorithm's switch order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    algorithm: AlgorithmKind,
    values: Vec<ParamValue>,
}

impl ParamSet {
    pub fn new(algorithm: AlgorithmKind, values: Vec<ParamValue>) -> Result<Self> {
        let switches = algorithm.switches();
        if values.len() != switches.len() {
            return Err(Error::Config(format!(
                "{algorithm} takes {} options, {} given",
                switches.len(),
                values.len()
            )));
        }
        for (spec, v) in switches.iter().zip(&values) {
            let ok = match v {
                ParamValue::Number(x) => ParamValue::number(spec.kind, *x).is_some(),
                ParamValue::Metric(_) => spec.kind == ValueKind::Metric,
                ParamValue::Kernel(_) => spec.kind == ValueKind::Kernel,
            };
            if !ok {
                return Err(Error::Config(format!("invalid value for -{}", spec.name)));
            }
        }
        Ok(ParamSet { algorithm, values })
    }

    pub fn defaults(algorithm: AlgorithmKind) -> Self {
        let values = algorithm
            .switches()
            .iter()
            .map(|s| ParamValue::parse(s.kind, s.default).expect("switch defaults are valid"))
            .collect();
        ParamSet { algorithm, values }
    }

    pub fn algorithm(&self) -> AlgorithmKind {
        self.algorithm
    }

    pub fn values(&self) -> &[ParamValue] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<ParamValue> {
        self.algorithm.switches().iter().position(|s| s.name == name).map(|i| self.values[i])
    }

    fn number(&self, name: &str) -> f64 {
        self.get(name).and_then(|v| v.as_number()).expect("validated on construction")
    }

    fn metric(&self) -> DistanceMetric {
        match self.get("D") {
            Some(ParamValue::Metric(m)) => m,
            _ => DistanceMetric::Euclidean,
        }
    }

    fn kernel(&self) -> KernelSpec {
        match self.get("G") {
            Some(ParamValue::Kernel(KernelKind::Polynomial)) => KernelSpec::Polynomial { exponent: self.number("P") },
            _ => KernelSpec::Gaussian { sigma: self.number("S") },
        }
    }

    /// `(switch, rendered value)` pairs in switch order.
    pub fn rendered(&self) -> Vec<(&'static SwitchSpec, String)> {
        self.algorithm.switches().iter().zip(&self.values).map(|(s, v)| (s, v.render(s.kind))).collect()
    }

    /// Per-combination line prefix, e.g. `M: 4 K: 4 Threshold: 4.0 Dist metric: c`.
    pub fn summary(&self) -> String {
        self.rendered().iter().map(|(s, v)| format!("{}: {}", s.short, v)).collect::<Vec<_>>().join(" ")
    }
}

/// The learner state of a trained model.
#[derive(Debug, Clone, PartialEq)]
pub enum Learner {
    Knn(OsKnnModel),
    Nnpc(NnPcModel),
    Kmeans(KMeansModel),
    Ocsvm(OcSvmModel),
    McOcsvm(McOcSvmModel),
    Bknn(BinaryKnnModel),
}

/// A trained classifier together with the normalization it applies.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    params: ParamSet,
    norm: NormalizationMode,
    arity: usize,
    learner: Learner,
}

impl TrainedModel {
    /// Trains on `train`. One-sided learners see only its Target rows,
    /// and attribute normalization is fitted on exactly the rows the
    /// learner sees. `seed` drives k-means initialization.
    pub fn train(params: &ParamSet, norm: NormalizationKind, train: &IndexView<'_>, seed: u64) -> Result<Self> {
        let algorithm = params.algorithm();
        let arity = train.parent().feature_count();
        let rows: Vec<(&[f64], Label)> = if algorithm.is_one_sided() {
            train.targets_of().rows().map(|r| (r, Label::Target)).collect()
        } else {
            train.labelled_rows()?
        };
        if rows.is_empty() {
            return Err(Error::training(algorithm.id(), "no training examples"));
        }
        let norm = NormalizationMode::fit(norm, rows.iter().map(|r| r.0))?;
        let mut normalized = Vec::with_capacity(rows.len());
        for (r, l) in rows {
            normalized.push((norm.apply(r)?, l));
        }
        let vectors = || normalized.iter().map(|r| r.0.clone()).collect::<Vec<_>>();
        let learner = match algorithm {
            AlgorithmKind::Knn => Learner::Knn(OsKnnModel::fit(
                vectors(),
                params.number("M") as usize,
                params.number("K") as usize,
                params.number("T"),
                params.metric(),
            )?),
            AlgorithmKind::Nnpc => Learner::Nnpc(NnPcModel::fit(vectors(), params.metric())?),
            AlgorithmKind::Kmeans => Learner::Kmeans(KMeansModel::fit(
                &vectors(),
                params.number("C") as usize,
                params.number("T"),
                params.metric(),
                seed,
            )?),
            AlgorithmKind::Ocsvm => Learner::Ocsvm(OcSvmModel::fit(&vectors(), params.number("N"), params.kernel())?),
            AlgorithmKind::McOcsvm => Learner::McOcsvm(McOcSvmModel::fit(
                &vectors(),
                params.number("C") as usize,
                params.number("N"),
                params.kernel(),
                seed,
            )?),
            AlgorithmKind::Bknn => {
                Learner::Bknn(BinaryKnnModel::fit(normalized.clone(), params.number("K") as usize, params.metric())?)
            }
        };
        Ok(TrainedModel { params: params.clone(), norm, arity, learner })
    }

    /// Reassembles a model from stored parts.
    pub fn from_parts(params: ParamSet, norm: NormalizationMode, arity: usize, learner: Learner) -> Result<Self> {
        let matches = matches!(
            (params.algorithm(), &learner),
            (AlgorithmKind::Knn, Learner::Knn(_))
                | (AlgorithmKind::Nnpc, Learner::Nnpc(_))
                | (AlgorithmKind::Kmeans, Learner::Kmeans(_))
                | (AlgorithmKind::Ocsvm, Learner::Ocsvm(_))
                | (AlgorithmKind::McOcsvm, Learner::McOcsvm(_))
                | (AlgorithmKind::Bknn, Learner::Bknn(_))
        );
        if !matches {
            return Err(Error::Config(format!("learner state does not belong to {}", params.algorithm())));
        }
        Ok(TrainedModel { params, norm, arity, learner })
    }

    pub fn algorithm(&self) -> AlgorithmKind {
        self.params.algorithm()
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn normalization(&self) -> &NormalizationMode {
        &self.norm
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn learner(&self) -> &Learner {
        &self.learner
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.arity {
            return Err(Error::Arity { expected: self.arity, found: x.len() });
        }
        let x = self.norm.apply(x)?;
        match &self.learner {
            Learner::Knn(m) => m.predict(&x),
            Learner::Nnpc(m) => m.predict(&x),
            Learner::Kmeans(m) => m.predict(&x),
            Learner::Ocsvm(m) => m.predict(&x),
            Learner::McOcsvm(m) => m.predict(&x),
            Learner::Bknn(m) => m.predict(&x),
        }
    }

    pub fn predict_view(&self, view: &IndexView<'_>) -> Result<Vec<Label>> {
        view.rows().map(|x| self.predict(x)).collect()
    }

    pub fn evaluate(&self, view: &IndexView<'_>) -> Result<EvalReport> {
        let predictions = self.predict_view(view)?;
        let truths: Vec<Label> = view.labelled_rows()?.into_iter().map(|r| r.1).collect();
        evaluate(&predictions, &truths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ExampleSet;

    fn toy() -> ExampleSet {
        let mut rows = Vec::new();
        for i in 0..12 {
            let v = i as f64;
            rows.push((vec![v, 2.0 * v + 1.0], Label::Target));
        }
        for i in 0..6 {
            rows.push((vec![100.0 + i as f64, -50.0], Label::Other));
        }
        ExampleSet::from_labelled("toy", rows).unwrap()
    }

    #[test]
    fn defaults_match_switch_table() {
        let knn = ParamSet::defaults(AlgorithmKind::Knn);
        assert_eq!(knn.summary(), "M: 3 K: 3 Threshold: 1.5 Dist metric: e");
        let svm = ParamSet::defaults(AlgorithmKind::Ocsvm);
        assert_eq!(svm.get("S"), Some(ParamValue::Number(1.0)));
        assert_eq!(svm.get("N"), Some(ParamValue::Number(0.01)));
        assert_eq!(ParamSet::defaults(AlgorithmKind::Kmeans).get("C"), Some(ParamValue::Number(10.0)));
        assert_eq!(ParamSet::defaults(AlgorithmKind::Bknn).get("K"), Some(ParamValue::Number(1.0)));
        assert_eq!(AlgorithmKind::from_id("knn"), Some(AlgorithmKind::Knn));
        assert_eq!(AlgorithmKind::from_id("svm"), None);
    }

    #[test]
    fn value_domains() {
        assert!(ParamValue::parse(ValueKind::Count, "2.5").is_none());
        assert!(ParamValue::parse(ValueKind::Count, "0").is_none());
        assert!(ParamValue::parse(ValueKind::Fraction, "1.5").is_none());
        assert!(ParamValue::parse(ValueKind::Positive, "-1").is_none());
        assert!(ParamValue::parse(ValueKind::Metric, "x").is_none());
        assert_eq!(ParamValue::parse(ValueKind::Metric, "c"), Some(ParamValue::Metric(DistanceMetric::Cosine)));
        assert!(ParamSet::new(AlgorithmKind::Nnpc, vec![ParamValue::Number(1.0)]).is_err());
    }

    #[test]
    fn one_sided_training_ignores_others() {
        let set = toy();
        let full = set.full_view();
        let targets = full.targets_of();
        for algorithm in [AlgorithmKind::Knn, AlgorithmKind::Nnpc, AlgorithmKind::Kmeans, AlgorithmKind::Ocsvm] {
            let mut params = ParamSet::defaults(algorithm);
            if algorithm == AlgorithmKind::Kmeans {
                params = ParamSet::new(
                    algorithm,
                    vec![ParamValue::Number(3.0), ParamValue::Number(4.0), ParamValue::Metric(DistanceMetric::Euclidean)],
                )
                .unwrap();
            }
            for norm in [NormalizationKind::None, NormalizationKind::PerAttribute] {
                let a = TrainedModel::train(&params, norm, &full, 4).unwrap();
                let b = TrainedModel::train(&params, norm, &targets, 4).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn prediction_arity_is_checked() {
        let set = toy();
        let model = TrainedModel::train(&ParamSet::defaults(AlgorithmKind::Bknn), NormalizationKind::None, &set.full_view(), 0).unwrap();
        assert!(matches!(model.predict(&[1.0]), Err(Error::Arity { expected: 2, found: 1 })));
        assert_eq!(model.evaluate(&set.full_view()).unwrap().error, 0.0);
    }
}
