//! Example sets, index views and stratified splitting.
//!
//! An [`ExampleSet`] is loaded once and never modified afterwards. Every
//! split, fold and subset is an [`IndexView`]: an ordered list of row
//! indices borrowing the parent set.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rng;

pub const TARGET: &str = "Target";
pub const OTHER: &str = "Other";

/// The two labels of a one-sided data set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Target,
    Other,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Target => TARGET,
            Label::Other => OTHER,
        }
    }

    pub fn from_token(token: &str) -> Option<Label> {
        match token {
            TARGET => Some(Label::Target),
            OTHER => Some(Label::Other),
            _ => None,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Target => Label::Other,
            Label::Other => Label::Target,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttributeKind {
    Numeric,
    /// Ordered list of value tokens; feature values store the token index.
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeSpec { name: name.into(), kind: AttributeKind::Numeric }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Nominal(values.into_iter().map(Into::into).collect()),
        }
    }

    pub fn nominal_values(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Nominal(v) => Some(v),
            AttributeKind::Numeric => None,
        }
    }
}

/// One row: feature values plus the index of its class token.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub class: usize,
}

/// A parsed data set. The last attribute is the (nominal) class attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSet {
    relation: String,
    attributes: Vec<AttributeSpec>,
    examples: Vec<Example>,
}

impl ExampleSet {
    pub fn new(relation: impl Into<String>, attributes: Vec<AttributeSpec>, examples: Vec<Example>) -> Result<Self> {
        let set = ExampleSet { relation: relation.into(), attributes, examples };
        set.validate()?;
        Ok(set)
    }

    /// Builds a one-sided set from raw rows.
    pub fn from_labelled(relation: impl Into<String>, rows: Vec<(Vec<f64>, Label)>) -> Result<Self> {
        let dim = rows.first().map_or(0, |(f, _)| f.len());
        let mut attributes: Vec<AttributeSpec> = (0..dim).map(|j| AttributeSpec::numeric(format!("a{j}"))).collect();
        attributes.push(AttributeSpec::nominal("class", [OTHER, TARGET]));
        let examples = rows
            .into_iter()
            .map(|(features, label)| Example { features, class: one_sided_class_index(label) })
            .collect();
        ExampleSet::new(relation, attributes, examples)
    }

    fn validate(&self) -> Result<()> {
        let Some(class) = self.attributes.last() else {
            return Err(Error::Schema("no attributes declared".into()));
        };
        let Some(domain) = class.nominal_values() else {
            return Err(Error::Schema(format!("class attribute `{}` must be nominal", class.name)));
        };
        let mut names = std::collections::HashSet::new();
        for attr in &self.attributes {
            if !names.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!("attribute `{}` declared twice", attr.name)));
            }
            if let AttributeKind::Nominal(values) = &attr.kind {
                if values.is_empty() {
                    return Err(Error::Schema(format!("nominal attribute `{}` has no values", attr.name)));
                }
                let mut seen = std::collections::HashSet::new();
                if let Some(dup) = values.iter().find(|v| !seen.insert(v.as_str())) {
                    return Err(Error::Schema(format!("nominal attribute `{}` repeats value `{dup}`", attr.name)));
                }
            }
        }
        let dim = self.attributes.len() - 1;
        for (i, ex) in self.examples.iter().enumerate() {
            if ex.features.len() != dim {
                return Err(Error::Schema(format!("example {i} has {} features, schema has {dim}", ex.features.len())));
            }
            if ex.class >= domain.len() {
                return Err(Error::Schema(format!("example {i} has class index {} outside the class domain", ex.class)));
            }
        }
        Ok(())
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn feature_attributes(&self) -> &[AttributeSpec] {
        &self.attributes[..self.attributes.len() - 1]
    }

    pub fn class_attribute(&self) -> &AttributeSpec {
        self.attributes.last().expect("validated: at least one attribute")
    }

    pub fn class_values(&self) -> &[String] {
        self.class_attribute().nominal_values().expect("validated: nominal class")
    }

    pub fn feature_count(&self) -> usize {
        self.attributes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.examples[i].features
    }

    pub fn label_token(&self, i: usize) -> &str {
        &self.class_values()[self.examples[i].class]
    }

    /// `None` when the row carries a token other than Target/Other.
    pub fn label(&self, i: usize) -> Option<Label> {
        Label::from_token(self.label_token(i))
    }

    pub fn full_view(&self) -> IndexView<'_> {
        IndexView { parent: self, indices: (0..self.len()).collect() }
    }

    pub(crate) fn into_parts(self) -> (String, Vec<AttributeSpec>, Vec<Example>) {
        (self.relation, self.attributes, self.examples)
    }
}

pub(crate) fn one_sided_class_index(label: Label) -> usize {
    match label {
        Label::Other => 0,
        Label::Target => 1,
    }
}

/// Ordered references into a parent [`ExampleSet`].
#[derive(Debug, Clone)]
pub struct IndexView<'a> {
    parent: &'a ExampleSet,
    indices: Vec<usize>,
}

impl PartialEq for IndexView<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.parent, other.parent) && self.indices == other.indices
    }
}

impl<'a> IndexView<'a> {
    pub fn new(parent: &'a ExampleSet, indices: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; parent.len()];
        for &i in &indices {
            if i >= parent.len() {
                return Err(Error::Split(format!("index {i} out of range for {} examples", parent.len())));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Split(format!("index {i} appears twice in one view")));
            }
        }
        Ok(IndexView { parent, indices })
    }

    fn derived(&self, indices: Vec<usize>) -> IndexView<'a> {
        IndexView { parent: self.parent, indices }
    }

    pub fn parent(&self) -> &'a ExampleSet {
        self.parent
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn features(&self, pos: usize) -> &'a [f64] {
        self.parent.features(self.indices[pos])
    }

    pub fn label(&self, pos: usize) -> Option<Label> {
        self.parent.label(self.indices[pos])
    }

    /// Feature rows in view order.
    pub fn rows(&self) -> impl Iterator<Item = &'a [f64]> + '_ {
        let parent = self.parent;
        self.indices.iter().map(move |&i| parent.features(i))
    }

    /// Feature rows paired with their one-sided label; rows with any other
    /// token are reported as an error.
    pub fn labelled_rows(&self) -> Result<Vec<(&'a [f64], Label)>> {
        self.indices
            .iter()
            .map(|&i| {
                self.parent.label(i).map(|l| (self.parent.features(i), l)).ok_or_else(|| {
                    Error::Schema(format!(
                        "example {i} is labelled `{}`; relabel the set to Target/Other first",
                        self.parent.label_token(i)
                    ))
                })
            })
            .collect()
    }

    /// Sub-view at the given positions of this view.
    pub fn select(&self, positions: &[usize]) -> IndexView<'a> {
        self.derived(positions.iter().map(|&p| self.indices[p]).collect())
    }

    /// Rows labelled Target, in view order.
    pub fn targets_of(&self) -> IndexView<'a> {
        self.with_label(Label::Target)
    }

    /// Rows labelled Other, in view order.
    pub fn others_of(&self) -> IndexView<'a> {
        self.with_label(Label::Other)
    }

    fn with_label(&self, label: Label) -> IndexView<'a> {
        let parent = self.parent;
        self.derived(self.indices.iter().copied().filter(|&i| parent.label(i) == Some(label)).collect())
    }

    /// Permutation of this view determined only by `(view, seed)`.
    pub fn shuffle(&self, seed: u64) -> IndexView<'a> {
        let mut indices = self.indices.clone();
        rng::shuffle(&mut rng::seeded(seed), &mut indices);
        self.derived(indices)
    }

    /// Positions grouped by class token, in ascending class-index order.
    fn strata(&self) -> Vec<Vec<usize>> {
        let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in &self.indices {
            by_class.entry(self.parent.examples[i].class).or_default().push(i);
        }
        by_class.into_values().collect()
    }

    /// Stratified percentage split: each class stratum is shuffled and
    /// `round_half_up(percent/100 * stratum)` of it goes to training.
    pub fn stratified_percentage_split(&self, train_percent: f64, seed: u64) -> Result<SplitPlan<'a>> {
        if !(train_percent > 0.0 && train_percent < 100.0) {
            return Err(Error::Split(format!("train percentage {train_percent} must lie strictly between 0 and 100")));
        }
        let strata = self.strata();
        if strata.len() < 2 {
            return Err(Error::Split(format!(
                "stratification needs examples of at least two classes, found {}",
                strata.len()
            )));
        }
        let mut stream = rng::seeded(seed);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for mut stratum in strata {
            rng::shuffle(&mut stream, &mut stratum);
            let take = round_half_up(train_percent * stratum.len() as f64 / 100.0).min(stratum.len());
            train.extend_from_slice(&stratum[..take]);
            test.extend_from_slice(&stratum[take..]);
        }
        if train.is_empty() && test.len() > 1 {
            train.push(test.remove(0));
        } else if test.is_empty() && train.len() > 1 {
            test.push(train.pop().expect("non-empty"));
        }
        if train.is_empty() || test.is_empty() {
            return Err(Error::Split("one side of the split would be empty".into()));
        }
        Ok(SplitPlan { train: self.derived(train), test: self.derived(test) })
    }

    /// Stratified n-fold partition. Each stratum is shuffled and dealt
    /// round-robin across folds, starting at fold `seed mod n` and continuing
    /// where the previous stratum stopped.
    pub fn stratified_kfold(&self, folds: usize, seed: u64) -> Result<FoldPlan<'a>> {
        if folds < 2 {
            return Err(Error::Split(format!("cross validation needs at least 2 folds, got {folds}")));
        }
        if folds > self.len() {
            return Err(Error::Split(format!(
                "cannot make {folds} folds from {} examples",
                self.len()
            )));
        }
        let mut stream = rng::seeded(seed);
        let mut buckets = vec![Vec::new(); folds];
        let mut next = (seed % folds as u64) as usize;
        for mut stratum in self.strata() {
            rng::shuffle(&mut stream, &mut stratum);
            for idx in stratum {
                buckets[next].push(idx);
                next = (next + 1) % folds;
            }
        }
        Ok(FoldPlan { folds: buckets.into_iter().map(|b| self.derived(b)).collect() })
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Disjoint train/test views covering a source view.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan<'a> {
    pub train: IndexView<'a>,
    pub test: IndexView<'a>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan<'a> {
    pub folds: Vec<IndexView<'a>>,
}

impl<'a> FoldPlan<'a> {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    /// Training/test pair holding out fold `k`.
    pub fn split(&self, k: usize) -> SplitPlan<'a> {
        let test = self.folds[k].clone();
        let mut train = Vec::new();
        for (j, fold) in self.folds.iter().enumerate() {
            if j != k {
                train.extend_from_slice(fold.indices());
            }
        }
        SplitPlan { train: test.derived(train), test }
    }

    pub fn splits(&self) -> impl Iterator<Item = SplitPlan<'a>> + '_ {
        (0..self.folds.len()).map(move |k| self.split(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_with(targets: usize, others: usize) -> ExampleSet {
        let mut rows = Vec::new();
        for i in 0..targets {
            rows.push((vec![i as f64], Label::Target));
        }
        for i in 0..others {
            rows.push((vec![-(i as f64) - 1.0], Label::Other));
        }
        ExampleSet::from_labelled("t", rows).unwrap()
    }

    fn count(view: &IndexView<'_>, label: Label) -> usize {
        (0..view.len()).filter(|&p| view.label(p) == Some(label)).count()
    }

    #[test]
    fn shuffle_of_empty_view_is_empty() {
        let set = set_with(0, 0);
        assert!(set.full_view().shuffle(7).is_empty());
    }

    #[test]
    fn shuffle_depends_on_seed_only() {
        let set = set_with(60, 40);
        let v = set.full_view();
        assert_eq!(v.shuffle(2), v.shuffle(2));
        assert_ne!(v.shuffle(2), v.shuffle(3));
    }

    #[test]
    fn percentage_split_matches_rounded_strata() {
        let set = set_with(154, 76);
        let plan = set.full_view().stratified_percentage_split(67.0, 2).unwrap();
        assert_eq!(count(&plan.train, Label::Target), 103);
        assert_eq!(count(&plan.train, Label::Other), 51);
        assert_eq!(count(&plan.test, Label::Target), 51);
        assert_eq!(count(&plan.test, Label::Other), 25);
    }

    #[test]
    fn percentage_split_two_by_two() {
        let set = set_with(2, 2);
        let plan = set.full_view().stratified_percentage_split(50.0, 5).unwrap();
        assert_eq!((count(&plan.train, Label::Target), count(&plan.train, Label::Other)), (1, 1));
        assert_eq!((count(&plan.test, Label::Target), count(&plan.test, Label::Other)), (1, 1));
    }

    #[test]
    fn percentage_split_repairs_empty_side() {
        let set = set_with(1, 1);
        // 10% of each singleton stratum rounds to 0, so training would be empty.
        let plan = set.full_view().stratified_percentage_split(10.0, 1).unwrap();
        assert_eq!(plan.train.len(), 1);
        assert_eq!(plan.test.len(), 1);
    }

    #[test]
    fn percentage_split_rejects_bad_input() {
        let set = set_with(3, 3);
        assert!(set.full_view().stratified_percentage_split(0.0, 1).is_err());
        assert!(set.full_view().stratified_percentage_split(100.0, 1).is_err());
        let single = set_with(4, 0);
        assert!(single.full_view().stratified_percentage_split(50.0, 1).is_err());
    }

    #[test]
    fn kfold_exact_division() {
        let set = set_with(5, 5);
        let plan = set.full_view().stratified_kfold(5, 2).unwrap();
        for fold in &plan.folds {
            assert_eq!(count(fold, Label::Target), 1);
            assert_eq!(count(fold, Label::Other), 1);
        }
    }

    #[test]
    fn kfold_too_many_folds() {
        let set = set_with(2, 2);
        let err = set.full_view().stratified_kfold(5, 2).unwrap_err();
        assert!(matches!(err, Error::Split(_)));
        assert!(set.full_view().stratified_kfold(1, 2).is_err());
    }

    #[test]
    fn kfold_split_holds_out_each_fold() {
        let set = set_with(7, 4);
        let plan = set.full_view().stratified_kfold(3, 11).unwrap();
        let mut tested: Vec<usize> = Vec::new();
        for split in plan.splits() {
            assert_eq!(split.train.len() + split.test.len(), 11);
            assert!(split.test.indices().iter().all(|i| !split.train.indices().contains(i)));
            tested.extend_from_slice(split.test.indices());
        }
        tested.sort_unstable();
        assert_eq!(tested, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn targets_and_others_partition() {
        let set = set_with(50, 100);
        let v = set.full_view();
        assert_eq!(v.targets_of().len(), 50);
        assert_eq!(v.others_of().len(), 100);
        let all_targets = set_with(4, 0);
        assert_eq!(all_targets.full_view().targets_of(), all_targets.full_view());
        assert!(all_targets.full_view().others_of().is_empty());
    }

    #[test]
    fn view_rejects_bad_indices() {
        let set = set_with(2, 1);
        assert!(IndexView::new(&set, vec![0, 3]).is_err());
        assert!(IndexView::new(&set, vec![1, 1]).is_err());
        assert!(IndexView::new(&set, vec![2, 0]).is_ok());
    }
}
