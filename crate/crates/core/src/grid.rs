//! The `individual` / `sequence` option grammar and its cartesian product.

use crate::model::{AlgorithmKind, ParamSet, ParamValue, SwitchSpec, ValueKind};

/// Per-switch value lists for one algorithm, in switch declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    algorithm: AlgorithmKind,
    lists: Vec<Vec<ParamValue>>,
}

impl ParamGrid {
    pub fn defaults(algorithm: AlgorithmKind) -> Self {
        let lists = ParamSet::defaults(algorithm).values().iter().map(|v| vec![*v]).collect();
        ParamGrid { algorithm, lists }
    }

    pub fn single(params: &ParamSet) -> Self {
        ParamGrid { algorithm: params.algorithm(), lists: params.values().iter().map(|v| vec![*v]).collect() }
    }

    pub fn algorithm(&self) -> AlgorithmKind {
        self.algorithm
    }

    pub fn values(&self, name: &str) -> Option<&[ParamValue]> {
        let pos = self.algorithm.switches().iter().position(|s| s.name == name)?;
        Some(&self.lists[pos])
    }

    /// Number of combinations.
    pub fn len(&self) -> usize {
        self.lists.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every combination, the last switch varying fastest.
    pub fn combinations(&self) -> Vec<ParamSet> {
        let mut out = Vec::with_capacity(self.len());
        let mut cursor = vec![0usize; self.lists.len()];
        if self.is_empty() {
            return out;
        }
        loop {
            let values = cursor.iter().zip(&self.lists).map(|(&i, l)| l[i]).collect();
            out.push(ParamSet::new(self.algorithm, values).expect("grid values are validated"));
            let mut s = self.lists.len();
            loop {
                if s == 0 {
                    return out;
                }
                s -= 1;
                cursor[s] += 1;
                if cursor[s] < self.lists[s].len() {
                    break;
                }
                cursor[s] = 0;
            }
        }
    }

    /// The options echo block, one `-X (label) ---> values` line per switch.
    pub fn echo(&self) -> String {
        let mut out = format!("{} Classifier Options selected:-\n\n", self.algorithm.id());
        for (spec, list) in self.algorithm.switches().iter().zip(&self.lists) {
            let values: Vec<String> = list.iter().map(|v| v.render(spec.kind)).collect();
            out.push_str(&echo_line(&format!("-{} ({})", spec.name, spec.label), &values.join(" ")));
        }
        out
    }
}

pub(crate) fn echo_line(key: &str, value: &str) -> String {
    format!("{key:<27} ---> {value}\n")
}

/// Help text for an algorithm's switches, followed by an example line.
pub fn grid_help(algorithm: AlgorithmKind) -> String {
    let mut out = String::new();
    for spec in algorithm.switches() {
        let n = spec.name;
        out.push_str(&format!(
            "-{n} sequence <start> <increment> <end>\nor\n-{n} individual <{n} value1> <{n} value2>...\n    {} (default: {}).\n\n",
            spec.help, spec.default
        ));
    }
    out.push_str("Example usage below;\nType: ");
    let example: Vec<String> = algorithm.switches().iter().map(|s| format!("-{} individual {}", s.name, example_values(s))).collect();
    out.push_str(&example.join(" "));
    out.push('\n');
    out
}

fn example_values(spec: &SwitchSpec) -> &'static str {
    match spec.kind {
        ValueKind::Count => "1 2",
        ValueKind::Positive => "9.0 7.0",
        ValueKind::Fraction => "0.05 0.1",
        ValueKind::AtLeastOne => "1.0 2.0",
        ValueKind::Metric => "c m",
        ValueKind::Kernel => "g",
    }
}

/// Parses an option line such as `-M sequence 1 1 7 -D individual e c`.
///
/// Never fails: a malformed or unknown group leaves the switch at its
/// default and adds a notification.
pub fn parse_param_grid(algorithm: AlgorithmKind, text: &str) -> (ParamGrid, Vec<String>) {
    let mut grid = ParamGrid::defaults(algorithm);
    let mut notices = Vec::new();
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let is_switch = |t: &str| t.len() > 1 && t.starts_with('-') && t[1..].chars().next().is_some_and(char::is_alphabetic);

    let mut pos = 0;
    while pos < tokens.len() {
        if !is_switch(tokens[pos]) {
            notices.push(format!("Ignoring unexpected input \"{}\".", tokens[pos]));
            pos += 1;
            continue;
        }
        let name = &tokens[pos][1..];
        let mut end = pos + 1;
        while end < tokens.len() && !is_switch(tokens[end]) {
            end += 1;
        }
        let args = &tokens[pos + 1..end];
        pos = end;

        let Some(slot) = algorithm.switches().iter().position(|s| s.name == name) else {
            notices.push(format!("Unknown option -{name} for {algorithm}; it has been ignored."));
            continue;
        };
        let spec = &algorithm.switches()[slot];
        match parse_group(spec, args) {
            Ok(values) => grid.lists[slot] = values,
            Err(why) => {
                grid.lists[slot] = ParamGrid::defaults(algorithm).lists[slot].clone();
                notices.push(format!("-{name}: {why}; the default ({}) will be used.", spec.default));
            }
        }
    }
    (grid, notices)
}

fn parse_group(spec: &SwitchSpec, args: &[&str]) -> Result<Vec<ParamValue>, String> {
    let Some((&keyword, rest)) = args.split_first() else {
        return Err("no keyword given".into());
    };
    let values = match keyword {
        "individual" => {
            let mut out = Vec::new();
            for token in rest {
                out.push(ParamValue::parse(spec.kind, token).ok_or_else(|| format!("\"{token}\" is not a valid value"))?);
            }
            out
        }
        "sequence" => expand_sequence(spec.kind, rest)?,
        other => return Err(format!("unknown keyword \"{other}\"")),
    };
    if values.is_empty() {
        return Err("no values given".into());
    }
    Ok(values)
}

/// Digits after the decimal point, or `None` for exponent notation.
fn decimals(token: &str) -> Option<usize> {
    if token.contains(['e', 'E']) {
        return None;
    }
    Some(token.split_once('.').map_or(0, |(_, frac)| frac.len()))
}

fn expand_sequence(kind: ValueKind, args: &[&str]) -> Result<Vec<ParamValue>, String> {
    if matches!(kind, ValueKind::Metric | ValueKind::Kernel) {
        return Err("sequence needs numeric values".into());
    }
    let [start, inc, end] = args else {
        return Err(format!("sequence needs exactly 3 numbers, {} given", args.len()));
    };
    let parse = |t: &str| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("\"{t}\" is not a number"));
    let (s, i, e) = (parse(start)?, parse(inc)?, parse(end)?);
    if !(i > 0.0) {
        return Err("the increment must be positive".into());
    }
    // Round to the precision the user typed so 0.1 steps stay tidy.
    let places = [start, inc, end].iter().map(|t| decimals(t)).collect::<Option<Vec<_>>>();
    let scale = places.map(|p| 10f64.powi(p.into_iter().max().unwrap_or(0).min(15) as i32));
    let slack = i * 1e-9;
    let mut out = Vec::new();
    for step in 0u64.. {
        let raw = s + step as f64 * i;
        if raw > e + slack {
            break;
        }
        if out.len() >= 100_000 {
            return Err("sequence is too long".into());
        }
        let v = scale.map_or(raw, |scale| (raw * scale).round() / scale);
        out.push(ParamValue::number(kind, v).ok_or_else(|| format!("{v} is out of range"))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::DistanceMetric;
    use proptest::prelude::*;

    fn numbers(values: &[ParamValue]) -> Vec<f64> {
        values.iter().map(|v| v.as_number().unwrap()).collect()
    }

    #[test]
    fn sequence_keyword_table() {
        let (g, notes) = parse_param_grid(AlgorithmKind::Knn, "-M sequence 1 1 7 -K sequence 1 1 7 -T sequence 1.0 1.0 5.0");
        assert!(notes.is_empty());
        assert_eq!(numbers(g.values("M").unwrap()), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(numbers(g.values("K").unwrap()), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(numbers(g.values("T").unwrap()), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(g.len(), 7 * 7 * 5);
    }

    #[test]
    fn individual_metrics_and_echo() {
        let (g, notes) = parse_param_grid(
            AlgorithmKind::Knn,
            "-M individual 1 3 7 -K sequence 1 1 5 -T sequence 1.0 1.0 5.0 -D individual e c m",
        );
        assert!(notes.is_empty());
        assert_eq!(
            g.values("D").unwrap(),
            &[
                ParamValue::Metric(DistanceMetric::Euclidean),
                ParamValue::Metric(DistanceMetric::Cosine),
                ParamValue::Metric(DistanceMetric::Manhattan)
            ]
        );
        let echo = g.echo();
        assert!(echo.starts_with("KNN Classifier Options selected:-\n"));
        assert!(echo.contains("-M (M neighbours used)      ---> 1 3 7\n"));
        assert!(echo.contains("---> 1 2 3 4 5\n"));
        assert!(echo.contains("---> 1.0 2.0 3.0 4.0 5.0\n"));
        assert!(echo.contains("---> e c m\n"));
    }

    #[test]
    fn malformed_groups_fall_back() {
        let (g, notes) = parse_param_grid(AlgorithmKind::Knn, "-M sequence 1 7 -T individual -2 -D individual q -Z 4 junk");
        assert_eq!(g, ParamGrid::defaults(AlgorithmKind::Knn));
        assert_eq!(notes.len(), 4);
        let (_, notes) = parse_param_grid(AlgorithmKind::Knn, "-T sequence 1.0 0 5.0");
        assert_eq!(notes.len(), 1);
        let (g, notes) = parse_param_grid(AlgorithmKind::Knn, "");
        assert!(notes.is_empty());
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn sequence_end_handling() {
        let (g, _) = parse_param_grid(AlgorithmKind::Kmeans, "-T sequence 0.1 0.1 0.5 -C sequence 2 3 9");
        assert_eq!(numbers(g.values("T").unwrap()), vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(numbers(g.values("C").unwrap()), vec![2.0, 5.0, 8.0]);
        let (g, notes) = parse_param_grid(AlgorithmKind::Ocsvm, "-N sequence 1e-2 1e-2 3e-2");
        assert!(notes.is_empty());
        assert_eq!(g.values("N").unwrap().len(), 3);
    }

    #[test]
    fn product_order() {
        let (g, _) = parse_param_grid(AlgorithmKind::Knn, "-M individual 1 2 -T individual 1.0 2.0 3.0");
        let combos: Vec<String> = g.combinations().iter().map(ParamSet::summary).collect();
        assert_eq!(combos.len(), 6);
        assert_eq!(combos[0], "M: 1 K: 3 Threshold: 1.0 Dist metric: e");
        assert_eq!(combos[1], "M: 1 K: 3 Threshold: 2.0 Dist metric: e");
        assert_eq!(combos[3], "M: 2 K: 3 Threshold: 1.0 Dist metric: e");
    }

    proptest! {
        #[test]
        fn any_text_resolves(words in prop::collection::vec(
            prop::sample::select(vec!["-M", "-K", "-T", "-D", "-Q", "individual", "sequence", "1", "2.5", "-3", "e", "x", "0", "7"]), 0..20)) {
            let text = words.join(" ");
            let (g, _) = parse_param_grid(AlgorithmKind::Knn, &text);
            let combos = g.combinations();
            prop_assert_eq!(combos.len(), g.len());
            prop_assert!(!combos.is_empty());
        }
    }
}
