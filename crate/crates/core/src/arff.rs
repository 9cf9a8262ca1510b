//! Reading, writing and relabelling ARFF files.
//!
//! Supported subset: `numeric`/`real`/`integer` and nominal attributes,
//! dense rows, `%` comment lines, bare or quoted tokens. The class is the
//! last attribute and must be nominal. Rows containing `?` are skipped and
//! reported.

use std::fmt::Write as _;

use crate::dataset::{AttributeKind, AttributeSpec, Example, ExampleSet, Label, OTHER, TARGET};
use crate::error::{Error, Result};

/// Where a relabelled set came from; written as a comment banner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelProvenance {
    pub original_relation: String,
    pub class_attribute: String,
    pub target_label: String,
    pub original_class_values: Vec<String>,
}

/// Outcome of a parse, including rows dropped for missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedArff {
    pub set: ExampleSet,
    /// 1-based line numbers of rows skipped because they contain `?`.
    pub skipped_missing: Vec<usize>,
}

pub fn parse_arff(source: &str) -> Result<ExampleSet> {
    let parsed = parse_arff_report(source)?;
    for line in &parsed.skipped_missing {
        log::warn!("line {line}: row contains a missing value (`?`) and was skipped");
    }
    Ok(parsed.set)
}

pub fn parse_arff_report(source: &str) -> Result<ParsedArff> {
    let mut relation: Option<String> = None;
    let mut attributes: Vec<AttributeSpec> = Vec::new();
    let mut in_data = false;
    let mut examples = Vec::new();
    let mut skipped_missing = Vec::new();
    let mut last_line = 0;

    for (n, raw) in source.lines().enumerate() {
        let line_no = n + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            match parse_row(line, line_no, &attributes)? {
                Some(example) => examples.push(example),
                None => skipped_missing.push(line_no),
            }
            continue;
        }
        let (keyword, rest) = split_keyword(line);
        match keyword.to_ascii_lowercase().as_str() {
            "@relation" => {
                if relation.is_some() {
                    return Err(Error::arff(line_no, "@relation declared twice"));
                }
                if rest.is_empty() {
                    return Err(Error::arff(line_no, "@relation needs a name"));
                }
                relation = Some(unquote(rest));
            }
            "@attribute" => {
                if relation.is_none() {
                    return Err(Error::arff(line_no, "@attribute before @relation"));
                }
                let attr = parse_attribute(rest, line_no)?;
                if attributes.iter().any(|a| a.name == attr.name) {
                    return Err(Error::arff(line_no, format!("attribute `{}` redeclared", attr.name)));
                }
                attributes.push(attr);
            }
            "@data" => {
                if relation.is_none() {
                    return Err(Error::arff(line_no, "@data before @relation"));
                }
                match attributes.last() {
                    None => return Err(Error::arff(line_no, "@data before any @attribute")),
                    Some(a) if a.nominal_values().is_none() => {
                        return Err(Error::arff(
                            line_no,
                            format!("class attribute `{}` (the last attribute) must be nominal", a.name),
                        ))
                    }
                    Some(_) => {}
                }
                in_data = true;
            }
            other => return Err(Error::arff(line_no, format!("unexpected `{other}` in header"))),
        }
    }

    let Some(relation) = relation else {
        return Err(Error::arff(last_line.max(1), "missing @relation"));
    };
    if !in_data {
        return Err(Error::arff(last_line.max(1), "missing @data"));
    }
    let set = ExampleSet::new(relation, attributes, examples)?;
    Ok(ParsedArff { set, skipped_missing })
}

fn split_keyword(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(pos) => (&line[..pos], line[pos..].trim()),
        None => (line, ""),
    }
}

fn parse_attribute(rest: &str, line_no: usize) -> Result<AttributeSpec> {
    let (name, type_part) = take_token(rest).ok_or_else(|| Error::arff(line_no, "@attribute needs a name"))?;
    let type_part = type_part.trim();
    if type_part.is_empty() {
        return Err(Error::arff(line_no, format!("attribute `{name}` has no type")));
    }
    if let Some(body) = type_part.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| Error::arff(line_no, format!("unterminated value list for `{name}`")))?;
        let values: Vec<String> = split_fields(body)
            .into_iter()
            .map(|t| unquote(t.trim()))
            .filter(|t| !t.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::arff(line_no, format!("nominal attribute `{name}` has no values")));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::arff(line_no, format!("nominal attribute `{name}` repeats value `{v}`")));
            }
        }
        return Ok(AttributeSpec { name, kind: AttributeKind::Nominal(values) });
    }
    let kind = type_part.split_whitespace().next().unwrap_or("").to_ascii_lowercase();
    match kind.as_str() {
        "numeric" | "real" | "integer" => Ok(AttributeSpec::numeric(name)),
        "string" | "date" | "relational" => Err(Error::arff(
            line_no,
            format!("attribute `{name}` has unsupported type `{kind}`; only numeric and nominal attributes are accepted"),
        )),
        _ => Err(Error::arff(line_no, format!("attribute `{name}` has unknown type `{type_part}`"))),
    }
}

/// First (possibly quoted) token and the remainder.
fn take_token(s: &str) -> Option<(String, &str)> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    let (_, first) = chars.next()?;
    if first == '\'' || first == '"' {
        let mut out = String::new();
        let mut escaped = false;
        for (i, c) in chars {
            if escaped {
                out.push(c);
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == first {
                return Some((out, &s[i + c.len_utf8()..]));
            } else {
                out.push(c);
            }
        }
        None
    } else {
        let end = s.find(char::is_whitespace).unwrap_or(s.len());
        Some((s[..end].to_string(), &s[end..]))
    }
}

/// Splits on commas outside quotes.
fn split_fields(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match (quote, c) {
            (Some(_), '\\') => escaped = true,
            (Some(q), c) if c == q => quote = None,
            (None, '\'' | '"') => quote = Some(c),
            (None, ',') => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn unquote(s: &str) -> String {
    let s = s.trim();
    let bytes = s.as_bytes();
    if s.len() >= 2 && (bytes[0] == b'\'' || bytes[0] == b'"') && bytes[s.len() - 1] == bytes[0] {
        let mut out = String::new();
        let mut escaped = false;
        for c in s[1..s.len() - 1].chars() {
            if escaped {
                out.push(c);
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else {
                out.push(c);
            }
        }
        out
    } else {
        s.to_string()
    }
}

fn parse_row(line: &str, line_no: usize, attributes: &[AttributeSpec]) -> Result<Option<Example>> {
    if line.starts_with('{') {
        return Err(Error::arff(line_no, "sparse rows are not supported"));
    }
    let fields = split_fields(line);
    if fields.len() != attributes.len() {
        return Err(Error::arff(
            line_no,
            format!("row has {} values, schema declares {} attributes", fields.len(), attributes.len()),
        ));
    }
    if fields.iter().any(|f| f.trim() == "?") {
        return Ok(None);
    }
    let mut features = Vec::with_capacity(attributes.len() - 1);
    let mut class = 0;
    for (k, (field, attr)) in fields.iter().zip(attributes).enumerate() {
        let token = unquote(field);
        let value = match &attr.kind {
            AttributeKind::Numeric => {
                let v: f64 = token.parse().map_err(|_| {
                    Error::arff(line_no, format!("`{token}` is not a number (attribute `{}`)", attr.name))
                })?;
                if !v.is_finite() {
                    return Err(Error::arff(line_no, format!("`{token}` is not a finite number")));
                }
                v
            }
            AttributeKind::Nominal(values) => values.iter().position(|v| *v == token).ok_or_else(|| {
                Error::arff(line_no, format!("`{token}` is not a declared value of `{}`", attr.name))
            })? as f64,
        };
        if k + 1 == attributes.len() {
            class = value as usize;
        } else {
            features.push(value);
        }
    }
    Ok(Some(Example { features, class }))
}

fn needs_quotes(token: &str) -> bool {
    token.is_empty()
        || token.chars().any(|c| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '%' | '\'' | '"' | '\\'))
}

fn quote_if_needed(token: &str) -> String {
    if needs_quotes(token) {
        let mut out = String::from("'");
        for c in token.chars() {
            if c == '\'' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('\'');
        out
    } else {
        token.to_string()
    }
}

fn is_one_sided_domain(values: &[String]) -> bool {
    values.len() == 2 && values[0] == OTHER && values[1] == TARGET
}

/// Serializes `set` as ARFF text. With `prov`, a commented banner recording
/// the relabelling precedes `@relation`.
pub fn write_arff(set: &ExampleSet, prov: Option<&RelabelProvenance>) -> String {
    let mut out = String::new();
    if let Some(p) = prov {
        out.push_str("%##### O S C A I L #####\n");
        out.push_str("%#One-Sided Classification and Inductive Learning#\n");
        out.push_str("%#####\n%\n");
        let _ = writeln!(out, "%The {} example set has been relabeled to", p.original_relation);
        out.push_str("%only contain one Target class and one Other class.\n%\n");
        let _ = writeln!(out, "%[Target Class = \"{}\"], [Other Class = All others]", p.target_label);
        out.push_str("%\n%The old class options were written as follows:\n");
        let _ = write!(out, "%@attribute {} {{ ", p.class_attribute);
        for v in &p.original_class_values {
            let _ = write!(out, "{v}, ");
        }
        out.push_str("}\n%\n%\n%\n");
    }
    let _ = writeln!(out, "@relation {}", quote_if_needed(set.relation()));
    let class_pos = set.attributes().len() - 1;
    for (k, attr) in set.attributes().iter().enumerate() {
        let _ = write!(out, "@attribute {} ", quote_if_needed(&attr.name));
        match &attr.kind {
            AttributeKind::Numeric => out.push_str("real"),
            AttributeKind::Nominal(values) if k == class_pos && is_one_sided_domain(values) => {
                out.push_str("{\"Other\", \"Target\"}")
            }
            AttributeKind::Nominal(values) => {
                out.push('{');
                let tokens: Vec<String> = values.iter().map(|v| quote_if_needed(v)).collect();
                out.push_str(&tokens.join(", "));
                out.push('}');
            }
        }
        out.push('\n');
    }
    out.push_str("@data\n");
    if prov.is_some() {
        out.push_str("%\n%\n");
    }
    let attrs = set.attributes();
    for ex in set.examples() {
        let mut fields: Vec<String> = Vec::with_capacity(attrs.len());
        for (value, attr) in ex.features.iter().zip(attrs) {
            fields.push(match &attr.kind {
                AttributeKind::Numeric => format!("{value}"),
                AttributeKind::Nominal(values) => quote_if_needed(&values[*value as usize]),
            });
        }
        fields.push(quote_if_needed(&set.class_values()[ex.class]));
        out.push_str(&fields.join(", "));
        out.push('\n');
    }
    out
}

/// Maps `target_label` to Target and every other class to Other.
pub fn relabel(set: &ExampleSet, target_label: &str) -> Result<(ExampleSet, RelabelProvenance)> {
    let domain = set.class_values();
    let Some(target_idx) = domain.iter().position(|v| v == target_label) else {
        return Err(Error::UnknownClass { label: target_label.to_string(), available: domain.to_vec() });
    };
    let prov = RelabelProvenance {
        original_relation: set.relation().to_string(),
        class_attribute: set.class_attribute().name.clone(),
        target_label: target_label.to_string(),
        original_class_values: domain.to_vec(),
    };
    let (relation, mut attributes, examples) = set.clone().into_parts();
    let class_attr = attributes.last_mut().expect("validated schema");
    class_attr.kind = AttributeKind::Nominal(vec![OTHER.to_string(), TARGET.to_string()]);
    let examples = examples
        .into_iter()
        .map(|ex| {
            let label = if ex.class == target_idx { Label::Target } else { Label::Other };
            Example { features: ex.features, class: crate::dataset::one_sided_class_index(label) }
        })
        .collect();
    Ok((ExampleSet::new(relation, attributes, examples)?, prov))
}

/// True when every label is Target or Other and at least one Target exists.
pub fn is_one_sided(set: &ExampleSet) -> bool {
    let mut any_target = false;
    for i in 0..set.len() {
        match set.label(i) {
            Some(Label::Target) => any_target = true,
            Some(Label::Other) => {}
            None => return false,
        }
    }
    any_target
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_1: &str = "%This is a comment\n@relation example 1\n@attribute height numeric\n@attribute width numeric\n@attribute class {standard, large}\n@data\n50, 20, standard\n150, 70, large\n";

    #[test]
    fn parses_small_example() {
        let set = parse_arff(EXAMPLE_1).unwrap();
        assert_eq!(set.relation(), "example 1");
        assert_eq!(set.len(), 2);
        assert_eq!(set.feature_count(), 2);
        assert_eq!(set.features(1), &[150.0, 70.0]);
        assert_eq!(set.label_token(0), "standard");
        assert_eq!(set.class_values(), &["standard".to_string(), "large".to_string()]);
    }

    #[test]
    fn header_only_gives_empty_set() {
        let src = "@RELATION r\n@ATTRIBUTE x NUMERIC\n@Attribute class {a,b}\n@DATA\n";
        let set = parse_arff(src).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.attributes().len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("@attribute x numeric\n@data\n", 1),
            ("@relation r\n@attribute x numeric\n@attribute c {a}\n", 3),
            ("@relation r\n@attribute x numeric\n@attribute x numeric\n", 3),
            ("@relation r\n@attribute x numeric\n@attribute c {a,b}\n@data\n1,a\n1,2,a\n", 6),
            ("@relation r\n@attribute x numeric\n@attribute c {a,b}\n@data\n1,z\n", 5),
            ("@relation r\n@attribute x numeric\n@attribute c {a,b}\n@data\nfoo,a\n", 5),
            ("@relation r\n@attribute s string\n", 2),
        ];
        for (src, line) in cases {
            match parse_arff(src) {
                Err(Error::Arff { line: got, .. }) => assert_eq!(got, line, "{src:?}"),
                other => panic!("expected line error for {src:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn class_must_be_nominal() {
        let src = "@relation r\n@attribute x numeric\n@attribute y numeric\n@data\n";
        assert!(parse_arff(src).is_err());
    }

    #[test]
    fn missing_values_are_skipped() {
        let src = "@relation r\n@attribute x numeric\n@attribute c {a,b}\n@data\n1,a\n?,b\n2,b\n";
        let parsed = parse_arff_report(src).unwrap();
        assert_eq!(parsed.set.len(), 2);
        assert_eq!(parsed.skipped_missing, vec![6]);
    }

    #[test]
    fn quoted_tokens_and_spaces() {
        let src = "@relation 'my data'\n@attribute 'sepal length' real\n@attribute class {\"Other\", \"Target\"}\n@data\n 5.1 ,  Target\n4.9,\"Other\"\n";
        let set = parse_arff(src).unwrap();
        assert_eq!(set.relation(), "my data");
        assert_eq!(set.attributes()[0].name, "sepal length");
        assert_eq!(set.label(0), Some(Label::Target));
        assert_eq!(set.label(1), Some(Label::Other));
        assert_eq!(parse_arff(&write_arff(&set, None)).unwrap(), set);
    }

    fn iris_like() -> ExampleSet {
        let src = "@relation iris\n@attribute sepallength real\n@attribute class {Iris-setosa, Iris-versicolor, Iris-virginica}\n@data\n5.1,Iris-setosa\n7.0,Iris-versicolor\n6.3,Iris-virginica\n4.9,Iris-setosa\n";
        parse_arff(src).unwrap()
    }

    #[test]
    fn relabel_and_banner() {
        let set = iris_like();
        let (relabelled, prov) = relabel(&set, "Iris-setosa").unwrap();
        let labels: Vec<_> = (0..relabelled.len()).map(|i| relabelled.label(i).unwrap()).collect();
        assert_eq!(labels, vec![Label::Target, Label::Other, Label::Other, Label::Target]);
        assert_eq!(relabelled.features(2), set.features(2));
        let text = write_arff(&relabelled, Some(&prov));
        assert!(text.contains("@attribute class {\"Other\", \"Target\"}\n"));
        assert!(text.contains("%[Target Class = \"Iris-setosa\"], [Other Class = All others]\n"));
        assert!(text.contains("%@attribute class { Iris-setosa, Iris-versicolor, Iris-virginica, }\n"));
        assert!(text.lines().take_while(|l| !l.starts_with("@relation")).all(|l| l.starts_with('%')));
        assert_eq!(parse_arff(&text).unwrap(), relabelled);
    }

    #[test]
    fn relabel_is_idempotent_on_its_output() {
        let (once, _) = relabel(&iris_like(), "Iris-virginica").unwrap();
        let (twice, _) = relabel(&once, "Target").unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn relabel_rejects_unknown_target() {
        assert!(matches!(relabel(&iris_like(), "Iris-rosa"), Err(Error::UnknownClass { .. })));
    }

    #[test]
    fn one_sidedness() {
        let raw = iris_like();
        assert!(!is_one_sided(&raw));
        let (relabelled, _) = relabel(&raw, "Iris-setosa").unwrap();
        assert!(is_one_sided(&relabelled));
        let only_other = ExampleSet::from_labelled("o", vec![(vec![1.0], Label::Other)]).unwrap();
        assert!(!is_one_sided(&only_other));
    }

    #[test]
    fn empty_set_writes_valid_arff() {
        let set = ExampleSet::from_labelled("empty", vec![]).unwrap();
        let text = write_arff(&set, None);
        assert!(text.ends_with("@data\n"));
        assert_eq!(parse_arff(&text).unwrap().len(), 0);
    }
}
