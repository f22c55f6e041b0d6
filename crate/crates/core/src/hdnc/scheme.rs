use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Project numbering convention: `common_prefix [tag-] digits(suffix_len)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumberingScheme {
    pub common_prefix: String,
    pub category_tags: BTreeSet<String>,
    pub suffix_len: usize,
    pub coverage: f64,
}

/// Splits `rest` into `(tag, digits)` where `rest = [tag "-"] digits`.
/// Returns `None` when the part before the trailing digit run is not a
/// dash-joined run of alphabetic segments.
fn split_tail(rest: &str) -> Option<(&str, &str)> {
    let digits_start = rest
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_digit())
        .last()
        .map(|(i, _)| i)?;
    let (head, digits) = rest.split_at(digits_start);
    if head.is_empty() {
        return Some(("", digits));
    }
    let tag = head.strip_suffix('-')?;
    let ok = !tag.is_empty()
        && tag
            .split('-')
            .all(|seg| !seg.is_empty() && seg.chars().all(|c| c.is_alphabetic()));
    ok.then_some((tag, digits))
}

impl NumberingScheme {
    /// Returns `(tag, digits)` when `number` conforms to the scheme.
    pub fn parse<'a>(&self, number: &'a str) -> Option<(&'a str, &'a str)> {
        let rest = number.strip_prefix(self.common_prefix.as_str())?;
        let (tag, digits) = split_tail(rest)?;
        (digits.len() == self.suffix_len).then_some((tag, digits))
    }

    pub fn conforms(&self, number: &str) -> bool {
        self.parse(number).is_some()
    }
}

/// Longest common prefix by characters, truncated back to the last `-`.
fn separator_prefix<S: AsRef<str>>(numbers: &[S]) -> String {
    let first = numbers[0].as_ref();
    let mut end = first.len();
    for n in &numbers[1..] {
        let common = first
            .char_indices()
            .zip(n.as_ref().chars())
            .find(|((_, a), b)| a != b)
            .map(|((i, _), _)| i)
            .unwrap_or_else(|| first.len().min(n.as_ref().len()));
        end = end.min(common);
    }
    match first[..end].rfind('-') {
        Some(i) => first[..=i].to_string(),
        None => String::new(),
    }
}

/// Infers the project prefix, category tags and numeric suffix length.
pub fn discover_scheme<S: AsRef<str>>(numbers: &[S]) -> Result<NumberingScheme> {
    if numbers.len() < 2 {
        return Err(Error::invalid("scheme discovery needs at least 2 drawing numbers"));
    }
    let common_prefix = separator_prefix(numbers);

    let tails: Vec<Option<(&str, &str)>> = numbers
        .iter()
        .map(|n| n.as_ref().strip_prefix(common_prefix.as_str()).and_then(split_tail))
        .collect();

    // Modal digit-run length; ties go to the longer run.
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for (_, digits) in tails.iter().flatten() {
        *counts.entry(digits.len()).or_default() += 1;
    }
    let suffix_len = counts
        .iter()
        .max_by_key(|(len, c)| (**c, **len))
        .map(|(len, _)| *len)
        .unwrap_or(0);

    let conforming: Vec<&str> = tails
        .iter()
        .flatten()
        .filter(|(_, d)| d.len() == suffix_len && suffix_len > 0)
        .map(|(tag, _)| *tag)
        .collect();
    let coverage = conforming.len() as f64 / numbers.len() as f64;
    if coverage < 0.5 {
        return Err(Error::NoDominantScheme { coverage });
    }
    Ok(NumberingScheme {
        category_tags: conforming
            .into_iter()
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
        common_prefix,
        suffix_len,
        coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_numbers() {
        let s = discover_scheme(&[
            "PROJID-GRP-PKG-ST-BR-DR-101013",
            "PROJID-GRP-PKG-ST-BR-DR-501521",
            "PROJID-GRP-PKG-ST-ZZ-DR-100001",
        ])
        .unwrap();
        assert_eq!(s.common_prefix, "PROJID-GRP-PKG-ST-");
        assert_eq!(
            s.category_tags,
            ["BR-DR", "ZZ-DR"].into_iter().map(String::from).collect()
        );
        assert_eq!(s.suffix_len, 6);
        assert_eq!(s.coverage, 1.0);
        assert_eq!(s.parse("PROJID-GRP-PKG-ST-BR-DR-501616"), Some(("BR-DR", "501616")));
    }

    #[test]
    fn identical_numbers_truncate_at_last_separator() {
        let s = discover_scheme(&["PRJ-AB-010104", "PRJ-AB-010104"]).unwrap();
        assert_eq!(s.common_prefix, "PRJ-AB-");
        assert!(s.category_tags.is_empty());
        assert_eq!(s.suffix_len, 6);
        assert_eq!(s.coverage, 1.0);
    }

    #[test]
    fn no_shared_prefix() {
        // LCP is "" so every number is "<tag>-<3 digits>".
        let s = discover_scheme(&["A-001", "B-002", "C-003"]).unwrap();
        assert_eq!(s.common_prefix, "");
        assert_eq!(s.category_tags.len(), 3);
        assert_eq!(s.suffix_len, 3);
        assert_eq!(s.coverage, 1.0);
    }

    #[test]
    fn lcp_inside_digits_is_cut_back() {
        let s = discover_scheme(&["PRJ-010101", "PRJ-010203", "PRJ-0199"]).unwrap();
        assert_eq!(s.common_prefix, "PRJ-");
        assert_eq!(s.suffix_len, 6);
        assert!((s.coverage - 2.0 / 3.0).abs() < 1e-12);
        assert!(!s.conforms("PRJ-0199"));
    }

    #[test]
    fn free_form_names_have_no_scheme() {
        let err = discover_scheme(&["General arrangement", "Pier details", "Deck plan"]).unwrap_err();
        assert!(matches!(err, Error::NoDominantScheme { coverage } if coverage == 0.0));
    }

    #[test]
    fn mixed_tail_is_non_conforming() {
        let s = discover_scheme(&["P-1A-001", "P-BB-002", "P-CC-003"]).unwrap();
        assert!(!s.conforms("P-1A-001"));
        assert!(s.conforms("P-BB-002"));
    }

    #[test]
    fn single_number_is_rejected() {
        assert!(discover_scheme(&["PRJ-010101"]).is_err());
    }
}
