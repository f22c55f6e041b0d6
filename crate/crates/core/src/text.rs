//! Text helpers shared by the hierarchy labeller, the indexer and answer matching.

/// Fixed stopword list used for label inference and keyword answer matching.
/// Retrieval itself never drops stopwords.
pub const STOPWORDS: [&str; 30] = [
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "in", "is", "it", "its",
    "of", "on", "or", "that", "the", "this", "to", "was", "were", "what", "which", "with", "how",
    "many", "much",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token)
}

/// Title tokens: lowercase, split on non-alphanumeric runs, tokens of length 1 dropped.
pub fn title_tokens(title: &str) -> Vec<String> {
    title
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() > 1)
        .map(str::to_lowercase)
        .collect()
}

/// Collapses every whitespace run to a single space and trims the ends.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn title_tokens_drop_single_chars() {
        assert_eq!(
            title_tokens("Bridge-A Pier-3 Dimension Details"),
            vec!["bridge", "pier", "dimension", "details"]
        );
    }

    #[test]
    fn normalize_collapses_runs() {
        assert_eq!(normalize_ws("  a \t b\n\nc "), "a b c");
        assert_eq!(normalize_ws(""), "");
    }

    #[test]
    fn stopword_list_has_no_duplicates() {
        let mut v = STOPWORDS.to_vec();
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), 30);
    }
}
