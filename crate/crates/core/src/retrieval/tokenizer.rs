/// Lowercased alphanumeric runs, plus one extra token for each hyphenated
/// compound (`Bridge-A`, `PRJ-010104`) so identifiers match exactly.
///
/// Compound tokens follow the segment tokens of the run they came from:
/// `"Bridge-A Pier-3"` → `bridge a bridge-a pier 3 pier-3`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let lower = text.to_lowercase();
    for run in lower.split(|c: char| !(c.is_alphanumeric() || c == '-')) {
        let mut segments = 0;
        for seg in run.split('-').filter(|s| !s.is_empty()) {
            out.push(seg.to_string());
            segments += 1;
        }
        if segments >= 2 {
            let compound = run.trim_matches('-');
            // collapse doubled hyphens so "a--b" and "a-b" index alike
            let compound = compound
                .split('-')
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
                .join("-");
            out.push(compound);
        }
    }
    out
}
