//! Flat `key=value` text blocks used for reports.

/// A record that renders as one `key=value` line per entry.
pub trait KeyValue {
    fn key_values(&self) -> Vec<(String, String)>;

    fn to_key_value(&self) -> String {
        self.key_values()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

/// Parses a `key=value` block back into ordered pairs; blank lines and
/// lines starting with `#` are skipped.
pub fn parse_key_value(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Shortest exact text for a float; large and small magnitudes switch to
/// exponent notation.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}
