//! Raw corpus input: one JSON object per line with `app_id`, `category`,
//! `rating`, `review` and `response`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, RunError, RunResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPair {
    pub app_id: String,
    pub category: String,
    pub rating: u8,
    pub review: String,
    pub response: String,
}

/// Parses a JSONL corpus. Blank lines are skipped; any malformed line or a
/// rating outside 1..=5 is an error naming the line.
pub fn parse_corpus(text: &str, path: &Path) -> RunResult<Vec<RawPair>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| RunError::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message,
        };
        let pair: RawPair = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        if !(1..=5).contains(&pair.rating) {
            return Err(err(format!("rating {} outside 1..=5", pair.rating)));
        }
        out.push(pair);
    }
    Ok(out)
}

pub fn read_corpus(path: &Path) -> RunResult<Vec<RawPair>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_corpus(&text, path)
}

/// One name per line; blank lines and `#` comments are ignored.
pub fn read_name_list(path: Option<&Path>) -> RunResult<Vec<String>> {
    let Some(path) = path else { return Ok(Vec::new()) };
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}
