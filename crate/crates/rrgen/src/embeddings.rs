//! Pretrained word vectors in the whitespace-separated text format
//! (`token v1 v2 ... v_d`, one per line).

use std::path::Path;

use rrgen_core::text::Vocabulary;
use rrgen_core::ParamSet;

use crate::error::{io_err, RunError, RunResult};

/// Overwrites rows of the `embedding` parameter for vocabulary tokens found
/// in the file. Returns the number of rows replaced.
pub fn load_into(path: &Path, vocab: &Vocabulary, params: &mut ParamSet) -> RunResult<usize> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let id = params.require("embedding")?;
    let dim = params.get(id).shape()[1];
    let mut replaced = 0;
    for (n, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        if !vocab.contains(token) {
            continue;
        }
        let values = parts
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| RunError::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })?;
        if values.len() != dim {
            return Err(RunError::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: format!("expected {dim} values, found {}", values.len()),
            });
        }
        let row = vocab.encode(token) as usize;
        params.get_mut(id).data_mut()[row * dim..(row + 1) * dim].copy_from_slice(&values);
        replaced += 1;
    }
    log::info!("loaded {replaced} pretrained vectors from {}", path.display());
    Ok(replaced)
}
