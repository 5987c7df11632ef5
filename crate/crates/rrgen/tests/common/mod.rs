#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

pub const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

/// Copies the fixture directory into a fresh temporary directory.
pub fn fixture_dir() -> TempDir {
    let dir = TempDir::new().unwrap();
    for entry in std::fs::read_dir(FIXTURES).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            std::fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
        }
    }
    dir
}

pub fn config_path(dir: &TempDir) -> PathBuf {
    dir.path().join("config.toml")
}

/// Replaces `key = ...` lines in the fixture config.
pub fn edit_config(dir: &TempDir, edits: &[(&str, &str)]) {
    let path = config_path(dir);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut out = String::new();
    for line in text.lines() {
        let key = line.split('=').next().unwrap().trim();
        match edits.iter().find(|(k, _)| *k == key) {
            Some((k, v)) => out.push_str(&format!("{k} = {v}\n")),
            None => out.push_str(&format!("{line}\n")),
        }
    }
    std::fs::write(path, out).unwrap();
}

pub fn rrgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrgen"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

/// Runs a subcommand against the directory's config and asserts success.
pub fn run_ok(dir: &TempDir, args: &[&str]) -> String {
    let cfg = config_path(dir);
    let mut full = vec!["--config", cfg.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = rrgen(&full);
    assert!(
        out.status.success(),
        "rrgen {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn run_err(dir: &TempDir, args: &[&str]) -> String {
    let cfg = config_path(dir);
    let mut full = vec!["--config", cfg.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = rrgen(&full);
    assert!(!out.status.success(), "rrgen {args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

/// Relative path to file bytes for every file under `root`.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}

const APPS: [&str; 3] = ["notely", "beatbox", "shopnow"];
const CATEGORIES: [&str; 3] = ["productivity", "music", "shopping"];
const REVIEW_WORDS: [&str; 16] = [
    "crash", "slow", "great", "love", "ad", "update", "login", "battery", "screen", "sync", "price", "bad", "fast",
    "song", "cart", "note",
];
const REPLIES: [&str; 6] = [
    "sorry for the trouble , please contact us",
    "thanks for the kind words !",
    "we fixed this in the latest update",
    "please email us at help@example.com",
    "thank you , more features are coming soon",
    "please update the app and try again",
];

/// A JSONL corpus of `n` distinct synthetic pairs.
pub fn synthetic_corpus(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = String::new();
    for i in 0..n {
        let a = i % APPS.len();
        let len = rng.gen_range(2..8);
        let mut words: Vec<&str> = (0..len).map(|_| *REVIEW_WORDS.choose(&mut rng).unwrap()).collect();
        words.push(["once", "twice", "always", "today", "again"][i % 5]);
        let reply = REPLIES[rng.gen_range(0..REPLIES.len())];
        s.push_str(&format!(
            "{{\"app_id\":\"{}\",\"category\":\"{}\",\"rating\":{},\"review\":\"{}\",\"response\":\"{}\"}}\n",
            APPS[a],
            CATEGORIES[a],
            rng.gen_range(1..=5),
            words.join(" "),
            reply
        ));
    }
    s
}
