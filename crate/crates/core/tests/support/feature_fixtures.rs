//! Compares extracted vectors against the hand counts in
//! `fixtures/features/*.expected`.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::Path;

use deobf_core::features::{extract_text, registry, Normalization};

pub const NAMES: [&str; 3] = ["plain", "contraction", "mixed"];

/// Returns a list of mismatches (empty on success).
pub fn check(dir: &Path, name: &str) -> Vec<String> {
    let text = std::fs::read_to_string(dir.join(format!("{name}.txt"))).unwrap();
    let spec = std::fs::read_to_string(dir.join(format!("{name}.expected"))).unwrap();
    let mut counts: HashMap<String, u64> = HashMap::new();
    for line in spec
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
    {
        let (k, v) = line.split_once('\t').unwrap();
        counts.insert(k.to_string(), v.parse().unwrap());
    }
    let words = counts.remove("words").unwrap();
    let chars = counts.remove("chars").unwrap();
    counts.insert("word_count".into(), words);
    counts.insert("char_count".into(), chars);

    let got = extract_text(name, &text);
    let mut problems = Vec::new();
    for entry in &registry().entries {
        let count = counts.remove(&entry.name).unwrap_or(0);
        let value = got.values[entry.index];
        let ok = match entry.normalization {
            Normalization::Raw => value == count as f64,
            Normalization::PerWord => (value - count as f64 / words as f64).abs() <= 1e-12,
            Normalization::PerChar => (value - count as f64 / chars as f64).abs() <= 1e-12,
        };
        if !ok {
            problems.push(format!(
                "{name}: {} = {value}, hand count {count}",
                entry.name
            ));
        }
    }
    for k in counts.keys() {
        problems.push(format!("{name}: expectation names unknown feature {k}"));
    }
    problems
}
