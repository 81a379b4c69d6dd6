//! Synthetic commit histories for the revert/cherry-pick ordering task.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::records::DatasetRecord;
use super::rng::{cell_rng, label};
use super::Split;

pub const VERBS: [&str; 12] = [
    "Add", "Fix", "Remove", "Refactor", "Update", "Optimize", "Document", "Rename", "Revert", "Simplify", "Harden", "Deprecate",
];

pub const SUBSYSTEMS: [&str; 10] =
    ["parser", "scheduler", "network", "storage", "auth", "cache", "logging", "config", "ui", "build"];

/// `depth` commit lines, newest first, with hashes distinct within the snippet.
pub fn history<R: Rng>(depth: usize, rng: &mut R) -> Vec<String> {
    let mut hashes = HashSet::new();
    let mut lines = Vec::with_capacity(depth);
    while lines.len() < depth {
        let hash = format!("{:07x}", rng.gen_range(0u32..0x1000_0000));
        if !hashes.insert(hash.clone()) {
            continue;
        }
        let verb = VERBS.choose(rng).expect("non-empty");
        let subsystem = SUBSYSTEMS.choose(rng).expect("non-empty");
        lines.push(format!("{hash} {verb} {subsystem}"));
    }
    lines
}

/// `count_per_cell` snippets for every (depth, seed) pair. The revert answer
/// lists the lines as shown; the cherry-pick answer lists them reversed.
pub fn gen_git_histories(depths: &[usize], seeds: &[u64], count_per_cell: usize) -> Vec<DatasetRecord> {
    let cells: Vec<(usize, u64, usize)> = depths
        .iter()
        .flat_map(|&d| seeds.iter().flat_map(move |&s| (0..count_per_cell).map(move |i| (d, s, i))))
        .collect();
    cells
        .par_iter()
        .map(|&(depth, seed, i)| {
            let mut rng = cell_rng(seed, &[label("git"), depth as u64, i as u64]);
            let lines = history(depth, &mut rng);
            let snippet = lines.join("\n");
            let cherrypick = lines.iter().rev().cloned().collect::<Vec<_>>().join("\n");
            let meta = BTreeMap::from([("depth".to_string(), json!(depth))]);
            DatasetRecord {
                id: format!("git-d{depth}-s{seed}-{i:06}"),
                task: "git".into(),
                input: snippet.clone(),
                target: snippet.clone(),
                length: depth,
                seed,
                split: Split::Test,
                meta,
                snippet: Some(snippet.clone()),
                revert: Some(snippet),
                cherrypick: Some(cherrypick),
            }
        })
        .collect()
}
