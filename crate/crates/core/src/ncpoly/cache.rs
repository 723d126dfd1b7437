//! On-disk cache of completed rewrite systems.
//!
//! A cache file is JSON holding the key, the degree bound, the rule list
//! (head letter codes, tail terms with scalar strings) and a digest of the
//! rule content. Loading checks both digests and re-runs the confluence
//! audit before the system is trusted.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rewrite::{audit_confluence, RewriteSystem, Rule};
use super::{MonomialOrder, NCPoly, Word};
use crate::error::{Error, Result};
use crate::scalars::Field;

#[derive(Serialize, Deserialize)]
struct CachedRule {
    head: Vec<u8>,
    tail: Vec<(Vec<u8>, String)>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    key: String,
    field: String,
    degree_bound: usize,
    rules_digest: String,
    rules: Vec<CachedRule>,
}

/// Result of a cache lookup.
#[derive(Debug)]
pub enum CacheOutcome {
    Hit(RewriteSystem),
    Miss,
    /// The file exists but failed a digest or audit check.
    Invalid(String),
}

fn digest_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Content key of a completion request. Relation order does not matter.
pub fn system_key(relations: &[NCPoly], order: MonomialOrder, bound: usize, field: &Field) -> String {
    let mut rels: Vec<String> = relations.iter().map(|r| r.to_string()).collect();
    rels.sort();
    rels.dedup();
    let text = format!("{order:?}|{bound}|{}|{}", field.mode_str(), rels.join(";"));
    digest_hex(&text)
}

fn encode_rules(system: &RewriteSystem) -> Vec<CachedRule> {
    system
        .rules()
        .iter()
        .map(|r| CachedRule {
            head: r.head.as_slice().to_vec(),
            tail: r.tail.terms().map(|(w, c)| (w.as_slice().to_vec(), c.to_string())).collect(),
        })
        .collect()
}

fn rules_digest(rules: &[CachedRule]) -> String {
    let mut text = String::new();
    for r in rules {
        text.push_str(&format!("{:?}->", r.head));
        for (w, c) in &r.tail {
            text.push_str(&format!("{w:?}:{c},"));
        }
        text.push('\n');
    }
    digest_hex(&text)
}

fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

/// Writes `system` under `key`; returns the file path.
pub fn store_system(dir: &Path, key: &str, system: &RewriteSystem, field: &Field) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Cache(e.to_string()))?;
    let rules = encode_rules(system);
    let file = CacheFile {
        key: key.to_string(),
        field: field.mode_str(),
        degree_bound: system.degree_bound(),
        rules_digest: rules_digest(&rules),
        rules,
    };
    let path = cache_path(dir, key);
    let text = serde_json::to_string(&file).map_err(|e| Error::Cache(e.to_string()))?;
    fs::write(&path, text).map_err(|e| Error::Cache(e.to_string()))?;
    Ok(path)
}

/// Loads the system stored under `key`, revalidating it.
pub fn load_system(dir: &Path, key: &str, field: &Field) -> CacheOutcome {
    let path = cache_path(dir, key);
    let Ok(text) = fs::read_to_string(&path) else { return CacheOutcome::Miss };
    let file: CacheFile = match serde_json::from_str(&text) {
        Ok(f) => f,
        Err(e) => return CacheOutcome::Invalid(format!("corrupt cache file: {e}")),
    };
    if file.key != key || file.field != field.mode_str() {
        return CacheOutcome::Invalid("key mismatch".to_string());
    }
    if rules_digest(&file.rules) != file.rules_digest {
        return CacheOutcome::Invalid("rule digest mismatch".to_string());
    }
    let mut rules = Vec::with_capacity(file.rules.len());
    for r in &file.rules {
        let mut tail = NCPoly::zero();
        for (w, c) in &r.tail {
            match field.parse(c) {
                Ok(s) => tail.add_term(Word::from_slice(w), &s),
                Err(e) => return CacheOutcome::Invalid(e.to_string()),
            }
        }
        rules.push(Rule { head: Word::from_slice(&r.head), tail });
    }
    let system = RewriteSystem::from_rules(rules, MonomialOrder::DegLex, file.degree_bound, true);
    match audit_confluence(&system) {
        Ok(()) => CacheOutcome::Hit(system),
        Err(w) => CacheOutcome::Invalid(format!("confluence audit failed: {w}")),
    }
}
