//! trace.jsonl, summary.json and plot.svg.
//!
//! Every file is first written under a temporary name and renamed into place
//! once all of them are complete.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::Loaded;
use crate::experiments::Artifacts;
use crate::{svg, Failure};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Adds to a record the experiment, config hash and version.
pub fn stamp(record: &Value, experiment: &str, hash: &str) -> Value {
    let mut out = Map::new();
    out.insert("experiment".into(), json!(experiment));
    out.insert("config_hash".into(), json!(hash));
    out.insert("version".into(), json!(VERSION));
    if let Value::Object(fields) = record {
        for (k, v) in fields {
            out.insert(k.clone(), v.clone());
        }
    }
    Value::Object(out)
}

pub fn trace_text(records: &[Value]) -> String {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("json values serialize"));
        text.push('\n');
    }
    text
}

pub fn parse_trace(text: &str) -> serde_json::Result<Vec<Value>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

pub fn write(dir: &Path, loaded: &Loaded, art: &Artifacts) -> Result<(), Failure> {
    let cfg = &loaded.config;
    let records: Vec<Value> = art
        .records
        .iter()
        .map(|r| stamp(r, &cfg.experiment, &loaded.hash))
        .collect();
    let summary = json!({
        "experiment": cfg.experiment,
        "version": VERSION,
        "config_hash": loaded.hash,
        "verdict": art.verdict,
        "thresholds": art.thresholds,
        "params": cfg.params,
        "results": art.results,
    });
    let mut files = vec![
        ("trace.jsonl", trace_text(&records)),
        (
            "summary.json",
            serde_json::to_string_pretty(&summary).expect("json values serialize") + "\n",
        ),
    ];
    if cfg.output.svg {
        if let Some(doc) = svg::render(&records) {
            files.push(("plot.svg", doc));
        }
    }
    write_all(dir, &files)
}

pub fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    for (name, text) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, text) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(Failure::io(&tmp, e));
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, dest) in &staged {
        fs::rename(tmp, dest).map_err(|e| Failure::io(dest, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamp_adds_provenance() {
        let r = stamp(&json!({"s": 1.0, "dist": 0.5}), "attractor", "abc");
        assert_eq!(r["experiment"], "attractor");
        assert_eq!(r["config_hash"], "abc");
        assert_eq!(r["version"], VERSION);
        assert_eq!(r["dist"], 0.5);
    }

    #[test]
    fn trace_round_trip() {
        let records = vec![json!({"a": 1}), json!({"b": [1, 2]})];
        assert_eq!(parse_trace(&trace_text(&records)).unwrap(), records);
    }

    #[test]
    fn write_all_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        write_all(dir.path(), &[("a.txt", "x".into()), ("b.txt", "y".into())]).unwrap();
        let mut names: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(names, ["a.txt", "b.txt"]);
    }
}
