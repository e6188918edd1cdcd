use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "diffsetlab.v1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// What a verb hands back: the result object and any artifact files.
pub struct Outcome {
    pub result: Value,
    pub artifacts: Vec<(String, String)>,
    /// Timing data kept out of the deterministic outputs.
    pub timings: Value,
}

impl Outcome {
    pub fn new(result: impl Serialize) -> Result<Self> {
        Ok(Outcome {
            result: serde_json::to_value(result)?,
            artifacts: Vec::new(),
            timings: Value::Null,
        })
    }

    pub fn artifact(mut self, name: impl Into<String>, body: String) -> Self {
        self.artifacts.push((name.into(), body));
        self
    }
}

/// Collects the resolved configuration of one invocation.
pub struct Session {
    verb: String,
    params: BTreeMap<String, Value>,
    inputs: BTreeMap<String, String>,
    seed: u64,
    out: Option<PathBuf>,
    start: Instant,
}

impl Session {
    pub fn new(verb: &str, seed: u64, out: Option<PathBuf>) -> Self {
        Session {
            verb: verb.to_string(),
            params: BTreeMap::new(),
            inputs: BTreeMap::new(),
            seed,
            out,
            start: Instant::now(),
        }
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.params.insert(name.to_string(), v);
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.insert(name.to_string(), sha256_hex(bytes));
    }

    /// Hash of the verb, parameters, input hashes and seed. Thread counts
    /// and output paths are excluded.
    pub fn config_hash(&self) -> String {
        let canon = json!({
            "verb": self.verb,
            "parameters": self.params,
            "inputs": self.inputs,
            "seed": self.seed,
        });
        sha256_hex(canon.to_string().as_bytes())
    }

    pub fn provenance(&self) -> Value {
        json!({
            "config_sha256": self.config_hash(),
            "version": VERSION,
            "seed": self.seed,
        })
    }

    /// Appends provenance columns to every CSV row.
    pub fn csv(&self, header: &str, rows: &[String]) -> String {
        let tail = format!("{},{},{}", self.config_hash(), VERSION, self.seed);
        let mut s = format!("{header},config_sha256,version,seed\n");
        for r in rows {
            s.push_str(r);
            s.push(',');
            s.push_str(&tail);
            s.push('\n');
        }
        s
    }

    /// Adds provenance fields to every JSON-lines record.
    pub fn jsonl(&self, text: &str) -> Result<String> {
        let prov = self.provenance();
        let mut out = String::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut v: Value = serde_json::from_str(line)?;
            if let (Some(obj), Some(p)) = (v.as_object_mut(), prov.as_object()) {
                for (k, x) in p {
                    obj.insert(k.clone(), x.clone());
                }
            }
            out.push_str(&v.to_string());
            out.push('\n');
        }
        Ok(out)
    }

    pub fn record(&self, result: &Value) -> Value {
        json!({
            "schema": SCHEMA,
            "verb": self.verb,
            "version": VERSION,
            "config_sha256": self.config_hash(),
            "seed": self.seed,
            "parameters": self.params,
            "inputs": self.inputs,
            "result": result,
        })
    }

    /// Writes artifacts plus a runtime sidecar, then prints the record.
    pub fn finish(self, outcome: Outcome) -> Result<()> {
        let record = self.record(&outcome.result);
        let text = serde_json::to_string_pretty(&record)? + "\n";
        let runtime_ms = self.start.elapsed().as_secs_f64() * 1e3;
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join(format!("{}.json", self.verb)), &text)?;
            for (name, body) in &outcome.artifacts {
                fs::write(dir.join(name), body)?;
            }
            let sidecar = json!({
                "config_sha256": self.config_hash(),
                "runtime_ms": runtime_ms,
                "timings": outcome.timings,
            });
            fs::write(
                dir.join(format!("{}.runtime.json", self.verb)),
                serde_json::to_string_pretty(&sidecar)? + "\n",
            )?;
        }
        eprintln!("runtime_ms={runtime_ms:.3}");
        let mut stdout = std::io::stdout().lock();
        match stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
        {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        }
    }
}
