//! Reports: ordered checks plus named outputs, rendered as JSON or text.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub seed: u64,
    pub degree_bound: usize,
    pub checks: Vec<Check>,
    pub output: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str, input: &str, seed: u64, degree_bound: usize) -> Self {
        Report { command: command.into(), input: input.into(), seed, degree_bound, checks: Vec::new(), output: BTreeMap::new() }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, witness: Option<String>) {
        self.checks.push(Check { name: name.into(), passed, witness: if passed { None } else { witness } });
    }

    /// A check that failed with an error before it could run.
    pub fn check_result<T, E: std::fmt::Display>(&mut self, name: impl Into<String>, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => {
                self.check(name, true, None);
                Some(v)
            }
            Err(e) => {
                self.check(name, false, Some(e.to_string()));
                None
            }
        }
    }

    pub fn put(&mut self, key: impl Into<String>, v: impl Into<Value>) {
        self.output.insert(key.into(), v.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "command: {}\ninput: {}\nseed: {}\ndegree bound: {}\n",
            self.command, self.input, self.seed, self.degree_bound
        );
        for c in &self.checks {
            match &c.witness {
                Some(w) => s += &format!("FAIL {}: {}\n", c.name, w),
                None => s += &format!("{} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name),
            }
        }
        for (k, v) in &self.output {
            text_value(&mut s, k, v);
        }
        let ok = self.checks.iter().filter(|c| c.passed).count();
        s += &format!("{}/{} checks passed\n", ok, self.checks.len());
        s
    }
}

fn text_value(s: &mut String, key: &str, v: &Value) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                text_value(s, &format!("{key}.{k}"), x);
            }
        }
        Value::String(x) => *s += &format!("{key} = {x}\n"),
        other => *s += &format!("{key} = {other}\n"),
    }
}
