//! Check records shared by every verification suite.

use std::time::Duration;

use serde_json::{json, Map, Value};

use crate::error::IdentityError;
use crate::identity::{Verdict, Witness};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Degenerate,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckRecord {
    pub id: String,
    pub status: Status,
    pub witness: Option<Witness>,
    pub detail: Option<String>,
    pub elapsed: Option<Duration>,
}

impl CheckRecord {
    pub fn pass(id: impl Into<String>) -> Self {
        CheckRecord { id: id.into(), status: Status::Pass, witness: None, detail: None, elapsed: None }
    }

    pub fn fail(id: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckRecord {
            id: id.into(),
            status: Status::Fail,
            witness: None,
            detail: Some(detail.into()),
            elapsed: None,
        }
    }

    pub fn from_verdict(id: impl Into<String>, v: Result<Verdict, IdentityError>) -> Self {
        let id = id.into();
        match v {
            Ok(Verdict::Equal) => CheckRecord::pass(id),
            Ok(Verdict::ExactProved) => CheckRecord { detail: Some("exact".into()), ..CheckRecord::pass(id) },
            Ok(Verdict::Unequal(w)) => CheckRecord {
                id,
                status: Status::Fail,
                witness: Some(w),
                detail: None,
                elapsed: None,
            },
            Err(e @ IdentityError::ResamplingExhausted { .. }) => CheckRecord {
                id,
                status: Status::Degenerate,
                witness: None,
                detail: Some(e.to_string()),
                elapsed: None,
            },
            Err(e) => CheckRecord::fail(id, e.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self, timings: bool) -> Value {
        let mut m = Map::new();
        m.insert("id".into(), json!(self.id));
        m.insert("status".into(), json!(self.status.as_str()));
        if let Some(w) = &self.witness {
            m.insert("witness".into(), witness_json(w));
        }
        if let Some(d) = &self.detail {
            m.insert("detail".into(), json!(d));
        }
        if timings {
            if let Some(t) = self.elapsed {
                m.insert("elapsed_ms".into(), json!(t.as_secs_f64() * 1e3));
            }
        }
        Value::Object(m)
    }
}

pub fn witness_json(w: &Witness) -> Value {
    let values: Map<String, Value> =
        w.values.iter().map(|(s, v)| (s.name(), json!(v.to_string()))).collect();
    json!({
        "prime": w.prime.to_string(),
        "values": values,
        "lhs": w.lhs.to_string(),
        "rhs": w.rhs.to_string(),
    })
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub title: String,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), records: Vec::new() }
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(CheckRecord::passed)
    }

    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed())
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self, timings: bool) -> Value {
        json!({
            "schema": 1,
            "title": self.title,
            "records": self.records.iter().map(|r| r.to_json(timings)).collect::<Vec<_>>(),
            "summary": {
                "pass": self.count(Status::Pass),
                "fail": self.count(Status::Fail),
                "degenerate": self.count(Status::Degenerate),
            }
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.title);
        for r in &self.records {
            out.push_str(&format!("  [{}] {}", r.status.as_str(), r.id));
            if let Some(d) = &r.detail {
                out.push_str(&format!("  ({d})"));
            }
            out.push('\n');
            if let Some(w) = &r.witness {
                out.push_str(&format!("      witness: {w}\n"));
            }
        }
        out.push_str(&format!(
            "  {} pass, {} fail, {} degenerate\n",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Degenerate)
        ));
        out
    }
}
