use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One input document. Only the abstract is analyzed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedDoc {
    pub id: String,
    pub text: String,
}

/// Raw texts in input order, ids validated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Staging {
    pub docs: Vec<StagedDoc>,
}

impl Staging {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

pub fn ingest_corpus(records: Vec<DocumentRecord>) -> Result<Staging> {
    let mut seen = HashSet::new();
    let mut docs = Vec::with_capacity(records.len());
    for r in records {
        if r.id.is_empty() {
            return Err(Error::InvalidConfig("document id must be nonempty".into()));
        }
        if !seen.insert(r.id.clone()) {
            return Err(Error::DuplicateId(r.id));
        }
        docs.push(StagedDoc {
            id: r.id,
            text: r.abstract_text,
        });
    }
    Ok(Staging { docs })
}

/// Parse JSON lines. Blank lines are skipped; errors carry 1-based line numbers.
pub fn parse_jsonl(reader: impl BufRead) -> Result<Vec<DocumentRecord>> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if record.id.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty id".into(),
            });
        }
        if !ids.insert(record.id.clone()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate id \"{}\"", record.id),
            });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<DocumentRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(std::io::BufReader::new(file))
}
