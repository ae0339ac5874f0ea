//! Command reports: tab-separated text or a versioned JSON document.

use serde::Serialize;

pub const SCHEMA: &str = "bihamo-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = S>, S: ToString>(&mut self, row: I) {
        self.rows.push(row.into_iter().map(|x| x.to_string()).collect());
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub status: Status,
    pub fields: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { schema: SCHEMA, command: command.into(), status: Status::Pass, fields: Vec::new(), tables: Vec::new() }
    }

    pub fn field(&mut self, k: &str, v: impl ToString) {
        self.fields.push((k.into(), v.to_string()));
    }

    pub fn fail(&mut self) {
        self.status = Status::Fail;
    }

    /// Fields as `key<TAB>value`, then each table behind a `#` header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            out.push_str(&format!("{k}\t{v}\n"));
        }
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 || !self.fields.is_empty() {
                out.push('\n');
            }
            if self.tables.len() > 1 {
                out.push_str(&format!("## {}\n", t.name));
            }
            out.push_str(&format!("# {}\n", t.columns.join("\t")));
            for r in &t.rows {
                out.push_str(&r.join("\t"));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_structured(&self) -> String {
        let fields: serde_json::Map<String, serde_json::Value> =
            self.fields.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        let doc = serde_json::json!({
            "schema": self.schema,
            "command": self.command,
            "status": self.status,
            "fields": fields,
            "tables": self.tables,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}
