//! Artifact writing. Every artifact carries `{version, invocation, seed}`:
//! JSON wraps the payload as `{"meta": …, "result": …}`, CSV and point files
//! start with a `# meta: …` comment line.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use netscope::dependence::JointPdf;
use netscope::digits::PointSet;
use netscope::quality::{render_decimal, PairCounts, QualityProfile};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    invocation: &'a [String],
    seed: Option<u64>,
}

pub struct Sink {
    invocation: Vec<String>,
}

impl Sink {
    pub fn new(invocation: Vec<String>) -> Self {
        Sink { invocation }
    }

    fn meta(&self, seed: Option<u64>) -> Meta<'_> {
        Meta { version: env!("CARGO_PKG_VERSION"), invocation: &self.invocation, seed }
    }

    fn write(&self, text: &str, out: Option<&Path>) -> anyhow::Result<()> {
        match out {
            Some(p) => fs::write(p, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn comment(&self, seed: Option<u64>) -> String {
        format!("# meta: {}\n", serde_json::to_string(&self.meta(seed)).expect("meta serializes"))
    }

    pub fn json<T: Serialize>(&self, value: &T, out: Option<&Path>, seed: Option<u64>) -> anyhow::Result<()> {
        let doc = serde_json::json!({ "meta": self.meta(seed), "result": value });
        self.write(&(serde_json::to_string_pretty(&doc)? + "\n"), out)
    }

    pub fn csv(&self, body: &str, out: Option<&Path>, seed: Option<u64>) -> anyhow::Result<()> {
        self.write(&(self.comment(seed) + body), out)
    }

    pub fn points(&self, ps: &PointSet, out: Option<&Path>, seed: Option<u64>) -> anyhow::Result<()> {
        let mut text = self.comment(seed);
        text.push_str(&format!("# provenance: {}\n", ps.provenance()));
        text.push_str(&ps.to_text());
        self.write(&text, out)
    }
}

pub fn profile_csv(p: &QualityProfile, exact: bool) -> String {
    let mut out = String::from("k,M,C\n");
    for v in &p.values {
        out.push_str(&format!("\"{}\",{},{}\n", v.k, v.m, if exact { v.c.to_string() } else { v.decimal.clone() }));
    }
    out
}

pub fn pdf_csv(pdf: &JointPdf, counts: &PairCounts, exact: bool) -> String {
    let mut out = String::from("i,N,psi\n");
    for (i, psi) in &pdf.support {
        out.push_str(&format!("\"{}\",{},{}\n", i, counts.n_exact(i.as_slice()), if exact { psi.to_string() } else { render_decimal(psi, 2) }));
    }
    out
}
