//! CSV tables preceded by a `#` header block. The header echoes every
//! setting needed to reproduce the run; the body is deterministic for a
//! fixed configuration.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use qgraph::HypothesisReport;

use crate::args::Common;
use crate::Failure;

pub struct Table {
    sink: Box<dyn Write>,
}

fn quote(p: &Path) -> String {
    let s = p.display().to_string();
    if s.chars().any(|c| c.is_whitespace() || c == '\'' || c == '"') {
        format!("'{}'", s.replace('\'', r"'\''"))
    } else {
        s
    }
}

impl Table {
    pub fn open(path: Option<&Path>) -> Result<Table, Failure> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| Failure::usage(format!("cannot create {}: {e}", p.display())))?,
            )),
            None => Box::new(io::stdout().lock()),
        };
        Ok(Table { sink })
    }

    pub fn comment(&mut self, line: &str) -> Result<(), Failure> {
        for l in line.lines() {
            writeln!(self.sink, "# {l}")?;
        }
        Ok(())
    }

    pub fn header(
        &mut self,
        command: &str,
        c: &Common,
        extra: &[(&str, String)],
        hypotheses: &HypothesisReport,
        overridden: &[String],
    ) -> Result<(), Failure> {
        let mut cmd = format!("qgraph {command} --graph {}", quote(&c.graph));
        if let Some(p) = &c.coeffs {
            cmd += &format!(" --coeffs {}", quote(p));
        }
        cmd += &format!(" --h {} --tol {} --eig-tol {} --eta {}", c.h, c.tol, c.eig_tol, c.eta);
        if let Some(r) = &c.root {
            cmd += &format!(" --root {r}");
        }
        if c.no_boundary_dirichlet {
            cmd += " --no-boundary-dirichlet";
        }
        for (k, v) in extra {
            if k != &"compact-level" || v != "none" {
                cmd += &format!(" --{k} {v}");
            }
        }
        if c.override_hypotheses {
            cmd += " --override";
        }
        cmd += &format!(" --seed {}", c.seed);
        self.comment(&format!("qgraph {}", env!("CARGO_PKG_VERSION")))?;
        self.comment(&format!("command: {cmd}"))?;
        self.comment(&format!(
            "config: h={} tol={} eig_tol={} boundary_dirichlet={} root={} workers={}",
            c.h,
            c.tol,
            c.eig_tol,
            !c.no_boundary_dirichlet,
            c.root.as_deref().unwrap_or("(graph root)"),
            c.workers.map_or("default".to_string(), |w| w.to_string()),
        ))?;
        self.comment(&format!("hypotheses: {}", hypotheses.summary()))?;
        for o in overridden {
            self.comment(&format!("overridden: {o}"))?;
        }
        self.comment(&format!("seed: {}", c.seed))
    }

    pub fn verify_header(
        &mut self,
        graphs: &[PathBuf],
        coeffs: Option<&Path>,
        h: f64,
        tol: f64,
        seed: u64,
        workers: Option<usize>,
    ) -> Result<(), Failure> {
        let mut cmd = "qgraph verify".to_string();
        for g in graphs {
            cmd += &format!(" --graph {}", quote(g));
        }
        if let Some(p) = coeffs {
            cmd += &format!(" --coeffs {}", quote(p));
        }
        cmd += &format!(" --h {h} --tol {tol} --seed {seed}");
        self.comment(&format!("qgraph {}", env!("CARGO_PKG_VERSION")))?;
        self.comment(&format!("command: {cmd}"))?;
        self.comment(&format!(
            "config: hosts={} workers={}",
            if graphs.is_empty() { "built-in" } else { "files" },
            workers.map_or("default".to_string(), |w| w.to_string())
        ))?;
        self.comment(&format!("seed: {seed}"))
    }

    fn record<I, T>(&mut self, fields: I) -> Result<(), Failure>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        // one record per writer so comment lines can be interleaved
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(fields)?;
        let bytes = w.into_inner().map_err(|e| Failure::usage(format!("CSV output: {e}")))?;
        self.sink.write_all(&bytes)?;
        Ok(())
    }

    pub fn columns(&mut self, names: &[&str]) -> Result<(), Failure> {
        self.record(names)
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), Failure> {
        self.record(fields)
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        self.sink.flush()?;
        Ok(())
    }
}
