//! Source text to verification report.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::lang::{check_module, parse, Diagnostic, TypedModule};
use crate::math::{MathExp, Var};
use crate::prover::{prove_vc, ProofResult, ProverOptions, Status};
use crate::theory::{Library, Theorem};
use crate::vcgen::{generate_vcs, Vc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub prover: ProverOptions,
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            prover: ProverOptions::default(),
            parallel: true,
        }
    }
}

/// One VC in the wire format. Field order is part of the format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VcReport {
    pub id: String,
    pub line: u32,
    pub kind: String,
    pub status: Status,
    pub ms: u64,
    pub goal: String,
    pub givens: Vec<String>,
    pub description: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub vcs: usize,
    pub proved: usize,
    pub unprovable: usize,
    pub timeout: usize,
    pub ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub module: String,
    pub diagnostics: Vec<Diagnostic>,
    pub vcs: Vec<VcReport>,
    pub totals: Totals,
}

impl VerifyReport {
    pub fn all_proved(&self) -> bool {
        self.totals.proved == self.totals.vcs
    }

    pub fn statuses(&self) -> Vec<(&str, Status)> {
        self.vcs.iter().map(|v| (v.id.as_str(), v.status)).collect()
    }

    /// The report with every timing field zeroed.
    pub fn without_timings(&self) -> VerifyReport {
        let mut r = self.clone();
        r.vcs.iter_mut().for_each(|v| v.ms = 0);
        r.totals.ms = 0;
        r
    }

    /// Plain-text summary table.
    pub fn to_table(&self) -> String {
        let mut out = format!("{}\n", self.module);
        for v in &self.vcs {
            writeln!(
                out,
                "  {:<6} line {:<4} {:<28} {:<10} {:>6} ms  {}",
                v.id, v.line, v.kind, v.status.as_str(), v.ms, v.description
            )
            .unwrap();
        }
        let t = &self.totals;
        writeln!(
            out,
            "{} VCs: {} proved, {} unprovable, {} timeout ({} ms)",
            t.vcs, t.proved, t.unprovable, t.timeout, t.ms
        )
        .unwrap();
        out
    }
}

/// Parses and checks a module and generates its VCs.
pub fn front_end(src: &str, lib: &Library) -> Result<(TypedModule, Vec<Vc>), Vec<Diagnostic>> {
    let module = parse(src)?;
    let typed = check_module(&module, lib)?;
    let vcs = generate_vcs(&typed);
    Ok((typed, vcs))
}

pub fn prove_all(vcs: &[Vc], lib: &Library, opts: &VerifyOptions) -> Vec<ProofResult> {
    let theorems: Vec<Theorem> = lib.theorems().cloned().collect();
    if opts.parallel {
        vcs.par_iter()
            .map(|vc| prove_vc(vc, &theorems, &opts.prover))
            .collect()
    } else {
        vcs.iter()
            .map(|vc| prove_vc(vc, &theorems, &opts.prover))
            .collect()
    }
}

pub fn report(module: &str, vcs: &[Vc], results: &[ProofResult], ms: u64) -> VerifyReport {
    let mut totals = Totals {
        vcs: vcs.len(),
        ms,
        ..Totals::default()
    };
    let mut out = Vec::with_capacity(vcs.len());
    for (vc, r) in vcs.iter().zip(results) {
        match r.status {
            Status::Proved => totals.proved += 1,
            Status::Unprovable => totals.unprovable += 1,
            Status::Timeout => totals.timeout += 1,
        }
        out.push(VcReport {
            id: vc.id.clone(),
            line: vc.line,
            kind: vc.kind.as_str().to_string(),
            status: r.status,
            ms: r.ms,
            goal: vc.goal.to_string(),
            givens: vc.givens.iter().map(|g| g.to_string()).collect(),
            description: vc.description.clone(),
        });
    }
    VerifyReport {
        module: module.to_string(),
        diagnostics: Vec::new(),
        vcs: out,
        totals,
    }
}

/// The whole pipeline. Front-end failures come back as diagnostics.
pub fn verify_source(src: &str, lib: &Library, opts: &VerifyOptions) -> Result<VerifyReport, Vec<Diagnostic>> {
    let start = Instant::now();
    let (typed, vcs) = front_end(src, lib)?;
    let results = prove_all(&vcs, lib, opts);
    Ok(report(typed.name(), &vcs, &results, start.elapsed().as_millis() as u64))
}

/// Givens that share a variable with the goal, directly or through one
/// intermediate given. The rest are still true but rarely the reason a VC
/// holds or fails.
pub fn relevant_givens(vc: &Vc) -> Vec<bool> {
    let mut vars: BTreeSet<Var> = vc.goal.vars();
    let shares = |g: &MathExp, vars: &BTreeSet<Var>| g.vars().iter().any(|v| vars.contains(v));
    let direct: Vec<bool> = vc.givens.iter().map(|g| shares(g, &vars)).collect();
    for (g, d) in vc.givens.iter().zip(&direct) {
        if *d {
            vars.extend(g.vars());
        }
    }
    vc.givens
        .iter()
        .zip(direct)
        .map(|(g, d)| d || shares(g, &vars))
        .collect()
}

/// Goal and numbered givens; less relevant givens are listed last.
pub fn render_vc(vc: &Vc, result: Option<&ProofResult>) -> String {
    let mut out = format!("VC {} (line {}, {}): {}\n", vc.id, vc.line, vc.kind.as_str(), vc.description);
    if let Some(r) = result {
        write!(out, "  status: {} ({} ms)", r.status.as_str(), r.ms).unwrap();
        if !r.theorems.is_empty() {
            write!(out, " using {}", r.theorems.join(", ")).unwrap();
        }
        out.push('\n');
        if r.contradictory {
            out.push_str("  note: the givens are contradictory\n");
        }
        if !r.trace.is_empty() {
            out.push_str("  derivation:\n");
        }
        for step in &r.trace {
            let binds: Vec<String> = step.bindings.iter().map(|(v, t)| format!("{v} := {t}")).collect();
            if binds.is_empty() {
                writeln!(out, "    {}: {}", step.theorem, step.fact).unwrap();
            } else {
                writeln!(out, "    {} [{}]: {}", step.theorem, binds.join(", "), step.fact).unwrap();
            }
        }
    }
    writeln!(out, "  goal: {}", vc.goal).unwrap();
    let rel = relevant_givens(vc);
    if vc.givens.is_empty() {
        out.push_str("  givens: none\n");
    }
    for (heading, want) in [("givens", true), ("other givens", false)] {
        let items: Vec<(usize, &MathExp)> = vc
            .givens
            .iter()
            .enumerate()
            .filter(|(i, _)| rel[*i] == want)
            .collect();
        if items.is_empty() {
            continue;
        }
        writeln!(out, "  {heading}:").unwrap();
        for (i, g) in items {
            writeln!(out, "    {}: {g}", i + 1).unwrap();
        }
    }
    out
}

/// Status file contents: `#` comment lines, then `id kind status` per VC.
pub fn golden_text(report: &VerifyReport, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "# {c}").unwrap();
    }
    for v in &report.vcs {
        writeln!(out, "{} {} {}", v.id, v.kind, v.status.as_str()).unwrap();
    }
    out
}

/// Splits a status file into its comments and its `id kind status` rows.
pub fn parse_golden(text: &str) -> (Vec<String>, Vec<(String, String, String)>) {
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if let [id, kind, status] = f[..] {
            rows.push((id.to_string(), kind.to_string(), status.to_string()));
        }
    }
    (comments, rows)
}

/// Rows of a report in status-file form.
pub fn golden_rows(report: &VerifyReport) -> Vec<(String, String, String)> {
    parse_golden(&golden_text(report, &[])).1
}
