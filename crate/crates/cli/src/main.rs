//! `vcbench`: verify modules, dump their VCs, check the fixture corpus, or
//! serve the IDE backend.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use vcbench_core::lang::Diagnostic;
use vcbench_core::pipeline::{
    front_end, golden_rows, golden_text, parse_golden, prove_all, render_vc, report, Totals, VerifyOptions,
    VerifyReport,
};
use vcbench_core::prover::{ProverOptions, Status};
use vcbench_core::theory::Library;

#[derive(Parser)]
#[command(name = "vcbench", version, about = "Verification-condition generator and prover for a small contract language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProverFlags {
    /// Per-VC prover time budget.
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
    /// Theorem instantiation rounds per VC.
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    /// Extra `*.thy` theories to load next to the built-in ones.
    #[arg(long)]
    theory_dir: Option<PathBuf>,
    /// Prove VCs one at a time.
    #[arg(long)]
    no_parallel: bool,
}

impl ProverFlags {
    fn options(&self) -> VerifyOptions {
        VerifyOptions {
            prover: ProverOptions {
                rounds: self.rounds,
                timeout_ms: self.timeout_ms,
                ..ProverOptions::default()
            },
            parallel: !self.no_parallel,
        }
    }

    fn library(&self) -> Result<Library, String> {
        let mut lib = Library::standard();
        if let Some(dir) = &self.theory_dir {
            lib.load_theory_dir(dir).map_err(|e| e.to_string())?;
        }
        Ok(lib)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Verify module files.
    Verify {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Emit the JSON report (an array when several files are given).
        #[arg(long)]
        json: bool,
        /// Also print every VC with its goal and givens.
        #[arg(long)]
        dump_vcs: bool,
        #[command(flatten)]
        flags: ProverFlags,
    },
    /// Print the VCs of a module without proving them.
    DumpVcs {
        path: PathBuf,
        /// Only this VC.
        #[arg(long)]
        vc: Option<String>,
        #[arg(long)]
        theory_dir: Option<PathBuf>,
    },
    /// Verify every fixture that has a status file and compare.
    Corpus {
        #[arg(default_value = "corpus")]
        dir: PathBuf,
        /// Rewrite the status files instead of comparing.
        #[arg(long)]
        update: bool,
        #[command(flatten)]
        flags: ProverFlags,
    },
    /// Serve the IDE backend under /api/v1.
    Serve {
        /// Directory of editable module files.
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Hide the built-in components.
        #[arg(long)]
        no_builtins: bool,
        /// Per-request verification cap in seconds.
        #[arg(long, default_value_t = 60)]
        cap_secs: u64,
        /// Browser origin allowed by CORS (any when omitted).
        #[arg(long)]
        origin: Option<String>,
        #[command(flatten)]
        flags: ProverFlags,
    },
}

const FRONT_END_FAILURE: u8 = 2;

fn print_diagnostics(path: &Path, ds: &[Diagnostic]) {
    for d in ds {
        eprintln!("{}:{d}", path.display());
    }
}

fn read(path: &Path) -> Result<String, Vec<Diagnostic>> {
    std::fs::read_to_string(path).map_err(|e| vec![Diagnostic::error(format!("cannot read file: {e}"), 1, 1)])
}

fn verify_file(path: &Path, lib: &Library, opts: &VerifyOptions, dump: bool) -> Result<VerifyReport, Vec<Diagnostic>> {
    let start = std::time::Instant::now();
    let src = read(path)?;
    let (typed, vcs) = front_end(&src, lib)?;
    let results = prove_all(&vcs, lib, opts);
    if dump {
        for (vc, r) in vcs.iter().zip(&results) {
            print!("{}", render_vc(vc, Some(r)));
        }
    }
    Ok(report(typed.name(), &vcs, &results, start.elapsed().as_millis() as u64))
}

fn cmd_verify(paths: &[PathBuf], json: bool, dump: bool, flags: &ProverFlags) -> ExitCode {
    let lib = match flags.library() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(FRONT_END_FAILURE);
        }
    };
    let opts = flags.options();
    let mut reports = Vec::new();
    let mut front_end_failed = false;
    for p in paths {
        match verify_file(p, &lib, &opts, dump && !json) {
            Ok(r) => reports.push(r),
            Err(ds) => {
                front_end_failed = true;
                print_diagnostics(p, &ds);
                reports.push(VerifyReport {
                    module: p.file_stem().unwrap_or_default().to_string_lossy().to_string(),
                    diagnostics: ds,
                    vcs: Vec::new(),
                    totals: Totals::default(),
                });
            }
        }
    }
    if json {
        let out = if reports.len() == 1 {
            serde_json::to_string_pretty(&reports[0])
        } else {
            serde_json::to_string_pretty(&reports)
        };
        println!("{}", out.expect("reports serialize"));
    } else {
        for r in reports.iter().filter(|r| r.diagnostics.is_empty()) {
            print!("{}", r.to_table());
        }
    }
    if front_end_failed {
        ExitCode::from(FRONT_END_FAILURE)
    } else if reports.iter().all(VerifyReport::all_proved) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_dump(path: &Path, only: Option<&str>, theory_dir: Option<&Path>) -> ExitCode {
    let mut lib = Library::standard();
    if let Some(d) = theory_dir {
        if let Err(e) = lib.load_theory_dir(d) {
            eprintln!("{e}");
            return ExitCode::from(FRONT_END_FAILURE);
        }
    }
    let vcs = match read(path).and_then(|src| front_end(&src, &lib)) {
        Ok((_, vcs)) => vcs,
        Err(ds) => {
            print_diagnostics(path, &ds);
            return ExitCode::from(FRONT_END_FAILURE);
        }
    };
    let selected: Vec<_> = vcs
        .iter()
        .filter(|v| only.is_none_or(|id| v.id == id || format!("{}.{}", v.operation, v.id) == id))
        .collect();
    if let (Some(id), true) = (only, selected.is_empty()) {
        eprintln!("{}: no VC with id `{id}`", path.display());
        return ExitCode::from(FRONT_END_FAILURE);
    }
    for vc in selected {
        print!("{}", render_vc(vc, None));
    }
    ExitCode::SUCCESS
}

fn cmd_corpus(dir: &Path, update: bool, flags: &ProverFlags) -> ExitCode {
    let lib = match flags.library() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(FRONT_END_FAILURE);
        }
    };
    let opts = flags.options();
    let golden_dir = dir.join("golden");
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "rsl"))
            .collect(),
        Err(e) => {
            eprintln!("{}: {e}", dir.display());
            return ExitCode::from(FRONT_END_FAILURE);
        }
    };
    files.sort();
    let mut failed = false;
    for f in files {
        let stem = f.file_stem().unwrap_or_default().to_string_lossy().to_string();
        let golden = golden_dir.join(format!("{stem}.status"));
        if !golden.exists() && !update {
            continue;
        }
        let r = match verify_file(&f, &lib, &opts, false) {
            Ok(r) => r,
            Err(ds) => {
                print_diagnostics(&f, &ds);
                failed = true;
                continue;
            }
        };
        let existing = std::fs::read_to_string(&golden).unwrap_or_default();
        let (comments, expected) = parse_golden(&existing);
        if update {
            if let Err(e) = std::fs::write(&golden, golden_text(&r, &comments)) {
                eprintln!("{}: {e}", golden.display());
                failed = true;
            }
            continue;
        }
        let ok = golden_rows(&r) == expected;
        failed |= !ok;
        let unproved = r.vcs.iter().filter(|v| v.status != Status::Proved).count();
        println!(
            "{} {stem}: {} VCs, {} not proved, {} ms",
            if ok { "ok  " } else { "FAIL" },
            r.totals.vcs,
            unproved,
            r.totals.ms
        );
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_serve(
    root: Option<PathBuf>,
    addr: &str,
    no_builtins: bool,
    cap_secs: u64,
    origin: Option<String>,
    flags: &ProverFlags,
) -> ExitCode {
    let lib = match flags.library() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(FRONT_END_FAILURE);
        }
    };
    let config = vcbench_service::Config {
        root,
        builtins: !no_builtins,
        verify: flags.options(),
        cap: Duration::from_secs(cap_secs),
        origin,
    };
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    eprintln!("serving /api/v1 on {addr}");
    match rt.block_on(vcbench_service::serve(config, lib, addr)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify {
            paths,
            json,
            dump_vcs,
            flags,
        } => cmd_verify(&paths, json, dump_vcs, &flags),
        Command::DumpVcs { path, vc, theory_dir } => cmd_dump(&path, vc.as_deref(), theory_dir.as_deref()),
        Command::Corpus { dir, update, flags } => cmd_corpus(&dir, update, &flags),
        Command::Serve {
            root,
            addr,
            no_builtins,
            cap_secs,
            origin,
            flags,
        } => cmd_serve(root, &addr, no_builtins, cap_secs, origin, &flags),
    }
}
