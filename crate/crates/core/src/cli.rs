//! Command-line front end. Every subcommand prints `key: value` style lines
//! and maps its verdict to an exit code: 0 for success, accept or true, 1 for
//! reject, false or a found countermodel, 2 for usage and input errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::engine::saturate;
use crate::files::{load_interpretation_file, load_kb_file, load_poset, load_proof_file};
use crate::formulas::parse_formula;
use crate::kripke::{find_countermodel, SearchMode, Verdict, DEFAULT_RANDOM_SAMPLES};
use crate::proofs::check_proof;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gradedlogic", version, about = "Lattice-graded modal logic toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether LOWER <= UPPER in the generated lattice
    Order {
        poset: PathBuf,
        lower: String,
        upper: String,
    },
    /// Print the normal form of a grade expression
    Normalize { poset: PathBuf, expr: String },
    /// List the elements of the generated lattice
    Enumerate {
        poset: PathBuf,
        /// Closure rounds before giving up
        #[arg(long, default_value_t = 64)]
        depth: usize,
        /// Also print the covering pairs of the Hasse diagram
        #[arg(long)]
        hasse: bool,
    },
    /// Validate an interpretation and optionally check a formula in it
    CheckModel {
        interp: PathBuf,
        formula: Option<String>,
    },
    /// Check a proof file line by line
    CheckProof { proof: PathBuf },
    /// Print the best grade of every derivable atom
    Saturate { kb: PathBuf },
    /// Print the best grade of one atom
    Query {
        kb: PathBuf,
        atom: String,
        /// Write a checkable proof of the grade to this file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare the best grades of two atoms
    Compare {
        kb: PathBuf,
        first: String,
        second: String,
    },
    /// Search for a falsifying interpretation of a formula
    Countermodel {
        poset: PathBuf,
        formula: String,
        #[arg(long)]
        worlds: usize,
        /// Sample randomly with this seed instead of enumerating
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_RANDOM_SAMPLES)]
        samples: usize,
        /// Write the countermodel to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// The result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn report(code: i32, lines: Vec<String>) -> Self {
        let mut stdout = lines.join("\n");
        if !stdout.is_empty() {
            stdout.push('\n');
        }
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(message: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_ERROR,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

/// Runs one command line. `args` includes the program name.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome::report(EXIT_OK, vec![text.trim_end().to_string()]),
                _ => Outcome {
                    code: EXIT_ERROR,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    execute(cli.command).unwrap_or_else(Outcome::error)
}

/// Path of `target` as seen from the directory of `from`, falling back to an
/// absolute path.
fn relative_to(target: &Path, from: &Path) -> String {
    let abs = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let target = abs(target);
    let dir = abs(from.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")));
    match target.strip_prefix(&dir) {
        Ok(rel) => rel.display().to_string(),
        Err(_) => target.display().to_string(),
    }
}

fn execute(command: Command) -> Result<Outcome, String> {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    match command {
        Command::Order { poset, lower, upper } => {
            let p = load_poset(&poset).map_err(|e| s(&e))?;
            let a = p.parse_grade(&lower).map_err(|e| s(&e))?;
            let b = p.parse_grade(&upper).map_err(|e| s(&e))?;
            let holds = p.grade_leq(&a, &b);
            Ok(Outcome::report(verdict(holds), vec![holds.to_string()]))
        }
        Command::Normalize { poset, expr } => {
            let p = load_poset(&poset).map_err(|e| s(&e))?;
            let nf = p.parse_grade(&expr).map_err(|e| s(&e))?;
            Ok(Outcome::report(EXIT_OK, vec![p.render(&nf)]))
        }
        Command::Enumerate { poset, depth, hasse } => {
            let p = load_poset(&poset).map_err(|e| s(&e))?;
            let lattice = p.enumerate_lattice(depth).map_err(|e| s(&e))?;
            let names: Vec<String> = lattice.elements.iter().map(|e| p.render(e)).collect();
            let mut sorted = names.clone();
            sorted.sort();
            let mut lines = vec![
                format!("elements: {}", names.len()),
                format!("complete: {}", lattice.complete),
            ];
            lines.extend(sorted.iter().map(|n| format!("element: {n}")));
            if hasse {
                let mut covers: Vec<String> = lattice
                    .covers
                    .iter()
                    .map(|&(lo, hi)| format!("cover: {} < {}", names[lo], names[hi]))
                    .collect();
                covers.sort();
                lines.extend(covers);
            }
            Ok(Outcome::report(EXIT_OK, lines))
        }
        Command::CheckModel { interp, formula } => {
            let (p, result) = load_interpretation_file(&interp).map_err(|e| s(&e))?;
            let i = match result {
                Ok(i) => i,
                Err(e) => return Ok(Outcome::report(EXIT_NEGATIVE, vec!["interpretation: invalid".into(), format!("reason: {e}")])),
            };
            let mut lines = vec!["interpretation: valid".to_string(), format!("worlds: {}", i.world_count())];
            let Some(text) = formula else {
                return Ok(Outcome::report(EXIT_OK, lines));
            };
            let f = parse_formula(&text, &p).map_err(|e| s(&e))?;
            let table = i.truth_table(&f).map_err(|e| s(&e))?;
            for (w, t) in i.worlds().iter().zip(&table) {
                lines.push(format!("{w}: {t}"));
            }
            let valid = table.iter().all(|&t| t);
            lines.push(format!("valid: {valid}"));
            Ok(Outcome::report(verdict(valid), lines))
        }
        Command::CheckProof { proof } => {
            let (_, pr) = load_proof_file(&proof).map_err(|e| s(&e))?;
            let report = check_proof(&pr);
            let mut lines = vec![format!(
                "status: {}",
                if report.accepted { "accepted" } else { "rejected" }
            )];
            if report.accepted {
                if let Some(c) = pr.conclusion() {
                    lines.push(format!("conclusion: {c}"));
                }
            }
            lines.extend(report.diagnostics.iter().map(|d| format!("line {}: {}", d.line, d.message)));
            Ok(Outcome::report(verdict(report.accepted), lines))
        }
        Command::Saturate { kb } => {
            let (_, kb) = load_kb_file(&kb).map_err(|e| s(&e))?;
            let p = &kb.poset;
            let lines = saturate(&kb)
                .grades()
                .iter()
                .map(|(a, g)| format!("{a}: {}", p.render(g)))
                .collect();
            Ok(Outcome::report(EXIT_OK, lines))
        }
        Command::Query { kb, atom, trace } => {
            let (poset_path, base) = load_kb_file(&kb).map_err(|e| s(&e))?;
            let sat = saturate(&base);
            let Some(grade) = sat.grade(&atom) else {
                return Ok(Outcome::report(EXIT_NEGATIVE, vec![format!("{atom}: underivable")]));
            };
            let mut lines = vec![format!("{atom}: {}", base.poset.render(grade))];
            if let Some(out) = trace {
                let q = sat.query(&atom).map_err(|e| s(&e))?;
                let text = q.proof.to_text(&relative_to(&poset_path, &out));
                fs::write(&out, text).map_err(|e| format!("{}: {e}", out.display()))?;
                lines.push(format!("trace: {}", out.display()));
                lines.push(format!("trace-lines: {}", q.proof.lines.len()));
            }
            Ok(Outcome::report(EXIT_OK, lines))
        }
        Command::Compare { kb, first, second } => {
            let (_, kb) = load_kb_file(&kb).map_err(|e| s(&e))?;
            let c = saturate(&kb).compare(&first, &second).map_err(|e| s(&e))?;
            Ok(Outcome::report(EXIT_OK, vec![c.to_string()]))
        }
        Command::Countermodel {
            poset,
            formula,
            worlds,
            seed,
            samples,
            out,
        } => {
            let p = load_poset(&poset).map_err(|e| s(&e))?;
            let f = parse_formula(&formula, &p).map_err(|e| s(&e))?;
            let mode = match seed {
                Some(seed) => SearchMode::Randomized { seed, samples },
                None => SearchMode::Exhaustive,
            };
            match find_countermodel(&f, &p, worlds, mode).map_err(|e| s(&e))? {
                Verdict::NoCountermodel { max_worlds, mode } => {
                    let mode = match mode {
                        SearchMode::Exhaustive => "exhaustive".to_string(),
                        SearchMode::Randomized { seed, samples } => format!("randomized seed={seed} samples={samples}"),
                    };
                    Ok(Outcome::report(
                        EXIT_OK,
                        vec!["countermodel: none".into(), format!("max-worlds: {max_worlds}"), format!("mode: {mode}")],
                    ))
                }
                Verdict::Countermodel { interpretation, world } => {
                    let mut lines = vec![
                        "countermodel: found".to_string(),
                        format!("world: {world}"),
                        format!("worlds: {}", interpretation.world_count()),
                    ];
                    let path_for = |target: &Path| match &out {
                        Some(o) => relative_to(target, o),
                        None => target.display().to_string(),
                    };
                    let text = interpretation.to_text(&path_for(&poset));
                    match &out {
                        Some(o) => {
                            fs::write(o, &text).map_err(|e| format!("{}: {e}", o.display()))?;
                            lines.push(format!("written: {}", o.display()));
                        }
                        None => lines.extend(text.lines().map(str::to_string)),
                    }
                    Ok(Outcome::report(EXIT_NEGATIVE, lines))
                }
            }
        }
    }
}
