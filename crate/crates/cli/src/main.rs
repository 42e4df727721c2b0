//! `pmt`: check, evaluate and combine partial structures from text files.
//!
//! Exit codes: 0 success, 1 negative answer (false, quasi-false, a
//! counterexample, a failing law), 2 usage error, 3 invalid input.

mod load;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use load::{invalid, LoadError};
use partial_model::format::write_structure;
use partial_model::laws::{run_suite, SuiteName, DEFAULT_CASES, DEFAULT_SEED};
use partial_model::semantics::quasi_witness;
use partial_model::{
    direct_product, eval_kleene, eval_total, parse_sentence, quasi_consequence_bounded,
    reduced_product, ultraproduct, Assignment, PartialStructure, Verdict, Verdict3,
};

#[derive(Parser)]
#[command(
    name = "pmt",
    version,
    about = "Partial structures, quasi-truth and ultraproducts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate structure (.pst), family (.fam) and sentence (.sen)
    /// files, or every such file in a directory.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Evaluate a sentence in a structure.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        sentence: String,
        #[arg(long, value_enum, default_value_t = Mode::Quasi)]
        mode: Mode,
        /// In quasi mode, print a satisfying normal completion.
        #[arg(long)]
        witness: bool,
        /// Refuse quasi-truth queries over more unknown tuples than this.
        #[arg(long, default_value_t = 20)]
        max_unknowns: usize,
    },
    /// Build the direct, reduced or ultra product of a family.
    Product {
        #[arg(long)]
        family: PathBuf,
        /// A filter named in the manifest, or `trivial`.
        #[arg(long, conflicts_with = "ultrafilter")]
        filter: Option<String>,
        /// Principal ultrafilter at this index; without a value, the one
        /// named in the manifest.
        #[arg(long, num_args = 0..=1, default_missing_value = "")]
        ultrafilter: Option<String>,
        /// Write the structure here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search bounded universes for a partial model of the premises that is
    /// not a partial model of the conclusion.
    Consequence {
        /// Premises, one sentence per line.
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        max_size: usize,
        /// Signature such as `R/1, S/2`; inferred from the sentences if absent.
        #[arg(long)]
        sig: Option<String>,
    },
    /// Run the randomized law suites.
    Suite {
        /// structures, semantics, products or all.
        name: SuiteName,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CASES)]
        cases: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Total,
    Kleene,
    Quasi,
}

/// What a command printed and how it ended.
struct Outcome {
    stdout: String,
    negative: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { paths } => check(&paths),
        Command::Eval {
            structure,
            sentence,
            mode,
            witness,
            max_unknowns,
        } => eval(&structure, &sentence, mode, witness, max_unknowns),
        Command::Product {
            family,
            filter,
            ultrafilter,
            output,
        } => product(
            &family,
            filter.as_deref(),
            ultrafilter.as_deref(),
            output.as_deref(),
        ),
        Command::Consequence {
            gamma,
            alpha,
            max_size,
            sig,
        } => consequence(&gamma, &alpha, max_size, sig.as_deref()),
        Command::Suite { name, seed, cases } => Ok(suite(name, seed, cases)),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            if out.negative {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

fn expand_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, LoadError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|source| LoadError::Io {
                    path: p.display().to_string(),
                    source,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|e| {
                    matches!(
                        e.extension().and_then(|x| x.to_str()),
                        Some("pst" | "fam" | "sen")
                    )
                })
                .collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn check(paths: &[PathBuf]) -> Result<Outcome, LoadError> {
    let (mut structures, mut unknowns, mut families, mut sentences) = (0, 0, 0, 0);
    for path in expand_paths(paths)? {
        match path.extension().and_then(|x| x.to_str()) {
            Some("fam") => {
                let fam = load::family(&path)?;
                fam.check_filters()?;
                families += 1;
            }
            Some("sen") => sentences += load::sentences(&path, None)?.0.len(),
            _ => {
                let s = load::structure(&path)?;
                s.validate(&s.signature()).map_err(|e| invalid(&path, e))?;
                structures += 1;
                unknowns += s.unknown_count();
            }
        }
    }
    let mut parts = Vec::new();
    if structures > 0 {
        parts.push(format!(
            "{}, u={unknowns}",
            plural(structures, "structure", "structures")
        ));
    }
    if families > 0 {
        parts.push(plural(families, "family", "families"));
    }
    if sentences > 0 {
        parts.push(plural(sentences, "sentence", "sentences"));
    }
    Ok(Outcome {
        stdout: format!("ok: {}\n", parts.join(", ")),
        negative: false,
    })
}

fn eval(
    path: &Path,
    text: &str,
    mode: Mode,
    witness: bool,
    max_unknowns: usize,
) -> Result<Outcome, LoadError> {
    let s = load::structure(path)?;
    let sentence =
        parse_sentence(text, &s.signature()).map_err(|e| invalid(Path::new("--sentence"), e))?;
    let answer = |word: &str, negative| Outcome {
        stdout: format!("{word}\n"),
        negative,
    };
    match mode {
        Mode::Total => {
            let t = eval_total(&s, &sentence, &Assignment::new()).map_err(|e| invalid(path, e))?;
            Ok(answer(if t { "true" } else { "false" }, !t))
        }
        Mode::Kleene => Ok(
            match eval_kleene(&s, &sentence, &Assignment::new()).map_err(|e| invalid(path, e))? {
                Verdict3::True => answer("true", false),
                Verdict3::False => answer("false", true),
                Verdict3::Unknown => answer("unknown", false),
            },
        ),
        Mode::Quasi => {
            let u = s.unknown_count();
            if u > max_unknowns {
                return Err(invalid(
                    path,
                    format!("{u} unknown tuples exceed --max-unknowns {max_unknowns}"),
                ));
            }
            match quasi_witness(&s, &sentence).map_err(|e| invalid(path, e))? {
                Some(w) => {
                    let mut out = answer("quasi-true", false);
                    if witness {
                        let _ = write!(out.stdout, "witness:\n{}", write_structure(&w));
                    }
                    Ok(out)
                }
                None => Ok(answer("quasi-false", true)),
            }
        }
    }
}

fn summary(s: &PartialStructure) -> String {
    let mut out = format!("# universe: {}\n", plural(s.size(), "element", "elements"));
    for (name, r) in s.relations() {
        let _ = writeln!(
            out,
            "# {name}: +{} -{} 0{}",
            r.count(Verdict::Pos),
            r.count(Verdict::Neg),
            r.count(Verdict::Unk)
        );
    }
    out
}

fn product(
    path: &Path,
    filter: Option<&str>,
    ultrafilter: Option<&str>,
    output: Option<&Path>,
) -> Result<Outcome, LoadError> {
    let fam = load::family(path)?;
    let result = match (filter, ultrafilter) {
        (Some(name), _) => {
            let f = fam.filter(name)?;
            reduced_product(&fam.family, &f)
        }
        (None, Some(index)) => {
            let index = match index {
                "" => fam
                    .manifest
                    .principal
                    .clone()
                    .ok_or_else(|| invalid(path, "manifest names no ultrafilter"))?,
                i => i.to_string(),
            };
            ultraproduct(&fam.family, &fam.principal(&index)?)
        }
        (None, None) => direct_product(&fam.family),
    }
    .map_err(|e| invalid(path, e))?;
    let text = write_structure(&result);
    let head = summary(&result);
    let stdout = match output {
        Some(out) => {
            fs::write(out, &text).map_err(|source| LoadError::Io {
                path: out.display().to_string(),
                source,
            })?;
            format!("{head}# written to {}\n", out.display())
        }
        None => format!("{head}{text}"),
    };
    Ok(Outcome {
        stdout,
        negative: false,
    })
}

fn consequence(
    gamma_path: &Path,
    alpha_text: &str,
    max_size: usize,
    sig: Option<&str>,
) -> Result<Outcome, LoadError> {
    let text = load::read(gamma_path)?;
    let lines: Vec<&str> = partial_model::format::sentence_lines(&text)
        .map(|(_, l)| l)
        .collect();
    let sig = load::signature(sig, lines.iter().copied().chain([alpha_text]))?;
    let (gamma, _) = load::sentences(gamma_path, Some(&sig))?;
    let alpha = parse_sentence(alpha_text, &sig).map_err(|e| invalid(Path::new("--alpha"), e))?;
    let outcome = quasi_consequence_bounded(&gamma, &alpha, &sig, max_size)
        .map_err(|e| invalid(gamma_path, e))?;
    Ok(match outcome.counterexample() {
        None => Outcome {
            stdout: format!("no counterexample up to size {max_size}\n"),
            negative: false,
        },
        Some(report) => Outcome {
            stdout: format!(
                "counterexample of size {}: every premise is quasi-true, the conclusion is quasi-false\n{}",
                report.structure.size(),
                write_structure(&report.structure)
            ),
            negative: true,
        },
    })
}

fn suite(name: SuiteName, seed: u64, cases: usize) -> Outcome {
    let report = run_suite(name, seed, cases);
    Outcome {
        stdout: format!("{report}\n"),
        negative: !report.passed(),
    }
}
