//! Command-line front end: every capability as a subcommand over files, with
//! plain structured text reports.
//!
//! Exit codes: 0 when the checked property holds or the requested object is
//! found, 1 when a property fails or nothing is found (still a valid run),
//! 2 for usage and parse errors, 3 for internal assertion failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use operadics::format::{parse_operad, print_operad};
use operadics::interval::separation_demo;
use operadics::monad::{check_iota_monad_iso, check_monad_laws, demo_not_full, ScanPolicy};
use operadics::operad::FiniteOperad;
use operadics::report::LawReport;
use operadics::search::{search_self_reverse_distinct, SearchSpace};
use operadics::theory::{free_operad_truncation, is_strongly_regular, parse_presentation};

#[derive(Parser)]
#[command(name = "operadics", version, about = "Finite truncated planar operads: validation, reversal, induced monads, and counterexample machinery")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate an operad file against the unit and associativity laws
    Check { file: PathBuf },
    /// Print the reverse operad in the operad file format
    Reverse { file: PathBuf },
    /// Search for an isomorphism between two operads
    Iso { left: PathBuf, right: PathBuf },
    /// Check the induced monad laws over finite sets up to a size
    MonadCheck {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        set_size: usize,
    },
    /// Verify that variable reversal is a monad isomorphism onto the
    /// reverse operad's monad
    MonadIota {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        set_size: usize,
    },
    /// Look for a separating-property witness (constant times identity
    /// composing to a surjective element)
    Separating { file: PathBuf },
    /// Run the interval operad separation argument over the exhaustive
    /// piecewise-linear family
    IntervalDemo,
    /// Decide strong regularity of an equational presentation
    Regular { file: PathBuf },
    /// Print the truncated free operad of a presentation as an operad file
    FreeOperad {
        file: PathBuf,
        #[arg(long)]
        max_arity: usize,
        #[arg(long)]
        size_bound: usize,
    },
    /// Enumerate every operad over the given carrier sizes and report the
    /// first one not isomorphic to its reverse
    Search {
        #[arg(long)]
        max_arity: usize,
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Show that variable reversal is not induced by any operad morphism
    NotFull { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(_) => {
            eprintln!("internal assertion failure");
            ExitCode::from(3)
        }
    }
}

fn load_operad(path: &Path) -> Result<FiniteOperad, u8> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return Err(2);
        }
    };
    match parse_operad(&text) {
        Ok(op) => Ok(op),
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            Err(2)
        }
    }
}

fn load_text(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        2
    })
}

fn law_outcome(report: &LawReport) -> u8 {
    print!("{report}");
    if report.ok() {
        0
    } else {
        1
    }
}

fn run(cli: Cli) -> u8 {
    match cli.cmd {
        Cmd::Check { file } => {
            let op = match load_operad(&file) {
                Ok(op) => op,
                Err(c) => return c,
            };
            println!(
                "validation report for `{}` (truncation bound {})",
                op.name(),
                op.max_arity()
            );
            let rep = op.validate();
            if rep.ok() {
                println!("ok");
                0
            } else {
                law_outcome(&rep)
            }
        }
        Cmd::Reverse { file } => {
            let op = match load_operad(&file) {
                Ok(op) => op,
                Err(c) => return c,
            };
            print!("{}", print_operad(&op.reverse()));
            0
        }
        Cmd::Iso { left, right } => {
            let p = match load_operad(&left) {
                Ok(op) => op,
                Err(c) => return c,
            };
            let q = match load_operad(&right) {
                Ok(op) => op,
                Err(c) => return c,
            };
            println!(
                "isomorphism report (truncation bounds {} and {})",
                p.max_arity(),
                q.max_arity()
            );
            match p.find_isomorphism(&q) {
                Some(m) => {
                    for e in p.elements() {
                        println!("{} -> {}", p.label(e), q.label(m.apply(e)));
                    }
                    0
                }
                None => {
                    println!(
                        "no isomorphism ({} candidate bijections exhausted)",
                        p.bijection_candidate_count(&q)
                    );
                    1
                }
            }
        }
        Cmd::MonadCheck { file, set_size } => {
            let op = match load_operad(&file) {
                Ok(op) => op,
                Err(c) => return c,
            };
            println!(
                "monad law report for `{}` (truncation bound {}, set sizes 0..={set_size})",
                op.name(),
                op.max_arity()
            );
            let mut merged = LawReport::default();
            for x in 0..=set_size {
                merged.merge(check_monad_laws(&op, x, ScanPolicy::default_for(x)));
            }
            law_outcome(&merged)
        }
        Cmd::MonadIota { file, set_size } => {
            let op = match load_operad(&file) {
                Ok(op) => op,
                Err(c) => return c,
            };
            println!(
                "variable reversal report for `{}` (truncation bound {}, set sizes 0..={set_size})",
                op.name(),
                op.max_arity()
            );
            let mut merged = LawReport::default();
            for x in 0..=set_size {
                merged.merge(check_iota_monad_iso(&op, x, ScanPolicy::default_for(x)));
            }
            law_outcome(&merged)
        }
        Cmd::Separating { file } => {
            let op = match load_operad(&file) {
                Ok(op) => op,
                Err(c) => return c,
            };
            println!(
                "separating property report for `{}` (truncation bound {})",
                op.name(),
                op.max_arity()
            );
            match op.has_separating_property() {
                Ok(Some(w)) => {
                    println!(
                        "witness: phi `{}`, constant gamma `{}`, surjective composite `{}`",
                        op.label(w.phi),
                        op.label(w.gamma),
                        op.label(w.composite)
                    );
                    0
                }
                Ok(None) => {
                    println!("no witness: no constant-and-identity composite is surjective");
                    1
                }
                Err(e) => {
                    eprintln!("{e}");
                    2
                }
            }
        }
        Cmd::IntervalDemo => {
            println!(
                "interval operad report (truncation bound 2, exact rational breakpoints)"
            );
            println!("{}", separation_demo());
            0
        }
        Cmd::Regular { file } => {
            let text = match load_text(&file) {
                Ok(t) => t,
                Err(c) => return c,
            };
            let p = match parse_presentation(&text) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return 2;
                }
            };
            println!("strong regularity report for theory `{}` (syntactic, no truncation)", p.name);
            let rep = is_strongly_regular(&p);
            println!("{rep}");
            if rep.accepted() {
                0
            } else {
                1
            }
        }
        Cmd::FreeOperad {
            file,
            max_arity,
            size_bound,
        } => {
            let text = match load_text(&file) {
                Ok(t) => t,
                Err(c) => return c,
            };
            let p = match parse_presentation(&text) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return 2;
                }
            };
            match free_operad_truncation(&p, max_arity, size_bound) {
                Ok(t) => {
                    if t.any_unstable() {
                        eprintln!(
                            "note: some classes sit within one equation of the size bound; raise --size-bound to confirm them"
                        );
                    }
                    print!("{}", print_operad(&t.operad));
                    0
                }
                Err(e) => {
                    eprintln!("{e}");
                    1
                }
            }
        }
        Cmd::Search { max_arity, sizes } => {
            if sizes.len() != max_arity + 1 {
                eprintln!(
                    "--sizes must list s0..s{} ({} values), got {}",
                    max_arity,
                    max_arity + 1,
                    sizes.len()
                );
                return 2;
            }
            let space = match SearchSpace::new(sizes) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return 2;
                }
            };
            let report = search_self_reverse_distinct(&space);
            print!("{report}");
            if report.found.is_some() {
                0
            } else {
                1
            }
        }
        Cmd::NotFull { file } => {
            let op = match load_operad(&file) {
                Ok(op) => op,
                Err(c) => return c,
            };
            println!(
                "reversal fullness report for `{}` (truncation bound {})",
                op.name(),
                op.max_arity()
            );
            match demo_not_full(&op) {
                Ok(rep) => {
                    print!("{rep}");
                    if rep.every_candidate_separated {
                        0
                    } else {
                        1
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    2
                }
            }
        }
    }
}
