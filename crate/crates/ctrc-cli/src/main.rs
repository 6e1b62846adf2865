//! `ctrc`: validate conditional systems, run the labeled cost semantics,
//! transform to context-sensitive rewriting, and certify complexity bounds.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ctrc_core::cctrs::{parse_cctrs, validate, Cctrs, ValidateMode};
use ctrc_core::cs::cs_derivation_height;
use ctrc_core::interp::{
    bound, bound_general, build, check, derive_usable_map, obligations, parse_interp, BoundMode,
    RecipeMode,
};
use ctrc_core::labeled::{
    conditional_complexity, label, ComplexityMode, Cost, Engine, StepKind,
};
use ctrc_core::rewrite::PlainEngine;
use ctrc_core::transform::{
    anti_patterns, emit_tpdb, transform, xi, ApMode, HSignature, Star, StrategyMode,
};
use ctrc_core::SearchBudget;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ctrc",
    version,
    about = "Conditional term rewriting complexity workbench"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Crc,
    Cdc,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApArg {
    Full,
    Var,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Cs,
    Plain,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecipeArg {
    #[value(alias = "A")]
    A,
    #[value(alias = "B")]
    B,
    #[value(alias = "C")]
    C,
    Direct,
}

#[derive(Clone, Copy, ValueEnum)]
enum StarArg {
    Top,
    Bot,
}

#[derive(clap::Args, Clone, Copy)]
struct BudgetArgs {
    /// Maximum number of distinct states per search.
    #[arg(long, default_value_t = 20_000, value_name = "N")]
    budget_states: usize,
    /// Maximum condition-nesting depth.
    #[arg(long, default_value_t = 12, value_name = "N")]
    budget_depth: usize,
}

impl BudgetArgs {
    fn budget(self) -> SearchBudget {
        SearchBudget {
            max_states: self.budget_states,
            max_depth: self.budget_depth,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a system against the constructor and variable restrictions.
    Validate {
        file: PathBuf,
        /// Additionally require left-linearity and linear condition patterns.
        #[arg(long)]
        strong: bool,
    },
    /// Enumerate the one-step reducts of a term.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        term: String,
        /// Enumerate labeled steps (with kinds and costs) instead.
        #[arg(long)]
        labeled: bool,
        /// Enumerate quasi-step targets instead.
        #[arg(long, conflicts_with = "labeled")]
        quasi: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Derivation height of the fully labeled term.
    Dh {
        file: PathBuf,
        #[arg(long)]
        term: String,
        /// Compute the height of the transformed encoding instead.
        #[arg(long)]
        transformed: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Conditional complexity over all ground (or basic) terms of bounded size.
    Complexity {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Transform a strong system into a context-sensitive TRS.
    Transform {
        file: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(short, value_name = "PATH")]
        o: Option<PathBuf>,
        /// Anti-pattern handling: one rule per anti-pattern, or a collapsed variable.
        #[arg(long, value_enum, default_value = "full")]
        ap: ApArg,
        /// Emit the replacement map, or plain rules only.
        #[arg(long, value_enum, default_value = "cs")]
        strategy: StrategyArg,
    },
    /// Anti-patterns of a linear constructor term.
    Ap {
        file: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Encode a term over the transformed signature.
    Zeta {
        file: PathBuf,
        #[arg(long)]
        term: String,
        /// Padding constant for defined symbols.
        #[arg(long, value_enum, default_value = "top")]
        star: StarArg,
    },
    /// Check an interpretation against the transformed rules on a grid.
    CheckInterp {
        interp: PathBuf,
        file: PathBuf,
        #[arg(long, value_enum, default_value = "direct")]
        recipe: RecipeArg,
        #[arg(long, default_value_t = 4, value_name = "G")]
        grid: u64,
    },
    /// Derive the least usable replacement map.
    Urm { file: PathBuf },
    /// Complexity bound certified by an interpretation.
    Bound {
        interp: PathBuf,
        file: PathBuf,
        #[arg(long, value_enum, default_value = "direct")]
        recipe: RecipeArg,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        n: usize,
        /// Verify the linear-sum premise for K,M and report M*(K^0+..+K^(n-1)).
        #[arg(long, value_name = "K,M")]
        general: Option<String>,
        #[arg(long, default_value_t = 4, value_name = "G")]
        grid: u64,
    },
}

fn main() -> ExitCode {
    // die quietly when the consumer closes the pipe (e.g. `ctrc ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_system(path: &PathBuf, mode: ValidateMode) -> Result<Result<Cctrs, String>, String> {
    let text = read(path)?;
    let raw = parse_cctrs(&text).map_err(|e| e.to_string())?;
    let report = validate(&raw, mode);
    if report.is_empty() {
        Ok(Ok(Cctrs::from_raw(raw, mode).expect("validated")))
    } else {
        Ok(Err(report.to_string()))
    }
}

fn recipe_mode(r: RecipeArg) -> RecipeMode {
    match r {
        RecipeArg::A => RecipeMode::A,
        RecipeArg::B => RecipeMode::B,
        RecipeArg::C => RecipeMode::C,
        RecipeArg::Direct => RecipeMode::Direct,
    }
}

fn run(cmd: Cmd) -> Result<u8, String> {
    match cmd {
        Cmd::Validate { file, strong } => {
            let mode = if strong {
                ValidateMode::Strong
            } else {
                ValidateMode::Cctrs
            };
            let text = read(&file)?;
            let raw = parse_cctrs(&text).map_err(|e| e.to_string())?;
            let report = validate(&raw, mode);
            print!("{report}");
            if report.is_empty() {
                println!();
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_FAIL)
            }
        }
        Cmd::Reduce {
            file,
            term,
            labeled,
            quasi,
            budget,
        } => {
            let sys = match load_system(&file, ValidateMode::Cctrs)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let t = sys.parse_term(&term).map_err(|e| e.to_string())?;
            let incomplete;
            if labeled {
                let mut engine = Engine::new(&sys, budget.budget());
                let steps = engine.steps(&label(&sys, &t)).map_err(|e| e.to_string())?;
                incomplete = !steps.complete;
                for s in steps.value {
                    let kind = match s.kind {
                        StepKind::Bot => "bot",
                        StepKind::Success => "success",
                        StepKind::Fail => "fail",
                    };
                    println!(
                        "{kind} rule {} at {} cost {}: {}",
                        s.rule + 1,
                        s.position,
                        s.cost,
                        s.target.display(&sys)
                    );
                }
            } else if quasi {
                let mut engine = Engine::new(&sys, budget.budget());
                let out = engine
                    .quasi_steps(&label(&sys, &t))
                    .map_err(|e| e.to_string())?;
                incomplete = !out.complete;
                for q in out.value {
                    println!("{}", q.display(&sys));
                }
            } else {
                let mut engine = PlainEngine::new(&sys, budget.budget());
                let out = engine.steps(&t);
                incomplete = !out.complete;
                for (target, rule, pos) in out.value {
                    println!(
                        "{}  (rule {} at {})",
                        target.display(&sys.sig),
                        rule + 1,
                        pos
                    );
                }
            }
            Ok(if incomplete { EXIT_BUDGET } else { EXIT_OK })
        }
        Cmd::Dh {
            file,
            term,
            transformed,
            budget,
        } => {
            let sys = match load_system(&file, ValidateMode::Strong)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let t = sys.parse_term(&term).map_err(|e| e.to_string())?;
            let value = if transformed {
                let trs = transform(&sys, ApMode::Full).map_err(|e| e.to_string())?;
                let padded = xi(&sys, &trs.hsig, &t, Star::Top);
                cs_derivation_height(&trs, &padded, budget.budget())
            } else {
                let mut engine = Engine::new(&sys, budget.budget());
                engine.dh(&label(&sys, &t)).map_err(|e| e.to_string())?
            };
            println!("dh = {value}");
            Ok(match value {
                Cost::AtLeast(_) => EXIT_BUDGET,
                _ => EXIT_OK,
            })
        }
        Cmd::Complexity {
            file,
            mode,
            n,
            budget,
        } => {
            let sys = match load_system(&file, ValidateMode::Cctrs)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let (cmode, name) = match mode {
                ModeArg::Crc => (ComplexityMode::Crc, "crc"),
                ModeArg::Cdc => (ComplexityMode::Cdc, "cdc"),
            };
            let value =
                conditional_complexity(&sys, n, cmode, budget.budget()).map_err(|e| e.to_string())?;
            println!("{name}({n}) = {value}");
            Ok(match value {
                Cost::AtLeast(_) => EXIT_BUDGET,
                _ => EXIT_OK,
            })
        }
        Cmd::Transform {
            file,
            o,
            ap,
            strategy,
        } => {
            let sys = match load_system(&file, ValidateMode::Strong)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let ap = match ap {
                ApArg::Full => ApMode::Full,
                ApArg::Var => ApMode::Var,
            };
            let trs = transform(&sys, ap).map_err(|e| e.to_string())?;
            let strategy = match strategy {
                StrategyArg::Cs => StrategyMode::ContextSensitive,
                StrategyArg::Plain => StrategyMode::Plain,
            };
            let text = emit_tpdb(&trs, strategy);
            let cost1 = trs.rules.iter().filter(|r| r.cost == 1).count();
            match o {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
                    println!(
                        "wrote {} rules ({} with cost 1) to {}",
                        trs.rules.len(),
                        cost1,
                        path.display()
                    );
                }
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
        Cmd::Ap { file, term } => {
            let sys = match load_system(&file, ValidateMode::Cctrs)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let hsig = HSignature::build(&sys).map_err(|e| e.to_string())?;
            let t = sys.parse_term(&term).map_err(|e| e.to_string())?;
            let aps = anti_patterns(&sys, &hsig, &t).map_err(|e| e.to_string())?;
            for p in aps {
                println!("{}", p.display(&hsig.sig));
            }
            Ok(EXIT_OK)
        }
        Cmd::Zeta { file, term, star } => {
            let sys = match load_system(&file, ValidateMode::Cctrs)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let hsig = HSignature::build(&sys).map_err(|e| e.to_string())?;
            let t = sys.parse_term(&term).map_err(|e| e.to_string())?;
            let star = match star {
                StarArg::Top => Star::Top,
                StarArg::Bot => Star::Bot,
            };
            println!("{}", xi(&sys, &hsig, &t, star).display(&hsig.sig));
            Ok(EXIT_OK)
        }
        Cmd::CheckInterp {
            interp,
            file,
            recipe,
            grid,
        } => {
            let sys = match load_system(&file, ValidateMode::Strong)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let trs = transform(&sys, ApMode::Full).map_err(|e| e.to_string())?;
            let text = read(&interp)?;
            let tables = parse_interp(&sys, &trs, &text).map_err(|e| e.to_string())?;
            let mode = recipe_mode(recipe);
            let di = build(&sys, &trs, &tables, mode).map_err(|e| e.to_string())?;
            let obls = obligations(&sys, &trs, &tables, mode);
            let report = check(&di, &trs, &obls, grid).map_err(|e| e.to_string())?;
            for rv in &report.rules {
                match &rv.valuation {
                    Some(val) => {
                        let parts: Vec<String> =
                            val.iter().map(|(v, x)| format!("{v}={x}")).collect();
                        println!("RULE {} {} [{}]", rv.rule, rv.verdict, parts.join(","));
                    }
                    None => println!("RULE {} {}", rv.rule, rv.verdict),
                }
            }
            for mv in &report.monotonicity {
                if mv.ok {
                    println!("MONO {} OK", trs.hsig.sig.name(mv.symbol));
                } else {
                    let (arg, vals) = mv.witness.clone().unwrap();
                    let parts: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                    println!(
                        "MONO {} VIOLATED arg {arg} at [{}]",
                        trs.hsig.sig.name(mv.symbol),
                        parts.join(",")
                    );
                }
            }
            if report.pass {
                println!("PASS (sampled, grid={grid})");
                Ok(EXIT_OK)
            } else {
                println!("FAIL (sampled, grid={grid})");
                Ok(EXIT_FAIL)
            }
        }
        Cmd::Urm { file } => {
            let sys = match load_system(&file, ValidateMode::Strong)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let map = derive_usable_map(&sys);
            for (f, set) in &map {
                let parts: Vec<String> = set.iter().map(|i| i.to_string()).collect();
                println!("MAP {} = {{{}}}", sys.sig.name(*f), parts.join(","));
            }
            Ok(EXIT_OK)
        }
        Cmd::Bound {
            interp,
            file,
            recipe,
            mode,
            n,
            general,
            grid,
        } => {
            let sys = match load_system(&file, ValidateMode::Strong)? {
                Ok(sys) => sys,
                Err(report) => {
                    eprint!("{report}");
                    return Ok(EXIT_FAIL);
                }
            };
            let trs = transform(&sys, ApMode::Full).map_err(|e| e.to_string())?;
            let text = read(&interp)?;
            let tables = parse_interp(&sys, &trs, &text).map_err(|e| e.to_string())?;
            let value = match general {
                Some(km) => {
                    let (k, m) = km
                        .split_once(',')
                        .ok_or_else(|| "--general expects K,M".to_string())?;
                    let k: u64 = k.trim().parse().map_err(|_| "bad K".to_string())?;
                    let m: u64 = m.trim().parse().map_err(|_| "bad M".to_string())?;
                    bound_general(&sys, &tables, k, m, n, grid).map_err(|e| e.to_string())?
                }
                None => {
                    let bmode = match mode {
                        ModeArg::Crc => BoundMode::Crc,
                        ModeArg::Cdc => BoundMode::Cdc,
                    };
                    bound(&sys, &trs, &tables, recipe_mode(recipe), n, bmode)
                        .map_err(|e| e.to_string())?
                }
            };
            println!("bound = {value}");
            Ok(EXIT_OK)
        }
    }
}
