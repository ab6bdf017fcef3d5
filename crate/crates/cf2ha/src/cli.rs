//! Command-line driver.
//!
//! Exit codes: `member`, `empty`, `trace` and `compare` answer a yes/no
//! question with 0 (yes / no differences) or 1. Every other successful
//! command exits 0. Unreadable or malformed input exits 2 with a
//! `file:line:` diagnostic; rules outside the supported class exit 3.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::automata::{classify_fragment, normalize_cfha, parse_automaton, render_automaton, union, Automaton};
use crate::closure_monadic::{build_closure, parse_hrs, to_ground_rules, CatchAll, MonadicError, RewriteRule};
use crate::closure_update::{hat, parse_phrs, post_star_update, ClosureError, ParseOptions, Phrs, UpdateError, UpdateOptions};
use crate::decision::{bounded_language, clean, is_empty, DecisionError, Recognizer};
use crate::hedge::{parse_hedge, sort_size_lex, Hedge};
use crate::oracle::{instantiate_phrs, post_star_bounded, BoundedPost, GroundRuleSet};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "cf2ha", version, about = "Context-free hedge automata: membership, emptiness and rewrite closures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a hedge is accepted (exit 0 if so, 1 if not).
    #[command(disable_help_flag = true)]
    Member {
        #[arg(short, long)]
        automaton: PathBuf,
        /// The hedge, e.g. "a a b(b) c c".
        #[arg(short = 'h', long)]
        hedge: String,
        #[arg(long, action = ArgAction::Help)]
        help: Option<bool>,
    },
    /// Decide whether the language is empty (exit 0 if so, 1 if not).
    Empty {
        #[arg(short, long)]
        automaton: PathBuf,
    },
    /// Print the smallest fragment (HA, CFHA, CF2HA) the automaton fits in.
    Classify {
        #[arg(short, long)]
        automaton: PathBuf,
    },
    /// Remove states with an empty language.
    Clean {
        #[arg(short, long)]
        automaton: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Normalize a CFHA so every symbol is read through a unique entry state.
    Normalize {
        #[arg(short, long)]
        automaton: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Disjoint union of two automata over the same alphabet.
    Union {
        #[arg(short, long)]
        automaton: PathBuf,
        #[arg(short = 'b', long)]
        other: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Collapse renaming cycles of an update rule system.
    Hat {
        #[arg(short, long)]
        phrs: PathBuf,
        /// Input automaton to relabel along with the rules.
        #[arg(short, long)]
        automaton: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
        #[arg(long)]
        lift_literals: bool,
    },
    /// post* under a linear, inverse-monadic, 1-childvar rule system.
    ClosureMonadic {
        #[arg(short, long)]
        automaton: PathBuf,
        #[arg(short, long)]
        rules: PathBuf,
        #[command(flatten)]
        output: Output,
        #[arg(long, value_enum, default_value_t = CatchAllArg::Omit)]
        catch_all: CatchAllArg,
    },
    /// post* under update rules; writes the hat map next to the output.
    ClosureUpdate {
        #[arg(short, long)]
        automaton: PathBuf,
        #[arg(short, long)]
        phrs: PathBuf,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        update: UpdateFlags,
    },
    /// Brute-force post* from the members of an automaton or explicit seeds.
    OraclePost {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        bounds: Bounds,
        /// Seed hedges (in addition to the automaton's members).
        #[arg(long = "seed")]
        seeds: Vec<String>,
    },
    /// Compare a closure automaton with the oracle (exit 0 on no differences).
    Compare {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, value_enum, default_value_t = CatchAllArg::Omit)]
        catch_all: CatchAllArg,
    },
    /// Print a reduction of the hedge to a final state (exit 1 if rejected).
    #[command(disable_help_flag = true)]
    Trace {
        #[arg(short, long)]
        automaton: PathBuf,
        #[arg(short = 'h', long)]
        hedge: String,
        #[arg(long, action = ArgAction::Help)]
        help: Option<bool>,
    },
}

#[derive(Args, Debug)]
struct Output {
    /// Output file (standard output if absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct UpdateFlags {
    /// Accept literal symbols in parameter sequences.
    #[arg(long)]
    lift_literals: bool,
    /// Use only the single-row treatment of `ap` parents.
    #[arg(long)]
    no_ap_wrappers: bool,
}

impl UpdateFlags {
    fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            lift_literals: self.lift_literals,
        }
    }

    fn update_options(&self) -> UpdateOptions {
        UpdateOptions {
            wrap_ap_targets: !self.no_ap_wrappers,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Monadic,
    Update,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CatchAllArg {
    Omit,
    Literal,
}

impl From<CatchAllArg> for CatchAll {
    fn from(c: CatchAllArg) -> CatchAll {
        match c {
            CatchAllArg::Omit => CatchAll::Omit,
            CatchAllArg::Literal => CatchAll::Literal,
        }
    }
}

#[derive(Args, Debug)]
struct System {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Input automaton.
    #[arg(short, long)]
    automaton: Option<PathBuf>,
    /// Rule file (monadic mode).
    #[arg(short, long)]
    rules: Option<PathBuf>,
    /// PHRS file (update mode).
    #[arg(short, long)]
    phrs: Option<PathBuf>,
    #[command(flatten)]
    update: UpdateFlags,
}

#[derive(Args, Debug)]
struct Bounds {
    #[arg(long, default_value_t = 5)]
    max_size: usize,
    /// Intermediate hedges may exceed `max-size` by this much.
    #[arg(long, default_value_t = 0)]
    slack: usize,
    /// Largest parameter hedge used when instantiating update rules
    /// (defaults to `max-size`).
    #[arg(long)]
    param_bound: Option<usize>,
}

impl Bounds {
    fn intermediate(&self) -> usize {
        self.max_size + self.slack
    }
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn rule_class(message: impl Into<String>) -> Failure {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

type CliResult = Result<i32, Failure>;

/// `path:line: message`, dropping a `line N: ` prefix already in `message`.
fn located(path: &Path, line: Option<usize>, message: &str) -> String {
    match line {
        Some(n) => {
            let prefix = format!("line {n}: ");
            format!("{}:{n}: {}", path.display(), message.strip_prefix(&prefix).unwrap_or(message))
        }
        None => format!("{}: {message}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_automaton(path: &Path) -> Result<Automaton, Failure> {
    let text = read(path)?;
    let a = parse_automaton(&text).map_err(|e| {
        let line = match &e {
            crate::automata::AutomatonError::Parse { line, .. } => Some(*line),
            _ => None,
        };
        Failure::input(located(path, line, &e.to_string()))
    })?;
    a.validate().map_err(|e| Failure::input(located(path, None, &e.to_string())))?;
    Ok(a)
}

fn load_rules(path: &Path) -> Result<Vec<RewriteRule>, Failure> {
    let text = read(path)?;
    let parsed = parse_hrs(&text).map_err(|e| monadic_failure(path, &[], e))?;
    Ok(parsed.into_iter().map(|(_, r)| r).collect())
}

/// Like [`load_rules`] but keeping line numbers for diagnostics.
fn load_rules_with_lines(path: &Path) -> Result<(Vec<usize>, Vec<RewriteRule>), Failure> {
    let text = read(path)?;
    let parsed = parse_hrs(&text).map_err(|e| monadic_failure(path, &[], e))?;
    Ok(parsed.into_iter().unzip())
}

fn monadic_failure(path: &Path, lines: &[usize], e: MonadicError) -> Failure {
    match &e {
        MonadicError::Parse { line, .. } => Failure::input(located(path, Some(*line), &e.to_string())),
        MonadicError::LhsShape { line, .. } => Failure::rule_class(located(path, Some(*line), &e.to_string())),
        MonadicError::RuleClass(verdict) => Failure::rule_class(
            verdict
                .violations
                .iter()
                .map(|v| located(path, lines.get(v.index).copied(), &v.to_string()))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        MonadicError::Erasing(_) => Failure::rule_class(located(path, None, &e.to_string())),
        MonadicError::MergingInput(_) => Failure::input(e.to_string()),
    }
}

fn load_phrs(path: &Path, options: ParseOptions) -> Result<Phrs, Failure> {
    let text = read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let phrs = parse_phrs(&text, base, options).map_err(|e| {
        let message = located(path, e.line(), &e.to_string());
        match e {
            UpdateError::NotAnUpdateRule { .. } | UpdateError::Combination { .. } => Failure::rule_class(message),
            _ => Failure::input(message),
        }
    })?;
    phrs.validate().map_err(|e| Failure::input(located(path, e.line(), &e.to_string())))?;
    Ok(phrs)
}

fn closure_failure(e: ClosureError) -> Failure {
    match e {
        ClosureError::UnboundedWrapping(_) | ClosureError::NotLoopFree => Failure::rule_class(e.to_string()),
        _ => Failure::input(e.to_string()),
    }
}

fn parse_input_hedge(text: &str) -> Result<Hedge, Failure> {
    parse_hedge(text).map_err(|e| Failure::input(format!("<hedge>:{e}")))
}

fn decision_failure(e: DecisionError) -> Failure {
    Failure::input(format!("<hedge>: {e}"))
}

/// Provenance comment block for generated files.
fn header(argv: &[String], notes: &[String]) -> String {
    let mut s = format!("# generated by cf2ha {VERSION}\n# command: cf2ha {}\n", argv.join(" "));
    for n in notes {
        s.push_str(&format!("# {n}\n"));
    }
    s
}

fn emit(out: &mut dyn Write, target: &Output, text: &str) -> Result<(), Failure> {
    match &target.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::input(e.to_string())),
    }
}

fn line(out: &mut dyn Write, text: impl AsRef<str>) -> Result<(), Failure> {
    writeln!(out, "{}", text.as_ref()).map_err(|e| Failure::input(e.to_string()))
}

/// Runs the CLI on `argv` (without the program name) and returns the exit code.
pub fn run(argv: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let shown: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("cf2ha")).chain(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    match dispatch(cli.command, &shown, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, argv: &[String], out: &mut dyn Write) -> CliResult {
    match command {
        Command::Member { automaton, hedge, .. } => {
            let a = load_automaton(&automaton)?;
            let h = parse_input_hedge(&hedge)?;
            let yes = Recognizer::new(&a).accepts(&h).map_err(decision_failure)?;
            line(out, yes.to_string())?;
            Ok(if yes { 0 } else { 1 })
        }
        Command::Empty { automaton } => {
            let yes = is_empty(&load_automaton(&automaton)?);
            line(out, yes.to_string())?;
            Ok(if yes { 0 } else { 1 })
        }
        Command::Classify { automaton } => {
            line(out, classify_fragment(&load_automaton(&automaton)?).to_string())?;
            Ok(0)
        }
        Command::Clean { automaton, output } => {
            let a = clean(&load_automaton(&automaton)?);
            emit(out, &output, &(header(argv, &[]) + &render_automaton(&a)))?;
            Ok(0)
        }
        Command::Normalize { automaton, output } => {
            let (n, _) = normalize_cfha(&load_automaton(&automaton)?).map_err(|e| Failure::input(located(&automaton, None, &e.to_string())))?;
            emit(out, &output, &(header(argv, &[]) + &render_automaton(&n)))?;
            Ok(0)
        }
        Command::Union { automaton, other, output } => {
            let u = union(&load_automaton(&automaton)?, &load_automaton(&other)?).map_err(|e| Failure::input(e.to_string()))?;
            emit(out, &output, &(header(argv, &[]) + &render_automaton(&u)))?;
            Ok(0)
        }
        Command::Hat {
            phrs,
            automaton,
            output,
            lift_literals,
        } => {
            let r = load_phrs(&phrs, ParseOptions { lift_literals })?;
            let inputs: Vec<Automaton> = automaton.iter().map(|p| load_automaton(p)).collect::<Result<_, _>>()?;
            let hatted = hat(&r, &inputs);
            let mut text = header(argv, &[]);
            for (a, b) in hatted.map.iter().filter(|(a, b)| a != b) {
                text.push_str(&format!("# map: {a} -> {b}\n"));
            }
            text.push_str(&hatted.phrs.render_rules());
            if let Some(a) = hatted.automata.get(1) {
                text.push_str("# relabelled input automaton\n");
                text.push_str(&render_automaton(a).lines().map(|l| format!("# {l}\n")).collect::<String>());
            }
            emit(out, &output, &text)?;
            Ok(0)
        }
        Command::ClosureMonadic {
            automaton,
            rules,
            output,
            catch_all,
        } => {
            let a = load_automaton(&automaton)?;
            let (lines, r) = load_rules_with_lines(&rules)?;
            let c = build_closure(&a, &r, catch_all.into()).map_err(|e| monadic_failure(&rules, &lines, e))?;
            let legend: Vec<String> = c.legend().into_iter().map(|(q, what)| format!("{q} = {what}")).collect();
            emit(out, &output, &(header(argv, &legend) + &render_automaton(&c.automaton)))?;
            Ok(0)
        }
        Command::ClosureUpdate {
            automaton,
            phrs,
            output,
            update,
        } => {
            let a = load_automaton(&automaton)?;
            let r = load_phrs(&phrs, update.parse_options())?;
            let c = post_star_update(&a, &r, update.update_options()).map_err(closure_failure)?;
            let map_lines: Vec<String> = c
                .map
                .iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| format!("map: {a} -> {b}"))
                .collect();
            let text = render_automaton(&c.automaton);
            match &output.output {
                Some(path) => {
                    let sidecar = hat_map_path(path);
                    emit(out, &output, &(header(argv, &[format!("hat map: {}", sidecar.display())]) + &text))?;
                    let body = header(argv, &[]) + &map_lines.iter().map(|l| format!("{l}\n")).collect::<String>();
                    std::fs::write(&sidecar, body).map_err(|e| Failure::input(format!("{}: {e}", sidecar.display())))?;
                }
                None => emit(out, &output, &(header(argv, &map_lines) + &text))?,
            }
            Ok(0)
        }
        Command::OraclePost { system, bounds, seeds } => {
            let (rules, warnings) = ground_system(&system, &bounds)?;
            let mut all_seeds = Vec::new();
            if let Some(path) = &system.automaton {
                all_seeds.extend(bounded_language(&load_automaton(path)?, bounds.intermediate()));
            }
            for s in &seeds {
                all_seeds.push(parse_input_hedge(s)?);
            }
            let post = post_star_bounded(&rules, all_seeds, bounds.max_size, bounds.intermediate());
            for w in warnings {
                line(out, format!("# warning: {w}"))?;
            }
            line(out, oracle_summary(&post))?;
            for h in &post.hedges {
                line(out, h.to_string())?;
            }
            Ok(0)
        }
        Command::Compare {
            system,
            bounds,
            catch_all,
        } => compare(&system, &bounds, catch_all.into(), out),
        Command::Trace { automaton, hedge, .. } => {
            let a = load_automaton(&automaton)?;
            let h = parse_input_hedge(&hedge)?;
            match Recognizer::new(&a).trace(&h).map_err(decision_failure)? {
                Some(t) => {
                    line(out, t.to_string())?;
                    Ok(0)
                }
                None => {
                    line(out, "rejected")?;
                    Ok(1)
                }
            }
        }
    }
}

/// `OUT.aut` → `OUT.hat-map`.
fn hat_map_path(output: &Path) -> PathBuf {
    output.with_extension("hat-map")
}

fn oracle_summary(post: &BoundedPost) -> String {
    format!(
        "# oracle: {} hedges, {} explored, {}",
        post.hedges.len(),
        post.explored,
        if post.exact { "exact" } else { "under-approximation" }
    )
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    p.as_deref().ok_or_else(|| Failure::input(format!("missing {flag}")))
}

/// The ground rules the oracle runs for the given system.
fn ground_system(system: &System, bounds: &Bounds) -> Result<(GroundRuleSet, Vec<String>), Failure> {
    match system.mode {
        Mode::Monadic => Ok((to_ground_rules(&load_rules(required(&system.rules, "--rules")?)?), Vec::new())),
        Mode::Update => {
            let r = load_phrs(required(&system.phrs, "--phrs")?, system.update.parse_options())?;
            let inst = instantiate_phrs(&r, bounds.param_bound.unwrap_or(bounds.max_size));
            Ok((inst.rules, inst.warnings))
        }
    }
}

/// Translates oracle hedges into the closure's alphabet.
type HedgeMap = Box<dyn Fn(&Hedge) -> Hedge>;

fn compare(system: &System, bounds: &Bounds, catch_all: CatchAll, out: &mut dyn Write) -> CliResult {
    let path = required(&system.automaton, "--automaton")?;
    let a = load_automaton(path)?;
    let (closure, map): (Automaton, HedgeMap) = match system.mode {
        Mode::Monadic => {
            let rules_path = required(&system.rules, "--rules")?;
            let (lines, r) = load_rules_with_lines(rules_path)?;
            let c = build_closure(&a, &r, catch_all).map_err(|e| monadic_failure(rules_path, &lines, e))?;
            (c.automaton, Box::new(|h: &Hedge| h.clone()))
        }
        Mode::Update => {
            let r = load_phrs(required(&system.phrs, "--phrs")?, system.update.parse_options())?;
            let c = post_star_update(&a, &r, system.update.update_options()).map_err(closure_failure)?;
            let automaton = c.automaton.clone();
            (automaton, Box::new(move |h: &Hedge| c.map_hedge(h)))
        }
    };
    let (rules, warnings) = ground_system(system, bounds)?;
    let seeds = bounded_language(&a, bounds.intermediate());
    let post = post_star_bounded(&rules, seeds, bounds.max_size, bounds.intermediate());
    let oracle: BTreeSet<Hedge> = post.hedges.iter().map(&map).collect();
    let accepted: BTreeSet<Hedge> = bounded_language(&closure, bounds.max_size).into_iter().collect();

    for w in warnings {
        line(out, format!("# warning: {w}"))?;
    }
    line(out, format!("# closure: {} hedges of size <= {}", accepted.len(), bounds.max_size))?;
    line(out, oracle_summary(&post))?;
    let mut only_closure: Vec<Hedge> = accepted.difference(&oracle).cloned().collect();
    let mut only_oracle: Vec<Hedge> = oracle.difference(&accepted).cloned().collect();
    sort_size_lex(&mut only_closure);
    sort_size_lex(&mut only_oracle);
    for h in &only_closure {
        line(out, format!("+ {h}"))?;
    }
    for h in &only_oracle {
        line(out, format!("- {h}"))?;
    }
    let n = only_closure.len() + only_oracle.len();
    line(out, format!("{n} differences"))?;
    Ok(if n == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        super::Cli::command().debug_assert();
    }
}
