//! Command-line front end for the `deplog` crate.
//!
//! Formula files hold either a dependence-logic formula or, when the first
//! non-comment token is `exists-rel`, a second-order Horn sentence; every
//! subcommand sniffs the input the same way. Structures and teams are JSON.
//!
//! Exit codes: 0 true/satisfiable (or plain success), 1 false/unsatisfiable,
//! 2 usage or parse error, 3 fragment violation, 4 resource cap hit.
//! Diagnostics go to stderr, one line each.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use deplog::fragments::classify;
use deplog::ground::{eval_poly_detailed, ground, GroundError, PolyError};
use deplog::structure::{load_structure, load_team, Structure, Team};
use deplog::syntax::{
    flatten, free_vars, match_prenex_dep, parse_formula, pretty_print, Atom, Formula,
    PrenexDepForm, SUCC,
};
use deplog::teamsem::{satisfies, satisfies_sentence, EvalError, EvalLimits};
use deplog::translate::{
    bdhorn_to_esohorn, esohorn_to_bdhorn, negative_esohorn_to_open_bdhorn, openize, parse_esohorn,
    EsoError, EsoHornSentence, TranslateError,
};

const EXIT_TRUE: i32 = 0;
const EXIT_FALSE: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_FRAGMENT: i32 = 3;
const EXIT_RESOURCE: i32 = 4;

#[derive(Parser)]
#[command(name = "deplog", version, about = "Dependence logic on finite successor structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula or sentence and print it back.
    Parse(ParseArgs),
    /// Report which restricted shapes a formula falls into.
    Fragment(FragmentArgs),
    /// Evaluate over a structure by the team-semantics search.
    Eval(EvalArgs),
    /// Evaluate through the translate-ground-propagate pipeline.
    EvalPoly(EvalPolyArgs),
    /// Translate between the dependence-logic and second-order forms.
    Translate(TranslateArgs),
    /// Print grounding sizes over a range of universe sizes.
    Stats(StatsArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// File holding the formula or exists-rel sentence.
    #[arg(long)]
    formula: PathBuf,
    /// Emit the result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FragmentArgs {
    #[arg(long)]
    formula: PathBuf,
    /// Emit the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    formula: PathBuf,
    /// Structure JSON file.
    #[arg(long)]
    structure: PathBuf,
    /// Team JSON file; required when the formula has free variables.
    #[arg(long)]
    team: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Largest team the search will split.
    #[arg(long)]
    max_team: Option<usize>,
    /// Step budget for the evaluation.
    #[arg(long)]
    max_nodes: Option<u64>,
}

#[derive(Args)]
struct EvalPolyArgs {
    #[arg(long)]
    formula: PathBuf,
    #[arg(long)]
    structure: PathBuf,
    #[arg(long)]
    team: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Write the propositional instance as DIMACS to this file.
    #[arg(long)]
    emit_ground: Option<PathBuf>,
    #[arg(long)]
    max_team: Option<usize>,
    #[arg(long)]
    max_nodes: Option<u64>,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long)]
    formula: PathBuf,
    /// Target form.
    #[arg(long, value_enum)]
    to: Target,
    /// Relation name for the openize and open-bdhorn targets.
    #[arg(long)]
    rel: Option<String>,
    /// Structure JSON file, required for the ground target.
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    /// Dependence-logic Horn sentence to a second-order Horn sentence.
    Esohorn,
    /// Second-order Horn sentence back to a dependence-logic sentence.
    Bdhorn,
    /// Guard every clause of an open formula with a team relation.
    Openize,
    /// Sentence with a negative relation to an open formula over it.
    OpenBdhorn,
    /// Propositional Horn clauses in DIMACS form over a structure.
    Ground,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    formula: PathBuf,
    /// Universe sizes to ground over, inclusive.
    #[arg(long, default_value = "4..8")]
    n_range: String,
    #[arg(long)]
    json: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Fragment(a) => cmd_fragment(a),
        Command::Eval(a) => cmd_eval(a),
        Command::EvalPoly(a) => cmd_eval_poly(a),
        Command::Translate(a) => cmd_translate(a),
        Command::Stats(a) => cmd_stats(a),
    };
    std::process::exit(code);
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("deplog: {msg}");
    code
}

fn read_text(path: &Path) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, format_args!("{}: {e}", path.display())))
}

/// Second-order inputs start with an `exists-rel` header once comments and
/// blank lines are stripped.
fn looks_second_order(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with("exists-rel"))
}

fn eso_exit(err: &EsoError) -> i32 {
    match err {
        EsoError::NotHorn { .. } => EXIT_FRAGMENT,
        _ => EXIT_USAGE,
    }
}

fn translate_exit(err: &TranslateError) -> i32 {
    match err {
        TranslateError::NotBdhorn { .. }
        | TranslateError::OpenFormula(_)
        | TranslateError::PositiveOccurrence { .. }
        | TranslateError::DeclaredRelation(_) => EXIT_FRAGMENT,
        TranslateError::Eso(e) => eso_exit(e),
        TranslateError::MissingRelation(_) => EXIT_USAGE,
    }
}

fn ground_exit(err: &GroundError) -> i32 {
    match err {
        GroundError::Sentence(e) => eso_exit(e),
        GroundError::Term(_) => EXIT_USAGE,
    }
}

fn eval_exit(err: &EvalError) -> i32 {
    match err {
        EvalError::Resource(_) => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

fn poly_exit(err: &PolyError) -> i32 {
    match err {
        PolyError::NotBdhorn { .. } => EXIT_FRAGMENT,
        PolyError::Translate(e) => translate_exit(e),
        PolyError::Ground(e) => ground_exit(e),
        PolyError::Eval(e) => eval_exit(e),
        PolyError::TeamRequired(_) | PolyError::TeamDomain(_) | PolyError::Structure(_) => {
            EXIT_USAGE
        }
    }
}

fn limits(max_team: Option<usize>, max_nodes: Option<u64>) -> EvalLimits {
    let mut lim = EvalLimits::default();
    if let Some(m) = max_team {
        lim.max_team = m;
    }
    if let Some(m) = max_nodes {
        lim.max_nodes = m;
    }
    lim
}

fn read_structure(path: &Path) -> Result<Structure, i32> {
    let text = read_text(path)?;
    load_structure(&text).map_err(|e| fail(EXIT_USAGE, format_args!("{}: {e}", path.display())))
}

/// Reads a team file, taking the column set from the first row so extra
/// columns survive. An empty team falls back to the given domain.
fn read_team(path: &Path, fallback: &[String], size: usize) -> Result<Team, i32> {
    let text = read_text(path)?;
    let rows: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| fail(EXIT_USAGE, format_args!("{}: {e}", path.display())))?;
    let domain: Vec<String> = match rows.as_array().and_then(|a| a.first()) {
        Some(serde_json::Value::Object(row)) => row.keys().cloned().collect(),
        _ => fallback.to_vec(),
    };
    load_team(&text, &domain, size)
        .map_err(|e| fail(EXIT_USAGE, format_args!("{}: {e}", path.display())))
}

fn print_verdict(value: bool, json: bool) -> i32 {
    if json {
        println!("{}", serde_json::json!({ "value": value }));
    } else {
        println!("{}", if value { "true" } else { "false" });
    }
    if value {
        EXIT_TRUE
    } else {
        EXIT_FALSE
    }
}

fn cmd_parse(a: &ParseArgs) -> i32 {
    let text = match read_text(&a.formula) {
        Ok(t) => t,
        Err(c) => return c,
    };
    if looks_second_order(&text) {
        match parse_esohorn(&text) {
            Ok(e) => {
                if a.json {
                    let rels: Vec<serde_json::Value> = e
                        .so_rels
                        .iter()
                        .map(|r| serde_json::json!({ "name": r.name, "arity": r.arity }))
                        .collect();
                    println!(
                        "{}",
                        serde_json::json!({
                            "kind": "second-order",
                            "relations": rels,
                            "universals": e.universals,
                            "pretty": e.to_string(),
                        })
                    );
                } else {
                    println!("{e}");
                }
                EXIT_TRUE
            }
            Err(err) => fail(eso_exit(&err), err),
        }
    } else {
        match parse_formula(&text) {
            Ok(f) => {
                if a.json {
                    let frees: Vec<String> = free_vars(&f).into_iter().collect();
                    println!(
                        "{}",
                        serde_json::json!({
                            "kind": "formula",
                            "free_variables": frees,
                            "pretty": pretty_print(&f),
                        })
                    );
                } else {
                    println!("{}", pretty_print(&f));
                }
                EXIT_TRUE
            }
            Err(err) => fail(EXIT_USAGE, err),
        }
    }
}

fn cmd_fragment(a: &FragmentArgs) -> i32 {
    let text = match read_text(&a.formula) {
        Ok(t) => t,
        Err(c) => return c,
    };
    if looks_second_order(&text) {
        return fail(EXIT_USAGE, "fragment reports cover dependence-logic formulae only");
    }
    let f = match parse_formula(&text) {
        Ok(f) => f,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let r = classify(&f);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    } else {
        let yes = |b: bool| if b { "yes" } else { "no" };
        println!("first-order:       {}", yes(r.first_order));
        println!("prenex-dependence: {}", yes(r.prenex_dependence));
        println!("d-star:            {}", yes(r.dstar));
        println!("d-horn:            {}", yes(r.dhorn));
        println!("evaluable (both):  {}", yes(r.bdhorn));
        for w in &r.witnesses {
            match w.clause {
                Some(i) => println!("  clause {i}: {}", w.condition),
                None => println!("  {}", w.condition),
            }
        }
    }
    if r.bdhorn {
        EXIT_TRUE
    } else {
        EXIT_FRAGMENT
    }
}

fn cmd_eval(a: &EvalArgs) -> i32 {
    let text = match read_text(&a.formula) {
        Ok(t) => t,
        Err(c) => return c,
    };
    if looks_second_order(&text) {
        return fail(
            EXIT_USAGE,
            "eval takes a dependence-logic formula; translate to bdhorn first",
        );
    }
    let f = match parse_formula(&text) {
        Ok(f) => f,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let s = match read_structure(&a.structure) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let lim = limits(a.max_team, a.max_nodes);
    let frees: Vec<String> = free_vars(&f).into_iter().collect();
    let verdict = match &a.team {
        Some(path) => {
            let x = match read_team(path, &frees, s.size) {
                Ok(x) => x,
                Err(c) => return c,
            };
            satisfies(&s, &x, &f, &lim)
        }
        None if frees.is_empty() => satisfies_sentence(&s, &f, &lim),
        None => {
            return fail(
                EXIT_USAGE,
                format_args!("formula has free variables ({}); provide --team", frees.join(", ")),
            )
        }
    };
    match verdict {
        Ok(value) => print_verdict(value, a.json),
        Err(e) => fail(eval_exit(&e), e),
    }
}

fn cmd_eval_poly(a: &EvalPolyArgs) -> i32 {
    let text = match read_text(&a.formula) {
        Ok(t) => t,
        Err(c) => return c,
    };
    if looks_second_order(&text) {
        return fail(EXIT_USAGE, "eval-poly takes a dependence-logic formula");
    }
    let f = match parse_formula(&text) {
        Ok(f) => f,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let s = match read_structure(&a.structure) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let lim = limits(a.max_team, a.max_nodes);
    let team = match &a.team {
        Some(path) => {
            let frees: Vec<String> = free_vars(&f).into_iter().collect();
            match read_team(path, &frees, s.size) {
                Ok(x) => Some(x),
                Err(c) => return c,
            }
        }
        None => None,
    };
    let run = match eval_poly_detailed(&s, &f, team.as_ref(), &lim) {
        Ok(run) => run,
        Err(e) => return fail(poly_exit(&e), e),
    };
    if let Some(path) = &a.emit_ground {
        match &run.ground {
            Some(g) => {
                if let Err(e) = fs::write(path, g.to_dimacs()) {
                    return fail(EXIT_USAGE, format_args!("{}: {e}", path.display()));
                }
            }
            None => eprintln!("deplog: note: small-structure fallback ran, no grounding to emit"),
        }
    }
    if a.json {
        let horn = run.horn.as_ref().map(|h| {
            serde_json::json!({
                "satisfiable": h.satisfiable,
                "model_size": h.minimal_model.as_ref().map(|m| m.len()),
                "violated_clause": h
                    .contradiction_witness
                    .and_then(|i| run.ground.as_ref().map(|g| g.show_clause(i))),
            })
        });
        println!(
            "{}",
            serde_json::json!({
                "value": run.value,
                "used_fallback": run.used_fallback,
                "ground": run.ground.as_ref().map(|g| {
                    serde_json::json!({ "atoms": g.atoms.len(), "clauses": g.clauses.len() })
                }),
                "horn": horn,
            })
        );
    } else {
        println!("{}", if run.value { "true" } else { "false" });
        if !run.value {
            if let (Some(g), Some(h)) = (&run.ground, &run.horn) {
                match h.contradiction_witness {
                    Some(i) => {
                        println!(
                            "violated: {} (from clause {})",
                            g.show_clause(i),
                            g.clauses[i].src
                        )
                    }
                    None => println!("propagation is consistent but no universe values fit"),
                }
            }
        }
    }
    if run.value {
        EXIT_TRUE
    } else {
        EXIT_FALSE
    }
}

fn mentions_relation(p: &PrenexDepForm, rel: &str) -> bool {
    p.matrix
        .iter()
        .flat_map(|c| &c.literals)
        .any(|l| matches!(&l.atom, Atom::Rel(name, _) if name == rel))
}

fn cmd_translate(a: &TranslateArgs) -> i32 {
    let text = match read_text(&a.formula) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let second = looks_second_order(&text);
    let parse_first_order = |text: &str| -> Result<Formula, i32> {
        parse_formula(text).map_err(|e| fail(EXIT_USAGE, e))
    };
    let parse_second_order = |text: &str| -> Result<EsoHornSentence, i32> {
        parse_esohorn(text).map_err(|e| fail(eso_exit(&e), e))
    };
    let out = match a.to {
        Target::Esohorn => {
            if second {
                return fail(EXIT_USAGE, "input is already a second-order sentence");
            }
            let f = match parse_first_order(&text) {
                Ok(f) => f,
                Err(c) => return c,
            };
            let p = match match_prenex_dep(&f) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_FRAGMENT, e),
            };
            match bdhorn_to_esohorn(&p) {
                Ok((e, _)) => e.to_string(),
                Err(e) => return fail(translate_exit(&e), e),
            }
        }
        Target::Bdhorn => {
            if !second {
                return fail(EXIT_USAGE, "input must be an exists-rel sentence");
            }
            let e = match parse_second_order(&text) {
                Ok(e) => e,
                Err(c) => return c,
            };
            match esohorn_to_bdhorn(&e) {
                Ok(p) => pretty_print(&flatten(&p)),
                Err(err) => return fail(translate_exit(&err), err),
            }
        }
        Target::Openize => {
            if second {
                return fail(EXIT_USAGE, "openize takes a dependence-logic formula");
            }
            let f = match parse_first_order(&text) {
                Ok(f) => f,
                Err(c) => return c,
            };
            let p = match match_prenex_dep(&f) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_FRAGMENT, e),
            };
            if p.free_vars().is_empty() {
                return fail(EXIT_USAGE, "the formula has no free variables to guard");
            }
            let rel = a.rel.clone().unwrap_or_else(|| "R".to_string());
            if mentions_relation(&p, &rel) {
                return fail(
                    EXIT_USAGE,
                    format_args!("relation '{rel}' already occurs; pick another with --rel"),
                );
            }
            pretty_print(&flatten(&openize(&p, &rel)))
        }
        Target::OpenBdhorn => {
            if !second {
                return fail(EXIT_USAGE, "input must be an exists-rel sentence");
            }
            let rel = match &a.rel {
                Some(r) => r.clone(),
                None => return fail(EXIT_USAGE, "--rel names the relation read as a team"),
            };
            let e = match parse_second_order(&text) {
                Ok(e) => e,
                Err(c) => return c,
            };
            match negative_esohorn_to_open_bdhorn(&e, &rel) {
                Ok((p, order)) => {
                    eprintln!("deplog: team columns in argument order: {}", order.join(", "));
                    pretty_print(&flatten(&p))
                }
                Err(err) => return fail(translate_exit(&err), err),
            }
        }
        Target::Ground => {
            let spath = match &a.structure {
                Some(p) => p,
                None => return fail(EXIT_USAGE, "--structure is required for the ground target"),
            };
            let s = match read_structure(spath) {
                Ok(s) => s,
                Err(c) => return c,
            };
            let e = if second {
                match parse_second_order(&text) {
                    Ok(e) => e,
                    Err(c) => return c,
                }
            } else {
                let f = match parse_first_order(&text) {
                    Ok(f) => f,
                    Err(c) => return c,
                };
                let p = match match_prenex_dep(&f) {
                    Ok(p) => p,
                    Err(e) => return fail(EXIT_FRAGMENT, e),
                };
                match bdhorn_to_esohorn(&p) {
                    Ok((e, _)) => e,
                    Err(e) => return fail(translate_exit(&e), e),
                }
            };
            match ground(&e, &s) {
                Ok(g) => g.to_dimacs(),
                Err(err) => return fail(ground_exit(&err), err),
            }
        }
    };
    let mut out = out;
    if !out.ends_with('\n') {
        out.push('\n');
    }
    match &a.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &out) {
                return fail(EXIT_USAGE, format_args!("{}: {e}", path.display()));
            }
        }
        None => print!("{out}"),
    }
    EXIT_TRUE
}

fn parse_range(text: &str) -> Result<(usize, usize), i32> {
    let bad =
        || fail(EXIT_USAGE, format_args!("--n-range wants A..B with 1 <= A <= B, got '{text}'"));
    let (lo, hi) = match text.split_once("..") {
        Some(pair) => pair,
        None => return Err(bad()),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_stats(a: &StatsArgs) -> i32 {
    let text = match read_text(&a.formula) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let e = if looks_second_order(&text) {
        match parse_esohorn(&text) {
            Ok(e) => e,
            Err(err) => return fail(eso_exit(&err), err),
        }
    } else {
        let f = match parse_formula(&text) {
            Ok(f) => f,
            Err(err) => return fail(EXIT_USAGE, err),
        };
        let p = match match_prenex_dep(&f) {
            Ok(p) => p,
            Err(err) => return fail(EXIT_FRAGMENT, err),
        };
        match bdhorn_to_esohorn(&p) {
            Ok((e, _)) => e,
            Err(err) => return fail(translate_exit(&err), err),
        }
    };
    let (lo, hi) = match parse_range(&a.n_range) {
        Ok(r) => r,
        Err(c) => return c,
    };
    let k = e.universals.len();
    // Free first-order relations ground as empty, so sizes need no data.
    let mut fo_rels: Vec<String> = e
        .clauses
        .iter()
        .flat_map(|c| &c.literals)
        .filter_map(|l| match &l.atom {
            Atom::Rel(name, _) if e.so_arity(name).is_none() && name != SUCC => Some(name.clone()),
            _ => None,
        })
        .collect();
    fo_rels.sort();
    fo_rels.dedup();
    let mut rows = Vec::new();
    for n in lo..=hi {
        let mut s = match Structure::new(n) {
            Ok(s) => s,
            Err(err) => return fail(EXIT_USAGE, err),
        };
        for name in &fo_rels {
            s = match s.with_relation(name, Vec::new()) {
                Ok(s) => s,
                Err(err) => return fail(EXIT_USAGE, err),
            };
        }
        let g = match ground(&e, &s) {
            Ok(g) => g,
            Err(err) => return fail(ground_exit(&err), err),
        };
        let literals: usize =
            g.clauses.iter().map(|c| c.neg.len() + usize::from(c.pos.is_some())).sum();
        let normalized = g.clauses.len() as f64 / (n as f64).powi(2 * k as i32);
        rows.push((n, g.clauses.len(), g.atoms.len(), literals, normalized));
    }
    if a.json {
        let items: Vec<serde_json::Value> = rows
            .iter()
            .map(|&(n, clauses, atoms, literals, normalized)| {
                serde_json::json!({
                    "n": n,
                    "clauses": clauses,
                    "atoms": atoms,
                    "literals": literals,
                    "normalized": normalized,
                })
            })
            .collect();
        println!("{}", serde_json::Value::Array(items));
    } else {
        println!(
            "{:>4} {:>10} {:>10} {:>12} {:>16}",
            "n",
            "clauses",
            "atoms",
            "literals",
            format!("clauses/n^{}", 2 * k)
        );
        for (n, clauses, atoms, literals, normalized) in rows {
            println!("{n:>4} {clauses:>10} {atoms:>10} {literals:>12} {normalized:>16.6}");
        }
    }
    EXIT_TRUE
}
