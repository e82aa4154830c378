use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qpainleve::evolution::{time_evolution_from, verify_theorem_i_for, verify_theorem_ii};
use qpainleve::lax::{claims_for, verify_gauge_claim, verify_gauge_claims};
use qpainleve::ratfun::{simplify, Limits};
use qpainleve::weyl::{apply_word, verify_relations};
use qpainleve::*;

#[derive(Parser)]
#[command(name = "qpainleve", version, about = "Verify Weyl group actions, gauge claims and time evolutions of the q-Painleve equations of types D5, E6 and E7")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Involution, braid and diagram-automorphism relations.
    VerifyRelations(Common),
    /// The time evolution theorem and the factorization of its adjustment map.
    VerifyTheorem {
        #[command(flatten)]
        common: Common,
        /// Evolution word to test in place of the family's own (written leftmost-first, applied rightmost-first).
        #[arg(long)]
        word: Option<String>,
    },
    /// Gauge claims relating Weyl group actions to the Lax equation.
    VerifyGauge {
        #[command(flatten)]
        common: Common,
        /// Check a single claim id (see `list`).
        #[arg(long)]
        claim: Option<String>,
    },
    /// Apply a word to an expression. `a b` means a(b(x)): the rightmost letter acts first.
    Apply {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// Iterate the nonlinear map from a JSON parameter file.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// JSON object with q, nu (7 or 8 entries), kappa1, kappa2, f, g as string rationals.
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long)]
        backward: bool,
    },
    /// Families, generators and gauge claims; with --family, the generator tables.
    List {
        #[arg(long)]
        family: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 16)]
    trials: usize,
    /// Prime above 2^60 for the randomized tests.
    #[arg(long, default_value_t = (1u64 << 61) - 1)]
    prime: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Confirm sampled-equal identities by exact normalization where small enough.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Replace one generator image, as `GEN:SYMBOL=EXPR`. Repeatable.
    #[arg(long = "override", value_name = "GEN:SYMBOL=EXPR")]
    overrides: Vec<String>,
    /// Drop the parameter constraint from every comparison.
    #[arg(long)]
    no_constraint: bool,
    /// Include per-check timings in JSON output.
    #[arg(long)]
    timings: bool,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

/// Exit 2: bad flags or input.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

impl Common {
    fn config(&self) -> Result<IdentityConfig, Usage> {
        let cfg = IdentityConfig { trials: self.trials, prime: self.prime, seed: self.seed, ..IdentityConfig::default() };
        let cfg = IdentityConfig { exact: self.exact, ..cfg };
        cfg.validate()?;
        Ok(cfg)
    }

    fn family(&self) -> Result<FamilyDescriptor, Usage> {
        let mut fam = make_family(&self.family)?;
        for o in &self.overrides {
            let (gen, rest) = o.split_once(':').ok_or_else(|| Usage(format!("override `{o}` is not GEN:SYMBOL=EXPR")))?;
            let (sym, expr) = rest.split_once('=').ok_or_else(|| Usage(format!("override `{o}` is not GEN:SYMBOL=EXPR")))?;
            let sym = Symbol::lookup(sym.trim()).ok_or_else(|| Usage(format!("unknown symbol `{sym}`")))?;
            fam = fam.with_override(gen.trim(), sym, parse(expr)?)?;
        }
        if self.no_constraint {
            fam = fam.without_constraint();
        }
        Ok(fam)
    }

    fn emit(&self, text: &str) -> Result<(), Usage> {
        match &self.out {
            Some(p) => fs::write(p, text).map_err(|e| Usage(format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                std::io::stdout().flush().ok();
                Ok(())
            }
        }
    }
}

fn latex_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '^' => out.push_str("\\^{}"),
            '~' => out.push_str("\\~{}"),
            '_' | '#' | '%' | '&' | '$' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out
}

fn render_reports(reports: &[Report], format: Format, timings: bool) -> String {
    match format {
        Format::Text => reports.iter().map(Report::to_text).collect(),
        // one report per line
        Format::Json => reports.iter().map(|r| format!("{}\n", r.to_json(timings))).collect(),
        Format::Latex => {
            let mut out = String::new();
            for r in reports {
                out.push_str(&format!("\\paragraph{{{}}}\n\\begin{{itemize}}\n", latex_escape(&r.title)));
                for c in &r.records {
                    out.push_str(&format!("  \\item[{}] \\texttt{{{}}}\n", c.status.as_str(), latex_escape(&c.id)));
                }
                out.push_str("\\end{itemize}\n");
            }
            out
        }
    }
}

fn run_reports(common: &Common, reports: Vec<Report>) -> Result<ExitCode, Usage> {
    common.emit(&render_reports(&reports, common.format, common.timings))?;
    Ok(if reports.iter().all(Report::all_pass) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_apply(common: &Common, word: &str, expr: &str) -> Result<ExitCode, Usage> {
    let fam = common.family()?;
    let w = WeylWord::parse(word)?;
    let e = parse(expr)?;
    let img = apply_word(&fam, &w, &e)?;
    let img = simplify(&img, &Limits::default()).unwrap_or(img);
    let text = match common.format {
        Format::Text => format!("{img}\n"),
        Format::Latex => format!("{}\n", img.to_latex()),
        Format::Json => format!(
            "{}\n",
            json!({"schema": 1, "family": fam.name.as_str(), "word": w.to_string(), "expr": e.to_string(), "image": img.to_string()})
        ),
    };
    common.emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_evolve(common: &Common, params: &PathBuf, steps: usize, backward: bool) -> Result<ExitCode, Usage> {
    let fam = common.family()?;
    let raw = fs::read_to_string(params).map_err(|e| Usage(format!("{}: {e}", params.display())))?;
    let v: Value = serde_json::from_str(&raw).map_err(|e| Usage(format!("{}: {e}", params.display())))?;
    let st = OrbitState::from_json(&v)?;
    let dir = if backward { Direction::Backward } else { Direction::Forward };
    let o = Stepper::new(&fam).walk(&st, steps, dir);
    let mut j = o.to_json(fam.name);
    j["schema"] = json!(1);
    let text = match common.format {
        Format::Json => format!("{j}\n"),
        _ => {
            let mut s = String::new();
            for st in &o.states {
                s.push_str(&format!("{st}\n"));
            }
            if let Some(e) = &o.pole {
                s.push_str(&format!("stopped: {e}\n"));
            }
            s
        }
    };
    common.emit(&text)?;
    if common.out.is_some() {
        if let Some(last) = o.states.last() {
            println!("{last}");
        }
    }
    if let Some(e) = &o.pole {
        eprintln!("{e}");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_list(family: Option<&str>, format: Format) -> Result<ExitCode, Usage> {
    let Some(name) = family else {
        for f in FamilyName::ALL {
            let fam = qpainleve::family(f);
            println!("{f}: generators {}", fam.generator_names().join(" "));
            println!("    evolution word {}", fam.evolution_word);
            println!("    claims {}", claims_for(f).join(" "));
        }
        return Ok(ExitCode::SUCCESS);
    };
    let fam = make_family(name)?;
    let mut out = String::new();
    for (g, t) in fam.generators() {
        match format {
            Format::Latex => {
                out.push_str(&format!("% {g}\n\\begin{{aligned}}\n"));
                let rows: Vec<String> = t
                    .entries()
                    .map(|(s, e)| format!("  {} &\\mapsto {}", s.latex(), e.to_latex()))
                    .collect();
                out.push_str(&rows.join(" \\\\\n"));
                out.push_str("\n\\end{aligned}\n");
            }
            Format::Json => {
                let images: serde_json::Map<String, Value> =
                    t.entries().map(|(s, e)| (s.name(), json!(e.to_string()))).collect();
                out.push_str(&format!("{}\n", json!({"schema": 1, "family": fam.name.as_str(), "generator": g, "images": images})));
            }
            Format::Text => {
                out.push_str(&format!("{g}:\n"));
                for (s, e) in t.entries() {
                    out.push_str(&format!("  {s} -> {e}\n"));
                }
            }
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Usage> {
    match cli.command {
        Command::VerifyRelations(c) => {
            let (fam, cfg) = (c.family()?, c.config()?);
            run_reports(&c, vec![verify_relations(&fam, &cfg)])
        }
        Command::VerifyTheorem { common: c, word } => {
            let (fam, cfg) = (c.family()?, c.config()?);
            let w = match word {
                Some(w) => WeylWord::parse(&w)?,
                None => fam.evolution_word.clone(),
            };
            let t = time_evolution_from(&fam, &w, &fam.xi)?;
            run_reports(&c, vec![verify_theorem_i_for(&fam, &t, &cfg), verify_theorem_ii(&fam, &cfg)])
        }
        Command::VerifyGauge { common: c, claim } => {
            let (fam, cfg) = (c.family()?, c.config()?);
            let report = match claim {
                Some(id) => {
                    let mut r = Report::new(format!("{} gauge claim", fam.name));
                    r.push(verify_gauge_claim(&fam, &id, &cfg)?);
                    r
                }
                None => verify_gauge_claims(&fam, &cfg),
            };
            run_reports(&c, vec![report])
        }
        Command::Apply { common, word, expr } => cmd_apply(&common, &word, &expr),
        Command::Evolve { common, params, steps, backward } => cmd_evolve(&common, &params, steps, backward),
        Command::List { family, format } => cmd_list(family.as_deref(), format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(c) => c,
        Err(Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
