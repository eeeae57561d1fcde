//! `ma`: validate, run, check and scan models written in the text format.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mimic_core::automata::DEFAULT_SUCCESSOR_CAP;
use mimic_core::check::{
    build_dtmc, check_bad_prefix, check_invariant, check_reach, flatten, raw_ca_dot,
    reach_probability_exact, reach_probability_mc, ts_dot, CheckError, CheckResult, Horizon,
    Method, Trace, Verdict, DEFAULT_BOUND, DEFAULT_MAX_ITER, DEFAULT_TOL, DEFAULT_TRIALS,
};
use mimic_core::compose::{
    BindingMode, MacroInput, MimicAutomaton, MimicConfiguration, Sampler, UnitState,
};
use mimic_core::detect::{detect, load_signatures, DetectError};
use mimic_core::dhr::{build_dhr, dhr_run, DhrTick};
use mimic_core::format::{self, FormatError, Model, ModelDocument, PropertyKind};
use mimic_core::word::{parse_word, render_word, Word};

#[derive(Parser)]
#[command(name = "ma", version, about = "Mimic automata models: validate, simulate, check, detect")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate model files.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run a model on an input word.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Input word, or `@path` with one symbol per line.
        #[arg(long)]
        input: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the full JSON trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Check a property block against a model.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        property: String,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Run a DHR model and show every slot's output and the vote.
    Dhr {
        #[command(flatten)]
        model: ModelArgs,
        /// Input word, or `@path` with one symbol per line.
        #[arg(long)]
        input: String,
        /// Replace the executor of a slot: `<slot>:<sa-name>`.
        #[arg(long)]
        inject: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Scan a model's behaviors for signature matches.
    Detect {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, num_args = 1.., required = true)]
        signatures: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Write a Graphviz rendering of the flattened model.
    ExportDot {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
        /// Render the root lattice rule graph instead.
        #[arg(long)]
        raw_ca: bool,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long)]
    model: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

/// Exit status with its message.
enum Failure {
    /// Bad flags, unreadable or invalid files: status 3.
    Usage(String),
    /// State or iteration budget exhausted: status 2.
    Resource(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Self {
        if e.is_resource_bound() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<DetectError> for Failure {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Check(c) => c.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("{m}");
            ExitCode::from(3)
        }
        Err(Failure::Resource(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
    }
}

fn load(files: &[PathBuf]) -> Result<ModelDocument, Failure> {
    let mut sources = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(f).map_err(|e| usage(format!("{}: {e}", f.display())))?;
        sources.push((f.display().to_string(), text));
    }
    format::parse_files(&sources).map_err(|ds| Failure::Usage(format::render_all(&ds)))
}

fn load_model(args: &ModelArgs) -> Result<(ModelDocument, Model), Failure> {
    let doc = load(&args.files)?;
    let model = doc.model(&args.model)?;
    Ok((doc, model))
}

/// A word given inline, or `@path` with one symbol per line.
fn read_word(arg: &str) -> Result<Word, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
            Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned).collect())
        }
        None => Ok(parse_word(arg)),
    }
}

fn cell_states(ma: &MimicAutomaton) -> Vec<String> {
    ma.root()
        .and_then(|b| ma.ca(&b.ca))
        .map(|c| c.shape().cell_states.clone())
        .unwrap_or_default()
}

/// The macro inputs of `steps` ticks. Plain roots take one symbol per
/// tick; lattice-driven roots take one seed lattice (`width` cell-state
/// names) per tick. The input repeats when it is shorter than `steps`.
fn schedule(model: &Model, input: &Word, steps: usize) -> Result<Vec<MacroInput>, Failure> {
    let root = model.ma.root().map_err(usage)?;
    let per_tick: Vec<MacroInput> = match root.mode {
        BindingMode::SaFromCa => input.iter().map(|s| MacroInput::Block(vec![s.clone()])).collect(),
        BindingMode::CaFromSa => {
            let shape = model.ma.ca(&root.ca).map_err(usage)?.shape().clone();
            if !input.len().is_multiple_of(shape.width) {
                return Err(usage(format!(
                    "a lattice-driven model reads seeds of {} cells; the input has {} symbols",
                    shape.width,
                    input.len()
                )));
            }
            let mut out = Vec::new();
            for chunk in input.chunks(shape.width) {
                let l = shape.lattice_from_names(chunk).ok_or_else(|| {
                    usage(format!("`{}` is not a lattice of `{}`", chunk.join(" "), root.ca))
                })?;
                out.push(MacroInput::Seed(l));
            }
            out
        }
    };
    if per_tick.is_empty() {
        return match root.mode {
            BindingMode::SaFromCa => Ok(vec![MacroInput::Block(Vec::new()); steps]),
            BindingMode::CaFromSa if steps == 0 => Ok(Vec::new()),
            BindingMode::CaFromSa => Err(usage("a lattice-driven model needs at least one seed")),
        };
    }
    Ok(per_tick.iter().cycle().take(steps).cloned().collect())
}

fn render_input(ma: &MimicAutomaton, input: &MacroInput) -> String {
    match input {
        MacroInput::Block(w) => render_word(w),
        MacroInput::Seed(l) => l.render(&cell_states(ma)),
    }
}

fn render_unit(u: &UnitState) -> String {
    match u {
        UnitState::Sa(s) => s.clone(),
        UnitState::Ha(c) => c.active.values().cloned().collect::<Vec<_>>().join("+"),
        UnitState::Nested(b) => format!("<{}>", b.lattice),
    }
}

fn render_config(ma: &MimicAutomaton, cfg: &MimicConfiguration) -> String {
    let units: Vec<String> = cfg.unit_states().iter().map(render_unit).collect();
    let mut s = format!("lattice {} units [{}]", cfg.lattice().render(&cell_states(ma)), units.join(", "));
    if let Some(o) = &cfg.root.outer {
        let _ = write!(s, " outer {o}");
    }
    s
}

fn emit(format: OutputFormat, text: &str, value: &Value) {
    let body = match format {
        OutputFormat::Text => text.to_owned(),
        OutputFormat::Json => serde_json::to_string_pretty(value).expect("json") + "\n",
    };
    // A closed pipe (`ma ... | head`) is not an error worth a panic.
    let _ = std::io::stdout().write_all(body.as_bytes());
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate { files } => {
            let doc = load(&files)?;
            let _ = writeln!(std::io::stdout(), "ok: {} blocks", doc.block_names().len());
            Ok(0)
        }
        Command::Simulate {
            model,
            input,
            steps,
            seed,
            trace,
            format,
        } => simulate(&model, &input, steps, seed, trace.as_deref(), format),
        Command::Check {
            model,
            property,
            bound,
            tol,
            trials,
            seed,
            format,
        } => check(&model, &property, bound, tol, trials, seed, format),
        Command::Dhr {
            model,
            input,
            inject,
            seed,
            format,
        } => dhr(&model, &input, &inject, seed, format),
        Command::Detect {
            model,
            signatures,
            bound,
            format,
        } => scan(&model, &signatures, bound, format),
        Command::ExportDot {
            model,
            out,
            raw_ca,
            bound,
        } => export_dot(&model, &out, raw_ca, bound),
    }
}

fn simulate(
    args: &ModelArgs,
    input: &str,
    steps: usize,
    seed: u64,
    trace_path: Option<&Path>,
    format: OutputFormat,
) -> Result<u8, Failure> {
    let (_, model) = load_model(args)?;
    let word = read_word(input)?;
    let schedule = schedule(&model, &word, steps)?;
    let ma = &model.ma;
    let mut chance = Sampler::seeded(seed);
    let (end, trace) = ma.run(&model.initial, &schedule, &mut chance).map_err(usage)?;
    let mut text = format!("initial: {}\n", render_config(ma, &model.initial));
    for (k, tick) in trace.ticks.iter().enumerate() {
        let root = tick.root();
        let _ = writeln!(
            text,
            "tick {}: input {} | lattice {} -> {} | output {}",
            k + 1,
            render_input(ma, &root.input),
            root.lattice_before.render(&cell_states(ma)),
            root.lattice_after.render(&cell_states(ma)),
            tick.output().render()
        );
    }
    if trace.aborted {
        text.push_str("stopped: a stage abstained\n");
    }
    let _ = writeln!(text, "final: {}", render_config(ma, &end));
    let value = json!({
        "model": model.name,
        "seed": seed,
        "initial": model.initial,
        "ticks": trace.ticks,
        "aborted": trace.aborted,
        "final": end,
    });
    if let Some(p) = trace_path {
        let body = serde_json::to_string_pretty(&value).expect("json");
        std::fs::write(p, body).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    }
    emit(format, &text, &value);
    Ok(0)
}

fn trace_json(ma: &MimicAutomaton, t: &Trace) -> Value {
    let states = cell_states(ma);
    Value::Array(
        t.actions
            .iter()
            .zip(&t.states[1..])
            .map(|(a, s)| {
                json!({
                    "input": a.render_input(ma),
                    "output": a.output.render(),
                    "lattice": s.config.root.lattice.render(&states),
                    "units": s.config.root.units.iter().map(render_unit).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn trace_text(ma: &MimicAutomaton, t: &Trace) -> String {
    let mut out = String::new();
    for (k, a) in t.actions.iter().enumerate() {
        let s = &t.states[k + 1];
        let units: Vec<String> = s.config.root.units.iter().map(render_unit).collect();
        let _ = writeln!(
            out,
            "  {}: {} -> lattice {} units [{}]",
            k + 1,
            a.render(ma),
            s.config.root.lattice.render(&cell_states(ma)),
            units.join(", ")
        );
    }
    out
}

fn result_json(ma: &MimicAutomaton, r: &CheckResult) -> Value {
    let (verdict, p, e, method) = match &r.verdict {
        Verdict::Holds => ("holds", None, None, None),
        Verdict::Violated => ("violated", None, None, None),
        Verdict::Probability { p, method, error_bound } => ("probability", Some(*p), Some(*error_bound), Some(*method)),
    };
    json!({
        "verdict": verdict,
        "counterexample": r.counterexample.as_ref().map(|t| trace_json(ma, t)).unwrap_or(Value::Array(Vec::new())),
        "probability": p,
        "error_bound": e,
        "method": method,
        "stats": r.stats,
    })
}

#[allow(clippy::too_many_arguments)]
fn check(
    args: &ModelArgs,
    property: &str,
    bound: usize,
    tol: f64,
    trials: usize,
    seed: u64,
    format: OutputFormat,
) -> Result<u8, Failure> {
    let (doc, model) = load_model(args)?;
    let prop = doc.property(property)?.clone();
    let ma = &model.ma;
    let result = match &prop.kind {
        PropertyKind::Reach(target) if ma.is_probabilistic() => {
            let horizon = prop.horizon.map_or(Horizon::Unbounded, Horizon::Steps);
            match prop.method.unwrap_or(Method::Exact) {
                Method::Exact => {
                    let dtmc = build_dtmc(ma, &model.initial, &model.policy, bound, DEFAULT_SUCCESSOR_CAP)?;
                    reach_probability_exact(ma, &dtmc, target, horizon, tol, DEFAULT_MAX_ITER)?
                }
                Method::MonteCarlo => {
                    let Some(h) = prop.horizon else {
                        return Err(usage(format!("property `{property}`: monte_carlo needs a horizon")));
                    };
                    reach_probability_mc(ma, &model.initial, &model.policy, target, h, trials, seed)?
                }
            }
        }
        kind => {
            let ts = flatten(ma, &model.initial, &model.universe, bound)?;
            match kind {
                PropertyKind::Invariant(p) => check_invariant(ma, &ts, p)?,
                PropertyKind::Reach(p) => {
                    let mut r = check_reach(ma, &ts, p)?;
                    if let (Some(h), Some(w)) = (prop.horizon, &r.counterexample) {
                        if w.len() > h {
                            r.verdict = Verdict::Violated;
                            r.counterexample = None;
                        }
                    }
                    r
                }
                PropertyKind::BadPrefix(sa) => check_bad_prefix(ma, &ts, &doc.sas[sa])?,
            }
        }
    };
    let code = match result.verdict {
        Verdict::Violated => 1,
        _ => 0,
    };
    let mut text = match &result.verdict {
        Verdict::Holds => format!("{property}: holds\n"),
        Verdict::Violated => format!("{property}: violated\n"),
        Verdict::Probability { p, method, error_bound } => {
            format!("{property}: probability {p} ({method:?}, error bound {error_bound})\n")
        }
    };
    if let Some(t) = &result.counterexample {
        let what = if matches!(prop.kind, PropertyKind::Reach(_)) { "witness" } else { "counterexample" };
        let _ = writeln!(text, "{what} ({} steps) from {}:", t.len(), render_config(ma, &model.initial));
        text.push_str(&trace_text(ma, t));
    }
    let s = &result.stats;
    let _ = writeln!(
        text,
        "states {} transitions {} iterations {} trials {}",
        s.states, s.transitions, s.iterations, s.trials
    );
    let mut value = result_json(ma, &result);
    value["model"] = json!(model.name);
    value["property"] = json!(property);
    emit(format, &text, &value);
    Ok(code)
}

fn dhr(args: &ModelArgs, input: &str, inject: &[String], seed: u64, format: OutputFormat) -> Result<u8, Failure> {
    let (doc, model) = load_model(args)?;
    let mut ma = model.ma.clone();
    if !inject.is_empty() {
        let Some(mut d) = model.dhr.clone() else {
            return Err(usage(format!("--inject applies to dhr models; `{}` is not one", model.name)));
        };
        for spec in inject {
            let (slot, sa) = spec
                .split_once(':')
                .and_then(|(s, n)| Some((s.parse::<usize>().ok()?, n)))
                .ok_or_else(|| usage(format!("--inject `{spec}`: expected <slot>:<sa-name>")))?;
            let faulty = doc.sas.get(sa).ok_or_else(|| usage(format!("--inject: no sa named `{sa}`")))?;
            d = d.inject_fault(slot, faulty.clone()).map_err(usage)?;
        }
        ma = build_dhr(&d).map_err(usage)?;
    } else if model.dhr.is_none() && model.serial.is_none() {
        return Err(usage(format!("`{}` is not a dhr or serial_dhr model", model.name)));
    }
    let blocks: Vec<Word> = read_word(input)?.into_iter().map(|s| vec![s]).collect();
    let ticks: Vec<DhrTick> = dhr_run(&ma, &blocks, seed).map_err(usage)?;
    let mut text = String::new();
    for (k, t) in ticks.iter().enumerate() {
        for s in &t.stages {
            let slots: Vec<String> = s.per_slot_outputs.iter().map(|w| render_word(w)).collect();
            let voted = s.voted_output.as_ref().map_or("abstain".to_owned(), |w| render_word(w));
            let dissent: Vec<String> = s.dissenters.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                text,
                "tick {} {}: input {} | slots [{}] | voted {} | dissenters [{}]",
                k + 1,
                s.stage,
                render_word(&s.input_block),
                slots.join(", "),
                voted,
                dissent.join(", ")
            );
        }
        if t.aborted {
            text.push_str("stopped: a stage abstained\n");
        }
    }
    emit(format, &text, &json!({ "model": model.name, "seed": seed, "ticks": ticks }));
    Ok(0)
}

fn scan(args: &ModelArgs, signatures: &[PathBuf], bound: usize, format: OutputFormat) -> Result<u8, Failure> {
    let (_, model) = load_model(args)?;
    let sigs = load_signatures(signatures)?;
    let report = detect(&model.ma, &model.initial, &model.universe, &sigs, bound)?;
    let ma = &model.ma;
    let mut text = format!("{}: {} states, {} transitions\n", report.model, report.states, report.transitions);
    for r in &report.results {
        let status = if r.matched { "MATCH" } else { "clean" };
        let _ = writeln!(text, "{status} {} [{}] {}", r.id, r.severity, r.description);
        if let Some(w) = &r.witness {
            text.push_str(&trace_text(ma, w));
        }
    }
    let first = report.results.iter().find_map(|r| r.witness.as_ref());
    let value = json!({
        "verdict": if report.any_match() { "matched" } else { "clean" },
        "counterexample": first.map(|t| trace_json(ma, t)).unwrap_or(Value::Array(Vec::new())),
        "probability": Value::Null,
        "error_bound": Value::Null,
        "stats": { "states": report.states, "transitions": report.transitions, "signatures": report.results.len() },
        "model": report.model,
        "metadata": report.metadata,
        "results": report.results.iter().map(|r| json!({
            "id": r.id,
            "description": r.description,
            "severity": r.severity,
            "matched": r.matched,
            "witness": r.witness.as_ref().map(|t| trace_json(ma, t)),
        })).collect::<Vec<_>>(),
    });
    emit(format, &text, &value);
    Ok(u8::from(report.any_match()))
}

fn export_dot(args: &ModelArgs, out: &Path, raw_ca: bool, bound: usize) -> Result<u8, Failure> {
    let (_, model) = load_model(args)?;
    let ma = &model.ma;
    let dot = if raw_ca {
        let root = ma.root().map_err(usage)?;
        raw_ca_dot(ma.ca(&root.ca).map_err(usage)?).map_err(|e| Failure::Resource(e.to_string()))?
    } else if ma.is_probabilistic() {
        build_dtmc(ma, &model.initial, &model.policy, bound, DEFAULT_SUCCESSOR_CAP)?.to_dot(ma)
    } else {
        ts_dot(ma, &flatten(ma, &model.initial, &model.universe, bound)?)
    };
    std::fs::write(out, dot).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    Ok(0)
}
