//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pidkit_core::axioms::{
    audit, finish, replay, run_trial, theorem1_certificate, Axiom, AuditConfig, SearchConfig, SearchOutcome, Status,
    Witness,
};
use pidkit_core::geometric::{geometry, negative_synergy_demo, LogRatio};
use pidkit_core::lattice::{evaluate_lattice, mobius_invert, Mode};
use pidkit_core::{JointDistribution, MeasureKind, PiLattice, VarSet, AXIOM_TOLERANCE};

use crate::builtin;
use crate::error::{CliError, CliResult, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use crate::formats::{parse_dist, parse_scenario, parse_set, parse_sources, parse_witness, set_text, write_witness};
use crate::render;

#[derive(Parser, Debug)]
#[command(name = "pidkit", version, about = "Partial information decomposition on finite distributions")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Redundancy measure: imin, ii, si_kl or si_lr.
    #[arg(long, global = true, default_value = "imin")]
    pub measure: String,
    /// Target variables or groups, comma separated [default: S].
    #[arg(long, global = true)]
    pub target: Option<String>,
    /// Sources separated by `|`, e.g. `X1|Y1,Y2` [default: every group outside the target].
    #[arg(long, global = true)]
    pub sources: Option<String>,
    /// Decompose what the sources know about themselves.
    #[arg(long = "self", global = true)]
    pub self_decomposition: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Trials for `search`.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub budget: usize,
    /// Verdict tolerance for `axioms`, violation threshold for `search`.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Worker threads for `search`.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Treat "no violation found" as an error.
    #[arg(long, global = true)]
    pub expect_fail: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Dot,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Redundancy and local atoms at every lattice node.
    Decompose { input: PathBuf },
    /// Check a measure against the axioms.
    Axioms {
        input: Option<PathBuf>,
        /// Bundled case: xor, copy, left-mono or sec7.
        #[arg(long)]
        builtin: Option<String>,
        /// Rerun a witness file written by `--witness-out`.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Strong-symmetry certificate instead of an audit.
        #[arg(long)]
        theorem1: bool,
        /// Comma-separated axiom ids [default: GP,S0,I,M,LP,LM].
        #[arg(long, value_delimiter = ',')]
        axioms: Vec<String>,
        /// Write the first failing witness here.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Shared posteriors, SI_KL and SI_lr.
    Geometry {
        input: PathBuf,
        #[arg(long)]
        emit_json: bool,
    },
    /// Knowledge, shared and common knowledge of scenario events.
    Knowledge {
        input: PathBuf,
        /// Events to report [default: all].
        #[arg(long)]
        event: Vec<String>,
    },
    /// Structure of the lattice over n sources.
    Lattice {
        #[arg(value_name = "SOURCES")]
        n: usize,
    },
    /// Random search for a violation, shrunk to a small witness.
    Search {
        #[arg(long)]
        axiom: String,
        /// Number of sources in generated distributions.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
}

/// Parse `args`, run the command, and return the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let mut text = String::new();
    let result = execute(&cli, &mut text);
    let _ = out.write_all(text.as_bytes());
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut String) -> CliResult<u8> {
    let g = &cli.global;
    if let Some(t) = g.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage("--tolerance must be positive".into()));
        }
    }
    if g.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let formats = |name: &str, allowed: &[Format]| {
        if allowed.contains(&g.format) {
            Ok(())
        } else {
            Err(CliError::Usage(format!("`{name}` does not support --format {:?}", g.format).to_lowercase()))
        }
    };
    match &cli.command {
        Command::Decompose { input } => decompose(g, input, out),
        Command::Lattice { n } => lattice(g, *n, out),
        Command::Axioms { input, builtin, replay, theorem1, axioms, witness_out } => {
            formats("axioms", &[Format::Table])?;
            if let Some(path) = replay {
                return replay_witness(g, path, out);
            }
            let case = load_case(g, input.as_deref(), builtin.as_deref(), *theorem1)?;
            if *theorem1 {
                certificate(g, &case, out)
            } else {
                audit_command(g, &case, axioms, witness_out.as_deref(), out)
            }
        }
        Command::Geometry { input, emit_json } => {
            formats("geometry", &[Format::Table, Format::Json])?;
            geometry_command(g, input, *emit_json || g.format == Format::Json, out)
        }
        Command::Knowledge { input, event } => {
            formats("knowledge", &[Format::Table])?;
            knowledge(input, event, out)
        }
        Command::Search { axiom, n, witness_out } => {
            formats("search", &[Format::Table])?;
            search(g, axiom, *n, witness_out.as_deref(), out)
        }
    }
}

fn conclude(violation: bool, expect_fail: bool) -> CliResult<u8> {
    match (violation, expect_fail) {
        (true, _) => Ok(EXIT_VIOLATION),
        (false, true) => Err(CliError::Mismatch("--expect-fail given but no violation was found".into())),
        (false, false) => Ok(EXIT_OK),
    }
}

/// Read `path`, falling back to the bundled file of the same name.
pub fn read_input(path: &Path) -> CliResult<(String, String)> {
    let origin = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(text) => Ok((origin, text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            builtin::FILES
                .iter()
                .find(|(f, _)| *f == name)
                .map(|(f, text)| (format!("<bundled {f}>"), text.to_string()))
                .ok_or(CliError::Io { origin, source: e })
        }
        Err(e) => Err(CliError::Io { origin, source: e }),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io { origin: path.display().to_string(), source: e })
}

fn measure(g: &Global) -> CliResult<MeasureKind> {
    Ok(MeasureKind::from_name(&g.measure)?)
}

/// Variable groups in order of first appearance.
fn groups(dist: &JointDistribution) -> CliResult<Vec<VarSet>> {
    let mut out: Vec<VarSet> = Vec::new();
    for v in dist.variables() {
        let set = dist.resolve(v.group())?;
        if !out.contains(&set) {
            out.push(set);
        }
    }
    Ok(out)
}

/// A distribution with target and sources assigned.
#[derive(Clone, Debug)]
pub struct Case {
    pub dist: JointDistribution,
    pub target: VarSet,
    pub sources: Vec<VarSet>,
    pub self_decomposition: bool,
}

impl Case {
    fn mode(&self) -> Mode {
        if self.self_decomposition {
            Mode::SelfDecomposition
        } else {
            Mode::Standard
        }
    }

    fn header(&self) -> String {
        let sources: Vec<String> = self.sources.iter().map(|&s| set_text(&self.dist, s)).collect();
        format!(
            "target {}{}; sources {}",
            set_text(&self.dist, self.target),
            if self.self_decomposition { " (self)" } else { "" },
            sources.join(" | ")
        )
    }
}

pub fn assign_roles(dist: JointDistribution, g: &Global) -> CliResult<Case> {
    let given = g.sources.as_deref().map(|s| parse_sources(&dist, s)).transpose()?;
    if g.self_decomposition {
        if g.target.is_some() {
            return Err(CliError::Usage("--self and --target are mutually exclusive".into()));
        }
        let sources = match given {
            Some(s) => s,
            None => groups(&dist)?,
        };
        let target = sources.iter().fold(VarSet::EMPTY, |a, &s| a | s);
        return Ok(Case { dist, target, sources, self_decomposition: true });
    }
    let target = match &g.target {
        Some(t) => parse_set(&dist, t)?,
        None => dist
            .resolve("S")
            .map_err(|_| CliError::Usage("no variable or group named `S`; pass --target or --self".into()))?,
    };
    let sources = match given {
        Some(s) => s,
        None => groups(&dist)?.into_iter().filter(|s| s.is_disjoint(target)).collect(),
    };
    if sources.is_empty() {
        return Err(CliError::Usage("no source variables outside the target".into()));
    }
    Ok(Case { dist, target, sources, self_decomposition: false })
}

fn load_dist(path: &Path) -> CliResult<JointDistribution> {
    let (origin, text) = read_input(path)?;
    Ok(parse_dist(&text, &origin)?.dist)
}

fn load_case(g: &Global, input: Option<&Path>, name: Option<&str>, self_default: bool) -> CliResult<Case> {
    match (input, name) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either an input file or --builtin, not both".into())),
        (None, None) => Err(CliError::Usage("an input file or --builtin is required".into())),
        (None, Some(name)) => {
            let b = builtin::load(name)?;
            Ok(Case { dist: b.dist, target: b.target, sources: b.sources, self_decomposition: b.self_decomposition })
        }
        (Some(path), None) => {
            let dist = load_dist(path)?;
            if self_default && !g.self_decomposition {
                let mut g = g.clone();
                g.self_decomposition = true;
                return assign_roles(dist, &g);
            }
            assign_roles(dist, g)
        }
    }
}

fn decompose(g: &Global, input: &Path, out: &mut String) -> CliResult<u8> {
    let case = assign_roles(load_dist(input)?, g)?;
    let m = measure(g)?;
    let lattice = PiLattice::new(case.sources.len())?;
    let table = evaluate_lattice(&case.dist, &lattice, &case.sources, case.target, &m, case.mode())?;
    let table = mobius_invert(&table, &lattice);
    match g.format {
        Format::Table => {
            let _ = writeln!(out, "# {m}; {}", case.header());
            out.push_str(&render::decomposition_table(&lattice, &table));
            let partial = table.i_partial.as_ref().expect("inverted");
            if case.sources.len() == 2 {
                let at = |label: &str| partial[lattice.find(label).expect("bivariate node")];
                let _ = writeln!(
                    out,
                    "# SI={} UI({})={} UI({})={} CI={}",
                    render::number(at("1|2")),
                    set_text(&case.dist, case.sources[0]),
                    render::number(at("1")),
                    set_text(&case.dist, case.sources[1]),
                    render::number(at("2")),
                    render::number(at("12"))
                );
            }
            let negative: Vec<String> = pidkit_core::lattice::check_local_positivity(&table)
                .iter()
                .map(|v| format!("{} ({})", lattice.node(v.node), render::number(v.value)))
                .collect();
            if !negative.is_empty() {
                let _ = writeln!(out, "# negative local atoms: {}", negative.join(", "));
            }
        }
        Format::Dot => out.push_str(&render::dot(&lattice, Some(&table))),
        Format::Json => {
            let json = render::DecompositionJson::new(&case.dist, &lattice, &table, &case.sources, case.self_decomposition);
            out.push_str(&serde_json::to_string_pretty(&json)?);
            out.push('\n');
        }
    }
    Ok(EXIT_OK)
}

#[derive(serde::Serialize)]
struct LatticeJson {
    sources: usize,
    nodes: Vec<(String, usize)>,
    covers: Vec<(String, String)>,
}

fn lattice(g: &Global, n: usize, out: &mut String) -> CliResult<u8> {
    let lattice = PiLattice::new(n)?;
    match g.format {
        Format::Table => out.push_str(&render::lattice_table(&lattice)),
        Format::Dot => out.push_str(&render::dot(&lattice, None)),
        Format::Json => {
            let json = LatticeJson {
                sources: n,
                nodes: (0..lattice.len()).map(|i| (lattice.node(i).label(), lattice.layer(i))).collect(),
                covers: lattice
                    .covers()
                    .iter()
                    .map(|&(lo, hi)| (lattice.node(lo).label(), lattice.node(hi).label()))
                    .collect(),
            };
            out.push_str(&serde_json::to_string_pretty(&json)?);
            out.push('\n');
        }
    }
    Ok(EXIT_OK)
}

fn verdict_line(out: &mut String, label: &str, status: Status, gap: f64, note: Option<&str>) {
    match status {
        Status::Fail => {
            let _ = writeln!(out, "{label}: FAIL gap={}", render::number(gap));
        }
        Status::Pass => {
            let _ = writeln!(out, "{label}: PASS");
        }
        Status::NotApplicable => {
            let _ = writeln!(out, "{label}: N/A ({})", note.unwrap_or("not applicable"));
        }
    }
}

fn audit_command(
    g: &Global,
    case: &Case,
    axioms: &[String],
    witness_out: Option<&Path>,
    out: &mut String,
) -> CliResult<u8> {
    let m = measure(g)?;
    let list: Vec<Axiom> = if axioms.is_empty() {
        Axiom::DEFAULT.to_vec()
    } else {
        axioms.iter().map(|a| a.trim().parse::<Axiom>()).collect::<Result<_, _>>()?
    };
    let mut config = AuditConfig::new(&list, case.target, case.sources.clone());
    config.tolerance = g.tolerance.unwrap_or(AXIOM_TOLERANCE);
    let verdicts = audit(&m, &case.dist, &config)?;
    let _ = writeln!(out, "# {m}; {}", case.header());
    let mut first: Option<(&Witness, Axiom, pidkit_core::axioms::Clause)> = None;
    for v in &verdicts {
        verdict_line(out, &v.label(), v.status, v.gap, v.note.as_deref());
        if let Some(w) = &v.witness {
            let _ = writeln!(out, "  witness: {}", w.detail);
            first.get_or_insert((w, v.axiom, v.clause));
        }
    }
    if let (Some(path), Some((w, axiom, clause))) = (witness_out, first) {
        write_file(path, &write_witness(w, axiom, clause))?;
        let _ = writeln!(out, "# witness written to {}", path.display());
    }
    conclude(first.is_some(), g.expect_fail)
}

fn replay_witness(g: &Global, path: &Path, out: &mut String) -> CliResult<u8> {
    let (origin, text) = read_input(path)?;
    let file = parse_witness(&text, &origin)?;
    let tolerance = g.tolerance.unwrap_or(AXIOM_TOLERANCE);
    let v = replay(&file.measure, file.axiom, file.clause, &file.witness, tolerance)?;
    verdict_line(out, &format!("replay {}", v.label()), v.status, v.gap, v.note.as_deref());
    let identical = v.gap.to_bits() == file.witness.gap.to_bits();
    let _ = writeln!(
        out,
        "recorded gap {:?}, replayed gap {:?} ({})",
        file.witness.gap,
        v.gap,
        if identical { "bit-identical" } else { "differs" }
    );
    if v.status != Status::Fail || (v.gap - file.witness.gap).abs() > pidkit_core::TOLERANCE {
        return Err(CliError::Mismatch(format!("{origin}: the witness no longer reproduces its violation")));
    }
    Ok(EXIT_VIOLATION)
}

fn certificate(g: &Global, case: &Case, out: &mut String) -> CliResult<u8> {
    let c = theorem1_certificate(&case.dist, &case.sources)?;
    let _ = writeln!(out, "# strong-symmetry certificate; {}", case.header());
    for i in render::top_down(&c.lattice) {
        let n = &c.nodes[i];
        if n.is_determined() && n.formula == "?" {
            let _ = writeln!(out, "{}: ? forced to {}", n.label, render::number(n.lower));
        } else if n.is_determined() {
            let _ = writeln!(out, "{}: {} = {}", n.label, n.formula, render::number(n.lower));
        } else {
            let _ = writeln!(
                out,
                "{}: {} in [{}, {}]",
                n.label,
                n.formula,
                render::number(n.lower),
                render::number(n.upper)
            );
        }
    }
    let verdict = if c.infeasible { "infeasible" } else { "consistent" };
    match &c.local_bound {
        Some((label, bound)) => {
            let _ = writeln!(out, "{verdict}: I_∂({label}) ≤ {}", render::number(*bound));
        }
        None => {
            let _ = writeln!(out, "{verdict}");
        }
    }
    conclude(c.infeasible, g.expect_fail)
}

fn geometry_command(g: &Global, input: &Path, json: bool, out: &mut String) -> CliResult<u8> {
    let case = assign_roles(load_dist(input)?, g)?;
    let geo = geometry(&case.dist, case.target, &case.sources)?;
    if json {
        out.push_str(&serde_json::to_string_pretty(&render::GeometryJson::new(&case.dist, &geo))?);
        out.push('\n');
        return Ok(EXIT_OK);
    }
    out.push_str(&render::geometry_table(&case.dist, &geo));
    let lr = match &geo.si_lr {
        LogRatio::Finite(v) => render::number(*v),
        LogRatio::NegInfinite { tuple } => format!("-inf (at {tuple})"),
    };
    if case.sources.len() == 2 {
        let (x1, x2) = (case.sources[0], case.sources[1]);
        let r = negative_synergy_demo(&case.dist, case.target, x1, x2)?;
        let (s, a, b) = (set_text(&case.dist, case.target), set_text(&case.dist, x1), set_text(&case.dist, x2));
        let _ = writeln!(
            out,
            "I({s}:{a})={}, I({s}:{a}|{b})={}",
            render::number(r.mi_s_x1),
            render::number(r.cmi_s_x1_given_x2)
        );
        let d = &r.decomposition;
        let _ = writeln!(
            out,
            "SI_KL={}, SI_lr={lr}, CI(SI_KL)={}{}",
            render::number(r.si_kl),
            render::number(d.ci),
            if r.negative_synergy { " NEGATIVE" } else { "" }
        );
    } else {
        let _ = writeln!(out, "SI_KL={}, SI_lr={lr}", render::number(geo.si_kl));
    }
    Ok(EXIT_OK)
}

fn braces(labels: &[&str]) -> String {
    format!("{{{}}}", labels.join(", "))
}

fn knowledge(input: &Path, selected: &[String], out: &mut String) -> CliResult<u8> {
    let (origin, text) = read_input(input)?;
    let scenario = parse_scenario(&text, &origin)?;
    let m = &scenario.model;
    if scenario.events.is_empty() {
        return Err(CliError::parse(&origin, 1, "the scenario defines no events"));
    }
    for name in selected {
        if !scenario.events.iter().any(|(n, _)| n == name) {
            return Err(CliError::Usage(format!("no event named `{name}`")));
        }
    }
    let agents: Vec<usize> = (0..m.agents().len()).collect();
    for (name, event) in &scenario.events {
        if !selected.is_empty() && !selected.contains(name) {
            continue;
        }
        let _ = writeln!(out, "event {name} = {}", braces(&m.labels(event)));
        for (i, agent) in m.agents().iter().enumerate() {
            let k = m.knows(i, event)?;
            let _ = writeln!(out, "  K_{} = {}", agent.name, braces(&m.labels(&k)));
        }
        let sk = m.shared_knowledge(&agents, event)?;
        let (ck, steps) = m.common_knowledge_iterations(&agents, event)?;
        let _ = writeln!(out, "  SK = {}; CK = {}", braces(&m.labels(&sk)), braces(&m.labels(&ck)));
        let _ = writeln!(out, "  CK fixed point after {steps} iteration{}", if steps == 1 { "" } else { "s" });
        if !event.is_empty() {
            let _ = writeln!(
                out,
                "  possibility reduction (heuristic): log2({}/{}) = {} bits",
                m.states().len(),
                event.len(),
                render::number(m.possibility_reduction_bits(event))
            );
        }
    }
    Ok(EXIT_OK)
}

/// Lowest trial index in `0..budget` that violates the axiom, using `jobs`
/// threads over interleaved trial indices.
pub fn first_violation(m: &MeasureKind, config: &SearchConfig, jobs: usize) -> CliResult<Option<u64>> {
    let budget = config.budget as u64;
    if jobs <= 1 {
        for t in 0..budget {
            if run_trial(m, config, t)?.is_some() {
                return Ok(Some(t));
            }
        }
        return Ok(None);
    }
    let batch = jobs as u64 * 64;
    let mut start = 0;
    while start < budget {
        let end = (start + batch).min(budget);
        // each worker stops at its first violation or error; the smallest
        // such index is what a sequential scan would have hit first
        let events: Vec<(u64, Result<(), pidkit_core::Error>)> = thread::scope(|s| {
            let handles: Vec<_> = (0..jobs as u64)
                .map(|j| {
                    s.spawn(move || {
                        for t in (start + j..end).step_by(jobs) {
                            match run_trial(m, config, t) {
                                Ok(Some(_)) => return Some((t, Ok(()))),
                                Ok(None) => {}
                                Err(e) => return Some((t, Err(e))),
                            }
                        }
                        None
                    })
                })
                .collect();
            handles.into_iter().filter_map(|h| h.join().expect("search worker panicked")).collect()
        });
        if let Some((t, result)) = events.into_iter().min_by_key(|(t, _)| *t) {
            result?;
            return Ok(Some(t));
        }
        start = end;
    }
    Ok(None)
}

fn search(g: &Global, axiom: &str, n: usize, witness_out: Option<&Path>, out: &mut String) -> CliResult<u8> {
    let m = measure(g)?;
    let axiom: Axiom = axiom.parse()?;
    if !(1..=4).contains(&n) {
        return Err(CliError::Usage("--n must be between 1 and 4".into()));
    }
    let mut config = SearchConfig::new(axiom, g.seed, g.budget);
    config.sources = n;
    if let Some(t) = g.tolerance {
        config.threshold = t;
    }
    let Some(trial) = first_violation(&m, &config, g.jobs)? else {
        let _ = writeln!(out, "no {axiom} violation for {m} in {} trials (seed {})", g.budget, g.seed);
        return conclude(false, g.expect_fail);
    };
    let SearchOutcome::Found(w) = finish(&m, &config, trial)? else {
        unreachable!("finish always reports the trial it was given");
    };
    let audit_config = AuditConfig { axioms: vec![axiom], target: w.target, sources: w.sources.clone(), tolerance: config.threshold };
    let verdict = audit(&m, &w.dist, &audit_config)?
        .into_iter()
        .filter(|v| v.status == Status::Fail)
        .max_by(|a, b| a.gap.total_cmp(&b.gap))
        .ok_or_else(|| CliError::Mismatch("shrunk witness lost its violation".into()))?;
    let witness = verdict.witness.as_ref().expect("failing verdicts carry witnesses");
    let _ = writeln!(
        out,
        "# {m} {axiom}: violation at trial {trial} (seed {}), gap {}, {} rows shrunk to {}",
        g.seed,
        render::number(w.gap),
        w.original.support_size(),
        w.dist.support_size()
    );
    let text = write_witness(witness, axiom, verdict.clause);
    out.push_str(&text);
    if let Some(path) = witness_out {
        write_file(path, &text)?;
    }
    conclude(true, g.expect_fail)
}
