//! Command-line front end and HTTP session server for `clusterkr_core`.

pub mod server;
pub mod session;

use std::io::Read;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use clusterkr_core::dt::{self, DTMap};
use clusterkr_core::greenseq::{classify_sequence, lift, sink_letters_an, sink_sequence_an, source_mgs, MutationSequence, Provenance};
use clusterkr_core::krchar::{kr_character, CharacterRoute, QCharacter};
use clusterkr_core::quiver::{dynkin_quiver, line_quiver, parse_sequence, product_with_line};
use clusterkr_core::{DynkinType, EngineError, Quiver, Seed, Tracking};

#[derive(Parser, Debug)]
#[command(name = "clusterkr", version, about = "Exact cluster algebra computations: mutation, green sequences, KR q-characters, DT maps")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build quivers.
    #[command(subcommand)]
    Quiver(QuiverCmd),
    /// Apply a mutation sequence to a quiver and print the resulting seed.
    Mutate(MutateArgs),
    /// Verify or generate maximal green sequences.
    #[command(subcommand)]
    Mgs(MgsCmd),
    /// Compute a KR q-character by mutation.
    Qchar(QcharArgs),
    /// Compute a cluster DT transformation.
    Dt(DtArgs),
    /// Serve the session API for the explorer.
    Serve(ServeArgs),
}

#[derive(Subcommand, Debug)]
pub enum QuiverCmd {
    /// Alternating Dynkin quiver, optionally multiplied by a line.
    Build(BuildArgs),
}

#[derive(Args, Debug)]
pub struct TypeArgs {
    /// Dynkin family: A, D or E.
    #[arg(long = "type")]
    pub family: String,
    #[arg(long)]
    pub rank: usize,
}

impl TypeArgs {
    fn dynkin(&self) -> Result<DynkinType, CliError> {
        Ok(format!("{}{}", self.family, self.rank).parse::<DynkinType>()?)
    }
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    pub ty: TypeArgs,
    /// Form Q⊠A_L with the sink-oriented line on L levels.
    #[arg(long)]
    pub product_levels: Option<usize>,
    /// Freeze the top level of the product.
    #[arg(long, requires = "product_levels")]
    pub freeze_top: bool,
}

#[derive(Args, Debug)]
pub struct MutateArgs {
    /// Quiver JSON file, or `-` for stdin.
    #[arg(long)]
    pub quiver: String,
    /// Comma-separated vertex ids.
    #[arg(long)]
    pub seq: String,
    /// Also report colors, c-vectors, g-vectors and F-polynomials.
    #[arg(long)]
    pub tropical: bool,
}

#[derive(Subcommand, Debug)]
pub enum MgsCmd {
    /// Classify a sequence as green, reddening, maximal green or neither.
    Verify(VerifyArgs),
    /// Produce a maximal green sequence for the quiver.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub quiver: String,
    #[arg(long)]
    pub seq: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MgsKind {
    Sink,
    Source,
    SourceSink,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub quiver: String,
    /// Sequence family; by default the source sequence for acyclic quivers
    /// and the source-sink sequence for products.
    #[arg(long, value_enum)]
    pub kind: Option<MgsKind>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QcharRoute {
    Hl,
    Mgs,
}

#[derive(Args, Debug)]
pub struct QcharArgs {
    #[command(flatten)]
    pub ty: TypeArgs,
    #[arg(long)]
    pub node: String,
    /// Length of the KR module.
    #[arg(long)]
    pub k: u32,
    /// Right end of the module and depth of the truncation.
    #[arg(long)]
    pub level: u32,
    #[arg(long, value_enum, default_value_t = QcharRoute::Mgs)]
    pub route: QcharRoute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DtRoute {
    Mutate,
    Qchar,
    ClosedForm,
}

#[derive(Args, Debug)]
pub struct DtArgs {
    #[command(flatten)]
    pub ty: TypeArgs,
    /// Work on Q⊠A_{m+1} with level m+1 frozen.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, value_enum, default_value_t = DtRoute::Mutate)]
    pub route: DtRoute,
    /// Use the Dynkin quiver itself, with no frozen vertices.
    #[arg(long, conflicts_with = "m")]
    pub unfrozen: bool,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Seconds of inactivity before a session is dropped.
    #[arg(long, default_value_t = 1800)]
    pub idle_timeout: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(e) if e.is_engine_fault() => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Usage(m) => json!({"error": {"kind": "usage", "message": m}}),
            CliError::Engine(e) => json!({"error": {"kind": e.kind(), "message": e.to_string(), "engine_fault": e.is_engine_fault()}}),
        }
    }
}

/// A command result in both renderings.
#[derive(Debug)]
pub struct Output {
    pub json: Value,
    pub text: String,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("serializable"),
            Format::Text => self.text.trim_end().to_string(),
        }
    }
}

pub fn load_quiver(path: &str) -> Result<Quiver, CliError> {
    let raw = if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Usage(format!("reading stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(Path::new(path)).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))?
    };
    let v: Value = serde_json::from_str(&raw).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    Ok(Quiver::from_json(&v)?)
}

/// Runs every verb except `serve`.
pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Quiver(QuiverCmd::Build(a)) => build(a),
        Command::Mutate(a) => mutate(a),
        Command::Mgs(MgsCmd::Verify(a)) => verify(&load_quiver(&a.quiver)?, &a.seq),
        Command::Mgs(MgsCmd::Generate(a)) => generate(&load_quiver(&a.quiver)?, a.kind),
        Command::Qchar(a) => qchar(a),
        Command::Dt(a) => dt_cmd(a),
        Command::Serve(_) => Err(CliError::Usage("serve is long-running and has no batch output".into())),
    }
}

fn build(a: &BuildArgs) -> Result<Output, CliError> {
    let base = dynkin_quiver(a.ty.dynkin()?);
    let q = match a.product_levels {
        None => base,
        Some(l) => product_with_line(&base, l, a.freeze_top.then_some(l as u32))?,
    };
    Ok(Output { json: q.to_json(), text: q.to_string() })
}

fn mutate(a: &MutateArgs) -> Result<Output, CliError> {
    let q = load_quiver(&a.quiver)?;
    let seq = parse_sequence(&a.seq)?;
    let tracking = if a.tropical { Tracking::Principal } else { Tracking::Plain };
    let s = Seed::new(q, tracking).apply_sequence(&seq)?;
    let mut json = s.to_json();
    let mut text = format!("after {}\n{}", a.seq, s.quiver());
    for (v, x) in s.quiver().ids().iter().zip(s.x_values()) {
        text.push_str(&format!("x[{v}] = {x}\n"));
    }
    if a.tropical {
        let td = s.check_separation()?;
        let mut colors = serde_json::Map::new();
        for v in &td.mutable {
            let c = s.color(v)?;
            colors.insert(v.to_string(), json!(c.as_str()));
            text.push_str(&format!("{v}: {} c={:?}\n", c.as_str(), s.c_vector(v)?));
        }
        json["colors"] = Value::Object(colors);
        json["tropical"] = td.to_json();
    }
    Ok(Output { json, text })
}

pub fn verify(q: &Quiver, seq: &str) -> Result<Output, CliError> {
    let seq = parse_sequence(seq)?;
    let r = classify_sequence(q, &seq)?;
    let text = format!("{}: {} ({} steps)\n", r.kind.as_str(), clusterkr_core::quiver::format_sequence(&seq), seq.len());
    Ok(Output { json: r.to_json(), text })
}

fn generate(q: &Quiver, kind: Option<MgsKind>) -> Result<Output, CliError> {
    let seq = match kind {
        None => dt::default_reddening(q)?,
        Some(MgsKind::Source) => source_mgs(q)?,
        Some(MgsKind::Sink) => {
            let n = q.n();
            if line_quiver(n).ok().as_ref() != Some(q) {
                return Err(CliError::Usage(format!("the sink sequence needs the sink-oriented line 1 <- 2 <- ... <- {n}")));
            }
            sink_sequence_an(n)
        }
        Some(MgsKind::SourceSink) => {
            let Some((base, levels)) = dt::as_product(q) else {
                return Err(CliError::Usage("source-sink sequences need Q⊠A_L with the top level frozen".into()));
            };
            MutationSequence::new(lift(&base.source_sink_order()?, &sink_letters_an(levels - 1)), Provenance::SourceSink)
        }
    };
    let report = classify_sequence(q, &seq.steps)?;
    let text = format!("{} sequence ({}): {}\nkind: {}\n", seq.provenance.as_str(), seq.len(), seq, report.kind.as_str());
    let json = json!({
        "sequence": seq.to_string(),
        "provenance": seq.provenance.as_str(),
        "report": report.to_json(),
    });
    Ok(Output { json, text })
}

pub fn qchar_value(a: &QcharArgs) -> Result<QCharacter, CliError> {
    let t = a.ty.dynkin()?;
    let route = match a.route {
        QcharRoute::Mgs => CharacterRoute::Mgs,
        QcharRoute::Hl => CharacterRoute::Sweep,
    };
    Ok(kr_character(t, &a.node, a.k, a.level, route)?)
}

fn qchar(a: &QcharArgs) -> Result<Output, CliError> {
    let c = qchar_value(a)?;
    log::info!("character of W[v{}] k={} right={} has {} terms", c.module.node, c.module.k, c.module.right, c.poly.len());
    let text = format!(
        "W[v{}] k={} right={}{}\n{}\n",
        c.module.node,
        c.module.k,
        c.module.right,
        if c.truncated { " (truncated)" } else { "" },
        c.poly
    );
    Ok(Output { json: c.to_json(), text })
}

pub fn dt_value(a: &DtArgs) -> Result<DTMap, CliError> {
    let t = a.ty.dynkin()?;
    let levels = a.m.map(|m| m + 1);
    Ok(match (a.route, levels) {
        (DtRoute::ClosedForm, _) => {
            if t.family != clusterkr_core::Family::A {
                return Err(CliError::Usage("the closed form covers type A only".into()));
            }
            if levels.is_some() {
                return Err(CliError::Usage("the closed form is for the iced line; drop --m".into()));
            }
            dt::dt_closed_form_a(t.rank, !a.unfrozen)?
        }
        (DtRoute::Mutate, None) if a.unfrozen => dt::dt_transform(&dynkin_quiver(t))?,
        (DtRoute::Mutate, Some(l)) => dt::dt_transform(&product_with_line(&dynkin_quiver(t), l as usize, Some(l))?)?,
        (DtRoute::Qchar, Some(l)) => dt::dt_via_qcharacters(t, l)?,
        (DtRoute::Qchar, None) if !a.unfrozen => dt::double_bruhat_dt(t)?,
        _ => return Err(CliError::Usage("give --m, or --unfrozen with --route mutate".into())),
    })
}

fn dt_cmd(a: &DtArgs) -> Result<Output, CliError> {
    let d = dt_value(a)?;
    let mut text = String::new();
    for (v, p) in d.quiver.ids().iter().zip(&d.images) {
        text.push_str(&format!("DT(x[{v}]) = {p}\n"));
    }
    Ok(Output { json: d.to_json(), text })
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("CLUSTERKR_LOG", "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` and runs the batch verbs. Returns the exit code together
/// with what goes to stdout and stderr.
pub fn run_batch<I, S>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            return if code == 0 { (0, e.to_string(), String::new()) } else { (1, String::new(), e.to_string()) };
        }
    };
    match execute(&cli.command) {
        Ok(out) => (0, out.render(cli.format), String::new()),
        Err(e) => {
            log::error!("{e}");
            let stdout = match cli.format {
                Format::Json => serde_json::to_string_pretty(&e.to_json()).expect("serializable"),
                Format::Text => String::new(),
            };
            (e.exit_code(), stdout, format!("error: {e}"))
        }
    }
}
