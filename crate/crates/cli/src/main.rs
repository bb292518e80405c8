//! `pokerlm`: the pipeline from raw hand histories to training data,
//! simulations, metric reports and the live advisor service.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand};
use pokerlm_core::analytics::{compute_stats, rank_players, staged_revenue_histogram, uniform_edges, WinRateBand};
use pokerlm_core::dataset::{build_dataset, DatasetConfig, Variant};
use pokerlm_core::hand_history::{from_json_line, parse_path, to_json_line, write_hand, BlindStructure, HandRecord};
use pokerlm_core::metrics::{
    amount_mse_bb, confusion_matrix, macro_f1, per_class_f1, perplexity, value_pairs, ActionLabel,
};
use pokerlm_core::policies::{parse_action_text, PolicySpec};
use pokerlm_core::sim::{apply_rake, player_sweep, run_match_with_transcripts, MatchReport, MatchSpec};
use pokerlm_core::Chips;
use pokerlm_service::{AdvisorSpec, ServiceConfig};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Serialize)]
#[command(name = "pokerlm", version, about = "Poker hand-history pipeline, simulator and advisor service")]
struct Cli {
    /// Worker threads (default: logical CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Parse hand-history text into `hand_record.v1` JSON lines.
    Parse(ParseArgs),
    /// Per-player win rates, ranking and revenue histograms.
    Analyze(AnalyzeArgs),
    /// Emit SFT/reward JSONL files for one dataset variant.
    BuildDataset(DatasetArgs),
    /// Play policies against each other.
    Simulate(SimulateArgs),
    /// Score predicted actions against the truth.
    Evaluate(EvaluateArgs),
    /// Run the HTTP advisor service.
    Serve(ServeArgs),
    /// Generate a synthetic hand-history corpus from simulated play.
    SynthCorpus(SynthArgs),
}

/// Bad flag combinations found after clap's own checks; exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Args, Debug, Serialize)]
struct ParseArgs {
    /// Files or directories of hand histories.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "hands.jsonl")]
    out: PathBuf,
    /// Exit with status 1 when any hand is rejected.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug, Serialize)]
struct AnalyzeArgs {
    /// Hand files (text or .jsonl) or directories.
    #[arg(long = "hands", required = true, num_args = 1..)]
    hands: Vec<PathBuf>,
    #[arg(long, default_value_t = pokerlm_core::analytics::DEFAULT_MIN_HANDS)]
    min_hands: usize,
    #[arg(long, default_value_t = 20)]
    top: usize,
    /// Per-street revenue histogram for this player.
    #[arg(long)]
    histogram_player: Option<String>,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = 50.0)]
    range_bb: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("variant").args(["raw", "filtered", "preset"])))]
struct DatasetArgs {
    #[arg(long = "hands", required = true, num_args = 1..)]
    hands: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Unprocessed hand text as the prompt.
    #[arg(long)]
    raw: bool,
    /// Structured prompts for every revealed player (the default).
    #[arg(long)]
    filtered: bool,
    /// Win-rate band by name: III (>1500), IV (600-1200), V (0-500), VI (<0).
    #[arg(long, value_parser = ["III", "IV", "V", "VI"])]
    preset: Option<String>,
    /// Keep heroes above this win rate (mbb/h, exclusive; inclusive with --max-winrate).
    #[arg(long, conflicts_with_all = ["raw", "filtered", "preset"])]
    min_winrate: Option<f64>,
    /// Keep heroes below this win rate (mbb/h, exclusive; inclusive with --min-winrate).
    #[arg(long, conflicts_with_all = ["raw", "filtered", "preset"])]
    max_winrate: Option<f64>,
    #[arg(long, default_value_t = pokerlm_core::analytics::DEFAULT_MIN_HANDS)]
    min_hands: usize,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=15))]
    players: u8,
    #[arg(long, default_value_t = 1000)]
    hands: usize,
    /// Policy in the first seat: equity[:samples], random, call, fold, raise, remote:URL.
    #[arg(long, default_value = "equity")]
    policy: String,
    /// Policy for every other seat.
    #[arg(long, default_value = "random")]
    policy_all: String,
    /// Explicit policy per seat (repeat); overrides --policy/--policy-all.
    #[arg(long = "seat-policy")]
    seat_policies: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_rotation: bool,
    #[arg(long, default_value = "0.01")]
    small_blind: Chips,
    #[arg(long, default_value = "0.02")]
    big_blind: Chips,
    #[arg(long, default_value = "2")]
    stack: Chips,
    #[arg(long, default_value_t = 0.01)]
    error_budget: f64,
    /// Also run the hero against the field at each of these player counts.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write every hand played as hand-history text.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    /// JSONL with `label_action`/`label_amount` or a `response` sentence per line; optional `token_probs`.
    #[arg(long)]
    predictions: PathBuf,
    /// JSONL in the same format (e.g. sft_test.jsonl).
    #[arg(long)]
    truth: PathBuf,
    /// Big blind used to express amount errors in bb.
    #[arg(long, default_value_t = 0.05)]
    big_blind: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ServeArgs {
    #[arg(long, env = "POKERLM_LISTEN", default_value = "127.0.0.1:8080")]
    listen: std::net::SocketAddr,
    /// `equity[:samples]` or `remote:URL`.
    #[arg(long, env = "POKERLM_ADVISOR", default_value = "equity")]
    advisor: String,
    #[arg(long, env = "POKERLM_TIMEOUT_SECS", default_value_t = 10)]
    timeout_secs: u64,
    /// Directory for the append-only session logs.
    #[arg(long, env = "POKERLM_STORE")]
    store: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    hands: usize,
    #[arg(long, default_value = "equity:200,equity:200,random,call,raise,random", value_delimiter = ',')]
    policies: Vec<String>,
    /// Player names, one per policy.
    #[arg(long, value_delimiter = ',')]
    names: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "0.02")]
    small_blind: Chips,
    #[arg(long, default_value = "0.05")]
    big_blind: Chips,
    #[arg(long, default_value = "5")]
    stack: Chips,
    #[arg(long, default_value_t = 5.0)]
    rake_percent: f64,
    #[arg(long, default_value = "3")]
    rake_cap: Chips,
    #[arg(long, default_value_t = 300_000_000_000)]
    hand_id_base: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("POKERLM_LOG").unwrap_or_else(|_| "warn".into()),
        )
        .init();
    let mut cli = Cli::parse();
    match run(&mut cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn resolve_seed(seed: &mut Option<u64>) -> u64 {
    *seed.get_or_insert_with(rand::random)
}

fn run(cli: &mut Cli) -> anyhow::Result<()> {
    match &mut cli.command {
        Command::BuildDataset(a) => {
            resolve_seed(&mut a.seed);
        }
        Command::Simulate(a) => {
            resolve_seed(&mut a.seed);
        }
        Command::SynthCorpus(a) => {
            resolve_seed(&mut a.seed);
        }
        _ => {}
    }
    if cli.jobs.is_none() {
        cli.jobs = Some(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    }
    let jobs = cli.jobs.unwrap_or(1);
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().context("starting worker pool")?;
    eprintln!("# effective config: {}", serde_json::to_string(&*cli)?);

    match &cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::BuildDataset(a) => cmd_build_dataset(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Serve(a) => cmd_serve(a),
        Command::SynthCorpus(a) => cmd_synth(a),
    }
}

/// Input files under `paths`, sorted within each directory.
fn expand(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            for e in walkdir::WalkDir::new(p).sort_by_file_name() {
                let e = e?;
                if e.file_type().is_file() {
                    out.push(e.into_path());
                }
            }
        } else if p.exists() {
            out.push(p.clone());
        } else {
            bail!("{} does not exist", p.display());
        }
    }
    Ok(out)
}

struct Loaded {
    hands: Vec<HandRecord>,
    diagnostics: usize,
    rejected: usize,
}

/// Reads hand-history text or `.jsonl` records. Diagnostics go to stderr.
fn load_hands(paths: &[PathBuf]) -> anyhow::Result<Loaded> {
    let mut loaded = Loaded { hands: Vec::new(), diagnostics: 0, rejected: 0 };
    for path in expand(paths)? {
        if path.extension().is_some_and(|x| x == "jsonl") {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                match from_json_line(line) {
                    Ok(r) => loaded.hands.push(r),
                    Err(e) => {
                        eprintln!("{}:{}: {e}", path.display(), i + 1);
                        loaded.rejected += 1;
                        loaded.diagnostics += 1;
                    }
                }
            }
        } else {
            let parsed = parse_path(&path).with_context(|| format!("reading {}", path.display()))?;
            for d in &parsed.diagnostics {
                eprintln!("{}:{}: {}{}", path.display(), d.line, if d.fatal { "rejected: " } else { "" }, d.message);
            }
            loaded.rejected += parsed.fatal_count();
            loaded.diagnostics += parsed.diagnostics.len();
            loaded.hands.extend(parsed.hands);
        }
    }
    Ok(loaded)
}

fn write_out(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_parse(a: &ParseArgs) -> anyhow::Result<()> {
    let loaded = load_hands(&a.inputs)?;
    let mut text = String::new();
    for r in &loaded.hands {
        text.push_str(&to_json_line(r));
        text.push('\n');
    }
    write_out(&a.out, &text)?;
    println!(
        "{} hands, {} diagnostics ({} rejected) -> {}",
        loaded.hands.len(),
        loaded.diagnostics,
        loaded.rejected,
        a.out.display()
    );
    if a.strict && loaded.rejected > 0 {
        bail!("{} hands rejected", loaded.rejected);
    }
    Ok(())
}

#[derive(Serialize)]
struct RankedPlayer {
    rank: usize,
    player: String,
    hands: usize,
    net_bb: f64,
    win_rate_mbb_h: f64,
    stddev_mbb_h: f64,
}

fn cmd_analyze(a: &AnalyzeArgs) -> anyhow::Result<()> {
    let loaded = load_hands(&a.hands)?;
    let stats = compute_stats(&loaded.hands);
    let ranked: Vec<RankedPlayer> = rank_players(&stats, a.min_hands)
        .into_iter()
        .enumerate()
        .map(|(i, s)| RankedPlayer {
            rank: i + 1,
            player: s.player_name,
            hands: s.hands_played,
            net_bb: s.net_bb,
            win_rate_mbb_h: s.win_rate_mbb_h,
            stddev_mbb_h: s.stddev_mbb_h,
        })
        .collect();
    println!("{} hands, {} players, {} with at least {} hands", loaded.hands.len(), stats.len(), ranked.len(), a.min_hands);
    println!("{:>4}  {:<20} {:>7} {:>10} {:>10} {:>9}", "rank", "player", "hands", "net bb", "mbb/h", "± sd");
    for p in ranked.iter().take(a.top) {
        println!(
            "{:>4}  {:<20} {:>7} {:>10.2} {:>10.1} {:>9.1}",
            p.rank, p.player, p.hands, p.net_bb, p.win_rate_mbb_h, p.stddev_mbb_h
        );
    }
    let histogram = a.histogram_player.as_ref().map(|player| {
        let edges = uniform_edges(-a.range_bb, a.range_bb, a.bins);
        let h = staged_revenue_histogram(&loaded.hands, player, &edges);
        for (street, bins) in &h {
            let counts: Vec<String> = bins.iter().map(|b| b.count.to_string()).collect();
            println!("{player} {street}: {}", counts.join(" "));
        }
        h.into_iter().map(|(s, b)| (s.name().to_string(), b)).collect::<BTreeMap<_, _>>()
    });
    if let Some(out) = &a.out {
        let report = serde_json::json!({ "min_hands": a.min_hands, "players": ranked, "histogram": histogram });
        write_out(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(())
}

fn dataset_config(a: &DatasetArgs) -> anyhow::Result<DatasetConfig> {
    let seed = a.seed.expect("seed resolved");
    let (variant, band) = if a.raw {
        (Variant::Raw, WinRateBand::all())
    } else if let Some(p) = &a.preset {
        let band = match p.as_str() {
            "III" => WinRateBand::above(1500.0),
            "IV" => WinRateBand::between(600.0, 1200.0),
            "V" => WinRateBand::between(0.0, 500.0),
            _ => WinRateBand::below(0.0),
        };
        (Variant::Banded, band)
    } else {
        match (a.min_winrate, a.max_winrate) {
            (None, None) => (Variant::Filtered, WinRateBand::all()),
            (Some(lo), None) => (Variant::Banded, WinRateBand::above(lo)),
            (None, Some(hi)) => (Variant::Banded, WinRateBand::below(hi)),
            (Some(lo), Some(hi)) => (Variant::Banded, WinRateBand::between(lo, hi)),
        }
    };
    if !band.is_valid() {
        return Err(usage(format!("empty win-rate band {band}")));
    }
    Ok(DatasetConfig { variant, band, min_hands: a.min_hands, seed })
}

fn cmd_build_dataset(a: &DatasetArgs) -> anyhow::Result<()> {
    let cfg = dataset_config(a)?;
    let loaded = load_hands(&a.hands)?;
    let stats = compute_stats(&loaded.hands);
    let manifest = build_dataset(&loaded.hands, &stats, &cfg, &a.out)?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(())
}

fn policy(spec: &str) -> anyhow::Result<PolicySpec> {
    spec.parse().map_err(|e| usage(format!("{e}")))
}

fn print_report(r: &MatchReport) {
    println!(
        "{} players, {} hands{}{}",
        r.players,
        r.hands_played,
        if r.rotation { ", rotating seats" } else { "" },
        if r.partial { " (PARTIAL: error budget exhausted)" } else { "" }
    );
    println!("{:<8} {:<18} {:>10} {:>10} {:>9} {:>9} {:>10}", "player", "policy", "mbb/h", "sd", "stderr", "inv bb", "resp s");
    for p in &r.policies {
        println!(
            "{:<8} {:<18} {:>10.1} {:>10.1} {:>9.1} {:>9.2} {:>10.5}",
            p.player, p.policy, p.stats.mbb_h, p.stats.stddev, p.stats.stderr, p.stats.avg_investment_bb, p.mean_response_s
        );
    }
}

fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<()> {
    let n = a.players as usize;
    let policies: Vec<PolicySpec> = if a.seat_policies.is_empty() {
        let mut v = vec![policy(&a.policy)?];
        let field = policy(&a.policy_all)?;
        v.extend(std::iter::repeat_n(field, n - 1));
        v
    } else {
        if a.seat_policies.len() != n {
            return Err(usage(format!("{} --seat-policy values for {n} players", a.seat_policies.len())));
        }
        a.seat_policies.iter().map(|s| policy(s)).collect::<anyhow::Result<_>>()?
    };
    if let Some(bad) = a.sweep.iter().find(|c| !(2..=15).contains(*c)) {
        return Err(usage(format!("sweep player count {bad} outside 2-15")));
    }
    let blinds = BlindStructure { small_blind: a.small_blind, big_blind: a.big_blind, currency: "USD".into() };
    if !blinds.is_valid() {
        return Err(usage("blinds must satisfy 0 < small < big"));
    }
    let seed = a.seed.expect("seed resolved");
    let mut spec = MatchSpec::new(policies, a.hands, seed);
    spec.blinds = blinds.clone();
    spec.starting_stack = a.stack;
    spec.rotation = !a.no_rotation;
    spec.error_budget = a.error_budget;
    spec.validate().map_err(|e| usage(e.to_string()))?;

    let (report, records) = run_match_with_transcripts(&spec, a.transcripts.is_some())?;
    print_report(&report);
    let mut sweep = Vec::new();
    if !a.sweep.is_empty() {
        let reports = player_sweep(&spec.policies[0], &policy(&a.policy_all)?, &a.sweep, a.hands, seed)?;
        println!("\nsweep: {} vs {}", spec.policies[0], a.policy_all);
        println!("{:>7} {:>10} {:>9} {:>12}", "players", "mbb/h", "stderr", "resp s");
        for r in &reports {
            let hero = &r.policies[0];
            println!("{:>7} {:>10.1} {:>9.1} {:>12.6}", r.players, hero.stats.mbb_h, hero.stats.stderr, hero.mean_response_s);
        }
        sweep = reports;
    }
    if let Some(path) = &a.transcripts {
        let text: String = records.iter().map(|r| write_hand(r) + "\n\n").collect();
        write_out(path, &text)?;
    }
    if let Some(out) = &a.out {
        let body = serde_json::json!({ "match": report, "sweep": sweep });
        write_out(out, &(serde_json::to_string_pretty(&body)? + "\n"))?;
    }
    if report.partial {
        bail!("match aborted after {} fallback hands", report.fallback_hands);
    }
    Ok(())
}

#[derive(Deserialize)]
struct LabelLine {
    #[serde(default)]
    label_action: Option<String>,
    #[serde(default)]
    label_amount: Option<f64>,
    #[serde(default)]
    response: Option<String>,
    #[serde(default)]
    token_probs: Vec<f64>,
}

fn label_of(line: &LabelLine) -> anyhow::Result<(ActionLabel, f64)> {
    let (name, amount) = match (&line.label_action, &line.response) {
        (Some(a), _) => (a.clone(), line.label_amount.unwrap_or(0.0)),
        (None, Some(text)) => {
            let d = parse_action_text(text)?;
            (pokerlm_core::prompt::action_label(d.kind).to_string(), d.amount.as_f64())
        }
        (None, None) => bail!("line has neither label_action nor response"),
    };
    // a short-stacked all-in only ever matches a call
    let label = if name == "all-in" { ActionLabel::Call } else { name.parse()? };
    Ok((label, amount))
}

fn read_labels(path: &Path) -> anyhow::Result<(Vec<(ActionLabel, f64)>, Vec<f64>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    for (i, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let line: LabelLine = serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        labels.push(label_of(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
        probs.extend(line.token_probs);
    }
    Ok((labels, probs))
}

fn cmd_evaluate(a: &EvaluateArgs) -> anyhow::Result<()> {
    let (pred, probs) = read_labels(&a.predictions)?;
    let (truth, _) = read_labels(&a.truth)?;
    if pred.len() != truth.len() {
        return Err(usage(format!("{} predictions for {} truth lines", pred.len(), truth.len())));
    }
    let pl: Vec<ActionLabel> = pred.iter().map(|p| p.0).collect();
    let tl: Vec<ActionLabel> = truth.iter().map(|p| p.0).collect();
    let m = confusion_matrix(&pl, &tl)?;
    let f1 = macro_f1(&pl, &tl)?;
    let (pv, tv) = value_pairs(&pred, &truth)?;
    let mse = if pv.is_empty() { None } else { Some(amount_mse_bb(&pv, &tv, a.big_blind)?) };
    let ppl = if probs.is_empty() { None } else { Some(perplexity(&probs)?) };
    let names: Vec<&str> = ActionLabel::ALL.iter().map(|l| l.name()).collect();
    println!("samples: {}", pl.len());
    println!("macro F1: {f1:.4}");
    match mse {
        Some(v) => println!("amount MSE (bb^2): {v:.4} over {} bet/raise matches", pv.len()),
        None => println!("amount MSE: n/a (no matching bet/raise)"),
    }
    if let Some(p) = ppl {
        println!("perplexity: {p:.4}");
    }
    println!("confusion (rows truth, cols predicted): {}", names.join(" "));
    for (name, row) in names.iter().zip(&m) {
        println!("{name:>6}: {}", row.iter().map(|c| format!("{c:>6}")).collect::<String>());
    }
    if let Some(out) = &a.out {
        let report = serde_json::json!({
            "samples": pl.len(),
            "macro_f1": f1,
            "per_class_f1": names.iter().zip(per_class_f1(&m)).map(|(n, v)| (n.to_string(), v)).collect::<BTreeMap<_, _>>(),
            "amount_mse_bb": mse,
            "amount_pairs": pv.len(),
            "perplexity": ppl,
            "labels": names,
            "confusion": m,
        });
        write_out(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(())
}

fn cmd_serve(a: &ServeArgs) -> anyhow::Result<()> {
    let advisor = match policy(&a.advisor)? {
        PolicySpec::Equity(p) => AdvisorSpec::Equity { samples: p.samples },
        PolicySpec::Remote { endpoint, retries, .. } => AdvisorSpec::Remote { endpoint, retries },
        other => return Err(usage(format!("advisor must be equity or remote, not {other}"))),
    };
    let config = ServiceConfig {
        listen: a.listen,
        advisor,
        decision_timeout: Duration::from_secs(a.timeout_secs),
        store: a.store.clone(),
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(pokerlm_service::serve(config))
}

fn cmd_synth(a: &SynthArgs) -> anyhow::Result<()> {
    let policies: Vec<PolicySpec> = a.policies.iter().map(|s| policy(s)).collect::<anyhow::Result<_>>()?;
    let mut spec = MatchSpec::new(policies, a.hands, a.seed.expect("seed resolved"));
    spec.blinds = BlindStructure { small_blind: a.small_blind, big_blind: a.big_blind, currency: "USD".into() };
    spec.starting_stack = a.stack;
    spec.hand_id_offset = a.hand_id_base;
    spec.names = a.names.clone();
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let (_, records) = run_match_with_transcripts(&spec, true)?;
    let mut w = BufWriter::new(fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    for mut r in records {
        apply_rake(&mut r, a.rake_percent, a.rake_cap);
        write!(w, "{}\n\n", write_hand(&r))?;
    }
    w.flush()?;
    println!("{} hands -> {}", a.hands, a.out.display());
    Ok(())
}
