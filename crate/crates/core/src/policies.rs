//! Decision makers: Monte-Carlo equity bot, random and scripted players,
//! and a client for a remote model endpoint speaking `policy_http.v1`.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;
use std::time::Duration;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::engine::PolicyDecision;
use crate::cards::{evaluate, full_deck, Card};
use crate::engine::{GameState, LegalActionSet};
use crate::hand_history::ActionKind;
use crate::money::Chips;
use crate::prompt::{snap_amount, DecisionPoint};

/// Wire-format tag of the remote policy protocol.
pub const POLICY_HTTP_VERSION: &str = "policy_http.v1";

/// Fraction of sampled run-outs the hero wins, ties split evenly, against
/// `n_opponents` random hands from the unseen part of a 52-card deck.
pub fn mc_equity(hole: &[Card; 2], board: &[Card], n_opponents: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    mc_equity_in_deck(hole, board, n_opponents, samples, &full_deck(), &mut rng)
}

/// [`mc_equity`] over an arbitrary deck (reduced decks make exhaustive
/// checks tractable).
pub fn mc_equity_in_deck(
    hole: &[Card; 2],
    board: &[Card],
    n_opponents: usize,
    samples: usize,
    deck: &[Card],
    rng: &mut impl Rng,
) -> f64 {
    assert!(n_opponents >= 1, "equity needs at least one opponent");
    let mut rest: Vec<Card> = deck.iter().copied().filter(|c| !hole.contains(c) && !board.contains(c)).collect();
    let missing = 5 - board.len();
    let need = 2 * n_opponents + missing;
    assert!(rest.len() >= need, "deck too small for {n_opponents} opponents");
    let mut cards = [Card::from_index(0); 7];
    cards[..2].copy_from_slice(hole);
    cards[2..2 + board.len()].copy_from_slice(board);
    let mut opp = [Card::from_index(0); 7];
    opp[2..2 + board.len()].copy_from_slice(board);
    let mut total = 0.0;
    for _ in 0..samples.max(1) {
        // partial Fisher-Yates: the first `need` slots become the draw
        for i in 0..need {
            let j = rng.random_range(i..rest.len());
            rest.swap(i, j);
        }
        cards[2 + board.len()..].copy_from_slice(&rest[..missing]);
        opp[2 + board.len()..].copy_from_slice(&rest[..missing]);
        let hero = evaluate(&cards).key();
        let mut ties = 1u32;
        let mut lost = false;
        for k in 0..n_opponents {
            opp[0] = rest[missing + 2 * k];
            opp[1] = rest[missing + 2 * k + 1];
            let v = evaluate(&opp).key();
            if v > hero {
                lost = true;
                break;
            }
            if v == hero {
                ties += 1;
            }
        }
        if !lost {
            total += 1.0 / ties as f64;
        }
    }
    total / samples.max(1) as f64
}

/// Everything a policy sees when asked to act.
pub struct DecisionContext<'a> {
    pub state: &'a GameState,
    pub seat: u8,
    pub legal: &'a LegalActionSet,
    pub rng: &'a mut ChaCha8Rng,
    pub session_id: &'a str,
    pub directive: Option<&'a str>,
}

/// A decision plus how it was reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyOutput {
    pub decision: PolicyDecision,
    /// The policy failed and a safe default was substituted.
    pub fallback: bool,
    /// Free text behind the decision (remote responses).
    pub rationale: Option<String>,
}

impl PolicyOutput {
    pub fn plain(decision: PolicyDecision) -> Self {
        PolicyOutput { decision, fallback: false, rationale: None }
    }
}

pub trait Policy: Send + Sync {
    fn name(&self) -> String;
    /// Always returns a decision legal in `ctx.legal`.
    fn decide(&self, ctx: &mut DecisionContext<'_>) -> PolicyOutput;
    /// Answers a free-text question; local policies do not.
    fn ask(&self, _prompt: &str, _session_id: &str) -> Result<String, PolicyError> {
        Err(PolicyError::Unsupported)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("no action verb found in response `{0}`")]
    Unparseable(String),
    #[error("remote policy failed: {0}")]
    Remote(String),
    #[error("unsupported by this advisor")]
    Unsupported,
    #[error("invalid policy spec `{0}`")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquityParams {
    pub samples: usize,
    /// Fixed thresholds; `None` uses the opponent-count rule.
    pub call_threshold: Option<f64>,
    pub raise_threshold: f64,
}

impl Default for EquityParams {
    fn default() -> Self {
        EquityParams { samples: 1000, call_threshold: None, raise_threshold: 0.6 }
    }
}

impl EquityParams {
    /// Call threshold: 0.3 plus 0.05 per opponent beyond the first, capped
    /// at the raise threshold.
    pub fn call_threshold(&self, n_opponents: usize) -> f64 {
        self.call_threshold
            .unwrap_or(0.3 + 0.05 * (n_opponents.max(1) - 1) as f64)
            .min(self.raise_threshold)
    }
}

/// Threshold rule shared by the equity bot and its tests. Equity exactly at
/// a threshold takes the less aggressive branch.
pub fn equity_decision(
    equity: f64,
    call_threshold: f64,
    raise_threshold: f64,
    legal: &LegalActionSet,
    pot: Chips,
) -> PolicyDecision {
    let passive = if legal.contains(ActionKind::Check) {
        PolicyDecision::check()
    } else if legal.contains(ActionKind::Call) {
        PolicyDecision::call()
    } else {
        PolicyDecision::new(ActionKind::AllIn, legal.max_amount)
    };
    if equity <= call_threshold {
        return legal.safe_fallback();
    }
    if equity <= raise_threshold {
        return passive;
    }
    match legal.aggressive_kind() {
        Some(kind) => {
            let half_pot = Chips((pot.cents() + 1) / 2);
            let target = snap_amount(half_pot, &legal.menu);
            legal.normalize(PolicyDecision::new(kind, target))
        }
        None => passive,
    }
}

pub struct EquityPolicy {
    pub params: EquityParams,
}

impl Policy for EquityPolicy {
    fn name(&self) -> String {
        "equity".into()
    }

    fn decide(&self, ctx: &mut DecisionContext<'_>) -> PolicyOutput {
        let hole = ctx.state.hole_cards(ctx.seat).expect("acting player holds cards");
        let opponents = ctx.state.live_seats().len() - 1;
        let equity = mc_equity_in_deck(&hole, &ctx.state.board(), opponents, self.params.samples, &full_deck(), ctx.rng);
        let d = equity_decision(
            equity,
            self.params.call_threshold(opponents),
            self.params.raise_threshold,
            ctx.legal,
            ctx.state.pot_total(),
        );
        PolicyOutput { decision: d, fallback: false, rationale: Some(format!("equity {equity:.3}")) }
    }
}

/// Uniform over legal kinds; bet/raise sizes uniform over feasible menu
/// entries.
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn name(&self) -> String {
        "random".into()
    }

    fn decide(&self, ctx: &mut DecisionContext<'_>) -> PolicyOutput {
        let legal = ctx.legal;
        let kind = *legal.kinds.choose(ctx.rng).expect("fold is always legal");
        let d = match kind {
            ActionKind::Bet | ActionKind::Raise => {
                let sizes: Vec<Chips> =
                    legal.menu.iter().copied().filter(|a| *a >= legal.min_amount && *a > Chips::ZERO).collect();
                let amount = sizes.choose(ctx.rng).copied().unwrap_or(legal.max_amount);
                legal.normalize(PolicyDecision::new(kind, amount))
            }
            other => legal.normalize(PolicyDecision::new(other, Chips::ZERO)),
        };
        PolicyOutput::plain(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedStyle {
    /// Check or call everything.
    Call,
    /// Check when free, otherwise fold.
    Fold,
    /// Minimum bet or raise whenever possible.
    Raise,
}

pub struct ScriptedPolicy(pub ScriptedStyle);

impl Policy for ScriptedPolicy {
    fn name(&self) -> String {
        match self.0 {
            ScriptedStyle::Call => "call".into(),
            ScriptedStyle::Fold => "fold".into(),
            ScriptedStyle::Raise => "raise".into(),
        }
    }

    fn decide(&self, ctx: &mut DecisionContext<'_>) -> PolicyOutput {
        let legal = ctx.legal;
        let d = match self.0 {
            ScriptedStyle::Fold => legal.safe_fallback(),
            ScriptedStyle::Call => legal.normalize(PolicyDecision::call()),
            ScriptedStyle::Raise => match legal.aggressive_kind() {
                Some(k) => legal.normalize(PolicyDecision::new(k, legal.min_amount)),
                None => legal.normalize(PolicyDecision::call()),
            },
        };
        let d = if d.kind == ActionKind::Call && legal.contains(ActionKind::Check) { PolicyDecision::check() } else { d };
        PolicyOutput::plain(d)
    }
}

static VERB_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(all[- ]?in|fold|check|call|bet|raise)(?:s|ed|ing)?\b").unwrap());
static AMOUNT_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:to\s+|with\s+|of\s+)?[$€£]?(\d+(?:\.\d+)?)").unwrap());

/// Reads an action (and optional amount) out of a free-text response. The
/// first action verb wins; an amount must follow it directly, optionally
/// after `to`.
pub fn parse_action_text(text: &str) -> Result<PolicyDecision, PolicyError> {
    let m = VERB_RE.captures(text).ok_or_else(|| PolicyError::Unparseable(text.to_string()))?;
    let verb = m[1].to_ascii_lowercase();
    let kind = match verb.as_str() {
        "fold" => ActionKind::Fold,
        "check" => ActionKind::Check,
        "call" => ActionKind::Call,
        "bet" => ActionKind::Bet,
        "raise" => ActionKind::Raise,
        _ => ActionKind::AllIn,
    };
    let rest = &text[m.get(0).unwrap().end()..];
    let amount = match kind {
        ActionKind::Bet | ActionKind::Raise | ActionKind::AllIn => AMOUNT_RE
            .captures(rest)
            .and_then(|c| c[1].parse::<Chips>().ok())
            .unwrap_or_default(),
        _ => Chips::ZERO,
    };
    Ok(PolicyDecision::new(kind, amount))
}

/// Response sentence for a decision, e.g. `You should raise to 0.3.`
pub fn format_response(d: &PolicyDecision) -> String {
    match d.kind {
        ActionKind::Bet => format!("You should bet {}.", d.amount),
        ActionKind::Raise => format!("You should raise to {}.", d.amount),
        ActionKind::AllIn if d.amount.is_zero() => "You should all-in.".to_string(),
        ActionKind::AllIn => format!("You should all-in {}.", d.amount),
        other => format!("You should {}.", other.name()),
    }
}

/// Maps a parsed response onto the offered actions: amounts snap up to the
/// menu and the result is made legal.
pub fn fit_to_legal(parsed: PolicyDecision, legal: &LegalActionSet) -> PolicyDecision {
    match parsed.kind {
        ActionKind::Bet | ActionKind::Raise => {
            let snapped = snap_amount(parsed.amount, &legal.menu);
            legal.normalize(PolicyDecision::new(parsed.kind, snapped))
        }
        _ => legal.normalize(parsed),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub timeout: Duration,
    pub retries: u32,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig { endpoint: endpoint.into(), timeout: Duration::from_secs(10), retries: 0 }
    }
}

#[derive(Debug, Serialize)]
struct RemoteRequest<'a> {
    prompt: &'a str,
    session_id: &'a str,
}

#[derive(Debug, Deserialize)]
struct RemoteResponse {
    text: String,
}

/// Client for an external model: POSTs `{prompt, session_id}` and expects
/// `{text}` back.
pub struct RemotePolicy {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemotePolicy {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(config.timeout)).build().into();
        RemotePolicy { config, agent }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    /// One round trip with retries; returns the response text.
    pub fn query(&self, prompt: &str, session_id: &str) -> Result<String, PolicyError> {
        let mut last = String::new();
        for _ in 0..=self.config.retries {
            let sent = self.agent.post(&self.config.endpoint).send_json(&RemoteRequest { prompt, session_id });
            match sent {
                Ok(mut resp) => match resp.body_mut().read_json::<RemoteResponse>() {
                    Ok(r) => return Ok(r.text),
                    Err(e) => last = format!("bad response body: {e}"),
                },
                Err(e) => last = e.to_string(),
            }
        }
        Err(PolicyError::Remote(last))
    }

    /// Prompt text, query, parse and fit; failures degrade to check/fold.
    pub fn decide_prompt(&self, prompt: &str, session_id: &str, legal: &LegalActionSet) -> PolicyOutput {
        let result = self.query(prompt, session_id).and_then(|text| parse_action_text(&text).map(|d| (d, text)));
        match result {
            Ok((parsed, text)) => PolicyOutput { decision: fit_to_legal(parsed, legal), fallback: false, rationale: Some(text) },
            Err(e) => {
                tracing::warn!(endpoint = %self.config.endpoint, session = session_id, error = %e, "remote policy incident; using fallback");
                PolicyOutput { decision: legal.safe_fallback(), fallback: true, rationale: Some(e.to_string()) }
            }
        }
    }
}

impl Policy for RemotePolicy {
    fn name(&self) -> String {
        format!("remote:{}", self.config.endpoint)
    }

    fn decide(&self, ctx: &mut DecisionContext<'_>) -> PolicyOutput {
        let prompt = match DecisionPoint::from_state(ctx.state, ctx.seat, &Default::default()) {
            Ok(dp) => dp.render(ctx.directive),
            Err(e) => {
                tracing::warn!(error = %e, "cannot build prompt; using fallback");
                return PolicyOutput { decision: ctx.legal.safe_fallback(), fallback: true, rationale: Some(e.to_string()) };
            }
        };
        self.decide_prompt(&prompt, ctx.session_id, ctx.legal)
    }

    fn ask(&self, prompt: &str, session_id: &str) -> Result<String, PolicyError> {
        self.query(prompt, session_id)
    }
}

/// Textual policy configuration: `equity`, `equity:500` (samples),
/// `random`, `call`, `fold`, `raise`, `remote:<url>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum PolicySpec {
    Equity(EquityParams),
    Random,
    Scripted { style: ScriptedStyle },
    Remote { endpoint: String, timeout_ms: u64, retries: u32 },
}

impl PolicySpec {
    pub fn build(&self) -> Box<dyn Policy> {
        match self {
            PolicySpec::Equity(p) => Box::new(EquityPolicy { params: *p }),
            PolicySpec::Random => Box::new(RandomPolicy),
            PolicySpec::Scripted { style } => Box::new(ScriptedPolicy(*style)),
            PolicySpec::Remote { endpoint, timeout_ms, retries } => Box::new(RemotePolicy::new(RemoteConfig {
                endpoint: endpoint.clone(),
                timeout: Duration::from_millis(*timeout_ms),
                retries: *retries,
            })),
        }
    }

    pub fn is_remote(&self) -> bool {
        matches!(self, PolicySpec::Remote { .. })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Equity(p) if p.samples == EquityParams::default().samples => f.write_str("equity"),
            PolicySpec::Equity(p) => write!(f, "equity:{}", p.samples),
            PolicySpec::Random => f.write_str("random"),
            PolicySpec::Scripted { style } => f.write_str(ScriptedPolicy(*style).name().as_str()),
            PolicySpec::Remote { endpoint, .. } => write!(f, "remote:{endpoint}"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = PolicyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        Ok(match (head, arg) {
            ("equity", None) => PolicySpec::Equity(EquityParams::default()),
            ("equity", Some(n)) => PolicySpec::Equity(EquityParams {
                samples: n.parse().map_err(|_| PolicyError::Spec(s.to_string()))?,
                ..EquityParams::default()
            }),
            ("random", None) => PolicySpec::Random,
            ("call", None) => PolicySpec::Scripted { style: ScriptedStyle::Call },
            ("fold", None) => PolicySpec::Scripted { style: ScriptedStyle::Fold },
            ("raise", None) => PolicySpec::Scripted { style: ScriptedStyle::Raise },
            ("remote", Some(url)) if url.starts_with("http://") || url.starts_with("https://") => {
                PolicySpec::Remote { endpoint: url.to_string(), timeout_ms: 10_000, retries: 0 }
            }
            _ => return Err(PolicyError::Spec(s.to_string())),
        })
    }
}
