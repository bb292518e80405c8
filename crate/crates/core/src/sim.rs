//! Policy-vs-policy matches: seat rotation, parallel hand execution,
//! error budgets for remote players, and per-policy reports.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Dealing, EngineError, GameState, Phase, TableConfig, MAX_PLAYERS, MIN_PLAYERS};
use crate::hand_history::{BlindStructure, HandRecord, SeatEntry};
use crate::metrics::{HeroGame, MatchStats};
use crate::money::Chips;
use crate::policies::{DecisionContext, Policy, PolicySpec, RandomPolicy};

/// Hands processed between error-budget checks.
const CHUNK: usize = 250;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSpec {
    /// One policy per seat, in seat order.
    pub policies: Vec<PolicySpec>,
    pub hands: usize,
    pub blinds: BlindStructure,
    pub starting_stack: Chips,
    pub base_seed: u64,
    pub rotation: bool,
    /// Fraction of hands allowed to need a fallback decision.
    pub error_budget: f64,
    /// First hand id; hand `i` gets `hand_id_offset + i + 1`.
    #[serde(default)]
    pub hand_id_offset: u64,
    /// Player names per policy; defaults to `p1`..`pn`.
    #[serde(default)]
    pub names: Vec<String>,
}

impl MatchSpec {
    pub fn new(policies: Vec<PolicySpec>, hands: usize, base_seed: u64) -> MatchSpec {
        MatchSpec {
            policies,
            hands,
            blinds: BlindStructure { small_blind: Chips(1), big_blind: Chips(2), currency: "USD".into() },
            starting_stack: Chips(200),
            base_seed,
            rotation: true,
            error_budget: 0.01,
            hand_id_offset: 0,
            names: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.policies.len();
        if !(MIN_PLAYERS..=MAX_PLAYERS).contains(&n) {
            return Err(SimError::Spec(format!("{n} seats; supported range is {MIN_PLAYERS}-{MAX_PLAYERS}")));
        }
        if self.hands == 0 {
            return Err(SimError::Spec("hands must be at least 1".into()));
        }
        if !self.blinds.is_valid() || self.starting_stack <= Chips::ZERO {
            return Err(SimError::Spec("blinds must satisfy 0 < small < big and stacks must be positive".into()));
        }
        if !self.names.is_empty() && self.names.len() != n {
            return Err(SimError::Spec(format!("{} names for {n} policies", self.names.len())));
        }
        if !(0.0..=1.0).contains(&self.error_budget) {
            return Err(SimError::Spec("error budget must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn name(&self, p: usize) -> String {
        self.names.get(p).cloned().unwrap_or_else(|| format!("p{}", p + 1))
    }

    /// Fallback hands tolerated before aborting.
    pub fn allowed_fallback_hands(&self) -> usize {
        (self.error_budget * self.hands as f64).floor() as usize
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid match: {0}")]
    Spec(String),
    #[error("engine rejected a normalized decision in hand {hand}: {source}")]
    Engine { hand: usize, source: EngineError },
}

/// Policy index sitting at each seat (seat `k` is `assignment[k]`).
///
/// With rotation, policies shift one seat per hand against a fixed button,
/// so every policy visits every position once per `n` hands. Without it
/// seats are fixed and the button moves instead.
pub fn seat_rotation(n: usize, rotation: bool, hand_index: usize) -> Vec<usize> {
    if !rotation {
        return (0..n).collect();
    }
    (0..n).map(|k| (k + n - hand_index % n) % n).collect()
}

fn dealer_index(n: usize, rotation: bool, hand_index: usize) -> usize {
    if rotation {
        0
    } else {
        hand_index % n
    }
}

/// Per-hand seed.
pub fn hand_seed(base_seed: u64, hand_index: usize) -> u64 {
    base_seed ^ hand_index as u64
}

#[derive(Debug, Clone)]
struct HandOutcome {
    /// Indexed by policy.
    games: Vec<HeroGame>,
    deltas: Vec<Chips>,
    decision_secs: Vec<Vec<f64>>,
    fallbacks: usize,
    record: Option<HandRecord>,
}

/// Plays hand `hand_index` of `spec` with freshly restored stacks.
fn play_hand(
    spec: &MatchSpec,
    policies: &[Box<dyn Policy>],
    hand_index: usize,
    keep_record: bool,
) -> Result<HandOutcome, SimError> {
    let n = policies.len();
    let assignment = seat_rotation(n, spec.rotation, hand_index);
    let seed = hand_seed(spec.base_seed, hand_index);
    let seats = assignment
        .iter()
        .enumerate()
        .map(|(k, &p)| SeatEntry { seat_no: k as u8 + 1, player_name: spec.name(p), starting_stack: spec.starting_stack })
        .collect();
    let config = TableConfig {
        hand_id: (spec.hand_id_offset + hand_index as u64 + 1).to_string(),
        table_name: "Sim".into(),
        max_seats: n as u8,
        blinds: spec.blinds.clone(),
        seats,
        dealer_seat: dealer_index(n, spec.rotation, hand_index) as u8 + 1,
        dealing: Dealing::Shuffled { seed },
        hole_cards: Default::default(),
    };
    let mut state = GameState::new(config).map_err(|source| SimError::Engine { hand: hand_index, source })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let session = format!("sim-{}-{hand_index}", spec.base_seed);
    let mut decision_secs = vec![Vec::new(); n];
    let mut fallbacks = 0;
    while let Some(legal) = state.legal_actions() {
        let seat = legal.seat;
        let p = assignment[seat as usize - 1];
        let started = Instant::now();
        let out = {
            let mut ctx =
                DecisionContext { state: &state, seat, legal: &legal, rng: &mut rng, session_id: &session, directive: None };
            policies[p].decide(&mut ctx)
        };
        decision_secs[p].push(started.elapsed().as_secs_f64());
        fallbacks += out.fallback as usize;
        if let Err(e) = state.apply_action(out.decision) {
            tracing::warn!(hand = hand_index, policy = p, error = %e, "illegal policy decision; folding");
            fallbacks += 1;
            state
                .apply_action(legal.safe_fallback())
                .map_err(|source| SimError::Engine { hand: hand_index, source })?;
        }
        debug_assert!(state.check_conservation());
    }
    assert_eq!(state.phase(), Phase::Complete, "shuffled hands run to completion");
    let record = state.to_record();
    let mut games = Vec::with_capacity(n);
    let mut deltas = vec![Chips::ZERO; n];
    for p in 0..n {
        let name = spec.name(p);
        games.push(HeroGame::from_record(&record, &name).expect("every policy is seated"));
        deltas[p] = record.results[&name];
    }
    debug_assert_eq!(deltas.iter().copied().sum::<Chips>(), Chips::ZERO);
    Ok(HandOutcome { games, deltas, decision_secs, fallbacks, record: keep_record.then_some(record) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub policy: String,
    pub player: String,
    #[serde(flatten)]
    pub stats: MatchStats,
    pub net_bb: f64,
    pub decisions: usize,
    pub mean_response_s: f64,
    pub response_stddev_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub players: usize,
    pub hands_requested: usize,
    pub hands_played: usize,
    pub base_seed: u64,
    pub rotation: bool,
    pub fallback_hands: usize,
    /// The error budget was exhausted and the match stopped early.
    pub partial: bool,
    pub policies: Vec<PolicyReport>,
}

impl MatchReport {
    /// Copy with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> MatchReport {
        let mut r = self.clone();
        for p in &mut r.policies {
            p.mean_response_s = 0.0;
            p.response_stddev_s = 0.0;
        }
        r
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_match(spec: &MatchSpec) -> Result<MatchReport, SimError> {
    run_match_with_transcripts(spec, false).map(|(r, _)| r)
}

/// Runs the match; with `transcripts` also returns every hand played.
pub fn run_match_with_transcripts(spec: &MatchSpec, transcripts: bool) -> Result<(MatchReport, Vec<HandRecord>), SimError> {
    spec.validate()?;
    let policies: Vec<Box<dyn Policy>> = spec.policies.iter().map(PolicySpec::build).collect();
    let n = policies.len();
    let allowed = spec.allowed_fallback_hands();
    let mut outcomes: Vec<HandOutcome> = Vec::with_capacity(spec.hands);
    let mut fallback_hands = 0;
    let mut partial = false;
    for start in (0..spec.hands).step_by(CHUNK) {
        let end = (start + CHUNK).min(spec.hands);
        let chunk: Vec<HandOutcome> = (start..end)
            .into_par_iter()
            .map(|i| play_hand(spec, &policies, i, transcripts))
            .collect::<Result<_, _>>()?;
        for o in chunk {
            fallback_hands += (o.fallbacks > 0) as usize;
            outcomes.push(o);
            if fallback_hands > allowed {
                partial = true;
                break;
            }
        }
        if partial {
            tracing::warn!(fallback_hands, allowed, played = outcomes.len(), "error budget exhausted; aborting match");
            break;
        }
    }

    let mut reports = Vec::with_capacity(n);
    for p in 0..n {
        let games: Vec<HeroGame> = outcomes.iter().map(|o| o.games[p].clone()).collect();
        let times: Vec<f64> = outcomes.iter().flat_map(|o| o.decision_secs[p].iter().copied()).collect();
        let (mean_t, sd_t) = mean_sd(&times);
        reports.push(PolicyReport {
            policy: spec.policies[p].to_string(),
            player: spec.name(p),
            stats: MatchStats::from_games(&games),
            net_bb: outcomes.iter().map(|o| o.deltas[p].in_bb(spec.blinds.big_blind)).sum(),
            decisions: times.len(),
            mean_response_s: mean_t,
            response_stddev_s: sd_t,
        });
    }
    let records = outcomes.iter_mut().filter_map(|o| o.record.take()).collect();
    Ok((
        MatchReport {
            players: n,
            hands_requested: spec.hands,
            hands_played: outcomes.len(),
            base_seed: spec.base_seed,
            rotation: spec.rotation,
            fallback_hands,
            partial,
            policies: reports,
        },
        records,
    ))
}

/// One hero policy against a field of identical opponents, for each
/// player count.
pub fn player_sweep(
    hero: &PolicySpec,
    field: &PolicySpec,
    counts: &[usize],
    hands: usize,
    base_seed: u64,
) -> Result<Vec<MatchReport>, SimError> {
    counts
        .iter()
        .map(|&n| {
            let mut policies = vec![hero.clone()];
            policies.extend(std::iter::repeat_n(field.clone(), n.saturating_sub(1)));
            run_match(&MatchSpec::new(policies, hands, base_seed))
        })
        .collect()
}

/// Decision states reached by random play at an `n`-player table.
pub fn sample_states(n: usize, count: usize, seed: u64) -> Vec<GameState> {
    let spec = MatchSpec::new(vec![PolicySpec::Random; n], 1, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut hand = 0u64;
    while out.len() < count {
        let cfg = TableConfig::uniform(n, spec.blinds.clone(), spec.starting_stack, 1, seed.wrapping_add(hand));
        let mut state = GameState::new(cfg).expect("uniform table is valid");
        while let Some(legal) = state.legal_actions() {
            if out.len() < count {
                out.push(state.clone());
            }
            let d = {
                let mut ctx =
                    DecisionContext { state: &state, seat: legal.seat, legal: &legal, rng: &mut rng, session_id: "", directive: None };
                RandomPolicy.decide(&mut ctx).decision
            };
            state.apply_action(d).expect("random policy stays legal");
        }
        hand += 1;
    }
    out
}

/// Mean and sample standard deviation of `policy`'s decision time over
/// `states`, in seconds.
pub fn measure_response_time(policy: &dyn Policy, states: &[GameState], seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times: Vec<f64> = states
        .iter()
        .filter_map(|s| {
            let legal = s.legal_actions()?;
            let mut ctx = DecisionContext { state: s, seat: legal.seat, legal: &legal, rng: &mut rng, session_id: "timing", directive: None };
            let t = Instant::now();
            let _ = policy.decide(&mut ctx);
            Some(t.elapsed().as_secs_f64())
        })
        .collect();
    mean_sd(&times)
}

/// Takes `percent` of the pot, rounded down and capped, out of the winners'
/// collections, in order. Hands ending before the flop are not raked.
pub fn apply_rake(record: &mut HandRecord, percent: f64, cap: Chips) {
    if record.board.is_empty() {
        return;
    }
    let rake = Chips((record.pot_total.0 as f64 * percent / 100.0).floor() as i64).min(cap);
    let mut left = rake;
    for c in record.collected.iter_mut() {
        let take = left.min(c.amount);
        c.amount -= take;
        left -= take;
        if let Some(r) = record.results.get_mut(&c.player) {
            *r -= take;
        }
    }
    record.collected.retain(|c| !c.amount.is_zero());
    record.rake = rake - left;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::ScriptedStyle;

    #[test]
    fn rotation_cycles() {
        assert_eq!(seat_rotation(2, true, 0), vec![0, 1]);
        assert_eq!(seat_rotation(2, true, 1), vec![1, 0]);
        assert_eq!(seat_rotation(3, false, 7), vec![0, 1, 2]);
        let n = 6;
        for p in 0..n {
            let mut seen: Vec<usize> =
                (0..n).map(|h| seat_rotation(n, true, h).iter().position(|&q| q == p).unwrap()).collect();
            seen.sort();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn deterministic_and_zero_sum() {
        let spec = MatchSpec::new(vec![PolicySpec::Random, PolicySpec::Scripted { style: ScriptedStyle::Call }, PolicySpec::Random], 300, 5);
        let a = run_match(&spec).unwrap();
        let b = run_match(&spec).unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
        assert_eq!(a.hands_played, 300);
        let net: f64 = a.policies.iter().map(|p| p.net_bb).sum();
        assert!(net.abs() < 1e-6, "net {net}");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(run_match(&MatchSpec::new(vec![PolicySpec::Random], 10, 1)).is_err());
        assert!(run_match(&MatchSpec::new(vec![PolicySpec::Random; 16], 10, 1)).is_err());
        assert!(run_match(&MatchSpec::new(vec![PolicySpec::Random; 2], 0, 1)).is_err());
    }

    #[test]
    fn dead_remote_exhausts_budget() {
        let remote = PolicySpec::Remote { endpoint: "http://127.0.0.1:9/none".into(), timeout_ms: 200, retries: 0 };
        let mut spec = MatchSpec::new(vec![remote, PolicySpec::Random], 300, 2);
        spec.error_budget = 0.01;
        let r = run_match(&spec).unwrap();
        assert!(r.partial);
        assert_eq!(r.fallback_hands, spec.allowed_fallback_hands() + 1);
    }

    #[test]
    fn raked_hands_balance() {
        let spec = MatchSpec::new(vec![PolicySpec::Scripted { style: ScriptedStyle::Call }; 3], 10, 4);
        let (_, records) = run_match_with_transcripts(&spec, true).unwrap();
        for mut r in records {
            apply_rake(&mut r, 5.0, Chips(3));
            let net: Chips = r.results.values().copied().sum();
            assert_eq!(net, -r.rake);
            assert!(r.rake <= Chips(3));
            let back = crate::hand_history::parse_hand(&crate::hand_history::write_hand(&r)).unwrap().record;
            assert_eq!(back.results, r.results);
            assert_eq!(back.rake, r.rake);
        }
    }

    #[test]
    fn transcripts_are_writable() {
        let spec = MatchSpec::new(vec![PolicySpec::Random; 4], 20, 11);
        let (_, records) = run_match_with_transcripts(&spec, true).unwrap();
        assert_eq!(records.len(), 20);
        for r in &records {
            let text = crate::hand_history::write_hand(r);
            let back = crate::hand_history::parse_hand(&text).unwrap().record;
            assert_eq!(back.results, r.results);
        }
    }
}
