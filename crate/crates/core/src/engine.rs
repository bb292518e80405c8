//! No-limit hold'em state machine for 2 to 15 players.
//!
//! Seats are kept in ascending seat-number order; position arithmetic
//! (blinds, action order, odd chips) walks that ring clockwise from the
//! dealer. Chips move only through [`GameState::apply_action`], forced
//! blinds and the final award, and [`GameState::check_conservation`] holds
//! after every transition.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{self, evaluate, Card, CardError, HandCategory, HandValue};
use crate::hand_history::{
    ActionEvent, ActionKind, BlindKind, BlindStructure, BoardCard, Collection, HandRecord, SeatEntry, Street,
    UncalledBet,
};
use crate::money::Chips;
use crate::prompt::amount_menu;

pub const MIN_PLAYERS: usize = 2;
pub const MAX_PLAYERS: usize = 15;

/// How cards reach the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Dealing {
    /// Seeded shuffle; the engine deals hole and board cards itself.
    Shuffled { seed: u64 },
    /// Cards are supplied from outside (log replay, live sessions).
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableConfig {
    #[serde(default = "default_hand_id")]
    pub hand_id: String,
    #[serde(default = "default_table_name")]
    pub table_name: String,
    #[serde(default)]
    pub max_seats: u8,
    pub blinds: BlindStructure,
    pub seats: Vec<SeatEntry>,
    pub dealer_seat: u8,
    pub dealing: Dealing,
    /// Hole cards known up front (hero cards in a live session).
    #[serde(default)]
    pub hole_cards: BTreeMap<u8, [Card; 2]>,
}

fn default_hand_id() -> String {
    "1".to_string()
}

fn default_table_name() -> String {
    "Sim".to_string()
}

impl TableConfig {
    /// `n` players in seats 1..=n named `p1`..`pn`, all with `stack`.
    pub fn uniform(n: usize, blinds: BlindStructure, stack: Chips, dealer_seat: u8, seed: u64) -> TableConfig {
        let seats = (1..=n)
            .map(|i| SeatEntry { seat_no: i as u8, player_name: format!("p{i}"), starting_stack: stack })
            .collect();
        TableConfig {
            hand_id: default_hand_id(),
            table_name: default_table_name(),
            max_seats: n as u8,
            blinds,
            seats,
            dealer_seat,
            dealing: Dealing::Shuffled { seed },
            hole_cards: BTreeMap::new(),
        }
    }

    pub fn num_players(&self) -> usize {
        self.seats.len()
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let n = self.seats.len();
        if !(MIN_PLAYERS..=MAX_PLAYERS).contains(&n) {
            return Err(EngineError::config(format!("{n} players; supported range is {MIN_PLAYERS}-{MAX_PLAYERS}")));
        }
        if !self.blinds.is_valid() {
            return Err(EngineError::config(format!(
                "blinds {}/{} must satisfy 0 < small < big",
                self.blinds.small_blind, self.blinds.big_blind
            )));
        }
        for (i, s) in self.seats.iter().enumerate() {
            if s.seat_no == 0 {
                return Err(EngineError::config("seat numbers start at 1"));
            }
            if s.starting_stack <= Chips::ZERO {
                return Err(EngineError::config(format!("seat {} has a non-positive stack", s.seat_no)));
            }
            for t in &self.seats[..i] {
                if t.seat_no == s.seat_no {
                    return Err(EngineError::config(format!("seat {} assigned twice", s.seat_no)));
                }
                if t.player_name == s.player_name {
                    return Err(EngineError::config(format!("player {} seated twice", s.player_name)));
                }
            }
        }
        if !self.seats.iter().any(|s| s.seat_no == self.dealer_seat) {
            return Err(EngineError::config(format!("dealer seat {} is empty", self.dealer_seat)));
        }
        for seat in self.hole_cards.keys() {
            if !self.seats.iter().any(|s| s.seat_no == *seat) {
                return Err(EngineError::config(format!("hole cards for empty seat {seat}")));
            }
        }
        cards::ensure_distinct(self.hole_cards.values().map(|h| &h[..])).map_err(EngineError::Cards)?;
        Ok(())
    }
}

/// A decision: kind plus the chips this action adds to the pot.
///
/// For `bet`/`raise`/`all-in` the amount is money paid by this action (the
/// quantity the amount menu discretises); `call`, `check` and `fold` carry
/// 0 and the engine fills in the call price. An `all-in` with amount 0
/// means "everything behind".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub kind: ActionKind,
    pub amount: Chips,
}

impl PolicyDecision {
    pub fn new(kind: ActionKind, amount: Chips) -> Self {
        PolicyDecision { kind, amount }
    }
    pub fn fold() -> Self {
        Self::new(ActionKind::Fold, Chips::ZERO)
    }
    pub fn check() -> Self {
        Self::new(ActionKind::Check, Chips::ZERO)
    }
    pub fn call() -> Self {
        Self::new(ActionKind::Call, Chips::ZERO)
    }
    pub fn bet(amount: Chips) -> Self {
        Self::new(ActionKind::Bet, amount)
    }
    pub fn raise(amount: Chips) -> Self {
        Self::new(ActionKind::Raise, amount)
    }
    pub fn all_in() -> Self {
        Self::new(ActionKind::AllIn, Chips::ZERO)
    }
}

impl fmt::Display for PolicyDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ActionKind::Bet | ActionKind::Raise => write!(f, "{} {}", self.kind, self.amount),
            _ => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid table config: {0}")]
    Config(String),
    #[error("illegal action ({rule}): {message}")]
    Illegal { rule: &'static str, message: String },
    #[error(transparent)]
    Cards(#[from] CardError),
}

impl EngineError {
    fn config(m: impl Into<String>) -> Self {
        EngineError::Config(m.into())
    }

    fn illegal(rule: &'static str, m: impl Into<String>) -> Self {
        EngineError::Illegal { rule, message: m.into() }
    }

    /// Short machine-readable name of the violated rule.
    pub fn rule(&self) -> &'static str {
        match self {
            EngineError::Config(_) => "invalid_config",
            EngineError::Illegal { rule, .. } => rule,
            EngineError::Cards(_) => "invalid_cards",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Betting,
    /// External dealing: the next street's cards must be revealed.
    AwaitingBoard,
    /// All betting done; contenders' hole cards are not all known.
    AwaitingShowdown,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pot {
    pub amount: Chips,
    /// Seat numbers eligible to win this pot.
    pub eligible: Vec<u8>,
}

/// What the player to act may do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalActionSet {
    pub seat: u8,
    /// Ordered as the prompt lists them: fold, check, raise, call, bet, all-in.
    pub kinds: Vec<ActionKind>,
    pub call_amount: Chips,
    /// Smallest chips-added amount for a non-all-in bet or raise.
    pub min_amount: Chips,
    /// Everything behind.
    pub max_amount: Chips,
    pub menu: Vec<Chips>,
}

impl LegalActionSet {
    pub fn contains(&self, kind: ActionKind) -> bool {
        self.kinds.contains(&kind)
    }

    /// The legal aggressive kind here (`bet` or `raise`), if any.
    pub fn aggressive_kind(&self) -> Option<ActionKind> {
        [ActionKind::Bet, ActionKind::Raise].into_iter().find(|k| self.contains(*k))
    }

    /// Cheapest passive continuation: check if free, else fold.
    pub fn safe_fallback(&self) -> PolicyDecision {
        if self.contains(ActionKind::Check) {
            PolicyDecision::check()
        } else {
            PolicyDecision::fold()
        }
    }

    /// Coerces a decision into a legal one of the same intent: bet/raise
    /// amounts are lifted to the minimum and capped at the stack, all-in
    /// is re-expressed as whatever it amounts to, and an impossible kind
    /// degrades to check/call/fold.
    pub fn normalize(&self, d: PolicyDecision) -> PolicyDecision {
        match d.kind {
            ActionKind::Bet | ActionKind::Raise => {
                let Some(kind) = self.aggressive_kind() else {
                    if self.contains(ActionKind::AllIn) {
                        return PolicyDecision::all_in();
                    }
                    return self.passive();
                };
                let amount = d.amount.max(self.min_amount).min(self.max_amount);
                if amount == self.max_amount {
                    PolicyDecision::new(ActionKind::AllIn, amount)
                } else {
                    PolicyDecision::new(kind, amount)
                }
            }
            ActionKind::AllIn => PolicyDecision::new(ActionKind::AllIn, self.max_amount),
            ActionKind::Call if !self.contains(ActionKind::Call) => {
                if self.contains(ActionKind::AllIn) {
                    PolicyDecision::new(ActionKind::AllIn, self.max_amount)
                } else {
                    self.safe_fallback()
                }
            }
            ActionKind::Check if !self.contains(ActionKind::Check) => PolicyDecision::fold(),
            _ => PolicyDecision::new(d.kind, Chips::ZERO),
        }
    }

    fn passive(&self) -> PolicyDecision {
        if self.contains(ActionKind::Check) {
            PolicyDecision::check()
        } else if self.contains(ActionKind::Call) {
            PolicyDecision::call()
        } else {
            PolicyDecision::fold()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameState {
    config: TableConfig,
    names: Vec<String>,
    seat_nos: Vec<u8>,
    dealer: usize,
    sb: usize,
    bb: usize,
    street: Street,
    phase: Phase,
    deck: Vec<Card>,
    board: Vec<BoardCard>,
    holes: Vec<Option<[Card; 2]>>,
    starting: Vec<Chips>,
    stacks: Vec<Chips>,
    street_contrib: Vec<Chips>,
    total_contrib: Vec<Chips>,
    folded: Vec<bool>,
    all_in: Vec<bool>,
    acted: Vec<bool>,
    can_raise: Vec<bool>,
    to_act: Option<usize>,
    last_aggressor: Option<usize>,
    aggressor_street: Street,
    current_bet: Chips,
    min_raise: Chips,
    history: Vec<ActionEvent>,
    uncalled: Vec<UncalledBet>,
    payouts: Vec<Chips>,
    collections: Vec<Collection>,
    shown: Vec<usize>,
}

/// Deals a new hand: posts blinds, deals hole cards when shuffling, and
/// hands the action to the first player after the big blind.
pub fn new_hand(config: TableConfig) -> Result<GameState, EngineError> {
    GameState::new(config)
}

impl GameState {
    pub fn new(mut config: TableConfig) -> Result<GameState, EngineError> {
        config.validate()?;
        config.seats.sort_by_key(|s| s.seat_no);
        if config.max_seats < config.seats.len() as u8 {
            config.max_seats = config.seats.len() as u8;
        }
        let n = config.seats.len();
        let names = config.seats.iter().map(|s| s.player_name.clone()).collect();
        let seat_nos: Vec<u8> = config.seats.iter().map(|s| s.seat_no).collect();
        let starting: Vec<Chips> = config.seats.iter().map(|s| s.starting_stack).collect();
        let dealer = seat_nos.iter().position(|s| *s == config.dealer_seat).expect("validated");
        let (sb, bb) = if n == 2 { (dealer, (dealer + 1) % n) } else { ((dealer + 1) % n, (dealer + 2) % n) };

        let mut holes: Vec<Option<[Card; 2]>> = seat_nos.iter().map(|s| config.hole_cards.get(s).copied()).collect();
        let mut deck = Vec::new();
        if let Dealing::Shuffled { seed } = config.dealing {
            let known: Vec<Card> = config.hole_cards.values().flatten().copied().collect();
            deck = cards::full_deck().into_iter().filter(|c| !known.contains(c)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            deck.shuffle(&mut rng);
            for h in holes.iter_mut().filter(|h| h.is_none()) {
                let a = deck.pop().expect("deck holds enough cards for 15 players");
                let b = deck.pop().expect("deck holds enough cards for 15 players");
                *h = Some([a, b]);
            }
        }

        let big = config.blinds.big_blind;
        let mut state = GameState {
            names,
            seat_nos,
            dealer,
            sb,
            bb,
            street: Street::Preflop,
            phase: Phase::Betting,
            deck,
            board: Vec::new(),
            holes,
            stacks: starting.clone(),
            starting,
            street_contrib: vec![Chips::ZERO; n],
            total_contrib: vec![Chips::ZERO; n],
            folded: vec![false; n],
            all_in: vec![false; n],
            acted: vec![false; n],
            can_raise: vec![true; n],
            to_act: None,
            last_aggressor: None,
            aggressor_street: Street::Preflop,
            current_bet: Chips::ZERO,
            min_raise: big,
            history: Vec::new(),
            uncalled: Vec::new(),
            payouts: vec![Chips::ZERO; n],
            collections: Vec::new(),
            shown: Vec::new(),
            config,
        };
        state.post_blind(sb, BlindKind::Small, state.config.blinds.small_blind);
        state.post_blind(bb, BlindKind::Big, big);
        state.current_bet = big;
        state.to_act = Some(bb);
        state.after_action(bb);
        debug_assert!(state.check_conservation());
        Ok(state)
    }

    fn post_blind(&mut self, i: usize, kind: BlindKind, amount: Chips) {
        let paid = amount.min(self.stacks[i]);
        self.move_chips(i, paid);
        self.history.push(ActionEvent::post(self.names[i].clone(), kind, paid));
    }

    fn move_chips(&mut self, i: usize, amount: Chips) {
        self.stacks[i] -= amount;
        self.street_contrib[i] += amount;
        self.total_contrib[i] += amount;
        if self.stacks[i].is_zero() {
            self.all_in[i] = true;
        }
    }

    pub fn config(&self) -> &TableConfig {
        &self.config
    }
    pub fn num_players(&self) -> usize {
        self.seat_nos.len()
    }
    pub fn street(&self) -> Street {
        self.street
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }
    pub fn is_complete(&self) -> bool {
        self.phase == Phase::Complete
    }
    pub fn board(&self) -> Vec<Card> {
        self.board.iter().map(|b| b.card).collect()
    }
    pub fn history(&self) -> &[ActionEvent] {
        &self.history
    }
    pub fn current_bet(&self) -> Chips {
        self.current_bet
    }
    pub fn min_raise(&self) -> Chips {
        self.min_raise
    }
    pub fn big_blind(&self) -> Chips {
        self.config.blinds.big_blind
    }
    pub fn dealer_seat(&self) -> u8 {
        self.seat_nos[self.dealer]
    }
    pub fn small_blind_seat(&self) -> u8 {
        self.seat_nos[self.sb]
    }
    pub fn big_blind_seat(&self) -> u8 {
        self.seat_nos[self.bb]
    }
    pub fn seat_numbers(&self) -> &[u8] {
        &self.seat_nos
    }
    pub fn last_aggressor(&self) -> Option<u8> {
        self.last_aggressor.map(|i| self.seat_nos[i])
    }

    pub fn index_of(&self, seat: u8) -> Option<usize> {
        self.seat_nos.iter().position(|s| *s == seat)
    }

    pub fn index_of_player(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    pub fn name(&self, seat: u8) -> Option<&str> {
        self.index_of(seat).map(|i| self.names[i].as_str())
    }

    /// Seat whose turn it is.
    pub fn to_act(&self) -> Option<u8> {
        match self.phase {
            Phase::Betting => self.to_act.map(|i| self.seat_nos[i]),
            _ => None,
        }
    }

    pub fn stack(&self, seat: u8) -> Chips {
        self.index_of(seat).map(|i| self.stacks[i]).unwrap_or_default()
    }

    pub fn starting_stack(&self, seat: u8) -> Chips {
        self.index_of(seat).map(|i| self.starting[i]).unwrap_or_default()
    }

    pub fn street_contribution(&self, seat: u8) -> Chips {
        self.index_of(seat).map(|i| self.street_contrib[i]).unwrap_or_default()
    }

    pub fn total_contribution(&self, seat: u8) -> Chips {
        self.index_of(seat).map(|i| self.total_contrib[i]).unwrap_or_default()
    }

    pub fn is_folded(&self, seat: u8) -> bool {
        self.index_of(seat).map(|i| self.folded[i]).unwrap_or(false)
    }

    pub fn is_all_in(&self, seat: u8) -> bool {
        self.index_of(seat).map(|i| self.all_in[i]).unwrap_or(false)
    }

    pub fn hole_cards(&self, seat: u8) -> Option<[Card; 2]> {
        self.index_of(seat).and_then(|i| self.holes[i])
    }

    /// Chips in the middle, current street included.
    pub fn pot_total(&self) -> Chips {
        self.total_contrib.iter().copied().sum::<Chips>() - self.payouts.iter().copied().sum::<Chips>()
    }

    /// Seats still holding cards.
    pub fn live_seats(&self) -> Vec<u8> {
        (0..self.num_players()).filter(|&i| !self.folded[i]).map(|i| self.seat_nos[i]).collect()
    }

    /// Σ stacks + chips in the middle equals Σ starting stacks.
    pub fn check_conservation(&self) -> bool {
        let stacks: Chips = self.stacks.iter().copied().sum();
        let start: Chips = self.starting.iter().copied().sum();
        stacks + self.pot_total() == start && self.stacks.iter().all(|s| *s >= Chips::ZERO)
    }

    /// Main and side pots built from total contributions so far.
    pub fn pots(&self) -> Vec<Pot> {
        let n = self.num_players();
        let mut levels: Vec<Chips> = (0..n)
            .filter(|&i| !self.folded[i] && self.all_in[i])
            .map(|i| self.total_contrib[i])
            .collect();
        levels.push(self.total_contrib.iter().copied().max().unwrap_or_default());
        levels.sort();
        levels.dedup();
        let mut pots: Vec<Pot> = Vec::new();
        let mut prev = Chips::ZERO;
        for level in levels {
            if level <= prev {
                continue;
            }
            let amount: Chips = self.total_contrib.iter().map(|c| (*c).min(level) - (*c).min(prev)).sum();
            let eligible: Vec<u8> = (0..n)
                .filter(|&i| !self.folded[i] && self.total_contrib[i] >= level)
                .map(|i| self.seat_nos[i])
                .collect();
            prev = level;
            if amount.is_zero() {
                continue;
            }
            match pots.last_mut() {
                Some(last) if eligible.is_empty() || last.eligible == eligible => last.amount += amount,
                _ => pots.push(Pot { amount, eligible }),
            }
        }
        pots
    }

    fn active(&self, i: usize) -> bool {
        !self.folded[i] && !self.all_in[i]
    }

    fn active_count(&self) -> usize {
        (0..self.num_players()).filter(|&i| self.active(i)).count()
    }

    fn live_count(&self) -> usize {
        self.folded.iter().filter(|f| !**f).count()
    }

    fn pending(&self, i: usize) -> bool {
        self.active(i) && (self.street_contrib[i] < self.current_bet || (!self.acted[i] && self.active_count() > 1))
    }

    pub fn legal_actions(&self) -> Option<LegalActionSet> {
        if self.phase != Phase::Betting {
            return None;
        }
        let i = self.to_act?;
        let stack = self.stacks[i];
        let owed = self.current_bet - self.street_contrib[i];
        let mut kinds = vec![ActionKind::Fold];
        let others_active = (0..self.num_players()).any(|j| j != i && self.active(j));
        let mut call_amount = Chips::ZERO;
        let min_amount;
        if owed.is_zero() {
            kinds.push(ActionKind::Check);
            if self.current_bet.is_zero() {
                if others_active {
                    kinds.push(ActionKind::Bet);
                }
                min_amount = self.big_blind().min(stack);
            } else {
                if others_active && self.can_raise[i] {
                    kinds.push(ActionKind::Raise);
                }
                min_amount = (self.min_raise).min(stack);
            }
        } else if stack > owed {
            call_amount = owed;
            let can_raise = others_active && self.can_raise[i];
            if can_raise {
                kinds.push(ActionKind::Raise);
            }
            kinds.push(ActionKind::Call);
            min_amount = (owed + self.min_raise).min(stack);
        } else {
            kinds.push(ActionKind::AllIn);
            call_amount = stack;
            min_amount = stack;
        }
        Some(LegalActionSet {
            seat: self.seat_nos[i],
            kinds,
            call_amount,
            min_amount,
            max_amount: stack,
            menu: amount_menu(self.big_blind(), stack),
        })
    }

    /// Applies the decision of the player to act. On error the state is
    /// unchanged.
    pub fn apply_action(&mut self, decision: PolicyDecision) -> Result<(), EngineError> {
        match self.phase {
            Phase::Betting => {}
            Phase::AwaitingBoard => {
                return Err(EngineError::illegal("board_pending", format!("{} cards must be revealed first", self.street.next())))
            }
            Phase::AwaitingShowdown | Phase::Complete => {
                return Err(EngineError::illegal("hand_complete", "no betting remains in this hand"))
            }
        }
        let legal = self.legal_actions().expect("betting phase has a player to act");
        let i = self.to_act.expect("betting phase has a player to act");
        let name = self.names[i].clone();
        let stack = self.stacks[i];
        let contrib = self.street_contrib[i];
        let owed = self.current_bet - contrib;
        let street = self.street;

        // Resolve into (event kind, chips added).
        let (kind, added) = match decision.kind {
            ActionKind::Fold => (ActionKind::Fold, Chips::ZERO),
            ActionKind::Check => {
                if !owed.is_zero() {
                    return Err(EngineError::illegal("check_facing_bet", format!("{name} owes {owed} and cannot check")));
                }
                (ActionKind::Check, Chips::ZERO)
            }
            ActionKind::Call => {
                if owed.is_zero() {
                    return Err(EngineError::illegal("nothing_to_call", format!("{name} faces no bet; check instead")));
                }
                if !decision.amount.is_zero() && decision.amount != owed.min(stack) {
                    return Err(EngineError::illegal(
                        "call_amount",
                        format!("{name} must call exactly {}, not {}", owed.min(stack), decision.amount),
                    ));
                }
                let added = owed.min(stack);
                (if added == stack { ActionKind::AllIn } else { ActionKind::Call }, added)
            }
            ActionKind::AllIn => {
                if stack.is_zero() {
                    return Err(EngineError::illegal("no_chips", format!("{name} has no chips behind")));
                }
                if !decision.amount.is_zero() && decision.amount != stack {
                    return Err(EngineError::illegal("all_in_amount", format!("{name}'s all-in is {stack}, not {}", decision.amount)));
                }
                let total = contrib + stack;
                if total > self.current_bet && !legal.contains(ActionKind::Raise) && !legal.contains(ActionKind::Bet) {
                    if !self.can_raise[i] && !owed.is_zero() && stack > owed {
                        return Err(EngineError::illegal(
                            "raise_not_reopened",
                            format!("{name} already acted and the last all-in did not reopen the betting"),
                        ));
                    }
                    if stack > owed {
                        return Err(EngineError::illegal("no_opponent_to_raise", format!("{name} has nobody left to raise against")));
                    }
                }
                (ActionKind::AllIn, stack)
            }
            ActionKind::Bet => {
                if !self.current_bet.is_zero() {
                    return Err(EngineError::illegal("street_opened", format!("the street is opened at {}; raise instead", self.current_bet)));
                }
                if !legal.contains(ActionKind::Bet) {
                    return Err(EngineError::illegal("no_opponent_to_raise", format!("{name} has nobody left to bet against")));
                }
                self.check_size(&name, decision.amount, stack, self.big_blind(), "bet")?;
                (if decision.amount == stack { ActionKind::AllIn } else { ActionKind::Bet }, decision.amount)
            }
            ActionKind::Raise => {
                if self.current_bet.is_zero() {
                    return Err(EngineError::illegal("street_unopened", format!("nothing to raise on {street}; bet instead")));
                }
                if !legal.contains(ActionKind::Raise) {
                    let rule = if !self.can_raise[i] { "raise_not_reopened" } else { "no_opponent_to_raise" };
                    return Err(EngineError::illegal(rule, format!("{name} may not raise here")));
                }
                self.check_size(&name, decision.amount, stack, owed + self.min_raise, "raise")?;
                (if decision.amount == stack { ActionKind::AllIn } else { ActionKind::Raise }, decision.amount)
            }
            ActionKind::PostBlind | ActionKind::Show => {
                return Err(EngineError::illegal("not_a_decision", format!("{} is not a betting decision", decision.kind)))
            }
        };

        // Commit.
        let before = self.current_bet;
        match kind {
            ActionKind::Fold => {
                self.folded[i] = true;
                self.history.push(ActionEvent::new(street, name, ActionKind::Fold, Chips::ZERO));
            }
            ActionKind::Check => self.history.push(ActionEvent::new(street, name, ActionKind::Check, Chips::ZERO)),
            _ => {
                self.move_chips(i, added);
                let total = self.street_contrib[i];
                let event = if kind == ActionKind::Raise {
                    ActionEvent::raise(street, name, total - before, total)
                } else {
                    ActionEvent::new(street, name, kind, added)
                };
                self.history.push(event);
                if total > before {
                    let increment = total - before;
                    self.current_bet = total;
                    let full = before.is_zero() || increment >= self.min_raise;
                    if full {
                        self.min_raise = increment.max(self.big_blind());
                        for j in 0..self.num_players() {
                            if j != i {
                                self.can_raise[j] = true;
                            }
                        }
                    }
                    for j in 0..self.num_players() {
                        if j != i {
                            self.acted[j] = false;
                        }
                    }
                    self.last_aggressor = Some(i);
                    self.aggressor_street = street;
                }
            }
        }
        self.acted[i] = true;
        self.can_raise[i] = false;
        self.after_action(i);
        debug_assert!(self.check_conservation());
        Ok(())
    }

    fn check_size(&self, name: &str, amount: Chips, stack: Chips, min: Chips, what: &str) -> Result<(), EngineError> {
        if amount > stack {
            return Err(EngineError::illegal("insufficient_chips", format!("{name} cannot {what} {amount} with {stack} behind")));
        }
        if amount < min && amount != stack {
            let rule = if what == "raise" { "min_raise" } else { "min_bet" };
            return Err(EngineError::illegal(rule, format!("{name}'s {what} adds {amount}; the minimum is {min} unless all-in")));
        }
        Ok(())
    }

    /// Finds the next player or closes the betting round.
    fn after_action(&mut self, last: usize) {
        if self.live_count() <= 1 {
            self.close_round();
            return;
        }
        let n = self.num_players();
        for k in 1..=n {
            let j = (last + k) % n;
            if self.pending(j) {
                self.to_act = Some(j);
                return;
            }
        }
        self.close_round();
    }

    fn close_round(&mut self) {
        self.return_uncalled();
        self.to_act = None;
        if self.live_count() <= 1 {
            self.award_uncontested();
            return;
        }
        self.advance_street();
    }

    fn return_uncalled(&mut self) {
        let n = self.num_players();
        let Some(top) = (0..n).max_by_key(|&i| (self.street_contrib[i], std::cmp::Reverse(i))) else { return };
        let second = (0..n).filter(|&i| i != top).map(|i| self.street_contrib[i]).max().unwrap_or_default();
        let excess = self.street_contrib[top] - second;
        if excess > Chips::ZERO {
            self.street_contrib[top] -= excess;
            self.total_contrib[top] -= excess;
            self.stacks[top] += excess;
            self.all_in[top] = self.stacks[top].is_zero();
            self.current_bet = self.current_bet - excess;
            let street = self.history.last().map(|a| a.street).unwrap_or(self.street);
            self.uncalled.push(UncalledBet { street, player: self.names[top].clone(), amount: excess });
        }
    }

    fn award_uncontested(&mut self) {
        let winner = (0..self.num_players()).find(|&i| !self.folded[i]).expect("someone remains");
        let pot = self.pot_total();
        self.payouts[winner] += pot;
        self.stacks[winner] += pot;
        self.collections.push(Collection { player: self.names[winner].clone(), amount: pot, pot: "pot".into() });
        self.phase = Phase::Complete;
    }

    fn start_street(&mut self, street: Street) {
        self.street = street;
        self.street_contrib.iter_mut().for_each(|c| *c = Chips::ZERO);
        self.current_bet = Chips::ZERO;
        self.min_raise = self.big_blind();
        for i in 0..self.num_players() {
            self.acted[i] = false;
            self.can_raise[i] = true;
        }
        self.phase = Phase::Betting;
        let n = self.num_players();
        self.to_act = (1..=n).map(|k| (self.dealer + k) % n).find(|&j| self.pending(j));
        if self.to_act.is_none() {
            self.advance_street();
        }
    }

    fn advance_street(&mut self) {
        if self.street >= Street::River {
            self.enter_showdown();
            return;
        }
        let next = self.street.next();
        match self.config.dealing {
            Dealing::Shuffled { .. } => {
                let need = next.board_len() - self.board.len();
                for _ in 0..need {
                    let card = self.deck.pop().expect("deck holds enough cards");
                    self.board.push(BoardCard { card, street: next });
                }
                self.start_street(next);
            }
            Dealing::External => {
                self.street_contrib.iter_mut().for_each(|c| *c = Chips::ZERO);
                self.current_bet = Chips::ZERO;
                self.phase = Phase::AwaitingBoard;
            }
        }
    }

    /// Street whose cards are awaited in external dealing.
    pub fn awaiting_street(&self) -> Option<Street> {
        (self.phase == Phase::AwaitingBoard).then(|| self.street.next())
    }

    /// Supplies the next street's board cards (external dealing).
    pub fn reveal_board(&mut self, new_cards: &[Card]) -> Result<(), EngineError> {
        let Some(next) = self.awaiting_street() else {
            return Err(EngineError::illegal("board_not_expected", format!("no board cards are expected during {}", self.street)));
        };
        let need = next.board_len() - self.board.len();
        if new_cards.len() != need {
            return Err(EngineError::illegal("board_size", format!("{next} needs {need} card(s), got {}", new_cards.len())));
        }
        let mut all: Vec<Card> = self.board();
        all.extend_from_slice(new_cards);
        let holes: Vec<[Card; 2]> = self.holes.iter().flatten().copied().collect();
        let mut groups: Vec<&[Card]> = vec![&all];
        groups.extend(holes.iter().map(|h| &h[..]));
        cards::ensure_distinct(groups)?;
        self.board.extend(new_cards.iter().map(|&card| BoardCard { card, street: next }));
        self.start_street(next);
        debug_assert!(self.check_conservation());
        Ok(())
    }

    /// Records a player's hole cards (hero cards or cards shown).
    pub fn set_hole_cards(&mut self, seat: u8, hole: [Card; 2]) -> Result<(), EngineError> {
        let i = self.index_of(seat).ok_or_else(|| EngineError::illegal("unknown_seat", format!("seat {seat} is empty")))?;
        if let Some(prev) = self.holes[i] {
            if prev == hole || prev == [hole[1], hole[0]] {
                return Ok(());
            }
            return Err(EngineError::illegal("hole_cards_conflict", format!("seat {seat} already holds {} {}", prev[0], prev[1])));
        }
        let board = self.board();
        let others: Vec<[Card; 2]> = self.holes.iter().flatten().copied().collect();
        let mut groups: Vec<&[Card]> = vec![&board, &hole];
        groups.extend(others.iter().map(|h| &h[..]));
        cards::ensure_distinct(groups)?;
        self.holes[i] = Some(hole);
        if self.phase == Phase::AwaitingShowdown {
            self.enter_showdown();
        }
        Ok(())
    }

    fn enter_showdown(&mut self) {
        self.street = Street::River;
        self.to_act = None;
        let contenders: Vec<usize> = (0..self.num_players()).filter(|&i| !self.folded[i]).collect();
        if contenders.iter().any(|&i| self.holes[i].is_none()) || self.board.len() < 5 {
            self.phase = Phase::AwaitingShowdown;
            return;
        }
        self.resolve_showdown();
    }

    /// Showdown order: last aggressor (if any on the final street) first,
    /// otherwise first live seat after the dealer, then clockwise.
    fn showdown_order(&self) -> Vec<usize> {
        let n = self.num_players();
        let river_aggressor = self.last_aggressor.filter(|_| self.aggressor_street == Street::River);
        let start = river_aggressor.unwrap_or((self.dealer + 1) % n);
        (0..n).map(|k| (start + k) % n).filter(|&j| !self.folded[j]).collect()
    }

    fn resolve_showdown(&mut self) {
        let board = self.board();
        let order = self.showdown_order();
        let mut values: BTreeMap<u8, HandValue> = BTreeMap::new();
        for &i in &order {
            let hole = self.holes[i].expect("contenders' cards are known");
            let mut all = hole.to_vec();
            all.extend_from_slice(&board);
            values.insert(self.seat_nos[i], evaluate(&all));
            self.history.push(ActionEvent::new(Street::Showdown, self.names[i].clone(), ActionKind::Show, Chips::ZERO));
            self.shown.push(i);
        }
        let pots = self.pots();
        let awards = award_pots(&pots, &values, &self.seat_nos, self.dealer);
        let labels = pot_labels(pots.len());
        for (k, pot_awards) in awards.iter().enumerate() {
            for (seat, amount) in pot_awards {
                let i = self.index_of(*seat).expect("eligible seats exist");
                self.payouts[i] += *amount;
                self.stacks[i] += *amount;
                self.collections.push(Collection { player: self.names[i].clone(), amount: *amount, pot: labels[k].clone() });
            }
        }
        self.street = Street::Showdown;
        self.phase = Phase::Complete;
    }

    /// Payout per seat once the hand is complete.
    pub fn payouts(&self) -> BTreeMap<u8, Chips> {
        self.seat_nos.iter().zip(&self.payouts).map(|(s, p)| (*s, *p)).collect()
    }

    /// Net result per seat (payout minus contribution).
    pub fn results(&self) -> BTreeMap<u8, Chips> {
        (0..self.num_players()).map(|i| (self.seat_nos[i], self.payouts[i] - self.total_contrib[i])).collect()
    }

    pub fn uncalled(&self) -> &[UncalledBet] {
        &self.uncalled
    }

    /// Number of betting streets that saw at least one card or action.
    pub fn streets_reached(&self) -> u8 {
        self.history.iter().map(|a| a.street.ordinal()).max().unwrap_or(1).max(match self.board.len() {
            0 => 1,
            3 => 2,
            4 => 3,
            _ => 4,
        })
    }

    /// Hand transcript as a record the writer can print.
    pub fn to_record(&self) -> HandRecord {
        let mut hole_cards = BTreeMap::new();
        let mut shown_ranks = BTreeMap::new();
        let board = self.board();
        for &i in &self.shown {
            if let Some(h) = self.holes[i] {
                hole_cards.insert(self.names[i].clone(), h);
                let mut all = h.to_vec();
                all.extend_from_slice(&board);
                shown_ranks.insert(self.names[i].clone(), evaluate(&all).category());
            }
        }
        let results = (0..self.num_players())
            .map(|i| (self.names[i].clone(), self.payouts[i] - self.total_contrib[i]))
            .collect();
        HandRecord {
            hand_id: self.config.hand_id.clone(),
            game: "Hold'em No Limit".to_string(),
            timestamp: None,
            table_name: self.config.table_name.clone(),
            max_seats: self.config.max_seats,
            blinds: self.config.blinds.clone(),
            dealer_seat: self.dealer_seat(),
            seats: self.config.seats.clone(),
            hero: None,
            hole_cards,
            board: self.board.clone(),
            actions: self.history.clone(),
            uncalled: self.uncalled.clone(),
            collected: self.collections.clone(),
            mucked: Vec::new(),
            pot_total: self.total_contrib.iter().copied().sum(),
            rake: Chips::ZERO,
            results,
            shown_ranks,
            source: None,
        }
    }

    /// Category of `seat`'s best hand with the board so far.
    pub fn hand_category(&self, seat: u8) -> Option<HandCategory> {
        let hole = self.hole_cards(seat)?;
        cards::evaluate_best(&hole, &self.board()).ok().map(|v| v.category())
    }
}

/// `pot`, or `main pot`, `side pot` / `side pot-1`, `side pot-2`, ...
pub fn pot_labels(count: usize) -> Vec<String> {
    match count {
        0 => Vec::new(),
        1 => vec!["pot".to_string()],
        2 => vec!["main pot".to_string(), "side pot".to_string()],
        n => std::iter::once("main pot".to_string()).chain((1..n).map(|k| format!("side pot-{k}"))).collect(),
    }
}

/// Splits each pot among the best eligible hands. Odd minor units go one at
/// a time to winners in seat order starting left of the dealer.
pub fn award_pots(
    pots: &[Pot],
    values: &BTreeMap<u8, HandValue>,
    seat_order: &[u8],
    dealer_index: usize,
) -> Vec<Vec<(u8, Chips)>> {
    let n = seat_order.len();
    let clockwise: Vec<u8> = (1..=n).map(|k| seat_order[(dealer_index + k) % n]).collect();
    pots.iter()
        .map(|pot| {
            let best = pot.eligible.iter().filter_map(|s| values.get(s)).max();
            let Some(best) = best else { return Vec::new() };
            let winners: Vec<u8> =
                clockwise.iter().copied().filter(|s| pot.eligible.contains(s) && values.get(s) == Some(best)).collect();
            let k = winners.len() as i64;
            let share = pot.amount.cents() / k;
            let mut odd = pot.amount.cents() - share * k;
            winners
                .into_iter()
                .map(|s| {
                    let extra = if odd > 0 {
                        odd -= 1;
                        1
                    } else {
                        0
                    };
                    (s, Chips(share + extra))
                })
                .collect()
        })
        .collect()
}
