use std::collections::BTreeMap;

use pokerlm_core::cards::Card;
use pokerlm_core::engine::{Dealing, EngineError, GameState, LegalActionSet, Phase, TableConfig};
use pokerlm_core::hand_history::{ActionKind, BlindStructure, SeatEntry};
use pokerlm_core::policies::PolicyDecision;
use pokerlm_core::prompt::{action_label, DecisionPoint};
use pokerlm_core::Chips;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ApiError;

/// Money on the wire: a decimal number (or numeric string) in currency units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Money(pub Chips);

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0.as_f64())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) if x.is_finite() => Ok(Money(Chips::from_f64(x))),
            Raw::Num(x) => Err(serde::de::Error::custom(format!("invalid amount {x}"))),
            Raw::Text(t) => t.parse().map(Money).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdvisorSpec {
    Equity {
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Remote {
        endpoint: String,
        #[serde(default)]
        retries: u32,
    },
}

fn default_samples() -> usize {
    1000
}

impl Default for AdvisorSpec {
    fn default() -> Self {
        AdvisorSpec::Equity { samples: default_samples() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatSpec {
    pub seat: u8,
    #[serde(default)]
    pub name: Option<String>,
    pub stack: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    #[serde(default)]
    pub hand_id: Option<String>,
    #[serde(default)]
    pub table_name: Option<String>,
    pub small_blind: Money,
    pub big_blind: Money,
    #[serde(default = "default_currency")]
    pub currency: String,
    pub seats: Vec<SeatSpec>,
    pub dealer_seat: u8,
    pub hero_seat: u8,
    pub hero_cards: [Card; 2],
    #[serde(default)]
    pub advisor: Option<AdvisorSpec>,
}

fn default_currency() -> String {
    "USD".into()
}

impl SessionConfig {
    pub fn table_config(&self) -> Result<TableConfig, ApiError> {
        let seats: Vec<SeatEntry> = self
            .seats
            .iter()
            .map(|s| SeatEntry {
                seat_no: s.seat,
                player_name: s.name.clone().unwrap_or_else(|| format!("Seat {}", s.seat)),
                starting_stack: s.stack.0,
            })
            .collect();
        if !seats.iter().any(|s| s.seat_no == self.hero_seat) {
            return Err(ApiError::invalid_config(format!("hero seat {} is not at the table", self.hero_seat)));
        }
        let max_seat = seats.iter().map(|s| s.seat_no).max().unwrap_or(0);
        let cfg = TableConfig {
            hand_id: self.hand_id.clone().unwrap_or_else(|| "1".into()),
            table_name: self.table_name.clone().unwrap_or_else(|| "Live".into()),
            max_seats: max_seat.max(seats.len() as u8),
            blinds: BlindStructure { small_blind: self.small_blind.0, big_blind: self.big_blind.0, currency: self.currency.clone() },
            seats,
            dealer_seat: self.dealer_seat,
            dealing: Dealing::External,
            hole_cards: BTreeMap::from([(self.hero_seat, self.hero_cards)]),
        };
        cfg.validate().map_err(|e| ApiError::invalid_config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Something that happened at the table. Bet and raise amounts are the
/// player's street total after the action ("raises to").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    Action {
        seat: u8,
        action: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amount: Option<Money>,
    },
    Board {
        cards: Vec<Card>,
    },
    Show {
        seat: u8,
        cards: Vec<Card>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub seq: usize,
    pub at_ms: u64,
    #[serde(flatten)]
    pub event: SessionEvent,
}

fn parse_kind(text: &str) -> Option<ActionKind> {
    Some(match text.trim().to_ascii_lowercase().replace(['_', ' '], "-").as_str() {
        "fold" | "folds" => ActionKind::Fold,
        "check" | "checks" => ActionKind::Check,
        "call" | "calls" => ActionKind::Call,
        "bet" | "bets" => ActionKind::Bet,
        "raise" | "raises" => ActionKind::Raise,
        "all-in" | "allin" => ActionKind::AllIn,
        _ => return None,
    })
}

fn engine_error(e: EngineError) -> ApiError {
    match &e {
        EngineError::Illegal { rule, .. } => ApiError::illegal(rule, e.to_string()),
        EngineError::Cards(_) => ApiError::illegal("card_conflict", e.to_string()),
        EngineError::Config(_) => ApiError::invalid_config(e.to_string()),
    }
}

pub struct Session {
    pub id: String,
    pub config: SessionConfig,
    pub state: GameState,
    pub events: Vec<LoggedEvent>,
    pub revealed: BTreeMap<u8, [Option<Card>; 2]>,
    pub constant_block: String,
}

impl Session {
    pub fn new(id: String, config: SessionConfig) -> Result<Session, ApiError> {
        let state = GameState::new(config.table_config()?).map_err(engine_error)?;
        let constant_block = DecisionPoint::from_state(&state, config.hero_seat, &BTreeMap::new())
            .map_err(|e| ApiError::invalid_config(e.to_string()))?
            .constant_block();
        Ok(Session { id, config, state, events: Vec::new(), revealed: BTreeMap::new(), constant_block })
    }

    pub fn advisor(&self, default: &AdvisorSpec) -> AdvisorSpec {
        self.config.advisor.clone().unwrap_or_else(|| default.clone())
    }

    /// Validates and applies `event`; on error nothing changes.
    pub fn apply(&mut self, event: SessionEvent, at_ms: u64) -> Result<&LoggedEvent, ApiError> {
        match &event {
            SessionEvent::Action { seat, action, amount } => {
                let kind = parse_kind(action)
                    .ok_or_else(|| ApiError::bad_request(format!("unknown action `{action}`")))?;
                let decision = self.decision(*seat, kind, amount.map(|m| m.0))?;
                self.state.apply_action(decision).map_err(engine_error)?;
            }
            SessionEvent::Board { cards } => self.state.reveal_board(cards).map_err(engine_error)?,
            SessionEvent::Show { seat, cards } => self.show(*seat, cards)?,
        }
        debug_assert!(self.state.check_conservation());
        self.events.push(LoggedEvent { seq: self.events.len() + 1, at_ms, event });
        Ok(self.events.last().expect("just pushed"))
    }

    fn decision(&self, seat: u8, kind: ActionKind, amount: Option<Chips>) -> Result<PolicyDecision, ApiError> {
        if self.state.index_of(seat).is_none() {
            return Err(ApiError::illegal("unknown_seat", format!("seat {seat} is empty")));
        }
        match self.state.to_act() {
            Some(s) if s == seat => {}
            Some(s) => return Err(ApiError::illegal("out_of_turn", format!("seat {s} is to act, not seat {seat}"))),
            None if self.state.phase() == Phase::AwaitingBoard => {
                let next = self.state.awaiting_street().map(|s| s.name()).unwrap_or_default();
                return Err(ApiError::illegal("board_pending", format!("{next} cards must be revealed first")));
            }
            None => return Err(ApiError::illegal("hand_complete", "no betting remains in this hand")),
        }
        let contributed = self.state.street_contribution(seat);
        Ok(match kind {
            ActionKind::Bet | ActionKind::Raise => {
                let to = amount.ok_or_else(|| ApiError::bad_request(format!("{} needs an amount", kind.name())))?;
                if to <= contributed {
                    return Err(ApiError::illegal("min_raise", format!("{} to {to} does not add chips", kind.name())));
                }
                PolicyDecision::new(kind, to - contributed)
            }
            ActionKind::AllIn => PolicyDecision::all_in(),
            other => PolicyDecision::new(other, Chips::ZERO),
        })
    }

    fn show(&mut self, seat: u8, cards: &[Card]) -> Result<(), ApiError> {
        if cards.is_empty() || cards.len() > 2 {
            return Err(ApiError::bad_request("a show event carries one or two cards"));
        }
        if self.state.index_of(seat).is_none() {
            return Err(ApiError::illegal("unknown_seat", format!("seat {seat} is empty")));
        }
        let mut slots = self.revealed.get(&seat).copied().unwrap_or([None, None]);
        for c in cards {
            if slots.contains(&Some(*c)) {
                continue;
            }
            match slots.iter_mut().find(|s| s.is_none()) {
                Some(s) => *s = Some(*c),
                None => return Err(ApiError::illegal("hole_cards_conflict", format!("seat {seat} already showed two cards"))),
            }
        }
        let mut visible: Vec<Card> = self.state.board();
        for (s, known) in &self.revealed {
            if *s != seat {
                visible.extend(known.iter().flatten());
            }
        }
        if let Some(h) = self.state.hole_cards(self.config.hero_seat).filter(|_| seat != self.config.hero_seat) {
            visible.extend(h);
        }
        if let Some(c) = slots.iter().flatten().find(|c| visible.contains(c)) {
            return Err(ApiError::illegal("card_conflict", format!("{c} is already visible elsewhere")));
        }
        if let [Some(a), Some(b)] = slots {
            let mut probe = self.state.clone();
            probe.set_hole_cards(seat, [a, b]).map_err(engine_error)?;
            self.state = probe;
        }
        if seat != self.config.hero_seat {
            self.revealed.insert(seat, slots);
        }
        Ok(())
    }

    pub fn decision_point(&self) -> DecisionPoint {
        DecisionPoint::from_state(&self.state, self.config.hero_seat, &self.revealed)
            .expect("hero seat and cards were validated at creation")
    }

    /// Hero to act with a decision to make.
    pub fn hero_legal(&self) -> Option<LegalActionSet> {
        self.state.legal_actions().filter(|l| l.seat == self.config.hero_seat)
    }

    pub fn snapshot(&self) -> Snapshot {
        let dp = self.decision_point();
        let s = &self.state;
        let seats = s
            .seat_numbers()
            .iter()
            .map(|&seat| SeatView {
                seat,
                name: s.name(seat).unwrap_or_default().to_string(),
                stack: Money(s.stack(seat)),
                street_contribution: Money(s.street_contribution(seat)),
                folded: s.is_folded(seat),
                all_in: s.is_all_in(seat),
                actions: dp.action_history.get(&seat).cloned().unwrap_or_default(),
                shown: if seat == self.config.hero_seat {
                    self.config.hero_cards.map(Some)
                } else {
                    self.revealed.get(&seat).copied().unwrap_or([None, None])
                },
            })
            .collect();
        Snapshot {
            session_id: self.id.clone(),
            hand_id: s.config().hand_id.clone(),
            street: dp.street.name().to_string(),
            phase: phase_name(s.phase()).to_string(),
            pot: Money(s.pot_total()),
            board: s.board(),
            to_act: s.to_act(),
            hero_seat: self.config.hero_seat,
            hero_cards: self.config.hero_cards,
            hero_rank: dp.rank.prompt_name().to_string(),
            seats,
            legal_actions: s.legal_actions().map(|l| LegalView {
                seat: l.seat,
                kinds: l.kinds.iter().map(|k| action_label(*k).to_string()).collect(),
                call_amount: Money(l.call_amount),
                min_amount: Money(l.min_amount),
                max_amount: Money(l.max_amount),
                menu: l.menu.iter().map(|m| Money(*m)).collect(),
            }),
            awaiting_board: s.awaiting_street().map(|st| st.name().to_string()),
            results: (s.phase() == Phase::Complete)
                .then(|| s.results().into_iter().map(|(k, v)| (k, Money(v))).collect()),
            events: self.events.clone(),
        }
    }
}

pub fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Betting => "betting",
        Phase::AwaitingBoard => "awaiting_board",
        Phase::AwaitingShowdown => "awaiting_showdown",
        Phase::Complete => "complete",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatView {
    pub seat: u8,
    pub name: String,
    pub stack: Money,
    pub street_contribution: Money,
    pub folded: bool,
    pub all_in: bool,
    pub actions: Vec<String>,
    pub shown: [Option<Card>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegalView {
    pub seat: u8,
    pub kinds: Vec<String>,
    pub call_amount: Money,
    pub min_amount: Money,
    pub max_amount: Money,
    pub menu: Vec<Money>,
}

/// Public view of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub session_id: String,
    pub hand_id: String,
    pub street: String,
    pub phase: String,
    pub pot: Money,
    pub board: Vec<Card>,
    pub to_act: Option<u8>,
    pub hero_seat: u8,
    pub hero_cards: [Card; 2],
    pub hero_rank: String,
    pub seats: Vec<SeatView>,
    pub legal_actions: Option<LegalView>,
    pub awaiting_board: Option<String>,
    pub results: Option<BTreeMap<u8, Money>>,
    pub events: Vec<LoggedEvent>,
}
