//! Decision points and prompt rendering.
//!
//! A prompt has a constant block (role, table, hero cards), fixed for a
//! hand, and a dynamic block (stage, board, every seat's money and actions,
//! pot, legal actions, amount menu) re-rendered at each decision. Both are
//! filled from the `prompt.v1` text templates in `assets/`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{hole_characteristics, Card, HandCategory, HoleCharacteristics};
use crate::engine::{GameState, PolicyDecision};
use crate::hand_history::{ActionEvent, ActionKind, Diagnostic, HandRecord, Street};
use crate::money::Chips;
use crate::replay::{replay_with, ReplayError};

pub const TEMPLATE_VERSION: &str = "prompt.v1";

const CONSTANT_TEMPLATE: &str = include_str!("../assets/prompt.v1/constant.txt");
const DYNAMIC_TEMPLATE: &str = include_str!("../assets/prompt.v1/dynamic.txt");
const OPPONENT_TEMPLATE: &str = include_str!("../assets/prompt.v1/opponent.txt");
const QUESTION_TEMPLATE: &str = include_str!("../assets/prompt.v1/question.txt");
const TERMINAL_TEMPLATE: &str = include_str!("../assets/prompt.v1/terminal.txt");

/// Big-blind multiples offered as amounts; the stack is appended as all-in.
pub const AMOUNT_MULTIPLES: [i64; 8] = [0, 1, 3, 6, 10, 20, 50, 100];

/// Grid amounts not exceeding `stack`, ascending, with the stack itself
/// appended as the all-in value unless already present.
pub fn amount_menu(big_blind: Chips, stack: Chips) -> Vec<Chips> {
    let mut menu: Vec<Chips> = AMOUNT_MULTIPLES
        .iter()
        .map(|m| Chips(m * big_blind.cents()))
        .filter(|a| *a <= stack)
        .collect();
    if menu.last() != Some(&stack) {
        menu.push(stack);
    }
    menu
}

/// Smallest menu value at or above `amount`, or the largest (all-in).
pub fn snap_amount(amount: Chips, menu: &[Chips]) -> Chips {
    menu.iter().copied().find(|m| *m >= amount).or_else(|| menu.last().copied()).unwrap_or(amount)
}

fn fill(template: &str, values: &[(&str, String)]) -> String {
    let mut out = template.to_string();
    for (k, v) in values {
        out = out.replace(&format!("{{{{{k}}}}}"), v);
    }
    out
}

fn quoted_single<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|i| format!("'{}'", i.to_string())).collect::<Vec<_>>().join(sep)
}

fn quoted_double<T: AsRef<str>>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|i| format!("\"{}\"", i.as_ref())).collect::<Vec<_>>().join(", ")
}

fn card_slot(c: Option<Card>) -> String {
    c.map(|c| c.to_string()).unwrap_or_else(|| "**".to_string())
}

/// Label used in the legal-action list.
pub fn action_label(kind: ActionKind) -> &'static str {
    match kind {
        ActionKind::AllIn => "all-in",
        other => other.name(),
    }
}

/// History text for one action, e.g. `raises 0.05 to 0.1`.
pub fn action_text(event: &ActionEvent) -> Option<String> {
    Some(match event.kind {
        ActionKind::Fold => "fold".to_string(),
        ActionKind::Check => "check".to_string(),
        ActionKind::Call => "call".to_string(),
        ActionKind::Bet => format!("bets {}", event.amount),
        ActionKind::Raise => format!("raises {} to {}", event.amount, event.raise_to.unwrap_or_default()),
        ActionKind::AllIn => format!("all-in {}", event.amount),
        ActionKind::PostBlind | ActionKind::Show => return None,
    })
}

/// Table facts that stay fixed for the whole hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantInfo {
    pub player_amount: usize,
    pub currency: String,
    pub small_blind: Chips,
    pub big_blind: Chips,
    /// Seats clockwise starting from the small blind.
    pub order: Vec<u8>,
    pub small_blind_seat: u8,
    pub hero_seat: u8,
    pub hole: [Card; 2],
    pub characteristics: HoleCharacteristics,
}

pub fn build_constant_block(info: &ConstantInfo) -> String {
    fill(
        CONSTANT_TEMPLATE,
        &[
            ("player_amount", info.player_amount.to_string()),
            ("currency", info.currency.clone()),
            ("small_blind", info.small_blind.to_string()),
            ("big_blind", info.big_blind.to_string()),
            ("order", quoted_single(&info.order, ", ")),
            ("small_blind_seat", info.small_blind_seat.to_string()),
            ("hole_cards", quoted_single(info.hole, ", ")),
            ("characteristics", quoted_double(info.characteristics.labels())),
            ("hero_seat", info.hero_seat.to_string()),
        ],
    )
    .trim_end()
    .to_string()
}

/// A state where the hero must act, optionally with the action taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionPoint {
    pub hand_id: String,
    pub street: Street,
    pub hero: String,
    pub hero_seat: u8,
    pub hole: [Card; 2],
    pub characteristics: HoleCharacteristics,
    pub rank: HandCategory,
    pub board_visible: [Option<Card>; 5],
    /// Money behind per seat.
    pub stacks: BTreeMap<u8, Chips>,
    pub action_history: BTreeMap<u8, Vec<String>>,
    pub discard_flags: BTreeMap<u8, bool>,
    /// Opponent cards shown during the hand (`None` = hidden).
    #[serde(default)]
    pub revealed: BTreeMap<u8, [Option<Card>; 2]>,
    pub pot: Chips,
    pub legal_actions: Vec<ActionKind>,
    pub amount_menu: Vec<Chips>,
    pub constant: ConstantInfo,
    /// The hand is over; no question is asked.
    #[serde(default)]
    pub terminal: bool,
    pub label: Option<ActionEvent>,
    /// The label as a decision with its amount snapped to the menu.
    pub label_decision: Option<PolicyDecision>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("seat {0} is not at the table")]
    UnknownSeat(u8),
    #[error("hero's hole cards are unknown")]
    HiddenHero,
    #[error("hero {0} is not in the hand")]
    UnknownHero(String),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

impl DecisionPoint {
    /// Snapshot of `state` from `hero_seat`'s point of view.
    pub fn from_state(
        state: &GameState,
        hero_seat: u8,
        revealed: &BTreeMap<u8, [Option<Card>; 2]>,
    ) -> Result<DecisionPoint, PromptError> {
        let hero = state.name(hero_seat).ok_or(PromptError::UnknownSeat(hero_seat))?.to_string();
        let hole = state.hole_cards(hero_seat).ok_or(PromptError::HiddenHero)?;
        let board = state.board();
        let mut board_visible = [None; 5];
        for (slot, c) in board_visible.iter_mut().zip(&board) {
            *slot = Some(*c);
        }
        let seats = state.seat_numbers().to_vec();
        let mut action_history: BTreeMap<u8, Vec<String>> = seats.iter().map(|s| (*s, Vec::new())).collect();
        for a in state.history() {
            if let (Some(text), Some(i)) = (action_text(a), state.index_of_player(&a.actor)) {
                action_history.get_mut(&seats[i]).expect("seat listed").push(text);
            }
        }
        let legal = state.legal_actions().filter(|l| l.seat == hero_seat);
        let (legal_actions, menu) = match &legal {
            Some(l) => (l.kinds.clone(), l.menu.clone()),
            None => (Vec::new(), amount_menu(state.big_blind(), state.stack(hero_seat))),
        };
        let n = seats.len();
        let sb = state.index_of(state.small_blind_seat()).expect("sb seated");
        let blinds = &state.config().blinds;
        Ok(DecisionPoint {
            hand_id: state.config().hand_id.clone(),
            street: state.street().min(Street::River),
            hero,
            hero_seat,
            hole,
            characteristics: hole_characteristics(&hole),
            rank: state.hand_category(hero_seat).unwrap_or(HandCategory::HighCard),
            board_visible,
            stacks: seats.iter().map(|s| (*s, state.stack(*s))).collect(),
            action_history,
            discard_flags: seats.iter().map(|s| (*s, state.is_folded(*s))).collect(),
            revealed: revealed.iter().filter(|(s, _)| **s != hero_seat).map(|(s, c)| (*s, *c)).collect(),
            pot: state.pot_total(),
            legal_actions,
            amount_menu: menu,
            constant: ConstantInfo {
                player_amount: n,
                currency: blinds.currency.clone(),
                small_blind: blinds.small_blind,
                big_blind: blinds.big_blind,
                order: (0..n).map(|k| seats[(sb + k) % n]).collect(),
                small_blind_seat: state.small_blind_seat(),
                hero_seat,
                hole,
                characteristics: hole_characteristics(&hole),
            },
            terminal: legal.is_none(),
            label: None,
            label_decision: None,
        })
    }

    pub fn constant_block(&self) -> String {
        build_constant_block(&self.constant)
    }

    pub fn dynamic_block(&self) -> String {
        build_dynamic_block(self)
    }

    /// Full prompt: constant block, dynamic block, then the directive (if
    /// any) verbatim on its own line.
    pub fn render(&self, directive: Option<&str>) -> String {
        let mut out = format!("{}\n{}", self.constant_block(), self.dynamic_block());
        if let Some(d) = directive.map(str::trim).filter(|d| !d.is_empty()) {
            out.push('\n');
            out.push_str(d);
        }
        out
    }
}

pub fn build_dynamic_block(dp: &DecisionPoint) -> String {
    let board = dp.board_visible.iter().map(|c| format!("'{}'", card_slot(*c))).collect::<Vec<_>>().join(" ");
    let opponents: Vec<String> = dp
        .stacks
        .keys()
        .filter(|s| **s != dp.hero_seat)
        .map(|s| {
            let cards = dp.revealed.get(s).copied().unwrap_or([None, None]);
            fill(
                OPPONENT_TEMPLATE,
                &[
                    ("seat", s.to_string()),
                    ("cards", quoted_single(cards.iter().map(|c| card_slot(*c)), ", ")),
                    ("money", dp.stacks[s].to_string()),
                    ("actions", quoted_double(dp.action_history.get(s).into_iter().flatten())),
                    ("discard", if dp.discard_flags.get(s).copied().unwrap_or(false) { "True" } else { "False" }.to_string()),
                ],
            )
            .trim_end()
            .to_string()
        })
        .collect();
    let question = if dp.terminal {
        TERMINAL_TEMPLATE.trim_end().to_string()
    } else {
        fill(
            QUESTION_TEMPLATE,
            &[
                ("actions", quoted_double(dp.legal_actions.iter().map(|k| action_label(*k)))),
                ("menu", dp.amount_menu.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")),
            ],
        )
        .trim_end()
        .to_string()
    };
    fill(
        DYNAMIC_TEMPLATE,
        &[
            ("stage", dp.street.name().to_string()),
            ("board", board),
            ("rank", dp.rank.prompt_name().to_string()),
            ("money", dp.stacks.get(&dp.hero_seat).copied().unwrap_or_default().to_string()),
            ("actions", quoted_double(dp.action_history.get(&dp.hero_seat).into_iter().flatten())),
            ("opponents", opponents.join("\n")),
            ("pot", dp.pot.to_string()),
            ("question", question),
        ],
    )
    .trim_end()
    .to_string()
}

/// The hero's logged action as a menu-snapped decision. All-in is expressed
/// by its effect (bet, raise or call) unless the short-stack case leaves
/// only fold or all-in.
pub fn label_decision(event: &ActionEvent, state: &GameState) -> Option<PolicyDecision> {
    let seat = state.to_act()?;
    let legal = state.legal_actions()?;
    let contrib = state.street_contribution(seat);
    let snap = |a: Chips| snap_amount(a, &legal.menu);
    Some(match event.kind {
        ActionKind::Fold => PolicyDecision::fold(),
        ActionKind::Check => PolicyDecision::check(),
        ActionKind::Call => PolicyDecision::call(),
        ActionKind::Bet => PolicyDecision::bet(snap(event.amount)),
        ActionKind::Raise => PolicyDecision::raise(snap(event.raise_to.unwrap_or_default() - contrib)),
        ActionKind::AllIn => {
            if legal.contains(ActionKind::AllIn) {
                PolicyDecision::new(ActionKind::AllIn, snap(event.amount))
            } else if legal.contains(ActionKind::Bet) {
                PolicyDecision::bet(snap(event.amount))
            } else if contrib + event.amount > state.current_bet() && legal.contains(ActionKind::Raise) {
                PolicyDecision::raise(snap(event.amount))
            } else {
                PolicyDecision::call()
            }
        }
        ActionKind::PostBlind | ActionKind::Show => return None,
    })
}

/// One decision point per hero action, each built from the engine state
/// reached by replaying every earlier event.
pub fn extract_decision_points(
    record: &HandRecord,
    hero: &str,
) -> Result<(Vec<DecisionPoint>, Vec<Diagnostic>), PromptError> {
    let hero_seat = record.seat_of(hero).ok_or_else(|| PromptError::UnknownHero(hero.to_string()))?;
    if !record.hole_cards.contains_key(hero) {
        return Err(PromptError::HiddenHero);
    }
    let mut points = Vec::new();
    let mut diagnostics = Vec::new();
    let none = BTreeMap::new();
    replay_with(record, |state, event| {
        if event.actor != hero {
            return;
        }
        match DecisionPoint::from_state(state, hero_seat, &none) {
            Ok(mut dp) => {
                dp.label_decision = label_decision(event, state);
                dp.label = Some(event.clone());
                points.push(dp);
            }
            Err(e) => diagnostics.push(Diagnostic { line: 0, message: format!("hand {}: {e}", record.hand_id) }),
        }
    })?;
    Ok((points, diagnostics))
}
