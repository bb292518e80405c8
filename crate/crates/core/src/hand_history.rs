//! PokerStars-style hand histories: record types, the parser and the writer.
//!
//! A hand block has three parts: basic information (header, table, seats,
//! blinds), per-street dynamic information (actions and board cards) and the
//! summary (pot, rake, board, per-seat outcome). [`parse_hand`] turns one
//! block into a [`HandRecord`]; [`write_hand`] renders a record back into
//! the same layout so that parsing the output yields an identical record.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{self, evaluate, parse_cards, Card, HandCategory};
use crate::money::Chips;

/// Schema tag written next to every JSON-lines record.
pub const HAND_RECORD_SCHEMA: &str = "hand_record.v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlindStructure {
    pub small_blind: Chips,
    pub big_blind: Chips,
    pub currency: String,
}

impl BlindStructure {
    pub fn new(small_blind: Chips, big_blind: Chips, currency: impl Into<String>) -> Self {
        BlindStructure { small_blind, big_blind, currency: currency.into() }
    }

    pub fn is_valid(&self) -> bool {
        Chips::ZERO < self.small_blind && self.small_blind < self.big_blind
    }

    fn symbol(&self) -> &'static str {
        currency_symbol(&self.currency)
    }
}

fn currency_symbol(code: &str) -> &'static str {
    match code {
        "USD" => "$",
        "EUR" => "€",
        "GBP" => "£",
        _ => "",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatEntry {
    pub seat_no: u8,
    pub player_name: String,
    pub starting_stack: Chips,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Street {
    Preflop,
    Flop,
    Turn,
    River,
    Showdown,
}

impl Street {
    pub const BETTING: [Street; 4] = [Street::Preflop, Street::Flop, Street::Turn, Street::River];

    pub fn name(self) -> &'static str {
        match self {
            Street::Preflop => "PREFLOP",
            Street::Flop => "FLOP",
            Street::Turn => "TURN",
            Street::River => "RIVER",
            Street::Showdown => "SHOWDOWN",
        }
    }

    pub fn next(self) -> Street {
        match self {
            Street::Preflop => Street::Flop,
            Street::Flop => Street::Turn,
            Street::Turn => Street::River,
            Street::River | Street::Showdown => Street::Showdown,
        }
    }

    /// Board size once this street's cards are out.
    pub fn board_len(self) -> usize {
        match self {
            Street::Preflop => 0,
            Street::Flop => 3,
            Street::Turn => 4,
            Street::River | Street::Showdown => 5,
        }
    }

    /// 1-based betting-round number, SHOWDOWN counted as the river.
    pub fn ordinal(self) -> u8 {
        match self {
            Street::Preflop => 1,
            Street::Flop => 2,
            Street::Turn => 3,
            Street::River | Street::Showdown => 4,
        }
    }
}

impl fmt::Display for Street {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    PostBlind,
    Fold,
    Check,
    Call,
    Bet,
    Raise,
    AllIn,
    Show,
}

impl ActionKind {
    pub fn name(self) -> &'static str {
        match self {
            ActionKind::PostBlind => "post_blind",
            ActionKind::Fold => "fold",
            ActionKind::Check => "check",
            ActionKind::Call => "call",
            ActionKind::Bet => "bet",
            ActionKind::Raise => "raise",
            ActionKind::AllIn => "all-in",
            ActionKind::Show => "show",
        }
    }

    /// Voluntary betting decisions (everything but blinds and shows).
    pub fn is_decision(self) -> bool {
        !matches!(self, ActionKind::PostBlind | ActionKind::Show)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlindKind {
    Small,
    Big,
}

/// One logged action.
///
/// `amount` is the number of chips the action moved into the pot, except
/// for `raise` where it is the raise increment as printed (`raises 0.10 to
/// 0.15`) and `raise_to` holds the street total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub street: Street,
    pub actor: String,
    pub kind: ActionKind,
    pub amount: Chips,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raise_to: Option<Chips>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blind: Option<BlindKind>,
}

impl ActionEvent {
    pub fn new(street: Street, actor: impl Into<String>, kind: ActionKind, amount: Chips) -> Self {
        ActionEvent { street, actor: actor.into(), kind, amount, raise_to: None, blind: None }
    }

    pub fn raise(street: Street, actor: impl Into<String>, by: Chips, to: Chips) -> Self {
        ActionEvent { street, actor: actor.into(), kind: ActionKind::Raise, amount: by, raise_to: Some(to), blind: None }
    }

    pub fn post(actor: impl Into<String>, blind: BlindKind, amount: Chips) -> Self {
        ActionEvent {
            street: Street::Preflop,
            actor: actor.into(),
            kind: ActionKind::PostBlind,
            amount,
            raise_to: None,
            blind: Some(blind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardCard {
    pub card: Card,
    pub street: Street,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UncalledBet {
    pub street: Street,
    pub player: String,
    pub amount: Chips,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collection {
    pub player: String,
    pub amount: Chips,
    /// `pot`, `main pot`, `side pot`, `side pot-2`, ...
    pub pot: String,
}

/// A fully parsed hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandRecord {
    pub hand_id: String,
    pub game: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub table_name: String,
    pub max_seats: u8,
    pub blinds: BlindStructure,
    pub dealer_seat: u8,
    pub seats: Vec<SeatEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hero: Option<String>,
    /// Hole cards of every player whose cards are known (hero or shown).
    pub hole_cards: BTreeMap<String, [Card; 2]>,
    pub board: Vec<BoardCard>,
    pub actions: Vec<ActionEvent>,
    #[serde(default)]
    pub uncalled: Vec<UncalledBet>,
    #[serde(default)]
    pub collected: Vec<Collection>,
    #[serde(default)]
    pub mucked: Vec<String>,
    pub pot_total: Chips,
    pub rake: Chips,
    /// Net result per seated player.
    pub results: BTreeMap<String, Chips>,
    pub shown_ranks: BTreeMap<String, HandCategory>,
    /// Original log text, when the record came from the parser.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl HandRecord {
    pub fn seat_of(&self, player: &str) -> Option<u8> {
        self.seats.iter().find(|s| s.player_name == player).map(|s| s.seat_no)
    }

    pub fn player_at(&self, seat: u8) -> Option<&str> {
        self.seats.iter().find(|s| s.seat_no == seat).map(|s| s.player_name.as_str())
    }

    pub fn board_cards(&self) -> Vec<Card> {
        self.board.iter().map(|b| b.card).collect()
    }

    pub fn contains_player(&self, player: &str) -> bool {
        self.seats.iter().any(|s| s.player_name == player)
    }

    /// Players who folded at some point.
    pub fn folded_players(&self) -> Vec<&str> {
        self.actions.iter().filter(|a| a.kind == ActionKind::Fold).map(|a| a.actor.as_str()).collect()
    }

    /// Players still holding cards when the hand ended.
    pub fn live_at_end(&self) -> Vec<&str> {
        let folded = self.folded_players();
        self.seats.iter().map(|s| s.player_name.as_str()).filter(|p| !folded.contains(p)).collect()
    }

    /// Players who showed their cards.
    pub fn shown_players(&self) -> Vec<&str> {
        self.actions.iter().filter(|a| a.kind == ActionKind::Show).map(|a| a.actor.as_str()).collect()
    }

    /// Latest street any action or board card belongs to.
    pub fn final_street(&self) -> Street {
        let by_action = self.actions.iter().map(|a| a.street).max().unwrap_or(Street::Preflop);
        let by_board = self.board.last().map(|b| b.street).unwrap_or(Street::Preflop);
        by_action.max(by_board)
    }

    /// Total chips `player` put in (net of any uncalled bet returned).
    pub fn contribution(&self, player: &str) -> Chips {
        contributions(self).get(player).copied().unwrap_or_default()
    }

    pub fn with_source(mut self, source: Option<String>) -> Self {
        self.source = source;
        self
    }
}

/// True iff private cards were shown at a showdown and every player still in
/// the hand at the end revealed, so the winning and losing hands are known.
pub fn has_revealed_showdown(record: &HandRecord) -> bool {
    let live = record.live_at_end();
    if live.len() < 2 {
        return false;
    }
    let shown = record.shown_players();
    if shown.is_empty() {
        return false;
    }
    live.iter().all(|p| shown.contains(p) && record.hole_cards.contains_key(*p))
}

/// Per-player contributions computed from the action list.
pub fn contributions(record: &HandRecord) -> HashMap<String, Chips> {
    let mut out: HashMap<String, Chips> = HashMap::new();
    let mut street = Street::Preflop;
    let mut street_contrib: HashMap<&str, Chips> = HashMap::new();
    for a in &record.actions {
        if a.street != street {
            street = a.street;
            street_contrib.clear();
        }
        let added = match a.kind {
            ActionKind::Raise => {
                let to = a.raise_to.unwrap_or_default();
                to - street_contrib.get(a.actor.as_str()).copied().unwrap_or_default()
            }
            ActionKind::Fold | ActionKind::Check | ActionKind::Show => Chips::ZERO,
            _ => a.amount,
        };
        *street_contrib.entry(a.actor.as_str()).or_default() += added;
        *out.entry(a.actor.clone()).or_default() += added;
    }
    for u in &record.uncalled {
        *out.entry(u.player.clone()).or_default() -= u.amount;
    }
    out
}

/// Action kinds with each all-in replaced by what it amounted to: a bet on
/// an unopened street, a call when it did not exceed the bet faced,
/// otherwise a raise.
pub fn effective_kinds(record: &HandRecord) -> Vec<ActionKind> {
    let mut street = Street::Preflop;
    let mut contrib: HashMap<&str, Chips> = HashMap::new();
    let mut current = Chips::ZERO;
    let mut out = Vec::with_capacity(record.actions.len());
    for a in &record.actions {
        if a.street != street {
            street = a.street;
            contrib.clear();
            current = Chips::ZERO;
        }
        if a.kind != ActionKind::PostBlind && street == Street::Preflop {
            current = current.max(record.blinds.big_blind);
        }
        let c = contrib.get(a.actor.as_str()).copied().unwrap_or_default();
        let (kind, total) = match a.kind {
            ActionKind::AllIn => {
                let total = c + a.amount;
                let kind = if current.is_zero() {
                    ActionKind::Bet
                } else if total <= current {
                    ActionKind::Call
                } else {
                    ActionKind::Raise
                };
                (kind, total)
            }
            ActionKind::Raise => (ActionKind::Raise, a.raise_to.unwrap_or_default()),
            ActionKind::Fold | ActionKind::Check | ActionKind::Show => (a.kind, c),
            _ => (a.kind, c + a.amount),
        };
        contrib.insert(a.actor.as_str(), total);
        current = current.max(total);
        out.push(kind);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line number within the parsed text.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HandParseError {
    #[error("line {line}: structural error: {message}")]
    Structural { line: usize, message: String },
    #[error("line {line}: semantic error: {message}")]
    Semantic { line: usize, message: String },
}

impl HandParseError {
    pub fn line(&self) -> usize {
        match self {
            HandParseError::Structural { line, .. } | HandParseError::Semantic { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedHand {
    pub record: HandRecord,
    pub diagnostics: Vec<Diagnostic>,
}

/// Result of parsing a whole file. Diagnostics carry absolute line numbers.
#[derive(Debug, Clone, Default)]
pub struct ParsedFile {
    pub hands: Vec<HandRecord>,
    pub diagnostics: Vec<FileDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDiagnostic {
    pub line: usize,
    pub message: String,
    /// The hand containing this line was dropped.
    pub fatal: bool,
}

impl ParsedFile {
    pub fn fatal_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.fatal).count()
    }
}

static HEADER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^PokerStars (?:Hand|Game) #(\w+):\s+(.+?)\s*\(([^/\s]+)/([^/\s)]+)(?:\s+([A-Z]{3}))?\)(?:\s+-\s+(.+?))?\s*$",
    )
    .unwrap()
});
static TABLE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^Table '([^']*)'\s+(\d+)-max(?:\s+\([^)]*\))?\s+Seat #(\d+) is the button").unwrap());
static SEAT_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^Seat (\d+): (.+?) \((\S+) in chips(?:, [^)]*)?\)(.*)$").unwrap());
static MARKER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\*\*\* ([A-Z ]+?) \*\*\*\s*(.*)$").unwrap());
static DEALT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^Dealt to (.+?) \[([^\]]+)\]\s*$").unwrap());
static BRACKETS_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[([^\]]*)\]").unwrap());
static UNCALLED_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^Uncalled bet \((\S+)\) returned to (.+?)\s*$").unwrap());
static COLLECTED_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(.+?) collected (\S+) from ((?:main |side )?pot(?:-\d+)?)\s*$").unwrap());
static TOTAL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^Total pot (\S+)(?:.*?\|\s*Rake (\S+))?").unwrap());

fn structural(line: usize, message: impl Into<String>) -> HandParseError {
    HandParseError::Structural { line, message: message.into() }
}

fn semantic(line: usize, message: impl Into<String>) -> HandParseError {
    HandParseError::Semantic { line, message: message.into() }
}

fn money(text: &str, line: usize) -> Result<Chips, HandParseError> {
    text.parse::<Chips>().map_err(|e| semantic(line, e.to_string()))
}

/// Live bookkeeping while walking the action lines.
struct Ledger {
    stacks: HashMap<String, Chips>,
    street_contrib: HashMap<String, Chips>,
    current_bet: Chips,
}

impl Ledger {
    fn contrib(&self, p: &str) -> Chips {
        self.street_contrib.get(p).copied().unwrap_or_default()
    }

    fn stack(&self, p: &str) -> Chips {
        self.stacks.get(p).copied().unwrap_or_default()
    }

    fn put(&mut self, p: &str, amount: Chips, line: usize) -> Result<(), HandParseError> {
        let stack = self.stack(p);
        if amount > stack {
            return Err(semantic(line, format!("{p} puts in {amount} but only has {stack} behind")));
        }
        self.stacks.insert(p.to_string(), stack - amount);
        let c = self.contrib(p) + amount;
        self.street_contrib.insert(p.to_string(), c);
        if c > self.current_bet {
            self.current_bet = c;
        }
        Ok(())
    }

    fn new_street(&mut self) {
        self.street_contrib.clear();
        self.current_bet = Chips::ZERO;
    }
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Section {
    Setup,
    Betting(Street),
    Showdown,
    Summary,
}

/// Parses one hand block.
pub fn parse_hand(text: &str) -> Result<ParsedHand, HandParseError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').trim_end()))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let Some(&(first_line, header)) = lines.first() else {
        return Err(structural(1, "empty hand block"));
    };
    let caps = HEADER_RE.captures(header).ok_or_else(|| structural(first_line, "missing hand header"))?;
    let hand_id = caps[1].to_string();
    let game = caps[2].to_string();
    let sb_text = &caps[3];
    let small_blind = money(sb_text, first_line)?;
    let big_blind = money(&caps[4], first_line)?;
    let currency = match caps.get(5) {
        Some(m) => m.as_str().to_string(),
        None => match sb_text.chars().next() {
            Some('€') => "EUR".to_string(),
            Some('£') => "GBP".to_string(),
            _ => "USD".to_string(),
        },
    };
    let timestamp = caps.get(6).map(|m| m.as_str().to_string());
    let blinds = BlindStructure::new(small_blind, big_blind, currency);
    if !blinds.is_valid() {
        return Err(semantic(first_line, format!("invalid blinds {small_blind}/{big_blind}")));
    }
    if !lines.iter().any(|(_, l)| l.starts_with("*** SUMMARY ***")) {
        return Err(structural(lines.last().map(|l| l.0).unwrap_or(first_line), "missing summary section"));
    }

    let mut diagnostics = Vec::new();
    let mut table: Option<(String, u8, u8)> = None;
    let mut seats: Vec<SeatEntry> = Vec::new();
    let mut hero = None;
    let mut hole_cards: BTreeMap<String, [Card; 2]> = BTreeMap::new();
    let mut board: Vec<BoardCard> = Vec::new();
    let mut actions: Vec<ActionEvent> = Vec::new();
    let mut uncalled = Vec::new();
    let mut collected = Vec::new();
    let mut mucked = Vec::new();
    let mut shown_ranks = BTreeMap::new();
    let mut pot_total = None;
    let mut rake = Chips::ZERO;
    let mut summary_board: Option<Vec<Card>> = None;
    let mut section = Section::Setup;
    let mut ledger = Ledger { stacks: HashMap::new(), street_contrib: HashMap::new(), current_bet: Chips::ZERO };
    let mut names_by_len: Vec<String> = Vec::new();

    for &(ln, line) in &lines[1..] {
        if let Some(m) = MARKER_RE.captures(line) {
            let marker = m[1].to_string();
            let rest = m[2].to_string();
            match marker.as_str() {
                "HOLE CARDS" => {
                    if table.is_none() {
                        return Err(structural(ln, "missing table line before hole cards"));
                    }
                    ledger.current_bet = ledger.current_bet.max(big_blind);
                    section = Section::Betting(Street::Preflop);
                }
                "FLOP" | "TURN" | "RIVER" => {
                    let street = match marker.as_str() {
                        "FLOP" => Street::Flop,
                        "TURN" => Street::Turn,
                        _ => Street::River,
                    };
                    let groups: Vec<&str> = BRACKETS_RE.captures_iter(&rest).map(|c| c.get(1).unwrap().as_str()).collect();
                    let Some(new) = groups.last() else {
                        return Err(structural(ln, format!("{marker} line without cards")));
                    };
                    let new_cards = parse_cards(new).map_err(|e| semantic(ln, e.to_string()))?;
                    if board.len() + new_cards.len() != street.board_len() {
                        return Err(semantic(ln, format!("{marker} brings the board to {} cards", board.len() + new_cards.len())));
                    }
                    if groups.len() > 1 {
                        let prior = parse_cards(groups[0]).map_err(|e| semantic(ln, e.to_string()))?;
                        if prior != board.iter().map(|b| b.card).collect::<Vec<_>>() {
                            return Err(semantic(ln, "board cards disagree with earlier streets"));
                        }
                    }
                    board.extend(new_cards.into_iter().map(|card| BoardCard { card, street }));
                    ledger.new_street();
                    section = Section::Betting(street);
                }
                "SHOW DOWN" => section = Section::Showdown,
                "SUMMARY" => section = Section::Summary,
                other => return Err(structural(ln, format!("unsupported section `{other}`"))),
            }
            continue;
        }

        match section {
            Section::Setup => {
                if let Some(c) = TABLE_RE.captures(line) {
                    let max: u8 = c[2].parse().map_err(|_| semantic(ln, "bad max seats"))?;
                    let button: u8 = c[3].parse().map_err(|_| semantic(ln, "bad button seat"))?;
                    table = Some((c[1].to_string(), max, button));
                } else if let Some(c) = SEAT_RE.captures(line) {
                    let seat_no: u8 = c[1].parse().map_err(|_| semantic(ln, "bad seat number"))?;
                    let name = c[2].to_string();
                    let stack = money(&c[3], ln)?;
                    let tail = c[4].trim();
                    if tail.contains("sitting out") {
                        diagnostics.push(Diagnostic { line: ln, message: format!("ignored sitting-out seat: {line}") });
                        continue;
                    }
                    if seats.iter().any(|s| s.seat_no == seat_no) {
                        return Err(semantic(ln, format!("seat {seat_no} listed twice")));
                    }
                    if seats.iter().any(|s| s.player_name == name) {
                        return Err(semantic(ln, format!("player {name} seated twice")));
                    }
                    ledger.stacks.insert(name.clone(), stack);
                    seats.push(SeatEntry { seat_no, player_name: name, starting_stack: stack });
                    names_by_len = seats.iter().map(|s| s.player_name.clone()).collect();
                    names_by_len.sort_by_key(|n| std::cmp::Reverse(n.len()));
                } else if let Some((actor, rest)) = split_actor(line, &names_by_len) {
                    if let Some(p) = rest.strip_prefix("posts ") {
                        let (blind, amount_text) = if let Some(a) = p.strip_prefix("small blind ") {
                            (BlindKind::Small, a)
                        } else if let Some(a) = p.strip_prefix("big blind ") {
                            (BlindKind::Big, a)
                        } else {
                            return Err(semantic(ln, format!("unsupported post: {line}")));
                        };
                        let (amount_text, all_in) = strip_all_in(amount_text);
                        let amount = money(amount_text, ln)?;
                        ledger.put(actor, amount, ln)?;
                        if all_in && !ledger.stack(actor).is_zero() {
                            return Err(semantic(ln, format!("{actor} marked all-in with chips behind")));
                        }
                        actions.push(ActionEvent::post(actor, blind, amount));
                    } else {
                        diagnostics.push(Diagnostic { line: ln, message: format!("ignored line: {line}") });
                    }
                } else {
                    diagnostics.push(Diagnostic { line: ln, message: format!("ignored line: {line}") });
                }
            }
            Section::Betting(_) | Section::Showdown if !line.starts_with("Seat ") => {
                let street = match section {
                    Section::Betting(s) => s,
                    _ => Street::Showdown,
                };
                if let Some(c) = DEALT_RE.captures(line) {
                    let name = c[1].to_string();
                    let cards = parse_cards(&c[2]).map_err(|e| semantic(ln, e.to_string()))?;
                    let [a, b] = cards[..] else {
                        return Err(semantic(ln, "expected two hole cards"));
                    };
                    if !ledger.stacks.contains_key(&name) {
                        return Err(semantic(ln, format!("cards dealt to unseated player {name}")));
                    }
                    hole_cards.insert(name.clone(), [a, b]);
                    hero = Some(name);
                } else if let Some(c) = UNCALLED_RE.captures(line) {
                    let amount = money(&c[1], ln)?;
                    let player = c[2].to_string();
                    let contrib = ledger.contrib(&player);
                    if amount > contrib {
                        return Err(semantic(ln, format!("uncalled {amount} exceeds {player}'s street contribution")));
                    }
                    ledger.street_contrib.insert(player.clone(), contrib - amount);
                    let s = ledger.stack(&player) + amount;
                    ledger.stacks.insert(player.clone(), s);
                    let street = actions.last().map(|a| a.street).unwrap_or(Street::Preflop);
                    uncalled.push(UncalledBet { street, player, amount });
                } else if let Some(c) = COLLECTED_RE.captures(line) {
                    let player = c[1].to_string();
                    if !ledger.stacks.contains_key(&player) {
                        return Err(semantic(ln, format!("unknown player {player} collects")));
                    }
                    collected.push(Collection { player, amount: money(&c[2], ln)?, pot: c[3].to_string() });
                } else if let Some((actor, rest)) = split_actor(line, &names_by_len) {
                    let actor = actor.to_string();
                    parse_action(
                        &actor,
                        rest,
                        street,
                        ln,
                        &mut ledger,
                        &mut actions,
                        &mut hole_cards,
                        &mut shown_ranks,
                        &mut mucked,
                        &mut diagnostics,
                        line,
                    )?;
                } else {
                    diagnostics.push(Diagnostic { line: ln, message: format!("ignored line: {line}") });
                }
            }
            Section::Betting(_) | Section::Showdown => {
                diagnostics.push(Diagnostic { line: ln, message: format!("ignored line: {line}") });
            }
            Section::Summary => {
                if let Some(c) = TOTAL_RE.captures(line) {
                    pot_total = Some(money(&c[1], ln)?);
                    if let Some(r) = c.get(2) {
                        rake = money(r.as_str(), ln)?;
                    }
                } else if let Some(b) = line.strip_prefix("Board ") {
                    let inner = b.trim().trim_start_matches('[').trim_end_matches(']');
                    summary_board = Some(parse_cards(inner).map_err(|e| semantic(ln, e.to_string()))?);
                } else if SUMMARY_SEAT_RE.is_match(line) {
                    // per-seat outcome lines restate the body
                } else {
                    diagnostics.push(Diagnostic { line: ln, message: format!("ignored line: {line}") });
                }
            }
        }
    }

    let last_line = lines.last().map(|l| l.0).unwrap_or(first_line);
    let (table_name, max_seats, dealer_seat) = table.ok_or_else(|| structural(first_line, "missing table line"))?;
    if seats.is_empty() {
        return Err(structural(first_line, "no seats"));
    }
    if !seats.iter().any(|s| s.seat_no == dealer_seat) {
        diagnostics.push(Diagnostic { line: first_line, message: format!("button seat {dealer_seat} is empty") });
    }
    let pot_total = pot_total.ok_or_else(|| structural(last_line, "summary lacks total pot"))?;
    if let Some(sb) = summary_board {
        if sb != board.iter().map(|b| b.card).collect::<Vec<_>>() {
            return Err(semantic(last_line, "summary board disagrees with dealt board"));
        }
    }

    let board_cards: Vec<Card> = board.iter().map(|b| b.card).collect();
    let mut groups: Vec<&[Card]> = vec![&board_cards];
    groups.extend(hole_cards.values().map(|h| &h[..]));
    cards::ensure_distinct(groups).map_err(|e| semantic(last_line, e.to_string()))?;

    let mut record = HandRecord {
        hand_id,
        game,
        timestamp,
        table_name,
        max_seats,
        blinds,
        dealer_seat,
        seats,
        hero,
        hole_cards,
        board,
        actions,
        uncalled,
        collected,
        mucked,
        pot_total,
        rake,
        results: BTreeMap::new(),
        shown_ranks,
        source: Some(text.to_string()),
    };

    let contrib = contributions(&record);
    let contributed: Chips = contrib.values().sum();
    if contributed != pot_total {
        return Err(semantic(last_line, format!("total pot {pot_total} but players contributed {contributed}")));
    }
    let paid: Chips = record.collected.iter().map(|c| c.amount).sum();
    if paid + rake != pot_total {
        return Err(semantic(last_line, format!("collected {paid} plus rake {rake} does not equal pot {pot_total}")));
    }
    for s in &record.seats {
        let won: Chips = record.collected.iter().filter(|c| c.player == s.player_name).map(|c| c.amount).sum();
        let put = contrib.get(&s.player_name).copied().unwrap_or_default();
        record.results.insert(s.player_name.clone(), won - put);
    }
    Ok(ParsedHand { record, diagnostics })
}

static SUMMARY_SEAT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^Seat \d+: ").unwrap());

fn split_actor<'a>(line: &'a str, names_by_len: &[String]) -> Option<(&'a str, &'a str)> {
    for n in names_by_len {
        if let Some(rest) = line.strip_prefix(n.as_str()) {
            if let Some(rest) = rest.strip_prefix(": ") {
                return Some((&line[..n.len()], rest));
            }
        }
    }
    None
}

fn strip_all_in(text: &str) -> (&str, bool) {
    match text.strip_suffix(" and is all-in") {
        Some(t) => (t.trim(), true),
        None => (text.trim(), false),
    }
}

#[allow(clippy::too_many_arguments)]
fn parse_action(
    actor: &str,
    rest: &str,
    street: Street,
    ln: usize,
    ledger: &mut Ledger,
    actions: &mut Vec<ActionEvent>,
    hole_cards: &mut BTreeMap<String, [Card; 2]>,
    shown_ranks: &mut BTreeMap<String, HandCategory>,
    mucked: &mut Vec<String>,
    diagnostics: &mut Vec<Diagnostic>,
    line: &str,
) -> Result<(), HandParseError> {
    let (body, all_in) = strip_all_in(rest);
    let mut words = body.splitn(2, ' ');
    let verb = words.next().unwrap_or_default();
    let args = words.next().unwrap_or_default().trim();
    if street == Street::Showdown && matches!(verb, "folds" | "checks" | "calls" | "bets" | "raises") {
        return Err(semantic(ln, "betting action after showdown"));
    }
    let push = |actions: &mut Vec<ActionEvent>, kind, amount| actions.push(ActionEvent::new(street, actor, kind, amount));
    match verb {
        "folds" => {
            if let Some(c) = BRACKETS_RE.captures(args) {
                record_hole(actor, &c[1], ln, hole_cards)?;
            }
            push(actions, ActionKind::Fold, Chips::ZERO);
        }
        "checks" => {
            if ledger.contrib(actor) < ledger.current_bet && !ledger.stack(actor).is_zero() {
                return Err(semantic(ln, format!("{actor} checks facing a bet")));
            }
            push(actions, ActionKind::Check, Chips::ZERO);
        }
        "calls" => {
            let amount = money(args, ln)?;
            let owed = ledger.current_bet - ledger.contrib(actor);
            if amount > owed {
                return Err(semantic(ln, format!("{actor} calls {amount} but only owes {owed}")));
            }
            if amount < owed && !all_in {
                return Err(semantic(ln, format!("{actor} calls {amount} short of {owed} without being all-in")));
            }
            ledger.put(actor, amount, ln)?;
            check_all_in(actor, all_in, ledger, ln)?;
            push(actions, if all_in { ActionKind::AllIn } else { ActionKind::Call }, amount);
        }
        "bets" => {
            let amount = money(args, ln)?;
            if ledger.current_bet > Chips::ZERO {
                return Err(semantic(ln, format!("{actor} bets into an opened street")));
            }
            ledger.put(actor, amount, ln)?;
            check_all_in(actor, all_in, ledger, ln)?;
            push(actions, if all_in { ActionKind::AllIn } else { ActionKind::Bet }, amount);
        }
        "raises" => {
            let (by, to) = args.split_once(" to ").ok_or_else(|| semantic(ln, format!("malformed raise: {line}")))?;
            let by = money(by, ln)?;
            let to = money(to, ln)?;
            let before = ledger.current_bet;
            let contrib = ledger.contrib(actor);
            if to <= before {
                return Err(semantic(ln, format!("{actor} raises to {to}, not above {before}")));
            }
            if to - before != by {
                diagnostics.push(Diagnostic {
                    line: ln,
                    message: format!("raise increment {by} differs from {} implied by totals", to - before),
                });
            }
            ledger.put(actor, to - contrib, ln)?;
            check_all_in(actor, all_in, ledger, ln)?;
            if all_in {
                push(actions, ActionKind::AllIn, to - contrib);
            } else {
                actions.push(ActionEvent::raise(street, actor, by, to));
            }
        }
        "shows" => {
            let c = BRACKETS_RE.captures(args).ok_or_else(|| semantic(ln, format!("show without cards: {line}")))?;
            record_hole(actor, &c[1], ln, hole_cards)?;
            if let Some(open) = args.find('(') {
                let desc = args[open + 1..].trim_end_matches(')');
                match HandCategory::from_description(desc) {
                    Some(cat) => {
                        shown_ranks.insert(actor.to_string(), cat);
                    }
                    None => diagnostics.push(Diagnostic { line: ln, message: format!("unrecognised hand description `{desc}`") }),
                }
            }
            push(actions, ActionKind::Show, Chips::ZERO);
        }
        "mucks" => mucked.push(actor.to_string()),
        _ => diagnostics.push(Diagnostic { line: ln, message: format!("ignored line: {line}") }),
    }
    Ok(())
}

fn record_hole(actor: &str, text: &str, ln: usize, hole_cards: &mut BTreeMap<String, [Card; 2]>) -> Result<(), HandParseError> {
    let cards = parse_cards(text).map_err(|e| semantic(ln, e.to_string()))?;
    let [a, b] = cards[..] else {
        return Err(semantic(ln, "expected two shown cards"));
    };
    if let Some(prev) = hole_cards.get(actor) {
        if *prev != [a, b] && *prev != [b, a] {
            return Err(semantic(ln, format!("{actor} shows cards different from those dealt")));
        }
        return Ok(());
    }
    hole_cards.insert(actor.to_string(), [a, b]);
    Ok(())
}

fn check_all_in(actor: &str, all_in: bool, ledger: &Ledger, ln: usize) -> Result<(), HandParseError> {
    let left = ledger.stack(actor);
    if all_in && !left.is_zero() {
        return Err(semantic(ln, format!("{actor} marked all-in with {left} behind")));
    }
    Ok(())
}

/// Splits a file into hand blocks at header lines. Returns
/// `(first_line_number, block_text)` pairs plus stray non-blank lines found
/// before the first header.
pub fn split_hands(text: &str) -> (Vec<(usize, String)>, Vec<Diagnostic>) {
    let mut blocks: Vec<(usize, String)> = Vec::new();
    let mut stray = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_start_matches('\u{feff}');
        if HEADER_START_RE.is_match(line) {
            blocks.push((i + 1, String::new()));
        }
        match blocks.last_mut() {
            Some((_, b)) => {
                b.push_str(line);
                b.push('\n');
            }
            None if !line.trim().is_empty() => stray.push(Diagnostic { line: i + 1, message: format!("text outside any hand: {line}") }),
            None => {}
        }
    }
    for (_, b) in &mut blocks {
        let trimmed = b.trim_end().len();
        b.truncate(trimmed);
        b.push('\n');
    }
    (blocks, stray)
}

static HEADER_START_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^PokerStars (?:Hand|Game) #").unwrap());

/// Parses concatenated hands. Per-hand failures become fatal diagnostics and
/// do not stop the rest of the file.
pub fn parse_file(text: &str) -> ParsedFile {
    let (blocks, stray) = split_hands(text);
    let results: Vec<_> = blocks.par_iter().map(|(start, block)| (*start, parse_hand(block))).collect();
    let mut out = ParsedFile {
        hands: Vec::with_capacity(results.len()),
        diagnostics: stray.into_iter().map(|d| FileDiagnostic { line: d.line, message: d.message, fatal: false }).collect(),
    };
    for (start, r) in results {
        match r {
            Ok(parsed) => {
                out.diagnostics.extend(parsed.diagnostics.into_iter().map(|d| FileDiagnostic {
                    line: start + d.line - 1,
                    message: d.message,
                    fatal: false,
                }));
                out.hands.push(parsed.record);
            }
            Err(e) => out.diagnostics.push(FileDiagnostic { line: start + e.line() - 1, message: e.to_string(), fatal: true }),
        }
    }
    out
}

pub fn parse_path(path: &Path) -> std::io::Result<ParsedFile> {
    Ok(parse_file(&std::fs::read_to_string(path)?))
}

/// Renders a record in the hand-history layout accepted by [`parse_hand`].
pub fn write_hand(record: &HandRecord) -> String {
    let sym = record.blinds.symbol();
    let m = |c: Chips| format!("{sym}{}", c.fixed());
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    let ts = record.timestamp.as_ref().map(|t| format!(" - {t}")).unwrap_or_default();
    line(format!(
        "PokerStars Hand #{}:  {} ({}/{} {}){ts}",
        record.hand_id,
        record.game,
        m(record.blinds.small_blind),
        m(record.blinds.big_blind),
        record.blinds.currency
    ));
    line(format!("Table '{}' {}-max Seat #{} is the button", record.table_name, record.max_seats, record.dealer_seat));
    for s in &record.seats {
        line(format!("Seat {}: {} ({} in chips)", s.seat_no, s.player_name, m(s.starting_stack)));
    }

    let mut stacks: HashMap<&str, Chips> = record.seats.iter().map(|s| (s.player_name.as_str(), s.starting_stack)).collect();
    let mut contrib: HashMap<&str, Chips> = HashMap::new();
    let mut current_bet = Chips::ZERO;
    let mut street = Street::Preflop;
    let mut hole_written = false;
    let mut showdown_written = false;

    let flush_uncalled = |street: Street, line: &mut dyn FnMut(String)| {
        for u in record.uncalled.iter().filter(|u| u.street == street) {
            line(format!("Uncalled bet ({}) returned to {}", m(u.amount), u.player));
        }
    };

    let emit_hole = |line: &mut dyn FnMut(String)| {
        line("*** HOLE CARDS ***".to_string());
        if let Some(h) = &record.hero {
            if let Some(cards) = record.hole_cards.get(h) {
                line(format!("Dealt to {h} [{} {}]", cards[0], cards[1]));
            }
        }
    };

    let board_upto = |n: usize| record.board.iter().take(n).map(|b| b.card.to_string()).collect::<Vec<_>>().join(" ");
    let street_marker = |s: Street| -> String {
        match s {
            Street::Flop => format!("*** FLOP *** [{}]", board_upto(3)),
            Street::Turn => format!("*** TURN *** [{}] [{}]", board_upto(3), record.board[3].card),
            Street::River => format!("*** RIVER *** [{}] [{}]", board_upto(4), record.board[4].card),
            _ => unreachable!(),
        }
    };

    let advance_to = |target: Street, street: &mut Street, line: &mut dyn FnMut(String), showdown_written: &mut bool| {
        while *street < target && *street < Street::River {
            let next = street.next();
            if record.board.len() < next.board_len() {
                break;
            }
            flush_uncalled(*street, line);
            *street = next;
            line(street_marker(next));
        }
        if target == Street::Showdown && !*showdown_written {
            flush_uncalled(*street, line);
            *street = Street::Showdown;
            line("*** SHOW DOWN ***".to_string());
            *showdown_written = true;
        }
    };

    let mut body: Vec<String> = Vec::new();
    let mut sink = |s: String| body.push(s);
    for a in &record.actions {
        if a.kind != ActionKind::PostBlind && !hole_written {
            emit_hole(&mut sink);
            hole_written = true;
            current_bet = current_bet.max(record.blinds.big_blind);
        }
        if a.street != street && a.street > street {
            advance_to(a.street, &mut street, &mut sink, &mut showdown_written);
            if a.street != Street::Showdown {
                contrib.clear();
                current_bet = Chips::ZERO;
            }
        }
        let name = a.actor.as_str();
        let c = contrib.get(name).copied().unwrap_or_default();
        let stack = stacks.get(name).copied().unwrap_or_default();
        let (text, added) = match a.kind {
            ActionKind::PostBlind => {
                let which = if a.blind == Some(BlindKind::Small) { "small" } else { "big" };
                let suffix = if a.amount == stack { " and is all-in" } else { "" };
                (format!("{name}: posts {which} blind {}{suffix}", m(a.amount)), a.amount)
            }
            ActionKind::Fold => (format!("{name}: folds"), Chips::ZERO),
            ActionKind::Check => (format!("{name}: checks"), Chips::ZERO),
            ActionKind::Call => (format!("{name}: calls {}", m(a.amount)), a.amount),
            ActionKind::Bet => (format!("{name}: bets {}", m(a.amount)), a.amount),
            ActionKind::Raise => {
                let to = a.raise_to.unwrap_or_default();
                (format!("{name}: raises {} to {}", m(a.amount), m(to)), to - c)
            }
            ActionKind::AllIn => {
                let total = c + a.amount;
                let text = if current_bet.is_zero() {
                    format!("{name}: bets {} and is all-in", m(a.amount))
                } else if total <= current_bet {
                    format!("{name}: calls {} and is all-in", m(a.amount))
                } else {
                    format!("{name}: raises {} to {} and is all-in", m(total - current_bet), m(total))
                };
                (text, a.amount)
            }
            ActionKind::Show => {
                let cards = record.hole_cards.get(name);
                let desc = cards.map(|h| show_description(record, name, h)).unwrap_or_default();
                let cards_text = cards.map(|h| format!("{} {}", h[0], h[1])).unwrap_or_default();
                (format!("{name}: shows [{cards_text}]{desc}"), Chips::ZERO)
            }
        };
        sink(text);
        if !added.is_zero() {
            let total = c + added;
            contrib.insert(name, total);
            stacks.insert(name, stack - added);
            current_bet = current_bet.max(total);
        }
    }
    if !hole_written {
        emit_hole(&mut sink);
    }
    let final_board_street = record.board.last().map(|b| b.street).unwrap_or(Street::Preflop);
    if final_board_street > street {
        advance_to(final_board_street, &mut street, &mut sink, &mut showdown_written);
    }
    if !record.mucked.is_empty() && !showdown_written {
        advance_to(Street::Showdown, &mut street, &mut sink, &mut showdown_written);
    }
    if street != Street::Showdown {
        flush_uncalled(street, &mut sink);
    }
    for p in &record.mucked {
        sink(format!("{p}: mucks hand"));
    }
    for c in &record.collected {
        sink(format!("{} collected {} from {}", c.player, m(c.amount), c.pot));
    }
    drop(sink);
    for s in body {
        line(s);
    }

    line("*** SUMMARY ***".to_string());
    line(format!("Total pot {} | Rake {}", m(record.pot_total), m(record.rake)));
    if !record.board.is_empty() {
        line(format!("Board [{}]", board_upto(5)));
    }
    for s in &record.seats {
        let name = s.player_name.as_str();
        let mut tags = String::new();
        if s.seat_no == record.dealer_seat {
            tags.push_str(" (button)");
        }
        for a in record.actions.iter().filter(|a| a.actor == name && a.kind == ActionKind::PostBlind) {
            tags.push_str(if a.blind == Some(BlindKind::Small) { " (small blind)" } else { " (big blind)" });
        }
        let won: Chips = record.collected.iter().filter(|c| c.player == name).map(|c| c.amount).sum();
        let outcome = if let Some(f) = record.actions.iter().find(|a| a.actor == name && a.kind == ActionKind::Fold) {
            match f.street {
                Street::Preflop => "folded before Flop".to_string(),
                Street::Flop => "folded on the Flop".to_string(),
                Street::Turn => "folded on the Turn".to_string(),
                _ => "folded on the River".to_string(),
            }
        } else if record.mucked.iter().any(|p| p == name) {
            "mucked".to_string()
        } else if let (Some(h), true) = (record.hole_cards.get(name), record.shown_players().contains(&name)) {
            if won > Chips::ZERO {
                format!("showed [{} {}] and won ({})", h[0], h[1], m(won))
            } else {
                format!("showed [{} {}] and lost", h[0], h[1])
            }
        } else if won > Chips::ZERO {
            format!("collected ({})", m(won))
        } else {
            "didn't bet".to_string()
        };
        line(format!("Seat {}: {}{} {}", s.seat_no, name, tags, outcome));
    }
    out
}

fn show_description(record: &HandRecord, player: &str, hole: &[Card; 2]) -> String {
    let Some(cat) = record.shown_ranks.get(player) else {
        return String::new();
    };
    let mut cards = hole.to_vec();
    cards.extend(record.board.iter().map(|b| b.card));
    let v = evaluate(&cards);
    let text = if v.category() == *cat { v.describe() } else { generic_description(*cat).to_string() };
    format!(" ({text})")
}

fn generic_description(cat: HandCategory) -> &'static str {
    match cat {
        HandCategory::HighCard => "high card",
        HandCategory::OnePair => "a pair",
        HandCategory::TwoPair => "two pair",
        HandCategory::ThreeOfAKind => "three of a kind",
        HandCategory::Straight => "a straight",
        HandCategory::Flush => "a flush",
        HandCategory::FullHouse => "a full house",
        HandCategory::FourOfAKind => "four of a kind",
        HandCategory::StraightFlush => "a straight flush",
        HandCategory::RoyalFlush => "a Royal Flush",
    }
}

/// One JSON line of the `hand_record.v1` file format.
#[derive(Debug, Serialize, Deserialize)]
pub struct HandRecordLine {
    pub schema: String,
    #[serde(flatten)]
    pub record: HandRecord,
}

pub fn to_json_line(record: &HandRecord) -> String {
    let mut r = record.clone();
    r.source = None;
    serde_json::to_string(&HandRecordLine { schema: HAND_RECORD_SCHEMA.to_string(), record: r })
        .expect("hand records serialize")
}

pub fn from_json_line(line: &str) -> Result<HandRecord, serde_json::Error> {
    let l: HandRecordLine = serde_json::from_str(line)?;
    if l.schema != HAND_RECORD_SCHEMA {
        return Err(serde::de::Error::custom(format!("unsupported schema `{}`", l.schema)));
    }
    Ok(l.record)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIG4: &str = include_str!("../tests/fixtures/showdown_two_pair.txt");

    #[test]
    fn parses_showdown_hand() {
        let parsed = parse_hand(FIG4).unwrap();
        let r = &parsed.record;
        assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
        assert_eq!(r.blinds, BlindStructure::new(Chips(2), Chips(5), "USD"));
        assert_eq!(r.dealer_seat, 1);
        assert_eq!(r.seats[0], SeatEntry { seat_no: 1, player_name: "phalves77".into(), starting_stack: Chips(512) });
        assert_eq!(cards::format_cards(&r.board_cards()), "5s Th 5c 2s Kh");
        let flop_bet = r.actions.iter().find(|a| a.street == Street::Flop).unwrap();
        assert_eq!(flop_bet, &ActionEvent::new(Street::Flop, "gefahrensucher", ActionKind::Bet, Chips(16)));
        assert_eq!(r.shown_ranks["phalves77"], HandCategory::TwoPair);
        assert_eq!(r.shown_ranks["gefahrensucher"], HandCategory::OnePair);
        let total: Chips = r.results.values().sum();
        assert_eq!(total, -r.rake);
        assert!(has_revealed_showdown(r));
    }

    #[test]
    fn seat_line_without_currency_symbol() {
        let c = SEAT_RE.captures("Seat 1: phalves77 (5.12 in chips)").unwrap();
        assert_eq!(&c[2], "phalves77");
        assert_eq!(c[3].parse::<Chips>().unwrap(), Chips(512));
    }

    #[test]
    fn empty_input_is_structural() {
        assert!(matches!(parse_hand(""), Err(HandParseError::Structural { .. })));
        assert!(matches!(parse_hand("\n\n"), Err(HandParseError::Structural { .. })));
    }

    #[test]
    fn missing_summary_is_structural() {
        let cut = FIG4.split("*** SUMMARY ***").next().unwrap();
        assert!(matches!(parse_hand(cut), Err(HandParseError::Structural { .. })));
    }

    #[test]
    fn call_beyond_stack_is_semantic_with_line() {
        let bad = FIG4.replace("phalves77: calls $1.21", "phalves77: calls $9.21");
        let err = parse_hand(&bad).unwrap_err();
        assert!(matches!(err, HandParseError::Semantic { .. }), "{err}");
        let expected_line = bad.lines().position(|l| l.contains("calls $9.21")).unwrap() + 1;
        assert_eq!(err.line(), expected_line);
    }

    #[test]
    fn unknown_lines_become_diagnostics() {
        let noisy = FIG4.replace("*** FLOP ***", "phalves77 said, \"gl\"\n*** FLOP ***");
        let parsed = parse_hand(&noisy).unwrap();
        assert_eq!(parsed.diagnostics.len(), 1);
        assert!(parsed.diagnostics[0].message.contains("said"));
    }

    #[test]
    fn write_then_parse_is_identity() {
        let r = parse_hand(FIG4).unwrap().record;
        let text = write_hand(&r);
        let again = parse_hand(&text).unwrap().record;
        assert_eq!(again.with_source(None), r.with_source(None), "{text}");
    }

    #[test]
    fn json_line_round_trip() {
        let r = parse_hand(FIG4).unwrap().record.with_source(None);
        let line = to_json_line(&r);
        assert!(line.starts_with(r#"{"schema":"hand_record.v1""#));
        assert_eq!(from_json_line(&line).unwrap(), r);
    }

    #[test]
    fn fold_preflop_is_not_revealed_showdown() {
        let text = "PokerStars Hand #9:  Hold'em No Limit ($0.02/$0.05 USD)
Table 'T' 6-max Seat #1 is the button
Seat 1: a ($5.00 in chips)
Seat 2: b ($5.00 in chips)
a: posts small blind $0.02
b: posts big blind $0.05
*** HOLE CARDS ***
a: folds
Uncalled bet ($0.03) returned to b
b collected $0.04 from pot
b: doesn't show hand
*** SUMMARY ***
Total pot $0.04 | Rake $0
Seat 1: a (button) (small blind) folded before Flop
Seat 2: b (big blind) collected ($0.04)
";
        let parsed = parse_hand(text).unwrap();
        assert!(!has_revealed_showdown(&parsed.record));
        assert_eq!(parsed.record.results["a"], Chips(-2));
        assert_eq!(parsed.record.results["b"], Chips(2));
        assert_eq!(parsed.diagnostics.len(), 1);
        let again = parse_hand(&write_hand(&parsed.record)).unwrap().record;
        assert_eq!(again.with_source(None), parsed.record.with_source(None));
    }

    #[test]
    fn mucked_showdown_is_not_revealed() {
        let text = FIG4.replace(
            "gefahrensucher: shows [Ad 8d] (a pair of Fives)",
            "gefahrensucher: mucks hand",
        );
        let parsed = parse_hand(&text).unwrap();
        assert_eq!(parsed.record.mucked, vec!["gefahrensucher".to_string()]);
        assert!(!has_revealed_showdown(&parsed.record));
    }

    #[test]
    fn parse_file_isolates_bad_hands() {
        let corrupt = FIG4.replace("Total pot", "Total pott").replace("Hand #", "Hand #9");
        let text = format!("{FIG4}\n\n{corrupt}\n\n{FIG4}");
        let parsed = parse_file(&text);
        assert_eq!(parsed.hands.len(), 2);
        assert_eq!(parsed.fatal_count(), 1);
        let three = parse_file(&format!("{FIG4}\n{FIG4}\n{FIG4}"));
        assert_eq!(three.hands.len(), 3);
        assert!(three.diagnostics.is_empty());
    }
}
