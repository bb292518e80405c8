//! Cards, the 7-card evaluator and hole-card characteristics.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CardError {
    #[error("malformed card label `{0}`")]
    Parse(String),
    #[error("duplicate card {0}")]
    Duplicate(Card),
    #[error("board must hold 0, 3, 4 or 5 cards, got {0}")]
    BoardSize(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suit {
    Clubs,
    Diamonds,
    Hearts,
    Spades,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Clubs, Suit::Diamonds, Suit::Hearts, Suit::Spades];

    pub fn symbol(self) -> char {
        match self {
            Suit::Clubs => 'c',
            Suit::Diamonds => 'd',
            Suit::Hearts => 'h',
            Suit::Spades => 's',
        }
    }

    pub fn from_symbol(c: char) -> Option<Suit> {
        match c {
            'c' => Some(Suit::Clubs),
            'd' => Some(Suit::Diamonds),
            'h' => Some(Suit::Hearts),
            's' => Some(Suit::Spades),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Card rank, 2 through 14 (ace high).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rank(u8);

impl Rank {
    pub const TWO: Rank = Rank(2);
    pub const TEN: Rank = Rank(10);
    pub const ACE: Rank = Rank(14);

    pub fn new(value: u8) -> Option<Rank> {
        (2..=14).contains(&value).then_some(Rank(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> char {
        b"23456789TJQKA"[(self.0 - 2) as usize] as char
    }

    pub fn from_symbol(c: char) -> Option<Rank> {
        let v = match c {
            '2'..='9' => c as u8 - b'0',
            'T' => 10,
            'J' => 11,
            'Q' => 12,
            'K' => 13,
            'A' => 14,
            _ => return None,
        };
        Some(Rank(v))
    }

    /// Plural English name as hand histories print it ("Fives", "Tens").
    pub fn plural(self) -> &'static str {
        [
            "Deuces", "Threes", "Fours", "Fives", "Sixes", "Sevens", "Eights", "Nines", "Tens", "Jacks",
            "Queens", "Kings", "Aces",
        ][(self.0 - 2) as usize]
    }

    pub fn singular(self) -> &'static str {
        [
            "Deuce", "Three", "Four", "Five", "Six", "Seven", "Eight", "Nine", "Ten", "Jack", "Queen",
            "King", "Ace",
        ][(self.0 - 2) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card {
    pub rank: Rank,
    pub suit: Suit,
}

impl Card {
    pub fn new(rank: Rank, suit: Suit) -> Card {
        Card { rank, suit }
    }

    /// Dense index in `0..52`.
    pub fn index(self) -> usize {
        self.suit.index() * 13 + (self.rank.0 as usize - 2)
    }

    pub fn from_index(i: usize) -> Card {
        assert!(i < 52, "card index out of range");
        Card { rank: Rank((i % 13) as u8 + 2), suit: Suit::ALL[i / 13] }
    }
}

/// All 52 cards in index order.
pub fn full_deck() -> Vec<Card> {
    (0..52).map(Card::from_index).collect()
}

pub fn parse_card(text: &str) -> Result<Card, CardError> {
    let mut chars = text.chars();
    let (Some(r), Some(s), None) = (chars.next(), chars.next(), chars.next()) else {
        return Err(CardError::Parse(text.to_string()));
    };
    match (Rank::from_symbol(r), Suit::from_symbol(s)) {
        (Some(rank), Some(suit)) => Ok(Card { rank, suit }),
        _ => Err(CardError::Parse(text.to_string())),
    }
}

/// Parses whitespace separated labels, e.g. `5s Th 5c`.
pub fn parse_cards(text: &str) -> Result<Vec<Card>, CardError> {
    text.split_whitespace().map(parse_card).collect()
}

pub fn format_cards(cards: &[Card]) -> String {
    cards.iter().map(Card::to_string).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.rank.symbol(), self.suit.symbol())
    }
}

impl FromStr for Card {
    type Err = CardError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_card(s)
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_card(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandCategory {
    HighCard,
    OnePair,
    TwoPair,
    ThreeOfAKind,
    Straight,
    Flush,
    FullHouse,
    FourOfAKind,
    StraightFlush,
    RoyalFlush,
}

impl HandCategory {
    pub const ALL: [HandCategory; 10] = [
        HandCategory::HighCard,
        HandCategory::OnePair,
        HandCategory::TwoPair,
        HandCategory::ThreeOfAKind,
        HandCategory::Straight,
        HandCategory::Flush,
        HandCategory::FullHouse,
        HandCategory::FourOfAKind,
        HandCategory::StraightFlush,
        HandCategory::RoyalFlush,
    ];

    /// Name used in the `My rank` prompt field.
    pub fn prompt_name(self) -> &'static str {
        match self {
            HandCategory::HighCard => "High",
            HandCategory::OnePair => "Pair",
            HandCategory::TwoPair => "Two pairs",
            HandCategory::ThreeOfAKind => "Three of a kind",
            HandCategory::Straight => "Straight",
            HandCategory::Flush => "Flush",
            HandCategory::FullHouse => "Full house",
            HandCategory::FourOfAKind => "Four of a kind",
            HandCategory::StraightFlush => "Straight flush",
            HandCategory::RoyalFlush => "Royal flush",
        }
    }

    /// Recognises the hand description printed in showdown lines,
    /// e.g. `a pair of Fives` or `two pair, Tens and Fives`.
    pub fn from_description(text: &str) -> Option<HandCategory> {
        let t = text.trim().to_ascii_lowercase();
        let table = [
            ("high card", HandCategory::HighCard),
            ("a pair", HandCategory::OnePair),
            ("two pair", HandCategory::TwoPair),
            ("three of a kind", HandCategory::ThreeOfAKind),
            ("a straight flush", HandCategory::StraightFlush),
            ("a straight", HandCategory::Straight),
            ("a flush", HandCategory::Flush),
            ("a full house", HandCategory::FullHouse),
            ("four of a kind", HandCategory::FourOfAKind),
            ("a royal flush", HandCategory::RoyalFlush),
        ];
        table.iter().find(|(p, _)| t.starts_with(p)).map(|&(_, c)| c)
    }
}

/// Evaluated strength of the best five-card hand.
///
/// Tiebreak ranks are stored most significant first. Two values compare by
/// category, then lexicographically by tiebreaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HandValue {
    category: HandCategory,
    tiebreaks: [u8; 5],
    len: u8,
}

impl HandValue {
    pub fn new(category: HandCategory, tiebreaks: &[u8]) -> HandValue {
        assert!(tiebreaks.len() <= 5);
        let mut t = [0u8; 5];
        t[..tiebreaks.len()].copy_from_slice(tiebreaks);
        HandValue { category, tiebreaks: t, len: tiebreaks.len() as u8 }
    }

    pub fn category(&self) -> HandCategory {
        self.category
    }

    pub fn tiebreaks(&self) -> &[u8] {
        &self.tiebreaks[..self.len as usize]
    }

    /// Packed key with the same ordering as the value.
    pub fn key(&self) -> u32 {
        let mut k = self.category as u32;
        for &t in &self.tiebreaks {
            k = (k << 4) | t as u32;
        }
        k
    }

    /// Hand-history style description, e.g. `two pair, Tens and Fives`.
    pub fn describe(&self) -> String {
        let r = |i: usize| Rank(self.tiebreaks[i]);
        match self.category {
            HandCategory::HighCard => format!("high card {}", r(0).singular()),
            HandCategory::OnePair => format!("a pair of {}", r(0).plural()),
            HandCategory::TwoPair => format!("two pair, {} and {}", r(0).plural(), r(1).plural()),
            HandCategory::ThreeOfAKind => format!("three of a kind, {}", r(0).plural()),
            HandCategory::Straight => {
                format!("a straight, {} to {}", Rank(low_of_straight(r(0).0)).singular(), r(0).singular())
            }
            HandCategory::Flush => format!("a flush, {} high", r(0).singular()),
            HandCategory::FullHouse => format!("a full house, {} full of {}", r(0).plural(), r(1).plural()),
            HandCategory::FourOfAKind => format!("four of a kind, {}", r(0).plural()),
            HandCategory::StraightFlush => format!(
                "a straight flush, {} to {}",
                Rank(low_of_straight(r(0).0)).singular(),
                r(0).singular()
            ),
            HandCategory::RoyalFlush => "a Royal Flush".to_string(),
        }
    }
}

fn low_of_straight(high: u8) -> u8 {
    if high == 5 {
        14
    } else {
        high - 4
    }
}

impl Ord for HandValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for HandValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Serialize, Deserialize)]
struct HandValueRepr {
    category: HandCategory,
    tiebreaks: Vec<u8>,
}

impl Serialize for HandValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        HandValueRepr { category: self.category, tiebreaks: self.tiebreaks().to_vec() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HandValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = HandValueRepr::deserialize(deserializer)?;
        if r.tiebreaks.len() > 5 || r.tiebreaks.iter().any(|&t| !(2..=14).contains(&t)) {
            return Err(serde::de::Error::custom("invalid tiebreaks"));
        }
        Ok(HandValue::new(r.category, &r.tiebreaks))
    }
}

pub fn compare(a: &HandValue, b: &HandValue) -> Ordering {
    a.cmp(b)
}

/// Highest card of a straight contained in `mask` (bit r set for rank r).
fn straight_high(mask: u16) -> Option<u8> {
    let mut m = mask;
    if m & (1 << 14) != 0 {
        m |= 1 << 1;
    }
    (5..=14u8).rev().find(|&h| {
        let run = 0b11111u16 << (h - 4);
        m & run == run
    })
}

fn top_ranks(mask: u16, n: usize, out: &mut Vec<u8>) {
    for r in (2..=14u8).rev() {
        if out.len() >= n {
            break;
        }
        if mask & (1 << r) != 0 {
            out.push(r);
        }
    }
}

/// Best hand formed from up to seven cards. Cards are assumed distinct.
///
/// With fewer than five cards only pairs, trips and quads can be detected;
/// a bare two-card hole evaluates to `OnePair` or `HighCard`.
pub fn evaluate(cards: &[Card]) -> HandValue {
    let mut counts = [0u8; 15];
    let mut suit_masks = [0u16; 4];
    let mut suit_counts = [0u8; 4];
    let mut rank_mask = 0u16;
    for c in cards {
        let r = c.rank.0;
        counts[r as usize] += 1;
        rank_mask |= 1 << r;
        suit_masks[c.suit.index()] |= 1 << r;
        suit_counts[c.suit.index()] += 1;
    }

    let flush_suit = (0..4).find(|&s| suit_counts[s] >= 5);
    if let Some(s) = flush_suit {
        if let Some(h) = straight_high(suit_masks[s]) {
            return if h == 14 {
                HandValue::new(HandCategory::RoyalFlush, &[14])
            } else {
                HandValue::new(HandCategory::StraightFlush, &[h])
            };
        }
    }

    let mut quads = None;
    let mut trips: [u8; 3] = [0; 3];
    let mut n_trips = 0;
    let mut pairs: [u8; 3] = [0; 3];
    let mut n_pairs = 0;
    for r in (2..=14u8).rev() {
        match counts[r as usize] {
            4 => quads = Some(r),
            3 => {
                trips[n_trips] = r;
                n_trips += 1;
            }
            2 => {
                pairs[n_pairs] = r;
                n_pairs += 1;
            }
            _ => {}
        }
    }

    let mut kickers = Vec::with_capacity(5);
    if let Some(q) = quads {
        top_ranks(rank_mask & !(1 << q), 1, &mut kickers);
        let mut t = vec![q];
        t.extend(kickers);
        return HandValue::new(HandCategory::FourOfAKind, &t);
    }
    if n_trips >= 1 && (n_trips >= 2 || n_pairs >= 1) {
        let pair = if n_trips >= 2 { trips[1].max(pairs[0]) } else { pairs[0] };
        return HandValue::new(HandCategory::FullHouse, &[trips[0], pair]);
    }
    if let Some(s) = flush_suit {
        top_ranks(suit_masks[s], 5, &mut kickers);
        return HandValue::new(HandCategory::Flush, &kickers);
    }
    if let Some(h) = straight_high(rank_mask) {
        return HandValue::new(HandCategory::Straight, &[h]);
    }
    if n_trips == 1 {
        top_ranks(rank_mask & !(1 << trips[0]), 2, &mut kickers);
        let mut t = vec![trips[0]];
        t.extend(kickers);
        return HandValue::new(HandCategory::ThreeOfAKind, &t);
    }
    if n_pairs >= 2 {
        top_ranks(rank_mask & !(1 << pairs[0]) & !(1 << pairs[1]), 1, &mut kickers);
        let mut t = vec![pairs[0], pairs[1]];
        t.extend(kickers);
        return HandValue::new(HandCategory::TwoPair, &t);
    }
    if n_pairs == 1 {
        top_ranks(rank_mask & !(1 << pairs[0]), 3, &mut kickers);
        let mut t = vec![pairs[0]];
        t.extend(kickers);
        return HandValue::new(HandCategory::OnePair, &t);
    }
    top_ranks(rank_mask, 5, &mut kickers);
    HandValue::new(HandCategory::HighCard, &kickers)
}

/// Checks that no card repeats across the given slices.
pub fn ensure_distinct<'a>(groups: impl IntoIterator<Item = &'a [Card]>) -> Result<(), CardError> {
    let mut seen = 0u64;
    for g in groups {
        for c in g {
            let bit = 1u64 << c.index();
            if seen & bit != 0 {
                return Err(CardError::Duplicate(*c));
            }
            seen |= bit;
        }
    }
    Ok(())
}

/// Best hand for `hole` on a board of 0, 3, 4 or 5 cards.
pub fn evaluate_best(hole: &[Card; 2], board: &[Card]) -> Result<HandValue, CardError> {
    if !matches!(board.len(), 0 | 3 | 4 | 5) {
        return Err(CardError::BoardSize(board.len()));
    }
    ensure_distinct([&hole[..], board])?;
    let mut all = [hole[0]; 7];
    all[1] = hole[1];
    all[2..2 + board.len()].copy_from_slice(board);
    Ok(evaluate(&all[..2 + board.len()]))
}

/// Descriptive flags of the two private cards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HoleCharacteristics {
    pub suit: bool,
    pub high: bool,
    pub close: bool,
}

impl HoleCharacteristics {
    /// Flag names in prompt order.
    pub fn labels(&self) -> Vec<&'static str> {
        let mut v = Vec::with_capacity(3);
        if self.suit {
            v.push("suit");
        }
        if self.high {
            v.push("high");
        }
        if self.close {
            v.push("close");
        }
        v
    }
}

/// `suit`: same suit. `high`: a card above nine. `close`: rank gap below 5,
/// with the ace counted as 14 only.
pub fn hole_characteristics(hole: &[Card; 2]) -> HoleCharacteristics {
    let (a, b) = (hole[0].rank.0, hole[1].rank.0);
    HoleCharacteristics { suit: hole[0].suit == hole[1].suit, high: a.max(b) > 9, close: a.abs_diff(b) < 5 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Card {
        parse_card(s).unwrap()
    }

    fn cs(s: &str) -> Vec<Card> {
        parse_cards(s).unwrap()
    }

    fn hole(s: &str) -> [Card; 2] {
        let v = cs(s);
        [v[0], v[1]]
    }

    #[test]
    fn parse_card_examples() {
        assert_eq!(c("Th"), Card::new(Rank::TEN, Suit::Hearts));
        assert_eq!(c("2c"), Card::new(Rank::TWO, Suit::Clubs));
        assert_eq!(parse_card("Ax"), Err(CardError::Parse("Ax".into())));
        assert!(parse_card("A").is_err());
        assert!(parse_card("Ahh").is_err());
        assert!(parse_card("1h").is_err());
    }

    #[test]
    fn format_parse_identity_over_deck() {
        for card in full_deck() {
            assert_eq!(parse_card(&card.to_string()).unwrap(), card);
            assert_eq!(Card::from_index(card.index()), card);
        }
    }

    #[test]
    fn two_pair_from_log_showdown() {
        let v = evaluate_best(&hole("Td 8c"), &cs("5s Th 5c 2s Kh")).unwrap();
        assert_eq!(v.category(), HandCategory::TwoPair);
        assert_eq!(v.tiebreaks(), &[10, 5, 13]);
        assert_eq!(v.describe(), "two pair, Tens and Fives");
    }

    #[test]
    fn one_pair_from_log_showdown() {
        let v = evaluate_best(&hole("Ad 8d"), &cs("5s Th 5c 2s Kh")).unwrap();
        assert_eq!(v.category(), HandCategory::OnePair);
        assert_eq!(v.tiebreaks(), &[5, 14, 13, 10]);
        assert_eq!(v.describe(), "a pair of Fives");
    }

    #[test]
    fn royal_flush_on_flop() {
        let v = evaluate_best(&hole("Ah Kh"), &cs("Qh Jh Th")).unwrap();
        assert_eq!(v.category(), HandCategory::RoyalFlush);
    }

    #[test]
    fn wheel_is_five_high() {
        let v = evaluate_best(&hole("Ah 2d"), &cs("3c 4s 5h Kd Kc")).unwrap();
        assert_eq!(v.category(), HandCategory::Straight);
        assert_eq!(v.tiebreaks(), &[5]);
        let six = evaluate_best(&hole("6h 2d"), &cs("3c 4s 5h Kd Kc")).unwrap();
        assert!(six > v);
    }

    #[test]
    fn preflop_evaluation() {
        let pair = evaluate_best(&hole("9c 9d"), &[]).unwrap();
        assert_eq!(pair.category(), HandCategory::OnePair);
        let high = evaluate_best(&hole("Th Ah"), &[]).unwrap();
        assert_eq!(high.category(), HandCategory::HighCard);
        assert_eq!(high.tiebreaks(), &[14, 10]);
    }

    #[test]
    fn evaluate_best_validation() {
        assert_eq!(evaluate_best(&hole("Ah Kh"), &cs("Ah 2c 3c")), Err(CardError::Duplicate(c("Ah"))));
        assert_eq!(evaluate_best(&hole("Ah Kh"), &cs("2c 3c")), Err(CardError::BoardSize(2)));
    }

    #[test]
    fn full_house_picks_best_pair_from_double_trips() {
        let v = evaluate(&cs("Kc Kd Ks 5c 5d 5h 2s"));
        assert_eq!(v.category(), HandCategory::FullHouse);
        assert_eq!(v.tiebreaks(), &[13, 5]);
    }

    #[test]
    fn compare_examples() {
        let two_pair = HandValue::new(HandCategory::TwoPair, &[10, 5, 13]);
        let pair = HandValue::new(HandCategory::OnePair, &[5, 14, 13, 10]);
        assert_eq!(compare(&two_pair, &pair), Ordering::Greater);
        assert_eq!(compare(&pair, &pair), Ordering::Equal);
        let nine = HandValue::new(HandCategory::Straight, &[9]);
        let ace = HandValue::new(HandCategory::Straight, &[14]);
        assert_eq!(compare(&nine, &ace), Ordering::Less);
    }

    #[test]
    fn characteristics_examples() {
        let all = HoleCharacteristics { suit: true, high: true, close: true };
        assert_eq!(hole_characteristics(&hole("Th Ah")), all);
        assert_eq!(hole_characteristics(&hole("2c 9d")), HoleCharacteristics::default());
        assert_eq!(hole_characteristics(&hole("Kd Td")), all);
        // ace is 14 only
        assert!(!hole_characteristics(&hole("Ah 3d")).close);
        assert_eq!(all.labels(), vec!["suit", "high", "close"]);
    }

    #[test]
    fn description_round_trip() {
        for (hand, cat) in [
            ("2c 3d 7h 9s Jc", HandCategory::HighCard),
            ("Kc Kd Ks 5c 5d", HandCategory::FullHouse),
            ("9c Tc Jc Qc Kc", HandCategory::StraightFlush),
            ("Ac 2c 3c 4c 5c", HandCategory::StraightFlush),
            ("Tc Jc Qc Kc Ac", HandCategory::RoyalFlush),
            ("Ad 2c 3c 4c 5c", HandCategory::Straight),
            ("2h 7h 9h Jh Kh", HandCategory::Flush),
        ] {
            let v = evaluate(&cs(hand));
            assert_eq!(v.category(), cat);
            assert_eq!(HandCategory::from_description(&v.describe()), Some(cat), "{}", v.describe());
        }
    }

    #[test]
    fn hand_value_serde() {
        let v = HandValue::new(HandCategory::TwoPair, &[10, 5, 13]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"category":"two_pair","tiebreaks":[10,5,13]}"#);
        assert_eq!(serde_json::from_str::<HandValue>(&json).unwrap(), v);
    }
}
