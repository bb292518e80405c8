//! Oracles and fixture loaders shared by the integration tests and the
//! acceptance runner. Nothing here calls into the code under test except
//! where a helper explicitly drives it.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pokerlm_core::cards::{evaluate, parse_cards, Card};
use pokerlm_core::engine::{Dealing, GameState, PolicyDecision, TableConfig};
use pokerlm_core::hand_history::{parse_file, BlindStructure, ParsedFile, SeatEntry};
use pokerlm_core::Chips;
use serde::Deserialize;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures_dir().join("corpus"))
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    files
}

/// Every corpus file parsed and concatenated.
pub fn load_corpus() -> ParsedFile {
    let mut all = ParsedFile::default();
    for f in corpus_files() {
        let parsed = parse_file(&std::fs::read_to_string(&f).unwrap());
        all.hands.extend(parsed.hands);
        all.diagnostics.extend(parsed.diagnostics);
    }
    all
}

// ---------------------------------------------------------------------------
// Five-card scorer written from the hand-ranking rules, used to check the
// seven-card evaluator by trying all 21 five-card subsets.

/// (category index, tiebreak ranks) with the same conventions as `HandValue`:
/// category 0 = high card .. 9 = royal flush; straights carry their top card
/// (5 for the wheel); full houses carry trips then pair.
pub type Score = (u8, Vec<u8>);

pub fn score5(cards: &[Card]) -> Score {
    assert_eq!(cards.len(), 5);
    let mut ranks: Vec<u8> = cards.iter().map(|c| c.rank.value()).collect();
    ranks.sort_unstable_by(|a, b| b.cmp(a));
    let flush = cards.iter().all(|c| c.suit == cards[0].suit);
    let distinct = {
        let mut d = ranks.clone();
        d.dedup();
        d.len() == 5
    };
    let straight_top = if distinct && ranks[0] - ranks[4] == 4 {
        Some(ranks[0])
    } else if ranks == [14, 5, 4, 3, 2] {
        Some(5)
    } else {
        None
    };
    // group by multiplicity, larger groups first, then higher rank
    let mut groups: Vec<(usize, u8)> = Vec::new();
    for r in &ranks {
        match groups.iter_mut().find(|(_, g)| g == r) {
            Some(g) => g.0 += 1,
            None => groups.push((1, *r)),
        }
    }
    groups.sort_by(|a, b| b.cmp(a));
    let shape: Vec<usize> = groups.iter().map(|g| g.0).collect();
    let by_group: Vec<u8> = groups.iter().map(|g| g.1).collect();
    match (flush, straight_top) {
        (true, Some(14)) => return (9, vec![14]),
        (true, Some(t)) => return (8, vec![t]),
        _ => {}
    }
    match shape.as_slice() {
        [4, 1] => (7, by_group),
        [3, 2] => (6, by_group),
        _ if flush => (5, ranks),
        _ if straight_top.is_some() => (4, vec![straight_top.unwrap()]),
        [3, 1, 1] => (3, by_group),
        [2, 2, 1] => (2, by_group),
        [2, 1, 1, 1] => (1, by_group),
        _ => (0, ranks),
    }
}

pub fn best_of_seven(cards: &[Card; 7]) -> Score {
    let mut best: Option<Score> = None;
    for skip_a in 0..7 {
        for skip_b in skip_a + 1..7 {
            let five: Vec<Card> =
                (0..7).filter(|i| *i != skip_a && *i != skip_b).map(|i| cards[i]).collect();
            let s = score5(&five);
            if best.as_ref().map_or(true, |b| s > *b) {
                best = Some(s);
            }
        }
    }
    best.unwrap()
}

// ---------------------------------------------------------------------------
// Exhaustive equity over a small deck.

fn combinations(pool: &[Card], k: usize, f: &mut dyn FnMut(&[Card])) {
    fn rec(pool: &[Card], k: usize, start: usize, cur: &mut Vec<Card>, f: &mut dyn FnMut(&[Card])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < k - cur.len() {
                break;
            }
            cur.push(pool[i]);
            rec(pool, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(pool, k, 0, &mut Vec::with_capacity(k), f);
}

/// Hero's expected pot share over every completion of the board and every
/// assignment of opponent hands drawn from `deck`. Ties split evenly.
pub fn exhaustive_equity(hole: &[Card; 2], board: &[Card], n_opp: usize, deck: &[Card]) -> f64 {
    let rest: Vec<Card> = deck.iter().copied().filter(|c| !hole.contains(c) && !board.contains(c)).collect();
    let mut total = 0.0;
    let mut deals = 0u64;
    combinations(&rest, 5 - board.len(), &mut |runout| {
        let full: Vec<Card> = board.iter().chain(runout).copied().collect();
        let mut hero7 = full.clone();
        hero7.extend_from_slice(hole);
        let hero = evaluate(&hero7);
        let left: Vec<Card> = rest.iter().copied().filter(|c| !runout.contains(c)).collect();
        opponents(&left, n_opp, &mut Vec::new(), &mut |opps| {
            let mut best = hero;
            let mut tied = 1usize;
            let mut hero_best = true;
            for o in opps {
                let mut seven = full.clone();
                seven.extend_from_slice(o);
                let v = evaluate(&seven);
                if v > best {
                    best = v;
                    hero_best = false;
                    tied = 1;
                } else if v == best {
                    tied += 1;
                }
            }
            if hero_best {
                total += 1.0 / tied as f64;
            }
            deals += 1;
        });
    });
    total / deals as f64
}

fn opponents(pool: &[Card], n: usize, acc: &mut Vec<[Card; 2]>, f: &mut dyn FnMut(&[[Card; 2]])) {
    if acc.len() == n {
        f(acc);
        return;
    }
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            acc.push([pool[i], pool[j]]);
            let left: Vec<Card> =
                pool.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, c)| *c).collect();
            opponents(&left, n, acc, f);
            acc.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Side-pot fixtures.

#[derive(Debug, Deserialize)]
pub struct SidePotFixture {
    pub name: String,
    pub blinds: [i64; 2],
    pub dealer: u8,
    /// (seat, stack in cents, hole cards)
    pub seats: Vec<(u8, i64, String)>,
    pub actions: Vec<String>,
    pub board: String,
    /// Chips won from the pots, per seat.
    pub payouts: BTreeMap<u8, i64>,
}

pub fn load_side_pots() -> Vec<SidePotFixture> {
    let text = std::fs::read_to_string(fixtures_dir().join("side_pots.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn scripted(action: &str) -> PolicyDecision {
    let mut parts = action.split_whitespace();
    let kind = parts.next().unwrap();
    let amount = parts.next().map(|a| Chips(a.parse().unwrap()));
    match kind {
        "fold" => PolicyDecision::fold(),
        "check" => PolicyDecision::check(),
        "call" => PolicyDecision::call(),
        "allin" => PolicyDecision::all_in(),
        "bet" => PolicyDecision::bet(amount.unwrap()),
        "raise" => PolicyDecision::raise(amount.unwrap()),
        other => panic!("unknown scripted action {other}"),
    }
}

/// Plays a fixture to completion, checking chip conservation after every
/// transition. Returns the finished state or a description of the failure.
pub fn play_side_pot(fx: &SidePotFixture) -> Result<GameState, String> {
    let mut hole_cards = BTreeMap::new();
    let mut seats = Vec::new();
    for (seat, stack, cards) in &fx.seats {
        let c = parse_cards(cards).map_err(|e| e.to_string())?;
        hole_cards.insert(*seat, [c[0], c[1]]);
        seats.push(SeatEntry { seat_no: *seat, player_name: format!("s{seat}"), starting_stack: Chips(*stack) });
    }
    let config = TableConfig {
        hand_id: fx.name.clone(),
        table_name: "fixture".into(),
        max_seats: 9,
        blinds: BlindStructure::new(Chips(fx.blinds[0]), Chips(fx.blinds[1]), "USD"),
        seats,
        dealer_seat: fx.dealer,
        dealing: Dealing::External,
        hole_cards,
    };
    let board = parse_cards(&fx.board).map_err(|e| e.to_string())?;
    let mut state = GameState::new(config).map_err(|e| e.to_string())?;
    let mut script = fx.actions.iter();
    while !state.is_complete() {
        if let Some(street) = state.awaiting_street() {
            let have = state.board().len();
            state.reveal_board(&board[have..street.board_len()]).map_err(|e| e.to_string())?;
        } else {
            let next = script.next().ok_or("script ran out before the hand finished")?;
            state.apply_action(scripted(next)).map_err(|e| format!("{next}: {e}"))?;
        }
        if !state.check_conservation() {
            return Err("chip conservation broken".into());
        }
    }
    if script.next().is_some() {
        return Err("hand finished with script actions left over".into());
    }
    Ok(state)
}

/// Compares a finished fixture hand with its hand-computed payouts.
pub fn check_side_pot(fx: &SidePotFixture) -> Result<(), String> {
    let state = play_side_pot(fx)?;
    let got: BTreeMap<u8, i64> = state.payouts().into_iter().map(|(s, c)| (s, c.cents())).collect();
    if got != fx.payouts {
        return Err(format!("{}: payouts {got:?}, expected {:?}", fx.name, fx.payouts));
    }
    let net: i64 = state.results().values().map(|c| c.cents()).sum();
    if net != 0 {
        return Err(format!("{}: results sum to {net}", fx.name));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The six-handed preflop spot used for the prompt golden test.

pub fn fig6_state() -> GameState {
    let seats = [(2u8, 394i64), (3, 238), (5, 554), (6, 375), (7, 422), (9, 157)]
        .into_iter()
        .map(|(s, c)| SeatEntry { seat_no: s, player_name: format!("Seat {s}"), starting_stack: Chips(c) })
        .collect();
    let hole = parse_cards("Th Ah").unwrap();
    let config = TableConfig {
        hand_id: "fig6".into(),
        table_name: "golden".into(),
        max_seats: 9,
        blinds: BlindStructure::new(Chips(2), Chips(5), "USD"),
        seats,
        dealer_seat: 9,
        dealing: Dealing::External,
        hole_cards: [(2u8, [hole[0], hole[1]])].into_iter().collect(),
    };
    let mut state = GameState::new(config).unwrap();
    for d in [PolicyDecision::fold(), PolicyDecision::fold(), PolicyDecision::fold(), PolicyDecision::raise(Chips(10))] {
        state.apply_action(d).unwrap();
    }
    state
}

pub fn fig6_expected() -> String {
    std::fs::read_to_string(fixtures_dir().join("fig6_prompt.txt")).unwrap().trim_end_matches('\n').to_string()
}

/// Renders the golden spot. The stored template shows the seats that folded
/// in front of the raiser with no action and no discard flag, so those three
/// entries are blanked before rendering.
pub fn fig6_rendered() -> String {
    let state = fig6_state();
    let mut dp = pokerlm_core::DecisionPoint::from_state(&state, 2, &BTreeMap::new()).unwrap();
    for s in [5u8, 6, 7] {
        dp.action_history.insert(s, Vec::new());
        dp.discard_flags.insert(s, false);
    }
    dp.render(None)
}
