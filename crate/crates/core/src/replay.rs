//! Drives parsed hand records through the engine.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{Dealing, EngineError, GameState, Phase, PolicyDecision, TableConfig};
use crate::hand_history::{contributions, ActionEvent, ActionKind, HandRecord, Street};
use crate::money::Chips;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("event {index} ({event}): {source}")]
    Engine { index: usize, event: String, source: EngineError },
    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

fn mismatch(m: impl Into<String>) -> ReplayError {
    ReplayError::Mismatch(m.into())
}

/// Engine configuration reproducing a record's table: external dealing and
/// every hole card the record knows.
pub fn config_from_record(record: &HandRecord) -> TableConfig {
    let hole_cards = record
        .hole_cards
        .iter()
        .filter_map(|(name, cards)| record.seat_of(name).map(|s| (s, *cards)))
        .collect();
    TableConfig {
        hand_id: record.hand_id.clone(),
        table_name: record.table_name.clone(),
        max_seats: record.max_seats,
        blinds: record.blinds.clone(),
        seats: record.seats.clone(),
        dealer_seat: record.dealer_seat,
        dealing: Dealing::External,
        hole_cards,
    }
}

/// Translates a logged betting action into an engine decision, given the
/// actor's street contribution before it.
pub fn decision_for(event: &ActionEvent, street_contrib: Chips) -> Option<PolicyDecision> {
    let d = match event.kind {
        ActionKind::Fold => PolicyDecision::fold(),
        ActionKind::Check => PolicyDecision::check(),
        ActionKind::Call => PolicyDecision::new(ActionKind::Call, event.amount),
        ActionKind::Bet => PolicyDecision::bet(event.amount),
        ActionKind::Raise => PolicyDecision::raise(event.raise_to? - street_contrib),
        ActionKind::AllIn => PolicyDecision::new(ActionKind::AllIn, event.amount),
        ActionKind::PostBlind | ActionKind::Show => return None,
    };
    Some(d)
}

fn reveal_until(state: &mut GameState, record: &HandRecord, street: Street) -> Result<(), ReplayError> {
    while let Some(next) = state.awaiting_street() {
        if next > street {
            break;
        }
        let cards: Vec<_> = record.board.iter().filter(|b| b.street == next).map(|b| b.card).collect();
        if cards.is_empty() {
            return Err(mismatch(format!("record lacks {next} cards the engine needs")));
        }
        state
            .reveal_board(&cards)
            .map_err(|e| ReplayError::Engine { index: 0, event: format!("{next} reveal"), source: e })?;
    }
    Ok(())
}

/// Replays `record`, invoking `before_decision` with the state right before
/// each betting decision is applied.
pub fn replay_with<F>(record: &HandRecord, mut before_decision: F) -> Result<GameState, ReplayError>
where
    F: FnMut(&GameState, &ActionEvent),
{
    let mut state = GameState::new(config_from_record(record))
        .map_err(|e| ReplayError::Engine { index: 0, event: "new hand".into(), source: e })?;
    let posts: Vec<&ActionEvent> = record.actions.iter().filter(|a| a.kind == ActionKind::PostBlind).collect();
    let engine_posts: Vec<&ActionEvent> = state.history().iter().filter(|a| a.kind == ActionKind::PostBlind).collect();
    if posts != engine_posts {
        return Err(mismatch(format!(
            "blind posts differ: log has {:?}, engine posted {:?}",
            posts.iter().map(|a| (&a.actor, a.amount)).collect::<Vec<_>>(),
            engine_posts.iter().map(|a| (&a.actor, a.amount)).collect::<Vec<_>>()
        )));
    }
    for (index, event) in record.actions.iter().enumerate() {
        if !event.kind.is_decision() {
            continue;
        }
        reveal_until(&mut state, record, event.street)?;
        let seat = state.to_act().ok_or_else(|| mismatch(format!("event {index}: {} acts but nobody is to act", event.actor)))?;
        let expected = state.name(seat).unwrap_or_default().to_string();
        if expected != event.actor {
            return Err(mismatch(format!("event {index}: {} acts out of turn; {expected} is to act", event.actor)));
        }
        if state.street() != event.street {
            return Err(mismatch(format!("event {index}: logged on {} but engine is on {}", event.street, state.street())));
        }
        let decision = decision_for(event, state.street_contribution(seat)).expect("decision events map");
        before_decision(&state, event);
        state.apply_action(decision).map_err(|e| ReplayError::Engine {
            index,
            event: format!("{} {} {}", event.actor, event.kind, event.amount),
            source: e,
        })?;
        if !state.check_conservation() {
            return Err(mismatch(format!("chip conservation broken after event {index}")));
        }
    }
    reveal_until(&mut state, record, Street::River)?;
    Ok(state)
}

pub fn replay(record: &HandRecord) -> Result<GameState, ReplayError> {
    replay_with(record, |_, _| {})
}

/// What a replay established about a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub pot_total: Chips,
    /// Engine net result per player (rake-free).
    pub engine_results: BTreeMap<String, Chips>,
    /// Whether the engine resolved the showdown itself.
    pub resolved: bool,
}

/// Replays and checks pot, uncalled bets and per-player results against the
/// logged summary. Results may differ from the log only by the rake: every
/// player's logged result is at most the engine's, and the shortfalls sum to
/// the rake. When a contender mucked, the engine cannot pick winners; the
/// check then covers contributions and that collectors were contenders.
pub fn verify(record: &HandRecord) -> Result<ReplayReport, ReplayError> {
    let state = replay(record)?;
    let engine_pot: Chips = state.seat_numbers().iter().map(|s| state.total_contribution(*s)).sum();
    if engine_pot != record.pot_total {
        return Err(mismatch(format!("pot {engine_pot} differs from logged {}", record.pot_total)));
    }
    let engine_uncalled: Vec<_> = state.uncalled().iter().map(|u| (&u.player, u.amount)).collect();
    let logged_uncalled: Vec<_> = record.uncalled.iter().map(|u| (&u.player, u.amount)).collect();
    if engine_uncalled != logged_uncalled {
        return Err(mismatch(format!("uncalled bets {engine_uncalled:?} differ from logged {logged_uncalled:?}")));
    }
    let name_of = |s: u8| state.name(s).unwrap_or_default().to_string();
    match state.phase() {
        Phase::Complete => {
            let engine_results: BTreeMap<String, Chips> =
                state.results().into_iter().map(|(s, r)| (name_of(s), r)).collect();
            let mut shortfall = Chips::ZERO;
            for (name, logged) in &record.results {
                let ours = engine_results.get(name).copied().unwrap_or_default();
                let d = ours - *logged;
                if d < Chips::ZERO || d > record.rake {
                    return Err(mismatch(format!("{name}: engine result {ours}, logged {logged}, rake {}", record.rake)));
                }
                shortfall += d;
            }
            if shortfall != record.rake {
                return Err(mismatch(format!("results differ by {shortfall} in total, rake is {}", record.rake)));
            }
            Ok(ReplayReport { pot_total: engine_pot, engine_results, resolved: true })
        }
        Phase::AwaitingShowdown => {
            let logged = contributions(record);
            for s in state.seat_numbers() {
                let name = name_of(*s);
                if logged.get(&name).copied().unwrap_or_default() != state.total_contribution(*s) {
                    return Err(mismatch(format!("{name}'s contribution differs")));
                }
            }
            let live = state.live_seats().into_iter().map(name_of).collect::<Vec<_>>();
            if let Some(c) = record.collected.iter().find(|c| !live.contains(&c.player)) {
                return Err(mismatch(format!("{} collects without contesting the showdown", c.player)));
            }
            let engine_results =
                state.seat_numbers().iter().map(|s| (name_of(*s), -state.total_contribution(*s))).collect();
            Ok(ReplayReport { pot_total: engine_pot, engine_results, resolved: false })
        }
        other => Err(mismatch(format!("hand ended in phase {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand_history::parse_hand;

    #[test]
    fn showdown_hand_replays() {
        let r = parse_hand(include_str!("../tests/fixtures/showdown_two_pair.txt")).unwrap().record;
        let report = verify(&r).unwrap();
        assert!(report.resolved);
        assert_eq!(report.engine_results["phalves77"], Chips(183));
        assert_eq!(report.engine_results["gefahrensucher"], Chips(-183));
    }

    #[test]
    fn heads_up_dealer_acts_first_preflop() {
        let r = parse_hand(include_str!("../tests/fixtures/showdown_two_pair.txt")).unwrap().record;
        let mut first = None;
        replay_with(&r, |s, e| {
            if first.is_none() {
                first = Some((s.to_act(), e.actor.clone()));
            }
        })
        .unwrap();
        assert_eq!(first, Some((Some(1), "phalves77".to_string())));
    }

    #[test]
    fn out_of_turn_log_is_rejected() {
        let mut r = parse_hand(include_str!("../tests/fixtures/showdown_two_pair.txt")).unwrap().record;
        let i = r.actions.iter().position(|a| a.street == Street::Flop).unwrap();
        r.actions.swap(i, i + 1);
        assert!(matches!(verify(&r), Err(ReplayError::Mismatch(_))));
    }
}
