//! Evaluation metrics: macro-F1 and confusion matrices over the five action
//! classes, amount MSE, perplexity, action scores, average investment and
//! win rate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hand_history::{contributions, effective_kinds, ActionKind, HandRecord, Street};

pub const NUM_CLASSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionLabel {
    Check,
    Call,
    Fold,
    Bet,
    Raise,
}

impl ActionLabel {
    pub const ALL: [ActionLabel; NUM_CLASSES] =
        [ActionLabel::Check, ActionLabel::Call, ActionLabel::Fold, ActionLabel::Bet, ActionLabel::Raise];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionLabel::Check => "check",
            ActionLabel::Call => "call",
            ActionLabel::Fold => "fold",
            ActionLabel::Bet => "bet",
            ActionLabel::Raise => "raise",
        }
    }

    /// `None` for blinds, shows and unresolved all-ins.
    pub fn from_kind(kind: ActionKind) -> Option<ActionLabel> {
        Some(match kind {
            ActionKind::Check => ActionLabel::Check,
            ActionKind::Call => ActionLabel::Call,
            ActionKind::Fold => ActionLabel::Fold,
            ActionKind::Bet => ActionLabel::Bet,
            ActionKind::Raise => ActionLabel::Raise,
            _ => return None,
        })
    }

    pub fn carries_amount(self) -> bool {
        matches!(self, ActionLabel::Bet | ActionLabel::Raise)
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionLabel {
    type Err = MetricError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionLabel::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| MetricError::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("prediction and truth lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("probability {0} outside (0, 1]")]
    BadProbability(f64),
    #[error("unknown action label `{0}`")]
    UnknownLabel(String),
}

fn check_pair<T, U>(pred: &[T], truth: &[U]) -> Result<(), MetricError> {
    if pred.len() != truth.len() {
        return Err(MetricError::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

/// Rows are true classes, columns predicted classes.
pub fn confusion_matrix(pred: &[ActionLabel], truth: &[ActionLabel]) -> Result<[[u64; NUM_CLASSES]; NUM_CLASSES], MetricError> {
    check_pair(pred, truth)?;
    let mut m = [[0u64; NUM_CLASSES]; NUM_CLASSES];
    for (p, t) in pred.iter().zip(truth) {
        m[t.index()][p.index()] += 1;
    }
    Ok(m)
}

/// Per-class F1 from a confusion matrix; a class with no true and no
/// predicted samples scores 0.
pub fn per_class_f1(m: &[[u64; NUM_CLASSES]; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let mut out = [0.0; NUM_CLASSES];
    for (c, slot) in out.iter_mut().enumerate() {
        let tp = m[c][c] as f64;
        let predicted: u64 = (0..NUM_CLASSES).map(|r| m[r][c]).sum();
        let actual: u64 = m[c].iter().sum();
        let denom = predicted as f64 + actual as f64;
        *slot = if denom == 0.0 { 0.0 } else { 2.0 * tp / denom };
    }
    out
}

/// Unweighted mean of the five per-class F1 scores.
pub fn macro_f1(pred: &[ActionLabel], truth: &[ActionLabel]) -> Result<f64, MetricError> {
    let m = confusion_matrix(pred, truth)?;
    Ok(per_class_f1(&m).iter().sum::<f64>() / NUM_CLASSES as f64)
}

/// Mean squared difference in big blinds.
pub fn amount_mse_bb(pred_amounts: &[f64], truth_amounts: &[f64], big_blind: f64) -> Result<f64, MetricError> {
    check_pair(pred_amounts, truth_amounts)?;
    let sum: f64 = pred_amounts
        .iter()
        .zip(truth_amounts)
        .map(|(p, t)| {
            let d = (p - t) / big_blind;
            d * d
        })
        .sum();
    Ok(sum / pred_amounts.len() as f64)
}

/// Amount pairs that enter the MSE: correctly predicted bets and raises.
pub fn value_pairs(
    pred: &[(ActionLabel, f64)],
    truth: &[(ActionLabel, f64)],
) -> Result<(Vec<f64>, Vec<f64>), MetricError> {
    check_pair(pred, truth)?;
    Ok(pred
        .iter()
        .zip(truth)
        .filter(|(p, t)| p.0 == t.0 && t.0.carries_amount())
        .map(|(p, t)| (p.1, t.1))
        .unzip())
}

/// `(∏ p)^(-1/N)`, computed in log space.
pub fn perplexity(token_probs: &[f64]) -> Result<f64, MetricError> {
    if token_probs.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut log_sum = 0.0;
    for &p in token_probs {
        if !(p > 0.0 && p <= 1.0) {
            return Err(MetricError::BadProbability(p));
        }
        log_sum += p.ln();
    }
    Ok((-log_sum / token_probs.len() as f64).exp())
}

/// (mean mbb/h, sample standard deviation of per-hand results in mbb).
pub fn mbb_per_hand(deltas_bb: &[f64]) -> (f64, f64) {
    let n = deltas_bb.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = deltas_bb.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { deltas_bb.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    (1000.0 * mean, 1000.0 * var.sqrt())
}

/// Standard error of the mean win rate, in mbb/h.
pub fn standard_error(deltas_bb: &[f64]) -> f64 {
    let (_, sd) = mbb_per_hand(deltas_bb);
    if deltas_bb.is_empty() {
        0.0
    } else {
        sd / (deltas_bb.len() as f64).sqrt()
    }
}

/// One player's view of one game, for action scores and investment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeroGame {
    pub actions: Vec<(Street, ActionLabel)>,
    /// Betting streets on which the player still held cards.
    pub streets: u8,
    pub investment_bb: f64,
    pub delta_bb: f64,
}

impl HeroGame {
    pub fn from_record(record: &HandRecord, player: &str) -> Option<HeroGame> {
        let delta = record.results.get(player)?;
        let bb = record.blinds.big_blind;
        let kinds = effective_kinds(record);
        let actions: Vec<(Street, ActionLabel)> = record
            .actions
            .iter()
            .zip(&kinds)
            .filter(|(a, _)| a.actor == player)
            .filter_map(|(a, k)| ActionLabel::from_kind(*k).map(|l| (a.street, l)))
            .collect();
        let fold_street = actions.iter().find(|(_, l)| *l == ActionLabel::Fold).map(|(s, _)| *s);
        let streets = fold_street.unwrap_or_else(|| record.final_street()).ordinal();
        let investment = contributions(record).get(player).copied().unwrap_or_default();
        Some(HeroGame { actions, streets, investment_bb: investment.in_bb(bb), delta_bb: delta.in_bb(bb) })
    }

    /// Per-game score of each class: occurrences over streets, capped at 1.
    pub fn action_scores(&self) -> [f64; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for (_, l) in &self.actions {
            counts[l.index()] += 1;
        }
        let streets = self.streets.max(1) as f64;
        counts.map(|c| (c as f64 / streets).min(1.0))
    }
}

/// Mean of per-game action scores.
pub fn action_scores(games: &[HeroGame]) -> [f64; NUM_CLASSES] {
    let mut acc = [0.0; NUM_CLASSES];
    if games.is_empty() {
        return acc;
    }
    for g in games {
        for (a, s) in acc.iter_mut().zip(g.action_scores()) {
            *a += s;
        }
    }
    acc.map(|a| a / games.len() as f64)
}

/// Mean chips committed per game (blinds included), in big blinds.
pub fn average_investment(games: &[HeroGame]) -> f64 {
    if games.is_empty() {
        return 0.0;
    }
    games.iter().map(|g| g.investment_bb).sum::<f64>() / games.len() as f64
}

/// Aggregated results of one policy or player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchStats {
    pub hands: usize,
    pub mbb_h: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub per_action_scores: std::collections::BTreeMap<ActionLabel, f64>,
    pub avg_investment_bb: f64,
}

impl MatchStats {
    pub fn from_games(games: &[HeroGame]) -> MatchStats {
        let deltas: Vec<f64> = games.iter().map(|g| g.delta_bb).collect();
        let (mbb_h, stddev) = mbb_per_hand(&deltas);
        let scores = action_scores(games);
        MatchStats {
            hands: games.len(),
            mbb_h,
            stddev,
            stderr: standard_error(&deltas),
            per_action_scores: ActionLabel::ALL.into_iter().zip(scores).collect(),
            avg_investment_bb: average_investment(games),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ActionLabel::*;

    #[test]
    fn macro_f1_examples() {
        assert_eq!(macro_f1(&ActionLabel::ALL, &ActionLabel::ALL).unwrap(), 1.0);
        assert_eq!(macro_f1(&[Check, Fold], &[Check, Call]).unwrap(), 0.2);
        assert_eq!(macro_f1(&[Check], &[Check, Call]), Err(MetricError::LengthMismatch(1, 2)));
    }

    #[test]
    fn confusion_layout() {
        let m = confusion_matrix(&[Call], &[Fold]).unwrap();
        assert_eq!(m[Fold.index()][Call.index()], 1);
        assert_eq!(m.iter().flatten().sum::<u64>(), 1);
    }

    #[test]
    fn mse_examples() {
        assert_eq!(amount_mse_bb(&[0.15], &[0.05], 0.05).unwrap().round(), 4.0);
        assert_eq!(amount_mse_bb(&[1.0, 6.0], &[3.0, 6.0], 1.0).unwrap(), 2.0);
        assert_eq!(amount_mse_bb(&[2.0, 2.0], &[2.0, 2.0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn perplexity_examples() {
        assert_eq!(perplexity(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(perplexity(&[0.5, 0.5]).unwrap(), 2.0);
        assert_eq!(perplexity(&[0.25, 1.0]).unwrap(), 2.0);
        assert!(perplexity(&[0.0]).is_err());
        assert!(perplexity(&[]).is_err());
    }

    #[test]
    fn action_score_worked_example() {
        let g = HeroGame {
            actions: vec![(Street::Preflop, Check), (Street::Flop, Check), (Street::Turn, Check), (Street::Turn, Fold)],
            streets: 3,
            investment_bb: 0.0,
            delta_bb: 0.0,
        };
        let s = action_scores(&[g]);
        assert_eq!(s[Check.index()], 1.0);
        assert!((s[Fold.index()] - 0.33).abs() < 0.005);
    }

    #[test]
    fn win_rate_examples() {
        assert_eq!(mbb_per_hand(&[0.5; 10]).0, 500.0);
        assert_eq!(mbb_per_hand(&[0.0; 4]), (0.0, 0.0));
        let (m, sd) = mbb_per_hand(&[1.0, -1.0]);
        assert_eq!(m, 0.0);
        assert!((sd - 1000.0 * 2f64.sqrt()).abs() < 1e-9);
    }
}
