//! Per-player win rates, ranking, win-rate bands and revenue histograms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hand_history::{has_revealed_showdown, HandRecord, Street};

/// Players with fewer hands are left out of rankings by default.
pub const DEFAULT_MIN_HANDS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerStats {
    pub player_name: String,
    pub hands_played: usize,
    pub net_bb: f64,
    pub win_rate_mbb_h: f64,
    /// Sample standard deviation of per-hand results (mbb) over √hands.
    pub stddev_mbb_h: f64,
    pub per_hand_deltas_bb: Vec<f64>,
}

impl PlayerStats {
    fn from_deltas(player_name: String, deltas: Vec<f64>) -> PlayerStats {
        let (mean, sd) = crate::metrics::mbb_per_hand(&deltas);
        let n = deltas.len();
        PlayerStats {
            player_name,
            hands_played: n,
            net_bb: deltas.iter().sum(),
            win_rate_mbb_h: mean,
            stddev_mbb_h: if n > 0 { sd / (n as f64).sqrt() } else { 0.0 },
            per_hand_deltas_bb: deltas,
        }
    }
}

/// Net result of `player` in `record`, in that hand's big blinds.
pub fn hand_delta_bb(record: &HandRecord, player: &str) -> Option<f64> {
    record.results.get(player).map(|r| r.in_bb(record.blinds.big_blind))
}

/// Win-rate statistics for every player seen in the corpus. Every dealt
/// hand counts toward `hands_played`.
pub fn compute_stats(corpus: &[HandRecord]) -> BTreeMap<String, PlayerStats> {
    let mut deltas: HashMap<&str, Vec<f64>> = HashMap::new();
    for r in corpus {
        for (name, delta) in &r.results {
            deltas.entry(name.as_str()).or_default().push(delta.in_bb(r.blinds.big_blind));
        }
    }
    deltas
        .into_par_iter()
        .map(|(name, d)| (name.to_string(), PlayerStats::from_deltas(name.to_string(), d)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Players with at least `min_hands`, best win rate first; ties by hands
/// played (more first), then name.
pub fn rank_players(stats: &BTreeMap<String, PlayerStats>, min_hands: usize) -> Vec<PlayerStats> {
    let mut out: Vec<PlayerStats> = stats.values().filter(|s| s.hands_played >= min_hands).cloned().collect();
    out.sort_by(|a, b| {
        b.win_rate_mbb_h
            .total_cmp(&a.win_rate_mbb_h)
            .then(b.hands_played.cmp(&a.hands_played))
            .then(a.player_name.cmp(&b.player_name))
    });
    out
}

/// An interval of win rates in mbb/h; each bound may be open or closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateBand {
    pub label: String,
    pub lower: Option<f64>,
    #[serde(default)]
    pub lower_inclusive: bool,
    pub upper: Option<f64>,
    #[serde(default)]
    pub upper_inclusive: bool,
}

impl WinRateBand {
    pub fn new(label: impl Into<String>, lower: Option<(f64, bool)>, upper: Option<(f64, bool)>) -> WinRateBand {
        WinRateBand {
            label: label.into(),
            lower: lower.map(|l| l.0),
            lower_inclusive: lower.is_some_and(|l| l.1),
            upper: upper.map(|u| u.0),
            upper_inclusive: upper.is_some_and(|u| u.1),
        }
    }

    pub fn all() -> WinRateBand {
        WinRateBand::new("all", None, None)
    }

    /// Strictly above `x`.
    pub fn above(x: f64) -> WinRateBand {
        WinRateBand::new(format!(">{x}"), Some((x, false)), None)
    }

    /// Strictly below `x`.
    pub fn below(x: f64) -> WinRateBand {
        WinRateBand::new(format!("<{x}"), None, Some((x, false)))
    }

    /// Closed interval.
    pub fn between(lo: f64, hi: f64) -> WinRateBand {
        WinRateBand::new(format!("{lo}~{hi}"), Some((lo, true)), Some((hi, true)))
    }

    pub fn is_valid(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l < u,
            _ => true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = match self.lower {
            Some(l) if self.lower_inclusive => x >= l,
            Some(l) => x > l,
            None => true,
        };
        let hi_ok = match self.upper {
            Some(u) if self.upper_inclusive => x <= u,
            Some(u) => x < u,
            None => true,
        };
        lo_ok && hi_ok
    }
}

impl fmt::Display for WinRateBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = match self.lower {
            Some(l) => format!("{}{l}", if self.lower_inclusive { "[" } else { "(" }),
            None => "(-inf".to_string(),
        };
        let hi = match self.upper {
            Some(u) => format!("{u}{}", if self.upper_inclusive { "]" } else { ")" }),
            None => "+inf)".to_string(),
        };
        write!(f, "{lo}, {hi} mbb/h")
    }
}

/// A hand together with the players it is used for.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedHand<'a> {
    pub record: &'a HandRecord,
    pub heroes: Vec<String>,
}

/// Players whose hole cards a showdown-revealed hand exposes.
pub fn revealed_players(record: &HandRecord) -> Vec<String> {
    if !has_revealed_showdown(record) {
        return Vec::new();
    }
    record.seats.iter().map(|s| s.player_name.clone()).filter(|p| record.hole_cards.contains_key(p)).collect()
}

/// Showdown-revealed hands with at least one revealed player whose win
/// rate lies in `band`; those players become the hand's heroes.
pub fn partition_hands<'a>(
    corpus: &'a [HandRecord],
    band: &WinRateBand,
    stats: &BTreeMap<String, PlayerStats>,
) -> Vec<TaggedHand<'a>> {
    corpus
        .iter()
        .filter_map(|record| {
            let heroes: Vec<String> = revealed_players(record)
                .into_iter()
                .filter(|p| stats.get(p).is_some_and(|s| band.contains(s.win_rate_mbb_h)))
                .collect();
            (!heroes.is_empty()).then_some(TaggedHand { record, heroes })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Counts per bin `[edge_i, edge_{i+1})`; the last bin is closed and values
/// outside the edges go to the nearest end bin, so counts sum to the input
/// length.
pub fn revenue_histogram(deltas_bb: &[f64], bin_edges: &[f64]) -> Vec<HistogramBin> {
    assert!(bin_edges.len() >= 2, "need at least two bin edges");
    let nb = bin_edges.len() - 1;
    let mut bins: Vec<HistogramBin> =
        bin_edges.windows(2).map(|w| HistogramBin { lo: w[0], hi: w[1], count: 0 }).collect();
    for &d in deltas_bb {
        let idx = bin_edges[1..nb].partition_point(|e| *e <= d);
        bins[idx.min(nb - 1)].count += 1;
    }
    bins
}

/// Evenly spaced edges from `lo` to `hi`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
}

/// Deltas of `player` grouped by the last street each hand reached.
pub fn staged_deltas(corpus: &[HandRecord], player: &str) -> BTreeMap<Street, Vec<f64>> {
    let mut out: BTreeMap<Street, Vec<f64>> = BTreeMap::new();
    for r in corpus {
        if let Some(d) = hand_delta_bb(r, player) {
            out.entry(r.final_street()).or_default().push(d);
        }
    }
    out
}

pub fn staged_revenue_histogram(
    corpus: &[HandRecord],
    player: &str,
    bin_edges: &[f64],
) -> BTreeMap<Street, Vec<HistogramBin>> {
    staged_deltas(corpus, player).into_iter().map(|(s, d)| (s, revenue_histogram(&d, bin_edges))).collect()
}
