//! Fine-tuning artifacts: SFT records, reward records, dataset variants and
//! a deterministic hand-level train/test split.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{partition_hands, revealed_players, PlayerStats, WinRateBand};
use crate::hand_history::{write_hand, HandRecord};
use crate::policies::format_response;
use crate::prompt::{action_label, extract_decision_points, DecisionPoint, TEMPLATE_VERSION};

pub const SFT_SCHEMA: &str = "sft_record.v1";
pub const REWARD_SCHEMA: &str = "reward_record.v1";
pub const MANIFEST_SCHEMA: &str = "dataset_manifest.v1";
pub const SPLIT_RATIO: f64 = 0.9;
/// Win rate mapped to a reward of 1.
pub const REWARD_SCALE_MBB: f64 = 1500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Prompt is the unprocessed hand text.
    Raw,
    /// Structured prompts, every revealed player.
    Filtered,
    /// Structured prompts, players within a win-rate band.
    Banded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub variant: Variant,
    pub band: WinRateBand,
    pub min_hands: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub hand_id: String,
    pub street: String,
    pub hero: String,
    pub winrate_band: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftRecord {
    pub prompt: String,
    pub response: String,
    pub label_action: String,
    pub label_amount: f64,
    pub meta: RecordMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRecord {
    pub prompt: String,
    pub response: String,
    pub score: f64,
    pub meta: RecordMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train_records: usize,
    pub test_records: usize,
    pub train_hands: usize,
    pub test_hands: usize,
    pub reward_records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema: String,
    pub template: String,
    pub variant: Variant,
    pub band: String,
    pub min_hands: usize,
    pub seed: u64,
    pub split_ratio: f64,
    pub counts: SplitCounts,
    /// Decision points dropped because the hand could not be replayed.
    pub skipped: usize,
    pub files: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no hands left after filtering by {0}")]
    Empty(String),
    #[error("invalid band {0}")]
    Band(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Reward for a hero with `win_rate` mbb/h, in [-1, 1].
pub fn reward_score(win_rate: f64) -> f64 {
    (win_rate / REWARD_SCALE_MBB).clamp(-1.0, 1.0)
}

/// Hands and heroes selected by a variant.
fn select<'a>(
    corpus: &'a [HandRecord],
    cfg: &DatasetConfig,
    stats: &BTreeMap<String, PlayerStats>,
) -> Vec<(&'a HandRecord, Vec<String>)> {
    match cfg.variant {
        Variant::Raw | Variant::Filtered => corpus
            .iter()
            .map(|r| (r, revealed_players(r)))
            .filter(|(_, h)| !h.is_empty())
            .collect(),
        Variant::Banded => {
            let eligible: BTreeMap<String, PlayerStats> =
                stats.iter().filter(|(_, s)| s.hands_played >= cfg.min_hands).map(|(k, v)| (k.clone(), v.clone())).collect();
            partition_hands(corpus, &cfg.band, &eligible).into_iter().map(|t| (t.record, t.heroes)).collect()
        }
    }
}

fn band_label(cfg: &DatasetConfig) -> String {
    match cfg.variant {
        Variant::Banded => cfg.band.label.clone(),
        _ => "all".to_string(),
    }
}

fn sft_from_point(dp: &DecisionPoint, prompt: String, band: &str) -> Option<SftRecord> {
    let d = dp.label_decision?;
    Some(SftRecord {
        prompt,
        response: format_response(&d),
        label_action: action_label(d.kind).to_string(),
        label_amount: d.amount.as_f64(),
        meta: RecordMeta { hand_id: dp.hand_id.clone(), street: dp.street.name().to_string(), hero: dp.hero.clone(), winrate_band: band.to_string() },
    })
}

/// Records for one hand, plus the number of heroes whose replay failed.
fn hand_records(record: &HandRecord, heroes: &[String], variant: Variant, band: &str) -> (Vec<SftRecord>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    let raw = matches!(variant, Variant::Raw)
        .then(|| record.source.clone().unwrap_or_else(|| write_hand(record)).trim_end().to_string());
    for hero in heroes {
        match extract_decision_points(record, hero) {
            Ok((points, _)) => {
                for dp in &points {
                    let prompt = raw.clone().unwrap_or_else(|| dp.render(None));
                    out.extend(sft_from_point(dp, prompt, band));
                }
            }
            Err(e) => {
                tracing::warn!(hand = %record.hand_id, hero = %hero, error = %e, "skipping hero");
                skipped += 1;
            }
        }
    }
    (out, skipped)
}

/// All SFT records of the variant, in corpus order.
pub fn build_records(
    corpus: &[HandRecord],
    cfg: &DatasetConfig,
    stats: &BTreeMap<String, PlayerStats>,
) -> Result<(Vec<SftRecord>, usize), DatasetError> {
    if !cfg.band.is_valid() {
        return Err(DatasetError::Band(cfg.band.to_string()));
    }
    let band = band_label(cfg);
    let selected = select(corpus, cfg, stats);
    let per_hand: Vec<(Vec<SftRecord>, usize)> =
        selected.par_iter().map(|(r, heroes)| hand_records(r, heroes, cfg.variant, &band)).collect();
    let skipped = per_hand.iter().map(|p| p.1).sum();
    let records: Vec<SftRecord> = per_hand.into_iter().flat_map(|p| p.0).collect();
    if records.is_empty() {
        return Err(DatasetError::Empty(cfg.band.to_string()));
    }
    Ok((records, skipped))
}

/// Hand ids assigned to train: a seeded shuffle of the sorted ids, first
/// ⌈0.9·n⌉ go to train.
pub fn split_hands(hand_ids: &BTreeSet<String>, seed: u64) -> BTreeSet<String> {
    let mut ids: Vec<&String> = hand_ids.iter().collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (SPLIT_RATIO * ids.len() as f64).ceil() as usize;
    ids.into_iter().take(n_train).cloned().collect()
}

/// Train and test record sets; every hand's records land on one side.
pub fn emit_sft(records: Vec<SftRecord>, seed: u64) -> (Vec<SftRecord>, Vec<SftRecord>) {
    let ids: BTreeSet<String> = records.iter().map(|r| r.meta.hand_id.clone()).collect();
    let train_ids = split_hands(&ids, seed);
    records.into_iter().partition(|r| train_ids.contains(&r.meta.hand_id))
}

/// One scored record per decision of every revealed player with enough
/// hands.
pub fn emit_reward(
    corpus: &[HandRecord],
    stats: &BTreeMap<String, PlayerStats>,
    min_hands: usize,
) -> Vec<RewardRecord> {
    let cfg = DatasetConfig { variant: Variant::Banded, band: WinRateBand::all(), min_hands, seed: 0 };
    let selected = select(corpus, &cfg, stats);
    selected
        .par_iter()
        .flat_map_iter(|(r, heroes)| {
            let (records, _) = hand_records(r, heroes, Variant::Filtered, "all");
            records.into_iter().map(|s| {
                let wr = stats[&s.meta.hero].win_rate_mbb_h;
                RewardRecord { prompt: s.prompt, response: s.response, score: reward_score(wr), meta: s.meta }
            })
        })
        .collect()
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), DatasetError> {
    let io = |source| DatasetError::Io { path: path.to_path_buf(), source };
    let mut w = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    for r in rows {
        serde_json::to_writer(&mut w, r).expect("records serialize");
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Builds the variant and writes `sft_train.jsonl`, `sft_test.jsonl`,
/// `reward.jsonl` and `manifest.json` into `out_dir`.
pub fn build_dataset(
    corpus: &[HandRecord],
    stats: &BTreeMap<String, PlayerStats>,
    cfg: &DatasetConfig,
    out_dir: &Path,
) -> Result<DatasetManifest, DatasetError> {
    let (records, skipped) = build_records(corpus, cfg, stats)?;
    let (train, test) = emit_sft(records, cfg.seed);
    let reward = emit_reward(corpus, stats, cfg.min_hands);
    fs::create_dir_all(out_dir).map_err(|source| DatasetError::Io { path: out_dir.to_path_buf(), source })?;
    let files = ["sft_train.jsonl", "sft_test.jsonl", "reward.jsonl", "manifest.json"];
    write_jsonl(&out_dir.join(files[0]), &train)?;
    write_jsonl(&out_dir.join(files[1]), &test)?;
    write_jsonl(&out_dir.join(files[2]), &reward)?;
    let hands = |rs: &[SftRecord]| rs.iter().map(|r| &r.meta.hand_id).collect::<BTreeSet<_>>().len();
    let manifest = DatasetManifest {
        schema: MANIFEST_SCHEMA.into(),
        template: TEMPLATE_VERSION.into(),
        variant: cfg.variant,
        band: band_label(cfg),
        min_hands: cfg.min_hands,
        seed: cfg.seed,
        split_ratio: SPLIT_RATIO,
        counts: SplitCounts {
            train_records: train.len(),
            test_records: test.len(),
            train_hands: hands(&train),
            test_hands: hands(&test),
            reward_records: reward.len(),
        },
        skipped,
        files: files.iter().map(|s| s.to_string()).collect(),
    };
    let path = out_dir.join(files[3]);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(|source| DatasetError::Io { path, source })?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::compute_stats;
    use crate::hand_history::parse_hand;
    use crate::policies::parse_action_text;

    fn fig4() -> HandRecord {
        let text = include_str!("../tests/fixtures/showdown_two_pair.txt");
        parse_hand(text).unwrap().record.with_source(Some(text.to_string()))
    }

    #[test]
    fn reward_clamps() {
        assert_eq!(reward_score(1500.0), 1.0);
        assert_eq!(reward_score(4000.0), 1.0);
        assert_eq!(reward_score(0.0), 0.0);
        assert_eq!(reward_score(-3000.0), -1.0);
        assert_eq!(reward_score(750.0), 0.5);
    }

    #[test]
    fn raw_prompt_is_log_text() {
        let corpus = vec![fig4()];
        let stats = compute_stats(&corpus);
        let cfg = DatasetConfig { variant: Variant::Raw, band: WinRateBand::all(), min_hands: 1, seed: 1 };
        let (raw, _) = build_records(&corpus, &cfg, &stats).unwrap();
        let text = include_str!("../tests/fixtures/showdown_two_pair.txt").trim_end();
        assert!(raw.iter().all(|r| r.prompt == text));
        let cfg2 = DatasetConfig { variant: Variant::Filtered, ..cfg };
        let (filtered, _) = build_records(&corpus, &cfg2, &stats).unwrap();
        assert_eq!(raw.len(), filtered.len());
        assert_eq!(filtered.len(), 4 + 4);
    }

    #[test]
    fn responses_round_trip() {
        let corpus = vec![fig4()];
        let stats = compute_stats(&corpus);
        let cfg = DatasetConfig { variant: Variant::Filtered, band: WinRateBand::all(), min_hands: 1, seed: 1 };
        let (records, _) = build_records(&corpus, &cfg, &stats).unwrap();
        for r in &records {
            let d = parse_action_text(&r.response).unwrap();
            assert_eq!(action_label(d.kind), r.label_action);
            assert_eq!(d.amount.as_f64(), r.label_amount);
        }
        assert_eq!(records[0].response, "You should raise to 0.15.");
    }

    #[test]
    fn empty_band_is_an_error() {
        let corpus = vec![fig4()];
        let stats = compute_stats(&corpus);
        let cfg = DatasetConfig { variant: Variant::Banded, band: WinRateBand::above(1e9), min_hands: 1, seed: 1 };
        assert!(matches!(build_records(&corpus, &cfg, &stats), Err(DatasetError::Empty(_))));
        assert!(matches!(build_records(&[], &DatasetConfig { band: WinRateBand::all(), ..cfg }, &stats), Err(DatasetError::Empty(_))));
    }

    #[test]
    fn split_is_ninety_ten() {
        let ids: BTreeSet<String> = (0..1000).map(|i| format!("h{i}")).collect();
        let train = split_hands(&ids, 7);
        assert_eq!(train.len(), 900);
        assert_eq!(train, split_hands(&ids, 7));
        assert_ne!(train, split_hands(&ids, 8));
    }
}
