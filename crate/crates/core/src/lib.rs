//! Hand-history parsing, prompt construction, dataset emission, no-limit
//! hold'em simulation and evaluation metrics for language-model poker
//! advisors.
//!
//! The crate is organised along the data pipeline:
//!
//! * [`cards`] card types and the 7-card evaluator,
//! * [`hand_history`] PokerStars-style log parsing and writing,
//! * [`analytics`] per-player win rates and win-rate bands,
//! * [`prompt`] decision-point reconstruction and prompt rendering,
//! * [`dataset`] SFT / reward-model record emission,
//! * [`engine`] the authoritative game state machine,
//! * [`policies`] equity, random, scripted and remote decision makers,
//! * [`metrics`] macro-F1, perplexity, action scores and friends,
//! * [`sim`] policy-vs-policy match harness.

pub mod analytics;
pub mod cards;
pub mod dataset;
pub mod engine;
pub mod hand_history;
pub mod metrics;
pub mod money;
pub mod policies;
pub mod prompt;
pub mod replay;
pub mod sim;

pub use cards::{Card, HandCategory, HandValue, HoleCharacteristics, Rank, Suit};
pub use engine::{GameState, LegalActionSet, TableConfig};
pub use hand_history::{ActionEvent, ActionKind, BlindStructure, HandRecord, SeatEntry, Street};
pub use money::Chips;
pub use policies::PolicyDecision;
pub use prompt::DecisionPoint;
