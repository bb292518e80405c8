//! Shared inputs for the criterion benchmarks.

use pokerlm_core::cards::{parse_cards, Card};

pub const CORPUS: &str = include_str!("../../core/tests/fixtures/corpus/synthetic_6max.txt");
pub const SHOWDOWN: &str = include_str!("../../core/tests/fixtures/showdown_two_pair.txt");

/// A spread of seven-card hands covering every category.
pub fn seven_card_hands() -> Vec<[Card; 7]> {
    [
        "Ah Kd 9c 7s 4h 3d 2c",
        "Ah Ad 9c 7s 4h 3d 2c",
        "Ah Ad 9c 9s 4h 3d 2c",
        "Ah Ad As 9s 4h 3d 2c",
        "Th Jd Qc Ks Ah 3d 2c",
        "Ah 8h 9h 7h 4h 3d 2c",
        "Ah Ad As 9s 9h 3d 2c",
        "Ah Ad As Ac 4h 3d 2c",
        "5h 6h 7h 8h 9h 3d 2c",
        "Ts Js Qs Ks As 3d 2c",
    ]
    .iter()
    .map(|t| parse_cards(t).unwrap().try_into().unwrap())
    .collect()
}
