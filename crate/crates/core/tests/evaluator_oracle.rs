mod support;

use std::time::{Duration, Instant};

use pokerlm_core::cards::{evaluate_best, full_deck, parse_cards, Card};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value(cards: &[Card; 7]) -> support::Score {
    let v = evaluate_best(&[cards[0], cards[1]], &cards[2..]).unwrap();
    (v.category() as u8, v.tiebreaks().to_vec())
}

#[test]
fn random_deals_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut deck = full_deck();
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for _ in 0..10_000 {
        deck.shuffle(&mut rng);
        let seven: [Card; 7] = deck[..7].try_into().unwrap();
        let (ours, oracle) = (value(&seven), support::best_of_seven(&seven));
        if ours != oracle {
            mismatches.push((seven, ours, oracle));
        }
    }
    assert!(mismatches.is_empty(), "{} mismatches, first {:?}", mismatches.len(), mismatches.first());
    assert!(start.elapsed() < Duration::from_secs(10), "took {:?}", start.elapsed());
}

#[test]
fn edge_hands_match_brute_force() {
    for text in [
        "Ah 2d 3c 4s 5h Kd Kc", // wheel over a pair
        "Ah Kh Qh Jh Th 9h 8h", // royal with extra suited cards
        "9s 8s 7s 6s 5s 4s Ad", // straight flush, not the wheel
        "Kd Kh Ks Qd Qh Qs 2c", // two sets
        "7c 7d 7h 7s Ac Kd Qh", // quads kicker
        "2c 2d 3c 3d 4c 4d Ah", // three pairs
        "Ac 5c 4c 3c 2c Kh Kd", // steel wheel
    ] {
        let cards: [Card; 7] = parse_cards(text).unwrap().try_into().unwrap();
        assert_eq!(value(&cards), support::best_of_seven(&cards), "{text}");
    }
}
