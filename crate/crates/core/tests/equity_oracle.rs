mod support;

use std::time::{Duration, Instant};

use pokerlm_core::cards::{full_deck, Card};
use pokerlm_core::policies::mc_equity_in_deck;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 100_000;

/// Tens through aces: small enough to enumerate exhaustively.
fn small_deck() -> Vec<Card> {
    full_deck().into_iter().filter(|c| c.rank.value() >= 10).collect()
}

#[test]
fn monte_carlo_matches_enumeration_on_small_deck() {
    let deck = small_deck();
    assert_eq!(deck.len(), 20);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    for state in 0..20 {
        let n_opp = if state % 3 == 2 { 2 } else { 1 };
        let board_len = match (n_opp, state % 4) {
            (2, k) => [3, 4, 5, 3][k],
            (_, k) => [0, 3, 4, 5][k],
        };
        let mut cards = deck.clone();
        cards.shuffle(&mut rng);
        let hole = [cards[0], cards[1]];
        let board = &cards[2..2 + board_len];
        let exact = support::exhaustive_equity(&hole, board, n_opp, &deck);
        let mut mc_rng = ChaCha8Rng::seed_from_u64(rng.random());
        let estimate = mc_equity_in_deck(&hole, board, n_opp, SAMPLES, &deck, &mut mc_rng);
        let sigma = (exact * (1.0 - exact) / SAMPLES as f64).sqrt().max(1e-9);
        assert!(
            (estimate - exact).abs() <= 3.0 * sigma,
            "state {state}: {hole:?} on {board:?} vs {n_opp}: mc {estimate:.5}, exact {exact:.5}, 3 sigma {:.5}",
            3.0 * sigma
        );
    }
    assert!(start.elapsed() < Duration::from_secs(60), "took {:?}", start.elapsed());
}
