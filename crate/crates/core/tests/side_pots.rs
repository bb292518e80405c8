mod support;

#[test]
fn ten_fixtures_present() {
    assert_eq!(support::load_side_pots().len(), 10);
}

#[test]
fn payouts_match_hand_computed_values() {
    let failures: Vec<String> =
        support::load_side_pots().iter().filter_map(|fx| support::check_side_pot(fx).err()).collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn four_way_all_in_builds_three_pots() {
    let fx = support::load_side_pots().into_iter().find(|f| f.name.starts_with("four-way")).unwrap();
    let state = support::play_side_pot(&fx).unwrap();
    let amounts: Vec<i64> = state.pots().iter().map(|p| p.amount.cents()).collect();
    assert_eq!(amounts, vec![200, 150, 200]);
}
