//! Drives a live hand through the HTTP API against a stub remote model.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::time::Duration;

use axum::routing::post;
use axum::{Json, Router};
use pokerlm_core::cards::{parse_cards, Card};
use pokerlm_core::engine::{Dealing, GameState, TableConfig};
use pokerlm_core::hand_history::{BlindStructure, SeatEntry};
use pokerlm_core::policies::PolicyDecision;
use pokerlm_core::prompt::DecisionPoint;
use pokerlm_core::Chips;
use pokerlm_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};

fn spawn(app: Router) -> SocketAddr {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
        rt.block_on(async move {
            let l = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(l, app).await.unwrap();
        });
    });
    addr
}

/// Stand-in for a fine-tuned model: calls by default, raises when pushed,
/// checks when checking is offered, and declines probability questions.
fn stub_model() -> SocketAddr {
    async fn answer(Json(req): Json<Value>) -> Json<Value> {
        let prompt = req["prompt"].as_str().unwrap_or_default();
        let last = prompt.lines().last().unwrap_or_default();
        let text = if last == "Please be aggressive." {
            "You should raise to 0.5."
        } else if last.starts_with("What is my probability") {
            "Sorry, I can't calculate the probability."
        } else if prompt.contains("[\"fold\", \"check\", \"bet\"]") {
            "You should check."
        } else {
            "You should call."
        };
        Json(json!({ "text": text }))
    }
    spawn(Router::new().route("/advise", post(answer)))
}

struct Client {
    base: String,
    agent: ureq::Agent,
}

impl Client {
    fn new(addr: SocketAddr) -> Client {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Client { base: format!("http://{addr}"), agent }
    }

    fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let mut r = self.agent.post(format!("{}{path}", self.base)).send_json(&body).unwrap();
        (r.status().as_u16(), r.body_mut().read_json().unwrap())
    }

    fn get(&self, path: &str) -> (u16, Value) {
        let mut r = self.agent.get(format!("{}{path}", self.base)).call().unwrap();
        (r.status().as_u16(), r.body_mut().read_json().unwrap())
    }
}

fn table(advisor: Value) -> Value {
    json!({
        "small_blind": 0.02, "big_blind": 0.05, "currency": "USD",
        "seats": [
            {"seat": 2, "name": "hero", "stack": 3.94},
            {"seat": 3, "stack": 2.38},
            {"seat": 5, "stack": 5.54},
            {"seat": 6, "stack": 3.75},
            {"seat": 7, "stack": 4.22},
            {"seat": 9, "stack": 1.57}
        ],
        "dealer_seat": 9, "hero_seat": 2, "hero_cards": ["Th", "Ah"],
        "advisor": advisor
    })
}

fn act(seat: u8, action: &str, amount: Option<f64>) -> Value {
    match amount {
        Some(a) => json!({"type": "action", "seat": seat, "action": action, "amount": a}),
        None => json!({"type": "action", "seat": seat, "action": action}),
    }
}

/// The same hand driven directly through the engine.
fn mirror() -> GameState {
    let stacks = [(2, "hero", 394), (3, "Seat 3", 238), (5, "Seat 5", 554), (6, "Seat 6", 375), (7, "Seat 7", 422), (9, "Seat 9", 157)];
    let hero = parse_cards("Th Ah").unwrap();
    GameState::new(TableConfig {
        hand_id: "1".into(),
        table_name: "Live".into(),
        max_seats: 9,
        blinds: BlindStructure { small_blind: Chips(2), big_blind: Chips(5), currency: "USD".into() },
        seats: stacks
            .iter()
            .map(|(s, n, c)| SeatEntry { seat_no: *s, player_name: n.to_string(), starting_stack: Chips(*c) })
            .collect(),
        dealer_seat: 9,
        dealing: Dealing::External,
        hole_cards: BTreeMap::from([(2, [hero[0], hero[1]])]),
    })
    .unwrap()
}

fn core_prompt(state: &GameState, directive: Option<&str>) -> String {
    DecisionPoint::from_state(state, 2, &BTreeMap::new()).unwrap().render(directive)
}

#[test]
fn live_hand_through_the_api() {
    let model = stub_model();
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig { store: Some(dir.path().to_path_buf()), ..ServiceConfig::default() };
    let api = Client::new(spawn(router(AppState::new(config.clone()).unwrap())));
    let advisor = json!({"type": "remote", "endpoint": format!("http://{model}/advise")});

    let (status, created) = api.post("/v1/sessions", table(advisor));
    assert_eq!(status, 201, "{created}");
    let id = created["session_id"].as_str().unwrap().to_string();
    let fig6 = include_str!("../../core/tests/fixtures/fig6_prompt.txt");
    let constant: String = fig6.lines().take(3).collect::<Vec<_>>().join("\n");
    assert_eq!(created["constant_prompt"], constant);
    let ev = format!("/v1/sessions/{id}/events");

    let mut engine = mirror();
    for (seat, a, amt) in [(5, "fold", None), (6, "fold", None), (7, "fold", None), (9, "raise", Some(0.1))] {
        let (s, snap) = api.post(&ev, act(seat, a, amt));
        assert_eq!(s, 200, "{snap}");
        let d = match a {
            "fold" => PolicyDecision::fold(),
            _ => PolicyDecision::raise(Chips(10)),
        };
        engine.apply_action(d).unwrap();
    }
    let (_, snap) = api.get(&format!("/v1/sessions/{id}"));
    assert_eq!(snap["pot"], 0.17);
    assert_eq!(snap["to_act"], 2);
    assert_eq!(snap["events"].as_array().unwrap().len(), 4);

    // Q1: plain advice
    let (s, q1) = api.post(&format!("/v1/sessions/{id}/advice"), json!({}));
    assert_eq!(s, 200, "{q1}");
    assert_eq!(q1["status"], "ok");
    assert_eq!(q1["action"], "call");
    let expected = include_str!("fixtures/fig7_preflop_prompt.txt").trim_end();
    assert_eq!(q1["prompt"], expected);
    assert_eq!(q1["prompt"], core_prompt(&engine, None));
    let (_, p) = api.get(&format!("/v1/sessions/{id}/prompt"));
    assert_eq!(p["prompt"], expected);

    // Q2: directive appended verbatim, stub raise snapped onto the menu
    let (_, q2) = api.post(&format!("/v1/sessions/{id}/advice"), json!({"directive": "Please be aggressive."}));
    assert_eq!(q2["action"], "raise");
    assert_eq!(q2["amount"], 0.5);
    assert_eq!(q2["prompt"], core_prompt(&engine, Some("Please be aggressive.")));
    assert!(q2["prompt"].as_str().unwrap().ends_with("\nPlease be aggressive."));

    for (seat, a) in [(2, "call"), (3, "call")] {
        let (s, snap) = api.post(&ev, act(seat, a, None));
        assert_eq!(s, 200, "{snap}");
        engine.apply_action(PolicyDecision::call()).unwrap();
    }

    // illegal event: betting before the flop is dealt; nothing changes
    let (_, before) = api.get(&format!("/v1/sessions/{id}"));
    let (s, err) = api.post(&ev, act(2, "check", None));
    assert_eq!(s, 409);
    assert_eq!(err["code"], "illegal_event");
    assert_eq!(err["violated_rule"], "board_pending");
    let (_, after) = api.get(&format!("/v1/sessions/{id}"));
    assert_eq!(before, after);

    let (s, snap) = api.post(&ev, json!({"type": "board", "cards": ["7h", "4h", "2h"]}));
    assert_eq!(s, 200, "{snap}");
    let flop: Vec<Card> = parse_cards("7h 4h 2h").unwrap();
    engine.reveal_board(&flop).unwrap();
    assert_eq!(snap["hero_rank"], "Flush");
    assert_eq!(snap["pot"], 0.3);
    let stack = |snap: &Value, seat: u64| snap["seats"].as_array().unwrap().iter().find(|s| s["seat"] == seat).unwrap()["stack"].clone();
    assert_eq!(stack(&snap, 2), 3.84);
    assert_eq!(stack(&snap, 3), 2.28);

    let (_, q3) = api.post(&format!("/v1/sessions/{id}/advice"), json!({}));
    assert_eq!(q3["action"], "check");
    assert_eq!(q3["prompt"], include_str!("fixtures/fig7_flop_prompt.txt").trim_end());
    assert_eq!(q3["prompt"], core_prompt(&engine, None));

    for (seat, a, amt) in [(2, "check", None), (3, "check", None), (9, "bet", Some(0.22))] {
        let (s, snap) = api.post(&ev, act(seat, a, amt));
        assert_eq!(s, 200, "{snap}");
    }
    let (_, snap) = api.get(&format!("/v1/sessions/{id}"));
    assert_eq!(snap["pot"], 0.52);
    assert_eq!(stack(&snap, 9), 1.25);

    // checking into a bet is rejected with the rule name; state unchanged
    let (s, err) = api.post(&ev, act(2, "check", None));
    assert_eq!((s, err["violated_rule"].as_str()), (409, Some("check_facing_bet")));
    let (s, err) = api.post(&ev, act(3, "call", None));
    assert_eq!((s, err["violated_rule"].as_str()), (409, Some("out_of_turn")));
    let (_, again) = api.get(&format!("/v1/sessions/{id}"));
    assert_eq!(snap, again);

    // free-text questions go to the remote model untouched
    let (_, qa) = api.post(&format!("/v1/sessions/{id}/advice"), json!({"question": "What is my probability of winning?"}));
    assert_eq!(qa["status"], "answered");
    assert_eq!(qa["answer"], "Sorry, I can't calculate the probability.");

    // a restarted service rebuilds the session from its log
    let restored = Client::new(spawn(router(AppState::new(config).unwrap())));
    let (s, rebuilt) = restored.get(&format!("/v1/sessions/{id}"));
    assert_eq!(s, 200);
    assert_eq!(rebuilt, again);
}

#[test]
fn local_advisor_and_error_paths() {
    let api = Client::new(spawn(router(AppState::new(ServiceConfig::default()).unwrap())));
    let (s, created) = api.post("/v1/sessions", table(json!({"type": "equity", "samples": 300})));
    assert_eq!(s, 201);
    let id = created["session_id"].as_str().unwrap().to_string();
    let ev = format!("/v1/sessions/{id}/events");
    let adv = format!("/v1/sessions/{id}/advice");

    // not the hero's turn yet
    let (_, a) = api.post(&adv, json!({}));
    assert_eq!(a["status"], "no_advice");

    for (seat, a, amt) in [(5, "fold", None), (6, "fold", None), (7, "fold", None), (9, "raise", Some(0.1))] {
        assert_eq!(api.post(&ev, act(seat, a, amt)).0, 200);
    }
    let (_, a) = api.post(&adv, json!({}));
    assert_eq!(a["status"], "ok");
    assert!(["fold", "call", "raise"].contains(&a["action"].as_str().unwrap()), "{a}");
    let menu = [0.0, 0.05, 0.15, 0.3, 0.5, 1.0, 2.5, 3.92];
    assert!(menu.contains(&a["amount"].as_f64().unwrap()) || a["action"] != "raise");

    let (_, q) = api.post(&adv, json!({"question": "Please guess Seat 9's cards."}));
    assert_eq!(q["status"], "unsupported");

    // raise below the minimum
    let (s, e) = api.post(&ev, act(2, "raise", Some(0.12)));
    assert_eq!((s, e["violated_rule"].as_str()), (409, Some("min_raise")));

    // everyone folds to the raiser: hand over, no advice
    assert_eq!(api.post(&ev, act(2, "fold", None)).0, 200);
    let (_, snap) = api.post(&ev, act(3, "fold", None));
    assert_eq!(snap["phase"], "complete");
    assert_eq!(snap["results"]["9"], 0.07);
    let (_, a) = api.post(&adv, json!({}));
    assert_eq!(a["status"], "no_advice");
    assert!(a["prompt"].as_str().unwrap().ends_with("The hand is over."));

    // malformed and invalid requests
    let (s, e) = api.get("/v1/sessions/nope");
    assert_eq!((s, e["code"].as_str()), (404, Some("not_found")));
    let mut one = table(json!(null));
    one["seats"] = json!([{"seat": 2, "stack": 1}]);
    let (s, e) = api.post("/v1/sessions", one);
    assert_eq!((s, e["code"].as_str()), (400, Some("invalid_config")));
    let mut dup = table(json!(null));
    dup["seats"][1]["seat"] = json!(2);
    assert_eq!(api.post("/v1/sessions", dup).0, 400);
    let (s, e) = api.post("/v1/sessions", json!({"seats": "x"}));
    assert_eq!((s, e["code"].as_str()), (400, Some("bad_request")));
    let (s, e) = api.post(&ev, json!({"type": "dance"}));
    assert_eq!((s, e["code"].as_str()), (400, Some("bad_request")));
}

#[test]
fn dead_remote_falls_back_visibly() {
    let config = ServiceConfig { decision_timeout: Duration::from_secs(2), ..ServiceConfig::default() };
    let api = Client::new(spawn(router(AppState::new(config).unwrap())));
    let (_, created) = api.post("/v1/sessions", table(json!({"type": "remote", "endpoint": "http://127.0.0.1:9/none"})));
    let id = created["session_id"].as_str().unwrap().to_string();
    for (seat, a, amt) in [(5, "fold", None), (6, "fold", None), (7, "fold", None), (9, "raise", Some(0.1))] {
        api.post(&format!("/v1/sessions/{id}/events"), act(seat, a, amt));
    }
    let (s, a) = api.post(&format!("/v1/sessions/{id}/advice"), json!({}));
    assert_eq!(s, 200);
    assert_eq!(a["status"], "fallback");
    assert_eq!(a["fallback"], true);
    assert_eq!(a["action"], "fold");
}
