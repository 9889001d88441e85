//! WebAssembly bindings for the browser demo.
//!
//! Every export takes plain values and returns a JSON string; errors come
//! back as thrown strings. The `*_json` functions hold the logic so they can
//! be tested natively.

use std::cell::RefCell;
use std::rc::Rc;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use saptree::audit::{audit_run, AuditReport};
use saptree::ledger::ledger_report;
use saptree::levels::Beta;
use saptree::matching::{shortest_augmenting_nodes, Matching};
use saptree::scenario::{generate, Family, InstanceFile, RunRecord, RunRow};
use saptree::trace::{run_trace, Trace};
use saptree::verify::{verify, CheckOutcome, VerifyOptions};
use saptree::vitality::alive_flags;
use saptree::{Distance, MiniMaxTable, OnlineForest};

/// Simulation with the ledger is superlinear; the page stays responsive
/// below this size.
pub const MAX_SIMULATE_N: usize = 4096;

#[derive(Serialize)]
struct LedgerSummary {
    feasible: bool,
    jump_turns: usize,
    utilization_shortfalls: usize,
    max_vertex_payment: f64,
    payment_bound: f64,
}

#[derive(Serialize)]
struct Simulation {
    instance: String,
    rows: Vec<RunRow>,
    audit: AuditReport,
    ledger: LedgerSummary,
}

#[derive(Serialize)]
struct VertexView {
    id: String,
    white: bool,
    arrived: bool,
    alive: bool,
    dist: Option<Distance>,
    sec_dist: Option<Distance>,
    level: Distance,
    dir: Option<String>,
    sec_dir: Option<String>,
    mate: Option<String>,
}

#[derive(Serialize)]
struct TurnView {
    turn: usize,
    turns: usize,
    arrival: Option<String>,
    vertices: Vec<VertexView>,
    /// Edges present at this turn, black endpoint first.
    edges: Vec<(String, String)>,
    /// Final-forest edges that have not arrived yet.
    future_edges: Vec<(String, String)>,
    path: Vec<String>,
    prefix: Vec<String>,
    suffix: Vec<String>,
    augmenting_path: Vec<String>,
    dispatcher: Option<String>,
    deaths: Vec<String>,
    turn_class: Option<String>,
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("views serialize")
}

/// A parsed instance with its full trace.
type Explored = Rc<(OnlineForest, Trace)>;

thread_local! {
    /// The last explored instance, so stepping through turns does not replay
    /// the whole run each time.
    static EXPLORED: RefCell<Option<(String, Explored)>> = const { RefCell::new(None) };
}

fn explored(text: &str) -> Result<Explored, String> {
    if let Some(hit) = EXPLORED.with_borrow(|c| c.as_ref().filter(|(k, _)| k == text).map(|(_, v)| v.clone())) {
        return Ok(hit);
    }
    let forest = parse_forest(text)?;
    let trace = run_trace(&forest);
    let entry = Rc::new((forest, trace));
    EXPLORED.set(Some((text.to_string(), entry.clone())));
    Ok(entry)
}

fn parse_forest(text: &str) -> Result<OnlineForest, String> {
    let file = InstanceFile::parse(text).map_err(|e| e.to_string())?;
    file.to_forest().map_err(|e| e.to_string())
}

pub fn simulate_json(family: &str, n: usize, seed: u64, beta: &str) -> Result<String, String> {
    let family: Family = family
        .parse()
        .map_err(|e: saptree::scenario::ScenarioError| e.to_string())?;
    let beta: Beta = beta.parse().map_err(|e: saptree::levels::BetaError| e.to_string())?;
    if n > MAX_SIMULATE_N {
        return Err(format!("n = {n} is above the demo limit of {MAX_SIMULATE_N}"));
    }
    let file = generate(family, n, seed).map_err(|e| e.to_string())?;
    let forest = file.to_forest().map_err(|e| e.to_string())?;
    let trace = run_trace(&forest);
    let ledger = ledger_report(&forest, &trace, beta);
    let sim = Simulation {
        instance: file.to_text(),
        rows: RunRecord::from_trace(&forest, &trace, beta).rows,
        audit: audit_run(&forest, &trace, beta),
        ledger: LedgerSummary {
            feasible: ledger.is_feasible(),
            jump_turns: ledger.jump_turns.len(),
            utilization_shortfalls: ledger.utilization_shortfalls.len(),
            max_vertex_payment: ledger.max_vertex_payment,
            payment_bound: ledger.payment_bound,
        },
    };
    Ok(to_json(&sim))
}

pub fn explore_turn_json(instance: &str, t: usize, beta: &str) -> Result<String, String> {
    let beta: Beta = beta.parse().map_err(|e: saptree::levels::BetaError| e.to_string())?;
    let entry = explored(instance)?;
    let (forest, trace) = (&entry.0, &entry.1);
    if t > forest.turn() {
        return Err(format!("turn {t} is past the last arrival ({})", forest.turn()));
    }
    let id = |v: usize| forest.vertex(v).to_string();
    let ids = |vs: &[usize]| vs.iter().map(|&v| id(v)).collect::<Vec<_>>();

    let at = forest.at(t).map_err(|e| e.to_string())?;
    let table = MiniMaxTable::build(&at);
    let alive = alive_flags(&at, &table);

    let mut m = Matching::empty(forest);
    let mut augmenting = Vec::new();
    for s in 1..=t {
        let a = forest.at(s).map_err(|e| e.to_string())?;
        if let Some(p) = shortest_augmenting_nodes(&a, &m, forest.black_node(s)) {
            m.augment(&a, &p).map_err(|e| e.to_string())?;
            if s == t {
                augmenting = p;
            }
        }
    }

    let vertices = (0..forest.vertex_count())
        .map(|v| {
            let arrived = at.contains(v);
            VertexView {
                id: id(v),
                white: forest.is_white(v),
                arrived,
                alive: !arrived || alive[v],
                dist: arrived.then(|| table.dist(v)),
                sec_dist: arrived.then(|| table.sec_dist(v)),
                level: if arrived {
                    table.level(&at, v)
                } else {
                    Distance::Finite(0)
                },
                dir: if arrived { table.dir(v).map(id) } else { None },
                sec_dir: if arrived { table.sec_dir(v).map(id) } else { None },
                mate: m.mate(v).map(id),
            }
        })
        .collect();

    let (mut edges, mut future_edges) = (Vec::new(), Vec::new());
    for s in 1..=forest.turn() {
        let b = forest.black_node(s);
        for &w in forest.final_neighbors(b) {
            let e = (id(b), id(w));
            if s <= t {
                edges.push(e);
            } else {
                future_edges.push(e);
            }
        }
    }

    let mut view = TurnView {
        turn: t,
        turns: forest.turn(),
        arrival: None,
        vertices,
        edges,
        future_edges,
        path: Vec::new(),
        prefix: Vec::new(),
        suffix: Vec::new(),
        augmenting_path: ids(&augmenting),
        dispatcher: None,
        deaths: Vec::new(),
        turn_class: None,
    };
    if t > 0 {
        let r = &trace.turns[t - 1];
        let k = r.prefix_vertices.min(r.path.len());
        view.arrival = Some(id(r.arrival));
        view.path = ids(&r.path);
        view.prefix = ids(&r.path[..k]);
        view.suffix = ids(r.suffix());
        view.dispatcher = r.dispatch.as_ref().map(|d| id(d.node));
        view.deaths = ids(&r.deaths);
        view.turn_class = Some(r.class(beta).to_string());
    }
    Ok(to_json(&view))
}

pub fn verify_json(instance: &str, alt_tiebreak: bool) -> Result<String, String> {
    let forest = parse_forest(instance)?;
    let opts = VerifyOptions {
        alt_tiebreak,
        ..VerifyOptions::default()
    };
    let report = verify(&forest, &opts).map_err(|e| e.to_string())?;
    let outcomes: &[CheckOutcome] = &report.outcomes;
    Ok(to_json(&outcomes))
}

/// Generates an instance and runs the full analysis on it.
#[wasm_bindgen]
pub fn simulate(family: &str, n: usize, seed: u32, beta: &str) -> Result<String, JsError> {
    simulate_json(family, n, seed as u64, beta).map_err(|e| JsError::new(&e))
}

/// The forest, distances, levels and arrival path at turn `t`.
#[wasm_bindgen]
pub fn explore_turn(instance: &str, t: usize, beta: &str) -> Result<String, JsError> {
    explore_turn_json(instance, t, beta).map_err(|e| JsError::new(&e))
}

/// Runs the default property checks on an instance.
#[wasm_bindgen]
pub fn verify_instance(instance: &str, alt_tiebreak: bool) -> Result<String, JsError> {
    verify_json(instance, alt_tiebreak).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: &str = "white 3\nblack: 1 2\nblack: 2 3\nblack: 3\n";

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn simulate_pendant_chain() {
        let v = parse(&simulate_json("pendant_chain", 3, 0, "2").unwrap());
        assert_eq!(v["instance"], E1);
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        assert_eq!(v["audit"]["sum_dist"], 7);
        assert_eq!(v["ledger"]["feasible"], true);
    }

    #[test]
    fn simulate_rejects_bad_input() {
        assert!(simulate_json("pendant_chain", 3, 0, "1")
            .unwrap_err()
            .contains("greater than 1"));
        assert!(simulate_json("spiral", 3, 0, "2")
            .unwrap_err()
            .contains("unknown family"));
        assert!(simulate_json("degree2", 1, 0, "2").is_err());
        assert!(simulate_json("random_tree", MAX_SIMULATE_N + 1, 0, "2").is_err());
    }

    #[test]
    fn explore_last_turn_of_e1() {
        let v = parse(&explore_turn_json(E1, 3, "2").unwrap());
        assert_eq!(v["arrival"], "b3");
        assert_eq!(v["path"], serde_json::json!(["b3", "w3", "b2", "w2", "b1", "w1"]));
        assert_eq!(v["deaths"].as_array().unwrap().len(), 6);
        assert_eq!(v["augmenting_path"], serde_json::json!(["b3", "w3"]));
        assert_eq!(v["dispatcher"], serde_json::Value::Null);
        assert_eq!(v["edges"].as_array().unwrap().len(), 5);
        let b3 = v["vertices"]
            .as_array()
            .unwrap()
            .iter()
            .find(|x| x["id"] == "b3")
            .unwrap();
        assert_eq!(b3["dist"], "5");
        assert_eq!(b3["alive"], false);
        assert_eq!(b3["mate"], "w3");
    }

    #[test]
    fn explore_turn_zero_and_out_of_range() {
        let v = parse(&explore_turn_json(E1, 0, "2").unwrap());
        assert_eq!(v["edges"].as_array().unwrap().len(), 0);
        assert_eq!(v["future_edges"].as_array().unwrap().len(), 5);
        assert!(v["vertices"].as_array().unwrap().iter().all(|x| x["alive"] == true));
        assert!(explore_turn_json(E1, 4, "2").is_err());
        assert!(explore_turn_json("white 2\nblack: 0\n", 1, "2")
            .unwrap_err()
            .contains("line 2"));
    }

    #[test]
    fn verify_e1() {
        let v = parse(&verify_json(E1, true).unwrap());
        let outcomes = v.as_array().unwrap();
        assert!(outcomes.iter().all(|o| o["status"] != "fail"));
        assert!(outcomes.iter().any(|o| o["name"] == "game_value@alt"));
    }
}
