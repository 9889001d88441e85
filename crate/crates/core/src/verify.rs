//! Named property checks over one scenario, with pass/fail/skipped outcomes.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::audit::{audit_run, degree_two_from_trace};
use crate::distance::Distance;
use crate::forest::{ForestAt, OnlineForest, TieBreak};
use crate::ledger::ledger_report;
use crate::levels::{level_forest, Beta, When};
use crate::minimax::game::improves;
use crate::minimax::{rooted_first, rooted_second, Determined, MiniMaxTable};
use crate::oracle::{
    adversary_game_value, brute_hall, brute_shortest_aug, enumerate_max_matchings, is_minimal_violator, OracleBudget,
    OracleError,
};
use crate::trace::{run_trace, Trace, Violation};
use crate::vitality::witness_nodes;

/// Every check `verify` knows, in run order.
pub const ALL_CHECKS: &[&str] = &[
    "cross_formulation",
    "trace_structure",
    "game_value",
    "sap_dominance",
    "hall_agreement",
    "level_forests",
    "aggregate_budgets",
    "degree_two",
    "token_ledger",
    "utilization_per_turn",
];

/// Checks run when no list is given. The per-turn utilization inequality is
/// opt-in because it fails on the first arrival of every instance.
pub const DEFAULT_CHECKS: &[&str] = &[
    "cross_formulation",
    "trace_structure",
    "game_value",
    "sap_dominance",
    "hall_agreement",
    "level_forests",
    "aggregate_budgets",
    "degree_two",
    "token_ledger",
];

/// Rooted re-evaluation is quadratic in the component, so it stops here.
const ROOTED_LIMIT: usize = 256;
/// Failures kept per check.
const KEEP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub failures: Vec<Violation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.status != Status::Fail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub budget: OracleBudget,
    pub checks: Option<Vec<String>>,
    pub alt_tiebreak: bool,
    pub beta: Beta,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown check `{0}`; known checks: {known}", known = ALL_CHECKS.join(", "))]
    UnknownCheck(String),
}

/// Collected failures of one check, with the number of units skipped for
/// budget reasons (or for the reason given in `skip_reason`).
#[derive(Default)]
struct Tally {
    failures: Vec<Violation>,
    total_failures: usize,
    examined: usize,
    skipped: usize,
    skip_reason: Option<&'static str>,
}

impl Tally {
    fn fail(&mut self, turn: usize, check: &'static str, detail: String) {
        self.total_failures += 1;
        if self.failures.len() < KEEP {
            self.failures.push(Violation { turn, check, detail });
        }
    }

    fn extend(&mut self, vs: impl IntoIterator<Item = Violation>) {
        for v in vs {
            self.fail(v.turn, v.check, v.detail);
        }
    }

    fn outcome(self, name: &str) -> CheckOutcome {
        let status = if self.total_failures > 0 {
            Status::Fail
        } else if self.examined == 0 && self.skipped > 0 {
            Status::Skipped
        } else {
            Status::Pass
        };
        let mut detail = format!("{} examined", self.examined);
        if self.skipped > 0 {
            let reason = self.skip_reason.unwrap_or("over budget");
            detail.push_str(&format!(", {} skipped {reason}", self.skipped));
        }
        if self.total_failures > 0 {
            detail.push_str(&format!(", {} failure(s)", self.total_failures));
        }
        CheckOutcome {
            name: name.to_string(),
            status,
            detail,
            failures: self.failures,
        }
    }
}

/// Runs the selected checks, then (optionally) the non-oracle ones again
/// under the reversed tie-break order.
pub fn verify(forest: &OnlineForest, opts: &VerifyOptions) -> Result<VerifyReport, VerifyError> {
    let selected: Vec<&str> = match &opts.checks {
        None => DEFAULT_CHECKS.to_vec(),
        Some(list) => {
            let mut out = Vec::new();
            for name in list {
                let known = ALL_CHECKS
                    .iter()
                    .find(|&&c| c == name)
                    .ok_or_else(|| VerifyError::UnknownCheck(name.clone()))?;
                out.push(*known);
            }
            out
        }
    };

    let mut outcomes = run_checks(forest, &selected, opts, "");
    if opts.alt_tiebreak {
        let flipped = match forest.tie_break() {
            TieBreak::Forward => TieBreak::Reversed,
            TieBreak::Reversed => TieBreak::Forward,
        };
        let alt = forest.clone().with_tie_break(flipped);
        outcomes.extend(run_checks(&alt, &selected, opts, "@alt"));
    }
    Ok(VerifyReport { outcomes })
}

fn run_checks(forest: &OnlineForest, selected: &[&str], opts: &VerifyOptions, suffix: &str) -> Vec<CheckOutcome> {
    let trace = run_trace(forest);
    selected
        .iter()
        .map(|&name| {
            let tally = match name {
                "cross_formulation" => cross_formulation(forest),
                "trace_structure" => {
                    let mut t = Tally {
                        examined: trace.turns.len(),
                        ..Tally::default()
                    };
                    t.extend(trace.violations.iter().cloned());
                    t
                }
                "game_value" => game_value(forest, &trace, opts.budget),
                "sap_dominance" => sap_dominance(forest, &trace, opts.budget),
                "hall_agreement" => hall_agreement(forest, &trace, opts.budget),
                "level_forests" => level_forests(forest, &trace),
                "aggregate_budgets" => {
                    let r = audit_run(forest, &trace, opts.beta);
                    let mut t = Tally {
                        examined: r.turns,
                        ..Tally::default()
                    };
                    // Trace violations are reported by their own check.
                    t.extend(r.violations.into_iter().skip(trace.violations.len()));
                    t
                }
                "degree_two" => degree_two(forest, &trace),
                "token_ledger" | "utilization_per_turn" => {
                    let r = ledger_report(forest, &trace, opts.beta);
                    let mut t = Tally {
                        examined: r.jump_turns.len(),
                        ..Tally::default()
                    };
                    if name == "token_ledger" {
                        t.extend(r.violations.into_iter().skip(trace.violations.len()));
                    } else {
                        for j in r.jump_turns.iter().filter(|j| j.shortfall(opts.beta) > 0.0) {
                            t.fail(
                                j.turn,
                                "utilization",
                                format!("utilized {} < required {}", j.utilized, j.required),
                            );
                        }
                    }
                    t
                }
                _ => unreachable!("names are validated"),
            };
            tally.outcome(&format!("{name}{suffix}"))
        })
        .collect()
}

fn is_budget(e: &OracleError) -> bool {
    matches!(e, OracleError::BudgetExceeded { .. })
}

fn game_value(forest: &OnlineForest, trace: &Trace, budget: OracleBudget) -> Tally {
    let mut t = Tally::default();
    for r in &trace.turns {
        let at = forest.at(r.turn).expect("turn in range");
        match adversary_game_value(&at, forest.vertex(r.arrival), budget) {
            Ok(v) => {
                t.examined += 1;
                if v != r.dist {
                    t.fail(r.turn, "game_value", format!("game {v} vs dist {}", r.dist));
                }
            }
            Err(e) if is_budget(&e) => t.skipped += 1,
            Err(e) => t.fail(r.turn, "game_value", e.to_string()),
        }
    }
    t
}

fn sap_dominance(forest: &OnlineForest, trace: &Trace, budget: OracleBudget) -> Tally {
    let mut t = Tally::default();
    for r in &trace.turns {
        let at = forest.at(r.turn).expect("turn in range");
        let b = forest.vertex(r.arrival);
        let matchings = match enumerate_max_matchings(&at, Some(b), budget) {
            Ok(ms) => ms,
            Err(e) if is_budget(&e) => {
                t.skipped += 1;
                continue;
            }
            Err(e) => {
                t.fail(r.turn, "sap_dominance", e.to_string());
                continue;
            }
        };
        t.examined += 1;
        for m in matchings {
            match brute_shortest_aug(&at, &m, b, budget) {
                Ok(Some(len)) if Distance::Finite(len as u32) > r.dist => t.fail(
                    r.turn,
                    "sap_dominance",
                    format!("path of {len} exceeds dist {}", r.dist),
                ),
                Ok(None) if r.dist.is_finite() => {
                    t.fail(r.turn, "sap_dominance", format!("no path although dist is {}", r.dist))
                }
                Ok(_) => {}
                Err(e) => t.fail(r.turn, "sap_dominance", e.to_string()),
            }
        }
    }
    t
}

fn hall_agreement(forest: &OnlineForest, trace: &Trace, budget: OracleBudget) -> Tally {
    let mut t = Tally::default();
    for r in &trace.turns {
        let at = forest.at(r.turn).expect("turn in range");
        let b = forest.vertex(r.arrival);
        let brute = match brute_hall(&at, b, budget) {
            Ok(x) => x,
            Err(e) if is_budget(&e) => {
                t.skipped += 1;
                continue;
            }
            Err(e) => {
                t.fail(r.turn, "hall_agreement", e.to_string());
                continue;
            }
        };
        t.examined += 1;
        let witness: Option<BTreeSet<_>> = r.dist.is_infinite().then(|| {
            witness_nodes(&at, r.arrival)
                .into_iter()
                .map(|x| at.vertex(x))
                .collect()
        });
        if r.dist.is_infinite() != brute.is_some() {
            t.fail(
                r.turn,
                "hall_agreement",
                format!("dist {} but brute force found {brute:?}", r.dist),
            );
        }
        if let Some(x) = witness {
            match is_minimal_violator(&at, &x, budget) {
                Ok(true) => {}
                Ok(false) => t.fail(
                    r.turn,
                    "hall_agreement",
                    "constructed witness is not a minimal violator".into(),
                ),
                Err(e) if is_budget(&e) => {}
                Err(e) => t.fail(r.turn, "hall_agreement", e.to_string()),
            }
        }
    }
    t
}

fn cross_formulation(forest: &OnlineForest) -> Tally {
    let mut t = Tally::default();
    for turn in 0..=forest.turn() {
        let at = forest.at(turn).expect("turn in range");
        let table = MiniMaxTable::build(&at);
        t.examined += 1;
        t.extend(check_identities(&at, &table));
    }
    t
}

/// Checks a table against the rooted-tree definition and the edge-determined
/// formulation at every vertex and edge of one snapshot. A table whose
/// entries were tampered with (see [`MiniMaxTable::set_sec_dist`]) fails here.
pub fn check_identities(at: &ForestAt<'_>, table: &MiniMaxTable) -> Vec<Violation> {
    let turn = at.turn();
    let mut out = Vec::new();
    let mut fail = |check: &'static str, detail: String| out.push(Violation { turn, check, detail });
    let mut det = Determined::new(*at);
    let name = |x: usize| at.vertex(x).to_string();

    let mut small = vec![false; at.vertex_count()];
    let mut seen = vec![false; at.vertex_count()];
    for v in 0..at.vertex_count() {
        if !seen[v] {
            let comp = at.component(v);
            for &x in &comp {
                seen[x] = true;
                small[x] = comp.len() <= ROOTED_LIMIT;
            }
        }
    }

    for v in 0..at.vertex_count() {
        let black = !at.is_white(v);
        let (dist, sec) = (table.dist(v), table.sec_dist(v));
        let (dir, sec_dir) = (table.dir(v), table.sec_dir(v));

        if small[v] {
            let (d, dd, _) = rooted_first(at, v);
            let (s, sd) = rooted_second(at, v);
            if (d, dd) != (dist, dir) || (s, sd) != (sec, sec_dir) {
                fail(
                    "rooted_definition",
                    format!("{} table ({dist},{sec}) vs rooted ({d},{s})", name(v)),
                );
            }
        }

        // First and second choice over the neighbors' determined values.
        let empty = if black { Distance::Infinite } else { Distance::ZERO };
        let mut best = (empty, None);
        let mut second = (empty, None);
        for u in at.ordered_neighbors(v) {
            let val = det.get(v, u).0.succ();
            if best.1.is_none() || improves(black, val, best.0) {
                best = (val, Some(u));
            }
        }
        for u in at.ordered_neighbors(v).filter(|&u| Some(u) != best.1) {
            let val = det.get(v, u).0.succ();
            if second.1.is_none() || improves(black, val, second.0) {
                second = (val, Some(u));
            }
        }
        if best != (dist, dir) {
            fail(
                "first_direction",
                format!("{}: {:?} vs {:?}", name(v), best, (dist, dir)),
            );
        }
        if second != (sec, sec_dir) {
            fail(
                "second_direction",
                format!("{}: {:?} vs {:?}", name(v), second, (sec, sec_dir)),
            );
        }
        for (label, value, via) in [("dist", dist, dir), ("sec-dist", sec, sec_dir)] {
            if let Some(u) = via {
                if value != table.det(at, v, u).0.succ() {
                    fail("second_through_direction", format!("{label} of {} is {value}", name(v)));
                }
            }
        }

        for &u in at.neighbors(v) {
            let (d_uv, dir_uv) = table.det(at, u, v);
            if (d_uv, dir_uv) != det.get(u, v) {
                fail("det_formulation", format!("det({},{})", name(u), name(v)));
            }
            let expect = if dir == Some(u) { sec } else { dist };
            if d_uv != expect {
                fail(
                    "det_entry",
                    format!("det({},{}) = {d_uv}, expected {expect}", name(u), name(v)),
                );
            }
            let (lo, hi) = if black { (dist, sec) } else { (sec, dist) };
            if d_uv < lo || d_uv > hi {
                fail(
                    "det_sandwich",
                    format!("det({},{}) = {d_uv} outside [{lo},{hi}]", name(u), name(v)),
                );
            }
            // The path includes the entry vertex, so it has one more edge
            // than the determined distance counts.
            if let Some(len) = d_uv.finite() {
                if det.path(u, v).len() as u32 != len + 2 {
                    fail("det_path_length", format!("det-path({},{})", name(u), name(v)));
                }
            }
        }

        let path = table.path(at, v);
        let expect = match dir {
            Some(d) => det.path(v, d),
            None => vec![v],
        };
        if path != expect {
            fail("path_directions", format!("path of {}", name(v)));
        }
        for (label, walk, value) in [("path", &path, dist), ("sec-path", &table.sec_path(at, v), sec)] {
            if let Some(len) = value.finite() {
                if walk.len() as u32 != len + 1 {
                    fail(
                        "path_lengths",
                        format!("{label} of {} has {} vertices for {value}", name(v), walk.len()),
                    );
                }
            }
        }
    }
    out
}

fn level_forests(forest: &OnlineForest, trace: &Trace) -> Tally {
    let mut t = Tally::default();
    let turns = trace.turns.len();
    let top = 2 * trace.n_eff() as u32;
    let step = (turns / 16).max(1);
    let levels: Vec<u32> = std::iter::successors(Some(1u32), |&l| Some(l * 2))
        .take_while(|&l| l <= top)
        .collect();
    for tt in (1..=turns).step_by(step) {
        let r = &trace.turns[tt - 1];
        for &l in &levels {
            let (Ok(before), Ok(after)) = (
                level_forest(forest, When::Turn(tt - 1), l),
                level_forest(forest, When::Turn(tt), l),
            ) else {
                continue;
            };
            t.examined += 1;
            if !before.vertices.is_subset(&after.vertices) {
                t.fail(tt, "level_containment", format!("level {l} lost vertices"));
            }
            let added: BTreeSet<_> = after.vertices.difference(&before.vertices).copied().collect();
            let expected: BTreeSet<_> = r
                .level_changes
                .iter()
                .filter(|&&(_, lv)| lv >= Distance::Finite(l))
                .map(|&(v, _)| forest.vertex(v))
                .filter(|v| !before.vertices.contains(v))
                .collect();
            if added != expected {
                t.fail(
                    tt,
                    "level_new_vertices",
                    format!("level {l}: {added:?} vs {expected:?}"),
                );
            }
            if r.dispatch.is_some() {
                if let Ok(half) = level_forest(forest, When::Half(tt), l) {
                    if !before.vertices.is_subset(&half.vertices) || !half.vertices.is_subset(&after.vertices) {
                        t.fail(tt, "half_turn_monotone", format!("level {l}"));
                    }
                }
            }
        }
    }
    t
}

fn degree_two(forest: &OnlineForest, trace: &Trace) -> Tally {
    let mut t = Tally::default();
    let all_two = (1..=forest.turn()).all(|tt| forest.arrival_degree(tt) >= 2);
    if !all_two {
        t.skipped = 1;
        t.skip_reason = Some("(an arrival has degree one)");
        return t;
    }
    t.examined = 1;
    let r = degree_two_from_trace(trace);
    if r.deaths > 0 {
        t.fail(0, "degree_two_no_deaths", format!("{} deaths", r.deaths));
    }
    if r.sum_path as f64 > r.bound {
        t.fail(0, "degree_two_sum", format!("{} > {:.2}", r.sum_path, r.bound));
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{e1, forest_from_raw, raw_arrivals, star};
    use proptest::prelude::*;

    #[test]
    fn e1_passes_everything() {
        let r = verify(&e1(), &VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.outcomes);
        let game = r.outcomes.iter().find(|o| o.name == "game_value").unwrap();
        assert_eq!((game.status, game.detail.as_str()), (Status::Pass, "3 examined"));
        let d2 = r.outcomes.iter().find(|o| o.name == "degree_two").unwrap();
        assert_eq!(d2.status, Status::Skipped);
    }

    #[test]
    fn tampered_second_distance_is_caught() {
        let f = star();
        let at = f.at(2).unwrap();
        let mut table = MiniMaxTable::build(&at);
        let clean = check_identities(&at, &table);
        assert!(clean.is_empty(), "{clean:?}");
        let b1 = f.black_node(1);
        table.set_sec_dist(b1, table.sec_dist(b1).succ());
        let fails = check_identities(&at, &table);
        assert!(fails.iter().any(|v| v.check == "second_through_direction"), "{fails:?}");
    }

    #[test]
    fn budget_skips_and_alt_order() {
        let f = OnlineForest::from_arrivals(8, &(1..8).map(|i| vec![i, i + 1]).collect::<Vec<_>>()).unwrap();
        let opts = VerifyOptions {
            budget: OracleBudget::uniform(4),
            alt_tiebreak: true,
            ..VerifyOptions::default()
        };
        let r = verify(&f, &opts).unwrap();
        assert!(r.passed());
        let game = r.outcomes.iter().find(|o| o.name == "game_value").unwrap();
        assert!(game.detail.contains("skipped"));
        assert!(r.outcomes.iter().any(|o| o.name == "trace_structure@alt"));
        let d2 = r.outcomes.iter().find(|o| o.name == "degree_two").unwrap();
        assert_eq!(d2.status, Status::Pass);
    }

    #[test]
    fn check_selection() {
        let opts = VerifyOptions {
            checks: Some(vec!["utilization_per_turn".into()]),
            ..VerifyOptions::default()
        };
        let r = verify(&e1(), &opts).unwrap();
        assert_eq!(r.outcomes.len(), 1);
        assert_eq!(r.outcomes[0].status, Status::Fail);
        let bad = VerifyOptions {
            checks: Some(vec!["nope".into()]),
            ..VerifyOptions::default()
        };
        assert_eq!(
            verify(&e1(), &bad).unwrap_err(),
            VerifyError::UnknownCheck("nope".into())
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_instances_pass(n in 1usize..8, raw in raw_arrivals(8, 10)) {
            let f = forest_from_raw(n, &raw);
            let opts = VerifyOptions { alt_tiebreak: true, ..VerifyOptions::default() };
            let r = verify(&f, &opts).unwrap();
            let failed: Vec<_> = r.outcomes.iter().filter(|o| o.status == Status::Fail).collect();
            prop_assert!(failed.is_empty(), "{:?}", failed);
        }
    }
}
