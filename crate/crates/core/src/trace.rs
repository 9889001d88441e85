//! One incremental pass over a scenario: the SAP run plus every per-turn
//! quantity the audits need, with the per-turn structural checks applied on
//! the way.
//!
//! Two tables are kept, one describing `F_{t−1}` and one `F_t`; each turn
//! only the arriving vertex's component is re-evaluated in both.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::distance::Distance;
use crate::forest::{ForestAt, OnlineForest};
use crate::levels::{Beta, TurnClass};
use crate::matching::{shortest_augmenting_nodes, Matching};
use crate::minimax::MiniMaxTable;
use crate::vitality::{alive_degree, dispatch_node, dying_prefix, is_portal, region_nodes};

/// A failed per-turn check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub turn: usize,
    pub check: &'static str,
    pub detail: String,
}

/// What the dispatching vertex looked like in its turn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dispatch {
    pub node: usize,
    /// `level_{t−1}`; 0 when the dispatcher is the arriving vertex.
    pub level_before: Distance,
    /// `level_t`, which equals the suffix length.
    pub level_after: Distance,
    /// First and second directions at `t`, both alive.
    pub dir: usize,
    pub sec_dir: usize,
    /// The vertex before the dispatcher on the arrival path.
    pub pred: Option<usize>,
    /// `det-dist_{t−1}(dispatcher, pred)`.
    pub det_before_pred: Option<Distance>,
    /// The previous-turn mini-max path from `pred` with the tree rooted at
    /// the dispatcher (dispatcher excluded).
    pub pred_path_before: Vec<usize>,
}

/// Everything recorded about one arrival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnTrace {
    pub turn: usize,
    pub arrival: usize,
    pub sap_len: Option<usize>,
    pub matching_size: usize,
    pub dist: Distance,
    pub sec_dist: Distance,
    /// `|N_t(b_t) ∩ A_{t−1}|`.
    pub alive_before: usize,
    /// `path_t(b_t)`; empty when the distance is infinite.
    pub path: Vec<usize>,
    pub deaths: Vec<usize>,
    pub portals_on_path: usize,
    /// Dying vertices at the start of the path.
    pub prefix_vertices: usize,
    pub prefix_len: usize,
    pub suffix_len: usize,
    pub dispatch: Option<Dispatch>,
    /// New levels of every vertex whose level changed this turn, the
    /// dispatcher included.
    pub level_changes: Vec<(usize, Distance)>,
}

impl TurnTrace {
    pub fn class(&self, beta: Beta) -> TurnClass {
        if self.dist.is_infinite() {
            return TurnClass::DistInfinite;
        }
        match &self.dispatch {
            None => TurnClass::NoDispatch,
            Some(d) => TurnClass::from_levels(beta, d.level_before, d.level_after),
        }
    }

    pub fn suffix(&self) -> &[usize] {
        &self.path[self.prefix_vertices.min(self.path.len())..]
    }
}

/// The full per-turn record of a scenario.
#[derive(Clone, Debug)]
pub struct Trace {
    pub white_count: usize,
    pub vertex_count: usize,
    pub turns: Vec<TurnTrace>,
    /// Turn in which each vertex of the final forest died, if it did.
    pub death_turn: Vec<Option<usize>>,
    pub final_matching: Matching,
    pub violations: Vec<Violation>,
}

impl Trace {
    /// `max(|W|, arrivals)`: the `n` used by all aggregate budgets, so that
    /// the final forest has at most `2n` vertices even for partial or
    /// over-long scenarios.
    pub fn n_eff(&self) -> usize {
        self.white_count.max(self.turns.len())
    }

    pub fn is_dead_at(&self, v: usize, t: usize) -> bool {
        matches!(self.death_turn[v], Some(d) if d <= t)
    }
}

/// Per-turn scratch shared by the checks.
struct Turn<'a, 'f> {
    t: usize,
    at: &'a ForestAt<'f>,
    prev_at: &'a ForestAt<'f>,
    prev: &'a MiniMaxTable,
    cur: &'a MiniMaxTable,
    alive_prev: &'a [bool],
    alive: &'a [bool],
    violations: &'a mut Vec<Violation>,
}

impl Turn<'_, '_> {
    fn fail(&mut self, check: &'static str, detail: String) {
        self.violations.push(Violation {
            turn: self.t,
            check,
            detail,
        });
    }

    fn name(&self, x: usize) -> String {
        self.at.vertex(x).to_string()
    }
}

fn lipschitz(a: Distance, b: Distance) -> bool {
    match (a, b) {
        (Distance::Finite(x), Distance::Finite(y)) => x.abs_diff(y) <= 1,
        (Distance::Infinite, Distance::Infinite) => true,
        _ => false,
    }
}

/// Runs the scenario once, recording every turn.
pub fn run_trace(forest: &OnlineForest) -> Trace {
    let n_total = forest.vertex_count();
    let at0 = forest.at(0).expect("turn 0");
    let mut prev = MiniMaxTable::build(&at0);
    let mut cur = prev.clone();
    let mut alive_prev = vec![true; n_total];
    let mut alive = vec![true; n_total];
    let mut death_turn = vec![None; n_total];
    let mut matching = Matching::empty(forest);
    let mut violations = Vec::new();
    let mut turns = Vec::with_capacity(forest.turn());

    for t in 1..=forest.turn() {
        let at = forest.at(t).expect("turn in range");
        let prev_at = forest.at(t - 1).expect("turn in range");
        let b = forest.black_node(t);

        let comp = cur.refresh_component(&at, b);
        for &x in &comp {
            alive[x] = !cur.is_dead(&at, x);
        }

        let sap = shortest_augmenting_nodes(&at, &matching, b);
        if let Some(p) = &sap {
            matching.augment(&at, p).expect("search returns augmenting paths");
        }

        let mut ctx = Turn {
            t,
            at: &at,
            prev_at: &prev_at,
            prev: &prev,
            cur: &cur,
            alive_prev: &alive_prev,
            alive: &alive,
            violations: &mut violations,
        };
        let record = record_turn(&mut ctx, b, &comp, sap.map(|p| p.len() - 1), matching.size());

        for &x in &record.deaths {
            death_turn[x] = Some(t);
        }
        prev.refresh_component(&at, b);
        for &x in &comp {
            alive_prev[x] = alive[x];
        }
        turns.push(record);
    }

    Trace {
        white_count: forest.white_count(),
        vertex_count: n_total,
        turns,
        death_turn,
        final_matching: matching,
        violations,
    }
}

fn record_turn(
    c: &mut Turn<'_, '_>,
    b: usize,
    comp: &[usize],
    sap_len: Option<usize>,
    matching_size: usize,
) -> TurnTrace {
    let (at, cur) = (c.at, c.cur);
    let dist = cur.dist(b);
    let alive_before = alive_degree(at, c.alive_prev, b);

    let mut deaths = Vec::new();
    let mut level_changes = Vec::new();
    for &x in comp {
        if c.alive_prev[x] && !c.alive[x] {
            deaths.push(x);
        }
        if !c.alive_prev[x] && c.alive[x] {
            c.fail("monotone_death", format!("{} came back to life", c.name(x)));
        }
        let new_level = cur.level(at, x);
        let old_level = if x == b {
            Distance::ZERO
        } else {
            c.prev.level(c.prev_at, x)
        };
        if new_level != old_level {
            level_changes.push((x, new_level));
        }
        if new_level < old_level {
            c.fail("level_monotone", format!("level of {} fell", c.name(x)));
        }
        if x != b && (cur.dist(x) < c.prev.dist(x) || cur.sec_dist(x) < c.prev.sec_dist(x)) {
            c.fail("distance_monotone", format!("a distance of {} decreased", c.name(x)));
        }
    }
    deaths.sort_unstable();

    check_structure(c, comp);

    if at.degree(b) == 1 && c.alive[b] {
        c.fail("pendant_dead", format!("pendant arrival {} is alive", c.name(b)));
    }
    if dist.is_finite() && alive_before == 0 {
        c.fail(
            "alive_neighbor",
            "finite distance without a previously alive neighbor".into(),
        );
    }
    if sap_len.is_some() != dist.is_finite() || matches!((sap_len, dist.finite()), (Some(l), Some(d)) if l as u32 > d) {
        c.fail(
            "sap_within_dist",
            format!("SAP length {sap_len:?} against distance {dist}"),
        );
    }

    let mut record = TurnTrace {
        turn: c.t,
        arrival: b,
        sap_len,
        matching_size,
        dist,
        sec_dist: cur.sec_dist(b),
        alive_before,
        path: Vec::new(),
        deaths,
        portals_on_path: 0,
        prefix_vertices: 0,
        prefix_len: 0,
        suffix_len: 0,
        dispatch: None,
        level_changes,
    };
    if dist.is_infinite() {
        return record;
    }

    // Dying region against the definitional deaths.
    let predicted: Vec<usize> = if alive_before >= 2 {
        Vec::new()
    } else {
        region_nodes(at, c.alive_prev, b)
    };
    if predicted != record.deaths {
        let check = if alive_before >= 2 { "no_deaths" } else { "dying_region" };
        c.fail(
            check,
            format!("predicted {} deaths, saw {}", predicted.len(), record.deaths.len()),
        );
    }

    let path = cur.path(at, b);
    if path.len() as u32 != dist.finite().unwrap() + 1 {
        c.fail(
            "path_length",
            format!("path of {} vertices for distance {dist}", path.len()),
        );
    }
    record.portals_on_path = path.iter().filter(|&&x| is_portal(at, c.alive_prev, x)).count();
    let died = |x: usize| c.alive_prev[x] && !c.alive[x];
    let k = dying_prefix(&path, died);
    if path[k..].iter().any(|&x| died(x)) {
        c.fail("prefix_contiguity", "a dying vertex follows a surviving one".into());
    }
    record.prefix_vertices = k;
    // Up to the first survivor, forking and being a portal coincide.
    if alive_before == 1 {
        for &x in path.iter().take(k + 1).filter(|&&x| !at.is_white(x)) {
            let portal = is_portal(at, c.alive_prev, x);
            let forks = alive_degree(at, c.alive, x) >= 2;
            if portal != forks {
                c.fail("portal_forks", format!("{} portal={portal} forks={forks}", c.name(x)));
            }
        }
    }
    record.suffix_len = (path.len() - k).saturating_sub(1);
    record.prefix_len = path.len() - 1 - record.suffix_len;

    let dispatcher = dispatch_node(at, c.alive, &path);
    match dispatcher {
        Some(d) if path.get(k) != Some(&d) => {
            c.fail(
                "dispatch_starts_suffix",
                format!("dispatcher {} is not the first survivor", c.name(d)),
            );
        }
        None if k != path.len() => c.fail("dispatch_starts_suffix", "survivors without a dispatcher".into()),
        _ => {}
    }
    if let Some(d) = dispatcher {
        record.dispatch = Some(describe_dispatch(c, d, &path));
        if Distance::Finite(record.suffix_len as u32) != cur.dist(d) {
            c.fail(
                "suffix_length",
                format!("suffix {} vs dist {}", record.suffix_len, cur.dist(d)),
            );
        }
    }
    record.path = path;
    record
}

fn describe_dispatch(c: &mut Turn<'_, '_>, d: usize, path: &[usize]) -> Dispatch {
    let (at, cur, prev) = (c.at, c.cur, c.prev);
    let pos = path.iter().position(|&x| x == d).expect("dispatcher on path");
    let pred = pos.checked_sub(1).map(|i| path[i]);
    let level_before = if c.prev_at.contains(d) {
        prev.level(c.prev_at, d)
    } else {
        Distance::ZERO
    };
    let level_after = cur.level(at, d);
    let (det_before_pred, pred_path_before) = match pred {
        Some(w) if c.prev_at.contains(d) => {
            let det = prev.det(c.prev_at, d, w).0;
            let mut p = prev.det_path(c.prev_at, d, w);
            p.remove(0);
            (Some(det), p)
        }
        _ => (None, Vec::new()),
    };
    let (dir, sec_dir) = (
        cur.dir(d).expect("two alive neighbors"),
        cur.sec_dir(d).expect("two alive neighbors"),
    );

    // Levels fall by at most one per step along both paths out of the dispatcher.
    if let Distance::Finite(top) = level_after {
        for (name, walk) in [("path", cur.path(at, d)), ("sec-path", cur.sec_path(at, d))] {
            for (j, &x) in walk.iter().enumerate().take(top as usize + 1) {
                if cur.level(at, x) < Distance::Finite(top - j as u32) {
                    c.fail(
                        "dispatch_level_drop",
                        format!("{name} of {} drops too fast at {}", c.name(d), c.name(x)),
                    );
                    break;
                }
            }
        }
    }
    Dispatch {
        node: d,
        level_before,
        level_after,
        dir,
        sec_dir,
        pred,
        det_before_pred,
        pred_path_before,
    }
}

/// Checks that only concern the re-evaluated component at turn `t`.
fn check_structure(c: &mut Turn<'_, '_>, comp: &[usize]) {
    let (at, cur) = (c.at, c.cur);
    for &x in comp {
        let alive_deg = alive_degree(at, c.alive, x);
        if at.is_white(x) {
            let dead_nbr = at.neighbors(x).iter().any(|&y| !c.alive[y]);
            if c.alive[x] == dead_nbr {
                c.fail(
                    "white_vitality",
                    format!("{} alive={} with dead neighbor={dead_nbr}", c.name(x), c.alive[x]),
                );
            }
        } else if c.alive[x] != (alive_deg >= 2) {
            c.fail(
                "black_vitality",
                format!("{} alive={} with {alive_deg} alive neighbors", c.name(x), c.alive[x]),
            );
        }

        let lv = cur.level(at, x);
        for u in [cur.dir(x), cur.sec_dir(x)].into_iter().flatten() {
            let lu = cur.level(at, u);
            // From a white vertex the step is two-sided. From a black one only
            // the drop is bounded: its second direction may lead much higher.
            let ok = if at.is_white(x) {
                lipschitz(lv, lu)
            } else {
                lu.succ() >= lv
            };
            if !ok {
                c.fail(
                    "level_adjacency",
                    format!("{} level {lv} vs {} level {lu}", c.name(x), c.name(u)),
                );
            }
        }

        if c.alive[x] {
            let mut nexts: Vec<Option<usize>> = vec![cur.dir(x)];
            nexts.extend(at.neighbors(x).iter().map(|&p| cur.det(at, p, x).1));
            if nexts.into_iter().flatten().any(|y| !c.alive[y]) {
                c.fail(
                    "alive_paths",
                    format!("a mini-max step from alive {} leaves the alive set", c.name(x)),
                );
            }
        }
    }
}

/// Dead vertices of the final forest at turn `t`, as a set.
pub fn dead_set(trace: &Trace, t: usize) -> BTreeSet<usize> {
    (0..trace.vertex_count).filter(|&v| trace.is_dead_at(v, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::TieBreak;
    use crate::testutil::{e1, forest_from_raw, raw_arrivals, star};
    use crate::vitality::{dispatching_vertex, split_path, vitality_state};
    use proptest::prelude::*;

    #[test]
    fn e1_trace() {
        let f = e1();
        let tr = run_trace(&f);
        assert!(tr.violations.is_empty(), "{:?}", tr.violations);
        let dists: Vec<_> = tr.turns.iter().map(|r| r.dist).collect();
        assert_eq!(
            dists,
            vec![Distance::Finite(1), Distance::Finite(1), Distance::Finite(5)]
        );
        let last = &tr.turns[2];
        assert_eq!(last.deaths.len(), 6);
        assert_eq!((last.prefix_len, last.suffix_len), (5, 0));
        assert!(last.dispatch.is_none());
        assert_eq!(tr.turns[0].class(Beta::two()), TurnClass::CaseJump);
    }

    #[test]
    fn star_trace() {
        let tr = run_trace(&star());
        assert!(tr.violations.is_empty(), "{:?}", tr.violations);
        let t2 = &tr.turns[1];
        assert_eq!(t2.deaths.len(), 2);
        assert_eq!((t2.prefix_len, t2.suffix_len), (2, 1));
        let d = t2.dispatch.as_ref().unwrap();
        assert_eq!(
            (d.level_before, d.level_after),
            (Distance::Finite(1), Distance::Finite(1))
        );
        assert_eq!(d.pred, Some(0));
        assert_eq!(t2.class(Beta::two()), TurnClass::CaseSlow);
    }

    proptest! {
        #[test]
        fn trace_has_no_violations(n in 1usize..12, raw in raw_arrivals(12, 18), rev in any::<bool>()) {
            let tb = if rev { TieBreak::Reversed } else { TieBreak::Forward };
            let f = forest_from_raw(n, &raw).with_tie_break(tb);
            let tr = run_trace(&f);
            prop_assert!(tr.violations.is_empty(), "{:?}", tr.violations);
        }

        #[test]
        fn trace_matches_standalone_vitality(n in 1usize..8, raw in raw_arrivals(8, 10)) {
            let f = forest_from_raw(n, &raw);
            let tr = run_trace(&f);
            for r in &tr.turns {
                let state = vitality_state(&f, r.turn).unwrap();
                let deaths: BTreeSet<_> = r.deaths.iter().map(|&x| f.vertex(x)).collect();
                prop_assert_eq!(&deaths, &state.deaths_this_turn);
                if r.dist.is_finite() {
                    let d = dispatching_vertex(&f, r.turn).unwrap();
                    prop_assert_eq!(d, r.dispatch.as_ref().map(|d| f.vertex(d.node)));
                    let s = split_path(&f, r.turn).unwrap();
                    prop_assert_eq!((s.prefix_len, s.suffix.len()), (r.prefix_len, r.suffix_len));
                }
            }
        }
    }
}
