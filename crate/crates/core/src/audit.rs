//! Aggregate budgets and per-turn audits of slow dispatch turns.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::distance::Distance;
use crate::forest::{ForestError, OnlineForest, VertexId};
use crate::levels::{Beta, TurnClass};
use crate::minimax::MiniMaxTable;
use crate::trace::{run_trace, Trace, TurnTrace, Violation};

/// Concrete upper bounds on the summed path lengths of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budgets {
    /// Dying prefixes: `2n`.
    pub prefix: f64,
    /// Suffixes of slow turns: `2βn + βn·log₂ n`.
    pub slow: f64,
    /// Suffixes of jumping turns: `β(β+1)/(β−1)² · n(2 ln n + 3.4) + n`.
    pub jump: f64,
    pub total: f64,
}

impl Budgets {
    pub fn new(n: usize, beta: Beta) -> Self {
        let nf = n as f64;
        let b = beta.as_f64();
        let (log2, ln) = if n == 0 { (0.0, 0.0) } else { (nf.log2(), nf.ln()) };
        let prefix = 2.0 * nf;
        let slow = 2.0 * b * nf + b * nf * log2;
        let jump = b * (b + 1.0) / ((b - 1.0) * (b - 1.0)) * nf * (2.0 * ln + 3.4) + nf;
        Budgets {
            prefix,
            slow,
            jump,
            total: prefix + slow + jump,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("turn {turn} is {class}, not {expected}")]
    WrongClass {
        turn: usize,
        class: TurnClass,
        expected: TurnClass,
    },
    #[error("arrival at turn {turn} has degree {degree}; every arrival needs at least two neighbors")]
    LowDegree { turn: usize, degree: usize },
    #[error("audit failed: {0:?}")]
    Failed(Vec<Violation>),
}

/// What one slow turn looked like on the final forest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlowTurn {
    pub turn: usize,
    pub suffix_len: usize,
    pub level_before: u32,
    /// Size of the dispatcher's alive component before the turn.
    pub component: usize,
    pub deaths: usize,
    /// Sizes of the surviving pieces, largest first.
    pub pieces: Vec<usize>,
    /// Whether the suffix landed in a largest piece.
    pub in_largest: bool,
    /// Length of the previous-turn path out of the predecessor.
    pub pred_path_len: Option<u32>,
    pub violations: Vec<Violation>,
}

/// Whole-run aggregates and audits.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub beta: String,
    pub turns: usize,
    pub sum_dist: u64,
    pub sum_sap: u64,
    pub sum_prefix: u64,
    pub sum_slow_suffix: u64,
    pub sum_jump_suffix: u64,
    pub slow_turns: usize,
    pub jump_turns: usize,
    pub max_halving_charges: u32,
    pub halving_bound: f64,
    pub budgets: Budgets,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn alive_at(trace: &Trace, v: usize, s: usize) -> bool {
    !trace.is_dead_at(v, s)
}

/// Vertices reachable from `start` through vertices accepted by `keep`.
fn reach(forest: &OnlineForest, start: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    if !keep(start) {
        return Vec::new();
    }
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in forest.final_neighbors(x) {
            if keep(y) && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().collect()
}

fn slow_turn(forest: &OnlineForest, trace: &Trace, r: &TurnTrace, beta: Beta, charges: &mut [u32]) -> SlowTurn {
    let t = r.turn;
    let d = r.dispatch.as_ref().expect("slow turns have a dispatcher");
    let mut violations = Vec::new();
    let mut fail = |check: &'static str, detail: String| violations.push(Violation { turn: t, check, detail });

    let level_before = d.level_before.finite().unwrap_or(u32::MAX);
    if !beta.below_times(r.suffix_len as u64, level_before as u64) {
        fail(
            "slow_suffix",
            format!("suffix {} vs level {level_before}", r.suffix_len),
        );
    }
    if let Some(det) = d.det_before_pred {
        if d.level_before > det.succ() {
            fail(
                "slow_pred_bound",
                format!("dist before {} > det {} + 1", d.level_before, det),
            );
        }
    }

    let comp = reach(forest, d.node, |x| alive_at(trace, x, t - 1));
    let comp_set: BTreeSet<usize> = comp.iter().copied().collect();
    let dead: BTreeSet<usize> = r.deaths.iter().copied().collect();
    if let Some(&first) = r.deaths.first() {
        let joined = reach(forest, first, |x| dead.contains(&x));
        if joined.len() != dead.len() {
            fail(
                "slow_deaths_connected",
                format!("{} of {} deaths reachable", joined.len(), dead.len()),
            );
        }
    }
    if !dead.is_subset(&comp_set) {
        fail(
            "slow_deaths_in_component",
            "a death lies outside the dispatcher's component".into(),
        );
    }

    // Surviving pieces of the component.
    let mut piece_of = std::collections::BTreeMap::new();
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    for &x in &comp {
        if dead.contains(&x) || piece_of.contains_key(&x) {
            continue;
        }
        let p = reach(forest, x, |y| comp_set.contains(&y) && !dead.contains(&y));
        for &y in &p {
            piece_of.insert(y, pieces.len());
        }
        pieces.push(p);
    }
    let suffix = r.suffix();
    let homes: BTreeSet<Option<&usize>> = suffix.iter().map(|x| piece_of.get(x)).collect();
    let home = match homes.into_iter().collect::<Vec<_>>()[..] {
        [Some(&i)] => Some(i),
        _ => {
            fail("slow_suffix_piece", "suffix is not inside one surviving piece".into());
            None
        }
    };

    let largest = pieces.iter().map(Vec::len).max().unwrap_or(0);
    let in_largest = home.is_some_and(|i| pieces[i].len() == largest);
    // The suffix's piece plays the largest one when it ties for the maximum.
    let big = if in_largest {
        home
    } else {
        pieces.iter().position(|p| p.len() == largest)
    };
    if in_largest {
        let big_set: BTreeSet<usize> = pieces[big.unwrap()].iter().copied().collect();
        for &x in &d.pred_path_before {
            if big_set.contains(&x) {
                fail(
                    "slow_pred_path",
                    format!("{} lies in the largest piece", forest.vertex(x)),
                );
            }
            if !alive_at(trace, x, t - 1) {
                fail("slow_pred_path", format!("{} was already dead", forest.vertex(x)));
            }
        }
        for (i, p) in pieces.iter().enumerate() {
            if Some(i) != big {
                p.iter().for_each(|&x| charges[x] += 1);
            }
        }
    } else if let Some(i) = home {
        pieces[i].iter().for_each(|&x| charges[x] += 1);
    }

    let mut sizes: Vec<usize> = pieces.iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    SlowTurn {
        turn: t,
        suffix_len: r.suffix_len,
        level_before,
        component: comp.len(),
        deaths: dead.len(),
        pieces: sizes,
        in_largest,
        pred_path_len: d.det_before_pred.and_then(Distance::finite),
        violations,
    }
}

/// Audits one slow turn on its own.
pub fn audit_case_slow(forest: &OnlineForest, t: usize, beta: Beta) -> Result<SlowTurn, AuditError> {
    forest.at(t)?;
    let trace = run_trace(forest);
    let r = &trace.turns[t - 1];
    let class = r.class(beta);
    if class != TurnClass::CaseSlow {
        return Err(AuditError::WrongClass {
            turn: t,
            class,
            expected: TurnClass::CaseSlow,
        });
    }
    let mut charges = vec![0; trace.vertex_count];
    let s = slow_turn(forest, &trace, r, beta, &mut charges);
    if s.violations.is_empty() {
        Ok(s)
    } else {
        Err(AuditError::Failed(s.violations))
    }
}

/// Runs every aggregate bound and every slow-turn audit over a trace.
pub fn audit_run(forest: &OnlineForest, trace: &Trace, beta: Beta) -> AuditReport {
    let n = trace.n_eff();
    let budgets = Budgets::new(n, beta);
    let mut violations = trace.violations.clone();
    let mut charges = vec![0u32; trace.vertex_count];
    let mut report = AuditReport {
        n,
        beta: beta.to_string(),
        turns: trace.turns.len(),
        sum_dist: 0,
        sum_sap: 0,
        sum_prefix: 0,
        sum_slow_suffix: 0,
        sum_jump_suffix: 0,
        slow_turns: 0,
        jump_turns: 0,
        max_halving_charges: 0,
        halving_bound: (2.0 * n.max(1) as f64).log2(),
        budgets,
        violations: Vec::new(),
    };

    for r in &trace.turns {
        let Some(dist) = r.dist.finite() else {
            continue;
        };
        report.sum_dist += dist as u64;
        report.sum_sap += r.sap_len.unwrap_or(0) as u64;
        report.sum_prefix += r.prefix_len as u64;
        if r.prefix_len + r.suffix_len != dist as usize {
            violations.push(Violation {
                turn: r.turn,
                check: "split_sums",
                detail: format!("{} + {} != {dist}", r.prefix_len, r.suffix_len),
            });
        }
        match r.class(beta) {
            TurnClass::CaseSlow => {
                report.slow_turns += 1;
                report.sum_slow_suffix += r.suffix_len as u64;
                violations.extend(slow_turn(forest, trace, r, beta, &mut charges).violations);
            }
            TurnClass::CaseJump => {
                report.jump_turns += 1;
                report.sum_jump_suffix += r.suffix_len as u64;
            }
            _ => {}
        }
    }
    report.max_halving_charges = charges.iter().copied().max().unwrap_or(0);

    let mut over = |check: &'static str, got: f64, bound: f64| {
        if got > bound {
            violations.push(Violation {
                turn: 0,
                check,
                detail: format!("{got} > {bound:.3}"),
            });
        }
    };
    over(
        "halving_charges",
        report.max_halving_charges as f64,
        report.halving_bound,
    );
    over("prefix_budget", report.sum_prefix as f64, budgets.prefix);
    over("slow_budget", report.sum_slow_suffix as f64, budgets.slow);
    over("jump_budget", report.sum_jump_suffix as f64, budgets.jump);
    over("total_budget", report.sum_dist as f64, budgets.total);
    report.violations = violations;
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeTwoReport {
    pub n: usize,
    pub deaths: usize,
    pub sum_path: u64,
    pub bound: f64,
}

impl DegreeTwoReport {
    pub fn holds(&self) -> bool {
        self.deaths == 0 && self.sum_path as f64 <= self.bound
    }
}

/// The degree-two regime: nothing ever dies and the summed path lengths stay
/// within `n·log₂ n` for `n` white vertices.
pub fn check_degree_two(forest: &OnlineForest) -> Result<DegreeTwoReport, AuditError> {
    for t in 1..=forest.turn() {
        let degree = forest.final_neighbors(forest.black_node(t)).len();
        if forest.at(t)?.degree(forest.black_node(t)) < 2 {
            return Err(AuditError::LowDegree { turn: t, degree });
        }
    }
    let trace = run_trace(forest);
    Ok(degree_two_from_trace(&trace))
}

pub fn degree_two_from_trace(trace: &Trace) -> DegreeTwoReport {
    let n = trace.white_count;
    DegreeTwoReport {
        n,
        deaths: trace.turns.iter().map(|r| r.deaths.len()).sum(),
        sum_path: trace.turns.iter().filter_map(|r| r.dist.finite()).map(u64::from).sum(),
        bound: if n == 0 { 0.0 } else { n as f64 * (n as f64).log2() },
    }
}

/// One level of the component-size claim at a jumping turn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimLevel {
    pub level: u32,
    pub dir_component: usize,
    pub sec_dir_component: usize,
    pub separate: bool,
    pub large_enough: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentClaimReport {
    pub turn: usize,
    pub dispatcher: VertexId,
    pub levels: Vec<ClaimLevel>,
}

impl ComponentClaimReport {
    pub fn holds(&self) -> bool {
        self.levels.iter().all(|c| c.separate && c.large_enough)
    }
}

/// Checks, straight from the definitions, that both directions of the
/// dispatcher sit in separate, large enough components of `F^l_{t−½}` for
/// every claimed level.
pub fn check_component_claim(forest: &OnlineForest, t: usize, beta: Beta) -> Result<ComponentClaimReport, AuditError> {
    let at = forest.at(t)?;
    let trace = run_trace(forest);
    let r = &trace.turns[t - 1];
    let class = r.class(beta);
    let d = match (&r.dispatch, class) {
        (Some(d), TurnClass::CaseJump) => d,
        _ => {
            return Err(AuditError::WrongClass {
                turn: t,
                class,
                expected: TurnClass::CaseJump,
            })
        }
    };
    let table = MiniMaxTable::build(&at);
    let half: Vec<Distance> = (0..forest.vertex_count())
        .map(|x| {
            if x == d.node {
                d.level_before
            } else if at.contains(x) {
                table.level(&at, x)
            } else {
                Distance::ZERO
            }
        })
        .collect();
    let (lo, hi) = (d.level_before.finite().unwrap(), d.level_after.finite().unwrap());
    let mut levels = Vec::new();
    for l in lo + 1..=(lo + hi) / 2 {
        let keep = |x: usize| half[x] >= Distance::Finite(l);
        let a = reach(forest, d.dir, keep);
        let b = reach(forest, d.sec_dir, keep);
        levels.push(ClaimLevel {
            level: l,
            dir_component: a.len(),
            sec_dir_component: b.len(),
            separate: !a.is_empty() && !b.is_empty() && !a.contains(&d.sec_dir),
            large_enough: [a.len(), b.len()]
                .iter()
                .all(|&s| beta.reaches_share(s as u64, l as u64)),
        });
    }
    Ok(ComponentClaimReport {
        turn: t,
        dispatcher: forest.vertex(d.node),
        levels,
    })
}
