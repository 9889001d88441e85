//! Token accounting for jumping dispatch levels.
//!
//! Every level `l` is simulated over the half-turn sequence `0, ½, 1, …, n`
//! on the final forest. Components of `F^l` with at least `ρl` vertices hold
//! one unit of `δ` tokens; merges transfer or create units, and at a
//! dispatcher's half-turn a merge of two funded components spends one unit to
//! pay for the suffix of the arrival path. All balances are counted in units
//! of `δ`, so the bookkeeping is exact.

use num_rational::Ratio;
use serde::Serialize;

use crate::audit::Budgets;
use crate::distance::Distance;
use crate::dsu::DisjointSets;
use crate::forest::OnlineForest;
use crate::levels::{Beta, TurnClass};
use crate::trace::{run_trace, Trace, Violation};

/// One jumping turn as seen by the ledger.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpTurn {
    pub turn: usize,
    pub dispatcher: String,
    pub level_before: u32,
    pub level_after: u32,
    /// Levels `l₀..=l₁` on which two funded components must meet.
    pub claimed_levels: u32,
    /// Levels on which two funded components actually met.
    pub merge_levels: u32,
    /// `δ · merge_levels`.
    pub utilized: f64,
    /// `δ(1 − 1/β)/2 · level_after`, which is `level_after`.
    pub required: u32,
}

impl JumpTurn {
    pub fn shortfall(&self, beta: Beta) -> f64 {
        let delta = beta.delta();
        let got = delta * Ratio::from_integer(self.merge_levels as u64);
        let need = Ratio::from_integer(self.required as u64);
        if got >= need {
            0.0
        } else {
            let gap = need - got;
            *gap.numer() as f64 / *gap.denom() as f64
        }
    }
}

/// Unit counts over all levels; `funded = utilized + released + held`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Conservation {
    pub funded: u64,
    pub utilized: u64,
    pub released: u64,
    pub held: u64,
}

impl Conservation {
    pub fn balances(&self) -> bool {
        self.funded == self.utilized + self.released + self.held
    }

    fn add(&mut self, o: &Conservation) {
        self.funded += o.funded;
        self.utilized += o.utilized;
        self.released += o.released;
        self.held += o.held;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerReport {
    pub beta: String,
    pub rho: String,
    pub delta: String,
    pub n: usize,
    pub levels: usize,
    pub jump_turns: Vec<JumpTurn>,
    /// Jumping turns whose utilized tokens fall short of the suffix length.
    pub utilization_shortfalls: Vec<usize>,
    pub max_shortfall: f64,
    pub payments: u64,
    pub max_vertex_payment: f64,
    pub payment_bound: f64,
    pub conservation: Conservation,
    pub jump_suffix_total: u64,
    pub jump_suffix_bound: f64,
    /// Structural failures; expected empty.
    pub violations: Vec<Violation>,
}

impl LedgerReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn utilization_covers_every_jump(&self) -> bool {
        self.utilization_shortfalls.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LedgerError {
    #[error("token ledger infeasible: {} violation(s), first: {:?}", .0.violations.len(), .0.violations.first())]
    Infeasible(Box<LedgerReport>),
}

/// Builds the trace and runs the ledger on it.
pub fn run_token_ledger(forest: &OnlineForest, beta: Beta) -> Result<LedgerReport, LedgerError> {
    let trace = run_trace(forest);
    ledger_from_trace(forest, &trace, beta)
}

/// Like [`ledger_report`] but turns structural failures into an error.
pub fn ledger_from_trace(forest: &OnlineForest, trace: &Trace, beta: Beta) -> Result<LedgerReport, LedgerError> {
    let report = ledger_report(forest, trace, beta);
    if report.is_feasible() {
        Ok(report)
    } else {
        Err(LedgerError::Infeasible(Box::new(report)))
    }
}

/// The dispatcher's rise at a jumping turn.
#[derive(Clone, Copy)]
struct Jump {
    node: usize,
    before: u32,
    after: u32,
    dir: usize,
    sec_dir: usize,
}

impl Jump {
    fn claimed(&self) -> std::ops::RangeInclusive<u32> {
        self.before + 1..=(self.before + self.after) / 2
    }
}

struct Input<'a> {
    forest: &'a OnlineForest,
    beta: Beta,
    /// Per vertex: `(slot, new level)`, slots ascending. Slot `2t − 1` is the
    /// half-turn before `t`, slot `2t` the dispatcher's rise.
    changes: Vec<Vec<(u32, Distance)>>,
    /// Per slot `2t`, the dispatcher's rise on jumping turns.
    jumps: Vec<Option<Jump>>,
}

#[derive(Default)]
struct LevelOutcome {
    merge_levels: Vec<(usize, u32)>,
    payers: Vec<usize>,
    conservation: Conservation,
    violations: Vec<Violation>,
}

struct Scratch {
    dsu: DisjointSets,
    present: Vec<bool>,
    funded: Vec<bool>,
    paid: Vec<bool>,
    members: Vec<Vec<usize>>,
}

/// Runs the ledger and reports everything, feasible or not.
pub fn ledger_report(forest: &OnlineForest, trace: &Trace, beta: Beta) -> LedgerReport {
    let n = trace.n_eff();
    let levels = 2 * n;
    let vcount = trace.vertex_count;

    let mut changes = vec![Vec::new(); vcount];
    let mut jumps = vec![None; 2 * trace.turns.len() + 2];
    for r in &trace.turns {
        let dispatcher = r.dispatch.as_ref().map(|d| d.node);
        for &(v, lv) in &r.level_changes {
            let slot = if Some(v) == dispatcher {
                2 * r.turn
            } else {
                2 * r.turn - 1
            };
            changes[v].push((slot as u32, lv));
        }
        if let (TurnClass::CaseJump, Some(d)) = (r.class(beta), &r.dispatch) {
            let finite = |x: Distance| x.finite().expect("dispatch levels are finite");
            jumps[2 * r.turn] = Some(Jump {
                node: d.node,
                before: finite(d.level_before),
                after: finite(d.level_after),
                dir: d.dir,
                sec_dir: d.sec_dir,
            });
        }
    }
    let input = Input {
        forest,
        beta,
        changes,
        jumps,
    };

    // Vertices ordered by final level, so each level's participants are a prefix.
    let mut by_top: Vec<usize> = (0..vcount).filter(|&v| !input.changes[v].is_empty()).collect();
    let top = |v: usize| input.changes[v].last().map(|c| c.1).unwrap_or(Distance::ZERO);
    by_top.sort_by_key(|&v| std::cmp::Reverse(top(v)));

    let mut scratch = Scratch {
        dsu: DisjointSets::new(vcount),
        present: vec![false; vcount],
        funded: vec![false; vcount],
        paid: vec![false; vcount],
        members: vec![Vec::new(); vcount],
    };
    let mut merge_levels = vec![0u32; trace.turns.len() + 1];
    let mut payments = vec![0f64; vcount];
    let mut payment_count = 0u64;
    let mut conservation = Conservation::default();
    let mut violations = trace.violations.clone();
    let delta_over_rho = beta.delta_over_rho();

    for l in 1..=levels as u32 {
        let k = by_top.partition_point(|&v| top(v) >= Distance::Finite(l));
        if k == 0 {
            continue;
        }
        let out = run_level(&input, &mut scratch, &by_top[..k], l);
        for (t, c) in out.merge_levels {
            merge_levels[t] += c;
        }
        for v in out.payers {
            payments[v] += delta_over_rho / l as f64;
            payment_count += 1;
        }
        if !out.conservation.balances() {
            violations.push(Violation {
                turn: 0,
                check: "ledger_conservation",
                detail: format!("level {l}: {:?}", out.conservation),
            });
        }
        conservation.add(&out.conservation);
        violations.extend(out.violations);
    }

    let budgets = Budgets::new(n, beta);
    let mut jump_turns = Vec::new();
    let mut utilization_shortfalls = Vec::new();
    let mut max_shortfall = 0f64;
    let mut jump_suffix_total = 0u64;
    for r in &trace.turns {
        let Some(j) = input.jumps[2 * r.turn] else {
            continue;
        };
        jump_suffix_total += r.suffix_len as u64;
        let claimed = j.claimed().filter(|&l| l as usize <= levels).count() as u32;
        let jt = JumpTurn {
            turn: r.turn,
            dispatcher: forest.vertex(j.node).to_string(),
            level_before: j.before,
            level_after: j.after,
            claimed_levels: claimed,
            merge_levels: merge_levels[r.turn],
            utilized: ratio_f64(beta.delta()) * merge_levels[r.turn] as f64,
            required: j.after,
        };
        if jt.merge_levels < claimed {
            violations.push(Violation {
                turn: r.turn,
                check: "claim_coverage",
                detail: format!("funded merges on {} of {claimed} levels", jt.merge_levels),
            });
        }
        let gap = jt.shortfall(beta);
        if gap > 0.0 {
            utilization_shortfalls.push(r.turn);
            max_shortfall = max_shortfall.max(gap);
        }
        jump_turns.push(jt);
    }

    let payment_bound = delta_over_rho * ((2.0 * n.max(1) as f64).ln() + 1.0);
    let max_vertex_payment = payments.iter().copied().fold(0.0, f64::max);
    if max_vertex_payment > payment_bound + 1e-9 {
        violations.push(Violation {
            turn: 0,
            check: "payment_bound",
            detail: format!("a vertex paid {max_vertex_payment:.3} > {payment_bound:.3}"),
        });
    }
    if jump_suffix_total as f64 > budgets.jump {
        violations.push(Violation {
            turn: 0,
            check: "jump_budget",
            detail: format!("{jump_suffix_total} > {:.1}", budgets.jump),
        });
    }

    LedgerReport {
        beta: beta.to_string(),
        rho: beta.rho().to_string(),
        delta: beta.delta().to_string(),
        n,
        levels,
        jump_turns,
        utilization_shortfalls,
        max_shortfall,
        payments: payment_count,
        max_vertex_payment,
        payment_bound,
        conservation,
        jump_suffix_total,
        jump_suffix_bound: budgets.jump,
        violations,
    }
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Simulates one level over every half-turn where some vertex reaches it.
fn run_level(input: &Input<'_>, s: &mut Scratch, participants: &[usize], l: u32) -> LevelOutcome {
    let beta = input.beta;
    let mut entries: Vec<(u32, usize)> = participants
        .iter()
        .map(|&v| {
            let ch = &input.changes[v];
            let i = ch.partition_point(|c| c.1 < Distance::Finite(l));
            (ch[i].0, v)
        })
        .collect();
    entries.sort_unstable();

    let mut out = LevelOutcome::default();
    let mut start = 0;
    while start < entries.len() {
        let slot = entries[start].0;
        let end = start + entries[start..].iter().take_while(|e| e.0 == slot).count();
        let group: Vec<usize> = entries[start..end].iter().map(|e| e.1).collect();
        start = end;

        let turn = slot.div_ceil(2) as usize;
        let jump = if slot.is_multiple_of(2) {
            input.jumps[slot as usize]
        } else {
            None
        };
        if let Some(j) = jump.filter(|j| j.claimed().contains(&l)) {
            check_claim(s, j, l, beta, turn, &mut out.violations);
        }

        // Funded components touching the newcomers, before anything merges.
        let mut old_funded: Vec<usize> = Vec::new();
        for &v in &group {
            for &u in input.forest.final_neighbors(v) {
                if s.present[u] {
                    let r = s.dsu.find(u);
                    if s.funded[r] {
                        old_funded.push(r);
                    }
                }
            }
        }
        old_funded.sort_unstable();
        old_funded.dedup();

        for &v in &group {
            s.present[v] = true;
            s.members[v].push(v);
        }
        for &v in &group {
            for &u in input.forest.final_neighbors(v) {
                if s.present[u] {
                    let (ra, rb) = (s.dsu.find(v), s.dsu.find(u));
                    if ra != rb {
                        let r = s.dsu.union(ra, rb);
                        let other = if r == ra { rb } else { ra };
                        let moved = std::mem::take(&mut s.members[other]);
                        s.members[r].extend(moved);
                    }
                }
            }
        }

        let mut roots: Vec<usize> = group.iter().map(|&v| s.dsu.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        let mut funded_in: Vec<usize> = old_funded.iter().map(|&r| s.dsu.find(r)).collect();
        funded_in.sort_unstable();
        for r in roots {
            let k = funded_in.iter().filter(|&&x| x == r).count() as u64;
            if jump.is_some() && k >= 2 {
                out.merge_levels.push((turn, 1));
                out.conservation.utilized += 1;
                out.conservation.released += k - 2;
            } else if k >= 1 {
                out.conservation.released += k - 1;
            } else if beta.reaches_share(s.dsu.size_of(r) as u64, l as u64) {
                out.conservation.funded += 1;
                for &m in &s.members[r] {
                    if s.paid[m] {
                        out.violations.push(Violation {
                            turn,
                            check: "single_payment",
                            detail: format!("{} paid twice on level {l}", input.forest.vertex(m)),
                        });
                    }
                    s.paid[m] = true;
                    out.payers.push(m);
                }
            } else {
                s.funded[r] = false;
                continue;
            }
            s.funded[r] = true;
            s.members[r].clear();
        }
    }

    for &v in participants {
        if s.present[v] && s.dsu.find(v) == v && s.funded[v] {
            out.conservation.held += 1;
        }
    }
    for &v in participants {
        s.dsu.reset(v);
        s.present[v] = false;
        s.funded[v] = false;
        s.paid[v] = false;
        s.members[v].clear();
    }
    out
}

/// Both directions of the dispatcher sit in distinct components of
/// `F^l_{t−½}` holding at least `ρl` vertices each.
fn check_claim(s: &mut Scratch, j: Jump, l: u32, beta: Beta, turn: usize, violations: &mut Vec<Violation>) {
    let mut fail = |detail: String| {
        violations.push(Violation {
            turn,
            check: "claim_components",
            detail: format!("level {l}: {detail}"),
        })
    };
    if !s.present[j.dir] || !s.present[j.sec_dir] {
        fail("a direction is below the level".into());
        return;
    }
    let (r1, r2) = (s.dsu.find(j.dir), s.dsu.find(j.sec_dir));
    if r1 == r2 {
        fail("directions share a component".into());
    }
    for r in [r1, r2] {
        let size = s.dsu.size_of(r) as u64;
        if !beta.reaches_share(size, l as u64) {
            fail(format!("component of size {size} is too small"));
        }
    }
}
