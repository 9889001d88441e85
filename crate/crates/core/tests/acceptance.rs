//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero when a criterion fails for a reason other than its known,
//! documented one.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use saptree::audit::{audit_run, degree_two_from_trace};
use saptree::ledger::ledger_report;
use saptree::levels::Beta;
use saptree::oracle::OracleBudget;
use saptree::scenario::{generate, Family, RunRecord};
use saptree::trace::run_trace;
use saptree::verify::{verify, CheckOutcome, Status, VerifyOptions, DEFAULT_CHECKS};
use saptree::vitality::alive_flags;
use saptree::{Distance, MiniMaxTable, OnlineForest};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

/// How a criterion came out.
enum Verdict {
    Pass(String),
    /// Failed in exactly the documented way; does not fail the run.
    KnownFail(String),
    Fail(String),
}

fn fixtures() -> Vec<OnlineForest> {
    let f = |w: usize, a: &[&[u32]]| {
        OnlineForest::from_arrivals(w, &a.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    };
    vec![
        f(3, &[&[1, 2], &[2, 3], &[3]]),
        f(4, &[&[1, 2, 3], &[1]]),
        f(2, &[&[1, 2], &[1], &[2]]),
        f(2, &[&[1, 2], &[1], &[1]]),
        f(1, &[&[1], &[1], &[1]]),
        f(4, &[&[1, 2], &[3, 4], &[2, 3], &[1], &[4]]),
        f(11, &[&[2, 3], &[2, 4], &[11, 2], &[5, 11], &[3, 6]]),
        f(9, &[&[7, 1, 3], &[4], &[1, 8], &[6], &[3, 5], &[7]]),
        f(5, &[]),
    ]
}

/// Random arrivals on at most `max_white` whites; arrivals that would close
/// a cycle are dropped, so some turns break Hall's condition and some do not.
fn random_small(rng: &mut ChaCha8Rng, max_white: usize) -> OnlineForest {
    let w = rng.gen_range(1..=max_white);
    let turns = rng.gen_range(1..=w + 2);
    let mut f = OnlineForest::new(w).unwrap();
    for _ in 0..turns {
        let k = rng.gen_range(1..=3.min(w));
        let mut ws: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=w as u32)).collect();
        ws.sort_unstable();
        ws.dedup();
        let _ = f.add_black_whites(&ws);
    }
    f
}

fn small_instances() -> Vec<OnlineForest> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a9);
    let mut out = fixtures();
    out.extend((0..600).map(|_| random_small(&mut rng, 8)));
    out
}

fn family_instances(sizes: &[usize], seeds: u64) -> Vec<OnlineForest> {
    let mut out = Vec::new();
    for family in Family::ALL {
        for &n in sizes {
            for seed in 0..seeds {
                if let Ok(file) = generate(family, n, seed) {
                    out.push(file.to_forest().unwrap());
                }
            }
        }
    }
    out
}

fn outcomes(forest: &OnlineForest, checks: &[&str], budget: OracleBudget, alt: bool) -> Vec<CheckOutcome> {
    let opts = VerifyOptions {
        budget,
        checks: Some(checks.iter().map(|s| s.to_string()).collect()),
        alt_tiebreak: alt,
        ..VerifyOptions::default()
    };
    verify(forest, &opts).unwrap().outcomes
}

/// Runs checks over instances; counts examined units, skips and failures.
fn sweep(instances: &[OnlineForest], checks: &[&str], budget: OracleBudget, alt: bool) -> (usize, usize, Vec<String>) {
    let (mut runs, mut skipped, mut failures) = (0, 0, Vec::new());
    for (i, f) in instances.iter().enumerate() {
        for o in outcomes(f, checks, budget, alt) {
            runs += 1;
            match o.status {
                Status::Pass => {}
                Status::Skipped => skipped += 1,
                Status::Fail => failures.push(format!("instance {i} {}: {:?}", o.name, o.failures.first())),
            }
        }
    }
    (runs, skipped, failures)
}

fn oracle_budget() -> OracleBudget {
    OracleBudget {
        max_component_size: 24,
        max_subset_size: 12,
    }
}

fn oracle_criterion(small: &[OnlineForest], check: &str) -> Verdict {
    let (runs, skipped, failures) = sweep(small, &[check], oracle_budget(), false);
    let summary = format!("{} instances, {runs} runs, {skipped} skipped", small.len());
    if failures.is_empty() && skipped == 0 {
        Verdict::Pass(summary)
    } else {
        Verdict::Fail(format!("{summary}, {} failing: {:?}", failures.len(), failures.first()))
    }
}

/// Level adjacency along both mini-max directions, as literally stated, plus
/// distance monotonicity, recomputed here from the engine tables.
fn levels_criterion() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e7e15);
    let mut instances = Vec::new();
    for i in 0..1000u64 {
        let family = Family::ALL[(i % 4) as usize];
        let n = rng.gen_range(2..=256);
        if let Ok(file) = generate(family, n, i) {
            instances.push(file.to_forest().unwrap());
        } else {
            instances.push(random_small(&mut rng, 8));
        }
    }

    let (mut white_side, mut black_drop, mut black_rise, mut monotone) = (0usize, 0usize, 0usize, 0usize);
    let mut alive_rise = 0usize;
    let mut first_rise = None;
    let mut checked = 0u64;
    for f in &instances {
        let mut table = MiniMaxTable::build(&f.at(0).unwrap());
        let mut seen: Vec<Option<(Distance, Distance)>> = vec![None; f.vertex_count()];
        for t in 1..=f.turn() {
            let at = f.at(t).unwrap();
            let comp = table.refresh_component(&at, f.black_node(t));
            let alive = alive_flags(&at, &table);
            for &x in &comp {
                let now = (table.dist(x), table.sec_dist(x));
                if let Some(before) = seen[x] {
                    if now.0 < before.0 || now.1 < before.1 {
                        monotone += 1;
                    }
                }
                seen[x] = Some(now);

                let lv = table.level(&at, x);
                for u in [table.dir(x), table.sec_dir(x)].into_iter().flatten() {
                    checked += 1;
                    let lu = table.level(&at, u);
                    let near = match (lv, lu) {
                        (Distance::Finite(a), Distance::Finite(b)) => a.abs_diff(b) <= 1,
                        (a, b) => a == b,
                    };
                    if near {
                        continue;
                    }
                    if at.is_white(x) {
                        white_side += 1;
                    } else if lu.succ() < lv {
                        black_drop += 1;
                    } else {
                        black_rise += 1;
                        if alive[x] && alive[u] {
                            alive_rise += 1;
                        }
                        first_rise.get_or_insert_with(|| {
                            format!("turn {t}: {} level {lv}, {} level {lu}", at.vertex(x), at.vertex(u))
                        });
                    }
                }
            }
        }
    }
    let summary = format!("{} instances, {checked} direction pairs", instances.len());
    if white_side + black_drop + monotone > 0 {
        Verdict::Fail(format!(
            "{summary}; monotonicity {monotone}, white-side {white_side}, black drop {black_drop} violation(s)"
        ))
    } else if black_rise > 0 {
        Verdict::KnownFail(format!(
            "{summary}; monotonicity and the bounded drop hold everywhere, but in {black_rise} pairs \
             ({alive_rise} with both ends alive) a black vertex sits more than one level below a direction \
             (first: {})",
            first_rise.unwrap_or_default()
        ))
    } else {
        Verdict::Pass(summary)
    }
}

fn death_criterion(all: &[OnlineForest]) -> Verdict {
    let mut turns = 0;
    let mut failures = Vec::new();
    for (i, f) in all.iter().enumerate() {
        let trace = run_trace(f);
        turns += trace.turns.len();
        failures.extend(
            trace
                .violations
                .iter()
                .map(|v| format!("instance {i} turn {} {}: {}", v.turn, v.check, v.detail)),
        );
    }
    let summary = format!("{} instances, {turns} turns", all.len());
    if failures.is_empty() {
        Verdict::Pass(summary)
    } else {
        Verdict::Fail(format!(
            "{summary}, {} violation(s): {:?}",
            failures.len(),
            failures.first()
        ))
    }
}

fn budgets_criterion() -> Verdict {
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for family in [Family::RandomTree, Family::PendantChain, Family::StarBurst] {
        for n in [64, 512, 2048, 8192] {
            let forest = generate(family, n, 7).unwrap().to_forest().unwrap();
            let trace = run_trace(&forest);
            for beta in [Beta::two(), Beta::new(4, 1).unwrap()] {
                let r = audit_run(&forest, &trace, beta);
                let b = r.budgets;
                let holds = r.sum_prefix as f64 <= b.prefix
                    && r.sum_slow_suffix as f64 <= b.slow
                    && r.sum_jump_suffix as f64 <= b.jump
                    && r.sum_dist as f64 <= b.total;
                if !holds || !r.passed() {
                    failures.push(format!("{family} n={n} beta={beta}: {:?}", r.violations.first()));
                }
                if n == 8192 && beta == Beta::two() {
                    lines.push(format!("{family}: {}/{:.0}", r.sum_dist, b.total));
                }
            }
        }
    }
    if failures.is_empty() {
        Verdict::Pass(format!(
            "24 runs up to n=8192, sum_dist/total budget at 8192, beta 2: {}",
            lines.join(", ")
        ))
    } else {
        Verdict::Fail(format!("{} failing run(s): {:?}", failures.len(), failures.first()))
    }
}

fn degree_two_criterion() -> Verdict {
    let mut failures = Vec::new();
    let mut runs = 0;
    for n in [2, 16, 128, 1024, 4096] {
        for seed in 0..3 {
            let forest = generate(Family::Degree2, n, seed).unwrap().to_forest().unwrap();
            runs += 1;
            if (1..=forest.turn()).any(|t| forest.arrival_degree(t) < 2) {
                failures.push(format!("n={n} seed={seed}: degree-one arrival"));
            }
            let trace = run_trace(&forest);
            let r = degree_two_from_trace(&trace);
            let bound = (n as u64) * (n as u64).ilog2() as u64;
            // n·log₂ n is an integer exactly when n is a power of two.
            let exact = if n.is_power_of_two() {
                r.sum_path <= bound
            } else {
                r.sum_path as f64 <= r.bound
            };
            if r.deaths > 0 || !exact || !trace.violations.is_empty() {
                failures.push(format!(
                    "n={n} seed={seed}: deaths {} sum {} bound {}",
                    r.deaths, r.sum_path, r.bound
                ));
            }
        }
    }
    if failures.is_empty() {
        Verdict::Pass(format!("{runs} runs up to n=4096, no deaths, sums within n log2 n"))
    } else {
        Verdict::Fail(format!("{failures:?}"))
    }
}

fn ledger_criterion() -> Verdict {
    let beta = Beta::two();
    let (mut runs, mut jumps, mut short, mut structural) = (0, 0, 0, Vec::new());
    let mut max_shortfall: f64 = 0.0;
    let half_delta = 2.0;
    for family in Family::ALL {
        for n in [16, 128, 512, 2048] {
            for seed in 0..2 {
                let Ok(file) = generate(family, n, seed) else {
                    continue;
                };
                let forest = file.to_forest().unwrap();
                let trace = run_trace(&forest);
                let r = ledger_report(&forest, &trace, beta);
                runs += 1;
                jumps += r.jump_turns.len();
                short += r.utilization_shortfalls.len();
                max_shortfall = max_shortfall.max(r.max_shortfall);
                if !r.is_feasible() || !r.conservation.balances() || r.max_vertex_payment > r.payment_bound {
                    structural.push(format!("{family} n={n} seed={seed}: {:?}", r.violations.first()));
                }
            }
        }
    }
    let summary = format!(
        "{runs} runs, {jumps} jumping turns; claim components, single payment, payment bound and \
         conservation: {} violation(s)",
        structural.len()
    );
    if !structural.is_empty() || max_shortfall > half_delta {
        Verdict::Fail(format!(
            "{summary}; max shortfall {max_shortfall}; first: {:?}",
            structural.first()
        ))
    } else if short > 0 {
        Verdict::KnownFail(format!(
            "{summary}; per-turn utilization falls short on {short} jumping turns (max shortfall {max_shortfall})"
        ))
    } else {
        Verdict::Pass(summary)
    }
}

fn cross_criterion(all: &[OnlineForest]) -> Verdict {
    let (runs, skipped, failures) = sweep(all, &["cross_formulation"], OracleBudget::default(), false);
    let summary = format!("{} instances, {runs} runs", all.len());
    if failures.is_empty() && skipped == 0 {
        Verdict::Pass(summary)
    } else {
        Verdict::Fail(format!("{summary}, {} failing: {:?}", failures.len(), failures.first()))
    }
}

fn determinism_criterion(small: &[OnlineForest]) -> Verdict {
    let mut failures = Vec::new();
    for family in Family::ALL {
        for seed in 0..5 {
            let a = generate(family, 300, seed).map(|f| f.to_text());
            let b = generate(family, 300, seed).map(|f| f.to_text());
            if a != b {
                failures.push(format!("{family} seed {seed}: instance bytes differ"));
            }
            if let Ok(text) = a {
                let run = |text: &str| {
                    let forest: OnlineForest = text
                        .parse::<saptree::scenario::InstanceFile>()
                        .unwrap()
                        .to_forest()
                        .unwrap();
                    let trace = run_trace(&forest);
                    RunRecord::from_trace(&forest, &trace, Beta::two()).to_csv_string()
                };
                if run(&text) != run(&text) {
                    failures.push(format!("{family} seed {seed}: CSV bytes differ"));
                }
            }
        }
    }
    let mut alt_set: Vec<OnlineForest> = small.iter().take(200).cloned().collect();
    alt_set.extend(family_instances(&[8, 40], 2));
    let (runs, _, alt_failures) = sweep(&alt_set, DEFAULT_CHECKS, OracleBudget::default(), true);
    failures.extend(alt_failures);
    if failures.is_empty() {
        Verdict::Pass(format!(
            "byte-identical reruns; {runs} check runs under both tie-break orders"
        ))
    } else {
        Verdict::Fail(format!("{} failure(s): {:?}", failures.len(), failures.first()))
    }
}

fn main() -> ExitCode {
    let small = small_instances();
    let mut all = small.clone();
    all.extend(family_instances(&[8, 32, 128], 3));

    let criteria: Vec<Criterion> = vec![
        (
            "game value equals distance",
            Box::new(|| oracle_criterion(&small, "game_value")),
        ),
        (
            "augmenting paths within distance",
            Box::new(|| oracle_criterion(&small, "sap_dominance")),
        ),
        (
            "Hall breaks three ways",
            Box::new(|| oracle_criterion(&small, "hall_agreement")),
        ),
        ("monotone distances and level adjacency", Box::new(levels_criterion)),
        ("death structure", Box::new(|| death_criterion(&all))),
        ("aggregate budgets", Box::new(budgets_criterion)),
        ("degree-two runs", Box::new(degree_two_criterion)),
        ("token ledger", Box::new(ledger_criterion)),
        ("cross-formulation identities", Box::new(|| cross_criterion(&all))),
        (
            "determinism and tie-break order",
            Box::new(|| determinism_criterion(&small)),
        ),
    ];

    let mut unexpected = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Verdict::Pass(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Verdict::KnownFail(detail) => {
                println!("FAIL {:>2} {name} ({secs:.1}s, known): {detail}", i + 1)
            }
            Verdict::Fail(detail) => {
                unexpected += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
