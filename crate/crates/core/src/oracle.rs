//! Deliberately naive brute-force references: exhaustive maximum matchings,
//! the adversary game value and subset-enumeration Hall checks.

use std::collections::{BTreeSet, HashMap};

use crate::distance::Distance;
use crate::forest::{ForestAt, ForestError, VertexId};
use crate::matching::Matching;

/// Size limits that keep exhaustive enumeration tractable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest component (in vertices) whose matchings may be enumerated.
    pub max_component_size: usize,
    /// Largest black vertex set whose subsets may be enumerated.
    pub max_subset_size: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_component_size: 12,
            max_subset_size: 12,
        }
    }
}

impl OracleBudget {
    pub fn uniform(k: usize) -> Self {
        OracleBudget {
            max_component_size: k,
            max_subset_size: k,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("{what} has size {size}, above the oracle budget of {budget}")]
    BudgetExceeded {
        what: &'static str,
        size: usize,
        budget: usize,
    },
    #[error("{0} is not a black vertex")]
    NotBlack(VertexId),
}

fn check(what: &'static str, size: usize, budget: usize) -> Result<(), OracleError> {
    if size > budget {
        return Err(OracleError::BudgetExceeded { what, size, budget });
    }
    Ok(())
}

/// Edges `(white, black)` among `nodes`, skipping `removed`.
fn edges_within(at: &ForestAt<'_>, nodes: &[usize], removed: Option<usize>) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for &b in nodes {
        if at.is_white(b) || Some(b) == removed {
            continue;
        }
        for &w in at.neighbors(b) {
            if Some(w) != removed {
                edges.push((w, b));
            }
        }
    }
    edges
}

/// All matchings over `edges` that cannot be extended, via include/exclude
/// backtracking; callers keep the largest ones.
fn all_matchings(edges: &[(usize, usize)], out: &mut Vec<Vec<(usize, usize)>>) {
    fn go(
        edges: &[(usize, usize)],
        i: usize,
        used: &mut HashMap<usize, ()>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if i == edges.len() {
            out.push(cur.clone());
            return;
        }
        let (w, b) = edges[i];
        if !used.contains_key(&w) && !used.contains_key(&b) {
            used.insert(w, ());
            used.insert(b, ());
            cur.push((w, b));
            go(edges, i + 1, used, cur, out);
            cur.pop();
            used.remove(&w);
            used.remove(&b);
        }
        go(edges, i + 1, used, cur, out);
    }
    go(edges, 0, &mut HashMap::new(), &mut Vec::new(), out);
}

fn keep_maximum(mut all: Vec<Vec<(usize, usize)>>) -> Vec<Vec<(usize, usize)>> {
    let best = all.iter().map(Vec::len).max().unwrap_or(0);
    all.retain(|m| m.len() == best);
    all.sort();
    all.dedup();
    all
}

/// Every maximum matching of `F_t`. With `free` set, the enumeration is
/// restricted to the component of that vertex with the vertex removed, which
/// is all the game from it depends on.
pub fn enumerate_max_matchings(
    at: &ForestAt<'_>,
    free: Option<VertexId>,
    budget: OracleBudget,
) -> Result<Vec<Matching>, OracleError> {
    let (nodes, removed) = match free {
        Some(v) => {
            let ix = at.node(v)?;
            (at.component(ix), Some(ix))
        }
        None => ((0..at.vertex_count()).collect::<Vec<_>>(), None),
    };
    check("component", nodes.len(), budget.max_component_size)?;
    let mut all = Vec::new();
    all_matchings(&edges_within(at, &nodes, removed), &mut all);
    Ok(keep_maximum(all)
        .into_iter()
        .map(|pairs| {
            let mut m = Matching::empty(at.forest());
            for (w, b) in pairs {
                m.pair(w, b);
            }
            m
        })
        .collect())
}

/// Number of maximum matchings of `F_t` (optionally minus one vertex) by a
/// dynamic program over each rooted component. Independent of the
/// enumeration above and used to check it.
pub fn count_max_matchings(at: &ForestAt<'_>, removed: Option<usize>) -> (usize, u128) {
    // (size, count) pairs; `join` keeps the larger size and adds counts on ties.
    fn join(a: (usize, u128), b: (usize, u128)) -> (usize, u128) {
        match a.0.cmp(&b.0) {
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Equal => (a.0, a.1 + b.1),
        }
    }
    let n = at.vertex_count();
    let mut seen = vec![false; n];
    let mut total = (0usize, 1u128);
    for root in 0..n {
        if seen[root] || Some(root) == removed {
            continue;
        }
        let mut order = vec![root];
        let mut parent = vec![usize::MAX; n];
        seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &x in at.neighbors(u) {
                if !seen[x] && Some(x) != removed {
                    seen[x] = true;
                    parent[x] = u;
                    order.push(x);
                }
            }
        }
        // free[u]: u unmatched within its subtree; matched[u]: u matched to a child.
        let mut free = vec![(0usize, 1u128); n];
        let mut matched: Vec<Option<(usize, u128)>> = vec![None; n];
        for &u in order.iter().rev() {
            let children: Vec<usize> = at
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&x| parent[x] == u && Some(x) != removed)
                .collect();
            let best = |c: usize| match matched[c] {
                Some(m) => join(free[c], m),
                None => free[c],
            };
            let mut f = (0usize, 1u128);
            for &c in &children {
                let b = best(c);
                f = (f.0 + b.0, f.1 * b.1);
            }
            let mut m: Option<(usize, u128)> = None;
            for &c in &children {
                let mut acc = (free[c].0 + 1, free[c].1);
                for &d in &children {
                    if d != c {
                        let b = best(d);
                        acc = (acc.0 + b.0, acc.1 * b.1);
                    }
                }
                m = Some(match m {
                    Some(prev) => join(prev, acc),
                    None => acc,
                });
            }
            free[u] = f;
            matched[u] = m;
        }
        let r = match matched[root] {
            Some(m) => join(free[root], m),
            None => free[root],
        };
        total = (total.0 + r.0, total.1 * r.1);
    }
    total
}

/// Shortest augmenting path length from `b` under `m`, by checking the unique
/// tree path to every free white vertex of the component.
pub fn brute_shortest_aug(
    at: &ForestAt<'_>,
    m: &Matching,
    b: VertexId,
    budget: OracleBudget,
) -> Result<Option<usize>, OracleError> {
    let bi = at.node(b)?;
    if b.is_white() {
        return Err(OracleError::NotBlack(b));
    }
    let comp = at.component(bi);
    check("component", comp.len(), budget.max_component_size)?;
    Ok(shortest_by_paths(at, m, bi, &comp))
}

fn shortest_by_paths(at: &ForestAt<'_>, m: &Matching, b: usize, comp: &[usize]) -> Option<usize> {
    let mut parent = HashMap::from([(b, usize::MAX)]);
    // `comp` is in breadth-first order from its first vertex, not from `b`.
    let mut stack = vec![b];
    while let Some(u) = stack.pop() {
        for &x in at.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(x) {
                e.insert(u);
                stack.push(x);
            }
        }
    }
    let mut best: Option<usize> = None;
    for &w in comp {
        if !at.is_white(w) || !m.is_free(w) {
            continue;
        }
        let mut path = vec![w];
        while let Some(&p) = parent.get(path.last().unwrap()).filter(|&&p| p != usize::MAX) {
            path.push(p);
        }
        path.reverse();
        let alternates = path
            .windows(2)
            .enumerate()
            .all(|(i, e)| (m.mate(e[0]) == Some(e[1])) == (i % 2 == 1));
        if alternates && m.is_free(b) {
            let len = path.len() - 1;
            best = Some(best.map_or(len, |x: usize| x.min(len)));
        }
    }
    best
}

/// The worst case over adversary matchings: the longest shortest augmenting
/// path from `b` over all maximum matchings of its component with `b` free.
pub fn adversary_game_value(at: &ForestAt<'_>, b: VertexId, budget: OracleBudget) -> Result<Distance, OracleError> {
    let bi = at.node(b)?;
    if b.is_white() {
        return Err(OracleError::NotBlack(b));
    }
    let comp = at.component(bi);
    let mut worst = Distance::ZERO;
    for m in enumerate_max_matchings(at, Some(b), budget)? {
        let d = match shortest_by_paths(at, &m, bi, &comp) {
            Some(len) => Distance::Finite(len as u32),
            None => Distance::Infinite,
        };
        worst = worst.max(d);
    }
    Ok(worst)
}

fn neighborhood_size(at: &ForestAt<'_>, blacks: &[usize], mask: u32) -> usize {
    let mut ws = BTreeSet::new();
    for (i, &b) in blacks.iter().enumerate() {
        if mask >> i & 1 == 1 {
            ws.extend(at.neighbors(b).iter().copied());
        }
    }
    ws.len()
}

/// Whether `xs` violates Hall's condition while no proper subset does.
pub fn is_minimal_violator(
    at: &ForestAt<'_>,
    xs: &BTreeSet<VertexId>,
    budget: OracleBudget,
) -> Result<bool, OracleError> {
    check("black set", xs.len(), budget.max_subset_size)?;
    let blacks = xs.iter().map(|&v| at.node(v)).collect::<Result<Vec<_>, _>>()?;
    let full = (1u32 << blacks.len()) - 1;
    if neighborhood_size(at, &blacks, full) >= blacks.len() {
        return Ok(false);
    }
    Ok((1..full).all(|sub| neighborhood_size(at, &blacks, sub) >= sub.count_ones() as usize))
}

/// A smallest minimal-under-inclusion black set containing `b` whose
/// neighborhood is smaller than itself, found by enumerating all subsets of
/// the black vertices of `b`'s component.
pub fn brute_hall(
    at: &ForestAt<'_>,
    b: VertexId,
    budget: OracleBudget,
) -> Result<Option<BTreeSet<VertexId>>, OracleError> {
    let bi = at.node(b)?;
    if b.is_white() {
        return Err(OracleError::NotBlack(b));
    }
    let blacks: Vec<usize> = at.component(bi).into_iter().filter(|&x| !at.is_white(x)).collect();
    check("black set", blacks.len(), budget.max_subset_size)?;
    let k = blacks.len();
    let pos = blacks.iter().position(|&x| x == bi).expect("b is in its component");
    let masks = 1usize << k;
    let violates: Vec<bool> = (0..masks)
        .map(|mask| mask != 0 && neighborhood_size(at, &blacks, mask as u32) < (mask as u32).count_ones() as usize)
        .collect();
    // some_sub[mask]: mask or one of its subsets violates.
    let mut some_sub = violates.clone();
    for mask in 0..masks {
        for i in 0..k {
            if mask >> i & 1 == 1 && some_sub[mask ^ (1 << i)] {
                some_sub[mask] = true;
            }
        }
    }
    let minimal = (0..masks)
        .filter(|&mask| mask >> pos & 1 == 1 && violates[mask])
        .filter(|&mask| (0..k).all(|i| mask >> i & 1 == 0 || !some_sub[mask ^ (1 << i)]))
        .min_by_key(|&mask| ((mask as u32).count_ones(), mask));
    Ok(minimal.map(|mask| {
        (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| at.vertex(blacks[i]))
            .collect()
    }))
}
