//! Matchings on the forest, shortest augmenting paths and the online SAP run.

use std::collections::VecDeque;

use crate::distance::Distance;
use crate::forest::{ForestAt, ForestError, OnlineForest, VertexId};
use crate::minimax::{MiniMaxTable, Path};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("{0} is not a free black vertex")]
    NotFreeBlack(VertexId),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("invalid augmenting path: {0}")]
    InvalidPath(String),
}

/// A partial, symmetric white/black pairing over the dense vertex indices of
/// one forest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    mate: Vec<Option<usize>>,
    size: usize,
}

impl Matching {
    /// The empty matching with room for every vertex of `forest`.
    pub fn empty(forest: &OnlineForest) -> Self {
        Matching {
            mate: vec![None; forest.vertex_count()],
            size: 0,
        }
    }

    /// Builds a matching from `(white, black)` pairs, checking them against `F_t`.
    pub fn from_pairs(at: &ForestAt<'_>, pairs: &[(VertexId, VertexId)]) -> Result<Self, MatchingError> {
        let mut m = Matching::empty(at.forest());
        for &(w, b) in pairs {
            let (wi, bi) = (at.node(w)?, at.node(b)?);
            if !w.is_white() || !b.is_black() {
                return Err(MatchingError::InvalidMatching(format!(
                    "{w}{b} is not a white/black pair"
                )));
            }
            if m.mate[wi].is_some() || m.mate[bi].is_some() {
                return Err(MatchingError::InvalidMatching(format!("{w} or {b} matched twice")));
            }
            m.pair(wi, bi);
        }
        m.validate(at)?;
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mate(&self, ix: usize) -> Option<usize> {
        self.mate.get(ix).copied().flatten()
    }

    pub fn is_free(&self, ix: usize) -> bool {
        self.mate(ix).is_none()
    }

    /// Matched pairs as `(white, black)`, ordered by white id.
    pub fn pairs(&self, forest: &OnlineForest) -> Vec<(VertexId, VertexId)> {
        (0..forest.white_count())
            .filter_map(|w| self.mate(w).map(|b| (forest.vertex(w), forest.vertex(b))))
            .collect()
    }

    pub(crate) fn pair(&mut self, w: usize, b: usize) {
        self.mate[w] = Some(b);
        self.mate[b] = Some(w);
        self.size += 1;
    }

    /// Every pair must be an edge of `F_t` and the relation must be symmetric.
    pub fn validate(&self, at: &ForestAt<'_>) -> Result<(), MatchingError> {
        for (v, m) in self.mate.iter().enumerate() {
            let Some(u) = *m else { continue };
            if !at.contains(v) || !at.contains(u) {
                return Err(MatchingError::InvalidMatching(format!(
                    "{} is matched but absent at turn {}",
                    at.vertex(v.max(u)),
                    at.turn()
                )));
            }
            if self.mate[u] != Some(v) || at.neighbors(v).binary_search(&u).is_err() {
                return Err(MatchingError::InvalidMatching(format!(
                    "{} and {} are not a matched edge",
                    at.vertex(v),
                    at.vertex(u)
                )));
            }
        }
        Ok(())
    }

    /// Swaps matched and unmatched edges along an augmenting path of dense
    /// indices.
    pub fn augment(&mut self, at: &ForestAt<'_>, path: &[usize]) -> Result<(), MatchingError> {
        check_augmenting(at, self, path)?;
        for pair in path.chunks(2) {
            let (b, w) = (pair[0], pair[1]);
            self.mate[b] = Some(w);
            self.mate[w] = Some(b);
        }
        self.size += 1;
        Ok(())
    }

    /// [`augment`](Self::augment) taking a path of vertex ids.
    pub fn augment_path(&mut self, at: &ForestAt<'_>, path: &Path) -> Result<(), MatchingError> {
        let nodes = path
            .vertices()
            .iter()
            .map(|&v| at.node(v))
            .collect::<Result<Vec<_>, _>>()?;
        self.augment(at, &nodes)
    }
}

fn check_augmenting(at: &ForestAt<'_>, m: &Matching, path: &[usize]) -> Result<(), MatchingError> {
    let bad = |msg: &str| Err(MatchingError::InvalidPath(msg.to_string()));
    if path.len() < 2 || !path.len().is_multiple_of(2) {
        return bad("an augmenting path has an odd number of edges");
    }
    if at.is_white(path[0]) || !m.is_free(path[0]) {
        return bad("it must start at a free black vertex");
    }
    let last = path[path.len() - 1];
    if !at.is_white(last) || !m.is_free(last) {
        return bad("it must end at a free white vertex");
    }
    for (i, e) in path.windows(2).enumerate() {
        if !at.contains(e[0]) || !at.contains(e[1]) || at.neighbors(e[0]).binary_search(&e[1]).is_err() {
            return bad("consecutive vertices must be adjacent");
        }
        let matched = m.mate(e[0]) == Some(e[1]);
        if matched != (i % 2 == 1) {
            return bad("edges must alternate unmatched/matched");
        }
    }
    Ok(())
}

/// Breadth-first alternating search from the free black `b`. Expansion order
/// follows the forest's tie-break order, so the first free white discovered
/// fixes the path.
pub fn shortest_augmenting_nodes(at: &ForestAt<'_>, m: &Matching, b: usize) -> Option<Vec<usize>> {
    let mut parent: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    parent.insert(b, usize::MAX);
    let mut queue = VecDeque::from([b]);
    while let Some(x) = queue.pop_front() {
        for w in at.ordered_neighbors(x) {
            if parent.contains_key(&w) || m.mate(x) == Some(w) {
                continue;
            }
            parent.insert(w, x);
            match m.mate(w) {
                None => {
                    let mut path = vec![w];
                    let mut cur = w;
                    while let Some(&p) = parent.get(&cur).filter(|&&p| p != usize::MAX) {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                Some(y) => {
                    if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(y) {
                        e.insert(w);
                        queue.push_back(y);
                    }
                }
            }
        }
    }
    None
}

/// Shortest augmenting path from the free black vertex `b` in `F_t`.
pub fn shortest_augmenting_path(
    forest: &OnlineForest,
    m: &Matching,
    b: VertexId,
    t: usize,
) -> Result<Option<Path>, MatchingError> {
    let at = forest.at(t)?;
    let bi = at.node(b)?;
    if b.is_white() || !m.is_free(bi) {
        return Err(MatchingError::NotFreeBlack(b));
    }
    m.validate(&at)?;
    Ok(shortest_augmenting_nodes(&at, m, bi).map(|p| Path::from_nodes(&at, &p)))
}

/// A maximum matching of `F_t` by peeling leaves bottom-up.
pub fn tree_max_matching(at: &ForestAt<'_>) -> Matching {
    let mut m = Matching::empty(at.forest());
    let mut seen = vec![false; at.vertex_count()];
    for root in 0..at.vertex_count() {
        if seen[root] {
            continue;
        }
        let order = at.component(root);
        let mut parent = std::collections::HashMap::with_capacity(order.len());
        for &u in &order {
            seen[u] = true;
            for &x in at.neighbors(u) {
                if x != root && !parent.contains_key(&x) && parent.get(&u) != Some(&x) {
                    parent.insert(x, u);
                }
            }
        }
        for &u in order.iter().rev() {
            if let Some(&p) = parent.get(&u) {
                if m.is_free(u) && m.is_free(p) {
                    let (w, b) = if at.is_white(u) { (u, p) } else { (p, u) };
                    m.pair(w, b);
                }
            }
        }
    }
    m
}

/// One turn of the online SAP run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SapTurn {
    pub turn: usize,
    /// `None` when no augmenting path exists.
    pub path_len: Option<usize>,
    pub dist: Distance,
    pub matching_size: usize,
}

/// Replays all arrivals, augmenting along the shortest path from each new
/// black vertex when one exists.
pub fn run_sap_online(forest: &OnlineForest) -> (Vec<SapTurn>, Matching) {
    let mut m = Matching::empty(forest);
    let mut table = MiniMaxTable::build(&forest.at(0).expect("turn 0 exists"));
    let mut out = Vec::with_capacity(forest.turn());
    for t in 1..=forest.turn() {
        let at = forest.at(t).expect("turn in range");
        let b = forest.black_node(t);
        table.refresh_component(&at, b);
        let path = shortest_augmenting_nodes(&at, &m, b);
        if let Some(p) = &path {
            m.augment(&at, p).expect("search returns augmenting paths");
        }
        out.push(SapTurn {
            turn: t,
            path_len: path.map(|p| p.len() - 1),
            dist: table.dist(b),
            matching_size: m.size(),
        });
    }
    (out, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{e1, forest_from_raw, raw_arrivals, star};
    use proptest::prelude::*;
    use VertexId::{Black as B, White as W};

    fn p(vs: &[VertexId]) -> Path {
        Path(vs.to_vec())
    }

    #[test]
    fn direct_free_neighbor() {
        let f = OnlineForest::from_arrivals(1, &[vec![1]]).unwrap();
        let m = Matching::empty(&f);
        assert_eq!(
            shortest_augmenting_path(&f, &m, B(1), 1).unwrap(),
            Some(p(&[B(1), W(1)]))
        );
    }

    #[test]
    fn e1_paths_depend_on_the_matching() {
        let f = e1();
        let at = f.at(3).unwrap();
        let m = Matching::from_pairs(&at, &[(W(2), B(1)), (W(3), B(2))]).unwrap();
        let path = shortest_augmenting_path(&f, &m, B(3), 3).unwrap().unwrap();
        assert_eq!(path, p(&[B(3), W(3), B(2), W(2), B(1), W(1)]));
        let m = Matching::from_pairs(&at, &[(W(1), B(1)), (W(3), B(2))]).unwrap();
        let path = shortest_augmenting_path(&f, &m, B(3), 3).unwrap().unwrap();
        assert_eq!(path.len(), 3);
        assert_eq!(
            shortest_augmenting_path(&f, &m, B(2), 3).unwrap_err(),
            MatchingError::NotFreeBlack(B(2))
        );
    }

    #[test]
    fn augment_swaps_along_path() {
        let f = OnlineForest::from_arrivals(1, &[vec![1]]).unwrap();
        let at = f.latest();
        let mut m = Matching::empty(&f);
        m.augment_path(&at, &p(&[B(1), W(1)])).unwrap();
        assert_eq!(m.pairs(&f), vec![(W(1), B(1))]);
        assert_eq!(m.size(), 1);

        let f = OnlineForest::from_arrivals(2, &[vec![1, 2], vec![2]]).unwrap();
        let at = f.latest();
        let mut m = Matching::from_pairs(&at, &[(W(2), B(1))]).unwrap();
        m.augment_path(&at, &p(&[B(2), W(2), B(1), W(1)])).unwrap();
        assert_eq!(m.pairs(&f), vec![(W(1), B(1)), (W(2), B(2))]);
        assert_eq!(m.size(), 2);
        assert!(matches!(
            m.augment_path(&at, &p(&[B(2), W(2)])),
            Err(MatchingError::InvalidPath(_))
        ));
    }

    #[test]
    fn leaf_peeling_sizes() {
        let f = OnlineForest::from_arrivals(1, &[vec![1]]).unwrap();
        assert_eq!(tree_max_matching(&f.latest()).size(), 1);
        assert_eq!(tree_max_matching(&e1().at(2).unwrap()).size(), 2);
        let f = OnlineForest::from_arrivals(1, &[vec![1], vec![1], vec![1]]).unwrap();
        assert_eq!(tree_max_matching(&f.latest()).size(), 1);
    }

    #[test]
    fn online_run_on_e1() {
        let (turns, m) = run_sap_online(&e1());
        let lens: Vec<_> = turns.iter().map(|r| r.path_len).collect();
        // b2 takes w2 (first in order), which leaves w3 free for b3.
        assert_eq!(lens, vec![Some(1), Some(1), Some(1)]);
        let dists: Vec<_> = turns.iter().map(|r| r.dist).collect();
        assert_eq!(
            dists,
            vec![Distance::Finite(1), Distance::Finite(1), Distance::Finite(5)]
        );
        assert_eq!(m.size(), 3);
        let (turns, _) = run_sap_online(&e1().with_tie_break(crate::forest::TieBreak::Reversed));
        let lens: Vec<_> = turns.iter().map(|r| r.path_len).collect();
        assert_eq!(lens, vec![Some(1), Some(1), Some(5)]);
    }

    #[test]
    fn hall_breaking_turn_records_none() {
        let f = OnlineForest::from_arrivals(1, &[vec![1], vec![1]]).unwrap();
        let (turns, m) = run_sap_online(&f);
        assert_eq!(turns[1].path_len, None);
        assert_eq!(turns[1].dist, Distance::Infinite);
        assert_eq!(m.size(), 1);
        let (turns, _) = run_sap_online(&star());
        assert!(turns.iter().all(|r| r.path_len.is_some()));
    }

    proptest! {
        #[test]
        fn online_run_keeps_a_valid_maximum_matching(n in 1usize..12, raw in raw_arrivals(12, 16)) {
            let f = forest_from_raw(n, &raw);
            let (turns, m) = run_sap_online(&f);
            m.validate(&f.latest()).unwrap();
            prop_assert_eq!(m.size(), tree_max_matching(&f.latest()).size());
            for r in &turns {
                prop_assert_eq!(r.path_len.is_some(), r.dist.is_finite());
                if let (Some(len), Some(d)) = (r.path_len, r.dist.finite()) {
                    prop_assert!(len % 2 == 1);
                    prop_assert!(len as u32 <= d);
                }
            }
        }
    }
}
