//! The online forest: white vertices fixed up front, black vertices arriving
//! one per turn together with all of their edges.
//!
//! Vertices are addressed publicly by [`VertexId`] and internally by a dense
//! index: white `w_i` is `i - 1`, black `b_j` is `white_count + j - 1`. The
//! dense order coincides with the default tie-break order (whites ascending,
//! then blacks by arrival).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::dsu::DisjointSets;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    White,
    Black,
}

/// A vertex name. White ids are `1..=white_count`; black ids are arrival
/// turns. The derived order (every white before every black, then by index)
/// is the default tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    White(u32),
    Black(u32),
}

impl VertexId {
    pub fn color(self) -> Color {
        match self {
            VertexId::White(_) => Color::White,
            VertexId::Black(_) => Color::Black,
        }
    }

    pub fn index(self) -> u32 {
        match self {
            VertexId::White(i) | VertexId::Black(i) => i,
        }
    }

    pub fn is_white(self) -> bool {
        matches!(self, VertexId::White(_))
    }

    pub fn is_black(self) -> bool {
        matches!(self, VertexId::Black(_))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::White(i) => write!(f, "w{i}"),
            VertexId::Black(i) => write!(f, "b{i}"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid vertex name `{0}` (expected w<k> or b<k> with k >= 1)")]
pub struct ParseVertexError(String);

impl serde::Serialize for VertexId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for VertexId {
    type Err = ParseVertexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseVertexError(s.to_string());
        let (head, tail) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let k: u32 = tail.parse().map_err(|_| err())?;
        if k == 0 {
            return Err(err());
        }
        match head {
            "w" | "W" => Ok(VertexId::White(k)),
            "b" | "B" => Ok(VertexId::Black(k)),
            _ => Err(err()),
        }
    }
}

/// Which total order breaks ties between equally good children.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Whites ascending, then blacks in arrival order.
    #[default]
    Forward,
    /// The exact reverse of `Forward`.
    Reversed,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ForestError {
    #[error("a scenario needs at least one white vertex")]
    NoWhites,
    #[error("an arriving black vertex needs at least one neighbor")]
    EmptyNeighbors,
    #[error("unknown white vertex w{0}")]
    UnknownWhite(u32),
    #[error("{0} is not a white vertex")]
    NotWhite(VertexId),
    #[error("edges to {first} and {second} would close a cycle")]
    CycleWouldForm { first: VertexId, second: VertexId },
    #[error("{vertex} does not exist at turn {turn}")]
    NotYetArrived { vertex: VertexId, turn: usize },
    #[error("turn {turn} is beyond the last arrival ({last})")]
    TurnOutOfRange { turn: usize, last: usize },
    #[error("{0} is not in this rooted view")]
    NotInComponent(VertexId),
    #[error("strict mode: {0}")]
    Strict(String),
}

/// The growing forest `F_t`.
#[derive(Clone, Debug)]
pub struct OnlineForest {
    white_count: usize,
    arrivals: Vec<Vec<u32>>,
    adj: Vec<Vec<usize>>,
    components: DisjointSets,
    tie_break: TieBreak,
}

impl OnlineForest {
    pub fn new(white_count: usize) -> Result<Self, ForestError> {
        if white_count == 0 {
            return Err(ForestError::NoWhites);
        }
        Ok(OnlineForest {
            white_count,
            arrivals: Vec::new(),
            adj: vec![Vec::new(); white_count],
            components: DisjointSets::new(white_count),
            tie_break: TieBreak::Forward,
        })
    }

    /// Builds a forest by replaying `arrivals` (1-based white ids).
    pub fn from_arrivals(white_count: usize, arrivals: &[Vec<u32>]) -> Result<Self, ForestError> {
        let mut forest = OnlineForest::new(white_count)?;
        for nbrs in arrivals {
            forest.add_black_whites(nbrs)?;
        }
        Ok(forest)
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    pub fn white_count(&self) -> usize {
        self.white_count
    }

    /// The number of arrivals so far, i.e. the latest turn.
    pub fn turn(&self) -> usize {
        self.arrivals.len()
    }

    pub fn arrivals(&self) -> &[Vec<u32>] {
        &self.arrivals
    }

    /// Vertex count of the latest forest.
    /// Number of neighbors the black vertex of turn `t` arrived with.
    pub fn arrival_degree(&self, t: usize) -> usize {
        self.arrivals[t - 1].len()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.arrivals.iter().map(Vec::len).sum()
    }

    /// Adds the next black vertex with edges to the given white vertices and
    /// returns its turn.
    pub fn add_black(&mut self, neighbors: &[VertexId]) -> Result<usize, ForestError> {
        let mut whites = Vec::with_capacity(neighbors.len());
        for &v in neighbors {
            match v {
                VertexId::White(i) => whites.push(i),
                other => return Err(ForestError::NotWhite(other)),
            }
        }
        self.add_black_whites(&whites)
    }

    /// Same as [`add_black`](Self::add_black) with plain 1-based white ids.
    pub fn add_black_whites(&mut self, whites: &[u32]) -> Result<usize, ForestError> {
        let mut ws: Vec<u32> = whites.to_vec();
        ws.sort_unstable();
        ws.dedup();
        if ws.is_empty() {
            return Err(ForestError::EmptyNeighbors);
        }
        for &w in &ws {
            if w == 0 || w as usize > self.white_count {
                return Err(ForestError::UnknownWhite(w));
            }
        }
        let mut seen: HashMap<usize, u32> = HashMap::with_capacity(ws.len());
        for &w in &ws {
            let root = self.components.find(w as usize - 1);
            if let Some(&first) = seen.get(&root) {
                return Err(ForestError::CycleWouldForm {
                    first: VertexId::White(first),
                    second: VertexId::White(w),
                });
            }
            seen.insert(root, w);
        }

        let b = self.components.push();
        debug_assert_eq!(b, self.adj.len());
        let mut nbrs = Vec::with_capacity(ws.len());
        for &w in &ws {
            let wi = w as usize - 1;
            self.adj[wi].push(b);
            self.components.union(b, wi);
            nbrs.push(wi);
        }
        self.adj.push(nbrs);
        self.arrivals.push(ws);
        Ok(self.arrivals.len())
    }

    /// Checks the canonical shape: exactly `white_count` arrivals forming one tree.
    pub fn validate_strict(&self) -> Result<(), ForestError> {
        if self.turn() != self.white_count {
            return Err(ForestError::Strict(format!(
                "expected {} arrivals, found {}",
                self.white_count,
                self.turn()
            )));
        }
        let mut dsu = self.components.clone();
        let root = dsu.find(0);
        if (1..self.vertex_count()).any(|v| dsu.find(v) != root) {
            return Err(ForestError::Strict("final forest is not connected".into()));
        }
        Ok(())
    }

    /// Dense index of `v`; the vertex must exist in the latest forest.
    pub fn node(&self, v: VertexId) -> Result<usize, ForestError> {
        let ix = match v {
            VertexId::White(i) if i >= 1 && i as usize <= self.white_count => i as usize - 1,
            VertexId::Black(j) if j >= 1 && j as usize <= self.turn() => self.white_count + j as usize - 1,
            _ => {
                return Err(ForestError::NotYetArrived {
                    vertex: v,
                    turn: self.turn(),
                })
            }
        };
        Ok(ix)
    }

    pub fn vertex(&self, ix: usize) -> VertexId {
        if ix < self.white_count {
            VertexId::White(ix as u32 + 1)
        } else {
            VertexId::Black((ix - self.white_count) as u32 + 1)
        }
    }

    pub fn is_white(&self, ix: usize) -> bool {
        ix < self.white_count
    }

    /// Dense index of the black vertex arriving in turn `t` (1-based).
    pub fn black_node(&self, t: usize) -> usize {
        self.white_count + t - 1
    }

    /// Arrival turn of a vertex: 0 for whites.
    pub fn arrival(&self, ix: usize) -> usize {
        if ix < self.white_count {
            0
        } else {
            ix - self.white_count + 1
        }
    }

    /// Position in the active tie-break order; smaller ranks win ties.
    pub fn rank(&self, ix: usize) -> usize {
        match self.tie_break {
            TieBreak::Forward => ix,
            TieBreak::Reversed => usize::MAX - ix,
        }
    }

    /// Neighbors of `ix` in the final (latest) forest, ascending dense order.
    pub fn final_neighbors(&self, ix: usize) -> &[usize] {
        &self.adj[ix]
    }

    /// A snapshot view of `F_t`.
    pub fn at(&self, t: usize) -> Result<ForestAt<'_>, ForestError> {
        if t > self.turn() {
            return Err(ForestError::TurnOutOfRange {
                turn: t,
                last: self.turn(),
            });
        }
        Ok(ForestAt { forest: self, turn: t })
    }

    pub fn latest(&self) -> ForestAt<'_> {
        ForestAt {
            forest: self,
            turn: self.turn(),
        }
    }

    /// `N_t(v)`.
    pub fn neighbors_at(&self, v: VertexId, t: usize) -> Result<BTreeSet<VertexId>, ForestError> {
        let at = self.at(t)?;
        let ix = at.node(v)?;
        Ok(at.neighbors(ix).iter().map(|&x| self.vertex(x)).collect())
    }

    pub fn rooted_view(&self, root: VertexId, t: usize) -> Result<RootedView, ForestError> {
        let at = self.at(t)?;
        let ix = at.node(root)?;
        Ok(RootedView::build(&at, ix, None))
    }

    /// `F[X]` for a vertex set of `F_t`.
    pub fn induced_subforest(&self, xs: &BTreeSet<VertexId>, t: usize) -> Result<Graph, ForestError> {
        let at = self.at(t)?;
        let mut edges = BTreeSet::new();
        for &v in xs {
            let ix = at.node(v)?;
            if v.is_black() {
                for &w in at.neighbors(ix) {
                    let wv = self.vertex(w);
                    if xs.contains(&wv) {
                        edges.insert((wv, v));
                    }
                }
            }
        }
        Ok(Graph {
            vertices: xs.clone(),
            edges,
        })
    }
}

/// An explicit vertex/edge set; edges are stored as `(white, black)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<(VertexId, VertexId)>,
}

impl Graph {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Read-only view of the forest as it stood after turn `t`.
#[derive(Clone, Copy, Debug)]
pub struct ForestAt<'a> {
    forest: &'a OnlineForest,
    turn: usize,
}

/// Neighbors of a vertex in tie-break order.
pub enum Ordered<'a> {
    Forward(std::slice::Iter<'a, usize>),
    Reversed(std::iter::Rev<std::slice::Iter<'a, usize>>),
}

impl Iterator for Ordered<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            Ordered::Forward(it) => it.next().copied(),
            Ordered::Reversed(it) => it.next().copied(),
        }
    }
}

impl<'a> ForestAt<'a> {
    pub fn forest(&self) -> &'a OnlineForest {
        self.forest
    }

    pub fn turn(&self) -> usize {
        self.turn
    }

    pub fn vertex_count(&self) -> usize {
        self.forest.white_count + self.turn
    }

    pub fn contains(&self, ix: usize) -> bool {
        ix < self.vertex_count()
    }

    pub fn is_white(&self, ix: usize) -> bool {
        self.forest.is_white(ix)
    }

    pub fn vertex(&self, ix: usize) -> VertexId {
        self.forest.vertex(ix)
    }

    pub fn rank(&self, ix: usize) -> usize {
        self.forest.rank(ix)
    }

    pub fn node(&self, v: VertexId) -> Result<usize, ForestError> {
        let ix = self.forest.node(v).map_err(|_| ForestError::NotYetArrived {
            vertex: v,
            turn: self.turn,
        })?;
        if !self.contains(ix) {
            return Err(ForestError::NotYetArrived {
                vertex: v,
                turn: self.turn,
            });
        }
        Ok(ix)
    }

    /// `N_t(ix)` in ascending dense order.
    pub fn neighbors(&self, ix: usize) -> &'a [usize] {
        let all = &self.forest.adj[ix];
        if self.forest.is_white(ix) {
            let limit = self.vertex_count();
            &all[..all.partition_point(|&b| b < limit)]
        } else {
            all
        }
    }

    /// `N_t(ix)` in tie-break order.
    pub fn ordered_neighbors(&self, ix: usize) -> Ordered<'a> {
        let nbrs = self.neighbors(ix);
        match self.forest.tie_break {
            TieBreak::Forward => Ordered::Forward(nbrs.iter()),
            TieBreak::Reversed => Ordered::Reversed(nbrs.iter().rev()),
        }
    }

    pub fn degree(&self, ix: usize) -> usize {
        self.neighbors(ix).len()
    }

    /// Vertices of the component of `ix` in breadth-first order.
    pub fn component(&self, ix: usize) -> Vec<usize> {
        let mut seen = HashMap::new();
        let mut order = vec![ix];
        seen.insert(ix, ());
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &x in self.neighbors(u) {
                if seen.insert(x, ()).is_none() {
                    order.push(x);
                }
            }
        }
        order
    }
}

/// A component of `F_t` rooted at a chosen vertex, with children lists in
/// tie-break order.
#[derive(Clone, Debug)]
pub struct RootedView {
    white_count: usize,
    nodes: Vec<usize>,
    ids: Vec<VertexId>,
    local: HashMap<usize, u32>,
    parent: Vec<Option<u32>>,
    children: Vec<Vec<u32>>,
}

impl RootedView {
    /// Breadth-first rooting of `root`'s component, optionally with one edge
    /// removed (the component is then the side containing `root`).
    pub fn build(at: &ForestAt<'_>, root: usize, without_edge: Option<(usize, usize)>) -> Self {
        let blocked = |a: usize, b: usize| match without_edge {
            Some((x, y)) => (a == x && b == y) || (a == y && b == x),
            None => false,
        };
        let mut view = RootedView {
            white_count: at.forest().white_count(),
            nodes: vec![root],
            ids: vec![at.vertex(root)],
            local: HashMap::from([(root, 0)]),
            parent: vec![None],
            children: vec![Vec::new()],
        };
        let mut queue = VecDeque::from([0u32]);
        while let Some(u) = queue.pop_front() {
            let gu = view.nodes[u as usize];
            for x in at.ordered_neighbors(gu) {
                if blocked(gu, x) || view.local.contains_key(&x) {
                    continue;
                }
                let lx = view.nodes.len() as u32;
                view.nodes.push(x);
                view.ids.push(at.vertex(x));
                view.local.insert(x, lx);
                view.parent.push(Some(u));
                view.children.push(Vec::new());
                view.children[u as usize].push(lx);
                queue.push_back(lx);
            }
        }
        view
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> VertexId {
        self.ids[0]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.position(v).is_some()
    }

    /// Vertices in breadth-first order (root first).
    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        let p = self.position(v)?;
        self.parent[p].map(|q| self.ids[q as usize])
    }

    pub fn children(&self, v: VertexId) -> Vec<VertexId> {
        match self.position(v) {
            Some(p) => self.children[p].iter().map(|&c| self.ids[c as usize]).collect(),
            None => Vec::new(),
        }
    }

    /// The rooted subtree of `u`: `u` and all its descendants.
    pub fn subtree(&self, u: VertexId) -> Result<RootedView, ForestError> {
        let start = self.position(u).ok_or(ForestError::NotInComponent(u))?;
        let mut sub = RootedView {
            white_count: self.white_count,
            nodes: vec![self.nodes[start]],
            ids: vec![u],
            local: HashMap::from([(self.nodes[start], 0)]),
            parent: vec![None],
            children: vec![Vec::new()],
        };
        let mut queue = VecDeque::from([(start as u32, 0u32)]);
        while let Some((old, new)) = queue.pop_front() {
            for &c in &self.children[old as usize] {
                let nc = sub.nodes.len() as u32;
                sub.nodes.push(self.nodes[c as usize]);
                sub.ids.push(self.ids[c as usize]);
                sub.local.insert(self.nodes[c as usize], nc);
                sub.parent.push(Some(new));
                sub.children.push(Vec::new());
                sub.children[new as usize].push(nc);
                queue.push_back((c, nc));
            }
        }
        Ok(sub)
    }

    pub(crate) fn position(&self, v: VertexId) -> Option<usize> {
        let ix = match v {
            VertexId::White(i) if i >= 1 && i as usize <= self.white_count => i as usize - 1,
            VertexId::Black(j) if j >= 1 => self.white_count + j as usize - 1,
            _ => return None,
        };
        self.local_of_node(ix)
    }

    pub(crate) fn local_of_node(&self, ix: usize) -> Option<usize> {
        self.local.get(&ix).map(|&p| p as usize)
    }

    pub(crate) fn node_at(&self, p: usize) -> usize {
        self.nodes[p]
    }

    pub(crate) fn id_at(&self, p: usize) -> VertexId {
        self.ids[p]
    }

    pub(crate) fn children_at(&self, p: usize) -> &[u32] {
        &self.children[p]
    }

    #[cfg(test)]
    pub(crate) fn parent_at(&self, p: usize) -> Option<usize> {
        self.parent[p].map(|q| q as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use VertexId::{Black as B, White as W};

    fn set(vs: &[VertexId]) -> BTreeSet<VertexId> {
        vs.iter().copied().collect()
    }

    #[test]
    fn new_scenario_shapes() {
        let f = OnlineForest::new(1).unwrap();
        assert_eq!(f.turn(), 0);
        assert_eq!(f.vertex_count(), 1);
        let f = OnlineForest::new(3).unwrap();
        assert_eq!(f.edge_count(), 0);
        assert!(f.neighbors_at(W(3), 0).unwrap().is_empty());
        assert_eq!(OnlineForest::new(0).unwrap_err(), ForestError::NoWhites);
    }

    #[test]
    fn add_black_rejects_cycles_and_bad_ids() {
        let mut f = OnlineForest::new(3).unwrap();
        assert_eq!(f.add_black(&[W(1), W(2)]).unwrap(), 1);
        assert_eq!(
            f.add_black(&[W(1), W(2)]).unwrap_err(),
            ForestError::CycleWouldForm {
                first: W(1),
                second: W(2)
            }
        );
        assert_eq!(f.add_black(&[W(3)]).unwrap(), 2);
        assert_eq!(f.add_black(&[]).unwrap_err(), ForestError::EmptyNeighbors);
        assert_eq!(f.add_black(&[W(9)]).unwrap_err(), ForestError::UnknownWhite(9));
        assert_eq!(f.add_black(&[B(1)]).unwrap_err(), ForestError::NotWhite(B(1)));
        assert_eq!(f.turn(), 2);
    }

    #[test]
    fn neighborhoods_over_time() {
        let mut f = OnlineForest::new(3).unwrap();
        f.add_black(&[W(1), W(2)]).unwrap();
        f.add_black(&[W(1)]).unwrap();
        assert_eq!(f.neighbors_at(W(1), 0).unwrap(), set(&[]));
        assert_eq!(f.neighbors_at(W(1), 1).unwrap(), set(&[B(1)]));
        assert_eq!(f.neighbors_at(W(1), 2).unwrap(), set(&[B(1), B(2)]));
        assert_eq!(f.neighbors_at(B(1), 1).unwrap(), set(&[W(1), W(2)]));
        assert_eq!(f.neighbors_at(B(1), 2).unwrap(), set(&[W(1), W(2)]));
        assert!(matches!(
            f.neighbors_at(B(2), 1),
            Err(ForestError::NotYetArrived { .. })
        ));
    }

    #[test]
    fn rooted_views_of_a_chain() {
        let f = OnlineForest::from_arrivals(2, &[vec![1, 2]]).unwrap();
        let at_b = f.rooted_view(B(1), 1).unwrap();
        assert_eq!(at_b.children(B(1)), vec![W(1), W(2)]);
        assert!(at_b.children(W(1)).is_empty());

        let at_w = f.rooted_view(W(1), 1).unwrap();
        assert_eq!(at_w.children(W(1)), vec![B(1)]);
        assert_eq!(at_w.children(B(1)), vec![W(2)]);
        assert_eq!(at_w.parent(W(2)), Some(B(1)));

        let sub = at_w.subtree(B(1)).unwrap();
        assert_eq!(sub.root(), B(1));
        assert_eq!(sub.vertices(), &[B(1), W(2)]);
        assert_eq!(at_w.subtree(W(1)).unwrap().len(), 3);
        assert_eq!(at_w.subtree(W(2)).unwrap().len(), 1);
        assert!(at_w.subtree(W(9)).is_err());

        let lone = OnlineForest::new(1).unwrap().rooted_view(W(1), 0).unwrap();
        assert_eq!(lone.len(), 1);
        assert!(lone.children(W(1)).is_empty());
    }

    #[test]
    fn induced_subforests() {
        let f = OnlineForest::from_arrivals(2, &[vec![1, 2]]).unwrap();
        assert!(f.induced_subforest(&set(&[]), 1).unwrap().is_empty());
        let all = f.induced_subforest(&set(&[W(1), W(2), B(1)]), 1).unwrap();
        assert_eq!(all.edges.len(), 2);
        let ends = f.induced_subforest(&set(&[W(1), W(2)]), 1).unwrap();
        assert_eq!(ends.vertices.len(), 2);
        assert!(ends.edges.is_empty());
    }

    #[test]
    fn reversed_order_reverses_children() {
        let f = OnlineForest::from_arrivals(3, &[vec![1, 2, 3]])
            .unwrap()
            .with_tie_break(TieBreak::Reversed);
        let v = f.rooted_view(B(1), 1).unwrap();
        assert_eq!(v.children(B(1)), vec![W(3), W(2), W(1)]);
    }

    #[test]
    fn vertex_names_parse() {
        assert_eq!("w3".parse::<VertexId>().unwrap(), W(3));
        assert_eq!("b12".parse::<VertexId>().unwrap(), B(12));
        assert!("w0".parse::<VertexId>().is_err());
        assert!("x1".parse::<VertexId>().is_err());
        assert!("".parse::<VertexId>().is_err());
    }
}
