//! Alive and dead vertices, Hall witnesses, life portals, the dying region,
//! the dispatching vertex and the prefix/suffix split of the arrival path.

use std::collections::{BTreeSet, VecDeque};

use crate::forest::{ForestAt, ForestError, OnlineForest, RootedView, VertexId};
use crate::minimax::{evaluate, MiniMaxTable, Path};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum VitalityError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("turn {0}: the arriving vertex has infinite distance")]
    DistInfinite(usize),
    #[error("{0} is not a black vertex")]
    NotBlack(VertexId),
    #[error("turn 0 has no arrival")]
    NoArrival,
}

/// Alive/dead partition of `F_t` together with the events of turn `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VitalityState {
    pub turn: usize,
    pub alive: BTreeSet<VertexId>,
    pub dead: BTreeSet<VertexId>,
    pub portals: BTreeSet<VertexId>,
    pub dispatch: Option<VertexId>,
    pub deaths_this_turn: BTreeSet<VertexId>,
}

/// A black set whose neighborhood is smaller than itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallWitness {
    pub x: BTreeSet<VertexId>,
    pub neighborhood: BTreeSet<VertexId>,
}

/// The dying region of a turn, and whether it came from the structural
/// prediction (`false` means the Hall-breaking fallback to the definitional
/// delta was used).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyingRegion {
    pub vertices: BTreeSet<VertexId>,
    pub structural: bool,
}

/// The arrival path split into its dying prefix and surviving suffix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSplit {
    pub prefix: Path,
    pub suffix: Path,
    /// Edges of the path not in the suffix; includes the edge joining the two
    /// parts when both are non-empty.
    pub prefix_len: usize,
}

/// Aliveness of every vertex of the final forest at the table's turn;
/// vertices that have not arrived yet count as alive.
pub fn alive_flags(at: &ForestAt<'_>, table: &MiniMaxTable) -> Vec<bool> {
    let n = at.forest().vertex_count();
    (0..n).map(|v| !at.contains(v) || !table.is_dead(at, v)).collect()
}

/// `|N_t(x) ∩ A|` for a flag vector `alive`.
pub(crate) fn alive_degree(at: &ForestAt<'_>, alive: &[bool], x: usize) -> usize {
    at.neighbors(x).iter().filter(|&&y| alive[y]).count()
}

pub(crate) fn is_portal(at: &ForestAt<'_>, alive_prev: &[bool], x: usize) -> bool {
    !at.is_white(x) && alive_degree(at, alive_prev, x) >= 3
}

/// Vertices reachable from `b` through previously alive vertices without
/// entering a life portal.
pub(crate) fn region_nodes(at: &ForestAt<'_>, alive_prev: &[bool], b: usize) -> Vec<usize> {
    let mut seen = BTreeSet::from([b]);
    let mut queue = VecDeque::from([b]);
    while let Some(u) = queue.pop_front() {
        for &x in at.neighbors(u) {
            if alive_prev[x] && !is_portal(at, alive_prev, x) && seen.insert(x) {
                queue.push_back(x);
            }
        }
    }
    seen.into_iter().collect()
}

/// First black vertex on `path` with at least two alive neighbors.
pub(crate) fn dispatch_node(at: &ForestAt<'_>, alive: &[bool], path: &[usize]) -> Option<usize> {
    path.iter()
        .copied()
        .find(|&x| !at.is_white(x) && alive_degree(at, alive, x) >= 2)
}

/// Length of the maximal initial segment of `path` whose vertices died.
pub(crate) fn dying_prefix(path: &[usize], died: impl Fn(usize) -> bool) -> usize {
    path.iter().take_while(|&&x| died(x)).count()
}

/// Appendix-style witness: root `b`'s component at `b`, then walk down taking
/// every child of a black vertex and only the game-chosen child of a white one.
pub(crate) fn witness_nodes(at: &ForestAt<'_>, b: usize) -> Vec<usize> {
    let view = RootedView::build(at, b, None);
    let values = evaluate(&view);
    let mut blacks = Vec::new();
    let mut stack = vec![0usize];
    while let Some(p) = stack.pop() {
        let ix = view.node_at(p);
        if at.is_white(ix) {
            stack.extend(values.next_at(p));
        } else {
            blacks.push(ix);
            stack.extend(view.children_at(p).iter().map(|&c| c as usize));
        }
    }
    blacks.sort_unstable();
    blacks
}

fn ids(at: &ForestAt<'_>, xs: impl IntoIterator<Item = usize>) -> BTreeSet<VertexId> {
    xs.into_iter().map(|x| at.vertex(x)).collect()
}

fn tables(
    forest: &OnlineForest,
    t: usize,
) -> Result<(ForestAt<'_>, ForestAt<'_>, MiniMaxTable, MiniMaxTable), VitalityError> {
    if t == 0 {
        return Err(VitalityError::NoArrival);
    }
    let at = forest.at(t)?;
    let prev = forest.at(t - 1)?;
    let tp = MiniMaxTable::build(&prev);
    let tt = MiniMaxTable::build(&at);
    Ok((prev, at, tp, tt))
}

pub fn is_dead(forest: &OnlineForest, v: VertexId, t: usize) -> Result<bool, VitalityError> {
    let at = forest.at(t)?;
    let ix = match at.node(v) {
        Ok(ix) => ix,
        Err(_) if v.is_black() && forest.node(v).is_ok() => return Ok(false),
        Err(e) => return Err(e.into()),
    };
    Ok(MiniMaxTable::build(&at).is_dead(&at, ix))
}

/// Hall witness for `b` at turn `t`, present iff `dist_t(b)` is infinite.
pub fn hall_witness(forest: &OnlineForest, b: VertexId, t: usize) -> Result<Option<HallWitness>, VitalityError> {
    let at = forest.at(t)?;
    let bi = at.node(b)?;
    if b.is_white() {
        return Err(VitalityError::NotBlack(b));
    }
    let table = MiniMaxTable::build(&at);
    if table.dist(bi).is_finite() {
        return Ok(None);
    }
    let xs = witness_nodes(&at, bi);
    let nbrs: BTreeSet<usize> = xs.iter().flat_map(|&x| at.neighbors(x).iter().copied()).collect();
    Ok(Some(HallWitness {
        x: ids(&at, xs),
        neighborhood: ids(&at, nbrs),
    }))
}

pub fn life_portals(forest: &OnlineForest, t: usize) -> Result<BTreeSet<VertexId>, VitalityError> {
    let (prev, at, tp, _) = tables(forest, t)?;
    let alive_prev = alive_flags(&prev, &tp);
    Ok(ids(
        &at,
        (forest.white_count()..at.vertex_count()).filter(|&x| is_portal(&at, &alive_prev, x)),
    ))
}

pub fn dying_region(forest: &OnlineForest, t: usize) -> Result<DyingRegion, VitalityError> {
    let (prev, at, tp, tt) = tables(forest, t)?;
    let b = forest.black_node(t);
    let alive_prev = alive_flags(&prev, &tp);
    if tt.dist(b).is_infinite() {
        let alive = alive_flags(&at, &tt);
        let delta = (0..at.vertex_count()).filter(|&x| alive_prev[x] && !alive[x]);
        return Ok(DyingRegion {
            vertices: ids(&at, delta),
            structural: false,
        });
    }
    let vertices = if alive_degree(&at, &alive_prev, b) >= 2 {
        BTreeSet::new()
    } else {
        ids(&at, region_nodes(&at, &alive_prev, b))
    };
    Ok(DyingRegion {
        vertices,
        structural: true,
    })
}

pub fn dispatching_vertex(forest: &OnlineForest, t: usize) -> Result<Option<VertexId>, VitalityError> {
    if t == 0 {
        return Err(VitalityError::NoArrival);
    }
    let at = forest.at(t)?;
    let table = MiniMaxTable::build(&at);
    let b = forest.black_node(t);
    if table.dist(b).is_infinite() {
        return Err(VitalityError::DistInfinite(t));
    }
    let alive = alive_flags(&at, &table);
    Ok(dispatch_node(&at, &alive, &table.path(&at, b)).map(|x| at.vertex(x)))
}

pub fn split_path(forest: &OnlineForest, t: usize) -> Result<PathSplit, VitalityError> {
    let (prev, at, tp, tt) = tables(forest, t)?;
    let b = forest.black_node(t);
    if tt.dist(b).is_infinite() {
        return Err(VitalityError::DistInfinite(t));
    }
    let alive_prev = alive_flags(&prev, &tp);
    let alive = alive_flags(&at, &tt);
    let path = tt.path(&at, b);
    let k = dying_prefix(&path, |x| alive_prev[x] && !alive[x]);
    Ok(PathSplit {
        prefix: Path::from_nodes(&at, &path[..k]),
        suffix: Path::from_nodes(&at, &path[k..]),
        prefix_len: (path.len() - 1) - (path.len() - k).saturating_sub(1),
    })
}

pub fn vitality_state(forest: &OnlineForest, t: usize) -> Result<VitalityState, VitalityError> {
    let at = forest.at(t)?;
    let table = MiniMaxTable::build(&at);
    let alive = alive_flags(&at, &table);
    let mut state = VitalityState {
        turn: t,
        ..Default::default()
    };
    for x in 0..at.vertex_count() {
        if alive[x] {
            state.alive.insert(at.vertex(x));
        } else {
            state.dead.insert(at.vertex(x));
        }
    }
    if t == 0 {
        return Ok(state);
    }
    let prev = forest.at(t - 1)?;
    let alive_prev = alive_flags(&prev, &MiniMaxTable::build(&prev));
    state.portals = ids(
        &at,
        (forest.white_count()..at.vertex_count()).filter(|&x| is_portal(&at, &alive_prev, x)),
    );
    state.deaths_this_turn = ids(&at, (0..at.vertex_count()).filter(|&x| alive_prev[x] && !alive[x]));
    let b = forest.black_node(t);
    if table.dist(b).is_finite() {
        state.dispatch = dispatch_node(&at, &alive, &table.path(&at, b)).map(|x| at.vertex(x));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_hall, is_minimal_violator, OracleBudget};
    use crate::testutil::{e1, forest_from_raw, raw_arrivals, star};
    use proptest::prelude::*;
    use VertexId::{Black as B, White as W};

    fn set(vs: &[VertexId]) -> BTreeSet<VertexId> {
        vs.iter().copied().collect()
    }

    #[test]
    fn death_on_fixtures() {
        let f = OnlineForest::from_arrivals(2, &[vec![1]]).unwrap();
        assert!(is_dead(&f, B(1), 1).unwrap());
        assert!(!is_dead(&OnlineForest::new(1).unwrap(), W(1), 0).unwrap());
        let f = e1();
        let state = vitality_state(&f, 3).unwrap();
        assert_eq!(state.dead.len(), 6);
        assert!(state.alive.is_empty());
    }

    #[test]
    fn witnesses() {
        let twins = OnlineForest::from_arrivals(1, &[vec![1], vec![1]]).unwrap();
        let w = hall_witness(&twins, B(2), 2).unwrap().unwrap();
        assert_eq!(w.x, set(&[B(1), B(2)]));
        assert_eq!(w.neighborhood, set(&[W(1)]));
        assert_eq!(hall_witness(&e1(), B(1), 1).unwrap(), None);
        assert_eq!(hall_witness(&e1(), B(3), 3).unwrap(), None);
        let f = OnlineForest::from_arrivals(2, &[vec![1, 2], vec![1], vec![2]]).unwrap();
        let w = hall_witness(&f, B(3), 3).unwrap().unwrap();
        assert_eq!(w.x, set(&[B(1), B(2), B(3)]));
        assert_eq!(w.neighborhood.len(), 2);
    }

    #[test]
    fn portals() {
        assert_eq!(life_portals(&star(), 2).unwrap(), set(&[B(1)]));
        assert!(life_portals(&e1(), 3).unwrap().is_empty());
        assert_eq!(life_portals(&star(), 1).unwrap(), set(&[B(1)]));
    }

    #[test]
    fn regions() {
        let r = dying_region(&star(), 2).unwrap();
        assert_eq!(r.vertices, set(&[B(2), W(1)]));
        assert!(r.structural);
        assert_eq!(vitality_state(&star(), 2).unwrap().deaths_this_turn, r.vertices);
        assert!(dying_region(&e1(), 1).unwrap().vertices.is_empty());
        let r = dying_region(&e1(), 3).unwrap();
        assert_eq!(r.vertices.len(), 6);
    }

    #[test]
    fn dispatch_and_split() {
        assert_eq!(dispatching_vertex(&e1(), 1).unwrap(), Some(B(1)));
        assert_eq!(dispatching_vertex(&star(), 2).unwrap(), Some(B(1)));
        assert_eq!(dispatching_vertex(&e1(), 3).unwrap(), None);
        let twins = OnlineForest::from_arrivals(1, &[vec![1], vec![1]]).unwrap();
        assert_eq!(
            dispatching_vertex(&twins, 2).unwrap_err(),
            VitalityError::DistInfinite(2)
        );

        let s = split_path(&star(), 2).unwrap();
        assert_eq!(s.prefix, Path(vec![B(2), W(1)]));
        assert_eq!(s.suffix, Path(vec![B(1), W(2)]));
        assert_eq!((s.prefix_len, s.suffix.len()), (2, 1));
        let s = split_path(&e1(), 3).unwrap();
        assert_eq!(s.prefix_len, 5);
        assert!(s.suffix.is_empty());
        let s = split_path(&e1(), 1).unwrap();
        assert_eq!((s.prefix_len, s.suffix.len()), (0, 1));
    }

    proptest! {
        #[test]
        fn witness_agrees_with_brute_force(n in 1usize..7, raw in raw_arrivals(7, 9)) {
            let f = forest_from_raw(n, &raw);
            let budget = OracleBudget::default();
            for t in 1..=f.turn() {
                let at = f.at(t).unwrap();
                let b = at.vertex(f.black_node(t));
                let blacks = at.component(f.black_node(t)).iter().filter(|&&x| !at.is_white(x)).count();
                if blacks > 12 {
                    continue;
                }
                let w = hall_witness(&f, b, t).unwrap();
                let brute = brute_hall(&at, b, budget).unwrap();
                prop_assert_eq!(w.is_some(), brute.is_some());
                if let Some(w) = w {
                    prop_assert!(w.x.contains(&b));
                    prop_assert_eq!(w.neighborhood.len() + 1, w.x.len());
                    prop_assert!(is_minimal_violator(&at, &w.x, budget).unwrap());
                }
            }
        }
    }
}
