//! Mini-max distances, directions and paths.
//!
//! Three independent routes compute the same quantities:
//!
//! * [`game`]: the game evaluated on an explicitly rooted component
//!   (`dist` is the root's revenue; `sec-dist` re-evaluates after cutting the
//!   root's chosen child off).
//! * [`determined`]: the edge-determined recursion over directed edges.
//! * [`table`]: one rerooting pass per component; this is what full runs use.

pub mod determined;
pub mod game;
pub mod table;

use std::fmt;

use crate::distance::Distance;
use crate::forest::{ForestAt, ForestError, OnlineForest, RootedView, VertexId};

pub use determined::Determined;
pub use game::{evaluate, GameValues};
pub use table::MiniMaxTable;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("{0} and {1} are not adjacent")]
    NotAnEdge(VertexId, VertexId),
    #[error("{0} has no first direction")]
    DirUndefined(VertexId),
}

/// A vertex sequence; its length is the number of edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Path(pub Vec<VertexId>);

impl Path {
    pub fn len(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn from_nodes(at: &ForestAt<'_>, nodes: &[usize]) -> Self {
        Path(nodes.iter().map(|&x| at.vertex(x)).collect())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// `(mini-max_T(v), mini-max-next_T(v))` on a rooted view.
pub fn mini_max_revenue(view: &RootedView, v: VertexId) -> Result<(Distance, Option<VertexId>), EngineError> {
    let p = view.position(v).ok_or(ForestError::NotInComponent(v))?;
    let values = evaluate(view);
    Ok((values.value_at(p), values.next_at(p).map(|c| view.id_at(c))))
}

/// `mini-max-path_T(v)` on a rooted view.
pub fn mini_max_path(view: &RootedView, v: VertexId) -> Result<Path, EngineError> {
    let p = view.position(v).ok_or(ForestError::NotInComponent(v))?;
    let values = evaluate(view);
    Ok(Path(values.path_from(p).into_iter().map(|q| view.id_at(q)).collect()))
}

/// First distance/direction of `ix`: the root revenue of its component
/// rooted at `ix`.
pub(crate) fn rooted_first(at: &ForestAt<'_>, ix: usize) -> (Distance, Option<usize>, RootedView) {
    let view = RootedView::build(at, ix, None);
    let values = evaluate(&view);
    let dir = values.next_at(0).map(|c| view.node_at(c));
    (values.value_at(0), dir, view)
}

/// Second distance/direction of `ix`: root revenue after cutting the edge to
/// the first direction.
pub(crate) fn rooted_second(at: &ForestAt<'_>, ix: usize) -> (Distance, Option<usize>) {
    let (dist, dir, _) = rooted_first(at, ix);
    match dir {
        None => (dist, None),
        Some(d) => {
            let view = RootedView::build(at, ix, Some((ix, d)));
            let values = evaluate(&view);
            (values.value_at(0), values.next_at(0).map(|c| view.node_at(c)))
        }
    }
}

pub fn dist_dir(forest: &OnlineForest, v: VertexId, t: usize) -> Result<(Distance, Option<VertexId>), EngineError> {
    let at = forest.at(t)?;
    let ix = at.node(v)?;
    let (d, dir, _) = rooted_first(&at, ix);
    Ok((d, dir.map(|x| at.vertex(x))))
}

pub fn sec_dist_dir(forest: &OnlineForest, v: VertexId, t: usize) -> Result<(Distance, Option<VertexId>), EngineError> {
    let at = forest.at(t)?;
    let ix = at.node(v)?;
    let (d, dir) = rooted_second(&at, ix);
    Ok((d, dir.map(|x| at.vertex(x))))
}

fn edge(at: &ForestAt<'_>, from: VertexId, to: VertexId) -> Result<(usize, usize), EngineError> {
    let a = at.node(from)?;
    let b = at.node(to)?;
    if at.neighbors(a).binary_search(&b).is_err() {
        return Err(EngineError::NotAnEdge(from, to));
    }
    Ok((a, b))
}

pub fn det_dist_dir(
    forest: &OnlineForest,
    from: VertexId,
    to: VertexId,
    t: usize,
) -> Result<(Distance, Option<VertexId>), EngineError> {
    let at = forest.at(t)?;
    let (a, b) = edge(&at, from, to)?;
    let (d, x) = Determined::new(at).get(a, b);
    Ok((d, x.map(|x| at.vertex(x))))
}

pub fn det_path(forest: &OnlineForest, from: VertexId, to: VertexId, t: usize) -> Result<Path, EngineError> {
    let at = forest.at(t)?;
    let (a, b) = edge(&at, from, to)?;
    Ok(Path::from_nodes(&at, &Determined::new(at).path(a, b)))
}

/// `path_t(v)`: the mini-max path of `v` in its component rooted at `v`.
pub fn path_at(forest: &OnlineForest, v: VertexId, t: usize) -> Result<Path, EngineError> {
    let at = forest.at(t)?;
    let ix = at.node(v)?;
    let view = RootedView::build(&at, ix, None);
    mini_max_path(&view, v)
}

/// `sec-path_t(v)`: the mini-max path of `v` once the edge to `dir_t(v)` is
/// removed. Returned even when the second distance is infinite (the walk then
/// ends at a black leaf).
pub fn sec_path_at(forest: &OnlineForest, v: VertexId, t: usize) -> Result<Path, EngineError> {
    let at = forest.at(t)?;
    let ix = at.node(v)?;
    let (_, dir, _) = rooted_first(&at, ix);
    let d = dir.ok_or(EngineError::DirUndefined(v))?;
    let view = RootedView::build(&at, ix, Some((ix, d)));
    mini_max_path(&view, v)
}
