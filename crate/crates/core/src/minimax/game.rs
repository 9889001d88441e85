//! The mini-max game on an explicitly rooted tree.

use crate::distance::Distance;
use crate::forest::RootedView;

/// Revenue and chosen child for every vertex of a rooted view, indexed by
/// the view's breadth-first position.
#[derive(Clone, Debug)]
pub struct GameValues {
    pub(crate) value: Vec<Distance>,
    pub(crate) next: Vec<Option<u32>>,
}

/// Whether `cand` beats `best` for a vertex of the given color. Ties never
/// win, so scanning candidates in tie-break order keeps the earliest.
pub(crate) fn improves(black: bool, cand: Distance, best: Distance) -> bool {
    if black {
        cand < best
    } else {
        cand > best
    }
}

/// Bottom-up evaluation: blacks minimize (infinite when childless), whites
/// maximize (zero when childless), each step adding one.
pub fn evaluate(view: &RootedView) -> GameValues {
    let n = view.len();
    let mut value = vec![Distance::ZERO; n];
    let mut next = vec![None; n];
    for p in (0..n).rev() {
        let black = view.id_at(p).is_black();
        let mut best: Option<(Distance, u32)> = None;
        for &c in view.children_at(p) {
            let v = value[c as usize];
            match best {
                Some((b, _)) if !improves(black, v, b) => {}
                _ => best = Some((v, c)),
            }
        }
        match best {
            Some((b, c)) => {
                value[p] = b.succ();
                next[p] = Some(c);
            }
            None => {
                value[p] = if black { Distance::Infinite } else { Distance::ZERO };
            }
        }
    }
    GameValues { value, next }
}

impl GameValues {
    pub fn value_at(&self, p: usize) -> Distance {
        self.value[p]
    }

    pub fn next_at(&self, p: usize) -> Option<usize> {
        self.next[p].map(|c| c as usize)
    }

    /// Positions along the mini-max path starting at position `p`.
    pub fn path_from(&self, p: usize) -> Vec<usize> {
        let mut out = vec![p];
        let mut cur = p;
        while let Some(c) = self.next_at(cur) {
            out.push(c);
            cur = c;
        }
        out
    }
}
