//! Literal evaluation of the edge-determined distance: entering `to` from
//! `from`, a black target minimizes over its other neighbors and a white
//! target maximizes over its other neighbors.

use std::collections::HashMap;

use super::game::improves;
use crate::distance::Distance;
use crate::forest::ForestAt;

/// Memoized `(det-dist, det-dir)` over directed edges of one snapshot.
pub struct Determined<'a> {
    at: ForestAt<'a>,
    memo: HashMap<(usize, usize), (Distance, Option<usize>)>,
}

impl<'a> Determined<'a> {
    pub fn new(at: ForestAt<'a>) -> Self {
        Determined {
            at,
            memo: HashMap::new(),
        }
    }

    /// `(det-dist(from, to), det-dir(from, to))`; the pair must be an edge.
    pub fn get(&mut self, from: usize, to: usize) -> (Distance, Option<usize>) {
        if let Some(&hit) = self.memo.get(&(from, to)) {
            return hit;
        }
        let mut stack = vec![(from, to, false)];
        while let Some((f, u, expanded)) = stack.pop() {
            if self.memo.contains_key(&(f, u)) {
                continue;
            }
            if !expanded {
                stack.push((f, u, true));
                for &x in self.at.neighbors(u) {
                    if x != f && !self.memo.contains_key(&(u, x)) {
                        stack.push((u, x, false));
                    }
                }
                continue;
            }
            let black = !self.at.is_white(u);
            let mut best: Option<(Distance, usize)> = None;
            for x in self.at.ordered_neighbors(u) {
                if x == f {
                    continue;
                }
                let v = self.memo[&(u, x)].0;
                match best {
                    Some((b, _)) if !improves(black, v, b) => {}
                    _ => best = Some((v, x)),
                }
            }
            let entry = match best {
                Some((b, x)) => (b.succ(), Some(x)),
                None if black => (Distance::Infinite, None),
                None => (Distance::ZERO, None),
            };
            self.memo.insert((f, u), entry);
        }
        self.memo[&(from, to)]
    }

    /// `(dist, dir)` of a vertex via the best entry edge, then `(sec-dist,
    /// sec-dir)` via the best entry edge other than `dir`.
    pub fn first_and_second(&mut self, v: usize) -> ((Distance, Option<usize>), (Distance, Option<usize>)) {
        let black = !self.at.is_white(v);
        let empty = if black { Distance::Infinite } else { Distance::ZERO };
        let nbrs: Vec<usize> = self.at.ordered_neighbors(v).collect();
        let pick = |this: &mut Self, skip: Option<usize>| {
            let mut best: Option<(Distance, usize)> = None;
            for &x in &nbrs {
                if Some(x) == skip {
                    continue;
                }
                let d = this.get(v, x).0;
                match best {
                    Some((b, _)) if !improves(black, d, b) => {}
                    _ => best = Some((d, x)),
                }
            }
            match best {
                Some((b, x)) => (b.succ(), Some(x)),
                None => (empty, None),
            }
        };
        let first = pick(self, None);
        let second = pick(self, first.1);
        (first, second)
    }

    /// Vertex sequence of the determined path entering `to` from `from`.
    pub fn path(&mut self, from: usize, to: usize) -> Vec<usize> {
        let mut out = vec![from];
        let (mut v, mut u) = (from, to);
        loop {
            out.push(u);
            match self.get(v, u).1 {
                Some(x) => {
                    v = u;
                    u = x;
                }
                None => break,
            }
        }
        out
    }
}
