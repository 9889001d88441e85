//! All first/second distances and directions of one snapshot, computed by
//! rerooting each component once (linear in the component size).

use super::game::improves;
use crate::distance::Distance;
use crate::forest::ForestAt;

type Entry = (Distance, Option<usize>);

#[derive(Clone, Debug)]
pub struct MiniMaxTable {
    turn: usize,
    dist: Vec<Distance>,
    sec: Vec<Distance>,
    dir: Vec<Option<usize>>,
    sec_dir: Vec<Option<usize>>,
    // out[v][k] = (det-dist, det-dir) entering the k-th neighbor of v from v
    out: Vec<Vec<Entry>>,
    scratch_parent: Vec<usize>,
    scratch_down: Vec<Entry>,
    scratch_up: Vec<Entry>,
    scratch_mark: Vec<u32>,
    epoch: u32,
}

const NONE: usize = usize::MAX;

impl MiniMaxTable {
    /// Evaluates every component of the snapshot.
    pub fn build(at: &ForestAt<'_>) -> Self {
        let cap = at.forest().vertex_count();
        let mut table = MiniMaxTable {
            turn: at.turn(),
            dist: vec![Distance::ZERO; cap],
            sec: vec![Distance::ZERO; cap],
            dir: vec![None; cap],
            sec_dir: vec![None; cap],
            out: vec![Vec::new(); cap],
            scratch_parent: vec![NONE; cap],
            scratch_down: vec![(Distance::ZERO, None); cap],
            scratch_up: vec![(Distance::ZERO, None); cap],
            scratch_mark: vec![0; cap],
            epoch: 0,
        };
        table.epoch += 1;
        let mut done = vec![false; at.vertex_count()];
        for v in 0..at.vertex_count() {
            if !done[v] {
                for u in table.refresh_component(at, v) {
                    done[u] = true;
                }
            }
        }
        table
    }

    pub fn turn(&self) -> usize {
        self.turn
    }

    /// Re-evaluates the component of `root` in `at` and marks the table as
    /// describing `at`'s turn. Components not containing `root` must already
    /// be current. Returns the component in breadth-first order.
    pub fn refresh_component(&mut self, at: &ForestAt<'_>, root: usize) -> Vec<usize> {
        self.turn = at.turn();
        self.epoch = self.epoch.wrapping_add(1);
        let epoch = self.epoch;
        let mut order = vec![root];
        self.scratch_parent[root] = NONE;
        self.scratch_mark[root] = epoch;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &x in at.neighbors(u) {
                if self.scratch_mark[x] != epoch {
                    self.scratch_mark[x] = epoch;
                    self.scratch_parent[x] = u;
                    order.push(x);
                }
            }
        }

        for &u in order.iter().rev() {
            let black = !at.is_white(u);
            let parent = self.scratch_parent[u];
            let mut best: Option<(Distance, usize)> = None;
            for x in at.ordered_neighbors(u) {
                if x == parent {
                    continue;
                }
                let v = self.scratch_down[x].0;
                match best {
                    Some((b, _)) if !improves(black, v, b) => {}
                    _ => best = Some((v, x)),
                }
            }
            self.scratch_down[u] = match best {
                Some((b, x)) => (b.succ(), Some(x)),
                None if black => (Distance::Infinite, None),
                None => (Distance::ZERO, None),
            };
        }

        for &u in &order {
            let black = !at.is_white(u);
            let parent = self.scratch_parent[u];
            let mut best: Option<(Distance, usize)> = None;
            let mut second: Option<(Distance, usize)> = None;
            for x in at.ordered_neighbors(u) {
                let v = if x == parent {
                    self.scratch_up[u].0
                } else {
                    self.scratch_down[x].0
                };
                match best {
                    Some((b, _)) if !improves(black, v, b) => match second {
                        Some((s, _)) if !improves(black, v, s) => {}
                        _ => second = Some((v, x)),
                    },
                    _ => {
                        second = best;
                        best = Some((v, x));
                    }
                }
            }
            let empty = if black { Distance::Infinite } else { Distance::ZERO };
            let (d, dd) = best.map_or((empty, None), |(b, x)| (b.succ(), Some(x)));
            let (s, sd) = second.map_or((empty, None), |(b, x)| (b.succ(), Some(x)));
            self.dist[u] = d;
            self.dir[u] = dd;
            self.sec[u] = s;
            self.sec_dir[u] = sd;

            let nbrs = at.neighbors(u);
            let row = &mut self.out[u];
            row.clear();
            for &x in nbrs {
                if x == parent {
                    row.push(self.scratch_up[u]);
                } else {
                    row.push(self.scratch_down[x]);
                    self.scratch_up[x] = if Some(x) == dd { (s, sd) } else { (d, dd) };
                }
            }
        }
        order
    }

    pub fn dist(&self, v: usize) -> Distance {
        self.dist[v]
    }

    pub fn sec_dist(&self, v: usize) -> Distance {
        self.sec[v]
    }

    pub fn dir(&self, v: usize) -> Option<usize> {
        self.dir[v]
    }

    pub fn sec_dir(&self, v: usize) -> Option<usize> {
        self.sec_dir[v]
    }

    /// `(det-dist(from, to), det-dir(from, to))`; panics if not an edge of `at`.
    pub fn det(&self, at: &ForestAt<'_>, from: usize, to: usize) -> Entry {
        let k = at
            .neighbors(from)
            .binary_search(&to)
            .expect("det queried on a non-edge");
        self.out[from][k]
    }

    /// Test hook: overwrite a stored second distance.
    pub fn set_sec_dist(&mut self, v: usize, d: Distance) {
        self.sec[v] = d;
    }

    pub fn det_path(&self, at: &ForestAt<'_>, from: usize, to: usize) -> Vec<usize> {
        let mut out = vec![from];
        let (mut v, mut u) = (from, to);
        loop {
            out.push(u);
            match self.det(at, v, u).1 {
                Some(x) => {
                    v = u;
                    u = x;
                }
                None => break,
            }
        }
        out
    }

    /// The mini-max path of `v` rooted at `v`, via its first direction.
    pub fn path(&self, at: &ForestAt<'_>, v: usize) -> Vec<usize> {
        match self.dir[v] {
            Some(d) => self.det_path(at, v, d),
            None => vec![v],
        }
    }

    /// The second mini-max path of `v`, via its second direction.
    pub fn sec_path(&self, at: &ForestAt<'_>, v: usize) -> Vec<usize> {
        match self.sec_dir[v] {
            Some(d) => self.det_path(at, v, d),
            None => vec![v],
        }
    }

    /// Dead vertices: blacks with infinite second distance, whites with
    /// infinite distance.
    pub fn is_dead(&self, at: &ForestAt<'_>, v: usize) -> bool {
        if at.is_white(v) {
            self.dist[v].is_infinite()
        } else {
            self.sec[v].is_infinite()
        }
    }

    /// Level of an existing vertex: second distance for whites, distance for
    /// blacks.
    pub fn level(&self, at: &ForestAt<'_>, v: usize) -> Distance {
        if at.is_white(v) {
            self.sec[v]
        } else {
            self.dist[v]
        }
    }
}
