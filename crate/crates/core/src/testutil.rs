//! Shared fixtures for unit tests.

use proptest::collection::vec;
use proptest::prelude::*;

use crate::forest::OnlineForest;

/// `b1→{w1,w2}, b2→{w2,w3}, b3→{w3}`.
pub fn e1() -> OnlineForest {
    OnlineForest::from_arrivals(3, &[vec![1, 2], vec![2, 3], vec![3]]).unwrap()
}

/// Four whites, `b1→{w1,w2,w3}` then `b2→{w1}`.
pub fn star() -> OnlineForest {
    OnlineForest::from_arrivals(4, &[vec![1, 2, 3], vec![1]]).unwrap()
}

/// Raw neighbor lists; ids are reduced modulo the white count by
/// [`forest_from_raw`].
pub fn raw_arrivals(max_white: u32, max_turns: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    vec(vec(0..max_white, 1..4), 0..max_turns)
}

/// Replays raw arrivals, dropping the ones that would close a cycle.
pub fn forest_from_raw(n: usize, raw: &[Vec<u32>]) -> OnlineForest {
    let mut f = OnlineForest::new(n).unwrap();
    for nbrs in raw {
        let ws: Vec<u32> = nbrs.iter().map(|&w| w % n as u32 + 1).collect();
        let _ = f.add_black_whites(&ws);
    }
    f
}
