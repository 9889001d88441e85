/// Merge-only disjoint sets with component sizes.
#[derive(Clone, Debug, Default)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Appends a fresh singleton and returns its index.
    pub fn push(&mut self) -> usize {
        let ix = self.parent.len();
        self.parent.push(ix as u32);
        self.size.push(1);
        ix
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        while self.parent[x] as usize != root {
            let next = self.parent[x] as usize;
            self.parent[x] = root as u32;
            x = next;
        }
        root
    }

    /// Unions the sets of `a` and `b`; returns the surviving root.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        ra
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    /// Restores `x` to a singleton. Only valid when every member of `x`'s set
    /// is reset in the same sweep.
    pub(crate) fn reset(&mut self, x: usize) {
        self.parent[x] = x as u32;
        self.size[x] = 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_tracks_sizes() {
        let mut d = DisjointSets::new(5);
        d.union(0, 1);
        d.union(3, 4);
        assert!(d.same(0, 1));
        assert!(!d.same(1, 3));
        assert_eq!(d.size_of(4), 2);
        d.union(1, 4);
        assert_eq!(d.size_of(0), 4);
        assert_eq!(d.size_of(2), 1);
        let x = d.push();
        assert_eq!(x, 5);
        assert_eq!(d.size_of(x), 1);
    }
}
