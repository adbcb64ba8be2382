/// Disjoint sets with union by size, path halving, and a per-set flag
/// recording whether the set touches the graph boundary.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    touches: Vec<bool>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n], touches: vec![false; n], sets: n }
    }

    /// Reset to singletons without reallocating.
    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.touches.fill(false);
        self.sets = self.parent.len();
    }

    #[inline]
    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    /// Merge the sets of `a` and `b`; returns the surviving root when a merge happened.
    #[inline]
    pub fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.touches[ra] |= self.touches[rb];
        self.sets -= 1;
        Some(ra)
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    pub fn mark_touching(&mut self, x: usize) {
        let r = self.find(x);
        self.touches[r] = true;
    }

    pub fn touches(&mut self, x: usize) -> bool {
        let r = self.find(x);
        self.touches[r]
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Number of disjoint sets, counting every element (open or not).
    pub fn n_sets(&self) -> usize {
        self.sets
    }
}
