/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Resets to `len` singletons, reusing the allocation.
    pub fn reset(&mut self, len: usize) {
        self.parent.clear();
        self.parent.extend(0..len as u32);
        self.size.clear();
        self.size.resize(len, 1);
    }

    #[inline]
    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Returns true when `x` and `y` were in different sets.
    #[inline]
    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let mut rx = self.find(x);
        let mut ry = self.find(y);
        if rx == ry {
            return false;
        }
        if self.size[rx] < self.size[ry] {
            std::mem::swap(&mut rx, &mut ry);
        }
        self.parent[ry] = rx as u32;
        self.size[rx] += self.size[ry];
        true
    }

    /// Dense labels `0..count` in order of first appearance.
    pub fn labels(&mut self) -> (Vec<u32>, usize) {
        let mut labels = Vec::new();
        let mut scratch = Vec::new();
        let count = self.labels_into(&mut labels, &mut scratch);
        (labels, count)
    }

    /// As [`UnionFind::labels`], writing into caller-owned buffers.
    pub fn labels_into(&mut self, labels: &mut Vec<u32>, scratch: &mut Vec<u32>) -> usize {
        let n = self.parent.len();
        scratch.clear();
        scratch.resize(n, u32::MAX);
        labels.clear();
        let mut count = 0u32;
        for x in 0..n {
            let r = self.find(x);
            if scratch[r] == u32::MAX {
                scratch[r] = count;
                count += 1;
            }
            labels.push(scratch[r]);
        }
        count as usize
    }
}
