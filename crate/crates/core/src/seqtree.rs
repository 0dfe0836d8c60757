//! Forest of implicit-key treaps over `0..n`, one tree per sequence.
//!
//! Node `x` is element `x`. Each tree stores one cycle in its cyclic order
//! (read from an arbitrary starting point), so "same cycle", cycle length,
//! splitting and joining all cost `O(log n)` expected.

const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub(crate) struct SeqForest {
    left: Vec<u32>,
    right: Vec<u32>,
    parent: Vec<u32>,
    size: Vec<u32>,
    prio: Vec<u32>,
}

fn mix(x: u64) -> u32 {
    // splitmix64 finalizer
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31)) as u32
}

impl SeqForest {
    /// `n` singleton trees.
    pub fn singletons(n: usize) -> Self {
        Self {
            left: vec![NIL; n],
            right: vec![NIL; n],
            parent: vec![NIL; n],
            size: vec![1; n],
            prio: (0..n as u64).map(mix).collect(),
        }
    }

    #[inline]
    fn sz(&self, t: u32) -> u32 {
        if t == NIL {
            0
        } else {
            self.size[t as usize]
        }
    }

    #[inline]
    fn pull(&mut self, t: u32) {
        let (l, r) = (self.left[t as usize], self.right[t as usize]);
        self.size[t as usize] = 1 + self.sz(l) + self.sz(r);
        if l != NIL {
            self.parent[l as usize] = t;
        }
        if r != NIL {
            self.parent[r as usize] = t;
        }
    }

    pub fn root(&self, mut x: u32) -> u32 {
        while self.parent[x as usize] != NIL {
            x = self.parent[x as usize];
        }
        x
    }

    /// Size of the tree rooted at `root`.
    pub fn tree_size(&self, root: u32) -> u32 {
        self.size[root as usize]
    }

    pub fn is_root(&self, x: u32) -> bool {
        self.parent[x as usize] == NIL
    }

    /// Position of `x` within its sequence, and the tree's root.
    pub fn index(&self, x: u32) -> (u32, u32) {
        let mut idx = self.sz(self.left[x as usize]);
        let mut cur = x;
        let mut p = self.parent[cur as usize];
        while p != NIL {
            if self.right[p as usize] == cur {
                idx += self.sz(self.left[p as usize]) + 1;
            }
            cur = p;
            p = self.parent[cur as usize];
        }
        (idx, cur)
    }

    /// Concatenate two sequences given by their roots.
    pub fn join(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        let t = if self.prio[a as usize] >= self.prio[b as usize] {
            let r = self.join(self.right[a as usize], b);
            self.right[a as usize] = r;
            a
        } else {
            let l = self.join(a, self.left[b as usize]);
            self.left[b as usize] = l;
            b
        };
        self.pull(t);
        self.parent[t as usize] = NIL;
        t
    }

    /// Split the sequence at `root` into its first `k` elements and the rest.
    pub fn split(&mut self, root: u32, k: u32) -> (u32, u32) {
        if root == NIL {
            return (NIL, NIL);
        }
        let t = root as usize;
        let ls = self.sz(self.left[t]);
        let out = if k <= ls {
            let (a, b) = self.split(self.left[t], k);
            self.left[t] = b;
            self.pull(root);
            (a, root)
        } else {
            let (a, b) = self.split(self.right[t], k - ls - 1);
            self.right[t] = a;
            self.pull(root);
            (root, b)
        };
        if out.0 != NIL {
            self.parent[out.0 as usize] = NIL;
        }
        if out.1 != NIL {
            self.parent[out.1 as usize] = NIL;
        }
        out
    }

    /// Rotate the sequence containing `x` so that it starts at `x`; returns the root.
    pub fn rotate_to(&mut self, x: u32) -> u32 {
        let (idx, root) = self.index(x);
        if idx == 0 {
            return root;
        }
        let (a, b) = self.split(root, idx);
        self.join(b, a)
    }

    /// Build one sequence from `elems`, which must all be singletons.
    pub fn build(&mut self, elems: &[u32]) -> u32 {
        elems.iter().fold(NIL, |acc, &x| self.join(acc, x))
    }

    /// In-order elements of the tree at `root`.
    pub fn sequence(&self, root: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.sz(root) as usize);
        let mut stack = Vec::new();
        let mut cur = root;
        while cur != NIL || !stack.is_empty() {
            while cur != NIL {
                stack.push(cur);
                cur = self.left[cur as usize];
            }
            let t = stack.pop().unwrap();
            out.push(t);
            cur = self.right[t as usize];
        }
        out
    }
}
