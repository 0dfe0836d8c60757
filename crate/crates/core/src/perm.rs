//! Cycle-tracked permutation engine.
//!
//! A [`Permutation`] keeps its successor map together with a treap per cycle
//! (storing the cycle in its cyclic order), a histogram of cycle sizes and the
//! current largest cycle. Applying a transposition is either a coagulation
//! (two cycles merge) or a fragmentation (one cycle splits in two); both
//! update the cached aggregates in `O(log n)` expected time, so splitting a
//! giant cycle costs no more than splitting a small one.
//!
//! # Composition convention
//!
//! A newly applied transposition or cycle acts *after* the current
//! permutation: applying `τ` to `σ` yields `τ ∘ σ`, i.e. `x ↦ τ(σ(x))`.
//! Under this convention, if `j = σ^k(i)` lies in the cycle `C` of `i`,
//! applying `(i j)` splits `C` into the two orbits
//! `(i, σ(i), …, σ^{k-1}(i))` and `(j, σ(j), …, σ^{|C|-k-1}(j))`.
//!
//! Elements are 0-based in this API. Text dumps and the CLI use 1-based labels.

use std::fmt;

use thiserror::Error;

use crate::seqtree::SeqForest;

/// Errors raised by [`Permutation`] mutations and constructors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("element {element} out of range for n = {n}")]
    OutOfRange { element: u32, n: usize },
    #[error("transposition endpoints must differ (got {0} twice)")]
    DegenerateTransposition(u32),
    #[error("cycle contains duplicate element {0}")]
    DuplicateElement(u32),
    #[error("ground set must be non-empty")]
    Empty,
    #[error("residue sets need k >= 3 (got {0})")]
    ResidueModulus(u32),
    #[error("successor map is not a bijection")]
    NotBijection,
}

/// What a single transposition did to the cycle structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// Two cycles merged into one of the given size.
    Coagulation { merged: u32 },
    /// One cycle split. `pieces.0` is the piece containing the first
    /// endpoint `i`, `pieces.1` the piece containing `j`.
    Fragmentation { pieces: (u32, u32) },
}

impl StepEvent {
    pub fn is_fragmentation(&self) -> bool {
        matches!(self, StepEvent::Fragmentation { .. })
    }

    /// Smaller piece of a fragmentation.
    pub fn smaller_piece(&self) -> Option<u32> {
        match *self {
            StepEvent::Fragmentation { pieces: (a, b) } => Some(a.min(b)),
            StepEvent::Coagulation { .. } => None,
        }
    }
}

/// Snapshot of the cycle-count observables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observables {
    /// Number of cycles, fixed points included.
    pub num_cycles: usize,
    /// Largest cycle length.
    pub largest: u32,
    /// `(size, multiplicity)` pairs in increasing size order.
    pub size_multiset: Vec<(u32, u32)>,
}

#[derive(Clone)]
pub struct Permutation {
    succ: Vec<u32>,
    pred: Vec<u32>,
    trees: SeqForest,
    /// `size_counts[s]` = number of cycles of length `s`.
    size_counts: Vec<u32>,
    /// Bit `s` set iff `size_counts[s] > 0`.
    size_bits: Vec<u64>,
    num_cycles: usize,
    largest: u32,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Permutation")
            .field("n", &self.len())
            .field("num_cycles", &self.num_cycles)
            .field("largest", &self.largest)
            .finish()
    }
}

impl PartialEq for Permutation {
    fn eq(&self, other: &Self) -> bool {
        self.succ == other.succ
    }
}

impl Eq for Permutation {}

impl Permutation {
    /// The identity on `n` points: `n` fixed points.
    pub fn identity(n: usize) -> Result<Self, PermError> {
        if n == 0 {
            return Err(PermError::Empty);
        }
        let ids: Vec<u32> = (0..n as u32).collect();
        let mut size_counts = vec![0u32; n + 1];
        size_counts[1] = n as u32;
        let mut size_bits = vec![0u64; n / 64 + 1];
        size_bits[0] = 1 << 1;
        Ok(Self {
            succ: ids.clone(),
            pred: ids,
            trees: SeqForest::singletons(n),
            size_counts,
            size_bits,
            num_cycles: n,
            largest: 1,
        })
    }

    /// Build from a successor map (`succ[x]` is the image of `x`).
    pub fn from_succ(succ: Vec<u32>) -> Result<Self, PermError> {
        let n = succ.len();
        if n == 0 {
            return Err(PermError::Empty);
        }
        let mut pred = vec![u32::MAX; n];
        for (x, &y) in succ.iter().enumerate() {
            if y as usize >= n || pred[y as usize] != u32::MAX {
                return Err(PermError::NotBijection);
            }
            pred[y as usize] = x as u32;
        }
        let mut seen = vec![false; n];
        let mut trees = SeqForest::singletons(n);
        let mut size_counts = vec![0u32; n + 1];
        let mut size_bits = vec![0u64; n / 64 + 1];
        let mut num_cycles = 0;
        let mut largest = 0;
        let mut orbit = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            orbit.clear();
            let mut x = start;
            loop {
                seen[x] = true;
                orbit.push(x as u32);
                x = succ[x] as usize;
                if x == start {
                    break;
                }
            }
            trees.build(&orbit);
            let len = orbit.len();
            size_counts[len] += 1;
            size_bits[len / 64] |= 1 << (len % 64);
            num_cycles += 1;
            largest = largest.max(len as u32);
        }
        Ok(Self {
            succ,
            pred,
            trees,
            size_counts,
            size_bits,
            num_cycles,
            largest,
        })
    }

    /// Build from disjoint cycles (0-based); unmentioned points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<u32>]) -> Result<Self, PermError> {
        if n == 0 {
            return Err(PermError::Empty);
        }
        let mut succ: Vec<u32> = (0..n as u32).collect();
        let mut seen = vec![false; n];
        for cycle in cycles {
            for &x in cycle {
                if x as usize >= n {
                    return Err(PermError::OutOfRange { element: x, n });
                }
                if seen[x as usize] {
                    return Err(PermError::DuplicateElement(x));
                }
                seen[x as usize] = true;
            }
            for (a, &x) in cycle.iter().enumerate() {
                succ[x as usize] = cycle[(a + 1) % cycle.len()];
            }
        }
        Self::from_succ(succ)
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    /// Image of `x`.
    pub fn image(&self, x: u32) -> u32 {
        self.succ[x as usize]
    }

    pub fn succ(&self) -> &[u32] {
        &self.succ
    }

    pub fn num_cycles(&self) -> usize {
        self.num_cycles
    }

    /// Largest cycle length Λ.
    pub fn largest(&self) -> u32 {
        self.largest
    }

    /// Label of the cycle through `x`. Labels are elements of their cycle
    /// and stay valid only until the next mutation.
    pub fn cycle_label(&self, x: u32) -> u32 {
        self.trees.root(x)
    }

    pub fn cycle_len_of(&self, x: u32) -> u32 {
        self.trees.tree_size(self.trees.root(x))
    }

    pub fn same_cycle(&self, x: u32, y: u32) -> bool {
        self.trees.root(x) == self.trees.root(y)
    }

    pub fn is_identity(&self) -> bool {
        self.num_cycles == self.len()
    }

    pub fn observables(&self) -> Observables {
        let size_multiset = self
            .size_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s as u32, c))
            .collect();
        Observables {
            num_cycles: self.num_cycles,
            largest: self.largest,
            size_multiset,
        }
    }

    fn check(&self, x: u32) -> Result<(), PermError> {
        if (x as usize) < self.len() {
            Ok(())
        } else {
            Err(PermError::OutOfRange {
                element: x,
                n: self.len(),
            })
        }
    }

    /// Apply the transposition `(i j)` after the current permutation.
    pub fn apply_transposition(&mut self, i: u32, j: u32) -> Result<StepEvent, PermError> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Err(PermError::DegenerateTransposition(i));
        }
        Ok(self.transpose(i, j))
    }

    /// Unchecked core of [`apply_transposition`](Self::apply_transposition).
    fn transpose(&mut self, i: u32, j: u32) -> StepEvent {
        let ri = self.trees.root(i);
        let rj = self.trees.root(j);
        if ri != rj {
            let size_i = self.trees.tree_size(ri);
            let size_j = self.trees.tree_size(rj);
            // [i … σ⁻¹(i)] ++ [j … σ⁻¹(j)] is the merged cycle in order.
            let a = self.trees.rotate_to(i);
            let b = self.trees.rotate_to(j);
            self.trees.join(a, b);
            self.relink(i, j);
            let merged = size_i + size_j;
            self.uncount(size_i);
            self.uncount(size_j);
            self.count(merged);
            self.num_cycles -= 1;
            self.largest = self.largest.max(merged);
            StepEvent::Coagulation { merged }
        } else {
            let total = self.trees.tree_size(ri);
            // [i … σ⁻¹(j)] and [j … σ⁻¹(i)] become the two pieces.
            let t = self.trees.rotate_to(i);
            let (d, _) = self.trees.index(j);
            self.trees.split(t, d);
            self.relink(i, j);
            let (size_i, size_j) = (d, total - d);
            self.uncount(total);
            self.count(size_i);
            self.count(size_j);
            self.num_cycles += 1;
            if total == self.largest && self.size_counts[total as usize] == 0 {
                self.largest = self.max_size_below(total);
            }
            StepEvent::Fragmentation {
                pieces: (size_i, size_j),
            }
        }
    }

    fn count(&mut self, s: u32) {
        let s = s as usize;
        self.size_counts[s] += 1;
        self.size_bits[s / 64] |= 1 << (s % 64);
    }

    fn uncount(&mut self, s: u32) {
        let s = s as usize;
        self.size_counts[s] -= 1;
        if self.size_counts[s] == 0 {
            self.size_bits[s / 64] &= !(1 << (s % 64));
        }
    }

    /// Largest cycle length `< s`.
    fn max_size_below(&self, s: u32) -> u32 {
        let s = s as usize - 1;
        let mut w = s / 64;
        let mut word = self.size_bits[w] & (u64::MAX >> (63 - s % 64));
        while word == 0 {
            w -= 1;
            word = self.size_bits[w];
        }
        (w * 64 + 63 - word.leading_zeros() as usize) as u32
    }

    /// `σ ← (i j) ∘ σ`: only the preimages of `i` and `j` change image.
    fn relink(&mut self, i: u32, j: u32) {
        let pi = self.pred[i as usize];
        let pj = self.pred[j as usize];
        self.succ[pi as usize] = j;
        self.succ[pj as usize] = i;
        self.pred[j as usize] = pi;
        self.pred[i as usize] = pj;
    }

    /// Apply the cycle `(x_1 … x_k)` (mapping `x_a ↦ x_{a+1}`) after the
    /// current permutation, as the product `(x_1 x_2)(x_2 x_3)…(x_{k-1} x_k)`.
    /// Returns the `k − 1` transposition events in application order.
    pub fn apply_cycle(&mut self, elems: &[u32]) -> Result<Vec<StepEvent>, PermError> {
        let mut events = Vec::with_capacity(elems.len().saturating_sub(1));
        self.apply_cycle_each(elems, |e| events.push(e))?;
        Ok(events)
    }

    /// Like [`apply_cycle`](Self::apply_cycle) but streams events to `sink`.
    pub fn apply_cycle_each<F: FnMut(StepEvent)>(
        &mut self,
        elems: &[u32],
        mut sink: F,
    ) -> Result<(), PermError> {
        for (a, &x) in elems.iter().enumerate() {
            self.check(x)?;
            if elems[..a].contains(&x) {
                return Err(PermError::DuplicateElement(x));
            }
        }
        // Rightmost factor acts first.
        for w in elems.windows(2).rev() {
            sink(self.transpose(w[0], w[1]));
        }
        Ok(())
    }

    /// Labels of cycles whose length `ℓ` satisfies `ℓ ≢ 1 (mod k − 1)`.
    pub fn residue_set(&self, k: u32) -> Result<Vec<u32>, PermError> {
        if k < 3 {
            return Err(PermError::ResidueModulus(k));
        }
        Ok((0..self.len() as u32)
            .filter(|&x| self.trees.is_root(x))
            .filter(|&x| (self.trees.tree_size(x) - 1) % (k - 1) != 0)
            .collect())
    }

    /// Length of the cycle carrying `label`, or 0 if `label` is not a current label.
    pub fn label_size(&self, label: u32) -> u32 {
        if (label as usize) < self.len() && self.trees.is_root(label) {
            self.trees.tree_size(label)
        } else {
            0
        }
    }

    /// All cycles, each starting at its minimum, sorted by minimum (0-based).
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(self.num_cycles);
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            loop {
                seen[x] = true;
                cycle.push(x as u32);
                x = self.succ[x] as usize;
                if x == start {
                    break;
                }
            }
            out.push(cycle);
        }
        out
    }

    /// One line per cycle, 1-based elements space-separated, cycles sorted by
    /// their minimum element.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for cycle in self.cycles() {
            let line: Vec<String> = cycle.iter().map(|x| (x + 1).to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Cycle notation with 1-based labels, fixed points omitted; `()` for the identity.
    pub fn to_cycle_notation(&self) -> String {
        let parts: Vec<String> = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect();
        if parts.is_empty() {
            "()".to_string()
        } else {
            parts.concat()
        }
    }

    /// Recompute every cached aggregate from `succ` and compare.
    pub fn audit(&self) -> Result<(), String> {
        let n = self.len();
        let fresh = Self::from_succ(self.succ.clone()).map_err(|e| e.to_string())?;
        for x in 0..n {
            if self.succ[self.pred[x] as usize] as usize != x {
                return Err(format!("pred/succ mismatch at {x}"));
            }
        }
        if fresh.num_cycles != self.num_cycles {
            return Err(format!(
                "num_cycles {} but recomputed {}",
                self.num_cycles, fresh.num_cycles
            ));
        }
        if fresh.largest != self.largest {
            return Err(format!(
                "largest {} but recomputed {}",
                self.largest, fresh.largest
            ));
        }
        if fresh.size_counts != self.size_counts {
            return Err("size multiset mismatch".into());
        }
        // Each tree must hold exactly one orbit, in cyclic order.
        let mut roots = 0;
        for x in 0..n as u32 {
            if !self.trees.is_root(x) {
                continue;
            }
            roots += 1;
            let seq = self.trees.sequence(x);
            for (a, &y) in seq.iter().enumerate() {
                if self.succ[y as usize] != seq[(a + 1) % seq.len()] {
                    return Err(format!("cycle order of {y} is stale"));
                }
            }
        }
        if roots != self.num_cycles {
            return Err(format!("{roots} trees for {} cycles", self.num_cycles));
        }
        let bits_ok = (0..=n).all(|s| (self.size_bits[s / 64] >> (s % 64) & 1 == 1) == (self.size_counts[s] > 0));
        if !bits_ok {
            return Err("size bitset out of sync".into());
        }
        Ok(())
    }
}

/// Parse cycle notation such as `"(1 2 3)(4 5)"` (1-based, spaces or commas)
/// into 0-based cycles. `"()"` and the empty string denote the identity.
pub fn parse_cycle_notation(text: &str) -> Result<Vec<Vec<u32>>, String> {
    let mut cycles = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| format!("expected '(' at {rest:?}"))?;
        let close = open
            .find(')')
            .ok_or_else(|| "unbalanced parenthesis".to_string())?;
        let body = &open[..close];
        let mut cycle = Vec::new();
        for tok in body.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: u32 = tok.parse().map_err(|_| format!("bad element {tok:?}"))?;
            if v == 0 {
                return Err("elements are 1-based".into());
            }
            cycle.push(v - 1);
        }
        if cycle.len() > 1 {
            cycles.push(cycle);
        }
        rest = open[close + 1..].trim_start();
    }
    Ok(cycles)
}
