//! Conjugacy classes of the symmetric group and uniform sampling from them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("conjugacy class has no non-trivial cycle")]
    Trivial,
    #[error("class moves {support} points but n = {n}")]
    TooSmall { support: usize, n: usize },
    #[error("cannot parse class spec {0:?} (expected e.g. \"k2=1,k3=0\")")]
    Parse(String),
}

/// A cycle type `(k_2, …, k_J)`: `k_j` cycles of length `j`, remaining points fixed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct ConjugacyClass {
    /// `counts[j - 2] = k_j`; the last entry is non-zero.
    counts: Vec<u32>,
}

impl TryFrom<Vec<u32>> for ConjugacyClass {
    type Error = ClassError;

    fn try_from(counts: Vec<u32>) -> Result<Self, Self::Error> {
        Self::new(counts)
    }
}

impl From<ConjugacyClass> for Vec<u32> {
    fn from(c: ConjugacyClass) -> Self {
        c.counts
    }
}

impl ConjugacyClass {
    /// `counts[0] = k_2`, `counts[1] = k_3`, …
    pub fn new(mut counts: Vec<u32>) -> Result<Self, ClassError> {
        while counts.last() == Some(&0) {
            counts.pop();
        }
        if counts.is_empty() {
            return Err(ClassError::Trivial);
        }
        Ok(Self { counts })
    }

    pub fn transpositions() -> Self {
        Self { counts: vec![1] }
    }

    /// Single `k`-cycles, `k ≥ 2`.
    pub fn k_cycles(k: u32) -> Self {
        assert!(k >= 2, "k-cycles need k >= 2");
        let mut counts = vec![0; k as usize - 1];
        counts[k as usize - 2] = 1;
        Self { counts }
    }

    /// `k_j` for `j ≥ 2`.
    pub fn count(&self, j: u32) -> u32 {
        if j < 2 {
            return 0;
        }
        self.counts.get(j as usize - 2).copied().unwrap_or(0)
    }

    /// Largest cycle length `J`.
    pub fn max_len(&self) -> u32 {
        self.counts.len() as u32 + 1
    }

    /// `(j, k_j)` pairs with `k_j > 0`, in increasing `j`.
    pub fn parts(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| (i as u32 + 2, k))
    }

    /// `|Γ| = Σ j k_j`, the number of points moved.
    pub fn support_size(&self) -> usize {
        self.parts().map(|(j, k)| (j * k) as usize).sum()
    }

    /// `K = Σ (j − 1) k_j`, transposition-equivalents per step.
    pub fn weight(&self) -> u32 {
        self.parts().map(|(j, k)| (j - 1) * k).sum()
    }

    /// `Σ j (j − 1) k_j`, the mean offspring rate per unit time.
    pub fn branching_rate(&self) -> f64 {
        self.parts().map(|(j, k)| f64::from(j * (j - 1) * k)).sum()
    }

    /// `t_c = (Σ j (j − 1) k_j)^{-1}`.
    pub fn critical_time(&self) -> f64 {
        1.0 / self.branching_rate()
    }

    /// Number of non-trivial cycles per step.
    pub fn num_parts(&self) -> usize {
        self.counts.iter().map(|&k| k as usize).sum()
    }

    /// True when every element of the class is an even permutation.
    pub fn is_even(&self) -> bool {
        self.parts().map(|(j, k)| (j - 1) * k).sum::<u32>() % 2 == 0
    }

    /// `Some(k)` when the class is the single `k`-cycles.
    pub fn as_single_cycle(&self) -> Option<u32> {
        if self.num_parts() == 1 {
            Some(self.max_len())
        } else {
            None
        }
    }

    /// Cycle lengths of one step, in decreasing order.
    pub fn cycle_lengths(&self) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.num_parts());
        for (j, k) in self.parts().collect::<Vec<_>>().into_iter().rev() {
            v.extend(std::iter::repeat_n(j, k as usize));
        }
        v
    }

    /// `n! / ((n − |Γ|)! Π_j j^{k_j} k_j!)`.
    pub fn class_size(&self, n: usize) -> Result<BigUint, ClassError> {
        let support = self.support_size();
        if n < support {
            return Err(ClassError::TooSmall { support, n });
        }
        let mut num = BigUint::one();
        for x in (n - support + 1)..=n {
            num *= BigUint::from(x);
        }
        let mut den = BigUint::one();
        for (j, k) in self.parts() {
            for m in 1..=k {
                den *= BigUint::from(j) * BigUint::from(m);
            }
        }
        Ok(num / den)
    }

    /// Draw a uniform element of the class in `S_n`; cycles in decreasing
    /// length order, each starting at its minimum element (0-based).
    pub fn sample_step<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<u32>>, ClassError> {
        let mut flat = Vec::new();
        self.sample_into(n, rng, &mut flat)?;
        let mut out = Vec::with_capacity(self.num_parts());
        let mut at = 0;
        for len in self.cycle_lengths() {
            out.push(flat[at..at + len as usize].to_vec());
            at += len as usize;
        }
        Ok(out)
    }

    /// Allocation-free form of [`sample_step`](Self::sample_step): writes the
    /// cycles back to back into `buf`, in the order of [`cycle_lengths`](Self::cycle_lengths).
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        buf: &mut Vec<u32>,
    ) -> Result<(), ClassError> {
        let support = self.support_size();
        if n < support {
            return Err(ClassError::TooSmall { support, n });
        }
        buf.clear();
        if 2 * support <= n {
            // Ordered sample of distinct points by rejection.
            while buf.len() < support {
                let x = rng.random_range(0..n as u32);
                if !buf.contains(&x) {
                    buf.push(x);
                }
            }
        } else {
            // Dense case: partial Fisher-Yates.
            let mut pool: Vec<u32> = (0..n as u32).collect();
            for a in 0..support {
                let b = rng.random_range(a..n);
                pool.swap(a, b);
            }
            buf.extend_from_slice(&pool[..support]);
        }
        // An ordered sample cut into consecutive blocks is uniform on the
        // class; rotating each block to start at its minimum fixes the
        // representation without changing the permutation.
        let mut at = 0;
        for (j, k) in self.parts().collect::<Vec<_>>().into_iter().rev() {
            for _ in 0..k {
                let block = &mut buf[at..at + j as usize];
                let (argmin, _) = block
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &x)| x)
                    .expect("non-empty block");
                block.rotate_left(argmin);
                at += j as usize;
            }
        }
        Ok(())
    }
}

impl fmt::Display for ConjugacyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, k)| format!("k{}={}", i + 2, k))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for ConjugacyClass {
    type Err = ClassError;

    /// Accepts `"k2=1,k3=0"` style specs.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ClassError::Parse(s.to_string());
        let mut counts: Vec<u32> = Vec::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(err)?;
            let j: usize = key
                .trim()
                .strip_prefix('k')
                .and_then(|d| d.parse().ok())
                .ok_or_else(err)?;
            if j < 2 {
                return Err(err());
            }
            let k: u32 = value.trim().parse().map_err(|_| err())?;
            if counts.len() < j - 1 {
                counts.resize(j - 1, 0);
            }
            counts[j - 2] = k;
        }
        Self::new(counts)
    }
}
