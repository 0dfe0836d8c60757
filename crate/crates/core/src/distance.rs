//! Cayley distance to the identity: the cycle-count lower bound, explicit
//! k-cycle factorizations, and an exhaustive BFS oracle for small `n`.
//!
//! Factor lists are products written left to right and read as functions,
//! so the leftmost factor is applied last. With `a → b` meaning `(a b …)`,
//!
//! ```text
//! (1 2 3 4 5) = (1 2 3)(3 4 5)
//! ```
//!
//! since 5 ↦ 3 under `(3 4 5)` and then 3 ↦ 1 under `(1 2 3)`.
//! [`FactorizationResult::compose`] rebuilds the permutation this way.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class::ConjugacyClass;
use crate::perm::{PermError, Permutation};

/// Largest ground set the BFS oracle accepts by default.
pub const DEFAULT_BFS_CAP: usize = 8;
const HARD_BFS_CAP: usize = 10;
const UNREACHED: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistanceError {
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("cycle length {0} has the wrong parity for this factorization")]
    Parity(usize),
    #[error("cycles overlap")]
    Overlap,
    #[error("permutation is not generated by {k}-cycles on {n} points")]
    NotGenerated { k: u32, n: usize },
    #[error("{k}-cycle factorization is supported for 2 <= k <= 6")]
    UnsupportedK { k: u32 },
    #[error("n = {n} exceeds the BFS cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("class moves {support} points but n = {n}")]
    ClassTooLarge { support: usize, n: usize },
}

type Result<T> = std::result::Result<T, DistanceError>;

/// `⌈(n − N(σ)) / K⌉`.
pub fn lower_bound(sigma: &Permutation, class: &ConjugacyClass) -> u64 {
    let deficit = (sigma.len() - sigma.num_cycles()) as u64;
    deficit.div_ceil(u64::from(class.weight()))
}

/// `|R_k(σ)|`: cycles whose length is not `1 mod (k − 1)`.
pub fn residue_count(sigma: &Permutation, k: u32) -> usize {
    let m = (k - 1) as usize;
    sigma.cycles().iter().filter(|c| (c.len() - 1) % m != 0).count()
}

/// `(i₁ … i_{2r+1}) = (i₁ i₂ i₃)(i₃ i₄ i₅)…`, `r` factors.
pub fn factor_odd_cycle(cycle: &[u32]) -> Result<Vec<Vec<u32>>> {
    if cycle.len() % 2 == 0 {
        return Err(DistanceError::Parity(cycle.len()));
    }
    Ok(cycle.windows(3).step_by(2).map(<[u32]>::to_vec).collect())
}

/// `(i₁ … i_{2r})(j₁ … j_{2m})` as `r + m` 3-cycles:
/// `(i₁ i₂ j₁)(i₂ j₁ j₂)` followed by the odd factorizations of
/// `(i₂ … i_{2r})` and `(j₂ … j_{2m})`.
pub fn factor_even_pair(a: &[u32], b: &[u32]) -> Result<Vec<Vec<u32>>> {
    for c in [a, b] {
        if c.len() % 2 == 1 || c.is_empty() {
            return Err(DistanceError::Parity(c.len()));
        }
    }
    if a.iter().any(|x| b.contains(x)) {
        return Err(DistanceError::Overlap);
    }
    let mut out = vec![vec![a[0], a[1], b[0]], vec![a[1], b[0], b[1]]];
    out.extend(factor_odd_cycle(&a[1..])?);
    out.extend(factor_odd_cycle(&b[1..])?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResult {
    pub k: u32,
    /// Product order: the leftmost factor is applied last.
    pub factors: Vec<Vec<u32>>,
    pub length: usize,
    /// `(n − N(σ)) / (k − 1)`.
    pub base: f64,
    /// `length − base`.
    pub correction: f64,
    /// `|R_k(σ)|`.
    pub residues: usize,
}

impl FactorizationResult {
    fn new(sigma: &Permutation, k: u32, factors: Vec<Vec<u32>>) -> Self {
        let base = (sigma.len() - sigma.num_cycles()) as f64 / f64::from(k - 1);
        let length = factors.len();
        Self {
            k,
            length,
            base,
            correction: length as f64 - base,
            residues: residue_count(sigma, k),
            factors,
        }
    }

    /// Achieved `C` in `length ≤ base + C |R_k|`, when there are residues.
    pub fn constant(&self) -> Option<f64> {
        (self.residues > 0).then(|| self.correction / self.residues as f64)
    }

    /// Multiply the factors back together on `n` points.
    pub fn compose(&self, n: usize) -> Result<Permutation> {
        let mut p = Permutation::identity(n)?;
        for f in self.factors.iter().rev() {
            p.apply_cycle(f)?;
        }
        Ok(p)
    }
}

/// Write `sigma` as a product of `k`-cycles.
///
/// `k = 3` uses the odd-cycle and even-pair factorizations, which give
/// exactly `½(n − N) + ½|R₃|` factors. Other `k` peel `k`-cycles off each
/// cycle via `(x₁ … x_L) = (x₁ … x_k)(x_k … x_L)` and solve the leftover
/// short cycles in small groups with an exact BFS table.
pub fn decompose_to_kcycles(sigma: &Permutation, k: u32) -> Result<FactorizationResult> {
    let n = sigma.len();
    if !(2..=6).contains(&k) {
        return Err(DistanceError::UnsupportedK { k });
    }
    let cycles: Vec<Vec<u32>> = sigma.cycles().into_iter().filter(|c| c.len() > 1).collect();
    if cycles.is_empty() {
        return Ok(FactorizationResult::new(sigma, k, Vec::new()));
    }
    if n < k as usize {
        return Err(DistanceError::NotGenerated { k, n });
    }
    let factors = if k == 3 {
        decompose_three(&cycles, n)?
    } else {
        decompose_general(sigma, &cycles, k)?
    };
    Ok(FactorizationResult::new(sigma, k, factors))
}

fn decompose_three(cycles: &[Vec<u32>], n: usize) -> Result<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    let mut evens = Vec::new();
    for c in cycles {
        if c.len() % 2 == 1 {
            out.extend(factor_odd_cycle(c)?);
        } else {
            evens.push(c);
        }
    }
    if evens.len() % 2 == 1 {
        return Err(DistanceError::NotGenerated { k: 3, n });
    }
    for pair in evens.chunks(2) {
        out.extend(factor_even_pair(pair[0], pair[1])?);
    }
    Ok(out)
}

fn decompose_general(sigma: &Permutation, cycles: &[Vec<u32>], k: u32) -> Result<Vec<Vec<u32>>> {
    let n = sigma.len();
    let k_us = k as usize;
    let mut out = Vec::new();
    let mut residuals: Vec<Vec<u32>> = Vec::new();
    for c in cycles {
        let mut rest: &[u32] = c;
        while rest.len() >= k_us {
            out.push(rest[..k_us].to_vec());
            rest = &rest[k_us - 1..];
        }
        if rest.len() > 1 {
            residuals.push(rest.to_vec());
        }
    }
    if residuals.is_empty() {
        return Ok(out);
    }

    // Units must each lie in the generated subgroup: for odd k, odd
    // permutations (even-length cycles) are paired up.
    let mut units: Vec<Vec<Vec<u32>>> = Vec::new();
    if k % 2 == 1 {
        let (odd, even): (Vec<_>, Vec<_>) = residuals.into_iter().partition(|c| c.len() % 2 == 0);
        if odd.len() % 2 == 1 {
            return Err(DistanceError::NotGenerated { k, n });
        }
        units.extend(even.into_iter().map(|c| vec![c]));
        let mut odd = odd.into_iter();
        while let (Some(a), Some(b)) = (odd.next(), odd.next()) {
            units.push(vec![a, b]);
        }
    } else {
        units.extend(residuals.into_iter().map(|c| vec![c]));
    }
    units.sort_by_key(|u| std::cmp::Reverse(u.iter().map(Vec::len).sum::<usize>()));

    // First-fit packing into groups small enough for the BFS table.
    let mut groups: Vec<Vec<u32>> = Vec::new();
    for u in units {
        let pts: Vec<u32> = u.into_iter().flatten().collect();
        match groups.iter_mut().find(|g| g.len() + pts.len() <= DEFAULT_BFS_CAP) {
            Some(g) => g.extend(pts),
            None => groups.push(pts),
        }
    }

    // Each group's word only has to fix points outside the group, so pads
    // may come from anywhere else; untouched points are preferred.
    let mut moved = vec![false; n];
    for g in &groups {
        for &x in g {
            moved[x as usize] = true;
        }
    }
    let residual_image = |x: u32| -> u32 {
        // Within a residual cycle (x_k … x_L) the successor agrees with σ,
        // except the last point, which returns to the residual's head.
        let y = sigma.image(x);
        if moved[y as usize] {
            y
        } else {
            let mut z = y;
            while !moved[z as usize] {
                z = sigma.image(z);
            }
            z
        }
    };
    for g in groups {
        let mut solved = false;
        for m in g.len().max(k_us)..=DEFAULT_BFS_CAP {
            let mut support = g.clone();
            let outside = |x: &u32| !g.contains(x);
            let pads = (0..n as u32)
                .filter(|&x| !moved[x as usize])
                .chain((0..n as u32).filter(|&x| moved[x as usize]))
                .filter(outside);
            support.extend(pads.take(m - g.len()));
            if support.len() < m {
                break;
            }
            let local: Vec<u8> = support
                .iter()
                .map(|&x| {
                    if g.contains(&x) {
                        support.iter().position(|&y| y == residual_image(x)).unwrap() as u8
                    } else {
                        support.iter().position(|&y| y == x).unwrap() as u8
                    }
                })
                .collect();
            let table = cycle_table(k, m);
            if let Some(word) = table.word(&local) {
                for gen in word {
                    out.push(gen.iter().map(|&i| support[i as usize]).collect());
                }
                solved = true;
                break;
            }
        }
        if !solved {
            return Err(DistanceError::NotGenerated { k, n });
        }
    }
    Ok(out)
}

/// `m!` ranks via the Lehmer code.
fn rank(p: &[u8]) -> usize {
    let m = p.len();
    let mut r = 0;
    for i in 0..m {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        r = r * (m - i) + smaller;
    }
    r
}

fn unrank(mut r: usize, m: usize) -> Vec<u8> {
    let mut digits = vec![0usize; m];
    for i in (0..m).rev() {
        let base = m - i;
        digits[i] = r % base;
        r /= base;
    }
    let mut pool: Vec<u8> = (0..m as u8).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

fn factorial(m: usize) -> usize {
    (1..=m).product()
}

fn cycle_type(p: &[u8]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut lens = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            len += 1;
        }
        if len > 1 {
            lens.push(len);
        }
    }
    lens.sort_unstable();
    lens
}

/// Breadth-first search of the Cayley graph of the subgroup of `S_m`
/// generated by one conjugacy class.
#[derive(Debug)]
pub struct CayleyBfs {
    m: usize,
    gens: Vec<Vec<u8>>,
    dist: Vec<u8>,
    parent: Vec<u16>,
}

impl CayleyBfs {
    /// Build the table for `class` acting on `m ≤ cap` points.
    pub fn new(class: &ConjugacyClass, m: usize, cap: usize) -> Result<Self> {
        let cap = cap.min(HARD_BFS_CAP);
        if m > cap {
            return Err(DistanceError::TooLarge { n: m, cap });
        }
        if class.support_size() > m {
            return Err(DistanceError::ClassTooLarge {
                support: class.support_size(),
                n: m,
            });
        }
        let mut want: Vec<usize> = class.cycle_lengths().into_iter().map(|l| l as usize).collect();
        want.sort_unstable();
        let total = factorial(m);
        let gens: Vec<Vec<u8>> = (0..total)
            .map(|r| unrank(r, m))
            .filter(|p| cycle_type(p) == want)
            .collect();
        let mut dist = vec![UNREACHED; total];
        let mut parent = vec![u16::MAX; total];
        let id: Vec<u8> = (0..m as u8).collect();
        dist[rank(&id)] = 0;
        let mut queue = VecDeque::from([id]);
        let mut next = vec![0u8; m];
        while let Some(p) = queue.pop_front() {
            let d = dist[rank(&p)];
            for (gi, g) in gens.iter().enumerate() {
                for x in 0..m {
                    next[x] = g[p[x] as usize];
                }
                let r = rank(&next);
                if dist[r] == UNREACHED {
                    dist[r] = d + 1;
                    parent[r] = gi as u16;
                    queue.push_back(next.clone());
                }
            }
        }
        Ok(Self { m, gens, dist, parent })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Distance of the permutation with images `p` (0-based), if reachable.
    pub fn distance_of(&self, p: &[u8]) -> Option<u32> {
        match self.dist[rank(p)] {
            UNREACHED => None,
            d => Some(u32::from(d)),
        }
    }

    pub fn distance(&self, sigma: &Permutation) -> Result<Option<u32>> {
        if sigma.len() != self.m {
            return Err(DistanceError::TooLarge { n: sigma.len(), cap: self.m });
        }
        let p: Vec<u8> = sigma.succ().iter().map(|&x| x as u8).collect();
        Ok(self.distance_of(&p))
    }

    /// A shortest word in product order, each generator given as one
    /// cycle of local points. Only meaningful for single-cycle classes.
    fn word(&self, p: &[u8]) -> Option<Vec<Vec<u8>>> {
        self.distance_of(p)?;
        let mut cur = p.to_vec();
        let mut word = Vec::new();
        let mut inv = vec![0u8; self.m];
        loop {
            let r = rank(&cur);
            if self.dist[r] == 0 {
                return Some(word);
            }
            let g = &self.gens[self.parent[r] as usize];
            let start = (0..self.m).find(|&x| g[x] as usize != x).unwrap();
            let mut cyc = vec![start as u8];
            let mut x = g[start];
            while x as usize != start {
                cyc.push(x);
                x = g[x as usize];
            }
            word.push(cyc);
            for (x, &y) in g.iter().enumerate() {
                inv[y as usize] = x as u8;
            }
            cur = cur.iter().map(|&y| inv[y as usize]).collect();
        }
    }

    /// `(rank, images, distance)` for every reachable permutation, by rank.
    pub fn reachable(&self) -> impl Iterator<Item = (usize, Vec<u8>, u32)> + '_ {
        self.dist
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != UNREACHED)
            .map(|(r, &d)| (r, unrank(r, self.m), u32::from(d)))
    }

    /// Number of elements at each distance, in order.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for &d in &self.dist {
            if d != UNREACHED {
                let d = d as usize;
                if out.len() <= d {
                    out.resize(d + 1, 0);
                }
                out[d] += 1;
            }
        }
        out
    }
}

fn cycle_table(k: u32, m: usize) -> Arc<CayleyBfs> {
    static TABLES: OnceLock<Mutex<HashMap<(u32, usize), Arc<CayleyBfs>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(Default::default);
    if let Some(t) = tables.lock().unwrap().get(&(k, m)) {
        return t.clone();
    }
    let t = Arc::new(
        CayleyBfs::new(&ConjugacyClass::k_cycles(k), m, DEFAULT_BFS_CAP).expect("m within cap"),
    );
    tables.lock().unwrap().entry((k, m)).or_insert(t).clone()
}

/// Exact Cayley distance from the identity, `None` when `sigma` lies
/// outside the subgroup generated by `class`.
pub fn bfs_distance(sigma: &Permutation, class: &ConjugacyClass, cap: usize) -> Result<Option<u32>> {
    CayleyBfs::new(class, sigma.len(), cap)?.distance(sigma)
}
