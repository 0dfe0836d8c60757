//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

/// All permutations of `0..n` as image arrays, in lexicographic order.
pub fn all_perms(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut p: Vec<u32> = (0..n as u32).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
}

/// Orbits of `p`, each listed from its smallest element.
pub fn orbits(p: &[u32]) -> Vec<Vec<u32>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            c.push(x as u32);
            x = p[x] as usize;
        }
        out.push(c);
    }
    out
}

pub fn is_even(p: &[u32]) -> bool {
    orbits(p).iter().map(|c| c.len() - 1).sum::<usize>() % 2 == 0
}

/// `x ↦ outer(inner(x))`.
pub fn compose(outer: &[u32], inner: &[u32]) -> Vec<u32> {
    inner.iter().map(|&y| outer[y as usize]).collect()
}

/// Image array of the cycle `(c_0 c_1 …)` on `n` points.
pub fn cycle_perm(n: usize, c: &[u32]) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    for (a, &x) in c.iter().enumerate() {
        p[x as usize] = c[(a + 1) % c.len()];
    }
    p
}

/// Components of a hypergraph on `n` vertices: `(vertex set, edge indices)`.
pub fn hyper_components(n: usize, edges: &[Vec<u32>]) -> Vec<(Vec<u32>, Vec<usize>)> {
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut verts = vec![s as u32];
        comp[s] = id;
        let mut frontier = vec![s as u32];
        while let Some(v) = frontier.pop() {
            for e in edges.iter().filter(|e| e.contains(&v)) {
                for &w in e {
                    if comp[w as usize] == usize::MAX {
                        comp[w as usize] = id;
                        verts.push(w);
                        frontier.push(w);
                    }
                }
            }
        }
        let es = (0..edges.len())
            .filter(|&i| comp[edges[i][0] as usize] == id)
            .collect();
        out.push((verts, es));
    }
    out
}

/// A connected component is a hypertree iff `Σ (|e| − 1) = |V| − 1`.
pub fn is_hypertree(verts: &[u32], edge_ids: &[usize], edges: &[Vec<u32>]) -> bool {
    let w: usize = edge_ids.iter().map(|&i| edges[i].len() - 1).sum();
    w + 1 == verts.len()
}

/// `k`-subsets of `0..m`, lexicographic.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..m {
            if m - x < k - cur.len() {
                break;
            }
            cur.push(x as u32);
            rec(x + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Number of labelled `d`-uniform hypertrees with `h` edges, by exhaustion.
pub fn count_hypertrees(d: usize, h: usize) -> u64 {
    let r = (d - 1) * h + 1;
    let all = subsets(r, d);
    let mut count = 0;
    for pick in subsets(all.len(), h) {
        let edges: Vec<Vec<u32>> = pick.iter().map(|&i| all[i as usize].clone()).collect();
        if hyper_components(r, &edges).len() == 1 {
            count += 1;
        }
    }
    count
}
