//! Reverse Cuthill-McKee ordering for banded factorizations.

use std::collections::VecDeque;

/// Lower and upper bandwidth of a pattern under `perm` (`perm[new] = old`).
pub fn bandwidths(n: usize, pattern: &[(usize, usize)], perm: Option<&[usize]>) -> (usize, usize) {
    let inv = perm.map(|p| {
        let mut inv = vec![0; n];
        for (new, &old) in p.iter().enumerate() {
            inv[old] = new;
        }
        inv
    });
    let (mut kl, mut ku) = (0, 0);
    for &(i, j) in pattern {
        let (i, j) = match &inv {
            Some(inv) => (inv[i], inv[j]),
            None => (i, j),
        };
        if i > j {
            kl = kl.max(i - j);
        } else {
            ku = ku.max(j - i);
        }
    }
    (kl, ku)
}

/// Symmetric RCM permutation of the structurally symmetrized pattern.
pub fn reverse_cuthill_mckee(n: usize, pattern: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in pattern {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, visited: &[bool]| -> (usize, usize) {
        // returns (eccentricity, a minimum-degree node in the last level)
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut q = VecDeque::from([start]);
        let mut last = start;
        while let Some(u) = q.pop_front() {
            last = u;
            for &v in &adj[u] {
                if !visited[v] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        let ecc = dist[last];
        let mut best = last;
        for u in 0..n {
            if dist[u] == ecc && deg[u] < deg[best] {
                best = u;
            }
        }
        (ecc, best)
    };

    while let Some(seed) = (0..n).filter(|&u| !visited[u]).min_by_key(|&u| deg[u]) {
        // pseudo-peripheral node
        let mut start = seed;
        let (mut ecc, mut cand) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let (e2, c2) = bfs_levels(cand, &visited);
            if e2 <= ecc {
                break;
            }
            start = cand;
            ecc = e2;
            cand = c2;
        }
        visited[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            order.push(u);
            let mut nb: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            nb.sort_by_key(|&v| (deg[v], v));
            for v in nb {
                visited[v] = true;
                q.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Pick RCM when it narrows the band, identity otherwise.
pub fn choose_ordering(n: usize, pattern: &[(usize, usize)]) -> (Option<Vec<usize>>, usize, usize) {
    let (kl0, ku0) = bandwidths(n, pattern, None);
    if kl0 + ku0 <= 2 {
        return (None, kl0, ku0);
    }
    let p = reverse_cuthill_mckee(n, pattern);
    let (kl, ku) = bandwidths(n, pattern, Some(&p));
    if kl + ku < kl0 + ku0 {
        (Some(p), kl, ku)
    } else {
        (None, kl0, ku0)
    }
}
