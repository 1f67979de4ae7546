use serde::Serialize;

use super::check_users;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColoredEdge {
    /// Always `users[0] < users[1]`.
    pub users: [usize; 2],
    pub channel: usize,
    /// Relay module measuring this pair.
    pub bsm: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Topology {
    pub n_users: usize,
    pub channels: Vec<usize>,
    pub edges: Vec<ColoredEdge>,
}

impl Topology {
    pub fn channel_of(&self, u: usize, v: usize) -> Option<usize> {
        let key = [u.min(v), u.max(v)];
        self.edges.iter().find(|e| e.users == key).map(|e| e.channel)
    }

    pub fn bsm_count(&self) -> usize {
        self.edges.len()
    }

    /// No user has two incident edges on one channel.
    pub fn is_proper(&self) -> bool {
        let mut seen = vec![vec![false; self.channels.len()]; self.n_users];
        for e in &self.edges {
            for u in e.users {
                if std::mem::replace(&mut seen[u][e.channel], true) {
                    return false;
                }
            }
        }
        true
    }
}

/// Round-robin 1-factorization. For even `n`, user `n−1` sits at the hub
/// and round `r` pairs it with `r` while `r+k` meets `r−k` (mod `n−1`).
/// Odd `n` adds a phantom hub whose edges are dropped, leaving one idle
/// user per channel.
pub fn plan_full_mesh(n: usize) -> Result<Topology> {
    check_users(n)?;
    let m = if n.is_multiple_of(2) { n } else { n + 1 };
    let rounds = m - 1;
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for r in 0..rounds {
        let mut pairs = vec![(r, m - 1)];
        for k in 1..m / 2 {
            pairs.push(((r + k) % rounds, (r + rounds - k) % rounds));
        }
        for (a, b) in pairs {
            if a < n && b < n {
                edges.push(ColoredEdge { users: [a.min(b), a.max(b)], channel: r, bsm: 0 });
            }
        }
    }
    edges.sort_by_key(|e| e.users);
    for (i, e) in edges.iter_mut().enumerate() {
        e.bsm = i;
    }
    Ok(Topology { n_users: n, channels: (0..rounds).collect(), edges })
}
