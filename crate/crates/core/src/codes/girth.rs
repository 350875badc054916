use std::collections::VecDeque;
use std::fmt;

use crate::sparse::SparseBinMatrix;

/// Shortest cycle length of a Tanner graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Girth {
    Cycle(usize),
    Acyclic,
}

impl Girth {
    pub fn at_least(self, len: usize) -> bool {
        match self {
            Girth::Cycle(g) => g >= len,
            Girth::Acyclic => true,
        }
    }

    pub fn length(self) -> Option<usize> {
        match self {
            Girth::Cycle(g) => Some(g),
            Girth::Acyclic => None,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Cycle(g) => write!(f, "{g}"),
            Girth::Acyclic => f.write_str("acyclic"),
        }
    }
}

/// Exact girth by breadth-first search from every variable node.
///
/// Nodes `0..n_cols` are variables and `n_cols..` checks. Every cycle passes
/// through a variable node, so rooting the searches there is enough.
pub fn girth(h: &SparseBinMatrix) -> Girth {
    let nv = h.n_cols();
    let total = nv + h.n_rows();
    let mut dist = vec![u32::MAX; total];
    let mut parent = vec![u32::MAX; total];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    let mut best = usize::MAX;

    let neighbours = |u: usize| -> &[usize] {
        if u < nv {
            h.col(u)
        } else {
            h.row(u - nv)
        }
    };

    for root in 0..nv {
        if best == 4 {
            break;
        }
        for &t in &touched {
            dist[t] = u32::MAX;
            parent[t] = u32::MAX;
        }
        touched.clear();
        queue.clear();
        dist[root] = 0;
        touched.push(root);
        queue.push_back(root);
        'bfs: while let Some(u) = queue.pop_front() {
            let du = dist[u] as usize;
            // Any cycle closed from here has length >= 2*du + 2.
            if 2 * du + 2 >= best {
                break;
            }
            for &w in neighbours(u) {
                let w = if u < nv { w + nv } else { w };
                if dist[w] == u32::MAX {
                    dist[w] = du as u32 + 1;
                    parent[w] = u as u32;
                    touched.push(w);
                    queue.push_back(w);
                } else if parent[u] != w as u32 {
                    let len = du + dist[w] as usize + 1;
                    if len < best {
                        best = len;
                        if best == 4 {
                            break 'bfs;
                        }
                    }
                }
            }
        }
    }
    if best == usize::MAX {
        Girth::Acyclic
    } else {
        Girth::Cycle(best)
    }
}
