use std::collections::VecDeque;

use super::ProblemError;

/// Undirected graph on agents `0..n` without self loops.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Topology {
    /// Edges are normalized to `(min, max)`, sorted and deduplicated.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, ProblemError> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(ProblemError::Topology(format!("self loop at agent {a}")));
            }
            if a >= n || b >= n {
                return Err(ProblemError::Topology(format!(
                    "edge ({a}, {b}) references an agent outside 0..{n}"
                )));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &norm {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for v in &mut neighbors {
            v.sort_unstable();
        }
        Ok(Topology {
            n,
            edges: norm,
            neighbors,
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        Self::new(n, &edges).expect("complete graph is well formed")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|b| (b - 1, b)).collect();
        Self::new(n, &edges).expect("path graph is well formed")
    }

    /// Agent 0 is the hub.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|b| (0, b)).collect();
        Self::new(n, &edges).expect("star graph is well formed")
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor set `V_i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Breadth-first search from agent 0. The empty graph counts as
    /// connected.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_is_connected() {
        let t = Topology::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(t.is_connected());
        assert_eq!(t.neighbors(1), &[0, 2]);
        assert!(!t.are_adjacent(0, 2));
    }

    #[test]
    fn disconnected_and_malformed() {
        assert!(!Topology::new(3, &[(0, 1)]).unwrap().is_connected());
        assert!(Topology::new(2, &[(1, 1)]).is_err());
        assert!(Topology::new(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn normalizes_edges() {
        let t = Topology::new(3, &[(2, 0), (0, 2), (1, 0)]).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(Topology::complete(4).edges().len(), 6);
        assert_eq!(Topology::star(4).degree(0), 3);
    }
}
