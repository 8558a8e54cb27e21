use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::pdag::Pdag;
use crate::error::{Error, Result};

fn check_nodes(nodes: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for n in nodes {
        if !seen.insert(n.as_str()) {
            return Err(Error::InvalidGraph(format!("duplicate node `{n}`")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawCpdag {
    nodes: Vec<String>,
    directed: Vec<(String, String)>,
    undirected: Vec<(String, String)>,
}

/// Completed partially directed acyclic graph over named nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCpdag", into = "RawCpdag")]
pub struct Cpdag {
    nodes: Vec<String>,
    directed: BTreeSet<(usize, usize)>,
    /// Stored as `(a, b)` with `a < b`.
    undirected: BTreeSet<(usize, usize)>,
}

impl Cpdag {
    pub fn new(
        nodes: Vec<String>,
        directed: impl IntoIterator<Item = (usize, usize)>,
        undirected: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        check_nodes(&nodes)?;
        let n = nodes.len();
        let directed: BTreeSet<_> = directed.into_iter().collect();
        let undirected: BTreeSet<_> = undirected
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        for &(a, b) in directed.iter().chain(&undirected) {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on `{}`", nodes[a])));
            }
        }
        for &(a, b) in &directed {
            let key = if a < b { (a, b) } else { (b, a) };
            if undirected.contains(&key) || directed.contains(&(b, a)) {
                return Err(Error::InvalidGraph(format!(
                    "pair ({}, {}) has conflicting edges",
                    nodes[a], nodes[b]
                )));
            }
        }
        let g = Self {
            nodes,
            directed,
            undirected,
        };
        if !g.to_pdag().directed_part_acyclic() {
            return Err(Error::InvalidGraph("directed part has a cycle".into()));
        }
        Ok(g)
    }

    pub(crate) fn from_pdag(nodes: Vec<String>, g: &Pdag) -> Self {
        Self {
            nodes,
            directed: g.directed_edges().into_iter().collect(),
            undirected: g.undirected_edges().into_iter().collect(),
        }
    }

    pub(crate) fn to_pdag(&self) -> Pdag {
        let mut g = Pdag::empty(self.nodes.len());
        for &(a, b) in &self.directed {
            g.add_directed(a, b);
        }
        for &(a, b) in &self.undirected {
            g.add_undirected(a, b);
        }
        g
    }

    /// The equivalence-class representative of a DAG.
    pub fn of_dag(dag: &Dag) -> Self {
        Self::from_pdag(dag.nodes.clone(), &Pdag::cpdag_of_dag(&dag.to_pdag()))
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn directed(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    pub fn undirected(&self) -> &BTreeSet<(usize, usize)> {
        &self.undirected
    }

    pub fn n_edges(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.directed.contains(&(a, b))
            || self.directed.contains(&(b, a))
            || self.undirected.contains(&key)
    }

    /// Unordered adjacent pairs `(a, b)`, `a < b`.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.directed
            .iter()
            .map(|&(a, b)| if a < b { (a, b) } else { (b, a) })
            .chain(self.undirected.iter().copied())
            .collect()
    }

    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        self.to_pdag().v_structures()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }
}

impl TryFrom<RawCpdag> for Cpdag {
    type Error = Error;

    fn try_from(raw: RawCpdag) -> Result<Self> {
        let idx = |name: &str| {
            raw.nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::InvalidGraph(format!("unknown node `{name}`")))
        };
        let pairs = |es: &[(String, String)]| -> Result<Vec<(usize, usize)>> {
            es.iter().map(|(a, b)| Ok((idx(a)?, idx(b)?))).collect()
        };
        let directed = pairs(&raw.directed)?;
        let undirected = pairs(&raw.undirected)?;
        Cpdag::new(raw.nodes.clone(), directed, undirected)
    }
}

impl From<Cpdag> for RawCpdag {
    fn from(g: Cpdag) -> Self {
        let named = |es: &BTreeSet<(usize, usize)>| {
            es.iter()
                .map(|&(a, b)| (g.nodes[a].clone(), g.nodes[b].clone()))
                .collect()
        };
        RawCpdag {
            directed: named(&g.directed),
            undirected: named(&g.undirected),
            nodes: g.nodes.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawDag {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
}

/// Fully oriented acyclic graph with a deterministic topological order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDag", into = "RawDag")]
pub struct Dag {
    nodes: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
    topo_order: Vec<usize>,
}

impl TryFrom<RawDag> for Dag {
    type Error = Error;

    fn try_from(raw: RawDag) -> Result<Self> {
        let idx = |name: &str| {
            raw.nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::InvalidGraph(format!("unknown node `{name}`")))
        };
        let edges = raw
            .edges
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Dag::new(raw.nodes.clone(), edges)
    }
}

impl From<Dag> for RawDag {
    fn from(d: Dag) -> Self {
        RawDag {
            edges: d
                .edges
                .iter()
                .map(|&(a, b)| (d.nodes[a].clone(), d.nodes[b].clone()))
                .collect(),
            nodes: d.nodes,
        }
    }
}

impl Dag {
    pub fn new(
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        check_nodes(&nodes)?;
        let n = nodes.len();
        let edges: BTreeSet<_> = edges.into_iter().collect();
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on `{}`", nodes[a])));
            }
            if edges.contains(&(b, a)) {
                return Err(Error::InvalidGraph(format!(
                    "two-cycle between `{}` and `{}`",
                    nodes[a], nodes[b]
                )));
            }
        }
        // Kahn's algorithm, always taking the lowest-index ready node.
        let mut indeg = vec![0usize; n];
        for &(_, b) in &edges {
            indeg[b] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut topo_order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            topo_order.push(v);
            for &(a, b) in edges.range((v, 0)..(v + 1, 0)) {
                debug_assert_eq!(a, v);
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.insert(b);
                }
            }
        }
        if topo_order.len() != n {
            return Err(Error::InvalidGraph("graph has a directed cycle".into()));
        }
        Ok(Self {
            nodes,
            edges,
            topo_order,
        })
    }

    pub(crate) fn from_pdag(nodes: Vec<String>, g: &Pdag) -> Result<Self> {
        if !g.undirected_edges().is_empty() {
            return Err(Error::InvalidGraph("pattern has undirected edges".into()));
        }
        Dag::new(nodes, g.directed_edges())
    }

    pub(crate) fn to_pdag(&self) -> Pdag {
        let mut g = Pdag::empty(self.nodes.len());
        for &(a, b) in &self.edges {
            g.add_directed(a, b);
        }
        g
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo_order
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    /// Parents of `v` in ascending index order.
    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, b)| b == v)
            .map(|&(a, _)| a)
            .collect()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        self.to_pdag().v_structures()
    }

    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect()
    }
}

/// v-structures `(a, c, b)` meaning `a -> c <- b`, with `a < b`.
pub fn v_structures(dag: &Dag) -> Vec<(usize, usize, usize)> {
    dag.v_structures()
}

/// Number of node pairs whose edge differs: a reversed edge counts once, an
/// edge present in only one graph counts once.
pub fn edge_diff(d1: &Dag, d2: &Dag) -> Result<usize> {
    let names1: BTreeSet<&String> = d1.nodes.iter().collect();
    let names2: BTreeSet<&String> = d2.nodes.iter().collect();
    if names1 != names2 || d1.nodes.len() != d2.nodes.len() {
        return Err(Error::NodeSetMismatch);
    }
    // Compare by name so node order may differ.
    let named = |d: &Dag| -> BTreeSet<(String, String)> {
        d.edges
            .iter()
            .map(|&(a, b)| (d.nodes[a].clone(), d.nodes[b].clone()))
            .collect()
    };
    let e1 = named(d1);
    let e2 = named(d2);
    let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
    for (a, b) in e1.symmetric_difference(&e2) {
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        pairs.insert(key);
    }
    Ok(pairs.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn dag_topo_order_is_lowest_index_first() {
        let d = Dag::new(names(4), [(2, 0), (3, 1), (0, 1)]).unwrap();
        assert_eq!(d.topo_order(), &[2, 0, 3, 1]);
        assert_eq!(d.parents(1), vec![0, 3]);
    }

    #[test]
    fn dag_rejects_cycles() {
        assert!(Dag::new(names(3), [(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(Dag::new(names(2), [(0, 1), (1, 0)]).is_err());
        assert!(Dag::new(names(2), [(0, 0)]).is_err());
    }

    #[test]
    fn cpdag_rejects_conflicts() {
        assert!(Cpdag::new(names(2), [(0, 1)], [(0, 1)]).is_err());
        assert!(Cpdag::new(names(3), [(0, 1), (1, 2), (2, 0)], []).is_err());
        assert!(Cpdag::new(names(3), [(0, 1)], [(2, 1)]).is_ok());
    }

    #[test]
    fn edge_diff_cases() {
        let a = Dag::new(names(3), [(0, 1), (1, 2)]).unwrap();
        assert_eq!(edge_diff(&a, &a).unwrap(), 0);
        let reversed = Dag::new(names(3), [(1, 0), (1, 2)]).unwrap();
        assert_eq!(edge_diff(&a, &reversed).unwrap(), 1);
        let missing = Dag::new(names(3), [(1, 2)]).unwrap();
        assert_eq!(edge_diff(&a, &missing).unwrap(), 1);
        let both = Dag::new(names(3), [(1, 0), (2, 1), (2, 0)]).unwrap();
        assert_eq!(edge_diff(&a, &both).unwrap(), 3);
        let other = Dag::new(names(4), [(0, 1)]).unwrap();
        assert!(matches!(edge_diff(&a, &other), Err(Error::NodeSetMismatch)));
    }

    #[test]
    fn dag_json_roundtrip() {
        let d = Dag::new(names(3), [(0, 2), (1, 2)]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: Dag = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn cpdag_of_collider_keeps_orientation() {
        let d = Dag::new(names(3), [(0, 2), (1, 2)]).unwrap();
        let c = Cpdag::of_dag(&d);
        assert_eq!(c.directed().len(), 2);
        assert!(c.undirected().is_empty());
    }
}
