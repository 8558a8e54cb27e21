use super::graph::{Cpdag, Dag};
use super::pdag::Pdag;
use crate::error::{Error, Result};

pub const DEFAULT_EXTENSION_CAP: usize = 256;

/// All consistent extensions of `g` with the default cap.
pub fn enumerate_dags(g: &Cpdag) -> Result<Vec<Dag>> {
    enumerate_dags_with_cap(g, DEFAULT_EXTENSION_CAP)
}

/// All acyclic orientations of the undirected edges that create no
/// v-structure beyond the CPDAG's own, in lexicographic order: undirected
/// edges `(a, b)`, `a < b`, are decided in sorted order with `a -> b` before
/// `b -> a`.
pub fn enumerate_dags_with_cap(g: &Cpdag, cap: usize) -> Result<Vec<Dag>> {
    let base = g.to_pdag();
    let target_v = base.v_structures();
    let edges: Vec<(usize, usize)> = g.undirected().iter().copied().collect();
    let mut out = Vec::new();
    let mut work = base.clone();
    let mut search = Search {
        edges: &edges,
        target_v: &target_v,
        nodes: g.nodes(),
        out: &mut out,
        cap,
    };
    search.recurse(&mut work, 0)?;
    if out.is_empty() {
        return Err(Error::NoExtension);
    }
    Ok(out)
}

struct Search<'a> {
    edges: &'a [(usize, usize)],
    target_v: &'a [(usize, usize, usize)],
    nodes: &'a [String],
    out: &'a mut Vec<Dag>,
    cap: usize,
}

impl Search<'_> {
    fn recurse(&mut self, g: &mut Pdag, k: usize) -> Result<()> {
        if k == self.edges.len() {
            if g.v_structures() == self.target_v {
                if self.out.len() == self.cap {
                    return Err(Error::TooManyExtensions { cap: self.cap });
                }
                self.out.push(Dag::from_pdag(self.nodes.to_vec(), g)?);
            }
            return Ok(());
        }
        let (a, b) = self.edges[k];
        for (x, y) in [(a, b), (b, a)] {
            if g.orientation_creates_cycle(x, y) {
                continue;
            }
            g.orient(x, y);
            if !self.creates_new_collider(g, y) {
                self.recurse(g, k + 1)?;
            }
            g.add_undirected(a, b);
        }
        Ok(())
    }

    /// A fully directed collider at `c` that the CPDAG does not contain.
    fn creates_new_collider(&self, g: &Pdag, c: usize) -> bool {
        let pa = g.parents(c);
        for (i, &a) in pa.iter().enumerate() {
            for &b in &pa[i + 1..] {
                if !g.adjacent(a, b) && !self.target_v.contains(&(a.min(b), c, a.max(b))) {
                    return true;
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn directed_cpdag_yields_itself() {
        let c = Cpdag::new(names(3), [(0, 2), (1, 2)], []).unwrap();
        let dags = enumerate_dags(&c).unwrap();
        assert_eq!(dags.len(), 1);
        assert_eq!(
            dags[0].edges().iter().copied().collect::<Vec<_>>(),
            vec![(0, 2), (1, 2)]
        );
    }

    #[test]
    fn chain_has_three_members_in_order() {
        let c = Cpdag::new(names(3), [], [(0, 1), (1, 2)]).unwrap();
        let dags = enumerate_dags(&c).unwrap();
        let edges: Vec<Vec<(usize, usize)>> = dags
            .iter()
            .map(|d| d.edges().iter().copied().collect())
            .collect();
        assert_eq!(
            edges,
            vec![
                vec![(0, 1), (1, 2)],
                vec![(1, 0), (1, 2)],
                vec![(1, 0), (2, 1)],
            ]
        );
    }

    #[test]
    fn cap_is_enforced() {
        let c = Cpdag::new(names(3), [], [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(enumerate_dags(&c).unwrap().len(), 6);
        assert!(matches!(
            enumerate_dags_with_cap(&c, 5),
            Err(Error::TooManyExtensions { cap: 5 })
        ));
    }

    #[test]
    fn empty_graph_has_one_member() {
        let c = Cpdag::new(names(4), [], []).unwrap();
        assert_eq!(enumerate_dags(&c).unwrap().len(), 1);
    }
}
