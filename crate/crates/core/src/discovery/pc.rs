use std::collections::BTreeMap;

use super::ci::CorrelationMatrix;
use super::graph::Cpdag;
use super::pdag::Pdag;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PcOutput {
    pub cpdag: Cpdag,
    /// Separating sets keyed by `(a, b)` with `a < b`.
    pub sepsets: BTreeMap<(usize, usize), Vec<usize>>,
    pub n_tests: usize,
    /// Some test fell back to a pseudo-inverse.
    pub pseudo_inverse_used: bool,
    /// Some v-structure or Meek orientation was dropped because it conflicted
    /// with an earlier one.
    pub orientation_conflicts: usize,
    /// The oriented pattern had no consistent extension; the output is the
    /// class of an acyclic completion of it instead.
    pub repaired: bool,
}

/// Lexicographic k-subsets of `items`.
fn combinations(items: &[usize], k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        if f(&buf) {
            return;
        }
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == pos - 1 + n - k {
            pos -= 1;
        }
        if pos == 0 {
            return;
        }
        idx[pos - 1] += 1;
        for q in pos..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// PC with Fisher-z tests: level-wise adjacency search (adjacency sets frozen
/// per level), v-structure orientation on unshielded triples, Meek closure.
pub fn pc_discover(data: &Dataset, alpha: f64) -> Result<PcOutput> {
    pc_on(
        CorrelationMatrix::from_dataset(data),
        data.schema().node_names(),
        alpha,
    )
}

/// [`pc_discover`] on named columns of equal length.
pub fn pc_discover_columns(names: Vec<String>, cols: &[Vec<f64>], alpha: f64) -> Result<PcOutput> {
    if names.len() != cols.len() {
        return Err(Error::InvalidConfig("one name per column".into()));
    }
    pc_on(CorrelationMatrix::from_columns(cols), names, alpha)
}

fn pc_on(corr: CorrelationMatrix, nodes: Vec<String>, alpha: f64) -> Result<PcOutput> {
    if corr.n() < 20 {
        return Err(Error::TooFewSamples(format!(
            "PC needs n >= 20, got {}",
            corr.n()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha {alpha} outside (0, 1)"
        )));
    }
    let p = corr.n_vars();

    let mut g = Pdag::complete_undirected(p);
    let mut sepsets = BTreeMap::new();
    let mut n_tests = 0;
    let mut pseudo_inverse_used = false;

    let mut level = 0;
    loop {
        let frozen: Vec<Vec<usize>> = (0..p).map(|v| g.adjacents(v)).collect();
        let mut any_candidate = false;
        for i in 0..p {
            for j in 0..p {
                if i == j || !g.adjacent(i, j) {
                    continue;
                }
                let others: Vec<usize> = frozen[i].iter().copied().filter(|&k| k != j).collect();
                if others.len() < level || corr.n() < level + 4 {
                    continue;
                }
                any_candidate = true;
                let mut removed = None;
                let mut err = None;
                combinations(&others, level, |cond| {
                    match corr.ci_test(i, j, cond, alpha) {
                        Ok(res) => {
                            n_tests += 1;
                            pseudo_inverse_used |= res.pseudo_inverse;
                            if res.independent {
                                removed = Some(cond.to_vec());
                                return true;
                            }
                            false
                        }
                        Err(e) => {
                            err = Some(e);
                            true
                        }
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                if let Some(s) = removed {
                    g.remove(i, j);
                    sepsets.insert((i.min(j), i.max(j)), s);
                }
            }
        }
        if !any_candidate {
            break;
        }
        level += 1;
    }

    // v-structures on unshielded triples a - c - b.
    let mut conflicts = 0;
    for a in 0..p {
        for b in a + 1..p {
            if g.adjacent(a, b) {
                continue;
            }
            let sep = sepsets.get(&(a, b)).cloned().unwrap_or_default();
            for c in 0..p {
                if c == a || c == b || !g.adjacent(a, c) || !g.adjacent(b, c) || sep.contains(&c) {
                    continue;
                }
                let ok_a = g.undirected(a, c) || g.directed(a, c);
                let ok_b = g.undirected(b, c) || g.directed(b, c);
                if !(ok_a && ok_b) {
                    conflicts += 1;
                    continue;
                }
                let mut trial = g.clone();
                trial.orient(a, c);
                trial.orient(b, c);
                if trial.directed_part_acyclic() {
                    g = trial;
                } else {
                    conflicts += 1;
                }
            }
        }
    }
    g.apply_meek_rules();
    let repaired = g.consistent_extension().is_none();
    if repaired {
        g = Pdag::cpdag_of_dag(&acyclic_completion(&g));
    }

    Ok(PcOutput {
        cpdag: Cpdag::from_pdag(nodes, &g),
        sepsets,
        n_tests,
        pseudo_inverse_used,
        orientation_conflicts: conflicts,
        repaired,
    })
}

/// Orients every undirected edge, in index order, the way that keeps the
/// directed part acyclic.
fn acyclic_completion(g: &Pdag) -> Pdag {
    let mut d = g.clone();
    for (a, b) in g.undirected_edges() {
        if d.orientation_creates_cycle(a, b) {
            d.orient(b, a);
        } else {
            d.orient(a, b);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        combinations(&[1, 4, 7, 9], 2, |c| {
            seen.push(c.to_vec());
            false
        });
        assert_eq!(
            seen,
            vec![
                vec![1, 4],
                vec![1, 7],
                vec![1, 9],
                vec![4, 7],
                vec![4, 9],
                vec![7, 9]
            ]
        );
        let mut empty = 0;
        combinations(&[1, 2], 0, |c| {
            assert!(c.is_empty());
            empty += 1;
            false
        });
        assert_eq!(empty, 1);
        let mut none = 0;
        combinations(&[1], 2, |_| {
            none += 1;
            false
        });
        assert_eq!(none, 0);
    }
}
