use std::cell::RefCell;
use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::graph::Cpdag;
use super::pdag::Pdag;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Decomposable Gaussian BIC: `-n ln(RSS/n) - ln(n) (|parents| + 1)` per node.
#[derive(Debug)]
pub struct BicScorer {
    n: usize,
    cov: DMatrix<f64>,
    cache: RefCell<HashMap<(usize, u64), f64>>,
}

impl BicScorer {
    pub fn from_dataset(data: &Dataset) -> Self {
        let p = data.d() + 1;
        let cols: Vec<Vec<f64>> = (0..p).map(|k| data.node_column(k)).collect();
        Self::from_columns(&cols)
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let p = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        let means: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().sum::<f64>() / n.max(1) as f64)
            .collect();
        let mut cov = DMatrix::zeros(p, p);
        for a in 0..p {
            for b in a..p {
                let s: f64 = cols[a]
                    .iter()
                    .zip(&cols[b])
                    .map(|(x, y)| (x - means[a]) * (y - means[b]))
                    .sum::<f64>()
                    / n.max(1) as f64;
                cov[(a, b)] = s;
                cov[(b, a)] = s;
            }
        }
        Self {
            n,
            cov,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.cov.nrows()
    }

    /// Residual variance (RSS / n) of regressing `node` on `parents` with intercept.
    pub fn residual_variance(&self, node: usize, parents: &[usize]) -> f64 {
        let var = self.cov[(node, node)];
        if parents.is_empty() {
            return var;
        }
        let k = parents.len();
        let spp = DMatrix::from_fn(k, k, |a, b| self.cov[(parents[a], parents[b])]);
        let spy = DVector::from_fn(k, |a, _| self.cov[(parents[a], node)]);
        let beta = match spp.clone().cholesky() {
            Some(ch) => ch.solve(&spy),
            None => match spp.pseudo_inverse(1e-12) {
                Ok(pinv) => pinv * &spy,
                Err(_) => DVector::zeros(k),
            },
        };
        (var - spy.dot(&beta)).max(0.0)
    }

    pub fn local_score(&self, node: usize, parents: &[usize]) -> f64 {
        let mask = parents.iter().fold(0u64, |m, &p| m | (1 << p));
        if let Some(&s) = self.cache.borrow().get(&(node, mask)) {
            return s;
        }
        let mut sorted = parents.to_vec();
        sorted.sort_unstable();
        let n = self.n as f64;
        // Floor keeps deterministic relations finite.
        let rv = self.residual_variance(node, &sorted).max(1e-300);
        let score = -n * rv.ln() - n.ln() * (sorted.len() as f64 + 1.0);
        self.cache.borrow_mut().insert((node, mask), score);
        score
    }

    pub fn dag_score(&self, parents: &[Vec<usize>]) -> f64 {
        parents
            .iter()
            .enumerate()
            .map(|(v, pa)| self.local_score(v, pa))
            .sum()
    }
}

fn members(mask: u64, pool: &[usize]) -> Vec<usize> {
    pool.iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &v)| v)
        .collect()
}

fn union_sorted(parts: &[&[usize]]) -> Vec<usize> {
    let mut v: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Largest subset pool enumerated exhaustively by an operator search.
const MAX_SUBSET_POOL: usize = 16;

#[derive(Debug, Clone)]
struct Insert {
    x: usize,
    y: usize,
    t: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Delete {
    x: usize,
    y: usize,
    h: Vec<usize>,
}

fn best_insert(g: &Pdag, scorer: &BicScorer) -> Option<(f64, Insert)> {
    let p = g.n();
    let mut best: Option<(f64, Insert)> = None;
    for x in 0..p {
        for y in 0..p {
            if x == y || g.adjacent(x, y) {
                continue;
            }
            let nbrs = g.neighbors(y);
            let t0: Vec<usize> = nbrs
                .iter()
                .copied()
                .filter(|&t| !g.adjacent(t, x))
                .collect();
            let na: Vec<usize> = nbrs.iter().copied().filter(|&t| g.adjacent(t, x)).collect();
            let pa = g.parents(y);
            let pool = &t0[..t0.len().min(MAX_SUBSET_POOL)];
            for mask in 0..(1u64 << pool.len()) {
                let t = members(mask, pool);
                let na_t = union_sorted(&[&na, &t]);
                if !g.is_clique(&na_t) {
                    continue;
                }
                let mut blocked = vec![false; p];
                for &v in &na_t {
                    blocked[v] = true;
                }
                if g.semi_directed_path(y, x, &blocked) {
                    continue;
                }
                let base = union_sorted(&[&na_t, &pa]);
                let with_x = union_sorted(&[&base, &[x]]);
                let delta = scorer.local_score(y, &with_x) - scorer.local_score(y, &base);
                if best.as_ref().is_none_or(|(b, _)| delta > *b) {
                    best = Some((delta, Insert { x, y, t }));
                }
            }
        }
    }
    best
}

fn best_delete(g: &Pdag, scorer: &BicScorer) -> Option<(f64, Delete)> {
    let p = g.n();
    let mut best: Option<(f64, Delete)> = None;
    for x in 0..p {
        for y in 0..p {
            if x == y || !(g.directed(x, y) || g.undirected(x, y)) {
                continue;
            }
            let na: Vec<usize> = g
                .neighbors(y)
                .into_iter()
                .filter(|&h| h != x && g.adjacent(h, x))
                .collect();
            let pa = g.parents(y);
            let pool = &na[..na.len().min(MAX_SUBSET_POOL)];
            for mask in 0..(1u64 << pool.len()) {
                let h = members(mask, pool);
                let rest: Vec<usize> = na.iter().copied().filter(|v| !h.contains(v)).collect();
                if !g.is_clique(&rest) {
                    continue;
                }
                let base: Vec<usize> = union_sorted(&[&rest, &pa])
                    .into_iter()
                    .filter(|&v| v != x)
                    .collect();
                let with_x = union_sorted(&[&base, &[x]]);
                let delta = scorer.local_score(y, &base) - scorer.local_score(y, &with_x);
                if best.as_ref().is_none_or(|(b, _)| delta > *b) {
                    best = Some((delta, Delete { x, y, h }));
                }
            }
        }
    }
    best
}

fn complete(g: &Pdag) -> Option<Pdag> {
    let ext = g.consistent_extension()?;
    Some(Pdag::cpdag_of_dag(&ext))
}

/// Greedy equivalence search: forward insertions, then backward deletions,
/// each step taking the best strictly improving operator.
pub fn ges_discover(data: &Dataset) -> Result<Cpdag> {
    check_size(data.n(), data.d() + 1)?;
    let scorer = BicScorer::from_dataset(data);
    let g = ges_with_scorer(&scorer);
    Ok(Cpdag::from_pdag(data.schema().node_names(), &g))
}

/// [`ges_discover`] on named columns of equal length.
pub fn ges_discover_columns(names: Vec<String>, cols: &[Vec<f64>]) -> Result<Cpdag> {
    if names.len() != cols.len() {
        return Err(Error::InvalidConfig("one name per column".into()));
    }
    check_size(cols.first().map_or(0, Vec::len), cols.len())?;
    let g = ges_with_scorer(&BicScorer::from_columns(cols));
    Ok(Cpdag::from_pdag(names, &g))
}

fn check_size(n: usize, p: usize) -> Result<()> {
    if n < 20 {
        return Err(Error::TooFewSamples(format!("GES needs n >= 20, got {n}")));
    }
    if p > 64 {
        return Err(Error::InvalidConfig("GES supports at most 64 nodes".into()));
    }
    Ok(())
}

pub(crate) fn ges_with_scorer(scorer: &BicScorer) -> Pdag {
    let p = scorer.n_vars();
    let mut g = Pdag::empty(p);
    const EPS: f64 = 1e-9;

    while let Some((delta, op)) = best_insert(&g, scorer) {
        if delta <= EPS {
            break;
        }
        let mut next = g.clone();
        next.add_directed(op.x, op.y);
        for &t in &op.t {
            next.orient(t, op.y);
        }
        match complete(&next) {
            Some(c) => g = c,
            None => break,
        }
    }

    while let Some((delta, op)) = best_delete(&g, scorer) {
        if delta <= EPS {
            break;
        }
        let mut next = g.clone();
        next.remove(op.x, op.y);
        for &h in &op.h {
            next.orient(op.y, h);
            if next.undirected(op.x, h) {
                next.orient(op.x, h);
            }
        }
        match complete(&next) {
            Some(c) => g = c,
            None => break,
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_variance_of_exact_linear_relation_is_zero() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let s = BicScorer::from_columns(&[x, y]);
        assert!(s.residual_variance(1, &[0]) < 1e-9);
        assert!(s.local_score(1, &[0]) > s.local_score(1, &[]));
    }
}
