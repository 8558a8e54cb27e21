//! Adjacency-matrix partially directed graph used internally by PC, GES and
//! the enumerator. `a -> b` is stored as `m[a][b] && !m[b][a]`; an undirected
//! edge sets both entries.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Pdag {
    n: usize,
    m: Vec<bool>,
}

impl Pdag {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            m: vec![false; n * n],
        }
    }

    pub fn complete_undirected(n: usize) -> Self {
        let mut g = Self::empty(n);
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    g.set(a, b, true);
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> bool {
        self.m[a * self.n + b]
    }

    #[inline]
    fn set(&mut self, a: usize, b: usize, v: bool) {
        self.m[a * self.n + b] = v;
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.get(a, b) || self.get(b, a)
    }

    pub fn directed(&self, a: usize, b: usize) -> bool {
        self.get(a, b) && !self.get(b, a)
    }

    pub fn undirected(&self, a: usize, b: usize) -> bool {
        self.get(a, b) && self.get(b, a)
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) {
        self.set(a, b, true);
        self.set(b, a, true);
    }

    pub fn add_directed(&mut self, a: usize, b: usize) {
        self.set(a, b, true);
        self.set(b, a, false);
    }

    pub fn remove(&mut self, a: usize, b: usize) {
        self.set(a, b, false);
        self.set(b, a, false);
    }

    /// Turns an existing edge into `a -> b`.
    pub fn orient(&mut self, a: usize, b: usize) {
        debug_assert!(self.adjacent(a, b));
        self.add_directed(a, b);
    }

    pub fn adjacents(&self, a: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&b| b != a && self.adjacent(a, b))
            .collect()
    }

    pub fn parents(&self, a: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.directed(b, a)).collect()
    }

    pub fn children(&self, a: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.directed(a, b)).collect()
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&b| b != a && self.undirected(a, b))
            .collect()
    }

    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.directed(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.undirected(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// True if a directed path `from ~> to` exists using directed edges only.
    pub fn has_directed_path(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if seen[v] {
                continue;
            }
            seen[v] = true;
            for w in 0..self.n {
                if self.directed(v, w) && !seen[w] {
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Orienting `a -> b` would close a directed cycle.
    pub fn orientation_creates_cycle(&self, a: usize, b: usize) -> bool {
        self.has_directed_path(b, a)
    }

    pub fn directed_part_acyclic(&self) -> bool {
        let mut indeg = vec![0usize; self.n];
        for (_, b) in self.directed_edges() {
            indeg[b] += 1;
        }
        let mut queue: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut visited = 0;
        while let Some(v) = queue.pop() {
            visited += 1;
            for w in self.children(v) {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
        visited == self.n
    }

    /// Is there a path `from ~ to` whose edges are undirected or point away
    /// from `from`, avoiding every node in `blocked`?
    pub fn semi_directed_path(&self, from: usize, to: usize, blocked: &[bool]) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for w in 0..self.n {
                if w == v || seen[w] || !self.get(v, w) {
                    continue;
                }
                if w == to {
                    return true;
                }
                if blocked[w] {
                    continue;
                }
                seen[w] = true;
                stack.push(w);
            }
        }
        false
    }

    pub fn is_clique(&self, nodes: &[usize]) -> bool {
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if !self.adjacent(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// Applies Meek rules R1-R3 until no rule fires. Orientations that would
    /// close a directed cycle are skipped.
    pub fn apply_meek_rules(&mut self) {
        loop {
            let mut changed = false;
            for (a, b) in self.undirected_edges() {
                for (x, y) in [(a, b), (b, a)] {
                    if self.undirected(x, y)
                        && self.meek_orients(x, y)
                        && !self.orientation_creates_cycle(x, y)
                    {
                        self.orient(x, y);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Whether some Meek rule forces the undirected edge `x - y` to `x -> y`.
    fn meek_orients(&self, x: usize, y: usize) -> bool {
        let n = self.n;
        // R1: z -> x - y with z, y non-adjacent.
        for z in 0..n {
            if self.directed(z, x) && z != y && !self.adjacent(z, y) {
                return true;
            }
        }
        // R2: x -> z -> y.
        for z in 0..n {
            if self.directed(x, z) && self.directed(z, y) {
                return true;
            }
        }
        // R3: x - c -> y, x - d -> y, c and d non-adjacent.
        let cands: Vec<usize> = (0..n)
            .filter(|&c| c != y && self.undirected(x, c) && self.directed(c, y))
            .collect();
        for (i, &c) in cands.iter().enumerate() {
            for &d in &cands[i + 1..] {
                if !self.adjacent(c, d) {
                    return true;
                }
            }
        }
        false
    }

    /// v-structures `a -> c <- b` with `a < b` and `a`, `b` non-adjacent.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.n {
            let pa = self.parents(c);
            for (i, &a) in pa.iter().enumerate() {
                for &b in &pa[i + 1..] {
                    if !self.adjacent(a, b) {
                        out.push((a, c, b));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Completed pattern of a fully directed acyclic graph: skeleton plus
    /// v-structures, closed under the Meek rules.
    pub fn cpdag_of_dag(dag: &Pdag) -> Pdag {
        let mut g = Pdag::empty(dag.n);
        for a in 0..dag.n {
            for b in a + 1..dag.n {
                if dag.adjacent(a, b) {
                    g.add_undirected(a, b);
                }
            }
        }
        for (a, c, b) in dag.v_structures() {
            g.orient(a, c);
            g.orient(b, c);
        }
        g.apply_meek_rules();
        g
    }

    /// Dor-Tarsi consistent extension; `None` when the pattern has none.
    pub fn consistent_extension(&self) -> Option<Pdag> {
        let mut work = self.clone();
        let mut out = self.clone();
        let mut alive = vec![true; self.n];
        for _ in 0..self.n {
            let mut picked = None;
            'cand: for x in 0..self.n {
                if !alive[x] {
                    continue;
                }
                // sink among remaining nodes
                if (0..self.n).any(|w| alive[w] && work.directed(x, w)) {
                    continue;
                }
                let adj: Vec<usize> = (0..self.n)
                    .filter(|&w| alive[w] && w != x && work.adjacent(x, w))
                    .collect();
                for &u in adj.iter().filter(|&&u| work.undirected(x, u)) {
                    for &w in &adj {
                        if w != u && !work.adjacent(u, w) {
                            continue 'cand;
                        }
                    }
                }
                picked = Some(x);
                break;
            }
            let x = picked?;
            for u in 0..self.n {
                if alive[u] && u != x && work.undirected(x, u) {
                    out.orient(u, x);
                }
            }
            alive[x] = false;
            for w in 0..self.n {
                if w != x {
                    work.remove(x, w);
                }
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meek_r1_propagates_away_from_collider() {
        // 0 -> 1 <- 2, 1 - 3: R1 orients 1 -> 3.
        let mut g = Pdag::empty(4);
        g.add_directed(0, 1);
        g.add_directed(2, 1);
        g.add_undirected(1, 3);
        g.apply_meek_rules();
        assert!(g.directed(1, 3));
    }

    #[test]
    fn meek_r2_avoids_cycle() {
        let mut g = Pdag::empty(3);
        g.add_directed(0, 1);
        g.add_directed(1, 2);
        g.add_undirected(0, 2);
        g.apply_meek_rules();
        assert!(g.directed(0, 2));
    }

    #[test]
    fn cpdag_of_chain_is_undirected() {
        let mut d = Pdag::empty(3);
        d.add_directed(0, 1);
        d.add_directed(1, 2);
        let c = Pdag::cpdag_of_dag(&d);
        assert!(c.undirected(0, 1) && c.undirected(1, 2));
        assert!(!c.adjacent(0, 2));
    }

    #[test]
    fn extension_of_collider_pattern() {
        let mut g = Pdag::empty(4);
        g.add_directed(0, 2);
        g.add_directed(1, 2);
        g.add_undirected(2, 3);
        let e = g.consistent_extension().unwrap();
        assert!(e.directed(2, 3));
        assert!(e.directed_part_acyclic());
    }

    #[test]
    fn semi_directed_path_respects_direction() {
        let mut g = Pdag::empty(3);
        g.add_directed(1, 0);
        g.add_undirected(1, 2);
        let none = vec![false; 3];
        assert!(!g.semi_directed_path(0, 2, &none));
        assert!(g.semi_directed_path(1, 0, &none));
        assert!(g.semi_directed_path(2, 0, &none));
        let mut blocked = vec![false; 3];
        blocked[1] = true;
        assert!(!g.semi_directed_path(2, 0, &blocked));
    }
}
