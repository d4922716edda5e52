//! Integral rank functions stored as explicit `2^m` tables.

use crate::error::{Error, Result};

/// Largest ground set accepted for an explicit table.
pub const MAX_GROUND: usize = 16;

/// A validated integral polymatroid rank function on `{0, .., m-1}`.
///
/// Subsets are bitmasks; bit `j` set means element `j` is in the set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankOracle {
    m: usize,
    table: Vec<i64>,
}

impl RankOracle {
    /// Validates normalization, monotonicity and submodularity by brute force.
    pub fn from_table(m: usize, table: Vec<i64>) -> Result<Self> {
        if m > MAX_GROUND {
            return Err(Error::OutOfScale(format!(
                "rank table over {m} elements (limit {MAX_GROUND})"
            )));
        }
        if table.len() != 1usize << m {
            return Err(Error::Dimension(format!(
                "rank table has {} entries, expected {}",
                table.len(),
                1usize << m
            )));
        }
        let oracle = RankOracle { m, table };
        oracle.check()?;
        Ok(oracle)
    }

    pub fn from_fn(m: usize, f: impl Fn(u32) -> i64) -> Result<Self> {
        if m > MAX_GROUND {
            return Err(Error::OutOfScale(format!(
                "rank table over {m} elements (limit {MAX_GROUND})"
            )));
        }
        Self::from_table(m, (0..1u32 << m).map(f).collect())
    }

    /// `f(S) = min(|S|, k)`.
    pub fn uniform(m: usize, k: i64) -> Result<Self> {
        Self::from_fn(m, |s| (s.count_ones() as i64).min(k))
    }

    /// `f(S) = |S|`.
    pub fn free(m: usize) -> Result<Self> {
        Self::from_fn(m, |s| s.count_ones() as i64)
    }

    /// `f(S) = sum_b min(|S ∩ B_b|, cap_b)`; blocks must partition the ground set.
    pub fn partition(m: usize, blocks: &[(Vec<usize>, i64)]) -> Result<Self> {
        let mut seen = vec![false; m];
        for (block, _) in blocks {
            for &j in block {
                if j >= m || seen[j] {
                    return Err(Error::InvalidRank(format!(
                        "partition blocks do not partition 0..{m} (element {j})"
                    )));
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidRank("partition blocks miss an element".into()));
        }
        let masks: Vec<(u32, i64)> = blocks
            .iter()
            .map(|(b, c)| (b.iter().fold(0u32, |acc, &j| acc | 1 << j), *c))
            .collect();
        Self::from_fn(m, |s| {
            masks
                .iter()
                .map(|&(b, c)| ((s & b).count_ones() as i64).min(c))
                .sum()
        })
    }

    /// Rank of the graphic matroid whose elements are the undirected `edges`
    /// over `nodes` vertices: `|V| - #components(V, S)`.
    pub fn graphic(nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if let Some(&(a, b)) = edges.iter().find(|(a, b)| *a >= nodes || *b >= nodes) {
            return Err(Error::InvalidRank(format!("edge ({a}, {b}) outside {nodes} nodes")));
        }
        Self::from_fn(edges.len(), |s| {
            let mut parent: Vec<usize> = (0..nodes).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            let mut rank = 0;
            for (e, &(a, b)) in edges.iter().enumerate() {
                if s >> e & 1 == 1 {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra] = rb;
                        rank += 1;
                    }
                }
            }
            rank
        })
    }

    pub fn ground_size(&self) -> usize {
        self.m
    }

    pub fn full(&self) -> u32 {
        ((1u64 << self.m) - 1) as u32
    }

    pub fn rank(&self, set: u32) -> i64 {
        self.table[set as usize]
    }

    pub fn rank_of(&self, elems: &[usize]) -> i64 {
        self.rank(elems.iter().fold(0u32, |acc, &j| acc | 1 << j))
    }

    pub fn table(&self) -> &[i64] {
        &self.table
    }

    fn check(&self) -> Result<()> {
        if self.table[0] != 0 {
            return Err(Error::InvalidRank(format!("f(empty) = {}", self.table[0])));
        }
        let n = 1u32 << self.m;
        for s in 0..n {
            let fs = self.rank(s);
            for a in 0..self.m {
                if s >> a & 1 == 1 {
                    continue;
                }
                let sa = s | 1 << a;
                if self.rank(sa) < fs {
                    return Err(Error::InvalidRank(format!(
                        "not monotone: f({sa:#b}) < f({s:#b})"
                    )));
                }
                for b in a + 1..self.m {
                    if s >> b & 1 == 1 {
                        continue;
                    }
                    let sb = s | 1 << b;
                    if self.rank(sa) + self.rank(sb) < self.rank(sa | sb) + fs {
                        return Err(Error::InvalidRank(format!(
                            "not submodular at S = {s:#b}, a = {a}, b = {b}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `x(S) <= f(S)` for all `S`, and `x >= 0`.
    pub fn is_independent(&self, x: &[i64]) -> bool {
        x.len() == self.m
            && x.iter().all(|&v| v >= 0)
            && (0..1u32 << self.m).all(|s| subset_sum(x, s) <= self.rank(s))
    }

    /// Independent with `x(E) = f(E)`.
    pub fn is_base(&self, x: &[i64]) -> bool {
        self.is_independent(x) && subset_sum(x, self.full()) == self.rank(self.full())
    }
}

pub fn subset_sum(x: &[i64], set: u32) -> i64 {
    x.iter()
        .enumerate()
        .filter(|(j, _)| set >> j & 1 == 1)
        .map(|(_, v)| v)
        .sum()
}
