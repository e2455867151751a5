//! Exact maximum packings on a torus.
//!
//! A maximum admissible configuration on `Z^3 / P` is a maximum independent
//! set of the exclusion graph. The search is a branch and bound with a greedy
//! clique-cover bound. Torus translations act transitively on the vertices,
//! so when only the optimum is wanted the root fixes vertex 0 as occupied.
//! Counting enumerates every optimal set and never uses symmetry breaking.
//!
//! Results never depend on the thread schedule: the optimum and counts are
//! exact, and the witness is the lexicographically least optimal set, found
//! by a separate sequential pass.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::admissibility::{build_exclusion_graph, check_period, Configuration, ExclusionGraph};
use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::lattice::{Quotient, Site};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverOptions {
    /// Hard cap on explored search nodes; exceeding it is an error.
    pub node_budget: Option<u64>,
}

impl SolverOptions {
    pub fn with_budget(budget: u64) -> Self {
        SolverOptions { node_budget: Some(budget) }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub nodes: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct PackingResult {
    pub optimum: usize,
    pub witness: Configuration,
    pub count: Option<u128>,
    pub stats: SolverStats,
}

struct Search<'g> {
    graph: &'g ExclusionGraph,
    budget: Option<u64>,
    nodes: AtomicU64,
    exhausted: AtomicBool,
}

type Step<T> = std::result::Result<T, ()>;

impl<'g> Search<'g> {
    fn new(graph: &'g ExclusionGraph, opts: SolverOptions) -> Self {
        Search { graph, budget: opts.node_budget, nodes: AtomicU64::new(0), exhausted: AtomicBool::new(false) }
    }

    fn tick(&self) -> Step<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.exhausted.load(Ordering::Relaxed) {
            return Err(());
        }
        if let Some(b) = self.budget {
            if n > b {
                self.exhausted.store(true, Ordering::Relaxed);
                return Err(());
            }
        }
        Ok(())
    }

    fn finish<T>(&self, r: Step<T>) -> Result<T> {
        r.map_err(|_| Error::BudgetExhausted(self.budget.unwrap_or(u64::MAX)))
    }

    /// Number of cliques in a greedy clique partition of `cands`.
    fn cover(&self, cands: &BitSet) -> usize {
        let mut rem = cands.clone();
        let mut k = 0;
        while let Some(v) = rem.first() {
            rem.remove(v);
            let mut grow = rem.clone();
            grow.intersect_with(self.graph.neighbor_set(v));
            while let Some(u) = grow.first() {
                rem.remove(u);
                grow.remove(u);
                grow.intersect_with(self.graph.neighbor_set(u));
            }
            k += 1;
        }
        k
    }

    fn include(&self, cands: &BitSet, v: usize) -> BitSet {
        let mut next = cands.clone();
        next.remove(v);
        next.difference_with(self.graph.neighbor_set(v));
        next
    }

    fn max_rec(&self, cands: BitSet, size: usize, best: &AtomicUsize) -> Step<()> {
        self.tick()?;
        if cands.is_empty() {
            best.fetch_max(size, Ordering::Relaxed);
            return Ok(());
        }
        if size + cands.len() <= best.load(Ordering::Relaxed)
            || size + self.cover(&cands) <= best.load(Ordering::Relaxed)
        {
            return Ok(());
        }
        let v = cands
            .iter()
            .max_by_key(|&u| (cands.intersection_len(self.graph.neighbor_set(u)), std::cmp::Reverse(u)))
            .expect("nonempty");
        self.max_rec(self.include(&cands, v), size + 1, best)?;
        let mut exc = cands;
        exc.remove(v);
        self.max_rec(exc, size, best)
    }

    /// Exact maximum independent set size, with vertex 0 fixed at the root.
    fn maximum(&self) -> Step<usize> {
        let n = self.graph.len();
        if n == 0 {
            return Ok(0);
        }
        let root = self.include(&BitSet::full(n), 0);
        let best = AtomicUsize::new(1 + self.greedy(&root));
        let mut order: Vec<usize> = root.iter().collect();
        order.sort_by_key(|&u| (std::cmp::Reverse(root.intersection_len(self.graph.neighbor_set(u))), u));
        // subproblem i: include order[i], exclude order[..i]
        (0..order.len()).into_par_iter().try_for_each(|i| {
            let mut cands = root.clone();
            for &u in &order[..i] {
                cands.remove(u);
            }
            let next = self.include(&cands, order[i]);
            self.max_rec(next, 2, &best)
        })?;
        Ok(best.load(Ordering::Relaxed))
    }

    fn greedy(&self, cands: &BitSet) -> usize {
        let mut c = cands.clone();
        let mut k = 0;
        while let Some(v) = c.first() {
            c = self.include(&c, v);
            k += 1;
        }
        k
    }

    fn count_rec(&self, cands: BitSet, chosen: &mut Vec<usize>, target: usize, leaf: &(dyn Fn(&[usize]) -> bool + Sync)) -> Step<u128> {
        self.tick()?;
        if chosen.len() == target {
            return Ok(leaf(chosen) as u128);
        }
        if chosen.len() + cands.len() < target || chosen.len() + self.cover(&cands) < target {
            return Ok(0);
        }
        let v = cands.first().expect("nonempty");
        chosen.push(v);
        let with = self.count_rec(self.include(&cands, v), chosen, target, leaf)?;
        chosen.pop();
        let mut exc = cands;
        exc.remove(v);
        Ok(with + self.count_rec(exc, chosen, target, leaf)?)
    }

    /// Number of independent sets of exactly `target` vertices accepted by `leaf`.
    fn count(&self, target: usize, leaf: &(dyn Fn(&[usize]) -> bool + Sync)) -> Step<u128> {
        let n = self.graph.len();
        if target == 0 {
            return Ok(1);
        }
        (0..n)
            .into_par_iter()
            .map(|v| {
                let mut cands = self.include(&BitSet::full(n), v);
                for u in 0..v {
                    cands.remove(u);
                }
                let mut chosen = vec![v];
                self.count_rec(cands, &mut chosen, target, leaf)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    }

    fn lex_first(&self, cands: BitSet, chosen: &mut Vec<usize>, target: usize) -> Step<bool> {
        self.tick()?;
        if chosen.len() == target {
            return Ok(true);
        }
        if chosen.len() + cands.len() < target || chosen.len() + self.cover(&cands) < target {
            return Ok(false);
        }
        let v = cands.first().expect("nonempty");
        chosen.push(v);
        if self.lex_first(self.include(&cands, v), chosen, target)? {
            return Ok(true);
        }
        chosen.pop();
        let mut exc = cands;
        exc.remove(v);
        self.lex_first(exc, chosen, target)
    }
}

/// Exact maximum packing with the lexicographically least optimal witness.
pub fn max_packing(q: Arc<Quotient>, d2: i64, opts: SolverOptions) -> Result<PackingResult> {
    let start = Instant::now();
    let graph = build_exclusion_graph(&q, d2)?;
    let search = Search::new(&graph, opts);
    let optimum = search.finish(search.maximum())?;
    let mut chosen = Vec::with_capacity(optimum);
    let found = search.finish(search.lex_first(BitSet::full(graph.len()), &mut chosen, optimum))?;
    debug_assert!(found || optimum == 0);
    let witness = Configuration::from_indices(q, d2, chosen)?;
    Ok(PackingResult {
        optimum,
        witness,
        count: None,
        stats: SolverStats { nodes: search.nodes.load(Ordering::Relaxed), elapsed: start.elapsed() },
    })
}

/// [`max_packing`] followed by an exact count of optimal configurations.
pub fn max_packing_with_count(
    q: Arc<Quotient>,
    d2: i64,
    modulo_translations: bool,
    opts: SolverOptions,
) -> Result<PackingResult> {
    let start = Instant::now();
    let mut res = max_packing(q.clone(), d2, opts)?;
    let graph = build_exclusion_graph(&q, d2)?;
    let remaining = opts.node_budget.map(|b| b.saturating_sub(res.stats.nodes));
    let search = Search::new(&graph, SolverOptions { node_budget: remaining });
    let count = count_with(&search, &q, res.optimum, modulo_translations)?;
    res.count = Some(count);
    res.stats = SolverStats {
        nodes: res.stats.nodes + search.nodes.load(Ordering::Relaxed),
        elapsed: start.elapsed(),
    };
    Ok(res)
}

fn count_with(search: &Search<'_>, q: &Quotient, optimum: usize, modulo_translations: bool) -> Result<u128> {
    let r = if modulo_translations {
        let reps: Vec<Site> = q.representatives().collect();
        let canonical = |set: &[usize]| {
            reps.iter().all(|&t| {
                let mut moved: Vec<usize> = set.iter().map(|&i| q.index_of(reps[i] + t)).collect();
                moved.sort_unstable();
                moved.as_slice() >= set
            })
        };
        search.count(optimum, &canonical)
    } else {
        search.count(optimum, &|_: &[usize]| true)
    };
    search.finish(r)
}

/// Number of maximum admissible configurations, optionally counted up to torus translations.
pub fn count_optima(q: Arc<Quotient>, d2: i64, modulo_translations: bool, opts: SolverOptions) -> Result<u128> {
    Ok(max_packing_with_count(q, d2, modulo_translations, opts)?.count.expect("count requested"))
}

/// Upper bound on the optimum from geometric cliques.
///
/// The distinct cosets of an axis box `[0,a]×[0,b]×[0,c]` with
/// `a²+b²+c² < d2` pairwise conflict. Its `N` translates cover every coset
/// equally often, so a packing meets each translate at most once and
/// `optimum <= N / |box|`.
pub fn clique_cover_bound(q: &Quotient, d2: i64) -> Result<usize> {
    check_period(q, d2)?;
    let n = q.len();
    let mut largest = 1usize;
    let side = (d2 as f64).sqrt().ceil() as i64;
    for a in 0..=side {
        for b in 0..=side {
            for c in 0..=side {
                if a * a + b * b + c * c >= d2 {
                    continue;
                }
                let mut cosets = std::collections::BTreeSet::new();
                for i in 0..=a {
                    for j in 0..=b {
                        for k in 0..=c {
                            cosets.insert(q.index_of(Site::new(i, j, k)));
                        }
                    }
                }
                largest = largest.max(cosets.len());
            }
        }
    }
    Ok(n / largest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(l: i64) -> Arc<Quotient> {
        Arc::new(Quotient::diagonal(l).unwrap())
    }

    #[test]
    fn small_optima() {
        let r = max_packing(diag(2), 2, SolverOptions::default()).unwrap();
        assert_eq!(r.optimum, 4);
        assert!(r.witness.is_admissible());
        assert_eq!(r.witness.len(), 4);
        assert_eq!(max_packing(diag(2), 3, SolverOptions::default()).unwrap().optimum, 2);
        assert_eq!(max_packing(diag(4), 12, SolverOptions::default()).unwrap().optimum, 2);
    }

    #[test]
    fn witness_is_lexicographically_least() {
        let r = max_packing(diag(2), 3, SolverOptions::default()).unwrap();
        assert_eq!(r.witness.sites(), vec![Site::new(0, 0, 0), Site::new(1, 1, 1)]);
    }

    #[test]
    fn counts() {
        let o = SolverOptions::default();
        assert_eq!(count_optima(diag(2), 2, false, o).unwrap(), 2);
        assert_eq!(count_optima(diag(2), 3, false, o).unwrap(), 4);
        assert_eq!(count_optima(diag(2), 3, true, o).unwrap(), 1);
        assert_eq!(count_optima(diag(4), 12, false, o).unwrap(), 32);
        assert_eq!(count_optima(diag(4), 8, false, o).unwrap(), 16);
    }

    #[test]
    fn clique_bounds() {
        let b = clique_cover_bound(&diag(2), 2).unwrap();
        assert!((4..=8).contains(&b));
        assert!(clique_cover_bound(&diag(4), 4).unwrap() >= 8);
        assert_eq!(clique_cover_bound(&diag(4), 1).unwrap(), 64);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let err = max_packing(diag(4), 4, SolverOptions::with_budget(3)).unwrap_err();
        assert_eq!(err, Error::BudgetExhausted(3));
    }

    #[test]
    fn too_short_period() {
        assert!(matches!(
            max_packing(diag(2), 5, SolverOptions::default()),
            Err(Error::PeriodTooShort { .. })
        ));
    }
}
