//! Periodic configurations, the exclusion constraint and exclusion graphs.
//!
//! A [`Configuration`] is a set of occupied cosets of a [`Quotient`]; it stands
//! for the infinite periodic point set `occupied + P`. Two particles conflict
//! when their minimum-image squared distance is `< d2`; distance exactly `d2`
//! is allowed.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::lattice::{Quotient, Site, SublatticeBasis};
use crate::Rational;

/// A pair of particles closer than allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub a: Site,
    pub b: Site,
    pub sq_distance: i64,
}

/// Occupied cosets of a quotient together with the exclusion parameter.
///
/// Construction enforces that the period lattice has no vector shorter than
/// `sqrt(d2)`, so a particle never conflicts with its own images. Pairwise
/// admissibility is *not* enforced; use [`Configuration::is_admissible`].
#[derive(Clone, Debug)]
pub struct Configuration {
    quotient: Arc<Quotient>,
    d2: i64,
    occupied: Vec<usize>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.d2 == other.d2 && self.occupied == other.occupied && *self.quotient == *other.quotient
    }
}

impl Eq for Configuration {}

pub(crate) fn check_period(q: &Quotient, d2: i64) -> Result<()> {
    if d2 <= 0 {
        return Err(Error::InvalidD2(d2));
    }
    let min_norm = q.min_period_norm();
    if min_norm < d2 {
        return Err(Error::PeriodTooShort { min_norm, d2 });
    }
    Ok(())
}

impl Configuration {
    /// Sites are reduced modulo the period; duplicates collapse.
    pub fn new(quotient: Arc<Quotient>, d2: i64, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        check_period(&quotient, d2)?;
        let occupied: BTreeSet<usize> = sites.into_iter().map(|s| quotient.index_of(s)).collect();
        Ok(Configuration { quotient, d2, occupied: occupied.into_iter().collect() })
    }

    pub fn on_period(period: &SublatticeBasis, d2: i64, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        Self::new(Arc::new(Quotient::new(*period)), d2, sites)
    }

    pub fn empty(quotient: Arc<Quotient>, d2: i64) -> Result<Self> {
        Self::new(quotient, d2, std::iter::empty())
    }

    pub fn from_indices(quotient: Arc<Quotient>, d2: i64, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        check_period(&quotient, d2)?;
        let n = quotient.len();
        let occupied: BTreeSet<usize> = indices.into_iter().collect();
        if let Some(&bad) = occupied.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!("coset index {bad} out of range 0..{n}")));
        }
        Ok(Configuration { quotient, d2, occupied: occupied.into_iter().collect() })
    }

    pub fn quotient(&self) -> &Arc<Quotient> {
        &self.quotient
    }

    pub fn d2(&self) -> i64 {
        self.d2
    }

    /// Sorted coset indices of the occupied sites.
    pub fn occupied_indices(&self) -> &[usize] {
        &self.occupied
    }

    /// Representatives of the occupied cosets, in coset order.
    pub fn sites(&self) -> Vec<Site> {
        self.occupied.iter().map(|&i| self.quotient.rep(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn is_occupied(&self, site: Site) -> bool {
        self.occupied.binary_search(&self.quotient.index_of(site)).is_ok()
    }

    /// Same occupied set, different exclusion parameter.
    pub fn with_d2(&self, d2: i64) -> Result<Self> {
        check_period(&self.quotient, d2)?;
        Ok(Configuration { d2, ..self.clone() })
    }

    pub fn with_site(&self, site: Site) -> Result<Self> {
        if self.is_occupied(site) {
            return Err(Error::Occupied(site));
        }
        let mut out = self.clone();
        let i = self.quotient.index_of(site);
        let pos = out.occupied.binary_search(&i).unwrap_err();
        out.occupied.insert(pos, i);
        Ok(out)
    }

    pub fn without_site(&self, site: Site) -> Result<Self> {
        let i = self.quotient.index_of(site);
        let mut out = self.clone();
        match out.occupied.binary_search(&i) {
            Ok(pos) => {
                out.occupied.remove(pos);
                Ok(out)
            }
            Err(_) => Err(Error::NotOccupied(site)),
        }
    }

    /// Every site shifted by `t`.
    pub fn translated(&self, t: Site) -> Self {
        let sites: Vec<Site> = self.sites().into_iter().map(|s| s + t).collect();
        Configuration::new(self.quotient.clone(), self.d2, sites).expect("period already checked")
    }

    /// The same infinite point set viewed on a finer torus.
    pub fn lift_to(&self, period: &SublatticeBasis) -> Result<Self> {
        let fine = Arc::new(Quotient::new(*period));
        let coarse = self.quotient.hnf();
        for g in fine.hnf().generators() {
            if !coarse.contains(g) {
                return Err(Error::InvalidArgument(format!("{period} is not a sublattice of {coarse}")));
            }
        }
        let occupied_fine = fine.representatives().filter(|&r| self.is_occupied(r));
        let occ: Vec<Site> = occupied_fine.collect();
        Configuration::new(fine, self.d2, occ)
    }

    /// First pair (in coset order) at minimum-image squared distance `< d2`.
    pub fn check_admissible(&self) -> Option<Violation> {
        let sites = self.sites();
        for (i, &a) in sites.iter().enumerate() {
            for &b in &sites[i + 1..] {
                let d = self.quotient.min_image_sq_distance(a, b);
                if d < self.d2 {
                    return Some(Violation { a, b, sq_distance: d });
                }
            }
        }
        None
    }

    pub fn is_admissible(&self) -> bool {
        self.check_admissible().is_none()
    }

    /// `|occupied| / N` as an exact rational.
    pub fn density(&self) -> Rational {
        Rational::new(BigInt::from(self.occupied.len()), BigInt::from(self.quotient.len()))
    }

    /// Smallest squared distance between two distinct particles of the periodic
    /// point set, including a particle and its own periodic images.
    pub fn min_pair_sq_distance(&self) -> Result<i64> {
        if self.occupied.len() < 2 {
            return Err(Error::TooFewParticles(self.occupied.len()));
        }
        let sites = self.sites();
        let mut best = self.quotient.min_period_norm();
        for (i, &a) in sites.iter().enumerate() {
            for &b in &sites[i + 1..] {
                best = best.min(self.quotient.min_image_sq_distance(a, b));
            }
        }
        Ok(best)
    }

    /// Unoccupied cosets that can take one more particle; empty iff saturated.
    pub fn insertion_candidates(&self) -> Vec<Site> {
        let table = self.quotient.distance_table();
        let sites = self.sites();
        let q = &self.quotient;
        q.representatives()
            .enumerate()
            .filter(|(i, _)| self.occupied.binary_search(i).is_err())
            .filter(|(_, x)| sites.iter().all(|&o| table[q.index_of(*x - o)] >= self.d2))
            .map(|(_, x)| x)
            .collect()
    }

    pub fn is_saturated(&self) -> bool {
        self.insertion_candidates().is_empty()
    }

    /// Lattice of translations `v` with `c + v = c`; always contains the period.
    pub fn translation_lattice(&self) -> SublatticeBasis {
        let q = &self.quotient;
        let mut gens: Vec<Site> = q.hnf().generators().to_vec();
        if let Some(&first) = self.occupied.first() {
            let o0 = q.rep(first);
            for s in self.sites() {
                let v = s - o0;
                if self.sites().iter().all(|&x| self.is_occupied(x + v)) {
                    gens.push(v);
                }
            }
        }
        SublatticeBasis::from_generators(&gens).expect("contains the full-rank period")
    }
}

/// Free-function form of [`Configuration::is_admissible`] returning the first
/// violating pair.
pub fn is_admissible(c: &Configuration) -> std::result::Result<(), Violation> {
    match c.check_admissible() {
        None => Ok(()),
        Some(v) => Err(v),
    }
}

pub fn density(c: &Configuration) -> Rational {
    c.density()
}

pub fn min_pair_sq_distance(c: &Configuration) -> Result<i64> {
    c.min_pair_sq_distance()
}

pub fn insertion_candidates(c: &Configuration) -> Vec<Site> {
    c.insertion_candidates()
}

/// Conflict graph on the cosets of a quotient: `u ~ v` iff
/// `0 < dist²(u, v) < d2`.
#[derive(Clone, Debug)]
pub struct ExclusionGraph {
    d2: i64,
    adjacency: Vec<BitSet>,
    neighbors: Vec<Vec<usize>>,
}

impl ExclusionGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn d2(&self) -> i64 {
        self.d2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn neighbor_set(&self, v: usize) -> &BitSet {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(v)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(i, &u)| set[i + 1..].iter().all(|&v| !self.adjacent(u, v)))
    }
}

/// Builds the exclusion graph; vertices are coset indices in representative order.
pub fn build_exclusion_graph(q: &Quotient, d2: i64) -> Result<ExclusionGraph> {
    check_period(q, d2)?;
    let n = q.len();
    let table = q.distance_table();
    let short: Vec<Site> =
        q.representatives().zip(table).filter(|(_, &d)| d > 0 && d < d2).map(|(r, _)| r).collect();
    let mut adjacency = vec![BitSet::new(n); n];
    let mut neighbors = Vec::with_capacity(n);
    for (u, ru) in q.representatives().enumerate() {
        let mut list: Vec<usize> = short.iter().map(|&c| q.index_of(ru + c)).collect();
        list.sort_unstable();
        list.dedup();
        for &v in &list {
            adjacency[u].insert(v);
        }
        neighbors.push(list);
    }
    Ok(ExclusionGraph { d2, adjacency, neighbors })
}

/// A finite set of sites inside an axis-aligned box, with free boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowConfiguration {
    lo: Site,
    hi: Site,
    d2: i64,
    sites: Vec<Site>,
}

impl WindowConfiguration {
    /// `lo` and `hi` are inclusive corners. Sites outside the box are dropped.
    pub fn new(lo: Site, hi: Site, d2: i64, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        if d2 <= 0 {
            return Err(Error::InvalidD2(d2));
        }
        if (0..3).any(|i| lo[i] > hi[i]) {
            return Err(Error::InvalidArgument(format!("empty window {lo}..{hi}")));
        }
        let inside = |s: &Site| (0..3).all(|i| lo[i] <= s[i] && s[i] <= hi[i]);
        let set: BTreeSet<Site> = sites.into_iter().filter(inside).collect();
        Ok(WindowConfiguration { lo, hi, d2, sites: set.into_iter().collect() })
    }

    pub fn bounds(&self) -> (Site, Site) {
        (self.lo, self.hi)
    }

    pub fn d2(&self) -> i64 {
        self.d2
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn volume(&self) -> u64 {
        (0..3).map(|i| (self.hi[i] - self.lo[i] + 1) as u64).product()
    }

    pub fn check_admissible(&self) -> Option<Violation> {
        for (i, &a) in self.sites.iter().enumerate() {
            for &b in &self.sites[i + 1..] {
                let d = (a - b).sq_norm();
                if d < self.d2 {
                    return Some(Violation { a, b, sq_distance: d });
                }
            }
        }
        None
    }

    pub fn is_admissible(&self) -> bool {
        self.check_admissible().is_none()
    }

    pub fn density(&self) -> Rational {
        Rational::new(BigInt::from(self.sites.len()), BigInt::from(self.volume()))
    }

    pub fn min_pair_sq_distance(&self) -> Result<i64> {
        if self.sites.len() < 2 {
            return Err(Error::TooFewParticles(self.sites.len()));
        }
        let mut best = i64::MAX;
        for (i, &a) in self.sites.iter().enumerate() {
            for &b in &self.sites[i + 1..] {
                best = best.min((a - b).sq_norm());
            }
        }
        Ok(best)
    }
}
