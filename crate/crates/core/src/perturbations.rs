//! Local excitations and sliding moves.
//!
//! Excitations are local: added and removed particles are points of `Z³`
//! (lifts), not cosets, so the same coset can be hit several times through
//! different periodic images.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use crate::admissibility::Configuration;
use crate::catalog::{mesh_shift, MeshSelector};
use crate::error::{Error, Result};
use crate::lattice::{shortest_vectors, Site};

/// Particles of the periodic set within squared distance `< d2` of `x`.
pub fn insertion_conflicts(c: &Configuration, x: Site) -> Result<Vec<Site>> {
    if c.is_occupied(x) {
        return Err(Error::Occupied(x));
    }
    Ok(conflicts(c, x))
}

fn conflicts(c: &Configuration, x: Site) -> Vec<Site> {
    let q = c.quotient();
    let mut out: Vec<Site> = c
        .sites()
        .into_iter()
        .flat_map(|o| q.images_within(o - x, c.d2() - 1))
        .map(|d| x + d)
        .collect();
    out.sort();
    out
}

/// Smallest single-insertion order `|conflicts| - 1` over unoccupied cosets,
/// with every representative attaining it.
pub fn min_insertion_order(c: &Configuration) -> Result<(i64, Vec<Site>)> {
    let region: Vec<Site> = c.quotient().representatives().collect();
    min_insertion_order_in(c, &region)
}

/// As [`min_insertion_order`], over the unoccupied sites of `region`.
pub fn min_insertion_order_in(c: &Configuration, region: &[Site]) -> Result<(i64, Vec<Site>)> {
    let scores: Vec<(i64, Site)> = region
        .par_iter()
        .filter(|&&x| !c.is_occupied(x))
        .map(|&x| (conflicts(c, x).len() as i64 - 1, x))
        .collect();
    let best = scores.iter().map(|s| s.0).min().ok_or(Error::EmptyRegion)?;
    let mut argmin: Vec<Site> = scores.into_iter().filter(|s| s.0 == best).map(|s| s.1).collect();
    argmin.sort();
    argmin.dedup();
    Ok((best, argmin))
}

/// Particles added to and removed from a configuration, as points of `Z³`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Excitation {
    pub added: Vec<Site>,
    pub removed: Vec<Site>,
}

impl Excitation {
    /// `|removed| - |added|`.
    pub fn order(&self) -> i64 {
        self.removed.len() as i64 - self.added.len() as i64
    }

    pub fn translated(&self, t: Site) -> Self {
        Excitation {
            added: self.added.iter().map(|&a| a + t).collect(),
            removed: self.removed.iter().map(|&r| r + t).collect(),
        }
    }

    /// Shape relative to the smallest added site.
    pub fn normalized(&self) -> Self {
        match self.added.first() {
            Some(&a0) => self.translated(-a0),
            None => self.clone(),
        }
    }

    /// Checks the excitation against the infinite periodic point set of `c`:
    /// removed sites are occupied and are exactly the particles conflicting
    /// with the added ones, and added sites respect each other.
    pub fn is_valid_for(&self, c: &Configuration) -> bool {
        if self.added.iter().any(|&a| c.is_occupied(a)) || !self.removed.iter().all(|&r| c.is_occupied(r)) {
            return false;
        }
        let forced: BTreeSet<Site> = self.added.iter().flat_map(|&a| conflicts(c, a)).collect();
        let removed: BTreeSet<Site> = self.removed.iter().copied().collect();
        let pairwise = self
            .added
            .iter()
            .enumerate()
            .all(|(i, a)| self.added[i + 1..].iter().all(|b| (*a - *b).sq_norm() >= c.d2()));
        forced == removed && pairwise
    }

    /// Applies the excitation on a torus coarse enough that it cannot meet its
    /// own periodic images, returning the original and the modified configuration.
    pub fn apply(&self, c: &Configuration) -> Result<(Configuration, Configuration)> {
        let pts: Vec<Site> = self.added.iter().chain(&self.removed).copied().collect();
        let mut diam = 0;
        for a in &pts {
            for b in &pts {
                diam = diam.max((*a - *b).sq_norm());
            }
        }
        let reach = isqrt_ceil(diam) + isqrt_ceil(c.d2()) + 1;
        let m = c.quotient().min_period_norm();
        let mut k = 1;
        while k * k * m < reach * reach {
            k += 1;
        }
        let big = c.lift_to(&c.quotient().hnf().scaled(k)?)?;
        let q = big.quotient().clone();
        let removed: BTreeSet<usize> = self.removed.iter().map(|&r| q.index_of(r)).collect();
        let mut idx: BTreeSet<usize> = big.occupied_indices().iter().copied().filter(|i| !removed.contains(i)).collect();
        idx.extend(self.added.iter().map(|&a| q.index_of(a)));
        let after = Configuration::from_indices(q, c.d2(), idx)?;
        Ok((big, after))
    }
}

fn isqrt_ceil(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

impl fmt::Display for Excitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Site]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "+[{}] -[{}]", list(&self.added), list(&self.removed))
    }
}

/// Excitations of one shape, with the number of placements per fundamental domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcitationClass {
    /// Representative placed with its smallest added site at a coset representative.
    pub excitation: Excitation,
    pub multiplicity: usize,
}

impl ExcitationClass {
    pub fn order(&self) -> i64 {
        self.excitation.order()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcitationReport {
    pub classes: Vec<ExcitationClass>,
    pub completed: bool,
    pub nodes: u64,
}

impl ExcitationReport {
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExcitationOptions {
    /// Maximum search nodes over all starting sites.
    pub node_budget: Option<u64>,
}

struct ExcitationSearch<'a> {
    c: &'a Configuration,
    max_order: i64,
    candidates: Vec<Site>,
    conflicts: Vec<Vec<Site>>,
    budget: Option<u64>,
    nodes: u64,
    exhausted: bool,
    found: Vec<Excitation>,
}

impl ExcitationSearch<'_> {
    fn dfs(&mut self, added: &mut Vec<usize>, removed: &mut BTreeMap<Site, usize>) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.budget.is_some_and(|b| self.nodes > b) {
            self.exhausted = true;
            return;
        }
        let order = removed.len() as i64 - added.len() as i64;
        if order > self.max_order {
            return;
        }
        self.found.push(Excitation {
            added: added.iter().map(|&i| self.candidates[i]).collect(),
            removed: removed.keys().copied().collect(),
        });
        let start = added.last().map_or(0, |&i| i + 1);
        for j in start..self.candidates.len() {
            let y = self.candidates[j];
            if added.iter().any(|&i| (self.candidates[i] - y).sq_norm() < self.c.d2()) {
                continue;
            }
            added.push(j);
            for &r in &self.conflicts[j] {
                *removed.entry(r).or_insert(0) += 1;
            }
            self.dfs(added, removed);
            for r in &self.conflicts[j] {
                let n = removed.get_mut(r).expect("present");
                *n -= 1;
                if *n == 0 {
                    removed.remove(r);
                }
            }
            added.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// Excitations of order `<= max_order` whose added sites lie within `radius`
/// of the smallest one, up to translation by the period.
///
/// Added sets grow in lexicographic order from a smallest site at a coset
/// representative, so every translation class is met once; a branch stops as
/// soon as its order exceeds `max_order`.
pub fn enumerate_excitations(
    c: &Configuration,
    max_order: i64,
    radius: i64,
    opts: ExcitationOptions,
) -> Result<ExcitationReport> {
    if radius < 0 {
        return Err(Error::InvalidArgument(format!("negative radius {radius}")));
    }
    let r2 = radius * radius;
    let starts: Vec<Site> = c.quotient().representatives().filter(|&x| !c.is_occupied(x)).collect();
    let mut found = Vec::new();
    let mut nodes = 0;
    let mut completed = true;
    for x0 in starts {
        let mut candidates = vec![x0];
        for dx in -radius..=radius {
            for dy in -radius..=radius {
                for dz in -radius..=radius {
                    let d = Site::new(dx, dy, dz);
                    let y = x0 + d;
                    if d.sq_norm() <= r2 && y > x0 && !c.is_occupied(y) {
                        candidates.push(y);
                    }
                }
            }
        }
        candidates.sort();
        let conflicts = candidates.par_iter().map(|&y| conflicts(c, y)).collect();
        let mut search = ExcitationSearch {
            c,
            max_order,
            candidates,
            conflicts,
            budget: opts.node_budget.map(|b| b.saturating_sub(nodes)),
            nodes: 0,
            exhausted: false,
            found: Vec::new(),
        };
        // the smallest added site is always x0 (index 0)
        let mut removed = BTreeMap::new();
        for &r in &search.conflicts[0] {
            removed.insert(r, 1);
        }
        search.dfs(&mut vec![0], &mut removed);
        nodes += search.nodes;
        found.extend(search.found);
        if search.exhausted {
            completed = false;
            break;
        }
    }
    let mut by_shape: BTreeMap<Excitation, (Excitation, usize)> = BTreeMap::new();
    for e in found {
        let entry = by_shape.entry(e.normalized()).or_insert_with(|| (e.clone(), 0));
        entry.1 += 1;
    }
    let mut classes: Vec<ExcitationClass> =
        by_shape.into_values().map(|(excitation, multiplicity)| ExcitationClass { excitation, multiplicity }).collect();
    classes.sort_by(|a, b| {
        (a.order(), a.excitation.added.len(), a.excitation.normalized())
            .cmp(&(b.order(), b.excitation.added.len(), b.excitation.normalized()))
    });
    Ok(ExcitationReport { classes, completed, nodes })
}

/// A mesh shift that keeps the configuration admissible and its size unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlidingMove {
    pub selector: MeshSelector,
    pub shift: Site,
    pub result: Configuration,
}

impl SlidingMove {
    pub fn min_pair_sq_distance(&self) -> Result<i64> {
        self.result.min_pair_sq_distance()
    }
}

/// Whether shifting `selector` by `t` is a sliding move of `c`.
pub fn try_slide(c: &Configuration, selector: &MeshSelector, t: Site) -> Result<Option<SlidingMove>> {
    let result = match mesh_shift(c, selector, t) {
        Ok(r) => r,
        Err(Error::EmptySelector) => return Ok(None),
        Err(e) => return Err(e),
    };
    if result.len() == c.len() && result != *c && result.is_admissible() {
        Ok(Some(SlidingMove { selector: selector.clone(), shift: t, result }))
    } else {
        Ok(None)
    }
}

/// Every admissible, size-preserving shift over the given selectors and shifts.
pub fn find_sliding(c: &Configuration, selectors: &[MeshSelector], shifts: &[Site]) -> Result<Vec<SlidingMove>> {
    let pairs: Vec<(&MeshSelector, Site)> = selectors.iter().flat_map(|s| shifts.iter().map(move |&t| (s, t))).collect();
    let found = pairs.par_iter().map(|&(s, t)| try_slide(c, s, t)).collect::<Result<Vec<_>>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Lines through each particle along the shortest translations of `c`, and
/// planes spanned by pairs of independent shortest translations.
pub fn standard_mesh_family(c: &Configuration) -> Vec<MeshSelector> {
    let lattice = c.translation_lattice();
    let (_, short) = shortest_vectors(&lattice);
    let dirs: Vec<Site> = short.iter().copied().filter(|v| *v > -*v).collect();
    let mut out = BTreeSet::new();
    for o in c.sites() {
        for &v in &dirs {
            out.insert(MeshSelector::line(o, v));
        }
        let mut normals = BTreeSet::new();
        for (i, &a) in dirs.iter().enumerate() {
            for &b in &dirs[i + 1..] {
                let n = a.cross(&b);
                if n.is_zero() {
                    continue;
                }
                let g = n.0.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
                let mut key = Site::new(n.x() / g, n.y() / g, n.z() / g);
                if key < -key {
                    key = -key;
                }
                if normals.insert(key) {
                    out.insert(MeshSelector::plane(o, a, b));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// All nonzero shifts of squared norm at most 2.
pub fn standard_shifts() -> Vec<Site> {
    let mut out = Vec::new();
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                let t = Site::new(x, y, z);
                if (1..=2).contains(&t.sq_norm()) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// The configuration on the doubled period, where line and plane shifts can
/// move part of the particles without moving all of them.
pub fn doubled(c: &Configuration) -> Result<Configuration> {
    c.lift_to(&c.quotient().hnf().scaled(2)?)
}
