//! Exact Voronoi cells.
//!
//! Cells are cut out of a box by bisector half-spaces `2q·z <= |q|²` in
//! coordinates centred at the particle. Every vertex is stored as the solution
//! of three of those integer plane equations, in homogeneous integer
//! coordinates, so coordinates stay small however many cuts are made.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::admissibility::Configuration;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::Rational;

const MAX_DOUBLINGS: u32 = 8;

/// Half-space `a · z <= c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Plane {
    a: [i64; 3],
    c: i64,
    /// Neighbour offset for bisectors, `None` for the bounding box.
    source: Option<Site>,
}

#[derive(Clone, Debug)]
struct Vertex {
    /// `(X, Y, Z, W)` with `W > 0`, in lowest terms.
    h: [i128; 4],
    planes: Vec<usize>,
}

impl Vertex {
    fn slack(&self, p: &Plane) -> i128 {
        p.a.iter().zip(&self.h).map(|(&a, &x)| a as i128 * x).sum::<i128>() - p.c as i128 * self.h[3]
    }

    /// `4|v|² < |q|²`: the bisector of `q` lies beyond this vertex.
    fn inside_half_radius(&self, q_norm: i64) -> bool {
        let n2: i128 = self.h[..3].iter().map(|x| x * x).sum();
        4 * n2 < q_norm as i128 * self.h[3] * self.h[3]
    }

    fn shared(&self, other: &Vertex) -> Vec<usize> {
        self.planes.iter().copied().filter(|p| other.planes.contains(p)).collect()
    }

    fn to_rational(&self) -> [Rational; 3] {
        let w = BigInt::from(self.h[3]);
        [0, 1, 2].map(|i| Rational::new(BigInt::from(self.h[i]), w.clone()))
    }
}

fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Intersection of three planes, if they are independent.
fn intersect(p: [&Plane; 3]) -> Option<[i128; 4]> {
    let a = p.map(|pl| pl.a.map(|v| v as i128));
    let c = p.map(|pl| pl.c as i128);
    let d = det3(a);
    if d == 0 {
        return None;
    }
    let mut h = [0i128; 4];
    for (col, slot) in h.iter_mut().take(3).enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = c[row];
        }
        *slot = det3(m);
    }
    h[3] = d;
    if d < 0 {
        h = h.map(|v| -v);
    }
    let g = h.iter().fold(0i128, |g, &v| g.gcd(&v));
    Some(h.map(|v| v / g))
}

/// Incrementally clipped convex polytope around the origin.
#[derive(Clone, Debug)]
struct Clipper {
    planes: Vec<Plane>,
    vertices: Vec<Vertex>,
}

impl Clipper {
    fn cube(r: i64) -> Self {
        let mut planes = Vec::new();
        for i in 0..3 {
            for sign in [1, -1] {
                let mut a = [0; 3];
                a[i] = sign;
                planes.push(Plane { a, c: r, source: None });
            }
        }
        let mut vertices = Vec::new();
        for sx in 0..2 {
            for sy in 0..2 {
                for sz in 0..2 {
                    let ids = [sx, 2 + sy, 4 + sz];
                    let h = intersect(ids.map(|i| &planes[i])).expect("box corner");
                    vertices.push(Vertex { h, planes: ids.to_vec() });
                }
            }
        }
        Clipper { planes, vertices }
    }

    /// Whether the bisector of `q` could cut the current polytope.
    fn reaches(&self, q: Site) -> bool {
        let n = q.sq_norm();
        !self.vertices.iter().all(|v| v.inside_half_radius(n))
    }

    fn cut_by_neighbor(&mut self, q: Site) {
        self.cut(Plane { a: (2 * q).0, c: q.sq_norm(), source: Some(q) });
    }

    fn cut(&mut self, plane: Plane) {
        let slack: Vec<i128> = self.vertices.iter().map(|v| v.slack(&plane)).collect();
        if slack.iter().all(|&s| s <= 0) {
            if slack.iter().any(|&s| s == 0) {
                let id = self.planes.len();
                self.planes.push(plane);
                for (v, &s) in self.vertices.iter_mut().zip(&slack) {
                    if s == 0 {
                        v.planes.push(id);
                    }
                }
            }
            return;
        }
        let id = self.planes.len();
        self.planes.push(plane);
        let mut next = Vec::with_capacity(self.vertices.len());
        for (i, u) in self.vertices.iter().enumerate() {
            if slack[i] > 0 {
                continue;
            }
            let mut kept = u.clone();
            if slack[i] == 0 {
                kept.planes.push(id);
            }
            next.push(kept);
            if slack[i] == 0 {
                continue;
            }
            for (j, w) in self.vertices.iter().enumerate() {
                if slack[j] <= 0 {
                    continue;
                }
                let shared = u.shared(w);
                if shared.len() < 2 {
                    continue;
                }
                let line = [&self.planes[shared[0]], &self.planes[shared[1]], &self.planes[id]];
                let h = match intersect(line) {
                    Some(h) => h,
                    None => shared
                        .iter()
                        .enumerate()
                        .flat_map(|(k, &a)| shared[k + 1..].iter().map(move |&b| (a, b)))
                        .find_map(|(a, b)| intersect([&self.planes[a], &self.planes[b], &self.planes[id]]))
                        .expect("edge crosses the cutting plane"),
                };
                let mut planes = shared;
                planes.push(id);
                next.push(Vertex { h, planes });
            }
        }
        self.vertices = next;
    }

    fn touches_box(&self) -> bool {
        self.vertices.iter().any(|v| v.planes.iter().any(|&p| self.planes[p].source.is_none()))
    }

    /// Planes carrying at least three vertices, each with its vertex cycle.
    fn facets(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for p in 0..self.planes.len() {
            let on: Vec<usize> = (0..self.vertices.len()).filter(|&v| self.vertices[v].planes.contains(&p)).collect();
            if on.len() < 3 {
                continue;
            }
            let adjacent = |a: usize, b: usize| self.vertices[a].shared(&self.vertices[b]).len() >= 2;
            let mut cycle = vec![on[0]];
            let mut used = BTreeSet::from([on[0]]);
            while cycle.len() < on.len() {
                let last = *cycle.last().unwrap();
                match on.iter().find(|&&v| !used.contains(&v) && adjacent(last, v)) {
                    Some(&v) => {
                        cycle.push(v);
                        used.insert(v);
                    }
                    None => break,
                }
            }
            out.push((p, cycle));
        }
        out
    }

    /// Exact volume by fanning every facet to the origin.
    fn volume(&self) -> Rational {
        let mut total = Rational::zero();
        for (_, cycle) in self.facets() {
            let v0 = &self.vertices[cycle[0]].h;
            for w in cycle[1..].windows(2) {
                let (v1, v2) = (&self.vertices[w[0]].h, &self.vertices[w[1]].h);
                let m = [[v0[0], v0[1], v0[2]], [v1[0], v1[1], v1[2]], [v2[0], v2[1], v2[2]]].map(|r| r.map(BigInt::from));
                let det = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
                    - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
                    + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
                let den = BigInt::from(6) * BigInt::from(v0[3]) * BigInt::from(v1[3]) * BigInt::from(v2[3]);
                total += Rational::new(det.abs(), den);
            }
        }
        total
    }
}

/// Facet of a Voronoi cell: the bisector `normal · z <= offset`, with
/// `normal = y - x` for the neighbour `y` of the centre `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Site,
    pub offset: Rational,
    /// Vertex indices in cyclic order around the facet.
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolytope {
    pub center: Site,
    pub vertices: Vec<[Rational; 3]>,
    pub facets: Vec<Facet>,
    volume: Rational,
    cutoff: i64,
}

impl RationalPolytope {
    fn from_clipper(cl: &Clipper, center: Site, cutoff: i64) -> Result<Self> {
        let vertices = cl
            .vertices
            .iter()
            .map(|v| {
                let [x, y, z] = v.to_rational();
                [x + Rational::from_integer(center.x().into()), y + Rational::from_integer(center.y().into()), z + Rational::from_integer(center.z().into())]
            })
            .collect();
        let mut facets = Vec::new();
        for (p, cycle) in cl.facets() {
            let q = cl.planes[p].source.ok_or_else(|| Error::UnboundedCell(cutoff))?;
            let offset = Rational::from_integer(q.dot(&center).into()) + Rational::new(q.sq_norm().into(), 2.into());
            facets.push(Facet { normal: q, offset, vertices: cycle });
        }
        let volume = cl.volume();
        if facets.len() < 4 || volume.is_zero() {
            return Err(Error::DegeneratePolytope(format!("{} facets, volume {volume}", facets.len())));
        }
        Ok(RationalPolytope { center, vertices, facets, volume, cutoff })
    }

    pub fn volume(&self) -> &Rational {
        &self.volume
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        // Euler: V - E + F = 2
        self.vertices.len() + self.facets.len() - 2
    }

    /// Neighbour cutoff radius at which the cell was certified.
    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    /// Whether `z` satisfies every facet inequality.
    pub fn contains(&self, z: &[Rational; 3]) -> bool {
        self.facets.iter().all(|f| {
            let n = f.normal;
            let lhs = &z[0] * Rational::from_integer(n.x().into())
                + &z[1] * Rational::from_integer(n.y().into())
                + &z[2] * Rational::from_integer(n.z().into());
            lhs <= f.offset
        })
    }
}

/// Exact volume of a cell.
pub fn cell_volume(p: &RationalPolytope) -> Rational {
    p.volume.clone()
}

/// Neighbours of `x` (as offsets `y - x`) within squared radius `bound`, nearest first.
fn neighbor_offsets(c: &Configuration, x: Site, bound: i64) -> Vec<Site> {
    let q = c.quotient();
    let mut out: Vec<Site> = c
        .sites()
        .into_iter()
        .flat_map(|o| q.images_within(o - x, bound))
        .filter(|d| !d.is_zero())
        .collect();
    out.sort_by_key(|d| (d.sq_norm(), *d));
    out
}

fn clip_with(neighbors: &[Site], box_r: i64) -> Clipper {
    let mut cl = Clipper::cube(box_r);
    for &q in neighbors {
        if !cl.reaches(q) {
            // sorted by norm: nothing further out can cut either
            break;
        }
        cl.cut_by_neighbor(q);
    }
    cl
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

/// Voronoi cell of the occupied site `x` in the periodic configuration.
///
/// Neighbours are taken within radius `r`, starting at `2⌈√d2⌉` and doubling
/// until every vertex lies strictly within `r/2` of `x`.
pub fn voronoi_cell(c: &Configuration, x: Site) -> Result<RationalPolytope> {
    if !c.is_occupied(x) {
        return Err(Error::NotOccupied(x));
    }
    let mut r = 2 * isqrt_ceil(c.d2().max(1));
    for _ in 0..=MAX_DOUBLINGS {
        let neighbors = neighbor_offsets(c, x, r * r);
        let cl = clip_with(&neighbors, r);
        if !cl.touches_box() && cl.vertices.iter().all(|v| v.inside_half_radius(r * r)) {
            return RationalPolytope::from_clipper(&cl, x, r);
        }
        r *= 2;
    }
    Err(Error::UnboundedCell(r / 2))
}

/// Sum of the cell volumes of one fundamental domain equals its index.
pub fn tessellation_check(c: &Configuration) -> Result<bool> {
    let mut total = Rational::zero();
    for x in c.sites() {
        total += voronoi_cell(c, x)?.volume;
    }
    Ok(total == Rational::from_integer((c.quotient().len() as i64).into()))
}

/// Cell of the origin for an explicit finite set of neighbour points.
pub fn cell_of_origin(neighbors: &[Site], box_r: i64) -> Result<RationalPolytope> {
    let mut sorted: Vec<Site> = neighbors.iter().copied().filter(|p| !p.is_zero()).collect();
    sorted.sort_by_key(|d| (d.sq_norm(), *d));
    let cl = clip_with(&sorted, box_r);
    if cl.touches_box() {
        return Err(Error::UnboundedCell(box_r));
    }
    RationalPolytope::from_clipper(&cl, Site::ZERO, box_r)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MinCellOptions {
    pub node_budget: Option<u64>,
    /// Also track the second-smallest distinct volume (prunes less).
    pub track_gap: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinCellResult {
    /// Smallest cell volume found, if any neighbourhood closed inside the ball.
    pub best: Option<Rational>,
    /// Neighbour set attaining `best`, restricted to points that shape the cell.
    pub witness: Vec<Site>,
    /// Next distinct volume above `best`, when tracked.
    pub second: Option<Rational>,
    /// Whether the search finished within the budget.
    pub completed: bool,
    pub nodes: u64,
}

impl MinCellResult {
    /// `second - best`, known only for a completed search with gap tracking.
    pub fn gap(&self) -> Option<Rational> {
        match (&self.best, &self.second, self.completed) {
            (Some(b), Some(s), true) => Some(s - b),
            _ => None,
        }
    }
}

struct CellSearch {
    d2: i64,
    candidates: Vec<Site>,
    /// Squared norm beyond the last candidate.
    horizon: i64,
    box_r: i64,
    budget: Option<u64>,
    track_gap: bool,
    nodes: u64,
    exhausted: bool,
    best: Option<Rational>,
    second: Option<Rational>,
    witness: Vec<Site>,
}

impl CellSearch {
    fn compatible(&self, chosen: &[Site], p: Site) -> bool {
        chosen.iter().all(|&s| (s - p).sq_norm() >= self.d2)
    }

    fn threshold(&self) -> Option<&Rational> {
        if self.track_gap {
            self.second.as_ref()
        } else {
            self.best.as_ref()
        }
    }

    fn record(&mut self, vol: Rational, chosen: &[Site], cell: &Clipper) {
        match &self.best {
            Some(b) if vol == *b => {}
            Some(b) if vol > *b => {
                if self.second.as_ref().is_none_or(|s| vol < *s) {
                    self.second = Some(vol);
                }
            }
            _ => {
                self.second = self.best.take();
                self.best = Some(vol);
                let mut w: Vec<Site> = chosen
                    .iter()
                    .copied()
                    .filter(|q| cell.planes.iter().any(|p| p.source == Some(*q)))
                    .collect();
                w.sort();
                self.witness = w;
            }
        }
    }

    /// `4|v|² <= norm` for every vertex.
    fn determined_below(cell: &Clipper, norm: i64) -> bool {
        cell.vertices.iter().all(|v| {
            let n2: i128 = v.h[..3].iter().map(|x| x * x).sum();
            4 * n2 <= norm as i128 * v.h[3] * v.h[3]
        })
    }

    fn dfs(&mut self, next: usize, chosen: &mut Vec<Site>) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.budget.is_some_and(|b| self.nodes > b) {
            self.exhausted = true;
            return;
        }
        let cell = clip_with(chosen, self.box_r);
        let next_norm = self.candidates.get(next).map_or(self.horizon, |p| p.sq_norm());
        if Self::determined_below(&cell, next_norm) {
            if !cell.touches_box() {
                let vol = cell.volume();
                self.record(vol, chosen, &cell);
            }
            return;
        }
        if let Some(t) = self.threshold() {
            let mut all: Vec<Site> = chosen.clone();
            all.extend(self.candidates[next..].iter().copied().filter(|&p| self.compatible(chosen, p)));
            let lower = clip_with(&all, self.box_r);
            if !lower.touches_box() && lower.volume() >= *t {
                return;
            }
        }
        let p = self.candidates[next];
        if self.compatible(chosen, p) {
            chosen.push(p);
            self.dfs(next + 1, chosen);
            chosen.pop();
        }
        self.dfs(next + 1, chosen);
    }
}

/// Best-effort search for the smallest Voronoi cell of the origin over
/// admissible neighbourhoods inside the ball of the given radius.
///
/// Candidates are visited nearest first, each included (when compatible) before
/// it is excluded. A branch ends once no remaining candidate can reach the
/// cell; branches are pruned by the cell of all still-compatible candidates,
/// which bounds every completion from below.
pub fn min_cell_search(d2: i64, radius: i64, opts: MinCellOptions) -> Result<MinCellResult> {
    if d2 < 1 {
        return Err(Error::InvalidD2(d2));
    }
    if radius * radius < d2 {
        return Err(Error::InvalidArgument(format!("radius {radius} is below the exclusion distance")));
    }
    let r2 = radius * radius;
    let mut candidates = Vec::new();
    for x in -radius..=radius {
        for y in -radius..=radius {
            for z in -radius..=radius {
                let p = Site::new(x, y, z);
                let n = p.sq_norm();
                if n >= d2 && n <= r2 {
                    candidates.push(p);
                }
            }
        }
    }
    candidates.sort_by_key(|p| (p.sq_norm(), *p));
    let mut search = CellSearch {
        d2,
        candidates,
        horizon: r2 + 1,
        box_r: radius,
        budget: opts.node_budget,
        track_gap: opts.track_gap,
        nodes: 0,
        exhausted: false,
        best: None,
        second: None,
        witness: Vec::new(),
    };
    search.dfs(0, &mut Vec::new());
    Ok(MinCellResult {
        best: search.best,
        witness: search.witness,
        second: search.second,
        completed: !search.exhausted,
        nodes: search.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{dfcc5, dhcp5, known_configuration};
    use crate::lattice::{symmetry_group, Quotient, SublatticeBasis};
    use std::sync::Arc;

    fn int(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn cube_cell() {
        let q = Arc::new(Quotient::diagonal(4).unwrap());
        let c = Configuration::new(q, 4, [Site::ZERO, Site::new(2, 0, 0), Site::new(0, 2, 0), Site::new(0, 0, 2), Site::new(2, 2, 0), Site::new(2, 0, 2), Site::new(0, 2, 2), Site::new(2, 2, 2)]).unwrap();
        let cell = voronoi_cell(&c, Site::ZERO).unwrap();
        assert_eq!(*cell.volume(), int(8));
        assert_eq!(cell.facet_count(), 6);
        assert_eq!(cell.vertex_count(), 8);
        let one = int(1);
        for v in &cell.vertices {
            assert!(v.iter().all(|x| x.abs() == one));
        }
    }

    #[test]
    fn fcc_and_bcc_cells() {
        let a3 = known_configuration(2, 1, 1).unwrap();
        let cell = voronoi_cell(&a3, Site::ZERO).unwrap();
        assert_eq!(cell.facet_count(), 12);
        assert_eq!(cell.vertex_count(), 14);
        assert_eq!(*cell.volume(), int(2));
        assert!(cell.facets.iter().all(|f| f.vertices.len() == 4));

        let bcc = known_configuration(3, 1, 1).unwrap();
        let cell = voronoi_cell(&bcc, Site::ZERO).unwrap();
        assert_eq!(cell.facet_count(), 14);
        assert_eq!(cell.vertex_count(), 24);
        assert_eq!(*cell.volume(), int(4));
    }

    #[test]
    fn catalog_volumes_match_index() {
        for (d2, variant) in crate::catalog::CATALOG {
            if d2 == 11 {
                continue;
            }
            let c = known_configuration(d2, variant, 1).unwrap();
            let cell = voronoi_cell(&c, c.sites()[0]).unwrap();
            assert_eq!(*cell.volume(), int(c.quotient().len() as i64), "d2 = {d2}/{variant}");
        }
    }

    #[test]
    fn layered_cells_tessellate() {
        for c in [dfcc5(), dhcp5()] {
            assert!(tessellation_check(&c).unwrap());
        }
        let c = dhcp5();
        for x in c.sites() {
            assert_eq!(*voronoi_cell(&c, x).unwrap().volume(), int(9));
        }
    }

    #[test]
    fn cells_respect_point_symmetry() {
        let c = known_configuration(2, 1, 1).unwrap();
        let cell = voronoi_cell(&c, Site::ZERO).unwrap();
        let verts: BTreeSet<_> = cell.vertices.iter().cloned().collect();
        for op in symmetry_group() {
            let m = op.matrix();
            let img: BTreeSet<[Rational; 3]> = cell
                .vertices
                .iter()
                .map(|v| {
                    [0, 1, 2].map(|i| (0..3).fold(Rational::zero(), |acc, j| acc + &v[j] * int(m[i][j])))
                })
                .collect();
            assert_eq!(img, verts);
        }
    }

    #[test]
    fn off_origin_cell_is_translated() {
        let c = known_configuration(3, 1, 2).unwrap();
        let x = Site::new(1, 1, 1);
        let cell = voronoi_cell(&c, x).unwrap();
        assert_eq!(*cell.volume(), int(4));
        let centre = [int(1), int(1), int(1)];
        assert!(cell.contains(&centre));
        assert!(!cell.contains(&[int(3), int(3), int(3)]));
    }

    #[test]
    fn unoccupied_site_is_rejected() {
        let c = known_configuration(2, 1, 2).unwrap();
        assert!(matches!(voronoi_cell(&c, Site::new(1, 0, 0)), Err(Error::NotOccupied(_))));
    }

    #[test]
    fn sparse_torus_cell() {
        let q = Arc::new(Quotient::new(SublatticeBasis::diagonal(5, 3, 2).unwrap()));
        let c = Configuration::new(q, 4, [Site::ZERO]).unwrap();
        assert_eq!(*voronoi_cell(&c, Site::ZERO).unwrap().volume(), int(30));
    }

    #[test]
    fn min_cell_small_cases() {
        let r = min_cell_search(2, 3, MinCellOptions::default()).unwrap();
        assert!(r.completed);
        assert_eq!(r.best, Some(int(2)));
        assert_eq!(r.witness.len(), 12);

        let r = min_cell_search(3, 3, MinCellOptions { node_budget: Some(200_000), track_gap: false }).unwrap();
        assert!(r.completed);
        assert_eq!(r.best, Some(int(4)));
    }

    #[test]
    fn min_cell_partial() {
        let r = min_cell_search(5, 3, MinCellOptions { node_budget: Some(50), track_gap: false }).unwrap();
        assert!(!r.completed);
        if let Some(b) = r.best {
            assert!(b >= int(9));
        }
    }
}
