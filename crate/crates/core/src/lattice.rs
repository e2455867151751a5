//! Exact integer lattice geometry on Z^3.
//!
//! Sites are integer triples. Sublattices are given by three generators
//! (rows) and canonicalized by a lower-triangular Hermite normal form.
//! Short-vector and closest-point queries are answered by exhaustive
//! enumeration inside a coefficient box derived from the Gram matrix, so
//! every answer is exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use num_integer::Integer;

use crate::error::{Error, Result};

/// A point of Z^3.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(pub [i64; 3]);

impl Site {
    pub const ZERO: Site = Site([0, 0, 0]);

    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        Site([x, y, z])
    }

    pub fn x(&self) -> i64 {
        self.0[0]
    }

    pub fn y(&self) -> i64 {
        self.0[1]
    }

    pub fn z(&self) -> i64 {
        self.0[2]
    }

    pub fn dot(&self, other: &Site) -> i64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Squared Euclidean norm x² + y² + z².
    pub fn sq_norm(&self) -> i64 {
        self.dot(self)
    }

    pub fn cross(&self, other: &Site) -> Site {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Site([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }
}

/// Squared Euclidean norm of a site.
pub fn sq_norm(v: Site) -> i64 {
    v.sq_norm()
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

impl From<[i64; 3]> for Site {
    fn from(v: [i64; 3]) -> Self {
        Site(v)
    }
}

impl Index<usize> for Site {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl Add for Site {
    type Output = Site;
    fn add(self, o: Site) -> Site {
        Site([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Site {
    fn add_assign(&mut self, o: Site) {
        *self = *self + o;
    }
}

impl Sub for Site {
    type Output = Site;
    fn sub(self, o: Site) -> Site {
        Site([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl SubAssign for Site {
    fn sub_assign(&mut self, o: Site) {
        *self = *self - o;
    }
}

impl Neg for Site {
    type Output = Site;
    fn neg(self) -> Site {
        Site([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<Site> for i64 {
    type Output = Site;
    fn mul(self, v: Site) -> Site {
        Site([self * v.0[0], self * v.0[1], self * v.0[2]])
    }
}

/// A signed permutation of the coordinate axes: `(op v)[i] = signs[i] * v[perm[i]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymmetryOp {
    perm: [usize; 3],
    signs: [i64; 3],
}

impl SymmetryOp {
    pub const IDENTITY: SymmetryOp = SymmetryOp { perm: [0, 1, 2], signs: [1, 1, 1] };

    /// Builds an op from a permutation and signs; `None` if `perm` is not a permutation
    /// of `0..3` or a sign is not ±1.
    pub fn new(perm: [usize; 3], signs: [i64; 3]) -> Option<Self> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || seen[p] {
                return None;
            }
            seen[p] = true;
        }
        if signs.iter().any(|s| s.abs() != 1) {
            return None;
        }
        Some(SymmetryOp { perm, signs })
    }

    pub fn apply(&self, v: Site) -> Site {
        Site([
            self.signs[0] * v.0[self.perm[0]],
            self.signs[1] * v.0[self.perm[1]],
            self.signs[2] * v.0[self.perm[2]],
        ])
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SymmetryOp) -> SymmetryOp {
        let mut perm = [0; 3];
        let mut signs = [0; 3];
        for i in 0..3 {
            perm[i] = other.perm[self.perm[i]];
            signs[i] = self.signs[i] * other.signs[self.perm[i]];
        }
        SymmetryOp { perm, signs }
    }

    pub fn inverse(&self) -> SymmetryOp {
        let mut perm = [0; 3];
        let mut signs = [0; 3];
        for i in 0..3 {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        SymmetryOp { perm, signs }
    }

    /// The 3×3 matrix with exactly one nonzero entry per row and column.
    pub fn matrix(&self) -> [[i64; 3]; 3] {
        let mut m = [[0; 3]; 3];
        for i in 0..3 {
            m[i][self.perm[i]] = self.signs[i];
        }
        m
    }

    pub fn determinant(&self) -> i64 {
        let [a, b, c] = self.perm;
        let inversions = (a > b) as u32 + (a > c) as u32 + (b > c) as u32;
        let parity = if inversions % 2 == 0 { 1 } else { -1 };
        parity * self.signs.iter().product::<i64>()
    }
}

impl Default for SymmetryOp {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// The applied form of a symmetry op.
pub fn apply_symmetry(op: &SymmetryOp, v: Site) -> Site {
    op.apply(v)
}

/// All 48 signed permutation matrices, in a fixed order starting with the identity.
pub fn symmetry_group() -> &'static [SymmetryOp] {
    static GROUP: OnceLock<Vec<SymmetryOp>> = OnceLock::new();
    GROUP.get_or_init(|| {
        const PERMS: [[usize; 3]; 6] =
            [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut ops = Vec::with_capacity(48);
        for perm in PERMS {
            for bits in 0..8u32 {
                let signs = [0, 1, 2].map(|i| if bits >> i & 1 == 1 { -1 } else { 1 });
                ops.push(SymmetryOp { perm, signs });
            }
        }
        ops
    })
}

fn det3(rows: &[Site; 3]) -> i128 {
    let m = |i: usize, j: usize| rows[i].0[j] as i128;
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

/// Three generators of a full-rank sublattice of Z^3 (stored as rows).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SublatticeBasis {
    rows: [Site; 3],
}

impl SublatticeBasis {
    pub fn new(g1: Site, g2: Site, g3: Site) -> Result<Self> {
        let rows = [g1, g2, g3];
        if det3(&rows) == 0 {
            return Err(Error::SingularBasis);
        }
        Ok(SublatticeBasis { rows })
    }

    pub fn from_rows(rows: [[i64; 3]; 3]) -> Result<Self> {
        Self::new(Site(rows[0]), Site(rows[1]), Site(rows[2]))
    }

    /// Diagonal lattice `diag(a, b, c)`.
    pub fn diagonal(a: i64, b: i64, c: i64) -> Result<Self> {
        Self::new(Site::new(a, 0, 0), Site::new(0, b, 0), Site::new(0, 0, c))
    }

    /// Canonical HNF basis of the lattice generated by an arbitrary list of vectors.
    pub fn from_generators(gens: &[Site]) -> Result<Self> {
        hnf_of_generators(gens)
    }

    pub fn generators(&self) -> [Site; 3] {
        self.rows
    }

    pub fn determinant(&self) -> i128 {
        det3(&self.rows)
    }

    pub fn index(&self) -> u64 {
        self.determinant().unsigned_abs() as u64
    }

    pub fn scaled(&self, k: i64) -> Result<Self> {
        Self::new(k * self.rows[0], k * self.rows[1], k * self.rows[2])
    }

    pub fn transformed(&self, op: &SymmetryOp) -> Self {
        SublatticeBasis { rows: self.rows.map(|r| op.apply(r)) }
    }

    pub fn hnf(&self) -> Self {
        hnf_of_generators(&self.rows).expect("nonsingular basis")
    }

    pub fn contains(&self, v: Site) -> bool {
        lattice_contains(self, v)
    }

    /// Row-major flattening, used for lexicographic comparisons of HNFs.
    pub fn flat(&self) -> [i64; 9] {
        let mut out = [0; 9];
        for (i, r) in self.rows.iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(&r.0);
        }
        out
    }
}

impl fmt::Display for SublatticeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}, {}}}", self.rows[0], self.rows[1], self.rows[2])
    }
}

fn hnf_of_generators(gens: &[Site]) -> Result<SublatticeBasis> {
    let mut pool: Vec<[i128; 3]> =
        gens.iter().map(|g| g.0.map(|c| c as i128)).filter(|r| *r != [0; 3]).collect();
    let mut out = [[0i128; 3]; 3];
    for col in (0..3).rev() {
        loop {
            pool.retain(|r| *r != [0; 3]);
            let pivot = pool
                .iter()
                .enumerate()
                .filter(|(_, r)| r[col] != 0)
                .min_by_key(|(_, r)| r[col].abs())
                .map(|(i, _)| i);
            let Some(p) = pivot else { return Err(Error::SingularBasis) };
            let prow = pool[p];
            let mut done = true;
            for (i, r) in pool.iter_mut().enumerate() {
                if i == p || r[col] == 0 {
                    continue;
                }
                let q = Integer::div_floor(&r[col], &prow[col]);
                for k in 0..3 {
                    r[k] -= q * prow[k];
                }
                if r[col] != 0 {
                    done = false;
                }
            }
            if done {
                let mut row = pool.swap_remove(p);
                if row[col] < 0 {
                    row = row.map(|c| -c);
                }
                out[col] = row;
                break;
            }
        }
        // rows left in the pool now vanish in columns >= col
    }
    for i in 1..3 {
        for j in (0..i).rev() {
            let q = Integer::div_floor(&out[i][j], &out[j][j]);
            for k in 0..3 {
                out[i][k] -= q * out[j][k];
            }
        }
    }
    let to_site = |r: [i128; 3]| -> Result<Site> {
        let c = r.map(i64::try_from);
        match c {
            [Ok(a), Ok(b), Ok(c)] => Ok(Site([a, b, c])),
            _ => Err(Error::Overflow),
        }
    };
    Ok(SublatticeBasis { rows: [to_site(out[0])?, to_site(out[1])?, to_site(out[2])?] })
}

/// Lower-triangular Hermite normal form: positive diagonal, entries below the
/// diagonal reduced into `[0, d_j)`.
pub fn hnf(basis: &SublatticeBasis) -> SublatticeBasis {
    basis.hnf()
}

/// `|det|` of the basis: the number of cosets of the sublattice in Z^3.
pub fn lattice_index(basis: &SublatticeBasis) -> u64 {
    basis.index()
}

/// Whether `v` is an integer combination of the generators.
pub fn lattice_contains(basis: &SublatticeBasis, v: Site) -> bool {
    let h = basis.hnf();
    let mut w = v;
    for col in (0..3).rev() {
        let d = h.rows[col].0[col];
        if w.0[col] % d != 0 {
            return false;
        }
        w = w - (w.0[col] / d) * h.rows[col];
    }
    w.is_zero()
}

/// Lexicographically least HNF over the 48 point-symmetry images.
pub fn canonical_class_rep(basis: &SublatticeBasis) -> SublatticeBasis {
    symmetry_group()
        .iter()
        .map(|op| basis.transformed(op).hnf())
        .min_by_key(|b| b.flat())
        .expect("group is nonempty")
}

/// Exact enumeration of lattice points near a target.
///
/// Holds a pairwise-reduced basis together with its Gram adjugate; the
/// coefficient box `|c_i - t_i| <= sqrt(R * adj(G)_ii / det G)` contains every
/// lattice point within squared distance `R` of the target.
#[derive(Clone, Debug)]
pub(crate) struct Enumerator {
    basis: [Site; 3],
    det: i128,
    adj_basis: [[i128; 3]; 3],
    gram_det: i128,
    gram_adj_diag: [i128; 3],
}

impl Enumerator {
    pub(crate) fn new(basis: &SublatticeBasis) -> Self {
        let b = pairwise_reduce(basis.rows);
        let det = det3(&b);
        let m = |i: usize, j: usize| b[i].0[j] as i128;
        // adjugate: inverse(B) = adj / det, B rows are generators
        let mut adj = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (r1, r2) = ((j + 1) % 3, (j + 2) % 3);
                let (c1, c2) = ((i + 1) % 3, (i + 2) % 3);
                adj[i][j] = m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1);
            }
        }
        let mut gram = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] = b[i].dot(&b[j]) as i128;
            }
        }
        let g = |i: usize, j: usize| gram[i][j];
        let gram_adj_diag = [
            g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1),
            g(0, 0) * g(2, 2) - g(0, 2) * g(2, 0),
            g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0),
        ];
        Enumerator { basis: b, det, adj_basis: adj, gram_det: det * det, gram_adj_diag }
    }

    pub(crate) fn basis(&self) -> &[Site; 3] {
        &self.basis
    }

    /// Calls `f` on every lattice point `p` with `|p - target|² <= bound`.
    pub(crate) fn for_each_near(&self, target: Site, bound: i64, mut f: impl FnMut(Site)) {
        if bound < 0 {
            return;
        }
        let mut ranges = [(0i64, 0i64); 3];
        for i in 0..3 {
            // coefficient of the target along generator i: (t · adj column i) / det
            let num: i128 = (0..3).map(|k| target.0[k] as i128 * self.adj_basis[k][i]).sum();
            let (lo_t, hi_t) = floor_ceil_div(num, self.det);
            let s = ceil_sqrt_ratio(bound as i128 * self.gram_adj_diag[i], self.gram_det);
            ranges[i] = ((lo_t as i64) - s, (hi_t as i64) + s);
        }
        let [b0, b1, b2] = self.basis;
        for c0 in ranges[0].0..=ranges[0].1 {
            let p0 = c0 * b0;
            for c1 in ranges[1].0..=ranges[1].1 {
                let p1 = p0 + c1 * b1;
                for c2 in ranges[2].0..=ranges[2].1 {
                    let p = p1 + c2 * b2;
                    if (p - target).sq_norm() <= bound {
                        f(p);
                    }
                }
            }
        }
    }
}

fn floor_ceil_div(num: i128, den: i128) -> (i128, i128) {
    (Integer::div_floor(&num, &den), -Integer::div_floor(&(-num), &den))
}

/// Smallest `s >= 0` with `s² * den >= num` (num, den > 0).
fn ceil_sqrt_ratio(num: i128, den: i128) -> i64 {
    if num <= 0 {
        return 0;
    }
    let approx = ((num as f64) / (den as f64)).sqrt().floor() as i128;
    let mut s = approx.max(0);
    while s > 0 && (s - 1) * (s - 1) * den >= num {
        s -= 1;
    }
    while s * s * den < num {
        s += 1;
    }
    s as i64
}

/// Greedy pairwise size reduction. Only shrinks enumeration boxes; exactness
/// never depends on how well it does.
fn pairwise_reduce(mut b: [Site; 3]) -> [Site; 3] {
    loop {
        let mut changed = false;
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                for cand in [b[i] - b[j], b[i] + b[j]] {
                    if cand.sq_norm() < b[i].sq_norm() {
                        b[i] = cand;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return b;
        }
    }
}

/// Minimum squared norm over nonzero lattice vectors and every vector attaining it.
pub fn shortest_vectors(basis: &SublatticeBasis) -> (i64, Vec<Site>) {
    let en = Enumerator::new(basis);
    let bound = en.basis().iter().map(Site::sq_norm).min().expect("three rows");
    let mut best = bound;
    let mut found = Vec::new();
    en.for_each_near(Site::ZERO, bound, |p| {
        if p.is_zero() {
            return;
        }
        let n = p.sq_norm();
        match n.cmp(&best) {
            Ordering::Less => {
                best = n;
                found.clear();
                found.push(p);
            }
            Ordering::Equal => found.push(p),
            Ordering::Greater => {}
        }
    });
    found.sort();
    (best, found)
}

/// The finite torus Z^3 / P.
///
/// Coset representatives are the points of the HNF fundamental box
/// `[0,d1) × [0,d2) × [0,d3)`, indexed in lexicographic order.
#[derive(Debug)]
pub struct Quotient {
    period: SublatticeBasis,
    hnf: SublatticeBasis,
    diag: [i64; 3],
    enumerator: Enumerator,
    min_period: OnceLock<(i64, Vec<Site>)>,
    distance_table: OnceLock<Vec<i64>>,
}

impl Clone for Quotient {
    fn clone(&self) -> Self {
        Quotient::new(self.period)
    }
}

impl PartialEq for Quotient {
    fn eq(&self, other: &Self) -> bool {
        self.hnf == other.hnf
    }
}

impl Eq for Quotient {}

impl Quotient {
    pub fn new(period: SublatticeBasis) -> Self {
        let hnf = period.hnf();
        let diag = [hnf.rows[0].0[0], hnf.rows[1].0[1], hnf.rows[2].0[2]];
        Quotient {
            period,
            hnf,
            diag,
            enumerator: Enumerator::new(&hnf),
            min_period: OnceLock::new(),
            distance_table: OnceLock::new(),
        }
    }

    pub fn diagonal(l: i64) -> Result<Self> {
        Ok(Self::new(SublatticeBasis::diagonal(l, l, l)?))
    }

    /// The basis the quotient was built from.
    pub fn period(&self) -> &SublatticeBasis {
        &self.period
    }

    pub fn hnf(&self) -> &SublatticeBasis {
        &self.hnf
    }

    /// Number of cosets.
    pub fn len(&self) -> usize {
        (self.diag[0] * self.diag[1] * self.diag[2]) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Reduces a site to its representative in the fundamental box.
    pub fn reduce(&self, v: Site) -> Site {
        let mut w = v;
        for col in (0..3).rev() {
            let d = self.diag[col];
            let q = Integer::div_floor(&w.0[col], &d);
            w = w - q * self.hnf.rows[col];
        }
        w
    }

    pub fn index_of(&self, v: Site) -> usize {
        let r = self.reduce(v);
        ((r.0[0] * self.diag[1] + r.0[1]) * self.diag[2] + r.0[2]) as usize
    }

    pub fn rep(&self, index: usize) -> Site {
        let i = index as i64;
        let z = i % self.diag[2];
        let y = (i / self.diag[2]) % self.diag[1];
        let x = i / (self.diag[2] * self.diag[1]);
        Site::new(x, y, z)
    }

    /// All coset representatives, lexicographically ordered.
    pub fn representatives(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len()).map(|i| self.rep(i))
    }

    pub fn same_coset(&self, a: Site, b: Site) -> bool {
        self.reduce(a - b).is_zero()
    }

    /// Minimum nonzero squared norm of the period lattice.
    pub fn min_period_norm(&self) -> i64 {
        self.min_period.get_or_init(|| shortest_vectors(&self.hnf)).0
    }

    /// Period vectors of minimal norm.
    pub fn shortest_periods(&self) -> &[Site] {
        &self.min_period.get_or_init(|| shortest_vectors(&self.hnf)).1
    }

    /// `min_{p ∈ P} |d + p|²`, exact.
    pub fn min_image_sq_norm(&self, d: Site) -> i64 {
        let r = self.reduce(d);
        let bound = r.sq_norm();
        let mut best = bound;
        // lattice points q near r: |r - q|² is the squared norm of an image of d
        self.enumerator.for_each_near(r, bound, |q| best = best.min((r - q).sq_norm()));
        best
    }

    /// Minimum-image squared distance between the cosets of `a` and `b`.
    pub fn min_image_sq_distance(&self, a: Site, b: Site) -> i64 {
        self.min_image_sq_norm(a - b)
    }

    /// Minimum-image squared norm of every coset, indexed like the representatives.
    /// Computed once and cached.
    pub fn distance_table(&self) -> &[i64] {
        self.distance_table
            .get_or_init(|| self.representatives().map(|r| self.min_image_sq_norm(r)).collect())
    }

    /// Every image `d + p` (`p ∈ P`) with squared norm at most `bound`.
    pub fn images_within(&self, d: Site, bound: i64) -> Vec<Site> {
        let mut out = Vec::new();
        // d + p with |d + p|² <= bound  <=>  lattice point q = -p near d
        self.enumerator.for_each_near(d, bound, |q| out.push(d - q));
        out.sort();
        out
    }
}

/// Quotient with deterministic lexicographic coset order.
pub fn quotient(period: &SublatticeBasis) -> Quotient {
    Quotient::new(*period)
}

/// Free-function form of [`Quotient::min_image_sq_distance`].
pub fn min_image_sq_distance(q: &Quotient, a: Site, b: Site) -> i64 {
    q.min_image_sq_distance(a, b)
}
