//! Known perfect configurations: sublattices, planar meshes and layered stackings.
//!
//! A layered configuration is a union of translates `s_k + M` of one planar
//! mesh `M`, stacked along an integer normal `n` with constant spacing
//! `n · step`. Consecutive offsets differ by one of the family's step vectors;
//! the sequence of choices is the [`StackingWord`]. Words repeat periodically.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;

use crate::admissibility::{Configuration, WindowConfiguration};
use crate::error::{Error, Result};
use crate::lattice::{symmetry_group, Quotient, Site, SublatticeBasis};

const fn s(x: i64, y: i64, z: i64) -> Site {
    Site::new(x, y, z)
}

/// Every `(d2, variant)` pair with a catalog sublattice.
pub const CATALOG: [(i64, u8); 13] =
    [(2, 1), (3, 1), (4, 1), (5, 1), (6, 1), (6, 2), (8, 1), (9, 1), (9, 2), (10, 1), (10, 2), (11, 1), (12, 1)];

/// Sublattice perfect configuration for `d2`.
///
/// Variants: `d2 = 6` has family I (`1`, triangular layers) and family II
/// (`2`, rhombic layers); `d2 = 9` and `d2 = 10` have two mirror-image
/// variants. All other values take variant `1`. For `d2 = 5` the stacking
/// generator is `(2,1,0)`, which keeps index 9 and minimal norm 5.
pub fn known_sublattice(d2: i64, variant: u8) -> Result<SublatticeBasis> {
    let rows = match (d2, variant) {
        (2, 1) => [s(1, 1, 0), s(1, 0, 1), s(0, 1, 1)],
        (3, 1) => [s(2, 0, 0), s(0, 2, 0), s(1, 1, 1)],
        (4, 1) => [s(2, 0, 0), s(0, 2, 0), s(0, 0, 2)],
        (5, 1) => [s(1, -2, 1), s(-1, -1, 2), s(2, 1, 0)],
        (6, 1) => [s(1, -2, 1), s(-1, -1, 2), s(2, 1, 1)],
        (6, 2) => [s(1, 1, 2), s(1, 1, -2), s(2, -1, 1)],
        (8, 1) => [s(2, 2, 0), s(2, 0, 2), s(0, 2, 2)],
        (9, 1) => [s(0, 3, 1), s(0, -1, 3), s(2, 1, 2)],
        (9, 2) => [s(0, 3, -1), s(0, -1, -3), s(2, 1, -2)],
        (10, 1) => [s(-1, -3, 4), s(3, -4, 1), s(0, 3, -1)],
        (10, 2) => [s(-1, 4, -3), s(3, 1, -4), s(0, -1, 3)],
        (11, 1) | (12, 1) => [s(4, 0, 0), s(0, 4, 0), s(2, 2, 2)],
        _ => return Err(Error::UnknownCatalogEntry { d2, variant }),
    };
    SublatticeBasis::new(rows[0], rows[1], rows[2])
}

/// The sublattice as a one-particle configuration on `quotient(k·Λ)`.
pub fn known_configuration(d2: i64, variant: u8, scale: i64) -> Result<Configuration> {
    let lattice = known_sublattice(d2, variant)?;
    let period = lattice.scaled(scale)?;
    let q = Arc::new(Quotient::new(period));
    let sites: Vec<Site> = q.representatives().filter(|&r| lattice.contains(r)).collect();
    Configuration::new(q, d2, sites)
}

/// A planar rank-2 mesh `anchor + Z·g1 + Z·g2` lying in a plane with integer normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshSpec {
    pub generators: [Site; 2],
    pub anchor: Site,
    pub normal: Site,
}

impl MeshSpec {
    pub fn new(g1: Site, g2: Site, anchor: Site, normal: Site) -> Result<Self> {
        if g1.cross(&g2).is_zero() {
            return Err(Error::InvalidArgument("mesh generators are dependent".into()));
        }
        if g1.dot(&normal) != 0 || g2.dot(&normal) != 0 {
            return Err(Error::InvalidArgument("mesh generators are not orthogonal to the normal".into()));
        }
        Ok(MeshSpec { generators: [g1, g2], anchor, normal })
    }

    /// Whether `v` (a vector, not a point) lies in `Z·g1 + Z·g2`.
    pub fn contains_vector(&self, v: Site) -> bool {
        plane_coefficients(self.generators, v).is_some()
    }
}

/// Integer `(a, b)` with `v = a·g1 + b·g2`, if any.
fn plane_coefficients(g: [Site; 2], v: Site) -> Option<(i64, i64)> {
    let n = g[0].cross(&g[1]);
    if v.dot(&n) != 0 {
        return None;
    }
    let nn = n.sq_norm();
    let a_num = v.cross(&g[1]).dot(&n);
    let b_num = g[0].cross(&v).dot(&n);
    if a_num % nn != 0 || b_num % nn != 0 {
        return None;
    }
    Some((a_num / nn, b_num / nn))
}

pub const MESH_NAMES: [&str; 6] = ["tau2", "zeta4", "tau6", "zeta10", "tau26", "alpha8_16"];

/// One of the six named planar meshes.
pub fn known_mesh(name: &str) -> Result<MeshSpec> {
    let (g1, g2, normal) = match name {
        "tau2" => (s(1, -1, 0), s(1, 0, -1), s(1, 1, 1)),
        "zeta4" => (s(2, 0, 0), s(0, 2, 0), s(0, 0, 1)),
        "tau6" => (s(1, -2, 1), s(-1, -1, 2), s(1, 1, 1)),
        "zeta10" => (s(0, 3, 1), s(0, -1, 3), s(1, 0, 0)),
        "tau26" => (s(-1, -3, 4), s(3, -4, 1), s(1, 1, 1)),
        "alpha8_16" => (s(1, 1, 2), s(1, 1, -2), s(1, -1, 0)),
        _ => return Err(Error::UnknownMesh(name.to_string())),
    };
    MeshSpec::new(g1, g2, Site::ZERO, normal)
}

/// Stacking families: one mesh, one normal, and the admissible layer steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerFamily {
    /// FCC at `d2 = 2`: complete triangular layers, one step.
    Fcc2,
    /// Triangular 6-meshes at `d2 = 5`, steps into the two non-overlying cosets.
    Triangular5,
    /// Family I at `d2 = 6`: triangular 6-meshes, three steps.
    TriangularSix,
    /// Family II at `d2 = 6`: rhombic (8,16)-meshes, two steps.
    RhombicSix,
    /// Square 10-meshes at `d2 = 9`, one step.
    Square9,
}

impl LayerFamily {
    pub const ALL: [LayerFamily; 5] =
        [Self::Fcc2, Self::Triangular5, Self::TriangularSix, Self::RhombicSix, Self::Square9];

    pub fn d2(&self) -> i64 {
        match self {
            Self::Fcc2 => 2,
            Self::Triangular5 => 5,
            Self::TriangularSix | Self::RhombicSix => 6,
            Self::Square9 => 9,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fcc2 => "fcc",
            Self::Triangular5 => "tri",
            Self::TriangularSix => "I",
            Self::RhombicSix => "II",
            Self::Square9 => "square",
        }
    }

    /// Family for `d2`; `name` may be omitted when `d2` has only one family.
    pub fn lookup(d2: i64, name: Option<&str>) -> Result<Self> {
        let mut matching = Self::ALL.iter().filter(|f| f.d2() == d2);
        match name {
            Some(n) => matching
                .find(|f| f.name().eq_ignore_ascii_case(n))
                .copied()
                .ok_or_else(|| Error::UnknownFamily(format!("{n} (d2 = {d2})"))),
            None => {
                let first = matching.next().copied();
                match (first, matching.next()) {
                    (Some(f), None) => Ok(f),
                    (Some(_), Some(_)) => Err(Error::UnknownFamily(format!("d2 = {d2} needs a family name"))),
                    _ => Err(Error::UnknownFamily(format!("no layered family for d2 = {d2}"))),
                }
            }
        }
    }

    pub fn mesh(&self) -> MeshSpec {
        let name = match self {
            Self::Fcc2 => "tau2",
            Self::Triangular5 | Self::TriangularSix => "tau6",
            Self::RhombicSix => "alpha8_16",
            Self::Square9 => "zeta10",
        };
        known_mesh(name).expect("built-in mesh")
    }

    pub fn normal(&self) -> Site {
        self.mesh().normal
    }

    pub fn steps(&self) -> &'static [Site] {
        const FCC2: [Site; 1] = [s(1, 1, 0)];
        const TRI5: [Site; 2] = [s(2, 1, 0), s(1, 2, 0)];
        const SIX_I: [Site; 3] = [s(2, 1, 1), s(1, 2, 1), s(1, 1, 2)];
        const SIX_II: [Site; 2] = [s(2, -1, 1), s(1, -2, 1)];
        const SQ9: [Site; 1] = [s(2, 1, 2)];
        match self {
            Self::Fcc2 => &FCC2,
            Self::Triangular5 => &TRI5,
            Self::TriangularSix => &SIX_I,
            Self::RhombicSix => &SIX_II,
            Self::Square9 => &SQ9,
        }
    }

    /// Letters naming the steps, in step order.
    pub fn alphabet(&self) -> &'static [char] {
        match self {
            Self::TriangularSix => &['1', '2', '3'],
            Self::Triangular5 | Self::RhombicSix => &['S', 'T'],
            Self::Fcc2 | Self::Square9 => &['S'],
        }
    }

    /// Height difference `n · step` between neighbouring layers.
    pub fn spacing(&self) -> i64 {
        self.steps()[0].dot(&self.normal())
    }
}

impl fmt::Display for LayerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Sequence of layer steps for a family.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StackingWord {
    family: LayerFamily,
    steps: Vec<usize>,
}

impl StackingWord {
    pub fn new(family: LayerFamily, steps: Vec<usize>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidWord("empty word".into()));
        }
        if let Some(&bad) = steps.iter().find(|&&i| i >= family.steps().len()) {
            return Err(Error::InvalidWord(format!("step {bad} not allowed for family {family}")));
        }
        Ok(StackingWord { family, steps })
    }

    pub fn parse(family: LayerFamily, text: &str) -> Result<Self> {
        let alphabet = family.alphabet();
        let steps = text
            .trim()
            .chars()
            .map(|c| {
                let c = c.to_ascii_uppercase();
                alphabet.iter().position(|&a| a == c).ok_or_else(|| {
                    Error::InvalidWord(format!("letter `{c}` not in {:?} for family {family}", alphabet))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(family, steps)
    }

    pub fn family(&self) -> LayerFamily {
        self.family
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Offset of layer `k` (any integer `k`), with layer 0 at the origin.
    pub fn layer_offset(&self, k: i64) -> Site {
        let l = self.steps.len() as i64;
        let (q, r) = k.div_mod_floor(&l);
        let mut off = q * self.total_shift();
        for &i in &self.steps[..r as usize] {
            off += self.family.steps()[i];
        }
        off
    }

    /// Sum of all steps: the shift after one full word.
    pub fn total_shift(&self) -> Site {
        self.steps.iter().fold(Site::ZERO, |acc, &i| acc + self.family.steps()[i])
    }

    /// Whether `x` belongs to the infinite layered configuration.
    pub fn contains(&self, x: Site) -> bool {
        let mesh = self.family.mesh();
        let h = x.dot(&mesh.normal);
        let spacing = self.family.spacing();
        if h % spacing != 0 {
            return false;
        }
        mesh.contains_vector(x - self.layer_offset(h / spacing))
    }

    /// Period generated by the mesh and the total shift.
    pub fn natural_period(&self) -> Result<SublatticeBasis> {
        let [g1, g2] = self.family.mesh().generators;
        SublatticeBasis::new(g1, g2, self.total_shift())
    }

    /// Whether translation by `p` maps the layered set onto itself.
    pub fn is_period(&self, p: Site) -> bool {
        let spacing = self.family.spacing();
        let h = p.dot(&self.family.normal());
        if h % spacing != 0 {
            return false;
        }
        let j = h / spacing;
        let mesh = self.family.mesh();
        (0..self.steps.len() as i64)
            .all(|r| mesh.contains_vector(self.layer_offset(r + j) - self.layer_offset(r) - p))
    }
}

impl fmt::Display for StackingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alphabet = self.family.alphabet();
        for &i in &self.steps {
            write!(f, "{}", alphabet[i])?;
        }
        Ok(())
    }
}

/// Layered configuration on its natural period.
pub fn build_layered(word: &StackingWord) -> Result<Configuration> {
    let q = Arc::new(Quotient::new(word.natural_period()?));
    build_layered_on(word, q)
}

/// Layered configuration on a given torus; fails if the word does not close on it.
pub fn build_layered_on(word: &StackingWord, q: Arc<Quotient>) -> Result<Configuration> {
    for p in q.hnf().generators() {
        if !word.is_period(p) {
            return Err(Error::WordDoesNotClose(format!("{p} is not a period of word {word}")));
        }
    }
    let sites: Vec<Site> = q.representatives().filter(|&r| word.contains(r)).collect();
    Configuration::new(q, word.family().d2(), sites)
}

/// Layers `0..=len` of the word, cut to the box `[lo, hi]`, free boundary.
pub fn build_layered_window(word: &StackingWord, lo: Site, hi: Site) -> Result<WindowConfiguration> {
    let spacing = word.family().spacing();
    let normal = word.family().normal();
    let top = word.len() as i64 * spacing;
    let mut sites = Vec::new();
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            for z in lo[2]..=hi[2] {
                let p = Site::new(x, y, z);
                let h = p.dot(&normal);
                if (0..=top).contains(&h) && word.contains(p) {
                    sites.push(p);
                }
            }
        }
    }
    WindowConfiguration::new(lo, hi, word.family().d2(), sites)
}

/// Recovers the stacking word of a layered configuration along `normal`.
///
/// The normal may be any point-symmetry image of a family normal; the
/// configuration is mapped back first. The word is read starting at the layer
/// of the first occupied coset, so the result reproduces `c` up to translation.
pub fn classify_stacking(c: &Configuration, normal: Site) -> Result<StackingWord> {
    let (family, op) = LayerFamily::ALL
        .iter()
        .filter(|f| f.d2() == c.d2())
        .find_map(|f| symmetry_group().iter().find(|op| op.apply(normal) == f.normal()).map(|op| (*f, *op)))
        .ok_or_else(|| Error::NotLayered(format!("no layered family for d2 = {} with normal {normal}", c.d2())))?;

    let period = c.quotient().hnf().transformed(&op);
    let Some(&o0) = c.sites().first() else { return Err(Error::NotLayered("empty configuration".into())) };
    let sites: Vec<Site> = c.sites().iter().map(|&x| op.apply(x - o0)).collect();
    let q = Arc::new(Quotient::new(period));
    let moved = Configuration::new(q.clone(), c.d2(), sites.clone())?;

    let n = family.normal();
    let spacing = family.spacing();
    let heights = period.generators().map(|g| g.dot(&n));
    let (g, coeffs) = gcd3(heights);
    if g == 0 || g % spacing != 0 {
        return Err(Error::NotLayered(format!("period heights {heights:?} do not respect layer spacing {spacing}")));
    }
    let gens = period.generators();
    let climb = coeffs[0] * gens[0] + coeffs[1] * gens[1] + coeffs[2] * gens[2];
    let layers = g / spacing;
    let offsets = (0..=layers)
        .map(|k| {
            let target = k * spacing;
            sites
                .iter()
                .find(|o| (target - o.dot(&n)).rem_euclid(g) == 0)
                .map(|&o| o + ((target - o.dot(&n)) / g) * climb)
                .ok_or_else(|| Error::NotLayered(format!("no particle at layer height {target}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mesh = family.mesh();
    let steps = offsets
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            family
                .steps()
                .iter()
                .position(|&st| mesh.contains_vector(d - st))
                .ok_or_else(|| Error::NotLayered(format!("layer step {d} is not allowed in family {family}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let word = StackingWord::new(family, steps)?;
    let rebuilt = build_layered_on(&word, q).map_err(|e| Error::NotLayered(e.to_string()))?;
    if rebuilt != moved {
        return Err(Error::NotLayered(format!("configuration differs from the {family} stacking {word}")));
    }
    Ok(word)
}

/// `(g, [a, b, c])` with `g = gcd(h) = a·h0 + b·h1 + c·h2`, `g >= 0`.
fn gcd3(h: [i64; 3]) -> (i64, [i64; 3]) {
    let e1 = h[0].extended_gcd(&h[1]);
    let e2 = e1.gcd.extended_gcd(&h[2]);
    let (mut g, mut co) = (e2.gcd, [e2.x * e1.x, e2.x * e1.y, e2.y]);
    if g < 0 {
        g = -g;
        co = co.map(|c| -c);
    }
    (g, co)
}

/// Deformed FCC at `d2 = 5`: constant word.
pub fn dfcc5() -> Configuration {
    build_layered(&StackingWord::parse(LayerFamily::Triangular5, "S").expect("valid")).expect("closes")
}

/// Deformed HCP at `d2 = 5`: alternating word.
pub fn dhcp5() -> Configuration {
    build_layered(&StackingWord::parse(LayerFamily::Triangular5, "ST").expect("valid")).expect("closes")
}

/// Distinct copies of a periodic configuration under translations and point symmetries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymmetryCensus {
    /// Point-symmetry images that are not translates of each other.
    pub images: usize,
    /// Distinct translates of one image: the index of its translation lattice.
    pub translates: u64,
}

impl SymmetryCensus {
    pub fn total(&self) -> u64 {
        self.images as u64 * self.translates
    }
}

/// Key identifying the point set of `c` up to translation.
fn translation_key(c: &Configuration) -> ([i64; 9], Vec<Site>) {
    let lattice = c.translation_lattice().hnf();
    let q = Quotient::new(lattice);
    let sites = c.sites();
    let key = sites
        .iter()
        .map(|&o| {
            let mut v: Vec<Site> = sites.iter().map(|&x| q.reduce(x - o)).collect();
            v.sort();
            v.dedup();
            v
        })
        .min()
        .unwrap_or_default();
    (lattice.flat(), key)
}

pub fn symmetry_census(c: &Configuration) -> Result<SymmetryCensus> {
    let mut keys = std::collections::BTreeSet::new();
    for op in symmetry_group() {
        let period = c.quotient().hnf().transformed(op);
        let img = Configuration::on_period(&period, c.d2(), c.sites().into_iter().map(|x| op.apply(x)))?;
        keys.insert(translation_key(&img));
    }
    Ok(SymmetryCensus { images: keys.len(), translates: c.translation_lattice().index() })
}

/// A line (one generator) or planar (two generators) submesh through `anchor`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeshSelector {
    pub anchor: Site,
    pub generators: Vec<Site>,
}

impl MeshSelector {
    pub fn line(anchor: Site, direction: Site) -> Self {
        MeshSelector { anchor, generators: vec![direction] }
    }

    pub fn plane(anchor: Site, g1: Site, g2: Site) -> Self {
        MeshSelector { anchor, generators: vec![g1, g2] }
    }

    pub fn from_mesh(mesh: &MeshSpec) -> Self {
        Self::plane(mesh.anchor, mesh.generators[0], mesh.generators[1])
    }

    /// Occupied representatives of `c` that lie on the selected mesh modulo the period.
    pub fn select(&self, c: &Configuration) -> Vec<Site> {
        let mut gens = self.generators.clone();
        gens.extend(c.quotient().hnf().generators());
        let span = SublatticeBasis::from_generators(&gens).expect("period is full rank");
        c.sites().into_iter().filter(|&o| span.contains(o - self.anchor)).collect()
    }
}

impl fmt::Display for MeshSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.anchor)?;
        for g in &self.generators {
            write!(f, "+Z{g}")?;
        }
        Ok(())
    }
}

/// Translates the selected submesh by `t`. The result is not re-validated.
pub fn mesh_shift(c: &Configuration, selector: &MeshSelector, t: Site) -> Result<Configuration> {
    let selected = selector.select(c);
    if selected.is_empty() {
        return Err(Error::EmptySelector);
    }
    let mut sites: Vec<Site> = c.sites().into_iter().filter(|x| !selected.contains(x)).collect();
    sites.extend(selected.iter().map(|&x| x + t));
    Configuration::new(c.quotient().clone(), c.d2(), sites)
}
