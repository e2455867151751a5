//! Embeddings of scaled FCC lattices `ℓ·A₃` into `Z³`, their symmetry
//! classes, and the search for alternate (HCP-type) stacking positions.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::admissibility::Configuration;
use crate::error::{Error, Result};
use crate::lattice::{shortest_vectors, symmetry_group, Site, SublatticeBasis};

fn isqrt(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// All integer vectors of squared norm `n`, in lexicographic order.
pub fn vectors_of_norm(n: i64) -> Vec<Site> {
    if n < 0 {
        return Vec::new();
    }
    let s = isqrt(n);
    let mut out = Vec::new();
    for x in -s..=s {
        let rx = n - x * x;
        let sy = isqrt(rx);
        for y in -sy..=sy {
            let rz = rx - y * y;
            let z = isqrt(rz);
            if z * z == rz {
                out.push(Site::new(x, y, -z));
                if z != 0 {
                    out.push(Site::new(x, y, z));
                }
            }
        }
    }
    out
}

/// All sublattices spanned by three vectors of norm `2ℓ²` with pairwise
/// inner products `ℓ²`, as distinct HNFs in lexicographic order.
pub fn enumerate_fcc_embeddings(ell: i64) -> Vec<SublatticeBasis> {
    assert!(ell >= 1, "scale must be positive");
    let l2 = ell * ell;
    let vs = vectors_of_norm(2 * l2);
    let found: BTreeSet<[i64; 9]> = (0..vs.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let vs = &vs;
            let partners: Vec<usize> = (i + 1..vs.len()).filter(|&j| vs[i].dot(&vs[j]) == l2).collect();
            let mut local = Vec::new();
            for (pj, &j) in partners.iter().enumerate() {
                for &k in &partners[pj + 1..] {
                    if vs[j].dot(&vs[k]) == l2 {
                        let b = SublatticeBasis::new(vs[i], vs[j], vs[k]).expect("Gram matrix is nonsingular");
                        local.push(b.hnf().flat());
                    }
                }
            }
            local
        })
        .collect();
    found.into_iter().map(from_flat).collect()
}

fn from_flat(f: [i64; 9]) -> SublatticeBasis {
    SublatticeBasis::from_rows([[f[0], f[1], f[2]], [f[3], f[4], f[5]], [f[6], f[7], f[8]]]).expect("stored HNF")
}

/// Orbit of FCC embeddings under the 48 point symmetries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingClass {
    /// Lexicographically least member HNF.
    pub representative: SublatticeBasis,
    pub orbit_size: usize,
    /// Member HNFs in lexicographic order.
    pub members: Vec<SublatticeBasis>,
}

/// HNFs of the images of `basis` under all point symmetries.
pub fn orbit(basis: &SublatticeBasis) -> BTreeSet<[i64; 9]> {
    symmetry_group().iter().map(|op| basis.transformed(op).hnf().flat()).collect()
}

pub fn embedding_classes(ell: i64) -> Vec<EmbeddingClass> {
    let all = enumerate_fcc_embeddings(ell);
    let mut seen = BTreeSet::new();
    let mut classes = Vec::new();
    for b in &all {
        let key = b.flat();
        if seen.contains(&key) {
            continue;
        }
        let orb = orbit(b);
        seen.extend(orb.iter().copied());
        let members: Vec<SublatticeBasis> = orb.into_iter().map(from_flat).collect();
        classes.push(EmbeddingClass { representative: members[0], orbit_size: members.len(), members });
    }
    classes.sort_by_key(|c| c.representative.flat());
    classes
}

/// Scale `ℓ` and a basis with the FCC Gram pattern, if `basis` is an FCC embedding.
pub fn fcc_scale(basis: &SublatticeBasis) -> Result<(i64, [Site; 3])> {
    let (min, short) = shortest_vectors(basis);
    let not_fcc = |why: &str| Error::NotFccEmbedding(format!("{basis}: {why}"));
    if min % 2 != 0 {
        return Err(not_fcc("odd minimal norm"));
    }
    let ell = isqrt(min / 2);
    if 2 * ell * ell != min {
        return Err(not_fcc("minimal norm is not twice a square"));
    }
    let l2 = ell * ell;
    if basis.determinant().unsigned_abs() != 2 * (ell as u128).pow(3) {
        return Err(not_fcc("index differs from 2ℓ³"));
    }
    for (i, &a) in short.iter().enumerate() {
        for (j, &b) in short.iter().enumerate().skip(i + 1) {
            if a.dot(&b) != l2 {
                continue;
            }
            for &c in &short[j + 1..] {
                if a.dot(&c) == l2 && b.dot(&c) == l2 {
                    let d = a.dot(&b.cross(&c)) as i128;
                    if d.unsigned_abs() == 2 * (ell as u128).pow(3) {
                        return Ok((ell, [a, b, c]));
                    }
                }
            }
        }
    }
    Err(not_fcc("no basis with the FCC Gram matrix"))
}

/// An integral alternate stacking position and the HCP configuration it yields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredWitness {
    /// Triangular layer generators.
    pub mesh: [Site; 2],
    /// Offset of the neighbouring layer in the embedding.
    pub stacking: Site,
    /// Integral position of the other hollow class in the same slab.
    pub alternate: Site,
    /// Two-layer period `⟨mesh, stacking + alternate⟩`.
    pub period: SublatticeBasis,
    pub configuration: Configuration,
}

/// Searches the slab above each triangular layer orientation for an
/// integral position in the hollow class not used by the embedding, and
/// validates the resulting two-layer stacking.
pub fn admits_layered(basis: &SublatticeBasis) -> Result<Option<LayeredWitness>> {
    let (ell, [v1, v2, v3]) = fcc_scale(basis)?;
    let d2 = 2 * ell * ell;
    let orientations = [(v1, v2, v3), (v1, v3, v2), (v2, v3, v1), (v2 - v1, v3 - v1, v1)];
    for (a, b, c) in orientations {
        let n = a.cross(&b);
        let nn = n.sq_norm();
        let coeffs = |v: Site| (v.cross(&b).dot(&n), a.cross(&v).dot(&n));
        // bounding box of the parallelogram c + [0,1)a + [0,1)b
        let corners = [c, c + a, c + b, c + a + b];
        let lo: [i64; 3] = [0, 1, 2].map(|i| corners.iter().map(|p| p[i]).min().unwrap());
        let hi: [i64; 3] = [0, 1, 2].map(|i| corners.iter().map(|p| p[i]).max().unwrap());
        let height = c.dot(&n);
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    let p = Site::new(x, y, z);
                    if p.dot(&n) != height {
                        continue;
                    }
                    let (s, t) = coeffs(p - c);
                    if !(0..nn).contains(&s) || !(0..nn).contains(&t) {
                        continue;
                    }
                    if s == 0 && t == 0 {
                        continue;
                    }
                    if !clear_of_layer(p, a, b, d2) {
                        continue;
                    }
                    let Ok(period) = SublatticeBasis::new(a, b, c + p) else { continue };
                    let Ok(configuration) = Configuration::on_period(&period, d2, [Site::ZERO, c]) else { continue };
                    if configuration.len() == 2 && configuration.is_admissible() {
                        return Ok(Some(LayeredWitness { mesh: [a, b], stacking: c, alternate: p, period, configuration }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Whether `p` keeps squared distance `>= d2` from every point of `Z·a + Z·b`.
/// `p` lies within one mesh cell of a shortest vector, so a small window suffices.
fn clear_of_layer(p: Site, a: Site, b: Site, d2: i64) -> bool {
    (-3..=4).all(|i| (-3..=4).all(|j| (p - i * a - j * b).sq_norm() >= d2))
}

/// Summary row for one scale: class sizes and the layered verdict per class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleReport {
    pub ell: i64,
    pub embeddings: usize,
    pub class_sizes: BTreeMap<usize, usize>,
    pub layered: Vec<bool>,
}

pub fn scale_report(ell: i64) -> Result<ScaleReport> {
    let classes = embedding_classes(ell);
    let mut class_sizes = BTreeMap::new();
    for c in &classes {
        *class_sizes.entry(c.orbit_size).or_insert(0) += 1;
    }
    let layered = classes
        .iter()
        .map(|c| admits_layered(&c.representative).map(|w| w.is_some()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScaleReport { ell, embeddings: classes.iter().map(|c| c.orbit_size).sum(), class_sizes, layered })
}
