//! Property checks shared by the proptest target and the acceptance runner.

use hardcore::catalog::{build_layered, build_layered_on, build_layered_window, classify_stacking, known_configuration, LayerFamily, StackingWord};
use hardcore::perturbations::{enumerate_excitations, ExcitationOptions};
use hardcore::{Configuration, Quotient, Site, SublatticeBasis};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub fn small_site(r: i64) -> impl Strategy<Value = Site> {
    (-r..=r, -r..=r, -r..=r).prop_map(|(x, y, z)| Site::new(x, y, z))
}

pub fn nonsingular_basis() -> impl Strategy<Value = SublatticeBasis> {
    (small_site(4), small_site(4), small_site(4))
        .prop_filter_map("singular", |(a, b, c)| SublatticeBasis::new(a, b, c).ok())
}

/// Lower-triangular HNF with diagonal entries in `1..=4`.
pub fn small_quotient() -> impl Strategy<Value = SublatticeBasis> {
    (1i64..=4, 1i64..=4, 1i64..=4).prop_flat_map(|(d1, d2, d3)| {
        (0..d1, 0..d1, 0..d2).prop_map(move |(a, b, c)| {
            SublatticeBasis::from_rows([[d1, 0, 0], [a, d2, 0], [b, c, d3]]).expect("positive diagonal")
        })
    })
}

pub fn hnf_is_canonical(b: &SublatticeBasis) -> Result<(), TestCaseError> {
    let h = b.hnf();
    prop_assert_eq!(h.hnf(), h);
    for g in b.generators() {
        prop_assert!(h.contains(g));
    }
    for g in h.generators() {
        prop_assert!(b.contains(g));
    }
    prop_assert_eq!(h.index() as u128, b.determinant().unsigned_abs());
    let rows = h.generators();
    prop_assert!(rows[0][1] == 0 && rows[0][2] == 0 && rows[1][2] == 0);
    prop_assert!(rows[0][0] > 0 && rows[1][1] > 0 && rows[2][2] > 0);
    prop_assert!((0..rows[0][0]).contains(&rows[1][0]) && (0..rows[0][0]).contains(&rows[2][0]));
    prop_assert!((0..rows[1][1]).contains(&rows[2][1]));
    Ok(())
}

fn brute_min_image(q: &Quotient, a: Site, b: Site) -> i64 {
    let gens = q.hnf().generators();
    let d = q.reduce(a - b);
    let mut best = i64::MAX;
    for i in -4..=4 {
        for j in -4..=4 {
            for k in -4..=4 {
                let p = i * gens[0] + j * gens[1] + k * gens[2];
                best = best.min((d + p).sq_norm());
            }
        }
    }
    best
}

pub fn min_image_is_a_metric(period: &SublatticeBasis, a: Site, b: Site, c: Site) -> Result<(), TestCaseError> {
    let q = Quotient::new(*period);
    let d = |x: Site, y: Site| q.min_image_sq_distance(x, y);
    prop_assert_eq!(d(a, a), 0);
    prop_assert_eq!(d(a, b), d(b, a));
    prop_assert!(d(a, b) <= (a - b).sq_norm());
    for g in period.generators() {
        prop_assert_eq!(d(a + g, b), d(a, b));
    }
    prop_assert_eq!(d(a, b) == 0, q.same_coset(a, b));
    prop_assert_eq!(d(a, b), brute_min_image(&q, a, b));
    // sqrt(ac) <= sqrt(ab) + sqrt(bc), squared twice
    let (ab, bc, ac) = (d(a, b) as i128, d(b, c) as i128, d(a, c) as i128);
    let excess = ac - ab - bc;
    prop_assert!(excess <= 0 || excess * excess <= 4 * ab * bc);
    Ok(())
}

pub fn word_strategy() -> impl Strategy<Value = StackingWord> {
    (0..LayerFamily::ALL.len(), prop::collection::vec(0usize..3, 1..=12)).prop_map(|(f, raw)| {
        let family = LayerFamily::ALL[f];
        let n = family.steps().len();
        StackingWord::new(family, raw.into_iter().map(|i| i % n).collect()).expect("valid steps")
    })
}

fn family_density(f: LayerFamily) -> i64 {
    match f.d2() {
        2 => 2,
        5 => 9,
        6 => 12,
        9 => 20,
        _ => unreachable!(),
    }
}

pub fn layered_is_admissible(word: &StackingWord) -> Result<(), TestCaseError> {
    let c = build_layered(word).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(c.is_admissible(), "{} {}", word.family(), word);
    let several = if c.len() < 2 { c.lift_to(&c.quotient().hnf().scaled(2).unwrap()).unwrap() } else { c.clone() };
    prop_assert_eq!(several.min_pair_sq_distance().ok(), Some(word.family().d2()));
    let inv = c.density().recip();
    prop_assert_eq!(inv, hardcore::Rational::from_integer(family_density(word.family()).into()));
    let w = build_layered_window(word, Site::new(-4, -4, -4), Site::new(5, 5, 5)).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(w.is_admissible());
    Ok(())
}

fn is_rotation(a: &str, b: &str) -> bool {
    a.len() == b.len() && format!("{a}{a}").contains(b)
}

pub fn classify_inverts_build(word: &StackingWord) -> Result<(), TestCaseError> {
    let c = build_layered(word).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let normal = word.family().normal();
    let back = classify_stacking(&c, normal).map_err(|e| TestCaseError::fail(format!("{word}: {e}")))?;
    prop_assert_eq!(back.family(), word.family());
    // the natural period may repeat a shorter word
    let (w, b) = (word.to_string(), back.to_string());
    let reps = w.len() / b.len().max(1);
    prop_assert!(w.len() % b.len() == 0 && is_rotation(&w, &b.repeat(reps)), "{} vs {}", w, b);
    let rebuilt = build_layered_on(&back, c.quotient().clone()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let o0 = c.sites()[0];
    prop_assert_eq!(rebuilt, c.translated(-o0));
    Ok(())
}

pub fn saturated_samples() -> Vec<Configuration> {
    let five = |w: &str| build_layered(&StackingWord::parse(LayerFamily::Triangular5, w).unwrap()).unwrap();
    vec![
        five("ST"),
        five("S"),
        five("SST"),
        known_configuration(2, 1, 2).unwrap(),
        known_configuration(3, 1, 2).unwrap(),
        known_configuration(6, 1, 1).unwrap(),
    ]
}

pub fn excitations_revalidate(c: &Configuration, max_order: i64, radius: i64) -> Result<(), TestCaseError> {
    let report = enumerate_excitations(c, max_order, radius, ExcitationOptions { node_budget: Some(200_000) })
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    for class in &report.classes {
        let e = &class.excitation;
        prop_assert!(e.is_valid_for(c), "{}", e);
        prop_assert!(e.order() <= max_order);
        prop_assert!(class.multiplicity >= 1);
        let (before, after) = e.apply(c).map_err(|err| TestCaseError::fail(err.to_string()))?;
        prop_assert!(after.is_admissible(), "{}", e);
        prop_assert_eq!(before.len() as i64 - after.len() as i64, e.order());
    }
    Ok(())
}

/// Runs every property suite with `cases` cases each; returns failures by suite name.
pub fn run_all(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    let config = || Config { cases, failure_persistence: None, ..Config::default() };
    let mut out = Vec::new();

    let mut runner = TestRunner::new(config());
    let r = runner.run(&nonsingular_basis(), |b| hnf_is_canonical(&b));
    out.push(("hnf idempotence and set preservation", r.map_err(|e| e.to_string())));

    let mut runner = TestRunner::new(config());
    let r = runner.run(&(small_quotient(), small_site(6), small_site(6), small_site(6)), |(p, a, b, c)| {
        min_image_is_a_metric(&p, a, b, c)
    });
    out.push(("min-image distance is a metric", r.map_err(|e| e.to_string())));

    let mut runner = TestRunner::new(config());
    let r = runner.run(&word_strategy(), |w| layered_is_admissible(&w));
    out.push(("layered words build admissible configurations", r.map_err(|e| e.to_string())));

    let mut runner = TestRunner::new(config());
    let r = runner.run(&word_strategy(), |w| classify_inverts_build(&w));
    out.push(("classify_stacking inverts build_layered", r.map_err(|e| e.to_string())));

    let samples = saturated_samples();
    let mut runner = TestRunner::new(Config { cases: cases.min(12), ..config() });
    let r = runner.run(&(0..samples.len(), 0i64..=3, 1i64..=3), |(i, m, r)| excitations_revalidate(&samples[i], m, r));
    out.push(("excitations re-validate", r.map_err(|e| e.to_string())));

    out
}
