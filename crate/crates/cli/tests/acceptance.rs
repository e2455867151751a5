//! End-to-end acceptance run: one line per criterion, nonzero exit on any failure.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;
#[path = "../../core/tests/common/props.rs"]
mod props;

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use hardcore::catalog::{dfcc5, dhcp5, known_configuration, known_sublattice, MeshSelector};
use hardcore::embeddings::{admits_layered, embedding_classes, enumerate_fcc_embeddings};
use hardcore::lattice::shortest_vectors;
use hardcore::perturbations::{
    enumerate_excitations, find_sliding, min_insertion_order, standard_mesh_family, standard_shifts, ExcitationOptions,
};
use hardcore::solver::{max_packing, max_packing_with_count, SolverOptions};
use hardcore::voronoi::{tessellation_check, voronoi_cell};
use hardcore::{Quotient, Rational, Site};

type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cubic(l: i64) -> Arc<Quotient> {
    Arc::new(Quotient::diagonal(l).expect("positive side"))
}

fn solver_table() -> Check {
    let rows: [(i64, i64, usize, Option<u128>); 6] =
        [(2, 2, 4, Some(2)), (2, 3, 2, Some(4)), (2, 4, 1, Some(8)), (4, 4, 8, None), (4, 8, 4, Some(16)), (4, 12, 2, Some(32))];
    for (l, d2, optimum, count) in rows {
        let r = max_packing_with_count(cubic(l), d2, false, SolverOptions::default()).map_err(err)?;
        let got = r.count.expect("count requested");
        ensure(r.optimum == optimum, || format!("diag({l}) d2={d2}: optimum {} != {optimum}", r.optimum))?;
        ensure(r.witness.is_admissible() && r.witness.len() == optimum, || format!("diag({l}) d2={d2}: bad witness"))?;
        match count {
            Some(c) => ensure(got == c, || format!("diag({l}) d2={d2}: count {got} != {c}"))?,
            None => ensure(got > 8, || format!("diag({l}) d2={d2}: count {got} not above 8"))?,
        }
    }
    Ok(())
}

const ONE_PER_CELL: [(i64, u8); 12] =
    [(2, 1), (3, 1), (5, 1), (6, 1), (6, 2), (8, 1), (9, 1), (9, 2), (10, 1), (10, 2), (11, 1), (12, 1)];

fn one_per_cell() -> Check {
    for (d2, variant) in ONE_PER_CELL {
        let q = Arc::new(Quotient::new(known_sublattice(d2, variant).map_err(err)?));
        let r = max_packing(q, d2, SolverOptions::default()).map_err(err)?;
        ensure(r.optimum == 1, || format!("d2={d2} variant {variant}: optimum {}", r.optimum))?;
    }
    Ok(())
}

fn doubled_cell() -> Check {
    for (d2, index) in [(2, 16), (3, 32), (5, 72)] {
        let period = known_sublattice(d2, 1).and_then(|b| b.scaled(2)).map_err(err)?;
        let q = Arc::new(Quotient::new(period));
        ensure(q.len() == index, || format!("d2={d2}: index {} != {index}", q.len()))?;
        let r = max_packing(q, d2, SolverOptions::with_budget(500_000_000)).map_err(err)?;
        ensure(r.optimum == 8, || format!("d2={d2}: optimum {}", r.optimum))?;
    }
    Ok(())
}

fn catalog_table() -> Check {
    let dens = [(2, 2), (3, 4), (4, 8), (5, 9), (6, 12), (8, 16), (9, 20), (10, 26), (11, 32), (12, 32)];
    for (d2, inv) in dens {
        let c = known_configuration(d2, 1, 1).map_err(err)?;
        ensure(c.density() == Rational::new(1.into(), inv.into()), || format!("d2={d2}: density {}", c.density()))?;
        let (min, _) = shortest_vectors(&known_sublattice(d2, 1).map_err(err)?);
        ensure(min >= d2, || format!("d2={d2}: min norm {min} below d2"))?;
        if [5, 9, 10, 12].contains(&d2) {
            ensure(min == d2, || format!("d2={d2}: min norm {min} != d2"))?;
        }
        if d2 == 11 {
            ensure(min == 12, || format!("d2=11: min norm {min} != 12"))?;
        }
    }
    Ok(())
}

fn voronoi_table() -> Check {
    for (d2, volume) in [(2, 2), (3, 4), (4, 8), (5, 9), (6, 12), (8, 16), (9, 20), (10, 26), (12, 32)] {
        let c = known_configuration(d2, 1, 1).map_err(err)?;
        let cell = voronoi_cell(&c, Site::ZERO).map_err(err)?;
        ensure(*cell.volume() == Rational::from_integer(volume.into()), || format!("d2={d2}: volume {}", cell.volume()))?;
        ensure(tessellation_check(&c).map_err(err)?, || format!("d2={d2}: tessellation fails"))?;
        match d2 {
            2 => ensure(cell.facet_count() == 12, || format!("A3 cell has {} facets", cell.facet_count()))?,
            3 => ensure(cell.facet_count() == 14, || format!("BCC cell has {} facets", cell.facet_count()))?,
            _ => {}
        }
    }
    Ok(())
}

fn embedding_table() -> Check {
    for ell in 1..=5i64 {
        let classes = embedding_classes(ell);
        let n = classes.len();
        if [1, 2, 4].contains(&ell) {
            ensure(n == 1, || format!("ell={ell}: {n} classes"))?;
        } else {
            ensure(n >= 2, || format!("ell={ell}: {n} classes"))?;
        }
        for class in &classes {
            ensure(48 % class.orbit_size == 0, || format!("ell={ell}: orbit size {}", class.orbit_size))?;
        }
        for b in enumerate_fcc_embeddings(ell) {
            ensure(b.index() as i64 == 2 * ell.pow(3), || format!("ell={ell}: index {}", b.index()))?;
            let (min, _) = shortest_vectors(&b);
            ensure(min == 2 * ell * ell, || format!("ell={ell}: min norm {min}"))?;
        }
    }
    Ok(())
}

fn layered_criterion() -> Check {
    for ell in 1..=6i64 {
        for class in embedding_classes(ell) {
            let layered = admits_layered(&class.representative).map_err(err)?.is_some();
            ensure(layered == (ell % 3 == 0), || format!("ell={ell}: layered {layered} for {}", class.representative))?;
        }
    }
    Ok(())
}

fn excitation_dichotomy() -> Check {
    let opts = ExcitationOptions::default();
    let hcp = enumerate_excitations(&dhcp5(), 2, 3, opts).map_err(err)?;
    ensure(hcp.completed && !hcp.is_empty(), || "dHCP: no excitation of order 2".into())?;
    for class in &hcp.classes {
        let shape = (class.excitation.added.len(), class.excitation.removed.len());
        ensure(shape == (1, 3), || format!("dHCP: excitation {} has shape {shape:?}", class.excitation))?;
    }
    let fcc = enumerate_excitations(&dfcc5(), 2, 3, opts).map_err(err)?;
    ensure(fcc.completed && fcc.is_empty(), || format!("dFCC: {} excitations of order <= 2", fcc.classes.len()))?;
    let (h, _) = min_insertion_order(&dhcp5()).map_err(err)?;
    let (f, _) = min_insertion_order(&dfcc5()).map_err(err)?;
    ensure(h == 2 && h < f, || format!("insertion orders dHCP {h}, dFCC {f}"))
}

fn sliding() -> Check {
    let cubic4 = known_configuration(4, 1, 2).map_err(err)?;
    let line = MeshSelector::line(Site::ZERO, Site::new(0, 0, 2));
    let moves = find_sliding(&cubic4, &[line], &standard_shifts()).map_err(err)?;
    ensure(!moves.is_empty(), || "2Z^3 at d2=4: no line slide".into())?;

    let diag = MeshSelector::line(Site::ZERO, Site::new(2, 2, 2));
    let t = [Site::new(1, 1, 1)];
    let bcc11 = known_configuration(11, 1, 2).map_err(err)?;
    let moves = find_sliding(&bcc11, &[diag.clone()], &t).map_err(err)?;
    let d = moves.first().map(|m| m.min_pair_sq_distance());
    ensure(matches!(d, Some(Ok(11))), || format!("d2=11 diagonal slide: {d:?}"))?;
    let bcc12 = known_configuration(12, 1, 2).map_err(err)?;
    ensure(find_sliding(&bcc12, &[diag], &t).map_err(err)?.is_empty(), || "d2=12 diagonal slide accepted".into())?;

    for d2 in [2, 3, 5, 8, 9, 10, 12] {
        let c = known_configuration(d2, 1, 2).map_err(err)?;
        let moves = find_sliding(&c, &standard_mesh_family(&c), &standard_shifts()).map_err(err)?;
        ensure(moves.is_empty(), || format!("d2={d2}: {} sliding moves", moves.len()))?;
    }
    Ok(())
}

fn hc3(threads: &str, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hc3")).args(args).env("THREADS", threads).output().map_err(err)?;
    ensure(out.status.success(), || format!("hc3 {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn oracle_and_determinism() -> Check {
    let mut cases = 0;
    for period in oracle::all_hnfs(16) {
        let q = Arc::new(Quotient::new(period));
        for d2 in 2..=5 {
            if q.min_period_norm() < d2 {
                continue;
            }
            let r = max_packing_with_count(q.clone(), d2, false, SolverOptions::default()).map_err(err)?;
            let (optimum, count) = oracle::brute_force(&q, d2);
            ensure(r.optimum == optimum && r.count == Some(count), || {
                format!("{} d2={d2}: solver {}/{:?}, brute force {optimum}/{count}", q.hnf(), r.optimum, r.count)
            })?;
            cases += 1;
        }
    }
    ensure(cases > 100, || format!("only {cases} oracle cases"))?;

    let dir = tempfile::tempdir().map_err(err)?;
    let hcp = dir.path().join("hcp.json");
    let hcp = hcp.to_str().expect("utf-8 temp path");
    hc3("1", &["layered", "--d2", "5", "--word", "ST", "--out", hcp])?;
    let max = std::thread::available_parallelism().map_or(4, |n| n.get()).to_string();
    let runs: [&[&str]; 5] = [
        &["pack", "--d2", "8", "--diag", "4", "--count"],
        &["--json", "pack", "--d2", "4", "--period", "4,0,0;0,4,0;2,2,2", "--count"],
        &["embed", "--ell", "3", "--classes", "--layered"],
        &["excite", hcp, "--max-order", "3", "--radius", "3"],
        &["slide", hcp, "--scan"],
    ];
    for args in runs {
        let base = hc3("1", args)?;
        for t in ["2", max.as_str()] {
            ensure(hc3(t, args)? == base, || format!("hc3 {args:?}: output differs with THREADS={t}"))?;
        }
    }
    Ok(())
}

fn property_suites() -> Check {
    let failures: Vec<String> = props::run_all(64)
        .into_iter()
        .filter_map(|(name, r)| r.err().map(|e| format!("{name}: {e}")))
        .collect();
    ensure(failures.is_empty(), || failures.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("solver density and cardinality table", solver_table),
        ("one particle per catalog cell", one_per_cell),
        ("eight particles per doubled cell", doubled_cell),
        ("catalog densities and minimal norms", catalog_table),
        ("Voronoi volumes, facets and tessellation", voronoi_table),
        ("FCC embedding classes", embedding_table),
        ("layered iff scale divisible by 3", layered_criterion),
        ("excitation dichotomy at d2=5", excitation_dichotomy),
        ("sliding", sliding),
        ("brute-force oracle and thread determinism", oracle_and_determinism),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = check();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(()) => println!("criterion {:>2} PASS  {name} ({secs:.1}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {e}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
