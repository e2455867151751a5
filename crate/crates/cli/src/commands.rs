use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hardcore::catalog::{
    build_layered, build_layered_on, build_layered_window, known_configuration, known_mesh, known_sublattice,
    LayerFamily, MeshSelector, StackingWord, MESH_NAMES,
};
use hardcore::embeddings::{admits_layered, embedding_classes, enumerate_fcc_embeddings};
use hardcore::lattice::shortest_vectors;
use hardcore::perturbations::{
    enumerate_excitations, find_sliding, min_insertion_order, standard_mesh_family, standard_shifts, try_slide,
    ExcitationOptions,
};
use hardcore::solver::{max_packing, max_packing_with_count, SolverOptions};
use hardcore::voronoi::{voronoi_cell, RationalPolytope};
use hardcore::{Quotient, Rational, Site, SublatticeBasis};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::document::{self, ConfigDocument, Loaded};
use crate::error::{CliError, CliResult};
use crate::parse_site;

/// Command output: text lines, a JSON record, and the exit status.
pub struct Report {
    pub text: String,
    pub json: String,
    pub exit: u8,
}

impl Report {
    fn new(text: String, json: Value) -> Self {
        let json = serde_json::to_string_pretty(&json).expect("values serialize") + "\n";
        Report { text, json, exit: 0 }
    }

    /// Report whose JSON form is the document exactly as `--out` writes it.
    fn document(text: String, doc: &ConfigDocument) -> Self {
        Report { text, json: doc.to_json() + "\n", exit: 0 }
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            self.json.clone()
        } else {
            self.text.clone()
        }
    }
}

fn site_list(sites: &[Site]) -> String {
    sites.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

fn rows(b: &SublatticeBasis) -> Value {
    json!(b.generators().map(|g| g.0))
}

fn doc_value(doc: &ConfigDocument) -> Value {
    serde_json::to_value(doc).expect("documents serialize")
}

fn meta(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn write_out(doc: &ConfigDocument, out: &Option<PathBuf>, text: &mut String) -> CliResult<()> {
    if let Some(path) = out {
        document::save(doc, path)?;
        writeln!(text, "written {}", path.display()).unwrap();
    }
    Ok(())
}

pub fn pack(
    d2: i64,
    diag: Option<i64>,
    period: Option<SublatticeBasis>,
    count: bool,
    mod_translations: bool,
    budget: Option<u64>,
    out: Option<PathBuf>,
) -> CliResult<Report> {
    let period = match (diag, period) {
        (Some(l), None) => SublatticeBasis::diagonal(l, l, l)?,
        (None, Some(p)) => p,
        _ => return Err(CliError::BadInput("give exactly one of --diag or --period".into())),
    };
    let q = Arc::new(Quotient::new(period));
    let opts = SolverOptions { node_budget: budget };
    let res = if count { max_packing_with_count(q.clone(), d2, mod_translations, opts)? } else { max_packing(q.clone(), d2, opts)? };
    let mut text = String::new();
    match res.count {
        Some(n) if mod_translations => writeln!(text, "optimum {}, count {n} (up to translation)", res.optimum),
        Some(n) => writeln!(text, "optimum {}, count {n}", res.optimum),
        None => writeln!(text, "optimum {}", res.optimum),
    }
    .unwrap();
    writeln!(text, "torus {} ({} sites)", q.hnf(), q.len()).unwrap();
    writeln!(text, "density {}", res.witness.density()).unwrap();
    writeln!(text, "witness {}", site_list(&res.witness.sites())).unwrap();
    let mut m = vec![("optimum", res.optimum.to_string()), ("density", res.witness.density().to_string())];
    if let Some(n) = res.count {
        m.push(("count", n.to_string()));
        m.push(("count_mode", if mod_translations { "translations" } else { "all" }.to_string()));
    }
    let doc = ConfigDocument::from_configuration(&res.witness, meta(&m));
    write_out(&doc, &out, &mut text)?;
    Ok(Report::document(text, &doc))
}

pub fn verify(file: &Path) -> CliResult<Report> {
    let (loaded, _) = document::load(file, false)?;
    let mut text = String::new();
    let mut record = serde_json::Map::new();
    let violation = match &loaded {
        Loaded::Periodic(c) => {
            writeln!(text, "torus {} ({} sites)", c.quotient().hnf(), c.quotient().len()).unwrap();
            c.check_admissible()
        }
        Loaded::Window(w) => {
            let (lo, hi) = w.bounds();
            writeln!(text, "window {lo}..{hi} ({} sites)", w.volume()).unwrap();
            w.check_admissible()
        }
    };
    let (len, d2, density, min) = match &loaded {
        Loaded::Periodic(c) => (c.len(), c.d2(), c.density(), c.min_pair_sq_distance().ok()),
        Loaded::Window(w) => (w.len(), w.d2(), w.density(), w.min_pair_sq_distance().ok()),
    };
    writeln!(text, "d2 {d2}").unwrap();
    writeln!(text, "particles {len}").unwrap();
    writeln!(text, "density {density}").unwrap();
    match min {
        Some(m) => writeln!(text, "min pair squared distance {m}").unwrap(),
        None => writeln!(text, "min pair squared distance n/a").unwrap(),
    }
    record.insert("d2".into(), json!(d2));
    record.insert("particles".into(), json!(len));
    record.insert("density".into(), json!(density.to_string()));
    record.insert("min_pair_sq_distance".into(), json!(min));
    match &violation {
        Some(v) => {
            writeln!(text, "admissible no: {} and {} at squared distance {}", v.a, v.b, v.sq_distance).unwrap();
            record.insert("admissible".into(), json!(false));
            record.insert("violation".into(), json!({"a": v.a.0, "b": v.b.0, "sq_distance": v.sq_distance}));
        }
        None => {
            writeln!(text, "admissible yes").unwrap();
            record.insert("admissible".into(), json!(true));
        }
    }
    if let Loaded::Periodic(c) = &loaded {
        let candidates = c.insertion_candidates();
        writeln!(text, "saturated {}", if candidates.is_empty() { "yes" } else { "no" }).unwrap();
        if !candidates.is_empty() {
            writeln!(text, "insertable {}", site_list(&candidates)).unwrap();
        }
        record.insert("saturated".into(), json!(candidates.is_empty()));
        record.insert("insertable".into(), json!(candidates.iter().map(|s| s.0).collect::<Vec<_>>()));
    }
    let mut report = Report::new(text, Value::Object(record));
    if violation.is_some() {
        report.exit = 1;
    }
    Ok(report)
}

pub fn pc(d2: i64, variant: u8, scale: i64, out: Option<PathBuf>) -> CliResult<Report> {
    let lattice = known_sublattice(d2, variant)?;
    let c = known_configuration(d2, variant, scale)?;
    let (min, short) = shortest_vectors(&lattice);
    let mut text = String::new();
    writeln!(text, "d2 {d2} variant {variant}").unwrap();
    writeln!(text, "basis {lattice}").unwrap();
    writeln!(text, "index {}", lattice.index()).unwrap();
    writeln!(text, "density 1/{}", lattice.index()).unwrap();
    writeln!(text, "min squared norm {min} ({} vectors)", short.len()).unwrap();
    let doc = ConfigDocument::from_configuration(
        &c,
        meta(&[("source", format!("catalog d2={d2} variant={variant} scale={scale}")), ("index", lattice.index().to_string())]),
    );
    write_out(&doc, &out, &mut text)?;
    Ok(Report::document(text, &doc))
}

pub fn layered(
    d2: i64,
    family: Option<&str>,
    word: &str,
    period: Option<SublatticeBasis>,
    window: Option<(Site, Site)>,
    out: Option<PathBuf>,
) -> CliResult<Report> {
    let fam = LayerFamily::lookup(d2, family)?;
    let w = StackingWord::parse(fam, word)?;
    let mut text = String::new();
    writeln!(text, "family {fam} word {w}").unwrap();
    let metadata = meta(&[("family", fam.to_string()), ("word", w.to_string())]);
    let doc = if let Some((lo, hi)) = window {
        let wc = build_layered_window(&w, lo, hi)?;
        writeln!(text, "window {lo}..{hi}: {} particles", wc.len()).unwrap();
        writeln!(text, "admissible {}", if wc.is_admissible() { "yes" } else { "no" }).unwrap();
        ConfigDocument::from_window(&wc, metadata)
    } else {
        let c = match period {
            Some(p) => build_layered_on(&w, Arc::new(Quotient::new(p)))?,
            None => build_layered(&w)?,
        };
        writeln!(text, "torus {} ({} sites)", c.quotient().hnf(), c.quotient().len()).unwrap();
        writeln!(text, "particles {}", c.len()).unwrap();
        writeln!(text, "density {}", c.density()).unwrap();
        writeln!(text, "admissible {}", if c.is_admissible() { "yes" } else { "no" }).unwrap();
        ConfigDocument::from_configuration(&c, metadata)
    };
    write_out(&doc, &out, &mut text)?;
    Ok(Report::document(text, &doc))
}

fn rational_str(r: &Rational) -> String {
    r.to_string()
}

fn polytope_json(cell: &RationalPolytope) -> Value {
    json!({
        "site": cell.center.0,
        "volume": rational_str(cell.volume()),
        "facets": cell.facet_count(),
        "vertices": cell.vertex_count(),
        "edges": cell.edge_count(),
        "vertex_list": cell.vertices.iter().map(|v| v.iter().map(rational_str).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "facet_list": cell.facets.iter().map(|f| json!({
            "normal": f.normal.0,
            "offset": rational_str(&f.offset),
            "vertices": f.vertices,
        })).collect::<Vec<_>>(),
    })
}

fn write_obj(cell: &RationalPolytope, path: &Path) -> CliResult<PathBuf> {
    let mut obj = String::new();
    writeln!(obj, "# Voronoi cell of {}, volume {}", cell.center, cell.volume()).unwrap();
    for v in &cell.vertices {
        let f = v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>();
        writeln!(obj, "v {:.9} {:.9} {:.9}", f[0], f[1], f[2]).unwrap();
    }
    for facet in &cell.facets {
        let ids: Vec<String> = facet.vertices.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(obj, "f {}", ids.join(" ")).unwrap();
    }
    fs::write(path, obj).map_err(|source| CliError::Write { path: path.into(), source })?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".exact.json");
    let sidecar = PathBuf::from(sidecar);
    let text = serde_json::to_string_pretty(&polytope_json(cell)).expect("values serialize") + "\n";
    fs::write(&sidecar, text).map_err(|source| CliError::Write { path: sidecar.clone(), source })?;
    Ok(sidecar)
}

pub fn voronoi(file: &Path, site: Site, dump: Option<PathBuf>) -> CliResult<Report> {
    let (loaded, _) = document::load(file, true)?;
    let c = loaded.periodic()?;
    let cell = voronoi_cell(&c, site)?;
    let mut text = String::new();
    writeln!(text, "site {site}").unwrap();
    writeln!(text, "volume {}", cell.volume()).unwrap();
    writeln!(text, "facets {}", cell.facet_count()).unwrap();
    writeln!(text, "vertices {}", cell.vertex_count()).unwrap();
    if let Some(path) = dump {
        let sidecar = write_obj(&cell, &path)?;
        writeln!(text, "written {} and {}", path.display(), sidecar.display()).unwrap();
    }
    Ok(Report::new(text, polytope_json(&cell)))
}

pub fn embed(ell: i64, classes: bool, layered: bool) -> CliResult<Report> {
    if ell < 1 {
        return Err(CliError::BadInput(format!("--ell must be positive, got {ell}")));
    }
    let mut text = String::new();
    if classes || layered {
        let cls = embedding_classes(ell);
        let total: usize = cls.iter().map(|c| c.orbit_size).sum();
        writeln!(text, "ell {ell}: {total} embeddings in {} classes", cls.len()).unwrap();
        let mut records = Vec::new();
        for (i, c) in cls.iter().enumerate() {
            let verdict = if layered { Some(admits_layered(&c.representative)?) } else { None };
            write!(text, "class {i}: size {} representative {}", c.orbit_size, c.representative).unwrap();
            let mut rec = json!({"representative": rows(&c.representative), "orbit_size": c.orbit_size});
            if let Some(v) = &verdict {
                match v {
                    Some(w) => {
                        write!(text, " layered yes (alternate {} over {})", w.alternate, w.stacking).unwrap();
                        rec["layered"] = json!(true);
                        rec["alternate"] = json!(w.alternate.0);
                        rec["hcp_period"] = rows(&w.period);
                    }
                    None => {
                        write!(text, " layered no").unwrap();
                        rec["layered"] = json!(false);
                    }
                }
            }
            writeln!(text).unwrap();
            records.push(rec);
        }
        Ok(Report::new(text, json!({"ell": ell, "embeddings": total, "classes": records})))
    } else {
        let all = enumerate_fcc_embeddings(ell);
        writeln!(text, "ell {ell}: {} embeddings", all.len()).unwrap();
        for b in &all {
            writeln!(text, "{b}").unwrap();
        }
        Ok(Report::new(text, json!({"ell": ell, "embeddings": all.iter().map(rows).collect::<Vec<_>>()})))
    }
}

pub fn excite(file: &Path, max_order: i64, radius: i64, budget: Option<u64>) -> CliResult<Report> {
    let (loaded, _) = document::load(file, true)?;
    let c = loaded.periodic()?;
    let report = enumerate_excitations(&c, max_order, radius, ExcitationOptions { node_budget: budget })?;
    let (min_order, argmin) = min_insertion_order(&c)?;
    let mut text = String::new();
    writeln!(text, "min insertion order {min_order} at {}", site_list(&argmin)).unwrap();
    writeln!(text, "order added removed multiplicity excitation").unwrap();
    let mut records = Vec::new();
    for class in &report.classes {
        let e = &class.excitation;
        writeln!(text, "{} {} {} {} {}", class.order(), e.added.len(), e.removed.len(), class.multiplicity, e).unwrap();
        records.push(json!({
            "order": class.order(),
            "added": e.added.iter().map(|s| s.0).collect::<Vec<_>>(),
            "removed": e.removed.iter().map(|s| s.0).collect::<Vec<_>>(),
            "multiplicity": class.multiplicity,
        }));
    }
    writeln!(text, "classes {}", report.classes.len()).unwrap();
    writeln!(text, "completed {}", if report.completed { "yes" } else { "no" }).unwrap();
    let mut out = Report::new(
        text,
        json!({
            "min_insertion_order": min_order,
            "min_insertion_sites": argmin.iter().map(|s| s.0).collect::<Vec<_>>(),
            "excitations": records,
            "completed": report.completed,
        }),
    );
    if !report.completed {
        out.exit = 3;
    }
    Ok(out)
}

fn parse_mesh(arg: &str) -> CliResult<MeshSelector> {
    let bad = |e: String| CliError::BadInput(format!("bad mesh `{arg}`: {e}"));
    let (name, anchor) = match arg.split_once('@') {
        Some((n, a)) => (n, Some(parse_site(a).map_err(bad)?)),
        None => (arg, None),
    };
    if MESH_NAMES.contains(&name) {
        let mut m = known_mesh(name)?;
        if let Some(a) = anchor {
            m.anchor = a;
        }
        return Ok(MeshSelector::from_mesh(&m));
    }
    let parts: Vec<Site> = arg.split(':').map(parse_site).collect::<Result<_, _>>().map_err(bad)?;
    match parts.as_slice() {
        [a, d] => Ok(MeshSelector::line(*a, *d)),
        [a, g1, g2] => Ok(MeshSelector::plane(*a, *g1, *g2)),
        _ => Err(bad("expected anchor:dir or anchor:g1:g2".into())),
    }
}

pub fn slide(file: &Path, mesh: Option<&str>, shift: Option<Site>, scan: bool) -> CliResult<Report> {
    let (loaded, _) = document::load(file, true)?;
    let c = loaded.periodic()?;
    let mut text = String::new();
    if scan {
        let family = standard_mesh_family(&c);
        let shifts = standard_shifts();
        let moves = find_sliding(&c, &family, &shifts)?;
        writeln!(text, "scanned {} meshes x {} shifts", family.len(), shifts.len()).unwrap();
        let mut records = Vec::new();
        for m in &moves {
            let d = m.min_pair_sq_distance().ok();
            writeln!(text, "slide {} by {} min distance {}", m.selector, m.shift, d.map_or("n/a".into(), |d| d.to_string())).unwrap();
            records.push(json!({"mesh": m.selector.to_string(), "shift": m.shift.0, "min_pair_sq_distance": d}));
        }
        writeln!(text, "sliding moves {}", moves.len()).unwrap();
        return Ok(Report::new(text, json!({"moves": records})));
    }
    let selector = parse_mesh(mesh.ok_or_else(|| CliError::BadInput("--mesh or --scan is required".into()))?)?;
    let t = shift.ok_or_else(|| CliError::BadInput("--shift is required with --mesh".into()))?;
    let verdict = try_slide(&c, &selector, t)?;
    writeln!(text, "mesh {selector} shift {t}").unwrap();
    match verdict {
        Some(m) => {
            let d = m.min_pair_sq_distance().ok();
            writeln!(text, "valid yes").unwrap();
            writeln!(text, "min pair squared distance {}", d.map_or("n/a".into(), |d| d.to_string())).unwrap();
            let doc = ConfigDocument::from_configuration(&m.result, BTreeMap::new());
            Ok(Report::new(text, json!({"valid": true, "min_pair_sq_distance": d, "result": doc_value(&doc)})))
        }
        None => {
            writeln!(text, "valid no").unwrap();
            let mut report = Report::new(text, json!({"valid": false}));
            report.exit = 1;
            Ok(report)
        }
    }
}
