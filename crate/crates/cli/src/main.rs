//! `hc3`: exact ground states of the hard-core lattice gas on Z³.

mod commands;
mod document;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hardcore::{Site, SublatticeBasis};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "hc3", version, about = "Exact ground states of the hard-core lattice gas on Z^3")]
struct Cli {
    /// Machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximum packing on a torus.
    Pack(PackArgs),
    /// Admissibility, density, minimum distance and saturation of a document.
    Verify {
        file: PathBuf,
    },
    /// Catalog sublattice configuration.
    Pc {
        #[arg(long)]
        d2: i64,
        #[arg(long, default_value_t = 1)]
        variant: u8,
        /// Torus period is this multiple of the sublattice.
        #[arg(long, default_value_t = 1)]
        scale: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Layered configuration from a stacking word.
    Layered(LayeredArgs),
    /// Exact Voronoi cell of one particle.
    Voronoi {
        file: PathBuf,
        #[arg(long, value_parser = parse_site)]
        site: Site,
        /// Write an OBJ mesh plus an exact `<file>.exact.json` sidecar.
        #[arg(long)]
        dump_geometry: Option<PathBuf>,
    },
    /// FCC embeddings of scale ℓ and their symmetry classes.
    Embed {
        #[arg(long)]
        ell: i64,
        #[arg(long)]
        classes: bool,
        /// Also decide whether each class admits an HCP-type stacking.
        #[arg(long)]
        layered: bool,
    },
    /// Local excitations up to a given order.
    Excite {
        file: PathBuf,
        #[arg(long)]
        max_order: i64,
        #[arg(long)]
        radius: i64,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Sliding moves: check one mesh shift or scan the standard family.
    Slide(SlideArgs),
}

#[derive(Args, Debug)]
struct PackArgs {
    #[arg(long)]
    d2: i64,
    /// Cubic torus Z³ / (L·Z)³.
    #[arg(long, conflicts_with = "period", required_unless_present = "period")]
    diag: Option<i64>,
    /// Period generators `a,b,c;d,e,f;g,h,i`.
    #[arg(long, value_parser = parse_period)]
    period: Option<SublatticeBasis>,
    #[arg(long)]
    count: bool,
    #[arg(long, requires = "count")]
    mod_translations: bool,
    #[arg(long)]
    budget: Option<u64>,
    /// Write the witness document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LayeredArgs {
    #[arg(long)]
    d2: i64,
    /// Family name; needed when `d2` has more than one (`I` or `II` for 6).
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    word: String,
    /// Build on this torus instead of the natural period.
    #[arg(long, value_parser = parse_period, conflicts_with = "window")]
    period: Option<SublatticeBasis>,
    /// Free-boundary box `x,y,z:x,y,z`.
    #[arg(long, value_parser = parse_window)]
    window: Option<(Site, Site)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SlideArgs {
    file: PathBuf,
    /// `anchor:dir` (line), `anchor:g1:g2` (plane), or a mesh name with optional `@anchor`.
    #[arg(long, requires = "shift", conflicts_with = "scan")]
    mesh: Option<String>,
    #[arg(long, value_parser = parse_site)]
    shift: Option<Site>,
    /// Try every standard line and plane mesh with every shift of norm 1 or 2.
    #[arg(long, required_unless_present = "mesh")]
    scan: bool,
}

pub(crate) fn parse_site(s: &str) -> Result<Site, String> {
    let parts: Vec<&str> = s.trim().trim_matches(|c| c == '(' || c == ')').split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got `{s}`"));
    }
    let mut v = [0i64; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.trim().parse().map_err(|_| format!("not an integer: `{p}`"))?;
    }
    Ok(Site(v))
}

fn parse_period(s: &str) -> Result<SublatticeBasis, String> {
    let rows: Vec<Site> = s.split(';').map(parse_site).collect::<Result<_, _>>()?;
    if rows.len() != 3 {
        return Err(format!("expected three generators separated by `;`, got `{s}`"));
    }
    SublatticeBasis::new(rows[0], rows[1], rows[2]).map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> Result<(Site, Site), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    Ok((parse_site(lo)?, parse_site(hi)?))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| CliError::BadInput(format!("THREADS must be a number, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::BadInput(format!("cannot size thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<commands::Report, CliError> {
        configure_threads()?;
        match cli.command {
            Command::Pack(a) => commands::pack(a.d2, a.diag, a.period, a.count, a.mod_translations, a.budget, a.out),
            Command::Verify { file } => commands::verify(&file),
            Command::Pc { d2, variant, scale, out } => commands::pc(d2, variant, scale, out),
            Command::Layered(a) => commands::layered(a.d2, a.family.as_deref(), &a.word, a.period, a.window, a.out),
            Command::Voronoi { file, site, dump_geometry } => commands::voronoi(&file, site, dump_geometry),
            Command::Embed { ell, classes, layered } => commands::embed(ell, classes, layered),
            Command::Excite { file, max_order, radius, budget } => commands::excite(&file, max_order, radius, budget),
            Command::Slide(a) => commands::slide(&a.file, a.mesh.as_deref(), a.shift, a.scan),
        }
    };
    match run() {
        Ok(report) => {
            print!("{}", report.render(cli.json));
            ExitCode::from(report.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
