use thiserror::Error;

use crate::lattice::Site;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("basis is singular")]
    SingularBasis,
    #[error("arithmetic overflow in lattice computation")]
    Overflow,
    #[error("period lattice has a vector of squared norm {min_norm} < d2 = {d2}")]
    PeriodTooShort { min_norm: i64, d2: i64 },
    #[error("exclusion parameter d2 must be positive, got {0}")]
    InvalidD2(i64),
    #[error("need at least two particles, got {0}")]
    TooFewParticles(usize),
    #[error("site {0} is already occupied")]
    Occupied(Site),
    #[error("site {0} is not occupied")]
    NotOccupied(Site),
    #[error("node budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("no catalog entry for d2 = {d2}, variant {variant}")]
    UnknownCatalogEntry { d2: i64, variant: u8 },
    #[error("unknown mesh `{0}`")]
    UnknownMesh(String),
    #[error("unknown layer family `{0}`")]
    UnknownFamily(String),
    #[error("invalid stacking word: {0}")]
    InvalidWord(String),
    #[error("stacking word does not close on the period: {0}")]
    WordDoesNotClose(String),
    #[error("configuration is not layered: {0}")]
    NotLayered(String),
    #[error("selector matches no occupied site")]
    EmptySelector,
    #[error("Voronoi cell is unbounded up to cutoff radius² {0}")]
    UnboundedCell(i64),
    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),
    #[error("region is empty")]
    EmptyRegion,
    #[error("not an FCC embedding: {0}")]
    NotFccEmbedding(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
