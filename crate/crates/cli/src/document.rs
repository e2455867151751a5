//! JSON configuration documents.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use hardcore::{Configuration, Quotient, Site, SublatticeBasis, WindowConfiguration};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lo: [i64; 3],
    pub hi: [i64; 3],
}

/// On-disk configuration: a periodic torus (`period`) or a free box (`window`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub d2: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<[[i64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    pub sites: Vec<[i64; 3]>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Loaded {
    Periodic(Configuration),
    Window(WindowConfiguration),
}

impl Loaded {
    pub fn periodic(self) -> CliResult<Configuration> {
        match self {
            Loaded::Periodic(c) => Ok(c),
            Loaded::Window(_) => Err(CliError::BadInput("this command needs a periodic configuration".into())),
        }
    }
}

impl ConfigDocument {
    /// Canonical form: HNF period and coset representatives in coset order.
    pub fn from_configuration(c: &Configuration, metadata: BTreeMap<String, String>) -> Self {
        let rows = c.quotient().hnf().generators().map(|g| g.0);
        ConfigDocument { d2: c.d2(), period: Some(rows), window: None, sites: c.sites().iter().map(|s| s.0).collect(), metadata }
    }

    pub fn from_window(w: &WindowConfiguration, metadata: BTreeMap<String, String>) -> Self {
        let (lo, hi) = w.bounds();
        ConfigDocument {
            d2: w.d2(),
            period: None,
            window: Some(Window { lo: lo.0, hi: hi.0 }),
            sites: w.sites().iter().map(|s| s.0).collect(),
            metadata,
        }
    }

    pub fn to_loaded(&self) -> CliResult<Loaded> {
        let sites = self.sites.iter().map(|&s| Site::from(s));
        match (&self.period, &self.window) {
            (Some(rows), None) => {
                let basis = SublatticeBasis::from_rows(*rows)?;
                let q = Arc::new(Quotient::new(basis));
                Ok(Loaded::Periodic(Configuration::new(q, self.d2, sites)?))
            }
            (None, Some(w)) => Ok(Loaded::Window(WindowConfiguration::new(w.lo.into(), w.hi.into(), self.d2, sites)?)),
            _ => Err(CliError::BadInput("document needs exactly one of `period` or `window`".into())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}

pub fn check(loaded: &Loaded) -> CliResult<()> {
    let (violation, d2) = match loaded {
        Loaded::Periodic(c) => (c.check_admissible(), c.d2()),
        Loaded::Window(w) => (w.check_admissible(), w.d2()),
    };
    match violation {
        Some(violation) => Err(CliError::Violation { violation, d2 }),
        None => Ok(()),
    }
}

pub fn read_document(path: &Path) -> CliResult<ConfigDocument> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.into(), source })
}

/// Reads and, when `validate` is set, checks admissibility.
pub fn load(path: &Path, validate: bool) -> CliResult<(Loaded, ConfigDocument)> {
    let doc = read_document(path)?;
    let loaded = doc.to_loaded()?;
    if validate {
        check(&loaded)?;
    }
    Ok((loaded, doc))
}

pub fn save(doc: &ConfigDocument, path: &Path) -> CliResult<()> {
    fs::write(path, doc.to_json() + "\n").map_err(|source| CliError::Write { path: path.into(), source })
}
