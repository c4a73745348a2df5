//! Table building and the digest-checked cache layout.

use std::path::{Path, PathBuf};

use spinekit::tau::{pair_constants_circular, tau_polynomial, PairConstantTable};
use spinekit::{Budget, SpineContext, TauPolynomial};

use crate::TableKind;

pub fn cache_path(dir: &Path, charge: u32, particles: u32, kind: TableKind) -> PathBuf {
    let stem = match kind {
        TableKind::Tau => "tau",
        TableKind::Pair => "pair",
    };
    dir.join(format!("{stem}_L{charge}_M{particles}.json"))
}

pub fn run(charge: u32, particles: u32, kind: TableKind, dir: PathBuf) -> anyhow::Result<()> {
    std::fs::create_dir_all(&dir)?;
    let path = cache_path(&dir, charge, particles, kind);

    if path.exists() {
        // validate the digest; a clean file is a cache hit, a broken one is
        // a hard error so nothing silently recomputes over corrupt state
        let text = std::fs::read_to_string(&path)?;
        match kind {
            TableKind::Pair => {
                PairConstantTable::from_json(&text)?;
            }
            TableKind::Tau => {
                TauPolynomial::from_json(&text)?;
            }
        }
        println!("cache hit: {}", path.display());
        return Ok(());
    }

    let ctx = SpineContext::new(charge, particles)?;
    let budget = Budget::default();
    let basis = spinekit::spine::build_spine(&ctx, &budget)?;
    let (json, entries) = match kind {
        TableKind::Pair => {
            let table = pair_constants_circular(&basis, &budget)?;
            (table.to_json(), table.values.len())
        }
        TableKind::Tau => {
            let tau = tau_polynomial(&basis, &budget)?;
            (tau.to_json(), tau.num_terms())
        }
    };
    std::fs::write(&path, json)?;
    println!("wrote {} ({entries} entries)", path.display());
    Ok(())
}

/// Load a pair table from the cache, or compute and cache it.
pub fn load_or_build_pair(
    charge: u32,
    particles: u32,
    dir: &Path,
) -> anyhow::Result<PairConstantTable> {
    let path = cache_path(dir, charge, particles, TableKind::Pair);
    if path.exists() {
        let text = std::fs::read_to_string(&path)?;
        return Ok(PairConstantTable::from_json(&text)?);
    }
    let ctx = SpineContext::new(charge, particles)?;
    let budget = Budget::default();
    let basis = spinekit::spine::build_spine(&ctx, &budget)?;
    let table = pair_constants_circular(&basis, &budget)?;
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(&path, table.to_json());
    }
    Ok(table)
}
