//! Curve emission, including the float stretch path.

use std::path::{Path, PathBuf};

use spinekit::correlation::{circular_pair_curve, emit_curve, FloatCurve};
use spinekit::tau::pair_constants_circular_f64;
use spinekit::{Budget, SpineContext};

/// Exact sizes stop being a desk job around here; beyond it the float path
/// must be requested explicitly.
const STRETCH_CHARGE: u32 = 6;

pub fn run(
    charge: u32,
    particles: u32,
    grid: usize,
    out: &Path,
    stretch_float: bool,
    cache_dir: PathBuf,
) -> anyhow::Result<()> {
    if charge >= STRETCH_CHARGE && !stretch_float {
        anyhow::bail!(
            "L = {charge} is a stretch configuration: exact integers are feasible but \
             long-running; pass --stretch-float to use the float path (inexact, tagged)"
        );
    }

    if charge >= STRETCH_CHARGE {
        let ctx = SpineContext::new(charge, particles)?;
        let budget = Budget {
            max_terms: 200_000_000,
        };
        let basis = spinekit::spine::build_spine(&ctx, &budget)?;
        let values = pair_constants_circular_f64(&basis, &budget)?;
        let curve = FloatCurve::from_pair_values(charge, particles, &values)?;
        write_float_csv(&curve, grid, out)?;
        println!(
            "wrote {} (float path, inexact; integral over [0, pi] = {:.9})",
            out.display(),
            curve.integral(grid.max(1024))
        );
        return Ok(());
    }

    let table = crate::tables::load_or_build_pair(charge, particles, &cache_dir)?;
    let curve = circular_pair_curve(&table)?;
    emit_curve(&curve, grid, out)?;
    println!(
        "wrote {} (exact normalization {})",
        out.display(),
        spinekit::scalar::format_rat(&curve.normalization_integral()?)
    );
    Ok(())
}

fn write_float_csv(curve: &FloatCurve, grid: usize, path: &Path) -> anyhow::Result<()> {
    use std::io::Write;
    let mut file = std::fs::File::create(path)?;
    writeln!(
        file,
        "# spinekit curve schema=1 L={} M={} normalization=float inexact=true",
        curve.charge, curve.particles
    )?;
    writeln!(file, "theta,r2")?;
    for (theta, value) in curve.grid(grid) {
        writeln!(file, "{theta:.12},{value:.12}")?;
    }
    Ok(())
}
