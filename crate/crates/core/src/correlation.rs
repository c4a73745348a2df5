//! m-point correlation functions by two routes, and the exact circular
//! two-point curve.
//!
//! The direct route wedges m monomial-curve blades against the background
//! power `gamma^(M-m)/(M-m)!` and projects. The shift route evaluates the
//! (M-m)-particle partition function on moments reweighted by
//! `prod_i (1 - x/y_i)^beta`, times the interaction prefactor
//! `prod_{i<j} (y_j - y_i)^beta * prod_i y_i^(beta (M-m))`; the monomial
//! `y` factor is the exact conversion between `(x - y)` and `(1 - x/y)`
//! weights (even beta kills all signs). The two routes agree up to the
//! single constant `Z = tau_M`, independent of the points, which is what the
//! route-equivalence checks pin down.
//!
//! On the circle everything runs through the exact Fourier table
//! `D_p = star(eps_p ^ eps_{-p} ^ eps_0^(M-2))`: evaluating the pair density
//! at angular separation theta gives `R_2(theta) ~ sum_p D_p e^{i p theta}`
//! with the canonical-power phases cancelling identically. Floats appear
//! only in the final grid evaluation.

use std::collections::BTreeMap;
use std::io::Write;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::moments::{miwa_insert_at, MomentSequence};
use crate::scalar::{binomial, factorial, format_rat, Rat, Ring};
use crate::spine::{build_spine, wronskian_blade, SpineBasis, SpineContext};
use crate::tau::{
    hyperpfaffian, Budget, GramForm, MomentumBand, PairConstantTable, WedgeStrategy,
};

/// Which evaluation route a correlation request runs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Route {
    Direct,
    Miwa,
    Both,
}

/// One correlation evaluation request against an M-particle context.
#[derive(Clone, Debug)]
pub struct CorrelationRequest {
    pub charge: u32,
    pub particles: u32,
    pub points: Vec<Rat>,
    pub route: Route,
}

/// Outcome of a request: route values and their ratio when both ran.
#[derive(Clone, Debug)]
pub struct CorrelationReport {
    pub direct: Option<Rat>,
    pub miwa: Option<Rat>,
    pub ratio: Option<Rat>,
}

/// Unnormalized m-point density through the wedge route:
/// `star(omega(y_1) ^ ... ^ omega(y_m) ^ gamma^(M-m)/(M-m)!)`.
pub fn correlation_direct<C: Ring>(
    points: &[C],
    basis: &SpineBasis,
    provider: &MomentSequence<C>,
    budget: &Budget,
) -> Result<C> {
    let ctx = *basis.context();
    let m = ctx.particles();
    let inserted = points.len() as u32;
    if inserted > m {
        return Err(Error::DegreeOverflow {
            degree: inserted * ctx.charge(),
            dim_v: ctx.dim_v(),
        });
    }

    let background = if inserted == m {
        crate::algebra::SparseForm::unit(ctx.dim_v())
    } else {
        let gram = GramForm::from_moments(&ctx, provider)?;
        let band = inserted as i64 * ctx.power();
        let (power, _) = crate::tau::wedge_power(
            &gram.realize(basis)?,
            m - inserted,
            &ctx,
            WedgeStrategy::Auto,
            Some(MomentumBand { lo: -band, hi: band }),
            budget,
        )?;
        power
    };

    let mut front = crate::algebra::SparseForm::<C>::unit(ctx.dim_v());
    for y in points {
        front = front.wedge(&wronskian_blade(y, basis))?;
    }
    let star = front.star_pair(&background)?;
    let fact = Rat::from_integer(factorial(m - inserted));
    Ok(star.scale_rat(&(Rat::from_integer(1.into()) / fact)))
}

/// m-point density through the shift route: interaction prefactor times the
/// (M-m)-particle partition function on point-reweighted moments, divided by
/// the M-particle partition function. Proportional to the direct route with
/// the point-independent constant `tau_M`.
pub fn correlation_miwa(
    points: &[Rat],
    ctx: &SpineContext,
    provider: &MomentSequence<Rat>,
    budget: &Budget,
) -> Result<Rat> {
    let m = ctx.particles();
    let inserted = points.len() as u32;
    if inserted > m {
        return Err(Error::DegreeOverflow {
            degree: inserted * ctx.charge(),
            dim_v: ctx.dim_v(),
        });
    }
    let beta = ctx.beta();

    // prefactor: pairwise interaction of the inserted points, plus the
    // monomial conversion factor per point
    let mut prefactor = <Rat as Ring>::one();
    for j in 1..points.len() {
        for i in 0..j {
            let diff = &points[j] - &points[i];
            for _ in 0..beta {
                prefactor *= &diff;
            }
        }
    }
    for y in points {
        for _ in 0..beta as u64 * (m - inserted) as u64 {
            prefactor *= y;
        }
    }

    // denominator: the undeformed M-particle partition function
    let basis_m = build_spine(ctx, budget)?;
    let z = hyperpfaffian(
        &GramForm::from_moments(ctx, provider)?,
        &basis_m,
        WedgeStrategy::Auto,
        budget,
    )?;
    if Ring::is_zero(&z) {
        return Err(Error::InvalidContext(
            "background partition function vanishes".into(),
        ));
    }

    // numerator: the (M-m)-particle partition function on shifted moments
    let tau_rest = if inserted == m {
        <Rat as Ring>::one()
    } else {
        let mut shifted = provider.clone();
        for y in points {
            shifted = miwa_insert_at(&shifted, beta, y)?;
        }
        let rest_ctx = SpineContext::new(ctx.charge(), m - inserted)?;
        let rest_basis = build_spine(&rest_ctx, budget)?;
        hyperpfaffian(
            &GramForm::from_moments(&rest_ctx, &shifted)?,
            &rest_basis,
            WedgeStrategy::Auto,
            budget,
        )?
    };

    Ok(prefactor * tau_rest / z)
}

/// Run a request on its chosen route(s).
pub fn correlate(
    req: &CorrelationRequest,
    provider: &MomentSequence<Rat>,
    budget: &Budget,
) -> Result<CorrelationReport> {
    let ctx = SpineContext::new(req.charge, req.particles)?;
    let direct = match req.route {
        Route::Direct | Route::Both => {
            let basis = build_spine(&ctx, budget)?;
            Some(correlation_direct(&req.points, &basis, provider, budget)?)
        }
        Route::Miwa => None,
    };
    let miwa = match req.route {
        Route::Miwa | Route::Both => Some(correlation_miwa(&req.points, &ctx, provider, budget)?),
        Route::Direct => None,
    };
    let ratio = match (&direct, &miwa) {
        (Some(d), Some(w)) if !Ring::is_zero(w) => Some(d / w),
        _ => None,
    };
    Ok(CorrelationReport { direct, miwa, ratio })
}

/// Exact circular two-point curve `R_2(theta)`, normalized so that the
/// integral over `[0, pi]` is `C(M, 2)`.
///
/// Stored as rational Fourier coefficients `B_p` with
/// `R_2(theta) = (1/pi) sum_p B_p e^{i p theta}`. In the closed form of
/// `int_0^pi e^{i p theta} dtheta` the `p` and `-p` contributions cancel for
/// every `p != 0`, so the normalization integral is exactly `B_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationCurve {
    pub charge: u32,
    pub particles: u32,
    /// `B_p = C(M,2) D_p / D_0`, symmetric in `p`.
    pub fourier: BTreeMap<i64, Rat>,
    /// Digest of the exact pair-constant table the curve came from.
    pub source_digest: String,
}

impl CorrelationCurve {
    /// Exact `int_0^pi R_2 dtheta` from the closed-form harmonic integrals;
    /// requires (and checks) the symmetric Fourier table.
    pub fn normalization_integral(&self) -> Result<Rat> {
        for (p, b) in &self.fourier {
            let mirrored = self.fourier.get(&-p).cloned().unwrap_or_else(Ring::zero);
            if mirrored != *b {
                return Err(Error::InvalidContext(format!(
                    "fourier table asymmetric at p = {p}"
                )));
            }
        }
        Ok(self.fourier.get(&0).cloned().unwrap_or_else(Ring::zero))
    }

    /// Exact value at theta = 0 as the rational factor of `1/pi`; the
    /// coincidence zero makes it vanish identically.
    pub fn value_at_zero_times_pi(&self) -> Rat {
        let mut acc = <Rat as Ring>::zero();
        for b in self.fourier.values() {
            acc += b;
        }
        acc
    }

    /// Float evaluation at one angle.
    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (p, b) in &self.fourier {
            let bf = b.to_f64().unwrap_or(0.0);
            if *p == 0 {
                acc += bf;
            } else if *p > 0 {
                acc += 2.0 * bf * (*p as f64 * theta).cos();
            }
        }
        acc / std::f64::consts::PI
    }

    /// Evaluate on a uniform inclusive grid over `[0, pi]`.
    pub fn grid(&self, grid_size: usize) -> Vec<(f64, f64)> {
        let n = grid_size.max(2);
        (0..n)
            .map(|i| {
                let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                (theta, self.eval(theta))
            })
            .collect()
    }
}

/// Build the normalized circular pair curve from an exact pair-constant
/// table.
pub fn circular_pair_curve(table: &PairConstantTable) -> Result<CorrelationCurve> {
    let d0 = table.get(0);
    if d0.is_zero() || d0.is_negative() {
        return Err(Error::InvalidContext(
            "pair table has no positive zero-mode".into(),
        ));
    }
    let pairs = Rat::from_integer(binomial(table.particles as i64, 2));
    let mut fourier = BTreeMap::new();
    for (p, d) in &table.values {
        if d.is_zero() {
            continue;
        }
        fourier.insert(*p, Rat::new(d.clone(), d0.clone()) * &pairs);
    }
    Ok(CorrelationCurve {
        charge: table.charge,
        particles: table.particles,
        fourier,
        source_digest: table.digest(),
    })
}

/// Float curve for stretch configurations; same layout, inexact.
#[derive(Clone, Debug)]
pub struct FloatCurve {
    pub charge: u32,
    pub particles: u32,
    pub fourier: BTreeMap<i64, f64>,
}

impl FloatCurve {
    pub fn from_pair_values(
        charge: u32,
        particles: u32,
        values: &BTreeMap<i64, f64>,
    ) -> Result<Self> {
        let d0 = *values.get(&0).unwrap_or(&0.0);
        if d0 <= 0.0 {
            return Err(Error::InvalidContext(
                "pair table has no positive zero-mode".into(),
            ));
        }
        let pairs = binomial(particles as i64, 2)
            .to_f64()
            .expect("small binomial");
        let fourier = values.iter().map(|(p, d)| (*p, pairs * d / d0)).collect();
        Ok(FloatCurve {
            charge,
            particles,
            fourier,
        })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (p, b) in &self.fourier {
            if *p == 0 {
                acc += b;
            } else if *p > 0 {
                acc += 2.0 * b * (*p as f64 * theta).cos();
            }
        }
        acc / std::f64::consts::PI
    }

    pub fn grid(&self, grid_size: usize) -> Vec<(f64, f64)> {
        let n = grid_size.max(2);
        (0..n)
            .map(|i| {
                let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                (theta, self.eval(theta))
            })
            .collect()
    }

    /// Trapezoid approximation of `int_0^pi`; the exact path never needs
    /// this, the float acceptance bound does.
    pub fn integral(&self, grid_size: usize) -> f64 {
        let rows = self.grid(grid_size);
        let mut acc = 0.0;
        for w in rows.windows(2) {
            acc += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        }
        acc
    }
}

/// Write a curve as CSV: a comment header with the configuration, the exact
/// normalization and the source-table digest, then `theta,r2` rows over the
/// inclusive grid `[0, pi]`.
pub fn emit_curve(
    curve: &CorrelationCurve,
    grid_size: usize,
    path: &std::path::Path,
) -> Result<()> {
    if grid_size < 2 {
        return Err(Error::InvalidContext("grid needs at least 2 points".into()));
    }
    let mut file = std::fs::File::create(path)?;
    writeln!(
        file,
        "# spinekit curve schema=1 L={} M={} normalization={} digest={}",
        curve.charge,
        curve.particles,
        format_rat(&curve.normalization_integral()?),
        curve.source_digest,
    )?;
    writeln!(file, "theta,r2")?;
    for (theta, value) in curve.grid(grid_size) {
        writeln!(file, "{theta:.12},{value:.12}")?;
    }
    Ok(())
}
