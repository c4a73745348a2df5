//! Gram forms, momentum-filtered wedge powers, hyperpfaffians, the partition
//! polynomial in formal moments, structure constants and operator lifting.
//!
//! The partition function of the ensemble is the hyperpfaffian
//! `Z = star(gamma^M / M!)` of the Gram form `gamma = sum_j m_j eps_j`.
//! Because the top line carries total momentum zero, only zero-sum momentum
//! configurations survive the Hodge projection; the wedge-power driver turns
//! that conservation law into a pruning rule on intermediate blades, which is
//! the entire dimensional-reduction story and the surface the benchmark
//! measures.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::algebra::SparseForm;
use crate::error::{Error, Result};
use crate::moments::{MomentSequence, TimeDeformation};
use crate::poly::MomentPoly;
use crate::scalar::{factorial, format_rat, is_integer, parse_rat, Rat, Ring};
use crate::spine::{partial_momentum, SpineBasis, SpineContext};

/// Caps on intermediate sizes; exceeding one degrades to an error naming the
/// offending configuration so callers can fall back to the float path.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_terms: usize,
}

impl Default for Budget {
    fn default() -> Self {
        // Comfortable for every exact desk-scale configuration; the float
        // stretch path raises it explicitly.
        Budget {
            max_terms: 50_000_000,
        }
    }
}

/// How a wedge power is evaluated.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WedgeStrategy {
    /// Left fold `((f^2)^...)^f`, one factor at a time.
    Iterated,
    /// Binary powering over `f^2, f^4, ...`, reusing squared intermediates.
    Squaring,
    /// Cost-model choice between the two.
    Auto,
}

impl WedgeStrategy {
    /// The model: squaring reuses `f^(2^i)` so it wins once at least four
    /// factors are needed (it halves the number of large wedges); below that
    /// the fold has strictly fewer pair enumerations.
    fn resolve(self, factors: u32) -> WedgeStrategy {
        match self {
            WedgeStrategy::Auto => {
                if factors >= 4 {
                    WedgeStrategy::Squaring
                } else {
                    WedgeStrategy::Iterated
                }
            }
            s => s,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WedgeStrategy::Iterated => "iterated",
            WedgeStrategy::Squaring => "squaring",
            WedgeStrategy::Auto => "auto",
        }
    }
}

/// Momentum window the final wedge power is required to land in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MomentumBand {
    pub lo: i64,
    pub hi: i64,
}

impl MomentumBand {
    pub fn zero() -> Self {
        MomentumBand { lo: 0, hi: 0 }
    }
}

/// Size and effort counters of one wedge-power evaluation.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct WedgeStats {
    pub strategy: &'static str,
    pub factors: u32,
    pub peak_terms: usize,
    pub final_terms: usize,
    pub wall_ms: f64,
}

/// Exact wedge power `f^m` of a degree-L form, optionally pruned.
///
/// With a band, an intermediate blade built from `k` factors survives only if
/// its momentum plus `m - k` more factors drawn from the momentum support of
/// `f` can still reach the band. Pruning never changes the blades of the
/// final result inside the band: momenta add over factors, so a discarded
/// intermediate can only complete to totals outside it.
pub fn wedge_power<C: Ring>(
    f: &SparseForm<C>,
    m: u32,
    ctx: &SpineContext,
    strategy: WedgeStrategy,
    band: Option<MomentumBand>,
    budget: &Budget,
) -> Result<(SparseForm<C>, WedgeStats)> {
    let start = Instant::now();
    let resolved = strategy.resolve(m);
    let mut stats = WedgeStats {
        strategy: resolved.name(),
        factors: m,
        ..WedgeStats::default()
    };

    if f.degree() != ctx.charge() {
        return Err(Error::WrongDegree {
            expected: ctx.charge(),
            got: f.degree(),
        });
    }
    if m == 0 {
        let out = SparseForm::unit(ctx.dim_v());
        stats.final_terms = out.num_terms();
        stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok((out, stats));
    }
    let degree = m * ctx.charge();
    if degree > ctx.dim_v() {
        return Err(Error::DegreeOverflow {
            degree,
            dim_v: ctx.dim_v(),
        });
    }

    // momentum support of a single factor
    let (fmin, fmax) = f
        .terms()
        .map(|(b, _)| partial_momentum(*b, ctx))
        .fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p), hi.max(p)));

    let keep = |blade: crate::algebra::Blade, factors_used: u32| -> bool {
        match band {
            None => true,
            Some(bandv) => {
                let p = partial_momentum(blade, ctx);
                let rest = (m - factors_used) as i64;
                p + rest * fmin <= bandv.hi && p + rest * fmax >= bandv.lo
            }
        }
    };

    let check_budget = |form: &SparseForm<C>| -> Result<()> {
        if form.num_terms() > budget.max_terms {
            Err(Error::BudgetExceeded {
                what: "wedge power",
                charge: ctx.charge(),
                particles: ctx.particles(),
                needed: form.num_terms() as u128,
                cap: budget.max_terms as u128,
            })
        } else {
            Ok(())
        }
    };

    // prefilter the factor itself (it is the k = 1 intermediate)
    let f1 = match band {
        None => f.clone(),
        Some(_) => {
            let kept: Vec<_> = f
                .terms()
                .filter(|(b, _)| keep(**b, 1))
                .map(|(b, c)| (*b, c.clone()))
                .collect();
            SparseForm::from_terms(ctx.dim_v(), ctx.charge(), kept)?
        }
    };
    stats.peak_terms = f1.num_terms();

    let out = match resolved {
        WedgeStrategy::Iterated => {
            let mut acc = f1.clone();
            for k in 2..=m {
                acc = acc.wedge_filtered(&f1, |b| keep(b, k))?;
                check_budget(&acc)?;
                stats.peak_terms = stats.peak_terms.max(acc.num_terms());
            }
            acc
        }
        WedgeStrategy::Squaring => {
            // powers[i] = f^(2^i), each filtered at its own factor count
            let mut powers: Vec<SparseForm<C>> = vec![f1.clone()];
            let mut i = 0;
            while (2u32 << i) <= m {
                let prev = &powers[i as usize];
                let count = 2u32 << i;
                let sq = prev.wedge_filtered(prev, |b| keep(b, count))?;
                check_budget(&sq)?;
                stats.peak_terms = stats.peak_terms.max(sq.num_terms());
                powers.push(sq);
                i += 1;
            }
            let mut acc: Option<SparseForm<C>> = None;
            let mut used = 0u32;
            for bit in 0..32 {
                if m & (1 << bit) == 0 {
                    continue;
                }
                let piece = &powers[bit as usize];
                used += 1 << bit;
                acc = Some(match acc {
                    None => piece.clone(),
                    Some(a) => {
                        let next = a.wedge_filtered(piece, |b| keep(b, used))?;
                        check_budget(&next)?;
                        stats.peak_terms = stats.peak_terms.max(next.num_terms());
                        next
                    }
                });
            }
            acc.expect("m >= 1")
        }
        WedgeStrategy::Auto => unreachable!("resolved above"),
    };

    stats.final_terms = out.num_terms();
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((out, stats))
}

/// The Gram form of a moment sequence over one context: coefficients
/// `m_j` on the momentum sectors, realized on demand as `sum_j m_j eps_j`.
#[derive(Clone, Debug)]
pub struct GramForm<C: Ring> {
    ctx: SpineContext,
    coeffs: BTreeMap<i64, C>,
}

impl<C: Ring> GramForm<C> {
    /// Read the full momentum band from a provider (absolute indexing).
    pub fn from_moments(ctx: &SpineContext, m: &MomentSequence<C>) -> Result<Self> {
        let p = ctx.power();
        let mut coeffs = BTreeMap::new();
        for j in -p..=p {
            let v = m.lookup(p + j)?;
            if !v.is_zero() {
                coeffs.insert(j, v);
            }
        }
        Ok(GramForm { ctx: *ctx, coeffs })
    }

    pub fn from_coeffs(ctx: &SpineContext, coeffs: BTreeMap<i64, C>) -> Result<Self> {
        let p = ctx.power();
        if let Some(j) = coeffs.keys().find(|j| j.abs() > p) {
            return Err(Error::InvalidContext(format!(
                "gram coefficient at momentum {j} outside band [-{p}, {p}]"
            )));
        }
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(GramForm { ctx: *ctx, coeffs })
    }

    pub fn context(&self) -> &SpineContext {
        &self.ctx
    }

    pub fn coefficient(&self, j: i64) -> Option<&C> {
        self.coeffs.get(&j)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&i64, &C)> {
        self.coeffs.iter()
    }

    /// `sum_j m_j eps_j / blade_norm` as a concrete sparse form. The
    /// confluence normalization keeps the hyperpfaffian equal to the
    /// measure-side partition function for every charge, matching the
    /// normalized monomial-curve blade it is the moment image of.
    pub fn realize(&self, basis: &SpineBasis) -> Result<SparseForm<C>> {
        if basis.context() != &self.ctx {
            return Err(Error::InvalidContext(
                "basis context does not match gram form".into(),
            ));
        }
        let norm = Rat::new(num_bigint::BigInt::from(1), self.ctx.blade_norm());
        let mut acc = SparseForm::<C>::zero(self.ctx.dim_v(), self.ctx.charge());
        for (j, m) in &self.coeffs {
            let eps = basis
                .sector(*j)
                .ok_or_else(|| Error::InvalidContext(format!("no sector {j}")))?;
            let lifted: SparseForm<C> = eps.lift(|c| C::from_rat(&(c * &norm)).mul_ref(m));
            acc = acc.add(&lifted)?;
        }
        Ok(acc)
    }
}

/// Partition function `star(gamma^M / M!)`, exact and independent of the
/// wedge strategy.
pub fn hyperpfaffian<C: Ring>(
    gram: &GramForm<C>,
    basis: &SpineBasis,
    strategy: WedgeStrategy,
    budget: &Budget,
) -> Result<C> {
    Ok(hyperpfaffian_with_stats(gram, basis, strategy, budget)?.0)
}

pub fn hyperpfaffian_with_stats<C: Ring>(
    gram: &GramForm<C>,
    basis: &SpineBasis,
    strategy: WedgeStrategy,
    budget: &Budget,
) -> Result<(C, WedgeStats)> {
    let ctx = *gram.context();
    let realized = gram.realize(basis)?;
    let (power, stats) = wedge_power(
        &realized,
        ctx.particles(),
        &ctx,
        strategy,
        Some(MomentumBand::zero()),
        budget,
    )?;
    let star = power.hodge_star()?;
    let m_fact = Rat::from_integer(factorial(ctx.particles()));
    Ok((star.scale_rat(&(Rat::from_integer(1.into()) / m_fact)), stats))
}

/// The partition function as a sparse polynomial in formal moments, indexed
/// by zero-sum momentum multisets. The coefficient stored for a multiset `J`
/// is `star(eps_{j_1} ^ ... ^ eps_{j_M}) / prod(multiplicity!)`, so that
/// evaluation is a plain sparse contraction against any moment sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct TauPolynomial {
    charge: u32,
    particles: u32,
    terms: BTreeMap<Vec<i64>, Rat>,
}

impl TauPolynomial {
    pub fn context(&self) -> SpineContext {
        SpineContext::new(self.charge, self.particles).expect("validated at build")
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, multiset: &[i64]) -> Rat {
        let mut key = multiset.to_vec();
        key.sort_unstable();
        self.terms.get(&key).cloned().unwrap_or_else(Ring::zero)
    }

    /// Evaluate against any moment sequence (absolute indexing).
    pub fn evaluate<C: Ring>(&self, m: &MomentSequence<C>) -> Result<C> {
        self.evaluate_with(&mut |n| m.lookup(n))
    }

    pub fn evaluate_with<C: Ring>(
        &self,
        lookup: &mut dyn FnMut(i64) -> Result<C>,
    ) -> Result<C> {
        let p = self.context().power();
        let mut acc = C::zero();
        for (multiset, coeff) in &self.terms {
            let mut term = C::from_rat(coeff);
            for j in multiset {
                term = term.mul_ref(&lookup(p + j)?);
            }
            acc.add_assign_ref(&term);
        }
        Ok(acc)
    }

    /// Formal derivative route for the shift action: each moment factor
    /// `m_j` differentiates to `m_{j+k}`.
    pub fn derivative_eval<C: Ring>(&self, m: &MomentSequence<C>, k: i64) -> Result<C> {
        let p = self.context().power();
        let mut acc = C::zero();
        for (multiset, coeff) in &self.terms {
            for pos in 0..multiset.len() {
                // skip repeated positions; multiplicity is handled by
                // differentiating each copy once
                let mut term = C::from_rat(coeff);
                for (q, j) in multiset.iter().enumerate() {
                    let n = if q == pos { p + j + k } else { p + j };
                    term = term.mul_ref(&m.lookup(n)?);
                }
                acc.add_assign_ref(&term);
            }
        }
        Ok(acc)
    }

    /// Partial derivative with respect to the sector coefficient `m_j`,
    /// evaluated on a moment sequence.
    pub fn partial_eval<C: Ring>(&self, m: &MomentSequence<C>, j: i64) -> Result<C> {
        let p = self.context().power();
        let mut acc = C::zero();
        for (multiset, coeff) in &self.terms {
            let mult = multiset.iter().filter(|x| **x == j).count();
            if mult == 0 {
                continue;
            }
            let mut term = C::from_rat(&(coeff * Rat::from_integer(BigInt::from(mult))));
            let mut skipped = false;
            for x in multiset {
                if *x == j && !skipped {
                    skipped = true;
                    continue;
                }
                term = term.mul_ref(&m.lookup(p + x)?);
            }
            acc.add_assign_ref(&term);
        }
        Ok(acc)
    }

    /// Flatten to a polynomial in absolute moment symbols.
    pub fn to_absolute_poly(&self) -> MomentPoly {
        let p = self.context().power();
        let mut acc = MomentPoly::zero();
        for (multiset, coeff) in &self.terms {
            let mut term = MomentPoly::constant(coeff.clone());
            for j in multiset {
                term = term.mul_ref(&MomentPoly::symbol(p + j));
            }
            acc.add_assign_ref(&term);
        }
        acc
    }
}

/// Expand the partition function over formal moments by a formal wedge
/// power. Every stored multiset sums to zero; nonzero-sum products cannot
/// reach the top line.
pub fn tau_polynomial(basis: &SpineBasis, budget: &Budget) -> Result<TauPolynomial> {
    let ctx = *basis.context();
    let formal = crate::moments::provider_formal(0, 2 * ctx.power());
    let gram = GramForm::from_moments(&ctx, &formal)?;
    let value: MomentPoly = hyperpfaffian(&gram, basis, WedgeStrategy::Auto, budget)?;

    let p = ctx.power();
    let mut terms = BTreeMap::new();
    for (mono, coeff) in value.terms() {
        if mono.len() != ctx.particles() as usize {
            return Err(Error::InvalidContext(format!(
                "formal expansion produced a degree-{} monomial",
                mono.len()
            )));
        }
        let rel: Vec<i64> = mono.iter().map(|n| n - p).collect();
        debug_assert_eq!(rel.iter().sum::<i64>(), 0, "zero-sum selection rule");
        terms.insert(rel, coeff.clone());
    }
    Ok(TauPolynomial {
        charge: ctx.charge(),
        particles: ctx.particles(),
        terms,
    })
}

/// `star(eps_{j_1} ^ ... ^ eps_{j_M})`, computed by honest wedging. Exactly
/// zero whenever the momenta do not sum to zero.
pub fn structure_constant(momenta: &[i64], basis: &SpineBasis) -> Result<Rat> {
    let ctx = basis.context();
    if momenta.len() != ctx.particles() as usize {
        return Err(Error::InvalidContext(format!(
            "need {} momenta, got {}",
            ctx.particles(),
            momenta.len()
        )));
    }
    let mut acc = SparseForm::<Rat>::unit(ctx.dim_v());
    for j in momenta {
        match basis.sector(*j) {
            None => return Ok(Ring::zero()),
            Some(eps) => acc = acc.wedge(eps)?,
        }
    }
    acc.hodge_star()
}

/// Exact pair-projection constants of the circular background:
/// `D_p = star(eps_p ^ eps_{-p} ^ eps_0^(M-2))`, integers, symmetric in `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairConstantTable {
    pub charge: u32,
    pub particles: u32,
    pub values: BTreeMap<i64, BigInt>,
}

impl PairConstantTable {
    pub fn get(&self, p: i64) -> BigInt {
        self.values.get(&p).cloned().unwrap_or_default()
    }
}

pub fn pair_constants_circular(basis: &SpineBasis, budget: &Budget) -> Result<PairConstantTable> {
    let ctx = *basis.context();
    if ctx.particles() < 2 {
        return Err(Error::InvalidContext(
            "pair constants need at least two particles".into(),
        ));
    }
    let eps0 = basis
        .sector(0)
        .ok_or_else(|| Error::InvalidContext("no zero sector".into()))?;
    let (background, _) = wedge_power(
        eps0,
        ctx.particles() - 2,
        &ctx,
        WedgeStrategy::Auto,
        Some(MomentumBand::zero()),
        budget,
    )?;

    let p_max = ctx.power();
    let halves: Vec<(i64, BigInt)> = (0..=p_max)
        .into_par_iter()
        .map(|p| -> Result<(i64, BigInt)> {
            let (plus, minus) = match (basis.sector(p), basis.sector(-p)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Ok((p, BigInt::from(0))),
            };
            let pair = plus.wedge(minus)?;
            let value = pair.star_pair(&background)?;
            debug_assert!(is_integer(&value));
            Ok((p, value.numer().clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = BTreeMap::new();
    for (p, v) in halves {
        values.insert(-p, v.clone());
        values.insert(p, v);
    }
    Ok(PairConstantTable {
        charge: ctx.charge(),
        particles: ctx.particles(),
        values,
    })
}

/// Float variant of the pair constants for stretch configurations where the
/// exact path is a long-running optional job.
pub fn pair_constants_circular_f64(
    basis: &SpineBasis,
    budget: &Budget,
) -> Result<BTreeMap<i64, f64>> {
    let ctx = *basis.context();
    if ctx.particles() < 2 {
        return Err(Error::InvalidContext(
            "pair constants need at least two particles".into(),
        ));
    }
    let eps0: SparseForm<f64> = basis
        .sector(0)
        .ok_or_else(|| Error::InvalidContext("no zero sector".into()))?
        .embed();
    let (background, _) = wedge_power(
        &eps0,
        ctx.particles() - 2,
        &ctx,
        WedgeStrategy::Auto,
        Some(MomentumBand::zero()),
        budget,
    )?;

    let p_max = ctx.power();
    let halves: Vec<(i64, f64)> = (0..=p_max)
        .into_par_iter()
        .map(|p| -> Result<(i64, f64)> {
            let (plus, minus) = match (basis.sector(p), basis.sector(-p)) {
                (Some(a), Some(b)) => (a.embed::<f64>(), b.embed::<f64>()),
                _ => return Ok((p, 0.0)),
            };
            let pair = plus.wedge(&minus)?;
            Ok((p, pair.star_pair(&background)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = BTreeMap::new();
    for (p, v) in halves {
        values.insert(-p, v);
        values.insert(p, v);
    }
    Ok(values)
}

/// Shift derivative of the partition function through the wedge route:
/// `star(shifted_gamma ^ gamma^(M-1)) / (M-1)!` with the factor moments
/// advanced by `k`. The formal route [`TauPolynomial::derivative_eval`] must
/// agree exactly; both are exposed so the equality stays testable.
pub fn tau_derivative_wedge<C: Ring>(
    basis: &SpineBasis,
    m: &MomentSequence<C>,
    k: i64,
    budget: &Budget,
) -> Result<C> {
    let ctx = *basis.context();
    let gram = GramForm::from_moments(&ctx, m)?;
    let shifted = GramForm::from_moments(&ctx, &m.derivative_shift(k))?;
    let p = ctx.power();
    let (background, _) = wedge_power(
        &gram.realize(basis)?,
        ctx.particles() - 1,
        &ctx,
        WedgeStrategy::Auto,
        Some(MomentumBand { lo: -p, hi: p }),
        budget,
    )?;
    let star = shifted.realize(basis)?.star_pair(&background)?;
    let fact = Rat::from_integer(factorial(ctx.particles() - 1));
    Ok(star.scale_rat(&(Rat::from_integer(1.into()) / fact)))
}

/// Lift of a polynomial symbol `Q(x) = sum_k q_k x^k` to the partition
/// function: returns the hyperpfaffian of the transformed Gram form whose
/// sector coefficients are `sum_k q_k m_{j+k}`.
pub fn lifted_apply<C: Ring>(
    q: &TimeDeformation,
    basis: &SpineBasis,
    m: &MomentSequence<C>,
    budget: &Budget,
) -> Result<C> {
    let ctx = *basis.context();
    let p = ctx.power();
    let mut coeffs = BTreeMap::new();
    for j in -p..=p {
        let mut acc = C::zero();
        for (k, qk) in q.support() {
            acc.add_assign_ref(&m.lookup(p + j + k)?.scale_rat(qk));
        }
        if !acc.is_zero() {
            coeffs.insert(j, acc);
        }
    }
    let gram = GramForm::from_coeffs(&ctx, coeffs)?;
    hyperpfaffian(&gram, basis, WedgeStrategy::Auto, budget)
}

// ---------------------------------------------------------------------------
// persistence

/// Versioned JSON payload shared by the cached tables.
#[derive(serde::Serialize, serde::Deserialize)]
struct CacheFile {
    schema: u32,
    #[serde(rename = "L")]
    charge: u32,
    #[serde(rename = "M")]
    particles: u32,
    kind: String,
    values: BTreeMap<String, String>,
    digest: String,
}

const CACHE_SCHEMA: u32 = 1;

fn payload_digest(charge: u32, particles: u32, kind: &str, values: &BTreeMap<String, String>) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(format!("{CACHE_SCHEMA}:{charge}:{particles}:{kind}"));
    for (k, v) in values {
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(v.as_bytes());
        hasher.update(b";");
    }
    let bytes = hasher.finalize();
    let mut hex = String::with_capacity(2 * bytes.len() + 7);
    hex.push_str("sha256:");
    for b in bytes {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

impl PairConstantTable {
    pub fn digest(&self) -> String {
        payload_digest(self.charge, self.particles, "pair_constants", &self.values_as_strings())
    }

    fn values_as_strings(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .map(|(p, v)| (p.to_string(), v.to_string()))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let values = self.values_as_strings();
        let digest = payload_digest(self.charge, self.particles, "pair_constants", &values);
        serde_json::to_string_pretty(&CacheFile {
            schema: CACHE_SCHEMA,
            charge: self.charge,
            particles: self.particles,
            kind: "pair_constants".into(),
            values,
            digest,
        })
        .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CacheFile =
            serde_json::from_str(text).map_err(|e| Error::CacheInvalid(e.to_string()))?;
        if file.schema != CACHE_SCHEMA {
            return Err(Error::CacheInvalid(format!("schema {} != {CACHE_SCHEMA}", file.schema)));
        }
        if file.kind != "pair_constants" {
            return Err(Error::CacheInvalid(format!("kind {:?}", file.kind)));
        }
        let expect = payload_digest(file.charge, file.particles, &file.kind, &file.values);
        if expect != file.digest {
            return Err(Error::CacheInvalid("checksum mismatch".into()));
        }
        let mut values = BTreeMap::new();
        for (k, v) in file.values {
            let p: i64 = k.parse().map_err(|_| Error::CacheInvalid(format!("bad key {k:?}")))?;
            let n: BigInt = v.parse().map_err(|_| Error::CacheInvalid(format!("bad value {v:?}")))?;
            values.insert(p, n);
        }
        Ok(PairConstantTable {
            charge: file.charge,
            particles: file.particles,
            values,
        })
    }
}

impl TauPolynomial {
    pub fn digest(&self) -> String {
        payload_digest(self.charge, self.particles, "tau", &self.values_as_strings())
    }

    fn values_as_strings(&self) -> BTreeMap<String, String> {
        self.terms
            .iter()
            .map(|(ms, c)| {
                let key = ms.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",");
                (key, format_rat(c))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let values = self.values_as_strings();
        let digest = payload_digest(self.charge, self.particles, "tau", &values);
        serde_json::to_string_pretty(&CacheFile {
            schema: CACHE_SCHEMA,
            charge: self.charge,
            particles: self.particles,
            kind: "tau".into(),
            values,
            digest,
        })
        .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CacheFile =
            serde_json::from_str(text).map_err(|e| Error::CacheInvalid(e.to_string()))?;
        if file.schema != CACHE_SCHEMA {
            return Err(Error::CacheInvalid(format!("schema {} != {CACHE_SCHEMA}", file.schema)));
        }
        if file.kind != "tau" {
            return Err(Error::CacheInvalid(format!("kind {:?}", file.kind)));
        }
        let expect = payload_digest(file.charge, file.particles, &file.kind, &file.values);
        if expect != file.digest {
            return Err(Error::CacheInvalid("checksum mismatch".into()));
        }
        let mut terms = BTreeMap::new();
        for (k, v) in file.values {
            let multiset: Vec<i64> = k
                .split(',')
                .map(|s| s.parse().map_err(|_| Error::CacheInvalid(format!("bad multiset {k:?}"))))
                .collect::<Result<_>>()?;
            let coeff = parse_rat(&v).ok_or_else(|| Error::CacheInvalid(format!("bad coeff {v:?}")))?;
            terms.insert(multiset, coeff);
        }
        Ok(TauPolynomial {
            charge: file.charge,
            particles: file.particles,
            terms,
        })
    }
}
