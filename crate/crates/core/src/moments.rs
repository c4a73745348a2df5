//! Moment sequences and the three time actions on them: derivative shifts,
//! particle-inserting Miwa shifts (finite binomial recombination) and
//! hole-inserting Miwa shifts (truncated series).
//!
//! Providers expose moments by ABSOLUTE power `n`; a context of particle
//! count `N` reads its sector coefficient `m_j` at `n = P_N + j`. Keeping the
//! indexing absolute makes the `N-1`, `N`, `N+1` partition functions of one
//! underlying measure automatically consistent, which is what the bilinear
//! identities couple.
//!
//! On the unit circle the interaction phase can be absorbed into the measure
//! (for even charge `prod |x_i-x_j|^beta = prod (x_j-x_i)^beta * prod x_i^-P`
//! when `x` is on the circle), after which every recentered moment vanishes
//! except `m_0 = 1`. The circular provider implements that convention, which
//! is why it is a delta sequence for every particle count.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::poly::{LaurentPoly, MomentPoly};
use crate::scalar::{binomial, parse_rat, random_nonzero_rat, Rat, Ring};
use crate::spine::SpineContext;

/// What backs a moment sequence; formal and rational tables are exact.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum MomentKind {
    Formal,
    RationalTable,
    Circular,
    GaussianFloat,
}

impl MomentKind {
    pub fn is_exact(self) -> bool {
        !matches!(self, MomentKind::GaussianFloat)
    }
}

#[derive(Clone, Debug)]
enum MomentData<C: Ring> {
    Table { values: BTreeMap<i64, C>, lo: i64, hi: i64 },
    /// One at `center`, zero everywhere; valid for every power.
    Delta { center: i64 },
}

/// A functional `absolute power -> scalar`, with an explicit valid range.
/// Lookups outside the range are errors, never silent zeros.
#[derive(Clone, Debug)]
pub struct MomentSequence<C: Ring> {
    kind: MomentKind,
    data: MomentData<C>,
    /// Accumulated derivative shift: `lookup(n)` reads the backing data at
    /// `n + offset`, so shifts compose additively by construction.
    offset: i64,
}

const UNBOUNDED: i64 = i64::MAX / 4;

impl<C: Ring> MomentSequence<C> {
    pub fn kind(&self) -> MomentKind {
        self.kind
    }

    pub fn is_exact(&self) -> bool {
        self.kind.is_exact() && C::EXACT
    }

    /// Inclusive range of absolute powers this sequence can serve.
    pub fn valid_range(&self) -> (i64, i64) {
        match &self.data {
            MomentData::Table { lo, hi, .. } => (lo - self.offset, hi - self.offset),
            MomentData::Delta { .. } => (-UNBOUNDED, UNBOUNDED),
        }
    }

    pub fn lookup(&self, n: i64) -> Result<C> {
        let shifted = n + self.offset;
        match &self.data {
            MomentData::Table { values, lo, hi } => {
                if shifted < *lo || shifted > *hi {
                    return Err(Error::MomentRange {
                        n,
                        lo: lo - self.offset,
                        hi: hi - self.offset,
                    });
                }
                Ok(values.get(&shifted).cloned().unwrap_or_else(C::zero))
            }
            MomentData::Delta { center } => Ok(if shifted == *center {
                C::one()
            } else {
                C::zero()
            }),
        }
    }

    /// The shift action of the time derivative: `(d_k m)_j = m_{j+k}`.
    /// Composition `d_k . d_l = d_{k+l}` holds by construction.
    pub fn derivative_shift(&self, k: i64) -> Self {
        MomentSequence {
            kind: self.kind,
            data: self.data.clone(),
            offset: self.offset + k,
        }
    }
}

/// Table provider over an arbitrary coefficient ring; the building block the
/// concrete providers and a few formal-coefficient tests share.
pub fn provider_table_generic<C: Ring>(
    values: BTreeMap<i64, C>,
    kind: MomentKind,
) -> MomentSequence<C> {
    let lo = values.keys().next().copied().unwrap_or(0);
    let hi = values.keys().next_back().copied().unwrap_or(0);
    MomentSequence {
        kind,
        data: MomentData::Table { values, lo, hi },
        offset: 0,
    }
}

/// Exact rational moments from an explicit table of absolute powers.
pub fn provider_table(values: BTreeMap<i64, Rat>) -> Result<MomentSequence<Rat>> {
    let lo = *values
        .keys()
        .next()
        .ok_or_else(|| Error::Parse("empty moment table".into()))?;
    let hi = *values.keys().next_back().unwrap();
    Ok(MomentSequence {
        kind: MomentKind::RationalTable,
        data: MomentData::Table { values, lo, hi },
        offset: 0,
    })
}

/// Formal moments: `lookup(n)` is the symbol `m<n>`.
pub fn provider_formal(lo: i64, hi: i64) -> MomentSequence<MomentPoly> {
    let values: BTreeMap<i64, MomentPoly> = (lo..=hi).map(|n| (n, MomentPoly::symbol(n))).collect();
    MomentSequence {
        kind: MomentKind::Formal,
        data: MomentData::Table { values, lo, hi },
        offset: 0,
    }
}

/// Circular-ensemble moments in the recentered convention: a pure delta at
/// the context's canonical power, for any particle count.
pub fn provider_circular(ctx: &SpineContext) -> MomentSequence<Rat> {
    MomentSequence {
        kind: MomentKind::Circular,
        data: MomentData::Delta { center: ctx.power() },
        offset: 0,
    }
}

/// Float moments of the Gaussian weight `exp(-x^2)` on the real line.
/// Odd powers vanish; even ones follow `m_n = (n-1)/2 * m_{n-2}` from
/// `m_0 = sqrt(pi)`. Inexact by construction.
pub fn provider_gaussian(lo: i64, hi: i64) -> Result<MomentSequence<f64>> {
    if lo < 0 {
        return Err(Error::Parse("gaussian moments need n >= 0".into()));
    }
    let mut values = BTreeMap::new();
    let mut even = std::f64::consts::PI.sqrt();
    let mut n = 0i64;
    while n <= hi {
        if n >= lo {
            values.insert(n, even);
            if (lo..=hi).contains(&(n + 1)) {
                values.insert(n + 1, 0.0);
            }
        } else if (lo..=hi).contains(&(n + 1)) {
            values.insert(n + 1, 0.0);
        }
        even *= (n + 1) as f64 / 2.0;
        n += 2;
    }
    Ok(MomentSequence {
        kind: MomentKind::GaussianFloat,
        data: MomentData::Table { values, lo, hi },
        offset: 0,
    })
}

/// Seeded random nonzero rational table over `[lo, hi]`; the generic-position
/// backgrounds used by the identity checks.
pub fn provider_random(lo: i64, hi: i64, seed: u64) -> MomentSequence<Rat> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values: BTreeMap<i64, Rat> = (lo..=hi).map(|n| (n, random_nonzero_rat(&mut rng))).collect();
    provider_table(values).expect("nonempty by construction")
}

/// Geometric moments `m_n = y^n`, the moment sequence of a unit point mass.
/// Rank-one backgrounds like this are the decomposable locus of the hole
/// form, so they are the right fixture for decomposability checks.
pub fn provider_point_mass(y: &Rat, lo: i64, hi: i64) -> Result<MomentSequence<Rat>> {
    if lo < 0 {
        return Err(Error::Parse("point-mass table needs n >= 0".into()));
    }
    let mut values = BTreeMap::new();
    let mut pw = Rat::from_integer(1.into());
    for n in 0..=hi {
        if n >= lo {
            values.insert(n, pw.clone());
        }
        pw *= y;
    }
    provider_table(values)
}

/// Load a rational moment table from the JSON schema
/// `{"center_convention":"absolute","values":{"0":"1/2", ...}}`.
pub fn load_table_json(text: &str) -> Result<MomentSequence<Rat>> {
    #[derive(serde::Deserialize)]
    struct TableFile {
        center_convention: String,
        values: BTreeMap<String, String>,
    }
    let file: TableFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("moment table JSON: {e}")))?;
    if file.center_convention != "absolute" {
        return Err(Error::Parse(format!(
            "unsupported center_convention {:?}",
            file.center_convention
        )));
    }
    let mut values = BTreeMap::new();
    for (k, v) in file.values {
        let n: i64 = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad moment index {k:?}")))?;
        let r = parse_rat(&v).ok_or_else(|| Error::Parse(format!("bad rational {v:?}")))?;
        values.insert(n, r);
    }
    provider_table(values)
}

/// Direction of a Miwa shift on the moment sequence.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MiwaDirection {
    /// Particle insertion, weight `-beta [z^-1]`: an exact degree-beta
    /// binomial recombination of neighbouring moments.
    Insert,
    /// Hole insertion, weight `+beta [z^-1]`: an infinite series truncated
    /// at `truncation_order`.
    Remove,
}

/// Descriptor of one Miwa shift; `weight` is the ensemble's `beta = L^2`.
#[derive(Clone, Copy, Debug)]
pub struct MiwaShift {
    pub direction: MiwaDirection,
    pub weight: u32,
    pub truncation_order: i64,
}

impl MiwaShift {
    pub fn insert(ctx: &SpineContext) -> Self {
        MiwaShift {
            direction: MiwaDirection::Insert,
            weight: ctx.beta(),
            truncation_order: ctx.beta() as i64,
        }
    }

    /// Default truncation order is `2P` of the ambient context.
    pub fn remove(ctx: &SpineContext, order: Option<i64>) -> Self {
        MiwaShift {
            direction: MiwaDirection::Remove,
            weight: ctx.beta(),
            truncation_order: order.unwrap_or(2 * ctx.power()),
        }
    }

    /// Coefficient of `z^-k` in the shift's series action on one moment:
    /// `C(beta,k)(-1)^k` for insertion, `C(beta+k-1,k)` for removal.
    pub fn series_coefficient(&self, k: i64) -> Rat {
        let beta = self.weight as i64;
        match self.direction {
            MiwaDirection::Insert => {
                let mut c = Rat::from_integer(binomial(beta, k));
                if k % 2 != 0 {
                    c = -c;
                }
                c
            }
            MiwaDirection::Remove => Rat::from_integer(binomial(beta + k - 1, k)),
        }
    }
}

/// Shifted moment as a Laurent polynomial in the formal insertion point:
/// `m_j(t - beta [z^-1]) = sum_{k=0}^{beta} C(beta,k)(-1)^k z^-k m_{j+k}`.
/// `j` is relative to the context's canonical power.
pub fn miwa_insert_moment<C: Ring>(
    m: &MomentSequence<C>,
    ctx: &SpineContext,
    j: i64,
) -> Result<LaurentPoly<C>> {
    let shift = MiwaShift::insert(ctx);
    shifted_moment(m, ctx, j, &shift)
}

/// The full band `j -> m_j(t - beta [z^-1])`.
pub fn miwa_insert<C: Ring>(
    m: &MomentSequence<C>,
    ctx: &SpineContext,
) -> Result<BTreeMap<i64, LaurentPoly<C>>> {
    let p = ctx.power();
    (-p..=p)
        .map(|j| Ok((j, miwa_insert_moment(m, ctx, j)?)))
        .collect()
}

/// Shifted moment under the hole insertion, truncated at `order`:
/// `m_j(t + beta [z^-1]) = sum_{k=0}^{order} C(beta+k-1,k) z^-k m_{j+k}`.
pub fn miwa_remove_moment<C: Ring>(
    m: &MomentSequence<C>,
    ctx: &SpineContext,
    j: i64,
    order: Option<i64>,
) -> Result<LaurentPoly<C>> {
    let shift = MiwaShift::remove(ctx, order);
    shifted_moment(m, ctx, j, &shift)
}

/// The full band `j -> m_j(t + beta [z^-1])`.
pub fn miwa_remove<C: Ring>(
    m: &MomentSequence<C>,
    ctx: &SpineContext,
    order: Option<i64>,
) -> Result<BTreeMap<i64, LaurentPoly<C>>> {
    let p = ctx.power();
    (-p..=p)
        .map(|j| Ok((j, miwa_remove_moment(m, ctx, j, order)?)))
        .collect()
}

fn shifted_moment<C: Ring>(
    m: &MomentSequence<C>,
    ctx: &SpineContext,
    j: i64,
    shift: &MiwaShift,
) -> Result<LaurentPoly<C>> {
    let mut out = LaurentPoly::new();
    for k in 0..=shift.truncation_order {
        let c = shift.series_coefficient(k);
        if Ring::is_zero(&c) {
            continue;
        }
        let value = m.lookup(ctx.power() + j + k)?.scale_rat(&c);
        out.add_term(-k, &value);
    }
    Ok(out)
}

/// Materialize the insertion shift at a concrete nonzero rational point `y`:
/// the moment table of the reweighted measure `(1 - x/y)^beta dmu`.
pub fn miwa_insert_at(
    m: &MomentSequence<Rat>,
    beta: u32,
    y: &Rat,
) -> Result<MomentSequence<Rat>> {
    if Ring::is_zero(y) {
        return Err(Error::Parse("miwa insertion point must be nonzero".into()));
    }
    let y_inv = Rat::from_integer(1.into()) / y.clone();
    let (lo, hi) = m.valid_range();
    let new_hi = hi - beta as i64;
    if new_hi < lo {
        return Err(Error::MomentRange { n: hi, lo, hi });
    }
    let mut values = BTreeMap::new();
    for n in lo..=new_hi {
        let mut acc = Rat::from_integer(0.into());
        let mut y_pow = Rat::from_integer(1.into());
        for k in 0..=beta as i64 {
            let mut c = Rat::from_integer(binomial(beta as i64, k));
            if k % 2 != 0 {
                c = -c;
            }
            acc += c * &y_pow * m.lookup(n + k)?;
            y_pow *= &y_inv;
        }
        values.insert(n, acc);
    }
    provider_table(values)
}

/// Finite family of deformation-time coefficients `k -> t_k`; also the shape
/// of the polynomial symbols `Q(x) = sum_k q_k x^k` that lift to operators on
/// the partition function. Exponential reweighting is never integrated
/// symbolically; this is bookkeeping for the finitely many coefficients the
/// shift and lifting operations consume.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeDeformation {
    support: BTreeMap<i64, Rat>,
}

impl TimeDeformation {
    pub fn new(pairs: impl IntoIterator<Item = (i64, Rat)>) -> Self {
        let mut support = BTreeMap::new();
        for (k, v) in pairs {
            if !Ring::is_zero(&v) {
                support.insert(k, v);
            }
        }
        TimeDeformation { support }
    }

    /// `Q(x) = (x - y)^n` expanded into monomial coefficients.
    pub fn binomial_power(y: &Rat, n: u32) -> Self {
        let mut pairs = Vec::new();
        for k in 0..=n as i64 {
            // coefficient of x^k in (x - y)^n
            let mut c = Rat::from_integer(binomial(n as i64, k));
            let mut y_pow = Rat::from_integer(1.into());
            for _ in 0..(n as i64 - k) {
                y_pow *= y;
            }
            c *= y_pow;
            if (n as i64 - k) % 2 != 0 {
                c = -c;
            }
            pairs.push((k, c));
        }
        TimeDeformation::new(pairs)
    }

    pub fn coefficient(&self, k: i64) -> Rat {
        self.support.get(&k).cloned().unwrap_or_else(Ring::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (&i64, &Rat)> {
        self.support.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Convenience for reports: render a float approximation of a rational table.
pub fn approx_f64(m: &MomentSequence<Rat>, n: i64) -> Option<f64> {
    m.lookup(n).ok().and_then(|r| r.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    fn ctx22() -> SpineContext {
        SpineContext::new(2, 2).unwrap()
    }

    #[test]
    fn derivative_shift_is_a_translation() {
        let ctx = ctx22();
        let circ = provider_circular(&ctx); // delta at P = 2
        let shifted = circ.derivative_shift(1);
        // (d_1 m)_j = m_{j+1}: the delta moves to j = -1
        assert_eq!(shifted.lookup(ctx.power() - 1).unwrap(), rat(1));
        assert_eq!(shifted.lookup(ctx.power()).unwrap(), rat(0));

        let formal = provider_formal(0, 12);
        let twice = formal.derivative_shift(2).derivative_shift(3);
        let once = formal.derivative_shift(5);
        assert_eq!(twice.lookup(4).unwrap(), once.lookup(4).unwrap());

        let squares = provider_table((0..=10).map(|n| (n, rat(n * n))).collect()).unwrap();
        let sh = squares.derivative_shift(1);
        assert_eq!(sh.lookup(3).unwrap(), rat(16));
    }

    #[test]
    fn lookups_outside_range_error() {
        let t = provider_table([(0, rat(1)), (4, rat(2))].into_iter().collect()).unwrap();
        assert_eq!(t.valid_range(), (0, 4));
        assert!(matches!(t.lookup(5), Err(Error::MomentRange { .. })));
        assert!(t.lookup(2).is_ok());
        // shifting shrinks the reachable window accordingly
        let sh = t.derivative_shift(2);
        assert_eq!(sh.valid_range(), (-2, 2));
        assert!(sh.lookup(3).is_err());
    }

    #[test]
    fn circular_purity() {
        let ctx = ctx22();
        let m = provider_circular(&ctx);
        let p = ctx.power();
        let nonzero: Vec<i64> = (-6..=6)
            .filter(|j| m.lookup(p + j).unwrap() != rat(0))
            .collect();
        assert_eq!(nonzero, vec![0]);
        assert_eq!(m.lookup(p).unwrap(), rat(1));
        assert!(m.is_exact());
    }

    #[test]
    fn formal_symbols() {
        let m = provider_formal(0, 8);
        assert_eq!(m.lookup(5).unwrap(), MomentPoly::symbol(5));
        assert!(m.is_exact());
    }

    #[test]
    fn gaussian_parity_and_ratio() {
        let m = provider_gaussian(0, 8).unwrap();
        assert_eq!(m.lookup(3).unwrap(), 0.0);
        assert_eq!(m.lookup(7).unwrap(), 0.0);
        let ratio20 = m.lookup(2).unwrap() / m.lookup(0).unwrap();
        assert!((ratio20 - 0.5).abs() < 1e-15);
        let ratio42 = m.lookup(4).unwrap() / m.lookup(2).unwrap();
        assert!((ratio42 - 1.5).abs() < 1e-15);
        assert!(!m.is_exact());
    }

    #[test]
    fn miwa_insert_binomial_pattern() {
        let ctx = ctx22(); // beta = 4
        let formal = provider_formal(0, 12);
        let poly = miwa_insert_moment(&formal, &ctx, 0).unwrap();
        // m_0 - 4 z^-1 m_1 + 6 z^-2 m_2 - 4 z^-3 m_3 + z^-4 m_4 (relative),
        // absolute indices shifted by P = 2
        let expect = [(0i64, 1i64), (-1, -4), (-2, 6), (-3, -4), (-4, 1)];
        for (k, c) in expect {
            let coeff = poly.coefficient(k);
            let want = MomentPoly::symbol(ctx.power() - k).scale_rat(&rat(c));
            assert_eq!(coeff, want, "k={k}");
        }
    }

    #[test]
    fn miwa_insert_on_circular_collapses() {
        let ctx = ctx22();
        let circ = provider_circular(&ctx);
        let at0 = miwa_insert_moment(&circ, &ctx, 0).unwrap();
        // only k = 0 survives: the constant term m_0 = 1
        assert_eq!(at0.coefficient(0), rat(1));
        assert_eq!(at0.num_terms(), 1);
        // j = -1 picks the single matching term k = 1 with coefficient -4
        let at_neg1 = miwa_insert_moment(&circ, &ctx, -1).unwrap();
        assert_eq!(at_neg1.coefficient(-1), rat(-4));
        assert_eq!(at_neg1.num_terms(), 1);
    }

    #[test]
    fn miwa_remove_series_pattern() {
        let ctx = ctx22();
        let formal = provider_formal(0, 12);
        let poly = miwa_remove_moment(&formal, &ctx, 0, Some(3)).unwrap();
        for (k, c) in [(0i64, 1i64), (-1, 4), (-2, 10), (-3, 20)] {
            let want = MomentPoly::symbol(ctx.power() - k).scale_rat(&rat(c));
            assert_eq!(poly.coefficient(k), want, "k={k}");
        }
        // order 0 is the identity on moments
        let id = miwa_remove_moment(&formal, &ctx, 1, Some(0)).unwrap();
        assert_eq!(id.coefficient(0), MomentPoly::symbol(3));
        assert_eq!(id.num_terms(), 1);
        // circular, j = 0, order 2: the delta kills every shifted term
        let circ = provider_circular(&ctx);
        let c0 = miwa_remove_moment(&circ, &ctx, 0, Some(2)).unwrap();
        assert_eq!(c0.coefficient(0), rat(1));
        assert_eq!(c0.num_terms(), 1);
    }

    #[test]
    fn miwa_insert_then_remove_telescopes() {
        // composing the formal insertion series with the formal removal
        // series telescopes order by order: every retained z^-s coefficient
        // with s >= 1 cancels exactly, because the series product
        // (1 - u)^beta (1 - u)^-beta is 1 through any finite order
        let ctx = ctx22();
        let formal = provider_formal(0, 40);
        let order = 9i64;
        let remove = MiwaShift::remove(&ctx, Some(order));
        for j in -2i64..=2 {
            let mut composed: LaurentPoly<MomentPoly> = LaurentPoly::new();
            for k in 0..=order {
                let c = remove.series_coefficient(k);
                let inner = miwa_insert_moment(&formal, &ctx, j + k).unwrap();
                let scaled: LaurentPoly<MomentPoly> = {
                    let mut acc = LaurentPoly::new();
                    for (e, v) in inner.terms() {
                        acc.add_term(e - k, &v.scale_rat(&c));
                    }
                    acc
                };
                composed.add_assign_ref(&scaled);
            }
            // all complete orders 1..=order vanish; order 0 is the moment
            assert_eq!(
                composed.coefficient(0),
                MomentPoly::symbol(ctx.power() + j),
                "j={j}"
            );
            for s in 1..=order {
                assert!(
                    Ring::is_zero(&composed.coefficient(-s)),
                    "j={j} s={s}: {:?}",
                    composed.coefficient(-s)
                );
            }
        }
    }

    #[test]
    fn point_mass_is_geometric() {
        let m = provider_point_mass(&ratio(3, 2), 0, 6).unwrap();
        assert_eq!(m.lookup(0).unwrap(), rat(1));
        assert_eq!(m.lookup(2).unwrap(), ratio(9, 4));
    }

    #[test]
    fn table_json_round_trip() {
        let text = r#"{"center_convention":"absolute","values":{"0":"1/2","1":"3","2":"-7/5"}}"#;
        let m = load_table_json(text).unwrap();
        assert_eq!(m.lookup(0).unwrap(), ratio(1, 2));
        assert_eq!(m.lookup(2).unwrap(), ratio(-7, 5));
        assert!(load_table_json(r#"{"center_convention":"relative","values":{}}"#).is_err());
    }

    #[test]
    fn time_deformation_support() {
        let q = TimeDeformation::binomial_power(&rat(2), 2); // (x-2)^2
        assert_eq!(q.coefficient(0), rat(4));
        assert_eq!(q.coefficient(1), rat(-4));
        assert_eq!(q.coefficient(2), rat(1));
        assert_eq!(q.support().count(), 3);
        let zeroes = TimeDeformation::new([(3, rat(0))]);
        assert!(zeroes.is_empty());
    }
}
