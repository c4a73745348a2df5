//! Momentum grading of charge-L blades and the momentum-sector basis.
//!
//! For an ensemble of N particles of even charge L the ambient space has
//! dimension L*N. A degree-L blade `u` carries the momentum
//! `p_u = sum(u) - sigma_bar` with `sigma_bar = L(LN-1)/2`, and the sector
//! vector `eps_j` collects every blade of momentum `j` weighted by its
//! Vandermonde determinant `Delta_u`. The family `{eps_j}`, `|j| <= P` with
//! `P = L^2(N-1)/2`, spans the small subspace every observable lives in:
//! `2P+1` sectors against `C(LN, L)` blades.
//!
//! The monomial curve blade `omega(x)` (the wedge of the monomial vector with
//! its first L-1 derivatives at x) expands over this basis as
//! `omega(x) = sum_j x^(P+j) eps_j`, which is also how it is constructed
//! here; the confluent Vandermonde identity
//! `star(omega(x_1) ^ ... ^ omega(x_N)) = prod_{i<j} (x_j - x_i)^(L^2)`
//! is exposed as a checkable report.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::algebra::{Blade, SparseForm};
use crate::error::{Error, Result};
use crate::scalar::{binomial, Rat, Ring};

/// Parameters of one ensemble space: even charge `L` and particle count `N`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SpineContext {
    charge: u32,
    particles: u32,
}

impl SpineContext {
    pub fn new(charge: u32, particles: u32) -> Result<Self> {
        if charge < 2 || !charge.is_multiple_of(2) {
            return Err(Error::InvalidContext(format!(
                "charge L must be even and >= 2, got {charge}"
            )));
        }
        if particles == 0 {
            return Err(Error::InvalidContext("particle count must be >= 1".into()));
        }
        let dim = charge as u64 * particles as u64;
        if dim > 64 {
            return Err(Error::InvalidContext(format!(
                "dimension L*N = {dim} exceeds the 64-bit blade key"
            )));
        }
        Ok(SpineContext { charge, particles })
    }

    pub fn charge(&self) -> u32 {
        self.charge
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn dim_v(&self) -> u32 {
        self.charge * self.particles
    }

    pub fn beta(&self) -> u32 {
        self.charge * self.charge
    }

    /// Canonical recentering sum `L(LN - 1)/2`.
    pub fn sigma_bar(&self) -> i64 {
        let l = self.charge as i64;
        let n = self.particles as i64;
        l * (l * n - 1) / 2
    }

    /// Maximum single-blade momentum `P = L^2(N - 1)/2`.
    pub fn power(&self) -> i64 {
        let l = self.charge as i64;
        let n = self.particles as i64;
        l * l * (n - 1) / 2
    }

    /// Number of momentum sectors, `2P + 1`.
    pub fn sector_count(&self) -> i64 {
        2 * self.power() + 1
    }

    /// Total number of degree-L blades, `C(LN, L)`.
    pub fn blade_count(&self) -> BigInt {
        binomial(self.dim_v() as i64, self.charge as i64)
    }

    /// Confluence normalization of the monomial-curve blade: the Wronskian
    /// of the bottom blade, `prod_{k<L} k!`. Dividing the curve blade by it
    /// makes `star(omega(x_1) ^ ... ^ omega(x_N))` land exactly on
    /// `prod (x_j - x_i)^beta` with no factorial residue (for L = 2 the
    /// factor is 1, which is why it is easy to miss).
    pub fn blade_norm(&self) -> BigInt {
        let mut out = BigInt::one();
        let mut fact = BigInt::one();
        for k in 1..self.charge as i64 {
            fact *= k;
            out *= &fact;
        }
        out
    }
}

/// Momentum of a degree-L blade: recentered index sum.
pub fn momentum(u: Blade, ctx: &SpineContext) -> Result<i64> {
    if u.degree() != ctx.charge() {
        return Err(Error::WrongDegree {
            expected: ctx.charge(),
            got: u.degree(),
        });
    }
    Ok(u.index_sum() - ctx.sigma_bar())
}

/// Momentum of a wedge of `k` degree-L blades (degree `kL`); additive in the
/// factors, so it extends the grading to every intermediate wedge power.
pub fn partial_momentum(b: Blade, ctx: &SpineContext) -> i64 {
    let factors = (b.degree() / ctx.charge()) as i64;
    b.index_sum() - factors * ctx.sigma_bar()
}

/// Vandermonde determinant of the index tuple, `prod_{i<j} (u_j - u_i)`.
/// Strictly positive since indices are strictly increasing.
pub fn vandermonde_weight(u: Blade) -> BigInt {
    let idx = u.indices();
    let mut out = BigInt::one();
    for j in 1..idx.len() {
        for i in 0..j {
            out *= BigInt::from(idx[j] as i64 - idx[i] as i64);
        }
    }
    out
}

/// The momentum-sector basis `{eps_j}` of one context.
#[derive(Clone, Debug)]
pub struct SpineBasis {
    ctx: SpineContext,
    sectors: BTreeMap<i64, SparseForm<Rat>>,
}

impl SpineBasis {
    pub fn context(&self) -> &SpineContext {
        &self.ctx
    }

    pub fn sector(&self, j: i64) -> Option<&SparseForm<Rat>> {
        self.sectors.get(&j)
    }

    pub fn momenta(&self) -> impl Iterator<Item = i64> + '_ {
        self.sectors.keys().copied()
    }

    pub fn sectors(&self) -> impl Iterator<Item = (&i64, &SparseForm<Rat>)> {
        self.sectors.iter()
    }

    pub fn sector_sizes(&self) -> BTreeMap<i64, usize> {
        self.sectors
            .iter()
            .map(|(j, f)| (*j, f.num_terms()))
            .collect()
    }
}

/// Enumerate all degree-L blades, group them by momentum and attach the
/// Vandermonde weights. Cost is `C(LN, L)` blades; a budget guard rejects
/// contexts whose enumeration would not fit.
pub fn build_spine(ctx: &SpineContext, budget: &crate::tau::Budget) -> Result<SpineBasis> {
    let total = ctx.blade_count();
    if total > BigInt::from(budget.max_terms as u64) {
        return Err(Error::BudgetExceeded {
            what: "spine enumeration",
            charge: ctx.charge(),
            particles: ctx.particles(),
            needed: u128::try_from(total.clone()).unwrap_or(u128::MAX),
            cap: budget.max_terms as u128,
        });
    }

    let dim = ctx.dim_v();
    let l = ctx.charge();
    let mut grouped: BTreeMap<i64, Vec<(Blade, Rat)>> = BTreeMap::new();
    // Gosper's hack walks the degree-L subsets in increasing key order.
    let limit = crate::algebra::full_mask(dim);
    let mut bits: u64 = (1u64 << l) - 1;
    loop {
        let blade = Blade::from_key(bits);
        let p = momentum(blade, ctx)?;
        let w = Rat::from_integer(vandermonde_weight(blade));
        grouped.entry(p).or_default().push((blade, w));
        // next subset of the same popcount
        let c = bits & bits.wrapping_neg();
        let r = bits + c;
        if r > limit || c == 0 {
            break;
        }
        bits = (((r ^ bits) >> 2) / c) | r;
        if bits > limit {
            break;
        }
    }

    let mut sectors = BTreeMap::new();
    for (j, terms) in grouped {
        sectors.insert(j, SparseForm::from_terms(dim, l, terms)?);
    }
    Ok(SpineBasis { ctx: *ctx, sectors })
}

/// The monomial curve blade at `x`, built through the sector expansion:
/// `omega(x) = sum_j x^(P+j) eps_j / blade_norm`. Exact for exact `x`; the
/// coefficient on `e_u` is the normalized Wronskian of the monomials
/// `x^{u_1}, ..., x^{u_L}`, namely `Delta_u x^(sum(u) - L(L-1)/2)` divided by
/// `prod_{k<L} k!`.
pub fn wronskian_blade<C: Ring>(x: &C, basis: &SpineBasis) -> SparseForm<C> {
    let ctx = basis.context();
    let p = ctx.power();
    let norm = Rat::new(BigInt::one(), ctx.blade_norm());
    let mut acc = SparseForm::<C>::zero(ctx.dim_v(), ctx.charge());
    let mut power = C::one(); // x^(P+j) starting at j = -P
    for j in -p..=p {
        if let Some(eps) = basis.sector(j) {
            let lifted: SparseForm<C> =
                eps.lift(|c| C::from_rat(&(c * &norm)).mul_ref(&power));
            acc = acc.add(&lifted).expect("compatible by construction");
        }
        power = power.mul_ref(x);
    }
    acc
}

/// Report of one confluent Vandermonde identity check.
#[derive(Clone, Debug)]
pub struct VandermondeReport {
    pub lhs: Rat,
    pub rhs: Rat,
    pub ok: bool,
}

/// Exact check of `star(omega(x_1) ^ ... ^ omega(x_N)) = prod (x_j - x_i)^beta`
/// at the given points. Repeated points are allowed; both sides then vanish.
pub fn vandermonde_check(points: &[Rat], ctx: &SpineContext) -> Result<VandermondeReport> {
    if points.len() != ctx.particles() as usize {
        return Err(Error::InvalidContext(format!(
            "expected {} points, got {}",
            ctx.particles(),
            points.len()
        )));
    }
    let basis = build_spine(ctx, &crate::tau::Budget::default())?;
    let mut acc = SparseForm::<Rat>::unit(ctx.dim_v());
    for x in points {
        acc = acc.wedge(&wronskian_blade(x, &basis))?;
    }
    let lhs = acc.hodge_star()?;

    let mut rhs = <Rat as Ring>::one();
    for j in 1..points.len() {
        for i in 0..j {
            let diff = &points[j] - &points[i];
            let mut pw = <Rat as Ring>::one();
            for _ in 0..ctx.beta() {
                pw *= &diff;
            }
            rhs *= pw;
        }
    }
    let ok = lhs == rhs;
    Ok(VandermondeReport { lhs, rhs, ok })
}

/// JSON-friendly summary of a spine: sector sizes against the full blade
/// count, the raw material for the dimensional-reduction report.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SpineSummary {
    pub charge: u32,
    pub particles: u32,
    pub dim_v: u32,
    pub beta: u32,
    pub blade_count: String,
    pub sector_count: i64,
    pub momentum_range: (i64, i64),
    pub sector_sizes: BTreeMap<i64, usize>,
}

pub fn spine_summary(basis: &SpineBasis) -> SpineSummary {
    let ctx = basis.context();
    SpineSummary {
        charge: ctx.charge(),
        particles: ctx.particles(),
        dim_v: ctx.dim_v(),
        beta: ctx.beta(),
        blade_count: ctx.blade_count().to_string(),
        sector_count: ctx.sector_count(),
        momentum_range: (-ctx.power(), ctx.power()),
        sector_sizes: basis.sector_sizes(),
    }
}
