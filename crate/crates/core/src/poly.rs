//! Small formal-polynomial rings: polynomials in abstract moment symbols and
//! Laurent polynomials in one variable.
//!
//! Both implement [`Ring`] so sparse forms can carry them as coefficients;
//! that is how formal wedge powers and formal-variable insertions are
//! computed without any symbolic integration.

use std::collections::BTreeMap;

use crate::scalar::{format_rat, Rat, Ring};

/// Sparse polynomial in the formal moment symbols `m<n>`, `n` an absolute
/// power. A monomial is the sorted multiset of its symbol indices.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct MomentPoly {
    terms: BTreeMap<Vec<i64>, Rat>,
}

impl MomentPoly {
    pub fn constant(r: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !Ring::is_zero(&r) {
            terms.insert(Vec::new(), r);
        }
        MomentPoly { terms }
    }

    /// The symbol `m<n>`.
    pub fn symbol(n: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![n], Ring::one());
        MomentPoly { terms }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, monomial: &[i64]) -> Rat {
        self.terms.get(monomial).cloned().unwrap_or_else(Ring::zero)
    }

    /// Substitute concrete values for the symbols.
    pub fn evaluate<C: Ring>(&self, mut value: impl FnMut(i64) -> crate::error::Result<C>) -> crate::error::Result<C> {
        let mut acc = C::zero();
        for (mono, coeff) in &self.terms {
            let mut term = C::from_rat(coeff);
            for &n in mono {
                term = term.mul_ref(&value(n)?);
            }
            acc.add_assign_ref(&term);
        }
        Ok(acc)
    }

    /// Shift every symbol index by `k` (the derivative action on moments).
    pub fn shift_symbols(&self, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        for (mono, coeff) in &self.terms {
            let mut shifted: Vec<i64> = mono.iter().map(|n| n + k).collect();
            shifted.sort_unstable();
            insert_add(&mut terms, shifted, coeff.clone());
        }
        MomentPoly { terms }
    }
}

fn insert_add(map: &mut BTreeMap<Vec<i64>, Rat>, key: Vec<i64>, value: Rat) {
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Occupied(mut e) => {
            let v = e.get_mut();
            *v += value;
            if Ring::is_zero(v) {
                e.remove();
            }
        }
        Entry::Vacant(e) => {
            if !Ring::is_zero(&value) {
                e.insert(value);
            }
        }
    }
}

impl std::fmt::Display for MomentPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (mono, coeff)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", format_rat(coeff))?;
            for n in mono {
                write!(f, "*m<{n}>")?;
            }
        }
        Ok(())
    }
}

impl Ring for MomentPoly {
    const EXACT: bool = true;

    fn zero() -> Self {
        MomentPoly::default()
    }

    fn one() -> Self {
        MomentPoly::constant(Ring::one())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_assign_ref(&mut self, rhs: &Self) {
        for (mono, coeff) in &rhs.terms {
            insert_add(&mut self.terms, mono.clone(), coeff.clone());
        }
    }

    fn sub_assign_ref(&mut self, rhs: &Self) {
        for (mono, coeff) in &rhs.terms {
            insert_add(&mut self.terms, mono.clone(), -coeff.clone());
        }
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut mono = Vec::with_capacity(ma.len() + mb.len());
                mono.extend_from_slice(ma);
                mono.extend_from_slice(mb);
                mono.sort_unstable();
                insert_add(&mut terms, mono, ca * cb);
            }
        }
        MomentPoly { terms }
    }

    fn neg(mut self) -> Self {
        for v in self.terms.values_mut() {
            *v = -v.clone();
        }
        self
    }

    fn from_rat(r: &Rat) -> Self {
        MomentPoly::constant(r.clone())
    }
}

/// Laurent polynomial in one formal variable with coefficients in `C`.
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentPoly<C: Ring> {
    terms: BTreeMap<i64, C>,
}

impl<C: Ring> Default for LaurentPoly<C> {
    fn default() -> Self {
        LaurentPoly {
            terms: BTreeMap::new(),
        }
    }
}

impl<C: Ring> LaurentPoly<C> {
    pub fn new() -> Self {
        Self::default()
    }

    /// `c * z^k`.
    pub fn monomial(k: i64, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        LaurentPoly { terms }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(0, c)
    }

    pub fn coefficient(&self, k: i64) -> C {
        self.terms.get(&k).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, k: i64, c: &C) {
        use std::collections::btree_map::Entry;
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            Entry::Occupied(mut e) => {
                e.get_mut().add_assign_ref(c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &C)> {
        self.terms.iter()
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = self.terms.keys().next()?;
        let hi = self.terms.keys().next_back()?;
        Some((*lo, *hi))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Substitute a concrete ring value for the variable. Negative exponents
    /// require `inv` to be the inverse of the substituted value.
    pub fn evaluate_with(&self, value: &C, inv: &C) -> C {
        let mut acc = C::zero();
        for (&e, c) in &self.terms {
            let (base, n) = if e >= 0 { (value, e) } else { (inv, -e) };
            let mut p = C::one();
            for _ in 0..n {
                p = p.mul_ref(base);
            }
            acc.add_assign_ref(&c.mul_ref(&p));
        }
        acc
    }
}

impl<C: Ring> Ring for LaurentPoly<C> {
    const EXACT: bool = C::EXACT;

    fn zero() -> Self {
        Self::default()
    }

    fn one() -> Self {
        Self::constant(C::one())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_assign_ref(&mut self, rhs: &Self) {
        for (&k, c) in &rhs.terms {
            self.add_term(k, c);
        }
    }

    fn sub_assign_ref(&mut self, rhs: &Self) {
        for (&k, c) in &rhs.terms {
            self.add_term(k, &c.clone().neg());
        }
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        let mut out = Self::default();
        for (&ka, ca) in &self.terms {
            for (&kb, cb) in &rhs.terms {
                out.add_term(ka + kb, &ca.mul_ref(cb));
            }
        }
        out
    }

    fn neg(mut self) -> Self {
        let terms = std::mem::take(&mut self.terms);
        self.terms = terms.into_iter().map(|(k, c)| (k, c.neg())).collect();
        self
    }

    fn from_rat(r: &Rat) -> Self {
        Self::constant(C::from_rat(r))
    }
}

impl<C: Ring> std::fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})*z^{e}")?;
        }
        Ok(())
    }
}
