//! Generic exact exterior algebra: blades, sparse multivectors, wedge
//! products, the Hodge projection onto the top line, and interior products.
//!
//! A blade is a set of distinct basis indices below `dim_v`, packed into a
//! `u64` bitset so that disjointness of two blades is a single AND. Forms are
//! degree-homogeneous sparse maps blade -> coefficient; terms that cancel are
//! dropped eagerly since sparsity is the whole performance model.
//!
//! Sign conventions: the wedge sign is the parity of inversions of the
//! concatenated index sequences, and interior-product signs are forced from
//! that by the adjointness identity `<e_S ^ A, B> = <A, i_{e_S*} B>` with the
//! coefficientwise pairing. The Hodge projection reads the coefficient of the
//! lexicographic top blade `e_{0..dim_v-1}`. All physics-level identities
//! downstream are vanishing statements or ratios, so they do not depend on
//! these choices, but the adjointness property is literally testable.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Rat, Ring};

/// Set of distinct basis indices in `[0, 64)`, one bit per index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Blade(u64);

/// A blade read in the dual space; same combinatorics, dual semantics.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DualBlade(pub Blade);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    pub fn from_key(key: u64) -> Self {
        Blade(key)
    }

    /// Build from strictly increasing indices. Rejects repeats and indices
    /// at 64 or above.
    pub fn from_indices(indices: &[u8]) -> Result<Self> {
        let mut key = 0u64;
        for &i in indices {
            if i >= 64 {
                return Err(Error::InvalidContext(format!("basis index {i} >= 64")));
            }
            let bit = 1u64 << i;
            if key & bit != 0 {
                return Err(Error::InvalidContext(format!("repeated basis index {i}")));
            }
            key |= bit;
        }
        Ok(Blade(key))
    }

    pub fn key(self) -> u64 {
        self.0
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn indices(self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        let mut bits = self.0;
        while bits != 0 {
            let i = bits.trailing_zeros() as u8;
            out.push(i);
            bits &= bits - 1;
        }
        out
    }

    pub fn contains(self, other: Blade) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_disjoint(self, other: Blade) -> bool {
        self.0 & other.0 == 0
    }

    /// Sum of the member indices.
    pub fn index_sum(self) -> i64 {
        let mut sum = 0i64;
        let mut bits = self.0;
        while bits != 0 {
            sum += bits.trailing_zeros() as i64;
            bits &= bits - 1;
        }
        sum
    }

    /// Complementary blade inside dimension `dim_v`.
    pub fn complement(self, dim_v: u32) -> Blade {
        Blade(full_mask(dim_v) & !self.0)
    }
}

impl std::fmt::Debug for Blade {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e{{")?;
        for (k, i) in self.indices().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Bitmask with the low `dim_v` bits set.
pub fn full_mask(dim_v: u32) -> u64 {
    debug_assert!(dim_v <= 64);
    if dim_v == 64 {
        u64::MAX
    } else {
        (1u64 << dim_v) - 1
    }
}

/// Wedge of two basis blades.
///
/// Returns `None` when the index sets intersect (the product is zero).
/// Otherwise the merged blade together with the sign `(-1)^inversions` of the
/// concatenated index sequence.
pub fn wedge_blades(a: Blade, b: Blade) -> Option<(i8, Blade)> {
    if !a.is_disjoint(b) {
        return None;
    }
    Some((merge_sign(a.0, b.0), Blade(a.0 | b.0)))
}

/// Parity of inversions between the (sorted) index lists of `a` then `b`:
/// the number of pairs `i in a`, `j in b` with `i > j`.
fn merge_sign(a: u64, b: u64) -> i8 {
    let mut inversions = 0u32;
    let mut bits = b;
    while bits != 0 {
        let j = bits.trailing_zeros();
        // indices of `a` strictly above j
        let above = if j >= 63 { 0 } else { a >> (j + 1) };
        inversions += above.count_ones();
        bits &= bits - 1;
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Degree-homogeneous sparse multivector with exact coefficients.
///
/// Terms are kept sorted by blade key with no explicit zeros, so equality is
/// structural and iteration order is deterministic.
#[derive(Clone, PartialEq)]
pub struct SparseForm<C: Ring> {
    dim_v: u32,
    degree: u32,
    terms: Vec<(Blade, C)>,
}

impl<C: Ring> std::fmt::Debug for SparseForm<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SparseForm(deg {}, dim {}; ", self.degree, self.dim_v)?;
        for (k, (b, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}*{b:?}")?;
        }
        write!(f, ")")
    }
}

impl<C: Ring> SparseForm<C> {
    pub fn zero(dim_v: u32, degree: u32) -> Self {
        SparseForm {
            dim_v,
            degree,
            terms: Vec::new(),
        }
    }

    /// Degree-0 form equal to the ring unit.
    pub fn unit(dim_v: u32) -> Self {
        SparseForm {
            dim_v,
            degree: 0,
            terms: vec![(Blade::EMPTY, C::one())],
        }
    }

    /// Single-term form `c * e_B`.
    pub fn from_blade(dim_v: u32, blade: Blade, coeff: C) -> Result<Self> {
        if blade.key() & !full_mask(dim_v) != 0 {
            return Err(Error::InvalidContext(format!(
                "blade {blade:?} outside dimension {dim_v}"
            )));
        }
        let mut terms = Vec::new();
        if !coeff.is_zero() {
            terms.push((blade, coeff));
        }
        Ok(SparseForm {
            dim_v,
            degree: blade.degree(),
            terms,
        })
    }

    /// Build from arbitrary terms of a common degree; merges duplicates and
    /// drops zeros.
    pub fn from_terms(dim_v: u32, degree: u32, terms: Vec<(Blade, C)>) -> Result<Self> {
        let mask = full_mask(dim_v);
        for (b, _) in &terms {
            if b.degree() != degree {
                return Err(Error::WrongDegree {
                    expected: degree,
                    got: b.degree(),
                });
            }
            if b.key() & !mask != 0 {
                return Err(Error::InvalidContext(format!(
                    "blade {b:?} outside dimension {dim_v}"
                )));
            }
        }
        let mut form = SparseForm {
            dim_v,
            degree,
            terms,
        };
        form.normalize();
        Ok(form)
    }

    fn normalize(&mut self) {
        self.terms.sort_by_key(|(b, _)| b.key());
        let mut out: Vec<(Blade, C)> = Vec::with_capacity(self.terms.len());
        for (b, c) in self.terms.drain(..) {
            match out.last_mut() {
                Some((last, acc)) if *last == b => acc.add_assign_ref(&c),
                _ => out.push((b, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        self.terms = out;
    }

    pub fn dim_v(&self) -> u32 {
        self.dim_v
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Blade, &C)> {
        self.terms.iter().map(|(b, c)| (b, c))
    }

    pub fn coefficient(&self, blade: Blade) -> Option<&C> {
        self.terms
            .binary_search_by_key(&blade.key(), |(b, _)| b.key())
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        SparseForm::from_terms(self.dim_v, self.degree, terms)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().map(|(b, c)| (*b, c.clone().neg())));
        SparseForm::from_terms(self.dim_v, self.degree, terms)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return SparseForm::zero(self.dim_v, self.degree);
        }
        SparseForm {
            dim_v: self.dim_v,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(b, x)| (*b, x.mul_ref(c)))
                .collect(),
        }
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        self.scale(&C::from_rat(r))
    }

    fn check_compatible(&self, rhs: &Self) -> Result<()> {
        if self.dim_v != rhs.dim_v {
            return Err(Error::DimensionMismatch {
                left: self.dim_v,
                right: rhs.dim_v,
            });
        }
        if self.degree != rhs.degree {
            return Err(Error::WrongDegree {
                expected: self.degree,
                got: rhs.degree,
            });
        }
        Ok(())
    }

    /// Wedge product, bilinear extension of [`wedge_blades`].
    pub fn wedge(&self, rhs: &Self) -> Result<Self> {
        self.wedge_filtered(rhs, |_| true)
    }

    /// Wedge product keeping only result blades accepted by `keep`.
    ///
    /// The filter sees the merged blade; it is how momentum pruning rejects
    /// dead branches without touching the sign bookkeeping.
    pub fn wedge_filtered<F>(&self, rhs: &Self, keep: F) -> Result<Self>
    where
        F: Fn(Blade) -> bool + Sync,
    {
        if self.dim_v != rhs.dim_v {
            return Err(Error::DimensionMismatch {
                left: self.dim_v,
                right: rhs.dim_v,
            });
        }
        let degree = self.degree + rhs.degree;
        if degree > self.dim_v {
            return Err(Error::DegreeOverflow {
                degree,
                dim_v: self.dim_v,
            });
        }

        let pairs = self.terms.len().saturating_mul(rhs.terms.len());
        let accumulate = |acc: &mut HashMap<u64, C>, chunk: &[(Blade, C)]| {
            for (a, ca) in chunk {
                for (b, cb) in &rhs.terms {
                    if let Some((sign, merged)) = wedge_blades(*a, *b) {
                        if !keep(merged) {
                            continue;
                        }
                        let mut v = ca.mul_ref(cb);
                        if sign < 0 {
                            v = v.neg();
                        }
                        match acc.entry(merged.key()) {
                            std::collections::hash_map::Entry::Occupied(mut e) => {
                                e.get_mut().add_assign_ref(&v);
                            }
                            std::collections::hash_map::Entry::Vacant(e) => {
                                e.insert(v);
                            }
                        }
                    }
                }
            }
        };

        // Exact addition commutes, so splitting the pair loop across threads
        // and merging maps yields bit-identical results in any order.
        let map: HashMap<u64, C> = if pairs >= 1 << 16 && self.terms.len() >= 2 {
            let chunk = (self.terms.len() / (rayon::current_num_threads() * 4)).max(1);
            self.terms
                .par_chunks(chunk)
                .map(|chunk_terms| {
                    let mut acc = HashMap::new();
                    accumulate(&mut acc, chunk_terms);
                    acc
                })
                .reduce(HashMap::new, |mut left, right| {
                    for (k, v) in right {
                        match left.entry(k) {
                            std::collections::hash_map::Entry::Occupied(mut e) => {
                                e.get_mut().add_assign_ref(&v);
                            }
                            std::collections::hash_map::Entry::Vacant(e) => {
                                e.insert(v);
                            }
                        }
                    }
                    left
                })
        } else {
            let mut acc = HashMap::new();
            accumulate(&mut acc, &self.terms);
            acc
        };

        let terms: Vec<(Blade, C)> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (Blade::from_key(k), c))
            .collect();
        let mut form = SparseForm {
            dim_v: self.dim_v,
            degree,
            terms,
        };
        form.terms.sort_by_key(|(b, _)| b.key());
        Ok(form)
    }

    /// Hodge projection of a top-degree form: the coefficient of
    /// `e_{0..dim_v-1}`.
    pub fn hodge_star(&self) -> Result<C> {
        if self.degree != self.dim_v {
            return Err(Error::WrongDegree {
                expected: self.dim_v,
                got: self.degree,
            });
        }
        let top = Blade::from_key(full_mask(self.dim_v));
        Ok(self.coefficient(top).cloned().unwrap_or_else(C::zero))
    }

    /// Interior product by a dual basis blade: linear in `self`, and on
    /// blades `i_{e_S*}(e_T) = sign(S, T\S) e_{T\S}` when `S` is contained
    /// in `T`, zero otherwise. The sign is the adjoint of the wedge sign.
    pub fn contract(&self, dual: DualBlade) -> Result<Self> {
        let s = dual.0;
        if s.key() & !full_mask(self.dim_v) != 0 {
            return Err(Error::DimensionMismatch {
                left: self.dim_v,
                right: 64,
            });
        }
        if s.degree() > self.degree {
            return Err(Error::WrongDegree {
                expected: self.degree,
                got: s.degree(),
            });
        }
        let mut terms = Vec::new();
        for (t, c) in &self.terms {
            if !t.contains(s) {
                continue;
            }
            let rest = Blade::from_key(t.key() & !s.key());
            let (sign, merged) = wedge_blades(s, rest).expect("disjoint by construction");
            debug_assert_eq!(merged, *t);
            let mut v = c.clone();
            if sign < 0 {
                v = v.neg();
            }
            terms.push((rest, v));
        }
        SparseForm::from_terms(self.dim_v, self.degree - s.degree(), terms)
    }

    /// Coefficientwise pairing of two forms of equal degree.
    pub fn pairing(&self, rhs: &Self) -> Result<C> {
        self.check_compatible(rhs)?;
        let mut acc = C::zero();
        // both term lists are sorted; walk them together
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < rhs.terms.len() {
            let (a, ca) = &self.terms[i];
            let (b, cb) = &rhs.terms[j];
            match a.key().cmp(&b.key()) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc.add_assign_ref(&ca.mul_ref(cb));
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(acc)
    }

    /// `star(self ^ rhs)` for complementary degrees, without materializing
    /// the wedge: pair each blade of `self` against the complementary blade
    /// of `rhs` with the wedge sign.
    pub fn star_pair(&self, rhs: &Self) -> Result<C> {
        if self.dim_v != rhs.dim_v {
            return Err(Error::DimensionMismatch {
                left: self.dim_v,
                right: rhs.dim_v,
            });
        }
        if self.degree + rhs.degree != self.dim_v {
            return Err(Error::DegreeOverflow {
                degree: self.degree + rhs.degree,
                dim_v: self.dim_v,
            });
        }
        let mut acc = C::zero();
        for (a, ca) in &self.terms {
            let comp = a.complement(self.dim_v);
            if let Some(cb) = rhs.coefficient(comp) {
                let (sign, _) = wedge_blades(*a, comp).expect("complement is disjoint");
                let mut v = ca.mul_ref(cb);
                if sign < 0 {
                    v = v.neg();
                }
                acc.add_assign_ref(&v);
            }
        }
        Ok(acc)
    }

    /// Map the coefficients into another ring.
    pub fn lift<D: Ring>(&self, f: impl Fn(&C) -> D) -> SparseForm<D> {
        SparseForm {
            dim_v: self.dim_v,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(b, c)| (*b, f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }
}

impl SparseForm<Rat> {
    /// Embed an exact form into any other coefficient ring.
    pub fn embed<D: Ring>(&self) -> SparseForm<D> {
        self.lift(|c| D::from_rat(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    fn b(indices: &[u8]) -> Blade {
        Blade::from_indices(indices).unwrap()
    }

    #[test]
    fn wedge_blades_signs() {
        assert_eq!(wedge_blades(b(&[0, 1]), b(&[2, 3])), Some((1, b(&[0, 1, 2, 3]))));
        // inversions of (0,3,1,2) = 2
        assert_eq!(wedge_blades(b(&[0, 3]), b(&[1, 2])), Some((1, b(&[0, 1, 2, 3]))));
        // inversions of (0,2,1,3) = 1
        assert_eq!(wedge_blades(b(&[0, 2]), b(&[1, 3])), Some((-1, b(&[0, 1, 2, 3]))));
        // shared index
        assert_eq!(wedge_blades(b(&[0, 1]), b(&[1, 2])), None);
    }

    #[test]
    fn wedge_of_forms() {
        // (3 e03 + e12) ^ (3 e03 + e12) = 6 e0123
        let f = SparseForm::from_terms(
            4,
            2,
            vec![(b(&[0, 3]), rat(3)), (b(&[1, 2]), rat(1))],
        )
        .unwrap();
        let sq = f.wedge(&f).unwrap();
        assert_eq!(sq.num_terms(), 1);
        assert_eq!(sq.coefficient(b(&[0, 1, 2, 3])), Some(&rat(6)));
        assert_eq!(sq.hodge_star().unwrap(), rat(6));

        // f ^ 0 = 0
        let zero = SparseForm::<Rat>::zero(4, 2);
        assert!(f.wedge(&zero).unwrap().is_zero());

        // e01 ^ e23 = + e0123
        let e01 = SparseForm::from_blade(4, b(&[0, 1]), rat(1)).unwrap();
        let e23 = SparseForm::from_blade(4, b(&[2, 3]), rat(1)).unwrap();
        assert_eq!(e01.wedge(&e23).unwrap().hodge_star().unwrap(), rat(1));
    }

    #[test]
    fn wedge_dimension_and_degree_errors() {
        let f = SparseForm::from_blade(4, b(&[0, 1]), rat(1)).unwrap();
        let g = SparseForm::from_blade(6, b(&[0, 1]), rat(1)).unwrap();
        assert!(matches!(
            f.wedge(&g),
            Err(Error::DimensionMismatch { .. })
        ));
        let h = SparseForm::from_blade(4, b(&[2, 3]), rat(1)).unwrap();
        let top = f.wedge(&h).unwrap();
        assert!(matches!(
            top.wedge(&f),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn hodge_star_cases() {
        let top = SparseForm::from_blade(4, b(&[0, 1, 2, 3]), rat(6)).unwrap();
        assert_eq!(top.hodge_star().unwrap(), rat(6));
        let zero = SparseForm::<Rat>::zero(4, 4);
        assert_eq!(zero.hodge_star().unwrap(), rat(0));
        let not_top = SparseForm::from_blade(4, b(&[0, 1]), rat(1)).unwrap();
        assert!(not_top.hodge_star().is_err());
        let full = SparseForm::from_blade(5, b(&[0, 1, 2, 3, 4]), rat(1)).unwrap();
        assert_eq!(full.hodge_star().unwrap(), rat(1));
    }

    #[test]
    fn contraction_cases() {
        let e0123 = SparseForm::from_blade(4, b(&[0, 1, 2, 3]), rat(1)).unwrap();
        let out = e0123.contract(DualBlade(b(&[0, 1]))).unwrap();
        assert_eq!(out.coefficient(b(&[2, 3])), Some(&rat(1)));

        let e0134 = SparseForm::from_blade(5, b(&[0, 1, 3, 4]), rat(1)).unwrap();
        let hit = e0134.contract(DualBlade(b(&[0, 1]))).unwrap();
        assert_eq!(hit.coefficient(b(&[3, 4])), Some(&rat(1)));
        let miss = e0134.contract(DualBlade(b(&[0, 2]))).unwrap();
        assert!(miss.is_zero());

        // degree-0 dual acts as identity
        let id = e0134.contract(DualBlade(Blade::EMPTY)).unwrap();
        assert_eq!(id, e0134);
    }

    #[test]
    fn star_pair_matches_wedge_then_star() {
        let f = SparseForm::from_terms(
            6,
            2,
            vec![(b(&[0, 3]), rat(3)), (b(&[1, 2]), rat(1)), (b(&[4, 5]), rat(-2))],
        )
        .unwrap();
        let g = SparseForm::from_terms(
            6,
            4,
            vec![
                (b(&[1, 2, 4, 5]), rat(2)),
                (b(&[0, 2, 4, 5]), rat(7)),
                (b(&[0, 1, 2, 3]), rat(-1)),
            ],
        )
        .unwrap();
        let via_wedge = f.wedge(&g).unwrap().hodge_star().unwrap();
        let via_pair = f.star_pair(&g).unwrap();
        assert_eq!(via_wedge, via_pair);
    }

    // --- property tests -------------------------------------------------

    fn arb_form(dim: u32, degree: u32) -> impl Strategy<Value = SparseForm<Rat>> {
        let all: Vec<u64> = (0..1u64 << dim)
            .filter(|k| k.count_ones() == degree)
            .collect();
        proptest::collection::vec(
            (0..all.len(), -4i64..=4),
            0..=6.min(all.len()),
        )
        .prop_map(move |picks| {
            let terms = picks
                .into_iter()
                .map(|(i, c)| (Blade::from_key(all[i]), rat(c)))
                .collect();
            SparseForm::from_terms(dim, degree, terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn graded_commutativity(
            (f, g, a, bdeg) in (1u32..=4, 1u32..=4).prop_flat_map(|(a, bdeg)| {
                let dim = 8u32;
                (arb_form(dim, a), arb_form(dim, bdeg), Just(a), Just(bdeg))
            })
        ) {
            if a + bdeg <= 8 {
                let fg = f.wedge(&g).unwrap();
                let gf = g.wedge(&f).unwrap();
                let expected = if (a * bdeg) % 2 == 0 { gf.clone() } else { gf.scale(&rat(-1)) };
                prop_assert_eq!(fg, expected);
            }
        }

        #[test]
        fn associativity(
            f in arb_form(8, 2),
            g in arb_form(8, 3),
            h in arb_form(8, 2),
        ) {
            let left = f.wedge(&g).unwrap().wedge(&h).unwrap();
            let right = f.wedge(&g.wedge(&h).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn contraction_adjoint_to_wedge(
            s_key in 0u64..(1 << 6),
            a in arb_form(6, 2),
            bform in arb_form(6, 4),
        ) {
            let s = Blade::from_key(s_key);
            if s.degree() == 2 {
                let lhs = SparseForm::from_blade(6, s, rat(1))
                    .unwrap()
                    .wedge(&a)
                    .unwrap()
                    .pairing(&bform)
                    .unwrap();
                let rhs = a.pairing(&bform.contract(DualBlade(s)).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
