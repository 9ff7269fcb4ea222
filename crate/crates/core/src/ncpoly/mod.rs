//! Exact non-commutative polynomial algebra over m colors.
//!
//! Words on the letters X_1,…,X_m with exact complex-rational coefficients,
//! the involution `*`, the algebra norms `‖·‖_M`, the non-commutative
//! derivative `∂_i`, the cyclic derivative `D_i`, and the degree-division
//! map. The Ξ operators and their Neumann inversion live in [`xi`].

pub mod xi;

use crate::error::{Error, Result};
use crate::scalar::{CRat, Rat};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A word on the colors {1,…,m}; the empty word is the unit 1.
///
/// Letters are stored 1-based, matching the external "121"-style syntax.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial(pub Vec<u8>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: u8) -> Self {
        Monomial(vec![i])
    }

    /// X_i^p
    pub fn power(i: u8, p: usize) -> Self {
        Monomial(vec![i; p])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Monomial(v)
    }

    pub fn reversed(&self) -> Monomial {
        let mut v = self.0.clone();
        v.reverse();
        Monomial(v)
    }

    /// Word starting at position `r` and wrapping around.
    pub fn rotated(&self, r: usize) -> Monomial {
        if self.0.is_empty() {
            return self.clone();
        }
        let n = self.0.len();
        let r = r % n;
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(&self.0[r..]);
        v.extend_from_slice(&self.0[..r]);
        Monomial(v)
    }

    /// Lexicographically minimal cyclic rotation; canonical representative
    /// of the trace class of this word.
    pub fn canonical_rotation(&self) -> Monomial {
        let n = self.0.len();
        if n <= 1 {
            return self.clone();
        }
        let mut best = self.clone();
        for r in 1..n {
            let cand = self.rotated(r);
            if cand < best {
                best = cand;
            }
        }
        best
    }

    /// Accepts compact digit syntax "121" or explicit "X1*X2*X1".
    /// The empty string denotes the unit.
    pub fn parse(s: &str, m: usize) -> Result<Monomial> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Monomial::one());
        }
        let mut letters = Vec::new();
        if s.contains('X') || s.contains('x') {
            for part in s.split('*') {
                let part = part.trim();
                let digits = part
                    .strip_prefix('X')
                    .or_else(|| part.strip_prefix('x'))
                    .ok_or_else(|| Error::InvalidWord {
                        word: s.into(),
                        reason: format!("expected X<i> factor, found {part:?}"),
                    })?;
                let i: usize = digits.parse().map_err(|_| Error::InvalidWord {
                    word: s.into(),
                    reason: format!("bad color index {digits:?}"),
                })?;
                letters.push(i);
            }
        } else {
            for ch in s.chars() {
                let i = ch.to_digit(10).ok_or_else(|| Error::InvalidWord {
                    word: s.into(),
                    reason: format!("expected digits, found {ch:?}"),
                })? as usize;
                letters.push(i);
            }
        }
        let mut word = Vec::with_capacity(letters.len());
        for i in letters {
            if i == 0 || i > m {
                return Err(Error::InvalidWord {
                    word: s.into(),
                    reason: format!("color {i} out of range 1..={m}"),
                });
            }
            word.push(i as u8);
        }
        Ok(Monomial(word))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // compact digit syntax; the unit is the empty string, as in parse
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Complex-rational linear combination of words over a fixed color count m.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    pub m: usize,
    pub terms: BTreeMap<Monomial, CRat>,
}

impl Polynomial {
    pub fn zero(m: usize) -> Self {
        Polynomial {
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(m: usize) -> Self {
        Self::from_monomial(m, Monomial::one(), CRat::one())
    }

    pub fn x(m: usize, i: u8) -> Self {
        Self::from_monomial(m, Monomial::var(i), CRat::one())
    }

    pub fn from_monomial(m: usize, w: Monomial, c: CRat) -> Self {
        let mut p = Self::zero(m);
        p.add_term(w, &c);
        p
    }

    pub fn constant(m: usize, c: CRat) -> Self {
        Self::from_monomial(m, Monomial::one(), c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.degree()).max().unwrap_or(0)
    }

    pub fn coeff(&self, w: &Monomial) -> CRat {
        self.terms.get(w).cloned().unwrap_or_else(CRat::zero)
    }

    pub fn add_term(&mut self, w: Monomial, c: &CRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(entry) => {
                *entry += c;
                if entry.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c.clone());
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.m, other.m, "color count mismatch");
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -std::mem::replace(c, CRat::zero());
        }
        out
    }

    pub fn scale(&self, c: &CRat) -> Polynomial {
        let mut out = Polynomial::zero(self.m);
        if c.is_zero() {
            return out;
        }
        for (w, v) in &self.terms {
            out.terms.insert(w.clone(), c * v);
        }
        out
    }

    /// Word concatenation extended bilinearly; exact.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.m, other.m, "color count mismatch");
        let mut out = Polynomial::zero(self.m);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                out.add_term(wa.concat(wb), &(ca * cb));
            }
        }
        out
    }

    /// The antilinear anti-automorphism (z w)* = conj(z) reverse(w).
    pub fn involution(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.m);
        for (w, c) in &self.terms {
            out.add_term(w.reversed(), &c.conj());
        }
        out
    }

    pub fn is_self_adjoint(&self) -> bool {
        self == &self.involution()
    }

    /// ‖P‖_M = sum over words of |coefficient| M^degree, with |·| the 1-norm
    /// of the rational components.
    pub fn norm_m(&self, m_radius: &Rat) -> Rat {
        assert!(m_radius > &Rat::zero(), "norm radius must be positive");
        let mut acc = Rat::zero();
        for (w, c) in &self.terms {
            acc += c.norm1() * pow_rat(m_radius, w.degree());
        }
        acc
    }

    /// Each degree-p word scaled by 1/p; the constant term drops.
    pub fn degree_division(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.m);
        for (w, c) in &self.terms {
            let p = w.degree();
            if p == 0 {
                continue;
            }
            let f = CRat::from_rat(Rat::one() / Rat::from_integer(p.into()));
            out.add_term(w.clone(), &(&f * c));
        }
        out
    }
}

pub(crate) fn pow_rat(base: &Rat, exp: usize) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*{w}")?;
        }
        Ok(())
    }
}

/// Element of the tensor square, a linear combination of q1 (x) q2.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TensorPolynomial {
    pub m: usize,
    pub terms: BTreeMap<(Monomial, Monomial), CRat>,
}

impl TensorPolynomial {
    pub fn zero(m: usize) -> Self {
        TensorPolynomial {
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, left: Monomial, right: Monomial, c: &CRat) {
        if c.is_zero() {
            return;
        }
        let key = (left, right);
        match self.terms.get_mut(&key) {
            Some(entry) => {
                *entry += c;
                if entry.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    pub fn add(&self, other: &TensorPolynomial) -> TensorPolynomial {
        assert_eq!(self.m, other.m, "color count mismatch");
        let mut out = self.clone();
        for ((l, r), c) in &other.terms {
            out.add_term(l.clone(), r.clone(), c);
        }
        out
    }

    pub fn tensor(p: &Polynomial, q: &Polynomial) -> TensorPolynomial {
        assert_eq!(p.m, q.m, "color count mismatch");
        let mut out = TensorPolynomial::zero(p.m);
        for (wp, cp) in &p.terms {
            for (wq, cq) in &q.terms {
                out.add_term(wp.clone(), wq.clone(), &(cp * cq));
            }
        }
        out
    }

    /// (a (x) b)(c (x) d) = ac (x) bd, extended bilinearly.
    pub fn mul(&self, other: &TensorPolynomial) -> TensorPolynomial {
        assert_eq!(self.m, other.m, "color count mismatch");
        let mut out = TensorPolynomial::zero(self.m);
        for ((la, ra), ca) in &self.terms {
            for ((lb, rb), cb) in &other.terms {
                out.add_term(la.concat(lb), ra.concat(rb), &(ca * cb));
            }
        }
        out
    }

    /// The flip-multiply m(A (x) B) = BA.
    pub fn flip_multiply(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.m);
        for ((l, r), c) in &self.terms {
            out.add_term(r.concat(l), c);
        }
        out
    }

    /// ‖·‖_M on the tensor square: sum |coeff| M^(deg q1 + deg q2).
    pub fn norm_m(&self, m_radius: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for ((l, r), c) in &self.terms {
            acc += c.norm1() * pow_rat(m_radius, l.degree() + r.degree());
        }
        acc
    }
}

/// ∂_i P = sum over decompositions P = R X_i S of R (x) S.
pub fn nc_derivative(i: u8, p: &Polynomial) -> TensorPolynomial {
    let mut out = TensorPolynomial::zero(p.m);
    for (w, c) in &p.terms {
        for (pos, &letter) in w.0.iter().enumerate() {
            if letter == i {
                let left = Monomial(w.0[..pos].to_vec());
                let right = Monomial(w.0[pos + 1..].to_vec());
                out.add_term(left, right, c);
            }
        }
    }
    out
}

/// D_i P = sum over decompositions P = R X_i S of S R; equals
/// flip-multiply composed with ∂_i.
pub fn cyclic_derivative(i: u8, p: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(p.m);
    for (w, c) in &p.terms {
        for (pos, &letter) in w.0.iter().enumerate() {
            if letter == i {
                let mut v = w.0[pos + 1..].to_vec();
                v.extend_from_slice(&w.0[..pos]);
                out.add_term(Monomial(v), c);
            }
        }
    }
    out
}

/// The potential V = sum_j t_j q_j with the t_j kept formal; numeric values
/// may be attached for evaluation in the finite-N module.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    pub m: usize,
    pub monomials: Vec<Monomial>,
    pub values: Option<Vec<Rat>>,
}

impl Potential {
    pub fn new(m: usize, monomials: Vec<Monomial>) -> Result<Self> {
        for q in &monomials {
            if q.degree() == 0 {
                return Err(Error::Config(
                    "potential monomials must have degree >= 1".into(),
                ));
            }
            if let Some(&bad) = q.0.iter().find(|&&c| c == 0 || c as usize > m) {
                return Err(Error::InvalidWord {
                    word: q.to_string(),
                    reason: format!("color {bad} out of range 1..={m}"),
                });
            }
        }
        Ok(Potential {
            m,
            monomials,
            values: None,
        })
    }

    pub fn zero(m: usize) -> Self {
        Potential {
            m,
            monomials: Vec::new(),
            values: None,
        }
    }

    pub fn with_values(mut self, values: Vec<Rat>) -> Result<Self> {
        if values.len() != self.monomials.len() {
            return Err(Error::Config(
                "one t value per potential monomial required".into(),
            ));
        }
        self.values = Some(values);
        Ok(self)
    }

    pub fn n_terms(&self) -> usize {
        self.monomials.len()
    }

    /// D = max_j deg q_j (0 for the zero potential).
    pub fn max_degree(&self) -> usize {
        self.monomials.iter().map(|q| q.degree()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use proptest::prelude::*;

    fn m1(word: &[u8]) -> Polynomial {
        Polynomial::from_monomial(2, Monomial(word.to_vec()), CRat::one())
    }

    #[test]
    fn multiply_examples() {
        // X1 * X2 = X1X2
        let p = m1(&[1]).mul(&m1(&[2]));
        assert_eq!(p, m1(&[1, 2]));
        // 1 * P = P
        let q = m1(&[1, 2, 1]);
        assert_eq!(Polynomial::one(2).mul(&q), q);
        // (X1+X2)*X1 = X1X1 + X2X1
        let s = m1(&[1]).add(&m1(&[2])).mul(&m1(&[1]));
        assert_eq!(s, m1(&[1, 1]).add(&m1(&[2, 1])));
    }

    #[test]
    fn involution_examples() {
        // (2+i) X1X2 -> (2-i) X2X1
        let c = CRat::new(rat_int(2), rat_int(1));
        let p = Polynomial::from_monomial(2, Monomial(vec![1, 2]), c.clone());
        let star = p.involution();
        assert_eq!(star.coeff(&Monomial(vec![2, 1])), c.conj());
        // self-adjoint X1X2 + X2X1
        let sa = m1(&[1, 2]).add(&m1(&[2, 1]));
        assert!(sa.is_self_adjoint());
        // unit fixed
        assert_eq!(Polynomial::one(2).involution(), Polynomial::one(2));
        // (P*)* = P
        assert_eq!(p.involution().involution(), p);
    }

    #[test]
    fn norm_example() {
        // P = X1X2 + 2 X1, M = 3 -> 9 + 6 = 15
        let p = m1(&[1, 2]).add(&m1(&[1]).scale(&CRat::from_int(2)));
        assert_eq!(p.norm_m(&rat_int(3)), rat_int(15));
        // constant has norm |c|
        assert_eq!(Polynomial::one(2).norm_m(&rat(7, 2)), rat_int(1));
    }

    #[test]
    fn nc_derivative_examples() {
        // d_1(X1X2X1) = 1 (x) X2X1 + X1X2 (x) 1
        let d = nc_derivative(1, &m1(&[1, 2, 1]));
        assert_eq!(d.terms.len(), 2);
        assert_eq!(
            d.terms.get(&(Monomial::one(), Monomial(vec![2, 1]))),
            Some(&CRat::one())
        );
        assert_eq!(
            d.terms.get(&(Monomial(vec![1, 2]), Monomial::one())),
            Some(&CRat::one())
        );
        // d_i X_j = delta_ij 1 (x) 1
        let dxx = nc_derivative(1, &m1(&[1]));
        assert_eq!(
            dxx.terms.get(&(Monomial::one(), Monomial::one())),
            Some(&CRat::one())
        );
        assert!(nc_derivative(2, &m1(&[1])).terms.is_empty());
        // d_1(1) = 0
        assert!(nc_derivative(1, &Polynomial::one(2)).terms.is_empty());
    }

    #[test]
    fn cyclic_derivative_examples() {
        // D_1(X1X2X1X2) = 2 X2X1X2
        let d = cyclic_derivative(1, &m1(&[1, 2, 1, 2]));
        assert_eq!(d.coeff(&Monomial(vec![2, 1, 2])), CRat::from_int(2));
        assert_eq!(d.terms.len(), 1);
        // D_i(X_i) = 1
        assert_eq!(cyclic_derivative(1, &m1(&[1])), Polynomial::one(2));
        // D_1(X_2) = 0
        assert!(cyclic_derivative(1, &m1(&[2])).is_zero());
    }

    #[test]
    fn degree_division_examples() {
        let p = m1(&[1, 2, 1]);
        let d = p.degree_division();
        assert_eq!(d.coeff(&Monomial(vec![1, 2, 1])), CRat::from_rat(rat(1, 3)));
        assert!(Polynomial::one(2).degree_division().is_zero());
        // 5 + 2X1 -> 2X1
        let q = Polynomial::constant(2, CRat::from_int(5)).add(&m1(&[1]).scale(&CRat::from_int(2)));
        assert_eq!(q.degree_division(), m1(&[1]).scale(&CRat::from_int(2)));
    }

    #[test]
    fn continuity_bound_equality() {
        // For any monomial q: sum_i ‖D_i q‖_M = deg q * M^(deg q - 1),
        // and per color the one-color equality of the text holds.
        let ms = rat(5, 2);
        let mp = rat_int(4);
        for word in [
            vec![1, 2, 1, 2],
            vec![1, 1, 1],
            vec![2],
            vec![1, 2, 2, 1, 1],
        ] {
            let q = m1(&word);
            let deg = word.len();
            let total: Rat = (1..=2u8)
                .map(|i| cyclic_derivative(i, &q).norm_m(&ms))
                .sum();
            assert_eq!(total, rat_int(deg as i64) * pow_rat(&ms, deg - 1));
            // ratio form against ‖q‖_{M'}
            assert_eq!(
                total / q.norm_m(&mp),
                rat_int(deg as i64) * pow_rat(&ms, deg - 1) / pow_rat(&mp, deg)
            );
        }
        // one-color monomial: the per-color equality
        let q = Polynomial::from_monomial(1, Monomial(vec![1, 1, 1, 1]), CRat::one());
        assert_eq!(
            cyclic_derivative(1, &q).norm_m(&ms),
            rat_int(4) * pow_rat(&ms, 3)
        );
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(1u8..=2, 0..=max_len)
    }

    fn arb_poly(max_len: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((arb_word(max_len), -3i64..=3), 1..4).prop_map(|terms| {
            let mut p = Polynomial::zero(2);
            for (w, c) in terms {
                p.add_term(Monomial(w), &CRat::from_int(c));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn leibniz_rule(p in arb_poly(4), q in arb_poly(4), i in 1u8..=2) {
            // d_i(PQ) = d_iP (1 (x) Q) + (P (x) 1) d_iQ
            let lhs = nc_derivative(i, &p.mul(&q));
            let one = Polynomial::one(2);
            let rhs = nc_derivative(i, &p)
                .mul(&TensorPolynomial::tensor(&one, &q))
                .add(&TensorPolynomial::tensor(&p, &one).mul(&nc_derivative(i, &q)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn cyclic_is_flip_multiply_of_nc(p in arb_poly(8), i in 1u8..=2) {
            prop_assert_eq!(cyclic_derivative(i, &p), nc_derivative(i, &p).flip_multiply());
        }

        #[test]
        fn norm_is_submultiplicative(p in arb_poly(4), q in arb_poly(4)) {
            let m = rat(7, 3);
            prop_assert!(p.mul(&q).norm_m(&m) <= p.norm_m(&m) * q.norm_m(&m));
        }

        #[test]
        fn tensor_norm_is_multiplicative(p in arb_poly(4), q in arb_poly(4)) {
            let m = rat(7, 3);
            let t = TensorPolynomial::tensor(&p, &q);
            prop_assert_eq!(t.norm_m(&m), p.norm_m(&m) * q.norm_m(&m));
        }

        #[test]
        fn involution_is_anti_automorphism(p in arb_poly(4), q in arb_poly(4)) {
            prop_assert_eq!(p.mul(&q).involution(), q.involution().mul(&p.involution()));
        }
    }

    #[test]
    fn parse_word_syntaxes() {
        assert_eq!(Monomial::parse("121", 2).unwrap(), Monomial(vec![1, 2, 1]));
        assert_eq!(
            Monomial::parse("X1*X2*X1", 2).unwrap(),
            Monomial(vec![1, 2, 1])
        );
        assert_eq!(Monomial::parse("", 2).unwrap(), Monomial::one());
        assert!(Monomial::parse("3", 2).is_err());
    }

    #[test]
    fn canonical_rotation_is_minimal() {
        let w = Monomial(vec![2, 1, 2, 1]);
        assert_eq!(w.canonical_rotation(), Monomial(vec![1, 2, 1, 2]));
    }
}
