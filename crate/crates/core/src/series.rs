//! Multivariate formal power series in the coupling constants t = (t_1,…,t_n),
//! truncated at a total order K, with exact complex-rational coefficients.
//!
//! Arithmetic is closed under the cap: sums are exact, products drop only the
//! terms of total order above K. No rounding anywhere.

use crate::scalar::{rat_int, rat_u64, CRat, Rat};
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent multi-index k = (k_1,…,k_n).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut v = vec![0; n];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut v = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            v.push(a - b);
        }
        Some(MultiIndex(v))
    }

    /// k! = prod_i k_i!
    pub fn factorial(&self) -> Rat {
        let mut f = rat_int(1);
        for &k in &self.0 {
            for j in 2..=k as u64 {
                f *= rat_u64(j);
            }
        }
        f
    }

    /// Enumerate every multi-index on `n` variables with total order <= cap.
    pub fn all_up_to(n: usize, cap: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, left: u32) {
            if pos == cur.len() {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for v in 0..=left {
                cur[pos] = v;
                rec(out, cur, pos + 1, left - v);
            }
            cur[pos] = 0;
        }
        rec(&mut out, &mut cur, 0, cap);
        out.sort();
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Truncated multivariate power series. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedSeries {
    pub n_vars: usize,
    pub order: u32,
    pub terms: BTreeMap<MultiIndex, CRat>,
}

impl TruncatedSeries {
    pub fn zero(n_vars: usize, order: u32) -> Self {
        TruncatedSeries {
            n_vars,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, order: u32, c: CRat) -> Self {
        let mut s = Self::zero(n_vars, order);
        if !c.is_zero() {
            s.terms.insert(MultiIndex::zero(n_vars), c);
        }
        s
    }

    pub fn one(n_vars: usize, order: u32) -> Self {
        Self::constant(n_vars, order, CRat::one())
    }

    /// The variable t_j itself (zero if the cap cannot hold a linear term).
    pub fn var(n_vars: usize, order: u32, j: usize) -> Self {
        let mut s = Self::zero(n_vars, order);
        if order >= 1 {
            s.terms.insert(MultiIndex::unit(n_vars, j), CRat::one());
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &MultiIndex) -> CRat {
        self.terms.get(k).cloned().unwrap_or_else(CRat::zero)
    }

    pub fn set_coeff(&mut self, k: MultiIndex, c: CRat) {
        if k.total() > self.order {
            return;
        }
        if c.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, c);
        }
    }

    pub fn add_assign_coeff(&mut self, k: MultiIndex, c: &CRat) {
        if c.is_zero() || k.total() > self.order {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(entry) => {
                *entry += c;
                if entry.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c.clone());
            }
        }
    }

    pub fn add(&self, other: &TruncatedSeries) -> TruncatedSeries {
        assert_eq!(self.n_vars, other.n_vars, "series variable count mismatch");
        let order = self.order.min(other.order);
        let mut out = TruncatedSeries::zero(self.n_vars, order);
        for (k, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_assign_coeff(k.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &TruncatedSeries) -> TruncatedSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TruncatedSeries {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -std::mem::replace(c, CRat::zero());
        }
        out
    }

    pub fn scale(&self, c: &CRat) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.n_vars, self.order);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.terms.insert(k.clone(), c * v);
        }
        out
    }

    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        assert_eq!(self.n_vars, other.n_vars, "series variable count mismatch");
        let order = self.order.min(other.order);
        let mut out = TruncatedSeries::zero(self.n_vars, order);
        for (ka, ca) in &self.terms {
            let ta = ka.total();
            if ta > order {
                continue;
            }
            for (kb, cb) in &other.terms {
                if ta + kb.total() > order {
                    continue;
                }
                out.add_assign_coeff(ka.add(kb), &(ca * cb));
            }
        }
        out
    }

    /// Multiply by t_j (a degree shift; terms pushed past the cap drop).
    pub fn mul_var(&self, j: usize) -> TruncatedSeries {
        self.mul_var_to(j, self.order)
    }

    /// Multiply by t_j into a series of the given order. Used when the
    /// operand is only valid to order - 1 and the shift fills order exactly.
    pub fn mul_var_to(&self, j: usize, order: u32) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.n_vars, order);
        let e = MultiIndex::unit(self.n_vars, j);
        for (k, c) in &self.terms {
            out.add_assign_coeff(k.add(&e), c);
        }
        out
    }

    /// Restrict to total order <= `order`.
    pub fn truncated(&self, order: u32) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.n_vars, order.min(self.order));
        for (k, c) in &self.terms {
            if k.total() <= out.order {
                out.terms.insert(k.clone(), c.clone());
            }
        }
        out
    }

    /// Formal partial derivative d/dt_j.
    pub fn derivative(&self, j: usize) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.n_vars, self.order.saturating_sub(1));
        for (k, c) in &self.terms {
            if k.0[j] == 0 {
                continue;
            }
            let mut kk = k.clone();
            kk.0[j] -= 1;
            let factor = CRat::from_rat(rat_u64(k.0[j] as u64));
            out.add_assign_coeff(kk, &(&factor * c));
        }
        out
    }

    /// Iterated formal derivative D_j = prod_i (d/dt_i)^{j_i}.
    pub fn derivative_multi(&self, j: &MultiIndex) -> TruncatedSeries {
        let mut out = self.clone();
        for (var, &reps) in j.0.iter().enumerate() {
            for _ in 0..reps {
                out = out.derivative(var);
            }
        }
        out
    }

    /// Integrate the scaling flow: sum_k c_k t^k  ->  sum_k c_k/(|k|+1) t^k,
    /// that is, the alpha-integral over [0,1] of the series evaluated at
    /// alpha*t.
    pub fn integrate_scaling(&self) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.n_vars, self.order);
        for (k, c) in &self.terms {
            let w = CRat::from_rat(Rat::one() / rat_u64(k.total() as u64 + 1));
            out.terms.insert(k.clone(), &w * c);
        }
        out
    }

    /// Numeric evaluation at a real point (real parts only).
    pub fn eval_f64(&self, t: &[f64]) -> f64 {
        assert_eq!(t.len(), self.n_vars);
        let mut acc = 0.0;
        for (k, c) in &self.terms {
            let mut term = c.to_f64();
            for (j, &e) in k.0.iter().enumerate() {
                term *= t[j].powi(e as i32);
            }
            acc += term;
        }
        acc
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*t^{k}")?;
        }
        Ok(())
    }
}
