//! The master operators of the correction hierarchy.
//!
//! For a monomial P of degree p,
//!
//!   Xi1 P = (1/p) sum_i D_iV · D_iP
//!   Xi2 P = (1/p) sum_i (I(x)mu + mu(x)I) ∂_i D_i P
//!   Xi0   = I - Xi2,      Xi = Xi0 + Xi1,
//!
//! extended linearly. Xi1 and Xi2 vanish on constants (the degree division
//! kills them), so constants ride through Xi0 and Xi unchanged; that is what
//! makes Xi0 invertible. Downstream, the tensor-slot functionals annihilate
//! constant slots, which is where the "Xi of a constant contributes nothing"
//! convention of the recursion lives. Xi1 injects an explicit t_j factor per
//! potential term, so the natural codomain is a polynomial whose coefficients
//! are truncated series in t. Xi2 contracts one tensor leg with the planar
//! master field mu, supplied through [`PlanarMoment`].
//!
//! Xi2 strictly lowers degree by at least 2, so Xi0 = I - Xi2 is inverted
//! by a finite Neumann sum on any degree-capped space; `xi0_inv` and
//! `neumann_inverse_apply` implement that and the approximate inversion of
//! the full Xi.

use super::{cyclic_derivative, Monomial, Polynomial, Potential};
use crate::error::{Error, Result};
use crate::scalar::{CRat, Rat};
use crate::series::TruncatedSeries;
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;

/// Provider of planar moments mu_t(word) as truncated series.
pub trait PlanarMoment {
    fn n_vars(&self) -> usize;
    fn order(&self) -> u32;
    fn mu(&mut self, w: &Monomial) -> TruncatedSeries;
}

/// Number of non-crossing color-respecting pairings of a word; these are the
/// moments of the semicircle family (the t = 0 master field).
pub fn semicircle_moment(w: &[u8]) -> u64 {
    if w.is_empty() {
        return 1;
    }
    if w.len() % 2 == 1 {
        return 0;
    }
    let mut acc = 0u64;
    for k in (1..w.len()).step_by(2) {
        if w[k] == w[0] {
            acc += semicircle_moment(&w[1..k]) * semicircle_moment(&w[k + 1..]);
        }
    }
    acc
}

/// The t = 0 planar moments: mu(w) is the constant series counting
/// non-crossing pairings of w.
pub struct GaussianMoments {
    pub n_vars: usize,
    pub order: u32,
}

impl PlanarMoment for GaussianMoments {
    fn n_vars(&self) -> usize {
        self.n_vars
    }
    fn order(&self) -> u32 {
        self.order
    }
    fn mu(&mut self, w: &Monomial) -> TruncatedSeries {
        TruncatedSeries::constant(
            self.n_vars,
            self.order,
            CRat::from_rat(Rat::from_integer(semicircle_moment(&w.0).into())),
        )
    }
}

/// Polynomial in the X_i whose coefficients are truncated series in t.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeriesPolynomial {
    pub m: usize,
    pub n_vars: usize,
    pub order: u32,
    pub terms: BTreeMap<Monomial, TruncatedSeries>,
}

impl SeriesPolynomial {
    pub fn zero(m: usize, n_vars: usize, order: u32) -> Self {
        SeriesPolynomial {
            m,
            n_vars,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_polynomial(p: &Polynomial, n_vars: usize, order: u32) -> Self {
        let mut out = Self::zero(p.m, n_vars, order);
        for (w, c) in &p.terms {
            out.add_term(
                w.clone(),
                &TruncatedSeries::constant(n_vars, order, c.clone()),
            );
        }
        out
    }

    pub fn add_term(&mut self, w: Monomial, s: &TruncatedSeries) {
        if s.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(entry) => {
                *entry = entry.add(s);
                if entry.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, s.clone());
            }
        }
    }

    pub fn add(&self, other: &SeriesPolynomial) -> SeriesPolynomial {
        assert_eq!(self.m, other.m, "color count mismatch");
        let mut out = self.clone();
        for (w, s) in &other.terms {
            out.add_term(w.clone(), s);
        }
        out
    }

    pub fn sub(&self, other: &SeriesPolynomial) -> SeriesPolynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SeriesPolynomial {
        let mut out = self.clone();
        for s in out.terms.values_mut() {
            *s = s.neg();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.degree()).max().unwrap_or(0)
    }

    pub fn coeff(&self, w: &Monomial) -> TruncatedSeries {
        self.terms
            .get(w)
            .cloned()
            .unwrap_or_else(|| TruncatedSeries::zero(self.n_vars, self.order))
    }

    /// Diagnostic norm: sum over words of (sum of coefficient 1-norms) M^deg.
    pub fn norm_m(&self, m_radius: &Rat) -> Rat {
        let mut acc = Rat::from_integer(0.into());
        for (w, s) in &self.terms {
            let csum: Rat = s.terms.values().map(|c| c.norm1()).sum();
            acc += csum * super::pow_rat(m_radius, w.degree());
        }
        acc
    }
}

impl fmt::Display for SeriesPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, s) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{s}]*{w}")?;
        }
        Ok(())
    }
}

fn check_caps(p: &SeriesPolynomial, v: &Potential, d_cap: usize, raise: usize) -> Result<()> {
    let need = p.degree() + raise;
    if need > d_cap {
        return Err(Error::CapExceeded {
            context: "Xi application",
            needed: need,
            cap: d_cap,
        });
    }
    if !v.monomials.is_empty() && p.n_vars != v.n_terms() {
        return Err(Error::Config(
            "potential term count does not match series variables".into(),
        ));
    }
    Ok(())
}

/// Xi1 P = (1/p) sum_i D_iV D_iP, with D_iV = sum_j t_j D_i q_j.
pub fn xi1(p: &SeriesPolynomial, v: &Potential, d_cap: usize) -> Result<SeriesPolynomial> {
    check_caps(p, v, d_cap, v.max_degree().saturating_sub(2))?;
    let mut out = SeriesPolynomial::zero(p.m, p.n_vars, p.order);
    for (w, s) in &p.terms {
        let deg = w.degree();
        if deg == 0 {
            continue;
        }
        let inv_p = CRat::from_rat(Rat::one() / Rat::from_integer(deg.into()));
        for i in 1..=p.m as u8 {
            let dw = cyclic_derivative(i, &Polynomial::from_monomial(p.m, w.clone(), CRat::one()));
            if dw.is_zero() {
                continue;
            }
            for (j, q) in v.monomials.iter().enumerate() {
                let dq =
                    cyclic_derivative(i, &Polynomial::from_monomial(p.m, q.clone(), CRat::one()));
                for (wq, cq) in &dq.terms {
                    for (ww, cw) in &dw.terms {
                        let word = wq.concat(ww);
                        let c = &(&inv_p * cq) * cw;
                        let series = s.scale(&c).mul_var(j);
                        out.add_term(word, &series);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Xi2 P = (1/p) sum_i (I(x)mu + mu(x)I) ∂_i D_i P.
pub fn xi2(
    p: &SeriesPolynomial,
    mu: &mut dyn PlanarMoment,
    d_cap: usize,
) -> Result<SeriesPolynomial> {
    if mu.order() < p.order {
        return Err(Error::OrderExceeded {
            context: "planar moments for Xi2",
            needed: p.order,
            have: mu.order(),
        });
    }
    if p.degree() > d_cap {
        return Err(Error::CapExceeded {
            context: "Xi application",
            needed: p.degree(),
            cap: d_cap,
        });
    }
    let mut out = SeriesPolynomial::zero(p.m, p.n_vars, p.order);
    for (w, s) in &p.terms {
        let deg = w.degree();
        if deg == 0 {
            continue;
        }
        let inv_p = CRat::from_rat(Rat::one() / Rat::from_integer(deg.into()));
        for i in 1..=p.m as u8 {
            let dw = cyclic_derivative(i, &Polynomial::from_monomial(p.m, w.clone(), CRat::one()));
            for (rot, crot) in &dw.terms {
                let split = super::nc_derivative(
                    i,
                    &Polynomial::from_monomial(p.m, rot.clone(), crot.clone()),
                );
                for ((left, right), c) in &split.terms {
                    let c = &inv_p * c;
                    // (I (x) mu): keep left leg, contract right with mu
                    let series = s.scale(&c);
                    out.add_term(left.clone(), &series.mul(&mu.mu(right)));
                    // (mu (x) I): contract left leg
                    out.add_term(right.clone(), &series.mul(&mu.mu(left)));
                }
            }
        }
    }
    Ok(out)
}

/// Xi0 P = P - Xi2 P.
pub fn xi0(
    p: &SeriesPolynomial,
    mu: &mut dyn PlanarMoment,
    d_cap: usize,
) -> Result<SeriesPolynomial> {
    Ok(p.sub(&xi2(p, mu, d_cap)?))
}

/// Xi P = Xi0 P + Xi1 P = P + Xi1 P - Xi2 P.
pub fn xi(
    p: &SeriesPolynomial,
    v: &Potential,
    mu: &mut dyn PlanarMoment,
    d_cap: usize,
) -> Result<SeriesPolynomial> {
    Ok(xi0(p, mu, d_cap)?.add(&xi1(p, v, d_cap)?))
}

/// Inverse of Xi0 by the finite Neumann sum sum_j Xi2^j; exact on the
/// capped space because Xi2 strictly lowers degree by at least 2.
pub fn xi0_inv(
    p: &SeriesPolynomial,
    mu: &mut dyn PlanarMoment,
    d_cap: usize,
) -> Result<SeriesPolynomial> {
    let mut acc = p.clone();
    let mut cur = p.clone();
    loop {
        cur = xi2(&cur, mu, d_cap)?;
        if cur.is_zero() {
            break;
        }
        acc = acc.add(&cur);
    }
    Ok(acc)
}

/// Neumann approximation of Xi^{-1}:
///
///   Q_n = sum_{k=0}^{n-1} (-Xi0^{-1} Xi1)^k Xi0^{-1} P,
///   R_n = P - Xi Q_n = (-Xi1 Xi0^{-1})^n P,
///
/// returned together with the diagnostic ‖R_n‖_M at `m_radius`. The identity
/// P = Xi Q_n + R_n is exact on the truncated space.
pub fn neumann_inverse_apply(
    p: &SeriesPolynomial,
    v: &Potential,
    mu: &mut dyn PlanarMoment,
    n_terms: usize,
    d_cap: usize,
    m_radius: &Rat,
) -> Result<(SeriesPolynomial, SeriesPolynomial, Rat)> {
    let mut q = SeriesPolynomial::zero(p.m, p.n_vars, p.order);
    if n_terms > 0 {
        let mut term = xi0_inv(p, mu, d_cap)?;
        q = q.add(&term);
        for _ in 1..n_terms {
            let raised = xi1(&term, v, d_cap)?;
            term = xi0_inv(&raised, mu, d_cap)?.neg();
            q = q.add(&term);
        }
    }
    let r = p.sub(&xi(&q, v, mu, d_cap)?);
    let norm = r.norm_m(m_radius);
    Ok((q, r, norm))
}
