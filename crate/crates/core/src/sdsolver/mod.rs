//! Order-by-order solution of the Schwinger-Dyson hierarchy.
//!
//! Two families of exact truncated series are computed:
//!
//! * the planar master field mu_t(P), solved from
//!   mu(X_i P) = mu(x)mu(∂_i P) - mu(D_iV P), which is triangular in the
//!   total t-order because every potential term carries a t_j;
//! * the correction tower I_g(P_1 (x) ... (x) P_l), the N -> oo limits of
//!   nu^N = N^{l-hat}(mu-hat^N - mu)^{(x)l}, solved from the first-letter
//!   peeling of the Tutte decomposition: the first half-edge of slot 1
//!   either glues to a potential star (consuming a t-order), splits its own
//!   word in two (same genus, arity may grow), or reaches another slot
//!   through a handle (genus drops, arity drops).
//!
//! Conventions pinned by the nu-tower: scalars give I_g(c) = c when g = 0;
//! a constant slot kills the value at every arity >= 1; and
//! I_g(P_1 (x) ... (x) P_l) = 0 whenever g < ceil(l/2) — at arity 1 the
//! tower therefore starts at genus 1, the planar table being a separate
//! object. Values are memoized by (genus, canonically rotated and sorted
//! slots) together with the t-order they were computed to; evaluation is
//! sequential and deterministic.
//!
//! The moment expansion of E[1/N tr P] is then
//! mu(P), I_1(P), I_2(P), ... as coefficients of 1, 1/N^2, 1/N^4, ...

use crate::error::{Error, Result};
use crate::ncpoly::xi::{xi, PlanarMoment, SeriesPolynomial};
use crate::ncpoly::{cyclic_derivative, nc_derivative, Monomial, Polynomial, Potential};
use crate::scalar::{rat_to_f64, CRat};
use crate::series::{MultiIndex, TruncatedSeries};
use std::collections::{BTreeMap, HashMap};

/// Moment tables for one (genus, arity): canonical slot tuple -> series.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub genus: usize,
    pub arity: usize,
    pub entries: BTreeMap<Vec<Monomial>, TruncatedSeries>,
}

/// One genus term of the free energy; the constant term is always zero.
#[derive(Clone, Debug)]
pub struct FreeEnergySeries {
    pub genus: usize,
    pub series: TruncatedSeries,
}

pub struct Solver {
    v: Potential,
    n_vars: usize,
    k_order: u32,
    d_cap: usize,
    /// per color i (at index i-1): the words of D_i q_j tagged with j,
    /// one entry per occurrence of X_i in q_j
    dv_words: Vec<Vec<(usize, Monomial)>>,
    planar: HashMap<Monomial, (u32, TruncatedSeries)>,
    tensor: HashMap<(usize, Vec<Monomial>), (u32, TruncatedSeries)>,
}

impl Solver {
    pub fn new(v: Potential, k_order: u32, d_cap: usize) -> Solver {
        let m = v.m;
        let n_vars = v.n_terms();
        let mut dv_words = vec![Vec::new(); m];
        for i in 1..=m as u8 {
            for (j, q) in v.monomials.iter().enumerate() {
                for pos in 0..q.0.len() {
                    if q.0[pos] == i {
                        let mut word = q.0[pos + 1..].to_vec();
                        word.extend_from_slice(&q.0[..pos]);
                        dv_words[(i - 1) as usize].push((j, Monomial(word)));
                    }
                }
            }
        }
        Solver {
            v,
            n_vars,
            k_order,
            d_cap,
            dv_words,
            planar: HashMap::new(),
            tensor: HashMap::new(),
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.v
    }

    pub fn k_order(&self) -> u32 {
        self.k_order
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Degree headroom a request of degree `deg` needs: each consumed
    /// t-order can raise the working degree by max deg(q_j) - 2.
    fn required_cap(&self, deg: usize) -> usize {
        deg + self.k_order as usize * self.v.max_degree().saturating_sub(2)
    }

    fn check_request(&self, deg: usize) -> Result<()> {
        let needed = self.required_cap(deg);
        if needed > self.d_cap {
            return Err(Error::CapExceeded {
                context: "solver request",
                needed,
                cap: self.d_cap,
            });
        }
        Ok(())
    }

    fn zero(&self, ord: u32) -> TruncatedSeries {
        TruncatedSeries::zero(self.n_vars, ord)
    }

    fn one(&self, ord: u32) -> TruncatedSeries {
        TruncatedSeries::one(self.n_vars, ord)
    }

    /// Planar master field mu_t(w), exact to the solver's t-order.
    pub fn moment(&mut self, w: &Monomial) -> Result<TruncatedSeries> {
        self.check_request(w.degree())?;
        self.planar_at(w, self.k_order)
    }

    /// Linear extension of mu to polynomials.
    pub fn moment_poly(&mut self, p: &Polynomial) -> Result<TruncatedSeries> {
        let mut acc = self.zero(self.k_order);
        for (w, c) in p.terms.clone() {
            let s = self.moment(&w)?;
            acc = acc.add(&s.scale(&c));
        }
        Ok(acc)
    }

    fn planar_at(&mut self, w: &Monomial, ord: u32) -> Result<TruncatedSeries> {
        if w.is_one() {
            return Ok(self.one(ord));
        }
        if w.degree() > self.d_cap {
            return Err(Error::CapExceeded {
                context: "planar recursion",
                needed: w.degree(),
                cap: self.d_cap,
            });
        }
        let key = w.canonical_rotation();
        if let Some((have, s)) = self.planar.get(&key) {
            if *have >= ord {
                return Ok(s.truncated(ord));
            }
        }
        let first = key.0[0];
        let tail = Monomial(key.0[1..].to_vec());
        let mut acc = self.zero(ord);
        // self-gluing of the first half-edge: both sides planar
        for pos in 0..tail.0.len() {
            if tail.0[pos] != first {
                continue;
            }
            let left = Monomial(tail.0[..pos].to_vec());
            let right = Monomial(tail.0[pos + 1..].to_vec());
            let a = self.planar_at(&left, ord)?;
            let b = self.planar_at(&right, ord)?;
            acc = acc.add(&a.mul(&b));
        }
        // gluing to a potential star: consumes one t-order
        if ord >= 1 {
            for (j, dq) in self.dv_words[(first - 1) as usize].clone() {
                let merged = dq.concat(&tail);
                let sub = self.planar_at(&merged, ord - 1)?;
                acc = acc.sub(&sub.mul_var_to(j, ord));
            }
        }
        self.planar.insert(key, (ord, acc.clone()));
        Ok(acc)
    }

    /// Minimal genus carrying a nonzero value at the given arity.
    pub fn min_genus(arity: usize) -> usize {
        arity.div_ceil(2)
    }

    /// The correction tower I_g on a tuple of monomial slots.
    /// At arity 1 this is the nu-limit (zero at genus 0); use
    /// [`Solver::genus_moment`] for the moment-expansion coefficient.
    pub fn tensor_moment(&mut self, g: usize, slots: &[Monomial]) -> Result<TruncatedSeries> {
        let deg: usize = slots.iter().map(|s| s.degree()).sum();
        self.check_request(deg)?;
        self.tensor_at(g as isize, slots, self.k_order)
    }

    fn tensor_at(&mut self, g: isize, slots: &[Monomial], ord: u32) -> Result<TruncatedSeries> {
        if g < 0 {
            return Ok(self.zero(ord));
        }
        let g = g as usize;
        let arity = slots.len();
        if arity == 0 {
            return Ok(if g == 0 {
                self.one(ord)
            } else {
                self.zero(ord)
            });
        }
        if slots.iter().any(|s| s.is_one()) {
            return Ok(self.zero(ord));
        }
        if g < Self::min_genus(arity) {
            return Ok(self.zero(ord));
        }
        let mut key_slots: Vec<Monomial> = slots.iter().map(|s| s.canonical_rotation()).collect();
        key_slots.sort();
        let key = (g, key_slots.clone());
        if let Some((have, s)) = self.tensor.get(&key) {
            if *have >= ord {
                return Ok(s.truncated(ord));
            }
        }
        let head = key_slots[0].clone();
        let rest: Vec<Monomial> = key_slots[1..].to_vec();
        let first = head.0[0];
        let tail = Monomial(head.0[1..].to_vec());
        let mut acc = self.zero(ord);

        // self-gluing: the word splits into two circles; each side is
        // either a root slot of its own or closes off as a planar piece
        for pos in 0..tail.0.len() {
            if tail.0[pos] != first {
                continue;
            }
            let left = Monomial(tail.0[..pos].to_vec());
            let right = Monomial(tail.0[pos + 1..].to_vec());

            let mut both = Vec::with_capacity(arity + 1);
            both.push(left.clone());
            both.push(right.clone());
            both.extend(rest.iter().cloned());
            acc = acc.add(&self.tensor_at(g as isize, &both, ord)?);

            let mu_left = self.planar_at(&left, ord)?;
            let mut with_right = Vec::with_capacity(arity);
            with_right.push(right.clone());
            with_right.extend(rest.iter().cloned());
            acc = acc.add(&mu_left.mul(&self.tensor_at(g as isize, &with_right, ord)?));

            let mu_right = self.planar_at(&right, ord)?;
            let mut with_left = Vec::with_capacity(arity);
            with_left.push(left);
            with_left.extend(rest.iter().cloned());
            acc = acc.add(&mu_right.mul(&self.tensor_at(g as isize, &with_left, ord)?));
        }

        // gluing to another slot through a handle: genus and arity drop
        for r in 0..rest.len() {
            let pr = rest[r].clone();
            let rest_minus: Vec<Monomial> = rest
                .iter()
                .enumerate()
                .filter(|&(x, _)| x != r)
                .map(|(_, w)| w.clone())
                .collect();
            for pos in 0..pr.0.len() {
                if pr.0[pos] != first {
                    continue;
                }
                let mut merged = pr.0[pos + 1..].to_vec();
                merged.extend_from_slice(&pr.0[..pos]);
                merged.extend_from_slice(&tail.0);
                let merged = Monomial(merged);

                let mu_merged = self.planar_at(&merged, ord)?;
                acc = acc.add(&mu_merged.mul(&self.tensor_at(g as isize - 1, &rest_minus, ord)?));

                let mut with_merged = Vec::with_capacity(arity - 1);
                with_merged.push(merged);
                with_merged.extend(rest_minus.iter().cloned());
                acc = acc.add(&self.tensor_at(g as isize - 1, &with_merged, ord)?);
            }
        }

        // gluing to a potential star: consumes one t-order
        if ord >= 1 {
            for (j, dq) in self.dv_words[(first - 1) as usize].clone() {
                let merged = dq.concat(&tail);
                if merged.degree() > self.d_cap {
                    return Err(Error::CapExceeded {
                        context: "tensor recursion",
                        needed: merged.degree(),
                        cap: self.d_cap,
                    });
                }
                let mut with_merged = Vec::with_capacity(arity);
                with_merged.push(merged);
                with_merged.extend(rest.iter().cloned());
                let sub = self.tensor_at(g as isize, &with_merged, ord - 1)?;
                acc = acc.sub(&sub.mul_var_to(j, ord));
            }
        }

        self.tensor.insert(key, (ord, acc.clone()));
        Ok(acc)
    }

    /// Linear extension of the tower in the first slot.
    fn tensor_poly(
        &mut self,
        g: isize,
        p: &Polynomial,
        rest: &[Monomial],
    ) -> Result<TruncatedSeries> {
        let mut acc = self.zero(self.k_order);
        for (w, c) in p.terms.clone() {
            let mut slots = Vec::with_capacity(rest.len() + 1);
            slots.push(w);
            slots.extend(rest.iter().cloned());
            let s = self.tensor_at(g, &slots, self.k_order)?;
            acc = acc.add(&s.scale(&c));
        }
        Ok(acc)
    }

    /// Coefficient of N^{-2g} in the expansion of E[1/N tr w]:
    /// the planar master field at genus 0, the tower above.
    pub fn genus_moment(&mut self, g: usize, w: &Monomial) -> Result<TruncatedSeries> {
        if g == 0 {
            self.moment(w)
        } else {
            self.tensor_moment(g, std::slice::from_ref(w))
        }
    }

    /// [mu(w), I_1(w), ..., I_{g_max}(w)].
    pub fn moment_expansion(&mut self, w: &Monomial, g_max: usize) -> Result<Vec<TruncatedSeries>> {
        (0..=g_max).map(|g| self.genus_moment(g, w)).collect()
    }

    /// Free energies F^0..F^{g_max} by term-by-term integration of the
    /// scaling flow: F^g = -sum_j t_j * integral over alpha in [0,1] of
    /// I_g at alpha*t applied to q_j. Every coefficient lands on
    /// (-t)^k/k! times the closed connected count.
    pub fn free_energy(&mut self, g_max: usize) -> Result<Vec<FreeEnergySeries>> {
        let mut out = Vec::with_capacity(g_max + 1);
        for g in 0..=g_max {
            let mut acc = self.zero(self.k_order);
            for j in 0..self.v.monomials.len() {
                let qj = self.v.monomials[j].clone();
                let series = self.genus_moment(g, &qj)?;
                acc = acc.sub(&series.integrate_scaling().mul_var_to(j, self.k_order));
            }
            debug_assert!(acc.coeff(&MultiIndex::zero(self.n_vars)).is_zero());
            out.push(FreeEnergySeries {
                genus: g,
                series: acc,
            });
        }
        Ok(out)
    }

    /// All words over m colors with degree <= deg_max, unit included.
    pub fn word_basis(m: usize, deg_max: usize) -> Vec<Monomial> {
        let mut out = vec![Monomial::one()];
        let mut layer = vec![Monomial::one()];
        for _ in 0..deg_max {
            let mut next = Vec::new();
            for w in &layer {
                for c in 1..=m as u8 {
                    let mut v = w.0.clone();
                    v.push(c);
                    next.push(Monomial(v));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    /// Materialize mu on every monomial of degree <= deg_max.
    pub fn solve_planar(&mut self, deg_max: usize) -> Result<MomentTable> {
        let mut entries = BTreeMap::new();
        for w in Self::word_basis(self.v.m, deg_max) {
            let s = self.moment(&w)?;
            entries.insert(vec![w], s);
        }
        Ok(MomentTable {
            genus: 0,
            arity: 1,
            entries,
        })
    }

    /// Materialize the tower for every genus in 1..=g_max and arity
    /// <= l_max on slot tuples of total degree <= deg_max (degree >= 1 per
    /// slot, canonical representatives only).
    pub fn solve_genus(
        &mut self,
        g_max: usize,
        l_max: usize,
        deg_max: usize,
    ) -> Result<Vec<MomentTable>> {
        let words: Vec<Monomial> = Self::word_basis(self.v.m, deg_max)
            .into_iter()
            .filter(|w| !w.is_one() && w.canonical_rotation() == *w)
            .collect();
        let mut out = Vec::new();
        for g in 1..=g_max {
            for arity in 1..=l_max {
                if g < Self::min_genus(arity) {
                    continue;
                }
                let mut entries = BTreeMap::new();
                let mut stack: Vec<Vec<Monomial>> = vec![Vec::new()];
                while let Some(tuple) = stack.pop() {
                    if tuple.len() == arity {
                        let s = self.tensor_moment(g, &tuple)?;
                        entries.insert(tuple, s);
                        continue;
                    }
                    let used: usize = tuple.iter().map(|w| w.degree()).sum();
                    for w in &words {
                        if let Some(last) = tuple.last() {
                            if w < last {
                                continue; // canonical tuples are sorted
                            }
                        }
                        if used + w.degree() <= deg_max {
                            let mut next = tuple.clone();
                            next.push(w.clone());
                            stack.push(next);
                        }
                    }
                }
                out.push(MomentTable {
                    genus: g,
                    arity,
                    entries,
                });
            }
        }
        Ok(out)
    }

    /// Residual of the hierarchy identity
    ///
    ///   I_g(Xi P (x) rest) = sum_{i,r} mu(D_i Pbar D_i P_r) I_{g-1}(rest \ r)
    ///                      + sum_{i,r} I_{g-1}(D_i Pbar D_i P_r (x) rest \ r)
    ///                      + sum_i I_g(∂_i D_i Pbar (x) rest)
    ///
    /// on the slots (P = slots[0], rest = slots[1..]); identically zero
    /// series when the tables are consistent. At genus l/2 with even arity
    /// only the first right-hand term survives (the limit equation); the
    /// other cases reproduce the odd limit equation and the full tower.
    pub fn limit_equation_residual(
        &mut self,
        g: usize,
        slots: &[Monomial],
    ) -> Result<TruncatedSeries> {
        assert!(!slots.is_empty(), "need at least the first slot");
        let p = &slots[0];
        assert!(p.degree() >= 1, "first slot must have positive degree");
        let rest: Vec<Monomial> = slots[1..].to_vec();
        let m = self.v.m;
        let p_poly = Polynomial::from_monomial(m, p.clone(), CRat::one());
        let p_bar = p_poly.degree_division();

        // left side: Xi P evaluated through the tower, slot-linearly
        // (constant terms of Xi P die in the slots)
        let xi_p = self.apply_xi_poly(&p_poly)?;
        let mut lhs = self.zero(self.k_order);
        for (w, s) in xi_p.terms {
            let mut slots_w = Vec::with_capacity(rest.len() + 1);
            slots_w.push(w);
            slots_w.extend(rest.iter().cloned());
            let t = self.tensor_at(g as isize, &slots_w, self.k_order)?;
            lhs = lhs.add(&s.mul(&t));
        }

        // right side
        let mut rhs = self.zero(self.k_order);
        for i in 1..=m as u8 {
            let di_pbar = cyclic_derivative(i, &p_bar);
            if di_pbar.is_zero() {
                continue;
            }
            for r in 0..rest.len() {
                let pr_poly = Polynomial::from_monomial(m, rest[r].clone(), CRat::one());
                let di_pr = cyclic_derivative(i, &pr_poly);
                if di_pr.is_zero() {
                    continue;
                }
                let prod = di_pbar.mul(&di_pr);
                let rest_minus: Vec<Monomial> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(x, _)| x != r)
                    .map(|(_, w)| w.clone())
                    .collect();
                let mu_prod = self.moment_poly(&prod)?;
                let tower_rest = self.tensor_at(g as isize - 1, &rest_minus, self.k_order)?;
                rhs = rhs.add(&mu_prod.mul(&tower_rest));
                rhs = rhs.add(&self.tensor_poly(g as isize - 1, &prod, &rest_minus)?);
            }
            // ∂_i D_i Pbar feeds two fresh slots
            let split = nc_derivative(i, &di_pbar);
            for ((left, right), c) in split.terms {
                let mut slots2 = Vec::with_capacity(rest.len() + 2);
                slots2.push(left);
                slots2.push(right);
                slots2.extend(rest.iter().cloned());
                let t = self.tensor_at(g as isize, &slots2, self.k_order)?;
                rhs = rhs.add(&t.scale(&c));
            }
        }
        Ok(lhs.sub(&rhs))
    }

    /// Xi P with this solver's planar moments.
    pub fn apply_xi_poly(&mut self, p: &Polynomial) -> Result<SeriesPolynomial> {
        let sp = SeriesPolynomial::from_polynomial(p, self.n_vars, self.k_order);
        let v = self.v.clone();
        let d_cap = self.d_cap;
        let mut provider = SolverMoments { solver: self };
        xi(&sp, &v, &mut provider, d_cap)
    }

    /// Residual of the minimal-genus factorization: for an odd number of
    /// slots and a potential index j,
    ///
    ///   I_{(l+1)/2}(P_1 (x) ... (x) P_l (x) q_j)
    ///     = sum_r I_1(P_r (x) q_j) I_{(l-1)/2}(... without P_r ...).
    pub fn two_vertex_residual(&mut self, slots: &[Monomial], j: usize) -> Result<TruncatedSeries> {
        let l = slots.len();
        assert!(l % 2 == 1, "odd arity required");
        let qj = self.v.monomials[j].clone();
        let mut all = slots.to_vec();
        all.push(qj.clone());
        let lhs = self.tensor_moment(l.div_ceil(2), &all)?;
        let mut rhs = self.zero(self.k_order);
        for r in 0..l {
            let pair = vec![slots[r].clone(), qj.clone()];
            let factor = self.tensor_moment(1, &pair)?;
            let rest: Vec<Monomial> = slots
                .iter()
                .enumerate()
                .filter(|&(x, _)| x != r)
                .map(|(_, w)| w.clone())
                .collect();
            let tail = self.tensor_at((l as isize - 1) / 2, &rest, self.k_order)?;
            rhs = rhs.add(&factor.mul(&tail));
        }
        Ok(lhs.sub(&rhs))
    }

    /// Growth diagnostic: max over arity-1 values on words of degree
    /// 1..=deg_max and over t-orders k of |coefficient|^(1/size), where
    /// size = deg(word) + sum_j k_j deg(q_j) counts the half-edges of the
    /// maps the coefficient enumerates. Finite, and roughly stable under
    /// cap increases exactly when the generating functions have bounded
    /// support; no constant from the theory is asserted.
    pub fn growth_rate_diagnostic(&mut self, g: usize, deg_max: usize) -> Result<f64> {
        let degs: Vec<usize> = self.v.monomials.iter().map(|q| q.degree()).collect();
        let mut best: f64 = 0.0;
        for w in Self::word_basis(self.v.m, deg_max) {
            if w.is_one() {
                continue;
            }
            let s = self.genus_moment(g, &w)?;
            for (k, c) in &s.terms {
                let mag = rat_to_f64(&c.norm1());
                if mag > 0.0 {
                    let size: usize = w.degree()
                        + k.0
                            .iter()
                            .zip(&degs)
                            .map(|(&kj, &d)| kj as usize * d)
                            .sum::<usize>();
                    best = best.max(mag.powf(1.0 / size as f64));
                }
            }
        }
        Ok(best)
    }
}

/// Planar-moment provider backed by a solver; panics on cap violations,
/// which callers rule out up front.
struct SolverMoments<'a> {
    solver: &'a mut Solver,
}

impl PlanarMoment for SolverMoments<'_> {
    fn n_vars(&self) -> usize {
        self.solver.n_vars
    }
    fn order(&self) -> u32 {
        self.solver.k_order
    }
    fn mu(&mut self, w: &Monomial) -> TruncatedSeries {
        self.solver.moment(w).expect("planar moment within caps")
    }
}

/// Formal multi-derivative of a family of series.
pub fn derivative_family(series: &[TruncatedSeries], j: &MultiIndex) -> Vec<TruncatedSeries> {
    series.iter().map(|s| s.derivative_multi(j)).collect()
}
