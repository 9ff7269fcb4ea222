//! Exact enumeration of edge-colored maps built by gluing stars.
//!
//! A star is a vertex with ordered colored half-edges, the first one
//! distinguished; stars are in bijection with monomials. A gluing diagram is
//! a set of labeled stars plus a color-respecting perfect matching of all
//! half-edges. Faces are the cycles of sigma∘alpha, where sigma rotates each
//! star's half-edges in word (clockwise) order and alpha is the pairing;
//! the genus of each connected component comes from Euler's formula
//! V - E + F = 2 - 2g.
//!
//! Enumeration is exhaustive backtracking over color-respecting matchings:
//! the lowest-index unpaired half-edge is matched against every admissible
//! partner, which visits each perfect matching exactly once, in
//! lexicographic order of half-edge indices. Counts are exact integers.
//! Stars are labeled; the k! division of the generating functions happens
//! in series space, never here.

use crate::error::{Error, Result};
use crate::ncpoly::{Monomial, Potential};
use crate::scalar::{rat_u64, CRat, Rat};
use crate::series::{MultiIndex, TruncatedSeries};
use num_traits::One;
use std::collections::BTreeMap;

/// Default cap on the number of pairings an enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 200_000_000;

/// A labeled star. The half-edge colors read in order equal the letters of
/// `star_type`; the first half-edge is the distinguished one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Star {
    pub star_type: Monomial,
    pub label: usize,
}

/// A total, color-respecting gluing of a list of stars. `pairing[h]` is the
/// partner of half-edge `h` in the global half-edge numbering (stars
/// concatenated in order, each star's half-edges in word order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingDiagram {
    pub stars: Vec<Star>,
    pub pairing: Vec<usize>,
}

impl GluingDiagram {
    pub fn new(star_types: &[Monomial], pairing: Vec<usize>) -> Self {
        GluingDiagram {
            stars: star_types
                .iter()
                .enumerate()
                .map(|(label, w)| Star {
                    star_type: w.clone(),
                    label,
                })
                .collect(),
            pairing,
        }
    }
}

/// Euler data of a gluing, per connected component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceData {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Star labels grouped by connected component.
    pub components: Vec<Vec<usize>>,
    pub genus_per_component: Vec<usize>,
}

impl SurfaceData {
    pub fn connected(&self) -> bool {
        self.components.len() == 1
    }

    pub fn total_genus(&self) -> usize {
        self.genus_per_component.iter().sum()
    }
}

/// Flattened half-edge structure for a list of star types.
struct HalfEdges {
    colors: Vec<u8>,
    star_of: Vec<usize>,
    sigma: Vec<usize>,
    n_stars: usize,
}

impl HalfEdges {
    fn build(stars: &[Monomial]) -> HalfEdges {
        let mut colors = Vec::new();
        let mut star_of = Vec::new();
        let mut sigma = Vec::new();
        for (s, w) in stars.iter().enumerate() {
            let base = colors.len();
            let d = w.degree();
            for (i, &c) in w.0.iter().enumerate() {
                colors.push(c);
                star_of.push(s);
                sigma.push(base + (i + 1) % d);
            }
        }
        HalfEdges {
            colors,
            star_of,
            sigma,
            n_stars: stars.len(),
        }
    }

    fn len(&self) -> usize {
        self.colors.len()
    }

    /// prod over colors of (2n_c - 1)!!, the number of color-consistent
    /// pairings; None signals odd parity in some color.
    fn pairing_count(&self) -> Option<u128> {
        let mut per_color: BTreeMap<u8, usize> = BTreeMap::new();
        for &c in &self.colors {
            *per_color.entry(c).or_insert(0) += 1;
        }
        let mut total: u128 = 1;
        for (_, n) in per_color {
            if n % 2 == 1 {
                return None;
            }
            let mut f: u128 = 1;
            let mut k = n as u128;
            while k > 1 {
                f = f.saturating_mul(k - 1);
                k -= 2;
            }
            total = total.saturating_mul(f);
        }
        Some(total)
    }
}

/// Scratch space for the per-leaf Euler computation.
struct Scratch {
    dsu: Vec<usize>,
    visited: Vec<bool>,
    edges_per: Vec<usize>,
    faces_per: Vec<usize>,
    stars_per: Vec<usize>,
}

impl Scratch {
    fn new(h: &HalfEdges) -> Scratch {
        Scratch {
            dsu: vec![0; h.n_stars],
            visited: vec![false; h.len()],
            edges_per: vec![0; h.n_stars],
            faces_per: vec![0; h.n_stars],
            stars_per: vec![0; h.n_stars],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.dsu[x] != x {
            self.dsu[x] = self.dsu[self.dsu[x]];
            x = self.dsu[x];
        }
        x
    }

    /// (number of components, total genus) of a total gluing.
    fn summarize(&mut self, h: &HalfEdges, pairing: &[usize]) -> (usize, usize) {
        for s in 0..h.n_stars {
            self.dsu[s] = s;
            self.edges_per[s] = 0;
            self.faces_per[s] = 0;
            self.stars_per[s] = 0;
        }
        for e in 0..h.len() {
            self.visited[e] = false;
        }
        for a in 0..h.len() {
            let b = pairing[a];
            if a < b {
                let (ra, rb) = (self.find(h.star_of[a]), self.find(h.star_of[b]));
                if ra != rb {
                    self.dsu[ra] = rb;
                }
            }
        }
        // faces: cycles of sigma∘alpha, attributed to their component
        for start in 0..h.len() {
            if self.visited[start] {
                continue;
            }
            let root = self.find(h.star_of[start]);
            self.faces_per[root] += 1;
            let mut cur = start;
            while !self.visited[cur] {
                self.visited[cur] = true;
                cur = h.sigma[pairing[cur]];
            }
        }
        for a in 0..h.len() {
            if a < pairing[a] {
                let root = self.find(h.star_of[a]);
                self.edges_per[root] += 1;
            }
        }
        for s in 0..h.n_stars {
            let root = self.find(s);
            self.stars_per[root] += 1;
        }
        let mut components = 0;
        let mut genus = 0;
        for s in 0..h.n_stars {
            if self.find(s) != s {
                continue;
            }
            components += 1;
            let v = self.stars_per[s];
            let e = self.edges_per[s];
            // a component with no edges is a lone vertex: one face on a sphere
            let f = if e == 0 { 1 } else { self.faces_per[s] };
            let chi = v as isize - e as isize + f as isize;
            debug_assert!(
                chi <= 2 && (2 - chi) % 2 == 0,
                "Euler characteristic must be even and <= 2"
            );
            genus += ((2 - chi) / 2) as usize;
        }
        (components, genus)
    }
}

/// Full Euler data for one explicit gluing; validates the pairing.
pub fn genus_of_gluing(d: &GluingDiagram) -> Result<SurfaceData> {
    let types: Vec<Monomial> = d.stars.iter().map(|s| s.star_type.clone()).collect();
    let h = HalfEdges::build(&types);
    if d.pairing.len() != h.len() {
        return Err(Error::UnpairedHalfEdge {
            half_edge: d.pairing.len().min(h.len()),
        });
    }
    for a in 0..h.len() {
        let b = d.pairing[a];
        if b >= h.len() || d.pairing[b] != a || a == b {
            return Err(Error::UnpairedHalfEdge { half_edge: a });
        }
        if h.colors[a] != h.colors[b] {
            return Err(Error::ColorMismatch { a, b });
        }
    }
    let mut scratch = Scratch::new(&h);
    scratch.summarize(&h, &d.pairing);
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in 0..h.n_stars {
        let root = scratch.find(s);
        groups.entry(root).or_default().push(s);
    }
    let mut components = Vec::new();
    let mut genus_per_component = Vec::new();
    let mut total_faces = 0;
    for (root, members) in groups {
        let v = members.len();
        let e = scratch.edges_per[root];
        let f = if e == 0 { 1 } else { scratch.faces_per[root] };
        total_faces += f;
        let chi = v as isize - e as isize + f as isize;
        genus_per_component.push(((2 - chi) / 2) as usize);
        components.push(members);
    }
    Ok(SurfaceData {
        vertices: h.n_stars,
        edges: h.len() / 2,
        faces: total_faces,
        components,
        genus_per_component,
    })
}

/// Exhaustively enumerate all color-respecting total gluings of `stars`,
/// calling `visit(pairing, components, total_genus)` once per gluing, in
/// lexicographic order of half-edge partners. Returns the number visited
/// (zero when some color has odd parity; one empty gluing when there are no
/// half-edges at all).
pub fn enumerate_with<F: FnMut(&[usize], usize, usize)>(
    stars: &[Monomial],
    budget: u64,
    mut visit: F,
) -> Result<u64> {
    let h = HalfEdges::build(stars);
    let Some(estimate) = h.pairing_count() else {
        return Ok(0);
    };
    if estimate > budget as u128 {
        return Err(Error::BudgetExceeded {
            estimate,
            budget: budget as u128,
        });
    }
    let mut pairing = vec![usize::MAX; h.len()];
    let mut scratch = Scratch::new(&h);
    let mut visited: u64 = 0;
    backtrack(&h, &mut pairing, 0, &mut scratch, &mut visited, &mut visit);
    Ok(visited)
}

fn backtrack<F: FnMut(&[usize], usize, usize)>(
    h: &HalfEdges,
    pairing: &mut Vec<usize>,
    mut lo: usize,
    scratch: &mut Scratch,
    visited: &mut u64,
    visit: &mut F,
) {
    while lo < h.len() && pairing[lo] != usize::MAX {
        lo += 1;
    }
    if lo == h.len() {
        let (components, genus) = scratch.summarize(h, pairing);
        *visited += 1;
        visit(pairing, components, genus);
        return;
    }
    for b in lo + 1..h.len() {
        if pairing[b] == usize::MAX && h.colors[b] == h.colors[lo] {
            pairing[lo] = b;
            pairing[b] = lo;
            backtrack(h, pairing, lo + 1, scratch, visited, visit);
            pairing[lo] = usize::MAX;
            pairing[b] = usize::MAX;
        }
    }
}

/// Like [`enumerate_with`], but only descends into gluings where half-edge 0
/// is paired to `first_partner`. Partitioning the search on this choice and
/// summing reproduces the full counts exactly, whatever the partition.
pub fn enumerate_partition_with<F: FnMut(&[usize], usize, usize)>(
    stars: &[Monomial],
    first_partner: usize,
    budget: u64,
    mut visit: F,
) -> Result<u64> {
    let h = HalfEdges::build(stars);
    if h.len() == 0 {
        return Ok(0);
    }
    let Some(estimate) = h.pairing_count() else {
        return Ok(0);
    };
    if estimate > budget as u128 {
        return Err(Error::BudgetExceeded {
            estimate,
            budget: budget as u128,
        });
    }
    if first_partner == 0 || first_partner >= h.len() || h.colors[first_partner] != h.colors[0] {
        return Ok(0);
    }
    let mut pairing = vec![usize::MAX; h.len()];
    pairing[0] = first_partner;
    pairing[first_partner] = 0;
    let mut scratch = Scratch::new(&h);
    let mut visited: u64 = 0;
    backtrack(&h, &mut pairing, 1, &mut scratch, &mut visited, &mut visit);
    Ok(visited)
}

/// Counts of gluings indexed by (total genus, number of components).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GluingCounts {
    pub by_genus_components: BTreeMap<(usize, usize), u64>,
}

impl GluingCounts {
    pub fn total(&self) -> u64 {
        self.by_genus_components.values().sum()
    }

    pub fn connected(&self, genus: usize) -> u64 {
        self.by_genus_components
            .get(&(genus, 1))
            .copied()
            .unwrap_or(0)
    }

    pub fn merge(&mut self, other: &GluingCounts) {
        for (k, v) in &other.by_genus_components {
            *self.by_genus_components.entry(*k).or_insert(0) += v;
        }
    }
}

/// Count all gluings of `stars` by (genus, components).
pub fn count_gluings(stars: &[Monomial], budget: u64) -> Result<GluingCounts> {
    let mut counts = GluingCounts::default();
    enumerate_with(stars, budget, |_, components, genus| {
        *counts
            .by_genus_components
            .entry((genus, components))
            .or_insert(0) += 1;
    })?;
    Ok(counts)
}

/// Same tally as [`count_gluings`], computed by partitioning the search tree
/// on the partner of half-edge 0 and running the branches on `threads`
/// OS threads. The reduction is integer addition, so the result is identical
/// to the sequential one for any thread count.
pub fn count_gluings_parallel(
    stars: &[Monomial],
    budget: u64,
    threads: usize,
) -> Result<GluingCounts> {
    let h = HalfEdges::build(stars);
    if h.len() == 0 {
        return count_gluings(stars, budget);
    }
    let partners: Vec<usize> = (1..h.len())
        .filter(|&b| h.colors[b] == h.colors[0])
        .collect();
    if partners.is_empty() {
        return Ok(GluingCounts::default());
    }
    let threads = threads.max(1);
    let chunks: Vec<Vec<usize>> = (0..threads)
        .map(|t| partners.iter().copied().skip(t).step_by(threads).collect())
        .collect();
    let results: Vec<Result<GluingCounts>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                scope.spawn(move || {
                    let mut counts = GluingCounts::default();
                    for &b in chunk {
                        enumerate_partition_with(stars, b, budget, |_, components, genus| {
                            *counts
                                .by_genus_components
                                .entry((genus, components))
                                .or_insert(0) += 1;
                        })?;
                    }
                    Ok(counts)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|j| j.join().expect("enumeration thread panicked"))
            .collect()
    });
    let mut total = GluingCounts::default();
    for r in results {
        total.merge(&r?);
    }
    Ok(total)
}

/// Star list for an optional root `p` plus `k_i` labeled stars per
/// potential type.
pub fn instantiate_stars(p: Option<&Monomial>, k: &MultiIndex, v: &Potential) -> Vec<Monomial> {
    let mut stars = Vec::new();
    if let Some(p) = p {
        stars.push(p.clone());
    }
    for (j, q) in v.monomials.iter().enumerate() {
        for _ in 0..k.0[j] {
            stars.push(q.clone());
        }
    }
    stars
}

/// Number of connected gluings of one root star of type `p` and `k_i`
/// labeled stars of type `q_i` with total genus `g`.
pub fn count_rooted(
    p: &Monomial,
    k: &MultiIndex,
    g: usize,
    v: &Potential,
    budget: u64,
) -> Result<u64> {
    let stars = instantiate_stars(Some(p), k, v);
    Ok(count_gluings(&stars, budget)?.connected(g))
}

/// Number of connected gluings of the `k_i` labeled stars alone (no root)
/// with total genus `g`. The empty map is not counted: k = 0 gives 0.
pub fn count_closed(k: &MultiIndex, g: usize, v: &Potential, budget: u64) -> Result<u64> {
    if k.total() == 0 {
        return Ok(0);
    }
    let stars = instantiate_stars(None, k, v);
    Ok(count_gluings(&stars, budget)?.connected(g))
}

/// Connected-count table as the CLI reports it: (genus, k) -> count, for one
/// optional root type.
#[derive(Clone, Debug, Default)]
pub struct CountTable {
    pub connected_only: bool,
    pub rooted: bool,
    pub counts: BTreeMap<(usize, MultiIndex), u64>,
}

impl CountTable {
    pub fn build(
        root: Option<&Monomial>,
        v: &Potential,
        g_max: usize,
        k_max: u32,
        budget: u64,
    ) -> Result<CountTable> {
        let mut table = CountTable {
            connected_only: true,
            rooted: root.is_some(),
            counts: BTreeMap::new(),
        };
        for k in MultiIndex::all_up_to(v.n_terms(), k_max) {
            if root.is_none() && k.total() == 0 {
                continue;
            }
            let stars = instantiate_stars(root, &k, v);
            let counts = count_gluings(&stars, budget)?;
            for g in 0..=g_max {
                table.counts.insert((g, k.clone()), counts.connected(g));
            }
        }
        Ok(table)
    }
}

/// Exact GUE moment of a word as a polynomial in 1/N^2:
/// `coeffs[g]` counts the genus-g gluings of the single star.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GueMoment {
    pub coeffs: Vec<u64>,
}

impl GueMoment {
    /// Value at a concrete matrix size N, exactly.
    pub fn eval(&self, n: u64) -> Rat {
        let n2 = rat_u64(n * n);
        let mut acc = Rat::from_integer(0.into());
        let mut pow = Rat::one();
        for &c in &self.coeffs {
            acc += rat_u64(c) / pow.clone();
            pow *= &n2;
        }
        acc
    }

    pub fn eval_f64(&self, n: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(g, &c)| c as f64 / n.powi(2 * g as i32))
            .sum()
    }

    /// Total number of pairings, i.e. the value at N = 1.
    pub fn pairing_total(&self) -> u64 {
        self.coeffs.iter().sum()
    }
}

/// mu^N(1/N tr A_{i1}...A_{ip}) = sum_g N^{-2g} (genus-g one-star gluings),
/// computed by exhausting the Wick pairings of a single star.
pub fn gue_moment_exact(word: &Monomial, budget: u64) -> Result<GueMoment> {
    if word.is_one() {
        return Ok(GueMoment { coeffs: vec![1] });
    }
    let stars = vec![word.clone()];
    let counts = count_gluings(&stars, budget)?;
    let g_max = counts
        .by_genus_components
        .keys()
        .map(|&(g, _)| g)
        .max()
        .unwrap_or(0);
    let mut coeffs = vec![0u64; g_max + 1];
    for (&(g, _), &c) in &counts.by_genus_components {
        coeffs[g] += c;
    }
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
        coeffs.pop();
    }
    Ok(GueMoment { coeffs })
}

/// Generating series of connected genus-g rooted maps,
/// sum over |k| <= K of (-t)^k / k! * count(P, k, g), as an exact series.
pub fn rooted_series(
    p: &Monomial,
    v: &Potential,
    g: usize,
    k_order: u32,
    budget: u64,
) -> Result<TruncatedSeries> {
    let n = v.n_terms();
    let mut series = TruncatedSeries::zero(n, k_order);
    for k in MultiIndex::all_up_to(n, k_order) {
        let count = count_rooted(p, &k, g, v, budget)?;
        if count == 0 {
            continue;
        }
        let sign = if k.total() % 2 == 0 { 1 } else { -1 };
        let coeff = CRat::from_rat(rat_u64(count) * Rat::from_integer(sign.into()) / k.factorial());
        series.set_coeff(k, coeff);
    }
    Ok(series)
}

/// The planar generating series mu_t(P) to order K (genus 0).
pub fn planar_series(
    p: &Monomial,
    v: &Potential,
    k_order: u32,
    budget: u64,
) -> Result<TruncatedSeries> {
    rooted_series(p, v, 0, k_order, budget)
}

#[cfg(test)]
mod tests;
