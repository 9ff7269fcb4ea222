use super::*;
use crate::ncpoly::xi::semicircle_moment;
use crate::scalar::rat;
use proptest::prelude::*;

fn w(letters: &[u8]) -> Monomial {
    Monomial(letters.to_vec())
}

fn quartic_potential() -> Potential {
    Potential::new(1, vec![w(&[1, 1, 1, 1])]).unwrap()
}

fn cross_potential() -> Potential {
    Potential::new(2, vec![w(&[1, 2, 1, 2])]).unwrap()
}

#[test]
fn loop_on_sphere() {
    // one star X1^2 with its unique pairing: V=1, E=1, F=2, g=0
    let d = GluingDiagram::new(&[w(&[1, 1])], vec![1, 0]);
    let s = genus_of_gluing(&d).unwrap();
    assert_eq!((s.vertices, s.edges, s.faces), (1, 1, 2));
    assert_eq!(s.genus_per_component, vec![0]);
    assert!(s.connected());
}

#[test]
fn crossing_pairing_is_a_torus() {
    // one star X^4, crossing pairing (h0<->h2, h1<->h3): F=1, chi=0, g=1
    let d = GluingDiagram::new(&[w(&[1, 1, 1, 1])], vec![2, 3, 0, 1]);
    let s = genus_of_gluing(&d).unwrap();
    assert_eq!(s.faces, 1);
    assert_eq!(s.genus_per_component, vec![1]);
}

#[test]
fn unpaired_and_color_mismatch_are_errors() {
    let d = GluingDiagram::new(&[w(&[1, 1])], vec![0, 1]); // fixed points
    assert!(matches!(
        genus_of_gluing(&d),
        Err(Error::UnpairedHalfEdge { .. })
    ));
    let d = GluingDiagram::new(&[w(&[1, 2])], vec![1, 0]);
    assert!(matches!(
        genus_of_gluing(&d),
        Err(Error::ColorMismatch { .. })
    ));
}

#[test]
fn one_quartic_star_splits_two_planar_one_torus() {
    let counts = count_gluings(&[w(&[1, 1, 1, 1])], 1000).unwrap();
    assert_eq!(counts.total(), 3);
    assert_eq!(counts.connected(0), 2);
    assert_eq!(counts.connected(1), 1);
}

#[test]
fn two_crossing_stars_genus_one_count() {
    // Two labeled stars of type X1X2X1X2. Of the 9 color-consistent
    // pairings: 1 is disconnected, 2 are connected planar, 6 are connected
    // of genus 1. The split is pinned by the exact Wick identity at N = 1:
    // E[a1^4 a2^4] = 9 = 1 + 2 + 6.
    let stars = vec![w(&[1, 2, 1, 2]), w(&[1, 2, 1, 2])];
    let counts = count_gluings(&stars, 1000).unwrap();
    assert_eq!(counts.total(), 9);
    assert_eq!(counts.connected(0), 2);
    assert_eq!(counts.connected(1), 6);
    // the genus-1 diagrams are pairwise distinct pairings
    let mut diagrams = Vec::new();
    enumerate_with(&stars, 1000, |pairing, comps, genus| {
        if comps == 1 && genus == 1 {
            diagrams.push(pairing.to_vec());
        }
    })
    .unwrap();
    assert_eq!(diagrams.len(), 6);
    diagrams.sort();
    diagrams.dedup();
    assert_eq!(diagrams.len(), 6);
}

#[test]
fn odd_star_has_no_gluing() {
    assert_eq!(count_gluings(&[w(&[1, 1, 1])], 1000).unwrap().total(), 0);
}

#[test]
fn rooted_counts_match_spec_examples() {
    let v = cross_potential();
    let k1 = MultiIndex(vec![1]);
    // root + one star of type X1X2X1X2, connected, genus 1 (see
    // two_crossing_stars_genus_one_count for the 9 = 1 + 2 + 6 split)
    assert_eq!(
        count_rooted(&w(&[1, 2, 1, 2]), &k1, 1, &v, 10_000).unwrap(),
        6
    );

    let v1 = quartic_potential();
    let k0 = MultiIndex(vec![0]);
    // Catalan C_3 = 5 planar pairings of a six-star
    assert_eq!(count_rooted(&w(&[1; 6]), &k0, 0, &v1, 10_000).unwrap(), 5);
    // one edge cannot make genus 1
    assert_eq!(count_rooted(&w(&[1, 1]), &k0, 1, &v1, 10_000).unwrap(), 0);
}

#[test]
fn closed_counts_match_spec_examples() {
    let v = quartic_potential();
    assert_eq!(count_closed(&MultiIndex(vec![1]), 0, &v, 1000).unwrap(), 2);
    assert_eq!(count_closed(&MultiIndex(vec![1]), 1, &v, 1000).unwrap(), 1);
    // empty map convention
    assert_eq!(count_closed(&MultiIndex(vec![0]), 0, &v, 1000).unwrap(), 0);
    // odd total degree per color
    let vodd = Potential::new(1, vec![w(&[1, 1, 1])]).unwrap();
    assert_eq!(
        count_closed(&MultiIndex(vec![1]), 0, &vodd, 1000).unwrap(),
        0
    );
}

#[test]
fn gue_moments() {
    assert_eq!(gue_moment_exact(&w(&[1, 1]), 1000).unwrap().coeffs, vec![1]);
    assert_eq!(
        gue_moment_exact(&w(&[1, 1, 1, 1]), 1000).unwrap().coeffs,
        vec![2, 1]
    );
    // colors cannot pair
    assert_eq!(
        gue_moment_exact(&w(&[1, 2]), 1000).unwrap().eval(5),
        rat(0, 1)
    );
    // X^4 at N: 2 + 1/N^2
    let m4 = gue_moment_exact(&w(&[1, 1, 1, 1]), 1000).unwrap();
    assert_eq!(m4.eval(8), rat(2 * 64 + 1, 64));
}

/// Catalan numbers by their own recurrence, an oracle independent of any
/// pairing enumeration.
fn catalan(p: usize) -> u64 {
    let mut c = vec![0u64; p + 1];
    c[0] = 1;
    for n in 1..=p {
        for i in 0..n {
            c[n] += c[i] * c[n - 1 - i];
        }
    }
    c[p]
}

#[test]
fn planar_one_star_counts_are_catalan() {
    for p in 0..=6 {
        let word = w(&vec![1u8; 2 * p]);
        let m = gue_moment_exact(&word, 200_000).unwrap();
        assert_eq!(m.coeffs[0], catalan(p), "Catalan mismatch at p={p}");
    }
}

#[test]
fn gue_total_is_double_factorial_per_color() {
    // coefficient sum equals prod_c (2 n_c - 1)!!
    let words: Vec<Vec<u8>> = vec![
        vec![1; 8],
        vec![1, 2, 1, 2],
        vec![1, 1, 2, 2, 1, 1],
        vec![1, 2, 2, 1, 2, 2, 1, 1],
    ];
    for letters in words {
        let m = gue_moment_exact(&w(&letters), 1_000_000).unwrap();
        let mut expect: u64 = 1;
        for c in 1..=2u8 {
            let n = letters.iter().filter(|&&x| x == c).count();
            let mut f = 1u64;
            let mut k = n as u64;
            while k > 1 {
                f *= k - 1;
                k -= 2;
            }
            expect *= f;
        }
        assert_eq!(m.pairing_total(), expect);
    }
}

#[test]
fn gue_planar_coefficient_matches_noncrossing_oracle() {
    // two independent routes to the same planar count
    let words: Vec<Vec<u8>> = vec![
        vec![1; 6],
        vec![1, 2, 2, 1],
        vec![1, 2, 1, 2],
        vec![1, 1, 2, 2, 2, 2, 1, 1],
        vec![2, 1, 1, 2, 1, 1],
    ];
    for letters in words {
        let m = gue_moment_exact(&w(&letters), 1_000_000).unwrap();
        assert_eq!(m.coeffs[0], semicircle_moment(&letters), "word {letters:?}");
    }
}

#[test]
fn partition_identity_and_genus_bound() {
    // sum over all gluings = prod (2n_c - 1)!!, and per-component genus obeys
    // 0 <= g <= (E - V + 1)/2
    let stars = vec![w(&[1, 1, 1, 1]), w(&[1, 1])];
    let mut total = 0u64;
    enumerate_with(&stars, 10_000, |pairing, _, _| {
        total += 1;
        let d = GluingDiagram::new(&stars, pairing.to_vec());
        let s = genus_of_gluing(&d).unwrap();
        for (members, &g) in s.components.iter().zip(&s.genus_per_component) {
            let e_c: usize = members
                .iter()
                .map(|&star| if star == 0 { 4 } else { 2 })
                .sum::<usize>()
                / 2;
            let bound = (e_c + 1).saturating_sub(members.len()) / 2;
            assert!(g <= bound, "genus {g} above bound {bound}");
        }
    })
    .unwrap();
    assert_eq!(total, (5 * 3)); // (2*3-1)!! = 15 pairings of six color-1 half-edges
}

#[test]
fn star_order_does_not_change_counts() {
    let a = vec![w(&[1, 1, 1, 1]), w(&[1, 2, 1, 2]), w(&[2, 2])];
    let b = vec![w(&[2, 2]), w(&[1, 1, 1, 1]), w(&[1, 2, 1, 2])];
    assert_eq!(
        count_gluings(&a, 100_000).unwrap(),
        count_gluings(&b, 100_000).unwrap()
    );
}

#[test]
fn parallel_partition_matches_sequential() {
    let stars = vec![w(&[1, 1, 1, 1]), w(&[1, 1, 1, 1]), w(&[1, 1])];
    let seq = count_gluings(&stars, 1_000_000).unwrap();
    for threads in [1, 2, 3, 7] {
        assert_eq!(
            count_gluings_parallel(&stars, 1_000_000, threads).unwrap(),
            seq
        );
    }
}

#[test]
fn budget_is_enforced() {
    let stars = vec![w(&[1; 12]), w(&[1; 12])];
    assert!(matches!(
        count_gluings(&stars, 100),
        Err(Error::BudgetExceeded { .. })
    ));
}

#[test]
fn planar_series_examples() {
    let v = quartic_potential();
    // order-0 term of mu(X^2) is the GUE second moment
    let s = planar_series(&w(&[1, 1]), &v, 2, 1_000_000).unwrap();
    assert_eq!(s.coeff(&MultiIndex(vec![0])), CRat::one());
    // order-1 coefficient is -M^(1)(X^2); the enumerator gives 8
    assert_eq!(
        count_rooted(&w(&[1, 1]), &MultiIndex(vec![1]), 0, &v, 10_000).unwrap(),
        8
    );
    assert_eq!(s.coeff(&MultiIndex(vec![1])), CRat::from_int(-8));

    // root 1: the constant series 1
    let vc = cross_potential();
    let s1 = planar_series(&Monomial::one(), &vc, 2, 1_000_000).unwrap();
    assert_eq!(s1, TruncatedSeries::one(1, 2));
}

#[test]
fn count_table_rows() {
    let v = quartic_potential();
    let table = CountTable::build(Some(&w(&[1, 1, 1, 1])), &v, 1, 1, 1_000_000).unwrap();
    // k = 0: the one-star gluings
    assert_eq!(table.counts[&(0, MultiIndex(vec![0]))], 2);
    assert_eq!(table.counts[&(1, MultiIndex(vec![0]))], 1);
    assert!(table.rooted && table.connected_only);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partition_identity_random(words in prop::collection::vec(
        prop::collection::vec(1u8..=2, 1..=4), 1..=3)) {
        let stars: Vec<Monomial> = words.iter().map(|v| Monomial(v.clone())).collect();
        let counts = count_gluings(&stars, 1_000_000).unwrap();
        let h_total: usize = words.iter().map(|v| v.len()).sum();
        let mut expect: u64 = 1;
        let mut ok = true;
        for c in 1..=2u8 {
            let n = words.iter().flatten().filter(|&&x| x == c).count();
            if n % 2 == 1 { ok = false; break; }
            let mut f = 1u64;
            let mut k = n as u64;
            while k > 1 { f *= k - 1; k -= 2; }
            expect *= f;
        }
        if !ok {
            prop_assert_eq!(counts.total(), 0);
        } else {
            prop_assert_eq!(counts.total(), expect);
            let edges = h_total / 2;
            for (&(g, _), &c) in &counts.by_genus_components {
                prop_assert!(c > 0);
                prop_assert!(g <= edges.div_ceil(2));
            }
        }
    }
}
