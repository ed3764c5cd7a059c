use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;

use super::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn set_from(n: u32, cells: &[u64]) -> GridSet {
    let mut c = cells.to_vec();
    c.sort_unstable();
    c.dedup();
    GridSet::unit(n, c).unwrap()
}

// Grid sets and generators

#[test]
fn discretise_separates_and_merges() {
    let d = 2f64.powi(-10);
    assert_eq!(discretise(&[1.0, 1.0 + d], 10).unwrap().len(), 2);
    assert_eq!(discretise(&[1.0, 1.0 + d / 4.0], 10).unwrap().len(), 1);
}

#[test]
fn cantor_matches_box_counting() {
    // Independent float oracle over all 2^10 depth-10 left endpoints.
    let mut oracle = HashSet::new();
    for mask in 0u32..1 << 10 {
        let x: f64 = (0..10).filter(|b| mask >> b & 1 == 1).map(|b| 2.0 * 3f64.powi(-(b + 1))).sum();
        oracle.insert(((1.0 + x) * 1024.0 + 1e-9).floor() as i64);
    }
    let c = cantor_set(10, 10).unwrap();
    assert_eq!(c.len(), oracle.len());
    // δ^{−log2/log3} ≈ 79 boxes of the ternary structure; misaligned dyadic
    // cells can see up to twice that.
    let estimate = 2f64.powf(10.0 * 2f64.ln() / 3f64.ln());
    assert!(c.len() as f64 >= estimate / 2.0 && c.len() as f64 <= 2.0 * estimate, "{}", c.len());
}

#[test]
fn digit_sets() {
    assert_eq!(digit_restricted_set(8, &(1..=8).collect::<Vec<_>>()).unwrap().len(), 256);
    let odd = free_positions(12, 0.5).unwrap();
    assert_eq!(odd, vec![1, 3, 5, 7, 9, 11]);
    let a = digit_restricted_set(12, &odd).unwrap();
    assert_eq!(a.len(), 64);
    assert!(sigma_report(&a, 0.5).frostman_constant <= 4.0);
    let single = digit_restricted_set(6, &[]).unwrap();
    assert_eq!(single.points(), vec![1.0]);
}

#[test]
fn random_frostman_contract() {
    let a = random_frostman_set(0.6, 14, 7).unwrap();
    let target = 2f64.powf(8.4);
    assert!(a.len() as f64 >= target / 2.0 && a.len() as f64 <= target * 2.0);
    assert!(sigma_report(&a, 0.6).pass);
    assert_eq!(a, random_frostman_set(0.6, 14, 7).unwrap());
    assert_eq!(random_frostman_set(1.0, 10, 3).unwrap(), GridSet::full(10).unwrap());
}

#[test]
fn ap_gp_contract() {
    let a = ap_gp_intersection_set(0.75, 16, 3).unwrap();
    assert!(sigma_report(&a, 0.5).pass);
    let bound = 2f64.powf(0.85 * 16.0);
    assert!(sumset_cover(&a, &a, Sign::Plus).unwrap().0 as f64 <= bound);
    assert!(productset_cover(&a, &a).unwrap() as f64 <= bound);
    assert_eq!(ap_gp_intersection_set(1.0, 10, 3).unwrap(), GridSet::full(10).unwrap());
    assert!(ap_gp_intersection_set(0.4, 10, 3).is_err());
}

#[test]
fn grid_file_round_trip() {
    let a = cantor_set(8, 10).unwrap();
    for rle in [false, true] {
        assert_eq!(GridSet::from_json(&a.to_json(rle)).unwrap(), a);
    }
    assert!(GridSet::from_json("{\"n\": 3}").is_err());
}

// Covering numbers

#[test]
fn cover_examples() {
    let ap = set_from(10, &(0..37).map(|k| 3 * k).collect::<Vec<_>>());
    assert_eq!(sumset_cover(&ap, &ap, Sign::Plus).unwrap().0, 2 * 37 - 1);
    let one = set_from(10, &[5]);
    assert_eq!(sumset_cover(&one, &one, Sign::Plus).unwrap().0, 1);
    assert_eq!(productset_cover(&one, &one).unwrap(), 1);
    assert_eq!(quotientset_cover(&one, &one).unwrap(), 1);
    assert!(matches!(
        sumset_cover(&one, &set_from(9, &[1]), Sign::Minus),
        Err(LabError::ScaleMismatch { .. })
    ));
}

#[test]
fn sumset_matches_brute_force() {
    let a = digit_restricted_set(12, &free_positions(12, 0.5).unwrap()).unwrap();
    for sign in [Sign::Plus, Sign::Minus] {
        let pts = a.points();
        let brute: BTreeSet<i64> = pts
            .iter()
            .flat_map(|x| pts.iter().map(move |y| match sign {
                Sign::Plus => ((x + y) * 4096.0).round() as i64,
                Sign::Minus => ((x - y) * 4096.0).round() as i64,
            }))
            .collect();
        let (count, set) = sumset_cover(&a, &a, sign).unwrap();
        assert_eq!(count, brute.len());
        assert_eq!(set.absolute().collect::<BTreeSet<_>>(), brute);
    }
}

#[test]
fn geometric_progression_has_small_product_set() {
    // 2^{k/m} rounded to a fine grid: the 2m − 1 exact products each spread
    // over at most three cells after rounding.
    let (m, n) = (16u32, 20u32);
    let pts: Vec<f64> = (0..m).map(|k| 2f64.powf(k as f64 / m as f64)).collect();
    let a = discretise(&pts, n).unwrap();
    assert_eq!(a.len(), m as usize);
    let p = productset_cover(&a, &a).unwrap();
    assert!(p <= 3 * (2 * m as usize - 1), "{p}");
    assert!(sumset_cover(&a, &a, Sign::Plus).unwrap().0 > 3 * m as usize);
}

// Frostman reports

#[test]
fn sigma_report_examples() {
    let full = GridSet::full(10).unwrap();
    let r = sigma_report(&full, 1.0);
    assert!(r.pass && r.frostman_constant <= 2.0 + 1e-12 && r.frostman_constant >= r.lower_bound);
    assert!(!sigma_report(&full, 0.5).dimension_ok);
}

// Measures

#[test]
fn measure_examples() {
    let a = set_from(4, &[0, 3, 7, 12]);
    let mu = uniform_measure(&a).unwrap();
    assert!(close(dyadic_entropy(&mu, 4).unwrap(), 2.0, 1e-12));
    assert!(dyadic_entropy(&mu, 5).is_err());
    let pa = point_mass(16 + 3, 4);
    let pb = point_mass(16 + 5, 4);
    let s = convolve(&pa, &pb, Sign::Plus, 2).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s.indices()[0], (16 + 3 + 16 + 5) << 2);
    let pr = multiply_measures(&pa, &pb, 2).unwrap();
    assert_eq!(pr.indices(), &[(19 * 21 * 4) >> 4]);
    let q = quotient_measures(&pa, &pb, 2).unwrap();
    assert_eq!(q.indices(), &[(19 << 6) / 21]);
    let two = uniform_measure(&set_from(4, &[0, 1])).unwrap();
    let tri = convolve(&two, &two, Sign::Plus, 0).unwrap();
    let w = tri.exact_masses().unwrap();
    let quarter = |k: i64| crate::Rational::new(k.into(), 4.into());
    assert_eq!(w, vec![quarter(1), quarter(2), quarter(1)]);
}

#[test]
fn full_grid_profiles_and_frostman() {
    let mu = uniform_measure(&GridSet::full(10).unwrap()).unwrap();
    assert!(entropy_dimension_profile(&mu, 1..=10).iter().all(|(_, v)| close(*v, 1.0, 1e-12)));
    assert!(frostman_constant(&mu, 1.0) <= 2.0 + 1e-12);
    let pm = point_mass(1 << 10, 10);
    assert!(close(frostman_constant(&pm, 0.5), 2f64.powf(5.0), 1e-9));
    assert!(entropy_dimension_profile(&pm, 1..=10).iter().all(|(_, v)| *v == 0.0));
    let half = uniform_measure(&digit_restricted_set(16, &free_positions(16, 0.5).unwrap()).unwrap()).unwrap();
    for (k, v) in entropy_dimension_profile(&half, 8..=16) {
        assert!(close(v, 0.5, 0.1), "k={k} v={v}");
    }
}

#[test]
fn restriction_examples() {
    let a = GridSet::full(6).unwrap();
    let mu = uniform_measure(&a).unwrap();
    let all: BTreeSet<i64> = a.absolute().collect();
    assert_eq!(restrict_measure(&mu, &all).unwrap(), mu);
    let half: BTreeSet<i64> = a.absolute().step_by(2).collect();
    let r = restrict_measure(&mu, &half).unwrap();
    assert_eq!(r.len(), 32);
    assert!(close(dyadic_entropy(&r, 6).unwrap(), 5.0, 1e-12));
    assert!(matches!(restrict_measure(&mu, &BTreeSet::new()), Err(LabError::EmptyRestriction(_))));
}

#[test]
fn sum_entropy_does_not_collapse() {
    for fam in [SetFamily::Full, SetFamily::Cantor, SetFamily::Digit { sigma: 0.5 }] {
        let mu = uniform_measure(&fam.generate(10).unwrap()).unwrap();
        let s = convolve(&mu, &mu, Sign::Plus, 3).unwrap();
        assert!(dyadic_entropy(&s, 10).unwrap() >= dyadic_entropy(&mu, 10).unwrap() - 1.0);
    }
}

// Slope inequalities

#[test]
fn slope_examples() {
    let full = GridSet::full(8).unwrap();
    let c = check_discretised_slope_inequality(&full, 2, DEFAULT_GUARD).unwrap();
    assert!(c.implied_log_k.is_finite() && c.implied_log_k <= 6.0, "{}", c.implied_log_k);
    assert!(close(c.lhs - c.rhs, c.implied_log_k, 1e-12));

    let single = set_from(8, &[40]);
    for v in [2, 4] {
        let c = check_discretised_slope_inequality(&single, v, DEFAULT_GUARD).unwrap();
        assert!(c.left.iter().chain(&c.right).all(|t| t.value == 0.0));
        assert!(c.implied_log_k <= 0.0);
    }
    let slope = slope_measure(&uniform_measure(&single).unwrap(), SlopeVariant::Sum, 3).unwrap();
    assert_eq!(slope.indices(), &[1 << 11]);

    let mu = uniform_measure(&full).unwrap();
    let s = slope_measure(&mu, SlopeVariant::Sum, 3).unwrap();
    assert!(dyadic_entropy(&s, 8).unwrap() >= 8.0 - 2.0);
    let (lo, hi) = s.interval();
    assert!(lo >= 0.5 - 1e-12 && hi <= 2.0 + 1e-12);
}

#[test]
fn difference_variants_need_both_windows() {
    // Odd-position digit sets have second bit 0, so nothing lies in [7/4, 2].
    let a = digit_restricted_set(10, &free_positions(10, 0.5).unwrap()).unwrap();
    for v in [1, 3] {
        assert!(matches!(
            check_discretised_slope_inequality(&a, v, 3),
            Err(LabError::EmptyRestriction(_))
        ));
    }
    let full = GridSet::full(8).unwrap();
    for v in [1, 3] {
        let c = check_discretised_slope_inequality(&full, v, 3).unwrap();
        assert!(c.implied_log_k.is_finite());
    }
    assert!(check_discretised_slope_inequality(&full, 5, 3).is_err());
}

#[test]
fn slope_sampling_is_flagged_and_close() {
    let mu = uniform_measure(&GridSet::full(7).unwrap()).unwrap();
    let sum = convolve(&mu, &mu, Sign::Plus, 3).unwrap();
    let exact = super::slope::quotient_at(&sum, &sum, 10).unwrap();
    let sampled = super::slope::sampled_quotient(&sum, &sum, 10).unwrap();
    assert!(!exact.is_approximate() && sampled.is_approximate());
    let (he, hs) = (dyadic_entropy(&exact, 7).unwrap(), dyadic_entropy(&sampled, 7).unwrap());
    assert!(close(he, hs, 0.05), "{he} {hs}");
}

// Experiments

#[test]
fn theorem_experiments_on_half_dimensional_digits() {
    let rows = theorem_a_experiment(&SetFamily::Digit { sigma: 0.5 }, &[8, 9, 10, 11, 12], &ExperimentOptions::default()).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![8, 9, 10, 11, 12]);
    for r in &rows {
        assert!(r.c_hat > 0.0 && r.theorem_b_pass && !r.degenerate);
        let lg = |x: usize| (x as f64).log2();
        let oracle = (2.0 * lg(r.n_sum.min(r.n_diff)) + 4.0 * lg(r.n_prod) - 5.0 * lg(r.size)) / r.n as f64;
        assert!(close(r.c_hat, oracle, 1e-12));
    }
    let single = scale_row(&set_from(8, &[3]), &ExperimentOptions::default()).unwrap();
    assert!(single.degenerate && single.theorem_b_pass);
}

#[test]
fn full_grid_product_set_is_about_two_lengths() {
    let r = scale_row(&GridSet::full(10).unwrap(), &ExperimentOptions::default()).unwrap();
    assert_eq!(r.n_sum, 2 * 1024 - 1);
    assert!(r.n_prod >= 2 * 1024 && r.n_prod <= 3 * 1024, "{}", r.n_prod);
}

// Properties

fn arb_set(n: u32) -> impl Strategy<Value = GridSet> {
    prop::collection::btree_set(0u64..(1 << n), 1..40).prop_map(move |s| GridSet::unit(n, s.into_iter().collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn covering_is_monotone(b in arb_set(9), c in arb_set(9), keep in prop::collection::vec(any::<bool>(), 40)) {
        let sub: Vec<u64> = b.cells().iter().zip(keep.iter().cycle()).filter(|(_, k)| **k).map(|(x, _)| *x).collect();
        prop_assume!(!sub.is_empty());
        let a = GridSet::unit(9, sub).unwrap();
        prop_assert!(a.is_subset_of(&b));
        for sign in [Sign::Plus, Sign::Minus] {
            prop_assert!(sumset_cover(&a, &c, sign).unwrap().0 <= sumset_cover(&b, &c, sign).unwrap().0);
        }
        prop_assert!(productset_cover(&a, &c).unwrap() <= productset_cover(&b, &c).unwrap());
        prop_assert!(quotientset_cover(&a, &c).unwrap() <= quotientset_cover(&b, &c).unwrap());
    }

    #[test]
    fn arithmetic_progressions_are_exact(start in 0u64..64, step in 1u64..8, len in 1u64..40) {
        let a = GridSet::unit(10, (0..len).map(|k| start + k * step).collect()).unwrap();
        prop_assert_eq!(sumset_cover(&a, &a, Sign::Plus).unwrap().0 as u64, 2 * len - 1);
    }

    #[test]
    fn products_keep_half_the_points(a in arb_set(10), b in arb_set(10)) {
        prop_assert!(productset_cover(&a, &b).unwrap() >= a.len().div_ceil(2));
    }

    #[test]
    fn frostman_bounds_entropy(seed in 0u64..1000, sigma in 0.2f64..1.0, n in 4u32..12, s in 0.1f64..1.0) {
        let mu = uniform_measure(&random_frostman_set(sigma, n, seed).unwrap()).unwrap();
        let h = dyadic_entropy(&mu, n).unwrap();
        prop_assert!(h >= s * n as f64 - frostman_constant(&mu, s).log2() - 1e-9);
    }

    #[test]
    fn restriction_property_holds(weights in prop::collection::vec(1u128..20, 6..40), drop in 0usize..3) {
        let total: u128 = weights.iter().sum();
        let cells: Vec<(i64, u128)> = weights.iter().enumerate().map(|(i, w)| (64 + i as i64, *w)).collect();
        let mu = super::measure::from_counts(6, cells, total);
        let y: BTreeSet<i64> = mu.indices().iter().copied().skip(drop).collect();
        if let Some(ok) = restriction_property(&mu, &y, 0.1) {
            prop_assert!(ok);
        }
    }

    #[test]
    fn exact_mass_is_conserved(a in arb_set(7), b in arb_set(7), g in 0u32..4) {
        let (mu, nu) = (uniform_measure(&a).unwrap(), uniform_measure(&b).unwrap());
        let one = crate::Rational::from_integer(1.into());
        for m in [
            convolve(&mu, &nu, Sign::Plus, g).unwrap(),
            convolve(&mu, &nu, Sign::Minus, g).unwrap(),
            multiply_measures(&mu, &nu, g).unwrap(),
            quotient_measures(&mu, &nu, g).unwrap(),
        ] {
            prop_assert_eq!(m.exact_total().unwrap(), one.clone());
        }
    }

    #[test]
    fn coarsening_never_adds_entropy(a in arb_set(8), k in 0u32..8) {
        let mu = uniform_measure(&a).unwrap();
        prop_assert!(dyadic_entropy(&mu, k).unwrap() <= dyadic_entropy(&mu, 8).unwrap() + 1e-12);
    }
}

#[test]
fn slope_entropy_is_guard_stable() {
    let family = [
        GridSet::full(8).unwrap(),
        digit_restricted_set(10, &free_positions(10, 0.5).unwrap()).unwrap(),
        cantor_set(10, 10).unwrap(),
        random_frostman_set(0.6, 10, 7).unwrap(),
    ];
    for a in &family {
        let mu = uniform_measure(a).unwrap();
        let h = |g| dyadic_entropy(&slope_measure(&mu, SlopeVariant::Sum, g).unwrap(), a.n()).unwrap();
        let (h2, h4) = (h(2), h(4));
        assert!((h2 - h4).abs() <= 1.0, "n={} {h2} {h4}", a.n());
    }
}

#[test]
fn uniform_measure_inherits_counting_constant() {
    for a in [
        digit_restricted_set(12, &free_positions(12, 0.5).unwrap()).unwrap(),
        random_frostman_set(0.6, 12, 7).unwrap(),
    ] {
        let sigma = sigma_report(&a, 0.5);
        let c = frostman_constant(&uniform_measure(&a).unwrap(), 0.5);
        assert!(c <= 4.0 * sigma.frostman_constant + 1e-12);
    }
}
