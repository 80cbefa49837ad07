mod common;

use common::{c, scan_jplus_zeros};
use num_complex::Complex64;
use proptest::prelude::*;
use shellres::expansions::{error_norms, reconstruct_continuum, regulator, ExpansionMode, KGrid, TestFunction};
use shellres::gamow::{gamow_state, schrodinger_residual};
use shellres::green::{g0, g_total, wronskian, Propagation};
use shellres::jost::{match_coeffs, s_matrix};
use shellres::poles::{count_zeros, find_resonances, SearchRegion};
use shellres::{PotentialSpec, WaveNumber};

fn shell() -> impl Strategy<Value = PotentialSpec> {
    (-15.0..25.0f64, 0.2..1.5f64, 0.2..1.5f64, 0.5..2.0f64)
        .prop_map(|(v0, a, width, scale)| PotentialSpec::new(v0, a, a + width, scale).unwrap())
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_function_is_symmetric(pot in shell(), r in 0.01..4.0f64, s in 0.01..4.0f64, re in 0.3..6.0f64, im in -0.5..0.5f64) {
        let q = WaveNumber::new(re, im);
        prop_assume!(match_coeffs(q, &pot).unwrap().jplus.norm() > 1e-6);
        let g = g_total(r, s, q, &pot).unwrap();
        let h = g_total(s, r, q, &pot).unwrap();
        prop_assert!((g - h).norm() <= 1e-12 * g.norm().max(1.0));
    }

    #[test]
    fn free_propagators_conjugate_on_real_axis(r in 0.0..5.0f64, s in 0.0..5.0f64, k in 0.05..20.0f64) {
        let pot = PotentialSpec::reference();
        let ret = g0(r, s, WaveNumber::real(k), &pot, Propagation::Retarded).unwrap();
        let adv = g0(r, s, WaveNumber::real(k), &pot, Propagation::Advanced).unwrap();
        prop_assert!((ret.conj() - adv).norm() <= 1e-14 * ret.norm().max(1.0));
    }

    #[test]
    fn wronskian_is_constant(pot in shell(), r in 0.01..5.0f64, re in 0.3..6.0f64, im in -1.0..1.0f64) {
        let q = WaveNumber::new(re, im);
        let m = match_coeffs(q, &pot).unwrap();
        let w = wronskian(r, q, &pot).unwrap();
        let want = -q.0 * m.jplus;
        prop_assert!((w - want).norm() <= 1e-10 * want.norm().max(m.jminus.norm() * q.0.norm()));
    }

    #[test]
    fn regular_solution_is_c1_at_the_edges(pot in shell(), re in -8.0..8.0f64, im in -2.0..2.0f64) {
        let q = WaveNumber::new(re, im);
        prop_assume!(q.0.norm() > 1e-3);
        let m = match_coeffs(q, &pot).unwrap();
        for edge in [pot.a, pot.b] {
            let [(u0, d0), (u1, d1)] = m.one_sided(edge);
            let size = u0.norm().max(d0.norm()).max(1.0);
            prop_assert!((u0 - u1).norm() <= 1e-11 * size);
            prop_assert!((d0 - d1).norm() <= 1e-11 * size);
        }
    }

    #[test]
    fn s_matrix_reflections(pot in shell(), re in 0.1..10.0f64, im in -1.0..1.0f64) {
        let q = WaveNumber::new(re, im);
        let jp = match_coeffs(q, &pot).unwrap().jplus;
        let jm = match_coeffs(q, &pot).unwrap().jminus;
        prop_assume!(jp.norm() > 1e-6 && jm.norm() > 1e-6);
        let s = s_matrix(q, &pot).unwrap();
        let s_neg = s_matrix(WaveNumber(-q.0), &pot).unwrap();
        let s_mirror = s_matrix(q.reflect(), &pot).unwrap();
        // S(k) S(−k) = 1 and S(−k̄) = conj S(k).
        prop_assert!((s * s_neg - 1.0).norm() <= 1e-10);
        prop_assert!(rel(s_mirror, s.conj()) <= 1e-10);
    }

    #[test]
    fn regulator_damps_below_the_real_axis(re in 0.0..40.0f64, im in -1.0..0.0f64, alpha in 0.0..1.0f64) {
        // |e^{−iαq²}| = e^{2α Re q Im q} ≤ 1 in the fourth quadrant.
        let pot = PotentialSpec::reference();
        prop_assert!(regulator(c(re, im), alpha, &pot).norm() <= 1.0 + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn argument_count_matches_found_poles(re0 in 0.0..4.0f64, width in 1.0..5.0f64, im0 in -3.0..-0.5f64) {
        let pot = PotentialSpec::reference();
        let region = SearchRegion::new(re0, re0 + width, im0, 0.0).unwrap();
        let count = count_zeros(&region, &pot, 64).unwrap();
        let poles = find_resonances(&region, &pot, 1e-12).unwrap();
        prop_assert_eq!(count, poles.len() as i64);
        for p in &poles {
            prop_assert!(region.contains(p.k_n.0));
            let state = gamow_state(p, &pot).unwrap();
            prop_assert!(schrodinger_residual(&state, &pot, 200).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn modes_agree_for_random_bumps(centre in 0.8..2.5f64, width in 0.15..0.35f64) {
        let pot = PotentialSpec::reference();
        let test = TestFunction::gaussian_bump(centre, width, centre + 7.5 * width).unwrap();
        let radii = test.default_radii(100);
        let grid = KGrid::graded(30.0, 1500, &pot, test.r_max()).unwrap();
        let recs: Vec<Vec<Complex64>> = ExpansionMode::ALL
            .iter()
            .map(|&m| reconstruct_continuum(&test, &grid, &pot, m, &radii).unwrap())
            .collect();
        prop_assert!(error_norms(&radii, &recs[0], &recs[1]).l2 <= 1e-10);
        prop_assert!(error_norms(&radii, &recs[0], &recs[2]).l2 <= 1e-10);
    }
}

#[test]
fn scan_finds_the_reference_poles() {
    let pot = PotentialSpec::reference();
    let scanned = scan_jplus_zeros((0.0, 8.0), (-3.0, 0.0), 300, &pot);
    let found = find_resonances(&SearchRegion::default_resonance(), &pot, 1e-12).unwrap();
    assert_eq!(scanned.len(), 4);
    for (z, p) in scanned.iter().zip(&found) {
        assert!((z - p.k_n.0).norm() < 1e-8, "{z} vs {}", p.k_n.0);
    }
}
