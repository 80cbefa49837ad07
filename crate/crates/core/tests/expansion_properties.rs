mod common;

use num_complex::Complex64;
use shellres::checks::select_poles;
use shellres::expansions::{
    alpha_extrapolate, error_norms, reconstruct_continuum, resonance_expansion, Contour, ExpansionInput, ExpansionMode,
    ExpansionReport, KGrid, TestFunction,
};
use shellres::poles::{find_resonances, ResonancePole, SearchRegion};
use shellres::{Error, PotentialSpec};

fn reference_poles(k_max: f64) -> (PotentialSpec, Vec<ResonancePole>) {
    let pot = PotentialSpec::reference();
    let all = find_resonances(&SearchRegion::new(0.0, k_max, -3.0, 0.0).unwrap(), &pot, 1e-12).unwrap();
    (pot, all)
}

fn shell_radii(pot: &PotentialSpec) -> Vec<f64> {
    (1..=200).map(|j| pot.b * j as f64 / 200.0).collect()
}

fn input_with(n: usize, test: &TestFunction, grid_nodes: usize, max_panel: f64) -> (PotentialSpec, ExpansionInput) {
    let (pot, all) = reference_poles(40.0);
    let (used, depth) = select_poles(&all, n, 40.0);
    let grid = KGrid::graded(40.0, grid_nodes, &pot, test.r_max()).unwrap();
    let contour = Contour::rectangle(depth.unwrap(), 40.0, &pot, max_panel).unwrap();
    let input = ExpansionInput::new(test.clone(), used, contour, grid, shell_radii(&pot), &pot).unwrap();
    (pot, input)
}

fn default_bump() -> TestFunction {
    TestFunction::gaussian_bump(1.5, 0.25, 3.5).unwrap()
}

fn reports(input: &ExpansionInput, pot: &PotentialSpec, alphas: &[f64]) -> Vec<ExpansionReport> {
    alphas.iter().map(|&a| resonance_expansion(input, a, pot, ExpansionMode::OutIn).unwrap()).collect()
}

#[test]
fn extrapolation_beats_smallest_alpha_in_the_asymptotic_range() {
    let (pot, input) = input_with(4, &default_bump(), 4000, 0.25);
    let reps = reports(&input, &pot, &[0.004, 0.002, 0.001]);
    let smallest = reps.iter().map(|r| r.target_error.l2).fold(f64::INFINITY, f64::min);
    let ex = alpha_extrapolate(&reps).unwrap();
    assert!(ex.extrapolated);
    assert!(ex.target_error.l2 <= smallest, "{} vs {smallest}", ex.target_error.l2);
    assert!(ex.reconstruction_error.relative_l2 < 1e-10);
}

#[test]
fn extrapolation_rejects_rising_error() {
    let (pot, input) = input_with(2, &default_bump(), 1000, 0.5);
    let mut reps = reports(&input, &pot, &[0.004, 0.002, 0.001]);
    reps[2].target_error.l2 = 2.0 * reps[0].target_error.l2;
    assert!(matches!(alpha_extrapolate(&reps), Err(Error::NonMonotone(_))));
}

#[test]
fn extrapolation_arity_and_identity() {
    let (pot, input) = input_with(2, &default_bump(), 1000, 0.5);
    let one = reports(&input, &pot, &[0.1]);
    assert!(matches!(alpha_extrapolate(&one), Err(Error::ArityTooSmall { .. })));
    let same = vec![one[0].clone(), one[0].clone(), one[0].clone()];
    let ex = alpha_extrapolate(&same).unwrap();
    assert_eq!(ex.expansion, one[0].expansion);
    assert!(ex.extrapolated);
}

#[test]
fn gamow_sum_trend_for_a_bump_inside_the_shell() {
    // Not monotone for small pole counts; the trend shows once the sum
    // reaches the poles whose wavelengths resolve the bump.
    let test = TestFunction::gaussian_bump(1.0, 0.1, 1.8).unwrap();
    let counts = [1, 4, 12, 16, 20];
    let errs: Vec<f64> = counts
        .iter()
        .map(|&n| {
            let (pot, input) = input_with(n, &test, 2000, 0.5);
            resonance_expansion(&input, 0.0, &pot, ExpansionMode::OutIn).unwrap().gamow_only_error().relative_l2
        })
        .collect();
    println!("Gamow-only relative error by pole count {counts:?}: {errs:?}");
    assert!(errs[2] > errs[3] && errs[3] > errs[4]);
    assert!(errs[4] < 0.25 * errs[0]);
}

#[test]
fn zero_test_function_gives_zero_terms() {
    let (pot, input) = input_with(3, &TestFunction::zero(3.0).unwrap(), 1000, 0.5);
    let rep = resonance_expansion(&input, 0.1, &pot, ExpansionMode::InIn).unwrap();
    let zero = Complex64::new(0.0, 0.0);
    assert!(rep.pole_terms.iter().flatten().all(|&t| t == zero));
    assert!(rep.background.iter().all(|&t| t == zero));
}

#[test]
fn contour_checks() {
    let (pot, all) = reference_poles(40.0);
    let grid = KGrid::graded(40.0, 1000, &pot, 3.5).unwrap();
    let radii = shell_radii(&pot);
    // Running straight through the second pole.
    let through = Contour::rectangle(-all[1].k_n.0.im, 40.0, &pot, 0.5).unwrap();
    let err = ExpansionInput::new(default_bump(), all[..2].to_vec(), through, grid.clone(), radii.clone(), &pot);
    assert!(matches!(err, Err(Error::ContourTooClose { .. })), "{err:?}");
    // Too shallow for the poles listed.
    let (_, depth) = select_poles(&all, 2, 40.0);
    let shallow = Contour::rectangle(depth.unwrap(), 40.0, &pot, 0.5).unwrap();
    let err = ExpansionInput::new(default_bump(), all[..4].to_vec(), shallow, grid, radii, &pot);
    assert!(matches!(err, Err(Error::PoleSetMismatch(_))), "{err:?}");
    // Negative regulator.
    let (pot, input) = input_with(1, &default_bump(), 1000, 0.5);
    assert!(matches!(resonance_expansion(&input, -0.1, &pot, ExpansionMode::InIn), Err(Error::AlphaNegative(_))));
}

#[test]
fn edge_overlap_converges_algebraically_in_k_max() {
    // A bump straddling the outer shell edge sees the jump in the
    // potential: its projections fall off like k⁻³, so the truncation
    // error falls like k_max^(-5/2).
    let pot = PotentialSpec::reference();
    let test = TestFunction::gaussian_bump(2.0, 0.25, 4.0).unwrap();
    let radii = test.default_radii(400);
    let target: Vec<Complex64> = radii.iter().map(|&r| Complex64::new(test.eval(r), 0.0)).collect();
    let err = |k_max: f64| {
        let grid = KGrid::graded(k_max, (100.0 * k_max) as usize, &pot, test.r_max()).unwrap();
        error_norms(&radii, &reconstruct_continuum(&test, &grid, &pot, ExpansionMode::InIn, &radii).unwrap(), &target).l2
    };
    let ratio = err(40.0) / err(80.0);
    assert!((4.5..7.0).contains(&ratio), "ratio {ratio}");
}
