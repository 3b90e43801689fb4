use scrunch::metric::ModelSpace;
use scrunch::pulled::{CompactSetSpec, PulledSpace, SetKind};
use scrunch::scalar::{bishop_gromov_density, wscal_estimate, Target, VolumeMode, WScalFit};

const RADII: [f64; 5] = [0.5, 0.4, 0.3, 0.2, 0.1];

#[test]
fn closed_form_and_monte_carlo_quotients_agree() {
    let s = ModelSpace::unit_sphere();
    let p = [0.0, 1.0, 0.0, 0.0];
    let exact = wscal_estimate(Target::Model(&s, p), &RADII, 0, 0, VolumeMode::Auto).unwrap();
    let mc = wscal_estimate(Target::Model(&s, p), &RADII, 1_000_000, 5, VolumeMode::MonteCarlo).unwrap();
    for i in 0..RADII.len() {
        assert_eq!(exact.sigma[i], 0.0);
        assert!((exact.q[i] - mc.q[i]).abs() <= 3.0 * mc.sigma[i], "r={}: {} vs {} ± {}", RADII[i], exact.q[i], mc.q[i], mc.sigma[i]);
    }

    let y = PulledSpace::new(CompactSetSpec::new(&s, SetKind::EquatorialSphere).unwrap());
    let radii = [0.2, 0.15, 0.1, 0.05];
    let exact = wscal_estimate(Target::Pulled(&y), &radii, 0, 0, VolumeMode::Auto).unwrap();
    let mc = wscal_estimate(Target::Pulled(&y), &radii, 400_000, 9, VolumeMode::MonteCarlo).unwrap();
    for i in 0..radii.len() {
        assert!((exact.q[i] - mc.q[i]).abs() <= 3.0 * mc.sigma[i]);
    }
}

#[test]
fn constant_curvature_limits_are_six_k() {
    for k in [0.25, 1.0] {
        let s = ModelSpace::sphere(k).unwrap();
        let rho = s.radius().unwrap();
        let prof = wscal_estimate(Target::Model(&s, [rho, 0.0, 0.0, 0.0]), &RADII, 0, 0, VolumeMode::Auto).unwrap();
        let WScalFit::Finite { limit, .. } = prof.fit else { panic!("sphere classified as divergent") };
        assert!((limit - 6.0 * k).abs() <= 0.02 * 6.0 * k, "K={k}: {limit}");
    }
}

#[test]
fn round_sphere_density_stays_below_one() {
    let s = ModelSpace::unit_sphere();
    let d = bishop_gromov_density(Target::Model(&s, [1.0, 0.0, 0.0, 0.0]), &[3.0, 2.0, 1.0, 0.1, 0.01], 0, 0, VolumeMode::Auto).unwrap();
    assert!(d.theta.iter().all(|t| *t < 1.0));
    assert!((d.theta[4] - 1.0).abs() < 1e-4);
    assert!(!d.exceeds_one);
}
