use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scrunch::rotsym::{
    adm_mass, check_admissible, embed, graph_scalar_curvature, hawking_from_graph, scalar_curvature, schwarzschild,
    stripe_profile, HawkingProfile,
};

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

/// m = r_min/2 + (qλ/2)(1 − e^{−(r−r_min)/λ}): m′ ≤ q/2 < 1/2 keeps m < r/2.
fn random_profile(rng: &mut ChaCha8Rng) -> HawkingProfile {
    let r_min = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.05..2.0) };
    let r_max = r_min + rng.gen_range(2.0..8.0);
    let q = rng.gen_range(0.05..0.95);
    let lam = rng.gen_range(0.2..3.0);
    let grid = uniform(r_min, r_max, 10_000);
    let mass = grid.iter().map(|r| r_min / 2.0 + q * lam / 2.0 * (1.0 - (-(r - r_min) / lam).exp())).collect();
    HawkingProfile::tabulated(grid, mass, vec![]).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn round_trip_on_schwarzschild_and_random_profiles() {
    for m0 in [0.5, 1.0, 2.0] {
        let (hp, _) = schwarzschild(m0, 20.0 * m0).unwrap();
        let back = hawking_from_graph(&embed(&hp, 0.0).unwrap()).unwrap();
        assert!(sup_diff(&hp.mass, &back.mass) < 1e-6);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let p = random_profile(&mut rng);
        assert!(check_admissible(&p).is_empty());
        let g = embed(&p, 0.0).unwrap();
        assert!(g.z.windows(2).all(|w| w[1] >= w[0]));
        let back = hawking_from_graph(&g).unwrap();
        assert!(sup_diff(&p.mass, &back.mass) < 1e-6);
    }
}

#[test]
fn stripes_have_scalar_curvature_six_k() {
    for (k, a, b) in [(0.25, 1.0, 1.5), (1.0, 0.3, 0.8)] {
        let p = stripe_profile(k, a, b, 0.0, 4.0, 0.9 * (1.0f64 / k).sqrt()).unwrap();
        let rs = scalar_curvature(&p);
        let h = p.grid[1] - p.grid[0];
        let mut seen = 0;
        for (r, s) in rs.r.iter().zip(&rs.scal) {
            if *r > a + h && *r < b - h {
                assert!((s - 6.0 * k).abs() < 1e-4, "R({r}) = {s}");
                seen += 1;
            }
        }
        assert!(seen > 100);
        assert!(adm_mass(&p).value < 0.9 * (1.0f64 / k).sqrt());
    }
    let (hp, _) = schwarzschild(1.0, 10.0).unwrap();
    assert!(scalar_curvature(&hp).scal.iter().all(|s| s.abs() < 1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_slope_matches_graph_curvature(a in 0.01f64..0.2, b in 0.0f64..0.5) {
        // m = a r³ / (1 + b r³) is smooth, nondecreasing and < r/2 on [0, 3]
        let grid = uniform(0.0, 3.0, 10_000);
        let m = |r: f64| a * r.powi(3) / (1.0 + b * r.powi(3));
        let mass: Vec<f64> = grid.iter().map(|r| m(*r)).collect();
        let p = HawkingProfile::tabulated(grid.clone(), mass, vec![]).unwrap();
        prop_assume!(check_admissible(&p).is_empty());
        let fd = scalar_curvature(&p);
        let gr = graph_scalar_curvature(&embed(&p, 0.0).unwrap());
        // away from the axis, where the centred difference of m ~ ar³ loses O(h²/r²)
        for i in 20..grid.len() - 20 {
            let r = grid[i];
            if r < 0.1 {
                continue;
            }
            let dm = fd.scal[i] * r * r / 4.0;
            let dg = gr.scal[i] * r * r / 4.0;
            prop_assert!((dm - dg).abs() <= 1e-4 * dm.abs().max(1e-6), "r={} m'={} graph={}", r, dm, dg);
        }
    }

    #[test]
    fn nonnegative_curvature_iff_nondecreasing_mass(c in 0.5f64..2.5, w in 0.1f64..0.6, amp in -0.3f64..0.3, slope in 0.0f64..0.2) {
        // m = slope·r + amp·tanh((r−c)/w) on [1, 4] (no admissibility needed)
        let grid = uniform(1.0, 4.0, 4000);
        let dmin = grid.iter().map(|r| slope + amp / w / ((r - c) / w).cosh().powi(2)).fold(f64::INFINITY, f64::min);
        prop_assume!(dmin.abs() > 1e-3);
        let mass: Vec<f64> = grid.iter().map(|r| slope * r + amp * ((r - c) / w).tanh()).collect();
        let nondecreasing = mass.windows(2).all(|v| v[1] >= v[0]);
        let p = HawkingProfile::tabulated(grid, mass, vec![]).unwrap();
        let nonneg = scalar_curvature(&p).scal.iter().all(|s| *s >= 0.0);
        prop_assert_eq!(nonneg, nondecreasing);
        prop_assert_eq!(nonneg, dmin > 0.0);
    }
}
