use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scrunch::metric::{sample_sphere, ModelSpace, Point};
use scrunch::pulled::{pulled_distance, pulled_total_volume, CompactSetSpec, PulledPoint, PulledSpace, SetKind};

fn sets() -> Vec<(ModelSpace, SetKind)> {
    let s = ModelSpace::unit_sphere();
    vec![
        (s.clone(), SetKind::GeodesicCircle),
        (s.clone(), SetKind::EquatorialSphere),
        (s, SetKind::RoundBall { center: [0.0, 0.0, 0.6, 0.8], radius: 0.3 }),
        (ModelSpace::Euclid3, SetKind::RadialRing { c: 0.7 }),
        (ModelSpace::Euclid3, SetKind::RadialSphere { c: 0.5 }),
        (ModelSpace::Euclid3, SetKind::RoundBall { center: [0.1, 0.0, -0.2, 0.0], radius: 0.4 }),
    ]
}

fn random_points(space: &ModelSpace, set: &CompactSetSpec, n: usize, seed: u64) -> Vec<Point> {
    let mut out = match space {
        ModelSpace::Sphere3 { curvature } => sample_sphere(*curvature, n, seed).unwrap().coords(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| [rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2), 0.0]).collect()
        }
    };
    out.retain(|p| !set.member(p));
    out
}

#[test]
fn pulled_distance_is_a_metric_on_random_triples() {
    for (space, kind) in sets() {
        let set = CompactSetSpec::new(&space, kind).unwrap();
        let y = PulledSpace::new(set.clone());
        let pts: Vec<PulledPoint> = random_points(&space, &set, 600, 3)
            .into_iter()
            .map(PulledPoint::Base)
            .chain(std::iter::once(PulledPoint::Basepoint))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let (a, b, c) = (
                pts[rng.gen_range(0..pts.len())],
                pts[rng.gen_range(0..pts.len())],
                pts[rng.gen_range(0..pts.len())],
            );
            let ab = y.dist(&a, &b);
            assert_eq!(ab, y.dist(&b, &a));
            assert!(ab <= y.dist(&a, &c) + y.dist(&c, &b) + 1e-9, "{}", set.describe());
            if a != b {
                assert!(ab > 0.0, "distinct points collapsed in {}", set.describe());
            }
        }
    }
}

#[test]
fn quotient_contracts_and_projection_is_one_lipschitz() {
    for (space, kind) in sets() {
        let set = CompactSetSpec::new(&space, kind).unwrap();
        let y = PulledSpace::new(set.clone());
        // base samples may land in K: ψ sends them to p₀
        let raw = match &space {
            ModelSpace::Sphere3 { .. } => sample_sphere(1.0, 400, 8).unwrap().coords(),
            _ => random_points(&space, &set, 400, 8),
        };
        let psi = |p: &Point| if set.member(p) { PulledPoint::Basepoint } else { PulledPoint::Base(*p) };
        for i in 0..raw.len() {
            for j in i + 1..raw.len() {
                let dx = space.distance(&raw[i], &raw[j]);
                assert!(y.dist(&psi(&raw[i]), &psi(&raw[j])) <= dx + 1e-12);
            }
            assert_eq!(y.dist(&psi(&raw[i]), &PulledPoint::Basepoint), set.dist_to_set(&raw[i]).max(0.0));
        }
    }
}

#[test]
fn total_volume_subtracts_the_set() {
    for (space, kind) in sets() {
        let set = CompactSetSpec::new(&space, kind).unwrap();
        let y = PulledSpace::new(set.clone());
        match space.total_volume() {
            Some(v) => {
                let t = pulled_total_volume(&y).unwrap();
                assert!(t >= 0.0);
                assert_eq!(t, v - set.measure().unwrap());
            }
            None => assert!(pulled_total_volume(&y).is_err()),
        }
    }
}

#[test]
fn poles_across_the_equator() {
    let s = ModelSpace::unit_sphere();
    let y = PulledSpace::new(CompactSetSpec::new(&s, SetKind::EquatorialSphere).unwrap());
    let n = PulledPoint::Base([0.0, 0.0, 0.0, 1.0]);
    let south = PulledPoint::Base([0.0, 0.0, 0.0, -1.0]);
    assert!((pulled_distance(&y, &n, &south).unwrap() - PI).abs() < 1e-12);
    assert!(pulled_distance(&y, &PulledPoint::Base([1.0, 0.0, 0.0, 0.0]), &n).is_err());
    assert_eq!(pulled_distance(&y, &PulledPoint::Basepoint, &PulledPoint::Basepoint).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn set_distance_vanishes_exactly_on_members(t in 0.0f64..(2.0 * PI), h in -0.3f64..0.3, c in 0.2f64..1.5) {
        // point on or near the ring {|x| = c, x₂ = 0} in Euclid3
        let set = CompactSetSpec::new(&ModelSpace::Euclid3, SetKind::RadialRing { c }).unwrap();
        let p = [c * t.cos(), c * t.sin(), h, 0.0];
        let d = set.dist_to_set(&p);
        prop_assert!((d - h.abs()).abs() < 1e-12);
        prop_assert_eq!(set.member(&p), d <= 1e-9);
    }

    #[test]
    fn set_distance_is_one_lipschitz(a in prop::array::uniform3(-1.5f64..1.5), b in prop::array::uniform3(-1.5f64..1.5)) {
        let e = ModelSpace::Euclid3;
        for kind in [SetKind::RadialSphere { c: 0.8 }, SetKind::RadialRing { c: 0.8 }, SetKind::RoundBall { center: [0.0; 4], radius: 0.5 }] {
            let set = CompactSetSpec::new(&e, kind).unwrap();
            let (x, y) = ([a[0], a[1], a[2], 0.0], [b[0], b[1], b[2], 0.0]);
            prop_assert!((set.dist_to_set(&x) - set.dist_to_set(&y)).abs() <= e.distance(&x, &y) + 1e-12);
        }
    }
}
