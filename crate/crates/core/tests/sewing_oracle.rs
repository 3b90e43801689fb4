use std::f64::consts::PI;

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scrunch::metric::{sample_sphere, ModelSpace, Point};
use scrunch::pulled::{CompactSetSpec, SetKind};
use scrunch::sewing::{
    edited_region_diameter, edited_region_sample, mouth_sample, plan_sewing, tube_sample, SewnPoint, SewnSpace,
    TunnelModel,
};

fn sewn(kind: SetKind, r: f64, delta: f64) -> SewnSpace {
    let s = ModelSpace::unit_sphere();
    let a0 = CompactSetSpec::new(&s, kind).unwrap();
    let plan = plan_sewing(&s, &a0, r, delta).unwrap();
    SewnSpace::new(s, a0, plan, TunnelModel::standard(1.0, delta)).unwrap()
}

/// Complete graph on base points, centres and every mouth with base-distance
/// edges, plus one edge of length h per tunnel; `keep` filters tunnels.
struct Oracle {
    g: UnGraph<(), f64>,
    n_pts: usize,
}

impl Oracle {
    fn new(n: &SewnSpace, pts: &[Point], keep: impl Fn(usize, usize) -> bool) -> Self {
        let plan = n.plan();
        let nb = plan.n_bar();
        let mut nodes: Vec<Point> = pts.to_vec();
        nodes.extend(plan.centers.iter().copied());
        let mut mouth_node = vec![vec![usize::MAX; nb]; nb];
        for k in 0..nb {
            for j in 0..nb {
                if k != j {
                    mouth_node[k][j] = nodes.len();
                    nodes.push(plan.mouth(k, j));
                }
            }
        }
        let mut g = UnGraph::<(), f64>::with_capacity(nodes.len(), nodes.len() * nodes.len() / 2);
        for _ in &nodes {
            g.add_node(());
        }
        for a in 0..nodes.len() {
            for b in a + 1..nodes.len() {
                g.add_edge(NodeIndex::new(a), NodeIndex::new(b), n.base().distance(&nodes[a], &nodes[b]));
            }
        }
        for (k, j) in plan.pairs() {
            if keep(k, j) {
                g.add_edge(NodeIndex::new(mouth_node[k][j]), NodeIndex::new(mouth_node[j][k]), n.tunnels().h);
            }
        }
        Oracle { g, n_pts: pts.len() + nb }
    }

    /// Distances from node `i` to the first `n_pts` nodes (points, then centres).
    fn from(&self, i: usize) -> Vec<f64> {
        let d = dijkstra(&self.g, NodeIndex::new(i), None, |e| *e.weight());
        (0..self.n_pts).map(|j| d[&NodeIndex::new(j)]).collect()
    }
}

#[test]
fn hub_routing_against_full_dijkstra() {
    let n = sewn(SetKind::GeodesicCircle, 0.2, 0.02);
    let mut pts = tube_sample(&n, 500, 0.4, 5);
    pts.extend(sample_sphere(1.0, 300, 6).unwrap().coords().into_iter().filter(|p| n.removed_ball(p).is_none()));
    let oracle = Oracle::new(&n, &pts, |_, _| true);
    let nodes: Vec<SewnPoint> = pts.iter().chain(&n.plan().centers).map(|p| SewnPoint::Base(*p)).collect();
    let loc = n.locate_all(&nodes);
    let slack = 4.0 * n.spoke();
    let np = pts.len();
    for i in (0..nodes.len()).step_by(7) {
        let full = oracle.from(i);
        for j in 0..nodes.len() {
            let hub = n.dist_loc(&loc[i], &loc[j]);
            assert!(full[j] <= hub + 1e-12, "hub path shorter than any graph path");
            assert!(hub <= full[j] + slack, "hub detour exceeds 4(r−δ)");
            if i >= np && j >= np {
                // centre to centre: direct geodesic or the one tunnel between them
                assert!((hub - full[j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn antipodal_points_on_the_sewn_circle() {
    let n = sewn(SetKind::GeodesicCircle, PI / 4.0, 0.01);
    assert_eq!((n.plan().n_bar(), n.plan().n_mouths(), n.plan().n_tunnels()), (4, 12, 6));
    let x = [1.0, 0.0, 0.0, 0.0];
    let y = [-1.0, 0.0, 0.0, 0.0];
    let oracle = Oracle::new(&n, &[x, y], |_, _| true);
    let full = oracle.from(0)[1];
    let hub = n.dist(&SewnPoint::Base(x), &SewnPoint::Base(y));
    assert!(full <= hub && hub < PI);
}

#[test]
fn removing_tunnels_never_shortens() {
    let n = sewn(SetKind::GeodesicCircle, 0.3, 0.03);
    let pts = tube_sample(&n, 150, 0.5, 9);
    let all = Oracle::new(&n, &pts, |_, _| true);
    let some = Oracle::new(&n, &pts, |k, j| (k + j) % 3 != 0);
    let none = Oracle::new(&n, &pts, |_, _| false);
    for i in (0..pts.len()).step_by(10) {
        let (a, b, c) = (all.from(i), some.from(i), none.from(i));
        for j in 0..pts.len() {
            assert!(a[j] <= b[j] + 1e-12 && b[j] <= c[j] + 1e-12);
            assert!((c[j] - n.base().distance(&pts[i], &pts[j])).abs() < 1e-12);
        }
    }
    // the sewn distance likewise never exceeds the unedited one
    let sp: Vec<SewnPoint> = pts.iter().map(|p| SewnPoint::Base(*p)).collect();
    let loc = n.locate_all(&sp);
    for i in 0..sp.len() {
        for j in 0..sp.len() {
            assert!(n.dist_loc(&loc[i], &loc[j]) <= n.base().distance(&pts[i], &pts[j]));
        }
    }
}

#[test]
fn equator_packing_is_disjoint_and_maximal() {
    let (r, delta) = (0.5, 0.01);
    let n = sewn(SetKind::EquatorialSphere, r, delta);
    let plan = n.plan();
    let s = n.base();
    let c = &plan.centers;
    for a in 0..c.len() {
        assert!(c[a][3].abs() < 1e-12);
        for b in a + 1..c.len() {
            assert!(s.distance(&c[a], &c[b]) >= 2.0 * r - 1e-12);
        }
    }
    // independent greedy re-check over a fresh equatorial sample
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20_000 {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if l < 1e-3 {
            continue;
        }
        let p = [v[0] / l, v[1] / l, v[2] / l, 0.0];
        // maximality up to the sample mesh the planner used
        let near = c.iter().map(|q| s.distance(&p, q)).fold(f64::INFINITY, f64::min);
        assert!(near < 2.0 * r + plan.sample_spacing, "gap of {near} in the packing");
    }
    let nb = plan.n_bar();
    assert_eq!(plan.n_mouths(), (nb * (nb - 1)) as u64);
    for k in 0..nb {
        for j in 0..nb {
            if j == k {
                continue;
            }
            let m = plan.mouth(k, j);
            assert!((s.distance(&m, &c[k]) - (r - delta)).abs() < 1e-9);
            for j2 in j + 1..nb {
                if j2 != k {
                    assert!(s.distance(&m, &plan.mouth(k, j2)) >= 2.0 * delta - 1e-12);
                }
            }
        }
    }
}

#[test]
fn sewn_triangle_inequality_on_random_triples() {
    for kind in [SetKind::GeodesicCircle, SetKind::EquatorialSphere] {
        let n = sewn(kind, 0.25, 0.02);
        let mut pts: Vec<SewnPoint> = tube_sample(&n, 400, 0.5, 1).into_iter().map(SewnPoint::Base).collect();
        pts.extend(sample_sphere(1.0, 200, 2).unwrap().coords().into_iter().filter(|p| n.removed_ball(p).is_none()).map(SewnPoint::Base));
        pts.extend(mouth_sample(&n, 100, 3));
        let loc = n.locate_all(&pts);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let (a, b, c) = (rng.gen_range(0..pts.len()), rng.gen_range(0..pts.len()), rng.gen_range(0..pts.len()));
            let ab = n.dist_loc(&loc[a], &loc[b]);
            assert_eq!(ab, n.dist_loc(&loc[b], &loc[a]));
            assert!(ab <= n.dist_loc(&loc[a], &loc[c]) + n.dist_loc(&loc[c], &loc[b]) + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_plan_meets_the_diameter_certificate(r in 0.08f64..0.35, frac in 0.02f64..0.3, equator in any::<bool>(), seed in 0u64..1000) {
        let kind = if equator { SetKind::EquatorialSphere } else { SetKind::GeodesicCircle };
        let n = SewnSpace::build(&ModelSpace::unit_sphere(), &CompactSetSpec::new(&ModelSpace::unit_sphere(), kind).unwrap(), r, frac * r).unwrap();
        let sample = edited_region_sample(&n, 800, 80, seed);
        let diam = edited_region_diameter(&n, &sample).unwrap();
        let bound = 16.0 * n.plan().r + 3.0 * n.tunnels().h;
        prop_assert!(diam <= bound);
        prop_assert!(diam >= n.tunnels().h);
    }
}
