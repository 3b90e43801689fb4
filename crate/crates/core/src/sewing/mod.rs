//! Sewing a region of constant positive curvature with many tiny tunnels
//! (Method I) and the defect of the scrunch map onto the pulled space.

mod defect;
mod plan;
mod space;

pub use defect::{
    edited_region_sample, mouth_sample, scrunch_map_defect, separated_sphere_sample, transfer_defect, tube_sample,
    DefectReport,
};
pub use plan::{max_delta, plan_sewing, plan_sewing_capped, SewingPlan, TunnelModel};
pub use space::{edited_region_diameter, sewn_distance, sewn_volume, Located, SewnPoint, SewnSpace, MAX_HUB_MATRIX};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{check_metric, gh_exact_small, sample_sphere, FiniteMetric, ModelSpace};
    use crate::pulled::{CompactSetSpec, PulledSpace, SetKind};
    use std::f64::consts::PI;

    fn circle_space(r: f64, delta: f64) -> SewnSpace {
        let s = ModelSpace::unit_sphere();
        let a0 = CompactSetSpec::new(&s, SetKind::GeodesicCircle).unwrap();
        let plan = plan_sewing(&s, &a0, r, delta).unwrap();
        let t = TunnelModel::standard(1.0, delta);
        SewnSpace::new(s, a0, plan, t).unwrap()
    }

    #[test]
    fn one_tunnel_costs_h() {
        let n = circle_space(PI / 4.0, 0.01);
        let a = SewnPoint::Mouth { k: 0, j: 2 };
        let b = SewnPoint::Mouth { k: 2, j: 0 };
        assert!(sewn_distance(&n, &a, &b).unwrap() <= n.tunnels().h + 1e-15);
    }

    #[test]
    fn antipodal_shortcut() {
        let n = circle_space(PI / 4.0, 0.01);
        let x = SewnPoint::Base([1.0, 0.0, 0.0, 0.0]);
        let y = SewnPoint::Base([-1.0, 0.0, 0.0, 0.0]);
        let d = sewn_distance(&n, &x, &y).unwrap();
        assert!(d < PI);
        assert!((d - n.c0()).abs() < 1e-12);
    }

    #[test]
    fn removed_balls_are_refused() {
        let n = circle_space(PI / 4.0, 0.01);
        let m = n.plan().mouth(1, 3);
        assert!(sewn_distance(&n, &SewnPoint::Base(m), &SewnPoint::Base([1.0, 0.0, 0.0, 0.0])).is_err());
        assert_eq!(n.removed_ball(&m), Some((1, 3)));
    }

    #[test]
    fn far_points_unchanged() {
        let n = circle_space(0.2, 0.02);
        // both near the pole circle {x0 = x1 = 0}, far from T_r(A₀)
        let x = SewnPoint::Base([0.0, 0.0, 1.0, 0.0]);
        let y = SewnPoint::Base([0.0, 0.0, 0.8, 0.6]);
        let d = sewn_distance(&n, &x, &y).unwrap();
        assert_eq!(d, n.base().distance(&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.8, 0.6]));
    }

    #[test]
    fn sampled_metric() {
        let n = circle_space(0.3, 0.03);
        let mut pts: Vec<SewnPoint> = sample_sphere(1.0, 40, 1).unwrap().coords().into_iter().map(SewnPoint::Base).collect();
        pts.extend(tube_sample(&n, 30, 0.3, 2).into_iter().map(SewnPoint::Base));
        pts.extend(mouth_sample(&n, 20, 3));
        let loc = n.locate_all(&pts);
        let m = FiniteMetric::from_fn(pts.len(), |i, j| n.dist_loc(&loc[i], &loc[j]));
        assert!(check_metric(&m).is_empty());
    }

    #[test]
    fn diameter_certificate() {
        for (r, d) in [(0.2, 0.02), (0.1, 0.01)] {
            let n = circle_space(r, d);
            let s = edited_region_sample(&n, 600, 60, 7);
            let diam = edited_region_diameter(&n, &s).unwrap();
            assert!(diam <= 16.0 * r + 3.0 * 3.0 * d, "{diam}");
            assert!(diam >= n.tunnels().h);
        }
    }

    #[test]
    fn volume_bookkeeping() {
        let n = circle_space(0.2, 0.02);
        assert_eq!(sewn_volume(&n).unwrap(), 2.0 * PI * PI);
    }

    #[test]
    fn defect_bounds_exact_gh() {
        let s = ModelSpace::unit_sphere();
        let a0 = CompactSetSpec::new(&s, SetKind::GeodesicCircle).unwrap();
        let n = SewnSpace::build(&s, &a0, 0.2, 0.02).unwrap();
        let y = PulledSpace::new(a0.clone());
        let mut pts: Vec<SewnPoint> = tube_sample(&n, 3, 0.4, 4).into_iter().map(SewnPoint::Base).collect();
        pts.extend(sample_sphere(1.0, 3, 5).unwrap().coords().into_iter().map(SewnPoint::Base));
        let probes = sample_sphere(1.0, 200, 6).unwrap().coords();
        let rep = scrunch_map_defect(&n, &y, &pts, &probes).unwrap();
        assert_eq!(rep.gh_bound, 2.0 * rep.eps_dis.max(rep.eps_cov));
        let loc = n.locate_all(&pts);
        let xn = FiniteMetric::from_fn(pts.len(), |i, j| n.dist_loc(&loc[i], &loc[j]));
        let img: Vec<crate::pulled::PulledPoint> = pts
            .iter()
            .map(|p| match p {
                SewnPoint::Base(x) if !n.in_edited_region(p) => crate::pulled::PulledPoint::Base(*x),
                _ => crate::pulled::PulledPoint::Basepoint,
            })
            .collect();
        let xy = FiniteMetric::from_fn(pts.len(), |i, j| y.dist(&img[i], &img[j]));
        assert!(gh_exact_small(&xn, &xy).unwrap() <= rep.gh_bound);
    }

    #[test]
    fn mismatched_specs() {
        let s = ModelSpace::unit_sphere();
        let a0 = CompactSetSpec::new(&s, SetKind::GeodesicCircle).unwrap();
        let n = SewnSpace::build(&s, &a0, 0.2, 0.02).unwrap();
        let other = CompactSetSpec::new(&s, SetKind::EquatorialSphere).unwrap();
        let y = PulledSpace::new(other);
        let pts = [SewnPoint::Base([0.0, 0.0, 1.0, 0.0])];
        assert!(scrunch_map_defect(&n, &y, &pts, &[]).is_err());
    }
}
