use std::f64::consts::PI;

use scrunch::harness::{
    anchor_radii, parse_report, run_method1, run_method2, Config, Method1Config, Method1Region, Method2Config,
    Method2Region,
};
use scrunch::metric::sphere_ball_volume;
use scrunch::Error;

fn small_m1(region: Method1Region) -> Method1Config {
    Method1Config {
        region,
        levels: 2,
        sample_candidates: 4000,
        tube_points: 400,
        mouths: 40,
        probes: 2000,
        mc_samples: 20_000,
        wscal_radii: vec![0.2, 0.15, 0.1],
        ..Method1Config::default()
    }
}

fn small_m2(text: &str) -> Method2Config {
    let base = "[method2]\nlevels = 3\nlattice_spacing = 0.3\ntube_points = 300\nmouths = 30\nprobes = 2000\n";
    Method2Config::from_config(&Config::parse(&format!("{base}{text}")).unwrap()).unwrap()
}

#[test]
fn method1_ball_bookkeeping() {
    let rep = run_method1(&small_m1(Method1Region::Ball { radius: 0.5 })).unwrap();
    let ball = sphere_ball_volume(1.0, 0.5);
    for row in &rep.rows {
        assert_eq!(row.vol_n, 2.0 * PI * PI);
        assert!((row.vol_n - row.vol_limit - ball).abs() < 1e-12);
    }
    assert_eq!(parse_report(&rep.to_csv()).unwrap().len(), rep.rows.len());
}

#[test]
fn method1_refuses_regions_too_small_to_sew() {
    // a ball of diameter 0.2 holds one centre at packing radius 0.4
    let cfg = Method1Config { levels: 0, ..small_m1(Method1Region::Ball { radius: 0.1 }) };
    let err = run_method1(&cfg).unwrap_err();
    assert!(matches!(err, Error::RegionTooSmall { .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn method2_anchor_geometry() {
    let a = anchor_radii(Method2Region::Ring, 4.0 * PI, 1.5).unwrap();
    assert_eq!((a.r0, a.r1), (1.0, 0.5));
    assert!(anchor_radii(Method2Region::Ball, 4.0 * PI, 1.0).is_err());
}

#[test]
fn method2_small_runs() {
    for region in ["ring", "sphere", "ball"] {
        let cfg = small_m2(&format!("region = {region}\n"));
        let rep = run_method2(&cfg).unwrap();
        let rows = parse_report(&rep.to_csv()).unwrap();
        assert_eq!(rows.len(), 3);
        let a = anchor_radii(cfg.region, cfg.alpha0, cfg.d).unwrap();
        let (lo, hi) = a.window;
        let shell = 4.0 / 3.0 * PI * (hi.powi(3) - lo.powi(3));
        for w in rows.windows(2) {
            assert!(w[1].lip_sym.unwrap() < w[0].lip_sym.unwrap(), "{region}: distortion not decreasing");
        }
        for row in &rows {
            assert_eq!(row.gh_bound, 2.0 * row.eps_dis.max(row.eps_cov));
            let removed = if region == "ball" { 4.0 / 3.0 * PI * a.r1.powi(3) } else { 0.0 };
            assert!((row.vol_limit - (shell - removed)).abs() < 1e-9 * shell, "{region}: {}", row.vol_limit);
        }
        let levels = rep.stage("levels.csv").unwrap();
        assert!(levels.lines().skip(1).all(|l| {
            let certified: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
            let j: f64 = l.split(',').next().unwrap().parse().unwrap();
            certified < 1.0 / j
        }));
    }
}
