use std::fmt::Write as _;

use super::config::Config;
use super::report::{ConvergenceReport, ConvergenceRow};
use crate::error::{Error, Result};
use crate::metric::{sample_sphere, ModelSpace};
use crate::pulled::{pulled_ball_volume_exact, pulled_ball_volume_mc, pulled_total_volume, CompactSetSpec, PulledSpace, SetKind};
use crate::scalar::{wscal_estimate, Target, VolumeMode};
use crate::sewing::{
    mouth_sample, plan_sewing_capped, scrunch_map_defect, separated_sphere_sample, sewn_volume, tube_sample, SewnPoint,
    SewnSpace, TunnelModel,
};

/// Mouth rows written per plan CSV.
const PLAN_MOUTH_ROWS: u64 = 2000;

#[derive(Clone, Debug, PartialEq)]
pub enum Method1Region {
    Circle,
    Equator,
    /// Ball around (ρ, 0, 0, 0).
    Ball { radius: f64 },
}

/// Method I: sew A₀ ⊂ S³ at r_j = r₀·2^(−j), δ_j = f·r_j for j = 0..=levels.
#[derive(Clone, Debug, PartialEq)]
pub struct Method1Config {
    pub curvature: f64,
    pub region: Method1Region,
    pub r0: f64,
    pub levels: usize,
    pub delta_factor: f64,
    pub h_factor: f64,
    /// Uniform candidates thinned to a `sample_sep`-separated set.
    pub sample_candidates: usize,
    pub sample_sep: f64,
    pub tube_points: usize,
    pub mouths: usize,
    pub probes: usize,
    pub wscal_radii: Vec<f64>,
    pub mc_samples: usize,
    pub ball_check_radius: f64,
    pub seed: u64,
}

impl Default for Method1Config {
    fn default() -> Self {
        Method1Config {
            curvature: 1.0,
            region: Method1Region::Equator,
            r0: 0.4,
            levels: 4,
            delta_factor: 0.1,
            h_factor: 3.0,
            sample_candidates: 60_000,
            sample_sep: 0.15,
            tube_points: 3000,
            mouths: 100,
            probes: 20_000,
            wscal_radii: vec![0.2, 0.15, 0.1, 0.07, 0.05],
            mc_samples: 200_000,
            ball_check_radius: 0.1,
            seed: 1,
        }
    }
}

impl Method1Config {
    pub fn from_config(c: &Config) -> Result<Self> {
        let d = Self::default();
        let s = "method1";
        let region = match c.get_str(s, "region", "equator").as_str() {
            "circle" => Method1Region::Circle,
            "equator" | "equatorial_sphere" => Method1Region::Equator,
            "ball" => Method1Region::Ball { radius: c.get(s, "ball_radius", 0.5)? },
            other => return Err(Error::Config(format!("[method1] region = {other:?}; expected circle | equator | ball"))),
        };
        Ok(Method1Config {
            curvature: c.get(s, "curvature", d.curvature)?,
            region,
            r0: c.get(s, "r0", d.r0)?,
            levels: c.get(s, "levels", d.levels)?,
            delta_factor: c.get(s, "delta_factor", d.delta_factor)?,
            h_factor: c.get(s, "h_factor", d.h_factor)?,
            sample_candidates: c.get(s, "sample_candidates", d.sample_candidates)?,
            sample_sep: c.get(s, "sample_sep", d.sample_sep)?,
            tube_points: c.get(s, "tube_points", d.tube_points)?,
            mouths: c.get(s, "mouths", d.mouths)?,
            probes: c.get(s, "probes", d.probes)?,
            wscal_radii: c.get_list(s, "wscal_radii", &d.wscal_radii)?,
            mc_samples: c.get(s, "mc_samples", d.mc_samples)?,
            ball_check_radius: c.get(s, "ball_check_radius", d.ball_check_radius)?,
            seed: c.get(s, "seed", d.seed)?,
        })
    }

    fn region_spec(&self, base: &ModelSpace) -> Result<CompactSetSpec> {
        let kind = match &self.region {
            Method1Region::Circle => SetKind::GeodesicCircle,
            Method1Region::Equator => SetKind::EquatorialSphere,
            Method1Region::Ball { radius } => {
                SetKind::RoundBall { center: [base.radius().unwrap(), 0.0, 0.0, 0.0], radius: *radius }
            }
        };
        CompactSetSpec::new(base, kind)
    }
}

/// Sample of N: a separated sample of the base, points of T_2r(A₀) and mouths.
fn sample_sewn(n: &SewnSpace, cfg: &Method1Config, seed: u64) -> Result<Vec<SewnPoint>> {
    let base = separated_sphere_sample(n.base(), cfg.sample_candidates, cfg.sample_sep, seed)?;
    let mut pts: Vec<SewnPoint> =
        base.into_iter().filter(|p| n.removed_ball(p).is_none()).map(SewnPoint::Base).collect();
    let r = n.plan().r;
    pts.extend(tube_sample(n, cfg.tube_points, 2.0 * r, seed ^ 0x5eed_0001).into_iter().map(SewnPoint::Base));
    pts.extend(mouth_sample(n, cfg.mouths, seed ^ 0x5eed_0002));
    Ok(pts)
}

pub fn run_method1(cfg: &Method1Config) -> Result<ConvergenceReport> {
    if !(cfg.r0 > 0.0 && cfg.delta_factor > 0.0 && cfg.h_factor > 0.0) {
        return Err(Error::Domain("r0, delta_factor and h_factor must be positive".into()));
    }
    let base = ModelSpace::sphere(cfg.curvature)?;
    let region = cfg.region_spec(&base)?;
    let y = PulledSpace::new(region.clone());
    let vol_limit = pulled_total_volume(&y)?;
    let probes = sample_sphere(cfg.curvature, cfg.probes, cfg.seed ^ 0x9b0b_e500)?.coords();
    let mut report = ConvergenceReport::default();
    for j in 0..=cfg.levels {
        let at = |e: Error| e.context(format!("level j={j}"));
        let r = cfg.r0 * 0.5f64.powi(j as i32);
        let plan = plan_sewing_capped(&base, &region, r, cfg.delta_factor * r).map_err(at)?;
        let tunnels = TunnelModel::with_h_factor(cfg.curvature, plan.delta, cfg.h_factor);
        let n = SewnSpace::new(base.clone(), region.clone(), plan, tunnels).map_err(at)?;
        report.stages.push((format!("plan_j{j}.csv"), n.plan_csv(PLAN_MOUTH_ROWS)));
        let seed = cfg.seed.wrapping_add(1000 * j as u64);
        let sample = sample_sewn(&n, cfg, seed).map_err(at)?;
        let d = scrunch_map_defect(&n, &y, &sample, &probes).map_err(at)?;
        report.rows.push(ConvergenceRow {
            j,
            r,
            delta: n.plan().delta,
            h: n.tunnels().h,
            eps_dis: d.eps_dis,
            eps_cov: d.eps_cov,
            gh_bound: d.gh_bound,
            vol_n: sewn_volume(&n).map_err(at)?,
            vol_limit,
            lip_sum: None,
            lip_sym: None,
            n_bar: n.plan().n_bar(),
            sample: d.sample,
        });
    }

    // limit diagnostics at p₀
    let w = wscal_estimate(Target::Pulled(&y), &cfg.wscal_radii, cfg.mc_samples, cfg.seed ^ 0x05ca_1a00, VolumeMode::Auto)
        .map_err(|e| e.context("wScal at the limit"))?;
    report.stages.push(("wscal_limit.csv".into(), w.to_csv()));
    let rb = cfg.ball_check_radius;
    let mc = pulled_ball_volume_mc(&y, rb, cfg.mc_samples, cfg.seed ^ 0xba11_0000)?;
    let mut s = String::from("r,vol_mc,sigma,vol_exact\n");
    let exact = pulled_ball_volume_exact(&y, rb).map(|v| format!("{v:e}")).unwrap_or_default();
    let _ = writeln!(s, "{rb:e},{:e},{:e},{exact}", mc.value, mc.std_err);
    report.stages.push(("limit_ball.csv".into(), s));
    Ok(report)
}
