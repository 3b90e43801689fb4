use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bilip::{bilip_distortion, flat_graph};
use super::config::Config;
use super::report::{ConvergenceReport, ConvergenceRow};
use crate::error::{Error, Result};
use crate::metric::{uniform_in_ball3, ModelSpace, Point};
use crate::pulled::{CompactSetSpec, PulledSpace, SetKind};
use crate::rotsym::{embed, stripe_profile, RotSymSpace, TableResolution};
use crate::scalar::{bishop_gromov_density, Target, VolumeMode};
use crate::sewing::{
    mouth_sample, plan_sewing_capped, sewn_volume, transfer_defect, tube_sample, SewnPoint, SewnSpace, TunnelModel,
};

const PLAN_MOUTH_ROWS: u64 = 2000;
const MAX_HALVINGS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method2Region {
    /// Round circle in the middle of the stripe.
    Ring,
    /// Coordinate 2-sphere in the middle of the stripe.
    Sphere,
    /// Coordinate 3-ball at the bottom of a stripe containing the axis.
    Ball,
}

/// Method II: stripe manifolds M_j with mass cap 1/j, matched radially with
/// the Euclidean D-neighbourhood of the sphere of area α₀.
#[derive(Clone, Debug, PartialEq)]
pub struct Method2Config {
    pub region: Method2Region,
    pub alpha0: f64,
    pub d: f64,
    pub levels: usize,
    /// Stripe curvature K_j = κ/j.
    pub kappa: f64,
    pub delta_factor: f64,
    pub h_factor: f64,
    /// Cube edge of the body-centred cubic base sample (covering radius √5/4 of it).
    pub lattice_spacing: f64,
    pub tube_points: usize,
    pub mouths: usize,
    pub probes: usize,
    pub density_radius: f64,
    pub table: TableResolution,
    pub seed: u64,
}

impl Default for Method2Config {
    fn default() -> Self {
        Method2Config {
            region: Method2Region::Ring,
            alpha0: 4.0 * PI,
            d: 1.0,
            levels: 5,
            kappa: 0.5,
            delta_factor: 0.1,
            h_factor: 3.0,
            lattice_spacing: 0.16,
            tube_points: 3000,
            mouths: 100,
            probes: 20_000,
            density_radius: 0.5,
            table: TableResolution { n_r: 97, n_phi: 97, n_shoot: 96, n_arc: 4097 },
            seed: 1,
        }
    }
}

impl Method2Config {
    pub fn from_config(c: &Config) -> Result<Self> {
        let d = Self::default();
        let s = "method2";
        let region = match c.get_str(s, "region", "ring").as_str() {
            "ring" => Method2Region::Ring,
            "sphere" => Method2Region::Sphere,
            "ball" => Method2Region::Ball,
            other => return Err(Error::Config(format!("[method2] region = {other:?}; expected ring | sphere | ball"))),
        };
        let t = d.table;
        Ok(Method2Config {
            region,
            alpha0: c.get(s, "alpha0", d.alpha0)?,
            d: c.get(s, "D", if region == Method2Region::Ball { 1.25 } else { d.d })?,
            levels: c.get(s, "levels", d.levels)?,
            kappa: c.get(s, "kappa", d.kappa)?,
            delta_factor: c.get(s, "delta_factor", d.delta_factor)?,
            h_factor: c.get(s, "h_factor", d.h_factor)?,
            lattice_spacing: c.get(s, "lattice_spacing", d.lattice_spacing)?,
            tube_points: c.get(s, "tube_points", d.tube_points)?,
            mouths: c.get(s, "mouths", d.mouths)?,
            probes: c.get(s, "probes", d.probes)?,
            density_radius: c.get(s, "density_radius", d.density_radius)?,
            table: TableResolution {
                n_r: c.get(s, "table_n_r", t.n_r)?,
                n_phi: c.get(s, "table_n_phi", t.n_phi)?,
                n_shoot: c.get(s, "table_n_shoot", t.n_shoot)?,
                n_arc: c.get(s, "table_n_arc", t.n_arc)?,
            },
            seed: c.get(s, "seed", d.seed)?,
        })
    }
}

/// Radii of the construction: r₀ = (α₀/4π)^½ and, for ring and sphere, the
/// anchor radius r₁ = r₀ − D/2 if r₀ ≥ D, else r₀/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnchorRadii {
    pub r0: f64,
    pub r1: f64,
    /// Coordinate window [max(0, r₀ − D), r₀ + D].
    pub window: (f64, f64),
}

pub fn anchor_radii(region: Method2Region, alpha0: f64, d: f64) -> Result<AnchorRadii> {
    if !(alpha0 > 0.0 && d > 0.0) || !alpha0.is_finite() || !d.is_finite() {
        return Err(Error::Domain(format!("need α₀ > 0 and D > 0, got α₀ = {alpha0}, D = {d}")));
    }
    let r0 = (alpha0 / (4.0 * PI)).sqrt();
    let r1 = match region {
        Method2Region::Ball => {
            if d <= r0 {
                return Err(Error::Domain(format!("the ball construction needs D > r₀ = {r0}, got D = {d}")));
            }
            r0 / 4.0
        }
        _ if r0 - d >= 0.0 => r0 - d / 2.0,
        _ => r0 / 2.0,
    };
    Ok(AnchorRadii { r0, r1, window: ((r0 - d).max(0.0), r0 + d) })
}

/// The j-th manifold of the sequence.
#[derive(Clone, Debug)]
pub struct StripeLevel {
    pub j: usize,
    /// Stripe r⁻¹(a, b) of curvature k and mass cap α = 1/j.
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub alpha: f64,
    pub space: Arc<RotSymSpace>,
}

pub fn stripe_level(cfg: &Method2Config, radii: &AnchorRadii, j: usize) -> Result<StripeLevel> {
    if j == 0 {
        return Err(Error::Domain("levels start at j = 1".into()));
    }
    let jf = j as f64;
    let (a, b) = match cfg.region {
        Method2Region::Ball => (0.0, 2.0 * radii.r1),
        _ => {
            let w = (0.5 / jf).min(radii.r1);
            (radii.r1 - w, radii.r1 + w)
        }
    };
    let k = cfg.kappa / jf;
    let alpha = 1.0 / jf;
    let (lo, hi) = radii.window;
    if b > hi || (a < lo && lo > 0.0) {
        return Err(Error::StripeInadmissible(format!("stripe [{a}, {b}] is not inside the window [{lo}, {hi}]")));
    }
    let profile = stripe_profile(k, a, b, 0.0, hi, alpha)?;
    let space = RotSymSpace::new(profile, radii.window, cfg.table)?;
    Ok(StripeLevel { j, a, b, k, alpha, space: Arc::new(space) })
}

fn region_kinds(cfg: &Method2Config, radii: &AnchorRadii, level: &StripeLevel) -> (SetKind, SetKind) {
    match cfg.region {
        Method2Region::Ring => (SetKind::RadialRing { c: radii.r1 }, SetKind::RadialRing { c: radii.r1 }),
        Method2Region::Sphere => (SetKind::RadialSphere { c: radii.r1 }, SetKind::RadialSphere { c: radii.r1 }),
        Method2Region::Ball => (
            SetKind::RoundBall { center: [0.0; 4], radius: level.space.arc(radii.r1) },
            SetKind::RoundBall { center: [0.0; 4], radius: radii.r1 },
        ),
    }
}

/// Diagonal choice: halve r (δ = f·r) until the certified Method I bound
/// 16r + 3h(δ) drops below 1/j.
fn diagonal_radius(cfg: &Method2Config, room: f64, j: usize) -> Result<(f64, usize)> {
    let target = 1.0 / j as f64;
    let mut r = (0.25 / j as f64).min(room / 2.0);
    for i in 0..=MAX_HALVINGS {
        if 16.0 * r + 3.0 * cfg.h_factor * cfg.delta_factor * r < target {
            return Ok((r, i));
        }
        r *= 0.5;
    }
    Err(Error::Budget(format!("no sewing radius after {MAX_HALVINGS} halvings meets the bound 1/{j}")))
}

fn window_points(window: (f64, f64), count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = uniform_in_ball3(&mut rng, window.1);
        if (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() >= window.0 {
            out.push([p[0], p[1], p[2], 0.0]);
        }
    }
    out
}

/// Body-centred cubic lattice points of the coordinate shell `window`,
/// shifted off the coordinate planes.
pub fn bcc_lattice(window: (f64, f64), a: f64) -> Vec<Point> {
    const SHIFT: [f64; 3] = [0.1234, 0.3771, 0.2913];
    let m = (window.1 / a).ceil() as i64 + 1;
    let mut out = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            for k in -m..=m {
                for half in [0.0, 0.5] {
                    let p = [
                        (i as f64 + half + SHIFT[0]) * a,
                        (j as f64 + half + SHIFT[1]) * a,
                        (k as f64 + half + SHIFT[2]) * a,
                        0.0,
                    ];
                    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    if r >= window.0 && r <= window.1 {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn sample_sewn(n: &SewnSpace, cfg: &Method2Config, window: (f64, f64), seed: u64) -> Vec<SewnPoint> {
    let mut pts: Vec<SewnPoint> = bcc_lattice(window, cfg.lattice_spacing)
        .into_iter()
        .filter(|p| n.removed_ball(p).is_none())
        .map(SewnPoint::Base)
        .collect();
    let r = n.plan().r;
    pts.extend(tube_sample(n, cfg.tube_points, 2.0 * r, seed ^ 0x5eed_0001).into_iter().map(SewnPoint::Base));
    pts.extend(mouth_sample(n, cfg.mouths, seed ^ 0x5eed_0002));
    pts
}

pub fn run_method2(cfg: &Method2Config) -> Result<ConvergenceReport> {
    if !(cfg.lattice_spacing > 0.0) {
        return Err(Error::Domain("lattice_spacing must be positive".into()));
    }
    if cfg.levels == 0 {
        return Err(Error::Domain("need at least one level".into()));
    }
    let radii = anchor_radii(cfg.region, cfg.alpha0, cfg.d)?;
    let (lo, hi) = radii.window;
    let e3 = ModelSpace::Euclid3;
    let flat = flat_graph(radii.window, 4096);
    let probes = window_points(radii.window, cfg.probes, cfg.seed ^ 0x9b0b_e500);
    let mut report = ConvergenceReport::default();
    let mut levels_csv = String::from("j,a,b,K,alpha,lip,lip_inv,L,D,r_sew,halvings,certified\n");
    let mut y_last = None;
    for j in 1..=cfg.levels {
        let at = |e: Error| e.context(format!("level j={j}"));
        let level = stripe_level(cfg, &radii, j).map_err(at)?;
        let base = ModelSpace::RotSym(level.space.clone());
        let (kind_j, kind_inf) = region_kinds(cfg, &radii, &level);
        let region = CompactSetSpec::new(&base, kind_j).map_err(at)?;
        let y = PulledSpace::new(CompactSetSpec::new(&e3, kind_inf).map_err(at)?);

        let g = embed(level.space.profile(), 0.0).map_err(at)?;
        let bl = bilip_distortion(&g, &flat, radii.window).map_err(at)?;

        let room = match cfg.region {
            Method2Region::Ball => level.b - radii.r1,
            _ => (level.b - level.a) / 2.0,
        };
        let (r, halvings) = diagonal_radius(cfg, room, j).map_err(at)?;
        let plan = plan_sewing_capped(&base, &region, r, cfg.delta_factor * r).map_err(at)?;
        let tunnels = TunnelModel::with_h_factor(level.k, plan.delta, cfg.h_factor);
        let n = SewnSpace::new(base, region, plan, tunnels).map_err(at)?;
        report.stages.push((format!("plan_j{j}.csv"), n.plan_csv(PLAN_MOUTH_ROWS)));
        let sample = sample_sewn(&n, cfg, radii.window, cfg.seed.wrapping_add(1000 * j as u64));
        let d = transfer_defect(&n, &y, &sample, &probes).map_err(at)?;
        let vol_limit = 4.0 / 3.0 * PI * (hi.powi(3) - lo.powi(3)) - y.set.measure()?;
        let h = n.tunnels().h;
        let _ = writeln!(
            levels_csv,
            "{j},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{r:e},{halvings},{:e}",
            level.a,
            level.b,
            level.k,
            level.alpha,
            bl.lip,
            bl.lip_inv,
            bl.l,
            bl.d,
            16.0 * r + 3.0 * h
        );
        report.rows.push(ConvergenceRow {
            j,
            r,
            delta: n.plan().delta,
            h,
            eps_dis: d.eps_dis,
            eps_cov: d.eps_cov,
            gh_bound: d.gh_bound,
            vol_n: sewn_volume(&n).map_err(at)?,
            vol_limit,
            lip_sum: Some(bl.l),
            lip_sym: Some(bl.d),
            n_bar: n.plan().n_bar(),
            sample: d.sample,
        });
        y_last = Some(y);
    }
    report.stages.push(("levels.csv".into(), levels_csv));
    let y = y_last.expect("at least one level");
    let dens = bishop_gromov_density(Target::Pulled(&y), &[cfg.density_radius], 200_000, cfg.seed ^ 0xde75, VolumeMode::Auto)?;
    report.stages.push(("density_limit.csv".into(), dens.to_csv()));
    Ok(report)
}
