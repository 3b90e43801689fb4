//! The `scrunch` subcommands. Each reads its own `[section]` of the config,
//! writes `report.csv` plus stage CSVs into the output directory and a
//! `manifest.txt` echoing every resolved setting.

use std::fmt::Write as _;
use std::path::Path;

use super::config::Config;
use super::method1::{run_method1, Method1Config};
use super::method2::{run_method2, Method2Config};
use crate::error::{Error, Result};
use crate::metric::ModelSpace;
use crate::pulled::{
    pulled_ball_volume_exact, pulled_ball_volume_mc, pulled_total_volume, tubular_scaling_exponent, CompactSetSpec,
    PulledSpace, SetKind,
};
use crate::rotsym::{
    adm_mass, check_admissible, embed, hawking_from_graph, scalar_curvature, schwarzschild_with_grid,
    stripe_profile_with_grid, HawkingProfile,
};
use crate::scalar::{bishop_gromov_density, wscal_estimate, Target, VolumeMode};
use crate::sewing::{
    edited_region_diameter, edited_region_sample, mouth_sample, plan_sewing, plan_sewing_capped, scrunch_map_defect,
    separated_sphere_sample, sewn_volume, tube_sample, SewnPoint, SewnSpace, TunnelModel,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Pull,
    Sew,
    RotSym,
    WScal,
    Method1,
    Method2,
}

impl Command {
    pub fn section(self) -> &'static str {
        match self {
            Command::Pull => "pull",
            Command::Sew => "sew",
            Command::RotSym => "rotsym",
            Command::WScal => "wscal",
            Command::Method1 => "method1",
            Command::Method2 => "method2",
        }
    }
}

/// Run `cmd`; `seed` overrides the section's `seed` key.
pub fn run_command(cmd: Command, cfg: &mut Config, seed: Option<u64>, out: &Path) -> Result<()> {
    if let Some(s) = seed {
        cfg.set(cmd.section(), "seed", s.to_string());
    }
    let files = match cmd {
        Command::Pull => pull(cfg)?,
        Command::Sew => sew(cfg)?,
        Command::RotSym => rotsym(cfg)?,
        Command::WScal => wscal(cfg)?,
        Command::Method1 => {
            let r = run_method1(&Method1Config::from_config(cfg)?)?;
            let mut f = vec![("report.csv".to_string(), r.to_csv())];
            f.extend(r.stages);
            f
        }
        Command::Method2 => {
            let r = run_method2(&Method2Config::from_config(cfg)?)?;
            let mut f = vec![("report.csv".to_string(), r.to_csv())];
            f.extend(r.stages);
            f
        }
    };
    std::fs::create_dir_all(out)?;
    for (name, body) in files {
        std::fs::write(out.join(name), body)?;
    }
    std::fs::write(out.join("manifest.txt"), format!("# scrunch {}\n{}", cmd.section(), cfg.manifest()))?;
    Ok(())
}

type Files = Vec<(String, String)>;

/// Region on a round S³ or Euclid3 named by `region`.
fn region_spec(cfg: &Config, s: &str, default: &str) -> Result<CompactSetSpec> {
    let region = cfg.get_str(s, "region", default);
    let sphere = || -> Result<ModelSpace> { ModelSpace::sphere(cfg.get(s, "curvature", 1.0)?) };
    let (base, kind) = match region.as_str() {
        "circle" => (sphere()?, SetKind::GeodesicCircle),
        "equator" | "equatorial_sphere" => (sphere()?, SetKind::EquatorialSphere),
        "ball" => {
            let base = match cfg.get_str(s, "base", "sphere").as_str() {
                "sphere" => sphere()?,
                "euclid" => ModelSpace::Euclid3,
                other => return Err(Error::Config(format!("[{s}] base = {other:?}; expected sphere | euclid"))),
            };
            let center = match &base {
                ModelSpace::Sphere3 { .. } => [base.radius().unwrap(), 0.0, 0.0, 0.0],
                _ => [0.0; 4],
            };
            let radius = cfg.get(s, "radius", 0.5)?;
            (base, SetKind::RoundBall { center, radius })
        }
        "ring" => (ModelSpace::Euclid3, SetKind::RadialRing { c: cfg.get(s, "radius", 1.0)? }),
        "radial_sphere" => (ModelSpace::Euclid3, SetKind::RadialSphere { c: cfg.get(s, "radius", 1.0)? }),
        other => {
            return Err(Error::Config(format!(
                "[{s}] region = {other:?}; expected circle | equator | ball | ring | radial_sphere"
            )))
        }
    };
    CompactSetSpec::new(&base, kind)
}

fn mode(cfg: &Config, s: &str, default: &str) -> Result<VolumeMode> {
    match cfg.get_str(s, "volume", default).as_str() {
        "auto" => Ok(VolumeMode::Auto),
        "mc" => Ok(VolumeMode::MonteCarlo),
        other => Err(Error::Config(format!("[{s}] volume = {other:?}; expected auto | mc"))),
    }
}

fn pull(cfg: &Config) -> Result<Files> {
    let s = "pull";
    let set = region_spec(cfg, s, "equator")?;
    let radii = cfg.get_list(s, "radii", &[0.2, 0.15, 0.1, 0.05, 0.02])?;
    let m = cfg.get(s, "mc_samples", 200_000usize)?;
    let seed = cfg.get(s, "seed", 1u64)?;
    let y = PulledSpace::new(set.clone());
    let mut rep = String::from("r,vol_exact,vol_mc,sigma_mc\n");
    for (i, &r) in radii.iter().enumerate() {
        let exact = pulled_ball_volume_exact(&y, r).map(|v| format!("{v:e}")).unwrap_or_default();
        let mc = pulled_ball_volume_mc(&y, r, m, seed.wrapping_add(i as u64))?;
        let _ = writeln!(rep, "{r:e},{exact},{:e},{:e}", mc.value, mc.std_err);
    }
    let mut summary = String::from("quantity,value\n");
    let _ = writeln!(summary, "set,{}", set.describe());
    let total = match y.base() {
        ModelSpace::Euclid3 => String::new(),
        _ => format!("{:e}", pulled_total_volume(&y)?),
    };
    let _ = writeln!(summary, "total_volume,{total}");
    let _ = writeln!(summary, "removed_measure,{:e}", set.measure()?);
    if radii.len() >= 4 {
        let e = tubular_scaling_exponent(&set, &radii, m, seed ^ 0x7b5e)?;
        let _ = writeln!(summary, "tube_exponent,{e:e}");
    }
    Ok(vec![("report.csv".into(), rep), ("summary.csv".into(), summary), ("pulled.txt".into(), y.to_text())])
}

fn sew(cfg: &Config) -> Result<Files> {
    let s = "sew";
    let set = region_spec(cfg, s, "circle")?;
    let base = set.space().clone();
    let r = cfg.get(s, "r", 0.2)?;
    let delta = cfg.get(s, "delta", 0.02)?;
    let h_factor = cfg.get(s, "h_factor", 3.0)?;
    let capped = cfg.get(s, "cap_delta", true)?;
    let seed = cfg.get(s, "seed", 1u64)?;
    let plan = if capped { plan_sewing_capped(&base, &set, r, delta)? } else { plan_sewing(&base, &set, r, delta)? };
    let k = plan.curvature;
    let tunnels = TunnelModel::with_h_factor(k, plan.delta, h_factor);
    let n = SewnSpace::new(base.clone(), set.clone(), plan, tunnels)?;
    let plan_csv = n.plan_csv(cfg.get(s, "plan_mouth_rows", 2000u64)?);

    let edited = edited_region_sample(&n, cfg.get(s, "diameter_points", 2000usize)?, cfg.get(s, "diameter_mouths", 200usize)?, seed);
    let diam = edited_region_diameter(&n, &edited)?;
    let cert = 16.0 * n.plan().r + 3.0 * n.tunnels().h;

    let y = PulledSpace::new(set);
    let mut sample: Vec<SewnPoint> = separated_sphere_sample(
        &base,
        cfg.get(s, "sample_candidates", 20_000usize)?,
        cfg.get(s, "sample_sep", 0.2)?,
        seed ^ 0x11,
    )?
    .into_iter()
    .filter(|p| n.removed_ball(p).is_none())
    .map(SewnPoint::Base)
    .collect();
    sample.extend(tube_sample(&n, cfg.get(s, "tube_points", 2000usize)?, 2.0 * n.plan().r, seed ^ 0x12).into_iter().map(SewnPoint::Base));
    sample.extend(mouth_sample(&n, cfg.get(s, "mouths", 100usize)?, seed ^ 0x13));
    let probes = crate::metric::sample_sphere(k, cfg.get(s, "probes", 10_000usize)?, seed ^ 0x14)?.coords();
    let d = scrunch_map_defect(&n, &y, &sample, &probes)?;
    let mut rep = String::from(
        "r,delta,delta_max,h,n_bar,n_mouths,diameter,certificate,slack,eps_dis,eps_cov,gh_bound,lip,vol_N,vol_limit\n",
    );
    let p = n.plan();
    let _ = writeln!(
        rep,
        "{:e},{:e},{:e},{:e},{},{},{diam:e},{cert:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
        p.r,
        p.delta,
        p.delta_max,
        n.tunnels().h,
        p.n_bar(),
        p.n_mouths(),
        cert - diam,
        d.eps_dis,
        d.eps_cov,
        d.gh_bound,
        d.lip,
        sewn_volume(&n)?,
        pulled_total_volume(&y)?
    );
    Ok(vec![("report.csv".into(), rep), ("plan.csv".into(), plan_csv)])
}

fn rotsym(cfg: &Config) -> Result<Files> {
    let s = "rotsym";
    let grid = cfg.get(s, "grid", 10_001usize)?;
    let kind = cfg.get_str(s, "profile", "schwarzschild");
    let profile: HawkingProfile = match kind.as_str() {
        "schwarzschild" => {
            schwarzschild_with_grid(cfg.get(s, "m0", 1.0)?, cfg.get(s, "r_max", 10.0)?, grid)?.0
        }
        "stripe" => stripe_profile_with_grid(
            cfg.get(s, "K", 1.0)?,
            cfg.get(s, "a", 0.2)?,
            cfg.get(s, "b", 0.6)?,
            cfg.get(s, "r_min", 0.0)?,
            cfg.get(s, "r_max", 10.0)?,
            cfg.get(s, "alpha", 0.5)?,
            grid,
        )?,
        other => return Err(Error::Config(format!("[rotsym] profile = {other:?}; expected schwarzschild | stripe"))),
    };
    let issues = check_admissible(&profile);
    if !issues.is_empty() {
        return Err(Error::Inadmissible(format!("{} violation(s), first {:?}", issues.len(), issues[0])));
    }
    let g = embed(&profile, cfg.get(s, "z_min", 0.0)?)?;
    let back = hawking_from_graph(&g)?;
    let err = profile.mass.iter().zip(&back.mass).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let curv = scalar_curvature(&profile);
    let mut curv_csv = String::from("r,R\n");
    for (r, v) in curv.r.iter().zip(&curv.scal) {
        let _ = writeln!(curv_csv, "{r:e},{v:e}");
    }
    let adm = adm_mass(&profile);
    let finite: Vec<f64> = curv.scal.iter().copied().filter(|v| v.is_finite()).collect();
    let mut rep = String::from("quantity,value\n");
    let _ = writeln!(rep, "profile,{kind}");
    let _ = writeln!(rep, "adm_mass,{:e}", adm.value);
    let _ = writeln!(rep, "adm_exact,{}", adm.exact);
    let _ = writeln!(rep, "roundtrip_error,{err:e}");
    let _ = writeln!(rep, "scal_min,{:e}", finite.iter().copied().fold(f64::INFINITY, f64::min));
    let _ = writeln!(rep, "scal_max,{:e}", finite.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    for st in &profile.stripes {
        let inside: Vec<f64> = curv
            .r
            .iter()
            .zip(&curv.scal)
            .filter(|(r, v)| **r > st.a && **r < st.b && v.is_finite())
            .map(|(_, v)| *v)
            .collect();
        let dev = inside.iter().map(|v| (v - 6.0 * st.k).abs()).fold(0.0, f64::max);
        let _ = writeln!(rep, "stripe_scal_deviation,{dev:e}");
    }
    Ok(vec![
        ("report.csv".into(), rep),
        ("hawking.csv".into(), profile.to_csv()),
        ("graph.csv".into(), g.to_csv()),
        ("curvature.csv".into(), curv_csv),
    ])
}

fn wscal(cfg: &Config) -> Result<Files> {
    let s = "wscal";
    let radii = cfg.get_list(s, "radii", &[0.5, 0.4, 0.3, 0.2, 0.1])?;
    let m = cfg.get(s, "mc_samples", 1_000_000usize)?;
    let seed = cfg.get(s, "seed", 1u64)?;
    let space = cfg.get_str(s, "space", "sphere");
    let (p, d) = match space.as_str() {
        "euclid" | "sphere" => {
            let base = if space == "euclid" { ModelSpace::Euclid3 } else { ModelSpace::sphere(cfg.get(s, "curvature", 1.0)?)? };
            let center = match &base {
                ModelSpace::Sphere3 { .. } => [base.radius().unwrap(), 0.0, 0.0, 0.0],
                _ => [0.0; 4],
            };
            let md = mode(cfg, s, "mc")?;
            let t = Target::Model(&base, center);
            (wscal_estimate(t, &radii, m, seed, md)?, bishop_gromov_density(t, &radii, m, seed ^ 0xd, md)?)
        }
        "pulled" => {
            let y = PulledSpace::new(region_spec(cfg, s, "equator")?);
            let md = mode(cfg, s, "auto")?;
            let t = Target::Pulled(&y);
            (wscal_estimate(t, &radii, m, seed, md)?, bishop_gromov_density(t, &radii, m, seed ^ 0xd, md)?)
        }
        other => return Err(Error::Config(format!("[wscal] space = {other:?}; expected euclid | sphere | pulled"))),
    };
    let mut scaled = String::from("r,Q_r4\n");
    for (r, q) in p.radii.iter().zip(&p.q) {
        let _ = writeln!(scaled, "{r:e},{:e}", q * r.powi(4));
    }
    Ok(vec![("report.csv".into(), p.to_csv()), ("density.csv".into(), d.to_csv()), ("scaled.csv".into(), scaled)])
}
