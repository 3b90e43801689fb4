//! Volume-based curvature diagnostics: the weak scalar curvature quotient
//! Q(r) = 30·(V_E(r) − Vol B(p, r)) / (r²·V_E(r)) and the Bishop–Gromov
//! density Vol B(p, r) / V_E(r).

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{domain, Error, Result};
use crate::metric::{ball_volume_mc, Aabb, ModelSampler, ModelSpace, Point, Region, VolumeEstimate};
use crate::pulled::{pulled_ball_volume_exact, pulled_ball_volume_mc, PulledSpace};

/// Slopes below this classify Q(r) as divergent.
pub const DIVERGENCE_SLOPE: f64 = -0.5;

/// Where the balls are centred.
#[derive(Clone, Copy)]
pub enum Target<'a> {
    Model(&'a ModelSpace, Point),
    /// Balls around the pulled point p₀.
    Pulled(&'a PulledSpace),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeMode {
    /// Closed forms where available, Monte Carlo otherwise.
    Auto,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WScalFit {
    /// Q(r) ≈ limit + c·r².
    Finite { limit: f64, c: f64 },
    /// Q(r) ≈ c·r^s with s < 0.
    Divergent { c: f64, s: f64 },
}

#[derive(Clone, Debug)]
pub struct WScalProfile {
    pub radii: Vec<f64>,
    pub q: Vec<f64>,
    pub sigma: Vec<f64>,
    pub volumes: Vec<VolumeEstimate>,
    /// log-log slope of |Q| against r, used to classify.
    pub slope: f64,
    pub fit: WScalFit,
    pub residuals: Vec<f64>,
}

impl WScalProfile {
    pub fn limit(&self) -> Option<f64> {
        match self.fit {
            WScalFit::Finite { limit, .. } => Some(limit),
            WScalFit::Divergent { .. } => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,Q,sigma\n");
        for i in 0..self.radii.len() {
            let _ = writeln!(s, "{:e},{:e},{:e}", self.radii[i], self.q[i], self.sigma[i]);
        }
        match self.fit {
            WScalFit::Finite { limit, c } => {
                let _ = writeln!(s, "# fit = finite");
                let _ = writeln!(s, "# limit = {limit:e}");
                let _ = writeln!(s, "# c = {c:e}");
            }
            WScalFit::Divergent { c, s: e } => {
                let _ = writeln!(s, "# fit = divergent");
                let _ = writeln!(s, "# c = {c:e}");
                let _ = writeln!(s, "# exponent = {e:e}");
            }
        }
        let _ = writeln!(s, "# slope = {:e}", self.slope);
        let res: Vec<String> = self.residuals.iter().map(|r| format!("{r:e}")).collect();
        let _ = writeln!(s, "# residuals = {}", res.join(" "));
        s
    }
}

pub fn euclid_ball_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r.powi(3)
}

/// Vol B(center, r) for the target, with its standard error.
pub fn target_ball_volume(t: Target<'_>, r: f64, m: usize, seed: u64, mode: VolumeMode) -> Result<VolumeEstimate> {
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    match t {
        Target::Model(space, p) => {
            if !space.contains(&p) {
                return domain("center is not in the space");
            }
            if mode == VolumeMode::Auto {
                if let (Some(v), ModelSpace::Sphere3 { .. } | ModelSpace::Euclid3) = (space.ball_volume_exact(r), space) {
                    return Ok(VolumeEstimate { value: v, std_err: 0.0, samples: 0 });
                }
            }
            let region = match space {
                ModelSpace::RotSym(_) => Region::Box(Aabb::cube(&p, r)),
                _ => {
                    if let Some(rho) = space.radius() {
                        if r >= PI * rho {
                            return domain("radius exceeds the injectivity radius");
                        }
                    }
                    Region::Normal { center: p, radius: r }
                }
            };
            let s = ModelSampler::new(space.clone(), region)?;
            ball_volume_mc(&s, &p, r, m, seed)
        }
        Target::Pulled(y) => {
            if mode == VolumeMode::Auto {
                if let Some(v) = pulled_ball_volume_exact(y, r) {
                    return Ok(VolumeEstimate { value: v, std_err: 0.0, samples: 0 });
                }
            }
            pulled_ball_volume_mc(y, r, m, seed)
        }
    }
}

fn check_radii(r_list: &[f64]) -> Result<()> {
    if r_list.len() < 3 {
        return domain("need at least three radii");
    }
    if r_list.iter().any(|r| !(*r > 0.0)) || r_list.windows(2).any(|w| !(w[1] < w[0])) {
        return domain("radii must be positive and strictly decreasing");
    }
    Ok(())
}

/// Q(r_i) per radius plus the finite / divergent classification.
pub fn wscal_estimate(t: Target<'_>, r_list: &[f64], m: usize, seed: u64, mode: VolumeMode) -> Result<WScalProfile> {
    check_radii(r_list)?;
    let mut q = Vec::new();
    let mut sigma = Vec::new();
    let mut volumes = Vec::new();
    for (i, &r) in r_list.iter().enumerate() {
        let v = target_ball_volume(t, r, m, seed.wrapping_add(i as u64), mode)?;
        let ve = euclid_ball_volume(r);
        let deficit = (ve - v.value).abs();
        if v.std_err > 0.0 && v.std_err > 0.1 * deficit && deficit > 0.0 {
            let need = (m as f64 * (v.std_err / (0.1 * deficit)).powi(2)).ceil();
            return Err(Error::Budget(format!(
                "Monte Carlo error {:.3e} exceeds 10% of the volume deficit {deficit:.3e} at r = {r}; need about M = {need:e}",
                v.std_err
            )));
        }
        q.push(30.0 * (ve - v.value) / (r * r * ve));
        sigma.push(30.0 * v.std_err / (r * r * ve));
        volumes.push(v);
    }
    let (slope, _) = loglog_fit(r_list, &q);
    let (fit, residuals) = if slope < DIVERGENCE_SLOPE && q.iter().all(|v| v.abs() > 0.0) {
        let (s, b) = loglog_fit(r_list, &q);
        let sign = q[q.len() - 1].signum();
        let c = sign * b.exp();
        let res = r_list.iter().zip(&q).map(|(r, v)| v - c * r.powf(s)).collect();
        (WScalFit::Divergent { c, s }, res)
    } else {
        let x: Vec<f64> = r_list.iter().map(|r| r * r).collect();
        let (c, limit) = linear_fit(&x, &q);
        let res = x.iter().zip(&q).map(|(x, v)| v - (limit + c * x)).collect();
        (WScalFit::Finite { limit, c }, res)
    };
    Ok(WScalProfile { radii: r_list.to_vec(), q, sigma, volumes, slope, fit, residuals })
}

/// Least squares y ≈ a·x + b, returns (a, b).
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (a, my - a * mx)
}

/// Slope and intercept of log|y| against log x (zeros give slope 0).
fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    if y.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return (0.0, 0.0);
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    linear_fit(&lx, &ly)
}

#[derive(Clone, Debug)]
pub struct DensityProfile {
    pub radii: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma: Vec<f64>,
    /// θ(r) > 1 + 3σ for some r.
    pub exceeds_one: bool,
}

impl DensityProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,theta,sigma\n");
        for i in 0..self.radii.len() {
            let _ = writeln!(s, "{:e},{:e},{:e}", self.radii[i], self.theta[i], self.sigma[i]);
        }
        let _ = writeln!(s, "# density_exceeds_one = {}", self.exceeds_one);
        s
    }
}

/// θ(r) = Vol B(p, r) / V_E(r) per radius.
pub fn bishop_gromov_density(t: Target<'_>, r_list: &[f64], m: usize, seed: u64, mode: VolumeMode) -> Result<DensityProfile> {
    if r_list.is_empty() || r_list.iter().any(|r| !(*r > 0.0)) {
        return domain("radii must be positive");
    }
    let mut theta = Vec::new();
    let mut sigma = Vec::new();
    for (i, &r) in r_list.iter().enumerate() {
        let v = target_ball_volume(t, r, m, seed.wrapping_add(i as u64), mode)?;
        let ve = euclid_ball_volume(r);
        theta.push(v.value / ve);
        sigma.push(v.std_err / ve);
    }
    let exceeds_one = theta.iter().zip(&sigma).any(|(t, s)| *t > 1.0 + 3.0 * s);
    Ok(DensityProfile { radii: r_list.to_vec(), theta, sigma, exceeds_one })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulled::{CompactSetSpec, SetKind};

    const RADII: [f64; 5] = [0.5, 0.4, 0.3, 0.2, 0.1];

    #[test]
    fn flat_is_exactly_zero() {
        let e = ModelSpace::Euclid3;
        let w = wscal_estimate(Target::Model(&e, [0.0; 4]), &RADII, 10_000, 1, VolumeMode::MonteCarlo).unwrap();
        assert!(w.limit().unwrap().abs() < 1e-9);
        assert!(w.sigma.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn round_sphere_mc() {
        let s = ModelSpace::unit_sphere();
        let p = [0.0, 1.0, 0.0, 0.0];
        let w = wscal_estimate(Target::Model(&s, p), &RADII, 200_000, 2, VolumeMode::MonteCarlo).unwrap();
        assert!((w.limit().unwrap() - 6.0).abs() < 0.12, "{:?}", w.fit);
        let exact = wscal_estimate(Target::Model(&s, p), &RADII, 1, 2, VolumeMode::Auto).unwrap();
        for i in 0..RADII.len() {
            assert!((w.q[i] - exact.q[i]).abs() <= 3.0 * w.sigma[i] + 1e-12);
        }
    }

    #[test]
    fn pulled_equator_diverges() {
        let s = ModelSpace::unit_sphere();
        let y = PulledSpace::new(CompactSetSpec::new(&s, SetKind::EquatorialSphere).unwrap());
        let r = [0.2, 0.15, 0.1, 0.05];
        let w = wscal_estimate(Target::Pulled(&y), &r, 1, 0, VolumeMode::Auto).unwrap();
        for (ri, qi) in r.iter().zip(&w.q) {
            let v = qi * ri.powi(4);
            assert!((-198.0..=-162.0).contains(&v), "{v}");
        }
        let WScalFit::Divergent { s: e, .. } = w.fit else { panic!("{:?}", w.fit) };
        assert!((-4.2..=-3.8).contains(&e));
    }

    #[test]
    fn densities() {
        let s = ModelSpace::unit_sphere();
        let d = bishop_gromov_density(Target::Model(&s, [1.0, 0.0, 0.0, 0.0]), &[1.0, 0.5, 0.01], 1, 0, VolumeMode::Auto)
            .unwrap();
        assert!(d.theta.iter().all(|t| *t < 1.0));
        assert!((d.theta[2] - 1.0).abs() < 1e-4);
        let y = PulledSpace::new(CompactSetSpec::new(&s, SetKind::EquatorialSphere).unwrap());
        let d = bishop_gromov_density(Target::Pulled(&y), &[0.5], 1, 0, VolumeMode::Auto).unwrap();
        assert!(d.exceeds_one && d.theta[0] > 20.0);
    }

    #[test]
    fn radii_must_decrease() {
        let e = ModelSpace::Euclid3;
        assert!(wscal_estimate(Target::Model(&e, [0.0; 4]), &[0.1, 0.2, 0.3], 10, 0, VolumeMode::Auto).is_err());
    }
}
