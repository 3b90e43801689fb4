//! Pulled metric spaces: a compact set K collapsed to a basepoint p₀ with
//! d_Y(x, p₀) = d(x, K) and d_Y(x, y) = min(d(x, y), d(x, K) + d(y, K)).

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::metric::{
    ball_volume_mc, norm3, spiral_directions, Aabb, Draw, MeasuredSpace, ModelSampler, ModelSpace, Point, Region,
    VolumeEstimate,
};

const MEMBER_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum SetKind {
    /// Great circle {x₂ = x₃ = 0} of a round S³.
    GeodesicCircle,
    /// Totally geodesic 2-sphere {x₃ = 0} of a round S³.
    EquatorialSphere,
    /// Closed metric ball.
    RoundBall { center: Point, radius: f64 },
    /// Round circle {|x| = c, x₃ = 0} in the (x₀, x₁)-plane of Euclid3 or a
    /// rotationally symmetric space.
    RadialRing { c: f64 },
    /// Coordinate sphere {|x| = c} of Euclid3 or a rotationally symmetric space.
    RadialSphere { c: f64 },
    PointList(Vec<Point>),
}

/// A compact subset of a model space together with its distance function.
#[derive(Clone, Debug)]
pub struct CompactSetSpec {
    pub kind: SetKind,
    space: ModelSpace,
}

impl CompactSetSpec {
    pub fn new(space: &ModelSpace, kind: SetKind) -> Result<Self> {
        let sphere = matches!(space, ModelSpace::Sphere3 { .. });
        match &kind {
            SetKind::GeodesicCircle | SetKind::EquatorialSphere if !sphere => {
                return domain("great circles and equatorial spheres are defined on Sphere3 only")
            }
            SetKind::RadialRing { .. } if sphere => return domain("radial rings live in Euclid3 or RotSym"),
            SetKind::RadialRing { c } if !(*c > 0.0) => return domain("ring radius must be positive"),
            SetKind::RadialSphere { .. } if sphere => return domain("radial spheres live in Euclid3 or RotSym"),
            SetKind::RadialSphere { c } if !(*c > 0.0) => return domain("sphere radius must be positive"),
            SetKind::RoundBall { center, radius } => {
                if !(*radius > 0.0) {
                    return domain("ball radius must be positive");
                }
                if !space.contains(center) {
                    return domain("ball center is not in the space");
                }
            }
            SetKind::PointList(p) if p.is_empty() => return domain("empty point list"),
            SetKind::PointList(p) if p.iter().any(|x| !space.contains(x)) => {
                return domain("point list leaves the space")
            }
            _ => {}
        }
        Ok(CompactSetSpec { kind, space: space.clone() })
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    /// Hausdorff dimension of the set.
    pub fn dimension(&self) -> u8 {
        match self.kind {
            SetKind::GeodesicCircle | SetKind::RadialRing { .. } => 1,
            SetKind::EquatorialSphere | SetKind::RadialSphere { .. } => 2,
            SetKind::RoundBall { .. } => 3,
            SetKind::PointList(_) => 0,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SetKind::GeodesicCircle => "circle",
            SetKind::EquatorialSphere => "equatorial_sphere",
            SetKind::RoundBall { .. } => "ball",
            SetKind::RadialRing { .. } => "ring",
            SetKind::RadialSphere { .. } => "radial_sphere",
            SetKind::PointList(_) => "points",
        }
    }

    pub fn dist_to_set(&self, x: &Point) -> f64 {
        match &self.kind {
            SetKind::GeodesicCircle => {
                let rho = self.space.radius().unwrap();
                rho * (x[2].hypot(x[3])).atan2(x[0].hypot(x[1]))
            }
            SetKind::EquatorialSphere => {
                let rho = self.space.radius().unwrap();
                rho * x[3].abs().atan2(x[0].hypot(x[1]).hypot(x[2]))
            }
            SetKind::RoundBall { center, radius } => (self.space.distance(x, center) - radius).max(0.0),
            SetKind::RadialRing { c } => match &self.space {
                ModelSpace::Euclid3 => (x[0].hypot(x[1]) - c).hypot(x[2]),
                // distance grows with the angle, so the nearest ring point is
                // the one in the direction of x's projection to the ring plane
                ModelSpace::RotSym(s) => s.distance_polar(norm3(x), *c, x[2].abs().atan2(x[0].hypot(x[1]))),
                _ => unreachable!("rings are refused on Sphere3"),
            },
            SetKind::RadialSphere { c } => match &self.space {
                ModelSpace::RotSym(s) => (s.arc(norm3(x)) - s.arc(*c)).abs(),
                _ => (norm3(x) - c).abs(),
            },
            SetKind::PointList(pts) => pts.iter().map(|p| self.space.distance(x, p)).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn member(&self, x: &Point) -> bool {
        self.dist_to_set(x) <= MEMBER_TOL
    }

    /// A designated point of the set.
    pub fn anchor(&self) -> Point {
        match &self.kind {
            SetKind::GeodesicCircle | SetKind::EquatorialSphere => [self.space.radius().unwrap(), 0.0, 0.0, 0.0],
            SetKind::RoundBall { center, .. } => *center,
            SetKind::RadialRing { c } | SetKind::RadialSphere { c } => [*c, 0.0, 0.0, 0.0],
            SetKind::PointList(p) => p[0],
        }
    }

    /// About `n` points of the set, evenly spread (for 3-balls: the points of
    /// a cubic lattice inside the ball).
    pub fn dense_sample(&self, n: usize) -> Vec<Point> {
        let n = n.max(1);
        match &self.kind {
            SetKind::GeodesicCircle => {
                let rho = self.space.radius().unwrap();
                (0..n)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / n as f64;
                        [rho * t.cos(), rho * t.sin(), 0.0, 0.0]
                    })
                    .collect()
            }
            SetKind::EquatorialSphere => {
                let rho = self.space.radius().unwrap();
                spiral_directions(n).into_iter().map(|d| [rho * d[0], rho * d[1], rho * d[2], 0.0]).collect()
            }
            SetKind::RadialRing { c } => ring_points(*c, n),
            SetKind::RadialSphere { c } => spiral_directions(n).into_iter().map(|d| [c * d[0], c * d[1], c * d[2], 0.0]).collect(),
            SetKind::PointList(p) => p.clone(),
            SetKind::RoundBall { center, radius } => self.ball_lattice(center, *radius, n),
        }
    }

    fn ball_lattice(&self, center: &Point, radius: f64, n: usize) -> Vec<Point> {
        // coordinate extent of the ball along each axis (chart units)
        let extent = match &self.space {
            ModelSpace::Sphere3 { .. } => radius,
            ModelSpace::Euclid3 => radius,
            ModelSpace::RotSym(s) => coordinate_radius(s, radius),
        };
        let h = (4.0 / 3.0 * PI * extent.powi(3) / n as f64).cbrt();
        let m = (extent / h).ceil() as i64;
        let frame = self.space.frame_at(center);
        let mut out = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                for k in -m..=m {
                    let v = [i as f64 * h, j as f64 * h, k as f64 * h];
                    let t = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    let p = if t == 0.0 {
                        *center
                    } else {
                        match &self.space {
                            ModelSpace::RotSym(_) => [center[0] + v[0], center[1] + v[1], center[2] + v[2], 0.0],
                            _ => self.space.exp(center, &frame, [v[0] / t, v[1] / t, v[2] / t], t),
                        }
                    };
                    if self.space.contains(&p) && self.dist_to_set(&p) == 0.0 {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// 3-dimensional Hausdorff measure of the set.
    pub fn measure(&self) -> Result<f64> {
        match &self.kind {
            SetKind::RoundBall { center, radius } => match &self.space {
                ModelSpace::RotSym(s) => {
                    if norm3(center) != 0.0 {
                        return domain("RotSym ball volumes are available for axis-centred balls only");
                    }
                    Ok(crate::rotsym::annulus_volume(s.profile(), 0.0, coordinate_radius(s, *radius)))
                }
                sp => Ok(sp.ball_volume_exact(*radius).unwrap()),
            },
            _ => Ok(0.0),
        }
    }

    /// Axis-aligned box containing T_margin(set) (Euclid3 / RotSym sampling).
    pub fn bounding_box(&self, margin: f64) -> Aabb {
        let (lo, hi) = match &self.kind {
            SetKind::RadialRing { c } => ([-c, -c, 0.0], [*c, *c, 0.0]),
            SetKind::RadialSphere { c } => ([-c, -c, -c], [*c, *c, *c]),
            SetKind::RoundBall { center, radius } => {
                let e = match &self.space {
                    ModelSpace::RotSym(s) => coordinate_radius(s, *radius),
                    _ => *radius,
                };
                ([center[0] - e, center[1] - e, center[2] - e], [center[0] + e, center[1] + e, center[2] + e])
            }
            _ => {
                let pts = self.dense_sample(256);
                let mut lo = [f64::INFINITY; 3];
                let mut hi = [f64::NEG_INFINITY; 3];
                for p in &pts {
                    for i in 0..3 {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
                (lo, hi)
            }
        };
        Aabb {
            lo: [lo[0] - margin, lo[1] - margin, lo[2] - margin],
            hi: [hi[0] + margin, hi[1] + margin, hi[2] + margin],
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            SetKind::GeodesicCircle | SetKind::EquatorialSphere => self.kind_name().to_string(),
            SetKind::RoundBall { center, radius } => format!("ball center={} radius={radius:e}", fmt_point(center)),
            SetKind::RadialRing { c } => format!("ring c={c:e}"),
            SetKind::RadialSphere { c } => format!("radial_sphere c={c:e}"),
            SetKind::PointList(p) => format!("points n={}", p.len()),
        }
    }
}

fn ring_points(c: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            [c * t.cos(), c * t.sin(), 0.0, 0.0]
        })
        .collect()
}

/// Coordinate radius ρ with radial arclength s(ρ) = `arc`.
pub(crate) fn coordinate_radius(s: &crate::rotsym::RotSymSpace, arc: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, s.window().1);
    if s.arc(hi) <= arc {
        return hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if s.arc(mid) < arc {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(crate) fn fmt_point(p: &Point) -> String {
    format!("{:e} {:e} {:e} {:e}", p[0], p[1], p[2], p[3])
}

/// A point of the pulled space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulledPoint {
    Base(Point),
    Basepoint,
}

#[derive(Clone, Debug)]
pub struct PulledSpace {
    pub set: CompactSetSpec,
    pub basepoint: Point,
}

impl PulledSpace {
    pub fn new(set: CompactSetSpec) -> Self {
        let basepoint = set.anchor();
        PulledSpace { set, basepoint }
    }

    pub fn base(&self) -> &ModelSpace {
        self.set.space()
    }

    /// Distance with the point-in-K check skipped.
    #[inline]
    pub fn dist(&self, a: &PulledPoint, b: &PulledPoint) -> f64 {
        match (a, b) {
            (PulledPoint::Basepoint, PulledPoint::Basepoint) => 0.0,
            (PulledPoint::Base(x), PulledPoint::Basepoint) | (PulledPoint::Basepoint, PulledPoint::Base(x)) => {
                self.set.dist_to_set(x)
            }
            (PulledPoint::Base(x), PulledPoint::Base(y)) => {
                let d = self.base().distance(x, y);
                let t = self.set.dist_to_set(x) + self.set.dist_to_set(y);
                d.min(t)
            }
        }
    }

    /// Same as `dist` when the set distances t_x, t_y are already known.
    #[inline]
    pub fn dist_with(&self, x: &Point, tx: f64, y: &Point, ty: f64) -> f64 {
        self.base().distance(x, y).min(tx + ty)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let base = match self.base() {
            ModelSpace::Sphere3 { curvature } => format!("sphere3 K={curvature:e}"),
            ModelSpace::Euclid3 => "euclid3".into(),
            ModelSpace::RotSym(r) => format!("rotsym window={:e},{:e}", r.window().0, r.window().1),
        };
        let _ = writeln!(s, "base = {base}");
        let _ = writeln!(s, "set = {}", self.set.describe());
        let _ = writeln!(s, "basepoint = {}", fmt_point(&self.basepoint));
        s
    }
}

pub fn pulled_distance(y: &PulledSpace, a: &PulledPoint, b: &PulledPoint) -> Result<f64> {
    for p in [a, b] {
        if let PulledPoint::Base(x) = p {
            if !y.base().contains(x) {
                return domain("point is not in the base space");
            }
            if y.set.member(x) {
                return domain("point lies in the pulled set; use the basepoint token");
            }
        }
    }
    Ok(y.dist(a, b))
}

/// H³(X) − H³(K).
pub fn pulled_total_volume(y: &PulledSpace) -> Result<f64> {
    let base = y
        .base()
        .total_volume()
        .ok_or_else(|| Error::Domain("base space has no finite total volume".into()))?;
    Ok(base - y.set.measure()?)
}

/// Weighted sampler over Y (points of K are dropped: they are p₀).
pub struct PulledSampler<'a> {
    pub space: &'a PulledSpace,
    inner: ModelSampler,
}

impl<'a> PulledSampler<'a> {
    pub fn new(space: &'a PulledSpace, region: Region) -> Result<Self> {
        Ok(PulledSampler { space, inner: ModelSampler::new(space.base().clone(), region)? })
    }
}

impl MeasuredSpace for PulledSampler<'_> {
    type P = PulledPoint;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Draw<PulledPoint>> {
        let (p, w) = self.inner.draw_point(rng)?;
        if self.space.set.member(&p) {
            return None;
        }
        Some(Draw { point: PulledPoint::Base(p), weight: w })
    }
    fn dist(&self, a: &PulledPoint, b: &PulledPoint) -> f64 {
        self.space.dist(a, b)
    }
}

/// Closed form of Vol_Y(B(p₀, r)) = H³(T_r(K)∖K) where one exists.
pub fn pulled_ball_volume_exact(y: &PulledSpace, r: f64) -> Option<f64> {
    let base = y.base();
    match (&y.set.kind, base) {
        (SetKind::EquatorialSphere, ModelSpace::Sphere3 { .. }) => {
            let rho = base.radius().unwrap();
            let t = (r / rho).min(PI / 2.0);
            Some(4.0 * PI * rho.powi(3) * (t + t.sin() * t.cos()))
        }
        (SetKind::GeodesicCircle, ModelSpace::Sphere3 { .. }) => {
            let rho = base.radius().unwrap();
            let t = (r / rho).min(PI / 2.0);
            Some(2.0 * PI * PI * rho.powi(3) * t.sin().powi(2))
        }
        (SetKind::RoundBall { radius, .. }, ModelSpace::Sphere3 { .. } | ModelSpace::Euclid3) => {
            Some(base.ball_volume_exact(radius + r).unwrap() - base.ball_volume_exact(*radius).unwrap())
        }
        (SetKind::RadialRing { c }, ModelSpace::Euclid3) if r <= *c => Some(2.0 * PI * PI * c * r * r),
        (SetKind::RadialSphere { c }, ModelSpace::Euclid3) if r <= *c => {
            Some(4.0 / 3.0 * PI * ((c + r).powi(3) - (c - r).powi(3)))
        }
        (SetKind::PointList(p), _) if p.len() == 1 => base.ball_volume_exact(r),
        _ => None,
    }
}

/// Vol_Y(B(p₀, r)): closed form when available, else Monte Carlo with the
/// pulled distance (`m` samples, box sampling around T_r(K) off the sphere).
pub fn pulled_ball_volume(y: &PulledSpace, r: f64, m: usize, seed: u64) -> Result<VolumeEstimate> {
    if !(r > 0.0) {
        return domain("ball radius must be positive");
    }
    if let Some(v) = pulled_ball_volume_exact(y, r) {
        return Ok(VolumeEstimate { value: v, std_err: 0.0, samples: 0 });
    }
    pulled_ball_volume_mc(y, r, m, seed)
}

pub fn pulled_ball_volume_mc(y: &PulledSpace, r: f64, m: usize, seed: u64) -> Result<VolumeEstimate> {
    let region = match y.base() {
        ModelSpace::Sphere3 { .. } => Region::Whole,
        _ => Region::Box(y.set.bounding_box(r)),
    };
    let s = PulledSampler::new(y, region)?;
    ball_volume_mc(&s, &PulledPoint::Basepoint, r, m, seed)
}

/// Least-squares slope of log Vol(T_r(A₀)∖A₀) against log r.
pub fn tubular_scaling_exponent(set: &CompactSetSpec, r_list: &[f64], m: usize, seed: u64) -> Result<f64> {
    if r_list.len() < 4 {
        return domain("need at least four radii");
    }
    if r_list.windows(2).any(|w| !(w[1] < w[0])) || r_list.iter().any(|r| !(*r > 0.0)) {
        return domain("radii must be positive and strictly decreasing");
    }
    let y = PulledSpace::new(set.clone());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &r) in r_list.iter().enumerate() {
        let v = pulled_ball_volume(&y, r, m, seed.wrapping_add(i as u64))?.value;
        if !(v > 0.0) {
            return Err(Error::Budget(format!("tube volume at r={r} estimated as {v}; raise the sample count")));
        }
        xs.push(r.ln());
        ys.push(v.ln());
    }
    if ys.iter().all(|v| (*v - ys[0]).abs() < 1e-14) {
        return domain("degenerate regression: all volumes equal");
    }
    Ok(slope(&xs, &ys))
}

pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
