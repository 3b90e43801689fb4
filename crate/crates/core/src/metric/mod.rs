//! Model spaces with exact distances, samplers, Monte Carlo volumes and
//! finite-metric utilities.

mod finite;
mod io;
mod sample;
mod spatial;
mod volume;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::rotsym::RotSymSpace;

pub use finite::{check_metric, gh_exact_small, FiniteMetric, MetricIssue};
pub use io::{read_point_cloud, write_point_cloud, CloudPoint, PointCloud};
pub(crate) use sample::unit_vector3;
pub use sample::{greedy_packing, sample_sphere, spiral_directions, uniform_in_ball3};
pub use spatial::SpatialHash;
pub use volume::{ball_volume_mc, Aabb, Draw, MeasuredSpace, ModelSampler, Region, VolumeEstimate};

/// Ambient coordinates. Sphere3 uses all four; Euclid3 and RotSym keep x3 = 0.
pub type Point = [f64; 4];

pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

#[inline]
pub fn norm3(a: &Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// x − sin x without cancellation for small x.
pub fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.2 {
        let x2 = x * x;
        // Taylor series; the first omitted term is below 1e-17 relative
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    } else {
        x - x.sin()
    }
}

/// Volume of a geodesic ball of radius `r` in the round S³ of curvature `k`.
pub fn sphere_ball_volume(k: f64, r: f64) -> f64 {
    let rho = k.powf(-0.5);
    let t = (r / rho).min(PI);
    PI * rho.powi(3) * x_minus_sin(2.0 * t)
}

/// Angle between two vectors, stable for nearly (anti)parallel inputs.
#[inline]
pub fn angle_between(a: &Point, b: &Point) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let ua = scale(a, 1.0 / na);
    let ub = scale(b, 1.0 / nb);
    2.0 * norm(&sub(&ua, &ub)).atan2(norm(&add(&ua, &ub)))
}

/// Three unit vectors orthonormal to `p` (and to each other), chosen
/// deterministically by Gram–Schmidt over the standard basis.
pub fn tangent_frame(p: &Point) -> [Point; 3] {
    let n = norm(p);
    let u = if n > 0.0 { scale(p, 1.0 / n) } else { [1.0, 0.0, 0.0, 0.0] };
    let mut basis: Vec<Point> = vec![u];
    let mut cands: Vec<(f64, Point)> = (0..4)
        .map(|i| {
            let mut e = [0.0; 4];
            e[i] = 1.0;
            (1.0 - u[i] * u[i], e)
        })
        .collect();
    // most-orthogonal candidates first, index order breaks ties
    cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for (_, e) in cands {
        if basis.len() == 4 {
            break;
        }
        let mut v = e;
        for b in &basis {
            v = sub(&v, &scale(b, dot(&v, b)));
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            basis.push(scale(&v, 1.0 / nv));
        }
    }
    [basis[1], basis[2], basis[3]]
}

#[derive(Clone, Debug)]
pub enum ModelSpace {
    /// Round 3-sphere of sectional curvature K, embedded in R⁴ with radius K^(-1/2).
    Sphere3 { curvature: f64 },
    Euclid3,
    RotSym(Arc<RotSymSpace>),
}

impl ModelSpace {
    pub fn sphere(curvature: f64) -> Result<Self> {
        if !(curvature > 0.0) || !curvature.is_finite() {
            return domain(format!("sphere curvature must be positive, got {curvature}"));
        }
        Ok(ModelSpace::Sphere3 { curvature })
    }

    pub fn unit_sphere() -> Self {
        ModelSpace::Sphere3 { curvature: 1.0 }
    }

    /// Sphere radius ρ = K^(-1/2); `None` for the other kinds.
    pub fn radius(&self) -> Option<f64> {
        match self {
            ModelSpace::Sphere3 { curvature } => Some(curvature.powf(-0.5)),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpace::Sphere3 { .. } => "sphere3",
            ModelSpace::Euclid3 => "euclid3",
            ModelSpace::RotSym(_) => "rotsym",
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        if p.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self {
            ModelSpace::Sphere3 { .. } => {
                let rho = self.radius().unwrap();
                (norm(p) - rho).abs() <= MEMBERSHIP_TOL * rho.max(1.0)
            }
            ModelSpace::Euclid3 => p[3].abs() <= MEMBERSHIP_TOL,
            ModelSpace::RotSym(s) => s.contains(p),
        }
    }

    /// Distance without the membership check (hot path).
    #[inline]
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        match self {
            ModelSpace::Sphere3 { curvature } => {
                let rho = curvature.powf(-0.5);
                // 2ρ·atan2(|p−q|, |p+q|) equals ρ·arccos(⟨p,q⟩/ρ²) but keeps
                // full precision for nearby and antipodal pairs
                2.0 * rho * norm(&sub(p, q)).atan2(norm(&add(p, q)))
            }
            ModelSpace::Euclid3 => norm(&sub(p, q)),
            ModelSpace::RotSym(s) => s.distance(p, q),
        }
    }

    pub fn geodesic_distance(&self, p: &Point, q: &Point) -> Result<f64> {
        for x in [p, q] {
            if !self.contains(x) {
                return domain(format!("point {x:?} is not on the {} space", self.kind_name()));
            }
        }
        Ok(self.distance(p, q))
    }

    /// Total Riemannian volume when finite and known.
    pub fn total_volume(&self) -> Option<f64> {
        match self {
            ModelSpace::Sphere3 { .. } => Some(2.0 * PI * PI * self.radius().unwrap().powi(3)),
            ModelSpace::Euclid3 => None,
            ModelSpace::RotSym(s) => Some(s.window_volume()),
        }
    }

    /// Closed-form volume of a metric ball, where one exists.
    pub fn ball_volume_exact(&self, r: f64) -> Option<f64> {
        match self {
            ModelSpace::Sphere3 { curvature } => Some(sphere_ball_volume(*curvature, r)),
            ModelSpace::Euclid3 => Some(4.0 / 3.0 * PI * r.powi(3)),
            ModelSpace::RotSym(_) => None,
        }
    }

    /// Lower bound on scalar curvature over the space (metadata only).
    pub fn inf_scal(&self) -> f64 {
        match self {
            ModelSpace::Sphere3 { curvature } => 6.0 * curvature,
            ModelSpace::Euclid3 => 0.0,
            ModelSpace::RotSym(s) => s.inf_scal(),
        }
    }

    /// Exponential map at `p` applied to `t·(Σ w_a e_a)`, with `e` a tangent frame
    /// at `p` and `w` a unit 3-vector.
    pub fn exp(&self, p: &Point, frame: &[Point; 3], w: [f64; 3], t: f64) -> Point {
        let dir = add(&add(&scale(&frame[0], w[0]), &scale(&frame[1], w[1])), &scale(&frame[2], w[2]));
        match self {
            ModelSpace::Sphere3 { .. } => {
                let rho = self.radius().unwrap();
                add(&scale(p, (t / rho).cos()), &scale(&dir, rho * (t / rho).sin()))
            }
            _ => add(p, &scale(&dir, t)),
        }
    }

    pub fn frame_at(&self, p: &Point) -> [Point; 3] {
        match self {
            ModelSpace::Sphere3 { .. } => tangent_frame(p),
            _ => [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_distances() {
        let s = ModelSpace::unit_sphere();
        let p = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(s.geodesic_distance(&p, &p).unwrap(), 0.0);
        let q = [-1.0, 0.0, 0.0, 0.0];
        assert!((s.geodesic_distance(&p, &q).unwrap() - PI).abs() < 1e-15);
        let e = [0.0, 1.0, 0.0, 0.0];
        assert!((s.distance(&p, &e) - PI / 2.0).abs() < 1e-15);
        assert!(s.geodesic_distance(&p, &[2.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn euclid_pythagoras() {
        let s = ModelSpace::Euclid3;
        let d = s.geodesic_distance(&[0.0; 4], &[3.0, 4.0, 0.0, 0.0]).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn frame_is_orthonormal() {
        let p = [0.3, -0.5, 0.7, 0.4];
        let p = scale(&p, 1.0 / norm(&p));
        let f = tangent_frame(&p);
        for i in 0..3 {
            assert!(dot(&f[i], &p).abs() < 1e-12);
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&f[i], &f[j]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exp_moves_by_t() {
        let s = ModelSpace::sphere(0.25).unwrap();
        let p = [2.0, 0.0, 0.0, 0.0];
        let f = s.frame_at(&p);
        let q = s.exp(&p, &f, [0.0, 0.6, 0.8], 1.3);
        assert!(s.contains(&q));
        assert!((s.distance(&p, &q) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn small_ball_series() {
        let x: f64 = 1e-3;
        let series = x.powi(3) / 6.0 - x.powi(5) / 120.0 + x.powi(7) / 5040.0;
        assert!((x_minus_sin(x) / series - 1.0).abs() < 1e-14);
        for x in [0.15f64, 0.19, 0.21, 1.0] {
            assert!((x_minus_sin(x) / (x - x.sin()) - 1.0).abs() < 1e-12);
        }
        // cancellation-free at tiny radii: vol ≈ (4/3)πr³
        let v = sphere_ball_volume(1.0, 1e-5);
        assert!((v / (4.0 / 3.0 * PI * 1e-15) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bad_curvature() {
        assert!(ModelSpace::sphere(0.0).is_err());
        assert!(ModelSpace::sphere(-1.0).is_err());
    }
}
