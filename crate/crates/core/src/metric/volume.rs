use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sample::{gaussian_on_sphere, uniform_in_ball3};
use super::{tangent_frame, ModelSpace, Point};
use crate::error::{domain, Result};

const CHUNK: usize = 1 << 15;

/// Axis-aligned box in the first three coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Aabb {
    pub fn cube(center: &Point, half: f64) -> Self {
        Aabb {
            lo: [center[0] - half, center[1] - half, center[2] - half],
            hi: [center[0] + half, center[1] + half, center[2] + half],
        }
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|i| self.hi[i] - self.lo[i]).product()
    }
}

/// Where ambient samples are drawn from.
#[derive(Clone, Debug)]
pub enum Region {
    /// Whole space (only for spaces of finite volume: Sphere3).
    Whole,
    /// Caller-supplied box; volume = box volume × weighted hit fraction.
    Box(Aabb),
    /// Uniform in a geodesic-normal-coordinate ball around `center`, weighted
    /// by the exponential-map Jacobian (model spaces of constant curvature).
    Normal { center: Point, radius: f64 },
}

/// A weighted draw: E[weight·1_B(point)] = vol(B) for every measurable B.
pub struct Draw<P> {
    pub point: P,
    pub weight: f64,
}

/// Anything that can be sampled for Monte Carlo volumes.
pub trait MeasuredSpace: Sync {
    type P: Send;
    /// One importance draw, or `None` when the draw misses the space.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Draw<Self::P>>;
    fn dist(&self, a: &Self::P, b: &Self::P) -> f64;
}

#[derive(Clone, Debug)]
pub struct ModelSampler {
    pub space: ModelSpace,
    pub region: Region,
    frame: [Point; 3],
}

impl ModelSampler {
    pub fn new(space: ModelSpace, region: Region) -> Result<Self> {
        let mut frame = [[0.0; 4]; 3];
        match (&space, &region) {
            (ModelSpace::Sphere3 { .. }, Region::Whole) => {}
            (_, Region::Whole) => return domain("whole-space sampling needs a finite-volume space; give a box"),
            (ModelSpace::RotSym(_), Region::Normal { .. }) => {
                return domain("normal-coordinate sampling needs constant curvature; give a box")
            }
            (_, Region::Normal { center, radius }) => {
                if !(*radius > 0.0) {
                    return domain("normal-ball radius must be positive");
                }
                if let Some(rho) = space.radius() {
                    if *radius > std::f64::consts::PI * rho {
                        return domain("normal-ball radius exceeds the injectivity radius");
                    }
                }
                frame = space.frame_at(center);
                if matches!(space, ModelSpace::Sphere3 { .. }) {
                    frame = tangent_frame(center);
                }
            }
            (_, Region::Box(b)) => {
                if !(b.volume() > 0.0) {
                    return domain("sampling box has no volume");
                }
            }
        }
        Ok(ModelSampler { space, region, frame })
    }

    pub fn draw_point(&self, rng: &mut ChaCha8Rng) -> Option<(Point, f64)> {
        match &self.region {
            Region::Whole => {
                let rho = self.space.radius().unwrap();
                Some((gaussian_on_sphere(rng, rho), self.space.total_volume().unwrap()))
            }
            Region::Box(b) => {
                let p = [
                    rng.gen_range(b.lo[0]..b.hi[0]),
                    rng.gen_range(b.lo[1]..b.hi[1]),
                    rng.gen_range(b.lo[2]..b.hi[2]),
                    0.0,
                ];
                match &self.space {
                    ModelSpace::RotSym(s) => s.density(&p).map(|w| (p, w * b.volume())),
                    ModelSpace::Euclid3 => Some((p, b.volume())),
                    // a box is meaningless on S³; treat as whole-space draw
                    ModelSpace::Sphere3 { .. } => {
                        let rho = self.space.radius().unwrap();
                        Some((gaussian_on_sphere(rng, rho), self.space.total_volume().unwrap()))
                    }
                }
            }
            Region::Normal { center, radius } => {
                let v = uniform_in_ball3(rng, *radius);
                let t = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let vol = 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
                if t == 0.0 {
                    return Some((*center, vol));
                }
                let w = [v[0] / t, v[1] / t, v[2] / t];
                let p = self.space.exp(center, &self.frame, w, t);
                let jac = match self.space.radius() {
                    Some(rho) => {
                        let s = rho * (t / rho).sin() / t;
                        s * s
                    }
                    None => 1.0,
                };
                Some((p, vol * jac))
            }
        }
    }
}

impl MeasuredSpace for ModelSampler {
    type P = Point;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Draw<Point>> {
        self.draw_point(rng).map(|(point, weight)| Draw { point, weight })
    }
    fn dist(&self, a: &Point, b: &Point) -> f64 {
        self.space.distance(a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Monte Carlo integral of `f(point)·weight`, split into fixed chunks with
/// per-chunk ChaCha streams so the result is independent of thread count.
/// Chunk moments are Welford accumulators merged in chunk order.
pub fn mc_integrate<S, F>(space: &S, m: usize, seed: u64, f: F) -> VolumeEstimate
where
    S: MeasuredSpace,
    F: Fn(&S::P) -> f64 + Sync,
{
    let chunks = m.div_ceil(CHUNK);
    let parts: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(m - c * CHUNK);
            let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
            for _ in 0..count {
                let v = space.draw(&mut rng).map_or(0.0, |d| f(&d.point) * d.weight);
                n += 1.0;
                let dv = v - mean;
                mean += dv / n;
                m2 += dv * (v - mean);
            }
            (n, mean, m2)
        })
        .collect();
    let (n, mean, m2) = parts.iter().fold((0.0, 0.0, 0.0), |a, b| {
        let n = a.0 + b.0;
        if n == 0.0 {
            return a;
        }
        let d = b.1 - a.1;
        (n, a.1 + d * b.0 / n, a.2 + b.2 + d * d * a.0 * b.0 / n)
    });
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    VolumeEstimate { value: mean, std_err: (var / n.max(1.0)).sqrt(), samples: m }
}

/// Monte Carlo volume of the open metric ball B(center, r).
pub fn ball_volume_mc<S: MeasuredSpace>(space: &S, center: &S::P, r: f64, m: usize, seed: u64) -> Result<VolumeEstimate>
where
    S::P: Sync,
{
    if !(r > 0.0) {
        return domain(format!("ball radius must be positive, got {r}"));
    }
    if m == 0 {
        return domain("need at least one Monte Carlo sample");
    }
    Ok(mc_integrate(space, m, seed, |p| if space.dist(center, p) < r { 1.0 } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn within(e: VolumeEstimate, truth: f64) -> bool {
        (e.value - truth).abs() <= 3.0 * e.std_err.max(1e-15)
    }

    #[test]
    fn sphere_whole_and_half() {
        let s = ModelSampler::new(ModelSpace::unit_sphere(), Region::Whole).unwrap();
        let c = [1.0, 0.0, 0.0, 0.0];
        let e = ball_volume_mc(&s, &c, PI + 1e-9, 10_000, 1).unwrap();
        assert!((e.value - 2.0 * PI * PI).abs() < 1e-9);
        let e = ball_volume_mc(&s, &c, PI / 2.0, 200_000, 2).unwrap();
        assert!(within(e, PI * PI), "{e:?}");
    }

    #[test]
    fn euclid_box() {
        let s = ModelSampler::new(ModelSpace::Euclid3, Region::Box(Aabb::cube(&[0.0; 4], 1.0))).unwrap();
        let e = ball_volume_mc(&s, &[0.0; 4], 1.0, 200_000, 3).unwrap();
        assert!(within(e, 4.0 / 3.0 * PI), "{e:?}");
    }

    #[test]
    fn normal_chart_on_sphere() {
        let c = [0.0, 0.0, 1.0, 0.0];
        let s = ModelSampler::new(ModelSpace::unit_sphere(), Region::Normal { center: c, radius: 1.2 }).unwrap();
        let e = ball_volume_mc(&s, &c, 1.0, 200_000, 4).unwrap();
        assert!(within(e, PI * (2.0 - 2f64.sin())), "{e:?}");
    }

    #[test]
    fn whole_needs_finite_space() {
        assert!(ModelSampler::new(ModelSpace::Euclid3, Region::Whole).is_err());
    }

    #[test]
    fn chunking_is_deterministic() {
        let s = ModelSampler::new(ModelSpace::unit_sphere(), Region::Whole).unwrap();
        let c = [1.0, 0.0, 0.0, 0.0];
        let a = ball_volume_mc(&s, &c, 0.7, 100_000, 9).unwrap();
        let b = ball_volume_mc(&s, &c, 0.7, 100_000, 9).unwrap();
        assert_eq!(a, b);
    }
}
