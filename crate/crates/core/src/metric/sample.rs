use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{norm, ModelSpace, Point, PointCloud, SpatialHash};
use crate::error::{domain, Result};

/// N points uniform on the round S³ of curvature K (normalized Gaussians).
pub fn sample_sphere(curvature: f64, n: usize, seed: u64) -> Result<PointCloud> {
    if !(curvature > 0.0) {
        return domain(format!("sphere curvature must be positive, got {curvature}"));
    }
    let rho = curvature.powf(-0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cloud = PointCloud::new(4);
    for i in 0..n {
        let p = gaussian_on_sphere(&mut rng, rho);
        cloud.push(i as u64, p, Vec::new());
    }
    Ok(cloud)
}

pub(crate) fn gaussian_on_sphere<R: Rng>(rng: &mut R, rho: f64) -> Point {
    loop {
        let g: Point = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = norm(&g);
        if n > 1e-12 {
            return [g[0] / n * rho, g[1] / n * rho, g[2] / n * rho, g[3] / n * rho];
        }
    }
}

pub(crate) fn unit_vector3<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let g: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        if n > 1e-12 {
            return [g[0] / n, g[1] / n, g[2] / n];
        }
    }
}

/// Uniform point of the Euclidean 3-ball of radius `radius` (as a 3-vector).
pub fn uniform_in_ball3<R: Rng>(rng: &mut R, radius: f64) -> [f64; 3] {
    let u = unit_vector3(rng);
    let t = radius * rng.gen::<f64>().cbrt();
    [u[0] * t, u[1] * t, u[2] * t]
}

/// `n` nearly equidistributed unit vectors on S² (golden-angle spiral).
pub fn spiral_directions(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let th = golden * i as f64;
            [s * th.cos(), s * th.sin(), z]
        })
        .collect()
}

/// Greedy maximal packing: walk `points` in order and keep a point when it is
/// at distance ≥ `sep` from every point kept so far. Returns kept indices.
pub fn greedy_packing(space: &ModelSpace, points: &[Point], sep: f64) -> Vec<usize> {
    // separations equal to `sep` up to rounding count as accepted
    let sep = sep * (1.0 - 1e-12);
    let mut kept: Vec<usize> = Vec::new();
    // neighbour radius in ambient (chord) units
    let chord = match space {
        ModelSpace::Sphere3 { .. } => {
            let rho = space.radius().unwrap();
            if sep >= std::f64::consts::PI * rho {
                f64::INFINITY
            } else {
                2.0 * rho * (sep / (2.0 * rho)).sin()
            }
        }
        ModelSpace::Euclid3 => sep,
        ModelSpace::RotSym(_) => f64::INFINITY,
    };
    if !chord.is_finite() || chord <= 0.0 {
        for (i, p) in points.iter().enumerate() {
            if kept.iter().all(|&k| space.distance(p, &points[k]) >= sep) {
                kept.push(i);
            }
        }
        return kept;
    }
    let dims = if matches!(space, ModelSpace::Sphere3 { .. }) { 4 } else { 3 };
    let mut hash = SpatialHash::new(chord, dims);
    for (i, p) in points.iter().enumerate() {
        let mut ok = true;
        hash.visit_near(p, |k| {
            if space.distance(p, &points[k]) < sep {
                ok = false;
            }
            ok
        });
        if ok {
            kept.push(i);
            hash.insert(i, p);
        }
    }
    kept
}
