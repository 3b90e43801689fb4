use std::fmt::Write as _;

use kiddo::{KdTree, SquaredEuclidean};

use crate::error::{domain, Error, Result};
use crate::metric::{
    add, dot, greedy_packing, scale, sphere_ball_volume, spiral_directions, sub, tangent_frame, ModelSpace, Point,
};
use crate::pulled::{CompactSetSpec, SetKind};
use crate::rotsym::CurvatureChart;

/// Largest dense sample of A₀ the packing will walk through.
const MAX_PACKING_SAMPLE: usize = 6_000_000;

/// Tunnel U between two removed δ/2-balls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TunnelModel {
    pub delta: f64,
    /// Diameter bound h(δ).
    pub h: f64,
    pub vol: f64,
}

impl TunnelModel {
    /// h = 3δ, vol = 2·Vol(B(δ/2)) in the curvature-K model.
    pub fn standard(curvature: f64, delta: f64) -> Self {
        Self::with_h_factor(curvature, delta, 3.0)
    }

    pub fn with_h_factor(curvature: f64, delta: f64, factor: f64) -> Self {
        TunnelModel { delta, h: factor * delta, vol: 2.0 * sphere_ball_volume(curvature, delta / 2.0) }
    }

    /// Replace the tunnel volume, e.g. by (1+ε)·2Vol(B(δ/2)).
    pub fn with_volume(mut self, vol: f64) -> Self {
        self.vol = vol;
        self
    }
}

/// Centres v_k of a maximal 2r-separated packing of A₀ and the mouths
/// v_kj ∈ ∂B(v_k, r−δ), all inside a round sphere of curvature K (either the
/// base itself or the constant-curvature chart of a RotSym space).
#[derive(Clone, Debug)]
pub struct SewingPlan {
    pub r: f64,
    pub delta: f64,
    pub curvature: f64,
    pub centers: Vec<Point>,
    /// Angular separation of the mouth directions seen from a centre.
    pub gamma_min: f64,
    /// Largest admissible δ for this packing.
    pub delta_max: f64,
    pub sample_spacing: f64,
    pub sample_size: usize,
    lifted: Vec<Point>,
    frames: Vec<[Point; 3]>,
    dirs: Vec<[f64; 3]>,
    chart: Option<CurvatureChart>,
}

impl SewingPlan {
    pub fn n_bar(&self) -> usize {
        self.centers.len()
    }

    /// Number of mouths n = n̄(n̄−1).
    pub fn n_mouths(&self) -> u64 {
        let nb = self.n_bar() as u64;
        nb * (nb - 1)
    }

    pub fn n_tunnels(&self) -> u64 {
        self.n_mouths() / 2
    }

    pub fn sphere_radius(&self) -> f64 {
        self.curvature.powf(-0.5)
    }

    pub fn chart(&self) -> Option<CurvatureChart> {
        self.chart
    }

    /// Index of v_kj among the n̄−1 mouth directions at v_k.
    #[inline]
    pub fn dir_index(k: usize, j: usize) -> usize {
        if j < k {
            j
        } else {
            j - 1
        }
    }

    #[inline]
    pub fn partner_of_dir(k: usize, i: usize) -> usize {
        if i < k {
            i
        } else {
            i + 1
        }
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.dirs
    }

    pub(crate) fn lifted_center(&self, k: usize) -> &Point {
        &self.lifted[k]
    }

    /// Base point on the model sphere (identity for Sphere3).
    pub fn lift(&self, p: &Point) -> Point {
        match &self.chart {
            Some(c) => c.to_sphere(p),
            None => *p,
        }
    }

    pub fn drop_to_base(&self, q: &Point) -> Point {
        match &self.chart {
            Some(c) => c.from_sphere(q),
            None => *q,
        }
    }

    pub fn mouth_lifted(&self, k: usize, j: usize) -> Point {
        let rho = self.sphere_radius();
        let th = (self.r - self.delta) / rho;
        let s = self.dirs[Self::dir_index(k, j)];
        let f = &self.frames[k];
        let dir = add(&add(&scale(&f[0], s[0]), &scale(&f[1], s[1])), &scale(&f[2], s[2]));
        add(&scale(&self.lifted[k], th.cos()), &scale(&dir, rho * th.sin()))
    }

    /// Mouth v_kj in base coordinates.
    pub fn mouth(&self, k: usize, j: usize) -> Point {
        self.drop_to_base(&self.mouth_lifted(k, j))
    }

    /// Distance on the model sphere.
    pub fn model_distance(&self, p: &Point, q: &Point) -> f64 {
        let rho = self.sphere_radius();
        2.0 * rho * crate::metric::norm(&sub(p, q)).atan2(crate::metric::norm(&add(p, q)))
    }

    /// Unit 3-vector of the direction from v_k to the lifted point q in v_k's frame.
    pub(crate) fn direction_at(&self, k: usize, q: &Point) -> Option<[f64; 3]> {
        let v = &self.lifted[k];
        let rho = self.sphere_radius();
        let u = sub(q, &scale(v, dot(q, v) / (rho * rho)));
        let f = &self.frames[k];
        let c = [dot(&u, &f[0]), dot(&u, &f[1]), dot(&u, &f[2])];
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        (n > 0.0).then(|| [c[0] / n, c[1] / n, c[2] / n])
    }

    /// Tunnel pairs (k, j), k < j, in the pairing order: by (min, max) index.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nb = self.n_bar();
        (0..nb).flat_map(move |k| (k + 1..nb).map(move |j| (k, j)))
    }

    /// CSV: `C,k,coords` per centre and `M,k,j,coords` per mouth (mouths in
    /// pairing order, v_kj immediately followed by v_jk). Mouth rows are
    /// omitted above `max_mouth_rows`.
    pub fn to_csv(&self, tunnels: &TunnelModel, max_mouth_rows: u64) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# r = {:e}", self.r);
        let _ = writeln!(s, "# delta = {:e}", self.delta);
        let _ = writeln!(s, "# h = {:e}", tunnels.h);
        let _ = writeln!(s, "# curvature = {:e}", self.curvature);
        let _ = writeln!(s, "# n_bar = {}", self.n_bar());
        let _ = writeln!(s, "# n = {}", self.n_mouths());
        s.push_str("kind,k,j,x0,x1,x2,x3\n");
        for (k, c) in self.centers.iter().enumerate() {
            let _ = writeln!(s, "C,{k},,{:e},{:e},{:e},{:e}", c[0], c[1], c[2], c[3]);
        }
        if self.n_mouths() > max_mouth_rows {
            let _ = writeln!(s, "# mouth rows omitted: {} exceeds the row cap {}", self.n_mouths(), max_mouth_rows);
            return s;
        }
        for (k, j) in self.pairs() {
            for (a, b) in [(k, j), (j, k)] {
                let m = self.mouth(a, b);
                let _ = writeln!(s, "M,{a},{b},{:e},{:e},{:e},{:e}", m[0], m[1], m[2], m[3]);
            }
        }
        s
    }
}

/// Largest δ keeping the balls B(v_kj, δ) pairwise disjoint when the mouth
/// directions are γ apart: chord condition cos(2δ/ρ) ≥ cos²θ + sin²θ·cos γ
/// with θ = (r−δ)/ρ.
pub fn max_delta(curvature: f64, r: f64, gamma: f64) -> f64 {
    let rho = curvature.powf(-0.5);
    let g = |d: f64| {
        let th = (r - d) / rho;
        (2.0 * d / rho).cos() - (th.cos().powi(2) + th.sin().powi(2) * gamma.cos())
    };
    let (mut lo, mut hi) = (0.0, r);
    if g(r * (1.0 - 1e-12)) >= 0.0 {
        return r;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn min_separation(dirs: &[[f64; 3]]) -> f64 {
    if dirs.len() < 2 {
        return std::f64::consts::PI;
    }
    let mut tree: KdTree<f64, 3> = KdTree::with_capacity(dirs.len());
    for (i, d) in dirs.iter().enumerate() {
        tree.add(d, i as u64);
    }
    let mut best = f64::INFINITY;
    for d in dirs {
        let nn = tree.nearest_n::<SquaredEuclidean>(d, 2);
        if let Some(n) = nn.get(1) {
            best = best.min(n.distance);
        }
    }
    // chord² → angle
    2.0 * (best.sqrt() / 2.0).min(1.0).asin()
}

fn model_curvature(space: &ModelSpace) -> Result<(f64, Option<CurvatureChart>)> {
    match space {
        ModelSpace::Sphere3 { curvature } => Ok((*curvature, None)),
        ModelSpace::Euclid3 => domain("Euclid3 has no region of positive curvature and cannot be sewn"),
        ModelSpace::RotSym(s) => match s.chart() {
            Some(c) => Ok((c.k, Some(c))),
            None => domain("the rotationally symmetric space has no constant-curvature stripe to sew in"),
        },
    }
}

fn same_space(a: &ModelSpace, b: &ModelSpace) -> bool {
    match (a, b) {
        (ModelSpace::Sphere3 { curvature: x }, ModelSpace::Sphere3 { curvature: y }) => x == y,
        (ModelSpace::Euclid3, ModelSpace::Euclid3) => true,
        (ModelSpace::RotSym(x), ModelSpace::RotSym(y)) => std::sync::Arc::ptr_eq(x, y),
        _ => false,
    }
}

/// Maximal 2r-packing of A₀ and mouth geometry, δ chosen by the caller.
pub fn plan_sewing(space: &ModelSpace, a0: &CompactSetSpec, r: f64, delta: f64) -> Result<SewingPlan> {
    if !(delta > 0.0 && delta < r) {
        return domain(format!("need 0 < δ < r, got δ = {delta}, r = {r}"));
    }
    let mut plan = pack(space, a0, r)?;
    if delta > plan.delta_max {
        return domain(format!(
            "δ = {delta:e} makes the mouth balls overlap; the packing allows δ ≤ {:e}",
            plan.delta_max
        ));
    }
    plan.delta = delta;
    Ok(plan)
}

/// As `plan_sewing` with δ = min(δ_req, 0.9·δ_max).
pub fn plan_sewing_capped(space: &ModelSpace, a0: &CompactSetSpec, r: f64, delta_req: f64) -> Result<SewingPlan> {
    if !(delta_req > 0.0 && delta_req < r) {
        return domain(format!("need 0 < δ < r, got δ = {delta_req}, r = {r}"));
    }
    let mut plan = pack(space, a0, r)?;
    plan.delta = delta_req.min(0.9 * plan.delta_max);
    Ok(plan)
}

fn pack(space: &ModelSpace, a0: &CompactSetSpec, r: f64) -> Result<SewingPlan> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("packing radius must be positive, got {r}"));
    }
    if !same_space(space, a0.space()) {
        return Err(Error::Invalid("the region is specified on a different base space".into()));
    }
    let (k, chart) = model_curvature(space)?;
    let rho = k.powf(-0.5);
    if 2.0 * r >= std::f64::consts::PI * rho {
        return domain("r is too large for the curvature scale (need 2r < πK^(-1/2))");
    }
    if let SetKind::RoundBall { radius, .. } = a0.kind {
        if chart.is_none() && radius + r >= std::f64::consts::PI * rho {
            return domain("region spec must be a proper subset of the space");
        }
    }
    let (spacing, count) = sample_plan(space, a0, r)?;
    let sample = a0.dense_sample(count);
    let lifted_sample: Vec<Point> = match &chart {
        Some(c) => {
            if let Some(p) = sample.iter().find(|p| !c.covers(p)) {
                return domain(format!("A₀ leaves the constant-curvature stripe at {p:?}"));
            }
            sample.iter().map(|p| c.to_sphere(p)).collect()
        }
        None => sample.clone(),
    };
    let model = ModelSpace::Sphere3 { curvature: k };
    let kept = greedy_packing(&model, &lifted_sample, 2.0 * r);
    if kept.len() < 2 {
        return Err(Error::RegionTooSmall { centers: kept.len() });
    }
    let centers: Vec<Point> = kept.iter().map(|&i| sample[i]).collect();
    let lifted: Vec<Point> = kept.iter().map(|&i| lifted_sample[i]).collect();
    if let Some(c) = &chart {
        // T_r of every centre must stay inside the stripe and the hemisphere
        for v in &centers {
            let psi = (crate::metric::norm3(v) / rho).min(1.0).asin();
            let lo = rho * (psi - r / rho).max(0.0).sin();
            let up = psi + r / rho;
            if up >= std::f64::consts::FRAC_PI_2 || (c.r_lo > 0.0 && lo < c.r_lo) || rho * up.sin() > c.r_hi {
                return domain("T_r(A₀) leaves the constant-curvature stripe; lower r");
            }
        }
    }
    let frames: Vec<[Point; 3]> = lifted.iter().map(tangent_frame).collect();
    let dirs = spiral_directions(centers.len() - 1);
    let gamma_min = min_separation(&dirs);
    let delta_max = max_delta(k, r, gamma_min);
    Ok(SewingPlan {
        r,
        delta: 0.0,
        curvature: k,
        centers,
        gamma_min,
        delta_max,
        sample_spacing: spacing,
        sample_size: sample.len(),
        lifted,
        frames,
        dirs,
        chart,
    })
}

/// Spacing and point count of the dense A₀ sample walked by the packing.
fn sample_plan(space: &ModelSpace, a0: &CompactSetSpec, r: f64) -> Result<(f64, usize)> {
    use std::f64::consts::PI;
    let dim = a0.dimension();
    let spacing = match dim {
        1 => r / 8.0,
        2 => r / 4.0,
        _ => r / 2.0,
    };
    let count = match (&a0.kind, space) {
        (SetKind::PointList(p), _) => p.len() as f64,
        (SetKind::GeodesicCircle, _) => 2.0 * PI * space.radius().unwrap() / spacing,
        (SetKind::EquatorialSphere, _) => 4.0 * PI * space.radius().unwrap().powi(2) / (spacing * spacing),
        (SetKind::RadialRing { c }, _) => 2.0 * PI * c / spacing,
        (SetKind::RadialSphere { c }, _) => 4.0 * PI * c * c / (spacing * spacing),
        (SetKind::RoundBall { radius, .. }, ModelSpace::RotSym(s)) => {
            let e = crate::pulled::coordinate_radius(s, *radius);
            4.0 / 3.0 * PI * e.powi(3) / spacing.powi(3)
        }
        (SetKind::RoundBall { radius, .. }, _) => 4.0 / 3.0 * PI * radius.powi(3) / spacing.powi(3),
    };
    // counts that are integers up to rounding stay exact (circle at r = π/4 → 64)
    let count = if (count - count.round()).abs() < 1e-9 { count.round() } else { count.ceil() } as usize;
    if count > MAX_PACKING_SAMPLE {
        return Err(Error::Budget(format!(
            "packing sample of {count} points exceeds the cap {MAX_PACKING_SAMPLE}; raise r"
        )));
    }
    Ok((spacing, count.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_quarter_packing() {
        let s = ModelSpace::unit_sphere();
        let a0 = CompactSetSpec::new(&s, SetKind::GeodesicCircle).unwrap();
        let p = plan_sewing(&s, &a0, PI / 4.0, 0.01).unwrap();
        assert_eq!(p.n_bar(), 4);
        assert_eq!(p.n_mouths(), 12);
        assert_eq!(p.n_tunnels(), 6);
    }

    #[test]
    fn mouths_on_the_right_sphere() {
        let s = ModelSpace::unit_sphere();
        let a0 = CompactSetSpec::new(&s, SetKind::EquatorialSphere).unwrap();
        let p = plan_sewing_capped(&s, &a0, 0.5, 0.05).unwrap();
        for k in 0..p.n_bar() {
            for j in (0..p.n_bar()).filter(|&j| j != k) {
                let m = p.mouth(k, j);
                assert!(s.contains(&m));
                assert!((s.distance(&m, &p.centers[k]) - (p.r - p.delta)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_bound_is_tight() {
        let (r, g) = (0.3, 0.4);
        let d = max_delta(1.0, r, g);
        let th = r - d;
        let chord = (th.cos().powi(2) + th.sin().powi(2) * g.cos()).acos();
        assert!((chord - 2.0 * d).abs() < 1e-9);
    }

    #[test]
    fn refuses_flat_and_tiny() {
        let e = ModelSpace::Euclid3;
        let a0 = CompactSetSpec::new(&e, SetKind::RadialRing { c: 1.0 }).unwrap();
        assert!(plan_sewing(&e, &a0, 0.1, 0.01).is_err());
        let s = ModelSpace::unit_sphere();
        let one = CompactSetSpec::new(&s, SetKind::PointList(vec![[1.0, 0.0, 0.0, 0.0]])).unwrap();
        assert!(matches!(plan_sewing(&s, &one, 0.1, 0.01), Err(Error::RegionTooSmall { centers: 1 })));
        let circ = CompactSetSpec::new(&s, SetKind::GeodesicCircle).unwrap();
        assert!(plan_sewing(&s, &circ, 0.1, 0.1).is_err());
    }

    #[test]
    fn tunnel_volume_standard() {
        let t = TunnelModel::standard(1.0, 0.02);
        assert_eq!(t.h, 0.06);
        assert_eq!(t.vol, 2.0 * sphere_ball_volume(1.0, 0.01));
    }
}
