//! Intrinsic distances on rotationally symmetric graph manifolds.
//!
//! `RotSymSpace` tabulates exact geodesic lengths obtained from Clairaut's
//! integral (shooting in the Clairaut constant c) on an (r₁, r₂, φ) grid.
//! It stores them as ratios to a cheap closed-form comparison length so that
//! trilinear lookup stays accurate for nearby points.
//! `rotsym_distance` is the independent grid-graph (Dijkstra) solver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use super::{gauss8, scalar_curvature, GraphProfile, HawkingProfile};
use crate::error::{domain, Result};
use crate::metric::{norm3, Point, MEMBERSHIP_TOL};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableResolution {
    pub n_r: usize,
    pub n_phi: usize,
    /// Clairaut-constant samples per branch.
    pub n_shoot: usize,
    pub n_arc: usize,
}

impl Default for TableResolution {
    fn default() -> Self {
        TableResolution { n_r: 121, n_phi: 145, n_shoot: 128, n_arc: 4097 }
    }
}

/// A constant-curvature region r⁻¹[r_lo, r_hi] isometric to an annulus of
/// the round S³ of radius K^(-1/2); the chart is x ↦ (√(R²−|x|²), x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureChart {
    pub k: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

impl CurvatureChart {
    pub fn radius(&self) -> f64 {
        self.k.powf(-0.5)
    }

    pub fn to_sphere(&self, p: &Point) -> Point {
        let rr = self.radius();
        let q = (rr * rr - (p[0] * p[0] + p[1] * p[1] + p[2] * p[2])).max(0.0).sqrt();
        [q, p[0], p[1], p[2]]
    }

    pub fn from_sphere(&self, q: &Point) -> Point {
        [q[1], q[2], q[3], 0.0]
    }

    pub fn covers(&self, p: &Point) -> bool {
        let r = norm3(p);
        r >= self.r_lo && r <= self.r_hi
    }
}

/// Radius, radial arclength and direction of a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Polar {
    pub r: f64,
    pub s: f64,
    pub u: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct RotSymSpace {
    profile: HawkingProfile,
    window: (f64, f64),
    res: TableResolution,
    dr: f64,
    dphi: f64,
    ratio: Vec<f32>,
    arc_h: f64,
    arc_s: Vec<f64>,
    arc_f: Vec<f64>,
    chart: Option<CurvatureChart>,
    inf_scal: f64,
}

impl RotSymSpace {
    /// The compact piece r ∈ [window.0, window.1] of the manifold with Hawking
    /// profile `profile` (which must start on the axis, r_min = 0).
    pub fn new(profile: HawkingProfile, window: (f64, f64), res: TableResolution) -> Result<Self> {
        if profile.r_min != 0.0 {
            return domain("distance tables need a profile starting on the axis (r_min = 0); use rotsym_distance");
        }
        let (lo, hi) = window;
        if !(lo >= 0.0 && lo < hi && hi <= profile.r_max() + 1e-12) {
            return domain(format!("window [{lo}, {hi}] outside profile range [0, {}]", profile.r_max()));
        }
        if res.n_r < 3 || res.n_phi < 3 || res.n_shoot < 4 || res.n_arc < 3 {
            return domain("table resolution too small");
        }
        let arc_h = hi / (res.n_arc - 1) as f64;
        let arc_f: Vec<f64> = (0..res.n_arc).map(|i| profile.radial_factor(i as f64 * arc_h)).collect();
        if arc_f.iter().any(|f| !f.is_finite()) {
            return domain("radial factor is singular inside the window (m reaches r/2)");
        }
        let gl = gauss8();
        let mut arc_s = vec![0.0; res.n_arc];
        for i in 1..res.n_arc {
            let a = (i - 1) as f64 * arc_h;
            arc_s[i] = arc_s[i - 1] + gl.integrate(a, a + arc_h, |r| profile.radial_factor(r));
        }
        let curv = scalar_curvature(&profile);
        let inf_scal = curv
            .r
            .iter()
            .zip(&curv.scal)
            .filter(|(r, s)| **r <= hi && s.is_finite())
            .map(|(_, s)| *s)
            .fold(f64::INFINITY, f64::min);
        let chart = detect_chart(&profile, hi);
        let mut space = RotSymSpace {
            profile,
            window,
            res,
            dr: hi / (res.n_r - 1) as f64,
            dphi: PI / (res.n_phi - 1) as f64,
            ratio: Vec::new(),
            arc_h,
            arc_s,
            arc_f,
            chart,
            inf_scal,
        };
        space.build_table();
        Ok(space)
    }

    pub fn profile(&self) -> &HawkingProfile {
        &self.profile
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn chart(&self) -> Option<CurvatureChart> {
        self.chart
    }

    pub fn inf_scal(&self) -> f64 {
        self.inf_scal
    }

    pub fn resolution(&self) -> TableResolution {
        self.res
    }

    pub fn contains(&self, p: &Point) -> bool {
        let r = norm3(p);
        p[3].abs() <= MEMBERSHIP_TOL && r >= self.window.0 - MEMBERSHIP_TOL && r <= self.window.1 + MEMBERSHIP_TOL
    }

    /// Riemannian volume density relative to coordinate volume, or `None`
    /// outside the window.
    pub fn density(&self, p: &Point) -> Option<f64> {
        let r = norm3(p);
        if r < self.window.0 || r > self.window.1 {
            None
        } else {
            Some(self.profile.radial_factor(r))
        }
    }

    pub fn window_volume(&self) -> f64 {
        super::annulus_volume(&self.profile, self.window.0, self.window.1)
    }

    /// Radial arclength s(r) = ∫₀ʳ √(1+z′²), cubic Hermite in the arc table.
    pub fn arc(&self, r: f64) -> f64 {
        let x = (r / self.arc_h).clamp(0.0, (self.res.n_arc - 1) as f64);
        let i = (x as usize).min(self.res.n_arc - 2);
        let (x0, x1) = (i as f64 * self.arc_h, (i + 1) as f64 * self.arc_h);
        super::hermite(x0, x1, self.arc_s[i], self.arc_s[i + 1], self.arc_f[i], self.arc_f[i + 1], r.clamp(0.0, self.window.1))
    }

    fn comparison(&self, r1: f64, r2: f64, phi: f64) -> f64 {
        let ds = self.arc(r2) - self.arc(r1);
        let h = (0.5 * phi).sin();
        (ds * ds + 4.0 * r1 * r2 * h * h).sqrt()
    }

    /// Distance between (r₁, ω₁) and (r₂, ω₂) with ∠(ω₁, ω₂) = φ.
    pub fn distance_polar(&self, r1: f64, r2: f64, phi: f64) -> f64 {
        let base = self.comparison(r1, r2, phi);
        if base == 0.0 {
            return 0.0;
        }
        base * self.ratio_at(r1, r2, phi)
    }

    #[inline]
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        self.distance_cached(&self.polar(p), &self.polar(q))
    }

    pub fn polar(&self, p: &Point) -> Polar {
        let r = norm3(p);
        let u = if r > 0.0 { [p[0] / r, p[1] / r, p[2] / r] } else { [0.0; 3] };
        Polar { r, s: self.arc(r), u }
    }

    /// `distance` for points whose polar data is already known.
    #[inline]
    pub fn distance_cached(&self, a: &Polar, b: &Polar) -> f64 {
        // |u₁ − u₂| = 2 sin(φ/2), accurate for small angles
        let (phi, chord2) = if a.r == 0.0 || b.r == 0.0 {
            (0.0, 0.0)
        } else {
            let d = [a.u[0] - b.u[0], a.u[1] - b.u[1], a.u[2] - b.u[2]];
            let c2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            (2.0 * (0.5 * c2.sqrt()).min(1.0).asin(), c2)
        };
        let ds = b.s - a.s;
        let base = (ds * ds + a.r * b.r * chord2).sqrt();
        if base == 0.0 {
            return 0.0;
        }
        base * self.ratio_at(a.r, b.r, phi)
    }

    #[inline]
    fn ratio_at(&self, r1: f64, r2: f64, phi: f64) -> f64 {
        let nr = self.res.n_r;
        let np = self.res.n_phi;
        #[inline(always)]
        fn cell(x: f64, n: usize) -> (usize, f64) {
            let x = x.clamp(0.0, (n - 1) as f64);
            let i = (x as usize).min(n - 2);
            (i, x - i as f64)
        }
        let (a, ta) = cell(r1 / self.dr, nr);
        let (b, tb) = cell(r2 / self.dr, nr);
        let (l, tl) = cell(phi / self.dphi, np);
        let t = &self.ratio;
        let i00 = (a * nr + b) * np + l;
        let i01 = i00 + np;
        let i10 = i00 + nr * np;
        let i11 = i10 + np;
        let lerp = |i: usize| t[i] as f64 + tl * (t[i + 1] as f64 - t[i] as f64);
        let (v00, v01, v10, v11) = (lerp(i00), lerp(i01), lerp(i10), lerp(i11));
        let v0 = v00 + tb * (v01 - v00);
        let v1 = v10 + tb * (v11 - v10);
        v0 + ta * (v1 - v0)
    }

    fn build_table(&mut self) {
        let (nr, np, ns) = (self.res.n_r, self.res.n_phi, self.res.n_shoot);
        let rho: Vec<f64> = (0..nr).map(|a| a as f64 * self.dr).collect();
        let s: Vec<f64> = rho.iter().map(|r| self.arc(*r)).collect();
        let mut ratio = vec![1.0f32; nr * nr * np];
        let gl = gauss8();
        let prof = &self.profile;
        let mut phi_c = vec![vec![0.0; nr]; ns + 1];
        let mut len_c = vec![vec![0.0; nr]; ns + 1];
        let mut best = vec![f64::INFINITY; np];
        for a in 1..nr {
            // Clairaut constants c_k = ρ_a sin θ_k, dense near the turning point
            for k in 0..=ns {
                let th = 0.5 * PI * k as f64 / ns as f64;
                let c = if k == ns { rho[a] } else { rho[a] * th.sin() };
                let fr = |u: f64| {
                    let sr = c + u * u;
                    let fm1 = prof.radial_factor(sr) - 1.0;
                    let q = (sr + c).sqrt();
                    (if c > 0.0 { 2.0 * c * fm1 / (sr * q) } else { 0.0 }, 2.0 * fm1 * sr / q)
                };
                let (mut rp, mut rl) = (0.0, 0.0);
                let mut u_prev = 0.0;
                let first = ((c / self.dr).ceil() as usize).min(nr - 1);
                for b in first..nr {
                    let u = (rho[b] - c).max(0.0).sqrt();
                    if u > u_prev {
                        rp += gl.integrate(u_prev, u, |x| fr(x).0);
                        rl += gl.integrate(u_prev, u, |x| fr(x).1);
                    }
                    u_prev = u;
                    if b >= a {
                        let base_phi = if rho[b] > 0.0 { (c / rho[b]).clamp(-1.0, 1.0).acos() } else { 0.0 };
                        phi_c[k][b] = base_phi + rp;
                        len_c[k][b] = (rho[b] * rho[b] - c * c).max(0.0).sqrt() + rl;
                    }
                }
                if k == ns {
                    phi_c[k][a] = 0.0;
                    len_c[k][a] = 0.0;
                }
            }
            for b in a..nr {
                best.iter_mut().for_each(|v| *v = f64::INFINITY);
                let mut poly: Vec<(f64, f64)> = Vec::with_capacity(2 * ns + 2);
                for k in 0..=ns {
                    poly.push((phi_c[k][b] - phi_c[k][a], len_c[k][b] - len_c[k][a]));
                }
                for k in (0..ns).rev() {
                    poly.push((phi_c[k][a] + phi_c[k][b], len_c[k][a] + len_c[k][b]));
                }
                for w in poly.windows(2) {
                    let ((p0, l0), (p1, l1)) = (w[0], w[1]);
                    let (lo, hi) = (p0.min(p1), p0.max(p1));
                    let interp = |t: f64| if hi - lo < 1e-15 { l0.min(l1) } else { l0 + (t - p0) / (p1 - p0) * (l1 - l0) };
                    // direct crossings φ_l ∈ [lo, hi]
                    let i0 = (lo / self.dphi).ceil().max(0.0) as usize;
                    let i1 = ((hi / self.dphi).floor() as isize).min(np as isize - 1);
                    let mut l = i0 as isize;
                    while l <= i1 {
                        let t = l as f64 * self.dphi;
                        let v = interp(t);
                        if v < best[l as usize] {
                            best[l as usize] = v;
                        }
                        l += 1;
                    }
                    // wrapped crossings 2π − φ_l
                    if hi > PI {
                        let j0 = ((2.0 * PI - hi) / self.dphi).ceil().max(0.0) as usize;
                        let j1 = (((2.0 * PI - lo) / self.dphi).floor() as isize).min(np as isize - 1);
                        let mut l = j0 as isize;
                        while l <= j1 {
                            let t = 2.0 * PI - l as f64 * self.dphi;
                            let v = interp(t);
                            if v < best[l as usize] {
                                best[l as usize] = v;
                            }
                            l += 1;
                        }
                    }
                }
                for l in 0..np {
                    let phi = l as f64 * self.dphi;
                    // the route through the axis is always available
                    let d = best[l].min(s[a] + s[b]);
                    let ds = s[b] - s[a];
                    let base = (ds * ds + 2.0 * rho[a] * rho[b] * (1.0 - phi.cos())).max(0.0).sqrt();
                    let q = if base > 1e-14 { (d / base) as f32 } else { 1.0 };
                    ratio[(a * nr + b) * np + l] = q;
                    ratio[(b * nr + a) * np + l] = q;
                }
            }
        }
        self.ratio = ratio;
    }
}

fn detect_chart(p: &HawkingProfile, r_top: f64) -> Option<CurvatureChart> {
    let st = p.stripes.first()?;
    let matches = |r: f64| {
        let want = r.powi(3) * st.k / 2.0;
        (p.mass_at(r) - want).abs() <= 1e-12 * want.max(1e-12)
    };
    // grow the stripe downward while the profile stays r³K/2
    let mut lo = st.a;
    let step = (st.b - st.a) / 64.0;
    while lo > 0.0 && matches((lo - step).max(0.0)) {
        lo = (lo - step).max(0.0);
    }
    if lo < st.a && lo > 0.0 {
        lo = st.a;
    }
    Some(CurvatureChart { k: st.k, r_lo: lo, r_hi: st.b.min(r_top) })
}

/// Result of the grid-graph solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DijkstraDistance {
    pub distance: f64,
    /// Relative change against the half-resolution grid.
    pub refinement_change: f64,
    /// Set when the refinement change exceeds the 1% target.
    pub warning: bool,
}

#[derive(Copy, Clone, PartialEq)]
struct Node(f64, usize);
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(o.1.cmp(&self.1))
    }
}

/// Shortest path between (r₁, φ) and (r₂, 0) in ds² = (1+z′²)dr² + r²dφ².
///
/// Dijkstra on a uniform (r, φ) grid whose stencil holds every primitive
/// offset with |Δi|, |Δj| ≤ 5 (the 8-neighbour stencil has ≈8% anisotropy
/// error). Edge lengths use the graph chord √(Δr² + Δz² + (r̄Δφ)²), which stays
/// finite at a horizon. The source and target are off-grid points joined to
/// the surrounding nodes by direct chords.
pub fn rotsym_distance(g: &GraphProfile, r1: f64, phi: f64, r2: f64) -> Result<DijkstraDistance> {
    rotsym_distance_with(g, r1, phi, r2, 161)
}

pub fn rotsym_distance_with(g: &GraphProfile, r1: f64, phi: f64, r2: f64, n: usize) -> Result<DijkstraDistance> {
    let (lo, hi) = (g.grid[0], *g.grid.last().unwrap());
    for r in [r1, r2] {
        if !(r >= lo - 1e-12 && r <= hi + 1e-12) {
            return domain(format!("radius {r} outside the profile range [{lo}, {hi}]"));
        }
    }
    if !(0.0..=PI).contains(&phi) {
        return domain(format!("angle {phi} outside [0, π]"));
    }
    let fine = dijkstra_grid(g, r1, phi, r2, n);
    let coarse = dijkstra_grid(g, r1, phi, r2, n.div_ceil(2).max(9));
    let change = if fine > 0.0 { (fine - coarse).abs() / fine } else { 0.0 };
    Ok(DijkstraDistance { distance: fine, refinement_change: change, warning: change > 0.01 })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn dijkstra_grid(g: &GraphProfile, r1: f64, phi: f64, r2: f64, n: usize) -> f64 {
    let (lo, hi) = (g.grid[0], *g.grid.last().unwrap());
    let (nr, np) = (n, n);
    let dr = (hi - lo) / (nr - 1) as f64;
    let dp = PI / (np - 1) as f64;
    let rr: Vec<f64> = (0..nr).map(|i| lo + i as f64 * dr).collect();
    let zz: Vec<f64> = rr.iter().map(|r| g.z_at(*r)).collect();
    let chord = |ra: f64, za: f64, pa: f64, rb: f64, zb: f64, pb: f64| {
        let rm = 0.5 * (ra + rb);
        ((rb - ra).powi(2) + (zb - za).powi(2) + (rm * (pb - pa)).powi(2)).sqrt()
    };
    const REACH: i64 = 5;
    let mut offs = Vec::new();
    for di in -REACH..=REACH {
        for dj in -REACH..=REACH {
            if (di, dj) != (0, 0) && gcd(di, dj) == 1 {
                offs.push((di, dj));
            }
        }
    }
    let id = |i: usize, j: usize| i * np + j;
    let mut dist = vec![f64::INFINITY; nr * np];
    let mut heap = BinaryHeap::new();
    // seed with chords from the source (r₂, 0) to nearby nodes
    let z2 = g.z_at(r2);
    let (ci, cj) = (((r2 - lo) / dr).round() as i64, 0i64);
    for di in -REACH..=REACH {
        for dj in 0..=REACH {
            let (i, j) = (ci + di, cj + dj);
            if i < 0 || i >= nr as i64 || j >= np as i64 {
                continue;
            }
            let (i, j) = (i as usize, j as usize);
            let d = chord(r2, z2, 0.0, rr[i], zz[i], j as f64 * dp);
            if d < dist[id(i, j)] {
                dist[id(i, j)] = d;
                heap.push(Node(d, id(i, j)));
            }
        }
    }
    while let Some(Node(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        let (i, j) = ((v / np) as i64, (v % np) as i64);
        for &(di, dj) in &offs {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= nr as i64 || b >= np as i64 {
                continue;
            }
            let (a, b) = (a as usize, b as usize);
            let w = chord(rr[i as usize], zz[i as usize], j as f64 * dp, rr[a], zz[a], b as f64 * dp);
            let nd = d + w;
            if nd < dist[id(a, b)] {
                dist[id(a, b)] = nd;
                heap.push(Node(nd, id(a, b)));
            }
        }
    }
    let z1 = g.z_at(r1);
    let (ti, tj) = (((r1 - lo) / dr).round() as i64, (phi / dp).round() as i64);
    // a direct chord is only trusted inside one stencil reach
    let mut best = if (r1 - r2).abs() <= REACH as f64 * dr && phi <= REACH as f64 * dp {
        chord(r1, z1, phi, r2, z2, 0.0)
    } else {
        f64::INFINITY
    };
    for di in -REACH..=REACH {
        for dj in -REACH..=REACH {
            let (i, j) = (ti + di, tj + dj);
            if i < 0 || j < 0 || i >= nr as i64 || j >= np as i64 {
                continue;
            }
            let (i, j) = (i as usize, j as usize);
            let d = dist[id(i, j)] + chord(rr[i], zz[i], j as f64 * dp, r1, z1, phi);
            best = best.min(d);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::super::{embed, stripe_profile_with_grid, HawkingProfile};
    use super::*;

    fn flat(r_max: f64) -> HawkingProfile {
        let grid: Vec<f64> = (0..201).map(|i| r_max * i as f64 / 200.0).collect();
        HawkingProfile::tabulated(grid, vec![0.0; 201], vec![]).unwrap()
    }

    #[test]
    fn flat_table_is_euclidean() {
        let s = RotSymSpace::new(flat(2.0), (0.0, 2.0), TableResolution { n_r: 41, n_phi: 61, n_shoot: 64, n_arc: 257 }).unwrap();
        let p = [0.3, -0.2, 0.9, 0.0];
        let q = [-1.1, 0.4, 0.25, 0.0];
        let e = ((p[0] - q[0]) as f64).hypot(p[1] - q[1]).hypot(p[2] - q[2]);
        assert!((s.distance(&p, &q) - e).abs() < 1e-3 * e, "{} vs {e}", s.distance(&p, &q));
        let near = [0.3005, -0.2, 0.9, 0.0];
        assert!((s.distance(&p, &near) - 5e-4).abs() < 1e-6);
    }

    #[test]
    fn stripe_matches_sphere() {
        // m = r³K/2 on [0, 1.2]: the coordinate ball is a cap of S³(2)
        let k = 0.25;
        let prof = stripe_profile_with_grid(k, 0.0, 1.2, 0.0, 1.6, 0.5, 2001).unwrap();
        let s = RotSymSpace::new(prof, (0.0, 1.2), TableResolution::default()).unwrap();
        let chart = s.chart().unwrap();
        assert_eq!(chart.r_hi, 1.2);
        let sph = crate::metric::ModelSpace::sphere(k).unwrap();
        for (p, q) in [([0.5, 0.1, 0.0, 0.0], [0.0, 0.9, 0.3, 0.0]), ([1.0, 0.0, 0.0, 0.0], [-0.8, 0.1, 0.5, 0.0])] {
            let want = sph.distance(&chart.to_sphere(&p), &chart.to_sphere(&q));
            let got = s.distance(&p, &q);
            assert!((got - want).abs() < 2e-3 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn dijkstra_flat_and_radial() {
        let g = embed(&flat(2.0), 0.0).unwrap();
        let d = rotsym_distance(&g, 1.5, 1.0, 0.7).unwrap();
        let e = (1.5f64 * 1.5 + 0.49 - 2.0 * 1.5 * 0.7 * 1f64.cos()).sqrt();
        assert!((d.distance - e).abs() < 0.01 * e, "{d:?} vs {e}");
        let prof = stripe_profile_with_grid(0.25, 0.5, 1.2, 0.0, 2.0, 0.4, 2001).unwrap();
        let g = embed(&prof, 0.0).unwrap();
        let d = rotsym_distance(&g, 1.8, 0.0, 0.3).unwrap();
        let want = gauss8().integrate(0.3, 1.8, |r| prof.radial_factor(r));
        assert!((d.distance - want).abs() < 0.01 * want, "{d:?} vs {want}");
    }

    #[test]
    fn needs_axis() {
        let (hp, _) = super::super::schwarzschild_with_grid(1.0, 5.0, 100).unwrap();
        assert!(RotSymSpace::new(hp, (2.0, 5.0), TableResolution::default()).is_err());
    }
}
