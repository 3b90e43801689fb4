use kiddo::{KdTree, SquaredEuclidean};
use rayon::prelude::*;

use super::plan::{SewingPlan, TunnelModel};
use crate::error::{domain, Error, Result};
use crate::metric::{FiniteMetric, ModelSpace, Point};
use crate::pulled::CompactSetSpec;

/// Candidates pulled from the coordinate k-d tree when the base distance is
/// not a monotone function of the coordinate distance (RotSym).
const RERANK: usize = 8;
/// Largest n̄ for which the dense centre-level hub matrix is materialized.
pub const MAX_HUB_MATRIX: usize = 4096;

/// A point of the sewn space: a base point outside the removed balls, or the
/// mouth v_kj (the rim of the tunnel from centre k towards centre j).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SewnPoint {
    Base(Point),
    Mouth { k: u32, j: u32 },
}

/// A point with its two nearest packing centres cached.
#[derive(Clone, Copy, Debug)]
pub enum Located {
    Base { p: Point, k1: u32, d1: f64, k2: u32, d2: f64 },
    Mouth { k: u32, j: u32 },
}

/// Fixed reflection applied before k-d tree insertion: it keeps distances but
/// breaks the coordinate ties of lattice / equatorial samples.
const TIE_BREAK: [f64; 4] = [0.417_022, -0.720_324, 0.000_114_4, 0.302_333];

pub(crate) fn reflect(p: &Point) -> [f64; 4] {
    let n2: f64 = TIE_BREAK.iter().map(|v| v * v).sum();
    let c = 2.0 * (0..4).map(|i| TIE_BREAK[i] * p[i]).sum::<f64>() / n2;
    [p[0] - c * TIE_BREAK[0], p[1] - c * TIE_BREAK[1], p[2] - c * TIE_BREAK[2], p[3] - c * TIE_BREAK[3]]
}

pub(crate) struct PointIndex {
    tree: KdTree<f64, 4>,
    len: usize,
}

impl PointIndex {
    pub(crate) fn new(points: &[Point]) -> Self {
        let mut tree: KdTree<f64, 4> = KdTree::with_capacity(points.len().max(1));
        for (i, p) in points.iter().enumerate() {
            tree.add(&reflect(p), i as u64);
        }
        PointIndex { tree, len: points.len() }
    }

    /// Indices of the `n` nearest points in ambient chord distance.
    pub(crate) fn nearest(&self, p: &Point, n: usize) -> Vec<usize> {
        self.tree.nearest_n::<SquaredEuclidean>(&reflect(p), n.min(self.len)).into_iter().map(|m| m.item as usize).collect()
    }
}

/// The base manifold with T_r(A₀) sewn: every pair of packing centres is
/// joined by a tunnel of length h between the mouths v_kj and v_jk.
///
/// Distances follow the hub routing graph: base geodesics, radial spokes of
/// length r−δ from each centre to its mouths, and the tunnels. A path through
/// one tunnel between different centres therefore costs
/// C₀ = 2(r−δ) + h from centre to centre.
pub struct SewnSpace {
    base: ModelSpace,
    region: CompactSetSpec,
    plan: SewingPlan,
    tunnels: TunnelModel,
    index: PointIndex,
    exact_index: bool,
    dir_index: KdTree<f64, 3>,
}

impl SewnSpace {
    pub fn new(base: ModelSpace, region: CompactSetSpec, plan: SewingPlan, tunnels: TunnelModel) -> Result<Self> {
        if tunnels.delta != plan.delta {
            return Err(Error::Invalid(format!(
                "tunnel model δ = {} does not match the plan δ = {}",
                tunnels.delta, plan.delta
            )));
        }
        if !(tunnels.h >= 0.0) || !(tunnels.vol >= 0.0) {
            return domain("tunnel diameter and volume must be nonnegative");
        }
        let exact_index = matches!(base, ModelSpace::Sphere3 { .. } | ModelSpace::Euclid3);
        let index = PointIndex::new(&plan.centers);
        let mut dir_index: KdTree<f64, 3> = KdTree::with_capacity(plan.directions().len().max(1));
        for (i, d) in plan.directions().iter().enumerate() {
            dir_index.add(d, i as u64);
        }
        Ok(SewnSpace { base, region, plan, tunnels, index, exact_index, dir_index })
    }

    /// Plan with δ = min(δ_req, 0.9·δ_max) and the standard tunnel model.
    pub fn build(base: &ModelSpace, region: &CompactSetSpec, r: f64, delta_req: f64) -> Result<Self> {
        let plan = super::plan::plan_sewing_capped(base, region, r, delta_req)?;
        let t = TunnelModel::standard(plan.curvature, plan.delta);
        SewnSpace::new(base.clone(), region.clone(), plan, t)
    }

    pub fn base(&self) -> &ModelSpace {
        &self.base
    }

    pub fn region(&self) -> &CompactSetSpec {
        &self.region
    }

    pub fn plan(&self) -> &SewingPlan {
        &self.plan
    }

    pub fn tunnels(&self) -> &TunnelModel {
        &self.tunnels
    }

    /// Spoke length r−δ.
    #[inline]
    pub fn spoke(&self) -> f64 {
        self.plan.r - self.plan.delta
    }

    /// Centre-to-centre cost through one tunnel.
    #[inline]
    pub fn c0(&self) -> f64 {
        2.0 * self.spoke() + self.tunnels.h
    }

    /// Worst-case error of ignoring the removed balls in base legs, per
    /// crossed ball (detour around a δ/2-ball).
    pub fn bypass_budget(&self) -> f64 {
        std::f64::consts::PI * self.plan.delta
    }

    /// Plan CSV headed by the removed-ball error budget and the scalar-curvature
    /// bookkeeping of the base (tunnels are assumed to keep its sign).
    pub fn plan_csv(&self, max_mouth_rows: u64) -> String {
        let inf = self.base.inf_scal();
        format!(
            "# bypass_budget_per_ball = {:e}\n# inf_scal_base = {inf:e}\n# scal_nonnegative = {}\n{}",
            self.bypass_budget(),
            inf >= 0.0,
            self.plan.to_csv(&self.tunnels, max_mouth_rows)
        )
    }

    fn nearest_two(&self, p: &Point) -> (u32, f64, u32, f64) {
        let cands = self.index.nearest(p, if self.exact_index { 2 } else { RERANK });
        let mut best = [(u32::MAX, f64::INFINITY); 2];
        for k in cands {
            let d = self.base.distance(p, &self.plan.centers[k]);
            if d < best[0].1 {
                best[1] = best[0];
                best[0] = (k as u32, d);
            } else if d < best[1].1 {
                best[1] = (k as u32, d);
            }
        }
        (best[0].0, best[0].1, best[1].0, best[1].1)
    }

    pub fn locate(&self, p: &SewnPoint) -> Located {
        match *p {
            SewnPoint::Mouth { k, j } => Located::Mouth { k, j },
            SewnPoint::Base(p) => {
                let (k1, d1, k2, d2) = self.nearest_two(&p);
                Located::Base { p, k1, d1, k2, d2 }
            }
        }
    }

    pub fn locate_all(&self, pts: &[SewnPoint]) -> Vec<Located> {
        pts.par_iter().map(|p| self.locate(p)).collect()
    }

    /// The mouth (k, j) whose removed ball B(v_kj, δ/2) contains `p`, if any.
    pub fn removed_ball(&self, p: &Point) -> Option<(u32, u32)> {
        let (k1, _, k2, _) = self.nearest_two(p);
        let s = self.spoke();
        let half = self.plan.delta / 2.0;
        let q = self.plan.lift(p);
        for k in [k1, k2] {
            if k == u32::MAX {
                continue;
            }
            let k = k as usize;
            // a point of B(v_kj, δ/2) is within δ/2 of the spoke sphere
            let d = self.plan.model_distance(&q, self.plan.lifted_center(k));
            if (d - s).abs() >= half + 1e-12 {
                continue;
            }
            let Some(w) = self.plan.direction_at(k, &q) else { continue };
            for m in self.dir_index.nearest_n::<SquaredEuclidean>(&w, 3.min(self.plan.directions().len())) {
                let j = SewingPlan::partner_of_dir(k, m.item as usize);
                let mouth = self.plan.mouth_lifted(k, j);
                if self.plan.model_distance(&q, &mouth) < half {
                    return Some((k as u32, j as u32));
                }
            }
        }
        None
    }

    pub fn check_point(&self, p: &SewnPoint) -> Result<()> {
        match *p {
            SewnPoint::Base(x) => {
                if !self.base.contains(&x) {
                    return domain(format!("point {x:?} is not in the base space"));
                }
                if let Some((k, j)) = self.removed_ball(&x) {
                    return domain(format!("point {x:?} lies in the removed ball around mouth ({k}, {j})"));
                }
                Ok(())
            }
            SewnPoint::Mouth { k, j } => {
                let nb = self.plan.n_bar() as u32;
                if k >= nb || j >= nb || k == j {
                    return domain(format!("no mouth ({k}, {j}) with n̄ = {nb}"));
                }
                Ok(())
            }
        }
    }

    /// Graph distance between centres: base geodesic or one tunnel.
    #[inline]
    pub fn hub(&self, k: usize, l: usize) -> f64 {
        if k == l {
            0.0
        } else {
            self.base.distance(&self.plan.centers[k], &self.plan.centers[l]).min(self.c0())
        }
    }

    /// Distance from centre k to a located base point.
    #[inline]
    fn center_to(&self, k: u32, y: &Located) -> f64 {
        let Located::Base { p, k1, d1, k2, d2 } = y else { unreachable!() };
        let direct = if k == *k1 {
            *d1
        } else if k == *k2 {
            *d2
        } else {
            self.base.distance(&self.plan.centers[k as usize], p)
        };
        let other = if k != *k1 { *d1 } else { *d2 };
        direct.min(self.c0() + other)
    }

    /// Sewn distance of two located base points whose base distance is `d`.
    #[inline]
    pub fn base_pair(&self, a: &Located, b: &Located, d: f64) -> f64 {
        let (Located::Base { k1, d1, d2, .. }, Located::Base { k1: l1, d1: e1, d2: e2, .. }) = (a, b) else {
            return self.dist_loc(a, b);
        };
        let via = if k1 != l1 { d1 + e1 } else { (d1 + e2).min(d2 + e1) };
        d.min(via + self.c0())
    }

    pub fn dist_loc(&self, a: &Located, b: &Located) -> f64 {
        let s = self.spoke();
        let h = self.tunnels.h;
        match (a, b) {
            (Located::Base { p, .. }, Located::Base { p: q, .. }) => self.base_pair(a, b, self.base.distance(p, q)),
            (Located::Mouth { k, j }, y @ Located::Base { .. }) | (y @ Located::Base { .. }, Located::Mouth { k, j }) => {
                (s + self.center_to(*k, y)).min(s + h + self.center_to(*j, y))
            }
            (Located::Mouth { k, j }, Located::Mouth { k: a2, j: b2 }) => {
                if (k, j) == (a2, b2) {
                    return 0.0;
                }
                let exits = [(*k as usize, s), (*j as usize, s + h)];
                let entries = [(*a2 as usize, s), (*b2 as usize, s + h)];
                let mut best = f64::INFINITY;
                for (c, x) in exits {
                    for (e, y) in entries {
                        best = best.min(x + self.hub(c, e) + y);
                    }
                }
                if (k, j) == (b2, a2) {
                    best = best.min(h);
                }
                best
            }
        }
    }

    /// Distance with no precondition checks.
    pub fn dist(&self, a: &SewnPoint, b: &SewnPoint) -> f64 {
        self.dist_loc(&self.locate(a), &self.locate(b))
    }

    /// Distance from a point to A₀ measured in the base.
    pub fn region_distance(&self, p: &SewnPoint) -> f64 {
        match *p {
            SewnPoint::Base(x) => self.region.dist_to_set(&x),
            SewnPoint::Mouth { k, j } => self.region.dist_to_set(&self.plan.mouth(k as usize, j as usize)),
        }
    }

    /// Membership in the edited region A_r′ (T_r(A₀) minus removed balls, plus tunnels).
    pub fn in_edited_region(&self, p: &SewnPoint) -> bool {
        match p {
            SewnPoint::Mouth { .. } => true,
            SewnPoint::Base(x) => self.region.dist_to_set(x) < self.plan.r,
        }
    }

    /// Centre-level hub matrix H(k, l).
    pub fn hub_matrix(&self) -> Result<FiniteMetric> {
        let nb = self.plan.n_bar();
        if nb > MAX_HUB_MATRIX {
            return Err(Error::Budget(format!("hub matrix of {nb} centres exceeds {MAX_HUB_MATRIX}")));
        }
        Ok(FiniteMetric::from_fn(nb, |k, l| self.hub(k, l)))
    }
}

pub fn sewn_distance(n: &SewnSpace, x: &SewnPoint, y: &SewnPoint) -> Result<f64> {
    n.check_point(x)?;
    n.check_point(y)?;
    Ok(n.dist(x, y))
}

/// Vol(M) − n·Vol(B(δ/2)) + (n/2)·vol(U); the two edit terms are combined
/// before touching Vol(M) so that the standard model returns Vol(M) bit-for-bit.
pub fn sewn_volume(n: &SewnSpace) -> Result<f64> {
    let base = n
        .base
        .total_volume()
        .ok_or_else(|| Error::Domain("base volume is not finite".into()))?;
    let m = n.plan.n_mouths() as f64;
    let removed = crate::metric::sphere_ball_volume(n.plan.curvature, n.plan.delta / 2.0);
    let edit = (m / 2.0) * n.tunnels.vol - m * removed;
    Ok(base + edit)
}

/// max over sampled pairs of the sewn distance; the sample must lie in A_r′.
pub fn edited_region_diameter(n: &SewnSpace, sample: &[SewnPoint]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Invalid("empty sample".into()));
    }
    for p in sample {
        n.check_point(p)?;
        if !n.in_edited_region(p) {
            return domain(format!("sample point {p:?} is outside the edited region"));
        }
    }
    let loc = n.locate_all(sample);
    Ok(pairwise_max(&loc, |a, b| n.dist_loc(a, b)))
}

pub(crate) fn pairwise_max<T: Sync>(v: &[T], f: impl Fn(&T, &T) -> f64 + Sync) -> f64 {
    (0..v.len())
        .into_par_iter()
        .map(|i| v[i + 1..].iter().map(|b| f(&v[i], b)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}
