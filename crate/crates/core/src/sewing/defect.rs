use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::space::{PointIndex, SewnPoint, SewnSpace};
use crate::error::{Error, Result};
use crate::metric::{greedy_packing, sample_sphere, unit_vector3, ModelSpace, Point};
use crate::pulled::PulledSpace;
use crate::rotsym::{Polar, RotSymSpace};

/// Almost-isometry defect of the scrunch map F: N → Y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectReport {
    /// max |d_Y(F x, F y) − d_N(x, y)| over sampled pairs.
    pub eps_dis: f64,
    /// Covering radius of F(sample) over the probe set of Y.
    pub eps_cov: f64,
    /// 2·max(ε_dis, ε_cov).
    pub gh_bound: f64,
    /// Empirical Lipschitz constant of F on the sample.
    pub lip: f64,
    pub sample: usize,
    pub collapsed: usize,
    pub probes: usize,
}

fn same_base(a: &ModelSpace, b: &ModelSpace) -> bool {
    match (a, b) {
        (ModelSpace::Sphere3 { curvature: x }, ModelSpace::Sphere3 { curvature: y }) => x == y,
        (ModelSpace::Euclid3, ModelSpace::Euclid3) => true,
        (ModelSpace::RotSym(x), ModelSpace::RotSym(y)) => std::sync::Arc::ptr_eq(x, y),
        _ => false,
    }
}

/// Defect of F collapsing A_r′ to p₀ and fixing every other point, for N and
/// Y built over the same base and region.
pub fn scrunch_map_defect(n: &SewnSpace, y: &PulledSpace, sample: &[SewnPoint], probes: &[Point]) -> Result<DefectReport> {
    if !same_base(n.base(), y.base()) || n.region().kind != y.set.kind {
        return Err(Error::Invalid("sewn and pulled spaces are built over different base/region specs".into()));
    }
    defect_core(n, y, sample, probes)
}

/// Same defect for F∘ψ where ψ identifies the two bases through their
/// common coordinates (radially matched rotationally symmetric pieces).
pub fn transfer_defect(n: &SewnSpace, y: &PulledSpace, sample: &[SewnPoint], probes: &[Point]) -> Result<DefectReport> {
    defect_core(n, y, sample, probes)
}

fn defect_core(n: &SewnSpace, y: &PulledSpace, sample: &[SewnPoint], probes: &[Point]) -> Result<DefectReport> {
    if sample.is_empty() {
        return Err(Error::Invalid("empty sample".into()));
    }
    for p in sample {
        n.check_point(p)?;
    }
    let loc = n.locate_all(sample);
    // F(x): None for p₀, else the same coordinates with their distance to A₀ in Y
    let img: Vec<Option<(Point, f64)>> = sample
        .par_iter()
        .map(|p| match p {
            SewnPoint::Base(x) if !n.in_edited_region(p) => Some((*x, y.set.dist_to_set(x))),
            _ => None,
        })
        .collect();
    let dy = |a: &Option<(Point, f64)>, b: &Option<(Point, f64)>| match (a, b) {
        (None, None) => 0.0,
        (None, Some((_, t))) | (Some((_, t)), None) => *t,
        (Some((p, s)), Some((q, t))) => y.base().distance(p, q).min(s + t),
    };
    // polar data of RotSym base points, so pairs skip the per-point work
    let polar: Option<(&RotSymSpace, Vec<Polar>)> = match n.base() {
        ModelSpace::RotSym(sp) => Some((
            sp,
            sample
                .iter()
                .map(|p| match p {
                    SewnPoint::Base(x) => sp.polar(x),
                    SewnPoint::Mouth { .. } => Polar::default(),
                })
                .collect(),
        )),
        _ => None,
    };
    let dn_of = |i: usize, j: usize| match (&polar, &sample[i], &sample[j]) {
        (Some((sp, pl)), SewnPoint::Base(_), SewnPoint::Base(_)) => {
            n.base_pair(&loc[i], &loc[j], sp.distance_cached(&pl[i], &pl[j]))
        }
        _ => n.dist_loc(&loc[i], &loc[j]),
    };
    let (eps_dis, lip) = (0..sample.len())
        .into_par_iter()
        .map(|i| {
            let mut e: f64 = 0.0;
            let mut l: f64 = 0.0;
            for j in i + 1..sample.len() {
                let dn = dn_of(i, j);
                let d = dy(&img[i], &img[j]);
                e = e.max((d - dn).abs());
                if dn > 0.0 {
                    l = l.max(d / dn);
                }
            }
            (e, l)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));

    let collapsed = img.iter().filter(|i| i.is_none()).count();
    let kept: Vec<(Point, f64)> = img.iter().flatten().copied().collect();
    let pts: Vec<Point> = kept.iter().map(|k| k.0).collect();
    let t_min = kept.iter().map(|k| k.1).fold(f64::INFINITY, f64::min);
    let exact = matches!(y.base(), ModelSpace::Sphere3 { .. } | ModelSpace::Euclid3);
    let index = (exact && !pts.is_empty()).then(|| PointIndex::new(&pts));
    let eps_cov = probes
        .par_iter()
        .filter(|p| !y.set.member(p))
        .map(|p| {
            let tp = y.set.dist_to_set(p);
            let mut c = if collapsed > 0 { tp } else { f64::INFINITY };
            if !pts.is_empty() {
                let near = match &index {
                    Some(ix) => ix.nearest(p, 1).into_iter().map(|i| y.base().distance(p, &pts[i])).fold(f64::INFINITY, f64::min),
                    None => pts.iter().map(|q| y.base().distance(p, q)).fold(f64::INFINITY, f64::min),
                };
                c = c.min(near).min(tp + t_min);
            }
            c
        })
        .reduce(|| 0.0, f64::max);
    Ok(DefectReport {
        eps_dis,
        eps_cov,
        gh_bound: 2.0 * eps_dis.max(eps_cov),
        lip,
        sample: sample.len(),
        collapsed,
        probes: probes.len(),
    })
}

/// Greedy maximal `sep`-separated subset of `count` uniform points of a round S³.
pub fn separated_sphere_sample(space: &ModelSpace, count: usize, sep: f64, seed: u64) -> Result<Vec<Point>> {
    let ModelSpace::Sphere3 { curvature } = space else {
        return Err(Error::Invalid("separated_sphere_sample needs a Sphere3 base".into()));
    };
    let pts = sample_sphere(*curvature, count, seed)?.coords();
    let keep = greedy_packing(space, &pts, sep);
    Ok(keep.into_iter().map(|i| pts[i]).collect())
}

/// Random points of T_width(A₀) (distance to A₀ uniform in volume up to
/// `width`), skipping removed balls.
pub fn tube_sample(n: &SewnSpace, count: usize, width: f64, seed: u64) -> Vec<Point> {
    let plan = n.plan();
    let anchors = n.region().dense_sample(4096);
    let model = ModelSpace::Sphere3 { curvature: plan.curvature };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 50 * count {
        tries += 1;
        let a = plan.lift(&anchors[rng.gen_range(0..anchors.len())]);
        let w = unit_vector3(&mut rng);
        let t = width * rng.gen::<f64>().cbrt();
        let q = model.exp(&a, &model.frame_at(&a), w, t);
        let p = plan.drop_to_base(&q);
        if plan.chart().is_some_and(|c| !c.covers(&p)) || !n.base().contains(&p) {
            continue;
        }
        if n.removed_ball(&p).is_none() {
            out.push(p);
        }
    }
    out
}

/// `count` distinct mouths drawn at random, always including the tunnel (0, 1).
pub fn mouth_sample(n: &SewnSpace, count: usize, seed: u64) -> Vec<SewnPoint> {
    let nb = n.plan().n_bar() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![SewnPoint::Mouth { k: 0, j: 1 }, SewnPoint::Mouth { k: 1, j: 0 }];
    let total = (nb as u64) * (nb as u64 - 1);
    while (out.len() as u64) < total.min(count as u64) {
        let k = rng.gen_range(0..nb);
        let mut j = rng.gen_range(0..nb - 1);
        if j >= k {
            j += 1;
        }
        let m = SewnPoint::Mouth { k, j };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out.truncate(count.max(2));
    out
}

/// Points of A_r′: base points of T_r(A₀) outside removed balls plus mouths.
pub fn edited_region_sample(n: &SewnSpace, count: usize, mouths: usize, seed: u64) -> Vec<SewnPoint> {
    let r = n.plan().r;
    let mut out: Vec<SewnPoint> = tube_sample(n, count, r, seed)
        .into_iter()
        .filter(|p| n.region().dist_to_set(p) < r)
        .map(SewnPoint::Base)
        .collect();
    out.extend(mouth_sample(n, mouths, seed ^ 0x9e37_79b9));
    out
}
