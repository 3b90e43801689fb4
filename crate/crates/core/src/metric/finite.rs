use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const TRIANGLE_TOL: f64 = 1e-9;

/// Dense symmetric distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    d: Vec<f64>,
}

impl FiniteMetric {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("finite metric: matrix is not square".into()));
        }
        Ok(FiniteMetric { n, d: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        FiniteMetric { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.d[i * self.n + j] = v;
    }

    /// Induced metric on a subset of indices.
    pub fn restrict(&self, idx: &[usize]) -> FiniteMetric {
        let n = idx.len();
        let mut d = vec![0.0; n * n];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                d[a * n + b] = self.get(i, j);
            }
        }
        FiniteMetric { n, d }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:e}", self.get(i, j))).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| Error::Invalid("finite metric: first line must be n".into()))?;
        let mut rows = Vec::with_capacity(n);
        for l in lines {
            let row: std::result::Result<Vec<f64>, _> = l.split(',').map(|x| x.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::Invalid(format!("finite metric: {e}")))?);
        }
        if rows.len() != n {
            return Err(Error::Invalid(format!("finite metric: expected {n} rows, got {}", rows.len())));
        }
        Self::from_rows(rows)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricIssue {
    Asymmetric { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    /// d(i,k) > d(i,j) + d(j,k) + tol
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
}

pub fn check_metric(m: &FiniteMetric) -> Vec<MetricIssue> {
    let n = m.len();
    let mut out = Vec::new();
    for i in 0..n {
        if m.get(i, i) != 0.0 {
            out.push(MetricIssue::NonzeroDiagonal { i });
        }
        for j in (i + 1)..n {
            if m.get(i, j) != m.get(j, i) {
                out.push(MetricIssue::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let excess = m.get(i, k) - m.get(i, j) - m.get(j, k);
                if excess > TRIANGLE_TOL {
                    out.push(MetricIssue::Triangle { i, j, k, excess });
                }
            }
        }
    }
    out
}

/// Exact Gromov–Hausdorff distance for spaces of at most 7 points.
///
/// The optimal distortion is one of the finitely many values |d_X − d_Y|; for
/// a candidate ε a correspondence of distortion ≤ ε is a clique in the
/// compatibility graph on X×Y whose projections are onto, so we search
/// maximal cliques (Bron–Kerbosch with pivoting, pruned by coverage) and
/// bisect over the sorted candidates.
pub fn gh_exact_small(x: &FiniteMetric, y: &FiniteMetric) -> Result<f64> {
    let (nx, ny) = (x.len(), y.len());
    if nx > 7 || ny > 7 {
        return Err(Error::Refused(format!("gh_exact_small needs at most 7 points per side, got {nx} and {ny}")));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::Invalid("gh_exact_small: empty space".into()));
    }
    let mut cands = vec![0.0];
    for a in 0..nx {
        for b in 0..nx {
            for c in 0..ny {
                for d in 0..ny {
                    cands.push((x.get(a, b) - y.get(c, d)).abs());
                }
            }
        }
    }
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    // the largest candidate is always feasible (the full relation X×Y)
    while lo < hi {
        let mid = (lo + hi) / 2;
        if correspondence_exists(x, y, cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(0.5 * cands[lo])
}

fn correspondence_exists(x: &FiniteMetric, y: &FiniteMetric, eps: f64) -> bool {
    let (nx, ny) = (x.len(), y.len());
    let nv = nx * ny;
    let mut adj = vec![0u64; nv];
    for v in 0..nv {
        let (a, c) = (v / ny, v % ny);
        for w in 0..nv {
            let (b, d) = (w / ny, w % ny);
            if v != w && (x.get(a, b) - y.get(c, d)).abs() <= eps {
                adj[v] |= 1 << w;
            }
        }
    }
    let xmask: Vec<u64> = (0..nx).map(|a| (0..ny).fold(0u64, |m, c| m | 1 << (a * ny + c))).collect();
    let ymask: Vec<u64> = (0..ny).map(|c| (0..nx).fold(0u64, |m, a| m | 1 << (a * ny + c))).collect();
    let covers = |s: u64| xmask.iter().all(|m| s & m != 0) && ymask.iter().all(|m| s & m != 0);
    let all = if nv == 64 { u64::MAX } else { (1u64 << nv) - 1 };

    fn bk(r: u64, mut p: u64, mut xs: u64, adj: &[u64], covers: &dyn Fn(u64) -> bool) -> bool {
        if !covers(r | p) {
            return false;
        }
        if p == 0 {
            // any covering clique is a correspondence, maximal or not
            let _ = xs;
            return covers(r);
        }
        let pivot = (p | xs).trailing_zeros() as usize;
        let mut cand = p & !adj[pivot];
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            if bk(r | 1 << v, p & adj[v], xs & adj[v], adj, covers) {
                return true;
            }
            p &= !(1 << v);
            xs |= 1 << v;
        }
        false
    }
    bk(0, all, 0, &adj, &covers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pts: &[f64]) -> FiniteMetric {
        FiniteMetric::from_fn(pts.len(), |i, j| (pts[i] - pts[j]).abs())
    }

    #[test]
    fn hand_cases() {
        let a = 2.5;
        assert!((gh_exact_small(&line(&[0.0]), &line(&[0.0, a])).unwrap() - a / 2.0).abs() < 1e-12);
        assert!((gh_exact_small(&line(&[0.0, 1.0]), &line(&[0.0, 2.0])).unwrap() - 0.5).abs() < 1e-12);
        let x = line(&[0.0, 1.0, 3.0, 7.0]);
        assert_eq!(gh_exact_small(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn refuses_large() {
        let x = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert!(matches!(gh_exact_small(&x, &line(&[0.0])), Err(Error::Refused(_))));
    }

    #[test]
    fn relabel_is_zero() {
        let x = line(&[0.0, 1.0, 3.5, 4.0, 9.0]);
        let y = x.restrict(&[3, 0, 4, 2, 1]);
        assert_eq!(gh_exact_small(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn equilateral_vs_point() {
        // every correspondence with a point has distortion = diameter
        let x = FiniteMetric::from_fn(3, |_, _| 1.0);
        assert!((gh_exact_small(&x, &line(&[0.0])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn metric_checks() {
        let ok = line(&[0.0, 1.0, 2.5]);
        assert!(check_metric(&ok).is_empty());
        let asym = FiniteMetric::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(check_metric(&asym), vec![MetricIssue::Asymmetric { i: 0, j: 1 }]);
        let tri = FiniteMetric::from_fn(3, |i, j| if (i, j) == (0, 2) { 10.0 } else { 1.0 });
        let issues = check_metric(&tri);
        assert_eq!(issues.len(), 1);
        assert!(matches!(issues[0], MetricIssue::Triangle { i: 0, j: 1, k: 2, .. }));
    }

    #[test]
    fn csv_round_trip() {
        let m = line(&[0.0, 0.3, 1.7]);
        assert_eq!(FiniteMetric::from_csv(&m.to_csv()).unwrap(), m);
    }
}
