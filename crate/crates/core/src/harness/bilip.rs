use crate::error::{domain, Result};
use crate::rotsym::GraphProfile;

/// Lipschitz data of the radial matching ψ: (r, ω) ↦ (r, ω) between two
/// graph manifolds. Both metrics share the angular part r²g₀, so only the
/// radial coefficients √(1+z′²) differ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiLipschitz {
    pub lip: f64,
    pub lip_inv: f64,
    /// log Lip + log Lip⁻¹.
    pub l: f64,
    /// max(log Lip, log Lip⁻¹).
    pub d: f64,
}

fn radial_factor(g: &GraphProfile, r: f64) -> f64 {
    let zp = crate::rotsym::interp_linear(&g.grid, &g.zp, r);
    (1.0 + zp * zp).sqrt()
}

fn covers(g: &GraphProfile, w: (f64, f64)) -> bool {
    let tol = 1e-12 * w.1.abs().max(1.0);
    g.grid[0] <= w.0 + tol && *g.grid.last().unwrap() >= w.1 - tol
}

pub fn bilip_distortion(gj: &GraphProfile, ginf: &GraphProfile, window: (f64, f64)) -> Result<BiLipschitz> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return domain(format!("empty window [{lo}, {hi}]"));
    }
    if !covers(gj, window) || !covers(ginf, window) {
        return domain(format!("window [{lo}, {hi}] is not covered by both profiles"));
    }
    let mut rs: Vec<f64> = gj.grid.iter().chain(&ginf.grid).copied().filter(|r| *r >= lo && *r <= hi).collect();
    rs.push(lo);
    rs.push(hi);
    let (mut up, mut down) = (1.0f64, 1.0f64);
    for r in rs {
        let q = radial_factor(gj, r) / radial_factor(ginf, r);
        if q.is_nan() || q == 0.0 || q.is_infinite() {
            return domain(format!("radial factors are singular at r = {r}"));
        }
        up = up.max(q);
        down = down.max(1.0 / q);
    }
    let (a, b) = (up.ln(), down.ln());
    Ok(BiLipschitz { lip: up, lip_inv: down, l: a + b, d: a.max(b) })
}

/// Graph of Euclidean space (z ≡ 0) on a uniform grid over `window`.
pub fn flat_graph(window: (f64, f64), n: usize) -> GraphProfile {
    let n = n.max(2);
    let grid: Vec<f64> =
        (0..n).map(|i| window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64).collect();
    GraphProfile { z: vec![0.0; n], zp: vec![0.0; n], grid }
}
