use std::collections::HashMap;

use super::Point;

/// Uniform grid bucketing of ambient coordinates for fixed-radius neighbour
/// queries. Radius queries must not exceed the cell size.
#[derive(Clone, Debug)]
pub struct SpatialHash {
    cell: f64,
    dims: usize,
    buckets: HashMap<[i64; 4], Vec<u32>>,
}

impl SpatialHash {
    pub fn new(cell: f64, dims: usize) -> Self {
        assert!(cell > 0.0 && (1..=4).contains(&dims));
        SpatialHash { cell, dims, buckets: HashMap::new() }
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    fn key(&self, p: &Point) -> [i64; 4] {
        let mut k = [0i64; 4];
        for i in 0..self.dims {
            k[i] = (p[i] / self.cell).floor() as i64;
        }
        k
    }

    pub fn insert(&mut self, idx: usize, p: &Point) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(idx as u32);
    }

    /// Calls `f` with every stored index in the cells adjacent to `p`; the
    /// caller filters by exact distance. Returning `false` stops the scan.
    pub fn visit_near(&self, p: &Point, mut f: impl FnMut(usize) -> bool) {
        let k = self.key(p);
        let span = |i: usize| if i < self.dims { -1..=1 } else { 0..=0 };
        for a in span(0) {
            for b in span(1) {
                for c in span(2) {
                    for d in span(3) {
                        let kk = [k[0] + a, k[1] + b, k[2] + c, k[3] + d];
                        if let Some(v) = self.buckets.get(&kk) {
                            for &i in v {
                                if !f(i as usize) {
                                    return;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
