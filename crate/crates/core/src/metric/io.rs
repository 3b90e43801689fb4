use std::fmt::Write as _;
use std::path::Path;

use super::Point;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CloudPoint {
    pub id: u64,
    pub coords: Point,
    pub labels: Vec<String>,
}

/// Labelled points; `dim` is 3 (Euclid3/RotSym) or 4 (Sphere3).
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    points: Vec<CloudPoint>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        PointCloud { dim, points: Vec::new() }
    }

    pub fn push(&mut self, id: u64, coords: Point, labels: Vec<String>) {
        self.points.push(CloudPoint { id, coords, labels });
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CloudPoint> {
        self.points.iter()
    }

    pub fn coords(&self) -> Vec<Point> {
        self.points.iter().map(|p| p.coords).collect()
    }

    pub fn ids_unique(&self) -> bool {
        let mut ids: Vec<u64> = self.points.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        ids.windows(2).all(|w| w[0] != w[1])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,x0,x1,x2,x3,labels\n");
        for p in &self.points {
            let x3 = if self.dim == 4 { format!("{:e}", p.coords[3]) } else { String::new() };
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{},{}",
                p.id,
                p.coords[0],
                p.coords[1],
                p.coords[2],
                x3,
                p.labels.join("|")
            );
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "id,x0,x1,x2,x3,labels" => {}
            _ => return Err(Error::Invalid("point cloud: bad header".into())),
        }
        let mut cloud = PointCloud::new(3);
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Invalid(format!("point cloud line {}: expected 6 fields", ln + 2)));
            }
            let num = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| Error::Invalid(format!("line {}: {e}", ln + 2)))
            };
            let id = f[0].trim().parse::<u64>().map_err(|e| Error::Invalid(format!("line {}: {e}", ln + 2)))?;
            let x3 = if f[4].trim().is_empty() { 0.0 } else { cloud.dim = 4; num(f[4])? };
            let labels = if f[5].is_empty() { Vec::new() } else { f[5].split('|').map(String::from).collect() };
            cloud.push(id, [num(f[1])?, num(f[2])?, num(f[3])?, x3], labels);
        }
        if !cloud.ids_unique() {
            return Err(Error::Invalid("point cloud: duplicate ids".into()));
        }
        Ok(cloud)
    }
}

pub fn write_point_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    std::fs::write(path, cloud.to_csv())?;
    Ok(())
}

pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    PointCloud::from_csv(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = PointCloud::new(4);
        c.push(0, [1.0, 0.0, 0.0, 0.0], vec!["A0".into(), "tube".into()]);
        c.push(7, [0.1, 0.2, 0.3, -0.9273618495495703], vec![]);
        let back = PointCloud::from_csv(&c.to_csv()).unwrap();
        assert_eq!(back, c);
        let mut e = PointCloud::new(3);
        e.push(1, [1.5, -2.0, 0.25, 0.0], vec![]);
        assert_eq!(PointCloud::from_csv(&e.to_csv()).unwrap(), e);
    }

    #[test]
    fn rejects_duplicates() {
        let t = "id,x0,x1,x2,x3,labels\n1,0,0,0,,\n1,1,0,0,,\n";
        assert!(PointCloud::from_csv(t).is_err());
    }
}
