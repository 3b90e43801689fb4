use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// One level j of a convergence sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub j: usize,
    pub r: f64,
    pub delta: f64,
    pub h: f64,
    pub eps_dis: f64,
    pub eps_cov: f64,
    pub gh_bound: f64,
    pub vol_n: f64,
    pub vol_limit: f64,
    /// log Lip(ψ) + log Lip(ψ⁻¹) (Method II only).
    pub lip_sum: Option<f64>,
    /// max(log Lip(ψ), log Lip(ψ⁻¹)) (Method II only).
    pub lip_sym: Option<f64>,
    pub n_bar: usize,
    pub sample: usize,
}

pub const REPORT_HEADER: &str = "j,r,delta,h,eps_dis,eps_cov,gh_bound,vol_N,vol_limit,L,D,n_bar,sample";

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

impl ConvergenceRow {
    fn csv(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{}",
            self.j,
            self.r,
            self.delta,
            self.h,
            self.eps_dis,
            self.eps_cov,
            self.gh_bound,
            self.vol_n,
            self.vol_limit,
            opt(self.lip_sum),
            opt(self.lip_sym),
            self.n_bar,
            self.sample
        )
    }
}

/// Rows ordered by j plus the stage CSVs produced along the way.
#[derive(Clone, Debug, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// (file name, contents) of every per-stage CSV.
    pub stages: Vec<(String, String)>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{REPORT_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.csv());
        }
        s
    }

    pub fn stage(&self, name: &str) -> Option<&str> {
        self.stages.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn gh_bounds(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gh_bound).collect()
    }

    /// Write `report.csv` and every stage CSV into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.to_csv())?;
        for (name, body) in &self.stages {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

/// Parse a `report.csv` back into rows (floats round-trip exactly).
pub fn parse_report(text: &str) -> Result<Vec<ConvergenceRow>> {
    use crate::error::Error;
    let bad = |l: &str| Error::Invalid(format!("malformed report row: {l}"));
    let mut rows = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(bad(line));
        }
        let x = |i: usize| f[i].parse::<f64>().map_err(|_| bad(line));
        let o = |i: usize| if f[i].is_empty() { Ok(None) } else { x(i).map(Some) };
        let u = |i: usize| f[i].parse::<usize>().map_err(|_| bad(line));
        rows.push(ConvergenceRow {
            j: u(0)?,
            r: x(1)?,
            delta: x(2)?,
            h: x(3)?,
            eps_dis: x(4)?,
            eps_cov: x(5)?,
            gh_bound: x(6)?,
            vol_n: x(7)?,
            vol_limit: x(8)?,
            lip_sum: o(9)?,
            lip_sym: o(10)?,
            n_bar: u(11)?,
            sample: u(12)?,
        });
    }
    Ok(rows)
}
