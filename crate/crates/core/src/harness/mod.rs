//! Experiment orchestration: Method I and Method II convergence sequences,
//! biLipschitz distortion of radial matchings and CSV reports.

mod bilip;
mod cli;
mod config;
mod method1;
mod method2;
mod report;

pub use bilip::{bilip_distortion, flat_graph, BiLipschitz};
pub use config::Config;
pub use method1::{run_method1, Method1Config, Method1Region};
pub use method2::{anchor_radii, bcc_lattice, run_method2, stripe_level, AnchorRadii, Method2Config, Method2Region, StripeLevel};
pub use report::{parse_report, ConvergenceReport, ConvergenceRow, REPORT_HEADER};
pub use cli::{run_command, Command};
