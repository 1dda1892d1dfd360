//! CSV renderings of sweep and experiment results. Floats use Rust's
//! shortest round-trip formatting, so every value parses back to the exact
//! library output.

use crate::montecarlo::RmseReport;
use crate::sweep::LossRow;
use std::fmt::Write;

pub const LOSS_HEADER: &str = "variable,K,theta_deg,snr_db,fisher_y,fisher_lb,chi_db";
pub const RMSE_HEADER: &str = "snr_db,rmse_deg,pcrlb_root_deg,ratio,failed_runs";

pub fn loss_csv(rows: &[LossRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(LOSS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.variable.name(),
            r.k,
            r.theta_deg,
            r.snr_db,
            r.fisher_y,
            r.fisher_lb,
            r.chi_db
        );
    }
    out
}

pub fn rmse_csv(report: &RmseReport) -> String {
    let mut out = String::new();
    out.push_str(RMSE_HEADER);
    out.push('\n');
    for p in &report.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.snr_db, p.rmse_deg, p.pcrlb_root_deg, p.ratio, p.failed_runs
        );
    }
    out
}
