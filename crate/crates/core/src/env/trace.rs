//! Per-slot episode traces as CSV.

use std::io::Write;

use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow<T> {
    pub step: usize,
    pub x_uav: T,
    pub y_uav: T,
    pub alloc_encoded: u64,
    pub r_ch: T,
    pub r_traj: T,
    pub collected_total: T,
    pub u_res: Vec<T>,
}

/// Writes `step, x_uav, y_uav, alloc_encoded, r_ch, r_traj, collected_total,
/// u_res_0..u_res_{N-1}`.
pub fn write_trace<T: Scalar, W: Write>(out: W, n_mdcs: usize, rows: &[TraceRow<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["step", "x_uav", "y_uav", "alloc_encoded", "r_ch", "r_traj", "collected_total"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..n_mdcs).map(|n| format!("u_res_{n}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.step.to_string(),
            r.x_uav.to_string(),
            r.y_uav.to_string(),
            r.alloc_encoded.to_string(),
            r.r_ch.to_string(),
            r.r_traj.to_string(),
            r.collected_total.to_string(),
        ];
        rec.extend(r.u_res.iter().map(|u| u.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
