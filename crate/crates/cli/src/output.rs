//! Diagnostics CSV and per-quantity plot data.
//!
//! Numbers are written with `{:e}`, which prints the shortest string that
//! parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use tcm_core::diagnostics::DiagnosticsRecord;

use crate::error::CliError;

pub const COLUMNS: [&str; 26] = [
    "time",
    "E",
    "D_cum",
    "energy_residual",
    "l2_u",
    "l2_v",
    "l2_theta",
    "gradh_u",
    "lambda_alpha_v",
    "grad_theta",
    "lbeta1_u",
    "d3_u",
    "grad_u",
    "grad_v",
    "lap_theta",
    "lap_u",
    "lap_v",
    "lambda_s_u",
    "lambda_s_v",
    "lambda_s_theta",
    "damping_alias_defect",
    "cancel_a",
    "cancel_b",
    "cancel_c",
    "cancel_d",
    "cancel_e",
];

pub fn row_values(r: &DiagnosticsRecord) -> [f64; 26] {
    let [ca, cb, cc, cd, ce] = r.cancellations;
    [
        r.time,
        r.energy,
        r.dissipation_budget,
        r.energy_residual,
        r.l2_u,
        r.l2_v,
        r.l2_theta,
        r.gradh_u,
        r.lambda_alpha_v,
        r.grad_theta,
        r.lbeta1_u,
        r.d3_u,
        r.grad_u,
        r.grad_v,
        r.lap_theta,
        r.lap_u,
        r.lap_v,
        r.lambda_s_u,
        r.lambda_s_v,
        r.lambda_s_theta,
        r.damping_alias_defect,
        ca,
        cb,
        cc,
        cd,
        ce,
    ]
}

pub fn header() -> String {
    COLUMNS.join(",")
}

pub fn csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = header();
    s.push('\n');
    for r in records {
        let cells: Vec<String> = row_values(r).iter().map(|x| format!("{x:e}")).collect();
        s += &cells.join(",");
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// One `time value` file per column under `dir`.
pub fn write_plot_data(dir: &Path, records: &[DiagnosticsRecord]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let rows: Vec<[f64; 26]> = records.iter().map(row_values).collect();
    for (j, name) in COLUMNS.iter().enumerate().skip(1) {
        let mut s = format!("# time {name}\n");
        for row in &rows {
            writeln!(s, "{:e} {:e}", row[0], row[j]).expect("write to string");
        }
        write_file(&dir.join(format!("{name}.dat")), &s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_column_list() {
        assert_eq!(
            header(),
            "time,E,D_cum,energy_residual,l2_u,l2_v,l2_theta,gradh_u,lambda_alpha_v,grad_theta,lbeta1_u,\
             d3_u,grad_u,grad_v,lap_theta,lap_u,lap_v,lambda_s_u,lambda_s_v,lambda_s_theta,\
             damping_alias_defect,cancel_a,cancel_b,cancel_c,cancel_d,cancel_e"
        );
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0, f64::MIN_POSITIVE] {
            let s = format!("{x:e}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
