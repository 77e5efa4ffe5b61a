//! Rate curves of the symmetric line network over a log-spaced gain grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::line::{line_fixed_power, line_waterfill, LineNetworkGains};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub c_fixed_i: f64,
    pub c_fixed_ii: f64,
    pub c_wf_i: f64,
    pub c_wf_ii: f64,
    pub active_states_i: usize,
}

pub const CSV_HEADER: &str = "gamma,c_fixed_i,c_fixed_ii,c_wf_i,c_wf_ii,active_states_i";

pub fn sweep_line(gamma_min: f64, gamma_max: f64, points: usize) -> Result<Vec<SweepRow>> {
    if !(gamma_min > 0.0 && gamma_max >= gamma_min && gamma_max.is_finite()) {
        return Err(Error::InvalidInput(format!("bad gain range [{gamma_min}, {gamma_max}]")));
    }
    if points == 0 || (points == 1 && gamma_max != gamma_min) {
        return Err(Error::InvalidInput("sweep needs at least two points for a range".into()));
    }
    let (a, b) = (gamma_min.ln(), gamma_max.ln());
    (0..points)
        .into_par_iter()
        .map(|k| {
            let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
            let gamma = (a + t * (b - a)).exp();
            let g = LineNetworkGains::symmetric(gamma);
            let fixed = line_fixed_power(&g)?;
            let wf = line_waterfill(&g, 200)?;
            Ok(SweepRow {
                gamma,
                c_fixed_i: fixed.c_case_i,
                c_fixed_ii: fixed.c_case_ii,
                c_wf_i: wf.c_wf_case_i,
                c_wf_ii: wf.c_wf_case_ii,
                active_states_i: fixed.schedule_i.support().len(),
            })
        })
        .collect()
}

/// Decimal with ten significant digits.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.9}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (9 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig10(r.gamma),
            sig10(r.c_fixed_i),
            sig10(r.c_fixed_ii),
            sig10(r.c_wf_i),
            sig10(r.c_wf_ii),
            r.active_states_i
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig10(1.0), "1.000000000");
        assert_eq!(sig10(0.0123456789012), "0.01234567890");
        assert_eq!(sig10(123.456), "123.4560000");
        assert_eq!(sig10(0.0), "0.000000000");
    }

    #[test]
    fn grid_endpoints_and_header() {
        let rows = sweep_line(0.1, 10.0, 3).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0].gamma - 0.1).abs() < 1e-12);
        assert!((rows[1].gamma - 1.0).abs() < 1e-12);
        assert!((rows[2].gamma - 10.0).abs() < 1e-10);
        let csv = to_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
        for r in &rows {
            assert!(r.c_fixed_i >= r.c_fixed_ii - 1e-9);
            assert!(r.c_wf_i >= r.c_wf_ii - 1e-9);
        }
    }

    #[test]
    fn rejects_bad_range() {
        assert!(sweep_line(0.0, 1.0, 5).is_err());
        assert!(sweep_line(2.0, 1.0, 5).is_err());
    }
}
