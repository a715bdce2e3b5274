//! The diagnostics CSV: fixed column order, 17 significant digits, so a
//! repeated run with the same config is byte-identical.

use l2flow_core::flow::DiagnosticsRecord;
use l2flow_core::geometry::EnergyReport;

use crate::config::ConfigError;

pub const HEADER: &str = "t,vol,F,E,calabi,total_curvature,dissipation,max_abs_s,dt_used";

/// 17 significant digits (16 after the point in scientific notation).
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(r: &DiagnosticsRecord) -> String {
    [
        r.t,
        r.vol,
        r.f,
        r.e,
        r.calabi,
        r.total_curvature,
        r.dissipation,
        r.max_abs_s,
        r.dt_used,
    ]
    .map(fmt)
    .join(",")
}

/// Check the EnergyReport invariants for a record about to be written.
pub fn validate_record(r: &DiagnosticsRecord) -> Result<(), ConfigError> {
    let rep = EnergyReport {
        f: r.f,
        e: r.e,
        calabi: r.calabi,
        vol: r.vol,
        total_curvature: r.total_curvature,
        s_bar: r.total_curvature / r.vol,
        max_abs_s: r.max_abs_s,
    };
    rep.validate()
        .map_err(|e| ConfigError(format!("record at t = {} violates invariants: {e}", r.t)))?;
    if r.dissipation < 0.0 {
        return Err(ConfigError(format!(
            "record at t = {}: negative dissipation",
            r.t
        )));
    }
    Ok(())
}

pub fn series_csv(records: &[DiagnosticsRecord]) -> Result<String, ConfigError> {
    let mut out = String::with_capacity(records.len() * 200 + HEADER.len() + 1);
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        validate_record(r)?;
        out.push_str(&row(r));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec() -> DiagnosticsRecord {
        DiagnosticsRecord {
            t: 0.5,
            vol: 4.0 * std::f64::consts::PI,
            f: 16.0 * std::f64::consts::PI,
            e: 64.0 * std::f64::consts::PI * std::f64::consts::PI,
            calabi: 0.0,
            total_curvature: 8.0 * std::f64::consts::PI,
            dissipation: 8.0 * std::f64::consts::PI,
            max_abs_s: 2.0,
            dt_used: 1e-4,
        }
    }

    #[test]
    fn header_and_digit_count() {
        let text = series_csv(&[rec()]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER);
        let first = lines.next().unwrap();
        let v: Vec<&str> = first.split(',').collect();
        assert_eq!(v.len(), 9);
        // 16 digits after the decimal point in each mantissa
        for field in v {
            let mantissa = field.split('e').next().unwrap();
            let frac = mantissa.split('.').nth(1).unwrap();
            assert_eq!(frac.len(), 16, "field {field}");
        }
    }

    #[test]
    fn invariant_violations_are_refused() {
        let mut bad = rec();
        bad.vol = -1.0;
        assert!(series_csv(&[bad]).is_err());
        let mut bad = rec();
        bad.dissipation = -0.5;
        assert!(series_csv(&[bad]).is_err());
    }
}
