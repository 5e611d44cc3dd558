use std::io::Write;
use std::path::Path;

use super::{ConvergenceStudy, ExperimentError, SweepResult};
use crate::Scalar;

const SIGNIFICANT: i32 = 12;

/// `%.12g`-style formatting; negative zero prints as `0`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // exponent after rounding to the target precision
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let fixed = format!("{:.*}", (SIGNIFICANT - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn num<T: Scalar>(x: T) -> String {
    format_number(x.as_f64())
}

pub fn write_sweep_csv<T: Scalar, W: Write>(result: &SweepResult<T>, out: W) -> Result<(), ExperimentError> {
    if result.records.is_empty() {
        return Err(ExperimentError::EmptyResult);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "g1", "g2", "theta", "s", "contact", "energy"])?;
    for r in &result.records {
        w.write_record([
            num(r.k),
            num(r.g1),
            num(r.g2),
            num(r.theta),
            num(r.s),
            r.contact.to_string(),
            num(r.energy),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv<T: Scalar, W: Write>(
    study: &ConvergenceStudy<T>,
    out: W,
) -> Result<(), ExperimentError> {
    if study.records.is_empty() {
        return Err(ExperimentError::EmptyResult);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "lambda", "theta", "g1", "g2", "error_vnorm"])?;
    for r in &study.records {
        w.write_record([
            r.n.to_string(),
            num(r.lambda),
            num(r.theta),
            num(r.g1),
            num(r.g2),
            num(r.error_vnorm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the sweep table; nothing is created for an empty result.
pub fn export_sweep_csv<T: Scalar>(result: &SweepResult<T>, path: &Path) -> Result<(), ExperimentError> {
    let mut buf = Vec::new();
    write_sweep_csv(result, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Writes the convergence table; nothing is created for an empty study.
pub fn export_convergence_csv<T: Scalar>(study: &ConvergenceStudy<T>, path: &Path) -> Result<(), ExperimentError> {
    let mut buf = Vec::new();
    write_convergence_csv(study, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Monotonicity, SweepRecord, SweepTarget};
    use crate::model::{BodyForce, ConstraintVariant};

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.875), "0.875");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-0.0625), "-0.0625");
        assert_eq!(format_number(1.25e-5), "1.25e-05");
        assert_eq!(format_number(0.0001), "0.0001");
        assert_eq!(format_number(123456789012.0), "123456789012");
        assert_eq!(format_number(1234567890123.0), "1.23456789012e+12");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(9.9999999999999e-1), "1");
    }

    fn result(n: usize) -> SweepResult<f64> {
        SweepResult {
            forces: BodyForce::new(1.0, -1.0).unwrap(),
            variant: ConstraintVariant::NonPenetration,
            target: SweepTarget::K1,
            records: (0..n)
                .map(|i| SweepRecord {
                    k: 0.1 * (i + 1) as f64,
                    g1: 0.5,
                    g2: -0.5,
                    theta: 0.0,
                    s: -0.5,
                    contact: true,
                    energy: 1.0,
                })
                .collect(),
            failures: vec![],
            monotonicity: Monotonicity {
                abs_g1_decreasing: false,
                abs_g2_decreasing: false,
                abs_s_increasing: false,
            },
        }
    }

    #[test]
    fn sweep_table() {
        let mut buf = Vec::new();
        write_sweep_csv(&result(3), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "k,g1,g2,theta,s,contact,energy");
        assert_eq!(lines[1], "0.1,0.5,-0.5,0,-0.5,true,1");
    }

    #[test]
    fn empty_result_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        assert!(matches!(export_sweep_csv(&result(0), &path), Err(ExperimentError::EmptyResult)));
        assert!(!path.exists());
    }
}
