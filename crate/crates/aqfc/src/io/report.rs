//! CSV reports, ground-truth persistence and the quadric debug dump.

use super::IoError;
use crate::benchmark::{ErrorReport, GroundTruth};
use crate::curvature::{CurvatureResult, ResultFlags};
use crate::fit::Quadric;

/// A scored benchmark row: mesh name, method name, deviation report.
#[derive(Debug, Clone)]
pub struct NamedReport {
    pub name: String,
    pub method: String,
    pub report: ErrorReport,
}

/// Format with 6 significant digits, plain notation (`0.00651111`, `1234.57`).
pub fn format_significant(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return if value.is_nan() {
            "NaN".to_string()
        } else if value > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 17) as usize;
    format!("{value:.decimals$}")
}

/// CSV with header `name,method,h_min,h_max,h_avg,k_min,k_max,k_avg,n_failed`
/// and one row per report, in input order; reals carry 6 significant digits.
pub fn write_csv_report(reports: &[NamedReport]) -> Vec<u8> {
    let mut out = String::from("name,method,h_min,h_max,h_avg,k_min,k_max,k_avg,n_failed\n");
    for entry in reports {
        let r = &entry.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            entry.name,
            entry.method,
            format_significant(r.h_min),
            format_significant(r.h_max),
            format_significant(r.h_avg),
            format_significant(r.k_min),
            format_significant(r.k_max),
            format_significant(r.k_avg),
            r.n_failed,
        ));
    }
    out.into_bytes()
}

/// Summary of raw estimates for meshes without ground truth: min/max/mean of
/// the raw per-vertex H and K plus the failure count.
pub fn write_estimate_summary(
    name: &str,
    method: &str,
    results: &[CurvatureResult],
) -> Vec<u8> {
    let mut out = String::from("name,method,h_min,h_max,h_mean,k_min,k_max,k_mean,n_failed\n");
    let mut n_failed = 0usize;
    let mut count = 0usize;
    let (mut h_min, mut h_max, mut h_sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    let (mut k_min, mut k_max, mut k_sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for r in results {
        if r.flags.fit_failed {
            n_failed += 1;
            continue;
        }
        count += 1;
        h_min = h_min.min(r.mean);
        h_max = h_max.max(r.mean);
        h_sum += r.mean;
        k_min = k_min.min(r.gaussian);
        k_max = k_max.max(r.gaussian);
        k_sum += r.gaussian;
    }
    let (h_mean, k_mean) = if count > 0 {
        (h_sum / count as f64, k_sum / count as f64)
    } else {
        (f64::NAN, f64::NAN)
    };
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{}\n",
        name,
        method,
        format_significant(h_min),
        format_significant(h_max),
        format_significant(h_mean),
        format_significant(k_min),
        format_significant(k_max),
        format_significant(k_mean),
        n_failed,
    ));
    out.into_bytes()
}

/// Persist per-vertex ground truth as CSV: `vertex,theta,phi,h,k` with
/// full-roundtrip float formatting.
pub fn write_ground_truth_csv(truth: &GroundTruth) -> Vec<u8> {
    let mut out = String::from("vertex,theta,phi,h,k\n");
    for (i, &(theta, phi)) in truth.params.iter().enumerate() {
        out.push_str(&format!(
            "{i},{theta},{phi},{},{}\n",
            truth.mean[i], truth.gaussian[i]
        ));
    }
    out.into_bytes()
}

/// Read ground truth back from [`write_ground_truth_csv`] output.
pub fn read_ground_truth_csv(bytes: &[u8]) -> Result<GroundTruth, IoError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IoError::Parse {
        line: 0,
        message: format!("not valid UTF-8: {e}"),
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "vertex,theta,phi,h,k")) => {}
        _ => {
            return Err(IoError::Parse {
                line: 1,
                message: "missing ground-truth header".into(),
            })
        }
    }
    let mut truth = GroundTruth {
        mean: Vec::new(),
        gaussian: Vec::new(),
        params: Vec::new(),
    };
    for (line_no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(IoError::Parse {
                line: line_no + 1,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| IoError::Parse {
                line: line_no + 1,
                message: format!("`{s}` is not a number"),
            })
        };
        truth.params.push((parse(fields[1])?, parse(fields[2])?));
        truth.mean.push(parse(fields[3])?);
        truth.gaussian.push(parse(fields[4])?);
    }
    Ok(truth)
}

/// Plain-text dump of fitted quadrics, one line per vertex:
/// `vertex_index a11 a22 a33 a12 a13 a23 a14 a24 a34 a44 flags`.
///
/// Vertices without a fit carry `nan` coefficients.
pub fn write_quadric_dump(fits: &[(Option<Quadric>, ResultFlags)]) -> Vec<u8> {
    let mut out = String::new();
    for (i, (quadric, flags)) in fits.iter().enumerate() {
        out.push_str(&i.to_string());
        match quadric {
            Some(q) => {
                for c in q.coefficients() {
                    out.push(' ');
                    if c.is_nan() {
                        out.push_str("nan");
                    } else {
                        out.push_str(&c.to_string());
                    }
                }
            }
            None => {
                for _ in 0..10 {
                    out.push_str(" nan");
                }
            }
        }
        out.push(' ');
        out.push_str(&flags.to_string());
        out.push('\n');
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(h_avg: f64) -> ErrorReport {
        ErrorReport {
            h_min: -0.65,
            h_max: -0.25,
            h_avg,
            k_min: -0.5,
            k_max: 0.25,
            k_avg: 0.0,
            n_failed: 0,
        }
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_significant(0.00651111), "0.00651111");
        assert_eq!(format_significant(1234.5678), "1234.57");
        assert_eq!(format_significant(-0.503117), "-0.503117");
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(3232.91), "3232.91");
        assert_eq!(format_significant(1.0), "1.00000");
    }

    #[test]
    fn csv_header_only_when_empty() {
        let bytes = write_csv_report(&[]);
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "name,method,h_min,h_max,h_avg,k_min,k_max,k_avg,n_failed\n"
        );
    }

    #[test]
    fn csv_rows_in_input_order() {
        let rows = vec![
            NamedReport {
                name: "torus".into(),
                method: "aqfc".into(),
                report: report(0.00651111),
            },
            NamedReport {
                name: "torus".into(),
                method: "ddgo".into(),
                report: report(0.0874593),
            },
        ];
        let text = String::from_utf8(write_csv_report(&rows)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("torus,aqfc,"));
        assert!(lines[1].contains("0.00651111"));
        assert!(lines[2].starts_with("torus,ddgo,"));
    }

    #[test]
    fn ground_truth_round_trip() {
        let truth = GroundTruth {
            mean: vec![-0.625, -0.25],
            gaussian: vec![0.25, -0.5],
            params: vec![(0.0, 0.0), (std::f64::consts::PI, 1.5)],
        };
        let bytes = write_ground_truth_csv(&truth);
        let back = read_ground_truth_csv(&bytes).unwrap();
        assert_eq!(back.mean, truth.mean);
        assert_eq!(back.gaussian, truth.gaussian);
        assert_eq!(back.params, truth.params);
    }

    #[test]
    fn quadric_dump_lines() {
        let q = Quadric::new([0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5]);
        let failed = ResultFlags {
            fit_failed: true,
            ..ResultFlags::default()
        };
        let bytes = write_quadric_dump(&[
            (Some(q), ResultFlags::default()),
            (None, failed),
        ]);
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "0 0.5 0.5 0.5 0 0 0 0 0 0 -0.5 -");
        assert_eq!(lines[1], "1 nan nan nan nan nan nan nan nan nan nan fit_failed");
    }

    proptest! {
        /// Formatting keeps at least 6 significant digits of accuracy.
        #[test]
        fn significant_digits_parse_back(value in -1e9f64..1e9) {
            let formatted = format_significant(value);
            let parsed: f64 = formatted.parse().unwrap();
            let tol = 5e-6 * value.abs().max(1e-300);
            prop_assert!((parsed - value).abs() <= tol.max(5e-7),
                "{value} -> {formatted} -> {parsed}");
        }
    }
}
