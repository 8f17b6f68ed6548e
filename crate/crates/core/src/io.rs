//! Curve persistence (CSV) and static SVG plots.
//!
//! CSV layout: header `c,sigma,n,separable,stderr`, one row per bin, reals
//! printed in plain decimal with 17 significant digits, LF line endings.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::estimator::{CurveBin, SeparabilityCurve};

pub const CSV_HEADER: &str = "c,sigma,n,separable,stderr";

/// Plain (non-exponent) decimal with 17 significant digits; parses back to the same `f64`.
pub fn format_decimal17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0000000000000000".into() } else { "0.0000000000000000".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let point = exp as usize + 1;
        if point >= digits.len() {
            format!("{}{}.0", digits, "0".repeat(point - digits.len()))
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    };
    format!("{sign}{body}")
}

pub fn write_curve_csv<W: Write>(curve: &SeparabilityCurve, mut out: W) -> Result<()> {
    let mut text = String::with_capacity(80 * (curve.bins.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for b in &curve.bins {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            format_decimal17(b.c_mid),
            format_decimal17(b.sigma_hat),
            b.n_trials,
            b.n_separable,
            format_decimal17(b.stderr)
        );
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Error::Io(format!("cannot write curve: {e}")))
}

pub fn curve_to_csv_string(curve: &SeparabilityCurve) -> String {
    let mut buf = Vec::new();
    write_curve_csv(curve, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads a curve CSV. Values are taken as written, so a written curve reads
/// back bit-exactly.
pub fn read_curve_csv<R: Read>(input: R) -> Result<SeparabilityCurve> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| Error::Format(format!("cannot read CSV header: {e}")))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(Error::Format(format!("expected header '{CSV_HEADER}', found '{header}'")));
    }
    let mut bins = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        if record.len() != 5 {
            return Err(Error::Format(format!("line {line}: expected 5 fields, found {}", record.len())));
        }
        let real = |k: usize| -> Result<f64> {
            record[k]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("line {line}: '{}' is not a number", &record[k])))
        };
        let count = |k: usize| -> Result<u64> {
            record[k]
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Format(format!("line {line}: '{}' is not a count", &record[k])))
        };
        let bin = CurveBin {
            c_mid: real(0)?,
            sigma_hat: real(1)?,
            n_trials: count(2)?,
            n_separable: count(3)?,
            stderr: real(4)?,
        };
        if bin.n_trials == 0 || bin.n_separable > bin.n_trials || !(bin.stderr >= 0.0) {
            return Err(Error::Format(format!("line {line}: inconsistent bin {bin:?}")));
        }
        bins.push(bin);
    }
    SeparabilityCurve::from_bins(bins).map_err(|e| Error::Format(e.to_string()))
}

/// One curve of a plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub curve: &'a SeparabilityCurve,
    pub color: &'a str,
}

/// Line chart of σ̂ against C on the unit square.
pub fn render_svg(title: &str, series: &[Series<'_>]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;
    let px = |c: f64| LEFT + c * (W - LEFT - RIGHT);
    let py = |s: f64| H - BOTTOM - s * (H - TOP - BOTTOM);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{y1:.1}" stroke="#ddd"/><text x="{x:.1}" y="{ty:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{t:.1}</text>"##,
            x = px(t),
            y0 = py(0.0),
            y1 = py(1.0),
            ty = py(0.0) + 16.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{tx:.1}" y="{ty:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{t:.1}</text>"##,
            x0 = px(0.0),
            x1 = px(1.0),
            y = py(t),
            tx = px(0.0) - 6.0,
            ty = py(t) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">C</text>"#,
        px(0.5),
        H - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">sigma(C)</text>"#,
        py(0.5),
        py(0.5)
    );
    for (i, s) in series.iter().enumerate() {
        let points: Vec<String> = s
            .curve
            .bins
            .iter()
            .map(|b| format!("{:.2},{:.2}", px(b.c_mid), py(b.sigma_hat)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
            escape(s.color),
            points.join(" ")
        );
        let ly = TOP + 18.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{x0:.1}" y1="{ly:.1}" x2="{x1:.1}" y2="{ly:.1}" stroke="{c}" stroke-width="2"/><text x="{tx:.1}" y="{ty:.1}" font-family="sans-serif" font-size="12">{label}</text>"#,
            x0 = W - RIGHT - 150.0,
            x1 = W - RIGHT - 125.0,
            c = escape(s.color),
            tx = W - RIGHT - 118.0,
            ty = ly + 4.0,
            label = escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal17(0.5), "0.50000000000000000");
        assert_eq!(format_decimal17(0.002), "0.0020000000000000000");
        assert_eq!(format_decimal17(1.0), "1.0000000000000000");
        assert_eq!(format_decimal17(0.0), "0.0000000000000000");
        assert_eq!(format_decimal17(123.25), "123.25000000000000");
        assert_eq!(format_decimal17(-0.25), "-0.25000000000000000");
        assert_eq!(format_decimal17(1e20), "100000000000000000000.0");
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() / 7.0, 4.9e-300, 0.998] {
            assert_eq!(format_decimal17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn malformed_csv_is_a_format_error() {
        let bad_header = "c,sigma,n\n0.5,0.5,10\n";
        assert!(matches!(read_curve_csv(bad_header.as_bytes()), Err(Error::Format(_))));
        let bad_number = format!("{CSV_HEADER}\n0.5,abc,10,5,0.1\n");
        assert!(matches!(read_curve_csv(bad_number.as_bytes()), Err(Error::Format(_))));
        let inconsistent = format!("{CSV_HEADER}\n0.5,0.5,10,11,0.1\n");
        assert!(matches!(read_curve_csv(inconsistent.as_bytes()), Err(Error::Format(_))));
        let unordered = format!("{CSV_HEADER}\n0.5,0.5,10,5,0.1\n0.4,0.5,10,5,0.1\n");
        assert!(matches!(read_curve_csv(unordered.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn svg_contains_one_polyline_per_series() {
        let bins = (1..5)
            .map(|k| CurveBin::from_counts(k as f64 / 5.0, 10, 5).unwrap())
            .collect();
        let curve = SeparabilityCurve::from_bins(bins).unwrap();
        let svg = render_svg(
            "a <b>",
            &[
                Series { label: "real", curve: &curve, color: "#1f77b4" },
                Series { label: "complex", curve: &curve, color: "#d62728" },
            ],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt;b&gt;"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
