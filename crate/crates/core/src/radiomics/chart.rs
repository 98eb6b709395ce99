use std::fmt::Write;

use crate::error::{Error, Result};

use super::signature::RadiomicsSignature;

pub const CHART_WIDTH: usize = 800;
pub const CHART_HEIGHT: usize = 600;
pub const SVG_MEDIA_TYPE: &str = "image/svg+xml";

const MARGIN: f64 = 10.0;
const LABEL_WIDTH: f64 = 220.0;
const VALUE_WIDTH: f64 = 110.0;

/// `v` rounded to four significant digits, e.g. `14137.2 -> "14140"`.
pub fn format_sig4(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let s = format!("{v:.3e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-3..6).contains(&exp) {
        let decimals = (3 - exp).max(0) as usize;
        let m: f64 = format!("{mantissa}e{exp}").parse().expect("round trip");
        format!("{m:.decimals$}")
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Horizontal bar per feature, in key order. Bar length is proportional to
/// `|value|` relative to the largest magnitude; negative bars are dimmed.
pub fn visualize_radiomics_chart(signature: &RadiomicsSignature) -> Result<Vec<u8>> {
    if signature.is_empty() {
        return Err(Error::EmptySignature);
    }
    let n = signature.len() as f64;
    let row = (CHART_HEIGHT as f64 - 2.0 * MARGIN) / n;
    let bar_h = (row * 0.7).max(1.0);
    let span = CHART_WIDTH as f64 - 2.0 * MARGIN - LABEL_WIDTH - VALUE_WIDTH;
    let max_abs = signature.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let font = (row * 0.6).clamp(6.0, 14.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" \
         viewBox=\"0 0 {CHART_WIDTH} {CHART_HEIGHT}\" font-family=\"monospace\" font-size=\"{font:.2}\">"
    );
    let _ = writeln!(svg, "<rect class=\"background\" width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" fill=\"white\"/>");
    for (t, (name, value)) in signature.iter().enumerate() {
        let y = MARGIN + t as f64 * row;
        let mid = y + row / 2.0;
        let w = if max_abs > 0.0 { value.abs() / max_abs * span } else { 0.0 };
        let fill = if value < 0.0 { "#c0504d" } else { "#4f81bd" };
        let x0 = MARGIN + LABEL_WIDTH;
        let _ = writeln!(
            svg,
            "<text class=\"label\" x=\"{:.2}\" y=\"{mid:.2}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>",
            x0 - 4.0,
            escape(name)
        );
        let _ = writeln!(
            svg,
            "<rect class=\"bar\" x=\"{x0:.2}\" y=\"{:.2}\" width=\"{w:.2}\" height=\"{bar_h:.2}\" fill=\"{fill}\"/>",
            mid - bar_h / 2.0
        );
        let _ = writeln!(
            svg,
            "<text class=\"value\" x=\"{:.2}\" y=\"{mid:.2}\" dominant-baseline=\"middle\">{}</text>",
            x0 + w + 4.0,
            format_sig4(value)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(pairs: &[(&str, f64)]) -> RadiomicsSignature {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn one_bar_per_feature() {
        let svg = visualize_radiomics_chart(&sig(&[("a", 1.0), ("b", -2.0), ("c", 3.5)])).unwrap();
        let text = String::from_utf8(svg).unwrap();
        assert_eq!(text.matches("<rect class=\"bar\"").count(), 3);
        assert!(text.contains("width=\"800\" height=\"600\""));
    }

    #[test]
    fn deterministic() {
        let s = sig(&[("x", 0.123456), ("y", 98765.4)]);
        assert_eq!(visualize_radiomics_chart(&s).unwrap(), visualize_radiomics_chart(&s).unwrap());
    }

    #[test]
    fn zero_value_keeps_label() {
        let text = String::from_utf8(visualize_radiomics_chart(&sig(&[("z", 0.0), ("o", 2.0)])).unwrap()).unwrap();
        assert!(text.contains("width=\"0.00\""));
        assert!(text.contains(">z</text>"));
        assert!(text.contains(">0</text>"));
    }

    #[test]
    fn empty_is_rejected() {
        assert_eq!(visualize_radiomics_chart(&RadiomicsSignature::default()).unwrap_err(), Error::EmptySignature);
    }

    #[test]
    fn four_significant_digits() {
        assert_eq!(format_sig4(14137.2), "14140");
        assert_eq!(format_sig4(0.915432), "0.9154");
        assert_eq!(format_sig4(-2.5), "-2.500");
        assert_eq!(format_sig4(1.0), "1.000");
        assert_eq!(format_sig4(1234567.0), "1.235e6");
        assert_eq!(format_sig4(0.000012), "1.200e-5");
    }
}
