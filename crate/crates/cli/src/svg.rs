//! Minimal SVG heatmap of values sampled on a uniform grid over `[0,2]^2`.

use std::fmt::Write;

const SIZE: f64 = 400.0;
const LOW: [f64; 3] = [68.0, 1.0, 84.0];
const HIGH: [f64; 3] = [253.0, 231.0, 37.0];

/// Linear two-colour ramp; `t` is clamped to `[0,1]`.
fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c: Vec<u8> = LOW.iter().zip(HIGH).map(|(l, h)| (l + t * (h - l)).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// One square per sample centred on its grid node. The value range goes in a
/// leading comment so the picture can be read back quantitatively.
pub fn heatmap(samples: &[(f64, f64, f64)], grid: usize, title: &str) -> String {
    let (min, max) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.2), hi.max(s.2)));
    let span = if max > min { max - min } else { 1.0 };
    let cell = SIZE / (grid.max(2) - 1) as f64;
    let pad = cell / 2.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, "<!-- min={min:e} max={max:e} colormap=linear low=#440154 high=#fde725 -->");
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="{x0} {y0} {w} {h}">"#,
        x0 = -pad,
        y0 = -pad - 30.0,
        w = SIZE + cell,
        h = SIZE + cell + 30.0
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r#"<text x="0" y="-12" font-family="sans-serif" font-size="12">{} [min {min:.3e}, max {max:.3e}]</text>"#, escape(title));
    for &(x, y, v) in samples {
        let px = x / 2.0 * SIZE - pad;
        let py = (1.0 - y / 2.0) * SIZE - pad;
        let _ = writeln!(
            s,
            r#"<rect x="{px:.3}" y="{py:.3}" width="{c:.3}" height="{c:.3}" fill="{}"/>"#,
            colour((v - min) / span),
            c = cell
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_annotated_and_colours_span_the_ramp() {
        let svg = heatmap(&[(0.0, 0.0, 1.0), (2.0, 2.0, 3.0)], 3, "a < b");
        assert!(svg.contains("<!-- min=1e0 max=3e0"));
        assert!(svg.contains("#440154") && svg.contains("#fde725"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<rect").count(), 2);
    }

    #[test]
    fn ramp_is_linear() {
        assert_eq!(colour(0.0), "#440154");
        assert_eq!(colour(1.0), "#fde725");
        assert_eq!(colour(0.5), "#a1743d");
        assert_eq!(colour(7.0), colour(1.0));
    }
}
