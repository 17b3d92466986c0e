//! Minimal static SVG log-log plots: a norm series against `1 + t` with an
//! optional predicted-slope guide line.

use std::io::Write as _;
use std::path::Path;

use crate::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

struct Axes {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Axes {
    fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.x_lo) / (self.x_hi - self.x_lo);
        let fy = (y - self.y_lo) / (self.y_hi - self.y_lo);
        (
            MARGIN + fx * (W - 2.0 * MARGIN),
            H - MARGIN - fy * (H - 2.0 * MARGIN),
        )
    }
}

/// Writes a log-log plot of `series` (t, norm). When `guide_slope` is given,
/// a dashed line with that slope is anchored at the first in-window sample.
pub fn write_loglog_svg(
    path: &Path,
    title: &str,
    series: &[(f64, f64)],
    guide_slope: Option<f64>,
) -> Result<()> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, n)| t >= 0.0 && n > 0.0)
        .map(|&(t, n)| ((1.0 + t).log10(), n.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Config(format!(
            "plot '{title}': need at least 2 positive samples, got {}",
            pts.len()
        )));
    }
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let d = (*hi - *lo).max(1e-3);
        *lo -= 0.05 * d;
        *hi += 0.05 * d;
    };
    pad(&mut x_lo, &mut x_hi);
    pad(&mut y_lo, &mut y_hi);
    let ax = Axes {
        x_lo,
        x_hi,
        y_lo,
        y_hi,
    };

    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )?;
    writeln!(w, r#"<rect width="{W}" height="{H}" fill="white"/>"#)?;
    // frame
    let (fx0, fy0) = (MARGIN, MARGIN);
    let (fw, fh) = (W - 2.0 * MARGIN, H - 2.0 * MARGIN);
    writeln!(
        w,
        r#"<rect x="{fx0}" y="{fy0}" width="{fw}" height="{fh}" fill="none" stroke="black"/>"#
    )?;
    writeln!(
        w,
        r#"<text x="{}" y="25" text-anchor="middle" font-family="monospace" font-size="14">{}</text>"#,
        W / 2.0,
        title
    )?;
    writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="monospace" font-size="12">log10(1 + t)</text>"#,
        W / 2.0,
        H - 15.0
    )?;
    // decade ticks
    for dx in (x_lo.ceil() as i64)..=(x_hi.floor() as i64) {
        let (px, _) = ax.to_px(dx as f64, y_lo);
        writeln!(
            w,
            r#"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="lightgray"/>"#,
            MARGIN,
            H - MARGIN
        )?;
        writeln!(
            w,
            r#"<text x="{px}" y="{}" text-anchor="middle" font-family="monospace" font-size="10">{dx}</text>"#,
            H - MARGIN + 15.0
        )?;
    }
    for dy in (y_lo.ceil() as i64)..=(y_hi.floor() as i64) {
        let (_, py) = ax.to_px(x_lo, dy as f64);
        writeln!(
            w,
            r#"<line x1="{}" y1="{py}" x2="{}" y2="{py}" stroke="lightgray"/>"#,
            MARGIN,
            W - MARGIN
        )?;
        writeln!(
            w,
            r#"<text x="{}" y="{py}" text-anchor="end" font-family="monospace" font-size="10">{dy}</text>"#,
            MARGIN - 5.0
        )?;
    }
    // series polyline
    let mut d = String::new();
    for &(x, y) in &pts {
        let (px, py) = ax.to_px(x, y);
        d.push_str(&format!("{px:.2},{py:.2} "));
    }
    writeln!(
        w,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        d.trim_end()
    )?;
    // guide line through the first point
    if let Some(slope) = guide_slope {
        let (x0, y0) = pts[0];
        let (px0, py0) = ax.to_px(x0, y0);
        let (px1, py1) = ax.to_px(x_hi, y0 + slope * (x_hi - x0));
        writeln!(
            w,
            r#"<line x1="{px0:.2}" y1="{py0:.2}" x2="{px1:.2}" y2="{py1:.2}" stroke="crimson" stroke-dasharray="6,4"/>"#
        )?;
        writeln!(
            w,
            r#"<text x="{}" y="40" text-anchor="end" font-family="monospace" font-size="12" fill="crimson">guide slope {slope}</text>"#,
            W - MARGIN
        )?;
    }
    writeln!(w, "</svg>")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_valid_svg_with_guide() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("decay.svg");
        let series: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let t = 1.0 + i as f64;
                (t, (1.0 + t).powf(-0.5))
            })
            .collect();
        write_loglog_svg(&path, "pressure decay", &series, Some(-0.5)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
        assert!(text.contains("polyline"));
        assert!(text.contains("guide slope -0.5"));
    }

    #[test]
    fn too_few_points_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.svg");
        assert!(write_loglog_svg(&path, "x", &[(1.0, 0.5)], None).is_err());
    }
}
