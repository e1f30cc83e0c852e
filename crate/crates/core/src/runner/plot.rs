//! Minimal self-contained SVG emitters.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let m = 0.05 * (hi - lo);
    (lo - m, hi + m)
}

/// Log-log scatter of `(x, y)` (both positive) in decimal logs, with an
/// optional reference line `y ~ x^slope` through the centroid.
pub fn loglog_svg(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)], reference_slope: Option<f64>) -> String {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let (x0, x1) = range(logs.iter().map(|p| p.0));
    let mut ys: Vec<f64> = logs.iter().map(|p| p.1).collect();
    let reference = reference_slope.filter(|_| !logs.is_empty()).map(|slope| {
        let n = logs.len() as f64;
        let cx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let a = (x0, cy + slope * (x0 - cx));
        let b = (x1, cy + slope * (x1 - cx));
        ys.push(a.1);
        ys.push(b.1);
        (a, b, slope)
    });
    let (y0, y1) = range(ys.into_iter());
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = header(title);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for (v, p) in [(x0, px(x0)), (x1, px(x1))] {
        let _ = writeln!(s, r#"<text x="{p:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#, H - PAD + 16.0);
    }
    for (v, p) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{p:.1}" text-anchor="end">{v:.2}</text>"#, PAD - 6.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">log10 {}</text>"#,
        W / 2.0,
        H - 16.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">log10 {}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    if let Some(((ax, ay), (bx, by), slope)) = reference {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="6 4"/>"#,
            px(ax),
            py(ay),
            px(bx),
            py(by)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="gray">reference slope {slope:.4}</text>"#,
            PAD + 8.0,
            PAD + 16.0
        );
    }
    let path: Vec<String> = logs.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
    if path.len() > 1 {
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#, path.join(" "));
    }
    for &(x, y) in &logs {
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="steelblue"/>"#, px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}

/// Label, measured value, accepted interval, pass.
pub type VerdictRow = (String, Option<f64>, Option<(f64, f64)>, bool);

/// One row per entry: measured value as a dot, accepted interval as a bar.
pub fn verdict_svg(title: &str, rows: &[VerdictRow]) -> String {
    let vals = rows.iter().flat_map(|(_, m, b, _)| {
        let mut v: Vec<f64> = m.iter().copied().collect();
        if let Some((lo, hi)) = b {
            v.push(*lo);
            v.push(*hi);
        }
        v
    });
    let (v0, v1) = range(vals.filter(|v| v.is_finite()));
    let left = 220.0;
    let row_h = 28.0;
    let height = 60.0 + row_h * rows.len().max(1) as f64 + 30.0;
    let px = |v: f64| left + (v - v0) / (v1 - v0) * (W - left - 30.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{height}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    for (i, (name, measured, band, pass)) in rows.iter().enumerate() {
        let y = 60.0 + row_h * i as f64;
        let _ = writeln!(s, r#"<text x="10" y="{:.1}">{}</text>"#, y + 4.0, escape(name));
        if let Some((lo, hi)) = band {
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="gray" stroke-width="6"/>"#,
                px(*lo),
                px(*hi)
            );
        }
        if let Some(m) = measured.filter(|m| m.is_finite()) {
            let color = if *pass { "seagreen" } else { "firebrick" };
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{y:.1}" r="5" fill="{color}"/>"#, px(m));
        }
    }
    let base = height - 20.0;
    let _ = writeln!(s, r#"<text x="{left}" y="{base}">{v0:.3}</text>"#);
    let _ = writeln!(s, r#"<text x="{}" y="{base}" text-anchor="end">{v1:.3}</text>"#, W - 30.0);
    s.push_str("</svg>\n");
    s
}
