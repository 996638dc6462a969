//! Report emission: CSV/JSON serialization helpers, a static SVG bar chart
//! with confidence whiskers, and atomic file writes.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// One bar of a chart: a value with optional interval whiskers.
#[derive(Debug, Clone)]
pub struct BarRow {
    pub label: String,
    pub value: f64,
    pub low: Option<f64>,
    pub high: Option<f64>,
}

/// Renders a bar chart as a static SVG string. Values are expected in
/// [0, 1]; whiskers mark the interval bounds.
pub fn svg_bar_chart(title: &str, rows: &[BarRow]) -> String {
    const BAR_W: f64 = 56.0;
    const GAP: f64 = 18.0;
    const PLOT_H: f64 = 240.0;
    const LEFT: f64 = 56.0;
    const TOP: f64 = 34.0;
    const BOTTOM: f64 = 64.0;

    let width = LEFT + 14.0 + rows.len() as f64 * (BAR_W + GAP) + 20.0;
    let height = TOP + PLOT_H + BOTTOM;
    let y_of = |v: f64| TOP + PLOT_H * (1.0 - v.clamp(0.0, 1.0));

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.0}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        width / 2.0,
        escape(title)
    ));
    // y axis with gridlines at 0, .25, .5, .75, 1
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "  <line x1=\"{LEFT:.0}\" y1=\"{y:.1}\" x2=\"{:.0}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n",
            width - 12.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.0}\" y=\"{:.1}\" text-anchor=\"end\">{v:.2}</text>\n",
            LEFT - 6.0,
            y + 4.0
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        let x = LEFT + 14.0 + i as f64 * (BAR_W + GAP);
        let y = y_of(row.value);
        svg.push_str(&format!(
            "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{BAR_W:.0}\" height=\"{:.1}\" fill=\"#4878a8\"/>\n",
            (TOP + PLOT_H - y).max(0.0)
        ));
        if let (Some(low), Some(high)) = (row.low, row.high) {
            let cx = x + BAR_W / 2.0;
            let (y1, y2) = (y_of(high), y_of(low));
            svg.push_str(&format!(
                "  <line x1=\"{cx:.1}\" y1=\"{y1:.1}\" x2=\"{cx:.1}\" y2=\"{y2:.1}\" stroke=\"#222\" stroke-width=\"1.5\"/>\n"
            ));
            for yw in [y1, y2] {
                svg.push_str(&format!(
                    "  <line x1=\"{:.1}\" y1=\"{yw:.1}\" x2=\"{:.1}\" y2=\"{yw:.1}\" stroke=\"#222\" stroke-width=\"1.5\"/>\n",
                    cx - 7.0,
                    cx + 7.0
                ));
            }
        }
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.3}</text>\n",
            x + BAR_W / 2.0,
            y_of(row.value) - 5.0,
            row.value
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" transform=\"rotate(-40 {:.1} {:.1})\">{}</text>\n",
            x + BAR_W / 2.0,
            TOP + PLOT_H + 16.0,
            x + BAR_W / 2.0,
            TOP + PLOT_H + 16.0,
            escape(&row.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes atomically: a temp file in the target directory, flushed, then
/// renamed over the destination. Re-runs overwrite byte-identically and a
/// parallel run can never expose a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| crate::error::Error::Io(e.error))?;
    Ok(())
}
