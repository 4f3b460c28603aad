//! Static SVG emitters: log-log tail plots (empirical CDF, DKW band,
//! theoretical curve, fitted slope annotation) and sigma_min grid heat maps
//! with eigenvalue markers. Plain string assembly, no rendering dependency,
//! deterministic output for identical inputs.

use crate::pseudospec::PseudospectrumGrid;
use crate::verify::TailReport;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("report has no positive data to plot")]
    EmptyReport,
    #[error("missing columns: expected {expected}, found {found}")]
    MissingColumns { expected: String, found: String },
    #[error("csv parse error: {0}")]
    Csv(String),
}

const W: f64 = 720.0;
const H: f64 = 540.0;
const ML: f64 = 70.0;
const MR: f64 = 30.0;
const MT: f64 = 40.0;
const MB: f64 = 60.0;

fn xmap(lx: f64, lx0: f64, lx1: f64) -> f64 {
    ML + (lx - lx0) / (lx1 - lx0) * (W - ML - MR)
}

fn ymap(ly: f64, ly0: f64, ly1: f64) -> f64 {
    H - MB - (ly - ly0) / (ly1 - ly0) * (H - MT - MB)
}

fn polyline(points: &[(f64, f64)], style: &str) -> String {
    if points.is_empty() {
        return String::new();
    }
    let pts: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", x, y))
        .collect();
    format!("<polyline fill=\"none\" {} points=\"{}\"/>\n", style, pts.join(" "))
}

/// Rows parsed back from a tail CSV: (eps, empirical, band, theoretical).
pub fn parse_tail_csv(text: &str) -> Result<Vec<(f64, f64, f64, f64)>, PlotError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| PlotError::Csv(e.to_string()))?
        .clone();
    let expected = ["eps", "empirical", "band", "theoretical"];
    let mut idx = Vec::new();
    for name in expected {
        match headers.iter().position(|h| h == name) {
            Some(i) => idx.push(i),
            None => {
                return Err(PlotError::MissingColumns {
                    expected: expected.join(","),
                    found: headers.iter().collect::<Vec<_>>().join(","),
                })
            }
        }
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| PlotError::Csv(e.to_string()))?;
        let get = |i: usize| -> Result<f64, PlotError> {
            rec.get(idx[i])
                .ok_or_else(|| PlotError::Csv("short row".into()))?
                .parse::<f64>()
                .map_err(|e| PlotError::Csv(e.to_string()))
        };
        rows.push((get(0)?, get(1)?, get(2)?, get(3)?));
    }
    if rows.is_empty() {
        return Err(PlotError::EmptyReport);
    }
    Ok(rows)
}

/// Log-log plot of empirical CDF vs theoretical bound, with the DKW band as
/// a dashed envelope and a "slope=x.xx" annotation when a fit is present.
pub fn loglog_svg(
    title: &str,
    rows: &[(f64, f64, f64, f64)],
    slope: Option<f64>,
) -> Result<String, PlotError> {
    let positives: Vec<f64> = rows
        .iter()
        .flat_map(|r| [r.1, r.3])
        .filter(|&v| v > 0.0)
        .collect();
    if positives.is_empty() {
        return Err(PlotError::EmptyReport);
    }
    let lx0 = rows.iter().map(|r| r.0.log10()).fold(f64::INFINITY, f64::min);
    let lx1 = rows.iter().map(|r| r.0.log10()).fold(f64::NEG_INFINITY, f64::max);
    let ly0 = positives.iter().map(|v| v.log10()).fold(f64::INFINITY, f64::min) - 0.2;
    let ly1 = 0.1f64;
    let (lx0, lx1) = if lx0 == lx1 { (lx0 - 0.5, lx1 + 0.5) } else { (lx0, lx1) };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{}</text>\n",
        ML, title
    ));
    // decade grid
    let mut d = lx0.ceil() as i64;
    while (d as f64) <= lx1 {
        let x = xmap(d as f64, lx0, lx1);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{MT}\" x2=\"{x:.2}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n",
            H - MB
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">1e{d}</text>\n",
            x,
            H - MB + 18.0
        ));
        d += 1;
    }
    let mut d = ly0.ceil() as i64;
    while (d as f64) <= ly1 {
        let y = ymap(d as f64, ly0, ly1);
        svg.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{y:.2}\" x2=\"{:.1}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\n",
            W - MR
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">1e{d}</text>\n",
            ML - 6.0,
            y + 4.0
        ));
        d += 1;
    }
    svg.push_str(&format!(
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));

    let to_pts = |sel: &dyn Fn(&(f64, f64, f64, f64)) -> f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| sel(r) > 0.0)
            .map(|r| (xmap(r.0.log10(), lx0, lx1), ymap(sel(r).log10(), ly0, ly1)))
            .collect()
    };
    let emp = to_pts(&|r| r.1);
    let banded = to_pts(&|r| (r.1 + r.2).min(1.0));
    let theo = to_pts(&|r| r.3);
    svg.push_str(&polyline(&theo, "stroke=\"#cc3333\" stroke-width=\"1.5\""));
    svg.push_str(&polyline(
        &banded,
        "stroke=\"#88aadd\" stroke-width=\"1\" stroke-dasharray=\"4 3\"",
    ));
    svg.push_str(&polyline(&emp, "stroke=\"#2255aa\" stroke-width=\"1.5\""));
    for &(x, y) in &emp {
        svg.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"#2255aa\"/>\n"
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" fill=\"#2255aa\">empirical</text>\n",
        W - MR - 150.0,
        MT + 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" fill=\"#cc3333\">theoretical</text>\n",
        W - MR - 150.0,
        MT + 32.0
    ));
    if let Some(s) = slope {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"13\">slope={s:.2}</text>\n",
            W - MR - 150.0,
            MT + 52.0
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn loglog_svg_from_report(report: &TailReport) -> Result<String, PlotError> {
    let rows: Vec<(f64, f64, f64, f64)> = report
        .rows
        .iter()
        .map(|r| (r.eps, r.empirical, r.band, r.theoretical))
        .collect();
    loglog_svg(&report.label, &rows, report.slope.map(|s| s.slope))
}

/// Heat map of log10(sigma_min) over the grid with eigenvalue markers.
pub fn grid_svg(
    title: &str,
    grid: &PseudospectrumGrid,
    eigenvalues: &[(f64, f64)],
) -> Result<String, PlotError> {
    if grid.values.is_empty() {
        return Err(PlotError::EmptyReport);
    }
    let vmin = grid
        .values
        .iter()
        .cloned()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min)
        .max(1e-300);
    let vmax = grid.values.iter().cloned().fold(0.0, f64::max).max(vmin * 10.0);
    let (l0, l1) = (vmin.log10(), vmax.log10());
    let px = (W - ML - MR) / grid.nx as f64;
    let py = (H - MT - MB) / grid.ny as f64;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{}</text>\n",
        ML, title
    ));
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let v = grid.value(i, j).max(vmin);
            let t = ((v.log10() - l0) / (l1 - l0)).clamp(0.0, 1.0);
            let shade = (40.0 + 215.0 * t) as u8;
            let x = ML + i as f64 * px;
            // y axis points up: j = 0 is the bottom row
            let y = H - MB - (j + 1) as f64 * py;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({shade},{shade},{})\"/>\n",
                px + 0.5,
                py + 0.5,
                255u8.min(shade.saturating_add(20))
            ));
        }
    }
    let rx = |x: f64| ML + (x - grid.region.x0) / (grid.region.x1 - grid.region.x0) * (W - ML - MR);
    let ry = |y: f64| H - MB - (y - grid.region.y0) / (grid.region.y1 - grid.region.y0) * (H - MT - MB);
    for &(ex, ey) in eigenvalues {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"none\" stroke=\"#cc2222\" stroke-width=\"1.5\"/>\n",
            rx(ex),
            ry(ey)
        ));
    }
    svg.push_str(&format!(
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}
