//! Standalone SVG emission: accuracy heatmaps over the (k, r) grid and
//! 2-D class-colored scatter plots. No rendering dependencies; the
//! output is plain XML.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use graphomic_core::eval::ReportRow;
use graphomic_core::Matrix;

use crate::io::{fmt3, fmt_f64};

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Blue-to-red ramp over [0, 1].
fn ramp(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * v).round() as u8;
    format!("rgb({},{},{})", lerp(43.0, 216.0), lerp(83.0, 82.0), lerp(150.0, 62.0))
}

const CELL: f64 = 64.0;
const MARGIN: f64 = 70.0;

/// Heatmap of mean test accuracy per (k, r) cell for one
/// (model, label class) slice of a report.
pub fn heatmap_svg(model: &str, label_class: &str, rows: &[&ReportRow]) -> String {
    let mut ks: Vec<usize> = rows.iter().filter_map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut rs: Vec<f64> = rows.iter().filter_map(|r| r.r).collect();
    rs.sort_by(f64::total_cmp);
    rs.dedup();

    // Mean test accuracy per cell.
    let mut cells: BTreeMap<(usize, u64), (f64, usize)> = BTreeMap::new();
    for row in rows {
        if let (Some(k), Some(r)) = (row.k, row.r) {
            let entry = cells.entry((k, r.to_bits())).or_insert((0.0, 0));
            entry.0 += row.test_acc;
            entry.1 += 1;
        }
    }

    let width = MARGIN * 1.5 + CELL * rs.len() as f64;
    let height = MARGIN * 1.5 + CELL * ks.len() as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        r#"  <text x="{}" y="20" font-family="sans-serif" font-size="14">{} / {} - test accuracy</text>"#,
        MARGIN,
        esc(model),
        esc(label_class)
    );
    for (yi, k) in ks.iter().enumerate() {
        let y = MARGIN + yi as f64 * CELL;
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">k={}</text>"#,
            MARGIN - 8.0,
            y + CELL / 2.0 + 4.0,
            k
        );
        for (xi, r) in rs.iter().enumerate() {
            let x = MARGIN + xi as f64 * CELL;
            if yi == 0 {
                let _ = writeln!(
                    out,
                    r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">r={}</text>"#,
                    x + CELL / 2.0,
                    MARGIN - 10.0,
                    fmt_f64(*r)
                );
            }
            match cells.get(&(*k, r.to_bits())) {
                Some(&(sum, n)) => {
                    let mean = sum / n as f64;
                    let _ = writeln!(
                        out,
                        r#"  <rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="white"/>"#,
                        ramp(mean)
                    );
                    let _ = writeln!(
                        out,
                        r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="white" text-anchor="middle">{}</text>"#,
                        x + CELL / 2.0,
                        y + CELL / 2.0 + 4.0,
                        fmt3(mean)
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        r##"  <rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#dddddd" stroke="white"/>"##
                    );
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

const SCATTER_SIZE: f64 = 480.0;
const PALETTE: [&str; 8] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
];

/// Scatter of an `N x 2` projection colored by class label.
pub fn scatter_svg(title: &str, projection: &Matrix, labels: &[usize]) -> String {
    assert_eq!(projection.cols(), 2, "scatter needs a 2-D projection");
    let n = projection.rows();
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        min_x = min_x.min(projection.get(i, 0));
        max_x = max_x.max(projection.get(i, 0));
        min_y = min_y.min(projection.get(i, 1));
        max_y = max_y.max(projection.get(i, 1));
    }
    let span_x = (max_x - min_x).max(1e-12);
    let span_y = (max_y - min_y).max(1e-12);
    let pad = 30.0;
    let total = SCATTER_SIZE + 2.0 * pad;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(
        out,
        r#"  <text x="{pad}" y="20" font-family="sans-serif" font-size="14">{}</text>"#,
        esc(title)
    );
    for i in 0..n {
        let x = pad + (projection.get(i, 0) - min_x) / span_x * SCATTER_SIZE;
        let y = pad + (1.0 - (projection.get(i, 1) - min_y) / span_y) * SCATTER_SIZE;
        let color = PALETTE[labels[i] % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"  <circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}" fill-opacity="0.7"/>"#
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strict_parse(xml: &str) {
        let mut reader = quick_xml::Reader::from_str(xml);
        loop {
            match reader.read_event() {
                Ok(quick_xml::events::Event::Eof) => break,
                Ok(_) => {}
                Err(e) => panic!("svg is not well-formed xml: {e}"),
            }
        }
    }

    fn row(k: usize, r: f64, acc: f64) -> ReportRow {
        ReportRow {
            model: "cnc-dgi".into(),
            modalities: "a+b".into(),
            label_class: "y".into(),
            k: Some(k),
            r: Some(r),
            homophily: Some(0.7),
            edges: Some(100),
            isolated: Some(0),
            seed: 1,
            train_acc: acc,
            test_acc: acc,
            epochs: 150,
        }
    }

    #[test]
    fn heatmap_has_a_cell_per_grid_point_and_parses() {
        let rows: Vec<ReportRow> = [2usize, 4]
            .iter()
            .flat_map(|&k| {
                [0.5, 1.0, 5.0]
                    .iter()
                    .map(move |&r| row(k, r, 0.5 + 0.05 * k as f64))
            })
            .collect();
        let refs: Vec<&ReportRow> = rows.iter().collect();
        let svg = heatmap_svg("cnc-dgi", "y", &refs);
        assert_eq!(svg.matches("<rect").count(), 6);
        strict_parse(&svg);
    }

    #[test]
    fn scatter_parses_and_draws_every_point() {
        let proj = Matrix::new(4, 2, vec![0.0, 0.0, 1.0, 1.0, -1.0, 2.0, 3.0, -2.0]).unwrap();
        let svg = scatter_svg("demo <2d>", &proj, &[0, 1, 0, 1]);
        assert_eq!(svg.matches("<circle").count(), 4);
        strict_parse(&svg);
    }
}
