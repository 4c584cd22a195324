//! Turns one or more campaign `results.csv` files into two SVG line
//! charts: the frequency-based scores and the absolute scores, each
//! plotted against the number of held-out variants.
//!
//! Every input file contributes one point per hyperparameter profile it
//! contains (the mean over its folds, with ±1 standard-error bars);
//! profiles become overlaid series so different fold counts and profiles
//! can be compared on one pair of axes. The SVG output is deterministic:
//! fixed geometry, two-decimal coordinates, and series in sorted order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::FOLD_CSV_HEADER;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const DASHES: [&str; 3] = ["", "6,3", "2,2"];

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 64.0;
const PLOT_RIGHT: f64 = 704.0;
const PLOT_TOP: f64 = 48.0;
const PLOT_BOTTOM: f64 = 424.0;
const LEGEND_X: f64 = 720.0;

const METRIC_NAMES: [&str; 6] = ["F", "P", "G", "F_A", "P_A", "G_A"];

/// Where the rendered charts went.
#[derive(Debug)]
pub struct ReportSummary {
    pub frequency_svg: PathBuf,
    pub absolute_svg: PathBuf,
    /// Series drawn per chart.
    pub series: usize,
    /// Points per series set (one per input file and profile).
    pub points: usize,
}

/// One aggregated point: a file × profile group.
struct PointSet {
    x: f64,
    means: [f64; 6],
    ses: [f64; 6],
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Parses one results file into per-profile fold rows
/// (`variants_held_out` plus the six scores).
fn parse_results(path: &Path) -> Result<BTreeMap<String, Vec<[f64; 7]>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or("");
    if header != FOLD_CSV_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected results header {FOLD_CSV_HEADER:?}, found {header:?}"),
        });
    }
    let mut groups: BTreeMap<String, Vec<[f64; 7]>> = BTreeMap::new();
    for (ix, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 15 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: ix + 1,
                msg: format!("expected 15 cells, found {}", cells.len()),
            });
        }
        if cells[1].starts_with("aggregate-") {
            continue;
        }
        let mut nums = [0.0; 7];
        for (slot, cell) in nums.iter_mut().zip(&cells[4..11]) {
            *slot = cell.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: ix + 1,
                msg: format!("non-numeric cell {cell:?}"),
            })?;
        }
        groups.entry(cells[2].to_owned()).or_default().push(nums);
    }
    Ok(groups)
}

fn fmt_tick(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{:.0}", v.round())
    } else {
        format!("{v:.1}")
    }
}

/// Renders one chart over three of the six metrics.
fn render_chart(
    title: &str,
    y_label: &str,
    metric_ixs: [usize; 3],
    series: &BTreeMap<String, Vec<PointSet>>,
    x_domain: (f64, f64),
) -> String {
    let (xmin, xmax) = x_domain;
    let xspan = (xmax - xmin).max(1e-12);
    let xpos = |x: f64| PLOT_LEFT + (x - xmin) / xspan * (PLOT_RIGHT - PLOT_LEFT);
    let ypos = |y: f64| PLOT_BOTTOM - y.clamp(0.0, 1.0) * (PLOT_BOTTOM - PLOT_TOP);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" fill=\"#ffffff\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"28\" font-size=\"16\" fill=\"#222222\" text-anchor=\"middle\">{title}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0
    ));

    // Gridlines and y ticks at 0, 0.2, …, 1.
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = ypos(v);
        svg.push_str(&format!(
            "<line x1=\"{PLOT_LEFT:.2}\" y1=\"{y:.2}\" x2=\"{PLOT_RIGHT:.2}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#444444\" text-anchor=\"end\">{}</text>\n",
            PLOT_LEFT - 8.0,
            y + 4.0,
            fmt_tick(v)
        ));
    }
    // X ticks: five evenly spaced.
    for i in 0..=4 {
        let v = xmin + xspan * i as f64 / 4.0;
        let x = xpos(v);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{PLOT_BOTTOM:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#444444\" stroke-width=\"1\"/>\n",
            PLOT_BOTTOM + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#444444\" text-anchor=\"middle\">{}</text>\n",
            PLOT_BOTTOM + 20.0,
            fmt_tick(v)
        ));
    }
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{PLOT_LEFT:.2}\" y1=\"{PLOT_TOP:.2}\" x2=\"{PLOT_LEFT:.2}\" y2=\"{PLOT_BOTTOM:.2}\" stroke=\"#222222\" stroke-width=\"1\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{PLOT_LEFT:.2}\" y1=\"{PLOT_BOTTOM:.2}\" x2=\"{PLOT_RIGHT:.2}\" y2=\"{PLOT_BOTTOM:.2}\" stroke=\"#222222\" stroke-width=\"1\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#222222\" text-anchor=\"middle\">variants held out</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        PLOT_BOTTOM + 42.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" font-size=\"12\" fill=\"#222222\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.2})\">{y_label}</text>\n",
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0
    ));

    // Series: every profile contributes one line per metric.
    let mut legend_y = PLOT_TOP + 8.0;
    let mut color_ix = 0usize;
    for (profile_ix, (profile, points)) in series.iter().enumerate() {
        let dash = DASHES[profile_ix % DASHES.len()];
        for &m in &metric_ixs {
            let color = PALETTE[color_ix % PALETTE.len()];
            color_ix += 1;
            let dash_attr = if dash.is_empty() {
                String::new()
            } else {
                format!(" stroke-dasharray=\"{dash}\"")
            };
            let coords: Vec<String> = points
                .iter()
                .map(|p| format!("{:.2},{:.2}", xpos(p.x), ypos(p.means[m])))
                .collect();
            if coords.len() > 1 {
                svg.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash_attr}/>\n",
                    coords.join(" ")
                ));
            }
            for p in points {
                let x = xpos(p.x);
                let y = ypos(p.means[m]);
                if p.ses[m] > 0.0 {
                    let y_lo = ypos((p.means[m] - p.ses[m]).clamp(0.0, 1.0));
                    let y_hi = ypos((p.means[m] + p.ses[m]).clamp(0.0, 1.0));
                    svg.push_str(&format!(
                        "<line x1=\"{x:.2}\" y1=\"{y_lo:.2}\" x2=\"{x:.2}\" y2=\"{y_hi:.2}\" stroke=\"{color}\" stroke-width=\"1\"/>\n"
                    ));
                    for ye in [y_lo, y_hi] {
                        svg.push_str(&format!(
                            "<line x1=\"{:.2}\" y1=\"{ye:.2}\" x2=\"{:.2}\" y2=\"{ye:.2}\" stroke=\"{color}\" stroke-width=\"1\"/>\n",
                            x - 3.0,
                            x + 3.0
                        ));
                    }
                }
                svg.push_str(&format!(
                    "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"{color}\"/>\n"
                ));
            }
            // Legend entry.
            svg.push_str(&format!(
                "<line x1=\"{LEGEND_X:.2}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash_attr}/>\n",
                LEGEND_X + 22.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#222222\">{} {}</text>\n",
                LEGEND_X + 28.0,
                legend_y + 4.0,
                profile,
                METRIC_NAMES[m]
            ));
            legend_y += 16.0;
        }
    }

    svg.push_str("</svg>\n");
    svg
}

/// Reads campaign results files and writes `report-frequency.svg` and
/// `report-absolute.svg` into `out_dir`.
pub fn emit_report(inputs: &[PathBuf], out_dir: impl AsRef<Path>) -> Result<ReportSummary> {
    let out_dir = out_dir.as_ref();
    if inputs.is_empty() {
        return Err(Error::EmptyInput("results files"));
    }

    // One aggregated point per file × profile.
    let mut by_profile: BTreeMap<String, Vec<PointSet>> = BTreeMap::new();
    for path in inputs {
        for (profile, rows) in parse_results(path)? {
            if rows.is_empty() {
                continue;
            }
            let x = rows.iter().map(|r| r[0]).sum::<f64>() / rows.len() as f64;
            let mut means = [0.0; 6];
            let mut ses = [0.0; 6];
            for m in 0..6 {
                let column: Vec<f64> = rows.iter().map(|r| r[m + 1]).collect();
                let (mean, se) = mean_se(&column);
                means[m] = mean;
                ses[m] = se;
            }
            by_profile
                .entry(profile)
                .or_default()
                .push(PointSet { x, means, ses });
        }
    }
    if by_profile.is_empty() {
        return Err(Error::EmptyInput("fold rows in the results files"));
    }
    for points in by_profile.values_mut() {
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
    }

    let xs: Vec<f64> = by_profile.values().flatten().map(|p| p.x).collect();
    let xmin = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((xmax - xmin) * 0.05).max(0.5);
    let x_domain = ((xmin - pad).max(0.0), xmax + pad);

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let frequency_svg = out_dir.join("report-frequency.svg");
    let absolute_svg = out_dir.join("report-absolute.svg");
    let freq = render_chart(
        "Frequency-based scores vs. held-out variants",
        "frequency-based score",
        [0, 1, 2],
        &by_profile,
        x_domain,
    );
    std::fs::write(&frequency_svg, freq).map_err(|e| Error::io(&frequency_svg, e))?;
    let abs = render_chart(
        "Absolute scores vs. held-out variants",
        "absolute score",
        [3, 4, 5],
        &by_profile,
        x_domain,
    );
    std::fs::write(&absolute_svg, abs).map_err(|e| Error::io(&absolute_svg, e))?;

    Ok(ReportSummary {
        frequency_svg,
        absolute_svg,
        series: by_profile.len() * 3,
        points: by_profile.values().map(|v| v.len()).sum(),
    })
}
