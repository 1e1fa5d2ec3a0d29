//! On-disk formats: JSON-lines datasets, the experiment CSV and the SVG
//! error chart.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::ExplanationMask;
use crate::graph::Graph;
use crate::synth::LabeledExample;

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub id: String,
    pub num_nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation_edges: Option<Vec<usize>>,
}

impl GraphRecord {
    pub fn from_example(id: impl Into<String>, ex: &LabeledExample) -> Self {
        let g = &ex.graph;
        Self {
            id: id.into(),
            num_nodes: g.num_nodes(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            features: g.features().map(<[_]>::to_vec),
            label: Some(ex.label),
            explanation_edges: Some(ex.explanation.iter().collect()),
        }
    }

    /// Validated graph and mask. Mask indices refer to the edge list as
    /// written, before canonical sorting.
    pub fn to_graph(&self) -> Result<(Graph, ExplanationMask)> {
        let g = Graph::new(
            self.num_nodes,
            self.edges.iter().map(|&[u, v]| (u, v)),
            self.features.clone(),
            self.label,
        )?;
        let ids = self.explanation_edges.as_deref().unwrap_or(&[]);
        let mut mapped = Vec::with_capacity(ids.len());
        for &i in ids {
            let [u, v] = *self.edges.get(i).ok_or(Error::InvalidMask {
                edge: i,
                num_edges: self.edges.len(),
            })?;
            mapped.push(g.edge_id(u, v).expect("edge present after validation"));
        }
        let mask = ExplanationMask::new(mapped, &g)?;
        Ok((g, mask))
    }

    pub fn to_example(&self) -> Result<LabeledExample> {
        let label = self
            .label
            .ok_or_else(|| Error::InvalidParameters(format!("graph `{}` has no label", self.id)))?;
        let (graph, explanation) = self.to_graph()?;
        Ok(LabeledExample {
            graph,
            label,
            explanation,
        })
    }
}

fn parse_error(path: &Path, line: usize, message: impl ToString) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.to_string(),
    }
}

/// Reads every non-blank line of a JSON-lines file. Errors carry the
/// 1-based line number.
pub fn read_records(path: &Path) -> Result<Vec<GraphRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GraphRecord =
            serde_json::from_str(&line).map_err(|e| parse_error(path, i + 1, e))?;
        rec.to_graph().map_err(|e| parse_error(path, i + 1, e))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledExample>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GraphRecord =
            serde_json::from_str(&line).map_err(|e| parse_error(path, i + 1, e))?;
        out.push(rec.to_example().map_err(|e| parse_error(path, i + 1, e))?);
    }
    Ok(out)
}

/// Writes one record per line; ids are the item positions.
pub fn write_dataset(examples: &[LabeledExample], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (i, ex) in examples.iter().enumerate() {
        let rec = GraphRecord::from_example(i.to_string(), ex);
        serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub channel: String,
    pub p: f64,
    pub q: f64,
    pub n_unlabeled: usize,
    pub n_labeled: usize,
    pub trial: usize,
    pub selected_partition: String,
    pub error_rate: f64,
    pub seed: u64,
}

pub fn write_experiment_csv(rows: &[ExperimentRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record([
            "channel",
            "p",
            "q",
            "n_unlabeled",
            "n_labeled",
            "trial",
            "selected_partition",
            "error_rate",
            "seed",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_experiment_csv(path: &Path) -> Result<Vec<ExperimentRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Mean error per `p` for one channel, sorted by `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub channel: String,
    pub points: Vec<(f64, f64)>,
}

/// Groups rows by channel (in name order) and `p`, averaging the error.
pub fn mean_error_series(rows: &[ExperimentRow]) -> Vec<Series> {
    let mut acc: BTreeMap<&str, Vec<(f64, f64, usize)>> = BTreeMap::new();
    for row in rows {
        let pts = acc.entry(&row.channel).or_default();
        match pts.iter_mut().find(|(p, _, _)| *p == row.p) {
            Some(entry) => {
                entry.1 += row.error_rate;
                entry.2 += 1;
            }
            None => pts.push((row.p, row.error_rate, 1)),
        }
    }
    acc.into_iter()
        .map(|(channel, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                channel: channel.to_string(),
                points: pts.into_iter().map(|(p, s, n)| (p, s / n as f64)).collect(),
            }
        })
        .collect()
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

/// Six significant digits.
fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

/// Renders the mean-error curves with a dashed reference line at `q/2`.
pub fn render_error_svg(series: &[Series], q: f64) -> String {
    let (mut p_lo, mut p_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y_hi = q / 2.0;
    for s in series {
        for &(p, e) in &s.points {
            p_lo = p_lo.min(p);
            p_hi = p_hi.max(p);
            y_hi = y_hi.max(e);
        }
    }
    if !(p_hi > p_lo) {
        p_lo -= 0.05;
        p_hi += 0.05;
    }
    let y_hi = (y_hi * 1.1).max(0.05);
    let x = |p: f64| MARGIN + (p - p_lo) / (p_hi - p_lo) * (WIDTH - 2.0 * MARGIN);
    let y = |e: f64| HEIGHT - MARGIN - e / y_hi * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    for i in 0..=4 {
        let e = y_hi * i as f64 / 4.0;
        let p = p_lo + (p_hi - p_lo) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{e:.3}</text>"#,
            x0 - 6.0,
            y(e) + 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{p:.2}</text>"#,
            x(p),
            y0 + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">p</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{:.2}" font-size="13" transform="rotate(-90 15 {:.2})" text-anchor="middle">mean error</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<line class="reference" data-value="{}" x1="{x0}" y1="{:.2}" x2="{x1}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        sig6(q / 2.0),
        y(q / 2.0),
        y(q / 2.0)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(p, e)| format!("{:.2},{:.2}", x(p), y(e)))
            .collect();
        let _ = writeln!(svg, r#"<g class="series" data-channel="{}">"#, s.channel);
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for &(p, e) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" data-p="{}" data-error="{}"/>"#,
                x(p),
                y(e),
                sig6(p),
                sig6(e)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
            x1 - 150.0,
            y1 + 16.0 * (i as f64 + 1.0),
            s.channel
        );
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

/// Reads an experiment CSV and writes the error chart. The reference line
/// uses the `q` of the first row.
pub fn plot_error_curves(csv_path: &Path, svg_path: &Path) -> Result<()> {
    let rows = read_experiment_csv(csv_path)?;
    let first = rows.first().ok_or(Error::EmptyInput)?;
    let svg = render_error_svg(&mean_error_series(&rows), first.q);
    std::fs::write(svg_path, svg)?;
    Ok(())
}

fn attr<'a>(tag: &'a str, name: &str) -> Option<&'a str> {
    let key = format!(" {name}=\"");
    let start = tag.find(&key)? + key.len();
    let len = tag[start..].find('"')?;
    Some(&tag[start..start + len])
}

/// Recovers the plotted series from a chart written by [`render_error_svg`].
pub fn read_svg_series(svg: &str) -> Result<Vec<Series>> {
    let bad = |m: &str| Error::InvalidParameters(format!("malformed chart: {m}"));
    let mut out: Vec<Series> = Vec::new();
    for line in svg.lines() {
        if line.starts_with("<g class=\"series\"") {
            let channel = attr(line, "data-channel").ok_or_else(|| bad("series without channel"))?;
            out.push(Series {
                channel: channel.to_string(),
                points: Vec::new(),
            });
        } else if line.starts_with("<circle") {
            let num = |name| -> Result<f64> {
                attr(line, name)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad("point without data"))
            };
            let point = (num("data-p")?, num("data-error")?);
            out.last_mut().ok_or_else(|| bad("point outside a series"))?.points.push(point);
        }
    }
    Ok(out)
}
