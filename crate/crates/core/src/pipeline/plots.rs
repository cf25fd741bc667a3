use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::report::Summary;
use super::{file_stem, metric_table_path, stage_seed, write_file, RunConfig};
use crate::embedding::mds_labeled;
use crate::error::{Error, Result};
use crate::metrics::{Metric, NodeMetricTable};
use crate::similarity::{relevance_cmp, DistanceMatrix};

/// Words labeled in the ranked lists.
pub const LABELED_WORDS: usize = 20;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn require(path: PathBuf, stage: &'static str) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingArtifact { path, stage })
    }
}

fn read_labels(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            l.split_once(',')
                .map(|(d, a)| (d.to_string(), a.to_string()))
                .ok_or_else(|| Error::parse(path, i + 1, "expected document_id,author"))
        })
        .collect()
}

fn svg_open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"10\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Words with a defined value, most extreme first, and an SVG of the values
/// with the leading words labeled.
fn rank_list(table: &NodeMetricTable, metric: Metric, cfg: &RunConfig) -> (String, String) {
    let order = cfg.rank_order(metric);
    let mut rows: Vec<(&str, usize, f64)> = table
        .rows
        .iter()
        .filter_map(|r| metric.value(r).map(|v| (r.lemma.as_str(), r.frequency, v)))
        .collect();
    rows.sort_by(|a, b| relevance_cmp(order, a.2, b.2).then(b.1.cmp(&a.1)).then(a.0.cmp(b.0)));
    let mut csv = String::from("rank,lemma,value,frequency,label\n");
    for (i, (lemma, freq, v)) in rows.iter().enumerate() {
        let label = if i < LABELED_WORDS { *lemma } else { "" };
        let _ = writeln!(csv, "{},{lemma},{v:?},{freq},{label}", i + 1);
    }

    let (w, h, pad) = (640.0, 400.0, 40.0);
    let mut svg = svg_open(w, h);
    let _ = writeln!(
        svg,
        "<text x=\"{pad}\" y=\"20\">{} by {metric}</text>",
        escape(&table.document_id)
    );
    let shown = rows.len().min(100);
    if shown > 0 {
        let (lo, hi) = rows[..shown]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.2), b.max(r.2)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        for (i, (lemma, _, v)) in rows[..shown].iter().enumerate() {
            let x = pad + (w - 2.0 * pad) * i as f64 / shown.max(2).saturating_sub(1) as f64;
            let y = h - pad - (h - 2.0 * pad) * (v - lo) / span;
            let _ = writeln!(svg, "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"2\" fill=\"{}\"/>", PALETTE[0]);
            if i < LABELED_WORDS {
                let _ = writeln!(
                    svg,
                    "<text x=\"{:.1}\" y=\"{:.1}\" transform=\"rotate(-45 {x:.1} {y:.1})\">{}</text>",
                    x + 3.0,
                    y - 3.0,
                    escape(lemma)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    (csv, svg)
}

fn heatmap_svg(d: &DistanceMatrix, title: &str) -> String {
    let m = d.size();
    let cell = (480.0 / m.max(1) as f64).clamp(2.0, 24.0);
    let size = cell * m as f64 + 60.0;
    let mut svg = svg_open(size, size);
    let _ = writeln!(svg, "<text x=\"10\" y=\"20\">{}</text>", escape(title));
    for i in 0..m {
        for j in 0..m {
            // darker means closer
            let shade = (255.0 * d.get(i, j).clamp(0.0, 1.0)).round() as u8;
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"rgb({shade},{shade},{shade})\"/>",
                30.0 + cell * j as f64,
                30.0 + cell * i as f64
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn scatter(coords: &[(f64, f64)], ids: &[(String, String)], title: &str) -> (String, String) {
    let mut csv = String::from("document_id,author,x,y\n");
    for ((x, y), (id, author)) in coords.iter().zip(ids) {
        let _ = writeln!(csv, "{id},{author},{x:?},{y:?}");
    }
    let mut authors: Vec<&str> = Vec::new();
    for (_, a) in ids {
        if !authors.contains(&a.as_str()) {
            authors.push(a);
        }
    }
    let (w, pad) = (480.0, 40.0);
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in coords {
        xlo = xlo.min(x);
        xhi = xhi.max(x);
        ylo = ylo.min(y);
        yhi = yhi.max(y);
    }
    let span = (xhi - xlo).max(yhi - ylo).max(1e-12);
    let mut svg = svg_open(w + 140.0, w);
    let _ = writeln!(svg, "<text x=\"{pad}\" y=\"20\">{}</text>", escape(title));
    for ((x, y), (_, author)) in coords.iter().zip(ids) {
        let k = authors.iter().position(|a| a == author).unwrap_or(0);
        let px = pad + (w - 2.0 * pad) * (x - xlo) / span;
        let py = w - pad - (w - 2.0 * pad) * (y - ylo) / span;
        let _ = writeln!(
            svg,
            "<circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"4\" fill=\"{}\"/>",
            PALETTE[k % PALETTE.len()]
        );
    }
    for (k, a) in authors.iter().enumerate() {
        let y = pad + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{y}\" r=\"4\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>",
            w + 10.0,
            PALETTE[k % PALETTE.len()],
            w + 20.0,
            y + 4.0,
            escape(a)
        );
    }
    svg.push_str("</svg>\n");
    (csv, svg)
}

fn score_bars(summary: &Summary) -> (String, String) {
    let mut csv = String::from("method,classifier,accuracy\n");
    for r in &summary.rows {
        let _ = writeln!(csv, "{},{},{:?}", r.method, r.classifier, r.accuracy);
    }
    let mut methods: Vec<&str> = Vec::new();
    for r in &summary.rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let (bar, pad, h) = (14.0, 40.0, 300.0);
    let w = pad * 2.0 + summary.rows.len() as f64 * (bar + 4.0) + methods.len() as f64 * 20.0 + 140.0;
    let mut svg = svg_open(w, h);
    let mut x = pad;
    let mut last = "";
    for r in &summary.rows {
        if r.method != last && !last.is_empty() {
            x += 20.0;
        }
        last = &r.method;
        let k = methods.iter().position(|m| *m == r.method).unwrap_or(0);
        let bh = (h - 2.0 * pad) * r.accuracy;
        let _ = writeln!(
            svg,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{bar}\" height=\"{bh:.1}\" fill=\"{}\"/>\
             <text x=\"{:.1}\" y=\"{:.1}\" transform=\"rotate(90 {:.1} {:.1})\">{}</text>",
            h - pad - bh,
            PALETTE[k % PALETTE.len()],
            x + 3.0,
            h - pad + 4.0,
            x + 3.0,
            h - pad + 4.0,
            escape(&r.classifier)
        );
        x += bar + 4.0;
    }
    for (k, m) in methods.iter().enumerate() {
        let y = pad + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"8\" height=\"8\" fill=\"{}\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            x + 20.0,
            y - 8.0,
            PALETTE[k % PALETTE.len()],
            x + 32.0,
            y,
            escape(m)
        );
    }
    svg.push_str("</svg>\n");
    (csv, svg)
}

/// Writes plot data and SVG renderings under `<output_dir>/plots/`:
/// ranked metric lists per document, distance heatmaps, 2-D MDS scatter
/// coordinates, and accuracy bars. Returns the files written.
pub fn export_plots(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let out = &cfg.output_dir;
    let labels = read_labels(&require(out.join("labels.csv"), "run")?)?;
    let plots = out.join("plots");
    let mut written = Vec::new();
    let mut emit = |path: PathBuf, content: &str| -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_file(&path, content)?;
        written.push(path);
        Ok(())
    };

    for (id, _) in &labels {
        let table = NodeMetricTable::read_csv(id, &require(metric_table_path(out, id), "run")?)?;
        for &metric in &cfg.metrics {
            let (csv, svg) = rank_list(&table, metric, cfg);
            let base = plots.join("ranks").join(metric.name()).join(file_stem(id));
            emit(base.with_extension("csv"), &csv)?;
            emit(base.with_extension("svg"), &svg)?;
        }
    }

    let mut matrices: Vec<String> = cfg.metrics.iter().map(|m| m.name().to_string()).collect();
    if out.join("dist_tfidf.csv").is_file() {
        matrices.push("tfidf".into());
    }
    for name in &matrices {
        let d = DistanceMatrix::read_csv(&require(out.join(format!("dist_{name}.csv")), "run")?)?;
        if d.document_ids.iter().ne(labels.iter().map(|(id, _)| id)) {
            return Err(Error::Mismatch(format!("dist_{name}.csv and labels.csv list different documents")));
        }
        emit(plots.join(format!("heatmap_{name}.csv")), &d.to_csv())?;
        emit(
            plots.join(format!("heatmap_{name}.svg")),
            &heatmap_svg(&d, &format!("distances: {name}")),
        )?;
        let e = mds_labeled(&d, 2, stage_seed(cfg.seed, &format!("plot:{name}")), name)?;
        let coords: Vec<(f64, f64)> = (0..e.len()).map(|i| (e.row(i)[0], e.row(i)[1])).collect();
        let (csv, svg) = scatter(&coords, &labels, &format!("2-D MDS: {name} (stress {:.4})", e.stress));
        emit(plots.join(format!("scatter_{name}.csv")), &csv)?;
        emit(plots.join(format!("scatter_{name}.svg")), &svg)?;
    }

    let summary = Summary::read_csv(&require(out.join("summary.csv"), "run")?)?;
    let (csv, svg) = score_bars(&summary);
    emit(plots.join("scores.csv"), &csv)?;
    emit(plots.join("scores.svg"), &svg)?;
    Ok(written)
}
