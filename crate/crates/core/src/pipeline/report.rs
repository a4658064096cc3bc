use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{EvalCell, SelectionResult};
use crate::kg::{layout_circular, WeightedGraph};
use crate::taxo::TaxonomyReport;
use crate::terms::{TopicMapData, TopicsDocument};

pub const REPORT_FILE: &str = "report.html";

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const W: f64 = 520.0;
const H: f64 = 320.0;
const MARGIN: f64 = 44.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionStatus {
    pub title: String,
    pub available: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOutcome {
    pub sections: Vec<SectionStatus>,
}

impl ReportOutcome {
    pub fn available(&self) -> usize {
        self.sections.iter().filter(|s| s.available).count()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn load<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Option<T> {
    let text = std::fs::read_to_string(dir.join(name)).ok()?;
    match serde_json::from_str(&text) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{name}: {e}");
            None
        }
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, a: f64, b: f64) -> Self {
        let (lo, hi) = if (hi - lo).abs() < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        Self { lo, hi, a, b }
    }

    fn map(&self, v: f64) -> f64 {
        self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// One polyline per algorithm over K.
fn line_chart(series: &BTreeMap<String, Vec<(usize, f64)>>, y_label: &str) -> String {
    let points: Vec<(usize, f64)> = series.values().flatten().copied().collect();
    if points.is_empty() {
        return "<p class=\"unavailable\">No values to plot.</p>\n".into();
    }
    let (kx0, kx1) = bounds(points.iter().map(|p| p.0 as f64));
    let (y0, y1) = bounds(points.iter().map(|p| p.1));
    let sx = Scale::new(kx0, kx1, MARGIN, W - MARGIN);
    let sy = Scale::new(y0, y1, H - MARGIN, MARGIN);
    let mut s = format!("<svg viewBox=\"0 0 {W} {H}\" width=\"{W}\" height=\"{H}\" role=\"img\">\n");
    let _ = writeln!(
        s,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#444\"/><line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"#444\"/>",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">K</text>", W / 2.0, H - 8.0);
    let _ = writeln!(s, "<text x=\"12\" y=\"{:.1}\" transform=\"rotate(-90 12 {:.1})\" text-anchor=\"middle\">{}</text>", H / 2.0, H / 2.0, esc(y_label));
    let ks: Vec<usize> = {
        let mut v: Vec<usize> = points.iter().map(|p| p.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for k in ks {
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{k}</text>", sx.map(k as f64), H - MARGIN + 14.0);
    }
    for v in [y0, y1] {
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{v:.3}</text>", MARGIN - 4.0, sy.map(v) + 3.0);
    }
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(k, y)| format!("{:.2},{:.2}", sx.map(k as f64), sy.map(y))).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>", path.join(" "));
        for &(k, y) in pts {
            let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"><title>{} K={k}: {y:.4}</title></circle>", sx.map(k as f64), sy.map(y), esc(name));
        }
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\" font-size=\"11\">{}</text>", W - MARGIN - 70.0, MARGIN + 14.0 * i as f64, esc(name));
    }
    s.push_str("</svg>\n");
    s
}

fn curve_series(cells: &[EvalCell], value: impl Fn(&EvalCell) -> Option<f64>) -> BTreeMap<String, Vec<(usize, f64)>> {
    let mut series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for c in cells {
        if let Some(v) = value(c) {
            series.entry(c.algorithm.clone()).or_default().push((c.k, v));
        }
    }
    for pts in series.values_mut() {
        pts.sort_by_key(|p| p.0);
        pts.dedup_by_key(|p| p.0);
    }
    series
}

fn curves_section(sel: &SelectionResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<p>Selected family <b>{}</b>; best cell <b>{}</b> at K = <b>{}</b> with coherence {:.4}.</p>",
        esc(&sel.best_family),
        esc(&sel.best_algorithm),
        sel.k_best,
        sel.best_cell.coherence
    );
    s.push_str("<h3>Pilot ranking</h3>\n<table><tr><th>Implementation</th><th>K</th><th>Coherence</th></tr>\n");
    for c in &sel.stage1_ranking {
        let _ = writeln!(s, "<tr><td>{}</td><td>{}</td><td>{:.4}</td></tr>", esc(&c.algorithm), c.k, c.coherence);
    }
    s.push_str("</table>\n<h3>Coherence by K</h3>\n");
    s.push_str(&line_chart(&curve_series(&sel.stage2_curve, |c| Some(c.coherence)), "C_v coherence"));
    s.push_str("<h3>Perplexity by K</h3>\n");
    s.push_str(&line_chart(&curve_series(&sel.stage2_curve, |c| c.perplexity), "held-out perplexity"));
    if !sel.failed.is_empty() {
        s.push_str("<h3>Failed cells</h3>\n<ul>\n");
        for f in &sel.failed {
            let _ = writeln!(s, "<li>{} K={}: {}</li>", esc(&f.algorithm), f.k, esc(&f.reason));
        }
        s.push_str("</ul>\n");
    }
    s
}

fn map_section(map: &TopicMapData, topics: Option<&TopicsDocument>) -> String {
    let (x0, x1) = bounds(map.coords.iter().map(|c| c[0]));
    let (y0, y1) = bounds(map.coords.iter().map(|c| c[1]));
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let size = H;
    let pad = 60.0;
    let sx = Scale::new(cx - span / 2.0, cx + span / 2.0, pad, size - pad);
    let sy = Scale::new(cy - span / 2.0, cy + span / 2.0, size - pad, pad);
    let mut s = format!("<svg viewBox=\"0 0 {size} {size}\" width=\"{size}\" height=\"{size}\" role=\"img\">\n");
    let _ = writeln!(s, "<line x1=\"{pad}\" y1=\"{m:.1}\" x2=\"{e:.1}\" y2=\"{m:.1}\" stroke=\"#ccc\"/><line x1=\"{m:.1}\" y1=\"{pad}\" x2=\"{m:.1}\" y2=\"{e:.1}\" stroke=\"#ccc\"/>", m = size / 2.0, e = size - pad);
    for (t, (c, &p)) in map.coords.iter().zip(&map.proportions).enumerate() {
        // area proportional to prevalence
        let r = 40.0 * p.max(0.0).sqrt();
        let label = topics
            .and_then(|d| d.topics.iter().find(|x| x.topic == t))
            .and_then(|x| x.top_concepts.first())
            .map(|c| format!(" ({})", c.term))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r:.2}\" fill=\"#1f77b4\" fill-opacity=\"0.35\" stroke=\"#1f77b4\"><title>Topic {t}: {:.1}%</title></circle>",
            sx.map(c[0]),
            sy.map(c[1]),
            100.0 * p
        );
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{t}{}</text>", sx.map(c[0]), sy.map(c[1]) + 4.0, esc(&label));
    }
    s.push_str("</svg>\n");
    s
}

fn concepts_section(doc: &TopicsDocument) -> String {
    let mut s = format!("<p>Relevance with &lambda; = {}.</p>\n", doc.lambda);
    for t in &doc.topics {
        let _ = writeln!(s, "<h3>Topic {}{}</h3>", t.topic, if t.short { " (fewer candidates than requested)" } else { "" });
        s.push_str("<table><tr><th>#</th><th>Concept</th><th>Saliency</th><th>Relevance</th></tr>\n");
        for (i, c) in t.top_concepts.iter().enumerate() {
            let _ = writeln!(s, "<tr><td>{}</td><td>{}</td><td>{:.4}</td><td>{:.4}</td></tr>", i + 1, esc(&c.term), c.saliency, c.relevance);
        }
        s.push_str("</table>\n");
    }
    s
}

fn graph_svg(graph: &WeightedGraph, positions: &[[f64; 2]]) -> String {
    let size = 480.0;
    let pad = 50.0;
    let (x0, x1) = bounds(positions.iter().map(|p| p[0]));
    let (y0, y1) = bounds(positions.iter().map(|p| p[1]));
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let sx = Scale::new(cx - span / 2.0, cx + span / 2.0, pad, size - pad);
    let sy = Scale::new(cy - span / 2.0, cy + span / 2.0, size - pad, pad);
    let index = graph.node_index();
    let max_w = graph.edges.iter().map(|e| e.weight).max().unwrap_or(1).max(1) as f64;
    let mut s = format!("<svg viewBox=\"0 0 {size} {size}\" width=\"{size}\" height=\"{size}\" role=\"img\">\n");
    for e in &graph.edges {
        let (a, b) = (positions[index[e.source.as_str()]], positions[index[e.target.as_str()]]);
        let width = 0.5 + 5.5 * e.weight as f64 / max_w;
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#888\" stroke-width=\"{width:.2}\"><title>{} {} {} ({})</title></line>",
            sx.map(a[0]),
            sy.map(a[1]),
            sx.map(b[0]),
            sy.map(b[1]),
            esc(&e.source),
            esc(&e.relation),
            esc(&e.target),
            e.weight
        );
    }
    for (n, p) in graph.nodes.iter().zip(positions) {
        let level = (235.0 - 185.0 * n.shade).round() as u8;
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"7\" fill=\"rgb({level},{level},{level})\" stroke=\"#222\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">{}</text>",
            sx.map(p[0]),
            sy.map(p[1]),
            sx.map(p[0]) + 9.0,
            sy.map(p[1]) - 6.0,
            esc(&n.id)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Deserialize)]
struct LayoutDoc {
    nodes: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    stress: Option<f64>,
}

fn taxonomy_section(r: &TaxonomyReport) -> String {
    let mut s = format!("<p>Average Jaccard similarity {:.4}.</p>\n", r.average);
    s.push_str("<table><tr><th>Topic</th><th>Theme</th><th>Jaccard</th></tr>\n");
    for m in &r.assignment {
        let _ = writeln!(
            s,
            "<tr><td>{}</td><td>{}</td><td>{:.4}</td></tr>",
            esc(&m.topic_name),
            m.theme_name.as_deref().map(esc).unwrap_or_else(|| "(unmatched)".into()),
            m.jaccard
        );
    }
    s.push_str("</table>\n");
    s
}

fn unavailable(missing: &str) -> String {
    format!("<p class=\"unavailable\">Unavailable: {} not found.</p>\n", esc(missing))
}

/// Write `report.html` from whatever artifacts exist in `dir`.
///
/// The page has five sections (model-selection curves, topic map, concept
/// tables, circular and spring concept graphs); a section whose inputs are
/// missing is marked unavailable. Output depends only on the artifacts.
pub fn emit_reports(dir: &Path) -> Result<ReportOutcome> {
    let selection: Option<SelectionResult> = load(dir, "selection.json");
    let map: Option<TopicMapData> = load(dir, "topic_map.json");
    let topics: Option<TopicsDocument> = load(dir, "topics.json");
    let graph: Option<WeightedGraph> = load(dir, "graph.json");
    let layout: Option<LayoutDoc> = load(dir, "kg_layout.json");
    let taxonomy: Option<TaxonomyReport> = load(dir, "taxonomy_report.json");

    let mut sections: Vec<(String, Option<String>, &str)> = Vec::new();
    sections.push((
        "Model selection".into(),
        selection.as_ref().map(curves_section),
        "selection.json",
    ));
    sections.push((
        "Inter-topic distance map".into(),
        map.as_ref().map(|m| map_section(m, topics.as_ref())),
        "topic_map.json",
    ));
    sections.push(("Concepts per topic".into(), topics.as_ref().map(concepts_section), "topics.json"));
    let circular = graph.as_ref().map(|g| match layout_circular(g) {
        Ok(l) => graph_svg(g, &l.positions),
        Err(_) => "<p>No cross-topic relations were found.</p>\n".into(),
    });
    sections.push(("Concept graph, circular layout".into(), circular, "graph.json"));
    let spring = match (&graph, &layout) {
        (Some(g), Some(_)) if g.nodes.is_empty() => Some("<p>No cross-topic relations were found.</p>\n".to_string()),
        (Some(g), Some(l)) => {
            let positions: Option<Vec<[f64; 2]>> = g.nodes.iter().map(|n| l.nodes.get(&n.id).copied()).collect();
            positions.map(|p| {
                let mut s = graph_svg(g, &p);
                if let Some(stress) = l.stress {
                    let _ = writeln!(s, "<p>Final stress {stress:.6}.</p>");
                }
                s
            })
        }
        _ => None,
    };
    sections.push(("Concept graph, spring layout".into(), spring, "graph.json and kg_layout.json"));

    let mut html = String::from(
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Topic taxonomy report</title>\n<style>\nbody{font-family:sans-serif;max-width:60em;margin:2em auto;color:#222}\ntable{border-collapse:collapse;margin:.5em 0}\ntd,th{border:1px solid #ccc;padding:2px 8px;text-align:left}\n.unavailable{color:#a00;font-style:italic}\nsvg{background:#fafafa;border:1px solid #eee}\n</style>\n</head>\n<body>\n<h1>Topic taxonomy report</h1>\n",
    );
    let mut statuses = Vec::new();
    for (i, (title, body, needs)) in sections.iter().enumerate() {
        let _ = writeln!(html, "<section id=\"s{}\">\n<h2>{}. {}</h2>", i + 1, i + 1, esc(title));
        match body {
            Some(b) => html.push_str(b),
            None => html.push_str(&unavailable(needs)),
        }
        html.push_str("</section>\n");
        statuses.push(SectionStatus {
            title: title.clone(),
            available: body.is_some(),
        });
    }
    if let Some(t) = &taxonomy {
        html.push_str("<section id=\"taxonomy\">\n<h2>Reference taxonomy comparison</h2>\n");
        html.push_str(&taxonomy_section(t));
        html.push_str("</section>\n");
    }
    html.push_str("</body>\n</html>\n");
    let path = dir.join(REPORT_FILE);
    std::fs::write(&path, html).map_err(|e| Error::io(&path, e))?;
    Ok(ReportOutcome { sections: statuses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_directory_marks_everything_unavailable() {
        let dir = tempfile::tempdir().unwrap();
        let r = emit_reports(dir.path()).unwrap();
        assert_eq!(r.sections.len(), 5);
        assert_eq!(r.available(), 0);
        let html = std::fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap();
        assert_eq!(html.matches("class=\"unavailable\"").count(), 5);
    }

    #[test]
    fn selection_only_renders_curves() {
        let dir = tempfile::tempdir().unwrap();
        let cell = |k, c| EvalCell::scored("LDA", "LDA", k, c);
        let sel = SelectionResult {
            best_family: "LDA".into(),
            best_algorithm: "LDA".into(),
            k_best: 3,
            best_cell: cell(3, 0.5),
            stage1_ranking: vec![cell(2, 0.4)],
            stage2_curve: vec![cell(2, 0.4), cell(3, 0.5)],
            failed: vec![],
        };
        std::fs::write(dir.path().join("selection.json"), serde_json::to_string(&sel).unwrap()).unwrap();
        let r = emit_reports(dir.path()).unwrap();
        assert!(r.sections[0].available);
        assert_eq!(r.available(), 1);
        let first = std::fs::read(dir.path().join(REPORT_FILE)).unwrap();
        emit_reports(dir.path()).unwrap();
        assert_eq!(first, std::fs::read(dir.path().join(REPORT_FILE)).unwrap());
    }
}
