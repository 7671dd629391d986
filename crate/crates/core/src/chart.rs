//! Bigraded charts: a JSON document that is the source of truth, and an SVG
//! rendering computed from nothing but that document.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cobar::ExtAtlas;
use crate::slice::{
    d1_arrows, in_am_region, region_e2_columns, slice_decomposition, ArrowKind, SliceError, Variant, Window,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    SliceE1,
    RegionE2,
}

impl ChartKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChartKind::SliceE1 => "slice-e1",
            ChartKind::RegionE2 => "region-e2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartSummand {
    pub s: i64,
    pub two_t: i64,
    pub group: String,
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartCell {
    pub m: i64,
    pub n: i64,
    pub t: i64,
    pub summands: Vec<ChartSummand>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartArrow {
    pub from: [i64; 3],
    pub to: [i64; 3],
    pub kind: String,
    pub q: i64,
    pub j: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guides {
    pub primes: Vec<u64>,
    pub am_curve: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub slice_t_max: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    pub kind: ChartKind,
    pub window: Window,
    pub variant: String,
    pub cells: Vec<ChartCell>,
    pub arrows: Vec<ChartArrow>,
    pub guides: Guides,
    pub coverage: Coverage,
    pub warnings: Vec<String>,
}

impl Chart {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("chart serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Chart, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn variant_name(variant: Variant) -> String {
    match variant {
        Variant::Integral => "integral".into(),
        Variant::PLocal(p) => format!("p-local:{p}"),
    }
}

fn arrow_kind(kind: ArrowKind) -> String {
    match kind {
        ArrowKind::TauPr => "tau_pr".into(),
        ArrowKind::Tau => "tau".into(),
    }
}

/// Odd primes whose lines `n = (p-1)m/(p-2)` are drawn.
pub const DEFAULT_GUIDE_PRIMES: [u64; 2] = [3, 5];

/// Summands of the slices `0 ≤ t ≤ min(n_max, coverage)` placed at their
/// suspensions, with the `d1` arrows between cells in the window.
pub fn slice_e1_chart(window: Window, variant: Variant, atlas: &ExtAtlas) -> Result<Chart, SliceError> {
    let coverage = match variant {
        Variant::Integral => (atlas.mu_t_max() / 2) as i64,
        Variant::PLocal(p) => atlas.table(p).map_or(-1, |t| (t.t_max / 2) as i64),
    };
    let mut warnings = Vec::new();
    if window.n_max > coverage {
        warnings.push(format!(
            "cells with n > {coverage} are outside the computed Ext window and are not drawn"
        ));
    }
    let mut cells = Vec::new();
    for t in window.n_min.max(0)..=window.n_max.min(coverage) {
        for summand in slice_decomposition(t, variant, atlas)? {
            if !window.contains(summand.m, summand.n) {
                continue;
            }
            cells.push(ChartCell {
                m: summand.m,
                n: summand.n,
                t,
                summands: vec![ChartSummand {
                    s: summand.s,
                    two_t: summand.two_t,
                    group: summand.coefficient.to_string(),
                    label: summand.label.map(|l| l.to_string()),
                }],
            });
        }
    }
    cells.sort_by_key(|c| (c.m, c.n, c.t));

    let mut arrows = Vec::new();
    if variant == Variant::Integral && !window.is_empty() {
        let reach = window.n_max.max(0);
        for a in d1_arrows(reach / 4 + 1, reach) {
            let (src, dst) = (&a.source, &a.target);
            if window.contains(src.m, src.n)
                && window.contains(dst.m, dst.n)
                && dst.slice_degree <= coverage
            {
                arrows.push(ChartArrow {
                    from: [src.m, src.n, src.slice_degree],
                    to: [dst.m, dst.n, dst.slice_degree],
                    kind: arrow_kind(a.kind),
                    q: a.q,
                    j: a.j,
                });
            }
        }
    }
    arrows.sort_by_key(|a| (a.from, a.to));

    let primes = match variant {
        Variant::Integral => DEFAULT_GUIDE_PRIMES.to_vec(),
        Variant::PLocal(p) => vec![p],
    };
    Ok(Chart {
        kind: ChartKind::SliceE1,
        window,
        variant: variant_name(variant),
        cells,
        arrows,
        guides: Guides { primes, am_curve: variant == Variant::Integral },
        coverage: Coverage { slice_t_max: Some(coverage) },
        warnings,
    })
}

/// `E2` survivors of the monomial summands inside the Andrews–Miller region.
pub fn region_e2_chart(window: Window) -> Result<Chart, SliceError> {
    let columns = region_e2_columns(&window)?;
    let cells = columns
        .survivors
        .iter()
        .map(|p| {
            let (s, two_t) = p.monomial.bidegree();
            ChartCell {
                m: p.m,
                n: p.n,
                t: p.n,
                summands: vec![ChartSummand {
                    s,
                    two_t,
                    group: "Z/2".into(),
                    label: Some(p.monomial.to_string()),
                }],
            }
        })
        .collect();
    let mut arrows = Vec::new();
    if !window.is_empty() {
        let reach = window.n_max.max(0);
        for a in d1_arrows(reach / 4 + 1, reach) {
            let (src, dst) = (&a.source, &a.target);
            if window.contains(src.m, src.n) && in_am_region(src.m, src.n) {
                arrows.push(ChartArrow {
                    from: [src.m, src.n, src.slice_degree],
                    to: [dst.m, dst.n, dst.slice_degree],
                    kind: arrow_kind(a.kind),
                    q: a.q,
                    j: a.j,
                });
            }
        }
    }
    arrows.sort_by_key(|a| (a.from, a.to));
    Ok(Chart {
        kind: ChartKind::RegionE2,
        window,
        variant: variant_name(Variant::Integral),
        cells,
        arrows,
        guides: Guides {
            primes: DEFAULT_GUIDE_PRIMES.to_vec(),
            am_curve: true,
        },
        coverage: Coverage { slice_t_max: None },
        warnings: columns.warnings,
    })
}

// ---- SVG -------------------------------------------------------------------

const CELL: f64 = 28.0;
const MARGIN: f64 = 48.0;

struct Frame {
    window: Window,
    height: f64,
}

impl Frame {
    fn x(&self, m: f64) -> f64 {
        MARGIN + (m - self.window.m_min as f64 + 0.5) * CELL
    }

    fn y(&self, n: f64) -> f64 {
        self.height - MARGIN - (n - self.window.n_min as f64 + 0.5) * CELL
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Clips the segment `n = slope·m + intercept`, `m ∈ [m0, m1]`, to the plot box.
fn clip_line(w: &Window, m0: f64, m1: f64, slope: f64, intercept: f64) -> Option<(f64, f64, f64, f64)> {
    let (lo_m, hi_m) = (w.m_min as f64 - 0.5, w.m_max as f64 + 0.5);
    let (lo_n, hi_n) = (w.n_min as f64 - 0.5, w.n_max as f64 + 0.5);
    let mut a = m0.max(lo_m);
    let mut b = m1.min(hi_m);
    if slope != 0.0 {
        let ma = (lo_n - intercept) / slope;
        let mb = (hi_n - intercept) / slope;
        let (ma, mb) = if ma < mb { (ma, mb) } else { (mb, ma) };
        a = a.max(ma);
        b = b.min(mb);
    } else if !(lo_n..=hi_n).contains(&intercept) {
        return None;
    }
    (a < b).then(|| (a, slope * a + intercept, b, slope * b + intercept))
}

/// Renders the chart; depends on nothing but `chart`.
pub fn render_svg(chart: &Chart) -> String {
    let w = chart.window;
    let cols = (w.m_max - w.m_min + 1).max(1) as f64;
    let rows = (w.n_max - w.n_min + 1).max(1) as f64;
    let width = 2.0 * MARGIN + cols * CELL;
    let height = 2.0 * MARGIN + rows * CELL;
    let f = Frame { window: w, height };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="9">"#
    );
    let _ = writeln!(out, r#"<title>{} chart ({})</title>"#, chart.kind.as_str(), escape(&chart.variant));
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    let _ = writeln!(out, r##"<g class="grid" stroke="#e4e4e4" stroke-width="1">"##);
    if !w.is_empty() {
        for m in w.m_min..=w.m_max {
            let x = f.x(m as f64);
            let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#, f.y(w.n_min as f64 - 0.5), f.y(w.n_max as f64 + 0.5));
        }
        for n in w.n_min..=w.n_max {
            let y = f.y(n as f64);
            let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, f.x(w.m_min as f64 - 0.5), f.x(w.m_max as f64 + 0.5));
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g class="axes" fill="#444444" text-anchor="middle">"##);
    if !w.is_empty() {
        let step_m = ((cols / 20.0).ceil() as i64).max(1);
        for m in (w.m_min..=w.m_max).filter(|m| (m - w.m_min) % step_m == 0) {
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{m}</text>"#, f.x(m as f64), height - MARGIN + 14.0);
        }
        let step_n = ((rows / 20.0).ceil() as i64).max(1);
        for n in (w.n_min..=w.n_max).filter(|n| (n - w.n_min) % step_n == 0) {
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{n}</text>"#, MARGIN - 14.0, f.y(n as f64) + 3.0);
        }
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">m</text>"#, width / 2.0, height - 12.0);
    let _ = writeln!(out, r#"<text x="14" y="{:.2}">nα</text>"#, height / 2.0);
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="guides" fill="none" stroke-width="1.5">"#);
    for p in chart.guides.primes.iter().filter(|p| **p > 2) {
        let slope = (*p as f64 - 1.0) / (*p as f64 - 2.0);
        if let Some((m0, n0, m1, n1)) = clip_line(&w, 0.0, f64::INFINITY, slope, 0.0) {
            let _ = writeln!(
                out,
                r##"<line class="plocal" data-prime="{p}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#3a6fb0" stroke-dasharray="4 3"/>"##,
                f.x(m0), f.y(n0), f.x(m1), f.y(n1)
            );
            let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" fill="#3a6fb0" stroke="none">p={p}</text>"##, f.x(m1) + 3.0, f.y(n1));
        }
    }
    if chart.guides.am_curve {
        // 2n = 3m + 5 up to the corner (5, 10), then 2n = 4m
        let pieces = [
            clip_line(&w, f64::NEG_INFINITY, 5.0, 1.5, 2.5),
            clip_line(&w, 5.0, f64::INFINITY, 2.0, 0.0),
        ];
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (m0, n0, m1, n1) in pieces.into_iter().flatten() {
            for pt in [(m0, n0), (m1, n1)] {
                if points.last() != Some(&pt) {
                    points.push(pt);
                }
            }
        }
        if points.len() >= 2 {
            let coords: Vec<String> = points.iter().map(|(m, n)| format!("{:.2},{:.2}", f.x(*m), f.y(*n))).collect();
            let _ = writeln!(out, r##"<polyline class="am-curve" points="{}" stroke="#b0413e"/>"##, coords.join(" "));
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g class="arrows" stroke="#7a4fa0" stroke-width="1.2">"##);
    for a in &chart.arrows {
        let dash = if a.kind == "tau_pr" { r#" stroke-dasharray="3 2""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line data-kind="{}" data-q="{}" data-j="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"{dash}/>"#,
            escape(&a.kind), a.q, a.j,
            f.x(a.from[0] as f64), f.y(a.from[1] as f64), f.x(a.to[0] as f64), f.y(a.to[1] as f64)
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="cells">"#);
    for c in &chart.cells {
        let (x, y) = (f.x(c.m as f64), f.y(c.n as f64));
        let title: Vec<String> = c
            .summands
            .iter()
            .map(|s| match &s.label {
                Some(l) => format!("{} ({l}) from E2^({},{})", s.group, s.s, s.two_t),
                None => format!("{} from E2^({},{})", s.group, s.s, s.two_t),
            })
            .collect();
        let fill = if c.summands.iter().any(|s| s.group.contains('Z') && !s.group.contains('/')) { "#222222" } else { "#d9822b" };
        let _ = writeln!(
            out,
            r#"<circle data-m="{}" data-n="{}" data-t="{}" cx="{x:.2}" cy="{y:.2}" r="4.5" fill="{fill}"><title>{}</title></circle>"#,
            c.m, c.n, c.t, escape(&title.join("; "))
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
