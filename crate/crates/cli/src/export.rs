//! Graph and learning-curve exporters.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use softmapper::mapper::MapperEdge;
use softmapper::{MapperGraph, MapperNode};

/// Eight samples of a viridis-like ramp, dark blue to yellow.
pub const RAMP: [&str; 8] = [
    "#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725",
];

/// Ramp entry for `value` on `[lo, hi]`; a degenerate range maps to the middle.
pub fn ramp_color(value: f64, lo: f64, hi: f64) -> &'static str {
    if hi <= lo || hi.is_nan() || lo.is_nan() || !value.is_finite() {
        return RAMP[RAMP.len() / 2];
    }
    let t = ((value - lo) / (hi - lo)).clamp(0.0, 1.0);
    RAMP[((t * RAMP.len() as f64) as usize).min(RAMP.len() - 1)]
}

fn color_range(colors: &[f64]) -> (f64, f64) {
    colors
        .iter()
        .filter(|c| c.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(c), hi.max(c))
        })
}

/// Undirected DOT rendering. Node ids are labels, member counts tooltips.
///
/// # Panics
///
/// If `colors` does not have one entry per node.
pub fn export_dot(graph: &MapperGraph, colors: &[f64]) -> String {
    assert_eq!(colors.len(), graph.nodes.len(), "one color per node");
    if graph.nodes.is_empty() {
        return "graph mapper { }\n".into();
    }
    let (lo, hi) = color_range(colors);
    let mut out = String::from("graph mapper {\n  node [shape=circle, style=filled];\n");
    for (node, &c) in graph.nodes.iter().zip(colors) {
        writeln!(
            out,
            "  {} [label=\"{}\", tooltip=\"{}\", fillcolor=\"{}\"];",
            node.id,
            node.id,
            node.members.len(),
            ramp_color(c, lo, hi)
        )
        .unwrap();
    }
    for e in &graph.edges {
        writeln!(out, "  {} -- {} [weight={}];", e.source, e.target, e.weight).unwrap();
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub cover_index: usize,
    pub members: Vec<usize>,
    pub value: f64,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub source: usize,
    pub target: usize,
    pub weight: usize,
}

/// On-disk form of a Mapper graph with a per-node value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl GraphDocument {
    /// `values` are stored as is; `colors` pick each node's ramp entry.
    pub fn new(graph: &MapperGraph, values: &[f64], colors: &[f64]) -> Self {
        assert_eq!(values.len(), graph.nodes.len(), "one value per node");
        assert_eq!(colors.len(), graph.nodes.len(), "one color per node");
        let (lo, hi) = color_range(colors);
        Self {
            nodes: graph
                .nodes
                .iter()
                .zip(values.iter().zip(colors))
                .map(|(n, (&value, &c))| NodeRecord {
                    id: n.id,
                    cover_index: n.cover_index,
                    members: n.members.clone(),
                    value,
                    color: ramp_color(c, lo, hi).to_string(),
                })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    source: e.source,
                    target: e.target,
                    weight: e.weight,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The graph and node values. Nodes are renumbered by position in the
    /// file, edges follow.
    pub fn to_graph(&self) -> Result<(MapperGraph, Vec<f64>), String> {
        let position = |id: usize| {
            self.nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| format!("edge refers to unknown node {id}"))
        };
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| MapperNode {
                id: k,
                cover_index: n.cover_index,
                members: n.members.clone(),
            })
            .collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let (a, b) = (position(e.source)?, position(e.target)?);
            edges.push(MapperEdge {
                source: a.min(b),
                target: a.max(b),
                weight: e.weight,
            });
        }
        edges.sort();
        let values = self.nodes.iter().map(|n| n.value).collect();
        Ok((MapperGraph { nodes, edges }, values))
    }
}

/// Standalone SVG polyline of `ys` against their index, with labelled axes.
pub fn learning_curve_svg(ys: &[f64], y_label: &str) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let finite: Vec<f64> = ys.iter().copied().filter(|y| y.is_finite()).collect();
    let (mut lo, mut hi) = color_range(&finite);
    if finite.is_empty() {
        (lo, hi) = (0.0, 1.0);
    } else if hi <= lo {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let span_x = (ys.len().max(2) - 1) as f64;
    let x = |i: usize| pad + (w - 2.0 * pad) * i as f64 / span_x;
    let y = |v: f64| h - pad - (h - 2.0 * pad) * (v - lo) / (hi - lo);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    writeln!(
        svg,
        "  <line x1=\"{pad}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n  <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{b}\" stroke=\"black\"/>",
        b = h - pad,
        r = w - pad
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">epoch</text>",
        w / 2.0,
        h - 15.0
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"15\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 {})\">{y_label}</text>",
        h / 2.0,
        h / 2.0
    )
    .unwrap();
    for (v, anchor_y) in [(lo, h - pad), (hi, pad)] {
        writeln!(
            svg,
            "  <text x=\"{}\" y=\"{anchor_y}\" text-anchor=\"end\" font-size=\"10\">{v:.3}</text>",
            pad - 4.0
        )
        .unwrap();
    }
    let points: Vec<String> = ys
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v)))
        .collect();
    writeln!(
        svg,
        "  <polyline fill=\"none\" stroke=\"#277f8e\" stroke-width=\"1.5\" points=\"{}\"/>",
        points.join(" ")
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}
