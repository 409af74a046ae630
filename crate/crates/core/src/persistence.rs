//! Persistence of Mapper graphs filtered by mean filter values, the total
//! persistence loss, and its subgradient with respect to filter parameters.
//!
//! Nodes take the mean filter value of their members and edges the max of
//! their endpoints. Extended persistence is computed as ordinary persistence
//! of the cone `K * w` over Z/2: the graph `K` enters in ascending order,
//! then the apex is joined to every simplex in descending order. In the
//! descending sweep an edge enters at the *min* of its endpoint values so
//! that every cone simplex follows its faces.
//!
//! Every diagram coordinate is the value of one node, so each point carries
//! the node ids realizing its birth and death; the subgradient is assembled
//! from those.

use std::cmp::Ordering;

use crate::cloud::PointCloud;
use crate::cluster::Clusterer;
use crate::cover::CoverAssignment;
use crate::error::{Error, Result};
use crate::filter::{FilterFamily, FilterParams, FilterValues};
use crate::mapper::{self, MapperGraph};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PersistenceMode {
    Regular,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointClass {
    /// Sublevel 0-dimensional class (regular persistence).
    H0,
    Ord0,
    Ext0,
    Ext1,
    Rel1,
}

impl PointClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PointClass::H0 => "H0",
            PointClass::Ord0 => "Ord0",
            PointClass::Ext0 => "Ext0",
            PointClass::Ext1 => "Ext1",
            PointClass::Rel1 => "Rel1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
    pub class: PointClass,
    pub birth_node: usize,
    pub death_node: Option<usize>,
}

impl DiagramPoint {
    pub fn persistence(&self) -> f64 {
        (self.birth - self.death).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagram {
    pub points: Vec<DiagramPoint>,
}

impl Diagram {
    pub fn count(&self, class: PointClass) -> usize {
        self.points.iter().filter(|p| p.class == class).count()
    }

    /// `(birth, death)` pairs of one class, sorted.
    pub fn pairs(&self, class: PointClass) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.class == class)
            .map(|p| (p.birth, p.death))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        out
    }

    /// CSV with header `class,birth,death,birth_node,death_node`; an absent
    /// death node is written as an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,birth,death,birth_node,death_node\n");
        for p in &self.points {
            let death_node = p.death_node.map(|d| d.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.class.as_str(),
                p.birth,
                p.death,
                p.birth_node,
                death_node
            ));
        }
        out
    }
}

pub fn total_persistence(diagram: &Diagram) -> f64 {
    diagram.points.iter().map(DiagramPoint::persistence).sum()
}

/// A Mapper graph with filtration values on its simplices.
#[derive(Debug, Clone)]
pub struct FilteredGraph<'g> {
    pub graph: &'g MapperGraph,
    /// Mean filter value of each node's members.
    pub node_values: Vec<f64>,
    /// Max of the endpoint values (ascending sweep).
    pub edge_values: Vec<f64>,
    /// Endpoint realizing `edge_values`; ties go to the smaller node id.
    pub edge_argmax: Vec<usize>,
    /// Min of the endpoint values (descending sweep).
    pub edge_lower_values: Vec<f64>,
    /// Endpoint realizing `edge_lower_values`; ties go to the smaller node id.
    pub edge_argmin: Vec<usize>,
}

impl<'g> FilteredGraph<'g> {
    /// Filtration from explicit node values; edges take the max (ascending)
    /// and min (descending) of their endpoints.
    pub fn with_node_values(graph: &'g MapperGraph, node_values: Vec<f64>) -> Self {
        assert_eq!(node_values.len(), graph.nodes.len(), "one value per node");
        let m = graph.edges.len();
        let mut fg = FilteredGraph {
            graph,
            node_values,
            edge_values: Vec::with_capacity(m),
            edge_argmax: Vec::with_capacity(m),
            edge_lower_values: Vec::with_capacity(m),
            edge_argmin: Vec::with_capacity(m),
        };
        for e in &graph.edges {
            let (u, v) = (e.source.min(e.target), e.source.max(e.target));
            let (fu, fv) = (fg.node_values[u], fg.node_values[v]);
            let hi = if fv > fu { v } else { u };
            let lo = if fv < fu { v } else { u };
            fg.edge_values.push(fg.node_values[hi]);
            fg.edge_argmax.push(hi);
            fg.edge_lower_values.push(fg.node_values[lo]);
            fg.edge_argmin.push(lo);
        }
        fg
    }

    /// Gradient of node `v`'s value: the mean Jacobian row of its members.
    pub fn node_gradient(&self, v: usize, fv: &FilterValues) -> Vec<f64> {
        let members = &self.graph.nodes[v].members;
        let mut g = vec![0.0; fv.n_params()];
        for &i in members {
            for (acc, d) in g.iter_mut().zip(fv.jacobian_row(i)) {
                *acc += d;
            }
        }
        let scale = 1.0 / members.len() as f64;
        g.iter_mut().for_each(|x| *x *= scale);
        g
    }
}

pub fn map_pers_filtration<'g>(
    graph: &'g MapperGraph,
    filter_values: &[f64],
) -> Result<FilteredGraph<'g>> {
    let mut node_values = Vec::with_capacity(graph.nodes.len());
    for node in &graph.nodes {
        let mut sum = 0.0;
        for &i in &node.members {
            sum += *filter_values.get(i).ok_or_else(|| {
                Error::invalid(format!("no filter value for point {i}"))
            })?;
        }
        node_values.push(sum / node.members.len() as f64);
    }
    Ok(FilteredGraph::with_node_values(graph, node_values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Simplex {
    Apex,
    Vertex(usize),
    Edge(usize),
    ConeVertex(usize),
    ConeEdge(usize),
}

impl Simplex {
    fn ascending(self) -> bool {
        matches!(self, Simplex::Vertex(_) | Simplex::Edge(_))
    }
}

/// Z/2 column reduction, left to right. Columns are sorted row indices;
/// returns `low[j]` for every column that does not reduce to zero.
fn reduce(mut columns: Vec<Vec<usize>>) -> Vec<Option<usize>> {
    let n = columns.len();
    let mut pivot_col: Vec<Option<usize>> = vec![None; n];
    let mut lows = vec![None; n];
    for j in 0..n {
        let mut col = std::mem::take(&mut columns[j]);
        while let Some(&low) = col.last() {
            match pivot_col[low] {
                Some(k) => col = symmetric_difference(&col, &columns[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_col[low] = Some(j);
            lows[j] = Some(low);
        }
        columns[j] = col;
    }
    lows
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn extended_persistence(fg: &FilteredGraph) -> Diagram {
    let graph = fg.graph;
    let (nv, ne) = (graph.nodes.len(), graph.edges.len());
    if nv == 0 {
        return Diagram::default();
    }

    // (value, dimension, id, simplex)
    let mut ascending: Vec<(f64, u8, usize, Simplex)> = (0..nv)
        .map(|v| (fg.node_values[v], 0, v, Simplex::Vertex(v)))
        .chain((0..ne).map(|e| (fg.edge_values[e], 1, e, Simplex::Edge(e))))
        .collect();
    ascending.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut descending: Vec<(f64, u8, usize, Simplex)> = (0..nv)
        .map(|v| (fg.node_values[v], 1, v, Simplex::ConeVertex(v)))
        .chain((0..ne).map(|e| (fg.edge_lower_values[e], 2, e, Simplex::ConeEdge(e))))
        .collect();
    descending.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let order: Vec<Simplex> = std::iter::once(Simplex::Apex)
        .chain(ascending.iter().map(|s| s.3))
        .chain(descending.iter().map(|s| s.3))
        .collect();
    let mut vertex_pos = vec![0; nv];
    let mut edge_pos = vec![0; ne];
    let mut cone_vertex_pos = vec![0; nv];
    for (pos, s) in order.iter().enumerate() {
        match *s {
            Simplex::Vertex(v) => vertex_pos[v] = pos,
            Simplex::Edge(e) => edge_pos[e] = pos,
            Simplex::ConeVertex(v) => cone_vertex_pos[v] = pos,
            _ => {}
        }
    }
    let columns: Vec<Vec<usize>> = order
        .iter()
        .map(|s| {
            let mut col = match *s {
                Simplex::Apex | Simplex::Vertex(_) => vec![],
                Simplex::Edge(e) => {
                    let edge = &graph.edges[e];
                    vec![vertex_pos[edge.source], vertex_pos[edge.target]]
                }
                Simplex::ConeVertex(v) => vec![0, vertex_pos[v]],
                Simplex::ConeEdge(e) => {
                    let edge = &graph.edges[e];
                    vec![
                        edge_pos[e],
                        cone_vertex_pos[edge.source],
                        cone_vertex_pos[edge.target],
                    ]
                }
            };
            col.sort_unstable();
            col
        })
        .collect();

    // value and realizing node of a simplex, in the sweep it belongs to
    let coordinate = |s: Simplex| -> (f64, usize) {
        match s {
            Simplex::Vertex(v) | Simplex::ConeVertex(v) => (fg.node_values[v], v),
            Simplex::Edge(e) => (fg.edge_values[e], fg.edge_argmax[e]),
            Simplex::ConeEdge(e) => (fg.edge_lower_values[e], fg.edge_argmin[e]),
            Simplex::Apex => unreachable!("the apex is never paired"),
        }
    };

    let mut points = Vec::new();
    for (j, low) in reduce(columns).into_iter().enumerate() {
        let Some(i) = low else { continue };
        let (born, died) = (order[i], order[j]);
        let class = match (born.ascending(), died.ascending(), born) {
            (true, true, _) => PointClass::Ord0,
            (false, false, _) => PointClass::Rel1,
            (true, false, Simplex::Vertex(_)) => PointClass::Ext0,
            (true, false, _) => PointClass::Ext1,
            (false, true, _) => unreachable!("descending simplices never die ascending"),
        };
        let (birth, birth_node) = coordinate(born);
        let (death, death_node) = coordinate(died);
        if birth == death && matches!(class, PointClass::Ord0 | PointClass::Rel1) {
            continue;
        }
        points.push(DiagramPoint {
            birth,
            death,
            class,
            birth_node,
            death_node: Some(death_node),
        });
    }
    Diagram { points }
}

/// Sublevel 0-dimensional persistence. Each merge kills the younger
/// component (larger minimum, ties to the larger node id); every surviving
/// component is paired with the global maximum of the node values.
pub fn regular_persistence(fg: &FilteredGraph) -> Diagram {
    let graph = fg.graph;
    let nv = graph.nodes.len();
    if nv == 0 {
        return Diagram::default();
    }
    let key = |v: usize| (fg.node_values[v], v);
    let older = |a: usize, b: usize| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)) == Ordering::Less
    };

    let mut events: Vec<(f64, u8, usize)> = (0..nv)
        .map(|v| (fg.node_values[v], 0, v))
        .chain((0..graph.edges.len()).map(|e| (fg.edge_values[e], 1, e)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut uf = UnionFind::new(nv);
    // oldest vertex of the component rooted at each root
    let mut birth_of = (0..nv).collect::<Vec<_>>();
    let mut points = Vec::new();
    for (value, dim, id) in events {
        if dim == 0 {
            continue;
        }
        let edge = &graph.edges[id];
        let (ra, rb) = (uf.find(edge.source), uf.find(edge.target));
        if ra == rb {
            continue;
        }
        let (ba, bb) = (birth_of[ra], birth_of[rb]);
        let (elder, younger) = if older(ba, bb) { (ba, bb) } else { (bb, ba) };
        if fg.node_values[younger] != value {
            points.push(DiagramPoint {
                birth: fg.node_values[younger],
                death: value,
                class: PointClass::H0,
                birth_node: younger,
                death_node: Some(fg.edge_argmax[id]),
            });
        }
        uf.union(ra, rb);
        let root = uf.find(ra);
        birth_of[root] = elder;
    }

    let top = (0..nv)
        .max_by(|&a, &b| {
            fg.node_values[a]
                .total_cmp(&fg.node_values[b])
                .then(b.cmp(&a))
        })
        .expect("graph has nodes");
    let mut roots: Vec<usize> = (0..nv).map(|v| uf.find(v)).collect();
    roots.sort_unstable();
    roots.dedup();
    for root in roots {
        let born = birth_of[root];
        points.push(DiagramPoint {
            birth: fg.node_values[born],
            death: fg.node_values[top],
            class: PointClass::H0,
            birth_node: born,
            death_node: Some(top),
        });
    }
    Diagram { points }
}

pub fn diagram(fg: &FilteredGraph, mode: PersistenceMode) -> Diagram {
    match mode {
        PersistenceMode::Regular => regular_persistence(fg),
        PersistenceMode::Extended => extended_persistence(fg),
    }
}

/// Subgradient of the total persistence of `diagram` with respect to the
/// filter parameters. Each point contributes
/// `sign(birth - death) * (grad birth - grad death)`, with `sign(0) = 0`.
pub fn total_persistence_gradient(
    fg: &FilteredGraph,
    diagram: &Diagram,
    fv: &FilterValues,
) -> Vec<f64> {
    let mut grad = vec![0.0; fv.n_params()];
    if fv.n_params() == 0 {
        return grad;
    }
    let mut node_grads: Vec<Option<Vec<f64>>> = vec![None; fg.graph.nodes.len()];
    let mut node_grad = |v: usize| -> Vec<f64> {
        node_grads[v]
            .get_or_insert_with(|| fg.node_gradient(v, fv))
            .clone()
    };
    for p in &diagram.points {
        let sign = match p.birth.partial_cmp(&p.death) {
            Some(Ordering::Greater) => 1.0,
            Some(Ordering::Less) => -1.0,
            _ => continue,
        };
        let gb = node_grad(p.birth_node);
        let gd = p.death_node.map(&mut node_grad);
        for k in 0..grad.len() {
            let d = gd.as_ref().map_or(0.0, |g| g[k]);
            grad[k] += sign * (gb[k] - d);
        }
    }
    grad
}

/// Total persistence of a fixed graph under the given filter values, with its
/// subgradient.
pub fn graph_loss_and_subgradient(
    graph: &MapperGraph,
    fv: &FilterValues,
    mode: PersistenceMode,
) -> Result<(f64, Vec<f64>)> {
    let fg = map_pers_filtration(graph, &fv.values)?;
    let dgm = diagram(&fg, mode);
    Ok((
        total_persistence(&dgm),
        total_persistence_gradient(&fg, &dgm, fv),
    ))
}

/// Loss of one cover assignment: total persistence of the Mapper graph of `e`
/// filtered by `f_theta`, and a subgradient in `theta` at fixed `e`.
pub fn loss_and_subgradient(
    cloud: &PointCloud,
    e: &CoverAssignment,
    filter: &dyn FilterFamily,
    params: &FilterParams,
    clusterer: &Clusterer,
    mode: PersistenceMode,
) -> Result<(f64, Vec<f64>)> {
    let fv = filter.evaluate(cloud, params)?;
    let graph = mapper::map_comp(cloud, e, clusterer)?;
    graph_loss_and_subgradient(&graph, &fv, mode)
}
