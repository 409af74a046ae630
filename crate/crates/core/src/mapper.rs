//! Mapper graph construction from a cover assignment: cluster each latent
//! cover element, then take the 1-skeleton of the nerve.

use std::cmp::Ordering;

use crate::cloud::PointCloud;
use crate::cluster::Clusterer;
use crate::cover::CoverAssignment;
use crate::error::Result;
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapperNode {
    pub id: usize,
    /// 0-based index of the cover element the cluster came from.
    pub cover_index: usize,
    /// Sorted point indices.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MapperEdge {
    pub source: usize,
    pub target: usize,
    /// Number of points shared by the two clusters.
    pub weight: usize,
}

/// Nodes are clusters; an edge joins two nodes whose member sets intersect.
/// Edges are stored with `source < target`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MapperGraph {
    pub nodes: Vec<MapperNode>,
    pub edges: Vec<MapperEdge>,
}

impl MapperGraph {
    /// Build the nerve of a list of clusters: node `k` gets id `k`.
    pub fn from_clusters(clusters: Vec<(usize, Vec<usize>)>) -> Self {
        let nodes: Vec<MapperNode> = clusters
            .into_iter()
            .enumerate()
            .map(|(id, (cover_index, mut members))| {
                members.sort_unstable();
                members.dedup();
                MapperNode {
                    id,
                    cover_index,
                    members,
                }
            })
            .collect();
        let mut edges = Vec::new();
        for (u, a) in nodes.iter().enumerate() {
            for (v, b) in nodes.iter().enumerate().skip(u + 1) {
                let weight = intersection_size(&a.members, &b.members);
                if weight > 0 {
                    edges.push(MapperEdge {
                        source: u,
                        target: v,
                        weight,
                    });
                }
            }
        }
        Self { nodes, edges }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Components as sorted node-id lists, ordered by smallest id.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.nodes.len());
        for e in &self.edges {
            uf.union(e.source, e.target);
        }
        uf.groups()
    }

    /// First Betti number `#edges - #nodes + #components`.
    pub fn betti_1(&self) -> usize {
        self.edges.len() + self.connected_components().len() - self.nodes.len()
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Mapper graph of a latent cover assignment. Columns with empty support
/// produce no nodes; node ids follow (cover index, cluster order).
pub fn map_comp(
    cloud: &PointCloud,
    e: &CoverAssignment,
    clusterer: &Clusterer,
) -> Result<MapperGraph> {
    let mut clusters = Vec::new();
    for j in 0..e.r {
        let support = e.column(j);
        if support.is_empty() {
            continue;
        }
        for c in clusterer.cluster(cloud, &support)? {
            clusters.push((j, c));
        }
    }
    Ok(MapperGraph::from_clusters(clusters))
}
