//! Oriented triangle meshes whose node positions change over time.
//!
//! A [`SurfaceMesh`] is a node list plus a triangle soup. Connectivity is
//! fixed at construction; only coordinates move (see [`SurfaceMesh::displaced`]).
//! Node-to-triangle incidence is built once and shared between snapshots.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// Topology shared by every snapshot of an evolving mesh.
#[derive(Debug)]
struct Topology {
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    /// CSR-style node -> incident triangle lists.
    incident_offsets: Vec<usize>,
    incident: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    nodes: Vec<Point>,
    topology: Arc<Topology>,
}

impl SurfaceMesh {
    /// Builds a mesh, checking index ranges, edge manifoldness, orientation
    /// consistency and that no triangle has zero area.
    pub fn new(nodes: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = nodes.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(Error::IndexOutOfRange {
                        triangle: t,
                        node: v,
                        node_count: n,
                    });
                }
            }
        }
        for (i, p) in nodes.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinite { node: i });
            }
        }

        let boundary = boundary_flags(n, &triangles)?;

        let mut counts = vec![0usize; n + 1];
        for tri in &triangles {
            for &v in tri {
                counts[v + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut incident = vec![0usize; counts[n]];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                incident[fill[v]] = t;
                fill[v] += 1;
            }
        }

        let mesh = SurfaceMesh {
            nodes,
            topology: Arc::new(Topology {
                triangles,
                boundary,
                incident_offsets: counts,
                incident,
            }),
        };
        for t in 0..mesh.triangle_count() {
            let area = mesh.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { triangle: t, area });
            }
        }
        Ok(mesh)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.topology.triangles.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.topology.triangles
    }

    pub fn boundary_nodes(&self) -> &[bool] {
        &self.topology.boundary
    }

    pub fn is_closed(&self) -> bool {
        !self.topology.boundary.iter().any(|&b| b)
    }

    /// Triangles incident to node `i`.
    pub fn incident_triangles(&self, i: usize) -> &[usize] {
        let o = &self.topology.incident_offsets;
        &self.topology.incident[o[i]..o[i + 1]]
    }

    /// Whether `other` shares this mesh's connectivity (same topology object).
    pub fn same_topology(&self, other: &SurfaceMesh) -> bool {
        Arc::ptr_eq(&self.topology, &other.topology)
    }

    pub fn vertices(&self, t: usize) -> [Point; 3] {
        let [i, j, k] = self.topology.triangles[t];
        [self.nodes[i], self.nodes[j], self.nodes[k]]
    }

    /// Twice the area times the unit normal of triangle `t`, following its winding.
    pub fn triangle_area_vector(&self, t: usize) -> Point {
        let [p0, p1, p2] = self.vertices(t);
        (p1 - p0).cross(&(p2 - p0))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.triangle_area_vector(t).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn mean_triangle_area(&self) -> f64 {
        self.surface_area() / self.triangle_count() as f64
    }

    /// Returns a new snapshot with node `i` moved by `displacement[i]`.
    /// Connectivity and boundary flags are shared with `self`.
    pub fn displaced(&self, displacement: &[Point]) -> Result<SurfaceMesh> {
        if displacement.len() != self.node_count() {
            return Err(Error::LengthMismatch {
                expected: self.node_count(),
                actual: displacement.len(),
            });
        }
        if let Some(i) = displacement
            .iter()
            .position(|d| !d.iter().all(|c| c.is_finite()))
        {
            return Err(Error::NonFinite { node: i });
        }
        let nodes = self
            .nodes
            .iter()
            .zip(displacement)
            .map(|(p, d)| p + d)
            .collect();
        Ok(SurfaceMesh {
            nodes,
            topology: Arc::clone(&self.topology),
        })
    }

    /// Same connectivity, replaced coordinates.
    pub fn with_nodes(&self, nodes: Vec<Point>) -> Result<SurfaceMesh> {
        if nodes.len() != self.node_count() {
            return Err(Error::LengthMismatch {
                expected: self.node_count(),
                actual: nodes.len(),
            });
        }
        Ok(SurfaceMesh {
            nodes,
            topology: Arc::clone(&self.topology),
        })
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut edges: Vec<(usize, usize)> = self
            .triangles()
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.node_count() as i64 - self.edge_count() as i64 + self.triangle_count() as i64
    }
}

/// Flags nodes touching an edge used by exactly one triangle.
fn boundary_flags(n: usize, triangles: &[[usize; 3]]) -> Result<Vec<bool>> {
    // directed edge -> number of occurrences
    let mut directed: HashMap<(usize, usize), u32> = HashMap::with_capacity(3 * triangles.len());
    for &[a, b, c] in triangles {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            let count = directed.entry((u, v)).or_insert(0);
            *count += 1;
            if *count > 1 {
                return Err(Error::InconsistentOrientation { from: u, to: v });
            }
        }
    }
    let mut boundary = vec![false; n];
    let mut incident = vec![false; n];
    for &(u, v) in directed.keys() {
        incident[u] = true;
        incident[v] = true;
        if !directed.contains_key(&(v, u)) {
            boundary[u] = true;
            boundary[v] = true;
        }
    }
    // A third triangle on an edge necessarily repeats a direction, so
    // manifoldness is covered by the orientation check above.
    if let Some(i) = incident.iter().position(|&used| !used) {
        return Err(Error::IsolatedNode { node: i });
    }
    Ok(boundary)
}

/// Per-node outward unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeNormals(pub Vec<Point>);

impl NodeNormals {
    pub fn as_slice(&self) -> &[Point] {
        &self.0
    }
}

/// Area-weighted average of incident triangle normals, normalised.
///
/// Summing the raw cross products weights each face by twice its area, so no
/// explicit area factor is needed.
pub fn compute_node_normals(mesh: &SurfaceMesh) -> Result<NodeNormals> {
    let face: Vec<Point> = (0..mesh.triangle_count())
        .map(|t| mesh.triangle_area_vector(t))
        .collect();
    let mut normals = Vec::with_capacity(mesh.node_count());
    for i in 0..mesh.node_count() {
        let incident = mesh.incident_triangles(i);
        if incident.is_empty() {
            return Err(Error::IsolatedNode { node: i });
        }
        let sum: Point = incident.iter().map(|&t| face[t]).sum();
        let len = sum.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::DegenerateNormal { node: i });
        }
        normals.push(sum / len);
    }
    Ok(NodeNormals(normals))
}

/// Per-triangle shape metrics, reduced to their extremes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// Smallest interior angle over all triangles, in degrees.
    pub min_angle_deg: f64,
    pub min_area: f64,
    /// Largest `longest edge / (2 sqrt(3) inradius)`; 1 for equilateral.
    pub max_aspect_ratio: f64,
}

fn angle_between(u: &Point, v: &Point) -> f64 {
    u.cross(v).norm().atan2(u.dot(v))
}

/// Interior angles (radians) of triangle `t` at its three corners.
pub fn triangle_angles(mesh: &SurfaceMesh, t: usize) -> [f64; 3] {
    let [p0, p1, p2] = mesh.vertices(t);
    [
        angle_between(&(p1 - p0), &(p2 - p0)),
        angle_between(&(p2 - p1), &(p0 - p1)),
        angle_between(&(p0 - p2), &(p1 - p2)),
    ]
}

pub fn mesh_quality(mesh: &SurfaceMesh) -> QualityReport {
    let mut report = QualityReport {
        min_angle_deg: f64::INFINITY,
        min_area: f64::INFINITY,
        max_aspect_ratio: 0.0,
    };
    for t in 0..mesh.triangle_count() {
        let [p0, p1, p2] = mesh.vertices(t);
        let lengths = [(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()];
        let area = mesh.triangle_area(t);
        let perimeter: f64 = lengths.iter().sum();
        let longest = lengths.iter().copied().fold(0.0, f64::max);
        let aspect = if area > 0.0 {
            longest * perimeter / (4.0 * 3f64.sqrt() * area)
        } else {
            f64::INFINITY
        };
        let min_angle = triangle_angles(mesh, t)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            .to_degrees();
        report.min_angle_deg = report.min_angle_deg.min(min_angle);
        report.min_area = report.min_area.min(area);
        report.max_aspect_ratio = report.max_aspect_ratio.max(aspect);
    }
    report
}
