//! Initial domains: flat square sheets and icospheres.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::{Point, SurfaceMesh};

/// Target mesh spacing used when no resolution is given.
pub const DEFAULT_SPACING: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// Square `[0, edge]^2` in the plane `z = 0`.
    Square { edge: f64 },
    /// Sphere of the given radius centred at the origin.
    Sphere { radius: f64 },
}

/// `resolution` is the number of grid divisions per edge for squares and the
/// subdivision level for spheres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub resolution: u32,
}

impl DomainSpec {
    /// Domain with the resolution that gives spacing close to [`DEFAULT_SPACING`].
    pub fn with_default_resolution(kind: DomainKind) -> Self {
        let resolution = match kind {
            DomainKind::Square { edge } => ((edge / DEFAULT_SPACING).round() as u32).max(1),
            DomainKind::Sphere { radius } => {
                let mut level = 0;
                while icosphere_edge_length(radius, level) > DEFAULT_SPACING * (1.0 + 1e-9) {
                    level += 1;
                }
                level
            }
        };
        DomainSpec { kind, resolution }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DomainKind::Square { edge } => {
                if !(edge > 0.0 && edge.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "domain.edge",
                        reason: format!("must be positive, got {edge}"),
                    });
                }
                if self.resolution < 1 {
                    return Err(Error::InvalidParameter {
                        name: "domain.resolution",
                        reason: "square needs at least one division".into(),
                    });
                }
            }
            DomainKind::Sphere { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "domain.radius",
                        reason: format!("must be positive, got {radius}"),
                    });
                }
                if self.resolution > 9 {
                    return Err(Error::InvalidParameter {
                        name: "domain.resolution",
                        reason: format!("subdivision level {} is too large", self.resolution),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<SurfaceMesh> {
        self.validate()?;
        Ok(match self.kind {
            DomainKind::Square { edge } => generate_square(edge, self.resolution as usize),
            DomainKind::Sphere { radius } => generate_icosphere(radius, self.resolution),
        })
    }
}

/// Uniform `(n+1) x (n+1)` grid over `[0, edge]^2`, each quad split along
/// its `(i, j) -> (i+1, j+1)` diagonal, wound counter-clockwise seen from +z.
pub fn generate_square(edge: f64, n: usize) -> SurfaceMesh {
    assert!(n >= 1, "square needs at least one division");
    let stride = n + 1;
    let h = edge / n as f64;
    let mut nodes = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            nodes.push(Point::new(i as f64 * h, j as f64 * h, 0.0));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * stride + i;
            let v10 = v00 + 1;
            let v01 = v00 + stride;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    SurfaceMesh::new(nodes, triangles).expect("structured grid is a valid mesh")
}

const PHI: f64 = 1.618_033_988_749_895;

fn icosahedron() -> (Vec<Point>, Vec<[usize; 3]>) {
    let nodes = vec![
        Point::new(-1.0, PHI, 0.0),
        Point::new(1.0, PHI, 0.0),
        Point::new(-1.0, -PHI, 0.0),
        Point::new(1.0, -PHI, 0.0),
        Point::new(0.0, -1.0, PHI),
        Point::new(0.0, 1.0, PHI),
        Point::new(0.0, -1.0, -PHI),
        Point::new(0.0, 1.0, -PHI),
        Point::new(PHI, 0.0, -1.0),
        Point::new(PHI, 0.0, 1.0),
        Point::new(-PHI, 0.0, -1.0),
        Point::new(-PHI, 0.0, 1.0),
    ];
    let triangles = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (nodes, triangles)
}

/// Icosahedron subdivided `level` times by edge midpoints, every node
/// projected onto the sphere of radius `radius` about the origin.
pub fn generate_icosphere(radius: f64, level: u32) -> SurfaceMesh {
    let (mut nodes, mut triangles) = icosahedron();
    for p in nodes.iter_mut() {
        *p = p.normalize();
    }
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut refined = Vec::with_capacity(triangles.len() * 4);
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                nodes.push(((nodes[a] + nodes[b]) * 0.5).normalize());
                nodes.len() - 1
            })
        };
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut nodes);
            let bc = midpoint(b, c, &mut nodes);
            let ca = midpoint(c, a, &mut nodes);
            refined.push([a, ab, ca]);
            refined.push([b, bc, ab]);
            refined.push([c, ca, bc]);
            refined.push([ab, bc, ca]);
        }
        triangles = refined;
    }
    for p in nodes.iter_mut() {
        *p *= radius;
    }
    SurfaceMesh::new(nodes, triangles).expect("icosphere is a valid mesh")
}

/// Approximate edge length of an icosphere of the given radius and level.
pub fn icosphere_edge_length(radius: f64, level: u32) -> f64 {
    // icosahedron circumradius / edge = sin(2 pi / 5)
    let base = 1.0 / (2.0 * std::f64::consts::PI / 5.0).sin();
    radius * base / f64::from(1u32 << level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn square_counts() {
        let m = generate_square(1.0, 1);
        assert_eq!((m.node_count(), m.triangle_count()), (4, 2));
        assert_relative_eq!(m.surface_area(), 1.0, epsilon = 1e-15);

        let m = generate_square(20.0, 100);
        assert_relative_eq!(m.surface_area(), 400.0, epsilon = 1e-9);

        for n in [1, 2, 7, 30] {
            let m = generate_square(3.5, n);
            assert_eq!(m.node_count(), (n + 1) * (n + 1));
            assert_eq!(m.triangle_count(), 2 * n * n);
            let boundary = m.boundary_nodes().iter().filter(|&&b| b).count();
            assert_eq!(boundary, 4 * n);
            assert_eq!(m.euler_characteristic(), 1);
        }
    }

    #[test]
    fn square_winding_faces_up() {
        let m = generate_square(2.0, 4);
        for t in 0..m.triangle_count() {
            assert!(m.triangle_area_vector(t).z > 0.0);
        }
    }

    #[test]
    fn icosphere_counts() {
        for level in 0..=4 {
            let m = generate_icosphere(1.0, level);
            let f = 4usize.pow(level);
            assert_eq!(m.node_count(), 10 * f + 2);
            assert_eq!(m.triangle_count(), 20 * f);
            assert!(m.is_closed());
            assert_eq!(m.euler_characteristic(), 2);
        }
        let m = generate_icosphere(1.0, 3);
        assert_eq!((m.node_count(), m.triangle_count()), (642, 1280));
    }

    #[test]
    fn icosphere_radius_and_orientation() {
        let m = generate_icosphere(3.0, 3);
        for p in m.nodes() {
            assert!((p.norm() - 3.0).abs() < 1e-12);
        }
        for t in 0..m.triangle_count() {
            let [p0, p1, p2] = m.vertices(t);
            let centroid = (p0 + p1 + p2) / 3.0;
            assert!(m.triangle_area_vector(t).dot(&centroid) > 0.0);
        }
    }

    #[test]
    fn icosphere_area_converges() {
        let a5 = generate_icosphere(1.0, 5).surface_area();
        assert!((a5 - 4.0 * PI).abs() / (4.0 * PI) < 5e-4);
        let a4 = generate_icosphere(1.0, 4).surface_area();
        assert!((a4 - 4.0 * PI).abs() / (4.0 * PI) < 5e-3);
        let a4r3 = generate_icosphere(3.0, 4).surface_area();
        assert_relative_eq!(a4r3, 9.0 * a4, max_relative = 1e-13);
    }

    #[test]
    fn default_resolutions() {
        let sq = DomainSpec::with_default_resolution(DomainKind::Square { edge: 20.0 });
        assert_eq!(sq.resolution, 100);
        let sp = DomainSpec::with_default_resolution(DomainKind::Sphere { radius: 3.0 });
        assert!(icosphere_edge_length(3.0, sp.resolution) <= DEFAULT_SPACING);
        assert!(icosphere_edge_length(3.0, sp.resolution - 1) > DEFAULT_SPACING);
    }

    #[test]
    fn invalid_domains() {
        let bad = DomainSpec {
            kind: DomainKind::Sphere { radius: -1.0 },
            resolution: 2,
        };
        assert!(matches!(
            bad.generate(),
            Err(Error::InvalidParameter { name: "domain.radius", .. })
        ));
        let bad = DomainSpec {
            kind: DomainKind::Square { edge: 1.0 },
            resolution: 0,
        };
        assert!(bad.validate().is_err());
    }
}
