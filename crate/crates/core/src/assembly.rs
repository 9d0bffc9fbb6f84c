//! Lumped mass and P1 stiffness matrices on a mesh snapshot.
//!
//! Connectivity never changes during a run, so an [`Assembler`] builds the
//! sparsity pattern once and refills values for each new geometry.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Point, SurfaceMesh};
use crate::sparse::{CsrMatrix, SparsityPattern};

/// Diagonal of the lumped mass matrix: `diag[i] = sum over T containing i of |T| / 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedMass(pub Vec<f64>);

impl LumpedMass {
    pub fn diag(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Symmetric P1 stiffness matrix in CSR layout.
#[derive(Debug, Clone)]
pub struct StiffnessMatrix(pub CsrMatrix);

impl StiffnessMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.0
    }
}

/// Element stiffness of the P1 basis on the plane of the triangle.
///
/// Gradients are computed in a local orthonormal frame of the triangle, so the
/// result is intrinsic (independent of placement in space). Off-diagonal
/// entries equal `-cot(opposite angle) / 2`; diagonals are minus the
/// off-diagonal row sums, which keeps constants exactly in the kernel.
/// Returns `None` for a zero-area triangle.
pub fn element_stiffness(p: &[Point; 3]) -> Option<[[f64; 3]; 3]> {
    let e01 = p[1] - p[0];
    let e02 = p[2] - p[0];
    let normal = e01.cross(&e02);
    let len01 = e01.norm();
    let normal_len = normal.norm();
    if !(normal_len > 0.0 && len01 > 0.0) {
        return None;
    }
    let u = e01 / len01;
    let v = (normal / normal_len).cross(&u);
    let q = [[0.0, 0.0], [len01, 0.0], [e02.dot(&u), e02.dot(&v)]];
    let twice_area = q[1][0] * q[2][1] - q[1][1] * q[2][0];
    if !(twice_area > 0.0) {
        return None;
    }
    let grad = |i: usize| {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        [
            -(q[k][1] - q[j][1]) / twice_area,
            (q[k][0] - q[j][0]) / twice_area,
        ]
    };
    let g = [grad(0), grad(1), grad(2)];
    let area = 0.5 * twice_area;
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in (a + 1)..3 {
            let value = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            k[a][b] = value;
            k[b][a] = value;
        }
    }
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        k[a][a] = -(k[a][b] + k[a][c]);
    }
    Some(k)
}

fn check_areas(mesh: &SurfaceMesh) -> Result<Vec<f64>> {
    (0..mesh.triangle_count())
        .map(|t| {
            let area = mesh.triangle_area(t);
            if area > 0.0 && area.is_finite() {
                Ok(area)
            } else {
                Err(Error::DegenerateElement { triangle: t, area })
            }
        })
        .collect()
}

pub fn assemble_lumped_mass(mesh: &SurfaceMesh) -> Result<LumpedMass> {
    let areas = check_areas(mesh)?;
    let mut diag = vec![0.0; mesh.node_count()];
    for (tri, area) in mesh.triangles().iter().zip(&areas) {
        let share = area / 3.0;
        for &i in tri {
            diag[i] += share;
        }
    }
    Ok(LumpedMass(diag))
}

/// Reusable assembler for one connectivity.
#[derive(Debug, Clone)]
pub struct Assembler {
    pattern: Arc<SparsityPattern>,
}

impl Assembler {
    pub fn new(mesh: &SurfaceMesh) -> Self {
        Assembler {
            pattern: Arc::new(SparsityPattern::from_mesh(mesh)),
        }
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn lumped_mass(&self, mesh: &SurfaceMesh) -> Result<LumpedMass> {
        assemble_lumped_mass(mesh)
    }

    pub fn stiffness(&self, mesh: &SurfaceMesh) -> Result<StiffnessMatrix> {
        assert_eq!(
            mesh.node_count(),
            self.pattern.dim(),
            "assembler used with a different mesh"
        );
        let mut matrix = CsrMatrix::zeros(Arc::clone(&self.pattern));
        let values = matrix.values_mut();
        for t in 0..mesh.triangle_count() {
            let element = element_stiffness(&mesh.vertices(t)).ok_or_else(|| {
                Error::DegenerateElement {
                    triangle: t,
                    area: mesh.triangle_area(t),
                }
            })?;
            let slots = self.pattern.element_slots(t);
            for a in 0..3 {
                for b in 0..3 {
                    values[slots[a][b]] += element[a][b];
                }
            }
        }
        Ok(StiffnessMatrix(matrix))
    }

    /// Fills `out` with `diag(mass) / tau + diffusivity * stiffness`.
    pub fn system_matrix_into(
        &self,
        mass: &LumpedMass,
        stiffness: &StiffnessMatrix,
        tau: f64,
        diffusivity: f64,
        out: &mut CsrMatrix,
    ) {
        let k = stiffness.0.values();
        let values = out.values_mut();
        for (dst, &src) in values.iter_mut().zip(k) {
            *dst = diffusivity * src;
        }
        for (&slot, &m) in self.pattern.diagonal_slots().iter().zip(mass.diag()) {
            values[slot] += m / tau;
        }
    }

    pub fn system_matrix(
        &self,
        mass: &LumpedMass,
        stiffness: &StiffnessMatrix,
        tau: f64,
        diffusivity: f64,
    ) -> CsrMatrix {
        let mut out = CsrMatrix::zeros(Arc::clone(&self.pattern));
        self.system_matrix_into(mass, stiffness, tau, diffusivity, &mut out);
        out
    }
}

pub fn assemble_stiffness(mesh: &SurfaceMesh) -> Result<StiffnessMatrix> {
    Assembler::new(mesh).stiffness(mesh)
}
