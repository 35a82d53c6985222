use serde::{Deserialize, Serialize};

use super::FemError;
use crate::mesh::MdMesh;

/// Symmetric 2×2 tensor stored as `[xx, xy, yy]`.
pub type Tensor2 = [f64; 3];

fn tensor_eigs(t: &Tensor2) -> (f64, f64) {
    let [a, b, c] = *t;
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c).powi(2) + b * b).sqrt();
    (m - r, m + r)
}

fn tensor_inverse(t: &Tensor2) -> Tensor2 {
    let [a, b, c] = *t;
    let det = a * c - b * b;
    [c / det, -b / det, a / det]
}

/// Mixed-dimensional permeability: a tangential tensor on every rock
/// subdomain, a tangential scalar on every fracture and a normal scalar on
/// every interface connection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermeabilityField {
    /// Indexed by subdomain id; only entries of 2D subdomains are used.
    pub rock: Vec<Tensor2>,
    /// Indexed by subdomain id; only entries of 1D subdomains are used.
    pub fracture: Vec<f64>,
    /// Indexed by connection id.
    pub normal: Vec<f64>,
    k_min: f64,
}

impl PermeabilityField {
    /// Isotropic rock value `k_m`, fracture value `k_f` and normal value `k_n`.
    pub fn uniform(mesh: &MdMesh, k_m: f64, k_f: f64, k_n: f64) -> Result<Self, FemError> {
        let ns = mesh.num_subdomains();
        Self::new(
            mesh,
            vec![[k_m, 0.0, k_m]; ns],
            vec![k_f; ns],
            vec![k_n; mesh.geom.connections.len()],
        )
    }

    pub fn new(
        mesh: &MdMesh,
        rock: Vec<Tensor2>,
        fracture: Vec<f64>,
        normal: Vec<f64>,
    ) -> Result<Self, FemError> {
        let ns = mesh.num_subdomains();
        let nc = mesh.geom.connections.len();
        if rock.len() != ns || fracture.len() != ns || normal.len() != nc {
            return Err(FemError::Permeability(format!(
                "expected {ns} rock/fracture entries and {nc} normal entries"
            )));
        }
        let mut k_min = f64::INFINITY;
        for i in 0..ns {
            match mesh.dim(i) {
                2 => {
                    let t = &rock[i];
                    let (lo, _) = tensor_eigs(t);
                    if !(lo > 0.0) || !t.iter().all(|v| v.is_finite()) {
                        return Err(FemError::Permeability(format!(
                            "rock tensor of subdomain {i} is not SPD"
                        )));
                    }
                    k_min = k_min.min(lo);
                }
                1 => {
                    let k = fracture[i];
                    if !(k > 0.0 && k.is_finite()) {
                        return Err(FemError::Permeability(format!(
                            "fracture permeability of subdomain {i} must be positive"
                        )));
                    }
                    k_min = k_min.min(k);
                }
                _ => {}
            }
        }
        for (c, conn) in mesh.geom.connections.iter().enumerate() {
            // rock-to-point connections carry no flux coupling
            if mesh.dim(conn.host) - mesh.dim(conn.target) != 1 {
                continue;
            }
            let k = normal[c];
            if !(k > 0.0 && k.is_finite()) {
                return Err(FemError::Permeability(format!(
                    "normal permeability of connection {c} must be positive"
                )));
            }
            k_min = k_min.min(k);
        }
        Ok(Self {
            rock,
            fracture,
            normal,
            k_min,
        })
    }

    /// Rock tensors isotropic per subdomain, given as one value per rock.
    pub fn with_rock_values(mut self, mesh: &MdMesh, values: &[f64]) -> Result<Self, FemError> {
        let rocks = mesh.ids_of_dim(2);
        if values.len() != rocks.len() {
            return Err(FemError::Permeability(format!(
                "expected {} rock values, got {}",
                rocks.len(),
                values.len()
            )));
        }
        for (&i, &k) in rocks.iter().zip(values) {
            self.rock[i] = [k, 0.0, k];
        }
        Self::new(mesh, self.rock, self.fracture, self.normal)
    }

    /// Smallest eigenvalue over all tangential and normal parts.
    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn rock_inverse(&self, sub: usize) -> Tensor2 {
        tensor_inverse(&self.rock[sub])
    }

    /// Harmonic mean of the eigenvalues of `K⁻¹` on a rock subdomain.
    pub fn rock_inverse_scale(&self, sub: usize) -> f64 {
        let (lo, hi) = tensor_eigs(&self.rock[sub]);
        2.0 / (lo + hi)
    }

    /// Every permeability multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rock: self.rock.iter().map(|t| t.map(|v| v * c)).collect(),
            fracture: self.fracture.iter().map(|v| v * c).collect(),
            normal: self.normal.iter().map(|v| v * c).collect(),
            k_min: self.k_min * c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_builtin;

    #[test]
    fn k_min_and_inverse() {
        let mesh = build_builtin("single", None).unwrap();
        let k = PermeabilityField::uniform(&mesh, 2.0, 1e-4, 5.0).unwrap();
        assert_eq!(k.k_min(), 1e-4);
        assert_eq!(k.rock_inverse(0), [0.5, 0.0, 0.5]);
        assert!((k.rock_inverse_scale(0) - 0.5).abs() < 1e-15);
        assert!((k.scaled(10.0).k_min() - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn anisotropic_tensor() {
        let t = [2.0, 1.0, 2.0];
        let (lo, hi) = tensor_eigs(&t);
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
        let inv = tensor_inverse(&t);
        // t * inv = I
        assert!((t[0] * inv[0] + t[1] * inv[1] - 1.0).abs() < 1e-14);
        assert!((t[0] * inv[1] + t[1] * inv[2]).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive() {
        let mesh = build_builtin("single", None).unwrap();
        assert!(PermeabilityField::uniform(&mesh, 1.0, 0.0, 1.0).is_err());
        assert!(PermeabilityField::uniform(&mesh, -1.0, 1.0, 1.0).is_err());
        assert!(PermeabilityField::uniform(&mesh, 1.0, 1.0, f64::NAN).is_err());
    }
}
