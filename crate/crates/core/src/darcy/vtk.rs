use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{DarcyError, SaddleSystem, Solution};
use crate::mesh::Point;

/// Flux vector at the centre of every cell of subdomain `sub`.
pub fn cell_flux_vectors(system: &SaddleSystem, solution: &Solution, sub: usize) -> Vec<Point> {
    let mesh = &system.problem.mesh;
    let m = &mesh.submeshes[sub];
    let space = &system.flux_space;
    match m.dim {
        2 => (0..m.num_cells())
            .map(|c| {
                let x = m.cell_centroid(c);
                let area = m.cell_measures[c];
                let mut u = [0.0, 0.0];
                for (k, &(f, s)) in m.cell_facets[c].iter().enumerate() {
                    let pk = m.vertices[m.cells[c][k]];
                    let w = solution.flux[space.dof(sub, f).unwrap()] * s as f64 / (2.0 * area);
                    u[0] += w * (x[0] - pk[0]);
                    u[1] += w * (x[1] - pk[1]);
                }
                u
            })
            .collect(),
        1 => {
            let t = m.tangent().unwrap_or([0.0, 0.0]);
            (0..m.num_cells())
                .map(|c| {
                    let q: f64 = m.cells[c]
                        .iter()
                        .map(|&v| space.dof(sub, v).map_or(0.0, |d| solution.flux[d]))
                        .sum::<f64>()
                        / 2.0;
                    [q * t[0], q * t[1]]
                })
                .collect()
        }
        _ => vec![[0.0, 0.0]; m.num_cells()],
    }
}

/// Legacy ASCII VTK unstructured grid of one subdomain with cell pressure and
/// cell-centre flux.
pub fn vtk_subdomain(system: &SaddleSystem, solution: &Solution, sub: usize) -> String {
    let m = &system.problem.mesh.submeshes[sub];
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "subdomain {sub} (dim {})", m.dim);
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", m.num_vertices());
    for p in &m.vertices {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", p[0], p[1]);
    }
    let size: usize = m.cells.iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", m.num_cells());
    for c in &m.cells {
        let ids: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", c.len(), ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", m.num_cells());
    let ty = match m.dim {
        2 => 5,
        1 => 3,
        _ => 1,
    };
    for _ in 0..m.num_cells() {
        let _ = writeln!(s, "{ty}");
    }
    let _ = writeln!(s, "CELL_DATA {}", m.num_cells());
    let _ = writeln!(s, "SCALARS pressure double 1\nLOOKUP_TABLE default");
    for c in 0..m.num_cells() {
        let p = solution.pressure[system.pressure_space.dof(sub, c).unwrap()];
        let _ = writeln!(s, "{p:.17e}");
    }
    let _ = writeln!(s, "VECTORS flux double");
    for u in cell_flux_vectors(system, solution, sub) {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", u[0], u[1]);
    }
    s
}

/// Writes `<prefix>_<sub>.vtk` for every subdomain into `dir`.
pub fn write_vtk(system: &SaddleSystem, solution: &Solution, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, DarcyError> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for sub in 0..system.problem.mesh.num_subdomains() {
        let path = dir.join(format!("{prefix}_{sub}.vtk"));
        std::fs::write(&path, vtk_subdomain(system, solution, sub))?;
        out.push(path);
    }
    Ok(out)
}
