//! Periodic cell problems on the unit torus and the quantities built from
//! their solutions: the homogenized tensor `A0`, the second-order corrector
//! `Γ` with its source `B`, and the flux `Φ` with a skew potential `Ψ`.

mod coefficients;
mod solver;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use coefficients::{CoefficientField, CoefficientModel, Mat2, PeriodicCoefficients, Transposed};
pub use solver::{
    compute_corrector_set, flux_potential, homogenized_tensor, solve_corrector, solve_gamma, symmetric_eigenvalues,
    CellResiduals, CorrectorSet, CorrectorSolution, Field, FluxPotential, GammaSolution, CELL_MAX_ITER,
    CELL_RESIDUAL_TOL,
};

use crate::error::Result;

/// Row-major CSV of one grid field with a `# grid=<n> field=<name>` header.
pub fn grid_csv(grid: usize, name: &str, f: &[f64]) -> String {
    let mut s = format!("# grid={grid} field={name}\n");
    for row in f.chunks(grid) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    s
}

#[derive(Serialize)]
struct Summary<'a> {
    grid: usize,
    a0: &'a Mat2,
    residuals: &'a CellResiduals,
}

impl CorrectorSet {
    /// Every field with its file stem, e.g. `chi1`, `gamma12`, `psi121`.
    pub fn named_fields(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        for (b, f) in self.chi.iter().enumerate() {
            out.push((format!("chi{}", b + 1), f));
        }
        for a in 0..2 {
            for b in 0..2 {
                out.push((format!("gamma{}{}", a + 1, b + 1), &self.gamma[a][b]));
                out.push((format!("b{}{}", a + 1, b + 1), &self.b[a][b]));
                out.push((format!("phi{}{}", a + 1, b + 1), &self.phi[a][b]));
            }
        }
        for g in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    out.push((format!("psi{}{}{}", g + 1, a + 1, b + 1), &self.psi[g][a][b]));
                }
            }
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&Summary {
            grid: self.grid,
            a0: &self.a0,
            residuals: &self.residuals,
        })
    }

    /// Writes one CSV per field plus `summary.json` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, f) in self.named_fields() {
            let p = dir.join(format!("{name}.csv"));
            std::fs::write(&p, grid_csv(self.grid, &name, f))?;
            written.push(p);
        }
        let p = dir.join("summary.json");
        std::fs::write(&p, self.summary_json()?)?;
        written.push(p);
        Ok(written)
    }
}
