//! Boundary-layer correctors and the ε-sweep Dirichlet solver.
//!
//! Three regimes are covered: the exact Fourier series for the Laplacian,
//! finite strips for rational normals, and the regularized lift to
//! `T² × [0, T]` for arbitrary normals.

mod data;
mod field;
mod rect;
mod strip;

use std::fmt::Write as _;

pub use data::{FourierBoundaryData, ModeEntry};
pub use field::{
    solve_series_laplacian, st_venant_energy, BoundaryLayerField, GridField, SeriesField, SeriesMode, SlabNorm,
    StVenantEnergy, TangentialGrid,
};
pub use rect::{
    dirichlet_rect_solver, homogenization_error_sweep, homogenized_tensor_of, linear_fit, BumpSource, RectDomain,
    RectSolution, SweepReport, SweepRow, MIN_CELLS_PER_PERIOD,
};
pub use strip::{solve_quasiperiodic_regularized, solve_rational_strip, StripGrid, GRID_SOLVER_TOL};

impl GridField {
    /// `theta1,theta2,t,V` rows (strips leave `theta2` empty).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta1,theta2,t,V\n");
        for k in 0..self.levels() {
            let t = self.t_of(k);
            for (i, v) in self.level(k).iter().enumerate() {
                let node = self.tangential.node(i);
                let th2 = node.get(1).map(|x| format!("{x:.17e}")).unwrap_or_default();
                let _ = writeln!(s, "{:.17e},{},{:.17e},{:.17e}", node[0], th2, t, v);
            }
        }
        s
    }
}

/// CSV of slab norms with columns `t,l2,linf`.
pub fn slab_norms_csv(rows: &[SlabNorm]) -> String {
    let mut s = String::from("t,l2,linf\n");
    for r in rows {
        let _ = writeln!(s, "{:.17e},{:.17e},{:.17e}", r.t, r.l2, r.linf);
    }
    s
}
