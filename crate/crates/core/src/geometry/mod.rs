//! Boundary directions: frames, lattice scans and Diophantine diagnostics.

mod contfrac;
pub mod dd;
mod diophantine;
mod frame;
pub mod lattice;

pub use contfrac::{continued_fraction, continued_fraction_dd, ContinuedFraction};
pub use diophantine::{
    liouville_direction, rationality_test, satisfies_level, small_divisor_scan,
    tangential_generator, xi_sequence, DiophantineReport, LatticeRecord, LiouvilleDirection,
    XiEntry, XiSequence, DEFAULT_RATIONAL_QMAX, RATIONAL_ANGLE_TOL,
};
pub use frame::{build_frame, frame_from_slope, golden_frame, NormalFrame};

use std::fmt::Write;

fn csv_header(d: usize) -> String {
    let mut h = String::new();
    for i in 1..=d {
        write!(h, "xi{i},").unwrap();
    }
    h.push_str("abs_Ndot_xi,norm_xi,violates\n");
    h
}

fn csv_row(out: &mut String, xi: &[i64], abs_ndot_xi: f64, norm_xi: f64, violates: bool) {
    for c in xi {
        write!(out, "{c},").unwrap();
    }
    writeln!(out, "{abs_ndot_xi:e},{norm_xi:e},{violates}").unwrap();
}

impl DiophantineReport {
    /// The worst vector first, then every violation.
    pub fn to_csv(&self) -> String {
        let d = self.worst_xi.len().max(2);
        let mut out = csv_header(d);
        if !self.worst_xi.is_empty() {
            let nrm = lattice::norm(&self.worst_xi);
            let t = self.best_constant / nrm.powf(d as f64 + self.tau);
            csv_row(&mut out, &self.worst_xi, t, nrm, t < nrm.powf(-(d as f64) - self.tau));
        }
        for v in &self.violations {
            csv_row(&mut out, &v.xi, v.abs_ndot_xi, v.norm_xi, v.violates);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

impl XiSequence {
    /// `violates` marks the defining level inequality `|Nᵀξ_M| < (1/M)|ξ_M|^{-M}`.
    pub fn to_csv(&self) -> String {
        let d = self.entries.first().map_or(2, |e| e.xi.len());
        let mut out = csv_header(d);
        for e in &self.entries {
            let ok = satisfies_level(e.abs_ndot_xi, lattice::norm_sq(&e.xi), e.level);
            csv_row(&mut out, &e.xi, e.abs_ndot_xi, e.norm_xi, ok);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
