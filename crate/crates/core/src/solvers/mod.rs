//! Whole-space and half-space Poisson and Stokes solution formulas, their
//! finite-difference residual checks, and empirical estimate constants.

mod estimates;
mod poisson;
mod stokes;

pub use estimates::{verify_estimate, Arm, DataFamily, EstimateId, EstimateSamples, FamilyMember};
pub use poisson::{solve_poisson_halfspace, solve_poisson_wholespace, PoissonSolution};
pub use stokes::{solve_stokes_halfspace, solve_stokes_wholespace, Residuals, StokesSolution};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Grid, GridFunction, SubGrid};

/// Which construction produced a solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Whole,
    Half,
}

/// Accuracy of the finite differences used for residuals.
pub const RESIDUAL_FD_ACCURACY: usize = 4;

/// Evaluation region of a solve. `None` selects the inner half of the box
/// (for a half-space box, the inner half of the tangential axes and the
/// lower half of the normal axis, including `Σ`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveOptions {
    pub window: Option<(Vec<f64>, Vec<f64>)>,
}

impl SolveOptions {
    pub fn with_window(lower: &[f64], upper: &[f64]) -> Self {
        Self {
            window: Some((lower.to_vec(), upper.to_vec())),
        }
    }

    pub(crate) fn resolve(&self, grid: &Grid, half: bool) -> Result<SubGrid> {
        if let Some((lo, hi)) = &self.window {
            return grid.window(lo, hi);
        }
        let d = grid.domain();
        let n = grid.dim();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for a in 0..n {
            let (l, u) = (d.lower()[a], d.upper()[a]);
            if half && a == n - 1 {
                lo[a] = l;
                hi[a] = l + 0.5 * (u - l);
            } else {
                let c = 0.5 * (l + u);
                lo[a] = c - 0.25 * (u - l);
                hi[a] = c + 0.25 * (u - l);
            }
        }
        grid.window(&lo, &hi)
    }
}

/// `‖a‖₂` over the nodes of `inner`, a block inside `a`'s grid given in
/// local indices of that grid.
pub(crate) fn l2_on(a: &GridFunction, inner: &SubGrid) -> f64 {
    let g = a.grid();
    let k = a.components();
    let mut s = 0.0;
    for local in 0..inner.grid.node_count() {
        let lin = inner.parent_index(g, local);
        for c in 0..k {
            let v = a.value(lin, c);
            s += v * v;
        }
    }
    (s * g.cell_volume()).sqrt()
}

pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}
