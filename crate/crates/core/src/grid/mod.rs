//! Uniform tensor grids over boxes, sampled fields, quadrature, finite
//! differences and smooth compactly supported test data.
//!
//! Nodes include both faces of the box. Linear node indices are C-ordered
//! (last axis fastest); field values interleave components per node.

mod bump;
mod fd;
mod io;
mod quadrature;

pub use bump::{bump_profile, make_bump, make_mean_zero_bump};
pub use fd::{
    divergence, finite_difference, gradient, hessian, laplacian, StencilDerivative,
};
pub use io::{read_grid_function, write_csv, write_grid_function};
pub use quadrature::{quadrature, quadrature_weights, quadrature_with, QuadratureRule};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// What the computational box stands in for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainKind {
    /// Truncation of the whole space.
    #[serde(rename = "whole")]
    WholeSpace,
    /// Truncation of the upper half-space; the lower face of the last axis is
    /// the boundary plane.
    #[serde(rename = "half")]
    HalfSpace,
    /// A genuine bounded box.
    #[serde(rename = "box")]
    BoundedBox,
}

/// Axis-aligned box `[lower, upper]` in one to three dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    kind: DomainKind,
}

impl BoxDomain {
    pub fn new(lower: &[f64], upper: &[f64], kind: DomainKind) -> Result<Self> {
        let dim = lower.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(dim));
        }
        if upper.len() != dim {
            return Err(Error::InvalidDomain(format!(
                "corner lengths differ ({} vs {})",
                dim,
                upper.len()
            )));
        }
        for a in 0..dim {
            if !(lower[a].is_finite() && upper[a].is_finite()) || upper[a] <= lower[a] {
                return Err(Error::InvalidDomain(format!(
                    "axis {a} has non-positive extent [{}, {}]",
                    lower[a], upper[a]
                )));
            }
        }
        if kind == DomainKind::HalfSpace && lower[dim - 1] != 0.0 {
            return Err(Error::InvalidDomain(format!(
                "half-space truncation needs lower corner 0 on the last axis, got {}",
                lower[dim - 1]
            )));
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            kind,
        })
    }

    /// The cube `[a, b]^dim`.
    pub fn cube(dim: usize, a: f64, b: f64, kind: DomainKind) -> Result<Self> {
        Self::new(&vec![a; dim], &vec![b; dim], kind)
    }

    /// `[-half_width, half_width]^{dim-1} x [0, height]`.
    pub fn half_space(dim: usize, half_width: f64, height: f64) -> Result<Self> {
        let mut lower = vec![-half_width; dim];
        let mut upper = vec![half_width; dim];
        lower[dim - 1] = 0.0;
        upper[dim - 1] = height;
        Self::new(&lower, &upper, DomainKind::HalfSpace)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn with_kind(&self, kind: DomainKind) -> Result<Self> {
        Self::new(&self.lower, &self.upper, kind)
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.extent(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    /// Membership with an absolute slack `tol` on every face.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&lo, &hi))| xi >= lo - tol && xi <= hi + tol)
    }

    /// Is the closed ball strictly inside the box?
    pub fn contains_ball(&self, center: &[f64], radius: f64) -> bool {
        center.len() == self.dim()
            && center
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&c, (&lo, &hi))| c - radius > lo && c + radius < hi)
    }

    /// Box mirrored across the plane `x_n = 0` and glued to itself; the
    /// whole-space companion of a half-space truncation.
    pub fn reflected(&self) -> Result<Self> {
        let n = self.dim();
        if self.kind != DomainKind::HalfSpace {
            return Err(Error::InvalidDomain(
                "only half-space truncations can be reflected".into(),
            ));
        }
        let mut lower = self.lower.clone();
        lower[n - 1] = -self.upper[n - 1];
        Self::new(&lower, &self.upper, DomainKind::WholeSpace)
    }
}

/// Uniform node grid on a [`BoxDomain`].
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    domain: BoxDomain,
    shape: Vec<usize>,
    spacing: Vec<f64>,
}

impl Grid {
    /// Grid with (approximately) spacing `h` along every axis. Each extent
    /// must be an integer multiple of `h` so that nodes sit on the faces.
    pub fn new(domain: BoxDomain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidDomain(format!("spacing must be positive, got {h}")));
        }
        let mut shape = Vec::with_capacity(domain.dim());
        for a in 0..domain.dim() {
            let cells = domain.extent(a) / h;
            let rounded = cells.round();
            if rounded < 1.0 || (cells - rounded).abs() > 1e-8 * rounded.max(1.0) {
                return Err(Error::InvalidDomain(format!(
                    "extent {} of axis {a} is not a multiple of h = {h}",
                    domain.extent(a)
                )));
            }
            shape.push(rounded as usize + 1);
        }
        Self::with_shape(domain, &shape)
    }

    pub fn with_shape(domain: BoxDomain, shape: &[usize]) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(Error::Shape(format!(
                "shape has {} axes, domain has {}",
                shape.len(),
                domain.dim()
            )));
        }
        if shape.iter().any(|&m| m < 2) {
            return Err(Error::Shape("every axis needs at least two nodes".into()));
        }
        let spacing = (0..domain.dim())
            .map(|a| domain.extent(a) / (shape[a] - 1) as f64)
            .collect();
        Ok(Self {
            domain,
            shape: shape.to_vec(),
            spacing,
        })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Common spacing of an isotropic grid.
    pub fn h(&self) -> f64 {
        self.spacing[0]
    }

    pub fn is_isotropic(&self) -> bool {
        let h = self.spacing[0];
        self.spacing.iter().all(|&s| (s - h).abs() <= 1e-10 * h)
    }

    pub fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Strides of the C-ordered node layout.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut s = [0; MAX_DIM];
        let mut acc = 1;
        for a in (0..self.dim()).rev() {
            s[a] = acc;
            acc *= self.shape[a];
        }
        s
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &m)| acc * m + i)
    }

    pub fn multi_index(&self, mut lin: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for a in (0..self.dim()).rev() {
            idx[a] = lin % self.shape[a];
            lin /= self.shape[a];
        }
        idx
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.shape[axis] {
            self.domain.upper[axis]
        } else {
            self.domain.lower[axis] + i as f64 * self.spacing[axis]
        }
    }

    /// Node coordinates; entries past `dim()` are zero.
    pub fn point(&self, lin: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(lin);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            x[a] = self.coord(a, idx[a]);
        }
        x
    }

    /// Nearest node index along `axis` for the coordinate `x`.
    pub fn nearest_index(&self, axis: usize, x: f64) -> usize {
        let t = ((x - self.domain.lower[axis]) / self.spacing[axis]).round();
        t.clamp(0.0, (self.shape[axis] - 1) as f64) as usize
    }

    /// The sub-grid of nodes inside `[lower, upper]` (snapped outward to
    /// nodes, clipped to the grid).
    pub fn window(&self, lower: &[f64], upper: &[f64]) -> Result<SubGrid> {
        let n = self.dim();
        if lower.len() != n || upper.len() != n {
            return Err(Error::Shape("window corners have the wrong length".into()));
        }
        let mut lo = vec![0; n];
        let mut hi = vec![0; n];
        for a in 0..n {
            let h = self.spacing[a];
            let l = ((lower[a] - self.domain.lower[a]) / h - 1e-9).ceil().max(0.0) as usize;
            let u = ((upper[a] - self.domain.lower[a]) / h + 1e-9)
                .floor()
                .min((self.shape[a] - 1) as f64);
            if u < l as f64 {
                return Err(Error::InvalidDomain(format!(
                    "window is empty along axis {a}"
                )));
            }
            lo[a] = l;
            hi[a] = u as usize;
        }
        self.window_indices(&lo, &hi)
    }

    /// Sub-grid spanned by the inclusive node index ranges `lo..=hi`.
    pub fn window_indices(&self, lo: &[usize], hi: &[usize]) -> Result<SubGrid> {
        let n = self.dim();
        let mut shape = vec![0; n];
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for a in 0..n {
            if hi[a] < lo[a] || hi[a] >= self.shape[a] {
                return Err(Error::Shape(format!("bad index range on axis {a}")));
            }
            shape[a] = hi[a] - lo[a] + 1;
            lower[a] = self.coord(a, lo[a]);
            upper[a] = self.coord(a, hi[a]);
        }
        // Degenerate (single-node) axes get a nominal extent so that the box
        // stays valid; their spacing is taken from the parent.
        let mut dom_upper = upper.clone();
        for a in 0..n {
            if shape[a] == 1 {
                dom_upper[a] = lower[a] + self.spacing[a];
            }
        }
        let kind = if self.domain.kind == DomainKind::HalfSpace && lower[n - 1] == 0.0 {
            DomainKind::HalfSpace
        } else if self.domain.kind == DomainKind::HalfSpace {
            DomainKind::BoundedBox
        } else {
            self.domain.kind
        };
        let domain = BoxDomain::new(&lower, &dom_upper, kind)?;
        let grid = Grid {
            domain,
            shape,
            spacing: self.spacing.clone(),
        };
        Ok(SubGrid {
            grid,
            origin: lo.to_vec(),
        })
    }

    /// The whole grid viewed as a window of itself.
    pub fn full_window(&self) -> SubGrid {
        SubGrid {
            grid: self.clone(),
            origin: vec![0; self.dim()],
        }
    }

    /// Trapezoid weights along one axis.
    pub(crate) fn axis_weights(&self, axis: usize, rule: QuadratureRule) -> Result<Vec<f64>> {
        quadrature::axis_weights(self.shape[axis], self.spacing[axis], rule)
    }

    /// Grid on the boundary plane `x_n = lower_n` (dimension `n-1`), sharing
    /// the tangential nodes.
    pub fn boundary_plane(&self) -> Result<Grid> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        let domain = BoxDomain::new(
            &self.domain.lower[..n - 1],
            &self.domain.upper[..n - 1],
            DomainKind::BoundedBox,
        )?;
        Grid::with_shape(domain, &self.shape[..n - 1])
    }
}

/// A rectangular block of nodes of a parent grid. `grid` carries the block's
/// own geometry; `origin` is its first node in parent indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SubGrid {
    pub grid: Grid,
    pub origin: Vec<usize>,
}

impl SubGrid {
    /// Shrink by `k` nodes on every side (axes of a single node are kept).
    pub fn shrink(&self, k: usize) -> Result<SubGrid> {
        let n = self.grid.dim();
        let mut lo = vec![0; n];
        let mut hi = vec![0; n];
        for a in 0..n {
            let m = self.grid.shape[a];
            if m <= 2 * k {
                return Err(Error::Shape(format!("cannot shrink axis {a} of {m} nodes by {k}")));
            }
            lo[a] = k;
            hi[a] = m - 1 - k;
        }
        let inner = self.grid.window_indices(&lo, &hi)?;
        Ok(SubGrid {
            origin: (0..n).map(|a| self.origin[a] + inner.origin[a]).collect(),
            grid: inner.grid,
        })
    }

    /// Parent linear index of a local linear index.
    pub fn parent_index(&self, parent: &Grid, local: usize) -> usize {
        let idx = self.grid.multi_index(local);
        let mut lin = 0;
        for a in 0..parent.dim() {
            lin = lin * parent.shape()[a] + idx[a] + self.origin[a];
        }
        lin
    }
}

/// Scalar or vector field sampled at the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    components: usize,
    values: Vec<f64>,
    support_radius: Option<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::Shape("a field needs at least one component".into()));
        }
        if values.len() != grid.node_count() * components {
            return Err(Error::Shape(format!(
                "{} values for {} nodes x {} components",
                values.len(),
                grid.node_count(),
                components
            )));
        }
        Ok(Self {
            grid,
            components,
            values,
            support_radius: None,
        })
    }

    pub fn zeros(grid: &Grid, components: usize) -> Self {
        Self {
            values: vec![0.0; grid.node_count() * components],
            grid: grid.clone(),
            components,
            support_radius: None,
        }
    }

    /// Scalar field from a closure of the node coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = grid.dim();
        let values = (0..grid.node_count())
            .map(|lin| f(&grid.point(lin)[..n]))
            .collect();
        Self {
            grid: grid.clone(),
            components: 1,
            values,
            support_radius: None,
        }
    }

    /// Vector field; the closure fills one node's components.
    pub fn from_fn_vec(grid: &Grid, components: usize, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let n = grid.dim();
        let mut values = vec![0.0; grid.node_count() * components];
        for (lin, chunk) in values.chunks_mut(components).enumerate() {
            f(&grid.point(lin)[..n], chunk);
        }
        Self {
            grid: grid.clone(),
            components,
            values,
            support_radius: None,
        }
    }

    /// Stack scalar fields on the same grid into a vector field.
    pub fn stack(parts: &[GridFunction]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Shape("nothing to stack".into()))?;
        let grid = first.grid.clone();
        let mut components = 0;
        for p in parts {
            if p.grid != grid {
                return Err(Error::Shape("stacked fields live on different grids".into()));
            }
            components += p.components;
        }
        let nodes = grid.node_count();
        let mut values = Vec::with_capacity(nodes * components);
        for node in 0..nodes {
            for p in parts {
                values.extend_from_slice(p.node(node));
            }
        }
        let support = parts
            .iter()
            .map(|p| p.support_radius)
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)));
        let mut out = Self::new(grid, components, values)?;
        out.support_radius = support;
        Ok(out)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_scalar(&self) -> bool {
        self.components == 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, lin: usize) -> &[f64] {
        &self.values[lin * self.components..(lin + 1) * self.components]
    }

    pub fn value(&self, lin: usize, component: usize) -> f64 {
        self.values[lin * self.components + component]
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    /// Declare a compact-support radius (about the data center; metadata
    /// used for truncation checks).
    pub fn with_support_radius(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self
    }

    pub fn component(&self, c: usize) -> GridFunction {
        let values = self
            .values
            .iter()
            .skip(c)
            .step_by(self.components)
            .copied()
            .collect();
        GridFunction {
            grid: self.grid.clone(),
            components: 1,
            values,
            support_radius: self.support_radius,
        }
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude(&self) -> GridFunction {
        let values = if self.components == 1 {
            self.values.iter().map(|v| v.abs()).collect()
        } else {
            self.values
                .chunks(self.components)
                .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
                .collect()
        };
        GridFunction {
            grid: self.grid.clone(),
            components: 1,
            values,
            support_radius: self.support_radius,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            components: self.components,
            values: self.values.iter().map(|&v| f(v)).collect(),
            support_radius: self.support_radius,
        }
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<GridFunction> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        let support_radius = match (self.support_radius, other.support_radius) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Ok(GridFunction {
            grid: self.grid.clone(),
            components: self.components,
            values,
            support_radius,
        })
    }

    /// Pointwise product of two scalar fields, or of a vector field by a
    /// scalar field.
    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        if other.components != 1 {
            return Err(Error::Shape("right factor must be scalar".into()));
        }
        let k = self.components;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * other.values[i / k])
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            components: k,
            values,
            support_radius: None,
        })
    }

    pub fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::Shape(
                "fields differ in grid or component count".into(),
            ));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Restriction to a window of this field's grid.
    pub fn restrict(&self, window: &SubGrid) -> Result<GridFunction> {
        let k = self.components;
        let mut values = Vec::with_capacity(window.grid.node_count() * k);
        for local in 0..window.grid.node_count() {
            let lin = window.parent_index(&self.grid, local);
            values.extend_from_slice(self.node(lin));
        }
        GridFunction::new(window.grid.clone(), k, values)
    }

    /// Same values viewed on another grid of identical shape.
    pub fn with_grid(self, grid: Grid) -> Result<GridFunction> {
        if grid.shape() != self.grid.shape() {
            return Err(Error::Shape("grid shapes differ".into()));
        }
        GridFunction::new(grid, self.components, self.values)
    }

    /// Linear indices of nodes with a nonzero value in any component.
    pub fn support_nodes(&self) -> Vec<usize> {
        (0..self.grid.node_count())
            .filter(|&lin| self.node(lin).iter().any(|&v| v != 0.0))
            .collect()
    }
}
