//! Translation-invariant weight tables on the integer lattice and their
//! direct-sum application.
//!
//! A table maps a lattice offset `k = e - s` (evaluation minus source
//! index) to a weight. Applying it is `u[e] = Σ_s T[e - s] f[s]`, looped
//! source-major with contiguous rows along the last axis; the work is
//! `O(N_eval · N_src)` per table.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, SubGrid};
use crate::kernels::Kernel;

/// Weights on a box of lattice offsets `lo .. lo + shape`.
#[derive(Clone, Debug)]
pub struct OffsetTable {
    lo: [isize; 3],
    shape: [usize; 3],
    values: Vec<f64>,
}

impl OffsetTable {
    pub fn build(lo: [isize; 3], shape: [usize; 3], f: impl Fn([isize; 3]) -> f64 + Sync) -> Self {
        let plane = shape[1] * shape[2];
        let mut values = vec![0.0; shape[0] * plane];
        values.par_chunks_mut(plane).enumerate().for_each(|(i0, chunk)| {
            for i1 in 0..shape[1] {
                for i2 in 0..shape[2] {
                    chunk[i1 * shape[2] + i2] = f([
                        lo[0] + i0 as isize,
                        lo[1] + i1 as isize,
                        lo[2] + i2 as isize,
                    ]);
                }
            }
        });
        Self { lo, shape, values }
    }

    pub fn lo(&self) -> [isize; 3] {
        self.lo
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn contains(&self, k: [isize; 3]) -> bool {
        (0..3).all(|a| k[a] >= self.lo[a] && k[a] < self.lo[a] + self.shape[a] as isize)
    }

    pub fn get(&self, k: [isize; 3]) -> f64 {
        if !self.contains(k) {
            return 0.0;
        }
        let i: Vec<usize> = (0..3).map(|a| (k[a] - self.lo[a]) as usize).collect();
        self.values[(i[0] * self.shape[1] + i[1]) * self.shape[2] + i[2]]
    }

    /// Row of weights along the last axis starting at offset `k`.
    pub(crate) fn row(&self, k0: isize, k1: isize, k2: isize, len: usize) -> &[f64] {
        let i0 = (k0 - self.lo[0]) as usize;
        let i1 = (k1 - self.lo[1]) as usize;
        let i2 = (k2 - self.lo[2]) as usize;
        let start = (i0 * self.shape[1] + i1) * self.shape[2] + i2;
        &self.values[start..start + len]
    }
}

/// Nonzero source nodes of a field: index triples and component values.
pub(crate) struct Sources {
    pub idx: Vec<[usize; 3]>,
    pub values: Vec<f64>,
    pub components: usize,
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl Sources {
    pub fn from_field(f: &GridFunction) -> Result<Self> {
        let g = f.grid();
        if g.dim() != 3 {
            return Err(Error::Dimension(g.dim()));
        }
        let k = f.components();
        let mut idx = Vec::new();
        let mut values = Vec::new();
        let mut lo = [usize::MAX; 3];
        let mut hi = [0; 3];
        for lin in 0..g.node_count() {
            let v = f.node(lin);
            if v.iter().any(|&x| x != 0.0) {
                let m = g.multi_index(lin);
                for a in 0..3 {
                    lo[a] = lo[a].min(m[a]);
                    hi[a] = hi[a].max(m[a]);
                }
                idx.push([m[0], m[1], m[2]]);
                values.extend_from_slice(v);
            }
        }
        if idx.is_empty() {
            lo = [0; 3];
        }
        Ok(Self {
            idx,
            values,
            components: k,
            lo,
            hi,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    /// Offset range `[eval_lo - hi, eval_hi - lo]` needed by a window.
    pub fn offset_box(&self, window: &SubGrid) -> ([isize; 3], [usize; 3]) {
        let mut lo = [0isize; 3];
        let mut shape = [0usize; 3];
        for a in 0..3 {
            let e0 = window.origin[a] as isize;
            let e1 = e0 + window.grid.shape()[a] as isize - 1;
            lo[a] = e0 - self.hi[a] as isize;
            shape[a] = (e1 - self.lo[a] as isize - lo[a] + 1) as usize;
        }
        (lo, shape)
    }
}

/// One table in a contraction: `out[o] += scale · T * f[i]`.
pub(crate) struct Term<'a> {
    pub out: usize,
    pub input: usize,
    pub table: &'a OffsetTable,
    pub scale: f64,
}

/// Apply several tables to the sources, evaluating on a window of the
/// source grid. Returns interleaved values with `out_components` per node.
pub(crate) fn apply_terms(
    sources: &Sources,
    window: &SubGrid,
    terms: &[Term<'_>],
    out_components: usize,
) -> Vec<f64> {
    let shape = window.grid.shape();
    let (m0, m1, m2) = (shape[0], shape[1], shape[2]);
    let o = [
        window.origin[0] as isize,
        window.origin[1] as isize,
        window.origin[2] as isize,
    ];
    let plane = m1 * m2;
    let mut planar = vec![0.0; out_components * m0 * plane];
    // Slab e0 of component c lives at planar[(e0 * C + c) * plane ..].
    planar
        .par_chunks_mut(out_components * plane)
        .enumerate()
        .for_each(|(e0, slab)| {
            for (sn, s) in sources.idx.iter().enumerate() {
                let fs = &sources.values[sn * sources.components..(sn + 1) * sources.components];
                let k0 = o[0] + e0 as isize - s[0] as isize;
                for t in terms {
                    let c = t.scale * fs[t.input];
                    if c == 0.0 {
                        continue;
                    }
                    let out = &mut slab[t.out * plane..(t.out + 1) * plane];
                    let k2 = o[2] - s[2] as isize;
                    for e1 in 0..m1 {
                        let k1 = o[1] + e1 as isize - s[1] as isize;
                        let row = t.table.row(k0, k1, k2, m2);
                        let dst = &mut out[e1 * m2..(e1 + 1) * m2];
                        for (d, w) in dst.iter_mut().zip(row) {
                            *d += c * w;
                        }
                    }
                }
            }
        });
    let mut values = vec![0.0; out_components * m0 * plane];
    for e0 in 0..m0 {
        for c in 0..out_components {
            let src = &planar[(e0 * out_components + c) * plane..][..plane];
            for (j, v) in src.iter().enumerate() {
                values[(e0 * plane + j) * out_components + c] = *v;
            }
        }
    }
    values
}

/// `∫_{[-1/2,1/2]^3} κ` for κ homogeneous of degree `d > -3`, by splitting
/// the cube into six pyramids with apex at the origin:
/// `∫ = Σ_faces (1/2) / (d + 3) ∫_face κ dA`.
pub fn cell_integral(kernel: &Kernel) -> Result<f64> {
    let d = kernel.degree();
    if d <= -3 {
        return Err(Error::WrongHomogeneity {
            kernel: kernel.label(),
            degree: d,
            expected: -2,
        });
    }
    let gl = gauss_quad::legendre::GaussLegendre::new(20)
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let nodes = gl.as_node_weight_pairs();
    // Each face is split into 2x2 panels; the integrand is smooth on faces.
    let mut total = 0.0;
    for axis in 0..3 {
        for sign in [-0.5, 0.5] {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut face = 0.0;
            for pu in [-0.25, 0.25] {
                for pv in [-0.25, 0.25] {
                    for &(a, wa) in nodes {
                        for &(b, wb) in nodes {
                            let mut x = [0.0; 3];
                            x[axis] = sign;
                            x[u] = pu + 0.25 * a;
                            x[v] = pv + 0.25 * b;
                            face += wa * wb * 0.0625 * kernel.eval_unchecked(&x);
                        }
                    }
                }
            }
            total += 0.5 / (d as f64 + 3.0) * face;
        }
    }
    Ok(total)
}

/// Table of `h^3 κ(h k)` in lattice units (`κ(k)`, scaled by `h^{3+d}` at
/// application), with the cell integral at `k = 0`.
pub fn integrable_table(kernel: &Kernel, lo: [isize; 3], shape: [usize; 3]) -> Result<OffsetTable> {
    let c0 = cell_integral(kernel)?;
    Ok(OffsetTable::build(lo, shape, |k| {
        if k == [0, 0, 0] {
            c0
        } else {
            kernel.eval_unchecked(&[k[0] as f64, k[1] as f64, k[2] as f64])
        }
    }))
}

/// Scale turning lattice-unit weights of a degree-`d` kernel into physical
/// ones on a grid of spacing `h`.
pub fn lattice_scale(h: f64, degree: i32) -> f64 {
    h.powi(3 + degree)
}

pub(crate) fn require_isotropic(g: &Grid) -> Result<()> {
    if g.dim() != 3 {
        return Err(Error::Dimension(g.dim()));
    }
    if !g.is_isotropic() {
        return Err(Error::Precondition("operators need equal spacing on every axis".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_integral_of_newton_kernel() {
        // Oracle: by symmetry ∫_{[-1/2,1/2]^3} 1/|x| = 3 ∫∫_{[0,1]^2} (1+s²+t²)^{-1/2}.
        let k = Kernel::k(3);
        let c = cell_integral(&k).unwrap() * 4.0 * std::f64::consts::PI;
        let gl = gauss_quad::legendre::GaussLegendre::new(30).unwrap();
        let mut face = 0.0;
        for &(a, wa) in gl.as_node_weight_pairs() {
            for &(b, wb) in gl.as_node_weight_pairs() {
                let (s, t) = (0.5 * (a + 1.0), 0.5 * (b + 1.0));
                face += 0.25 * wa * wb / (1.0 + s * s + t * t).sqrt();
            }
        }
        assert!((c - 3.0 * face).abs() < 1e-10, "{c} vs {}", 3.0 * face);
    }

    #[test]
    fn table_application_matches_direct_sum() {
        let g = Grid::new(crate::grid::BoxDomain::cube(3, -1.0, 1.0, crate::grid::DomainKind::WholeSpace).unwrap(), 0.25).unwrap();
        let f = GridFunction::from_fn(&g, |x| (x[0] - 0.2 * x[1] + x[2] * x[2]).sin());
        let w = g.window(&[-0.5, -0.25, 0.0], &[0.5, 0.5, 0.75]).unwrap();
        let src = Sources::from_field(&f).unwrap();
        let (lo, shape) = src.offset_box(&w);
        let t = OffsetTable::build(lo, shape, |k| 1.0 / (1.0 + (k[0] * k[0] + 2 * k[1] * k[1] + 3 * k[2] * k[2]) as f64));
        let out = apply_terms(&src, &w, &[Term { out: 0, input: 0, table: &t, scale: 2.0 }], 1);
        for (le, val) in out.iter().enumerate() {
            let me = w.grid.multi_index(le);
            let mut direct = 0.0;
            for ls in 0..g.node_count() {
                let ms = g.multi_index(ls);
                let k = [0, 1, 2].map(|a| (w.origin[a] + me[a]) as isize - ms[a] as isize);
                direct += 2.0 * t.get(k) * f.value(ls, 0);
            }
            assert!((val - direct).abs() < 1e-12);
        }
    }
}
