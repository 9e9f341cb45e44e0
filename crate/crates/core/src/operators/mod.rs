//! Discrete convolution, principal-value, layer-potential, reflection and
//! localization operators on isotropic three-dimensional grids.

mod convolve;
mod cutoff;
mod layer;
mod pv;
mod reflect;
mod table;

pub use convolve::{convolve, convolve_terms, ConvolutionTerm};
pub use cutoff::{localize, Cutoff, CutoffProfile, Localized};
pub use layer::{boundary_limit, layer_apply, LayerOperator};
pub use pv::{near_cutoff, pv_apply, PvOperator, CANCELLATION_TOL, CUTOFF_INNER, CUTOFF_OUTER};
pub use reflect::{reflect, restrict_upper, Parity};
pub use table::{cell_integral, integrable_table, lattice_scale, OffsetTable};

pub(crate) use convolve::convolve_image;
pub(crate) use layer::layer_apply_terms;

