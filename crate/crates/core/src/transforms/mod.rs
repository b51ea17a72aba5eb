//! Walsh–Hadamard, Haar and spectral-basis transforms.

pub mod haar;
pub mod spectral;
pub mod wht;
pub mod zigzag;

pub use haar::{haar2d, Direction};
pub use spectral::{learn_spectral_basis, BasisMode, SpectralBasis};
pub use wht::{fwht_natural_in_place, fwht_sequency, sequency_row_order, wht2d, SequencyWht};
pub use zigzag::{zigzag_indices, ZigzagOrder};
