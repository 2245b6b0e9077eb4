//! Frequency lattice, spectral fields, grid transforms and norms on `T^3`.

pub mod dump;
mod fft;
mod field;
mod lattice;
mod norms;
mod product;

pub use fft::GridTransform;
pub use field::{GridField, SpectralField, TORUS_VOLUME};
pub use lattice::{block_count, block_of, bracket, fft_friendly, norm_sq, FrequencyBox, Mode, ModeTable, Row};
pub use norms::{grid_norm, norm, NormSpec};
pub use product::{
    dealiased_product, dealiased_product_on, direct_convolution, lp_block, padded_grid, paraproduct_split,
    polynomial_map, required_grid, Paraproducts,
};
