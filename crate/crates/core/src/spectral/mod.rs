//! Distorted Fourier analysis for H = L*L and H̃ = LL*.

pub mod bessel;
pub mod factor;
pub mod io;
pub mod lp;
pub mod norms;
pub mod table;
pub mod transference;
pub mod transform;

pub use factor::{Factorization, Tridiag};
pub use io::{default_cache_path, read_table, write_table};
pub use lp::{chi, lp_project};
pub use norms::{norm_lx, norm_lx_by_inversion, norm_x, NormReport};
pub use table::{build_eigenbasis, EigenTable, TableConfig};
pub use transference::transference_f;
pub use transform::{ft_forward, ft_inverse, Frame, SpectralCoeffs};
