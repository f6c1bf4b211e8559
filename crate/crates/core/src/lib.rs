//! Cokernels of random lower triangular integer matrices.
//!
//! The crate samples lower triangular matrices with i.i.d. entries given
//! modulo `p^E`, extracts the ranks `rank(p^{i-1} Γ)` of the cokernel and
//! compares the centered fluctuations with the limit law `L_{d,1/p,χ}`:
//! its explicit mass function for `d = 1`, its exponential moments, and
//! the intensity `χ₀` (closed form for the symmetric family, Monte Carlo
//! otherwise).
//!
//! Modules, bottom up:
//!
//! * [`modular`]: word-sized arithmetic in `Z/p^e`.
//! * [`pgroup`]: partitions, Hom counts, maximal chain counts `MC(G)`.
//! * [`entrydist`]: the entry law, its characters and `τ(v)`.
//! * [`plinalg`]: corank mod p, valuation-pivot Smith form, and the
//!   streaming cokernel engine used by the simulations.
//! * [`theory`]: `χ₀`, `χ`, centering, mass function and moments.
//! * [`estimators`]: Monte Carlo and exact estimators of the moments.
//! * [`simulate`]: histograms of centered rank vectors and fit reports.
//! * [`cli`]: the `tricok` command line.
//!
//! Trial loops run on rayon when the `parallel` feature is on (default)
//! and sequentially otherwise; results do not depend on the choice.

pub mod cli;
pub mod entrydist;
pub mod error;
pub mod estimators;
pub mod json;
pub mod modular;
pub mod par;
pub mod pgroup;
pub mod plinalg;
pub mod rng;
pub mod sampler;
pub mod simulate;
pub mod theory;

pub use error::{Error, Result};
