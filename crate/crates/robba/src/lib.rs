//! Finite-precision operator calculus for rank-one (φ,Γ)-modules over the
//! Robba ring: p-adic and cyclotomic arithmetic, truncated Laurent series with
//! φ, ψ, γ and ∂, distributions via the Amice transform, characters and their
//! ε-constants, explicit cocycles, and a verification harness.

pub mod characters;
pub mod cyclo;
pub mod dif;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod padic;
pub mod phigamma;
pub mod series;

pub use error::{Error, Result};
pub use characters::PadicCharacter;
pub use cyclo::CycloElement;
pub use dif::DifElement;
pub use padic::{PadicCtx, PadicScalar};
pub use series::SeriesElement;
