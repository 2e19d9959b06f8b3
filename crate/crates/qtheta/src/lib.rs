//! Graded rings of quantum theta functions on noncommutative tori with real
//! multiplication.
//!
//! A real quadratic irrationality θ with a hyperbolic stabilizer g ∈ SL₂(ℤ)
//! determines a noncommutative torus A_θ together with a family of projective
//! bimodules E_n built from Schwartz spaces S(ℝ × ℤ/c_nℤ). Pairing holomorphic
//! vectors in these bimodules produces quantum theta functions, elements of A_θ
//! whose coefficients are Gaussian theta-like series, and the bimodule tensor
//! structure makes the spaces R_n = ⟨E_n, E_n⟩ into a graded ring.
//!
//! The crate is organised bottom-up:
//!
//! * [`qarith`]: exact arithmetic in real quadratic fields, continued
//!   fractions, stabilizer matrices, and the integer data (aₙ,bₙ,cₙ,dₙ, εₙ)
//!   attached to powers of g.
//! * [`theta`]: classical Riemann theta functions with characteristics, used
//!   as independent oracles.
//! * [`nctorus`]: finitely supported elements of A_θ, the Heisenberg group
//!   action on quasi-periodic functions, and multiplier fixedness checks.
//! * [`bimodule`]: Gaussian vectors in E_n, the two torus actions, L² and
//!   Rieffel inner products, the holomorphic pairing, and the star product
//!   realising the tensor map on finite parts.
//! * [`rings`]: matrix presentations of R_n, numerical rank and generation
//!   checks, and the quadraticity test for the graded ring.

pub mod bimodule;
pub mod nctorus;
pub mod qarith;
pub mod rings;
pub mod theta;
