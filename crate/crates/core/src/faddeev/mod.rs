//! Faddeev Green function `g(x, k)`, `k·k = E`, `Im k ≠ 0`, and the
//! exponentially growing solutions `ψ(x, k) = e^{ik·x} μ(x, k)` of
//! `-Δψ + vψ = Eψ`.
//!
//! `g` solves `(Δ + 2ik·∇) g = δ`; its symbol is `-1 / (ξ² + 2k·ξ)`.

mod green;
mod mu;

pub use green::{
    apply_green, faddeev_symbol, green_reference, GreenOperator, PaddedGrid, DEFAULT_GREEN_PERIOD_FACTOR,
};
pub use mu::{scattering_h, solve_mu, BoundaryTrace, FaddeevState, MuOptions, MAX_RHO_L};
