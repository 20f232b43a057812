//! Matrix gadgets: `σ(f)`, the label set `H(f)`, the matrices `A`, `B`,
//! `C`, the blocks `P(α)`, `G`, `M(S, K)` and the full reduction.

mod instance;
mod matrices;
mod reduce;
mod sigma;

pub use instance::*;
pub use matrices::*;
pub use reduce::*;
pub use sigma::*;
