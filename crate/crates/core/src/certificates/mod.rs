//! PSD factorization witnesses: construction, verification, root
//! extraction, the sqrt condition, and PSD-rank search.

mod constructions;
mod extract;
mod factorization;
pub mod search;
mod sqrt;

pub use constructions::*;
pub use extract::*;
pub use factorization::*;
pub use search::{psd_rank_search, SearchConfig, SearchReport, Verdict, Witness};
pub use sqrt::*;
