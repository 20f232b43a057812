pub mod certificates;
pub mod cube;
pub mod formula;
pub mod gadgets;
pub mod io;
pub mod number;
pub mod poly;
