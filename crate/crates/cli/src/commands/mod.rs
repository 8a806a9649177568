pub mod duality_gap;
pub mod gradient_flow;
pub mod plan;
pub mod spfd;
