pub mod assignment;
pub mod balance;
pub mod league;
pub mod model;
pub mod posterior;
pub mod relabel;
pub mod sampler;
pub mod simulate;
