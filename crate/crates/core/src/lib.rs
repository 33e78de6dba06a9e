pub mod cli;
pub mod coeff;
pub mod graphs;
pub mod operators;
pub mod polyring;
pub mod series;
pub mod surfaces;
