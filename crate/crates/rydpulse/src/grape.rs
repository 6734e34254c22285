pub mod config;
pub mod cost;
pub mod gradient;
pub mod optimize;
pub mod study;
