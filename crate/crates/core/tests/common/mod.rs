pub mod battery;
pub mod gen;
