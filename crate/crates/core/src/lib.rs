pub mod numerics;
pub mod distributions;
pub mod sir;
pub mod dro;
pub mod bounds;
