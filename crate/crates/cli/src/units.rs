//! File units to SI.

pub use perpcool::constants::AMU;

pub const M_PER_UM: f64 = 1e-6;
pub const M_PER_NM: f64 = 1e-9;
pub const HZ_PER_KHZ: f64 = 1e3;
pub const HZ_PER_MHZ: f64 = 1e6;
