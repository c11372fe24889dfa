//! Reference implementations used as independent oracles in the bevid test
//! suites. Nothing in here may depend on `bevid-core`: each routine is a
//! second, deliberately different path to the same mathematical answer, so a
//! shared bug between implementation and oracle is impossible by
//! construction.

pub mod crc;
pub mod eigen;
pub mod findiff;
pub mod stump;

/// Relative error with an absolute floor, symmetric in both arguments.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-300);
    (a - b).abs() / scale
}
