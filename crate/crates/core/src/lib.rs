pub mod bench;
pub mod calibration;
pub mod circuit;
pub mod device;
pub mod harness;
pub mod sim;
pub mod transpiler;

/// Derives an independent seed for sub-task `tag` of a job seeded with `seed`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    z = (z ^ (z >> 32)).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    z ^ (z >> 32)
}
