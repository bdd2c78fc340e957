//! Counter-based random numbers: every draw is a pure hash of its
//! coordinates, so the value never depends on execution order.

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-path key from `(seed, pixel, sample)`.
#[inline]
pub fn path_key(seed: u64, pixel: u32, sample: u32) -> u64 {
    splitmix64(splitmix64(seed) ^ (u64::from(pixel) << 32 | u64::from(sample)))
}

/// Raw 64-bit draw for `(bounce, dim)` along a path.
#[inline]
pub fn draw_u64(key: u64, bounce: u32, dim: u32) -> u64 {
    splitmix64(key ^ splitmix64(u64::from(bounce) << 32 | u64::from(dim)))
}

/// Uniform draw in `[0, 1)` with 24 bits of resolution.
#[inline]
pub fn draw(key: u64, bounce: u32, dim: u32) -> f32 {
    (draw_u64(key, bounce, dim) >> 40) as f32 * (1.0 / (1u64 << 24) as f32)
}
