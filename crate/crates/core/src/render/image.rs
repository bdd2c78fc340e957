use std::io::Write;

use crate::error::{Error, Result};

/// Linear RGB image, row-major from the top-left pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[f32; 3]>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, [0.0; 3])
    }

    pub fn filled(width: u32, height: u32, rgb: [f32; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [f32; 3] {
        self.pixels[(y * self.width + x) as usize]
    }

    /// Bitwise equality, distinguishing `-0.0` and NaN payloads.
    pub fn bit_eq(&self, o: &Image) -> bool {
        self.width == o.width
            && self.height == o.height
            && self
                .pixels
                .iter()
                .zip(&o.pixels)
                .all(|(a, b)| a.map(f32::to_bits) == b.map(f32::to_bits))
    }

    /// Binary PPM (P6), 8 bits per channel after clamping to `[0, 1]` and a
    /// 1/2.2 gamma encode.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self.pixels.iter().flat_map(|p| p.map(encode_gamma)).collect();
        w.write_all(&bytes)?;
        Ok(())
    }
}

#[inline]
fn encode_gamma(v: f32) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v.powf(1.0 / 2.2) * 255.0 + 0.5) as u8
}

/// Peak signal-to-noise ratio in dB for images with channels in `[0, 1]`.
/// Identical images give `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    if a.pixels.is_empty() {
        return Ok(f64::INFINITY);
    }
    let sum: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .flat_map(|(p, q)| (0..3).map(move |k| (f64::from(p[k]) - f64::from(q[k])).powi(2)))
        .sum();
    let mse = sum / (a.pixels.len() * 3) as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (1.0 / mse).log10())
    }
}
