//! In-memory image types and their PNG round trips.
//!
//! Color images hold RGB floats in [0,1], row-major, channel-interleaved;
//! masks hold {0,1} bytes. On disk both are 8-bit PNGs (mask: 0 = background,
//! 255 = foreground).

use std::path::Path;

use image::{GrayImage, RgbImage};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    pub width: usize,
    pub height: usize,
    /// `height × width × 3`, RGB interleaved, values in [0,1].
    pub data: Vec<f32>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height * 3] }
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i] = rgb[0];
        self.data[i + 1] = rgb[1];
        self.data[i + 2] = rgb[2];
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> =
            self.data.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        let img = RgbImage::from_raw(self.width as u32, self.height as u32, bytes)
            .expect("buffer size matches dimensions");
        img.save(path)?;
        Ok(())
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)?.into_rgb8();
        let (width, height) = (img.width() as usize, img.height() as usize);
        let data = img.into_raw().iter().map(|&b| b as f32 / 255.0).collect();
        Ok(Self { width, height, data })
    }

    /// Area-average resample (exact box filter; handles fractional boxes, so
    /// it is exact for integer downscale factors).
    pub fn resize(&self, width: usize, height: usize) -> Self {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let mut out = ColorImage::new(width, height);
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        for ty in 0..height {
            for tx in 0..width {
                let mut acc = [0.0f64; 3];
                let mut total = 0.0f64;
                box_filter(tx as f64 * sx, (tx + 1) as f64 * sx, self.width, |x, wx| {
                    box_filter(ty as f64 * sy, (ty + 1) as f64 * sy, self.height, |y, wy| {
                        let p = self.pixel(x, y);
                        let w = wx * wy;
                        acc[0] += p[0] as f64 * w;
                        acc[1] += p[1] as f64 * w;
                        acc[2] += p[2] as f64 * w;
                        total += w;
                    });
                });
                out.set_pixel(tx, ty, [
                    (acc[0] / total) as f32,
                    (acc[1] / total) as f32,
                    (acc[2] / total) as f32,
                ]);
            }
        }
        out
    }
}

/// Visit integer cells overlapped by `[lo, hi)` with their coverage weights.
fn box_filter(lo: f64, hi: f64, limit: usize, mut visit: impl FnMut(usize, f64)) {
    let first = lo.floor() as usize;
    let last = (hi.ceil() as usize).min(limit);
    for c in first..last {
        let cover = (hi.min((c + 1) as f64) - lo.max(c as f64)).max(0.0);
        if cover > 0.0 {
            visit(c, cover);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskImage {
    pub width: usize,
    pub height: usize,
    /// `height × width`, values in {0, 1}.
    pub data: Vec<u8>,
}

impl MaskImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn foreground_fraction(&self) -> f64 {
        let fg: usize = self.data.iter().map(|&v| v as usize).sum();
        fg as f64 / self.data.len() as f64
    }

    /// Any foreground pixel within `radius` (Chebyshev) of `(x, y)`?
    pub fn foreground_near(&self, x: i64, y: i64, radius: i64) -> bool {
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0
                    && ny >= 0
                    && (nx as usize) < self.width
                    && (ny as usize) < self.height
                    && self.get(nx as usize, ny as usize) == 1
                {
                    return true;
                }
            }
        }
        false
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self.data.iter().map(|&v| if v > 0 { 255 } else { 0 }).collect();
        let img = GrayImage::from_raw(self.width as u32, self.height as u32, bytes)
            .expect("buffer size matches dimensions");
        img.save(path)?;
        Ok(())
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)?.into_luma8();
        let (width, height) = (img.width() as usize, img.height() as usize);
        let data = img.into_raw().iter().map(|&b| u8::from(b >= 128)).collect();
        Ok(Self { width, height, data })
    }

    /// Area-average then threshold at 0.5.
    pub fn resize(&self, width: usize, height: usize) -> Self {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let mut out = MaskImage::new(width, height);
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        for ty in 0..height {
            for tx in 0..width {
                let mut acc = 0.0f64;
                let mut total = 0.0f64;
                box_filter(tx as f64 * sx, (tx + 1) as f64 * sx, self.width, |x, wx| {
                    box_filter(ty as f64 * sy, (ty + 1) as f64 * sy, self.height, |y, wy| {
                        acc += self.get(x, y) as f64 * wx * wy;
                        total += wx * wy;
                    });
                });
                out.set(tx, ty, u8::from(acc / total >= 0.5));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.width * self.height {
            return Err(Error::ShapeMismatch("mask buffer size".into()));
        }
        if !self.data.iter().all(|&v| v <= 1) {
            return Err(Error::ShapeMismatch("mask values must be 0 or 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_png_round_trip_is_exact_for_quantized_values() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = ColorImage::new(5, 4);
        for (i, v) in img.data.iter_mut().enumerate() {
            *v = (i % 256) as f32 / 255.0;
        }
        let path = dir.path().join("c.png");
        img.save_png(&path).unwrap();
        let back = ColorImage::load_png(&path).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn mask_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut mask = MaskImage::new(4, 3);
        mask.set(1, 2, 1);
        mask.set(3, 0, 1);
        let path = dir.path().join("m.png");
        mask.save_png(&path).unwrap();
        assert_eq!(MaskImage::load_png(&path).unwrap(), mask);
    }

    #[test]
    fn integer_downscale_is_block_average() {
        let mut img = ColorImage::new(4, 2);
        for x in 0..4 {
            for y in 0..2 {
                let v = if x < 2 { 1.0 } else { 0.0 };
                img.set_pixel(x, y, [v, v, v]);
            }
        }
        let small = img.resize(2, 1);
        assert_eq!(small.pixel(0, 0), [1.0, 1.0, 1.0]);
        assert_eq!(small.pixel(1, 0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn mask_resize_preserves_solid_regions() {
        let mut mask = MaskImage::new(8, 8);
        for y in 0..8 {
            for x in 0..4 {
                mask.set(x, y, 1);
            }
        }
        let small = mask.resize(4, 4);
        assert!((small.foreground_fraction() - 0.5).abs() < 1e-9);
    }
}
