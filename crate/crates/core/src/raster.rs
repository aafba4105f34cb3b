//! Plain RGB raster used throughout the engine.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, px: usize, py: usize) -> bool {
        px >= self.x && px < self.x + self.w && py >= self.y && py < self.y + self.h
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x < other.x + other.w
            && other.x < self.x + self.w
            && self.y < other.y + other.h
            && other.y < self.y + self.h
    }
}

/// Row-major RGB image. Width and height are always at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(RasterImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    pub fn crop(&self, r: Rect) -> Result<RasterImage> {
        if r.w == 0 || r.h == 0 || r.x + r.w > self.width || r.y + r.h > self.height {
            return Err(Error::invalid(format!(
                "crop {r:?} outside {}x{}",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(r.area());
        for y in r.y..r.y + r.h {
            pixels.extend_from_slice(&self.pixels[y * self.width + r.x..y * self.width + r.x + r.w]);
        }
        RasterImage::new(r.w, r.h, pixels)
    }

    /// Copies `patch` into this image with its top-left corner at (x, y).
    pub fn blit(&mut self, patch: &RasterImage, x: usize, y: usize) -> Result<()> {
        if x + patch.width > self.width || y + patch.height > self.height {
            return Err(Error::invalid("blit outside destination"));
        }
        for py in 0..patch.height {
            let dst = (y + py) * self.width + x;
            let src = py * patch.width;
            self.pixels[dst..dst + patch.width].copy_from_slice(&patch.pixels[src..src + patch.width]);
        }
        Ok(())
    }

    /// Bilinear resampling with pixel-center alignment. Same-size resampling
    /// returns an exact copy.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<RasterImage> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("resize to empty image"));
        }
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let ty = fy - y0 as f64;
            for x in 0..width {
                let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let tx = fx - x0 as f64;
                let (a, b, c, d) = (self.get(x0, y0), self.get(x1, y0), self.get(x0, y1), self.get(x1, y1));
                let mut out = [0u8; 3];
                for ch in 0..3 {
                    let top = a[ch] as f64 * (1.0 - tx) + b[ch] as f64 * tx;
                    let bot = c[ch] as f64 * (1.0 - tx) + d[ch] as f64 * tx;
                    out[ch] = (top * (1.0 - ty) + bot * ty).round().clamp(0.0, 255.0) as u8;
                }
                pixels.push(out);
            }
        }
        RasterImage::new(width, height, pixels)
    }

    /// BT.601 luma per pixel, on the 0..=255 scale.
    pub fn luma(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| luma(p)).collect()
    }

    pub fn mean_luma(&self) -> f64 {
        self.pixels.iter().map(|&p| luma(p)).sum::<f64>() / self.pixels.len() as f64
    }

    pub fn distinct_colors(&self) -> usize {
        let mut v = self.pixels.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    pub fn decode(bytes: &[u8]) -> Result<RasterImage> {
        let img = image::load_from_memory(bytes).map_err(|e| Error::Decode(e.to_string()))?;
        Self::from_dynamic(img)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<RasterImage> {
        let bytes = std::fs::read(path.as_ref())?;
        Self::decode(&bytes)
    }

    fn from_dynamic(img: image::DynamicImage) -> Result<RasterImage> {
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        let pixels = rgb.pixels().map(|p| p.0).collect();
        RasterImage::new(w as usize, h as usize, pixels)
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let buf: Vec<u8> = self.pixels.iter().flat_map(|p| p.iter().copied()).collect();
        let img = image::RgbImage::from_raw(self.width as u32, self.height as u32, buf)
            .ok_or_else(|| Error::invalid("raster buffer size"))?;
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png)
            .map_err(|e| Error::Decode(e.to_string()))?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.encode_png()?)?;
        Ok(())
    }
}

/// ITU-R BT.601 luma.
#[inline]
pub fn luma(p: Rgb) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}
