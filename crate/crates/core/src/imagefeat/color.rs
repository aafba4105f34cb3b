//! Per-channel color histograms in RGB, HSV and CIE L*a*b*.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{RasterImage, Rgb};

pub const BINS_PER_CHANNEL: usize = 10;
pub const HISTOGRAM_LEN: usize = 3 * BINS_PER_CHANNEL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColorSpace {
    Rgb,
    Hsv,
    Lab,
}

impl ColorSpace {
    /// Value range used for binning each channel.
    pub fn channel_ranges(self) -> [(f64, f64); 3] {
        match self {
            ColorSpace::Rgb => [(0.0, 255.0); 3],
            ColorSpace::Hsv => [(0.0, 360.0), (0.0, 1.0), (0.0, 1.0)],
            ColorSpace::Lab => [(0.0, 100.0), (-128.0, 127.0), (-128.0, 127.0)],
        }
    }

    pub fn convert(self, p: Rgb) -> [f64; 3] {
        match self {
            ColorSpace::Rgb => [p[0] as f64, p[1] as f64, p[2] as f64],
            ColorSpace::Hsv => rgb_to_hsv(p),
            ColorSpace::Lab => rgb_to_lab(p),
        }
    }
}

/// Ten bins per channel, concatenated channel-major. Each channel's bins
/// sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorHistogram {
    pub space: ColorSpace,
    pub bins: [f64; HISTOGRAM_LEN],
}

impl ColorHistogram {
    pub fn channel(&self, c: usize) -> &[f64] {
        &self.bins[c * BINS_PER_CHANNEL..(c + 1) * BINS_PER_CHANNEL]
    }
}

/// Bin index of `v` within `[lo, hi]`, clamped to the last bin.
#[inline]
pub fn bin_index(v: f64, lo: f64, hi: f64) -> usize {
    let b = (BINS_PER_CHANNEL as f64 * (v - lo) / (hi - lo)).floor();
    b.clamp(0.0, (BINS_PER_CHANNEL - 1) as f64) as usize
}

pub fn color_histogram(img: &RasterImage, space: ColorSpace) -> Result<ColorHistogram> {
    let n = img.pixels().len();
    if n == 0 {
        return Err(Error::invalid("empty image"));
    }
    let ranges = space.channel_ranges();
    let mut counts = [0usize; HISTOGRAM_LEN];
    for &p in img.pixels() {
        let v = space.convert(p);
        for c in 0..3 {
            counts[c * BINS_PER_CHANNEL + bin_index(v[c], ranges[c].0, ranges[c].1)] += 1;
        }
    }
    let mut bins = [0.0; HISTOGRAM_LEN];
    for (b, &k) in bins.iter_mut().zip(counts.iter()) {
        *b = k as f64 / n as f64;
    }
    Ok(ColorHistogram { space, bins })
}

/// Hue in degrees [0, 360), saturation and value in [0, 1].
pub fn rgb_to_hsv(p: Rgb) -> [f64; 3] {
    let r = p[0] as f64 / 255.0;
    let g = p[1] as f64 / 255.0;
    let b = p[2] as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    [h, s, max]
}

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

const D65_WHITE: [f64; 3] = [0.950_47, 1.0, 1.088_83];

/// sRGB (D65) to CIE L*a*b*.
pub fn rgb_to_lab(p: Rgb) -> [f64; 3] {
    let r = srgb_to_linear(p[0]);
    let g = srgb_to_linear(p[1]);
    let b = srgb_to_linear(p[2]);
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let f = |t: f64| {
        const E: f64 = 6.0 / 29.0;
        if t > E * E * E {
            t.cbrt()
        } else {
            t / (3.0 * E * E) + 4.0 / 29.0
        }
    };
    let fx = f(x / D65_WHITE[0]);
    let fy = f(y / D65_WHITE[1]);
    let fz = f(z / D65_WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_black_rgb() {
        let img = RasterImage::filled(2, 2, [0, 0, 0]).unwrap();
        let h = color_histogram(&img, ColorSpace::Rgb).unwrap();
        for c in 0..3 {
            let mut expect = [0.0; 10];
            expect[0] = 1.0;
            assert_eq!(h.channel(c), &expect);
        }
    }

    #[test]
    fn black_white_split() {
        let img = RasterImage::new(1, 2, vec![[0, 0, 0], [255, 255, 255]]).unwrap();
        let h = color_histogram(&img, ColorSpace::Rgb).unwrap();
        for c in 0..3 {
            let ch = h.channel(c);
            assert_eq!(ch[0], 0.5);
            assert_eq!(ch[9], 0.5);
            assert_eq!(ch[1..9].iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn matches_counting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let img = RasterImage::from_fn(8, 8, |_, _| rng.gen()).unwrap();
        for space in [ColorSpace::Rgb, ColorSpace::Hsv, ColorSpace::Lab] {
            let h = color_histogram(&img, space).unwrap();
            let ranges = space.channel_ranges();
            for (c, &(lo, hi)) in ranges.iter().enumerate() {
                for b in 0..10 {
                    // Counts pixels whose value falls in [edge_b, edge_b+1), with the top
                    // edge closed for the last bin and everything out of range clamped.
                    let count = img
                        .pixels()
                        .iter()
                        .filter(|&&p| {
                            let v = space.convert(p)[c];
                            let width = (hi - lo) / 10.0;
                            let k = ((v - lo) / width).floor() as i64;
                            k.clamp(0, 9) as usize == b
                        })
                        .count();
                    assert_eq!(h.channel(c)[b], count as f64 / 64.0, "{space:?} ch{c} bin{b}");
                }
            }
        }
    }

    #[test]
    fn hsv_primaries() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), [0.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([0, 255, 0]), [120.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([0, 0, 255]), [240.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([0, 0, 0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn lab_reference_points() {
        let w = rgb_to_lab([255, 255, 255]);
        assert!((w[0] - 100.0).abs() < 1e-3 && w[1].abs() < 1e-2 && w[2].abs() < 1e-2);
        let k = rgb_to_lab([0, 0, 0]);
        assert!(k.iter().all(|v| v.abs() < 1e-9));
        // sRGB red: L≈53.24, a≈80.09, b≈67.20
        let r = rgb_to_lab([255, 0, 0]);
        assert!((r[0] - 53.24).abs() < 0.05 && (r[1] - 80.09).abs() < 0.1 && (r[2] - 67.20).abs() < 0.1);
    }
}
