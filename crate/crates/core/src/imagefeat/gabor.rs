//! Twelve-channel Gabor energy descriptor (4 scales x 3 orientations).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::raster::RasterImage;

pub const GABOR_SIGMAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const GABOR_ORIENTATIONS_DEG: [f64; 3] = [0.0, 60.0, 120.0];
pub const GABOR_LEN: usize = GABOR_SIGMAS.len() * GABOR_ORIENTATIONS_DEG.len();

const ASPECT: f64 = 0.5;
const PHASE: f64 = 0.0;

/// Mean squared filter response per (scale, orientation), scale-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborDescriptor {
    pub energies: [f64; GABOR_LEN],
}

/// Square real Gabor kernel with wavelength 2σ, aspect 0.5 and zero phase,
/// corrected to zero mean and scaled to unit L1 norm, so a response never
/// exceeds the gray range of the patch and energies stay within [0, 1].
/// The window half-width is ceil(3σ).
#[derive(Debug, Clone)]
pub struct GaborKernel {
    pub radius: usize,
    pub taps: Vec<f64>,
}

impl GaborKernel {
    pub fn new(sigma: f64, theta_deg: f64) -> Self {
        let radius = (3.0 * sigma).ceil() as usize;
        let side = 2 * radius + 1;
        let theta = theta_deg.to_radians();
        let (s, c) = theta.sin_cos();
        let lambda = 2.0 * sigma;
        let mut taps = Vec::with_capacity(side * side);
        for j in 0..side {
            let y = j as f64 - radius as f64;
            for i in 0..side {
                let x = i as f64 - radius as f64;
                let xr = x * c + y * s;
                let yr = -x * s + y * c;
                let env = (-(xr * xr + ASPECT * ASPECT * yr * yr) / (2.0 * sigma * sigma)).exp();
                taps.push(env * (2.0 * PI * xr / lambda + PHASE).cos());
            }
        }
        let mean = taps.iter().sum::<f64>() / taps.len() as f64;
        taps.iter_mut().for_each(|t| *t -= mean);
        let l1: f64 = taps.iter().map(|t| t.abs()).sum();
        taps.iter_mut().for_each(|t| *t /= l1);
        GaborKernel { radius, taps }
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }
}

fn bank() -> &'static [GaborKernel] {
    static BANK: std::sync::OnceLock<Vec<GaborKernel>> = std::sync::OnceLock::new();
    BANK.get_or_init(|| {
        GABOR_SIGMAS
            .iter()
            .flat_map(|&s| GABOR_ORIENTATIONS_DEG.iter().map(move |&o| GaborKernel::new(s, o)))
            .collect()
    })
}

/// Grayscale on [0, 1], edge-replicated by `pad` pixels on every side.
fn padded_gray(img: &RasterImage, pad: usize) -> (Vec<f64>, usize) {
    let (w, h) = (img.width(), img.height());
    let pw = w + 2 * pad;
    let ph = h + 2 * pad;
    let gray = img.luma();
    let mut out = Vec::with_capacity(pw * ph);
    for y in 0..ph {
        let sy = (y as isize - pad as isize).clamp(0, h as isize - 1) as usize;
        for x in 0..pw {
            let sx = (x as isize - pad as isize).clamp(0, w as isize - 1) as usize;
            out.push(gray[sy * w + sx] / 255.0);
        }
    }
    (out, pw)
}

pub fn gabor_energy(img: &RasterImage, kernel: &GaborKernel) -> f64 {
    let (w, h) = (img.width(), img.height());
    let r = kernel.radius;
    let side = kernel.side();
    let (padded, pw) = padded_gray(img, r);
    let mut total = 0.0;
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for j in 0..side {
                let row = &padded[(y + j) * pw + x..(y + j) * pw + x + side];
                let krow = &kernel.taps[j * side..(j + 1) * side];
                acc += row.iter().zip(krow).map(|(a, b)| a * b).sum::<f64>();
            }
            total += acc * acc;
        }
    }
    total / (w * h) as f64
}

pub fn gabor_descriptor(img: &RasterImage) -> GaborDescriptor {
    let mut energies = [0.0; GABOR_LEN];
    for (e, k) in energies.iter_mut().zip(bank()) {
        *e = gabor_energy(img, k);
    }
    GaborDescriptor { energies }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotate_180(img: &RasterImage) -> RasterImage {
        let (w, h) = (img.width(), img.height());
        RasterImage::from_fn(w, h, |x, y| img.get(w - 1 - x, h - 1 - y)).unwrap()
    }

    #[test]
    fn kernels_are_zero_mean_and_point_symmetric() {
        for k in bank() {
            assert!(k.taps.iter().sum::<f64>().abs() < 1e-9);
            let n = k.taps.len();
            for i in 0..n {
                assert!((k.taps[i] - k.taps[n - 1 - i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energies_bounded_by_gray_range() {
        let img = RasterImage::from_fn(24, 24, |x, y| if (x + y) % 2 == 0 { [0; 3] } else { [255; 3] }).unwrap();
        assert!(gabor_descriptor(&img).energies.iter().all(|&e| (0.0..=1.0).contains(&e)));
    }

    #[test]
    fn constant_patch_has_no_energy() {
        let img = RasterImage::filled(20, 20, [128, 128, 128]).unwrap();
        let d = gabor_descriptor(&img);
        assert!(d.energies.iter().all(|&e| e.abs() < 1e-20), "{:?}", d.energies);
    }

    #[test]
    fn tiny_patch_is_padded() {
        let img = RasterImage::filled(1, 1, [200, 10, 10]).unwrap();
        let d = gabor_descriptor(&img);
        assert!(d.energies.iter().all(|e| e.is_finite() && *e >= 0.0));
    }

    #[test]
    fn vertical_stripes_prefer_zero_orientation() {
        // Period 4 px = wavelength for sigma 2.
        let img = RasterImage::from_fn(32, 32, |x, _| if (x / 2) % 2 == 0 { [0; 3] } else { [255; 3] }).unwrap();
        let d = gabor_descriptor(&img);
        let s = 1; // sigma = 2
        let e0 = d.energies[s * 3];
        assert!(e0 > d.energies[s * 3 + 1] && e0 > d.energies[s * 3 + 2], "{:?}", &d.energies[3..6]);
    }

    #[test]
    fn direct_convolution_oracle_single_pixel() {
        // Response at one pixel computed by explicit clamped indexing.
        let img = RasterImage::from_fn(9, 7, |x, y| [(x * 25) as u8, (y * 30) as u8, ((x + y) * 10) as u8]).unwrap();
        let k = GaborKernel::new(1.0, 60.0);
        let gray = img.luma();
        let mut total = 0.0;
        for y in 0..7isize {
            for x in 0..9isize {
                let mut acc = 0.0;
                let r = k.radius as isize;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let sx = (x + dx).clamp(0, 8) as usize;
                        let sy = (y + dy).clamp(0, 6) as usize;
                        acc += k.taps[((dy + r) * (2 * r + 1) + dx + r) as usize] * gray[sy * 9 + sx] / 255.0;
                    }
                }
                total += acc * acc;
            }
        }
        let expect = total / 63.0;
        assert!((gabor_energy(&img, &k) - expect).abs() < 1e-12);
    }

    #[test]
    fn rotation_by_half_turn_is_invisible() {
        let img = RasterImage::from_fn(17, 13, |x, y| [((x * 37 + y * 11) % 256) as u8, (x * y % 256) as u8, 9]).unwrap();
        let a = gabor_descriptor(&img);
        let b = gabor_descriptor(&rotate_180(&img));
        for (x, y) in a.energies.iter().zip(b.energies.iter()) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-12), "{x} vs {y}");
        }
    }
}
