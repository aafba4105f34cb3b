//! Procedural image corpora: stylized faces, flower beds and leaf litter,
//! plus a small flat-color world where every face region has an exact
//! match in the target domain.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::raster::{RasterImage, Rgb};

pub const FIXTURE_SIZE: usize = 64;

struct Canvas {
    w: usize,
    h: usize,
    px: Vec<[f64; 3]>,
}

impl Canvas {
    fn new(w: usize, h: usize, bg: [f64; 3]) -> Self {
        Canvas { w, h, px: vec![bg; w * h] }
    }

    /// Fills an axis-rotated ellipse.
    fn ellipse(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, angle: f64, color: [f64; 3]) {
        let (s, c) = angle.sin_cos();
        let reach = rx.max(ry).ceil() as isize + 1;
        for y in (cy as isize - reach).max(0)..(cy as isize + reach + 1).min(self.h as isize) {
            for x in (cx as isize - reach).max(0)..(cx as isize + reach + 1).min(self.w as isize) {
                let dx = x as f64 + 0.5 - cx;
                let dy = y as f64 + 0.5 - cy;
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                if (u / rx).powi(2) + (v / ry).powi(2) <= 1.0 {
                    self.px[y as usize * self.w + x as usize] = color;
                }
            }
        }
    }

    fn rect(&mut self, x0: usize, y0: usize, w: usize, h: usize, color: [f64; 3]) {
        for y in y0..(y0 + h).min(self.h) {
            for x in x0..(x0 + w).min(self.w) {
                self.px[y * self.w + x] = color;
            }
        }
    }

    fn finish(self, rng: &mut ChaCha8Rng, noise: f64) -> RasterImage {
        let pixels = self
            .px
            .into_iter()
            .map(|p| {
                let n: f64 = if noise > 0.0 { rng.gen_range(-noise..noise) } else { 0.0 };
                [q(p[0] + n), q(p[1] + n), q(p[2] + n)]
            })
            .collect();
        RasterImage::new(self.w, self.h, pixels).expect("canvas dimensions")
    }
}

fn q(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn jitter(rng: &mut ChaCha8Rng, c: [f64; 3], amount: f64) -> [f64; 3] {
    [
        c[0] + rng.gen_range(-amount..amount),
        c[1] + rng.gen_range(-amount..amount),
        c[2] + rng.gen_range(-amount..amount),
    ]
}

const SKIN: [[f64; 3]; 5] = [
    [224.0, 172.0, 140.0],
    [198.0, 134.0, 102.0],
    [241.0, 194.0, 160.0],
    [176.0, 120.0, 88.0],
    [232.0, 184.0, 150.0],
];

/// Frontal stylized faces: hair, skin oval, eyes, brows, nose and mouth on
/// a muted background, with small pose and color jitter.
pub fn faces(n: usize, seed: u64) -> Vec<RasterImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xface);
    (0..n)
        .map(|_| {
            let s = FIXTURE_SIZE as f64;
            let bg = jitter(&mut rng, [70.0, 86.0, 110.0], 20.0);
            let mut cv = Canvas::new(FIXTURE_SIZE, FIXTURE_SIZE, bg);
            let cx = s / 2.0 + rng.gen_range(-1.5..1.5);
            let cy = s / 2.0 + 2.0 + rng.gen_range(-1.5..1.5);
            let skin = { let i = rng.gen_range(0..SKIN.len()); jitter(&mut rng, SKIN[i], 8.0) };
            let hair = jitter(&mut rng, [45.0, 32.0, 24.0], 12.0);
            cv.ellipse(cx, cy - 8.0, 22.0, 20.0, 0.0, hair);
            cv.ellipse(cx, cy + 1.0, 18.0, 23.0, 0.0, skin);
            let shade = [skin[0] * 0.82, skin[1] * 0.8, skin[2] * 0.8];
            for side in [-1.0, 1.0] {
                let ex = cx + side * 8.0;
                let ey = cy - 4.0;
                cv.rect((ex - 5.0) as usize, (ey - 6.0) as usize, 10, 2, hair);
                cv.ellipse(ex, ey, 4.5, 2.6, 0.0, [235.0, 235.0, 230.0]);
                cv.ellipse(ex, ey, 2.2, 2.2, 0.0, [30.0, 25.0, 25.0]);
            }
            cv.ellipse(cx, cy + 4.0, 2.5, 6.0, 0.0, shade);
            cv.ellipse(cx, cy + 13.0, 7.0, 2.2, 0.0, [150.0, 50.0, 55.0]);
            cv.finish(&mut rng, 5.0)
        })
        .collect()
}

const PETALS: [[f64; 3]; 7] = [
    [220.0, 40.0, 50.0],
    [245.0, 210.0, 40.0],
    [240.0, 150.0, 190.0],
    [245.0, 245.0, 240.0],
    [130.0, 60.0, 170.0],
    [250.0, 140.0, 30.0],
    [170.0, 20.0, 40.0],
];

/// Flower beds: several multi-petal blossoms over foliage.
pub fn flowers(n: usize, seed: u64) -> Vec<RasterImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf10e);
    (0..n)
        .map(|_| {
            let bg = jitter(&mut rng, [60.0, 110.0, 50.0], 25.0);
            let mut cv = Canvas::new(FIXTURE_SIZE, FIXTURE_SIZE, bg);
            for _ in 0..rng.gen_range(6..12) {
                let leaf = jitter(&mut rng, [40.0, 95.0, 35.0], 20.0);
                let (x, y) = (rng.gen_range(0.0..64.0), rng.gen_range(0.0..64.0));
                cv.ellipse(x, y, rng.gen_range(5.0..12.0), rng.gen_range(2.0..4.0), rng.gen_range(0.0..PI), leaf);
            }
            for _ in 0..rng.gen_range(4..8) {
                let r: f64 = rng.gen_range(6.0..14.0);
                let (x, y) = (rng.gen_range(4.0..60.0), rng.gen_range(4.0..60.0));
                let petal = { let i = rng.gen_range(0..PETALS.len()); jitter(&mut rng, PETALS[i], 15.0) };
                let k = rng.gen_range(5..9);
                let phase: f64 = rng.gen_range(0.0..1.0);
                for i in 0..k {
                    let a = (i as f64 + phase) * std::f64::consts::TAU / k as f64;
                    cv.ellipse(x + a.cos() * r * 0.55, y + a.sin() * r * 0.55, r * 0.5, r * 0.28, a, petal);
                }
                cv.ellipse(x, y, r * 0.3, r * 0.3, 0.0, jitter(&mut rng, [150.0, 100.0, 20.0], 20.0));
            }
            cv.finish(&mut rng, 6.0)
        })
        .collect()
}

/// Fallen leaves in autumn colors over soil.
pub fn leaves(n: usize, seed: u64) -> Vec<RasterImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1eaf);
    let palette = [[200.0, 90.0, 30.0], [220.0, 170.0, 40.0], [120.0, 140.0, 40.0], [140.0, 60.0, 30.0]];
    (0..n)
        .map(|_| {
            let mut cv = Canvas::new(FIXTURE_SIZE, FIXTURE_SIZE, jitter(&mut rng, [90.0, 65.0, 45.0], 15.0));
            for _ in 0..rng.gen_range(8..14) {
                let c = { let i = rng.gen_range(0..palette.len()); jitter(&mut rng, palette[i], 20.0) };
                let (x, y) = (rng.gen_range(0.0..64.0), rng.gen_range(0.0..64.0));
                let a = rng.gen_range(0.0..PI);
                cv.ellipse(x, y, rng.gen_range(6.0..14.0), rng.gen_range(3.0..6.0), a, c);
            }
            cv.finish(&mut rng, 5.0)
        })
        .collect()
}

/// Seeded uniform RGB noise.
pub fn noise(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RasterImage::from_fn(w, h, |_, _| rng.gen()).expect("noise dimensions")
}

fn quadrants(colors: [Rgb; 4]) -> RasterImage {
    let half = FIXTURE_SIZE / 2;
    RasterImage::from_fn(FIXTURE_SIZE, FIXTURE_SIZE, |x, y| colors[(y / half) * 2 + x / half]).expect("fixture size")
}

/// A world made of flat quadrants.
///
/// Faces all share the luminance layout dark/bright over bright/dark.
/// "Flowers" are flat quadrant images of assorted colors, and the returned
/// input is the first flower image, which follows the face layout: every
/// region of the input has an identical stored crop in the target domain.
pub struct TacWorld {
    pub faces: Vec<RasterImage>,
    pub flowers: Vec<RasterImage>,
    pub input: RasterImage,
}

pub fn tac_world(seed: u64) -> TacWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7ac);
    let mut shade = |base: f64| -> Rgb {
        let b = base + rng.gen_range(-12.0..12.0);
        [q(b + rng.gen_range(-8.0..8.0)), q(b + rng.gen_range(-8.0..8.0)), q(b + rng.gen_range(-8.0..8.0))]
    };
    let faces = (0..24).map(|_| quadrants([shade(50.0), shade(200.0), shade(200.0), shade(50.0)])).collect();
    let input = quadrants([[40, 30, 90], [230, 200, 60], [210, 220, 200], [70, 20, 30]]);
    let mut flowers = vec![input.clone()];
    for i in 0..5u8 {
        flowers.push(quadrants([
            [100 + i * 20, 40, 40],
            [40, 120 + i * 20, 60],
            [50, 60, 110 + i * 25],
            [150, 150 - i * 20, 20 + i * 30],
        ]));
    }
    TacWorld { faces, flowers, input }
}

/// Default desk-scale corpus: 30 faces, 4 flower beds and 3 leaf images.
pub fn sample_corpus(seed: u64) -> Vec<(&'static str, Vec<RasterImage>)> {
    vec![("faces", faces(30, seed)), ("flowers", flowers(4, seed)), ("leaves", leaves(3, seed))]
}

/// Writes `datasets/<domain>/<domain>_NNN.png` style folders under `dir`.
pub fn write_corpus(dir: &Path, corpus: &[(&str, Vec<RasterImage>)]) -> Result<()> {
    for (domain, images) in corpus {
        let d = dir.join(domain);
        std::fs::create_dir_all(&d)?;
        for (i, img) in images.iter().enumerate() {
            img.save_png(d.join(format!("{domain}_{i:03}.png")))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpora_are_deterministic() {
        assert_eq!(faces(3, 1), faces(3, 1));
        assert_ne!(faces(1, 1), faces(1, 2));
        assert_eq!(flowers(2, 4), flowers(2, 4));
        assert_eq!(tac_world(3).input, tac_world(3).flowers[0]);
    }
}
