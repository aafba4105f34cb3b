//! Simulated physical execution of the mental image under limited means
//! (palette size, brush shape), its internal evaluation, and the face
//! template used by the analytic check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagefeat::{color_histogram, ColorSpace};
use crate::memory::DomainMemory;
use crate::raster::{luma, RasterImage, Rgb};

pub const TEMPLATE_SIZE: usize = 64;
pub const MIN_TEMPLATE_FACES: usize = 5;
pub const KMEANS_ITERATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Brush {
    /// Disk of radius `brush_radius - 1`.
    Dot,
    /// Square of side `2 * brush_radius - 1`.
    Square,
    /// Horizontal bar `4 * brush_radius - 1` wide.
    Stroke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutionConfig {
    pub palette_size: usize,
    pub brush: Brush,
    pub brush_radius: usize,
    pub seed: u64,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        ExecutionConfig { palette_size: 12, brush: Brush::Square, brush_radius: 2, seed: 1 }
    }
}

impl ExecutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.palette_size < 2 {
            return Err(Error::invalid("palette needs at least two colors"));
        }
        if self.brush_radius < 1 {
            return Err(Error::invalid("brush radius must be at least 1"));
        }
        Ok(())
    }

    /// The fallback used when an execution is rejected: a fine dot brush and
    /// twice the colors.
    pub fn replanned(&self) -> ExecutionConfig {
        ExecutionConfig {
            palette_size: self.palette_size * 2,
            brush: Brush::Dot,
            brush_radius: 1,
            seed: self.seed,
        }
    }

    fn footprint(&self) -> Vec<(isize, isize)> {
        let r = self.brush_radius as isize;
        let mut out = Vec::new();
        let reach = 2 * r;
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let inside = match self.brush {
                    Brush::Dot => dx * dx + dy * dy <= (r - 1) * (r - 1),
                    Brush::Square => dx.abs() < r && dy.abs() < r,
                    Brush::Stroke => dx.abs() < 2 * r && dy.abs() <= (r - 1) / 2,
                };
                if inside {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

/// Mean grayscale face at a canonical 64x64 size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceTemplate {
    pub width: usize,
    pub height: usize,
    pub luminance: Vec<f64>,
}

impl FaceTemplate {
    pub fn from_images(faces: &[&RasterImage]) -> Result<FaceTemplate> {
        if faces.len() < MIN_TEMPLATE_FACES {
            return Err(Error::InsufficientData { needed: MIN_TEMPLATE_FACES, got: faces.len() });
        }
        let mut acc = vec![0.0; TEMPLATE_SIZE * TEMPLATE_SIZE];
        for f in faces {
            let r = f.resize_bilinear(TEMPLATE_SIZE, TEMPLATE_SIZE)?;
            for (a, l) in acc.iter_mut().zip(r.luma()) {
                *a += l;
            }
        }
        let n = faces.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(FaceTemplate { width: TEMPLATE_SIZE, height: TEMPLATE_SIZE, luminance: acc })
    }

    /// Bilinear resampling of the template luminance.
    pub fn resized(&self, width: usize, height: usize) -> Vec<f64> {
        resample_gray(&self.luminance, self.width, self.height, width, height)
    }
}

pub(crate) fn resample_gray(src: &[f64], sw: usize, sh: usize, width: usize, height: usize) -> Vec<f64> {
    let sx = sw as f64 / width as f64;
    let sy = sh as f64 / height as f64;
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let ty = fy - y0 as f64;
        for x in 0..width {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let tx = fx - x0 as f64;
            let top = src[y0 * sw + x0] * (1.0 - tx) + src[y0 * sw + x1] * tx;
            let bot = src[y1 * sw + x0] * (1.0 - tx) + src[y1 * sw + x1] * tx;
            out.push(top * (1.0 - ty) + bot * ty);
        }
    }
    out
}

/// Template from the whole-face entries of the faces domain.
pub fn build_face_template(faces: &DomainMemory) -> Result<FaceTemplate> {
    let whole: Vec<&RasterImage> = faces.entries.iter().filter(|e| e.source.is_whole()).map(|e| &e.image).collect();
    FaceTemplate::from_images(&whole)
}

fn dist2(a: [f64; 3], b: Rgb) -> f64 {
    (0..3).map(|c| (a[c] - b[c] as f64).powi(2)).sum()
}

/// Index of the nearest palette color; ties go to the lowest index.
pub fn nearest_color(palette: &[Rgb], c: [f64; 3]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, &p) in palette.iter().enumerate() {
        let d = dist2(c, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Seeded k-means palette over the image's colors. When the image has no
/// more than `k` distinct colors they are returned unchanged.
pub fn palette(img: &RasterImage, k: usize, seed: u64) -> Vec<Rgb> {
    let mut colors: Vec<Rgb> = img.pixels().to_vec();
    colors.sort_unstable();
    let mut distinct: Vec<(Rgb, f64)> = Vec::new();
    for c in colors {
        match distinct.last_mut() {
            Some((last, n)) if *last == c => *n += 1.0,
            _ => distinct.push((c, 1.0)),
        }
    }
    if distinct.len() <= k {
        return distinct.into_iter().map(|(c, _)| c).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, distinct.len(), k).into_vec();
    picks.sort_unstable();
    let mut centroids: Vec<[f64; 3]> =
        picks.iter().map(|&i| distinct[i].0.map(|v| v as f64)).collect();
    for _ in 0..KMEANS_ITERATIONS {
        let mut sums = vec![[0.0f64; 4]; k];
        for &(c, n) in &distinct {
            let fc = c.map(|v| v as f64);
            let mut best = (0, f64::INFINITY);
            for (i, m) in centroids.iter().enumerate() {
                let d: f64 = (0..3).map(|j| (m[j] - fc[j]).powi(2)).sum();
                if d < best.1 {
                    best = (i, d);
                }
            }
            let s = &mut sums[best.0];
            for j in 0..3 {
                s[j] += fc[j] * n;
            }
            s[3] += n;
        }
        for (m, s) in centroids.iter_mut().zip(&sums) {
            if s[3] > 0.0 {
                *m = [s[0] / s[3], s[1] / s[3], s[2] / s[3]];
            }
        }
    }
    let mut out: Vec<Rgb> = centroids.iter().map(|m| m.map(|v| v.round().clamp(0.0, 255.0) as u8)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Paints the mental image with a limited palette by stamping the brush on
/// a grid of spacing `brush_radius`. Each stamp takes the palette color
/// nearest the mean of the mental pixels it covers; the canvas is first
/// washed with the color nearest the global mean.
pub fn execute(mental: &RasterImage, cfg: &ExecutionConfig) -> Result<RasterImage> {
    cfg.validate()?;
    let pal = palette(mental, cfg.palette_size, cfg.seed);
    let (w, h) = (mental.width(), mental.height());
    let mean = {
        let mut s = [0.0; 3];
        for p in mental.pixels() {
            for c in 0..3 {
                s[c] += p[c] as f64;
            }
        }
        s.map(|v| v / (w * h) as f64)
    };
    let mut canvas = RasterImage::filled(w, h, pal[nearest_color(&pal, mean)])?;
    let foot = cfg.footprint();
    let step = cfg.brush_radius;
    for cy in (0..h).step_by(step) {
        for cx in (0..w).step_by(step) {
            let covered: Vec<(usize, usize)> = foot
                .iter()
                .filter_map(|&(dx, dy)| {
                    let x = cx as isize + dx;
                    let y = cy as isize + dy;
                    (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h).then_some((x as usize, y as usize))
                })
                .collect();
            if covered.is_empty() {
                continue;
            }
            let mut s = [0.0; 3];
            for &(x, y) in &covered {
                let p = mental.get(x, y);
                for c in 0..3 {
                    s[c] += p[c] as f64;
                }
            }
            let color = pal[nearest_color(&pal, s.map(|v| v / covered.len() as f64))];
            for (x, y) in covered {
                canvas.set(x, y, color);
            }
        }
    }
    Ok(canvas)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InternalEval {
    pub score: f64,
    pub pass: bool,
}

/// Agreement between an executed artwork and its mental model:
/// `1 - (0.5 * hsv_tv + 0.5 * luma_mad / 255)` where `hsv_tv` is the L1
/// distance of the HSV histograms divided by 6 (mean per-channel total
/// variation) and `luma_mad` the mean absolute per-pixel luminance
/// difference.
pub fn internal_eval(executed: &RasterImage, mental: &RasterImage, accept_threshold: f64) -> Result<InternalEval> {
    if executed.width() != mental.width() || executed.height() != mental.height() {
        return Err(Error::invalid("internal evaluation needs images of equal size"));
    }
    let ha = color_histogram(executed, ColorSpace::Hsv)?;
    let hb = color_histogram(mental, ColorSpace::Hsv)?;
    let tv: f64 = ha.bins.iter().zip(hb.bins.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 6.0;
    let mad: f64 = executed
        .pixels()
        .iter()
        .zip(mental.pixels())
        .map(|(&a, &b)| (luma(a) - luma(b)).abs())
        .sum::<f64>()
        / executed.pixels().len() as f64;
    let score = (1.0 - (0.5 * tv + 0.5 * mad / 255.0)).clamp(0.0, 1.0);
    Ok(InternalEval { score, pass: score >= accept_threshold })
}
