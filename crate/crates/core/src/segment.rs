//! Quadtree decomposition of the inspiration image into substitutable
//! regions. Depth, and so granularity, grows with the resolution level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagefeat::FeatureBundle;
use crate::raster::{RasterImage, Rect};

pub const MIN_REGION_SIDE: usize = 8;
pub const MIN_IMAGE_SIDE: usize = 64;
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 1500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub rect: Rect,
    pub patch: RasterImage,
    pub features: FeatureBundle,
    pub depth: usize,
}

/// 1 + round(3 * RL).
pub fn max_depth(resolution_level: f64) -> usize {
    1 + (3.0 * resolution_level.clamp(0.0, 1.0)).round() as usize
}

/// Sum over R, G, B of the population variance inside `r`.
pub fn rgb_variance_sum(img: &RasterImage, r: Rect) -> f64 {
    let n = r.area() as f64;
    let mut sum = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            let p = img.get(x, y);
            for c in 0..3 {
                let v = p[c] as f64;
                sum[c] += v;
                sq[c] += v * v;
            }
        }
    }
    (0..3).map(|c| (sq[c] / n - (sum[c] / n).powi(2)).max(0.0)).sum()
}

/// Leaf rectangles and their depths, ordered row-major by origin.
pub fn quadtree_rects(img: &RasterImage, resolution_level: f64, variance_threshold: f64) -> Result<Vec<(Rect, usize)>> {
    if img.width() < MIN_IMAGE_SIDE || img.height() < MIN_IMAGE_SIDE {
        return Err(Error::invalid(format!(
            "image {}x{} smaller than {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}",
            img.width(),
            img.height()
        )));
    }
    let limit = max_depth(resolution_level);
    let mut leaves = Vec::new();
    let mut stack = vec![(img.bounds(), 0usize)];
    while let Some((r, depth)) = stack.pop() {
        let can_split = depth < limit && r.w / 2 >= MIN_REGION_SIDE && r.h / 2 >= MIN_REGION_SIDE;
        if can_split && rgb_variance_sum(img, r) > variance_threshold {
            let (lw, th) = (r.w / 2, r.h / 2);
            stack.push((Rect::new(r.x, r.y, lw, th), depth + 1));
            stack.push((Rect::new(r.x + lw, r.y, r.w - lw, th), depth + 1));
            stack.push((Rect::new(r.x, r.y + th, lw, r.h - th), depth + 1));
            stack.push((Rect::new(r.x + lw, r.y + th, r.w - lw, r.h - th), depth + 1));
        } else {
            leaves.push((r, depth));
        }
    }
    leaves.sort_by_key(|(r, _)| (r.y, r.x));
    Ok(leaves)
}

pub fn segment_image(img: &RasterImage, resolution_level: f64, variance_threshold: f64) -> Result<Vec<Region>> {
    quadtree_rects(img, resolution_level, variance_threshold)?
        .into_iter()
        .map(|(rect, depth)| {
            let patch = img.crop(rect)?;
            let features = FeatureBundle::extract(&patch, img.width(), img.height())?;
            Ok(Region { rect, patch, features, depth })
        })
        .collect()
}
