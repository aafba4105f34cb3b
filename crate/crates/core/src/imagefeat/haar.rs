//! Haar-like responses from an integral image.
//!
//! The twelve templates, in order:
//!
//! | idx | pattern                               | window       |
//! |-----|---------------------------------------|--------------|
//! | 0   | two-rect horizontal  (+left, -right)  | full patch   |
//! | 1   | two-rect horizontal                   | centered 1/2 |
//! | 2   | two-rect vertical    (+top, -bottom)  | full patch   |
//! | 3   | two-rect vertical                     | centered 1/2 |
//! | 4   | three-rect horizontal (+1, -2, +1)    | full patch   |
//! | 5   | three-rect horizontal                 | centered 1/2 |
//! | 6   | three-rect vertical   (+1, -2, +1)    | full patch   |
//! | 7   | three-rect vertical                   | centered 1/2 |
//! | 8   | checkerboard (+TL, -TR, -BL, +BR)     | full patch   |
//! | 9   | checkerboard                          | centered 1/2 |
//! | 10  | center-surround (+4 center, -1 whole) | full patch   |
//! | 11  | center-surround                       | centered 1/2 |
//!
//! Each window is shrunk to the nearest multiple of the pattern's cell
//! count and re-centered so that every pattern has zero response on a
//! constant patch. Responses are divided by `patch_area * 255`.

use serde::{Deserialize, Serialize};

use crate::raster::{RasterImage, Rect};

pub const HAAR_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarDescriptor {
    pub responses: [f64; HAAR_LEN],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaarPattern {
    TwoHorizontal,
    TwoVertical,
    ThreeHorizontal,
    ThreeVertical,
    Checkerboard,
    CenterSurround,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaarWindow {
    Full,
    CenteredHalf,
}

pub const HAAR_TEMPLATES: [(HaarPattern, HaarWindow); HAAR_LEN] = [
    (HaarPattern::TwoHorizontal, HaarWindow::Full),
    (HaarPattern::TwoHorizontal, HaarWindow::CenteredHalf),
    (HaarPattern::TwoVertical, HaarWindow::Full),
    (HaarPattern::TwoVertical, HaarWindow::CenteredHalf),
    (HaarPattern::ThreeHorizontal, HaarWindow::Full),
    (HaarPattern::ThreeHorizontal, HaarWindow::CenteredHalf),
    (HaarPattern::ThreeVertical, HaarWindow::Full),
    (HaarPattern::ThreeVertical, HaarWindow::CenteredHalf),
    (HaarPattern::Checkerboard, HaarWindow::Full),
    (HaarPattern::Checkerboard, HaarWindow::CenteredHalf),
    (HaarPattern::CenterSurround, HaarWindow::Full),
    (HaarPattern::CenterSurround, HaarWindow::CenteredHalf),
];

impl HaarPattern {
    fn cells(self) -> (usize, usize) {
        match self {
            HaarPattern::TwoHorizontal => (2, 1),
            HaarPattern::TwoVertical => (1, 2),
            HaarPattern::ThreeHorizontal => (3, 1),
            HaarPattern::ThreeVertical => (1, 3),
            HaarPattern::Checkerboard => (2, 2),
            HaarPattern::CenterSurround => (4, 4),
        }
    }
}

/// Weighted rectangles making up one template on a `w` x `h` patch. Empty
/// when the patch is too small to hold the pattern.
pub fn template_rects(pattern: HaarPattern, window: HaarWindow, w: usize, h: usize) -> Vec<(Rect, f64)> {
    let (ww, wh) = match window {
        HaarWindow::Full => (w, h),
        HaarWindow::CenteredHalf => ((w / 2).max(1), (h / 2).max(1)),
    };
    let (mx, my) = pattern.cells();
    let sw = ww - ww % mx;
    let sh = wh - wh % my;
    if sw == 0 || sh == 0 {
        return Vec::new();
    }
    let x0 = (w - sw) / 2;
    let y0 = (h - sh) / 2;
    let (cw, ch) = (sw / mx, sh / my);
    let r = |cx: usize, cy: usize, nx: usize, ny: usize| Rect::new(x0 + cx * cw, y0 + cy * ch, nx * cw, ny * ch);
    match pattern {
        HaarPattern::TwoHorizontal => vec![(r(0, 0, 1, 1), 1.0), (r(1, 0, 1, 1), -1.0)],
        HaarPattern::TwoVertical => vec![(r(0, 0, 1, 1), 1.0), (r(0, 1, 1, 1), -1.0)],
        HaarPattern::ThreeHorizontal => vec![(r(0, 0, 1, 1), 1.0), (r(1, 0, 1, 1), -2.0), (r(2, 0, 1, 1), 1.0)],
        HaarPattern::ThreeVertical => vec![(r(0, 0, 1, 1), 1.0), (r(0, 1, 1, 1), -2.0), (r(0, 2, 1, 1), 1.0)],
        HaarPattern::Checkerboard => vec![
            (r(0, 0, 1, 1), 1.0),
            (r(1, 0, 1, 1), -1.0),
            (r(0, 1, 1, 1), -1.0),
            (r(1, 1, 1, 1), 1.0),
        ],
        HaarPattern::CenterSurround => vec![(r(0, 0, 4, 4), -1.0), (r(1, 1, 2, 2), 4.0)],
    }
}

/// Summed-area table over BT.601 grayscale, with a zero first row/column.
pub struct IntegralImage {
    width: usize,
    table: Vec<f64>,
}

impl IntegralImage {
    pub fn new(img: &RasterImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let gray = img.luma();
        let stride = w + 1;
        let mut table = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += gray[y * w + x];
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        IntegralImage { width: w, table }
    }

    #[inline]
    pub fn sum(&self, r: Rect) -> f64 {
        let s = self.width + 1;
        let (x0, y0, x1, y1) = (r.x, r.y, r.x + r.w, r.y + r.h);
        self.table[y1 * s + x1] - self.table[y0 * s + x1] - self.table[y1 * s + x0] + self.table[y0 * s + x0]
    }
}

pub fn haar_descriptor(img: &RasterImage) -> HaarDescriptor {
    let ii = IntegralImage::new(img);
    let (w, h) = (img.width(), img.height());
    let norm = (w * h) as f64 * 255.0;
    let mut responses = [0.0; HAAR_LEN];
    for (out, &(pattern, window)) in responses.iter_mut().zip(HAAR_TEMPLATES.iter()) {
        let v: f64 = template_rects(pattern, window, w, h)
            .into_iter()
            .map(|(r, wgt)| wgt * ii.sum(r))
            .sum();
        *out = v / norm;
    }
    HaarDescriptor { responses }
}
