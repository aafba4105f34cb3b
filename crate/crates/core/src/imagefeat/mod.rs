//! Per-patch descriptors: three color histograms, a Gabor energy bank and
//! Haar-like responses, plus coarse "general" features used by the hub.

mod color;
mod gabor;
mod haar;

pub use color::{
    bin_index, color_histogram, rgb_to_hsv, rgb_to_lab, ColorHistogram, ColorSpace, BINS_PER_CHANNEL,
    HISTOGRAM_LEN,
};
pub use gabor::{gabor_descriptor, gabor_energy, GaborDescriptor, GaborKernel, GABOR_LEN, GABOR_ORIENTATIONS_DEG, GABOR_SIGMAS};
pub use haar::{
    haar_descriptor, template_rects, HaarDescriptor, HaarPattern, HaarWindow, IntegralImage, HAAR_LEN, HAAR_TEMPLATES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RasterImage;

pub const DETAIL_LEN: usize = 3 * HISTOGRAM_LEN + GABOR_LEN + HAAR_LEN;

/// Bounding-box size relative to its canvas, and mean luminance, all on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralFeatures {
    pub bbox_w: f64,
    pub bbox_h: f64,
    pub mean_luminance: f64,
}

impl GeneralFeatures {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.bbox_w, self.bbox_h, self.mean_luminance]
    }
}

pub fn general_features(
    img: &RasterImage,
    bbox_w: usize,
    bbox_h: usize,
    canvas_w: usize,
    canvas_h: usize,
) -> Result<GeneralFeatures> {
    if canvas_w == 0 || canvas_h == 0 {
        return Err(Error::invalid("zero canvas dimension"));
    }
    if bbox_w > canvas_w || bbox_h > canvas_h {
        return Err(Error::invalid(format!(
            "bbox {bbox_w}x{bbox_h} larger than canvas {canvas_w}x{canvas_h}"
        )));
    }
    Ok(GeneralFeatures {
        bbox_w: bbox_w as f64 / canvas_w as f64,
        bbox_h: bbox_h as f64 / canvas_h as f64,
        mean_luminance: (img.mean_luma() / 255.0).clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DescriptorKind {
    Rgb,
    Hsv,
    Lab,
    Gabor,
    Haar,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 5] = [
        DescriptorKind::Rgb,
        DescriptorKind::Hsv,
        DescriptorKind::Lab,
        DescriptorKind::Gabor,
        DescriptorKind::Haar,
    ];

    pub fn dim(self) -> usize {
        match self {
            DescriptorKind::Rgb | DescriptorKind::Hsv | DescriptorKind::Lab => HISTOGRAM_LEN,
            DescriptorKind::Gabor => GABOR_LEN,
            DescriptorKind::Haar => HAAR_LEN,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Rgb => "rgb",
            DescriptorKind::Hsv => "hsv",
            DescriptorKind::Lab => "lab",
            DescriptorKind::Gabor => "gabor",
            DescriptorKind::Haar => "haar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub rgb: ColorHistogram,
    pub hsv: ColorHistogram,
    pub lab: ColorHistogram,
    pub gabor: GaborDescriptor,
    pub haar: HaarDescriptor,
    pub general: GeneralFeatures,
}

impl FeatureBundle {
    /// Features of `patch`, whose bounding box is the patch itself placed on a
    /// `canvas_w` x `canvas_h` canvas.
    pub fn extract(patch: &RasterImage, canvas_w: usize, canvas_h: usize) -> Result<FeatureBundle> {
        Ok(FeatureBundle {
            rgb: color_histogram(patch, ColorSpace::Rgb)?,
            hsv: color_histogram(patch, ColorSpace::Hsv)?,
            lab: color_histogram(patch, ColorSpace::Lab)?,
            gabor: gabor_descriptor(patch),
            haar: haar_descriptor(patch),
            general: general_features(patch, patch.width(), patch.height(), canvas_w, canvas_h)?,
        })
    }

    pub fn descriptor(&self, kind: DescriptorKind) -> &[f64] {
        match kind {
            DescriptorKind::Rgb => &self.rgb.bins,
            DescriptorKind::Hsv => &self.hsv.bins,
            DescriptorKind::Lab => &self.lab.bins,
            DescriptorKind::Gabor => &self.gabor.energies,
            DescriptorKind::Haar => &self.haar.responses,
        }
    }

    /// The five descriptors concatenated (rgb, hsv, lab, gabor, haar).
    pub fn detail_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(DETAIL_LEN);
        for k in DescriptorKind::ALL {
            v.extend_from_slice(self.descriptor(k));
        }
        v
    }
}

/// Euclidean distance over the detail vector with one weight per descriptor
/// kind. The default weights are all one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetailMetric {
    pub weights: [f64; 5],
}

impl Default for DetailMetric {
    fn default() -> Self {
        DetailMetric { weights: [1.0; 5] }
    }
}

impl DetailMetric {
    pub fn distance(&self, a: &FeatureBundle, b: &FeatureBundle) -> f64 {
        let mut acc = 0.0;
        for k in DescriptorKind::ALL {
            let w = self.weights[k.index()];
            acc += w * squared_distance(a.descriptor(k), b.descriptor(k));
        }
        acc.sqrt()
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}
