//! Upright Haar-like features over integral images.
//!
//! A feature is a `kind`, a top-left corner `(x, y)` and a unit cell of
//! `cell_w x cell_h` pixels. The kinds and their values (`S(r)` is the pixel
//! sum of rectangle `r`):
//!
//! | kind                   | cells | value                                  |
//! |------------------------|-------|----------------------------------------|
//! | `TwoHorizontal`        | 2 x 1 | `S(left) - S(right)`                   |
//! | `TwoVertical`          | 1 x 2 | `S(top) - S(bottom)`                   |
//! | `ThreeHorizontal`      | 3 x 1 | `S(left) + S(right) - 2 S(middle)`     |
//! | `ThreeVertical`        | 1 x 3 | `S(top) + S(bottom) - 2 S(middle)`     |
//! | `Four`                 | 2 x 2 | `S(tl) + S(br) - S(tr) - S(bl)`        |
//!
//! Every cell size and every placement that fits inside the window is
//! enumerated, kind-major, then by cell width, cell height, y and x. Each
//! value is a signed difference of equal areas so a constant image gives 0.
//! On a 24 x 24 window the counts are 43200 + 43200 + 27600 + 27600 + 20736
//! = 162336.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pgm::GrayImage;
use crate::dataset::{FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};

/// Cumulative sums with a zero first row and column: `table[(y, x)]` is the
/// sum of pixels strictly above and left of `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    table: Vec<i64>,
}

impl IntegralImage {
    pub fn new(image: &GrayImage) -> Self {
        let pixels: Vec<i64> = image.pixels().iter().map(|&p| i64::from(p)).collect();
        Self::from_values(image.width(), image.height(), &pixels)
    }

    /// `values` is row-major `width x height`.
    pub fn from_values(width: usize, height: usize, values: &[i64]) -> Self {
        assert_eq!(values.len(), width * height);
        let stride = width + 1;
        let mut table = vec![0i64; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0i64;
            for x in 0..width {
                row += values[y * width + x];
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        IntegralImage {
            width,
            height,
            table,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Sum of the `w x h` rectangle with top-left corner `(x, y)`.
    pub fn rect_sum(&self, x: usize, y: usize, w: usize, h: usize) -> i64 {
        debug_assert!(x + w <= self.width && y + h <= self.height);
        let s = self.width + 1;
        let t = &self.table;
        t[(y + h) * s + x + w] - t[y * s + x + w] - t[(y + h) * s + x] + t[y * s + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaarKind {
    TwoHorizontal,
    TwoVertical,
    ThreeHorizontal,
    ThreeVertical,
    Four,
}

impl HaarKind {
    pub const ALL: [HaarKind; 5] = [
        HaarKind::TwoHorizontal,
        HaarKind::TwoVertical,
        HaarKind::ThreeHorizontal,
        HaarKind::ThreeVertical,
        HaarKind::Four,
    ];

    /// Layout in cells (columns, rows).
    pub fn cells(self) -> (usize, usize) {
        match self {
            HaarKind::TwoHorizontal => (2, 1),
            HaarKind::TwoVertical => (1, 2),
            HaarKind::ThreeHorizontal => (3, 1),
            HaarKind::ThreeVertical => (1, 3),
            HaarKind::Four => (2, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HaarFeature {
    pub kind: HaarKind,
    pub x: usize,
    pub y: usize,
    pub cell_w: usize,
    pub cell_h: usize,
}

impl HaarFeature {
    pub fn evaluate(&self, ii: &IntegralImage) -> i64 {
        let (x, y, w, h) = (self.x, self.y, self.cell_w, self.cell_h);
        let r = |cx: usize, cy: usize| ii.rect_sum(x + cx * w, y + cy * h, w, h);
        match self.kind {
            HaarKind::TwoHorizontal => r(0, 0) - r(1, 0),
            HaarKind::TwoVertical => r(0, 0) - r(0, 1),
            HaarKind::ThreeHorizontal => r(0, 0) + r(2, 0) - 2 * r(1, 0),
            HaarKind::ThreeVertical => r(0, 0) + r(0, 2) - 2 * r(0, 1),
            HaarKind::Four => r(0, 0) + r(1, 1) - r(1, 0) - r(0, 1),
        }
    }
}

/// All features fitting a `width x height` window, in enumeration order.
pub fn enumerate_haar(width: usize, height: usize) -> Vec<HaarFeature> {
    let mut out = Vec::new();
    for kind in HaarKind::ALL {
        let (cx, cy) = kind.cells();
        for cell_w in 1..=width / cx {
            for cell_h in 1..=height / cy {
                let (fw, fh) = (cell_w * cx, cell_h * cy);
                for y in 0..=height - fh {
                    for x in 0..=width - fw {
                        out.push(HaarFeature {
                            kind,
                            x,
                            y,
                            cell_w,
                            cell_h,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Feature matrix (one row per image, one column per feature of
/// [`enumerate_haar`]). Images are processed in parallel.
pub fn haar_features(images: &[GrayImage], window: (usize, usize)) -> Result<FeatureMatrix> {
    for img in images {
        if (img.width(), img.height()) != window {
            return Err(Error::InvalidArgument(format!(
                "image is {}x{}, window is {}x{}",
                img.width(),
                img.height(),
                window.0,
                window.1
            )));
        }
    }
    let features = enumerate_haar(window.0, window.1);
    let rows: Vec<Vec<f64>> = images
        .par_iter()
        .map(|img| {
            let ii = IntegralImage::new(img);
            features.iter().map(|f| f.evaluate(&ii) as f64).collect()
        })
        .collect();
    let mut values = Vec::with_capacity(images.len() * features.len());
    for r in rows {
        values.extend(r);
    }
    FeatureMatrix::new(images.len(), features.len(), values)
}

/// Labelled Haar dataset; `labels` are `-1/+1` and must contain both classes.
pub fn extract_haar(
    images: &[GrayImage],
    labels: &[i8],
    window: (usize, usize),
) -> Result<LabeledDataset> {
    if images.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: images.len(),
            got: labels.len(),
        });
    }
    LabeledDataset::new(haar_features(images, window)?, labels.to_vec())
}
