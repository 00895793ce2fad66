//! Raster types and the pure pixel operations the pipeline is built from.
//!
//! Every function here is deterministic and allocation-only: inputs are never
//! mutated and there is no hidden state, so they can be called from any thread.

mod components;
mod geometry;
mod hull;
mod morphology;

pub use components::connected_components;
pub use geometry::{bbox_iou, expand_bbox};
pub use hull::convex_hull_fill;
pub use morphology::{dilate, erode};

use crate::error::{Error, Result};

/// An 8-bit RGB image, row-major, three bytes per pixel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("frame dimensions must be positive"));
        }
        if data.len() != width * height * 3 {
            return Err(Error::Format(format!(
                "expected {} bytes for a {width}x{height} RGB frame, got {}",
                width * height * 3,
                data.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            data,
        })
    }

    /// A frame with every pixel set to `rgb`.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Frame {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// The whole frame as a box.
    pub fn bounds(&self) -> BoundingBox {
        BoundingBox::new(0, 0, self.width, self.height)
    }
}

/// An 8-bit single-channel image, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::Format(format!(
                "expected {} bytes for a {width}x{height} gray image, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        GrayImage {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }
}

/// A binary mask, row-major. Out-of-range reads are a programming error.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// An all-clear mask.
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Format(format!(
                "expected {} bits for a {width}x{height} mask, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    /// Sets every pixel of `blob`.
    pub fn paint(&mut self, blob: &Blob) {
        for &(x, y) in blob.pixels() {
            self.set(x, y, true);
        }
    }

    /// Set pixels in raster order as `(x, y)`.
    pub fn set_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

/// Axis-aligned box in pixel coordinates: covers `x..x+w` by `y..y+h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundingBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl BoundingBox {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        BoundingBox { x, y, w, h }
    }

    /// Exclusive right edge.
    pub fn right(&self) -> usize {
        self.x + self.w
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn fits_within(&self, width: usize, height: usize) -> bool {
        self.w >= 1 && self.h >= 1 && self.right() <= width && self.bottom() <= height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x0 < x1 && y0 < y1).then(|| BoundingBox::new(x0, y0, x1 - x0, y1 - y0))
    }

    fn out_of_bounds(&self, width: usize, height: usize) -> Error {
        Error::OutOfBounds {
            x: self.x as i64,
            y: self.y as i64,
            w: self.w,
            h: self.h,
            width,
            height,
        }
    }
}

/// An 8-connected group of set pixels together with its tight bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blob {
    pixels: Vec<(usize, usize)>,
    bbox: BoundingBox,
}

impl Blob {
    /// Builds a blob from `(x, y)` pixels. Duplicates are removed and the
    /// pixels are stored in raster order. Returns `None` for an empty set.
    pub fn from_pixels(mut pixels: Vec<(usize, usize)>) -> Option<Blob> {
        if pixels.is_empty() {
            return None;
        }
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for &(x, y) in &pixels {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        Some(Blob {
            pixels,
            bbox: BoundingBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1),
        })
    }

    /// Pixels in raster order.
    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// BT.601 luma with round-half-up, in exact integer arithmetic.
#[inline]
pub fn luma(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(u32::from);
    ((299 * r + 587 * g + 114 * b + 500) / 1000).min(255) as u8
}

pub fn to_grayscale(frame: &Frame) -> GrayImage {
    let data = frame
        .data
        .chunks_exact(3)
        .map(|p| luma([p[0], p[1], p[2]]))
        .collect();
    GrayImage {
        width: frame.width,
        height: frame.height,
        data,
    }
}

/// Sets a bit wherever `|a - b| > tau`.
pub fn absdiff_threshold(a: &GrayImage, b: &GrayImage, tau: u8) -> Result<BinaryMask> {
    if a.dims() != b.dims() {
        return Err(Error::dims(a.dims(), b.dims()));
    }
    let bits = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&p, &q)| p.abs_diff(q) > tau)
        .collect();
    Ok(BinaryMask {
        width: a.width,
        height: a.height,
        bits,
    })
}

/// `a AND NOT b`.
pub fn mask_and_not(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    if a.dims() != b.dims() {
        return Err(Error::dims(a.dims(), b.dims()));
    }
    let bits = a.bits.iter().zip(&b.bits).map(|(&p, &q)| p && !q).collect();
    Ok(BinaryMask {
        width: a.width,
        height: a.height,
        bits,
    })
}

/// Copies out the region covered by `bbox`.
pub fn crop(frame: &Frame, bbox: BoundingBox) -> Result<Frame> {
    if !bbox.fits_within(frame.width, frame.height) {
        return Err(bbox.out_of_bounds(frame.width, frame.height));
    }
    let mut data = Vec::with_capacity(bbox.area() * 3);
    for y in bbox.y..bbox.bottom() {
        let start = (y * frame.width + bbox.x) * 3;
        data.extend_from_slice(&frame.data[start..start + bbox.w * 3]);
    }
    Ok(Frame {
        width: bbox.w,
        height: bbox.h,
        data,
    })
}
