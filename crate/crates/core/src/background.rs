//! Running-average background model and the foreground mask.

use crate::error::{Error, Result};
use crate::imgproc::{absdiff_threshold, dilate, erode, BinaryMask, BoundingBox, Frame, GrayImage};

pub const DEFAULT_ALPHA: f32 = 0.002;
pub const DEFAULT_TAU_FG: u8 = 30;

/// Background model settings plus the clean-up of its foreground mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackgroundParams {
    pub alpha: f32,
    pub tau_fg: u8,
    pub erode_radius: usize,
    pub dilate_radius: usize,
}

impl Default for BackgroundParams {
    fn default() -> Self {
        BackgroundParams {
            alpha: DEFAULT_ALPHA,
            tau_fg: DEFAULT_TAU_FG,
            erode_radius: 1,
            dilate_radius: 1,
        }
    }
}

/// Per-pixel exponential running average of gray intensity.
///
/// Pixels inside *frozen* boxes are not updated. The pipeline freezes the
/// boxes of active static tracks so a left object is not slowly blended into
/// the background while it is being watched.
#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundModel {
    width: usize,
    height: usize,
    mean: Vec<f32>,
    alpha: f32,
    tau_fg: u8,
    frames_seen: u64,
}

impl BackgroundModel {
    pub fn new(width: usize, height: usize, alpha: f32, tau_fg: u8) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("bg.alpha must lie in (0, 1), got {alpha}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::invalid("background dimensions must be positive"));
        }
        Ok(BackgroundModel {
            width,
            height,
            mean: vec![0.0; width * height],
            alpha,
            tau_fg,
            frames_seen: 0,
        })
    }

    pub fn alpha(&self) -> f32 {
        self.alpha
    }

    pub fn tau_fg(&self) -> u8 {
        self.tau_fg
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    pub fn mean(&self) -> &[f32] {
        &self.mean
    }

    /// Blends `frame` into the estimate. The first frame initialises it.
    pub fn update(&mut self, frame: &GrayImage, frozen: &[BoundingBox]) -> Result<()> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::dims((self.width, self.height), frame.dims()));
        }
        if self.frames_seen == 0 {
            for (m, &p) in self.mean.iter_mut().zip(frame.data()) {
                *m = f32::from(p);
            }
            self.frames_seen = 1;
            return Ok(());
        }

        let keep = 1.0 - self.alpha;
        let w = self.width;
        for (y, (row, src)) in self
            .mean
            .chunks_exact_mut(w)
            .zip(frame.data().chunks_exact(w))
            .enumerate()
        {
            // x-ranges of this row covered by a frozen box
            let mut spans: Vec<(usize, usize)> = frozen
                .iter()
                .filter(|b| y >= b.y && y < b.bottom())
                .map(|b| (b.x.min(w), b.right().min(w)))
                .collect();
            spans.sort_unstable();
            let mut x = 0;
            for (lo, hi) in spans.into_iter().chain(std::iter::once((w, w))) {
                if lo > x {
                    for (m, &p) in row[x..lo].iter_mut().zip(&src[x..lo]) {
                        *m = keep * *m + self.alpha * f32::from(p);
                    }
                }
                x = x.max(hi);
            }
        }
        self.frames_seen += 1;
        Ok(())
    }

    /// The current estimate rounded half-up to 8 bits.
    pub fn estimate(&self) -> Result<GrayImage> {
        if self.frames_seen == 0 {
            return Err(Error::EmptyBackground);
        }
        let data = self
            .mean
            .iter()
            .map(|&m| (m + 0.5).floor().clamp(0.0, 255.0) as u8)
            .collect();
        GrayImage::new(self.width, self.height, data)
    }

    /// Thresholded difference against the estimate, cleaned by an erosion
    /// followed by a dilation.
    pub fn foreground_mask(
        &self,
        frame: &GrayImage,
        erode_radius: usize,
        dilate_radius: usize,
    ) -> Result<BinaryMask> {
        let bg = self.estimate()?;
        let raw = absdiff_threshold(frame, &bg, self.tau_fg)?;
        Ok(dilate(&erode(&raw, erode_radius), dilate_radius))
    }

    #[cfg(test)]
    fn set_mean(&mut self, value: f32) {
        self.mean.iter_mut().for_each(|m| *m = value);
        self.frames_seen = self.frames_seen.max(1);
    }
}

/// Per-channel temporal median of `frames`, the lower middle value for an
/// even count. Used as a colour background plate for sample generation.
pub fn temporal_median(frames: &[Frame]) -> Result<Frame> {
    let first = frames.first().ok_or(Error::EmptyBackground)?;
    let dims = first.dims();
    if let Some(f) = frames.iter().find(|f| f.dims() != dims) {
        return Err(Error::dims(dims, f.dims()));
    }
    let mut column = vec![0u8; frames.len()];
    let data = (0..first.data().len())
        .map(|i| {
            for (slot, f) in column.iter_mut().zip(frames) {
                *slot = f.data()[i];
            }
            let mid = (column.len() - 1) / 2;
            *column.select_nth_unstable(mid).1
        })
        .collect();
    Frame::new(dims.0, dims.1, data)
}
