//! Static object detection: the foreground mask minus the motion mask gives
//! the static-pixel mask, whose connected components become candidates.

use std::collections::VecDeque;

use crate::background::{BackgroundModel, BackgroundParams};
use crate::error::{Error, Result};
use crate::imgproc::{
    absdiff_threshold, connected_components, convex_hull_fill, crop, dilate, erode, mask_and_not,
    to_grayscale, BinaryMask, BoundingBox, Frame, GrayImage,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SodParams {
    /// Frames between the two images differenced for motion.
    pub motion_gap: usize,
    pub tau_m: u8,
    /// Smallest static component, in pixels, that becomes a candidate.
    pub min_area: usize,
    pub erode_radius: usize,
    pub dilate_radius: usize,
}

impl Default for SodParams {
    fn default() -> Self {
        SodParams {
            motion_gap: 5,
            tau_m: 25,
            min_area: 64,
            erode_radius: 1,
            dilate_radius: 2,
        }
    }
}

/// The most recent `gap + 1` gray frames, oldest first.
#[derive(Clone, Debug)]
pub struct FrameRing {
    capacity: usize,
    width: usize,
    height: usize,
    slots: VecDeque<GrayImage>,
}

impl FrameRing {
    pub fn new(motion_gap: usize, width: usize, height: usize) -> Self {
        FrameRing {
            capacity: motion_gap + 1,
            width,
            height,
            slots: VecDeque::with_capacity(motion_gap + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_primed(&self) -> bool {
        self.slots.len() == self.capacity
    }

    pub fn push(&mut self, frame: GrayImage) -> Result<()> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::dims((self.width, self.height), frame.dims()));
        }
        if self.slots.len() == self.capacity {
            self.slots.pop_front();
        }
        self.slots.push_back(frame);
        Ok(())
    }

    pub fn newest(&self) -> Option<&GrayImage> {
        self.slots.back()
    }

    /// The frame `motion_gap` steps before the newest, once primed.
    pub fn oldest(&self) -> Option<&GrayImage> {
        self.is_primed().then(|| &self.slots[0])
    }
}

/// Moving regions as filled convex blobs.
///
/// Differencing two frames `gap` apart marks mostly the outline of a moving
/// object; erosion drops noise, dilation closes gaps, and the convex hull of
/// each component fills the interior.
pub fn motion_mask(ring: &FrameRing, tau_m: u8, erode_radius: usize, dilate_radius: usize) -> BinaryMask {
    let (w, h) = (ring.width, ring.height);
    let (Some(old), Some(new)) = (ring.oldest(), ring.newest()) else {
        return BinaryMask::new(w, h);
    };
    let diff = absdiff_threshold(new, old, tau_m).expect("ring frames share dimensions");
    let cleaned = dilate(&erode(&diff, erode_radius), dilate_radius);
    let mut out = BinaryMask::new(w, h);
    for blob in connected_components(&cleaned) {
        out.paint(&convex_hull_fill(&blob, w, h));
    }
    out
}

/// Foreground pixels that are not moving.
pub fn static_mask(foreground: &BinaryMask, motion: &BinaryMask) -> Result<BinaryMask> {
    mask_and_not(foreground, motion)
}

/// A static object seen in one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticCandidate {
    pub bbox: BoundingBox,
    pub crop: Frame,
    pub frame_index: u64,
}

pub fn extract_static_candidates(
    static_pixels: &BinaryMask,
    frame: &Frame,
    min_area: usize,
    frame_index: u64,
) -> Result<Vec<StaticCandidate>> {
    if static_pixels.dims() != frame.dims() {
        return Err(Error::dims(frame.dims(), static_pixels.dims()));
    }
    connected_components(static_pixels)
        .into_iter()
        .filter(|b| b.area() >= min_area)
        .map(|b| {
            let bbox = b.bbox();
            Ok(StaticCandidate {
                bbox,
                crop: crop(frame, bbox)?,
                frame_index,
            })
        })
        .collect()
}

/// Masks computed for the most recent frame.
#[derive(Clone, Debug, Default)]
pub struct SodMasks {
    pub foreground: Option<BinaryMask>,
    pub motion: Option<BinaryMask>,
    pub static_pixels: Option<BinaryMask>,
}

struct Primed {
    background: BackgroundModel,
    ring: FrameRing,
}

/// Per-stream state of the first stage.
pub struct StaticObjectDetector {
    sod: SodParams,
    bg: BackgroundParams,
    state: Option<Primed>,
    frame_index: u64,
    masks: SodMasks,
}

impl StaticObjectDetector {
    pub fn new(sod: SodParams, bg: BackgroundParams) -> Result<Self> {
        if sod.motion_gap == 0 {
            return Err(Error::invalid("sod.motion_gap must be at least 1"));
        }
        // validates alpha early rather than on the first frame
        BackgroundModel::new(1, 1, bg.alpha, bg.tau_fg)?;
        Ok(StaticObjectDetector {
            sod,
            bg,
            state: None,
            frame_index: 0,
            masks: SodMasks::default(),
        })
    }

    /// Index the next frame will get.
    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn background(&self) -> Option<&BackgroundModel> {
        self.state.as_ref().map(|s| &s.background)
    }

    pub fn last_masks(&self) -> &SodMasks {
        &self.masks
    }

    /// Processes one frame and returns its static candidates.
    ///
    /// `frozen` lists boxes where the background must not learn (the boxes of
    /// currently active tracks). Nothing is emitted until the background has
    /// a frame and the ring holds `motion_gap + 1` frames.
    pub fn step(&mut self, frame: &Frame, frozen: &[BoundingBox]) -> Result<Vec<StaticCandidate>> {
        let index = self.frame_index;
        let gray = to_grayscale(frame);
        let (w, h) = frame.dims();

        let state = match &mut self.state {
            Some(s) => {
                if s.ring.width != w || s.ring.height != h {
                    return Err(Error::dims((s.ring.width, s.ring.height), (w, h)));
                }
                s
            }
            None => {
                let mut background = BackgroundModel::new(w, h, self.bg.alpha, self.bg.tau_fg)?;
                let mut ring = FrameRing::new(self.sod.motion_gap, w, h);
                background.update(&gray, frozen)?;
                ring.push(gray)?;
                self.state = Some(Primed { background, ring });
                self.frame_index += 1;
                self.masks = SodMasks::default();
                return Ok(Vec::new());
            }
        };

        let foreground = state
            .background
            .foreground_mask(&gray, self.bg.erode_radius, self.bg.dilate_radius)?;
        state.background.update(&gray, frozen)?;
        state.ring.push(gray)?;
        self.frame_index += 1;

        if !state.ring.is_primed() {
            self.masks = SodMasks {
                foreground: Some(foreground),
                ..SodMasks::default()
            };
            return Ok(Vec::new());
        }

        let motion = motion_mask(
            &state.ring,
            self.sod.tau_m,
            self.sod.erode_radius,
            self.sod.dilate_radius,
        );
        let static_pixels = static_mask(&foreground, &motion)?;
        let candidates = extract_static_candidates(&static_pixels, frame, self.sod.min_area, index)?;
        self.masks = SodMasks {
            foreground: Some(foreground),
            motion: Some(motion),
            static_pixels: Some(static_pixels),
        };
        Ok(candidates)
    }
}
