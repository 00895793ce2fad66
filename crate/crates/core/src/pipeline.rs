//! Per-frame orchestration: static object detection, tracking, cascade
//! classification and detection output.

use std::collections::HashMap;

use crate::cascade::{classify_step, smooth_scores, ClassifierModel};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::eval::DetectionRecord;
use crate::imgproc::{BoundingBox, Frame};
use crate::sod::StaticObjectDetector;
use crate::tracker::{Track, TrackStore};

pub struct Pipeline<'m> {
    config: PipelineConfig,
    detector: StaticObjectDetector,
    store: TrackStore,
    stage1: Box<dyn ClassifierModel + 'm>,
    stage2: Box<dyn ClassifierModel + 'm>,
    latest_score: HashMap<u64, f64>,
}

impl<'m> Pipeline<'m> {
    pub fn new(
        config: &PipelineConfig,
        stage1: Box<dyn ClassifierModel + 'm>,
        stage2: Box<dyn ClassifierModel + 'm>,
    ) -> Result<Self> {
        // surfaces a bad window or sigma before any frame is read
        smooth_scores(&Default::default(), config.cascade.window, config.cascade.effective_sigma())?;
        Ok(Pipeline {
            config: config.clone(),
            detector: StaticObjectDetector::new(config.sod, config.background)?,
            store: TrackStore::new(config.tracker.miss_limit),
            stage1,
            stage2,
            latest_score: HashMap::new(),
        })
    }

    pub fn tracks(&self) -> &[Track] {
        self.store.active()
    }

    pub fn detector(&self) -> &StaticObjectDetector {
        &self.detector
    }

    /// Index the next frame will get.
    pub fn frame_index(&self) -> u64 {
        self.detector.frame_index()
    }

    /// Runs one frame through every stage and returns a detection for each
    /// active track currently voted abandoned, in track-id order.
    pub fn process_frame(&mut self, frame: &Frame) -> Result<Vec<DetectionRecord>> {
        let index = self.detector.frame_index();
        let frozen: Vec<BoundingBox> = self.store.active().iter().map(Track::last_bbox).collect();
        let candidates = self.detector.step(frame, &frozen)?;
        self.store.associate(candidates, self.config.tracker.iou_min, index);
        for closed in self.store.prune(index) {
            self.latest_score.remove(&closed.id);
        }

        let params = &self.config.cascade;
        for track in self.store.active_mut() {
            if classify_step(track, frame, index, params, &*self.stage1, &*self.stage2)? {
                let smoothed = smooth_scores(&track.scores, params.window, params.effective_sigma())?;
                if let Some(&last) = smoothed.last() {
                    self.latest_score.insert(track.id, last);
                }
            }
        }

        let mut out: Vec<DetectionRecord> = self
            .store
            .active()
            .iter()
            .filter(|t| t.verdict.is_abandoned())
            .map(|t| DetectionRecord {
                frame_index: index,
                bbox: t.last_bbox(),
                track_id: t.id,
                score: self.latest_score.get(&t.id).copied().unwrap_or(0.0),
            })
            .collect();
        out.sort_by_key(|d| d.track_id);
        Ok(out)
    }

    /// Processes every frame of `frames`, calling `sink` with each frame and
    /// its detections, and returns all detections.
    pub fn run<I, F>(&mut self, frames: I, mut sink: F) -> Result<Vec<DetectionRecord>>
    where
        I: IntoIterator<Item = Result<Frame>>,
        F: FnMut(u64, &Frame, &[DetectionRecord]) -> Result<()>,
    {
        let mut all = Vec::new();
        for frame in frames {
            let frame = frame?;
            let index = self.frame_index();
            let dets = self.process_frame(&frame)?;
            sink(index, &frame, &dets)?;
            all.extend(dets);
        }
        Ok(all)
    }
}

pub const OVERLAY_COLOUR: [u8; 3] = [255, 0, 0];

/// Copy of `frame` with a one-pixel outline around each detection box.
pub fn draw_overlay(frame: &Frame, dets: &[DetectionRecord]) -> Frame {
    let mut out = frame.clone();
    for d in dets {
        let b = d.bbox;
        if b.w == 0 || b.h == 0 || !b.fits_within(frame.width(), frame.height()) {
            continue;
        }
        for x in b.x..b.right() {
            out.set_pixel(x, b.y, OVERLAY_COLOUR);
            out.set_pixel(x, b.bottom() - 1, OVERLAY_COLOUR);
        }
        for y in b.y..b.bottom() {
            out.set_pixel(b.x, y, OVERLAY_COLOUR);
            out.set_pixel(b.right() - 1, y, OVERLAY_COLOUR);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::ConstantClassifier;

    fn config() -> PipelineConfig {
        PipelineConfig::default()
    }

    fn scene_frame(bag: bool) -> Frame {
        let mut f = Frame::filled(64, 48, [150; 3]);
        if bag {
            for y in 20..32 {
                for x in 20..34 {
                    f.set_pixel(x, y, [40, 20, 20]);
                }
            }
        }
        f
    }

    #[test]
    fn empty_scene_never_detects() {
        let mut p = Pipeline::new(&config(), Box::new(ConstantClassifier(1.0)), Box::new(ConstantClassifier(1.0))).unwrap();
        for _ in 0..40 {
            assert!(p.process_frame(&scene_frame(false)).unwrap().is_empty());
        }
        assert!(p.tracks().is_empty());
    }

    #[test]
    fn object_that_appears_is_reported_when_both_stages_agree() {
        let mut p = Pipeline::new(&config(), Box::new(ConstantClassifier(0.8)), Box::new(ConstantClassifier(0.6))).unwrap();
        let mut first = None;
        for i in 0..60 {
            let dets = p.process_frame(&scene_frame(i >= 10)).unwrap();
            if first.is_none() && !dets.is_empty() {
                first = Some(i);
                assert_eq!(dets[0].bbox, BoundingBox::new(20, 20, 14, 12));
                assert!((dets[0].score - 0.6).abs() < 1e-9);
            }
        }
        // the bag is static once the motion ring no longer holds an empty frame
        assert_eq!(first, Some(15));
    }

    #[test]
    fn negative_second_stage_suppresses_output() {
        let mut p = Pipeline::new(&config(), Box::new(ConstantClassifier(0.8)), Box::new(ConstantClassifier(-0.6))).unwrap();
        for i in 0..60 {
            assert!(p.process_frame(&scene_frame(i >= 10)).unwrap().is_empty());
        }
        assert_eq!(p.tracks().len(), 1);
        assert!(!p.tracks()[0].verdict.is_abandoned());
    }

    #[test]
    fn overlay_changes_only_outlines() {
        let f = Frame::filled(20, 20, [10; 3]);
        let d = DetectionRecord {
            frame_index: 0,
            bbox: BoundingBox::new(5, 6, 4, 3),
            track_id: 1,
            score: 1.0,
        };
        let o = draw_overlay(&f, &[d]);
        for y in 0..20 {
            for x in 0..20 {
                let on_edge = (5..9).contains(&x) && (6..9).contains(&y) && (x == 5 || x == 8 || y == 6 || y == 8);
                assert_eq!(o.pixel(x, y), if on_edge { OVERLAY_COLOUR } else { [10; 3] }, "({x}, {y})");
            }
        }
    }
}
