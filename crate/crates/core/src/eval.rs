//! Ground truth, detections files and frame/pixel-level precision, recall, F1.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imgproc::{bbox_iou, BoundingBox};

/// Default IoU a detection must exceed to count as a pixel-level hit.
pub const DEFAULT_EVAL_IOU: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub frame_start: u64,
    pub frame_end: u64,
    pub bbox: BoundingBox,
}

impl Annotation {
    pub fn new(frame_start: u64, frame_end: u64, bbox: BoundingBox) -> Result<Self> {
        if frame_start > frame_end {
            return Err(Error::invalid(format!(
                "annotation starts at frame {frame_start} after it ends at {frame_end}"
            )));
        }
        Ok(Annotation {
            frame_start,
            frame_end,
            bbox,
        })
    }

    pub fn is_active(&self, frame: u64) -> bool {
        (self.frame_start..=self.frame_end).contains(&frame)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionRecord {
    pub frame_index: u64,
    pub bbox: BoundingBox,
    pub track_id: u64,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LevelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl LevelMetrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        LevelMetrics {
            precision,
            recall,
            f1: f1_score(precision, recall),
            tp,
            fp,
            fn_,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsReport {
    pub frame_level: LevelMetrics,
    pub pixel_level: LevelMetrics,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12}{:>10}{:>10}{:>10}{:>8}{:>8}{:>8}", "level", "precision", "recall", "f1", "tp", "fp", "fn")?;
        for (name, m) in [("frame", &self.frame_level), ("pixel", &self.pixel_level)] {
            writeln!(
                f,
                "{:<12}{:>9.2}%{:>9.2}%{:>9.2}%{:>8}{:>8}{:>8}",
                name,
                m.precision * 100.0,
                m.recall * 100.0,
                m.f1 * 100.0,
                m.tp,
                m.fp,
                m.fn_
            )?;
        }
        Ok(())
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r <= 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Annotations whose first `grace` frames are forgiven: a frame where every
/// active annotation is still inside its grace period is neither positive nor
/// scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Grace(pub u64);

fn in_grace(a: &Annotation, frame: u64, grace: Grace) -> bool {
    a.is_active(frame) && frame < a.frame_start.saturating_add(grace.0)
}

fn bucket_detections(dets: &[DetectionRecord], n_frames: u64) -> Vec<Vec<BoundingBox>> {
    let mut per_frame = vec![Vec::new(); n_frames as usize];
    for d in dets {
        if let Some(slot) = per_frame.get_mut(d.frame_index as usize) {
            slot.push(d.bbox);
        }
    }
    per_frame
}

pub fn frame_metrics(dets: &[DetectionRecord], gts: &[Annotation], n_frames: u64) -> LevelMetrics {
    frame_metrics_with_grace(dets, gts, n_frames, Grace(0))
}

pub fn frame_metrics_with_grace(
    dets: &[DetectionRecord],
    gts: &[Annotation],
    n_frames: u64,
    grace: Grace,
) -> LevelMetrics {
    let per_frame = bucket_detections(dets, n_frames);
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (frame, found) in per_frame.iter().enumerate() {
        let frame = frame as u64;
        let active: Vec<&Annotation> = gts.iter().filter(|a| a.is_active(frame)).collect();
        if !active.is_empty() && active.iter().all(|a| in_grace(a, frame, grace)) {
            continue;
        }
        match (!found.is_empty(), !active.is_empty()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    LevelMetrics::from_counts(tp, fp, fn_)
}

/// Greedy one-to-one matching by descending IoU. Ties go to the lower
/// detection index, then the lower annotation index. Only pairs with IoU
/// strictly above `iou_min` are returned.
pub fn greedy_match(dets: &[BoundingBox], gts: &[BoundingBox], iou_min: f64) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, d) in dets.iter().enumerate() {
        for (j, g) in gts.iter().enumerate() {
            let iou = bbox_iou(d, g);
            if iou > iou_min {
                pairs.push((iou, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !det_used[i] && !gt_used[j] {
            det_used[i] = true;
            gt_used[j] = true;
            out.push((i, j));
        }
    }
    out
}

pub fn pixel_metrics(dets: &[DetectionRecord], gts: &[Annotation], n_frames: u64, iou_min: f64) -> LevelMetrics {
    pixel_metrics_with_grace(dets, gts, n_frames, iou_min, Grace(0))
}

/// Pixel-level counts. Annotations inside their grace period are left out of
/// the FN count, and a detection matched to one is not counted either way.
pub fn pixel_metrics_with_grace(
    dets: &[DetectionRecord],
    gts: &[Annotation],
    n_frames: u64,
    iou_min: f64,
    grace: Grace,
) -> LevelMetrics {
    let per_frame = bucket_detections(dets, n_frames);
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (frame, found) in per_frame.iter().enumerate() {
        let frame = frame as u64;
        let active: Vec<&Annotation> = gts.iter().filter(|a| a.is_active(frame)).collect();
        let boxes: Vec<BoundingBox> = active.iter().map(|a| a.bbox).collect();
        let matches = greedy_match(found, &boxes, iou_min);
        let mut gt_hit = vec![false; active.len()];
        for &(_, j) in &matches {
            gt_hit[j] = true;
            if !in_grace(active[j], frame, grace) {
                tp += 1;
            }
        }
        fp += (found.len() - matches.len()) as u64;
        fn_ += active
            .iter()
            .zip(&gt_hit)
            .filter(|(a, hit)| !**hit && !in_grace(a, frame, grace))
            .count() as u64;
    }
    LevelMetrics::from_counts(tp, fp, fn_)
}

pub fn evaluate(dets: &[DetectionRecord], gts: &[Annotation], n_frames: u64, iou_min: f64, grace: Grace) -> MetricsReport {
    MetricsReport {
        frame_level: frame_metrics_with_grace(dets, gts, n_frames, grace),
        pixel_level: pixel_metrics_with_grace(dets, gts, n_frames, iou_min, grace),
    }
}

fn parse_ints<const N: usize>(path: &Path, lineno: usize, line: &str) -> Result<[i64; N]> {
    let err = |message: String| Error::Parse {
        source_name: path.to_path_buf(),
        line: lineno,
        message,
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != N {
        return Err(err(format!("expected {N} fields, found {}", fields.len())));
    }
    let mut out = [0i64; N];
    for (slot, f) in out.iter_mut().zip(&fields) {
        *slot = f.parse().map_err(|_| err(format!("not an integer: {f:?}")))?;
    }
    Ok(out)
}

fn non_negative(path: &Path, lineno: usize, v: i64) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::Parse {
        source_name: path.to_path_buf(),
        line: lineno,
        message: format!("negative value {v}"),
    })
}

/// Strips a trailing `#` comment and surrounding whitespace.
fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Parses `frame_start frame_end x y w h` lines.
pub fn parse_annotations(text: &str, path: &Path) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let v: [i64; 6] = parse_ints(path, i + 1, line)?;
        let mut u = [0u64; 6];
        for (dst, &src) in u.iter_mut().zip(&v) {
            *dst = non_negative(path, i + 1, src)?;
        }
        let bbox = BoundingBox::new(u[2] as usize, u[3] as usize, u[4] as usize, u[5] as usize);
        let a = Annotation::new(u[0], u[1], bbox).map_err(|e| Error::Parse {
            source_name: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(a);
    }
    Ok(out)
}

pub fn load_annotations(path: &Path) -> Result<Vec<Annotation>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text, path)
}

pub fn format_annotations(gts: &[Annotation]) -> String {
    let mut s = String::from("# frame_start frame_end x y w h\n");
    for a in gts {
        s.push_str(&format!(
            "{} {} {} {} {} {}\n",
            a.frame_start, a.frame_end, a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h
        ));
    }
    s
}

pub fn save_annotations(path: &Path, gts: &[Annotation]) -> Result<()> {
    fs::write(path, format_annotations(gts)).map_err(|e| Error::io(path, e))
}

pub fn format_detection(d: &DetectionRecord) -> String {
    format!(
        "{} {} {} {} {} {} {:.4}",
        d.frame_index, d.track_id, d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h, d.score
    )
}

pub fn format_detections(dets: &[DetectionRecord]) -> String {
    let mut s = String::new();
    for d in dets {
        s.push_str(&format_detection(d));
        s.push('\n');
    }
    s
}

/// Parses `frame track_id x y w h score` lines.
pub fn parse_detections(text: &str, path: &Path) -> Result<Vec<DetectionRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            source_name: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", fields.len())));
        }
        let mut ints = [0u64; 6];
        for (slot, f) in ints.iter_mut().zip(&fields[..6]) {
            *slot = f.parse().map_err(|_| err(format!("not a non-negative integer: {f:?}")))?;
        }
        let score: f64 = fields[6].parse().map_err(|_| err(format!("bad score {:?}", fields[6])))?;
        out.push(DetectionRecord {
            frame_index: ints[0],
            track_id: ints[1],
            bbox: BoundingBox::new(ints[2] as usize, ints[3] as usize, ints[4] as usize, ints[5] as usize),
            score,
        });
    }
    Ok(out)
}

pub fn load_detections(path: &Path) -> Result<Vec<DetectionRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text, path)
}
