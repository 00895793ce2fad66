//! Second stage: a two-classifier cascade scored every few frames per track,
//! Gaussian smoothing of the scores, sign labels and a majority vote.

mod linear;

pub use linear::{
    extract_features, train_linear, train_linear_with_history, LinearModel, TrainParams,
    FEATURE_DIM, FEATURE_SIDE, MODEL_FORMAT_VERSION,
};

use crate::error::{Error, Result};
use crate::imgproc::{crop, expand_bbox, BoundingBox, Frame};
use crate::tracker::Track;

/// Anything that scores an image crop in `[-1, 1]`, positive meaning the
/// target class. Implementations must be pure.
pub trait ClassifierModel: Send + Sync {
    fn predict(&self, crop: &Frame) -> f64;
}

impl<T: ClassifierModel + ?Sized> ClassifierModel for &T {
    fn predict(&self, crop: &Frame) -> f64 {
        (**self).predict(crop)
    }
}

impl<T: ClassifierModel + ?Sized> ClassifierModel for Box<T> {
    fn predict(&self, crop: &Frame) -> f64 {
        (**self).predict(crop)
    }
}

/// Returns the same score for every input.
#[derive(Clone, Copy, Debug)]
pub struct ConstantClassifier(pub f64);

impl ClassifierModel for ConstantClassifier {
    fn predict(&self, _crop: &Frame) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CascadeParams {
    /// Frames between classifications of a track.
    pub interval: u64,
    /// Smoothing window in frames; odd.
    pub window: usize,
    /// Gaussian sigma in frames; `None` means `window / 6`.
    pub sigma: Option<f64>,
}

impl Default for CascadeParams {
    fn default() -> Self {
        CascadeParams {
            interval: 10,
            window: 25,
            sigma: None,
        }
    }
}

impl CascadeParams {
    pub fn effective_sigma(&self) -> f64 {
        self.sigma.unwrap_or(self.window as f64 / 6.0)
    }
}

/// Raw cascade scores of one track, keyed by frame index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreSeries {
    entries: Vec<(u64, f64)>,
}

impl ScoreSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(u64, f64)>) -> Result<Self> {
        let mut s = ScoreSeries::new();
        for (f, v) in entries {
            s.push(f, v)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, frame_index: u64, score: f64) -> Result<()> {
        if let Some(&(last, _)) = self.entries.last() {
            if frame_index <= last {
                return Err(Error::invalid(format!(
                    "score at frame {frame_index} does not follow frame {last}"
                )));
            }
        }
        self.entries.push((frame_index, score));
        Ok(())
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Vote {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum VerdictLabel {
    Abandoned,
    NotAbandoned,
    #[default]
    Undecided,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct TrackVerdict {
    pub label: VerdictLabel,
    pub votes_pos: usize,
    pub votes_neg: usize,
}

impl TrackVerdict {
    pub fn is_abandoned(&self) -> bool {
        self.label == VerdictLabel::Abandoned
    }
}

/// Scores `bbox` with the first classifier and, only if that is positive,
/// scores the enlarged context box with the second.
pub fn cascade_score(
    stage1: &dyn ClassifierModel,
    stage2: &dyn ClassifierModel,
    frame: &Frame,
    bbox: BoundingBox,
) -> Result<f64> {
    let s1 = stage1.predict(&crop(frame, bbox)?);
    if s1 <= 0.0 {
        return Ok(s1);
    }
    let context = expand_bbox(&bbox, frame.width(), frame.height());
    Ok(stage2.predict(&crop(frame, context)?))
}

/// Scores `track` on `frame` when its age is a multiple of the interval.
/// Returns whether a score was appended; the verdict is refreshed when it was.
pub fn classify_step(
    track: &mut Track,
    frame: &Frame,
    frame_index: u64,
    params: &CascadeParams,
    stage1: &dyn ClassifierModel,
    stage2: &dyn ClassifierModel,
) -> Result<bool> {
    if params.interval == 0 {
        return Err(Error::invalid("cascade.interval must be at least 1"));
    }
    let Some(age) = frame_index.checked_sub(track.first_frame()) else {
        return Ok(false);
    };
    if age % params.interval != 0 {
        return Ok(false);
    }
    let score = cascade_score(stage1, stage2, frame, track.last_bbox())?;
    track.scores.push(frame_index, score)?;
    let smoothed = smooth_scores(&track.scores, params.window, params.effective_sigma())?;
    track.verdict = vote_track(&sign_labels(&smoothed));
    Ok(true)
}

/// Normalised Gaussian weights for smoothing entry `center` of a series
/// sampled at `frames`: every entry within `(window - 1) / 2` frames takes part.
pub fn smoothing_weights(frames: &[u64], center: usize, window: usize, sigma: f64) -> Vec<(usize, f64)> {
    let half = (window.saturating_sub(1) / 2) as u64;
    let c = frames[center];
    let mut weights: Vec<(usize, f64)> = frames
        .iter()
        .enumerate()
        .filter(|(_, &f)| f.abs_diff(c) <= half)
        .map(|(j, &f)| {
            let d = f.abs_diff(c) as f64;
            (j, (-d * d / (2.0 * sigma * sigma)).exp())
        })
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut weights {
        *w /= total;
    }
    weights
}

/// Gaussian smoothing over frame distance, renormalised at the series ends.
pub fn smooth_scores(series: &ScoreSeries, window: usize, sigma: f64) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) {
        return Err(Error::invalid(format!("smoothing window must be odd, got {window}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("smoothing sigma must be positive, got {sigma}")));
    }
    let frames: Vec<u64> = series.entries.iter().map(|&(f, _)| f).collect();
    Ok((0..frames.len())
        .map(|i| {
            smoothing_weights(&frames, i, window, sigma)
                .into_iter()
                .map(|(j, w)| w * series.entries[j].1)
                .sum()
        })
        .collect())
}

/// Sign of each score; zero counts as positive.
pub fn sign_labels(smoothed: &[f64]) -> Vec<Vote> {
    smoothed
        .iter()
        .map(|&s| if s < 0.0 { Vote::Negative } else { Vote::Positive })
        .collect()
}

/// Majority vote; ties go to `Abandoned`.
pub fn vote_track(labels: &[Vote]) -> TrackVerdict {
    let votes_pos = labels.iter().filter(|&&v| v == Vote::Positive).count();
    let votes_neg = labels.len() - votes_pos;
    let label = if labels.is_empty() {
        VerdictLabel::Undecided
    } else if votes_pos >= votes_neg {
        VerdictLabel::Abandoned
    } else {
        VerdictLabel::NotAbandoned
    };
    TrackVerdict {
        label,
        votes_pos,
        votes_neg,
    }
}
