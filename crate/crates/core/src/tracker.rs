//! IoU association of static candidates into tracks.

use crate::cascade::{ScoreSeries, TrackVerdict};
use crate::imgproc::{bbox_iou, BoundingBox};
use crate::sod::StaticCandidate;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackerParams {
    /// A candidate extends a track only when IoU is strictly above this.
    pub iou_min: f64,
    /// Frames a track may go unseen before it is closed.
    pub miss_limit: u64,
}

impl Default for TrackerParams {
    fn default() -> Self {
        TrackerParams {
            iou_min: 0.5,
            miss_limit: 25,
        }
    }
}

/// A static object followed over time.
#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    pub id: u64,
    history: Vec<(u64, BoundingBox)>,
    pub scores: ScoreSeries,
    pub verdict: TrackVerdict,
}

impl Track {
    pub fn new(id: u64, frame_index: u64, bbox: BoundingBox) -> Self {
        Track {
            id,
            history: vec![(frame_index, bbox)],
            scores: ScoreSeries::new(),
            verdict: TrackVerdict::default(),
        }
    }

    pub fn history(&self) -> &[(u64, BoundingBox)] {
        &self.history
    }

    pub fn first_frame(&self) -> u64 {
        self.history[0].0
    }

    pub fn last_seen(&self) -> u64 {
        self.history[self.history.len() - 1].0
    }

    pub fn last_bbox(&self) -> BoundingBox {
        self.history[self.history.len() - 1].1
    }

    fn extend(&mut self, frame_index: u64, bbox: BoundingBox) {
        debug_assert!(frame_index > self.last_seen());
        self.history.push((frame_index, bbox));
    }
}

/// Active tracks of one stream. Ids grow monotonically and are never reused.
#[derive(Clone, Debug, Default)]
pub struct TrackStore {
    active: Vec<Track>,
    next_id: u64,
    miss_limit: u64,
}

impl TrackStore {
    pub fn new(miss_limit: u64) -> Self {
        TrackStore {
            active: Vec::new(),
            next_id: 1,
            miss_limit,
        }
    }

    /// Active tracks in creation order.
    pub fn active(&self) -> &[Track] {
        &self.active
    }

    pub fn active_mut(&mut self) -> &mut [Track] {
        &mut self.active
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn get(&self, id: u64) -> Option<&Track> {
        self.active.iter().find(|t| t.id == id)
    }

    /// Greedy one-to-one matching of this frame's candidates to active tracks.
    ///
    /// Pairs are taken in order of decreasing IoU (ties: lower candidate index,
    /// then lower track id) while both sides are free; only pairs with
    /// IoU > `iou_min` qualify. Unmatched candidates open new tracks. The
    /// returned assignment follows candidate order.
    pub fn associate(
        &mut self,
        candidates: Vec<StaticCandidate>,
        iou_min: f64,
        frame_index: u64,
    ) -> Vec<(u64, StaticCandidate)> {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ci, c) in candidates.iter().enumerate() {
            for (ti, t) in self.active.iter().enumerate() {
                // a track extended earlier in this frame is not eligible
                if t.last_seen() >= frame_index {
                    continue;
                }
                let iou = bbox_iou(&c.bbox, &t.last_bbox());
                if iou > iou_min {
                    pairs.push((iou, ci, ti));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(a.1.cmp(&b.1))
                .then(self.active[a.2].id.cmp(&self.active[b.2].id))
        });

        let mut cand_track: Vec<Option<usize>> = vec![None; candidates.len()];
        let mut track_taken = vec![false; self.active.len()];
        for (_, ci, ti) in pairs {
            if cand_track[ci].is_none() && !track_taken[ti] {
                cand_track[ci] = Some(ti);
                track_taken[ti] = true;
            }
        }

        let mut out = Vec::with_capacity(candidates.len());
        for (c, slot) in candidates.into_iter().zip(cand_track) {
            let id = match slot {
                Some(ti) => {
                    self.active[ti].extend(frame_index, c.bbox);
                    self.active[ti].id
                }
                None => {
                    let id = self.next_id;
                    self.next_id += 1;
                    self.active.push(Track::new(id, frame_index, c.bbox));
                    id
                }
            };
            out.push((id, c));
        }
        out
    }

    /// Removes and returns tracks unseen for more than `miss_limit` frames.
    pub fn prune(&mut self, frame_index: u64) -> Vec<Track> {
        let limit = self.miss_limit;
        let (closed, kept): (Vec<Track>, Vec<Track>) = std::mem::take(&mut self.active)
            .into_iter()
            .partition(|t| frame_index.saturating_sub(t.last_seen()) > limit);
        self.active = kept;
        closed
    }
}
