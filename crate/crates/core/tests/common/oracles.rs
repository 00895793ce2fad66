//! Deliberately naive reference implementations. Each one follows the
//! definition directly rather than the production algorithm.

use std::collections::BTreeSet;

use abandon_core::{BinaryMask, Blob, BoundingBox};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_mask(rng: &mut ChaCha8Rng, max_side: usize) -> BinaryMask {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    let density: f64 = rng.gen_range(0.05..0.9);
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::from_bits(w, h, bits).unwrap()
}

fn morph(mask: &BinaryMask, r: usize, want_all: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    let r = r as i64;
    let mut out = BinaryMask::new(w, h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut all = true;
            let mut any = false;
            for ny in y - r..=y + r {
                for nx in x - r..=x + r {
                    let set = nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64 && mask.get(nx as usize, ny as usize);
                    all &= set;
                    any |= set;
                }
            }
            out.set(x as usize, y as usize, if want_all { all } else { any });
        }
    }
    out
}

pub fn erode(mask: &BinaryMask, r: usize) -> BinaryMask {
    morph(mask, r, true)
}

pub fn dilate(mask: &BinaryMask, r: usize) -> BinaryMask {
    morph(mask, r, false)
}

pub fn and_not(a: &BinaryMask, b: &BinaryMask) -> BinaryMask {
    let mut out = BinaryMask::new(a.width(), a.height());
    for y in 0..a.height() {
        for x in 0..a.width() {
            out.set(x, y, a.get(x, y) && !b.get(x, y));
        }
    }
    out
}

/// Components by union-find over 8-neighbour pairs, as `(bbox, pixels)`
/// with pixels in raster order, sorted by bbox top, bbox left, then first
/// pixel.
pub fn components(mask: &BinaryMask) -> Vec<(BoundingBox, Vec<(usize, usize)>)> {
    let (w, h) = mask.dims();
    let mut parent: Vec<usize> = (0..w * h).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            for (dx, dy) in [(1i64, 0i64), (-1, 1), (0, 1), (1, 1)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || nx >= w as i64 || ny >= h as i64 || !mask.get(nx as usize, ny as usize) {
                    continue;
                }
                let a = find(&mut parent, y * w + x);
                let b = find(&mut parent, ny as usize * w + nx as usize);
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                let root = find(&mut parent, y * w + x);
                groups.entry(root).or_default().push((x, y));
            }
        }
    }
    let mut out: Vec<_> = groups
        .into_values()
        .map(|px| {
            let x0 = px.iter().map(|p| p.0).min().unwrap();
            let x1 = px.iter().map(|p| p.0).max().unwrap();
            let y0 = px.iter().map(|p| p.1).min().unwrap();
            let y1 = px.iter().map(|p| p.1).max().unwrap();
            (BoundingBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1), px)
        })
        .collect();
    out.sort_by_key(|(b, px)| (b.y, b.x, px[0].1, px[0].0));
    out
}

/// `p` lies in the convex hull of `pts` iff it is one of them or the
/// directions from `p` to the points leave no angular gap wider than a half
/// turn.
pub fn in_hull(pts: &[(i64, i64)], p: (i64, i64)) -> bool {
    if pts.contains(&p) {
        return true;
    }
    let mut angles: Vec<f64> = pts
        .iter()
        .map(|&(x, y)| ((y - p.1) as f64).atan2((x - p.0) as f64))
        .collect();
    if angles.is_empty() {
        return false;
    }
    angles.sort_by(f64::total_cmp);
    let mut widest = 2.0 * std::f64::consts::PI - (angles[angles.len() - 1] - angles[0]);
    for pair in angles.windows(2) {
        widest = widest.max(pair[1] - pair[0]);
    }
    // lattice directions in a small box never differ from a half turn by
    // anywhere near this tolerance
    widest <= std::f64::consts::PI + 1e-9
}

pub fn hull_fill(blob: &Blob, width: usize, height: usize) -> BTreeSet<(usize, usize)> {
    let pts: Vec<(i64, i64)> = blob.pixels().iter().map(|&(x, y)| (x as i64, y as i64)).collect();
    let mut out = BTreeSet::new();
    for y in 0..height {
        for x in 0..width {
            if in_hull(&pts, (x as i64, y as i64)) {
                out.insert((x, y));
            }
        }
    }
    out
}

pub fn random_point_blob(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Blob {
    let n = rng.gen_range(1..=10);
    let pts = (0..n).map(|_| (rng.gen_range(0..w), rng.gen_range(0..h))).collect();
    Blob::from_pixels(pts).unwrap()
}

/// IoU by counting unit cells.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    let xmax = a.right().max(b.right());
    let ymax = a.bottom().max(b.bottom());
    for y in 0..ymax {
        for x in 0..xmax {
            let (ia, ib) = (a.contains(x, y), b.contains(x, y));
            inter += usize::from(ia && ib);
            union += usize::from(ia || ib);
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn random_box(rng: &mut ChaCha8Rng, side: usize) -> BoundingBox {
    let x = rng.gen_range(0..side);
    let y = rng.gen_range(0..side);
    BoundingBox::new(x, y, rng.gen_range(0..=side - x), rng.gen_range(0..=side - y))
}

/// Boxes jittered around a few anchors so that overlaps and ties are common.
pub fn clustered_boxes(rng: &mut ChaCha8Rng, anchors: &[BoundingBox], n: usize) -> Vec<BoundingBox> {
    (0..n)
        .map(|_| {
            let a = anchors[rng.gen_range(0..anchors.len())];
            let dx: i64 = rng.gen_range(-3..=3);
            let dy: i64 = rng.gen_range(-3..=3);
            let x = (a.x as i64 + dx).max(0) as usize;
            let y = (a.y as i64 + dy).max(0) as usize;
            BoundingBox::new(x, y, (a.w as i64 + rng.gen_range(-2..=2)).max(1) as usize, (a.h as i64 + rng.gen_range(-2..=2)).max(1) as usize)
        })
        .collect()
}

fn all_matchings(n_det: usize, allowed: &[Vec<bool>]) -> Vec<Vec<(usize, usize)>> {
    fn go(i: usize, allowed: &[Vec<bool>], used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if i == allowed.len() {
            out.push(cur.clone());
            return;
        }
        go(i + 1, allowed, used, cur, out);
        for j in 0..used.len() {
            if allowed[i][j] && !used[j] {
                used[j] = true;
                cur.push((i, j));
                go(i + 1, allowed, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let n_gt = allowed.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    go(0, &allowed[..n_det], &mut vec![false; n_gt], &mut Vec::new(), &mut out);
    out
}

/// Exhaustive search over every one-to-one matching of qualifying pairs.
///
/// Returns the matching that is best when its pairs are listed from highest
/// to lowest IoU (ties by detection then annotation index) and compared
/// lexicographically, plus the largest matching size over all matchings.
pub fn best_matching(dets: &[BoundingBox], gts: &[BoundingBox], iou_min: f64) -> (Vec<(usize, usize)>, usize) {
    let allowed: Vec<Vec<bool>> = dets.iter().map(|d| gts.iter().map(|g| iou(d, g) > iou_min).collect()).collect();
    if dets.is_empty() || gts.is_empty() {
        return (Vec::new(), 0);
    }
    let key = |m: &Vec<(usize, usize)>| {
        let mut k: Vec<(f64, usize, usize)> = m.iter().map(|&(i, j)| (iou(&dets[i], &gts[j]), i, j)).collect();
        k.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        k
    };
    // a pair ranks higher with larger IoU, then smaller indices; a longer
    // list beats its own prefix
    let better = |a: &[(f64, usize, usize)], b: &[(f64, usize, usize)]| -> bool {
        for (x, y) in a.iter().zip(b) {
            let ord = y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2));
            match ord {
                std::cmp::Ordering::Less => return true,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => {}
            }
        }
        a.len() > b.len()
    };
    let all = all_matchings(dets.len(), &allowed);
    let max_card = all.iter().map(Vec::len).max().unwrap_or(0);
    let mut best: Vec<(usize, usize)> = Vec::new();
    let mut best_key = key(&best);
    for m in all {
        let k = key(&m);
        if better(&k, &best_key) {
            best_key = k;
            best = m;
        }
    }
    best.sort_unstable();
    (best, max_card)
}
