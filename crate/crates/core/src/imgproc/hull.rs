//! Convex hull of a blob, rasterised by an exact point-in-hull test on pixel
//! centres (boundary inclusive).

use super::{Blob, BoundingBox};

type Pt = (i64, i64);

fn cross(o: Pt, a: Pt, b: Pt) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain. Collinear points are dropped, so the result has
/// one vertex for a single point, two for a segment, otherwise a strictly
/// convex polygon with positive orientation.
fn monotone_chain(mut pts: Vec<Pt>) -> Vec<Pt> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Pt> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn inside(hull: &[Pt], p: Pt) -> bool {
    match hull {
        [] => false,
        [a] => *a == p,
        [a, b] => {
            cross(*a, *b, p) == 0
                && p.0 >= a.0.min(b.0)
                && p.0 <= a.0.max(b.0)
                && p.1 >= a.1.min(b.1)
                && p.1 <= a.1.max(b.1)
        }
        _ => (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], p) >= 0),
    }
}

/// Fills the convex hull of `blob`'s pixel centres.
///
/// Only the leftmost and rightmost pixel of each row can be hull vertices, so
/// those are the only points handed to the hull construction. The hull lies
/// within the blob's bounding box, which in turn lies within the image.
pub fn convex_hull_fill(blob: &Blob, width: usize, height: usize) -> Blob {
    let bbox = blob.bbox();
    debug_assert!(bbox.fits_within(width, height));

    let mut extremes: Vec<Pt> = Vec::new();
    let px = blob.pixels();
    let mut i = 0;
    while i < px.len() {
        let y = px[i].1;
        let mut j = i;
        while j + 1 < px.len() && px[j + 1].1 == y {
            j += 1;
        }
        // raster order: px[i] is the row minimum, px[j] the row maximum
        extremes.push((px[i].0 as i64, y as i64));
        extremes.push((px[j].0 as i64, y as i64));
        i = j + 1;
    }
    let hull = monotone_chain(extremes);

    let clip = BoundingBox::new(0, 0, width, height)
        .intersection(&bbox)
        .unwrap_or(bbox);
    let mut pixels = Vec::with_capacity(blob.area());
    for y in clip.y..clip.bottom() {
        let row = |x: usize| inside(&hull, (x as i64, y as i64));
        let Some(left) = (clip.x..clip.right()).find(|&x| row(x)) else {
            continue;
        };
        let right = (left..clip.right()).rev().find(|&x| row(x)).unwrap_or(left);
        pixels.extend((left..=right).map(|x| (x, y)));
    }
    Blob::from_pixels(pixels).expect("hull contains the input pixels")
}
