use super::{BinaryMask, Blob};

/// Splits the set pixels of `mask` into maximal 8-connected components.
///
/// Output is ordered by `(bbox.y, bbox.x)`, ties broken by the component's
/// first pixel in raster order.
pub fn connected_components(mask: &BinaryMask) -> Vec<Blob> {
    let (w, h) = mask.dims();
    let bits = mask.bits();
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut blobs = Vec::new();

    for start in 0..w * h {
        if !bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            let (x0, x1) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (y0, y1) = (y.saturating_sub(1), (y + 1).min(h - 1));
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    let j = ny * w + nx;
                    if bits[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        blobs.push(Blob::from_pixels(pixels).expect("component has a seed pixel"));
    }

    blobs.sort_by_key(|b| {
        let (fx, fy) = b.pixels()[0];
        (b.bbox().y, b.bbox().x, fy, fx)
    });
    blobs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::BoundingBox;

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&BinaryMask::new(8, 8)).is_empty());
    }

    #[test]
    fn diagonal_neighbours_join() {
        let mut m = BinaryMask::new(4, 4);
        m.set(0, 0, true);
        m.set(1, 1, true);
        let cc = connected_components(&m);
        assert_eq!(cc.len(), 1);
        assert_eq!(cc[0].area(), 2);
    }

    #[test]
    fn two_blocks() {
        let mut m = BinaryMask::new(8, 8);
        for (ox, oy) in [(5, 5), (0, 0)] {
            for dy in 0..2 {
                for dx in 0..2 {
                    m.set(ox + dx, oy + dy, true);
                }
            }
        }
        let cc = connected_components(&m);
        assert_eq!(cc.len(), 2);
        assert_eq!(cc[0].bbox(), BoundingBox::new(0, 0, 2, 2));
        assert_eq!(cc[1].bbox(), BoundingBox::new(5, 5, 2, 2));
    }

    #[test]
    fn ordering_ties_on_bbox_corner() {
        // Both components have their box corner at (0, 0).
        let mut m = BinaryMask::new(4, 4);
        for (x, y) in [(2, 0), (2, 1), (1, 2), (0, 2), (0, 0)] {
            m.set(x, y, true);
        }
        let cc = connected_components(&m);
        assert_eq!(cc.len(), 2);
        assert_eq!(cc[0].pixels(), &[(0, 0)]);
        assert_eq!(cc[1].bbox(), BoundingBox::new(0, 0, 3, 3));
    }
}
