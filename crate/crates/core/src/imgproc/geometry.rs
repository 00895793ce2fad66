use super::BoundingBox;

/// Intersection over union of two boxes; 0 when they do not overlap.
pub fn bbox_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection(b).map_or(0, |i| i.area());
    let union = a.area() + b.area() - inter;
    if union == 0 {
        return 0.0;
    }
    inter as f64 / union as f64
}

/// Grows a `w x h` box to `3w x 2h` around its bottom-centre, then clips it to
/// the frame.
///
/// The bottom edge stays put and the box widens equally on both sides, so the
/// result covers whoever is standing next to the object on the same floor.
pub fn expand_bbox(b: &BoundingBox, width: usize, height: usize) -> BoundingBox {
    let (x, y, w, h) = (b.x as i64, b.y as i64, b.w as i64, b.h as i64);
    let left = (x - w).max(0);
    let right = (x + 2 * w).min(width as i64);
    let top = (y - h).max(0);
    let bottom = (y + h).min(height as i64);
    BoundingBox::new(
        left as usize,
        top as usize,
        (right - left).max(0) as usize,
        (bottom - top).max(0) as usize,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_examples() {
        let a = BoundingBox::new(0, 0, 10, 10);
        assert_eq!(bbox_iou(&a, &a), 1.0);
        assert_eq!(bbox_iou(&a, &BoundingBox::new(20, 20, 5, 5)), 0.0);
        // touching edges share no pixel
        assert_eq!(bbox_iou(&a, &BoundingBox::new(10, 0, 5, 5)), 0.0);
        let b = BoundingBox::new(5, 0, 10, 10);
        assert!((bbox_iou(&a, &b) - 50.0 / 150.0).abs() < 1e-12);
        assert_eq!(bbox_iou(&a, &b), bbox_iou(&b, &a));
    }

    #[test]
    fn expand_examples() {
        assert_eq!(
            expand_bbox(&BoundingBox::new(30, 30, 10, 10), 100, 100),
            BoundingBox::new(20, 20, 30, 20)
        );
        assert_eq!(
            expand_bbox(&BoundingBox::new(0, 0, 10, 10), 100, 100),
            BoundingBox::new(0, 0, 20, 10)
        );
        let full = BoundingBox::new(0, 0, 100, 100);
        assert_eq!(expand_bbox(&full, 100, 100), full);
    }
}
