//! Binary erosion and dilation with a square structuring element.
//!
//! A square of radius `r` is the product of two 1-D windows of length
//! `2r + 1`, so both operators run as a horizontal pass followed by a vertical
//! pass, each using a running count. Pixels outside the mask count as unset.

use super::BinaryMask;

/// Set iff every pixel in the `(2r+1)^2` neighbourhood is set.
pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    separable(mask, radius, true)
}

/// Set iff any pixel in the `(2r+1)^2` neighbourhood is set.
pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    separable(mask, radius, false)
}

fn separable(mask: &BinaryMask, radius: usize, erode: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut tmp = vec![false; w * h];
    for y in 0..h {
        line_pass(mask.bits(), &mut tmp, y * w, 1, w, radius, erode);
    }
    let mut out = vec![false; w * h];
    for x in 0..w {
        line_pass(&tmp, &mut out, x, w, h, radius, erode);
    }
    BinaryMask::from_bits(w, h, out).expect("dimensions preserved")
}

/// Runs the 1-D window over the `len` elements starting at `start` with the
/// given `stride`.
fn line_pass(
    src: &[bool],
    dst: &mut [bool],
    start: usize,
    stride: usize,
    len: usize,
    radius: usize,
    erode: bool,
) {
    let at = |i: usize| start + i * stride;
    // prefix[i] = number of set elements in [0, i)
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(0u32);
    let mut acc = 0u32;
    for i in 0..len {
        acc += u32::from(src[at(i)]);
        prefix.push(acc);
    }
    let full = (2 * radius + 1) as u32;
    for i in 0..len {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(len);
        let count = prefix[hi] - prefix[lo];
        dst[at(i)] = if erode { count == full } else { count > 0 };
    }
}
