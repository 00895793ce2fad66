//! Built-in backgrounds, sprites and colour-keyed reference classifiers used
//! by the bundled scenes and by the end-to-end tests.
//!
//! People are drawn in blues and luggage in reds over a grey floor, which lets
//! the reference classifiers decide from colour alone.

use crate::cascade::ClassifierModel;
use crate::error::Result;
use crate::imgproc::Frame;
use crate::samplegen::{TemplateImage, TemplateKind};

use super::SceneScript;

/// The scripted drop scene used for end-to-end testing and benchmarking.
pub const DROP_SCENE: &str = include_str!("../../scenes/drop.scene");

pub fn drop_scene() -> Result<SceneScript> {
    super::parse_scene(DROP_SCENE, None)
}

/// Sample sizes that suit the bundled sprites: stage one sees a tight crop
/// around a bag, stage two the 3w x 2h neighbourhood of a 20 x 14 bag.
pub const STAGE1_SAMPLE_SIZE: (usize, usize) = (24, 18);
pub const STAGE2_SAMPLE_SIZE: (usize, usize) = (60, 28);

const TILE: usize = 24;
const GROUT: usize = 2;

/// Grey floor tiles with darker grout lines.
pub fn tiles(width: usize, height: usize) -> Frame {
    let mut f = Frame::filled(width, height, [0; 3]);
    for y in 0..height {
        for x in 0..width {
            let v = if x % TILE < GROUT || y % TILE < GROUT {
                135
            } else {
                let (tx, ty) = (x / TILE, y / TILE);
                145 + ((tx * 7 + ty * 13) % 21) as u8
            };
            f.set_pixel(x, y, [v; 3]);
        }
    }
    f
}

pub fn builtin_background(name: &str, width: usize, height: usize) -> Option<Frame> {
    match name {
        "tiles" => Some(tiles(width, height)),
        _ => None,
    }
}

struct Sprite {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Sprite {
    fn new(width: usize, height: usize) -> Self {
        Sprite {
            width,
            height,
            data: vec![0; width * height * 4],
        }
    }

    fn put(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 4;
        self.data[i..i + 4].copy_from_slice(&[rgb[0], rgb[1], rgb[2], 255]);
    }

    fn fill(&mut self, x0: usize, y0: usize, w: usize, h: usize, stripes: [[u8; 3]; 2]) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                self.put(x, y, stripes[x % 2]);
            }
        }
    }

    fn blit(&mut self, src: &TemplateImage, x0: usize, y0: usize, rows: std::ops::Range<usize>) {
        for (dy, sy) in rows.enumerate() {
            for sx in 0..src.width() {
                let [r, g, b, a] = src.rgba(sx, sy);
                let i = ((y0 + dy) * self.width + x0 + sx) * 4;
                self.data[i..i + 4].copy_from_slice(&[r, g, b, a]);
            }
        }
    }

    fn finish(self, kind: TemplateKind) -> TemplateImage {
        TemplateImage::new(self.width, self.height, self.data, kind).expect("sprite buffer sized by construction")
    }
}

const COAT: [[u8; 3]; 2] = [[20, 30, 110], [60, 90, 220]];
const HEAD: [[u8; 3]; 2] = [[30, 40, 120], [70, 80, 200]];

/// A 14 x 44 pedestrian. Column stripes keep the interior changing while
/// they walk, so frame differencing sees the whole body move.
pub fn walker() -> TemplateImage {
    let mut s = Sprite::new(14, 44);
    s.fill(3, 0, 8, 8, HEAD);
    s.fill(0, 8, 14, 36, COAT);
    s.finish(TemplateKind::Person)
}

/// Rows of the walker visible next to a bag on the floor.
const LOWER_BODY_ROWS: usize = 28;

/// The red 20 x 14 bag dropped in the bundled scene.
pub fn bag() -> TemplateImage {
    let mut s = Sprite::new(20, 14);
    s.fill(0, 0, 20, 14, [[100, 20, 20], [200, 50, 40]]);
    s.finish(TemplateKind::Luggage)
}

pub fn suitcase() -> TemplateImage {
    let mut s = Sprite::new(16, 18);
    s.fill(0, 0, 16, 18, [[150, 40, 30], [130, 30, 30]]);
    s.fill(6, 0, 4, 2, [[90, 10, 10], [90, 10, 10]]);
    s.finish(TemplateKind::Luggage)
}

pub fn backpack() -> TemplateImage {
    let mut s = Sprite::new(12, 14);
    s.fill(0, 2, 12, 12, [[180, 60, 20], [160, 50, 30]]);
    s.fill(2, 0, 8, 2, [[180, 60, 20], [160, 50, 30]]);
    s.finish(TemplateKind::Luggage)
}

pub fn duffel() -> TemplateImage {
    let mut s = Sprite::new(22, 10);
    s.fill(0, 0, 22, 10, [[120, 20, 50], [170, 40, 60]]);
    s.finish(TemplateKind::Luggage)
}

pub fn luggage_templates() -> Vec<TemplateImage> {
    vec![bag(), suitcase(), backpack(), duffel()]
}

/// A walker's lower body standing two pixels to the left or right of each
/// luggage item, bottoms aligned.
pub fn attended_templates() -> Vec<TemplateImage> {
    let person = walker();
    let legs = person.height() - LOWER_BODY_ROWS..person.height();
    let mut out = Vec::new();
    for item in luggage_templates() {
        let gap = 2;
        let width = person.width() + gap + item.width();
        let height = LOWER_BODY_ROWS.max(item.height());
        for person_left in [true, false] {
            let mut s = Sprite::new(width, height);
            let (px, ix) = if person_left {
                (0, person.width() + gap)
            } else {
                (item.width() + gap, 0)
            };
            s.blit(&person, px, height - LOWER_BODY_ROWS, legs.clone());
            s.blit(&item, ix, height - item.height(), 0..item.height());
            out.push(s.finish(TemplateKind::Attended));
        }
    }
    out
}

pub fn builtin_template(name: &str) -> Option<TemplateImage> {
    match name {
        "walker" => Some(walker()),
        "bag" => Some(bag()),
        "suitcase" => Some(suitcase()),
        "backpack" => Some(backpack()),
        "duffel" => Some(duffel()),
        _ => None,
    }
}

fn is_luggage_colour([r, g, b]: [u8; 3]) -> bool {
    i16::from(r) - i16::from(g.max(b)) >= 60
}

fn is_person_colour([r, _, b]: [u8; 3]) -> bool {
    i16::from(b) - i16::from(r) >= 40
}

fn pixels(crop: &Frame) -> impl Iterator<Item = [u8; 3]> + '_ {
    crop.data().chunks_exact(3).map(|p| [p[0], p[1], p[2]])
}

/// Stage-one reference: +1 when at least a quarter of the crop is luggage
/// coloured.
#[derive(Clone, Copy, Debug, Default)]
pub struct LuggageOracle;

impl ClassifierModel for LuggageOracle {
    fn predict(&self, crop: &Frame) -> f64 {
        let n = crop.width() * crop.height();
        let hits = pixels(crop).filter(|&p| is_luggage_colour(p)).count();
        if n > 0 && hits * 4 >= n {
            1.0
        } else {
            -1.0
        }
    }
}

/// Stage-two reference: -1 when a person is in view, +1 otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnattendedOracle;

const PERSON_MIN_PIXELS: usize = 20;

impl ClassifierModel for UnattendedOracle {
    fn predict(&self, crop: &Frame) -> f64 {
        if pixels(crop).filter(|&p| is_person_colour(p)).count() >= PERSON_MIN_PIXELS {
            -1.0
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplegen::composite;

    #[test]
    fn sprites_fit_the_sample_sizes() {
        for t in luggage_templates() {
            assert!(t.width() <= STAGE1_SAMPLE_SIZE.0 && t.height() <= STAGE1_SAMPLE_SIZE.1);
            assert_eq!(t.kind, TemplateKind::Luggage);
        }
        for t in attended_templates() {
            assert!(t.width() <= STAGE2_SAMPLE_SIZE.0 && t.height() <= STAGE2_SAMPLE_SIZE.1);
            assert_eq!(t.kind, TemplateKind::Attended);
        }
        assert_eq!(attended_templates().len(), 2 * luggage_templates().len());
    }

    #[test]
    fn oracles_separate_the_classes() {
        let floor = tiles(60, 28);
        assert_eq!(LuggageOracle.predict(&floor), -1.0);
        assert_eq!(UnattendedOracle.predict(&floor), 1.0);
        for t in luggage_templates() {
            let f = composite(&tiles(t.width(), t.height()), &t, 0, 0).unwrap();
            assert_eq!(LuggageOracle.predict(&f), 1.0);
            let wide = composite(&floor, &t, 10, 28 - t.height()).unwrap();
            assert_eq!(UnattendedOracle.predict(&wide), 1.0);
        }
        for t in attended_templates() {
            let f = composite(&floor, &t, 0, 28 - t.height()).unwrap();
            assert_eq!(UnattendedOracle.predict(&f), -1.0);
        }
        let person = walker();
        let f = composite(&tiles(14, 44), &person, 0, 0).unwrap();
        assert_eq!(LuggageOracle.predict(&f), -1.0);
    }

    #[test]
    fn tile_shades_stay_in_range() {
        let f = tiles(360, 288);
        assert!(f.data().iter().all(|&v| (135..=165).contains(&v)));
    }
}
