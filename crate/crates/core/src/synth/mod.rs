//! Scripted synthetic scenes: a static background, per-frame noise and
//! objects moving along piecewise-linear paths, rendered together with the
//! exact abandoned-luggage ground truth.

pub mod assets;
mod script;

pub use script::{load_scene, parse_scene};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::Annotation;
use crate::imgproc::{BoundingBox, Frame};
use crate::samplegen::{composite_onto, TemplateImage};

#[derive(Clone, Debug, PartialEq)]
pub enum SceneBackground {
    Uniform(u8),
    Image(Frame),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Rect { w: usize, h: usize, color: [u8; 3] },
    Template(TemplateImage),
}

impl Shape {
    pub fn size(&self) -> (usize, usize) {
        match self {
            Shape::Rect { w, h, .. } => (*w, *h),
            Shape::Template(t) => (t.width(), t.height()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectKind {
    Luggage,
    Person,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Waypoint {
    pub frame: u64,
    pub x: usize,
    pub y: usize,
}

/// One object of a scene. It is visible from its first to its last waypoint
/// frame and moves linearly between waypoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectEvent {
    pub name: String,
    pub kind: ObjectKind,
    pub shape: Shape,
    pub path: Vec<Waypoint>,
    pub abandoned_from: Option<u64>,
}

impl ObjectEvent {
    pub fn first_frame(&self) -> u64 {
        self.path.first().map_or(0, |w| w.frame)
    }

    pub fn last_frame(&self) -> u64 {
        self.path.last().map_or(0, |w| w.frame)
    }

    /// Top-left corner at `frame`, or `None` when the object is not visible.
    pub fn position(&self, frame: u64) -> Option<(usize, usize)> {
        let first = self.path.first()?;
        let last = self.path.last()?;
        if frame < first.frame || frame > last.frame {
            return None;
        }
        let i = self.path.partition_point(|w| w.frame <= frame);
        let a = self.path[i - 1];
        let Some(&b) = self.path.get(i) else {
            return Some((a.x, a.y));
        };
        Some((lerp(a.x, b.x, frame - a.frame, b.frame - a.frame), lerp(a.y, b.y, frame - a.frame, b.frame - a.frame)))
    }

    pub fn bbox_at(&self, frame: u64) -> Option<BoundingBox> {
        let (x, y) = self.position(frame)?;
        let (w, h) = self.shape.size();
        Some(BoundingBox::new(x, y, w, h))
    }
}

/// `p0 + (p1 - p0) * num / den`, rounded half up.
fn lerp(p0: usize, p1: usize, num: u64, den: u64) -> usize {
    let (p0, p1, num, den) = (p0 as i64, p1 as i64, num as i64, den as i64);
    let twice = 2 * (p0 * den + (p1 - p0) * num) + den;
    twice.div_euclid(2 * den) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneScript {
    pub width: usize,
    pub height: usize,
    pub duration: u64,
    pub background: SceneBackground,
    pub noise_amplitude: u8,
    pub objects: Vec<ObjectEvent>,
    pub seed: u64,
}

impl SceneScript {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("scene must have a non-zero size"));
        }
        if self.duration == 0 {
            return Err(Error::invalid("scene duration must be at least one frame"));
        }
        if let SceneBackground::Image(img) = &self.background {
            if img.dims() != (self.width, self.height) {
                return Err(Error::dims((self.width, self.height), img.dims()));
            }
        }
        for obj in &self.objects {
            let (w, h) = obj.shape.size();
            if w == 0 || h == 0 {
                return Err(Error::invalid(format!("object {:?} has an empty shape", obj.name)));
            }
            if obj.path.is_empty() {
                return Err(Error::invalid(format!("object {:?} has no waypoints", obj.name)));
            }
            for pair in obj.path.windows(2) {
                if pair[1].frame <= pair[0].frame {
                    return Err(Error::invalid(format!(
                        "object {:?}: waypoint frames must strictly increase ({} then {})",
                        obj.name, pair[0].frame, pair[1].frame
                    )));
                }
            }
            // the footprint is convex, so in-bounds waypoints keep every
            // interpolated position in bounds too
            for wp in &obj.path {
                if !BoundingBox::new(wp.x, wp.y, w, h).fits_within(self.width, self.height) {
                    return Err(Error::invalid(format!(
                        "object {:?} leaves the {}x{} frame at frame {} ({}, {})",
                        obj.name, self.width, self.height, wp.frame, wp.x, wp.y
                    )));
                }
            }
            if let Some(from) = obj.abandoned_from {
                let Some(rest) = obj.position(from) else {
                    return Err(Error::invalid(format!(
                        "object {:?} is abandoned at frame {from} but is not visible then",
                        obj.name
                    )));
                };
                if from >= self.duration {
                    return Err(Error::invalid(format!(
                        "object {:?} is abandoned at frame {from}, after the scene ends",
                        obj.name
                    )));
                }
                if obj.path.iter().any(|wp| wp.frame > from && (wp.x, wp.y) != rest) {
                    return Err(Error::invalid(format!(
                        "object {:?} moves after it is abandoned at frame {from}",
                        obj.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn base_frame(&self) -> Frame {
        match &self.background {
            SceneBackground::Uniform(v) => Frame::filled(self.width, self.height, [*v; 3]),
            SceneBackground::Image(img) => img.clone(),
        }
    }
}

/// One annotation per abandoned luggage object, from the abandonment frame to
/// the last frame it is still on screen.
pub fn ground_truth(script: &SceneScript) -> Vec<Annotation> {
    script
        .objects
        .iter()
        .filter(|o| o.kind == ObjectKind::Luggage)
        .filter_map(|o| {
            let from = o.abandoned_from?;
            let bbox = o.bbox_at(from)?;
            let end = o.last_frame().min(script.duration - 1);
            Annotation::new(from, end, bbox).ok()
        })
        .collect()
}

/// Renders frames one at a time; frame `i` depends only on the script and
/// `i`, so frames may be produced in any order.
pub struct SceneRenderer<'a> {
    script: &'a SceneScript,
    base: Frame,
}

impl<'a> SceneRenderer<'a> {
    pub fn new(script: &'a SceneScript) -> Result<Self> {
        script.validate()?;
        Ok(SceneRenderer {
            script,
            base: script.base_frame(),
        })
    }

    pub fn len(&self) -> u64 {
        self.script.duration
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frame(&self, index: u64) -> Result<Frame> {
        if index >= self.script.duration {
            return Err(Error::invalid(format!(
                "frame {index} is past the end of a {}-frame scene",
                self.script.duration
            )));
        }
        let mut data = self.base.data().to_vec();
        let amp = i16::from(self.script.noise_amplitude);
        if amp > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.script.seed);
            rng.set_stream(index);
            for v in &mut data {
                let n: i16 = rng.gen_range(-amp..=amp);
                *v = (i16::from(*v) + n).clamp(0, 255) as u8;
            }
        }
        let mut frame = Frame::new(self.script.width, self.script.height, data)?;
        for obj in &self.script.objects {
            let Some((x, y)) = obj.position(index) else { continue };
            match &obj.shape {
                Shape::Rect { w, h, color } => {
                    for yy in y..y + h {
                        for xx in x..x + w {
                            frame.set_pixel(xx, yy, *color);
                        }
                    }
                }
                Shape::Template(t) => composite_onto(&mut frame, t, x, y)?,
            }
        }
        Ok(frame)
    }

    pub fn frames(&self) -> impl Iterator<Item = Result<Frame>> + '_ {
        (0..self.script.duration).map(move |i| self.frame(i))
    }
}

pub fn render_scene(script: &SceneScript) -> Result<(Vec<Frame>, Vec<Annotation>)> {
    let renderer = SceneRenderer::new(script)?;
    let frames = renderer.frames().collect::<Result<Vec<_>>>()?;
    Ok((frames, ground_truth(script)))
}
