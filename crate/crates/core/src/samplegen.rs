//! Scene-specific training samples: luggage and attended-luggage templates
//! alpha-composited over crops of the estimated background.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imgproc::{crop, BoundingBox, Frame};
use crate::pnm::{self, RgbaImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TemplateKind {
    /// A bag, suitcase or backpack on its own.
    Luggage,
    /// A person standing by or carrying luggage.
    Attended,
    /// A person without luggage; used by scripted scenes.
    Person,
}

/// An RGBA sprite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
    pub kind: TemplateKind,
}

impl TemplateImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>, kind: TemplateKind) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height * 4 {
            return Err(Error::Format(format!(
                "template {width}x{height} needs {} RGBA bytes, got {}",
                width * height * 4,
                data.len()
            )));
        }
        Ok(TemplateImage {
            width,
            height,
            data,
            kind,
        })
    }

    pub fn load(path: &Path, kind: TemplateKind) -> Result<Self> {
        let img = pnm::read_pam(path)?;
        TemplateImage::new(img.width, img.height, img.data, kind)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        pnm::write_pam(
            path,
            &RgbaImage {
                width: self.width,
                height: self.height,
                data: self.data.clone(),
            },
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn rgba(&self, x: usize, y: usize) -> [u8; 4] {
        let i = (y * self.width + x) * 4;
        [self.data[i], self.data[i + 1], self.data[i + 2], self.data[i + 3]]
    }
}

/// `round((a*T + (255-a)*B) / 255)` with halves rounded up.
#[inline]
fn blend(t: u8, b: u8, a: u8) -> u8 {
    let num = u32::from(a) * u32::from(t) + (255 - u32::from(a)) * u32::from(b);
    ((2 * num + 255) / 510) as u8
}

/// Alpha-composites `template` onto `frame` with its top-left at `(x, y)`.
pub fn composite_onto(frame: &mut Frame, template: &TemplateImage, x: usize, y: usize) -> Result<()> {
    let fp = BoundingBox::new(x, y, template.width, template.height);
    if !fp.fits_within(frame.width(), frame.height()) {
        return Err(Error::OutOfBounds {
            x: x as i64,
            y: y as i64,
            w: template.width,
            h: template.height,
            width: frame.width(),
            height: frame.height(),
        });
    }
    for ty in 0..template.height {
        for tx in 0..template.width {
            let [r, g, b, a] = template.rgba(tx, ty);
            if a == 0 {
                continue;
            }
            let [br, bg, bb] = frame.pixel(x + tx, y + ty);
            frame.set_pixel(x + tx, y + ty, [blend(r, br, a), blend(g, bg, a), blend(b, bb, a)]);
        }
    }
    Ok(())
}

pub fn composite(bg: &Frame, template: &TemplateImage, x: usize, y: usize) -> Result<Frame> {
    let mut out = bg.clone();
    composite_onto(&mut out, template, x, y)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SampleLabel {
    Positive,
    Negative,
}

impl fmt::Display for SampleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleLabel::Positive => "positive",
            SampleLabel::Negative => "negative",
        })
    }
}

impl FromStr for SampleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(SampleLabel::Positive),
            "negative" => Ok(SampleLabel::Negative),
            other => Err(Error::invalid(format!("unknown sample label {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SampleStage {
    Stage1,
    Stage2,
}

impl fmt::Display for SampleStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleStage::Stage1 => "stage1",
            SampleStage::Stage2 => "stage2",
        })
    }
}

impl FromStr for SampleStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stage1" | "1" => Ok(SampleStage::Stage1),
            "stage2" | "2" => Ok(SampleStage::Stage2),
            other => Err(Error::invalid(format!("unknown stage {other:?}"))),
        }
    }
}

/// Where a generated sample came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleOrigin {
    /// The background region the sample was cut from.
    pub crop: BoundingBox,
    /// Index into the template list used and the template's footprint in
    /// sample coordinates, when one was composited.
    pub template: Option<(usize, BoundingBox)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub image: Frame,
    pub label: SampleLabel,
    pub origin: Option<SampleOrigin>,
}

impl LabeledSample {
    pub fn new(image: Frame, label: SampleLabel) -> Self {
        LabeledSample {
            image,
            label,
            origin: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<LabeledSample>,
    pub seed: u64,
    pub stage: SampleStage,
}

impl SampleSet {
    pub fn new(samples: Vec<LabeledSample>, seed: u64, stage: SampleStage) -> Self {
        SampleSet { samples, seed, stage }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn count(&self, label: SampleLabel) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }
}

fn check_size(bg: &Frame, size: (usize, usize)) -> Result<()> {
    let (w, h) = size;
    if w == 0 || h == 0 || w > bg.width() || h > bg.height() {
        return Err(Error::invalid(format!(
            "sample size {w}x{h} does not fit a {}x{} background",
            bg.width(),
            bg.height()
        )));
    }
    Ok(())
}

fn check_templates(templates: &[TemplateImage], size: (usize, usize), what: &str) -> Result<()> {
    for t in templates {
        if t.width > size.0 || t.height > size.1 {
            return Err(Error::invalid(format!(
                "{what} template {}x{} is larger than the {}x{} sample size",
                t.width, t.height, size.0, size.1
            )));
        }
    }
    Ok(())
}

fn random_crop(rng: &mut ChaCha8Rng, bg: &Frame, size: (usize, usize)) -> BoundingBox {
    let x = rng.gen_range(0..=bg.width() - size.0);
    let y = rng.gen_range(0..=bg.height() - size.1);
    BoundingBox::new(x, y, size.0, size.1)
}

fn composited_sample(
    rng: &mut ChaCha8Rng,
    bg: &Frame,
    templates: &[TemplateImage],
    size: (usize, usize),
    label: SampleLabel,
) -> Result<LabeledSample> {
    let region = random_crop(rng, bg, size);
    let index = rng.gen_range(0..templates.len());
    let t = &templates[index];
    let tx = rng.gen_range(0..=size.0 - t.width);
    let ty = rng.gen_range(0..=size.1 - t.height);
    let mut image = crop(bg, region)?;
    composite_onto(&mut image, t, tx, ty)?;
    Ok(LabeledSample {
        image,
        label,
        origin: Some(SampleOrigin {
            crop: region,
            template: Some((index, BoundingBox::new(tx, ty, t.width, t.height))),
        }),
    })
}

fn background_sample(rng: &mut ChaCha8Rng, bg: &Frame, size: (usize, usize)) -> Result<LabeledSample> {
    let region = random_crop(rng, bg, size);
    Ok(LabeledSample {
        image: crop(bg, region)?,
        label: SampleLabel::Negative,
        origin: Some(SampleOrigin {
            crop: region,
            template: None,
        }),
    })
}

/// Luggage-vs-background samples for the first classifier.
///
/// Positives are `size` crops of `bg` with one luggage template at a uniform
/// in-bounds position; negatives are plain crops. Positives come first.
pub fn gen_stage1(
    bg: &Frame,
    luggage: &[TemplateImage],
    n_pos: usize,
    n_neg: usize,
    size: (usize, usize),
    seed: u64,
) -> Result<SampleSet> {
    check_size(bg, size)?;
    if n_pos > 0 && luggage.is_empty() {
        return Err(Error::invalid("positive samples need at least one luggage template"));
    }
    check_templates(luggage, size, "luggage")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_pos + n_neg);
    for _ in 0..n_pos {
        samples.push(composited_sample(&mut rng, bg, luggage, size, SampleLabel::Positive)?);
    }
    for _ in 0..n_neg {
        samples.push(background_sample(&mut rng, bg, size)?);
    }
    Ok(SampleSet::new(samples, seed, SampleStage::Stage1))
}

/// Abandoned-vs-attended samples for the second classifier.
///
/// Positives are drawn exactly as in [`gen_stage1`] (same seed and size give
/// the same positives); negatives composite one attended template instead.
pub fn gen_stage2(
    bg: &Frame,
    luggage: &[TemplateImage],
    attended: &[TemplateImage],
    n_pos: usize,
    n_neg: usize,
    size: (usize, usize),
    seed: u64,
) -> Result<SampleSet> {
    check_size(bg, size)?;
    if n_pos > 0 && luggage.is_empty() {
        return Err(Error::invalid("positive samples need at least one luggage template"));
    }
    if n_neg > 0 && attended.is_empty() {
        return Err(Error::invalid("negative samples need at least one attended template"));
    }
    check_templates(luggage, size, "luggage")?;
    check_templates(attended, size, "attended")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_pos + n_neg);
    for _ in 0..n_pos {
        samples.push(composited_sample(&mut rng, bg, luggage, size, SampleLabel::Positive)?);
    }
    for _ in 0..n_neg {
        samples.push(composited_sample(&mut rng, bg, attended, size, SampleLabel::Negative)?);
    }
    Ok(SampleSet::new(samples, seed, SampleStage::Stage2))
}

/// Horizontal mirror.
pub fn augment_flip(sample: &LabeledSample) -> LabeledSample {
    let img = &sample.image;
    let (w, h) = img.dims();
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            out.set_pixel(w - 1 - x, y, img.pixel(x, y));
        }
    }
    LabeledSample {
        image: out,
        label: sample.label,
        origin: None,
    }
}

const BINOMIAL: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

/// Separable `[1 4 6 4 1] / 16` blur, horizontal then vertical. Taps that fall
/// outside the image are dropped and the rest renormalised. Rounds half up
/// once, after both passes.
pub fn augment_blur(sample: &LabeledSample) -> LabeledSample {
    let img = &sample.image;
    let (w, h) = img.dims();
    let src: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();

    let pass = |input: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; input.len()];
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    let (mut acc, mut norm) = (0.0, 0.0);
                    for (k, &wk) in BINOMIAL.iter().enumerate() {
                        let off = k as i64 - 2;
                        let (nx, ny) = if horizontal {
                            (x as i64 + off, y as i64)
                        } else {
                            (x as i64, y as i64 + off)
                        };
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        acc += wk * input[(ny as usize * w + nx as usize) * 3 + c];
                        norm += wk;
                    }
                    out[(y * w + x) * 3 + c] = acc / norm;
                }
            }
        }
        out
    };

    let blurred = pass(&pass(&src, true), false);
    let data = blurred.iter().map(|&v| (v + 0.5).floor().clamp(0.0, 255.0) as u8).collect();
    LabeledSample {
        image: Frame::new(w, h, data).expect("dimensions preserved"),
        label: sample.label,
        origin: None,
    }
}

/// Originals followed by their flipped and blurred versions.
pub fn augment_set(set: &SampleSet) -> SampleSet {
    let mut samples = set.samples.clone();
    samples.extend(set.samples.iter().map(augment_flip));
    samples.extend(set.samples.iter().map(augment_blur));
    SampleSet::new(samples, set.seed, set.stage)
}

/// Seeded shuffle, then the first `ceil(n * train_fraction)` samples train.
pub fn split(set: &SampleSet, train_fraction: f64, seed: u64) -> Result<(SampleSet, SampleSet)> {
    if set.is_empty() {
        return Err(Error::invalid("cannot split an empty sample set"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    let n = set.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // guard against 0.8 * 10 = 8.000000000000001
    let n_train = ((n as f64 * train_fraction) - 1e-9).ceil().clamp(0.0, n as f64) as usize;
    let pick = |idx: &[usize]| SampleSet::new(idx.iter().map(|&i| set.samples[i].clone()).collect(), set.seed, set.stage);
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

const MANIFEST: &str = "manifest.txt";

/// Writes `dir/NNNNNN.ppm` per sample plus `dir/manifest.txt` with one
/// `filename label stage seed` line per sample.
pub fn save_sample_set(set: &SampleSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::new();
    for (i, s) in set.samples.iter().enumerate() {
        let name = format!("{i:06}.ppm");
        pnm::write_ppm(&dir.join(&name), &s.image)?;
        manifest.push_str(&format!("{name} {} {} {}\n", s.label, set.stage, set.seed));
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest).map_err(|e| Error::io(path, e))
}

pub fn load_sample_set(dir: &Path) -> Result<SampleSet> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut samples = Vec::new();
    let mut meta: Option<(SampleStage, u64)> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            source_name: path.clone(),
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [name, label, stage, seed] = fields[..] else {
            return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
        };
        let label: SampleLabel = label.parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let stage: SampleStage = stage.parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let seed: u64 = seed.parse().map_err(|_| parse_err(format!("bad seed {seed:?}")))?;
        match meta {
            None => meta = Some((stage, seed)),
            Some(m) if m != (stage, seed) => {
                return Err(parse_err("stage and seed must be the same on every line".into()))
            }
            Some(_) => {}
        }
        let image = pnm::read_ppm(&dir.join(name))?;
        samples.push(LabeledSample::new(image, label));
    }
    let (stage, seed) = meta.unwrap_or((SampleStage::Stage1, 0));
    Ok(SampleSet::new(samples, seed, stage))
}
