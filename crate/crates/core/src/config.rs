//! Flat `key = value` pipeline configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::background::BackgroundParams;
use crate::cascade::CascadeParams;
use crate::error::{Error, Result};
use crate::eval::DEFAULT_EVAL_IOU;
use crate::sod::SodParams;
use crate::tracker::TrackerParams;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub background: BackgroundParams,
    pub sod: SodParams,
    pub tracker: TrackerParams,
    pub cascade: CascadeParams,
    pub eval_iou: f64,
    /// Frame directory, or `-` for a P6 stream on stdin.
    pub input: Option<PathBuf>,
    /// Detections file, or `-` for stdout.
    pub output: Option<PathBuf>,
    pub overlay_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            background: BackgroundParams::default(),
            sod: SodParams::default(),
            tracker: TrackerParams::default(),
            cascade: CascadeParams::default(),
            eval_iou: DEFAULT_EVAL_IOU,
            input: None,
            output: None,
            overlay_dir: None,
        }
    }
}

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("bg.alpha", "background learning rate, in (0, 1)"),
    ("bg.tau_fg", "foreground threshold on |gray - background|, 1..=255"),
    ("bg.erode_radius", "foreground mask erosion radius, 0..=16"),
    ("bg.dilate_radius", "foreground mask dilation radius, 0..=16"),
    ("sod.motion_gap", "frames between the two differenced frames, 1..=100"),
    ("sod.tau_m", "motion threshold on |gray difference|, 1..=255"),
    ("sod.min_area", "smallest static component in pixels, >= 1"),
    ("sod.erode_radius", "motion mask erosion radius, 0..=16"),
    ("sod.dilate_radius", "motion mask dilation radius, 0..=16"),
    ("track.iou_min", "association IoU threshold, in [0, 1)"),
    ("track.miss_limit", "frames a track may go unseen, >= 0"),
    ("cascade.interval", "frames between classifications of a track, >= 1"),
    ("cascade.window", "smoothing window in frames, odd, >= 1"),
    ("cascade.sigma", "smoothing sigma in frames, > 0, or `auto` for window / 6"),
    ("eval.iou_min", "IoU a detection must exceed to match ground truth, in [0, 1)"),
    ("io.input", "frame directory, or - for a P6 stream on stdin"),
    ("io.output", "detections file, or - for stdout"),
    ("io.overlay_dir", "directory for annotated frames, or empty for none"),
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse {value:?}")))
}

fn ranged<T>(key: &str, value: &str, ok: impl Fn(&T) -> bool) -> Result<T>
where
    T: std::str::FromStr,
{
    let v = parse(key, value)?;
    if ok(&v) {
        Ok(v)
    } else {
        let range = KEYS.iter().find(|(k, _)| *k == key).map_or("", |(_, d)| d);
        Err(Error::invalid(format!("{key} = {value} is out of range ({range})")))
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl PipelineConfig {
    /// Sets one key. Unknown keys and out-of-range values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let radius = |v: &usize| *v <= 16;
        match key {
            "bg.alpha" => self.background.alpha = ranged(key, value, |a: &f32| *a > 0.0 && *a < 1.0)?,
            "bg.tau_fg" => self.background.tau_fg = ranged(key, value, |t: &u8| *t >= 1)?,
            "bg.erode_radius" => self.background.erode_radius = ranged(key, value, radius)?,
            "bg.dilate_radius" => self.background.dilate_radius = ranged(key, value, radius)?,
            "sod.motion_gap" => self.sod.motion_gap = ranged(key, value, |g: &usize| (1..=100).contains(g))?,
            "sod.tau_m" => self.sod.tau_m = ranged(key, value, |t: &u8| *t >= 1)?,
            "sod.min_area" => self.sod.min_area = ranged(key, value, |a: &usize| *a >= 1)?,
            "sod.erode_radius" => self.sod.erode_radius = ranged(key, value, radius)?,
            "sod.dilate_radius" => self.sod.dilate_radius = ranged(key, value, radius)?,
            "track.iou_min" => self.tracker.iou_min = ranged(key, value, |v: &f64| (0.0..1.0).contains(v))?,
            "track.miss_limit" => self.tracker.miss_limit = parse(key, value)?,
            "cascade.interval" => self.cascade.interval = ranged(key, value, |i: &u64| *i >= 1)?,
            "cascade.window" => self.cascade.window = ranged(key, value, |w: &usize| w % 2 == 1)?,
            "cascade.sigma" => {
                self.cascade.sigma = if value == "auto" {
                    None
                } else {
                    Some(ranged(key, value, |s: &f64| s.is_finite() && *s > 0.0)?)
                }
            }
            "eval.iou_min" => self.eval_iou = ranged(key, value, |v: &f64| (0.0..1.0).contains(v))?,
            "io.input" => self.input = optional_path(value),
            "io.output" => self.output = optional_path(value),
            "io.overlay_dir" => self.overlay_dir = optional_path(value),
            _ => return Err(Error::invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the current settings. Blank
    /// lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, source: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                source_name: source.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, found {line:?}")))?;
            self.set(key.trim(), value).map_err(|e| err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        c.apply_text(text, Path::new("<config>"))?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = PipelineConfig::default();
        c.apply_text(&text, path)?;
        Ok(c)
    }

    /// The effective settings in the same format `load` reads.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        let values = [
            self.background.alpha.to_string(),
            self.background.tau_fg.to_string(),
            self.background.erode_radius.to_string(),
            self.background.dilate_radius.to_string(),
            self.sod.motion_gap.to_string(),
            self.sod.tau_m.to_string(),
            self.sod.min_area.to_string(),
            self.sod.erode_radius.to_string(),
            self.sod.dilate_radius.to_string(),
            self.tracker.iou_min.to_string(),
            self.tracker.miss_limit.to_string(),
            self.cascade.interval.to_string(),
            self.cascade.window.to_string(),
            self.cascade.sigma.map_or("auto".to_string(), |s| s.to_string()),
            self.eval_iou.to_string(),
            path(&self.input),
            path(&self.output),
            path(&self.overlay_dir),
        ];
        let mut out = String::new();
        for ((key, doc), value) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "# {doc}\n{key} = {value}");
        }
        out
    }
}
