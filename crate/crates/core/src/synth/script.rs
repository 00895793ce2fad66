//! Text format for scene scripts. See `docs/scene-format.md` for the grammar.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::assets::{builtin_background, builtin_template};
use super::{ObjectEvent, ObjectKind, SceneBackground, SceneScript, Shape, Waypoint};
use crate::error::{Error, Result};
use crate::pnm;
use crate::samplegen::{TemplateImage, TemplateKind};

struct Record<'a> {
    line: usize,
    keyword: &'a str,
    name: Option<&'a str>,
    fields: HashMap<&'a str, &'a str>,
}

struct Parser<'a> {
    source: PathBuf,
    base_dir: Option<&'a Path>,
}

impl Parser<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.source.clone(),
            line,
            message: message.into(),
        }
    }

    fn record<'t>(&self, line: usize, text: &'t str) -> Result<Record<'t>> {
        let mut tokens = text.split_whitespace();
        let keyword = tokens.next().expect("caller skips blank lines");
        let mut name = None;
        let mut fields = HashMap::new();
        for tok in tokens {
            match tok.split_once('=') {
                Some((k, v)) => {
                    if fields.insert(k, v).is_some() {
                        return Err(self.err(line, format!("duplicate key {k:?}")));
                    }
                }
                None if name.is_none() && fields.is_empty() => name = Some(tok),
                None => return Err(self.err(line, format!("expected key=value, found {tok:?}"))),
            }
        }
        Ok(Record {
            line,
            keyword,
            name,
            fields,
        })
    }

    fn take<T: FromStr>(&self, rec: &mut Record, key: &str) -> Result<Option<T>> {
        match rec.fields.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(rec.line, format!("bad value for {key}: {v:?}"))),
        }
    }

    fn require<T: FromStr>(&self, rec: &mut Record, key: &str) -> Result<T> {
        self.take(rec, key)?
            .ok_or_else(|| self.err(rec.line, format!("{} record needs {key}=", rec.keyword)))
    }

    fn finish(&self, rec: &Record) -> Result<()> {
        let mut left: Vec<_> = rec.fields.keys().collect();
        left.sort();
        match left.first() {
            None => Ok(()),
            Some(k) => Err(self.err(rec.line, format!("unknown key {k:?} in {} record", rec.keyword))),
        }
    }

    fn resolve(&self, path: &str) -> PathBuf {
        match self.base_dir {
            Some(dir) if Path::new(path).is_relative() => dir.join(path),
            _ => PathBuf::from(path),
        }
    }

    fn background(&self, line: usize, spec: &str, width: usize, height: usize) -> Result<SceneBackground> {
        let (scheme, arg) = spec
            .split_once(':')
            .ok_or_else(|| self.err(line, format!("background must be uniform:, builtin: or file:, got {spec:?}")))?;
        match scheme {
            "uniform" => arg
                .parse()
                .map(SceneBackground::Uniform)
                .map_err(|_| self.err(line, format!("bad uniform intensity {arg:?}"))),
            "builtin" => builtin_background(arg, width, height)
                .map(SceneBackground::Image)
                .ok_or_else(|| self.err(line, format!("no builtin background named {arg:?}"))),
            "file" => Ok(SceneBackground::Image(pnm::read_ppm(&self.resolve(arg))?)),
            _ => Err(self.err(line, format!("unknown background scheme {scheme:?}"))),
        }
    }

    fn shape(&self, line: usize, spec: &str) -> Result<Shape> {
        let (scheme, arg) = spec
            .split_once(':')
            .ok_or_else(|| self.err(line, format!("shape must be rect:, builtin: or file:, got {spec:?}")))?;
        match scheme {
            "rect" => {
                let bad = || self.err(line, format!("rect shape is rect:WxH:R,G,B, got {spec:?}"));
                let (size, colour) = arg.split_once(':').ok_or_else(bad)?;
                let (w, h) = size.split_once('x').ok_or_else(bad)?;
                let rgb: Vec<u8> = colour.split(',').map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
                let [r, g, b] = rgb[..] else { return Err(bad()) };
                Ok(Shape::Rect {
                    w: w.parse().map_err(|_| bad())?,
                    h: h.parse().map_err(|_| bad())?,
                    color: [r, g, b],
                })
            }
            "builtin" => builtin_template(arg)
                .map(Shape::Template)
                .ok_or_else(|| self.err(line, format!("no builtin template named {arg:?}"))),
            "file" => Ok(Shape::Template(TemplateImage::load(&self.resolve(arg), TemplateKind::Luggage)?)),
            _ => Err(self.err(line, format!("unknown shape scheme {scheme:?}"))),
        }
    }
}

/// Parses a scene script. Relative `file:` paths resolve against `base_dir`
/// when given.
pub fn parse_scene(text: &str, base_dir: Option<&Path>) -> Result<SceneScript> {
    parse_named(text, base_dir, PathBuf::from("<scene>"))
}

pub fn load_scene(path: &Path) -> Result<SceneScript> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_named(&text, path.parent(), path.to_path_buf())
}

fn parse_named(text: &str, base_dir: Option<&Path>, source: PathBuf) -> Result<SceneScript> {
    let p = Parser { source, base_dir };
    let mut script: Option<SceneScript> = None;
    let mut index: HashMap<String, usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut rec = p.record(i + 1, line)?;
        if rec.keyword == "scene" {
            if script.is_some() {
                return Err(p.err(rec.line, "only one scene record is allowed"));
            }
            if rec.name.is_some() {
                return Err(p.err(rec.line, "scene record takes only key=value fields"));
            }
            let width: usize = p.require(&mut rec, "width")?;
            let height: usize = p.require(&mut rec, "height")?;
            let duration: u64 = p.require(&mut rec, "duration")?;
            let noise_amplitude: u8 = p.take(&mut rec, "noise")?.unwrap_or(0);
            let seed: u64 = p.take(&mut rec, "seed")?.unwrap_or(0);
            let bg: String = p.take(&mut rec, "background")?.unwrap_or_else(|| "uniform:128".into());
            p.finish(&rec)?;
            script = Some(SceneScript {
                width,
                height,
                duration,
                background: p.background(rec.line, &bg, width, height)?,
                noise_amplitude,
                objects: Vec::new(),
                seed,
            });
            continue;
        }

        let Some(s) = script.as_mut() else {
            return Err(p.err(rec.line, "the scene record must come first"));
        };
        let name = rec
            .name
            .ok_or_else(|| p.err(rec.line, format!("{} record needs an object name", rec.keyword)))?;
        match rec.keyword {
            "object" => {
                if index.contains_key(name) {
                    return Err(p.err(rec.line, format!("object {name:?} is already defined")));
                }
                let kind = match p.require::<String>(&mut rec, "kind")?.as_str() {
                    "luggage" => ObjectKind::Luggage,
                    "person" => ObjectKind::Person,
                    other => return Err(p.err(rec.line, format!("kind must be luggage or person, got {other:?}"))),
                };
                let shape_spec: String = p.require(&mut rec, "shape")?;
                p.finish(&rec)?;
                index.insert(name.to_string(), s.objects.len());
                s.objects.push(ObjectEvent {
                    name: name.to_string(),
                    kind,
                    shape: p.shape(rec.line, &shape_spec)?,
                    path: Vec::new(),
                    abandoned_from: None,
                });
            }
            "waypoint" | "abandon" => {
                let &at = index
                    .get(name)
                    .ok_or_else(|| p.err(rec.line, format!("no object named {name:?} defined above")))?;
                let frame: u64 = p.require(&mut rec, "frame")?;
                let obj = &mut s.objects[at];
                if rec.keyword == "waypoint" {
                    let x = p.require(&mut rec, "x")?;
                    let y = p.require(&mut rec, "y")?;
                    p.finish(&rec)?;
                    if obj.path.last().is_some_and(|w| w.frame >= frame) {
                        return Err(p.err(rec.line, format!("waypoint frames of {name:?} must strictly increase")));
                    }
                    obj.path.push(Waypoint { frame, x, y });
                } else {
                    p.finish(&rec)?;
                    if obj.abandoned_from.replace(frame).is_some() {
                        return Err(p.err(rec.line, format!("{name:?} is already abandoned")));
                    }
                }
            }
            other => return Err(p.err(rec.line, format!("unknown record {other:?}"))),
        }
    }

    let script = script.ok_or_else(|| p.err(0, "missing scene record"))?;
    script.validate()?;
    Ok(script)
}
