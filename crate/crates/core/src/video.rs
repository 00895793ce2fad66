//! Codec-free video I/O: directories of numbered P6 frames or a concatenated
//! P6 stream.

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::imgproc::Frame;
use crate::pnm;

/// `*.ppm` files in `dir`, sorted by file name.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn frame_file_name(index: u64) -> String {
    format!("{index:06}.ppm")
}

pub fn write_frame(dir: &Path, index: u64, frame: &Frame) -> Result<()> {
    pnm::write_ppm(&dir.join(frame_file_name(index)), frame)
}

/// Writes `frames` as `000000.ppm`, `000001.ppm`, ... creating `dir` if needed.
pub fn write_frame_dir<'a>(dir: &Path, frames: impl IntoIterator<Item = &'a Frame>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in frames.into_iter().enumerate() {
        write_frame(dir, i as u64, f)?;
    }
    Ok(())
}

enum Inner {
    Files { files: Vec<PathBuf>, next: usize },
    Stream(Box<dyn BufRead>),
    Done,
}

/// Iterator over the frames of a directory or stream.
pub struct FrameSource {
    inner: Inner,
}

impl FrameSource {
    pub fn open_dir(dir: &Path) -> Result<Self> {
        Ok(FrameSource {
            inner: Inner::Files {
                files: list_frame_files(dir)?,
                next: 0,
            },
        })
    }

    pub fn from_reader(reader: impl Read + 'static) -> Self {
        FrameSource {
            inner: Inner::Stream(Box::new(BufReader::new(reader))),
        }
    }

    pub fn stdin() -> Self {
        Self::from_reader(std::io::stdin())
    }

    /// `-` means stdin, anything else a frame directory.
    pub fn open(spec: &Path) -> Result<Self> {
        if spec == Path::new("-") {
            Ok(Self::stdin())
        } else {
            Self::open_dir(spec)
        }
    }
}

impl Iterator for FrameSource {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Result<Frame>> {
        let item = match &mut self.inner {
            Inner::Files { files, next } => {
                let path = files.get(*next)?;
                *next += 1;
                pnm::read_ppm(path)
            }
            Inner::Stream(reader) => match pnm::read_ppm_from(reader) {
                Ok(Some(f)) => Ok(f),
                Ok(None) => {
                    self.inner = Inner::Done;
                    return None;
                }
                Err(e) => Err(e),
            },
            Inner::Done => return None,
        };
        if item.is_err() {
            self.inner = Inner::Done;
        }
        Some(item)
    }
}
