//! Image loading and the small set of pixel operations both pipelines need.
//!
//! Images are stored as row-major `u8` buffers with one or three
//! interleaved channels.

use std::path::Path;

use image::{DynamicImage, ImageError, ImageFormat, ImageReader};

use crate::error::{Error, Result};

/// A row-major grid of 8-bit intensities with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidDimensions(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidDimensions(format!(
                "buffer length {} != {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    /// Single-channel image from row-major intensities.
    pub fn gray(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Image::new(width, height, 1, data)
    }

    /// Single-channel image from a slice of rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(width * height);
        for r in rows {
            assert_eq!(r.as_ref().len(), width, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Image::gray(width, height, data)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Image::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    fn require_channels(&self, expected: usize) -> Result<()> {
        if self.channels != expected {
            return Err(Error::ChannelCount {
                expected,
                actual: self.channels,
            });
        }
        Ok(())
    }

    /// Errors unless the image has exactly one channel.
    pub fn require_gray(&self) -> Result<()> {
        self.require_channels(1)
    }

    fn remap(
        &self,
        width: usize,
        height: usize,
        src: impl Fn(usize, usize) -> (usize, usize),
    ) -> Image {
        let c = self.channels;
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..height {
            for x in 0..width {
                let (sx, sy) = src(x, y);
                let base = (sy * self.width + sx) * c;
                data.extend_from_slice(&self.data[base..base + c]);
            }
        }
        Image {
            width,
            height,
            channels: c,
            data,
        }
    }

    /// Rotates a quarter turn clockwise.
    pub fn rotate90(&self) -> Image {
        let h = self.height;
        self.remap(self.height, self.width, |x, y| (y, h - 1 - x))
    }

    pub fn flip_horizontal(&self) -> Image {
        let w = self.width;
        self.remap(self.width, self.height, |x, y| (w - 1 - x, y))
    }

    pub fn flip_vertical(&self) -> Image {
        let h = self.height;
        self.remap(self.width, self.height, |x, y| (x, h - 1 - y))
    }
}

/// The four single-channel planes fed to the topological pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelSet {
    pub gray: Image,
    pub red: Image,
    pub green: Image,
    pub blue: Image,
}

impl ChannelSet {
    /// Planes in feature order: gray, red, green, blue.
    pub fn planes(&self) -> [&Image; 4] {
        [&self.gray, &self.red, &self.green, &self.blue]
    }

    pub fn width(&self) -> usize {
        self.gray.width
    }

    pub fn height(&self) -> usize {
        self.gray.height
    }

    /// Interleaves the red, green and blue planes back into an RGB image.
    pub fn merge_rgb(&self) -> Image {
        let n = self.red.data.len();
        let mut data = Vec::with_capacity(n * 3);
        for i in 0..n {
            data.extend_from_slice(&[self.red.data[i], self.green.data[i], self.blue.data[i]]);
        }
        Image {
            width: self.red.width,
            height: self.red.height,
            channels: 3,
            data,
        }
    }
}

/// Decodes a PNG or JPEG file. Alpha is dropped; EXIF orientation is ignored.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let reader = ImageReader::open(path)
        .map_err(|e| io_error(path, e))?
        .with_guessed_format()
        .map_err(|e| io_error(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        Some(other) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("{other:?}"),
            })
        }
        None => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: "unrecognised file signature".into(),
            })
        }
    }
    let decoded = reader.decode().map_err(|e| match e {
        ImageError::Unsupported(u) => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: u.to_string(),
        },
        other => Error::CorruptData {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    Ok(from_dynamic(decoded))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::NotFound {
        Error::FileNotFound(path.to_path_buf())
    } else {
        Error::Io(e)
    }
}

fn from_dynamic(img: DynamicImage) -> Image {
    let (width, height) = (img.width() as usize, img.height() as usize);
    if img.color().has_color() {
        Image {
            width,
            height,
            channels: 3,
            data: img.into_rgb8().into_raw(),
        }
    } else {
        Image {
            width,
            height,
            channels: 1,
            data: img.into_luma8().into_raw(),
        }
    }
}

fn round_half_up(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Bilinear resize with pixel centres aligned (`src = (dst + 0.5) * scale - 0.5`).
pub fn resize(img: &Image, target_w: usize, target_h: usize) -> Result<Image> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::InvalidDimensions(format!(
            "resize target must be at least 1x1, got {target_w}x{target_h}"
        )));
    }
    if target_w == img.width && target_h == img.height {
        return Ok(img.clone());
    }
    let axis = |dst: usize, src_len: usize, dst_len: usize| -> (usize, usize, f64) {
        let scale = src_len as f64 / dst_len as f64;
        let pos = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(src_len - 1);
        (lo, hi, pos - lo as f64)
    };
    let xs: Vec<_> = (0..target_w)
        .map(|x| axis(x, img.width, target_w))
        .collect();
    let c = img.channels;
    let mut data = Vec::with_capacity(target_w * target_h * c);
    for y in 0..target_h {
        let (y0, y1, fy) = axis(y, img.height, target_h);
        for &(x0, x1, fx) in &xs {
            for ch in 0..c {
                let p = |x: usize, y: usize| img.get(x, y, ch) as f64;
                let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
                let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
                data.push(round_half_up(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    Image::new(target_w, target_h, c, data)
}

/// Luma from RGB with weights 0.299/0.587/0.114, rounded half up.
pub fn to_grayscale(img: &Image) -> Result<Image> {
    img.require_channels(3)?;
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| luma(px[0], px[1], px[2]))
        .collect();
    Image::gray(img.width, img.height, data)
}

// Integer arithmetic keeps the half-up rounding exact.
fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000).min(255) as u8
}

/// Splits an RGB image into gray, red, green and blue planes.
pub fn split_channels(img: &Image) -> Result<ChannelSet> {
    img.require_channels(3)?;
    let plane = |c: usize| Image {
        width: img.width,
        height: img.height,
        channels: 1,
        data: img.data.iter().skip(c).step_by(3).copied().collect(),
    };
    Ok(ChannelSet {
        gray: to_grayscale(img)?,
        red: plane(0),
        green: plane(1),
        blue: plane(2),
    })
}

/// Replicates a gray image into three identical channels.
pub fn gray_to_rgb(img: &Image) -> Result<Image> {
    img.require_gray()?;
    let data = img.data.iter().flat_map(|&v| [v, v, v]).collect();
    Image::new(img.width, img.height, 3, data)
}
