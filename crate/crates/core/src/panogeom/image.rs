use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::camera::{PixelCoord, ViewIndex};
use super::mask::Raster;
use crate::error::{Error, Result};

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0; 3 * width as usize * height as usize],
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != 3 * width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "{} bytes do not form a {width}x{height} RGB image",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn raw(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y * self.width + x) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x) as usize;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header().expect("in-memory png header");
            writer
                .write_image_data(&self.data)
                .expect("in-memory png data");
        }
        out
    }

    /// Decode any 8-bit PNG into RGB (gray is replicated, alpha dropped).
    pub fn from_png(bytes: &[u8]) -> Result<Self> {
        let (info, buf) = decode(bytes)?;
        let channels = info.color_type.samples();
        let mut data = Vec::with_capacity(3 * info.width as usize * info.height as usize);
        for px in buf.chunks_exact(channels) {
            match info.color_type {
                png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => {
                    data.extend([px[0]; 3])
                }
                _ => data.extend_from_slice(&px[..3]),
            }
        }
        Self::from_raw(info.width, info.height, data)
    }
}

fn decode(bytes: &[u8]) -> Result<(png::OutputInfo, Vec<u8>)> {
    let mut decoder = png::Decoder::new(bytes);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| Error::format("png", e))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format("png", e))?;
    buf.truncate(info.buffer_size());
    Ok((info, buf))
}

impl Raster {
    /// Encode as a 1-bit grayscale PNG (set pixels are white).
    pub fn to_png(&self) -> Vec<u8> {
        let row_bytes = (self.width() as usize).div_ceil(8);
        let mut packed = vec![0u8; row_bytes * self.height() as usize];
        for (x, y) in self.iter_set() {
            packed[y as usize * row_bytes + x as usize / 8] |= 0x80 >> (x % 8);
        }
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width(), self.height());
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::One);
            let mut writer = enc.write_header().expect("in-memory png header");
            writer
                .write_image_data(&packed)
                .expect("in-memory png data");
        }
        out
    }

    /// Decode a grayscale PNG of any depth; nonzero pixels are set.
    pub fn from_png(bytes: &[u8]) -> Result<Self> {
        let (info, buf) = decode(bytes)?;
        let channels = info.color_type.samples();
        let data = buf
            .chunks_exact(channels)
            .map(|px| u8::from(px[0] != 0))
            .collect();
        Ok(Raster::from_bytes(info.width, info.height, data))
    }

    pub fn raw_bits(&self) -> &[u8] {
        self.bytes()
    }
}

/// JSON written next to every mask PNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSidecar {
    pub view_index: ViewIndex,
    /// View the mask was propagated from; absent for the target view itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_view: Option<ViewIndex>,
    /// Polygon corners; propagated corners that fall behind the camera are null.
    pub vertices: Vec<Option<[f64; 2]>>,
    pub target: Option<[f64; 2]>,
}

impl MaskSidecar {
    pub fn point(p: Option<PixelCoord>) -> Option<[f64; 2]> {
        p.map(|p| [p.x, p.y])
    }
}

/// Write `<stem>.png` and `<stem>.json` into `dir`.
pub fn write_mask(dir: &Path, stem: &str, raster: &Raster, sidecar: &MaskSidecar) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let png_path = dir.join(format!("{stem}.png"));
    fs::write(&png_path, raster.to_png()).map_err(|e| Error::io(&png_path, e))?;
    let json_path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(sidecar).expect("sidecar serializes") + "\n";
    fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))
}
