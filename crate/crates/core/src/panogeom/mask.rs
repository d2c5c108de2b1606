use serde::{Deserialize, Serialize};

use super::camera::{CameraIntrinsics, PixelCoord, ViewIndex};
use crate::error::{Error, Result};

/// Binary image, row-major, one byte (0 or 1) per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[(y * self.width + x) as usize] != 0
    }

    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        self.data[(y * self.width + x) as usize] = u8::from(on);
    }

    /// Number of set pixels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    pub(crate) fn bytes(&self) -> &[u8] {
        &self.data
    }

    pub(crate) fn from_bytes(width: u32, height: u32, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), width as usize * height as usize);
        Self {
            width,
            height,
            data,
        }
    }
}

/// Fill every pixel whose center lies inside the simple polygon `vertices`.
///
/// Scanline fill with half-open edge crossings, so pixels on shared
/// boundaries are counted once and the pixel count tracks polygon area.
pub fn rasterize_polygon(vertices: &[PixelCoord], width: u32, height: u32) -> Raster {
    let mut raster = Raster::new(width, height);
    if vertices.len() < 3 {
        return raster;
    }
    let mut crossings = Vec::with_capacity(vertices.len());
    for row in 0..height {
        let y = f64::from(row) + 0.5;
        crossings.clear();
        for (i, p) in vertices.iter().enumerate() {
            let q = vertices[(i + 1) % vertices.len()];
            if (p.y <= y && y < q.y) || (q.y <= y && y < p.y) {
                crossings.push(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for span in crossings.chunks_exact(2) {
            let start = (span[0] - 0.5).ceil().max(0.0);
            let end = (span[1] - 0.5).ceil().min(f64::from(width));
            let mut col = start;
            while col < end {
                raster.set(col as u32, row, true);
                col += 1.0;
            }
        }
    }
    raster
}

/// Bottom and top widths of the obstruction trapezoid as fractions of the
/// image width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskShape {
    pub bottom_frac: f64,
    pub top_frac: f64,
}

impl Default for MaskShape {
    fn default() -> Self {
        Self {
            bottom_frac: 0.5,
            top_frac: 0.15,
        }
    }
}

impl MaskShape {
    pub fn widths(&self, intrinsics: &CameraIntrinsics) -> (f64, f64) {
        let w = f64::from(intrinsics.width());
        (self.bottom_frac * w, self.top_frac * w)
    }
}

/// Trapezoid covering the walkable region between the bottom of a view and
/// the pixel where the neighbor node appears.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapezoidMask {
    pub view: ViewIndex,
    /// Bottom-left, bottom-right, top-right, top-left, clamped to the image.
    pub vertices: [PixelCoord; 4],
    pub target: PixelCoord,
    pub raster: Raster,
}

/// Build the obstruction mask for a target pixel.
///
/// The bottom edge sits on the image bottom, centered at `W/2`; the top edge
/// is centered on the target. When the target is within half a top width of
/// the center column, the bottom edge is centered under the target instead
/// and the mask becomes a vertical band.
pub fn make_trapezoid_mask(
    view: ViewIndex,
    target: PixelCoord,
    intrinsics: &CameraIntrinsics,
    bottom_width: f64,
    top_width: f64,
) -> Result<TrapezoidMask> {
    if !(top_width > 0.0 && bottom_width >= top_width) {
        return Err(Error::InvalidArgument(format!(
            "mask widths must satisfy bottom >= top > 0 (got {bottom_width}, {top_width})"
        )));
    }
    if !(target.x.is_finite() && target.y.is_finite()) {
        return Err(Error::InvalidArgument("target pixel is not finite".into()));
    }
    let w = f64::from(intrinsics.width());
    let h = f64::from(intrinsics.height());
    let center = w / 2.0;
    let bottom_center = if (target.x - center).abs() < top_width / 2.0 {
        target.x
    } else {
        center
    };
    let clamp = |x: f64, y: f64| PixelCoord::new(x.clamp(0.0, w), y.clamp(0.0, h));
    let vertices = [
        clamp(bottom_center - bottom_width / 2.0, h),
        clamp(bottom_center + bottom_width / 2.0, h),
        clamp(target.x + top_width / 2.0, target.y),
        clamp(target.x - top_width / 2.0, target.y),
    ];
    let raster = rasterize_polygon(&vertices, intrinsics.width(), intrinsics.height());
    if raster.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(TrapezoidMask {
        view,
        vertices,
        target,
        raster,
    })
}
