use nalgebra::{Matrix3, Vector3};

use super::camera::{CameraIntrinsics, PixelCoord, ViewIndex};
use super::image::RgbImage;
use super::mask::{Raster, TrapezoidMask};
use crate::error::{Error, Result};

/// Homography taking pixels of `source` to pixels of `target` that see the
/// same world ray.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub source: ViewIndex,
    pub target: ViewIndex,
    pub matrix: Matrix3<f64>,
}

impl Projection {
    pub fn inverse(&self) -> Projection {
        Projection {
            source: self.target,
            target: self.source,
            matrix: self
                .matrix
                .try_inverse()
                .expect("rotation homographies are invertible"),
        }
    }

    /// Map a pixel; `None` when the ray lies behind the target camera.
    pub fn apply(&self, p: PixelCoord) -> Option<PixelCoord> {
        apply_matrix(&self.matrix, p)
    }
}

fn apply_matrix(m: &Matrix3<f64>, p: PixelCoord) -> Option<PixelCoord> {
    let v = m * Vector3::new(p.x, p.y, 1.0);
    (v.z > 1e-12).then(|| PixelCoord::new(v.x / v.z, v.y / v.z))
}

/// Source of view-to-view projections. [`AnalyticMatcher`] derives them from
/// the known view rotations; an image-feature matcher can stand in for it.
pub trait ViewMatcher {
    fn match_views(
        &self,
        source: ViewIndex,
        target: ViewIndex,
        intrinsics: &CameraIntrinsics,
    ) -> Result<Projection>;
}

/// Exact rotation homography between views sharing one camera center.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticMatcher;

impl ViewMatcher for AnalyticMatcher {
    fn match_views(
        &self,
        source: ViewIndex,
        target: ViewIndex,
        intrinsics: &CameraIntrinsics,
    ) -> Result<Projection> {
        view_homography(source, target, intrinsics)
    }
}

/// `K R_target^T R_source K^-1` for a view and one of its grid neighbors.
pub fn view_homography(
    source: ViewIndex,
    target: ViewIndex,
    intrinsics: &CameraIntrinsics,
) -> Result<Projection> {
    if source != target && !source.is_adjacent(target) {
        return Err(Error::InvalidArgument(format!(
            "views {} and {} are not adjacent",
            source.index(),
            target.index()
        )));
    }
    let k = intrinsics.matrix();
    let k_inv = k.try_inverse().expect("intrinsic matrix is invertible");
    let relative = target.rotation().transpose() * source.rotation();
    Ok(Projection {
        source,
        target,
        matrix: k * relative * k_inv,
    })
}

fn sample_source(
    inverse: &Matrix3<f64>,
    x: u32,
    y: u32,
    width: u32,
    height: u32,
) -> Option<(u32, u32)> {
    let center = PixelCoord::new(f64::from(x) + 0.5, f64::from(y) + 0.5);
    let src = apply_matrix(inverse, center)?;
    let (sx, sy) = (src.x.floor(), src.y.floor());
    (sx >= 0.0 && sy >= 0.0 && sx < f64::from(width) && sy < f64::from(height))
        .then_some((sx as u32, sy as u32))
}

/// Warp a binary raster through `proj` with nearest-pixel sampling.
///
/// Every output pixel center is pulled back through the inverse homography,
/// so the warped mask has no holes; pixels that fall outside the source
/// frame stay unset.
pub fn warp_raster(raster: &Raster, proj: &Projection) -> Raster {
    let (w, h) = (raster.width(), raster.height());
    let inverse = proj.inverse().matrix;
    let mut out = Raster::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if let Some((sx, sy)) = sample_source(&inverse, x, y, w, h) {
                if raster.get(sx, sy) {
                    out.set(x, y, true);
                }
            }
        }
    }
    out
}

/// Mask of `mask` as seen from the adjacent view `proj.target`.
pub fn propagate_mask(mask: &TrapezoidMask, proj: &Projection) -> Result<Raster> {
    if proj.source != mask.view {
        return Err(Error::InvalidArgument(format!(
            "projection starts at view {} but the mask is in view {}",
            proj.source.index(),
            mask.view.index()
        )));
    }
    Ok(warp_raster(&mask.raster, proj))
}

/// Warp an RGB image through `proj`; unmapped pixels are black.
pub fn warp_image(image: &RgbImage, proj: &Projection) -> RgbImage {
    let (w, h) = (image.width(), image.height());
    let inverse = proj.inverse().matrix;
    let mut out = RgbImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if let Some((sx, sy)) = sample_source(&inverse, x, y, w, h) {
                out.put(x, y, image.get(sx, sy));
            }
        }
    }
    out
}

/// `original * (1 - mask) + patch * mask`, per pixel.
pub fn composite(original: &RgbImage, patch: &RgbImage, mask: &Raster) -> Result<RgbImage> {
    let dims = (original.width(), original.height());
    if (patch.width(), patch.height()) != dims || (mask.width(), mask.height()) != dims {
        return Err(Error::InvalidArgument(
            "composite inputs differ in size".into(),
        ));
    }
    let mut out = original.clone();
    for (x, y) in mask.iter_set() {
        out.put(x, y, patch.get(x, y));
    }
    Ok(out)
}

/// Carry an inpainted patch from the mask's view into an adjacent view.
pub fn propagate_patch(
    neighbor: &RgbImage,
    inpainted: &RgbImage,
    mask: &TrapezoidMask,
    proj: &Projection,
) -> Result<RgbImage> {
    let warped_mask = propagate_mask(mask, proj)?;
    let warped_patch = warp_image(inpainted, proj);
    composite(neighbor, &warped_patch, &warped_mask)
}

#[cfg(test)]
mod tests {
    use super::super::camera::pixel_coords;
    use super::*;

    fn view(h: usize, e: i32) -> ViewIndex {
        ViewIndex::from_parts(h, e).unwrap()
    }

    #[test]
    fn same_view_is_identity() {
        let k = CameraIntrinsics::default();
        let p = view_homography(view(3, 0), view(3, 0), &k).unwrap();
        assert!((p.matrix - Matrix3::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn heading_step_shifts_the_residual() {
        let k = CameraIntrinsics::default();
        let p = view_homography(view(0, 0), view(1, 0), &k).unwrap();
        let src = pixel_coords(20f64.to_radians(), 0.0, &k).unwrap();
        let expected = pixel_coords((-10f64).to_radians(), 0.0, &k).unwrap();
        let got = p.apply(src).unwrap();
        assert!(
            (got.x - expected.x).abs() < 1.0 && (got.y - expected.y).abs() < 1.0,
            "{got:?} vs {expected:?}"
        );
    }

    #[test]
    fn forward_then_back_is_identity() {
        let k = CameraIntrinsics::default();
        for v in ViewIndex::all() {
            for n in v.neighbors() {
                let f = view_homography(v, n, &k).unwrap();
                let b = view_homography(n, v, &k).unwrap();
                let id = b.matrix * f.matrix;
                assert!((id - Matrix3::identity()).abs().max() < 1e-6);
            }
        }
    }

    #[test]
    fn non_adjacent_views_are_rejected() {
        let k = CameraIntrinsics::default();
        assert!(matches!(
            view_homography(view(0, 0), view(2, 0), &k),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            view_homography(view(0, -1), view(0, 1), &k),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn identity_projection_keeps_the_raster() {
        let k = CameraIntrinsics::from_degrees(16, 16, 60.0).unwrap();
        let mask = super::super::mask::make_trapezoid_mask(
            view(0, 0),
            PixelCoord::new(10.0, 9.0),
            &k,
            8.0,
            3.0,
        )
        .unwrap();
        let p = view_homography(view(0, 0), view(0, 0), &k).unwrap();
        assert_eq!(propagate_mask(&mask, &p).unwrap(), mask.raster);
        let wrong = view_homography(view(1, 0), view(1, 0), &k).unwrap();
        assert!(propagate_mask(&mask, &wrong).is_err());
    }

    #[test]
    fn composite_only_touches_masked_pixels() {
        let mut a = RgbImage::new(4, 4);
        let mut b = RgbImage::new(4, 4);
        for y in 0..4 {
            for x in 0..4 {
                a.put(x, y, [1, 2, 3]);
                b.put(x, y, [9, 9, 9]);
            }
        }
        let mut m = Raster::new(4, 4);
        m.set(1, 2, true);
        let out = composite(&a, &b, &m).unwrap();
        assert_eq!(out.get(1, 2), [9, 9, 9]);
        assert_eq!(out.get(0, 0), [1, 2, 3]);
    }
}
