//! Panorama geometry for placing obstructions.
//!
//! Each node's panorama is a grid of 36 pinhole views (12 headings x 3
//! elevations, 30° apart) sharing one camera center. A neighbor node is
//! located in the grid, projected to a pixel, covered by a trapezoid mask,
//! and the mask is carried into adjacent views with the rotation homography
//! between them.

mod camera;
mod homography;
mod image;
mod mask;

use std::path::Path;

pub use camera::{
    absolute_direction, locate_neighbor, pixel_coords, pixel_to_direction, relative_direction,
    unit_direction, wrap_angle, CameraIntrinsics, PixelCoord, RelativeDirection, ViewIndex,
    ELEVATION_COUNT, HEADING_COUNT, VIEW_COUNT, VIEW_STEP_DEG,
};
pub use homography::{
    composite, propagate_mask, propagate_patch, view_homography, warp_image, warp_raster,
    AnalyticMatcher, Projection, ViewMatcher,
};
pub use image::{write_mask, MaskSidecar, RgbImage};
pub use mask::{make_trapezoid_mask, rasterize_polygon, MaskShape, Raster, TrapezoidMask};

use crate::error::Result;
use crate::navgraph::Point3;

/// A mask propagated into one adjacent view.
#[derive(Debug, Clone)]
pub struct PropagatedMask {
    pub projection: Projection,
    pub raster: Raster,
}

/// Masks at one edge endpoint: the view facing the other endpoint plus its
/// grid neighbors.
#[derive(Debug, Clone)]
pub struct EndpointMasks {
    pub mask: TrapezoidMask,
    pub propagated: Vec<PropagatedMask>,
}

impl EndpointMasks {
    pub fn sidecar(&self) -> MaskSidecar {
        MaskSidecar {
            view_index: self.mask.view,
            source_view: None,
            vertices: self
                .mask
                .vertices
                .iter()
                .map(|&v| Some([v.x, v.y]))
                .collect(),
            target: Some([self.mask.target.x, self.mask.target.y]),
        }
    }

    pub fn propagated_sidecar(&self, p: &PropagatedMask) -> MaskSidecar {
        MaskSidecar {
            view_index: p.projection.target,
            source_view: Some(p.projection.source),
            vertices: self
                .mask
                .vertices
                .iter()
                .map(|&v| MaskSidecar::point(p.projection.apply(v)))
                .collect(),
            target: MaskSidecar::point(p.projection.apply(self.mask.target)),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_mask(
            dir,
            &format!("view_{:02}", self.mask.view.index()),
            &self.mask.raster,
            &self.sidecar(),
        )?;
        for p in &self.propagated {
            let stem = format!("view_{:02}", p.projection.target.index());
            write_mask(dir, &stem, &p.raster, &self.propagated_sidecar(p))?;
        }
        Ok(())
    }
}

/// Build the obstruction mask at `pos_a` for the edge toward `pos_b`, and
/// propagate it to every adjacent view using `matcher`.
pub fn endpoint_masks(
    pos_a: &Point3,
    pos_b: &Point3,
    intrinsics: &CameraIntrinsics,
    shape: &MaskShape,
    matcher: &dyn ViewMatcher,
) -> Result<EndpointMasks> {
    let (view, target) = locate_neighbor(pos_a, pos_b, intrinsics)?;
    let (bottom, top) = shape.widths(intrinsics);
    let mask = make_trapezoid_mask(view, target, intrinsics, bottom, top)?;
    let propagated = view
        .neighbors()
        .into_iter()
        .map(|n| {
            let projection = matcher.match_views(view, n, intrinsics)?;
            let raster = propagate_mask(&mask, &projection)?;
            Ok(PropagatedMask { projection, raster })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EndpointMasks { mask, propagated })
}
