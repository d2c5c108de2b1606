use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navgraph::Point3;

/// Pinhole intrinsics shared by all 36 views.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    width: u32,
    height: u32,
    vfov: f64,
    focal: f64,
}

impl CameraIntrinsics {
    pub fn new(width: u32, height: u32, vfov: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(
                "image dimensions must be positive".into(),
            ));
        }
        if !(vfov > 0.0 && vfov < PI) {
            return Err(Error::InvalidArgument(format!(
                "vertical FoV {vfov} rad outside (0, pi)"
            )));
        }
        let focal = f64::from(height) / (2.0 * (vfov / 2.0).tan());
        Ok(Self {
            width,
            height,
            vfov,
            focal,
        })
    }

    pub fn from_degrees(width: u32, height: u32, vfov_deg: f64) -> Result<Self> {
        Self::new(width, height, vfov_deg.to_radians())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn vfov(&self) -> f64 {
        self.vfov
    }

    pub fn focal(&self) -> f64 {
        self.focal
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (f64::from(self.width) / 2.0, f64::from(self.height) / 2.0)
    }

    /// Intrinsic matrix mapping camera rays (x right, y down, z forward) to
    /// pixel coordinates.
    pub fn matrix(&self) -> Matrix3<f64> {
        let (cx, cy) = self.principal_point();
        Matrix3::new(self.focal, 0.0, cx, 0.0, self.focal, cy, 0.0, 0.0, 1.0)
    }
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self::from_degrees(640, 480, 60.0).expect("default intrinsics are valid")
    }
}

pub const HEADING_COUNT: usize = 12;
pub const ELEVATION_COUNT: usize = 3;
pub const VIEW_COUNT: usize = HEADING_COUNT * ELEVATION_COUNT;
/// Angular spacing of the view grid, in degrees.
pub const VIEW_STEP_DEG: f64 = 30.0;

/// One of the 36 panorama views.
///
/// Index layout: `row * 12 + heading_index`, rows ordered by elevation
/// -30°, 0°, +30°. Headings step clockwise (seen from above) by 30°.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ViewIndex(usize);

impl ViewIndex {
    pub fn new(index: usize) -> Result<Self> {
        if index < VIEW_COUNT {
            Ok(Self(index))
        } else {
            Err(Error::InvalidArgument(format!(
                "view index {index} outside 0..{VIEW_COUNT}"
            )))
        }
    }

    /// `elevation_index` is -1, 0 or +1.
    pub fn from_parts(heading_index: usize, elevation_index: i32) -> Result<Self> {
        if !(-1..=1).contains(&elevation_index) {
            return Err(Error::InvalidArgument(format!(
                "elevation index {elevation_index}"
            )));
        }
        let row = (elevation_index + 1) as usize;
        Ok(Self(row * HEADING_COUNT + heading_index % HEADING_COUNT))
    }

    pub fn index(&self) -> usize {
        self.0
    }

    pub fn heading_index(&self) -> usize {
        self.0 % HEADING_COUNT
    }

    pub fn elevation_index(&self) -> i32 {
        (self.0 / HEADING_COUNT) as i32 - 1
    }

    pub fn heading(&self) -> f64 {
        (self.heading_index() as f64 * VIEW_STEP_DEG).to_radians()
    }

    pub fn elevation(&self) -> f64 {
        (f64::from(self.elevation_index()) * VIEW_STEP_DEG).to_radians()
    }

    pub fn all() -> impl Iterator<Item = ViewIndex> {
        (0..VIEW_COUNT).map(ViewIndex)
    }

    /// Views one grid step away in heading and/or elevation: 8 for the
    /// horizon row, 5 for the top and bottom rows.
    pub fn neighbors(&self) -> Vec<ViewIndex> {
        let h = self.heading_index() as i32;
        let e = self.elevation_index();
        let mut out = Vec::with_capacity(8);
        for de in -1..=1 {
            for dh in -1..=1 {
                if (dh, de) == (0, 0) || !(-1..=1).contains(&(e + de)) {
                    continue;
                }
                let heading = (h + dh).rem_euclid(HEADING_COUNT as i32) as usize;
                out.push(ViewIndex::from_parts(heading, e + de).expect("in range"));
            }
        }
        out.sort();
        out
    }

    pub fn is_adjacent(&self, other: ViewIndex) -> bool {
        self.neighbors().contains(&other)
    }

    /// Rotation taking camera coordinates (x right, y down, z forward) to
    /// world coordinates (z up, heading 0 along +y, heading increasing
    /// toward +x).
    pub fn rotation(&self) -> Matrix3<f64> {
        camera_to_world(self.heading(), self.elevation())
    }
}

pub(crate) fn camera_to_world(heading: f64, elevation: f64) -> Matrix3<f64> {
    let (sh, ch) = heading.sin_cos();
    let (se, ce) = elevation.sin_cos();
    let right = [ch, -sh, 0.0];
    let down = [sh * se, ch * se, -ce];
    let forward = [sh * ce, ch * ce, se];
    Matrix3::new(
        right[0], down[0], forward[0], //
        right[1], down[1], forward[1], //
        right[2], down[2], forward[2],
    )
}

/// Unit vector for a heading/elevation pair (heading 0, elevation 0 is +y).
pub fn unit_direction(heading: f64, elevation: f64) -> Point3 {
    let (sh, ch) = heading.sin_cos();
    let (se, ce) = elevation.sin_cos();
    [sh * ce, ch * ce, se]
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Heading and elevation of `b` as seen from `a`.
pub fn absolute_direction(pos_a: &Point3, pos_b: &Point3) -> Result<(f64, f64)> {
    let d = [
        pos_b[0] - pos_a[0],
        pos_b[1] - pos_a[1],
        pos_b[2] - pos_a[2],
    ];
    let horizontal = d[0].hypot(d[1]);
    if horizontal == 0.0 && d[2] == 0.0 {
        return Err(Error::DegenerateGeometry(
            "coincident node positions".into(),
        ));
    }
    Ok((d[0].atan2(d[1]), d[2].atan2(horizontal)))
}

/// Direction of a neighbor relative to the view that best contains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeDirection {
    /// Heading offset from the view center, positive to the right.
    pub theta: f64,
    /// Elevation offset from the view center, positive upward.
    pub phi: f64,
    pub view: ViewIndex,
}

// Nearest grid index for `value` in units of one step; exact half-way
// values go to the lower index.
fn nearest_step(value_deg: f64) -> i64 {
    let steps = value_deg / VIEW_STEP_DEG;
    let lower = steps.floor();
    if steps - lower <= 0.5 + 1e-9 {
        lower as i64
    } else {
        lower as i64 + 1
    }
}

/// Pick the grid view whose center is closest to the direction of `b` from
/// `a` and return the residual angles.
///
/// Elevations steeper than ±45° leave a residual above 15° because the grid
/// stops at ±30°.
pub fn relative_direction(pos_a: &Point3, pos_b: &Point3) -> Result<RelativeDirection> {
    let (heading, elevation) = absolute_direction(pos_a, pos_b)?;
    let heading_index =
        nearest_step(heading.to_degrees()).rem_euclid(HEADING_COUNT as i64) as usize;
    let elevation_index = nearest_step(elevation.to_degrees()).clamp(-1, 1) as i32;
    let view = ViewIndex::from_parts(heading_index, elevation_index)?;
    Ok(RelativeDirection {
        theta: wrap_angle(heading - view.heading()),
        phi: elevation - view.elevation(),
        view,
    })
}

/// Continuous pixel position; pixel `(i, j)` covers `[i, i+1) x [j, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelCoord {
    pub x: f64,
    pub y: f64,
}

impl PixelCoord {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Pixel position of a direction offset `(theta, phi)` from the optical axis.
///
/// `x = tan(theta) f + W/2`, `y = tan(phi) f + H/2`. Image y grows
/// downward, so a positive `phi` lands **below** the image center. Angles
/// from [`relative_direction`] are positive upward and must be negated
/// before they are passed here (see [`locate_neighbor`]).
pub fn pixel_coords(theta: f64, phi: f64, intrinsics: &CameraIntrinsics) -> Result<PixelCoord> {
    for a in [theta, phi] {
        if a.is_nan() || a.abs() >= FRAC_PI_2 {
            return Err(Error::ProjectionOverflow(a));
        }
    }
    let f = intrinsics.focal();
    let (cx, cy) = intrinsics.principal_point();
    Ok(PixelCoord::new(theta.tan() * f + cx, phi.tan() * f + cy))
}

/// Inverse of [`pixel_coords`].
pub fn pixel_to_direction(p: PixelCoord, intrinsics: &CameraIntrinsics) -> (f64, f64) {
    let f = intrinsics.focal();
    let (cx, cy) = intrinsics.principal_point();
    (((p.x - cx) / f).atan(), ((p.y - cy) / f).atan())
}

/// View containing `b` in the panorama at `a` and the pixel it projects to.
pub fn locate_neighbor(
    pos_a: &Point3,
    pos_b: &Point3,
    intrinsics: &CameraIntrinsics,
) -> Result<(ViewIndex, PixelCoord)> {
    let rel = relative_direction(pos_a, pos_b)?;
    let pixel = pixel_coords(rel.theta, -rel.phi, intrinsics)?;
    Ok((rel.view, pixel))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    #[test]
    fn focal_from_vfov() {
        let k = CameraIntrinsics::from_degrees(640, 480, 60.0).unwrap();
        assert!((k.focal() - 240.0 / (30f64).to_radians().tan()).abs() < 1e-12);
        assert!((k.focal() - 415.692_193_816_530_5).abs() < 1e-9);
        assert!(CameraIntrinsics::from_degrees(0, 480, 60.0).is_err());
        assert!(CameraIntrinsics::from_degrees(640, 480, 180.0).is_err());
    }

    #[test]
    fn straight_ahead_is_view_zero_of_the_horizon_row() {
        let r = relative_direction(&[0.0; 3], &[0.0, 2.0, 0.0]).unwrap();
        assert_eq!(r.view, ViewIndex::from_parts(0, 0).unwrap());
        assert_eq!(r.view.index(), 12);
        assert_eq!((r.theta, r.phi), (0.0, 0.0));
    }

    #[test]
    fn half_way_heading_takes_the_lower_view() {
        let r = relative_direction(&[0.0; 3], &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(r.view.heading_index(), 1);
        assert!((r.theta.to_degrees() - 15.0).abs() < EPS);
    }

    #[test]
    fn steep_downward_neighbor() {
        let r = relative_direction(&[0.0; 3], &[0.0, 3.0, -3.0]).unwrap();
        assert_eq!(r.view.elevation_index(), -1);
        assert!((r.phi.to_degrees() + 15.0).abs() < EPS);
        assert!(r.theta.abs() < EPS);
    }

    #[test]
    fn headings_wrap_around_north() {
        // Heading -10 degrees sits in view 0 with a negative residual.
        let dir = unit_direction((-10f64).to_radians(), 0.0);
        let r = relative_direction(&[0.0; 3], &dir).unwrap();
        assert_eq!(r.view.heading_index(), 0);
        assert!((r.theta.to_degrees() + 10.0).abs() < 1e-9);
        let dir = unit_direction(350f64.to_radians() - 20f64.to_radians(), 0.0);
        let r = relative_direction(&[0.0; 3], &dir).unwrap();
        assert_eq!(r.view.heading_index(), 11);
    }

    #[test]
    fn coincident_positions_are_degenerate() {
        assert!(matches!(
            relative_direction(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn optical_axis_maps_to_center() {
        let k = CameraIntrinsics::from_degrees(333, 217, 47.0).unwrap();
        assert_eq!(
            pixel_coords(0.0, 0.0, &k).unwrap(),
            PixelCoord::new(166.5, 108.5)
        );
    }

    #[test]
    fn overflow_beyond_ninety_degrees() {
        let k = CameraIntrinsics::default();
        assert!(matches!(
            pixel_coords(FRAC_PI_2, 0.0, &k),
            Err(Error::ProjectionOverflow(_))
        ));
        assert!(matches!(
            pixel_coords(0.0, -2.0, &k),
            Err(Error::ProjectionOverflow(_))
        ));
    }

    #[test]
    fn neighbor_counts() {
        for v in ViewIndex::all() {
            let n = v.neighbors();
            let expected = if v.elevation_index() == 0 { 8 } else { 5 };
            assert_eq!(n.len(), expected, "view {v:?}");
            assert!(!n.contains(&v));
            for u in n {
                assert!(u.is_adjacent(v));
            }
        }
    }

    #[test]
    fn rotation_forward_axis_matches_unit_direction() {
        for v in ViewIndex::all() {
            let r = v.rotation();
            let f = unit_direction(v.heading(), v.elevation());
            for i in 0..3 {
                assert!((r[(i, 2)] - f[i]).abs() < 1e-12);
            }
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }
}
