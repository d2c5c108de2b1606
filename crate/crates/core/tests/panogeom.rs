use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use obstrnav::navgraph::NavGraph;
use obstrnav::panogeom::{
    endpoint_masks, locate_neighbor, make_trapezoid_mask, pixel_coords, view_homography,
    warp_raster, AnalyticMatcher, CameraIntrinsics, MaskShape, PixelCoord, Raster, ViewIndex,
};
use obstrnav::toy::toy_pair;
use obstrnav::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn camera() -> CameraIntrinsics {
    CameraIntrinsics::from_degrees(640, 480, 60.0).unwrap()
}

/// Pixel of a world direction seen from `view`, by rotating into the camera
/// frame and dividing by depth.
fn ray_oracle(view: ViewIndex, dir: Vector3<f64>, k: &CameraIntrinsics) -> Option<PixelCoord> {
    let c = view.rotation().transpose() * dir;
    let f = 240.0 / (30f64.to_radians()).tan();
    (c.z > 0.0).then(|| {
        PixelCoord::new(
            f64::from(k.width()) / 2.0 + f * c.x / c.z,
            240.0 + f * c.y / c.z,
        )
    })
}

fn pixel_ray(view: ViewIndex, p: PixelCoord) -> Vector3<f64> {
    let f = 240.0 / (30f64.to_radians()).tan();
    view.rotation() * Vector3::new((p.x - 320.0) / f, (p.y - 240.0) / f, 1.0)
}

#[test]
fn pixel_coords_match_trig_oracle() {
    let k = camera();
    let f = 240.0 * (30f64.to_radians()).cos() / (30f64.to_radians()).sin();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let theta = rng.gen_range(-1.3..1.3);
        let phi = rng.gen_range(-1.3..1.3);
        let p = pixel_coords(theta, phi, &k).unwrap();
        let (sx, cx) = f64::sin_cos(theta);
        let (sy, cy) = f64::sin_cos(phi);
        worst = worst
            .max((p.x - (320.0 + f * sx / cx)).abs())
            .max((p.y - (240.0 + f * sy / cy)).abs());
    }
    assert!(worst < 1e-6, "worst {worst}");
}

#[test]
fn optical_axis_hits_the_center_exactly() {
    for (w, h) in [(640, 480), (641, 479), (1, 1)] {
        let k = CameraIntrinsics::from_degrees(w, h, 75.0).unwrap();
        let p = pixel_coords(0.0, 0.0, &k).unwrap();
        assert_eq!((p.x, p.y), (f64::from(w) / 2.0, f64::from(h) / 2.0));
    }
}

#[test]
fn angles_at_or_past_ninety_degrees_overflow() {
    let k = camera();
    for a in [FRAC_PI_2, -FRAC_PI_2, 2.0, f64::NAN] {
        assert!(matches!(
            pixel_coords(a, 0.0, &k),
            Err(Error::ProjectionOverflow(_))
        ));
        assert!(matches!(
            pixel_coords(0.0, a, &k),
            Err(Error::ProjectionOverflow(_))
        ));
    }
}

#[test]
fn level_neighbors_project_like_a_pinhole() {
    let k = camera();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..2_000 {
        let b = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), 0.0];
        if b[0] * b[0] + b[1] * b[1] < 0.01 {
            continue;
        }
        let (view, p) = locate_neighbor(&[0.0, 0.0, 0.0], &b, &k).unwrap();
        assert_eq!(view.elevation_index(), 0);
        let q = ray_oracle(view, Vector3::new(b[0], b[1], b[2]), &k).unwrap();
        assert!(
            (p.x - q.x).abs() < 1e-6 && (p.y - q.y).abs() < 1e-6,
            "{p:?} vs {q:?}"
        );
    }
}

#[test]
fn homography_maps_pixels_along_shared_rays() {
    let k = camera();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5_000 {
        let v = ViewIndex::new(rng.gen_range(0..36)).unwrap();
        let ns = v.neighbors();
        let n = ns[rng.gen_range(0..ns.len())];
        let p = PixelCoord::new(rng.gen_range(0.0..640.0), rng.gen_range(0.0..480.0));
        let h = view_homography(v, n, &k).unwrap();
        let Some(q) = h.apply(p) else { continue };
        let expected = ray_oracle(n, pixel_ray(v, p), &k).unwrap();
        assert!(
            (q.x - expected.x).abs() < 1e-6 * (1.0 + q.x.abs())
                && (q.y - expected.y).abs() < 1e-6 * (1.0 + q.y.abs())
        );
        let back = h.inverse().apply(q).unwrap();
        assert!((back.x - p.x).abs() < 0.5 && (back.y - p.y).abs() < 0.5);
    }
}

#[test]
fn two_node_scan_yields_nine_masks_per_endpoint() {
    let g = toy_pair();
    let dir = tempfile::tempdir().unwrap();
    for (a, b) in [(0, 1), (1, 0)] {
        let m = endpoint_masks(
            g.position(a),
            g.position(b),
            &camera(),
            &MaskShape::default(),
            &AnalyticMatcher,
        )
        .unwrap();
        assert_eq!(m.propagated.len(), 8);
        m.write(&dir.path().join(g.id(a))).unwrap();
    }
    let pngs = walk(dir.path())
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .count();
    assert_eq!(pngs, 18);
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn coincident_nodes_are_degenerate() {
    let g = NavGraph::new(
        "dup",
        vec![
            ("a".to_string(), [1.0, 1.0, 0.0]),
            ("b".to_string(), [1.0, 1.0, 0.0]),
        ],
        &[("a", "b")],
    )
    .unwrap();
    let r = endpoint_masks(
        g.position(0),
        g.position(1),
        &camera(),
        &MaskShape::default(),
        &AnalyticMatcher,
    );
    assert!(matches!(r, Err(Error::DegenerateGeometry(_))));
}

proptest! {
    /// The trapezoid stays inside the frame, rests on the bottom center and
    /// reaches up to the target pixel.
    #[test]
    fn trapezoid_is_clipped_and_reaches_the_target(x in 48.0f64..592.0, y in 0.0f64..470.0) {
        let k = camera();
        let (bw, tw) = MaskShape::default().widths(&k);
        let m = make_trapezoid_mask(ViewIndex::new(12).unwrap(), PixelCoord::new(x, y), &k, bw, tw).unwrap();
        for v in m.vertices {
            prop_assert!((0.0..=640.0).contains(&v.x) && (0.0..=480.0).contains(&v.y));
        }
        prop_assert!(m.raster.get(320, 479));
        let top_row = (y - 0.5).ceil() as u32;
        prop_assert!(m.raster.get(x.floor() as u32, top_row));
        prop_assert!(top_row == 0 || !m.raster.get(x.floor() as u32, top_row - 1));
    }

    /// Warping a raster to a neighbor and back keeps interior pixels.
    #[test]
    fn warp_round_trip_keeps_interior(view in 0usize..36, pick in 0usize..8, cx in 50u32..110, cy in 40u32..80) {
        let k = CameraIntrinsics::from_degrees(160, 120, 60.0).unwrap();
        let v = ViewIndex::new(view).unwrap();
        let ns = v.neighbors();
        let n = ns[pick % ns.len()];
        let mut r = Raster::new(160, 120);
        for y in cy - 10..cy + 10 {
            for x in cx - 10..cx + 10 {
                r.set(x, y, true);
            }
        }
        let h = view_homography(v, n, &k).unwrap();
        let back = warp_raster(&warp_raster(&r, &h), &h.inverse());
        for y in cy - 8..cy + 8 {
            for x in cx - 8..cx + 8 {
                let fwd = h.apply(PixelCoord::new(f64::from(x) + 0.5, f64::from(y) + 0.5));
                let visible = fwd.is_some_and(|q| q.x >= 1.0 && q.y >= 1.0 && q.x < 159.0 && q.y < 119.0);
                if visible {
                    prop_assert!(back.get(x, y), "lost ({x},{y})");
                }
            }
        }
    }
}
