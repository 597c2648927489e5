mod common;

use common::*;
use home_core::geom::{Aabb, Vec3};
use home_core::render::{
    cast_ray, ray_cast, render, render_scene, shade_albedo, Camera, RayScene, SurfaceTag, BACKGROUND, DEPTH_MISS,
    SEG_BACKGROUND,
};
use home_core::scene::{generate_house, FineCategoryId, GeneratorParams, House, PointLight};

fn red_box_in_void(center: Vec3) -> House {
    let mut h = void(10.0);
    h.objects.push(box_object("b", "none", "side table", center, Vec3::splat(1.0), "plastic", [255, 0, 0]));
    h
}

#[test]
fn ray_hits_wall_three_meters_away() {
    let h = shoebox();
    let hit = ray_cast(&h, Vec3::new(1.0, 1.5, 1.25), Vec3::X).unwrap();
    // Plane x = 4 from x = 1.
    assert!((hit.t - 3.0).abs() < 1e-6);
    assert!(matches!(hit.tag, SurfaceTag::Structure { .. }));
    assert!((hit.normal.length() - 1.0).abs() < 1e-6);
    assert!(hit.normal.dot(Vec3::X) < 0.0, "normal faces the ray origin");
}

#[test]
fn ray_hits_unit_cube_face() {
    let h = red_box_in_void(Vec3::ZERO);
    let hit = ray_cast(&h, Vec3::new(0.0, 0.0, -5.0), Vec3::Z).unwrap();
    assert!((hit.t - 4.5).abs() < 1e-12);
    assert_eq!(hit.tag, SurfaceTag::Object(0));
    assert_eq!(hit.normal, Vec3::new(0.0, 0.0, -1.0));
}

#[test]
fn ray_through_door_gap_misses() {
    let mut room = rect_room("r0", [0.0, 0.0], [4.0, 3.0], 2.5);
    room.openings.push(door(0, 1.5, 1.0, 2.1));
    let h = house(vec![room], vec![], vec![], vec![]);
    assert!(ray_cast(&h, Vec3::new(2.0, 1.5, 1.0), -Vec3::Y).is_none());
    assert!(ray_cast(&h, Vec3::new(1.0, 1.5, 1.0), -Vec3::Y).is_some());
}

#[test]
fn camera_looking_out_of_a_doorway_sees_nothing() {
    let mut room = rect_room("r0", [0.0, 0.0], [4.0, 3.0], 2.5);
    room.openings.push(door(0, 1.5, 1.0, 2.1));
    let mut h = house(vec![room], vec![], vec![], vec![]);
    h.bounds = h.bounds.expanded(20.0);
    let cam = Camera::new(Vec3::new(2.0, -0.5, 1.0), -std::f64::consts::FRAC_PI_2, 0.0);
    let f = render(&h, &cam, true).unwrap();
    assert!(f.depth.iter().all(|&d| d == DEPTH_MISS));
    assert!(f.segmentation.iter().all(|&s| s == SEG_BACKGROUND));
    assert!(f.rgb.chunks(3).all(|c| c == BACKGROUND));
}

#[test]
fn centre_pixel_depth_of_box_two_meters_ahead() {
    let h = red_box_in_void(Vec3::new(2.5, 0.0, 0.0));
    let cam = Camera::new(Vec3::ZERO, 0.0, 0.0).with_size(33, 33);
    let f = render(&h, &cam, false).unwrap();
    let c = 16 * 33 + 16;
    assert!((f.depth[c] as f64 - 2.0).abs() < 1e-6);
    assert_eq!(f.segmentation[c], FineCategoryId::from_name("side table").unwrap().0);
    assert_eq!(&f.rgb[c * 3..c * 3 + 3], &[255, 0, 0]);
}

#[test]
fn light_along_the_normal() {
    // Face at x = 2.5; light 1 m in front of it on the normal.
    for (intensity, expected_red) in [(1.8, 255u8), (1.0, 153u8)] {
        let mut h = red_box_in_void(Vec3::new(3.0, 0.0, 0.0));
        h.lights.push(PointLight {
            position: Vec3::new(1.5, 0.0, 0.0),
            intensity,
        });
        let cam = Camera::new(Vec3::ZERO, 0.0, 0.0).with_size(33, 33);
        let f = render(&h, &cam, true).unwrap();
        let c = (16 * 33 + 16) * 3;
        // round(255 * (ambient + albedo * cos * I / (1 + d^2)))
        let want = (255.0 * (0.1 + intensity / 2.0_f64).min(1.0)).round() as u8;
        assert_eq!(want, expected_red);
        assert_eq!(f.rgb[c], expected_red);
        assert_eq!(f.rgb[c + 1], (255.0_f64 * 0.1).round() as u8);
    }
}

#[test]
fn shading_terms() {
    let h = red_box_in_void(Vec3::new(3.0, 0.0, 0.0));
    let scene = RayScene::from_house(&h);
    let hit = cast_ray(&scene, Vec3::ZERO, Vec3::X).unwrap();
    let p = hit.point;
    let albedo = [1.0, 0.5, 0.0];
    let light = |pos: Vec3| PointLight {
        position: pos,
        intensity: 1.0,
    };

    let grazing = shade_albedo(&scene, &hit, albedo, &[light(p + Vec3::Y)]);
    assert_eq!(grazing, [0.1; 3]);

    let (s, c) = 60f64.to_radians().sin_cos();
    let angled = shade_albedo(&scene, &hit, albedo, &[light(p + Vec3::new(-c, s, 0.0))]);
    for ch in 0..3 {
        // cos 60 = 0.5, d = 1: 0.5 * albedo / 2.
        assert!((angled[ch] - (0.1 + 0.25 * albedo[ch])).abs() < 1e-12);
    }

    // A light behind the box is shadowed by the box itself.
    let behind = shade_albedo(&scene, &hit, albedo, &[light(Vec3::new(5.0, 0.0, 0.0))]);
    assert_eq!(behind, [0.1; 3]);

    // An occluder between the surface and the light.
    let mut h2 = h.clone();
    h2.objects.push(box_object("o", "none", "side table", Vec3::new(1.5, 0.0, 0.0), Vec3::splat(0.2), "wood", [0, 0, 0]));
    let scene2 = RayScene::from_house(&h2);
    let hit2 = cast_ray(&scene2, Vec3::new(0.0, 0.3, 0.0), Vec3::X).unwrap();
    let blocked = shade_albedo(&scene2, &hit2, albedo, &[light(Vec3::new(1.0, 0.0, 0.0))]);
    assert_eq!(blocked, [0.1; 3]);
}

#[test]
fn moving_the_object_closer_reduces_depth() {
    let cam = Camera::new(Vec3::ZERO, 0.0, 0.0).with_size(5, 5);
    let mut last = f32::INFINITY;
    for x in [6.0, 4.0, 3.0, 2.0, 1.0] {
        let f = render(&red_box_in_void(Vec3::new(x, 0.0, 0.0)), &cam, false).unwrap();
        let d = f.depth[12];
        assert!(d < last);
        last = d;
    }
}

fn camera_in_first_room(h: &House) -> Camera {
    let c = h.rooms[0].centroid_xy();
    Camera::new(Vec3::new(c[0], c[1], 1.6), 0.4, -0.1)
}

#[test]
fn depth_plane_equals_ray_cast() {
    let h = generate_house(3, &GeneratorParams::default()).unwrap();
    let cam = camera_in_first_room(&h).with_size(24, 16);
    let scene = RayScene::from_house(&h);
    let f = render_scene(&h, &scene, &cam, true).unwrap();
    for y in 0..cam.height {
        for x in 0..cam.width {
            let i = (y * cam.width + x) as usize;
            match ray_cast(&h, cam.position, cam.ray_dir(x, y)) {
                Some(hit) => assert!((f.depth[i] as f64 - hit.t).abs() < 1e-6),
                None => assert_eq!(f.depth[i], DEPTH_MISS),
            }
        }
    }
}

#[test]
fn sentinels_agree_and_render_is_pure() {
    for seed in 0..5 {
        let h = generate_house(seed, &GeneratorParams::default()).unwrap();
        let cam = camera_in_first_room(&h);
        let a = render(&h, &cam, true).unwrap();
        let b = render(&h, &cam, true).unwrap();
        assert_eq!(a, b);
        for i in 0..a.pixel_count() {
            assert_eq!(a.depth[i] == DEPTH_MISS, a.segmentation[i] == SEG_BACKGROUND);
            assert!(a.depth[i] >= 0.0);
        }
    }
}

#[test]
fn output_independent_of_thread_count() {
    let h = generate_house(11, &GeneratorParams::default()).unwrap();
    let cam = camera_in_first_room(&h);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| render(&h, &cam, true).unwrap());
    let b = four.install(|| render(&h, &cam, true).unwrap());
    assert_eq!(a, b);
}

#[test]
fn empty_void_renders_background() {
    let h = House::void(Aabb::new(Vec3::splat(-1.0), Vec3::splat(1.0)));
    let f = render(&h, &Camera::new(Vec3::ZERO, 1.0, 0.2), true).unwrap();
    assert!(f.depth.iter().all(|&d| d == DEPTH_MISS));
    assert_eq!(f.rgb.len(), 64 * 64 * 3);
}
