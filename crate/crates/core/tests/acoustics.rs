mod common;

use common::*;
use home_core::acoustics::{
    band_attenuation, build_ir, render_frame, trace_paths, AcousticConfig, AcousticError, AcousticPath,
    ImpulseResponse, ListenerRig, SourceFeed, FILTER_DELAY,
};
use home_core::geom::Vec3;
use home_core::scene::{House, SignalSpec, BAND_COUNT};

const SHOEBOX: [f64; 3] = [4.0, 3.0, 2.5];

/// Lattice image sources of an empty box with a corner at the origin, reflection count <= order.
fn analytic_lengths(src: Vec3, lis: Vec3, order: i64) -> Vec<f64> {
    let coord = |x: f64, l: f64, n: i64| {
        if n % 2 == 0 {
            x + n as f64 * l
        } else {
            n as f64 * l + (l - x)
        }
    };
    let mut out = Vec::new();
    for nx in -order..=order {
        for ny in -order..=order {
            for nz in -order..=order {
                if nx.abs() + ny.abs() + nz.abs() > order {
                    continue;
                }
                let img = Vec3::new(
                    coord(src.x, SHOEBOX[0], nx),
                    coord(src.y, SHOEBOX[1], ny),
                    coord(src.z, SHOEBOX[2], nz),
                );
                out.push(img.distance(lis));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn lengths(paths: &[AcousticPath]) -> Vec<f64> {
    let mut v: Vec<f64> = paths.iter().map(|p| p.length).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn order(n: usize) -> AcousticConfig {
    AcousticConfig {
        max_order: n,
        ..AcousticConfig::default()
    }
}

fn assert_multiset_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

#[test]
fn free_field_has_only_the_direct_path() {
    let h = void(10.0);
    let (s, l) = (Vec3::new(1.0, 2.0, 0.5), Vec3::new(-1.0, 0.0, 0.0));
    let p = trace_paths(&h, s, l, &order(2)).unwrap();
    assert_eq!(p.len(), 1);
    assert!((p[0].length - s.distance(l)).abs() < 1e-12);
    assert!(p[0].reflection_sequence.is_empty());
    assert!((p[0].arrival_direction - (s - l).normalized()).length() < 1e-12);
}

#[test]
fn shoebox_matches_image_lattice() {
    let h = shoebox();
    let pairs = [
        (Vec3::new(1.1, 0.7, 1.3), Vec3::new(2.9, 2.2, 0.8)),
        (Vec3::new(3.5, 2.5, 2.0), Vec3::new(0.4, 0.3, 0.6)),
        (Vec3::new(2.0, 1.5, 1.25), Vec3::new(2.6, 1.1, 1.7)),
    ];
    for (s, l) in pairs {
        for n in 0..=2 {
            let got = lengths(&trace_paths(&h, s, l, &order(n)).unwrap());
            let want = analytic_lengths(s, l, n as i64);
            assert_eq!(got.len(), [1, 7, 25][n]);
            assert_multiset_close(&got, &want, 1e-9);
        }
    }
}

#[test]
fn reciprocity_in_shoebox() {
    let h = shoebox();
    let (s, l) = (Vec3::new(0.9, 2.1, 1.0), Vec3::new(3.2, 0.6, 1.9));
    let a = lengths(&trace_paths(&h, s, l, &order(2)).unwrap());
    let b = lengths(&trace_paths(&h, l, s, &order(2)).unwrap());
    assert_multiset_close(&a, &b, 1e-9);
}

#[test]
fn partition_blocks_direct_sound() {
    let wall = box_object("p", "r0", "side table", Vec3::new(2.0, 1.5, 1.25), Vec3::new(0.1, 3.0, 2.5), "brick", [9, 9, 9]);
    let h = house(vec![rect_room("r0", [0.0, 0.0], [4.0, 3.0], 2.5)], vec![wall], vec![], vec![]);
    let (s, l) = (Vec3::new(1.0, 1.5, 1.2), Vec3::new(3.0, 1.5, 1.2));
    assert!(trace_paths(&h, s, l, &order(0)).unwrap().is_empty());
    // Every reflection path crosses the partition plane too.
    assert!(trace_paths(&h, s, l, &order(2)).unwrap().is_empty());
}

fn direct(length: f64) -> AcousticPath {
    AcousticPath {
        reflection_sequence: vec![],
        reflection_materials: vec![],
        points: vec![],
        length,
        band_gain: [0.0; BAND_COUNT],
        arrival_direction: Vec3::X,
    }
}

#[test]
fn band_attenuation_examples() {
    let h = House::void(home_core::geom::Aabb::new(Vec3::ZERO, Vec3::ZERO));
    let cfg = AcousticConfig::default().without_air();
    assert_eq!(band_attenuation(&direct(1.0), &h.materials, &cfg), [1.0; 4]);
    assert_eq!(band_attenuation(&direct(2.0), &h.materials, &cfg), [0.5; 4]);

    let mut materials = h.materials.clone();
    let m = mat("glass");
    materials.get_mut(m).unwrap().absorption = [0.2, 1.0, 0.5, 0.0];
    let mut p = direct(2.0);
    p.reflection_materials = vec![m];
    let g = band_attenuation(&p, &materials, &cfg);
    assert_eq!(g[1], 0.0);
    assert!((g[0] - 0.5 * 0.8f64.sqrt()).abs() < 1e-15);
    assert!((g[3] - 0.5).abs() < 1e-15);

    let air = AcousticConfig::default();
    let g = band_attenuation(&direct(10.0), &h.materials, &air);
    for b in 0..BAND_COUNT {
        assert!((g[b] - 0.1 * (-air.air_absorption[b] * 10.0).exp()).abs() < 1e-15);
    }
    assert!(g[3] < g[0]);
}

#[test]
fn raising_absorption_never_adds_energy() {
    let base = shoebox();
    let (s, l) = (Vec3::new(1.1, 0.7, 1.3), Vec3::new(2.9, 2.2, 0.8));
    let energy = |h: &House| {
        let p = trace_paths(h, s, l, &order(2)).unwrap();
        let mut e = [0.0; BAND_COUNT];
        for path in &p {
            for b in 0..BAND_COUNT {
                e[b] += path.band_gain[b].powi(2);
            }
        }
        e
    };
    let e0 = energy(&base);
    for material in ["plaster", "wood"] {
        for band in 0..BAND_COUNT {
            let mut h = base.clone();
            let m = h.materials.id(material).unwrap();
            let a = &mut h.materials.get_mut(m).unwrap().absorption[band];
            *a = (*a + 0.3).min(1.0);
            let e1 = energy(&h);
            assert!(e1[band] <= e0[band]);
        }
    }
}

#[test]
fn ir_energy_grows_with_order() {
    let h = shoebox();
    let (s, l) = (Vec3::new(1.1, 0.7, 1.3), Vec3::new(2.9, 2.2, 0.8));
    let rig = ListenerRig::new(l, 0.3);
    let mut last = 0.0;
    for n in 0..=3 {
        let cfg = order(n);
        let ir = build_ir(&trace_paths(&h, s, l, &cfg).unwrap(), &rig, &cfg).unwrap();
        let e = ir.energy();
        assert!(e > last, "order {n}");
        last = e;
    }
}

#[test]
fn source_on_a_wall_is_degenerate() {
    let h = shoebox();
    let r = trace_paths(&h, Vec3::new(0.0, 1.0, 1.0), Vec3::new(2.0, 1.0, 1.0), &order(1));
    assert!(matches!(r, Err(AcousticError::DegenerateGeometry(_))));
    let r = trace_paths(&h, Vec3::new(2.0, 1.0, 1.0), Vec3::new(2.0, 1.0, 1.0), &order(1));
    assert!(matches!(r, Err(AcousticError::DegenerateGeometry(_))));
}

fn ear_peaks(ir: &ImpulseResponse) -> [(usize, f64); 2] {
    [&ir.left, &ir.right].map(|ch| {
        ch.iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, &v)| if v.abs() > best.1 { (i, v.abs()) } else { best })
    })
}

#[test]
fn straight_ahead_is_symmetric() {
    let h = void(10.0);
    let cfg = AcousticConfig::default();
    let rig = ListenerRig::new(Vec3::ZERO, 0.7);
    let s = Vec3::new(0.7f64.cos(), 0.7f64.sin(), 0.0) * 3.0;
    let ir = build_ir(&trace_paths(&h, s, Vec3::ZERO, &cfg).unwrap(), &rig, &cfg).unwrap();
    assert_eq!(ir.left.len(), ir.right.len());
    for (a, b) in ir.left.iter().zip(&ir.right) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn source_on_the_left_reaches_left_ear_first_and_louder() {
    let h = void(10.0);
    let cfg = AcousticConfig::default();
    let rig = ListenerRig::new(Vec3::ZERO, 0.0);
    let s = rig.left_axis() * 2.0;
    let ir = build_ir(&trace_paths(&h, s, Vec3::ZERO, &cfg).unwrap(), &rig, &cfg).unwrap();
    let [(li, lv), (ri, rv)] = ear_peaks(&ir);
    // Ears at ±0.09 m: path lengths 1.91 m and 2.09 m, pan 1 and 0.
    let sr = cfg.sample_rate as f64;
    assert_eq!(li, (1.91 / 343.0 * sr).floor() as usize + FILTER_DELAY + usize::from((1.91 / 343.0 * sr).fract() > 0.5));
    assert!(li < ri || rv == 0.0);
    assert!(lv > rv);
    assert_eq!(rv, 0.0);
}

#[test]
fn no_paths_gives_silent_ir() {
    let cfg = AcousticConfig::default();
    match build_ir(&[], &ListenerRig::new(Vec3::ZERO, 0.0), &cfg) {
        Err(AcousticError::EmptyPaths { silent }) => {
            assert_eq!(silent.left, vec![0.0]);
            assert_eq!(silent.right, vec![0.0]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn silent_sources_give_zero_frames() {
    let ir = ImpulseResponse {
        left: vec![0.5, 0.25],
        right: vec![0.1, 0.0],
        sample_rate: 16000,
    };
    let sig = SignalSpec::Sine { frequency: 440.0 };
    let f = render_frame(&[SourceFeed { signal: &sig, gain: 0.0, ir: &ir }], 64, 100).unwrap();
    assert!(f.left.iter().chain(&f.right).all(|&v| v == 0.0));
    let f = render_frame(&[], 64, 0).unwrap();
    assert_eq!(f.left.len(), 64);
}

#[test]
fn impulse_reproduces_ir_prefix() {
    let h = shoebox();
    let cfg = order(1);
    let l = Vec3::new(2.9, 2.2, 0.8);
    let ir = build_ir(&trace_paths(&h, Vec3::new(1.1, 0.7, 1.3), l, &cfg).unwrap(), &ListenerRig::new(l, 1.0), &cfg).unwrap();
    let n = 200;
    let f = render_frame(&[SourceFeed { signal: &SignalSpec::Impulse, gain: 1.0, ir: &ir }], n, 0).unwrap();
    for k in 0..n {
        assert_eq!(f.left[k], ir.left[k] as f32);
        assert_eq!(f.right[k], ir.right[k] as f32);
    }
}

#[test]
fn frames_concatenate_seamlessly() {
    let ir = ImpulseResponse {
        left: vec![0.5, 0.0, 0.25, -0.1],
        right: vec![0.0, 1.0, 0.0, 0.0],
        sample_rate: 16000,
    };
    let sig = SignalSpec::Noise { seed: 9 };
    let feed = [SourceFeed { signal: &sig, gain: 0.8, ir: &ir }];
    let whole = render_frame(&feed, 100, 0).unwrap();
    let a = render_frame(&feed, 40, 0).unwrap();
    let b = render_frame(&feed, 60, 40).unwrap();
    assert_eq!([a.left, b.left].concat(), whole.left);
    assert_eq!([a.right, b.right].concat(), whole.right);
}

#[test]
fn rate_mismatch_is_reported() {
    let a = ImpulseResponse::silent(16000);
    let b = ImpulseResponse::silent(22050);
    let sig = SignalSpec::Impulse;
    let r = render_frame(
        &[SourceFeed { signal: &sig, gain: 1.0, ir: &a }, SourceFeed { signal: &sig, gain: 1.0, ir: &b }],
        8,
        0,
    );
    assert!(matches!(r, Err(AcousticError::RateMismatch { expected: 16000, found: 22050 })));
}

fn tone_rms(distance: f64) -> f64 {
    let h = void(10.0);
    let cfg = AcousticConfig::default();
    let rig = ListenerRig::new(Vec3::ZERO, 0.0);
    let paths = trace_paths(&h, Vec3::new(distance, 0.0, 0.0), Vec3::ZERO, &cfg).unwrap();
    let ir = build_ir(&paths, &rig, &cfg).unwrap();
    let sig = SignalSpec::Sine { frequency: 500.0 };
    let f = render_frame(&[SourceFeed { signal: &sig, gain: 1.0, ir: &ir }], 1600, 16000).unwrap();
    let (l, r) = f.rms();
    ((l * l + r * r) / 2.0).sqrt()
}

#[test]
fn tone_follows_inverse_distance() {
    let ratio = tone_rms(1.0) / tone_rms(2.0);
    assert!((ratio - 2.0).abs() < 0.02, "ratio {ratio}");
}

#[test]
fn tracing_is_deterministic() {
    let h = home_core::scene::generate_house(4, &Default::default()).unwrap();
    let c = h.rooms[0].centroid_xy();
    let l = Vec3::new(c[0] + 0.3, c[1] - 0.2, 1.6);
    let s = h.sound_sources[0].position;
    let cfg = order(2);
    match (trace_paths(&h, s, l, &cfg), trace_paths(&h, s, l, &cfg)) {
        (Ok(a), Ok(b)) => {
            assert_eq!(a, b);
            let rig = ListenerRig::new(l, 0.2);
            assert_eq!(build_ir(&a, &rig, &cfg), build_ir(&b, &rig, &cfg));
        }
        (a, b) => assert_eq!(a, b),
    }
}
