mod common;

use common::*;
use home_core::geom::{Transform, Vec3};
use home_core::render::{render, Camera, SEG_BACKGROUND};
use home_core::scene::{
    fine_categories, generate_house, surface_area_by_layer, FineCategoryId, GeneratorParams, MaterialLayer,
    MaterialTable, Texture, TriMesh, FINE_CATEGORY_COUNT, MATERIAL_COUNT,
};
use home_core::semantics::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn shipped_counts() {
    assert_eq!(ColorPalette::shipped(Granularity::Basic).len(), 16);
    assert_eq!(MaterialTable::shipped().len(), MATERIAL_COUNT);
    assert_eq!(MATERIAL_COUNT, 20);
    assert_eq!(fine_categories().len(), FINE_CATEGORY_COUNT);
    assert_eq!(FINE_CATEGORY_COUNT, 187);
    for g in Granularity::ALL {
        let p = ColorPalette::shipped(g);
        let mut names: Vec<&str> = p.entries.iter().map(|e| e.0.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), p.len(), "{g:?} names unique");
    }
}

#[test]
fn every_palette_entry_is_a_fixed_point() {
    for g in Granularity::ALL {
        let p = ColorPalette::shipped(g);
        for (name, rgb) in &p.entries {
            assert_eq!(quantize_color(*rgb, p), name, "{g:?}");
        }
    }
}

proptest! {
    #[test]
    fn quantize_is_nearest_with_low_index_ties(rgb in any::<[u8; 3]>(), g in 0usize..3) {
        let p = ColorPalette::shipped(Granularity::ALL[g]);
        let d = |c: [u8; 3]| -> i64 { (0..3).map(|k| (rgb[k] as i64 - c[k] as i64).pow(2)).sum() };
        let best = p.entries.iter().map(|e| d(e.1)).min().unwrap();
        let first = p.entries.iter().position(|e| d(e.1) == best).unwrap();
        prop_assert_eq!(quantize_color(rgb, p), p.entries[first].0.as_str());
    }
}

fn layered(mesh: TriMesh, layers: &[(&str, [u8; 3])]) -> home_core::scene::SceneObject {
    let mut o = box_object("o", "r0", "coffee table", Vec3::new(1.0, 1.0, 0.5), Vec3::splat(1.0), "wood", [0, 0, 0]);
    o.mesh = mesh;
    o.material_layers = layers
        .iter()
        .map(|&(m, c)| MaterialLayer {
            material: mat(m),
            texture: Texture::Solid(c),
        })
        .collect();
    o
}

/// Two unit-area triangles side by side, one per layer.
fn split_quad() -> TriMesh {
    let v = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(2.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(2.0, 1.0, 0.0),
    ];
    TriMesh::new(v, vec![[0, 1, 2], [1, 3, 2]], vec![0, 1])
}

#[test]
fn dominant_color_examples() {
    let basic = ColorPalette::shipped(Granularity::Basic);
    let blue = layered(TriMesh::cuboid(Vec3::splat(1.0), 0), &[("plastic", [0, 0, 255])]);
    assert_eq!(dominant_color(&blue, basic), "blue");
    // 5 m² red sides, 1 m² green top.
    let rg = layered(TriMesh::cuboid(Vec3::splat(1.0), 1), &[("wood", [255, 0, 0]), ("wood", [0, 128, 0])]);
    assert_eq!(dominant_color(&rg, basic), "red");
    // Equal areas: red precedes green in the palette even though green is layer 0.
    let tie = layered(split_quad(), &[("wood", [0, 128, 0]), ("wood", [255, 0, 0])]);
    assert_eq!(dominant_color(&tie, basic), "red");
}

#[test]
fn texels_share_their_layer_area() {
    let basic = ColorPalette::shipped(Granularity::Basic);
    let mut o = layered(TriMesh::cuboid(Vec3::splat(1.0), 0), &[("wood", [0, 0, 0])]);
    // Three blue texels out of four beat one white.
    o.material_layers[0].texture = Texture::Grid {
        width: 2,
        height: 2,
        texels: vec![[255, 255, 255], [0, 0, 250], [0, 0, 250], [0, 0, 250]],
    };
    assert_eq!(dominant_color(&o, basic), "blue");
}

#[test]
fn dominant_material_examples() {
    let t = MaterialTable::shipped();
    let wood = layered(TriMesh::cuboid(Vec3::splat(1.0), 0), &[("wood", [0, 0, 0])]);
    assert_eq!(t.material(dominant_material(&wood)).name, "wood");
    let couch = layered(TriMesh::cuboid(Vec3::splat(1.0), 1), &[("textile", [0, 0, 0]), ("metal", [0, 0, 0])]);
    assert_eq!(t.material(dominant_material(&couch)).name, "textile");
    let tie = layered(split_quad(), &[("glass", [0, 0, 0]), ("wood", [0, 0, 0])]);
    assert_eq!(t.material(dominant_material(&tie)).name, "glass");
}

#[test]
fn dominant_material_is_area_argmax_on_generated_houses() {
    for seed in 0..10 {
        let h = generate_house(seed, &GeneratorParams::default()).unwrap();
        for o in &h.objects {
            let areas = surface_area_by_layer(&o.mesh);
            let max = areas.values().cloned().fold(f64::MIN, f64::max);
            let layer = *areas.iter().find(|(_, &a)| a == max).unwrap().0;
            assert_eq!(dominant_material(o), o.material_layers[layer as usize].material, "{}", o.id);
        }
    }
}

/// Volumes are `k / 4` m³ for integer `k`. Sorts the `k`s and returns three times each tercile
/// threshold in the same quarter units, so every comparison below is exact.
fn oracle_thresholds(ks: &[i64]) -> (i64, i64) {
    let mut v = ks.to_vec();
    v.sort_unstable();
    let n = v.len();
    let at = |k: usize| {
        let whole = (n - 1) * k / 3;
        let part = ((n - 1) * k % 3) as i64;
        let next = v[(whole + 1).min(n - 1)];
        3 * v[whole] + part * (next - v[whole])
    };
    (at(1), at(2))
}

fn oracle_class(ks: &[i64], q: f64) -> SizeClass {
    let (lo, hi) = oracle_thresholds(ks);
    let q12 = q * 12.0;
    if q12 < lo as f64 {
        SizeClass::Small
    } else if q12 > hi as f64 {
        SizeClass::Large
    } else {
        SizeClass::Medium
    }
}

#[test]
fn size_class_matches_percentile_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(3..60);
        let ks: Vec<i64> = (0..n).map(|_| rng.gen_range(0..40)).collect();
        let vols: Vec<f64> = ks.iter().map(|&k| k as f64 / 4.0).collect();
        let stats = CategoryVolumeStats {
            categories: [("c".to_owned(), CategoryStats::new(vols.clone()))].into(),
        };
        let (p33, p67) = stats.categories["c"].thresholds.unwrap();
        assert!(p33 <= p67);
        // Samples themselves sit on rank boundaries; random queries fill the gaps.
        let queries = vols.iter().cloned().chain((0..20).map(|_| rng.gen_range(-1.0..11.0)));
        for q in queries {
            let got = stats.classify("c", q);
            assert!(!got.fallback);
            assert_eq!(got.class, oracle_class(&ks, q), "{vols:?} q={q}");
            checked += 1;
        }
    }
    assert!(checked > 20_000);
    let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
    let stats = CategoryVolumeStats {
        categories: [("c".to_owned(), CategoryStats::new(hundred))].into(),
    };
    assert_eq!(stats.classify("c", 0.5).class, SizeClass::Small);
}

#[test]
fn unique_object_falls_back_to_medium() {
    let o = box_object("o", "r0", "accordion", Vec3::ZERO, Vec3::splat(0.3), "wood", [0, 0, 0]);
    let stats = CategoryVolumeStats::from_houses([&house(vec![rect_room("r0", [-1.0, -1.0], [1.0, 1.0], 2.5)], vec![o.clone()], vec![], vec![])]);
    let s = size_class(&o, &stats);
    assert_eq!(s.class, SizeClass::Medium);
    assert!(s.fallback);
}

#[test]
fn scaling_up_never_shrinks_the_class() {
    let stats = CategoryVolumeStats::shipped();
    let h = generate_house(3, &GeneratorParams::default()).unwrap();
    let rank = |c: SizeClass| c as u8;
    for o in &h.objects {
        let mut last = 0;
        for k in 1..=12 {
            let mut scaled = o.clone();
            scaled.mesh = o.mesh.scaled(0.25 * k as f64);
            let r = rank(size_class(&scaled, stats).class);
            assert!(r >= last, "{} at scale {}", o.id, 0.25 * k as f64);
            last = r;
        }
    }
}

#[test]
fn shipped_stats_match_recomputation() {
    let shipped = CategoryVolumeStats::shipped();
    let fresh = CategoryVolumeStats::compute_corpus(STATS_CORPUS_SEEDS);
    assert_eq!(
        shipped.categories.keys().collect::<Vec<_>>(),
        fresh.categories.keys().collect::<Vec<_>>()
    );
    for (name, s) in &shipped.categories {
        let f = &fresh.categories[name];
        assert_eq!(s.samples.len(), f.samples.len(), "{name}");
        for (a, b) in s.samples.iter().zip(&f.samples) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-9), "{name}: {a} vs {b}");
        }
        match s.thresholds {
            Some((p33, p67)) => assert!(p33 <= p67 && s.samples.len() >= MIN_STATS_SAMPLES),
            None => assert!(s.samples.len() < MIN_STATS_SAMPLES),
        }
        assert!(FineCategoryId::from_name(name).is_some(), "{name}");
    }
}

fn record(size: SizeClass, basic: &str, material: &str, fine: &str, room_kind: &str) -> SemanticRecord {
    SemanticRecord {
        object_id: "o".into(),
        color: ColorNames {
            basic: basic.into(),
            intermediate: basic.into(),
            detailed: basic.into(),
        },
        category: fine.into(),
        fine_category: fine.into(),
        material: material.into(),
        size,
        size_fallback: false,
        room_id: "r0".into(),
        room_kind: room_kind.into(),
        centroid: [0.0; 3],
        description: String::new(),
    }
}

#[test]
fn describe_examples() {
    let r = record(SizeClass::Large, "brown", "wood", "table", "kitchen");
    assert_eq!(describe(&r), "a large brown wood table in the kitchen");
    let r = record(SizeClass::Small, "white", "ceramic", "mortar and pestle", "kitchen");
    assert_eq!(describe(&r), "a small white ceramic mortar and pestle in the kitchen");
    assert_eq!(describe(&r), describe(&r.clone()));
    let r = record(SizeClass::Medium, "Red", "Wood", "Desk", "Office");
    assert_eq!(describe(&r), "a medium red wood desk in the office");
}

#[test]
fn mortar_and_pestle_end_to_end() {
    let mut room = rect_room("r0", [0.0, 0.0], [3.0, 3.0], 2.5);
    room.kind = home_core::scene::RoomKind::from_name("kitchen").unwrap();
    let o = box_object("m", "r0", "mortar and pestle", Vec3::new(1.0, 1.0, 0.1), Vec3::splat(0.12), "ceramic", [250, 250, 250]);
    let h = house(vec![room], vec![o], vec![], vec![]);
    let mut stats = CategoryVolumeStats::default();
    stats.categories.insert("mortar and pestle".into(), CategoryStats::new(vec![0.01, 0.02, 0.03]));
    let recs = annotate_house(&h, &stats);
    assert_eq!(recs[0].description, "a small white ceramic mortar and pestle in the kitchen");
    assert_eq!(recs[0].centroid, [1.0, 1.0, 0.1]);
}

#[test]
fn generated_objects_get_complete_records() {
    let stats = CategoryVolumeStats::shipped();
    let materials = MaterialTable::shipped();
    for seed in 100..120 {
        let h = generate_house(seed, &GeneratorParams::default()).unwrap();
        let recs = annotate_house(&h, stats);
        assert_eq!(recs.len(), h.objects.len());
        for (r, o) in recs.iter().zip(&h.objects) {
            assert_eq!(r.object_id, o.id);
            for field in [
                &r.color.basic,
                &r.color.intermediate,
                &r.color.detailed,
                &r.category,
                &r.fine_category,
                &r.room_id,
                &r.room_kind,
            ] {
                assert!(!field.is_empty(), "{}", o.id);
            }
            assert!(materials.id(&r.material).is_some());
            assert!(r.centroid.iter().all(|v| v.is_finite()));
            assert_eq!(r.description, describe(r));
            assert!(h.room(&r.room_id).is_some());
        }
    }
}

#[test]
fn moved_object_reports_new_location() {
    let rooms = vec![rect_room("a", [0.0, 0.0], [3.0, 3.0], 2.5), rect_room("b", [3.0, 0.0], [6.0, 3.0], 2.5)];
    let o = box_object("o", "a", "side table", Vec3::new(1.0, 1.0, 0.25), Vec3::splat(0.5), "wood", [0, 0, 0]);
    let h = house(rooms, vec![o], vec![], vec![]);
    let index = SemanticIndex::new(&h, CategoryVolumeStats::shipped());
    let r = index.record(&h, 0, &Transform::from_translation(Vec3::new(4.5, 1.0, 0.25)));
    assert_eq!(r.room_id, "b");
    assert_eq!(r.centroid, [4.5, 1.0, 0.25]);
}

#[test]
fn legend_examples() {
    let structural: Vec<u16> = FineCategoryId::structural().iter().map(|f| f.0).collect();
    let bare = shoebox();
    let legend = segmentation_legend(&bare);
    assert_eq!(legend.keys().cloned().collect::<Vec<_>>(), structural);
    assert_eq!(legend[&FineCategoryId::wall().0], "wall");
    assert_eq!(legend[&FineCategoryId::floor().0], "floor");
    assert_eq!(segmentation_legend(&void(5.0)).len(), structural.len());
}

#[test]
fn legend_covers_rendered_labels() {
    for seed in 0..3 {
        let h = generate_house(seed, &GeneratorParams::default()).unwrap();
        let legend = segmentation_legend(&h);
        assert!(legend.len() <= FINE_CATEGORY_COUNT);
        for room in &h.rooms {
            let c = room.centroid_xy();
            for k in 0..4 {
                let cam = Camera::new(Vec3::new(c[0], c[1], 1.5), k as f64 * std::f64::consts::FRAC_PI_2, -0.2).with_size(32, 24);
                let f = render(&h, &cam, false).unwrap();
                for &s in f.segmentation.iter().filter(|&&s| s != SEG_BACKGROUND) {
                    assert!(legend.contains_key(&s), "label {s} missing");
                }
            }
        }
    }
}
