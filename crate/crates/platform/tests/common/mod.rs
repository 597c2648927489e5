#![allow(dead_code)]

use std::path::PathBuf;

use home_core::geom::{Aabb, Transform, Vec3};
use home_core::scene::{load_scene_file, CategoryId, FineCategoryId, House, MaterialLayer, MaterialTable, SceneObject, Texture, TriMesh};

pub fn sample(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name)
}

/// Empty 4 x 3 x 2.5 m room with its corner at the origin.
pub fn shoebox() -> House {
    load_scene_file(&sample("shoebox.json")).unwrap()
}

pub fn void(half: f64) -> House {
    House::void(Aabb::new(Vec3::splat(-half), Vec3::splat(half)))
}

pub fn box_object(id: &str, room: &str, fine: &str, center: Vec3, size: Vec3, material: &str) -> SceneObject {
    SceneObject {
        id: id.into(),
        room_id: room.into(),
        category: CategoryId::from_name("table").unwrap(),
        fine_category: FineCategoryId::from_name(fine).unwrap(),
        mesh: TriMesh::cuboid(size, 0),
        transform: Transform::from_translation(center),
        material_layers: vec![MaterialLayer {
            material: MaterialTable::shipped().id(material).unwrap(),
            texture: Texture::Solid([200, 60, 60]),
        }],
        dynamic: false,
    }
}
