#![allow(dead_code)]

use home_core::geom::{Aabb, Transform, Vec3};
use home_core::scene::{
    CategoryId, FineCategoryId, House, MaterialLayer, MaterialTable, Opening, PointLight, Room, RoomKind,
    SceneObject, SoundSource, Texture, TriMesh,
};

pub fn mat(name: &str) -> home_core::scene::MaterialId {
    MaterialTable::shipped().id(name).unwrap()
}

pub fn rect_room(id: &str, min: [f64; 2], max: [f64; 2], height: f64) -> Room {
    Room {
        id: id.into(),
        kind: RoomKind::from_name("living room").unwrap(),
        floor_polygon: vec![[min[0], min[1]], [max[0], min[1]], [max[0], max[1]], [min[0], max[1]]],
        floor_z: 0.0,
        wall_height: height,
        wall_material: mat("plaster"),
        floor_material: mat("wood"),
        openings: Vec::new(),
    }
}

pub fn door(edge: usize, offset: f64, width: f64, height: f64) -> Opening {
    Opening {
        edge,
        offset,
        width,
        height,
    }
}

pub fn box_object(id: &str, room: &str, fine: &str, center: Vec3, size: Vec3, material: &str, color: [u8; 3]) -> SceneObject {
    SceneObject {
        id: id.into(),
        room_id: room.into(),
        category: CategoryId::from_name("table").unwrap(),
        fine_category: FineCategoryId::from_name(fine).unwrap(),
        mesh: TriMesh::cuboid(size, 0),
        transform: Transform::from_translation(center),
        material_layers: vec![MaterialLayer {
            material: mat(material),
            texture: Texture::Solid(color),
        }],
        dynamic: false,
    }
}

pub fn house(rooms: Vec<Room>, objects: Vec<SceneObject>, lights: Vec<PointLight>, sources: Vec<SoundSource>) -> House {
    let mut h = House {
        id: "test".into(),
        rooms,
        objects,
        lights,
        sound_sources: sources,
        bounds: Aabb::empty(),
        materials: MaterialTable::shipped().clone(),
    };
    h.bounds = h.computed_bounds();
    home_core::scene::validate_house(&h).unwrap();
    h
}

/// Empty 4 x 3 x 2.5 m room with its corner at the origin.
pub fn shoebox() -> House {
    house(vec![rect_room("r0", [0.0, 0.0], [4.0, 3.0], 2.5)], vec![], vec![], vec![])
}

pub fn void(half: f64) -> House {
    House::void(Aabb::new(Vec3::splat(-half), Vec3::splat(half)))
}
