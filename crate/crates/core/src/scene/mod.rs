//! World data model: houses, rooms, objects, lights and sound sources.
//!
//! Scene types are immutable once loaded and are shared freely across threads.

mod format;
mod generator;
mod material;
mod mesh;
mod taxonomy;
mod validate;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{point_in_polygon, polygon_signed_area, triangulate_polygon, Aabb, Transform, Vec3};

pub use format::{load_scene, load_scene_file, load_scene_with_base, serialize_house, SCENE_VERSION};
pub use generator::{generate_house, GeneratorParams};
pub use material::{Material, MaterialId, MaterialTable, BAND_CENTERS, BAND_COUNT, MATERIAL_COUNT};
pub use mesh::{mesh_volume, surface_area_by_layer, TriMesh};
pub use taxonomy::{
    categories, fine_categories, room_kinds, CategoryId, FineCategoryId, RoomKind, Taxonomy, CATEGORY_COUNT,
    FINE_CATEGORY_COUNT, ROOM_KIND_COUNT,
};
pub use validate::validate_house;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("mesh is not watertight")]
    NotWatertight,
    #[error("invalid generator parameters: {0}")]
    Param(String),
    #[error("io error: {0}")]
    Io(String),
}

impl SceneError {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        SceneError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A door-like gap cut into one wall edge of a room, starting at floor level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opening {
    /// Edge `i` runs from polygon vertex `i` to `i + 1`.
    pub edge: usize,
    /// Distance along the edge from its start vertex (m).
    pub offset: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub id: String,
    pub kind: RoomKind,
    /// Counter-clockwise, meters.
    pub floor_polygon: Vec<[f64; 2]>,
    pub floor_z: f64,
    pub wall_height: f64,
    pub wall_material: MaterialId,
    pub floor_material: MaterialId,
    pub openings: Vec<Opening>,
}

/// Which part of a room a structural triangle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    Wall,
    Floor,
    Ceiling,
}

/// A planar wall panel (part of an edge between openings).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallPanel {
    pub edge: usize,
    /// Corners wound counter-clockwise as seen from outside the room.
    pub corners: [Vec3; 4],
}

impl Room {
    pub fn area(&self) -> f64 {
        polygon_signed_area(&self.floor_polygon)
    }

    pub fn ceiling_z(&self) -> f64 {
        self.floor_z + self.wall_height
    }

    pub fn contains_xy(&self, p: [f64; 2]) -> bool {
        point_in_polygon(&self.floor_polygon, p)
    }

    pub fn contains_point(&self, p: Vec3) -> bool {
        p.z >= self.floor_z && p.z <= self.ceiling_z() && self.contains_xy(p.xy())
    }

    pub fn aabb(&self) -> Aabb {
        let mut b = Aabb::empty();
        for p in &self.floor_polygon {
            b.include(Vec3::new(p[0], p[1], self.floor_z));
            b.include(Vec3::new(p[0], p[1], self.ceiling_z()));
        }
        b
    }

    pub fn centroid_xy(&self) -> [f64; 2] {
        let n = self.floor_polygon.len() as f64;
        let (sx, sy) = self.floor_polygon.iter().fold((0.0, 0.0), |a, p| (a.0 + p[0], a.1 + p[1]));
        [sx / n, sy / n]
    }

    pub fn edge(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let n = self.floor_polygon.len();
        (self.floor_polygon[i], self.floor_polygon[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// Wall panels with openings cut out: per opening, the solid span before it, the lintel
    /// above it, and the remaining span after the last opening.
    pub fn wall_panels(&self) -> Vec<WallPanel> {
        let mut panels = Vec::new();
        let (z0, z1) = (self.floor_z, self.ceiling_z());
        for edge in 0..self.floor_polygon.len() {
            let (a, b) = self.edge(edge);
            let len = self.edge_length(edge);
            if len <= 0.0 {
                continue;
            }
            let at = |s: f64, z: f64| {
                let f = s / len;
                Vec3::new(a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f, z)
            };
            let mut gaps: Vec<&Opening> = self.openings.iter().filter(|o| o.edge == edge).collect();
            gaps.sort_by(|p, q| p.offset.total_cmp(&q.offset));
            let mut cursor = 0.0;
            let mut push = |s0: f64, s1: f64, lo: f64, hi: f64| {
                if s1 - s0 > 1e-9 && hi - lo > 1e-9 {
                    panels.push(WallPanel {
                        edge,
                        corners: [at(s0, lo), at(s1, lo), at(s1, hi), at(s0, hi)],
                    });
                }
            };
            for g in gaps {
                push(cursor, g.offset, z0, z1);
                push(g.offset, g.offset + g.width, z0 + g.height, z1);
                cursor = g.offset + g.width;
            }
            push(cursor, len, z0, z1);
        }
        panels
    }

    /// Floor triangles at `floor_z`, wound to face up.
    pub fn floor_triangles(&self) -> Vec<[Vec3; 3]> {
        let z = self.floor_z;
        triangulate_polygon(&self.floor_polygon)
            .into_iter()
            .map(|t| t.map(|i| Vec3::new(self.floor_polygon[i][0], self.floor_polygon[i][1], z)))
            .collect()
    }

    /// Ceiling triangles at `floor_z + wall_height`, wound to face down.
    pub fn ceiling_triangles(&self) -> Vec<[Vec3; 3]> {
        let z = self.ceiling_z();
        triangulate_polygon(&self.floor_polygon)
            .into_iter()
            .map(|t| [t[0], t[2], t[1]].map(|i| Vec3::new(self.floor_polygon[i][0], self.floor_polygon[i][1], z)))
            .collect()
    }

    /// Every structural triangle of the room with its kind.
    pub fn structure_triangles(&self) -> Vec<(StructureKind, [Vec3; 3])> {
        let mut out = Vec::new();
        for p in self.wall_panels() {
            let c = p.corners;
            out.push((StructureKind::Wall, [c[0], c[1], c[2]]));
            out.push((StructureKind::Wall, [c[0], c[2], c[3]]));
        }
        out.extend(self.floor_triangles().into_iter().map(|t| (StructureKind::Floor, t)));
        out.extend(self.ceiling_triangles().into_iter().map(|t| (StructureKind::Ceiling, t)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Texture {
    Solid([u8; 3]),
    /// Row-major texels tiled once per meter across the surface.
    Grid {
        width: usize,
        height: usize,
        texels: Vec<[u8; 3]>,
    },
}

impl Texture {
    pub fn texels(&self) -> &[[u8; 3]] {
        match self {
            Texture::Solid(c) => std::slice::from_ref(c),
            Texture::Grid { texels, .. } => texels,
        }
    }

    /// Texel at tiling coordinates `(u, v)`, wrapping into `[0, 1)`.
    pub fn sample(&self, u: f64, v: f64) -> [u8; 3] {
        match self {
            Texture::Solid(c) => *c,
            Texture::Grid { width, height, texels } => {
                let fu = u - u.floor();
                let fv = v - v.floor();
                let x = ((fu * *width as f64) as usize).min(width - 1);
                let y = ((fv * *height as f64) as usize).min(height - 1);
                texels[y * width + x]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialLayer {
    pub material: MaterialId,
    pub texture: Texture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub id: String,
    pub room_id: String,
    pub category: CategoryId,
    pub fine_category: FineCategoryId,
    pub mesh: TriMesh,
    pub transform: Transform,
    pub material_layers: Vec<MaterialLayer>,
    pub dynamic: bool,
}

impl SceneObject {
    pub fn aabb_at(&self, transform: &Transform) -> Aabb {
        Aabb::from_points(self.mesh.transformed_vertices(transform))
    }

    pub fn world_triangles_at(&self, transform: &Transform) -> Vec<[Vec3; 3]> {
        let verts: Vec<Vec3> = self.mesh.transformed_vertices(transform).collect();
        self.mesh
            .triangles
            .iter()
            .map(|t| [verts[t[0] as usize], verts[t[1] as usize], verts[t[2] as usize]])
            .collect()
    }
}

/// Tight axis-aligned box of the transformed vertices.
pub fn object_aabb(obj: &SceneObject) -> Aabb {
    obj.aabb_at(&obj.transform)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLight {
    pub position: Vec3,
    pub intensity: f64,
}

/// Decoded PCM for sample-file signals.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleData {
    pub rate: u32,
    pub samples: Arc<Vec<f32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SignalSpec {
    Sine {
        frequency: f64,
    },
    /// Deterministic white noise in `[-1, 1]`.
    Noise {
        seed: u64,
    },
    /// Mono WAV file, looped. Path is relative to the scene document.
    Sample {
        path: String,
        #[serde(skip)]
        pcm: Option<SampleData>,
    },
    /// Unit impulse at sample 0.
    Impulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundSource {
    pub id: String,
    pub position: Vec3,
    pub signal: SignalSpec,
    /// Linear amplitude at 1 m.
    pub reference_gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct House {
    pub id: String,
    pub rooms: Vec<Room>,
    pub objects: Vec<SceneObject>,
    pub lights: Vec<PointLight>,
    pub sound_sources: Vec<SoundSource>,
    pub bounds: Aabb,
    pub materials: MaterialTable,
}

impl House {
    /// An empty house with only bounds: the unbounded "test void".
    pub fn void(bounds: Aabb) -> House {
        House {
            id: "void".into(),
            rooms: Vec::new(),
            objects: Vec::new(),
            lights: Vec::new(),
            sound_sources: Vec::new(),
            bounds,
            materials: MaterialTable::shipped().clone(),
        }
    }

    pub fn room(&self, id: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn room_index(&self, id: &str) -> Option<usize> {
        self.rooms.iter().position(|r| r.id == id)
    }

    pub fn object(&self, id: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    /// Index of the first room whose volume contains `p`.
    pub fn room_containing(&self, p: Vec3) -> Option<usize> {
        self.rooms.iter().position(|r| r.contains_point(p))
    }

    pub fn object_transforms(&self) -> Vec<Transform> {
        self.objects.iter().map(|o| o.transform).collect()
    }

    /// Bounds recomputed from rooms and objects.
    pub fn computed_bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for r in &self.rooms {
            b = b.union(&r.aabb());
        }
        for o in &self.objects {
            b = b.union(&object_aabb(o));
        }
        b
    }
}
