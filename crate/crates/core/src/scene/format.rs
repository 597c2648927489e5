//! `home-scene/1` documents: pretty-printed JSON with names instead of numeric ids.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geom::{Aabb, Transform, Vec3};

use super::{
    validate_house, CategoryId, FineCategoryId, House, Material, MaterialLayer, MaterialTable, Opening, PointLight, Room,
    RoomKind, SampleData, SceneError, SceneObject, SignalSpec, SoundSource, Texture, TriMesh,
};

pub const SCENE_VERSION: &str = "home-scene/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    version: String,
    meta: MetaDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    materials: Vec<MaterialDoc>,
    #[serde(default)]
    rooms: Vec<RoomDoc>,
    #[serde(default)]
    objects: Vec<ObjectDoc>,
    #[serde(default)]
    lights: Vec<PointLight>,
    #[serde(default)]
    sound_sources: Vec<SoundSource>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<Aabb>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    absorption: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    albedo: Option<[u8; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomDoc {
    id: String,
    kind: String,
    floor_polygon: Vec<[f64; 2]>,
    #[serde(default)]
    floor_z: f64,
    wall_height: f64,
    wall_material: String,
    floor_material: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    openings: Vec<Opening>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MeshDoc {
    File { file: String },
    Inline(InlineMesh),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InlineMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    layers: Vec<u16>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    material: String,
    texture: Texture,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: String,
    room_id: String,
    category: String,
    fine_category: String,
    mesh: MeshDoc,
    #[serde(default)]
    transform: Transform,
    material_layers: Vec<LayerDoc>,
    #[serde(default)]
    dynamic: bool,
}

/// Parses and validates a scene document; relative paths resolve against the working directory.
pub fn load_scene(document: &[u8]) -> Result<House, SceneError> {
    load_scene_with_base(document, None)
}

pub fn load_scene_file(path: &Path) -> Result<House, SceneError> {
    let bytes = std::fs::read(path).map_err(|e| SceneError::Io(format!("{}: {e}", path.display())))?;
    load_scene_with_base(&bytes, path.parent())
}

pub fn load_scene_with_base(document: &[u8], base: Option<&Path>) -> Result<House, SceneError> {
    let doc: SceneDoc = serde_json::from_slice(document).map_err(|e| SceneError::Parse(e.to_string()))?;
    if doc.version != SCENE_VERSION {
        return Err(SceneError::validation(
            "version",
            format!("unsupported version {:?}, expected {SCENE_VERSION:?}", doc.version),
        ));
    }
    let resolve = |p: &str| -> PathBuf {
        match base {
            Some(b) => b.join(p),
            None => PathBuf::from(p),
        }
    };

    let mut materials = MaterialTable::shipped().clone();
    for (i, m) in doc.materials.iter().enumerate() {
        let path = format!("materials[{i}]");
        let id = materials
            .id(&m.name)
            .ok_or_else(|| SceneError::validation(format!("{path}.name"), format!("unknown material {:?}", m.name)))?;
        let entry = materials.get_mut(id).expect("id from table");
        if let Some(a) = m.absorption {
            entry.absorption = a;
        }
        if let Some(d) = m.density {
            entry.density = d;
        }
        if let Some(c) = m.albedo {
            entry.albedo = c;
        }
        if !MaterialTable::is_valid_entry(entry) {
            return Err(SceneError::validation(path, "absorption must lie in [0,1] and density be positive"));
        }
    }
    let material_id = |name: &str, path: String| {
        materials
            .id(name)
            .ok_or_else(|| SceneError::validation(path, format!("unknown material {name:?}")))
    };

    let mut rooms = Vec::with_capacity(doc.rooms.len());
    for (i, r) in doc.rooms.into_iter().enumerate() {
        let path = format!("rooms[{i}]");
        rooms.push(Room {
            kind: RoomKind::from_name(&r.kind)
                .ok_or_else(|| SceneError::validation(format!("{path}.kind"), format!("unknown room kind {:?}", r.kind)))?,
            wall_material: material_id(&r.wall_material, format!("{path}.wall_material"))?,
            floor_material: material_id(&r.floor_material, format!("{path}.floor_material"))?,
            id: r.id,
            floor_polygon: r.floor_polygon,
            floor_z: r.floor_z,
            wall_height: r.wall_height,
            openings: r.openings,
        });
    }

    let mut objects = Vec::with_capacity(doc.objects.len());
    for (i, o) in doc.objects.into_iter().enumerate() {
        let path = format!("objects[{i}]");
        let mesh = match o.mesh {
            MeshDoc::Inline(m) => TriMesh::new(m.vertices, m.triangles, m.layers),
            MeshDoc::File { file } => {
                let full = resolve(&file);
                let f = std::fs::File::open(&full)
                    .map_err(|e| SceneError::validation(format!("{path}.mesh.file"), format!("{}: {e}", full.display())))?;
                TriMesh::read_hmsh(std::io::BufReader::new(f)).map_err(|e| match e {
                    SceneError::Parse(m) => SceneError::validation(format!("{path}.mesh.file"), m),
                    other => other,
                })?
            }
        };
        let mut layers = Vec::with_capacity(o.material_layers.len());
        for (k, l) in o.material_layers.into_iter().enumerate() {
            layers.push(MaterialLayer {
                material: material_id(&l.material, format!("{path}.material_layers[{k}].material"))?,
                texture: l.texture,
            });
        }
        objects.push(SceneObject {
            category: CategoryId::from_name(&o.category).ok_or_else(|| {
                SceneError::validation(format!("{path}.category"), format!("unknown category {:?}", o.category))
            })?,
            fine_category: FineCategoryId::from_name(&o.fine_category).ok_or_else(|| {
                SceneError::validation(
                    format!("{path}.fine_category"),
                    format!("unknown fine category {:?}", o.fine_category),
                )
            })?,
            id: o.id,
            room_id: o.room_id,
            mesh,
            transform: o.transform,
            material_layers: layers,
            dynamic: o.dynamic,
        });
    }

    let mut sound_sources = doc.sound_sources;
    for (i, s) in sound_sources.iter_mut().enumerate() {
        if let SignalSpec::Sample { path, pcm } = &mut s.signal {
            let full = resolve(path);
            *pcm = Some(read_wav_mono(&full).map_err(|m| SceneError::validation(format!("sound_sources[{i}].signal.path"), m))?);
        }
    }

    let mut house = House {
        id: doc.meta.id,
        rooms,
        objects,
        lights: doc.lights,
        sound_sources,
        bounds: Aabb::empty(),
        materials,
    };
    house.bounds = match doc.meta.bounds {
        Some(b) => b,
        None => house.computed_bounds(),
    };
    validate_house(&house)?;
    Ok(house)
}

fn read_wav_mono(path: &Path) -> Result<SampleData, String> {
    let mut reader = hound::WavReader::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let raw: Vec<f32> = match spec.sample_format {
        hound::SampleFormat::Float => reader.samples::<f32>().collect::<Result<_, _>>().map_err(|e| e.to_string())?,
        hound::SampleFormat::Int => {
            let scale = (1u64 << (spec.bits_per_sample - 1)) as f32;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f32 / scale))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?
        }
    };
    // Keep the first channel only.
    let samples: Vec<f32> = raw.chunks(channels).map(|c| c[0]).collect();
    if samples.is_empty() {
        return Err(format!("{}: no samples", path.display()));
    }
    Ok(SampleData {
        rate: spec.sample_rate,
        samples: Arc::new(samples),
    })
}

/// Serializes a house as a `home-scene/1` document with inline meshes.
pub fn serialize_house(house: &House) -> String {
    let shipped = MaterialTable::shipped();
    let materials = house
        .materials
        .iter()
        .filter(|(id, m)| shipped.get(*id) != Some(*m))
        .map(|(_, m): (_, &Material)| MaterialDoc {
            name: m.name.clone(),
            absorption: Some(m.absorption),
            density: Some(m.density),
            albedo: Some(m.albedo),
        })
        .collect();
    let name = |id| house.materials.material(id).name.clone();
    let doc = SceneDoc {
        version: SCENE_VERSION.to_owned(),
        meta: MetaDoc {
            id: house.id.clone(),
            bounds: Some(house.bounds),
        },
        materials,
        rooms: house
            .rooms
            .iter()
            .map(|r| RoomDoc {
                id: r.id.clone(),
                kind: r.kind.name().to_owned(),
                floor_polygon: r.floor_polygon.clone(),
                floor_z: r.floor_z,
                wall_height: r.wall_height,
                wall_material: name(r.wall_material),
                floor_material: name(r.floor_material),
                openings: r.openings.clone(),
            })
            .collect(),
        objects: house
            .objects
            .iter()
            .map(|o| ObjectDoc {
                id: o.id.clone(),
                room_id: o.room_id.clone(),
                category: o.category.name().to_owned(),
                fine_category: o.fine_category.name().to_owned(),
                mesh: MeshDoc::Inline(InlineMesh {
                    vertices: o.mesh.vertices.clone(),
                    triangles: o.mesh.triangles.clone(),
                    layers: o.mesh.triangle_material.clone(),
                }),
                transform: o.transform,
                material_layers: o
                    .material_layers
                    .iter()
                    .map(|l| LayerDoc {
                        material: name(l.material),
                        texture: l.texture.clone(),
                    })
                    .collect(),
                dynamic: o.dynamic,
            })
            .collect(),
        lights: house.lights.clone(),
        sound_sources: house.sound_sources.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("scene document serializes")
}
