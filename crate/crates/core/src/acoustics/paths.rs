use std::collections::HashSet;

use crate::geom::{Transform, Vec3};
use crate::render::RayScene;
use crate::scene::{House, MaterialId, MaterialTable, StructureKind, BAND_COUNT};

use super::{AcousticConfig, AcousticError};

/// Segment-end tolerance for occlusion tests (m).
const OCCLUSION_EPS: f64 = 1e-6;
const PLANE_EPS: f64 = 1e-9;
const QUANT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceOrigin {
    Room { room: usize, kind: StructureKind, edge: Option<usize> },
    Object(usize),
}

/// A set of coplanar triangles that reflects as one mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub normal: Vec3,
    /// Plane is `normal · x = offset`.
    pub offset: f64,
    pub triangles: Vec<[Vec3; 3]>,
    pub material: MaterialId,
    pub origin: SurfaceOrigin,
}

impl Surface {
    fn from_triangles(triangles: Vec<[Vec3; 3]>, material: MaterialId, origin: SurfaceOrigin) -> Option<Surface> {
        let [a, b, c] = *triangles.first()?;
        let normal = (b - a).cross(c - a).normalized();
        if normal.length_squared() == 0.0 {
            return None;
        }
        Some(Surface {
            normal,
            offset: normal.dot(a),
            triangles,
            material,
            origin,
        })
    }

    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn mirror(&self, p: Vec3) -> Vec3 {
        p - self.normal * (2.0 * self.signed_distance(p))
    }

    /// Whether a point on the plane lies inside (or on the boundary of) the surface.
    pub fn contains(&self, p: Vec3) -> bool {
        self.triangles.iter().any(|&[a, b, c]| {
            let v0 = b - a;
            let v1 = c - a;
            let v2 = p - a;
            let d00 = v0.dot(v0);
            let d01 = v0.dot(v1);
            let d11 = v1.dot(v1);
            let d20 = v2.dot(v0);
            let d21 = v2.dot(v1);
            let den = d00 * d11 - d01 * d01;
            if den <= 0.0 {
                return false;
            }
            let v = (d11 * d20 - d01 * d21) / den;
            let w = (d00 * d21 - d01 * d20) / den;
            let tol = 1e-9;
            v >= -tol && w >= -tol && v + w <= 1.0 + tol
        })
    }
}

fn quantize(p: Vec3) -> [i64; 3] {
    [p.x, p.y, p.z].map(|v| (v * QUANT).round() as i64)
}

/// Reflecting surfaces and an occlusion structure for one set of object poses.
#[derive(Debug, Clone)]
pub struct AcousticScene {
    pub surfaces: Vec<Surface>,
    pub rays: RayScene,
}

impl AcousticScene {
    pub fn from_house(house: &House, cfg: &AcousticConfig) -> AcousticScene {
        AcousticScene::build(house, &house.object_transforms(), cfg.object_volume_threshold)
    }

    pub fn build(house: &House, transforms: &[Transform], volume_threshold: f64) -> AcousticScene {
        AcousticScene::with_rays(house, transforms, volume_threshold, RayScene::build(house, transforms))
    }

    /// Reuse an already built ray scene for the same poses.
    pub fn with_rays(house: &House, transforms: &[Transform], volume_threshold: f64, rays: RayScene) -> AcousticScene {
        let mut surfaces = Vec::new();
        // Shared walls appear in both rooms; keep the first copy of each panel.
        let mut seen_panels: HashSet<Vec<[i64; 3]>> = HashSet::new();
        for (ri, room) in house.rooms.iter().enumerate() {
            let panels = room.wall_panels();
            for edge in 0..room.floor_polygon.len() {
                let mut tris = Vec::new();
                for p in panels.iter().filter(|p| p.edge == edge) {
                    let mut key: Vec<[i64; 3]> = p.corners.iter().map(|&c| quantize(c)).collect();
                    key.sort_unstable();
                    if !seen_panels.insert(key) {
                        continue;
                    }
                    let c = p.corners;
                    tris.push([c[0], c[1], c[2]]);
                    tris.push([c[0], c[2], c[3]]);
                }
                let origin = SurfaceOrigin::Room {
                    room: ri,
                    kind: StructureKind::Wall,
                    edge: Some(edge),
                };
                surfaces.extend(Surface::from_triangles(tris, room.wall_material, origin));
            }
            let floor = SurfaceOrigin::Room {
                room: ri,
                kind: StructureKind::Floor,
                edge: None,
            };
            surfaces.extend(Surface::from_triangles(room.floor_triangles(), room.floor_material, floor));
            let ceiling = SurfaceOrigin::Room {
                room: ri,
                kind: StructureKind::Ceiling,
                edge: None,
            };
            surfaces.extend(Surface::from_triangles(room.ceiling_triangles(), room.wall_material, ceiling));
        }
        for (oi, obj) in house.objects.iter().enumerate() {
            if obj.aabb_at(&transforms[oi]).volume() < volume_threshold {
                continue;
            }
            let world = obj.world_triangles_at(&transforms[oi]);
            // Group coplanar triangles of the same layer, in first-seen order.
            let mut groups: Vec<([i64; 4], u16, Vec<[Vec3; 3]>)> = Vec::new();
            for (ti, tri) in world.into_iter().enumerate() {
                let [a, b, c] = tri;
                let n = (b - a).cross(c - a).normalized();
                if n.length_squared() == 0.0 {
                    continue;
                }
                let q = quantize(n);
                let key = [q[0], q[1], q[2], (n.dot(a) * QUANT).round() as i64];
                let layer = obj.mesh.triangle_material[ti];
                match groups.iter_mut().find(|g| g.0 == key && g.1 == layer) {
                    Some(g) => g.2.push(tri),
                    None => groups.push((key, layer, vec![tri])),
                }
            }
            for (_, layer, tris) in groups {
                let material = obj.material_layers[layer as usize].material;
                surfaces.extend(Surface::from_triangles(tris, material, SurfaceOrigin::Object(oi)));
            }
        }
        AcousticScene { surfaces, rays }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcousticPath {
    /// Surface indices in the order sound meets them.
    pub reflection_sequence: Vec<usize>,
    pub reflection_materials: Vec<MaterialId>,
    /// Reflection points, source side first.
    pub points: Vec<Vec3>,
    pub length: f64,
    pub band_gain: [f64; BAND_COUNT],
    /// Unit vector from the listener toward where the sound arrives from.
    pub arrival_direction: Vec3,
}

/// `gain_b = (1/L) · Π √(1 − absorption_b) · exp(−α_b · L)`.
pub fn band_attenuation(path: &AcousticPath, materials: &MaterialTable, cfg: &AcousticConfig) -> [f64; BAND_COUNT] {
    let mut g = [1.0 / path.length; BAND_COUNT];
    for m in &path.reflection_materials {
        let a = materials.material(*m).absorption;
        for b in 0..BAND_COUNT {
            g[b] *= (1.0 - a[b]).max(0.0).sqrt();
        }
    }
    for b in 0..BAND_COUNT {
        g[b] *= (-cfg.air_absorption[b] * path.length).exp();
    }
    g
}

/// Every unoccluded specular path of order up to `cfg.max_order`.
pub fn trace_paths(house: &House, source: Vec3, listener: Vec3, cfg: &AcousticConfig) -> Result<Vec<AcousticPath>, AcousticError> {
    let scene = AcousticScene::from_house(house, cfg);
    trace_paths_in(&scene, &house.materials, source, listener, cfg)
}

pub fn trace_paths_in(
    scene: &AcousticScene,
    materials: &MaterialTable,
    source: Vec3,
    listener: Vec3,
    cfg: &AcousticConfig,
) -> Result<Vec<AcousticPath>, AcousticError> {
    cfg.validate()?;
    if !source.is_finite() || !listener.is_finite() {
        return Err(AcousticError::Invalid("non-finite position".into()));
    }
    if source.distance(listener) <= PLANE_EPS {
        return Err(AcousticError::DegenerateGeometry("source and listener coincide".into()));
    }
    for (i, s) in scene.surfaces.iter().enumerate() {
        if s.signed_distance(source).abs() <= PLANE_EPS && s.contains(source) {
            return Err(AcousticError::DegenerateGeometry(format!("source lies on reflecting surface {i}")));
        }
    }
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(cfg.max_order);
    let mut images = vec![source];
    enumerate(scene, materials, cfg, listener, &mut seq, &mut images, &mut out);
    Ok(out)
}

fn enumerate(
    scene: &AcousticScene,
    materials: &MaterialTable,
    cfg: &AcousticConfig,
    listener: Vec3,
    seq: &mut Vec<usize>,
    images: &mut Vec<Vec3>,
    out: &mut Vec<AcousticPath>,
) {
    if let Some(p) = validate(scene, materials, cfg, listener, seq, images) {
        out.push(p);
    }
    if seq.len() == cfg.max_order {
        return;
    }
    let last_image = *images.last().unwrap();
    for (i, s) in scene.surfaces.iter().enumerate() {
        if seq.last() == Some(&i) {
            continue;
        }
        if s.signed_distance(last_image).abs() <= PLANE_EPS {
            continue;
        }
        seq.push(i);
        images.push(s.mirror(last_image));
        enumerate(scene, materials, cfg, listener, seq, images, out);
        images.pop();
        seq.pop();
    }
}

fn validate(
    scene: &AcousticScene,
    materials: &MaterialTable,
    cfg: &AcousticConfig,
    listener: Vec3,
    seq: &[usize],
    images: &[Vec3],
) -> Option<AcousticPath> {
    // Walk back from the listener through each mirror.
    let mut points = Vec::with_capacity(seq.len());
    let mut target = listener;
    for k in (0..seq.len()).rev() {
        let s = &scene.surfaces[seq[k]];
        let img = images[k + 1];
        let da = s.signed_distance(target);
        let db = s.signed_distance(img);
        if !(da * db < 0.0) || da.abs() <= PLANE_EPS {
            return None;
        }
        let t = da / (da - db);
        let p = target + (img - target) * t;
        if !s.contains(p) {
            return None;
        }
        points.push(p);
        target = p;
    }
    points.reverse();
    let mut prev = images[0];
    for &p in points.iter().chain(std::iter::once(&listener)) {
        if !scene.rays.segment_clear(prev, p, OCCLUSION_EPS) {
            return None;
        }
        prev = p;
    }
    let image = *images.last().unwrap();
    let length = image.distance(listener);
    let arrive_from = points.last().copied().unwrap_or(images[0]);
    let mut path = AcousticPath {
        reflection_sequence: seq.to_vec(),
        reflection_materials: seq.iter().map(|&i| scene.surfaces[i].material).collect(),
        points,
        length,
        band_gain: [0.0; BAND_COUNT],
        arrival_direction: (arrive_from - listener).normalized(),
    };
    path.band_gain = band_attenuation(&path, materials, cfg);
    Some(path)
}
