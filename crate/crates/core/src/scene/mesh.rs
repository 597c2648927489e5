use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use crate::geom::{triangle_area, Aabb, Transform, Vec3};

use super::SceneError;

const HMSH_MAGIC: &[u8; 4] = b"HMSH";

/// Triangle mesh in object-local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Material layer index per triangle.
    pub triangle_material: Vec<u16>,
    watertight: bool,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>, triangle_material: Vec<u16>) -> Self {
        let watertight = is_watertight(&triangles);
        TriMesh {
            vertices,
            triangles,
            triangle_material,
            watertight,
        }
    }

    pub fn watertight(&self) -> bool {
        self.watertight
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let t = self.triangles[i];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        triangle_area(a, b, c)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    pub fn local_aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied())
    }

    pub fn transformed_vertices(&self, t: &Transform) -> impl Iterator<Item = Vec3> + '_ {
        let m = t.rotation_matrix();
        let tr = t.translation;
        self.vertices.iter().map(move |&v| crate::geom::rotate(&m, v) + tr)
    }

    pub fn scaled(&self, s: f64) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&v| v * s).collect(),
            triangles: self.triangles.clone(),
            triangle_material: self.triangle_material.clone(),
            watertight: self.watertight,
        }
    }

    /// Axis-aligned box centred on the origin. Triangles of the +z face go to `top_layer`,
    /// everything else to layer 0.
    pub fn cuboid(size: Vec3, top_layer: u16) -> TriMesh {
        let h = size * 0.5;
        let vertices: Vec<Vec3> = (0..8)
            .map(|i| {
                Vec3::new(
                    if i & 1 == 0 { -h.x } else { h.x },
                    if i & 2 == 0 { -h.y } else { h.y },
                    if i & 4 == 0 { -h.z } else { h.z },
                )
            })
            .collect();
        // Quads listed counter-clockwise when viewed from outside.
        let quads: [([u32; 4], bool); 6] = [
            ([0, 2, 3, 1], false), // -z
            ([4, 5, 7, 6], true),  // +z
            ([0, 1, 5, 4], false), // -y
            ([2, 6, 7, 3], false), // +y
            ([0, 4, 6, 2], false), // -x
            ([1, 3, 7, 5], false), // +x
        ];
        let mut triangles = Vec::with_capacity(12);
        let mut layers = Vec::with_capacity(12);
        for (q, top) in quads {
            triangles.push([q[0], q[1], q[2]]);
            triangles.push([q[0], q[2], q[3]]);
            let layer = if top { top_layer } else { 0 };
            layers.extend([layer, layer]);
        }
        TriMesh::new(vertices, triangles, layers)
    }

    /// Regular `sides`-gon prism centred on the origin, axis along z. Caps go to `cap_layer`.
    pub fn prism(radius: f64, height: f64, sides: usize, cap_layer: u16) -> TriMesh {
        let sides = sides.max(3);
        let hz = height * 0.5;
        let mut vertices = Vec::with_capacity(2 * sides + 2);
        for k in 0..sides {
            let a = std::f64::consts::TAU * k as f64 / sides as f64;
            let (s, c) = a.sin_cos();
            vertices.push(Vec3::new(radius * c, radius * s, -hz));
            vertices.push(Vec3::new(radius * c, radius * s, hz));
        }
        let bottom = vertices.len() as u32;
        vertices.push(Vec3::new(0.0, 0.0, -hz));
        let top = bottom + 1;
        vertices.push(Vec3::new(0.0, 0.0, hz));
        let mut triangles = Vec::new();
        let mut layers = Vec::new();
        for k in 0..sides as u32 {
            let n = (k + 1) % sides as u32;
            let (b0, t0, b1, t1) = (2 * k, 2 * k + 1, 2 * n, 2 * n + 1);
            triangles.push([b0, b1, t1]);
            triangles.push([b0, t1, t0]);
            layers.extend([0, 0]);
            triangles.push([bottom, b1, b0]);
            triangles.push([top, t0, t1]);
            layers.extend([cap_layer, cap_layer]);
        }
        TriMesh::new(vertices, triangles, layers)
    }

    pub fn read_hmsh<R: Read>(mut r: R) -> Result<TriMesh, SceneError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf).map_err(|e| SceneError::Io(e.to_string()))?;
        decode_hmsh(&buf)
    }

    pub fn write_hmsh<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(HMSH_MAGIC)?;
        w.write_all(&(self.vertices.len() as u32).to_le_bytes())?;
        w.write_all(&(self.triangles.len() as u32).to_le_bytes())?;
        for v in &self.vertices {
            for c in [v.x, v.y, v.z] {
                w.write_all(&(c as f32).to_le_bytes())?;
            }
        }
        for t in &self.triangles {
            for i in t {
                w.write_all(&i.to_le_bytes())?;
            }
        }
        for l in &self.triangle_material {
            w.write_all(&l.to_le_bytes())?;
        }
        Ok(())
    }
}

fn decode_hmsh(buf: &[u8]) -> Result<TriMesh, SceneError> {
    let bad = |msg: &str| SceneError::Parse(format!("hmsh: {msg}"));
    if buf.len() < 12 || &buf[..4] != HMSH_MAGIC {
        return Err(bad("missing magic"));
    }
    let nv = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
    let nt = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
    let expected = nv
        .checked_mul(12)
        .and_then(|v| nt.checked_mul(14).map(|t| 12 + v + t))
        .ok_or_else(|| bad("size overflow"))?;
    if buf.len() != expected {
        return Err(bad(&format!("expected {expected} bytes, found {}", buf.len())));
    }
    let f32_at = |o: usize| f32::from_le_bytes(buf[o..o + 4].try_into().unwrap()) as f64;
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    let mut off = 12;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push(Vec3::new(f32_at(off), f32_at(off + 4), f32_at(off + 8)));
        off += 12;
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        triangles.push([u32_at(off), u32_at(off + 4), u32_at(off + 8)]);
        off += 12;
    }
    let mut layers = Vec::with_capacity(nt);
    for _ in 0..nt {
        layers.push(u16::from_le_bytes(buf[off..off + 2].try_into().unwrap()));
        off += 2;
    }
    Ok(TriMesh::new(vertices, triangles, layers))
}

/// Every edge must be used by exactly two triangles, once in each direction.
fn is_watertight(triangles: &[[u32; 3]]) -> bool {
    if triangles.is_empty() {
        return false;
    }
    let mut directed: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 3);
    for t in triangles {
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    directed
        .iter()
        .all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)).copied() == Some(1))
}

/// Absolute value of the signed tetrahedron sum.
pub fn mesh_volume(mesh: &TriMesh) -> Result<f64, SceneError> {
    if !mesh.watertight() {
        return Err(SceneError::NotWatertight);
    }
    let mut six_v = 0.0;
    for i in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(i);
        six_v += a.dot(b.cross(c));
    }
    Ok((six_v / 6.0).abs())
}

/// Surface area grouped by material layer index.
pub fn surface_area_by_layer(mesh: &TriMesh) -> BTreeMap<u16, f64> {
    let mut out = BTreeMap::new();
    for (i, &layer) in mesh.triangle_material.iter().enumerate() {
        *out.entry(layer).or_insert(0.0) += mesh.triangle_area(i);
    }
    out
}
