use crate::geom::{Aabb, Transform, Vec3};
use crate::scene::{House, StructureKind};

/// Edge length of a grid cell (m).
pub const CELL_SIZE: f64 = 0.5;

/// What a triangle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceTag {
    Object(usize),
    Structure { room: usize, kind: StructureKind },
}

#[derive(Debug, Clone)]
pub(crate) struct Tri {
    pub v0: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub normal: Vec3,
    pub tag: SurfaceTag,
    pub layer: u16,
    /// Dominant axis of the (local) normal, used for planar texture projection.
    pub uv_axis: u8,
}

/// Nearest intersection found by a grid traversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawHit {
    pub t: f64,
    pub triangle: usize,
}

/// Triangle soup of a house at one set of object poses, bucketed into a uniform grid.
#[derive(Debug, Clone)]
pub struct RayScene {
    pub(crate) tris: Vec<Tri>,
    pub(crate) transforms: Vec<Transform>,
    bounds: Aabb,
    dims: [usize; 3],
    cell_start: Vec<u32>,
    cell_items: Vec<u32>,
}

fn dominant_axis(n: Vec3) -> u8 {
    let (x, y, z) = (n.x.abs(), n.y.abs(), n.z.abs());
    if z >= x && z >= y {
        2
    } else if x >= y {
        0
    } else {
        1
    }
}

impl RayScene {
    pub fn from_house(house: &House) -> RayScene {
        RayScene::build(house, &house.object_transforms())
    }

    /// `transforms[i]` poses `house.objects[i]`.
    pub fn build(house: &House, transforms: &[Transform]) -> RayScene {
        assert_eq!(transforms.len(), house.objects.len(), "one transform per object");
        let mut tris = Vec::new();
        let mut push = |a: Vec3, b: Vec3, c: Vec3, tag: SurfaceTag, layer: u16, local_normal: Option<Vec3>| {
            let e1 = b - a;
            let e2 = c - a;
            let n = e1.cross(e2);
            if n.length_squared() <= 0.0 {
                return;
            }
            let normal = n.normalized();
            tris.push(Tri {
                v0: a,
                e1,
                e2,
                normal,
                tag,
                layer,
                uv_axis: dominant_axis(local_normal.unwrap_or(normal)),
            });
        };
        for (ri, room) in house.rooms.iter().enumerate() {
            for (kind, [a, b, c]) in room.structure_triangles() {
                push(a, b, c, SurfaceTag::Structure { room: ri, kind }, 0, None);
            }
        }
        for (oi, obj) in house.objects.iter().enumerate() {
            let world = obj.world_triangles_at(&transforms[oi]);
            for (ti, [a, b, c]) in world.into_iter().enumerate() {
                let [la, lb, lc] = obj.mesh.triangle(ti);
                let ln = (lb - la).cross(lc - la);
                push(a, b, c, SurfaceTag::Object(oi), obj.mesh.triangle_material[ti], Some(ln));
            }
        }

        let mut bounds = house.bounds;
        for t in &tris {
            bounds.include(t.v0);
            bounds.include(t.v0 + t.e1);
            bounds.include(t.v0 + t.e2);
        }
        if !bounds.is_valid() {
            bounds = Aabb::new(Vec3::ZERO, Vec3::ZERO);
        }
        let bounds = bounds.expanded(1e-3);
        let size = bounds.size();
        let dims = [0, 1, 2].map(|a| ((size[a] / CELL_SIZE).ceil() as usize).clamp(1, 512));

        let n_cells = dims[0] * dims[1] * dims[2];
        let mut counts = vec![0u32; n_cells + 1];
        let ranges: Vec<[[usize; 2]; 3]> = tris
            .iter()
            .map(|t| {
                let b = Aabb::from_points([t.v0, t.v0 + t.e1, t.v0 + t.e2]);
                [0, 1, 2].map(|a| {
                    let lo = ((b.min[a] - bounds.min[a]) / CELL_SIZE).floor() as isize;
                    let hi = ((b.max[a] - bounds.min[a]) / CELL_SIZE).floor() as isize;
                    let clamp = |v: isize| v.clamp(0, dims[a] as isize - 1) as usize;
                    [clamp(lo), clamp(hi)]
                })
            })
            .collect();
        let cell_index = |x: usize, y: usize, z: usize| (z * dims[1] + y) * dims[0] + x;
        for r in &ranges {
            for z in r[2][0]..=r[2][1] {
                for y in r[1][0]..=r[1][1] {
                    for x in r[0][0]..=r[0][1] {
                        counts[cell_index(x, y, z) + 1] += 1;
                    }
                }
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut cell_items = vec![0u32; *counts.last().unwrap() as usize];
        for (ti, r) in ranges.iter().enumerate() {
            for z in r[2][0]..=r[2][1] {
                for y in r[1][0]..=r[1][1] {
                    for x in r[0][0]..=r[0][1] {
                        let c = cell_index(x, y, z);
                        cell_items[fill[c] as usize] = ti as u32;
                        fill[c] += 1;
                    }
                }
            }
        }
        RayScene {
            tris,
            transforms: transforms.to_vec(),
            bounds,
            dims,
            cell_start: counts,
            cell_items,
        }
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len()
    }

    pub fn tag(&self, triangle: usize) -> SurfaceTag {
        self.tris[triangle].tag
    }

    /// Unit geometric normal of a triangle (winding order, not flipped).
    pub fn normal(&self, triangle: usize) -> Vec3 {
        self.tris[triangle].normal
    }

    #[inline]
    fn intersect(tri: &Tri, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let p = dir.cross(tri.e2);
        let det = tri.e1.dot(p);
        if det.abs() < 1e-300 {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - tri.v0;
        let u = s.dot(p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(tri.e1);
        let v = dir.dot(q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = tri.e2.dot(q) * inv;
        (t > t_min && t < t_max).then_some(t)
    }

    /// Nearest hit with `t_min < t < t_max`. Ties between coincident triangles go to the
    /// lower triangle index.
    pub fn cast(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<RawHit> {
        let mut best: Option<RawHit> = None;
        self.walk(origin, dir, t_min, t_max, |cell_items, limit| {
            for &ti in cell_items {
                let ti = ti as usize;
                if let Some(t) = Self::intersect(&self.tris[ti], origin, dir, t_min, t_max) {
                    let better = match best {
                        None => true,
                        Some(b) => t < b.t || (t == b.t && ti < b.triangle),
                    };
                    if better {
                        best = Some(RawHit { t, triangle: ti });
                    }
                }
            }
            best.is_some_and(|b| b.t <= limit)
        });
        best
    }

    /// True when anything lies strictly between `t_min` and `t_max` along the ray.
    pub fn occluded(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> bool {
        let mut hit = false;
        self.walk(origin, dir, t_min, t_max, |cell_items, _| {
            hit = cell_items
                .iter()
                .any(|&ti| Self::intersect(&self.tris[ti as usize], origin, dir, t_min, t_max).is_some());
            hit
        });
        hit
    }

    /// Whether the open segment from `a` to `b`, shortened by `eps` at both ends, is free.
    pub fn segment_clear(&self, a: Vec3, b: Vec3, eps: f64) -> bool {
        let d = b - a;
        let len = d.length();
        if len <= 2.0 * eps {
            return true;
        }
        !self.occluded(a, d / len, eps, len - eps)
    }

    /// 3D DDA over grid cells. `visit(items, cell_exit_t)` returns true to stop.
    fn walk<F: FnMut(&[u32], f64) -> bool>(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64, mut visit: F) {
        if self.tris.is_empty() {
            return;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let Some((t0, t1)) = self.bounds.ray_interval(origin, inv, t_min, t_max) else {
            return;
        };
        let p = origin + dir * t0;
        let mut cell = [0usize; 3];
        let mut step = [0isize; 3];
        let mut t_next = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            let rel = (p[a] - self.bounds.min[a]) / CELL_SIZE;
            let c = (rel.floor() as isize).clamp(0, self.dims[a] as isize - 1);
            cell[a] = c as usize;
            if dir[a] > 0.0 {
                step[a] = 1;
                let edge = self.bounds.min[a] + (c + 1) as f64 * CELL_SIZE;
                t_next[a] = (edge - origin[a]) / dir[a];
                t_delta[a] = CELL_SIZE / dir[a];
            } else if dir[a] < 0.0 {
                step[a] = -1;
                let edge = self.bounds.min[a] + c as f64 * CELL_SIZE;
                t_next[a] = (edge - origin[a]) / dir[a];
                t_delta[a] = -CELL_SIZE / dir[a];
            }
        }
        loop {
            let c = (cell[2] * self.dims[1] + cell[1]) * self.dims[0] + cell[0];
            let items = &self.cell_items[self.cell_start[c] as usize..self.cell_start[c + 1] as usize];
            let axis = if t_next[0] <= t_next[1] && t_next[0] <= t_next[2] {
                0
            } else if t_next[1] <= t_next[2] {
                1
            } else {
                2
            };
            let exit = t_next[axis];
            if visit(items, exit) {
                return;
            }
            if exit > t1 {
                return;
            }
            let nc = cell[axis] as isize + step[axis];
            if nc < 0 || nc >= self.dims[axis] as isize {
                return;
            }
            cell[axis] = nc as usize;
            t_next[axis] += t_delta[axis];
        }
    }
}
