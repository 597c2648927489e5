//! Software ray caster producing RGB, depth and segmentation planes.
//!
//! One primary ray per pixel centre, row 0 at the top. Shading is direct Lambertian
//! lighting with one hard shadow ray per point light plus a constant ambient term.

mod grid;

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::Vec3;
use crate::scene::{FineCategoryId, House, PointLight, StructureKind, Texture};

pub use grid::{RawHit, RayScene, SurfaceTag, CELL_SIZE};

pub const BACKGROUND: [u8; 3] = [20, 20, 30];
pub const SEG_BACKGROUND: u16 = 0xFFFF;
pub const DEPTH_MISS: f32 = f32::INFINITY;
/// Instance plane value for pixels that show no object.
pub const NO_INSTANCE: u32 = u32::MAX;
pub const AMBIENT: f64 = 0.1;
pub const DEFAULT_WIDTH: u32 = 64;
pub const DEFAULT_HEIGHT: u32 = 64;
pub const DEFAULT_FOV: f64 = std::f64::consts::FRAC_PI_3;
/// Offset of shadow-ray origins along the surface normal.
const SHADOW_BIAS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("CameraOutOfBounds: camera at {0:?} lies outside the house bounds")]
    CameraOutOfBounds([f64; 3]),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub yaw: f64,
    pub pitch: f64,
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    pub fn new(position: Vec3, yaw: f64, pitch: f64) -> Camera {
        Camera {
            position,
            yaw,
            pitch,
            vertical_fov: DEFAULT_FOV,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
        }
    }

    pub fn with_size(mut self, width: u32, height: u32) -> Camera {
        self.width = width;
        self.height = height;
        self
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.vertical_fov > 0.0 && self.vertical_fov < std::f64::consts::PI) {
            return Err(RenderError::InvalidCamera("vertical_fov must lie in (0, pi)".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidCamera("width and height must be at least 1".into()));
        }
        if !self.position.is_finite() || !self.yaw.is_finite() || !self.pitch.is_finite() {
            return Err(RenderError::InvalidCamera("non-finite pose".into()));
        }
        Ok(())
    }

    /// (forward, right, up), orthonormal.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let (sy, cy) = self.yaw.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let forward = Vec3::new(cp * cy, cp * sy, sp);
        let right = Vec3::new(sy, -cy, 0.0);
        let up = right.cross(forward);
        (forward, right, up)
    }

    /// Unit direction through the centre of pixel `(x, y)`.
    pub fn ray_dir(&self, x: u32, y: u32) -> Vec3 {
        let (f, r, u) = self.basis();
        self.ray_dir_with(f, r, u, x, y)
    }

    fn ray_dir_with(&self, f: Vec3, r: Vec3, u: Vec3, x: u32, y: u32) -> Vec3 {
        let half = (self.vertical_fov * 0.5).tan();
        let aspect = self.width as f64 / self.height as f64;
        let sx = ((x as f64 + 0.5) / self.width as f64 * 2.0 - 1.0) * half * aspect;
        let sy = (1.0 - (y as f64 + 0.5) / self.height as f64 * 2.0) * half;
        (f + r * sx + u * sy).normalized()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundle {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB triples.
    pub rgb: Vec<u8>,
    /// Distance along each primary ray (m), `DEPTH_MISS` where nothing was hit.
    pub depth: Vec<f32>,
    /// Fine-category id per pixel, `SEG_BACKGROUND` where nothing was hit.
    pub segmentation: Vec<u16>,
    /// Object index per pixel, `NO_INSTANCE` for structure and background.
    pub instances: Vec<u32>,
}

impl FrameBundle {
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Indices of objects that own at least one pixel, ascending.
    pub fn visible_objects(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .instances
            .iter()
            .filter(|&&i| i != NO_INSTANCE)
            .map(|&i| i as usize)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub point: Vec3,
    /// Unit normal facing back along the ray.
    pub normal: Vec3,
    pub tag: SurfaceTag,
    pub layer: u16,
    pub triangle: usize,
}

impl Hit {
    pub fn fine_category(&self, house: &House) -> FineCategoryId {
        match self.tag {
            SurfaceTag::Object(i) => house.objects[i].fine_category,
            SurfaceTag::Structure { kind, .. } => structure_category(kind),
        }
    }
}

pub fn structure_category(kind: StructureKind) -> FineCategoryId {
    match kind {
        StructureKind::Wall => FineCategoryId::wall(),
        StructureKind::Floor => FineCategoryId::floor(),
        StructureKind::Ceiling => FineCategoryId::ceiling(),
    }
}

/// Nearest hit in a prepared scene.
pub fn cast_ray(scene: &RayScene, origin: Vec3, direction: Vec3) -> Option<Hit> {
    let raw = scene.cast(origin, direction, 0.0, f64::INFINITY)?;
    let tri = &scene.tris[raw.triangle];
    let normal = if tri.normal.dot(direction) > 0.0 { -tri.normal } else { tri.normal };
    Some(Hit {
        t: raw.t,
        point: origin + direction * raw.t,
        normal,
        tag: tri.tag,
        layer: tri.layer,
        triangle: raw.triangle,
    })
}

/// Nearest intersection with walls, floors, ceilings and objects at their scene poses.
pub fn ray_cast(house: &House, origin: Vec3, direction: Vec3) -> Option<Hit> {
    cast_ray(&RayScene::from_house(house), origin, direction)
}

/// Texture colour under a hit. Structure uses the material albedo; object textures are
/// projected onto the plane of the dominant local normal axis and tiled once per meter.
pub fn surface_albedo(house: &House, scene: &RayScene, hit: &Hit) -> [u8; 3] {
    match hit.tag {
        SurfaceTag::Structure { room, kind } => {
            let r = &house.rooms[room];
            let m = if kind == StructureKind::Floor { r.floor_material } else { r.wall_material };
            house.materials.material(m).albedo
        }
        SurfaceTag::Object(oi) => {
            let layer = &house.objects[oi].material_layers[hit.layer as usize];
            match &layer.texture {
                Texture::Solid(c) => *c,
                tex @ Texture::Grid { .. } => {
                    let p = scene.transforms[oi].inverse_apply(hit.point);
                    let (u, v) = match scene.tris[hit.triangle].uv_axis {
                        0 => (p.y, p.z),
                        1 => (p.x, p.z),
                        _ => (p.x, p.y),
                    };
                    tex.sample(u, v)
                }
            }
        }
    }
}

/// Ambient plus the shadowed Lambertian sum over `lights`, per channel in `[0, 1]`.
pub fn shade_albedo(scene: &RayScene, hit: &Hit, albedo: [f64; 3], lights: &[PointLight]) -> [f64; 3] {
    let mut c = [AMBIENT; 3];
    let origin = hit.point + hit.normal * SHADOW_BIAS;
    for light in lights {
        let to = light.position - hit.point;
        let d = to.length();
        if d <= 0.0 {
            continue;
        }
        let l = to / d;
        let cos = hit.normal.dot(l);
        if cos <= 0.0 {
            continue;
        }
        if scene.occluded(origin, l, 0.0, d - SHADOW_BIAS) {
            continue;
        }
        let k = cos * light.intensity / (1.0 + d * d);
        for ch in 0..3 {
            c[ch] += albedo[ch] * k;
        }
    }
    c.map(|v| v.clamp(0.0, 1.0))
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Shaded colour of a hit: ambient + visible lights, each channel rounded to a byte.
pub fn shade(hit: &Hit, lights: &[PointLight], house: &House, scene: &RayScene) -> [u8; 3] {
    let a = surface_albedo(house, scene, hit).map(|c| c as f64 / 255.0);
    shade_albedo(scene, hit, a, lights).map(to_byte)
}

/// Render against a freshly built scene at the house's own object poses.
pub fn render(house: &House, camera: &Camera, lights_enabled: bool) -> Result<FrameBundle, RenderError> {
    render_scene(house, &RayScene::from_house(house), camera, lights_enabled)
}

/// Render against a prepared scene. With `lights_enabled = false` pixels show flat albedo.
pub fn render_scene(
    house: &House,
    scene: &RayScene,
    camera: &Camera,
    lights_enabled: bool,
) -> Result<FrameBundle, RenderError> {
    camera.validate()?;
    if !house.bounds.contains_point(camera.position, 0.0) {
        return Err(RenderError::CameraOutOfBounds(camera.position.to_array()));
    }
    let (w, h) = (camera.width, camera.height);
    let (f, r, u) = camera.basis();
    let rows: Vec<(Vec<u8>, Vec<f32>, Vec<u16>, Vec<u32>)> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut rgb = Vec::with_capacity(w as usize * 3);
            let mut depth = Vec::with_capacity(w as usize);
            let mut seg = Vec::with_capacity(w as usize);
            let mut inst = Vec::with_capacity(w as usize);
            for x in 0..w {
                let dir = camera.ray_dir_with(f, r, u, x, y);
                match cast_ray(scene, camera.position, dir) {
                    None => {
                        rgb.extend_from_slice(&BACKGROUND);
                        depth.push(DEPTH_MISS);
                        seg.push(SEG_BACKGROUND);
                        inst.push(NO_INSTANCE);
                    }
                    Some(hit) => {
                        let albedo = surface_albedo(house, scene, &hit);
                        let c = if lights_enabled {
                            shade_albedo(scene, &hit, albedo.map(|c| c as f64 / 255.0), &house.lights).map(to_byte)
                        } else {
                            albedo
                        };
                        rgb.extend_from_slice(&c);
                        depth.push(hit.t as f32);
                        seg.push(hit.fine_category(house).0);
                        inst.push(match hit.tag {
                            SurfaceTag::Object(i) => i as u32,
                            SurfaceTag::Structure { .. } => NO_INSTANCE,
                        });
                    }
                }
            }
            (rgb, depth, seg, inst)
        })
        .collect();
    let n = w as usize * h as usize;
    let mut out = FrameBundle {
        width: w,
        height: h,
        rgb: Vec::with_capacity(n * 3),
        depth: Vec::with_capacity(n),
        segmentation: Vec::with_capacity(n),
        instances: Vec::with_capacity(n),
    };
    for (rgb, depth, seg, inst) in rows {
        out.rgb.extend(rgb);
        out.depth.extend(depth);
        out.segmentation.extend(seg);
        out.instances.extend(inst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Aabb;

    #[test]
    fn basis_is_orthonormal() {
        let c = Camera::new(Vec3::ZERO, 0.7, -0.3);
        let (f, r, u) = c.basis();
        for v in [f, r, u] {
            assert!((v.length() - 1.0).abs() < 1e-12);
        }
        assert!(f.dot(r).abs() < 1e-12 && f.dot(u).abs() < 1e-12 && r.dot(u).abs() < 1e-12);
        assert!(u.z > 0.0);
    }

    #[test]
    fn odd_resolution_centre_pixel_looks_forward() {
        let c = Camera::new(Vec3::ZERO, 0.3, 0.2).with_size(33, 21);
        let (f, _, _) = c.basis();
        assert!((c.ray_dir(16, 10) - f).length() < 1e-15);
    }

    #[test]
    fn row_zero_is_top_and_column_zero_is_left() {
        let c = Camera::new(Vec3::ZERO, 0.0, 0.0).with_size(9, 9);
        assert!(c.ray_dir(4, 0).z > 0.0);
        assert!(c.ray_dir(0, 4).y > 0.0);
    }

    #[test]
    fn invalid_cameras() {
        let mut c = Camera::new(Vec3::ZERO, 0.0, 0.0);
        c.vertical_fov = std::f64::consts::PI;
        assert!(matches!(c.validate(), Err(RenderError::InvalidCamera(_))));
        let c = Camera::new(Vec3::ZERO, 0.0, 0.0).with_size(0, 4);
        assert!(c.validate().is_err());
    }

    #[test]
    fn out_of_bounds_camera() {
        let h = House::void(Aabb::new(Vec3::splat(-1.0), Vec3::splat(1.0)));
        let c = Camera::new(Vec3::new(5.0, 0.0, 0.0), 0.0, 0.0);
        assert!(matches!(render(&h, &c, true), Err(RenderError::CameraOutOfBounds(_))));
    }
}
