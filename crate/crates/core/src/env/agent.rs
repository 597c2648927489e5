use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acoustics::ListenerRig;
use crate::geom::{point_segment_distance, Vec3};
use crate::physics::{AgentPose, PhysicsWorld};
use crate::render::Camera;
use crate::scene::House;

use super::config::{AgentSettings, EnvConfig};
use super::obs::Pose;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: String,
    /// Centre of the capsule base, on the floor.
    pub position: Vec3,
    pub yaw: f64,
    pub pitch: f64,
    pub held: Option<String>,
    pub collided_last_step: bool,
}

impl AgentState {
    pub fn eye(&self, s: &AgentSettings) -> Vec3 {
        self.position + Vec3::Z * s.eye_height
    }

    pub fn camera(&self, cfg: &EnvConfig) -> Camera {
        let mut c = Camera::new(self.eye(&cfg.agent), self.yaw, self.pitch).with_size(cfg.width, cfg.height);
        c.vertical_fov = cfg.fov;
        c
    }

    pub fn listener(&self, s: &AgentSettings) -> ListenerRig {
        ListenerRig::new(self.eye(s), self.yaw)
    }

    pub fn physics_pose(&self, s: &AgentSettings) -> AgentPose {
        AgentPose {
            eye: self.eye(s),
            yaw: self.yaw,
            velocity: Vec3::ZERO,
        }
    }

    pub fn forward(&self) -> Vec3 {
        Vec3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }

    pub fn left(&self) -> Vec3 {
        Vec3::new(-self.yaw.sin(), self.yaw.cos(), 0.0)
    }

    pub fn pose(&self) -> Pose {
        Pose {
            position: self.position.to_array(),
            yaw: self.yaw,
            pitch: self.pitch,
        }
    }
}

/// Distance from `p` to the closest point of the rectangle `[min, max]`, zero inside.
fn point_rect_distance(p: [f64; 2], min: [f64; 2], max: [f64; 2]) -> f64 {
    let dx = (min[0] - p[0]).max(0.0).max(p[0] - max[0]);
    let dy = (min[1] - p[1]).max(0.0).max(p[1] - max[1]);
    dx.hypot(dy)
}

/// Whether the capsule base centre `p` lies on some room's floor.
pub fn on_floor(house: &House, p: [f64; 2]) -> bool {
    house.rooms.iter().any(|r| {
        r.contains_xy(p) || (0..r.floor_polygon.len()).any(|e| {
            let (a, b) = r.edge(e);
            point_segment_distance(p, a, b) <= 1e-9
        })
    })
}

/// Smallest horizontal gap between a capsule at `feet` and the static geometry (walls and
/// static objects) it vertically overlaps. Negative values mean interpenetration.
pub fn static_clearance(world: &PhysicsWorld, s: &AgentSettings, feet: Vec3) -> f64 {
    let (z0, z1) = (feet.z, feet.z + s.height);
    let p = feet.xy();
    let mut gap = f64::INFINITY;
    for w in &world.walls {
        if w.z1 > z0 && w.z0 < z1 {
            gap = gap.min(point_segment_distance(p, w.a, w.b) - s.radius);
        }
    }
    for c in &world.statics {
        let b = c.aabb;
        if b.max.z > z0 + s.step_height && b.min.z < z1 {
            gap = gap.min(point_rect_distance(p, [b.min.x, b.min.y], [b.max.x, b.max.y]) - s.radius);
        }
    }
    gap
}

/// Capsule placement test against walls, objects and other agents. Dynamic bodies listed in
/// `ignore` (those already touching the capsule before the move) do not block.
pub(crate) fn capsule_free(
    house: &House,
    world: &PhysicsWorld,
    s: &AgentSettings,
    feet: Vec3,
    others: &[Vec3],
    ignore: &[usize],
) -> bool {
    let p = feet.xy();
    if !on_floor(house, p) {
        return false;
    }
    let (z0, z1) = (feet.z, feet.z + s.height);
    for w in &world.walls {
        if w.z1 > z0 && w.z0 < z1 && point_segment_distance(p, w.a, w.b) < s.radius {
            return false;
        }
    }
    for (i, b) in world.bodies.iter().enumerate() {
        if b.held_by.is_some() || ignore.contains(&i) {
            continue;
        }
        let bb = b.aabb();
        if bb.max.z > z0 + s.step_height && bb.min.z < z1 && point_rect_distance(p, [bb.min.x, bb.min.y], [bb.max.x, bb.max.y]) < s.radius {
            return false;
        }
    }
    others.iter().all(|o| {
        let d = [o.x - p[0], o.y - p[1]];
        d[0].hypot(d[1]) >= 2.0 * s.radius || (o.z - feet.z).abs() >= s.height
    })
}

/// Dynamic bodies the capsule at `feet` currently overlaps.
pub(crate) fn touching_bodies(world: &PhysicsWorld, s: &AgentSettings, feet: Vec3) -> Vec<usize> {
    let p = feet.xy();
    let (z0, z1) = (feet.z, feet.z + s.height);
    world
        .bodies
        .iter()
        .enumerate()
        .filter(|(_, b)| b.dynamic && b.held_by.is_none())
        .filter(|(_, b)| {
            let bb = b.aabb();
            bb.max.z > z0 + s.step_height && bb.min.z < z1 && point_rect_distance(p, [bb.min.x, bb.min.y], [bb.max.x, bb.max.y]) < s.radius
        })
        .map(|(i, _)| i)
        .collect()
}

/// Samples a free capsule position with uniform yaw. Rooms not listed in `occupied` are
/// tried first; only if none of them yields a spot within `spawn_attempts` samples are all
/// rooms tried. Returns `(feet, yaw)`.
pub(crate) fn sample_spawn(
    house: &House,
    world: &PhysicsWorld,
    s: &AgentSettings,
    others: &[Vec3],
    occupied: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<(Vec3, f64)> {
    if house.rooms.is_empty() {
        return None;
    }
    let free: Vec<usize> = (0..house.rooms.len()).filter(|r| !occupied.contains(r)).collect();
    let all: Vec<usize> = (0..house.rooms.len()).collect();
    let phases: Vec<&[usize]> = if free.is_empty() || free.len() == all.len() {
        vec![&all]
    } else {
        vec![&free, &all]
    };
    for rooms in phases {
        for _ in 0..s.spawn_attempts {
            let room = &house.rooms[rooms[rng.gen_range(0..rooms.len())]];
            let b = room.aabb();
            let x = rng.gen_range(b.min.x..=b.max.x);
            let y = rng.gen_range(b.min.y..=b.max.y);
            let yaw = rng.gen_range(0.0..std::f64::consts::TAU);
            if !room.contains_xy([x, y]) {
                continue;
            }
            let feet = Vec3::new(x, y, room.floor_z);
            if capsule_free(house, world, s, feet, others, &[]) {
                return Some((feet, yaw));
            }
        }
    }
    None
}
