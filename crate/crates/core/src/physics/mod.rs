//! Rigid-body dynamics over a house's objects: gravity, box contacts against the floor, walls
//! and static objects, and agent interaction (push, pick, drop).
//!
//! Dynamic bodies translate only; their orientation stays at the authored pose.

mod world;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Aabb, Transform, Vec3};
use crate::scene::{MaterialTable, SceneObject};
use crate::semantics::{dominant_material, object_volume};

pub use world::{step_world, AgentPose, HeldSlot, PhysicsWorld, StaticCollider, WallSlab};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("unknown object {0:?}")]
    UnknownObject(String),
    #[error("object {0:?} is static")]
    StaticObject(String),
    #[error("object is {distance:.2} m / {angle_deg:.0} deg away; reach is {reach} m within {max_angle_deg} deg")]
    OutOfReach { distance: f64, angle_deg: f64, reach: f64, max_angle_deg: f64 },
    #[error("agent {0:?} is already holding an object")]
    HandsFull(String),
    #[error("object weighs {mass:.1} kg, limit is {limit} kg")]
    TooHeavy { mass: f64, limit: f64 },
    #[error("agent {0:?} holds nothing")]
    NothingHeld(String),
    #[error("object {object:?} is held by {agent:?}")]
    AlreadyHeld { object: String, agent: String },
    #[error("invalid physics config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Box,
    Mesh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub dt: f64,
    pub gravity: [f64; 3],
    pub restitution: f64,
    pub friction: f64,
    /// Speed (m/s) under which a body counts as still.
    pub sleep_speed: f64,
    /// Seconds a body must stay still before sleeping.
    pub sleep_time: f64,
    pub reach: f64,
    /// Half-angle of the pick cone around the facing direction, in degrees.
    pub reach_angle_deg: f64,
    pub carry_limit: f64,
    /// Held object centre in the agent frame: forward, left, up from the eye.
    pub hold_offset: [f64; 3],
    pub slop: f64,
    pub solver_iterations: usize,
    pub representation: Representation,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            dt: 1.0 / 120.0,
            gravity: [0.0, 0.0, -9.81],
            restitution: 0.0,
            friction: 0.5,
            sleep_speed: 0.01,
            sleep_time: 0.5,
            reach: 1.5,
            reach_angle_deg: 60.0,
            carry_limit: 30.0,
            hold_offset: [0.5, 0.0, -0.2],
            slop: 1e-3,
            solver_iterations: 8,
            representation: Representation::Box,
        }
    }
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |m: &str| Err(PhysicsError::Config(m.into()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return bad("gravity must be finite");
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return bad("restitution must be in [0, 1]");
        }
        if !(self.friction.is_finite() && self.friction >= 0.0) {
            return bad("friction must be non-negative");
        }
        if !(self.reach.is_finite() && self.reach > 0.0) {
            return bad("reach must be positive");
        }
        if !(self.reach_angle_deg > 0.0 && self.reach_angle_deg <= 180.0) {
            return bad("reach angle must be in (0, 180]");
        }
        if !(self.sleep_speed >= 0.0 && self.sleep_time >= 0.0 && self.carry_limit > 0.0 && self.slop > 0.0) {
            return bad("thresholds must be non-negative");
        }
        if self.solver_iterations == 0 {
            return bad("solver_iterations must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidBody {
    pub object_id: String,
    pub object_index: usize,
    pub representation: Representation,
    /// Set when mesh representation was requested for an open mesh and a box was used instead.
    pub fallback: bool,
    /// Current object pose. Only the translation changes during simulation.
    pub transform: Transform,
    /// World-box centre minus translation, fixed for the body's orientation.
    pub center_offset: Vec3,
    pub half_extents: Vec3,
    pub velocity: Vec3,
    /// kg; infinite for static bodies.
    pub mass: f64,
    pub dynamic: bool,
    pub asleep: bool,
    pub still_time: f64,
    /// Agent carrying the body, if any.
    pub held_by: Option<String>,
}

impl RigidBody {
    pub fn inv_mass(&self) -> f64 {
        if self.dynamic {
            1.0 / self.mass
        } else {
            0.0
        }
    }

    pub fn center(&self) -> Vec3 {
        self.transform.translation + self.center_offset
    }

    pub fn set_center(&mut self, c: Vec3) {
        self.transform.translation = c - self.center_offset;
    }

    pub fn aabb(&self) -> Aabb {
        let c = self.center();
        Aabb::new(c - self.half_extents, c + self.half_extents)
    }

    pub fn momentum(&self) -> Vec3 {
        self.velocity * self.mass
    }
}

/// Body for `obj` at its authored pose. Mass is the dominant material's density times the
/// object volume.
pub fn make_body(obj: &SceneObject, index: usize, rep: Representation, materials: &MaterialTable) -> RigidBody {
    let fallback = rep == Representation::Mesh && !obj.mesh.watertight();
    if fallback {
        log::warn!("object {:?}: mesh body needs a closed mesh, using its box", obj.id);
    }
    let aabb = obj.aabb_at(&obj.transform);
    let density = materials.material(dominant_material(obj)).density;
    RigidBody {
        object_id: obj.id.clone(),
        object_index: index,
        representation: if fallback { Representation::Box } else { rep },
        fallback,
        transform: obj.transform,
        center_offset: aabb.center() - obj.transform.translation,
        half_extents: aabb.half_extents(),
        velocity: Vec3::ZERO,
        mass: if obj.dynamic { (density * object_volume(obj)).max(1e-6) } else { f64::INFINITY },
        dynamic: obj.dynamic,
        asleep: false,
        still_time: 0.0,
        held_by: None,
    }
}
