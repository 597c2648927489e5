use std::collections::{BTreeMap, HashMap, HashSet};

use crate::geom::{ray_triangle, Aabb, Vec3};
use crate::scene::House;

use super::{make_body, PhysicsConfig, PhysicsError, Representation, RigidBody};

const QUANT: f64 = 1e6;

/// A zero-thickness vertical wall rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSlab {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub z0: f64,
    pub z1: f64,
}

impl WallSlab {
    /// Smallest push `(direction, depth)` that separates `aabb` from the slab, testing the
    /// slab's normal, its edge direction and z.
    fn penetration(&self, aabb: &Aabb) -> Option<(Vec3, f64)> {
        self.penetration_from(aabb, None)
    }

    /// As [`Self::penetration`], but a box whose centre has crossed the slab plane since
    /// `from` is pushed back to the side of `from`.
    fn penetration_from(&self, aabb: &Aabb, from: Option<Vec3>) -> Option<(Vec3, f64)> {
        let (dx, dy) = (self.b[0] - self.a[0], self.b[1] - self.a[1]);
        let len = (dx * dx + dy * dy).sqrt();
        if len <= 0.0 {
            return None;
        }
        let t = Vec3::new(dx / len, dy / len, 0.0);
        let n = Vec3::new(t.y, -t.x, 0.0);
        let c = aabb.center();
        let h = aabb.half_extents();
        let rel = Vec3::new(c.x - self.a[0], c.y - self.a[1], 0.0);

        let rn = h.x * n.x.abs() + h.y * n.y.abs();
        let dn = rel.dot(n);
        let rt = h.x * t.x.abs() + h.y * t.y.abs();
        let s = rel.dot(t);
        let pen_t0 = s + rt;
        let pen_t1 = len - (s - rt);
        let pen_z0 = aabb.max.z - self.z0;
        let pen_z1 = self.z1 - aabb.min.z;
        if pen_t0 <= 0.0 || pen_t1 <= 0.0 || pen_z0 <= 0.0 || pen_z1 <= 0.0 {
            return None;
        }
        let was = from.map(|f| Vec3::new(f.x - self.a[0], f.y - self.a[1], 0.0).dot(n)).filter(|d| *d != 0.0);
        if let Some(d0) = was {
            if d0 * dn < 0.0 {
                // Crossed the plane within one step.
                return Some((n * d0.signum(), rn + dn.abs()));
            }
        }
        let pen_n = rn - dn.abs();
        if pen_n <= 0.0 {
            return None;
        }
        let side = if dn < 0.0 { -1.0 } else { 1.0 };
        let candidates = [
            (n * side, pen_n),
            (-t, pen_t0),
            (t, pen_t1),
            (-Vec3::Z, pen_z0),
            (Vec3::Z, pen_z1),
        ];
        candidates.into_iter().reduce(|best, c| if c.1 < best.1 { c } else { best })
    }
}

/// Immovable collider of a static object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticCollider {
    pub body: usize,
    pub aabb: Aabb,
}

/// Where an agent is looking from, for pick, drop and carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentPose {
    pub eye: Vec3,
    pub yaw: f64,
    pub velocity: Vec3,
}

impl AgentPose {
    pub fn forward(&self) -> Vec3 {
        Vec3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }

    pub fn left(&self) -> Vec3 {
        Vec3::new(-self.yaw.sin(), self.yaw.cos(), 0.0)
    }

    /// Agent-frame `[forward, left, up]` offset to world position.
    pub fn to_world(&self, offset: Vec3) -> Vec3 {
        self.eye + self.forward() * offset.x + self.left() * offset.y + Vec3::Z * offset.z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeldSlot {
    pub agent_id: String,
    pub object_id: Option<String>,
    pub hold_offset: Vec3,
}

/// Penetration of two overlapping boxes along the axis of least overlap, as
/// `(normal from a toward b, depth)`.
fn box_contact(a: &Aabb, b: &Aabb) -> Option<(Vec3, f64)> {
    let mut best: Option<(Vec3, f64)> = None;
    for axis in [2, 0, 1] {
        let o = a.max[axis].min(b.max[axis]) - a.min[axis].max(b.min[axis]);
        if o <= 0.0 {
            return None;
        }
        if best.is_none_or(|(_, d)| o < d) {
            let ca = a.min[axis] + a.max[axis];
            let cb = b.min[axis] + b.max[axis];
            let unit = [Vec3::X, Vec3::Y, Vec3::Z][axis];
            best = Some((if cb < ca { -unit } else { unit }, o));
        }
    }
    best
}

/// Removes approaching normal velocity with restitution and damps the tangential part by
/// `friction` times the normal change.
fn respond(v: Vec3, n: Vec3, restitution: f64, friction: f64) -> Vec3 {
    let vn = v.dot(n);
    if vn >= 0.0 {
        return v;
    }
    let dvn = -(1.0 + restitution) * vn;
    let mut out = v + n * dvn;
    let vt = out - n * out.dot(n);
    let st = vt.length();
    let cut = friction * dvn;
    if st <= cut {
        out = out - vt;
    } else if st > 0.0 {
        out = out - vt * (cut / st);
    }
    out
}

#[derive(Debug, Clone)]
pub struct PhysicsWorld {
    pub config: PhysicsConfig,
    /// One body per house object, in object order.
    pub bodies: Vec<RigidBody>,
    pub statics: Vec<StaticCollider>,
    pub walls: Vec<WallSlab>,
    /// Height of the ground plane; absent for houses without rooms.
    pub ground: Option<f64>,
    pub held: BTreeMap<String, HeldSlot>,
    steps: u64,
    index: HashMap<String, usize>,
    /// World triangles of static mesh bodies, for queries.
    static_meshes: Vec<(usize, Vec<[Vec3; 3]>)>,
}

impl PhysicsWorld {
    pub fn new(house: &House, config: PhysicsConfig) -> Result<PhysicsWorld, PhysicsError> {
        config.validate()?;
        let bodies: Vec<RigidBody> = house
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| make_body(o, i, config.representation, &house.materials))
            .collect();
        let statics = bodies
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.dynamic)
            .map(|(i, b)| StaticCollider { body: i, aabb: b.aabb() })
            .collect();
        let static_meshes = bodies
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.dynamic && b.representation == Representation::Mesh)
            .map(|(i, b)| (i, house.objects[i].world_triangles_at(&b.transform)))
            .collect();
        let mut walls = Vec::new();
        let mut seen = HashSet::new();
        for room in &house.rooms {
            for p in room.wall_panels() {
                let mut key: Vec<[i64; 3]> = p
                    .corners
                    .iter()
                    .map(|c| [c.x, c.y, c.z].map(|v| (v * QUANT).round() as i64))
                    .collect();
                key.sort_unstable();
                if seen.insert(key) {
                    let [a, b, c, _] = p.corners;
                    walls.push(WallSlab {
                        a: [a.x, a.y],
                        b: [b.x, b.y],
                        z0: a.z,
                        z1: c.z,
                    });
                }
            }
        }
        let ground = house.rooms.iter().map(|r| r.floor_z).reduce(f64::min);
        let index = bodies.iter().enumerate().map(|(i, b)| (b.object_id.clone(), i)).collect();
        Ok(PhysicsWorld {
            config,
            bodies,
            statics,
            walls,
            ground,
            held: BTreeMap::new(),
            steps: 0,
            index,
            static_meshes,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Simulated time, always `steps × dt`.
    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    pub fn body_index(&self, object_id: &str) -> Option<usize> {
        self.index.get(object_id).copied()
    }

    pub fn body(&self, object_id: &str) -> Option<&RigidBody> {
        self.body_index(object_id).map(|i| &self.bodies[i])
    }

    pub fn transforms(&self) -> Vec<crate::geom::Transform> {
        self.bodies.iter().map(|b| b.transform).collect()
    }

    fn active(&self, i: usize) -> bool {
        let b = &self.bodies[i];
        b.dynamic && !b.asleep && b.held_by.is_none()
    }

    /// Pushes body `i` out of the ground, walls and static objects. Returns the deepest
    /// penetration found.
    fn resolve_static(&mut self, i: usize, from: Vec3) -> f64 {
        let (e, mu) = (self.config.restitution, self.config.friction);
        let mut worst = 0.0f64;
        let mut apply = |b: &mut RigidBody, n: Vec3, depth: f64| {
            b.set_center(b.center() + n * depth);
            b.velocity = respond(b.velocity, n, e, mu);
            worst = worst.max(depth);
        };
        if let Some(g) = self.ground {
            let depth = g - self.bodies[i].aabb().min.z;
            if depth > 0.0 {
                apply(&mut self.bodies[i], Vec3::Z, depth);
            }
        }
        for w in &self.walls {
            if let Some((n, depth)) = w.penetration_from(&self.bodies[i].aabb(), Some(from)) {
                apply(&mut self.bodies[i], n, depth);
            }
        }
        for s in &self.statics {
            if let Some((n, depth)) = box_contact(&s.aabb, &self.bodies[i].aabb()) {
                apply(&mut self.bodies[i], n, depth);
            }
        }
        worst
    }

    /// Separates two dynamic bodies. Sleeping bodies act as immovable.
    fn resolve_pair(&mut self, i: usize, j: usize) -> f64 {
        let Some((n, depth)) = box_contact(&self.bodies[i].aabb(), &self.bodies[j].aabb()) else {
            return 0.0;
        };
        let wi = if self.active(i) { self.bodies[i].inv_mass() } else { 0.0 };
        let wj = if self.active(j) { self.bodies[j].inv_mass() } else { 0.0 };
        let w = wi + wj;
        if w == 0.0 {
            return 0.0;
        }
        let (bi, bj) = {
            let (lo, hi) = self.bodies.split_at_mut(j);
            (&mut lo[i], &mut hi[0])
        };
        bi.set_center(bi.center() - n * (depth * wi / w));
        bj.set_center(bj.center() + n * (depth * wj / w));
        let rel = bj.velocity - bi.velocity;
        let vn = rel.dot(n);
        if vn < 0.0 {
            let jn = -(1.0 + self.config.restitution) * vn / w;
            let mut impulse = n * jn;
            let rel_after = rel + n * (jn * w);
            let vt = rel_after - n * rel_after.dot(n);
            let st = vt.length();
            if st > 0.0 {
                let jt = (st / w).min(self.config.friction * jn);
                impulse = impulse + vt * (-jt / st);
            }
            bi.velocity = bi.velocity - impulse * wi;
            bj.velocity = bj.velocity + impulse * wj;
        }
        depth
    }

    /// Advances the world by one `dt`.
    pub fn step(&mut self) {
        self.steps += 1;
        let dt = self.config.dt;
        let g = Vec3::from(self.config.gravity);
        let active: Vec<usize> = (0..self.bodies.len()).filter(|&i| self.active(i)).collect();
        let start: Vec<Vec3> = self.bodies.iter().map(|b| b.center()).collect();
        for &i in &active {
            let b = &mut self.bodies[i];
            b.velocity = b.velocity + g * dt;
            b.set_center(b.center() + b.velocity * dt);
        }
        let movable: Vec<usize> = (0..self.bodies.len())
            .filter(|&i| self.bodies[i].dynamic && self.bodies[i].held_by.is_none())
            .collect();
        for _ in 0..self.config.solver_iterations {
            let mut touched = false;
            for &i in &active {
                touched |= self.resolve_static(i, start[i]) > 0.0;
            }
            for (k, &i) in movable.iter().enumerate() {
                for &j in &movable[k + 1..] {
                    if self.active(i) || self.active(j) {
                        touched |= self.resolve_pair(i, j) > 0.0;
                    }
                }
            }
            if !touched {
                break;
            }
        }
        for &i in &active {
            self.resolve_static(i, start[i]);
        }
        let (speed, still) = (self.config.sleep_speed, self.config.sleep_time);
        let mut movers = Vec::new();
        for &i in &active {
            let b = &mut self.bodies[i];
            if b.velocity.length() < speed {
                b.still_time += dt;
                if b.still_time >= still {
                    b.asleep = true;
                    b.velocity = Vec3::ZERO;
                }
            } else {
                b.still_time = 0.0;
                movers.push(i);
            }
        }
        for i in movers {
            self.wake_touching(i);
        }
    }

    /// Wakes sleeping bodies whose boxes touch body `i`.
    fn wake_touching(&mut self, i: usize) {
        let zone = self.bodies[i].aabb().expanded(self.config.slop);
        for (k, b) in self.bodies.iter_mut().enumerate() {
            if k != i && b.asleep && b.aabb().overlaps(&zone) {
                b.asleep = false;
                b.still_time = 0.0;
            }
        }
    }

    fn wake(&mut self, i: usize) {
        let b = &mut self.bodies[i];
        b.asleep = false;
        b.still_time = 0.0;
    }

    fn dynamic_index(&self, object_id: &str) -> Result<usize, PhysicsError> {
        let i = self
            .body_index(object_id)
            .ok_or_else(|| PhysicsError::UnknownObject(object_id.into()))?;
        if !self.bodies[i].dynamic {
            return Err(PhysicsError::StaticObject(object_id.into()));
        }
        Ok(i)
    }

    /// `velocity += impulse / mass`, waking the body.
    pub fn apply_push(&mut self, object_id: &str, impulse: Vec3) -> Result<(), PhysicsError> {
        let i = self.dynamic_index(object_id)?;
        if let Some(agent) = &self.bodies[i].held_by {
            return Err(PhysicsError::AlreadyHeld {
                object: object_id.into(),
                agent: agent.clone(),
            });
        }
        if impulse == Vec3::ZERO {
            return Ok(());
        }
        let b = &mut self.bodies[i];
        b.velocity = b.velocity + impulse / b.mass;
        self.wake(i);
        Ok(())
    }

    fn slot(&mut self, agent_id: &str) -> &mut HeldSlot {
        let offset = Vec3::from(self.config.hold_offset);
        self.held.entry(agent_id.to_owned()).or_insert_with(|| HeldSlot {
            agent_id: agent_id.to_owned(),
            object_id: None,
            hold_offset: offset,
        })
    }

    pub fn held_by(&self, agent_id: &str) -> Option<&str> {
        self.held.get(agent_id).and_then(|s| s.object_id.as_deref())
    }

    pub fn pick(&mut self, agent_id: &str, pose: &AgentPose, object_id: &str) -> Result<(), PhysicsError> {
        let i = self.dynamic_index(object_id)?;
        if self.held_by(agent_id).is_some() {
            return Err(PhysicsError::HandsFull(agent_id.into()));
        }
        if let Some(other) = &self.bodies[i].held_by {
            return Err(PhysicsError::AlreadyHeld {
                object: object_id.into(),
                agent: other.clone(),
            });
        }
        let limit = self.config.carry_limit;
        if self.bodies[i].mass > limit {
            return Err(PhysicsError::TooHeavy {
                mass: self.bodies[i].mass,
                limit,
            });
        }
        // Reach is measured in the floor plane so objects at any height are treated alike.
        let c = self.bodies[i].center();
        let d = Vec3::new(c.x - pose.eye.x, c.y - pose.eye.y, 0.0);
        let distance = d.length();
        let angle_deg = if distance > 1e-12 {
            (d.dot(pose.forward()) / distance).clamp(-1.0, 1.0).acos().to_degrees()
        } else {
            0.0
        };
        let (reach, max_angle_deg) = (self.config.reach, self.config.reach_angle_deg);
        if distance > reach || angle_deg > max_angle_deg {
            return Err(PhysicsError::OutOfReach {
                distance,
                angle_deg,
                reach,
                max_angle_deg,
            });
        }
        self.wake_touching(i);
        let slot = self.slot(agent_id);
        slot.object_id = Some(object_id.to_owned());
        let at = pose.to_world(slot.hold_offset);
        let b = &mut self.bodies[i];
        b.held_by = Some(agent_id.to_owned());
        b.velocity = Vec3::ZERO;
        b.asleep = false;
        b.still_time = 0.0;
        b.set_center(at);
        Ok(())
    }

    /// Moves a held object along with its agent.
    pub fn carry(&mut self, agent_id: &str, pose: &AgentPose) {
        let Some(slot) = self.held.get(agent_id) else { return };
        let Some(i) = slot.object_id.as_deref().and_then(|id| self.body_index(id)) else { return };
        let at = pose.to_world(slot.hold_offset);
        self.bodies[i].set_center(at);
    }

    /// Releases the held object at the hold position with the agent's velocity. Returns its id.
    pub fn drop_held(&mut self, agent_id: &str, pose: &AgentPose) -> Result<String, PhysicsError> {
        let slot = self.held.get_mut(agent_id);
        let Some(id) = slot.and_then(|s| s.object_id.take()) else {
            return Err(PhysicsError::NothingHeld(agent_id.into()));
        };
        let offset = self.held[agent_id].hold_offset;
        let i = self.index[&id];
        let b = &mut self.bodies[i];
        b.held_by = None;
        b.set_center(pose.to_world(offset));
        b.velocity = pose.velocity;
        self.wake(i);
        Ok(id)
    }

    /// Whether `aabb` overlaps a wall or any body not carried by an agent.
    pub fn box_blocked(&self, aabb: &Aabb) -> bool {
        self.walls.iter().any(|w| w.penetration(aabb).is_some())
            || self.bodies.iter().any(|b| b.held_by.is_none() && b.aabb().overlaps(aabb))
    }

    /// First body along a ray as `(t, body index)`. Static mesh bodies are hit against their
    /// triangles, all others against their boxes.
    pub fn raycast(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<(f64, usize)> {
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(f64, usize)> = None;
        let mut consider = |t: f64, i: usize| {
            if t <= t_max && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, i));
            }
        };
        let meshes: HashMap<usize, &Vec<[Vec3; 3]>> = self.static_meshes.iter().map(|(i, t)| (*i, t)).collect();
        for (i, b) in self.bodies.iter().enumerate() {
            if b.held_by.is_some() {
                continue;
            }
            match meshes.get(&i) {
                Some(tris) => {
                    for &[a, bb, c] in tris.iter() {
                        if let Some((t, _, _)) = ray_triangle(origin, dir, a, bb, c, 0.0) {
                            consider(t, i);
                        }
                    }
                }
                None => {
                    if let Some((t0, _)) = b.aabb().ray_interval(origin, inv, 0.0, t_max) {
                        consider(t0, i);
                    }
                }
            }
        }
        best
    }

    /// Deepest overlap among pairs of awake dynamic bodies.
    pub fn max_penetration(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.bodies.len() {
            for j in i + 1..self.bodies.len() {
                if self.active(i) && self.active(j) {
                    if let Some((_, d)) = box_contact(&self.bodies[i].aabb(), &self.bodies[j].aabb()) {
                        worst = worst.max(d);
                    }
                }
            }
        }
        worst
    }
}

/// Value-style stepping: returns the world advanced by one `dt`.
pub fn step_world(mut world: PhysicsWorld) -> PhysicsWorld {
    world.step();
    world
}
