use std::collections::HashSet;

use crate::geom::{polygon_is_simple, polygon_signed_area};

use super::{object_aabb, House, SceneError, SignalSpec, Texture};

const EPS: f64 = 1e-9;

fn fail(path: impl Into<String>, message: impl Into<String>) -> Result<(), SceneError> {
    Err(SceneError::validation(path, message))
}

/// Checks every structural invariant of a house; the error names the offending entity.
pub fn validate_house(house: &House) -> Result<(), SceneError> {
    if !house.bounds.is_valid() || !house.bounds.min.is_finite() || !house.bounds.max.is_finite() {
        return fail("meta.bounds", "bounds must be finite with min <= max");
    }

    let mut room_ids = HashSet::new();
    for (i, r) in house.rooms.iter().enumerate() {
        let path = format!("rooms[{i}]");
        if !room_ids.insert(r.id.as_str()) {
            return fail(format!("{path}.id"), format!("duplicate room id {:?}", r.id));
        }
        if !r.kind.is_valid() {
            return fail(format!("{path}.kind"), "room kind outside taxonomy");
        }
        if house.materials.get(r.wall_material).is_none() || house.materials.get(r.floor_material).is_none() {
            return fail(format!("{path}.wall_material"), "material outside table");
        }
        if r.floor_polygon.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return fail(format!("{path}.floor_polygon"), "non-finite vertex");
        }
        if !polygon_is_simple(&r.floor_polygon) {
            return fail(format!("{path}.floor_polygon"), "polygon must be simple with at least 3 vertices");
        }
        if polygon_signed_area(&r.floor_polygon) <= 0.0 {
            return fail(format!("{path}.floor_polygon"), "polygon must be counter-clockwise with positive area");
        }
        if !(r.wall_height > 0.0 && r.wall_height.is_finite()) || !r.floor_z.is_finite() {
            return fail(format!("{path}.wall_height"), "wall height must be positive");
        }
        for (k, o) in r.openings.iter().enumerate() {
            let op = format!("{path}.openings[{k}]");
            if o.edge >= r.floor_polygon.len() {
                return fail(format!("{op}.edge"), "edge index out of range");
            }
            let len = r.edge_length(o.edge);
            let ok = o.offset >= 0.0
                && o.width > 0.0
                && o.offset + o.width <= len + EPS
                && o.height > 0.0
                && o.height <= r.wall_height + EPS;
            if !ok {
                return fail(op, "opening must fit inside its wall");
            }
        }
        if !house.bounds.contains(&r.aabb(), EPS) {
            return fail(format!("{path}"), "room extends outside house bounds");
        }
    }

    let mut object_ids = HashSet::new();
    for (i, o) in house.objects.iter().enumerate() {
        let path = format!("objects[{i}]");
        if !object_ids.insert(o.id.as_str()) {
            return fail(format!("{path}.id"), format!("duplicate object id {:?}", o.id));
        }
        if !room_ids.contains(o.room_id.as_str()) {
            return fail(format!("{path}.room_id"), format!("unknown room {:?}", o.room_id));
        }
        if !o.category.is_valid() {
            return fail(format!("{path}.category"), "category outside taxonomy");
        }
        if !o.fine_category.is_valid() {
            return fail(format!("{path}.fine_category"), "fine category outside taxonomy");
        }
        if !o.transform.is_finite() {
            return fail(format!("{path}.transform"), "non-finite transform");
        }
        if o.material_layers.is_empty() {
            return fail(format!("{path}.material_layers"), "at least one layer required");
        }
        for (k, l) in o.material_layers.iter().enumerate() {
            if house.materials.get(l.material).is_none() {
                return fail(format!("{path}.material_layers[{k}].material"), "material outside table");
            }
            if let Texture::Grid { width, height, texels } = &l.texture {
                if *width == 0 || *height == 0 || texels.len() != width * height {
                    return fail(
                        format!("{path}.material_layers[{k}].texture"),
                        "grid texture needs width*height texels",
                    );
                }
            }
        }
        let m = &o.mesh;
        let mp = format!("{path}.mesh");
        if m.vertices.iter().any(|v| !v.is_finite()) {
            return fail(format!("{mp}.vertices"), "non-finite vertex");
        }
        if m.triangles.len() < 4 {
            return fail(format!("{mp}.triangles"), "mesh needs at least 4 triangles");
        }
        if m.triangle_material.len() != m.triangles.len() {
            return fail(format!("{mp}.layers"), "one layer index per triangle required");
        }
        for (t, tri) in m.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v as usize >= m.vertices.len()) {
                return fail(format!("{mp}.triangles[{t}]"), "vertex index out of range");
            }
            if m.triangle_area(t) <= 1e-12 {
                return fail(format!("{mp}.triangles[{t}]"), "degenerate triangle");
            }
            if m.triangle_material[t] as usize >= o.material_layers.len() {
                return fail(format!("{mp}.layers[{t}]"), "layer index out of range");
            }
        }
        if !house.bounds.contains(&object_aabb(o), EPS) {
            return fail(path, "object extends outside house bounds");
        }
    }

    for (i, l) in house.lights.iter().enumerate() {
        if !l.position.is_finite() || !(l.intensity >= 0.0 && l.intensity.is_finite()) {
            return fail(format!("lights[{i}]"), "light needs a finite position and non-negative intensity");
        }
    }

    let mut source_ids = HashSet::new();
    for (i, s) in house.sound_sources.iter().enumerate() {
        let path = format!("sound_sources[{i}]");
        if !source_ids.insert(s.id.as_str()) {
            return fail(format!("{path}.id"), format!("duplicate sound source id {:?}", s.id));
        }
        if !(s.reference_gain >= 0.0 && s.reference_gain.is_finite()) {
            return fail(format!("{path}.reference_gain"), "reference gain must be non-negative");
        }
        if !house.bounds.contains_point(s.position, EPS) {
            return fail(format!("{path}.position"), "source outside house bounds");
        }
        if let SignalSpec::Sine { frequency } = s.signal {
            if !(frequency > 0.0 && frequency.is_finite()) {
                return fail(format!("{path}.signal.frequency"), "frequency must be positive");
            }
        }
    }
    Ok(())
}
