//! Per-object annotations: named colours, dominant material, size class, location and a
//! templated description.

mod palette;
mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::Transform;
use crate::scene::{surface_area_by_layer, FineCategoryId, House, MaterialId, SceneObject};

pub use palette::{
    quantize_color, ColorPalette, Granularity, BASIC_PALETTE_SIZE, DETAILED_PALETTE_SIZE, INTERMEDIATE_PALETTE_SIZE,
};
pub use stats::{
    object_volume, percentile, size_class, CategoryStats, CategoryVolumeStats, SizeAssessment, SizeClass,
    MIN_STATS_SAMPLES, STATS_CORPUS_SEEDS,
};

/// Area per material layer, indexed by layer; layers with no triangles get 0.
pub fn layer_areas(obj: &SceneObject) -> Vec<f64> {
    let mut areas = vec![0.0; obj.material_layers.len()];
    for (layer, a) in surface_area_by_layer(&obj.mesh) {
        if let Some(slot) = areas.get_mut(layer as usize) {
            *slot = a;
        }
    }
    areas
}

/// Palette index of the modal texel colour, each layer's texels sharing that layer's area.
pub fn dominant_color_index(obj: &SceneObject, palette: &ColorPalette) -> usize {
    let mut weight = vec![0.0; palette.len()];
    for (layer, area) in obj.material_layers.iter().zip(layer_areas(obj)) {
        let texels = layer.texture.texels();
        let w = area / texels.len() as f64;
        for &t in texels {
            weight[palette.nearest(t)] += w;
        }
    }
    let mut best = 0;
    for (i, &w) in weight.iter().enumerate() {
        if w > weight[best] {
            best = i;
        }
    }
    best
}

pub fn dominant_color<'p>(obj: &SceneObject, palette: &'p ColorPalette) -> &'p str {
    palette.name(dominant_color_index(obj, palette))
}

/// Material of the layer with the largest surface area; ties go to the lower layer.
pub fn dominant_material(obj: &SceneObject) -> MaterialId {
    let areas = layer_areas(obj);
    let mut best = 0;
    for (i, &a) in areas.iter().enumerate() {
        if a > areas[best] {
            best = i;
        }
    }
    obj.material_layers[best].material
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorNames {
    pub basic: String,
    pub intermediate: String,
    pub detailed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticRecord {
    pub object_id: String,
    pub color: ColorNames,
    pub category: String,
    pub fine_category: String,
    pub material: String,
    pub size: SizeClass,
    pub size_fallback: bool,
    pub room_id: String,
    pub room_kind: String,
    /// World bounding-box centre (m).
    pub centroid: [f64; 3],
    pub description: String,
}

/// `a <size> <basic colour> <material> <fine category> in the <room kind>`, lowercase.
pub fn describe(record: &SemanticRecord) -> String {
    format!(
        "a {} {} {} {} in the {}",
        record.size.name(),
        record.color.basic,
        record.material,
        record.fine_category,
        record.room_kind
    )
    .to_lowercase()
}

/// Pose-independent annotations of every object in a house, computed once.
#[derive(Debug, Clone)]
pub struct SemanticIndex {
    base: Vec<SemanticRecord>,
}

impl SemanticIndex {
    pub fn new(house: &House, stats: &CategoryVolumeStats) -> SemanticIndex {
        let palettes = Granularity::ALL.map(ColorPalette::shipped);
        let base = house
            .objects
            .iter()
            .map(|o| {
                let [basic, intermediate, detailed] = palettes.map(|p| dominant_color(o, p).to_owned());
                let size = size_class(o, stats);
                SemanticRecord {
                    object_id: o.id.clone(),
                    color: ColorNames {
                        basic,
                        intermediate,
                        detailed,
                    },
                    category: o.category.name().to_owned(),
                    fine_category: o.fine_category.name().to_owned(),
                    material: house.materials.material(dominant_material(o)).name.clone(),
                    size: size.class,
                    size_fallback: size.fallback,
                    room_id: o.room_id.clone(),
                    room_kind: String::new(),
                    centroid: [0.0; 3],
                    description: String::new(),
                }
            })
            .collect();
        SemanticIndex { base }
    }

    /// Record for object `index` at `transform`. The room is the one containing the centroid,
    /// falling back to the object's assigned room.
    pub fn record(&self, house: &House, index: usize, transform: &Transform) -> SemanticRecord {
        let obj = &house.objects[index];
        let c = obj.aabb_at(transform).center();
        let room = house
            .room_containing(c)
            .or_else(|| house.room_index(&obj.room_id))
            .map(|r| &house.rooms[r]);
        let mut r = self.base[index].clone();
        if let Some(room) = room {
            r.room_id = room.id.clone();
            r.room_kind = room.kind.name().to_owned();
        }
        r.centroid = c.to_array();
        r.description = describe(&r);
        r
    }

    pub fn records(&self, house: &House, transforms: &[Transform]) -> Vec<SemanticRecord> {
        (0..house.objects.len()).map(|i| self.record(house, i, &transforms[i])).collect()
    }
}

/// Annotations of every object at its authored pose.
pub fn annotate_house(house: &House, stats: &CategoryVolumeStats) -> Vec<SemanticRecord> {
    SemanticIndex::new(house, stats).records(house, &house.object_transforms())
}

/// Fine-category id to name for every label a render of this house can produce.
pub fn segmentation_legend(house: &House) -> BTreeMap<u16, String> {
    FineCategoryId::structural()
        .into_iter()
        .chain(house.objects.iter().map(|o| o.fine_category))
        .map(|f| (f.0, f.name().to_owned()))
        .collect()
}
