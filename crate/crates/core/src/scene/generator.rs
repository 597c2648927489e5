//! Seeded procedural houses: rectangular rooms on a grid sharing walls, doors between
//! neighbours, and furniture placed by rejection sampling against 3D overlap.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Aabb, Transform, Vec3};

use super::{
    object_aabb, validate_house, CategoryId, FineCategoryId, House, MaterialLayer, MaterialTable, Opening, PointLight,
    Room, RoomKind, SceneError, SceneObject, SignalSpec, SoundSource, Texture, TriMesh,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    pub min_rooms: usize,
    pub max_rooms: usize,
    pub min_objects_per_room: usize,
    pub max_objects_per_room: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            min_rooms: 3,
            max_rooms: 6,
            min_objects_per_room: 14,
            max_objects_per_room: 22,
        }
    }
}

impl GeneratorParams {
    fn check(&self) -> Result<(), SceneError> {
        if self.min_rooms == 0 {
            return Err(SceneError::Param("a house needs at least one room".into()));
        }
        if self.min_rooms > self.max_rooms {
            return Err(SceneError::Param(format!("room range {}..={} is empty", self.min_rooms, self.max_rooms)));
        }
        if self.max_rooms > 64 {
            return Err(SceneError::Param("at most 64 rooms".into()));
        }
        if self.min_objects_per_room > self.max_objects_per_room {
            return Err(SceneError::Param(format!(
                "object range {}..={} is empty",
                self.min_objects_per_room, self.max_objects_per_room
            )));
        }
        if self.max_objects_per_room > 200 {
            return Err(SceneError::Param("at most 200 objects per room".into()));
        }
        Ok(())
    }
}

pub const DOOR_WIDTH: f64 = 0.9;
pub const DOOR_HEIGHT: f64 = 2.1;
const DOOR_CLEARANCE: f64 = 0.8;
const FOOTPRINT_FRACTION: f64 = 0.45;

#[derive(Clone, Copy, PartialEq)]
enum Shape {
    Box,
    /// Octagonal prism; size.x is the diameter.
    Prism,
}

#[derive(Clone, Copy, PartialEq)]
enum Placement {
    Floor,
    /// On top of a support item.
    Surface,
    /// Against a wall at the given height of the object's centre.
    Wall(f64),
}

struct Item {
    fine: &'static str,
    coarse: &'static str,
    min: [f64; 3],
    max: [f64; 3],
    shape: Shape,
    placement: Placement,
    body: &'static [&'static str],
    top: Option<&'static str>,
    colors: &'static [&'static str],
    dynamic: bool,
    support: bool,
    rooms: &'static [&'static str],
}

const ANY: &[&str] = &[];
const WOODS: &[&str] = &["#8b5a2b", "#a0522d", "#deb887", "#5c4033", "#c19a6b"];
const WHITES: &[&str] = &["#ffffff", "#f2f0ea", "#e0e0e0", "#f5f5dc"];
const METALS: &[&str] = &["#a8a8b0", "#c0c0c0", "#404040", "#ffffff"];
const BRIGHTS: &[&str] = &["#ff0000", "#0000ff", "#008000", "#ffff00", "#ffa500", "#800080", "#ffc0cb", "#00ffff"];
const FABRICS: &[&str] = &["#808080", "#000080", "#8b4513", "#f5f5dc", "#800000", "#556b2f", "#4682b4"];
const DARKS: &[&str] = &["#000000", "#2e2e2e", "#404040"];

macro_rules! item {
    ($fine:expr, $coarse:expr, $min:expr, $max:expr, $shape:ident, $place:expr, $body:expr, $top:expr, $colors:expr,
     dynamic: $dyn:expr, support: $sup:expr, rooms: $rooms:expr) => {
        Item {
            fine: $fine,
            coarse: $coarse,
            min: $min,
            max: $max,
            shape: Shape::$shape,
            placement: $place,
            body: $body,
            top: $top,
            colors: $colors,
            dynamic: $dyn,
            support: $sup,
            rooms: $rooms,
        }
    };
}

use Placement::{Floor, Surface, Wall};

const KITCHENISH: &[&str] = &["kitchen", "dining room"];
const LIVING: &[&str] = &["living room", "hall", "lobby"];
const SLEEP: &[&str] = &["bedroom", "child room", "guest room"];
const BATH: &[&str] = &["bathroom", "toilet", "laundry room"];
const WORK: &[&str] = &["office", "child room", "bedroom"];

static CATALOG: &[Item] = &[
    // large floor furniture
    item!("dining table", "table", [1.2, 0.8, 0.72], [1.8, 1.0, 0.78], Box, Floor, &["wood"], Some("wood"), WOODS, dynamic: false, support: true, rooms: &["kitchen", "dining room", "living room"]),
    item!("coffee table", "table", [0.9, 0.5, 0.4], [1.2, 0.7, 0.45], Box, Floor, &["wood"], Some("glass"), WOODS, dynamic: false, support: true, rooms: LIVING),
    item!("side table", "table", [0.4, 0.4, 0.5], [0.6, 0.6, 0.6], Box, Floor, &["wood"], None, WOODS, dynamic: false, support: true, rooms: ANY),
    item!("desk", "desk", [1.2, 0.6, 0.72], [1.6, 0.8, 0.76], Box, Floor, &["wood", "metal"], Some("wood"), WOODS, dynamic: false, support: true, rooms: WORK),
    item!("kitchen cabinet", "cabinet", [0.6, 0.6, 0.88], [1.2, 0.62, 0.92], Box, Floor, &["wood"], Some("marble"), WHITES, dynamic: false, support: true, rooms: KITCHENISH),
    item!("nightstand", "cabinet", [0.4, 0.35, 0.5], [0.55, 0.45, 0.65], Box, Floor, &["wood"], None, WOODS, dynamic: false, support: true, rooms: SLEEP),
    item!("dresser", "dresser", [1.0, 0.45, 0.8], [1.4, 0.55, 1.0], Box, Floor, &["wood"], None, WOODS, dynamic: false, support: true, rooms: SLEEP),
    item!("bookshelf", "bookshelf", [0.8, 0.3, 1.8], [1.2, 0.4, 2.0], Box, Floor, &["wood"], None, WOODS, dynamic: false, support: false, rooms: &["living room", "office", "child room", "bedroom"]),
    item!("wardrobe", "wardrobe", [1.0, 0.55, 1.9], [1.6, 0.65, 2.1], Box, Floor, &["wood"], None, WOODS, dynamic: false, support: false, rooms: SLEEP),
    item!("double bed", "bed", [1.6, 2.0, 0.5], [1.8, 2.1, 0.6], Box, Floor, &["wood"], Some("textile"), FABRICS, dynamic: false, support: true, rooms: &["bedroom", "guest room"]),
    item!("single bed", "bed", [0.9, 1.9, 0.45], [1.0, 2.0, 0.55], Box, Floor, &["wood"], Some("textile"), FABRICS, dynamic: false, support: true, rooms: &["child room", "guest room"]),
    item!("sofa", "sofa", [1.8, 0.8, 0.8], [2.4, 0.95, 0.9], Box, Floor, &["textile"], None, FABRICS, dynamic: false, support: true, rooms: LIVING),
    item!("armchair", "chair", [0.7, 0.7, 0.8], [0.9, 0.9, 1.0], Box, Floor, &["textile", "leather"], None, FABRICS, dynamic: false, support: false, rooms: &["living room", "office", "bedroom"]),
    item!("refrigerator", "refrigerator", [0.6, 0.6, 1.7], [0.8, 0.7, 1.9], Box, Floor, &["metal"], None, METALS, dynamic: false, support: false, rooms: &["kitchen"]),
    item!("stove", "stove", [0.6, 0.6, 0.88], [0.75, 0.62, 0.92], Box, Floor, &["metal"], None, METALS, dynamic: false, support: true, rooms: &["kitchen"]),
    item!("dishwasher", "dishwasher", [0.6, 0.6, 0.84], [0.6, 0.62, 0.88], Box, Floor, &["metal"], None, METALS, dynamic: false, support: false, rooms: &["kitchen"]),
    item!("washing machine", "washing machine", [0.6, 0.6, 0.84], [0.6, 0.65, 0.88], Box, Floor, &["metal"], None, WHITES, dynamic: false, support: true, rooms: &["laundry room", "bathroom", "garage"]),
    item!("bathtub", "bathtub", [1.5, 0.7, 0.5], [1.7, 0.8, 0.6], Box, Floor, &["ceramic"], None, WHITES, dynamic: false, support: false, rooms: &["bathroom"]),
    item!("toilet", "toilet", [0.38, 0.6, 0.72], [0.42, 0.7, 0.78], Box, Floor, &["ceramic"], None, WHITES, dynamic: false, support: false, rooms: BATH),
    item!("bathroom vanity", "sink", [0.6, 0.45, 0.82], [1.0, 0.55, 0.88], Box, Floor, &["wood"], Some("ceramic"), WHITES, dynamic: false, support: true, rooms: BATH),
    item!("tv stand", "cabinet", [1.2, 0.4, 0.45], [1.8, 0.45, 0.55], Box, Floor, &["wood"], None, DARKS, dynamic: false, support: true, rooms: LIVING),
    item!("fireplace", "fireplace", [1.2, 0.4, 1.0], [1.6, 0.5, 1.2], Box, Floor, &["stone", "brick"], None, &["#9a9590", "#9c4a30"], dynamic: false, support: true, rooms: &["living room"]),
    item!("piano", "musical instrument", [1.4, 0.55, 1.1], [1.5, 0.65, 1.3], Box, Floor, &["wood"], None, DARKS, dynamic: false, support: true, rooms: &["living room", "hall"]),
    item!("treadmill", "exercise equipment", [1.6, 0.7, 1.2], [1.9, 0.85, 1.4], Box, Floor, &["metal", "rubber"], None, DARKS, dynamic: false, support: false, rooms: &["gym", "garage"]),
    item!("radiator", "heater", [0.8, 0.1, 0.55], [1.2, 0.15, 0.65], Box, Floor, &["metal"], None, WHITES, dynamic: false, support: false, rooms: ANY),
    item!("potted plant", "plant", [0.35, 0.35, 0.6], [0.6, 0.6, 1.2], Prism, Floor, &["ceramic"], Some("cork"), &["#008000", "#556b2f", "#228b22"], dynamic: false, support: false, rooms: ANY),
    item!("floor lamp", "lamp", [0.3, 0.3, 1.5], [0.4, 0.4, 1.7], Prism, Floor, &["metal"], Some("textile"), METALS, dynamic: false, support: false, rooms: &["living room", "bedroom", "office"]),
    item!("filing cabinet", "cabinet", [0.4, 0.6, 0.7], [0.5, 0.65, 1.3], Box, Floor, &["metal"], None, METALS, dynamic: false, support: true, rooms: &["office", "storage"]),
    item!("shelving unit", "shelving", [0.8, 0.4, 1.5], [1.2, 0.5, 2.0], Box, Floor, &["metal", "wood"], None, METALS, dynamic: false, support: false, rooms: &["storage", "garage", "laundry room", "boiler room"]),
    // small floor items
    item!("dining chair", "chair", [0.42, 0.45, 0.85], [0.5, 0.55, 0.95], Box, Floor, &["wood"], Some("textile"), WOODS, dynamic: true, support: false, rooms: &["kitchen", "dining room", "office"]),
    item!("stool", "stool", [0.3, 0.3, 0.45], [0.4, 0.4, 0.7], Prism, Floor, &["wood"], None, WOODS, dynamic: true, support: false, rooms: ANY),
    item!("trash can", "trash can", [0.25, 0.25, 0.3], [0.35, 0.35, 0.45], Prism, Floor, &["plastic"], None, DARKS, dynamic: true, support: false, rooms: ANY),
    item!("laundry basket", "laundry basket", [0.4, 0.3, 0.4], [0.55, 0.4, 0.55], Box, Floor, &["wicker"], None, &["#c9a66b", "#ffffff"], dynamic: true, support: false, rooms: &["bathroom", "bedroom", "laundry room"]),
    item!("storage box", "storage box", [0.3, 0.3, 0.25], [0.5, 0.4, 0.4], Box, Floor, &["paper", "plastic"], None, &["#c19a6b", "#ffffff", "#0000ff"], dynamic: true, support: false, rooms: ANY),
    item!("ball", "toy", [0.18, 0.18, 0.18], [0.25, 0.25, 0.25], Prism, Floor, &["rubber"], None, BRIGHTS, dynamic: true, support: false, rooms: &["child room", "living room", "garage", "gym"]),
    item!("dumbbell", "exercise equipment", [0.3, 0.1, 0.1], [0.35, 0.12, 0.12], Box, Floor, &["metal"], None, DARKS, dynamic: true, support: false, rooms: &["gym", "bedroom", "garage"]),
    item!("shoes", "shoes", [0.25, 0.18, 0.1], [0.32, 0.22, 0.14], Box, Floor, &["leather", "textile"], None, FABRICS, dynamic: true, support: false, rooms: &["entryway", "bedroom", "hallway", "wardrobe"]),
    item!("guitar", "musical instrument", [0.35, 0.1, 0.95], [0.4, 0.12, 1.05], Box, Floor, &["wood"], None, WOODS, dynamic: true, support: false, rooms: &["living room", "bedroom", "child room"]),
    item!("bean bag", "sofa", [0.7, 0.7, 0.5], [0.9, 0.9, 0.65], Prism, Floor, &["textile", "foam"], None, BRIGHTS, dynamic: true, support: false, rooms: &["child room", "living room"]),
    item!("vacuum cleaner", "tool", [0.3, 0.3, 0.3], [0.35, 0.35, 0.4], Box, Floor, &["plastic"], None, BRIGHTS, dynamic: true, support: false, rooms: &["storage", "hallway", "laundry room"]),
    item!("suitcase", "bag", [0.4, 0.22, 0.55], [0.5, 0.28, 0.7], Box, Floor, &["plastic", "leather"], None, DARKS, dynamic: true, support: false, rooms: &["storage", "bedroom", "guest room", "entryway"]),
    // on surfaces
    item!("mug", "tableware", [0.07, 0.07, 0.09], [0.09, 0.09, 0.11], Prism, Surface, &["ceramic"], None, &["#ffffff", "#ff0000", "#0000ff", "#000000"], dynamic: true, support: false, rooms: ANY),
    item!("plate", "tableware", [0.2, 0.2, 0.02], [0.28, 0.28, 0.03], Prism, Surface, &["ceramic"], None, WHITES, dynamic: true, support: false, rooms: KITCHENISH),
    item!("bowl", "tableware", [0.12, 0.12, 0.05], [0.18, 0.18, 0.08], Prism, Surface, &["ceramic", "glass"], None, WHITES, dynamic: true, support: false, rooms: KITCHENISH),
    item!("wine bottle", "bottle", [0.07, 0.07, 0.28], [0.08, 0.08, 0.32], Prism, Surface, &["glass"], None, &["#008000", "#800000", "#556b2f"], dynamic: true, support: false, rooms: KITCHENISH),
    item!("book", "book", [0.14, 0.2, 0.02], [0.2, 0.28, 0.05], Box, Surface, &["paper"], None, BRIGHTS, dynamic: true, support: false, rooms: ANY),
    item!("magazine", "book", [0.2, 0.27, 0.005], [0.21, 0.29, 0.01], Box, Surface, &["paper"], None, BRIGHTS, dynamic: true, support: false, rooms: &["living room", "bathroom", "office"]),
    item!("laptop", "computer", [0.3, 0.21, 0.02], [0.36, 0.25, 0.025], Box, Surface, &["metal", "plastic"], None, METALS, dynamic: true, support: false, rooms: WORK),
    item!("computer monitor", "computer", [0.5, 0.18, 0.35], [0.65, 0.22, 0.45], Box, Surface, &["plastic"], None, DARKS, dynamic: false, support: false, rooms: &["office"]),
    item!("keyboard", "computer", [0.4, 0.13, 0.02], [0.45, 0.16, 0.035], Box, Surface, &["plastic"], None, DARKS, dynamic: true, support: false, rooms: &["office"]),
    item!("table lamp", "lamp", [0.18, 0.18, 0.35], [0.25, 0.25, 0.5], Prism, Surface, &["ceramic"], Some("textile"), WHITES, dynamic: true, support: false, rooms: ANY),
    item!("vase", "vase", [0.1, 0.1, 0.2], [0.16, 0.16, 0.35], Prism, Surface, &["glass", "ceramic"], None, &["#00ffff", "#ffffff", "#0000ff", "#ff7f50"], dynamic: true, support: false, rooms: ANY),
    item!("fruit bowl", "fruit bowl", [0.22, 0.22, 0.1], [0.3, 0.3, 0.14], Prism, Surface, &["wicker", "ceramic"], Some("wood"), &["#ffa500", "#ffff00", "#ff0000"], dynamic: true, support: false, rooms: KITCHENISH),
    item!("kettle", "kettle", [0.15, 0.15, 0.2], [0.18, 0.18, 0.25], Prism, Surface, &["plastic"], None, METALS, dynamic: true, support: false, rooms: &["kitchen"]),
    item!("toaster", "toaster", [0.26, 0.16, 0.18], [0.3, 0.2, 0.22], Box, Surface, &["plastic"], None, METALS, dynamic: true, support: false, rooms: &["kitchen"]),
    item!("coffee machine", "coffee machine", [0.22, 0.28, 0.3], [0.28, 0.35, 0.4], Box, Surface, &["plastic"], None, DARKS, dynamic: true, support: false, rooms: &["kitchen"]),
    item!("microwave", "microwave", [0.45, 0.33, 0.26], [0.55, 0.4, 0.32], Box, Surface, &["metal"], None, METALS, dynamic: false, support: false, rooms: &["kitchen"]),
    item!("mortar and pestle", "kitchenware", [0.1, 0.1, 0.07], [0.14, 0.14, 0.1], Prism, Surface, &["stone"], None, &["#808080", "#ffffff", "#9a9590"], dynamic: true, support: false, rooms: &["kitchen"]),
    item!("cutting board", "kitchenware", [0.3, 0.2, 0.015], [0.45, 0.3, 0.03], Box, Surface, &["wood"], None, WOODS, dynamic: true, support: false, rooms: &["kitchen"]),
    item!("xbox", "gaming console", [0.28, 0.24, 0.06], [0.32, 0.27, 0.08], Box, Surface, &["plastic"], None, &["#000000", "#ffffff"], dynamic: true, support: false, rooms: &["living room", "child room"]),
    item!("game controller", "gaming console", [0.14, 0.09, 0.05], [0.16, 0.11, 0.06], Box, Surface, &["plastic"], None, DARKS, dynamic: true, support: false, rooms: &["living room", "child room"]),
    item!("accordion", "musical instrument", [0.35, 0.18, 0.35], [0.45, 0.22, 0.42], Box, Surface, &["wood", "leather"], None, &["#ff0000", "#000000", "#800000"], dynamic: true, support: false, rooms: &["living room", "hall"]),
    item!("alarm clock", "clock", [0.1, 0.06, 0.08], [0.14, 0.08, 0.12], Box, Surface, &["plastic"], None, BRIGHTS, dynamic: true, support: false, rooms: SLEEP),
    item!("telephone", "telephone", [0.18, 0.14, 0.06], [0.22, 0.17, 0.1], Box, Surface, &["plastic"], None, DARKS, dynamic: true, support: false, rooms: &["office", "living room", "hall"]),
    item!("candle", "candle", [0.05, 0.05, 0.1], [0.08, 0.08, 0.2], Prism, Surface, &["plastic"], None, WHITES, dynamic: true, support: false, rooms: ANY),
    item!("pillow", "pillow", [0.4, 0.3, 0.1], [0.6, 0.4, 0.15], Box, Surface, &["textile"], None, FABRICS, dynamic: true, support: false, rooms: &["bedroom", "living room", "guest room", "child room"]),
    item!("teddy bear", "toy", [0.2, 0.15, 0.25], [0.3, 0.2, 0.35], Box, Surface, &["textile"], None, &["#8b4513", "#ffc0cb", "#f5f5dc"], dynamic: true, support: false, rooms: &["child room", "bedroom"]),
    item!("toy car", "toy", [0.12, 0.06, 0.05], [0.18, 0.09, 0.07], Box, Surface, &["plastic"], None, BRIGHTS, dynamic: true, support: false, rooms: &["child room"]),
    item!("soap dispenser", "bathroom accessory", [0.06, 0.06, 0.15], [0.08, 0.08, 0.2], Prism, Surface, &["plastic", "glass"], None, WHITES, dynamic: true, support: false, rooms: BATH),
    item!("towel", "towel", [0.25, 0.18, 0.06], [0.35, 0.25, 0.1], Box, Surface, &["textile"], None, &["#ffffff", "#0000ff", "#ffc0cb", "#008080"], dynamic: true, support: false, rooms: BATH),
    item!("pen holder", "office supplies", [0.07, 0.07, 0.1], [0.09, 0.09, 0.12], Prism, Surface, &["metal", "plastic"], None, DARKS, dynamic: true, support: false, rooms: WORK),
    item!("globe", "decoration", [0.25, 0.25, 0.35], [0.3, 0.3, 0.45], Prism, Surface, &["plastic"], Some("wood"), &["#0000ff", "#008080"], dynamic: true, support: false, rooms: WORK),
    item!("flower pot", "plant", [0.12, 0.12, 0.15], [0.2, 0.2, 0.3], Prism, Surface, &["ceramic"], Some("cork"), &["#a0522d", "#008000", "#ffffff"], dynamic: true, support: false, rooms: ANY),
    // wall mounted
    item!("air conditioner", "air conditioner", [0.8, 0.22, 0.28], [0.95, 0.25, 0.32], Box, Wall(2.15), &["plastic"], None, WHITES, dynamic: false, support: false, rooms: &["living room", "bedroom", "office", "guest room"]),
    item!("mirror", "mirror", [0.5, 0.03, 0.7], [0.8, 0.04, 1.0], Box, Wall(1.45), &["glass"], None, &["#c8dce6", "#e0e0e0"], dynamic: false, support: false, rooms: &["bathroom", "bedroom", "entryway", "hallway", "toilet"]),
    item!("painting", "picture frame", [0.5, 0.03, 0.4], [1.0, 0.04, 0.8], Box, Wall(1.55), &["wood"], Some("paper"), BRIGHTS, dynamic: false, support: false, rooms: ANY),
    item!("wall clock", "clock", [0.25, 0.04, 0.25], [0.35, 0.05, 0.35], Box, Wall(1.85), &["plastic"], None, WHITES, dynamic: false, support: false, rooms: &["kitchen", "living room", "office", "dining room"]),
    item!("television", "television", [1.0, 0.06, 0.6], [1.4, 0.08, 0.8], Box, Wall(1.3), &["plastic", "glass"], None, DARKS, dynamic: false, support: false, rooms: &["living room", "bedroom"]),
    item!("towel rack", "bathroom accessory", [0.5, 0.1, 0.08], [0.7, 0.12, 0.1], Box, Wall(1.2), &["metal"], None, METALS, dynamic: false, support: false, rooms: BATH),
];

fn item_allowed(item: &Item, room_kind: &str) -> bool {
    item.rooms.is_empty() || item.rooms.contains(&room_kind)
}

fn hex(c: &str) -> [u8; 3] {
    let v = u32::from_str_radix(&c[1..], 16).expect("catalog colors are hex");
    [(v >> 16) as u8, (v >> 8) as u8, v as u8]
}

/// Grid-layout cell of one room.
struct Cell {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

/// Deterministic house from `(seed, params)`.
pub fn generate_house(seed: u64, params: &GeneratorParams) -> Result<House, SceneError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let materials = MaterialTable::shipped();
    let mat = |name: &str| materials.id(name).expect("shipped material");

    let n_rooms = rng.gen_range(params.min_rooms..=params.max_rooms);
    let cols = (n_rooms as f64).sqrt().ceil() as usize;
    let rows = n_rooms.div_ceil(cols);
    let mut xs = vec![0.0];
    for _ in 0..cols {
        let w: f64 = rng.gen_range(3.8..6.2);
        xs.push(xs.last().unwrap() + w);
    }
    let mut ys = vec![0.0];
    for _ in 0..rows {
        let d: f64 = rng.gen_range(3.8..6.2);
        ys.push(ys.last().unwrap() + d);
    }
    let wall_height: f64 = rng.gen_range(2.5..3.0);
    let wall_material = if rng.gen_bool(0.8) { "plaster" } else { "brick" };

    let mut kinds: Vec<&str> = vec!["living room", "kitchen", "bedroom", "bathroom"];
    let extra = [
        "dining room", "office", "child room", "guest room", "bedroom", "hallway", "storage", "laundry room", "gym",
        "entryway", "hall", "toilet", "garage", "wardrobe",
    ];
    while kinds.len() < n_rooms {
        kinds.push(extra.choose(&mut rng).expect("non-empty"));
    }
    kinds.truncate(n_rooms);
    kinds[1..].shuffle(&mut rng);

    let cells: Vec<Cell> = (0..n_rooms)
        .map(|k| {
            let (c, r) = (k % cols, k / cols);
            Cell {
                x0: xs[c],
                y0: ys[r],
                x1: xs[c + 1],
                y1: ys[r + 1],
            }
        })
        .collect();

    let mut rooms: Vec<Room> = cells
        .iter()
        .enumerate()
        .map(|(k, cell)| {
            let floor = match kinds[k] {
                "bathroom" | "toilet" | "laundry room" | "kitchen" => "tile",
                "bedroom" | "child room" | "guest room" => "carpet",
                "garage" | "storage" | "boiler room" => "concrete",
                _ => "wood",
            };
            Room {
                id: format!("r{k}"),
                kind: RoomKind::from_name(kinds[k]).expect("generator room kinds are in the taxonomy"),
                floor_polygon: vec![[cell.x0, cell.y0], [cell.x1, cell.y0], [cell.x1, cell.y1], [cell.x0, cell.y1]],
                floor_z: 0.0,
                wall_height,
                wall_material: mat(wall_material),
                floor_material: mat(floor),
                openings: Vec::new(),
            }
        })
        .collect();

    // Doors: every horizontal neighbour pair, column-0 vertical links, plus random extra vertical links.
    let door_at = |rng: &mut ChaCha8Rng, len: f64| rng.gen_range(0.3..(len - 0.3 - DOOR_WIDTH));
    for k in 0..n_rooms {
        let (c, r) = (k % cols, k / cols);
        let right = k + 1;
        if c + 1 < cols && right < n_rooms {
            let depth = cells[k].y1 - cells[k].y0;
            let s = door_at(&mut rng, depth);
            rooms[k].openings.push(Opening { edge: 1, offset: s, width: DOOR_WIDTH, height: DOOR_HEIGHT });
            rooms[right].openings.push(Opening {
                edge: 3,
                offset: depth - s - DOOR_WIDTH,
                width: DOOR_WIDTH,
                height: DOOR_HEIGHT,
            });
        }
        let above = k + cols;
        if r + 1 < rows && above < n_rooms && (c == 0 || rng.gen_bool(0.5)) {
            let width = cells[k].x1 - cells[k].x0;
            let t = door_at(&mut rng, width);
            rooms[k].openings.push(Opening {
                edge: 2,
                offset: width - t - DOOR_WIDTH,
                width: DOOR_WIDTH,
                height: DOOR_HEIGHT,
            });
            rooms[above].openings.push(Opening { edge: 0, offset: t, width: DOOR_WIDTH, height: DOOR_HEIGHT });
        }
    }
    // Front door on the outer south wall of the first room.
    let front = door_at(&mut rng, cells[0].x1 - cells[0].x0);
    rooms[0].openings.push(Opening { edge: 0, offset: front, width: DOOR_WIDTH, height: DOOR_HEIGHT });

    let mut objects = Vec::new();
    for (k, room) in rooms.iter().enumerate() {
        let target = rng.gen_range(params.min_objects_per_room..=params.max_objects_per_room);
        furnish_room(&mut rng, room, &cells[k], kinds[k], target, &mut objects);
    }

    let lights = rooms
        .iter()
        .map(|r| {
            let c = r.centroid_xy();
            PointLight {
                position: Vec3::new(c[0], c[1], r.ceiling_z() - 0.25),
                intensity: 3.0,
            }
        })
        .collect();

    let mut sound_sources = Vec::new();
    let n_sources = if rng.gen_bool(0.3) { 2 } else { 1 };
    for s in 0..n_sources {
        let k = rng.gen_range(0..n_rooms);
        let cell = &cells[k];
        let mut pos = None;
        for _ in 0..100 {
            let p = Vec3::new(
                rng.gen_range(cell.x0 + 0.5..cell.x1 - 0.5),
                rng.gen_range(cell.y0 + 0.5..cell.y1 - 0.5),
                rng.gen_range(0.8..1.6),
            );
            let blocked = objects
                .iter()
                .any(|o: &SceneObject| o.room_id == rooms[k].id && object_aabb(o).expanded(0.05).contains_point(p, 0.0));
            if !blocked {
                pos = Some(p);
                break;
            }
        }
        let Some(position) = pos else { continue };
        let signal = if rng.gen_bool(0.5) {
            SignalSpec::Sine {
                frequency: *[220.0, 440.0, 500.0, 880.0].choose(&mut rng).expect("non-empty"),
            }
        } else {
            SignalSpec::Noise { seed: rng.gen() }
        };
        sound_sources.push(SoundSource {
            id: format!("s{s}"),
            position,
            signal,
            reference_gain: rng.gen_range(0.5..1.0),
        });
    }

    let mut house = House {
        id: format!("gen-{seed}"),
        rooms,
        objects,
        lights,
        sound_sources,
        bounds: Aabb::empty(),
        materials: materials.clone(),
    };
    house.bounds = house.computed_bounds();
    validate_house(&house)?;
    Ok(house)
}

fn make_mesh(item: &Item, size: Vec3, two_layers: bool) -> TriMesh {
    let top = if two_layers { 1 } else { 0 };
    match item.shape {
        Shape::Box => TriMesh::cuboid(size, top),
        Shape::Prism => TriMesh::prism(size.x * 0.5, size.z, 8, top),
    }
}

fn furnish_room(rng: &mut ChaCha8Rng, room: &Room, cell: &Cell, kind: &str, target: usize, objects: &mut Vec<SceneObject>) {
    let materials = MaterialTable::shipped();
    let pool: Vec<&Item> = CATALOG.iter().filter(|i| item_allowed(i, kind)).collect();
    let room_area = (cell.x1 - cell.x0) * (cell.y1 - cell.y0);
    let mut footprint = 0.0;
    // (aabb, is_support, is_static)
    let mut placed: Vec<(Aabb, bool, bool)> = Vec::new();
    let keep_out: Vec<Aabb> = door_keep_out(room);
    let mut count = 0;
    let mut draws = 0;
    while count < target && draws < target * 4 {
        draws += 1;
        let item = *pool.choose(rng).expect("every room kind has catalog items");
        let size = Vec3::new(
            rng.gen_range(item.min[0]..=item.max[0]),
            rng.gen_range(item.min[1]..=item.max[1]),
            rng.gen_range(item.min[2]..=item.max[2]),
        );
        let size = if item.shape == Shape::Prism { Vec3::new(size.x, size.x, size.z) } else { size };
        let two_layers = item.top.is_some();
        let mesh = make_mesh(item, size, two_layers);

        let mut transform = None;
        for _ in 0..40 {
            let candidate = match item.placement {
                Placement::Floor => {
                    let yaw = if item.dynamic && item.shape == Shape::Prism {
                        0.0
                    } else {
                        std::f64::consts::FRAC_PI_2 * rng.gen_range(0..4) as f64
                    };
                    let t = Transform::from_yaw(Vec3::new(0.0, 0.0, size.z * 0.5), yaw);
                    let local = Aabb::from_points(mesh.transformed_vertices(&t));
                    let hx = local.half_extents();
                    let (lo_x, hi_x) = (cell.x0 + hx.x + 0.02, cell.x1 - hx.x - 0.02);
                    let (lo_y, hi_y) = (cell.y0 + hx.y + 0.02, cell.y1 - hx.y - 0.02);
                    if lo_x >= hi_x || lo_y >= hi_y || size.z >= room.wall_height - 0.05 {
                        break;
                    }
                    let mut t = t;
                    t.translation.x = rng.gen_range(lo_x..hi_x);
                    t.translation.y = rng.gen_range(lo_y..hi_y);
                    Some(t)
                }
                Placement::Surface => {
                    let supports: Vec<&Aabb> = placed.iter().filter(|p| p.1).map(|p| &p.0).collect();
                    let Some(support) = supports.choose(rng).copied() else { break };
                    let yaw = if item.shape == Shape::Prism { 0.0 } else { rng.gen_range(0.0..std::f64::consts::TAU) };
                    let t = Transform::from_yaw(Vec3::ZERO, yaw);
                    let hx = Aabb::from_points(mesh.transformed_vertices(&t)).half_extents();
                    let (lo_x, hi_x) = (support.min.x + hx.x, support.max.x - hx.x);
                    let (lo_y, hi_y) = (support.min.y + hx.y, support.max.y - hx.y);
                    if lo_x >= hi_x || lo_y >= hi_y || support.max.z + size.z >= room.ceiling_z() - 0.3 {
                        continue;
                    }
                    Some(Transform::from_yaw(
                        Vec3::new(rng.gen_range(lo_x..hi_x), rng.gen_range(lo_y..hi_y), support.max.z + size.z * 0.5),
                        yaw,
                    ))
                }
                Placement::Wall(height) => {
                    let edge = rng.gen_range(0..4);
                    let (a, b) = room.edge(edge);
                    let len = room.edge_length(edge);
                    if len < size.x + 0.2 || height + size.z * 0.5 > room.wall_height - 0.02 {
                        continue;
                    }
                    let s = rng.gen_range(size.x * 0.5 + 0.05..len - size.x * 0.5 - 0.05);
                    let z_lo = height - size.z * 0.5;
                    let hits_opening = room.openings.iter().any(|o| {
                        o.edge == edge && s + size.x * 0.5 > o.offset && s - size.x * 0.5 < o.offset + o.width && z_lo < o.height
                    });
                    if hits_opening {
                        continue;
                    }
                    let dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                    let inward = [-dir[1], dir[0]];
                    let off = size.y * 0.5 + 0.005;
                    Some(Transform::from_yaw(
                        Vec3::new(a[0] + dir[0] * s + inward[0] * off, a[1] + dir[1] * s + inward[1] * off, height),
                        dir[1].atan2(dir[0]),
                    ))
                }
            };
            let Some(t) = candidate else { continue };
            let bbox = Aabb::from_points(mesh.transformed_vertices(&t));
            let margin = if item.placement == Placement::Floor { 0.02 } else { 0.0 };
            let grown = bbox.expanded(margin);
            if placed.iter().any(|(p, _, _)| p.overlaps(&grown)) {
                continue;
            }
            if item.placement == Placement::Floor {
                if keep_out.iter().any(|k| k.overlaps(&bbox)) {
                    continue;
                }
                let area = bbox.size().x * bbox.size().y;
                if footprint + area > FOOTPRINT_FRACTION * room_area {
                    continue;
                }
                footprint += area;
            }
            transform = Some((t, bbox));
            break;
        }
        let Some((transform, bbox)) = transform else { continue };

        let body = *item.body.choose(rng).expect("catalog item has a body material");
        let colors = item.colors;
        let pick = |rng: &mut ChaCha8Rng| hex(colors.choose(rng).expect("catalog item has colors"));
        let texture = if rng.gen_bool(0.2) {
            let (c0, c1) = (pick(rng), pick(rng));
            Texture::Grid {
                width: 2,
                height: 2,
                texels: vec![c0, c1, c1, c0],
            }
        } else {
            Texture::Solid(pick(rng))
        };
        let mut layers = vec![MaterialLayer {
            material: materials.id(body).expect("catalog material"),
            texture,
        }];
        if let Some(top) = item.top {
            let m = materials.id(top).expect("catalog material");
            layers.push(MaterialLayer {
                material: m,
                texture: Texture::Solid(materials.material(m).albedo),
            });
        }
        objects.push(SceneObject {
            id: format!("{}_o{:02}", room.id, count),
            room_id: room.id.clone(),
            category: CategoryId::from_name(item.coarse).expect("catalog coarse category in taxonomy"),
            fine_category: FineCategoryId::from_name(item.fine).expect("catalog fine category in taxonomy"),
            mesh,
            transform,
            material_layers: layers,
            dynamic: item.dynamic,
        });
        placed.push((bbox, item.support, !item.dynamic));
        count += 1;
    }
}

/// Floor regions in front of each doorway that furniture must leave free.
fn door_keep_out(room: &Room) -> Vec<Aabb> {
    room.openings
        .iter()
        .map(|o| {
            let (a, b) = room.edge(o.edge);
            let len = room.edge_length(o.edge);
            let dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let inward = [-dir[1], dir[0]];
            let p0 = [a[0] + dir[0] * (o.offset - 0.2), a[1] + dir[1] * (o.offset - 0.2)];
            let p1 = [
                a[0] + dir[0] * (o.offset + o.width + 0.2),
                a[1] + dir[1] * (o.offset + o.width + 0.2),
            ];
            let pts = [
                p0,
                p1,
                [p0[0] + inward[0] * DOOR_CLEARANCE, p0[1] + inward[1] * DOOR_CLEARANCE],
                [p1[0] + inward[0] * DOOR_CLEARANCE, p1[1] + inward[1] * DOOR_CLEARANCE],
            ];
            let mut b = Aabb::from_points(pts.iter().map(|p| Vec3::new(p[0], p[1], room.floor_z)));
            b.min.z = room.floor_z - 1.0;
            b.max.z = room.ceiling_z();
            b
        })
        .collect()
}
