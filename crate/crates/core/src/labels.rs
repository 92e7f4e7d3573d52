//! Class ids of the 23-label aerial segmentation legend.
//!
//! Only the numeric range matters to the cost-map code; the names are used by
//! the world templates and in diagnostics.

/// Number of semantic classes.
pub const NUM_CLASSES: usize = 23;
/// Largest valid class id.
pub const MAX_LABEL: u8 = 22;

pub const UNLABELED: u8 = 0;
pub const PAVED_AREA: u8 = 1;
pub const DIRT: u8 = 2;
pub const GRASS: u8 = 3;
pub const GRAVEL: u8 = 4;
pub const WATER: u8 = 5;
pub const ROCKS: u8 = 6;
pub const POOL: u8 = 7;
pub const VEGETATION: u8 = 8;
pub const ROOF: u8 = 9;
pub const WALL: u8 = 10;
pub const WINDOW: u8 = 11;
pub const DOOR: u8 = 12;
pub const FENCE: u8 = 13;
pub const FENCE_POLE: u8 = 14;
pub const PERSON: u8 = 15;
pub const DOG: u8 = 16;
pub const CAR: u8 = 17;
pub const BICYCLE: u8 = 18;
pub const TREE: u8 = 19;
pub const BALD_TREE: u8 = 20;
pub const AR_MARKER: u8 = 21;
pub const OBSTACLE: u8 = 22;

const NAMES: [&str; NUM_CLASSES] = [
    "unlabeled",
    "paved-area",
    "dirt",
    "grass",
    "gravel",
    "water",
    "rocks",
    "pool",
    "vegetation",
    "roof",
    "wall",
    "window",
    "door",
    "fence",
    "fence-pole",
    "person",
    "dog",
    "car",
    "bicycle",
    "tree",
    "bald-tree",
    "ar-marker",
    "obstacle",
];

/// Human-readable name of a class id, `None` when out of range.
pub fn name(label: u8) -> Option<&'static str> {
    NAMES.get(label as usize).copied()
}

pub fn is_valid(label: u8) -> bool {
    label <= MAX_LABEL
}
