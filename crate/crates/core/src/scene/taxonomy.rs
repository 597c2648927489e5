//! Fixed taxonomies shipped as data files (one term per line, zero-based line number = id).

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const ROOM_KIND_COUNT: usize = 24;
pub const CATEGORY_COUNT: usize = 84;
pub const FINE_CATEGORY_COUNT: usize = 187;

#[derive(Debug)]
pub struct Taxonomy {
    names: Vec<String>,
    index: HashMap<String, u16>,
}

impl Taxonomy {
    pub fn parse(text: &str) -> Self {
        let names: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u16)).collect();
        Taxonomy { names, index }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: u16) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<u16> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

pub fn room_kinds() -> &'static Taxonomy {
    static T: OnceLock<Taxonomy> = OnceLock::new();
    T.get_or_init(|| Taxonomy::parse(include_str!("../../data/room_kinds.txt")))
}

pub fn categories() -> &'static Taxonomy {
    static T: OnceLock<Taxonomy> = OnceLock::new();
    T.get_or_init(|| Taxonomy::parse(include_str!("../../data/categories.txt")))
}

pub fn fine_categories() -> &'static Taxonomy {
    static T: OnceLock<Taxonomy> = OnceLock::new();
    T.get_or_init(|| Taxonomy::parse(include_str!("../../data/fine_categories.txt")))
}

macro_rules! taxonomy_id {
    ($(#[$meta:meta])* $name:ident, $tax:path) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub struct $name(pub u16);

        impl $name {
            pub fn from_name(name: &str) -> Option<Self> {
                $tax().id(name).map($name)
            }

            pub fn name(self) -> &'static str {
                $tax().name(self.0).unwrap_or("unknown")
            }

            pub fn is_valid(self) -> bool {
                (self.0 as usize) < $tax().len()
            }
        }
    };
}

taxonomy_id!(
    /// One of the 24 room kinds.
    RoomKind,
    room_kinds
);
taxonomy_id!(
    /// Coarse object category (84 entries).
    CategoryId,
    categories
);
taxonomy_id!(
    /// Fine-grained object category (187 entries); also the segmentation label space.
    FineCategoryId,
    fine_categories
);

impl FineCategoryId {
    pub fn wall() -> Self {
        Self::from_name("wall").expect("taxonomy has wall")
    }

    pub fn floor() -> Self {
        Self::from_name("floor").expect("taxonomy has floor")
    }

    pub fn ceiling() -> Self {
        Self::from_name("ceiling").expect("taxonomy has ceiling")
    }

    pub fn structural() -> [FineCategoryId; 3] {
        [Self::wall(), Self::floor(), Self::ceiling()]
    }

    pub fn is_structural(self) -> bool {
        Self::structural().contains(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_counts() {
        assert_eq!(room_kinds().len(), ROOM_KIND_COUNT);
        assert_eq!(categories().len(), CATEGORY_COUNT);
        assert_eq!(fine_categories().len(), FINE_CATEGORY_COUNT);
    }

    #[test]
    fn named_terms_present() {
        for c in ["air conditioner", "mirror", "window"] {
            assert!(CategoryId::from_name(c).is_some(), "{c}");
        }
        for c in ["accordion", "mortar and pestle", "xbox", "bathtub", "wall", "armchair"] {
            assert!(FineCategoryId::from_name(c).is_some(), "{c}");
        }
        assert!(RoomKind::from_name("kitchen").is_some());
    }

    #[test]
    fn terms_unique() {
        for t in [room_kinds(), categories(), fine_categories()] {
            let mut names = t.names().to_vec();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), t.len());
        }
    }
}
