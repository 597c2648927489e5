use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const BASIC_PALETTE_SIZE: usize = 16;
pub const INTERMEDIATE_PALETTE_SIZE: usize = 138;
pub const DETAILED_PALETTE_SIZE: usize = 949;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Basic,
    Intermediate,
    Detailed,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [Granularity::Basic, Granularity::Intermediate, Granularity::Detailed];
}

/// Named colours. Data files hold one `name<TAB>#rrggbb` entry per line.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorPalette {
    pub granularity: Granularity,
    pub entries: Vec<(String, [u8; 3])>,
}

impl ColorPalette {
    pub fn parse(granularity: Granularity, text: &str) -> Result<ColorPalette, String> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (name, hex) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected name and colour", i + 1))?;
            let rgb = hex
                .trim()
                .strip_prefix('#')
                .filter(|h| h.len() == 6)
                .and_then(|h| u32::from_str_radix(h, 16).ok())
                .map(|v| [(v >> 16) as u8, (v >> 8) as u8, v as u8])
                .ok_or_else(|| format!("line {}: bad colour {hex:?}", i + 1))?;
            entries.push((name.trim().to_owned(), rgb));
        }
        if entries.is_empty() {
            return Err("empty palette".into());
        }
        Ok(ColorPalette { granularity, entries })
    }

    pub fn shipped(granularity: Granularity) -> &'static ColorPalette {
        static P: [OnceLock<ColorPalette>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let (slot, text) = match granularity {
            Granularity::Basic => (&P[0], include_str!("../../data/palette_basic.txt")),
            Granularity::Intermediate => (&P[1], include_str!("../../data/palette_intermediate.txt")),
            Granularity::Detailed => (&P[2], include_str!("../../data/palette_detailed.txt")),
        };
        slot.get_or_init(|| ColorPalette::parse(granularity, text).expect("shipped palette parses"))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.entries[index].0
    }

    /// Index of the nearest entry in RGB; ties go to the lower index.
    pub fn nearest(&self, rgb: [u8; 3]) -> usize {
        let mut best = (0, u32::MAX);
        for (i, (_, c)) in self.entries.iter().enumerate() {
            let d: u32 = (0..3).map(|k| (rgb[k] as i32 - c[k] as i32).pow(2) as u32).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

pub fn quantize_color(rgb: [u8; 3], palette: &ColorPalette) -> &str {
    palette.name(palette.nearest(rgb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_sizes() {
        assert_eq!(ColorPalette::shipped(Granularity::Basic).len(), BASIC_PALETTE_SIZE);
        assert_eq!(ColorPalette::shipped(Granularity::Intermediate).len(), INTERMEDIATE_PALETTE_SIZE);
        assert_eq!(ColorPalette::shipped(Granularity::Detailed).len(), DETAILED_PALETTE_SIZE);
    }

    #[test]
    fn basic_examples() {
        let p = ColorPalette::shipped(Granularity::Basic);
        assert_eq!(quantize_color([255, 0, 0], p), "red");
        assert_eq!(quantize_color([250, 5, 5], p), "red");
    }

    #[test]
    fn ties_go_to_lower_index() {
        let p = ColorPalette::parse(Granularity::Basic, "a\t#000000\nb\t#020202\n").unwrap();
        assert_eq!(quantize_color([1, 1, 1], &p), "a");
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ColorPalette::parse(Granularity::Basic, "red ff0000").is_err());
        assert!(ColorPalette::parse(Granularity::Basic, "red\t#ff00").is_err());
        assert!(ColorPalette::parse(Granularity::Basic, "").is_err());
    }
}
