use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const MATERIAL_COUNT: usize = 20;
pub const BAND_COUNT: usize = 4;

/// Octave-band centre frequencies (Hz) used for absorption data.
pub const BAND_CENTERS: [f64; BAND_COUNT] = [125.0, 500.0, 2000.0, 8000.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MaterialId(pub u16);

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    /// Energy absorption per band, each in `[0, 1]`.
    pub absorption: [f64; BAND_COUNT],
    /// kg/m³
    pub density: f64,
    pub albedo: [u8; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    entries: Vec<Material>,
}

fn parse_hex(s: &str) -> Option<[u8; 3]> {
    let s = s.strip_prefix('#')?;
    if s.len() != 6 {
        return None;
    }
    let v = u32::from_str_radix(s, 16).ok()?;
    Some([(v >> 16) as u8, (v >> 8) as u8, v as u8])
}

impl MaterialTable {
    /// Parses `name a125 a500 a2000 a8000 density #rrggbb`, tab separated.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 7 {
                return Err(format!("line {}: expected 7 columns", line_no + 1));
            }
            let num = |i: usize| cols[i].trim().parse::<f64>().map_err(|e| format!("line {}: {e}", line_no + 1));
            entries.push(Material {
                name: cols[0].trim().to_owned(),
                absorption: [num(1)?, num(2)?, num(3)?, num(4)?],
                density: num(5)?,
                albedo: parse_hex(cols[6].trim()).ok_or_else(|| format!("line {}: bad color", line_no + 1))?,
            });
        }
        Ok(MaterialTable { entries })
    }

    pub fn shipped() -> &'static MaterialTable {
        static T: OnceLock<MaterialTable> = OnceLock::new();
        T.get_or_init(|| MaterialTable::parse(include_str!("../../data/materials.txt")).expect("shipped material table"))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: MaterialId) -> Option<&Material> {
        self.entries.get(id.0 as usize)
    }

    /// Panics on an id outside the table; ids are validated at load time.
    pub fn material(&self, id: MaterialId) -> &Material {
        &self.entries[id.0 as usize]
    }

    pub fn get_mut(&mut self, id: MaterialId) -> Option<&mut Material> {
        self.entries.get_mut(id.0 as usize)
    }

    pub fn id(&self, name: &str) -> Option<MaterialId> {
        self.entries.iter().position(|m| m.name == name).map(|i| MaterialId(i as u16))
    }

    pub fn iter(&self) -> impl Iterator<Item = (MaterialId, &Material)> {
        self.entries.iter().enumerate().map(|(i, m)| (MaterialId(i as u16), m))
    }

    pub fn is_valid_entry(m: &Material) -> bool {
        m.density > 0.0 && m.density.is_finite() && m.absorption.iter().all(|a| (0.0..=1.0).contains(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_table_is_complete_and_in_range() {
        let t = MaterialTable::shipped();
        assert_eq!(t.len(), MATERIAL_COUNT);
        assert!(t.iter().all(|(_, m)| MaterialTable::is_valid_entry(m)));
        assert!(t.id("wood").is_some() && t.id("textile").is_some());
        assert_eq!(t.material(t.id("wood").unwrap()).density, 700.0);
        assert_eq!(t.material(t.id("metal").unwrap()).density, 7800.0);
        assert_eq!(t.material(t.id("textile").unwrap()).density, 300.0);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(MaterialTable::parse("wood\t0.1\t0.1\n").is_err());
        assert!(MaterialTable::parse("wood\t0.1\t0.1\t0.1\t0.1\t700\tnothex\n").is_err());
    }
}
