use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::scene::{generate_house, mesh_volume, GeneratorParams, House, SceneObject};

/// Generator seeds whose houses make up the shipped volume statistics.
pub const STATS_CORPUS_SEEDS: Range<u64> = 0..100;
/// Categories with fewer samples than this get no thresholds.
pub const MIN_STATS_SAMPLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    pub fn name(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeAssessment {
    pub class: SizeClass,
    /// Set when the category had too few samples to rank against.
    pub fallback: bool,
}

/// The `num/den` quantile of ascending `sorted`, interpolating linearly between closest ranks.
/// The rank is kept as an exact fraction.
pub fn percentile(sorted: &[f64], num: usize, den: usize) -> f64 {
    let h = (sorted.len() - 1) * num;
    let lo = h / den;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h % den) as f64 / den as f64 * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryStats {
    /// Ascending volumes (m³).
    pub samples: Vec<f64>,
    /// `(p33, p67)`, absent when there are fewer than `MIN_STATS_SAMPLES` samples.
    pub thresholds: Option<(f64, f64)>,
}

impl CategoryStats {
    pub fn new(mut samples: Vec<f64>) -> CategoryStats {
        samples.sort_by(f64::total_cmp);
        let thresholds = (samples.len() >= MIN_STATS_SAMPLES).then(|| (percentile(&samples, 1, 3), percentile(&samples, 2, 3)));
        CategoryStats { samples, thresholds }
    }
}

/// Volume samples per fine category. Text form: one `name<TAB>v1 v2 ...` line per category,
/// volumes ascending; lines starting with `#` are comments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryVolumeStats {
    pub categories: BTreeMap<String, CategoryStats>,
}

/// Closed-mesh volume, or the local bounding-box volume for open meshes.
pub fn object_volume(obj: &SceneObject) -> f64 {
    mesh_volume(&obj.mesh).unwrap_or_else(|_| obj.mesh.local_aabb().volume())
}

impl CategoryVolumeStats {
    pub fn from_houses<'a>(houses: impl IntoIterator<Item = &'a House>) -> CategoryVolumeStats {
        let mut samples: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for h in houses {
            for o in &h.objects {
                samples.entry(o.fine_category.name().to_owned()).or_default().push(object_volume(o));
            }
        }
        CategoryVolumeStats {
            categories: samples.into_iter().map(|(k, v)| (k, CategoryStats::new(v))).collect(),
        }
    }

    /// Recomputes the shipped statistics from the generator corpus.
    pub fn compute_corpus(seeds: Range<u64>) -> CategoryVolumeStats {
        let params = GeneratorParams::default();
        let houses: Vec<House> = seeds
            .map(|s| generate_house(s, &params).expect("default generator parameters are valid"))
            .collect();
        CategoryVolumeStats::from_houses(&houses)
    }

    pub fn shipped() -> &'static CategoryVolumeStats {
        static S: OnceLock<CategoryVolumeStats> = OnceLock::new();
        S.get_or_init(|| CategoryVolumeStats::parse(include_str!("../../data/volume_stats.txt")).expect("shipped stats parse"))
    }

    pub fn parse(text: &str) -> Result<CategoryVolumeStats, String> {
        let mut categories = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, values) = line.split_once('\t').ok_or_else(|| format!("line {}: missing tab", i + 1))?;
            let samples = values
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            if samples.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(format!("line {}: volumes must be finite and non-negative", i + 1));
            }
            categories.insert(name.to_owned(), CategoryStats::new(samples));
        }
        Ok(CategoryVolumeStats { categories })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# fine category<TAB>object volumes in m^3, ascending\n");
        for (name, s) in &self.categories {
            out.push_str(name);
            out.push('\t');
            for (i, v) in s.samples.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn classify(&self, category: &str, volume: f64) -> SizeAssessment {
        match self.categories.get(category).and_then(|s| s.thresholds) {
            Some((p33, p67)) => SizeAssessment {
                class: if volume < p33 {
                    SizeClass::Small
                } else if volume > p67 {
                    SizeClass::Large
                } else {
                    SizeClass::Medium
                },
                fallback: false,
            },
            None => SizeAssessment {
                class: SizeClass::Medium,
                fallback: true,
            },
        }
    }
}

pub fn size_class(obj: &SceneObject, stats: &CategoryVolumeStats) -> SizeAssessment {
    stats.classify(obj.fine_category.name(), object_volume(obj))
}
