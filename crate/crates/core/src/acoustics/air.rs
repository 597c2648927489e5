use crate::scene::{BAND_CENTERS, BAND_COUNT};

use super::AcousticError;

/// Reference conditions and coefficients shipped as data: T (°C), p (kPa), RH (%), then α per band.
pub const REFERENCE_TABLE: &str = include_str!("../../data/air_absorption_reference.txt");

const T0: f64 = 293.15;
const T01: f64 = 273.16;
const P_REF: f64 = 101.325;

/// Pure-tone atmospheric absorption (ISO 9613-1 form) at each band centre, in Np/m.
///
/// Valid for −20..50 °C, 50..110 kPa and 0..100 % relative humidity.
pub fn derive_air_absorption(temperature_c: f64, pressure_kpa: f64, humidity: f64) -> Result<[f64; BAND_COUNT], AcousticError> {
    if !(-20.0..=50.0).contains(&temperature_c) {
        return Err(AcousticError::Range(format!("temperature {temperature_c} °C outside -20..50")));
    }
    if !(50.0..=110.0).contains(&pressure_kpa) {
        return Err(AcousticError::Range(format!("pressure {pressure_kpa} kPa outside 50..110")));
    }
    if !(0.0..=100.0).contains(&humidity) {
        return Err(AcousticError::Range(format!("humidity {humidity} % outside 0..100")));
    }
    let t = temperature_c + 273.15;
    let pa = pressure_kpa / P_REF;
    let c = -6.8346 * (T01 / t).powf(1.261) + 4.6151;
    // Molar concentration of water vapour (%).
    let h = humidity * 10f64.powf(c) / pa;
    let fr_o = pa * (24.0 + 4.04e4 * h * (0.02 + h) / (0.391 + h));
    let fr_n = pa * (t / T0).powf(-0.5) * (9.0 + 280.0 * h * (-4.170 * ((t / T0).powf(-1.0 / 3.0) - 1.0)).exp());
    let mut out = [0.0; BAND_COUNT];
    let mut floor = 0.0f64;
    for (b, &f) in BAND_CENTERS.iter().enumerate() {
        let f2 = f * f;
        let classical = 1.84e-11 / pa * (t / T0).sqrt();
        let relax = (t / T0).powf(-2.5)
            * (0.01275 * (-2239.1 / t).exp() / (fr_o + f2 / fr_o) + 0.1068 * (-3352.0 / t).exp() / (fr_n + f2 / fr_n));
        // Non-decreasing in frequency by construction.
        floor = floor.max(f2 * (classical + relax));
        out[b] = floor;
    }
    Ok(out)
}

/// The shipped reference row: `(temperature, pressure, humidity, alpha)`.
pub fn reference_row() -> (f64, f64, f64, [f64; BAND_COUNT]) {
    let line = REFERENCE_TABLE.lines().find(|l| !l.trim().is_empty()).expect("reference table has a row");
    let v: Vec<f64> = line.split('\t').map(|x| x.trim().parse().expect("numeric reference table")).collect();
    (v[0], v[1], v[2], [v[3], v[4], v[5], v[6]])
}
