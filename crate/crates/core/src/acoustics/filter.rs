use crate::scene::BAND_COUNT;

pub const FILTER_TAPS: usize = 33;
/// Group delay of the linear-phase bank, in samples.
pub const FILTER_DELAY: usize = (FILTER_TAPS - 1) / 2;
/// Band edges (Hz) between the four octave bands.
pub const CROSSOVERS: [f64; BAND_COUNT - 1] = [250.0, 1000.0, 4000.0];

/// Complementary linear-phase band split: the four band filters sum to a pure delay of
/// `FILTER_DELAY` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub sample_rate: u32,
    pub taps: [[f64; FILTER_TAPS]; BAND_COUNT],
}

/// Hamming-windowed sinc low-pass with unit DC gain.
fn lowpass(cutoff: f64, sample_rate: f64) -> [f64; FILTER_TAPS] {
    let mut h = [0.0; FILTER_TAPS];
    if cutoff >= sample_rate * 0.5 {
        h[FILTER_DELAY] = 1.0;
        return h;
    }
    let wc = cutoff / sample_rate;
    for (n, v) in h.iter_mut().enumerate() {
        let m = n as f64 - FILTER_DELAY as f64;
        let sinc = if m == 0.0 {
            2.0 * wc
        } else {
            (std::f64::consts::TAU * wc * m).sin() / (std::f64::consts::PI * m)
        };
        let w = 0.54 - 0.46 * (std::f64::consts::TAU * n as f64 / (FILTER_TAPS - 1) as f64).cos();
        *v = sinc * w;
    }
    let sum: f64 = h.iter().sum();
    h.map(|v| v / sum)
}

impl FilterBank {
    pub fn new(sample_rate: u32) -> FilterBank {
        let sr = sample_rate as f64;
        let lps = CROSSOVERS.map(|f| lowpass(f, sr));
        let mut delta = [0.0; FILTER_TAPS];
        delta[FILTER_DELAY] = 1.0;
        let mut taps = [[0.0; FILTER_TAPS]; BAND_COUNT];
        for n in 0..FILTER_TAPS {
            taps[0][n] = lps[0][n];
            taps[1][n] = lps[1][n] - lps[0][n];
            taps[2][n] = lps[2][n] - lps[1][n];
            taps[3][n] = delta[n] - lps[2][n];
        }
        FilterBank { sample_rate, taps }
    }

    /// One FIR whose response in each band follows `gains`.
    pub fn shape(&self, gains: [f64; BAND_COUNT]) -> [f64; FILTER_TAPS] {
        let mut out = [0.0; FILTER_TAPS];
        for (b, g) in gains.iter().enumerate() {
            for n in 0..FILTER_TAPS {
                out[n] += g * self.taps[b][n];
            }
        }
        out
    }

    /// Magnitude of a filter's frequency response at `freq`.
    pub fn response(taps: &[f64], freq: f64, sample_rate: f64) -> f64 {
        let w = std::f64::consts::TAU * freq / sample_rate;
        let (mut re, mut im) = (0.0, 0.0);
        for (n, h) in taps.iter().enumerate() {
            re += h * (w * n as f64).cos();
            im -= h * (w * n as f64).sin();
        }
        (re * re + im * im).sqrt()
    }
}
