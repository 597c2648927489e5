use crate::geom::Vec3;
use crate::scene::SignalSpec;

use super::{AcousticConfig, AcousticError, AcousticPath, FilterBank, FILTER_TAPS};

/// Distance from head centre to each ear (m).
pub const EAR_OFFSET: f64 = 0.09;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ListenerRig {
    pub head: Vec3,
    pub yaw: f64,
    pub ear_offset: f64,
}

impl ListenerRig {
    pub fn new(head: Vec3, yaw: f64) -> ListenerRig {
        ListenerRig {
            head,
            yaw,
            ear_offset: EAR_OFFSET,
        }
    }

    /// Unit vector out of the left ear.
    pub fn left_axis(&self) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(-s, c, 0.0)
    }

    /// `[(position, outward axis)]` for the left then right ear.
    pub fn ears(&self) -> [(Vec3, Vec3); 2] {
        let l = self.left_axis();
        [(self.head + l * self.ear_offset, l), (self.head - l * self.ear_offset, -l)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub sample_rate: u32,
}

impl ImpulseResponse {
    pub fn silent(sample_rate: u32) -> ImpulseResponse {
        ImpulseResponse {
            left: vec![0.0],
            right: vec![0.0],
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Σ (left² + right²).
    pub fn energy(&self) -> f64 {
        self.left.iter().chain(&self.right).map(|v| v * v).sum()
    }
}

/// Two-ear IR. Each path is shaped by the band filter bank, panned by
/// `(1 + cos θ)/2` per ear and placed at its ear-specific delay with linear interpolation.
/// The bank adds a constant latency of `FILTER_DELAY` samples.
pub fn build_ir(paths: &[AcousticPath], rig: &ListenerRig, cfg: &AcousticConfig) -> Result<ImpulseResponse, AcousticError> {
    cfg.validate()?;
    if paths.is_empty() {
        return Err(AcousticError::EmptyPaths {
            silent: ImpulseResponse::silent(cfg.sample_rate),
        });
    }
    let sr = cfg.sample_rate as f64;
    let ears = rig.ears();
    let mut taps = Vec::with_capacity(paths.len() * 2);
    let mut max_index = 0usize;
    for p in paths {
        let finite = p.length.is_finite()
            && p.length > 0.0
            && p.arrival_direction.is_finite()
            && p.band_gain.iter().all(|g| g.is_finite());
        if !finite {
            return Err(AcousticError::Invalid("path with non-finite or non-positive values".into()));
        }
        let apparent = rig.head + p.arrival_direction * p.length;
        for (ear, (pos, axis)) in ears.iter().enumerate() {
            let delay = apparent.distance(*pos) / cfg.speed_of_sound * sr;
            let pan = (1.0 + p.arrival_direction.dot(*axis)) * 0.5;
            let i = delay.floor() as usize;
            max_index = max_index.max(i + 1);
            taps.push((ear, i, delay - i as f64, pan));
        }
    }
    let bank = FilterBank::new(cfg.sample_rate);
    let len = max_index + FILTER_TAPS;
    let mut out = [vec![0.0; len], vec![0.0; len]];
    for (k, &(ear, i, frac, pan)) in taps.iter().enumerate() {
        let shaped = bank.shape(paths[k / 2].band_gain);
        let buf = &mut out[ear];
        for (n, h) in shaped.iter().enumerate() {
            let v = h * pan;
            buf[i + n] += v * (1.0 - frac);
            buf[i + 1 + n] += v * frac;
        }
    }
    let [left, right] = out;
    Ok(ImpulseResponse {
        left,
        right,
        sample_rate: cfg.sample_rate,
    })
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Value of a source signal at sample `n`. Signals start at sample 0 and are silent before.
pub fn signal_sample(signal: &SignalSpec, n: i64, sample_rate: u32) -> f64 {
    if n < 0 {
        return 0.0;
    }
    match signal {
        SignalSpec::Sine { frequency } => (std::f64::consts::TAU * frequency * n as f64 / sample_rate as f64).sin(),
        SignalSpec::Noise { seed } => {
            let r = splitmix(seed ^ splitmix(n as u64));
            (r >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }
        SignalSpec::Sample { pcm, .. } => match pcm {
            Some(d) if !d.samples.is_empty() => d.samples[(n as usize) % d.samples.len()] as f64,
            _ => 0.0,
        },
        SignalSpec::Impulse => {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// One source as heard by one listener.
#[derive(Debug, Clone, Copy)]
pub struct SourceFeed<'a> {
    pub signal: &'a SignalSpec,
    pub gain: f64,
    pub ir: &'a ImpulseResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StereoFrame {
    pub left: Vec<f32>,
    pub right: Vec<f32>,
}

impl StereoFrame {
    pub fn rms(&self) -> (f64, f64) {
        let r = |v: &[f32]| (v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt();
        (r(&self.left), r(&self.right))
    }
}

/// Samples `t0 .. t0 + frame_len` of every source convolved with its IR and summed.
/// Input history before `t0` is regenerated from the signal, so consecutive frames join
/// exactly as a streaming overlap-save would.
pub fn render_frame(feeds: &[SourceFeed], frame_len: usize, t0: u64) -> Result<StereoFrame, AcousticError> {
    let mut left = vec![0.0f64; frame_len];
    let mut right = vec![0.0f64; frame_len];
    let rate = feeds.first().map(|f| f.ir.sample_rate);
    for f in feeds {
        let expected = rate.unwrap();
        if f.ir.sample_rate != expected {
            return Err(AcousticError::RateMismatch {
                expected,
                found: f.ir.sample_rate,
            });
        }
        if let SignalSpec::Sample { pcm: Some(d), .. } = f.signal {
            if d.rate != expected {
                return Err(AcousticError::RateMismatch { expected, found: d.rate });
            }
        }
        if f.gain == 0.0 {
            continue;
        }
        let l = f.ir.len();
        let start = t0 as i64 - l as i64 + 1;
        let input: Vec<f64> = (0..frame_len + l - 1)
            .map(|k| f.gain * signal_sample(f.signal, start + k as i64, expected))
            .collect();
        for (ir, out) in [(&f.ir.left, &mut left), (&f.ir.right, &mut right)] {
            for (j, &h) in ir.iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                // out[k] += h * x[t0 + k - j], and x[t0 + k - j] = input[k + l - 1 - j].
                let base = l - 1 - j;
                for (k, o) in out.iter_mut().enumerate() {
                    *o += h * input[base + k];
                }
            }
        }
    }
    Ok(StereoFrame {
        left: left.into_iter().map(|v| v as f32).collect(),
        right: right.into_iter().map(|v| v as f32).collect(),
    })
}
