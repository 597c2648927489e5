//! Throughput benchmark over random actions.

use std::collections::BTreeMap;
use std::time::Instant;

use home_core::env::{make_env, Action, EnvConfig, EnvError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepBreakdown {
    pub render: f64,
    pub audio: f64,
    pub physics: f64,
    pub semantics: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Steps per env.
    pub steps: u64,
    pub envs: usize,
    pub wall_seconds: f64,
    /// Aggregate over all envs.
    pub steps_per_sec: f64,
    /// Mean engine time per step (ms), averaged over envs.
    pub per_step_ms: StepBreakdown,
    pub config: EnvConfig,
}

fn run_one(cfg: &EnvConfig, index: usize, steps: u64) -> Result<StepBreakdown, EnvError> {
    let mut env = make_env(cfg.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
    env.reset(Some(cfg.seed.wrapping_add(index as u64)))?;
    env.reset_timings();
    for _ in 0..steps {
        let ids: Vec<String> = env.agents().map(|a| a.keys().cloned().collect()).unwrap_or_default();
        let actions: BTreeMap<String, Action> =
            ids.into_iter().map(|id| (id, Action::ALL[rng.gen_range(0..Action::ALL.len())])).collect();
        if env.step(&actions)?.done {
            env.reset(None)?;
        }
    }
    let t = env.timings();
    let n = t.steps.max(1) as f64;
    Ok(StepBreakdown {
        render: t.render_ms / n,
        audio: t.audio_ms / n,
        physics: t.physics_ms / n,
        semantics: t.semantics_ms / n,
        total: t.total_ms / n,
    })
}

/// Runs `envs` independent envs for `steps` steps each, in parallel threads when `envs > 1`.
/// Env `i` uses seed `cfg.seed + i` for both its house sequence and its actions.
pub fn run_bench(cfg: &EnvConfig, steps: u64, envs: usize) -> Result<BenchReport, EnvError> {
    cfg.validate()?;
    if envs == 0 {
        return Err(EnvError::Config("envs must be at least 1".into()));
    }
    let start = Instant::now();
    let parts: Vec<Result<StepBreakdown, EnvError>> = if envs == 1 {
        vec![run_one(cfg, 0, steps)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..envs).map(|i| s.spawn(move || run_one(cfg, i, steps))).collect();
            handles.into_iter().map(|h| h.join().expect("bench thread panicked")).collect()
        })
    };
    let wall = start.elapsed().as_secs_f64();
    let mut sum = StepBreakdown::default();
    for p in parts {
        let p = p?;
        sum.render += p.render;
        sum.audio += p.audio;
        sum.physics += p.physics;
        sum.semantics += p.semantics;
        sum.total += p.total;
    }
    let k = envs as f64;
    Ok(BenchReport {
        steps,
        envs,
        wall_seconds: wall,
        steps_per_sec: (steps as f64 * k) / wall.max(1e-9),
        per_step_ms: StepBreakdown {
            render: sum.render / k,
            audio: sum.audio / k,
            physics: sum.physics / k,
            semantics: sum.semantics / k,
            total: sum.total / k,
        },
        config: cfg.clone(),
    })
}
