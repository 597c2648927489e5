//! The `home` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use home_core::acoustics::{build_ir, trace_paths_in, AcousticError, AcousticScene, ImpulseResponse, ListenerRig};
use home_core::env::EnvConfig;
use home_core::geom::Vec3;
use home_core::render::{render, Camera};
use home_core::scene::{generate_house, load_scene_file, serialize_house, GeneratorParams, House, BAND_CENTERS};
use home_core::semantics::{annotate_house, CategoryVolumeStats, STATS_CORPUS_SEEDS};

use crate::bench::run_bench;
use crate::config::load_config;
use crate::output::{write_hdep, write_pgm16, write_png, write_wav};

#[derive(Debug, Parser)]
#[command(name = "home", version, about = "Headless household simulator")]
pub struct Cli {
    /// TOML config file mirroring the env config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Config override, e.g. `--set audio.max_order=2`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render rgb.png, depth.hdep and seg.pgm from one camera.
    Render(RenderArgs),
    /// Trace paths between a source and a listener and write ir.wav.
    Ir(IrArgs),
    /// Print semantic records as JSON lines.
    Semantics(SemanticsArgs),
    /// Generate houses into the output directory.
    Gen(GenArgs),
    /// Step envs with random actions and report throughput.
    Bench(BenchArgs),
    /// Serve home-wire/1 episodes.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SceneArg {
    /// Scene document. Without it the generator builds the house for `--seed`.
    #[arg(long)]
    pub scene: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub scene: SceneArg,
    /// Camera position `x,y,z` (m). Defaults to the first room's centre at eye height.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub pos: Option<Vec3>,
    /// Degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub yaw: f64,
    /// Degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub pitch: f64,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
}

#[derive(Debug, Args)]
pub struct IrArgs {
    #[command(flatten)]
    pub scene: SceneArg,
    /// Source id; defaults to the first source.
    #[arg(long)]
    pub source: Option<String>,
    /// Listener head position `x,y,z` (m). Defaults to the first room's centre at eye height.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub listener: Option<Vec3>,
    /// Listener yaw in degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub yaw: f64,
    /// Maximum reflection order; defaults to `audio.max_order`.
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SemanticsArgs {
    #[command(flatten)]
    pub scene: SceneArg,
    /// Recompute the category volume stats from the generator corpus, write
    /// `volume_stats.txt` to the output directory and use them.
    #[arg(long)]
    pub recompute_stats: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of consecutive seeds starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1)]
    pub envs: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 5555)]
    pub port: u16,
    /// Listen on a Unix domain socket instead of TCP.
    #[arg(long)]
    pub socket: Option<PathBuf>,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Vec3::new(x, y, z)),
        _ => Err("expected three finite numbers x,y,z".into()),
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or config: exit 1.
    Usage(String),
    /// Engine or I/O failure: exit 2.
    Engine(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Engine(_) => 2,
        }
    }
}

fn engine(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(e.to_string())
}

fn out_dir(cli: &Cli) -> Result<PathBuf, CliError> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| engine(format!("IoError: {}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_house(scene: &SceneArg, cfg: &EnvConfig) -> Result<House, CliError> {
    match &scene.scene {
        Some(p) => load_scene_file(p).map_err(engine),
        None => generate_house(cfg.seed, &GeneratorParams::from(cfg.generator)).map_err(engine),
    }
}

fn default_eye(house: &House, eye_height: f64) -> Result<Vec3, CliError> {
    let room = house.rooms.first().ok_or_else(|| engine("SceneError: house has no rooms"))?;
    let [x, y] = room.centroid_xy();
    Ok(Vec3::new(x, y, room.floor_z + eye_height))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| engine(format!("IoError: {}: {e}", path.display()))
}

fn cmd_render(cli: &Cli, a: &RenderArgs, cfg: &EnvConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let house = load_house(&a.scene, cfg)?;
    let pos = match a.pos {
        Some(p) => p,
        None => default_eye(&house, cfg.agent.eye_height)?,
    };
    let mut cam = Camera::new(pos, a.yaw.to_radians(), a.pitch.to_radians())
        .with_size(a.width.unwrap_or(cfg.width), a.height.unwrap_or(cfg.height));
    cam.vertical_fov = cfg.fov;
    let frame = render(&house, &cam, cfg.lights).map_err(engine)?;
    let dir = out_dir(cli)?;
    let (w, h) = (frame.width, frame.height);
    let files = [dir.join("rgb.png"), dir.join("depth.hdep"), dir.join("seg.pgm")];
    write_png(&files[0], w, h, &frame.rgb).map_err(io_err(&files[0]))?;
    write_hdep(&files[1], w, h, &frame.depth).map_err(io_err(&files[1]))?;
    write_pgm16(&files[2], w, h, &frame.segmentation).map_err(io_err(&files[2]))?;
    for f in &files {
        let _ = writeln!(out, "wrote {} ({w}x{h})", f.display());
    }
    Ok(())
}

fn cmd_ir(cli: &Cli, a: &IrArgs, cfg: &EnvConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let house = load_house(&a.scene, cfg)?;
    let source = match &a.source {
        Some(id) => house.sound_sources.iter().find(|s| &s.id == id),
        None => house.sound_sources.first(),
    }
    .ok_or_else(|| engine(format!("UnknownSource: {}", a.source.as_deref().unwrap_or("(scene has no sources)"))))?;
    let head = match a.listener {
        Some(p) => p,
        None => default_eye(&house, cfg.agent.eye_height)?,
    };
    let mut acfg = cfg.audio.acoustic_config().map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(o) = a.order {
        acfg.max_order = o;
    }
    let scene = AcousticScene::build(&house, &house.object_transforms(), acfg.object_volume_threshold);
    let paths = trace_paths_in(&scene, &house.materials, source.position, head, &acfg).map_err(engine)?;
    let rig = ListenerRig::new(head, a.yaw.to_radians());
    let ir = match build_ir(&paths, &rig, &acfg) {
        Ok(ir) => ir,
        Err(AcousticError::EmptyPaths { silent }) => silent,
        Err(e) => return Err(engine(e)),
    };
    let dir = out_dir(cli)?;
    let file = dir.join("ir.wav");
    let ImpulseResponse { left, right, sample_rate } = &ir;
    let scale = write_wav(&file, *sample_rate, left, right).map_err(io_err(&file))?;
    let mut bands = [0.0f64; BAND_CENTERS.len()];
    for p in &paths {
        for (b, g) in p.band_gain.iter().enumerate() {
            bands[b] += g * g;
        }
    }
    let _ = writeln!(out, "paths: {}", paths.len());
    let _ = writeln!(out, "energy: {:.9e}", bands.iter().sum::<f64>());
    for (f, e) in BAND_CENTERS.iter().zip(bands) {
        let _ = writeln!(out, "band {f} Hz: {e:.9e}");
    }
    let _ = writeln!(out, "ir energy: {:.9e}", ir.energy());
    let _ = writeln!(out, "wrote {} ({} samples, scale {scale})", file.display(), ir.len());
    Ok(())
}

fn cmd_semantics(cli: &Cli, a: &SemanticsArgs, cfg: &EnvConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let house = load_house(&a.scene, cfg)?;
    let computed;
    let stats = if a.recompute_stats {
        computed = CategoryVolumeStats::compute_corpus(STATS_CORPUS_SEEDS);
        let file = out_dir(cli)?.join("volume_stats.txt");
        std::fs::write(&file, computed.to_text()).map_err(io_err(&file))?;
        &computed
    } else {
        CategoryVolumeStats::shipped()
    };
    for r in annotate_house(&house, stats) {
        let line = serde_json::to_string(&r).map_err(engine)?;
        let _ = writeln!(out, "{line}");
    }
    Ok(())
}

fn cmd_gen(cli: &Cli, a: &GenArgs, cfg: &EnvConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if a.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let dir = out_dir(cli)?;
    let params = GeneratorParams::from(cfg.generator);
    let (mut rooms, mut objects) = (0usize, 0usize);
    for seed in cfg.seed..cfg.seed + a.count {
        let h = generate_house(seed, &params).map_err(engine)?;
        rooms += h.rooms.len();
        objects += h.objects.len();
        let file = dir.join(format!("house_{seed}.json"));
        std::fs::write(&file, serialize_house(&h)).map_err(io_err(&file))?;
    }
    let _ = writeln!(out, "houses: {}", a.count);
    let _ = writeln!(out, "mean objects per room: {:.3}", objects as f64 / rooms.max(1) as f64);
    Ok(())
}

fn cmd_bench(cli: &Cli, a: &BenchArgs, cfg: &EnvConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if a.envs == 0 {
        return Err(CliError::Usage("--envs must be at least 1".into()));
    }
    let report = run_bench(cfg, a.steps, a.envs).map_err(engine)?;
    let text = serde_json::to_string_pretty(&report).map_err(engine)?;
    if cli.out.is_some() {
        let file = out_dir(cli)?.join("bench.json");
        std::fs::write(&file, &text).map_err(io_err(&file))?;
    }
    let _ = writeln!(out, "{text}");
    Ok(())
}

fn cmd_serve(a: &ServeArgs, cfg: EnvConfig, out: &mut dyn Write) -> Result<(), CliError> {
    #[cfg(unix)]
    if let Some(path) = &a.socket {
        let l = std::os::unix::net::UnixListener::bind(path).map_err(|e| engine(format!("BindError: {}: {e}", path.display())))?;
        let _ = writeln!(out, "listening on {}", path.display());
        let _ = out.flush();
        return crate::server::serve_unix(l, cfg).map_err(engine);
    }
    #[cfg(not(unix))]
    if a.socket.is_some() {
        return Err(CliError::Usage("--socket needs a Unix platform".into()));
    }
    let l = std::net::TcpListener::bind((a.host.as_str(), a.port)).map_err(|e| engine(format!("BindError: {}:{}: {e}", a.host, a.port)))?;
    let addr = l.local_addr().map_err(engine)?;
    let _ = writeln!(out, "listening on {addr}");
    let _ = out.flush();
    crate::server::serve_tcp(l, cfg, None).map_err(engine)
}

/// Runs a parsed command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(cli.config.as_deref(), &cli.set, cli.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    match &cli.command {
        Command::Render(a) => cmd_render(cli, a, &cfg, out),
        Command::Ir(a) => cmd_ir(cli, a, &cfg, out),
        Command::Semantics(a) => cmd_semantics(cli, a, &cfg, out),
        Command::Gen(a) => cmd_gen(cli, a, &cfg, out),
        Command::Bench(a) => cmd_bench(cli, a, &cfg, out),
        Command::Serve(a) => cmd_serve(a, cfg, out),
    }
}

/// Parses `args` (program name first), runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Engine(m)) = &e;
            eprintln!("error: {m}");
            e.exit_code()
        }
    }
}
