use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypercs::datacube::Datacube;
use hypercs::harness::{
    generate_phantom, relative_error, run_experiment, sample_spectral_basis, CubeSource, ExperimentSpec,
    PhantomSpec, SeedPlan, BASIS_SAMPLE_FRACTION,
};
use hypercs::sensing::{
    acquire, build_spatial_projector, build_spectral_projector, sampling_counts, SPATIAL_LOW_PASS_FRACTION,
    SPECTRAL_LOW_PASS_FRACTION,
};
use hypercs::solvers::{apg_bpdn, recover_hybrid, recover_hybrid_nonortho, HaarBasis, SolverConfig, Trace};
use hypercs::transforms::SpectralBasis;
use ndarray::{Array2, ArrayView2};

use crate::error::CliError;
use crate::formats::{load_cube, load_measurements, save_cube, save_measurements};

#[derive(Debug, Parser)]
#[command(name = "hypercs", version, about = "Compressive hyperspectral acquisition and recovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a piecewise-constant synthetic cube.
    Phantom(PhantomArgs),
    /// Simulate separable compressive measurements of a cube.
    Acquire(AcquireArgs),
    /// Recover a cube from measurements.
    Recover(RecoverArgs),
    /// Print the squared relative error between two cubes.
    Eval(EvalArgs),
    /// Write three bands of a cube as a binary PPM image.
    Render(RenderArgs),
    /// Run both solvers over rate pairs and seeds, writing one CSV row per run.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct PhantomShape {
    #[arg(long, default_value_t = 32)]
    pub nv: usize,
    #[arg(long, default_value_t = 32)]
    pub nh: usize,
    #[arg(long, default_value_t = 16)]
    pub ns: usize,
    #[arg(long, default_value_t = 6)]
    pub regions: usize,
    #[arg(long, default_value_t = 2)]
    pub atoms: usize,
}

impl PhantomShape {
    fn spec(&self, seed: u64) -> Result<PhantomSpec, CliError> {
        for (n, what) in [(self.nv, "--nv"), (self.nh, "--nh"), (self.ns, "--ns")] {
            if !n.is_power_of_two() {
                return Err(CliError::Usage(format!("{what} must be a power of two, got {n}")));
            }
        }
        let spec = PhantomSpec {
            n_v: self.nv,
            n_h: self.nh,
            n_s: self.ns,
            n_regions: self.regions,
            n_atoms: self.atoms,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub shape: PhantomShape,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct AcquireArgs {
    #[arg(long)]
    pub cube: PathBuf,
    /// Spatial measurement rate in (0, 1].
    #[arg(long)]
    pub rp: f64,
    /// Spectral measurement rate in (0, 1].
    #[arg(long)]
    pub rs: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub sigma: f64,
    /// Master seed: spatial uses it directly, spectral +1, noise +2.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Override the number of low-pass spatial rows.
    #[arg(long)]
    pub qp: Option<usize>,
    /// Override the number of low-pass spectral rows.
    #[arg(long)]
    pub qs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Bpdn,
    Hybrid,
    /// Hybrid objective with a possibly non-orthonormal spectral dictionary.
    HybridDict,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma2: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub no_accelerate: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig<f64> {
        let d = SolverConfig::default();
        SolverConfig {
            lambda: self.lambda.unwrap_or(d.lambda),
            gamma: self.gamma.unwrap_or(d.gamma),
            gamma1: self.gamma1.unwrap_or(d.gamma1),
            gamma2: self.gamma2.unwrap_or(d.gamma2),
            tau: self.tau.unwrap_or(d.tau),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            accelerate: !self.no_accelerate,
        }
    }
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub meas: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Hybrid)]
    pub method: MethodArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Seed for the pixel sample used to learn the spectral basis
    /// (defaults to the spatial seed + 3).
    #[arg(long)]
    pub basis_sample_seed: Option<u64>,
    /// CSV matrix (n_s rows) used as the dictionary for hybrid-dict.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Ground-truth cube; enables per-iteration error and basis learning from it.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-iteration CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub recovered: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub cube: PathBuf,
    /// Band indices for the red, green and blue channels.
    #[arg(long, value_delimiter = ',', required = true)]
    pub bands: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Cube to sweep; a phantom is generated when absent.
    #[arg(long)]
    pub cube: Option<PathBuf>,
    #[command(flatten)]
    pub shape: PhantomShape,
    #[arg(long, default_value_t = 1)]
    pub phantom_seed: u64,
    /// Comma-separated `r_p:r_s` pairs.
    #[arg(long, value_delimiter = ',', value_parser = parse_rate_pair, required = true)]
    pub rates: Vec<(f64, f64)>,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long)]
    pub gamma2: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_rate_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected r_p:r_s, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Phantom(a) => phantom(&a),
        Command::Acquire(a) => acquire_cmd(&a),
        Command::Recover(a) => recover(&a),
        Command::Eval(a) => eval(&a),
        Command::Render(a) => render(&a),
        Command::Sweep(a) => sweep(&a),
    }
}

fn phantom(a: &PhantomArgs) -> Result<(), CliError> {
    let cube = generate_phantom::<f64>(&a.shape.spec(a.seed)?)?;
    save_cube(&a.out, &cube)
}

fn acquire_cmd(a: &AcquireArgs) -> Result<(), CliError> {
    if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
        return Err(CliError::Usage(format!("--sigma must be non-negative, got {}", a.sigma)));
    }
    let cube = load_cube(&a.cube)?;
    let (n_v, n_h, n_s) = cube.dims();
    let (m_p, q_p) = sampling_counts(a.rp, n_v * n_h, SPATIAL_LOW_PASS_FRACTION)?;
    let (m_s, q_s) = sampling_counts(a.rs, n_s, SPECTRAL_LOW_PASS_FRACTION)?;
    let plan = SeedPlan::from_master(a.seed);
    let pp = build_spatial_projector(n_v, n_h, m_p, a.qp.unwrap_or(q_p), plan.spatial)?;
    let sp = build_spectral_projector(n_s, m_s, a.qs.unwrap_or(q_s), plan.spectral)?;
    let meas = acquire(cube.as_band_pixel_matrix(), &sp, &pp, a.sigma, plan.noise)?;
    save_measurements(&a.out, &meas)
}

fn read_matrix_csv(path: &Path) -> Result<Array2<f64>, CliError> {
    let csv_err = |source| CliError::Csv { path: path.into(), source };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut rows: Vec<Vec<f64>> = vec![];
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Format { path: path.into(), msg: format!("row {}: {e}", rows.len() + 1) })?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    let n = rows.len();
    Array2::from_shape_vec((n, cols), rows.into_iter().flatten().collect())
        .map_err(|e| CliError::Format { path: path.into(), msg: e.to_string() })
}

fn write_trace(path: &Path, trace: &Trace<f64>, with_error: bool) -> Result<(), CliError> {
    let csv_err = |source| CliError::Csv { path: path.into(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["iter", "rel_change", "cost"];
    if with_error {
        header.push("rel_error");
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in &trace.records {
        let mut row = vec![r.iter.to_string(), r.rel_change.to_string(), r.cost.to_string()];
        if with_error {
            row.push(r.rel_error.map_or_else(String::new, |e| e.to_string()));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(path))
}

fn recover(a: &RecoverArgs) -> Result<(), CliError> {
    let meas = load_measurements(&a.meas)?;
    let (n_v, n_h, n_s) = meas.cube_dims();
    let truth = a.truth.as_deref().map(load_cube).transpose()?;
    if let Some(t) = &truth {
        if t.dims() != (n_v, n_h, n_s) {
            return Err(CliError::Usage(format!(
                "truth cube is {:?}, measurements describe {:?}",
                t.dims(),
                (n_v, n_h, n_s)
            )));
        }
    }
    if a.dictionary.is_some() && a.method != MethodArg::HybridDict {
        return Err(CliError::Usage("--dictionary only applies to --method hybrid-dict".into()));
    }
    let config = a.solver.config();
    let truth_view = truth.as_ref().map(Datacube::as_band_pixel_matrix);

    let learn = || -> Result<SpectralBasis<f64>, CliError> {
        let seed = a.basis_sample_seed.unwrap_or_else(|| meas.spatial.seed().wrapping_add(3));
        let source = match truth_view {
            Some(t) => t.to_owned(),
            None => meas.back_projection(),
        };
        Ok(sample_spectral_basis(source.view(), BASIS_SAMPLE_FRACTION, seed)?)
    };

    let (x, trace) = match a.method {
        MethodArg::Bpdn => apg_bpdn(&meas, &HaarBasis, &learn()?, &config, truth_view)?,
        MethodArg::Hybrid => recover_hybrid(&meas, &learn()?, &config, truth_view)?,
        MethodArg::HybridDict => {
            let dict = match &a.dictionary {
                Some(p) => SpectralBasis::dictionary(read_matrix_csv(p)?)?,
                None => SpectralBasis::dictionary(learn()?.matrix().to_owned())?,
            };
            recover_hybrid_nonortho(&meas, &dict, &config, truth_view)?
        }
    };

    save_cube(&a.out, &Datacube::from_band_pixel(n_v, n_h, x.clone())?)?;
    if let Some(p) = &a.trace {
        write_trace(p, &trace, truth.is_some())?;
    }
    println!("reason: {}", trace.reason);
    println!("iterations: {}", trace.iterations());
    if let Some(t) = truth_view {
        println!("relative_error: {}", relative_error(t, x.view())?);
    }
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let truth = load_cube(&a.truth)?;
    let rec = load_cube(&a.recovered)?;
    if truth.dims() != rec.dims() {
        return Err(CliError::Usage(format!(
            "cube dimensions differ: {:?} vs {:?}",
            truth.dims(),
            rec.dims()
        )));
    }
    let e = relative_error(truth.as_band_pixel_matrix(), rec.as_band_pixel_matrix())?;
    println!("{e}");
    Ok(())
}

/// Min-max scales a frame to 0..=255; a constant frame maps to mid-gray.
fn to_bytes(frame: ArrayView2<'_, f64>) -> Array2<u8> {
    let (lo, hi) = frame.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return Array2::from_elem(frame.dim(), 128);
    }
    frame.mapv(|v| ((v - lo) / (hi - lo) * 255.0).round() as u8)
}

fn render(a: &RenderArgs) -> Result<(), CliError> {
    if a.bands.len() != 3 {
        return Err(CliError::Usage(format!("--bands takes three indices, got {}", a.bands.len())));
    }
    let cube = load_cube(&a.cube)?;
    let (n_v, n_h, n_s) = cube.dims();
    let channels = a
        .bands
        .iter()
        .map(|&k| {
            if k >= n_s {
                return Err(CliError::Usage(format!("band {k} out of range for {n_s} bands")));
            }
            Ok(to_bytes(cube.frame(k)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = BufWriter::new(File::create(&a.out).map_err(CliError::io(&a.out))?);
    let mut buf = format!("P6\n{n_h} {n_v}\n255\n").into_bytes();
    for i in 0..n_v {
        for j in 0..n_h {
            buf.extend(channels.iter().map(|c| c[[i, j]]));
        }
    }
    w.write_all(&buf).and_then(|_| w.flush()).map_err(CliError::io(&a.out))
}

fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    if a.seeds.is_empty() {
        return Err(CliError::Usage("--seeds must list at least one seed".into()));
    }
    let source = match &a.cube {
        Some(p) => CubeSource::Cube(load_cube(p)?),
        None => CubeSource::Phantom(a.shape.spec(a.phantom_seed)?),
    };
    let mut bpdn = SolverConfig::default();
    let mut hybrid = SolverConfig::default();
    if let Some(g) = a.gamma {
        bpdn.gamma = g;
    }
    if let Some(g) = a.gamma1 {
        hybrid.gamma1 = g;
    }
    if let Some(g) = a.gamma2 {
        hybrid.gamma2 = g;
    }
    if let Some(c) = a.max_iters {
        bpdn.max_iters = c;
        hybrid.max_iters = c;
    }
    let spec = ExperimentSpec { source, rates: a.rates.clone(), sigma: a.sigma, bpdn, hybrid, seeds: a.seeds.clone() };
    let rows = run_experiment(&spec)?;

    let path = &a.out;
    let csv_err = |source| CliError::Csv { path: path.clone(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["method", "r_p", "r_s", "seed", "relative_error", "iterations", "reason", "wall_time_s"])
        .map_err(csv_err)?;
    for r in &rows {
        w.write_record([
            r.method.to_string(),
            r.r_p.to_string(),
            r.r_s.to_string(),
            r.seed.to_string(),
            r.relative_error.to_string(),
            r.iterations.to_string(),
            r.reason.to_string(),
            format!("{:.6}", r.wall_time.as_secs_f64()),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(path))
}
