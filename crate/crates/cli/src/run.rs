//! The three commands. Each writes its files into `output_dir` and returns
//! what it wrote, so callers can inspect results without re-parsing CSV.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use chmhd::forms::Discretization;
use chmhd::scheme::{FieldState, NoSources, Solver, Sources, StepDiagnostics};
use chmhd::verify::{error_norms, observed_rates, ErrorReport, Field, ManufacturedSolution, Rate};
use chmhd::{Mesh, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Initial, Mode, RunConfig};
use crate::output::{self, StepRow};
use crate::CliError;

/// Band the tracked convergence rates are expected to fall in.
pub const RATE_BAND: (f64, f64) = (1.7, 2.3);

/// Smooth seeded initial data: a cosine series for `phi` scaled into
/// [-0.9, 0.9], a stream-function velocity vanishing on the boundary and a
/// tangential magnetic field, both divergence-free with amplitude <= 0.1.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInitial {
    modes: Vec<(f64, f64, f64)>,
    u_amp: f64,
    b_amp: f64,
}

impl RandomInitial {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = Vec::new();
        for k in 0..4 {
            for l in 0..4 {
                modes.push((k as f64, l as f64, rng.gen_range(-1.0f64..1.0)));
            }
        }
        let total: f64 = modes.iter().map(|m| m.2.abs()).sum();
        for m in &mut modes {
            m.2 *= 0.9 / total;
        }
        Self { modes, u_amp: rng.gen_range(-0.1..0.1), b_amp: rng.gen_range(-0.1..0.1) }
    }

    pub fn phi(&self, p: Point) -> f64 {
        self.modes.iter().map(|&(k, l, a)| a * (k * PI * p[0]).cos() * (l * PI * p[1]).cos()).sum()
    }

    /// curl of `sin^2(pi x) sin^2(pi y) / pi`, scaled.
    pub fn velocity(&self, p: Point) -> [f64; 2] {
        let (sx, sy) = ((PI * p[0]).sin(), (PI * p[1]).sin());
        let a = self.u_amp;
        [a * sx * sx * (2.0 * PI * p[1]).sin(), -a * (2.0 * PI * p[0]).sin() * sy * sy]
    }

    pub fn magnetic(&self, p: Point) -> [f64; 2] {
        let (sx, cx) = (PI * p[0]).sin_cos();
        let (sy, cy) = (PI * p[1]).sin_cos();
        [self.b_amp * sx * cy, -self.b_amp * cx * sy]
    }
}

fn initial_state(solver: &Solver, initial: Initial, seed: u64, mms: &ManufacturedSolution) -> FieldState {
    let zero = |_: Point| [0.0, 0.0];
    match initial {
        Initial::Cosine => solver.initial_state(|p| (PI * p[0]).cos() * (PI * p[1]).cos(), zero, zero),
        Initial::Constant(c) => solver.initial_state(|_| c, zero, zero),
        Initial::Random => {
            let r = RandomInitial::new(seed);
            solver.initial_state(|p| r.phi(p), |p| r.velocity(p), |p| r.magnetic(p))
        }
        Initial::Manufactured => {
            let mut s = solver.initial_state(|p| mms.phi(p, 0.0), |p| mms.velocity(p, 0.0), |p| mms.magnetic(p, 0.0));
            let map = solver.discretization().dofmap(chmhd::forms::Space::Scalar);
            s.mu = map.interpolate(solver.discretization().mesh(), |p| mms.mu(p, 0.0));
            s
        }
    }
}

fn row(step: usize, solver: &Solver, state: &FieldState, mass0: f64, diag: Option<&StepDiagnostics>) -> StepRow {
    match diag {
        Some(d) => StepRow {
            step,
            t: state.t,
            energy: d.energy,
            picard_iters: d.iterations,
            increment: d.increment,
            max_weak_div: d.weak_divergence,
            mass_drift: (d.mass - mass0).abs(),
            max_solve_residual: d.max_solve_residual(),
        },
        None => StepRow {
            step,
            t: state.t,
            energy: solver.energy(state),
            picard_iters: 0,
            increment: 0.0,
            max_weak_div: solver.weak_divergence(&state.u),
            mass_drift: 0.0,
            max_solve_residual: 0.0,
        },
    }
}

/// Step `steps` times, calling `visit` after the initial state and after
/// every step. Returns the final state and one row per visited state.
fn march(
    solver: &Solver,
    mut state: FieldState,
    sources: &dyn Sources,
    steps: usize,
    mut visit: impl FnMut(usize, &FieldState) -> Result<(), CliError>,
) -> Result<(FieldState, Vec<StepRow>), CliError> {
    let mass0 = solver.mass(&state.phi);
    let mut rows = vec![row(0, solver, &state, mass0, None)];
    visit(0, &state)?;
    for k in 1..=steps {
        let (next, d) = solver.step(&state, sources).map_err(|e| CliError::Step { step: k, source: e })?;
        state = next;
        log::debug!("step {k}: t = {:.6} E = {:.12e} iterations = {}", state.t, d.energy, d.iterations);
        rows.push(row(k, solver, &state, mass0, Some(&d)));
        visit(k, &state)?;
    }
    Ok((state, rows))
}

fn make_solver(cfg: &RunConfig, n: usize, dt: f64, t_final: f64) -> Result<Solver, CliError> {
    let params = cfg.scheme_params(dt, t_final)?;
    let mesh = Mesh::unit_square(n).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Solver::new(Discretization::new(mesh)?, params)?)
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn thread_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))
}

#[derive(Debug, Clone)]
pub struct LevelOutcome {
    pub report: ErrorReport,
    pub rows: Vec<StepRow>,
}

#[derive(Debug, Clone)]
pub struct ConvergeOutcome {
    pub levels: Vec<LevelOutcome>,
    pub rates: Vec<Rate>,
}

impl ConvergeOutcome {
    /// Rates of the norms the study is judged on.
    pub fn tracked_rates(&self) -> impl Iterator<Item = &Rate> {
        self.rates.iter().filter(|r| r.norm == r.field.tracked_norm())
    }

    pub fn rates_in_band(&self) -> bool {
        self.tracked_rates().all(|r| r.rate >= RATE_BAND.0 && r.rate <= RATE_BAND.1)
    }

    pub fn summary(&self) -> String {
        let mut s = String::from("field  norm  levels     rate\n");
        for field in Field::ALL {
            for r in self.tracked_rates().filter(|r| r.field == field) {
                let ok = if r.rate >= RATE_BAND.0 && r.rate <= RATE_BAND.1 { "ok" } else { "OUT OF BAND" };
                s += &format!("{:<6} {:<5} {:>3}->{:<4} {:.3} {ok}\n", r.field, r.norm, r.n_coarse, r.n_fine, r.rate);
            }
        }
        s
    }
}

fn run_level(cfg: &RunConfig, n: usize) -> Result<LevelOutcome, CliError> {
    let (dt, steps) = cfg.time_grid(n, cfg.t_final)?;
    let solver = make_solver(cfg, n, dt, cfg.t_final)?;
    let mms = ManufacturedSolution::new(solver.params());
    let state = initial_state(&solver, Initial::Manufactured, cfg.seed, &mms);
    let (state, rows) = march(&solver, state, &mms, steps, |_, _| Ok(()))?;
    let path = cfg.output_dir.join(format!("diag_n{n}.csv"));
    output::write_diag(&path, &rows).map_err(|e| CliError::io(&path, e))?;
    let report = error_norms(solver.discretization(), &state, &mms, state.t, dt);
    Ok(LevelOutcome { report, rows })
}

/// Manufactured-solution runs on every level; writes `errors.csv`,
/// `rates.csv` and one `diag_n<n>.csv` per level.
pub fn converge(cfg: &RunConfig) -> Result<ConvergeOutcome, CliError> {
    cfg.check_mode(Mode::Converge)?;
    if cfg.levels.len() < 2 {
        return Err(CliError::Config(format!("converge needs at least two levels, got {:?}", cfg.levels)));
    }
    if cfg.t_final <= 0.0 {
        return Err(CliError::Config("converge needs t_final > 0".into()));
    }
    let mut sorted = cfg.levels.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted != cfg.levels || cfg.levels.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(CliError::Config(format!("levels must double from one to the next, got {:?}", cfg.levels)));
    }
    prepare_dir(&cfg.output_dir)?;
    let results: Vec<_> = thread_pool(cfg)?.install(|| {
        cfg.levels
            .par_iter()
            .map(|&n| run_level(cfg, n).map_err(|e| CliError::Level { n, source: Box::new(e) }))
            .collect()
    });
    let levels = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<ErrorReport> = levels.iter().map(|l| l.report.clone()).collect();
    let rates = observed_rates(&reports)?;
    let errors_path = cfg.output_dir.join("errors.csv");
    output::write_errors(&errors_path, &reports).map_err(|e| CliError::io(&errors_path, e))?;
    let rates_path = cfg.output_dir.join("rates.csv");
    output::write_rates(&rates_path, &rates).map_err(|e| CliError::io(&rates_path, e))?;
    Ok(ConvergeOutcome { levels, rates })
}

#[derive(Debug, Clone)]
pub struct EnergyOutcome {
    pub rows: Vec<StepRow>,
    /// Largest `E^n - E^{n-1}` over the run (negative when strictly decreasing).
    pub max_increase: f64,
    pub pass: bool,
}

/// Energies below this are rounding noise (a pure phase evaluates to ~1e-30).
pub const ENERGY_FLOOR: f64 = 1e-12;

/// Whether `E^n <= E^{n-1} + slack max(|E^0|, ENERGY_FLOOR)` holds at every
/// step, and the largest step change.
pub fn energy_check(rows: &[StepRow], slack: f64) -> (bool, f64) {
    let Some(first) = rows.first() else { return (true, f64::NEG_INFINITY) };
    let allowed = slack * first.energy.abs().max(ENERGY_FLOOR);
    let max_increase = rows.windows(2).map(|w| w[1].energy - w[0].energy).fold(f64::NEG_INFINITY, f64::max);
    (rows.windows(2).all(|w| w[1].energy <= w[0].energy + allowed), max_increase)
}

/// Zero-source run from the configured initial data; writes `energy.csv`
/// and checks `E^n <= E^{n-1} + slack |E^0|` at every step.
pub fn energy(cfg: &RunConfig) -> Result<EnergyOutcome, CliError> {
    cfg.check_mode(Mode::Energy)?;
    let initial = cfg.initial()?;
    if initial == Initial::Manufactured {
        return Err(CliError::Config("energy runs have no sources; use simulate for \"mms\"".into()));
    }
    let dt = cfg.dt.unwrap_or(0.01);
    let steps = match cfg.steps {
        Some(s) => s,
        None => cfg.time_grid(cfg.n, cfg.t_final)?.1,
    };
    let solver = make_solver(cfg, cfg.n, dt, dt * steps as f64)?;
    let mms = ManufacturedSolution::new(solver.params());
    prepare_dir(&cfg.output_dir)?;
    let state = initial_state(&solver, initial, cfg.seed, &mms);
    let (_, rows) = march(&solver, state, &NoSources, steps, |_, _| Ok(()))?;
    let path = cfg.output_dir.join("energy.csv");
    output::write_energy(&path, &rows).map_err(|e| CliError::io(&path, e))?;
    let (pass, max_increase) = energy_check(&rows, cfg.energy_slack);
    Ok(EnergyOutcome { rows, max_increase, pass })
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub rows: Vec<StepRow>,
    pub final_state: FieldState,
    pub snapshots: usize,
}

/// Plain time stepping with per-step diagnostics in `diag.csv` and optional
/// `snap_XXXX.vtk` snapshots. The manufactured initial data brings its
/// sources along; everything else runs unforced.
pub fn simulate(cfg: &RunConfig) -> Result<SimulateOutcome, CliError> {
    cfg.check_mode(Mode::Simulate)?;
    let initial = cfg.initial()?;
    let (dt, steps) = cfg.time_grid(cfg.n, cfg.t_final)?;
    let solver = make_solver(cfg, cfg.n, dt, cfg.t_final)?;
    let mms = ManufacturedSolution::new(solver.params());
    let sources: &dyn Sources = if initial == Initial::Manufactured { &mms } else { &NoSources };
    prepare_dir(&cfg.output_dir)?;
    let state = initial_state(&solver, initial, cfg.seed, &mms);
    let mut snapshots = 0;
    let every = cfg.snapshot_every;
    let (final_state, rows) = march(&solver, state, sources, steps, |k, s| {
        if every > 0 && k % every == 0 {
            let path = cfg.output_dir.join(format!("snap_{k:04}.vtk"));
            output::write_vtk(&path, solver.discretization(), s).map_err(|e| CliError::io(&path, e))?;
            snapshots += 1;
        }
        Ok(())
    })?;
    let path = cfg.output_dir.join("diag.csv");
    output::write_diag(&path, &rows).map_err(|e| CliError::io(&path, e))?;
    Ok(SimulateOutcome { rows, final_state, snapshots })
}
