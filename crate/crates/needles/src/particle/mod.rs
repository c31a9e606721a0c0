//! Stochastic simulation of `N` hard Brownian needles on the torus.
//!
//! Each needle carries independent translational and rotational Brownian
//! motion plus an optional state-dependent drift; hard-core exclusion is
//! enforced by per-particle proposal rejection: a Euler–Maruyama move that
//! would create an overlap is discarded and the needle keeps its state for
//! that step. Rejection preserves admissibility exactly and converges to the
//! reflected dynamics as `dt → 0` (the discrete scheme carries an `O(√dt)`
//! weak bias near contact). Particles are updated sequentially in a fresh
//! random permutation each step to avoid order bias.
//!
//! Randomness is organized in counter-based streams keyed by
//! `(seed, particle, step)` ([`rng::substream`]), so a trajectory is
//! bitwise-reproducible from `(params, seed)` alone and independent
//! realizations can run in parallel. Neighbor search uses a torus cell list
//! ([`cells::CellList`]) whose candidate sets provably cover every
//! overlapping pair.

pub mod cells;
pub mod rng;

use nalgebra::Vector2;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{needles_overlap, reduce_angle, NeedleConfig, Torus2};
use cells::CellList;
use rng::{substream, SHUFFLE_STREAM};

/// Stream id for initial-condition sampling (outside the particle-id range).
const INIT_STREAM: u64 = u64::MAX - 1;

/// Rejection-sampling guard: attempts before reporting saturation.
const MAX_SAMPLING_ATTEMPTS: u64 = 1_000_000;

/// Angular histogram resolution (5° bins over `[0, π)`).
pub const ANGULAR_BINS: usize = 36;

/// Spatial histogram resolution per axis.
pub const SPATIAL_BINS: usize = 16;

/// Candidate prefilter margin: two needles of length `eps` can only touch
/// when their centres are within `eps` (plus the grazing tolerance, covered
/// by this relative slack) of each other.
const REACH_MARGIN: f64 = 1.0 + 1e-6;

/// External drift `f = (f_T, f_R)` acting on a single needle; may depend on
/// the needle's own position and orientation but never on other needles.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    None,
    /// Constant force and torque.
    Uniform {
        f_t: Vector2<f64>,
        f_r: f64,
    },
    /// Gridded `f(x, θ)`, sampled at the nearest node.
    Tabulated(DriftTable),
}

impl DriftSpec {
    fn at(&self, torus: &Torus2, x: Vector2<f64>, theta: f64) -> (Vector2<f64>, f64) {
        match self {
            DriftSpec::None => (Vector2::zeros(), 0.0),
            DriftSpec::Uniform { f_t, f_r } => (*f_t, *f_r),
            DriftSpec::Tabulated(table) => table.at(torus, x, theta),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DriftSpec::None => Ok(()),
            DriftSpec::Uniform { f_t, f_r } => {
                if f_t.x.is_finite() && f_t.y.is_finite() && f_r.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("drift", "uniform drift must be finite"))
                }
            }
            DriftSpec::Tabulated(_) => Ok(()), // validated at construction
        }
    }
}

/// Drift components on a periodic `nx × ny × mθ` grid, layout
/// `(j·nx + i)·mθ + k` with the angular index fastest (θ period π).
#[derive(Debug, Clone, PartialEq)]
pub struct DriftTable {
    nx: usize,
    ny: usize,
    mt: usize,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fr: Vec<f64>,
}

impl DriftTable {
    pub fn new(
        nx: usize,
        ny: usize,
        mt: usize,
        fx: Vec<f64>,
        fy: Vec<f64>,
        fr: Vec<f64>,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 || mt == 0 {
            return Err(Error::invalid("drift", "grid axes must be nonempty"));
        }
        let len = nx * ny * mt;
        for (name, v) in [("fx", &fx), ("fy", &fy), ("fr", &fr)] {
            if v.len() != len {
                return Err(Error::invalid(
                    "drift",
                    format!("{name} must have {len} samples, got {}", v.len()),
                ));
            }
            if v.iter().any(|s| !s.is_finite()) {
                return Err(Error::invalid(
                    "drift",
                    format!("{name} contains a non-finite sample"),
                ));
            }
        }
        Ok(DriftTable {
            nx,
            ny,
            mt,
            fx,
            fy,
            fr,
        })
    }

    fn at(&self, torus: &Torus2, x: Vector2<f64>, theta: f64) -> (Vector2<f64>, f64) {
        let w = torus.wrap(x);
        let i = ((w.x / torus.lx() * self.nx as f64).round() as usize) % self.nx;
        let j = ((w.y / torus.ly() * self.ny as f64).round() as usize) % self.ny;
        let k = ((reduce_angle(theta) / PI * self.mt as f64).round() as usize) % self.mt;
        let idx = (j * self.nx + i) * self.mt + k;
        (Vector2::new(self.fx[idx], self.fy[idx]), self.fr[idx])
    }
}

/// Full parameter set of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub n: usize,
    /// Needle length.
    pub eps: f64,
    pub d_t: f64,
    pub d_r: f64,
    pub dt: f64,
    pub torus: Torus2,
    pub drift: DriftSpec,
    pub seed: u64,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("N", "need at least one needle"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid(
                "eps",
                format!("must be positive, got {}", self.eps),
            ));
        }
        if self.eps >= 0.5 * self.torus.lx().min(self.torus.ly()) {
            return Err(Error::invalid(
                "eps",
                format!(
                    "needle length {} must be below half the box period {}",
                    self.eps,
                    self.torus.lx().min(self.torus.ly())
                ),
            ));
        }
        for (name, v) in [("D_T", self.d_t), ("D_R", self.d_r)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be ≥ 0, got {v}")));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        self.drift.validate()
    }

    /// Occupied fraction `φ = N·eps²/(Lx·Ly)` — the interaction strength.
    pub fn occupied_fraction(&self) -> f64 {
        self.n as f64 * self.eps * self.eps / (self.torus.lx() * self.torus.ly())
    }

    /// Resolution warning: the rejection scheme needs the typical
    /// translational step `√(2 D_T dt)` to stay well below the needle
    /// length; beyond `eps/4` the contact bias becomes visible.
    pub fn resolution_warning(&self) -> Option<String> {
        let step = (2.0 * self.d_t * self.dt).sqrt();
        if step > 0.25 * self.eps {
            Some(format!(
                "translational step √(2 D_T dt) = {step:.3e} exceeds eps/4 = {:.3e}; \
                 near-contact dynamics will be biased (reduce dt below {:.3e})",
                0.25 * self.eps,
                self.eps * self.eps / (32.0 * self.d_t.max(f64::MIN_POSITIVE)),
            ))
        } else {
            None
        }
    }
}

/// The microstate of all needles plus unwrapped coordinates for
/// displacement statistics. Wrapped configurations (`needles`) are
/// canonical; the unwrapped copies accumulate raw increments and never wrap.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    torus: Torus2,
    time: f64,
    needles: Vec<NeedleConfig>,
    unwrapped_x: Vec<Vector2<f64>>,
    unwrapped_theta: Vec<f64>,
}

impl ParticleState {
    /// Wrap a needle list into a state, revalidating every needle against
    /// the box and requiring a common length and pairwise admissibility.
    pub fn new(needles: Vec<NeedleConfig>, torus: Torus2) -> Result<Self> {
        if needles.is_empty() {
            return Err(Error::invalid("needles", "need at least one needle"));
        }
        let eps = needles[0].eps;
        let canonical: Result<Vec<NeedleConfig>> = needles
            .iter()
            .map(|c| {
                if c.eps != eps {
                    return Err(Error::invalid(
                        "needles",
                        "all needles must share one length",
                    ));
                }
                NeedleConfig::new(torus.wrap(c.x), c.theta, c.eps, &torus)
            })
            .collect();
        let canonical = canonical?;
        if !configuration_admissible(&canonical, &torus) {
            return Err(Error::invalid(
                "needles",
                "initial configuration contains an overlap",
            ));
        }
        Ok(Self::from_admissible(canonical, torus))
    }

    fn from_admissible(needles: Vec<NeedleConfig>, torus: Torus2) -> Self {
        let unwrapped_x = needles.iter().map(|c| c.x).collect();
        let unwrapped_theta = needles.iter().map(|c| c.theta).collect();
        ParticleState {
            torus,
            time: 0.0,
            needles,
            unwrapped_x,
            unwrapped_theta,
        }
    }

    pub fn n(&self) -> usize {
        self.needles.len()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn torus(&self) -> &Torus2 {
        &self.torus
    }

    pub fn needles(&self) -> &[NeedleConfig] {
        &self.needles
    }

    /// Unwrapped centre trajectories (for mean-square displacement).
    pub fn unwrapped_positions(&self) -> &[Vector2<f64>] {
        &self.unwrapped_x
    }

    /// Unwrapped orientations (winding included).
    pub fn unwrapped_angles(&self) -> &[f64] {
        &self.unwrapped_theta
    }

    /// Nematic order parameter `S = |⟨e^{2iΘ}⟩| ∈ [0, 1]` (doubled angles:
    /// needles are apolar with period π).
    pub fn nematic_order(&self) -> f64 {
        let sum: Complex64 = self
            .needles
            .iter()
            .map(|c| Complex64::from_polar(1.0, 2.0 * c.theta))
            .sum();
        sum.norm() / self.needles.len() as f64
    }

    /// Full pairwise admissibility check (cell-list accelerated).
    pub fn is_admissible(&self) -> bool {
        configuration_admissible(&self.needles, &self.torus)
    }
}

/// Expected nematic order of `n` independent uniform orientations,
/// `√(π/(4n))` (the mean of the Rayleigh-distributed modulus of the mean of
/// `n` random unit vectors).
pub fn isotropic_order_baseline(n: usize) -> f64 {
    (PI / (4.0 * n as f64)).sqrt()
}

/// Standard deviation of the nematic order under the same null model,
/// `√((4−π)/(4n))`.
pub fn isotropic_order_std(n: usize) -> f64 {
    ((4.0 - PI) / (4.0 * n as f64)).sqrt()
}

/// Whether any candidate pair overlaps; the prefilter discards candidates
/// whose centres are farther apart than the needle reach.
fn configuration_admissible(needles: &[NeedleConfig], torus: &Torus2) -> bool {
    if needles.len() < 2 {
        return true;
    }
    let eps = needles[0].eps;
    let reach2 = (eps * REACH_MARGIN) * (eps * REACH_MARGIN);
    let xs: Vec<Vector2<f64>> = needles.iter().map(|c| c.x).collect();
    let cells = CellList::build(torus, eps, &xs);
    let mut buf = Vec::new();
    for (i, c) in needles.iter().enumerate() {
        cells.candidates_into(c.x, &mut buf);
        for &j in &buf {
            if j <= i {
                continue;
            }
            if torus.min_image(needles[j].x, c.x).norm_squared() > reach2 {
                continue;
            }
            if needles_overlap(c, &needles[j], torus) {
                return false;
            }
        }
    }
    true
}

/// Whether a proposed needle overlaps any *other* current needle.
fn proposal_overlaps(
    proposal: &NeedleConfig,
    skip: usize,
    needles: &[NeedleConfig],
    torus: &Torus2,
    cells: &CellList,
    buf: &mut Vec<usize>,
) -> bool {
    let reach2 = (proposal.eps * REACH_MARGIN) * (proposal.eps * REACH_MARGIN);
    cells.candidates_into(proposal.x, buf);
    for &j in buf.iter() {
        if j == skip {
            continue;
        }
        if torus.min_image(needles[j].x, proposal.x).norm_squared() > reach2 {
            continue;
        }
        if needles_overlap(proposal, &needles[j], torus) {
            return true;
        }
    }
    false
}

fn draw_config(rng: &mut ChaCha8Rng, params: &SimParams) -> NeedleConfig {
    let x = Vector2::new(
        rng.gen::<f64>() * params.torus.lx(),
        rng.gen::<f64>() * params.torus.ly(),
    );
    let theta = rng.gen::<f64>() * PI;
    NeedleConfig {
        x,
        theta,
        eps: params.eps,
    }
}

/// Draw the exact uniform product measure conditioned on no overlap, by
/// whole-configuration rejection. Also returns the number of attempts (the
/// acceptance probability is the complement of the mean excluded fraction).
pub fn sample_admissible_initial_with_attempts(params: &SimParams) -> Result<(ParticleState, u64)> {
    params.validate()?;
    for attempt in 0..MAX_SAMPLING_ATTEMPTS {
        let mut rng = substream(params.seed, INIT_STREAM, attempt);
        let needles: Vec<NeedleConfig> = (0..params.n)
            .map(|_| draw_config(&mut rng, params))
            .collect();
        if configuration_admissible(&needles, &params.torus) {
            return Ok((
                ParticleState::from_admissible(needles, params.torus),
                attempt + 1,
            ));
        }
    }
    Err(Error::Saturation {
        attempts: MAX_SAMPLING_ATTEMPTS,
    })
}

/// Uniform product measure conditioned on no overlap (see
/// [`sample_admissible_initial_with_attempts`]). Fails with a saturation
/// error when the occupied fraction makes whole-configuration rejection
/// hopeless — use [`sample_sequential_initial`] for dense starts.
pub fn sample_admissible_initial(params: &SimParams) -> Result<ParticleState> {
    Ok(sample_admissible_initial_with_attempts(params)?.0)
}

/// Random sequential insertion: each needle is redrawn until it avoids the
/// already-placed ones. Reaches much higher densities than conditioned
/// rejection but the resulting measure is *not* the conditioned product
/// measure (adsorption bias); useful as an admissible starting point when
/// only the long-time behaviour matters.
pub fn sample_sequential_initial(params: &SimParams) -> Result<ParticleState> {
    params.validate()?;
    let mut rng = substream(params.seed, INIT_STREAM, u64::MAX);
    let reach2 = (params.eps * REACH_MARGIN) * (params.eps * REACH_MARGIN);
    let mut needles: Vec<NeedleConfig> = Vec::with_capacity(params.n);
    for _ in 0..params.n {
        let mut placed = false;
        for _ in 0..MAX_SAMPLING_ATTEMPTS {
            let cfg = draw_config(&mut rng, params);
            let clash = needles.iter().any(|other| {
                params.torus.min_image(other.x, cfg.x).norm_squared() <= reach2
                    && needles_overlap(&cfg, other, &params.torus)
            });
            if !clash {
                needles.push(cfg);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Saturation {
                attempts: MAX_SAMPLING_ATTEMPTS,
            });
        }
    }
    Ok(ParticleState::from_admissible(needles, params.torus))
}

/// One Euler–Maruyama sweep over all particles (random update order), with
/// per-particle hard-core rejection; returns the number of accepted moves.
/// The state's cell list is kept consistent across accepted moves.
fn advance(
    state: &mut ParticleState,
    params: &SimParams,
    step_index: u64,
    cells: &mut CellList,
    order: &mut Vec<usize>,
    buf: &mut Vec<usize>,
) -> usize {
    let torus = state.torus;
    let sig_t = (2.0 * params.d_t * params.dt).sqrt();
    let sig_r = (2.0 * params.d_r * params.dt).sqrt();
    order.clear();
    order.extend(0..state.needles.len());
    order.shuffle(&mut substream(params.seed, SHUFFLE_STREAM, step_index));
    let mut accepted = 0;
    for &i in order.iter() {
        let mut prng = substream(params.seed, i as u64, step_index);
        let zx: f64 = prng.sample(StandardNormal);
        let zy: f64 = prng.sample(StandardNormal);
        let zr: f64 = prng.sample(StandardNormal);
        let cur = state.needles[i];
        let (f_t, f_r) = params.drift.at(&torus, cur.x, cur.theta);
        let dx = Vector2::new(
            sig_t * zx + f_t.x * params.dt,
            sig_t * zy + f_t.y * params.dt,
        );
        let dtheta = sig_r * zr + f_r * params.dt;
        let proposal = NeedleConfig {
            x: torus.wrap(cur.x + dx),
            theta: reduce_angle(cur.theta + dtheta),
            eps: cur.eps,
        };
        if !proposal_overlaps(&proposal, i, &state.needles, &torus, cells, buf) {
            state.needles[i] = proposal;
            state.unwrapped_x[i] += dx;
            state.unwrapped_theta[i] += dtheta;
            cells.relocate(i, proposal.x);
            accepted += 1;
        }
    }
    state.time += params.dt;
    debug_assert!(
        configuration_admissible(&state.needles, &torus),
        "hard-core rejection must preserve admissibility"
    );
    accepted
}

/// Result of one public [`step`].
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: ParticleState,
    /// Accepted moves out of `N` proposals.
    pub accepted: usize,
}

/// Advance one step. Deterministic in `(state, params.seed, step_index)`:
/// all noise comes from streams keyed by those values, never from global
/// state.
pub fn step(state: &ParticleState, params: &SimParams, step_index: u64) -> Result<StepOutcome> {
    params.validate()?;
    check_state(state, params)?;
    let mut next = state.clone();
    let xs: Vec<Vector2<f64>> = next.needles.iter().map(|c| c.x).collect();
    let mut cells = CellList::build(&params.torus, params.eps, &xs);
    let mut order = Vec::new();
    let mut buf = Vec::new();
    let accepted = advance(
        &mut next, params, step_index, &mut cells, &mut order, &mut buf,
    );
    Ok(StepOutcome {
        state: next,
        accepted,
    })
}

fn check_state(state: &ParticleState, params: &SimParams) -> Result<()> {
    if state.n() != params.n {
        return Err(Error::invalid(
            "state",
            format!(
                "state holds {} needles, params expect {}",
                state.n(),
                params.n
            ),
        ));
    }
    if state.needles[0].eps != params.eps {
        return Err(Error::invalid(
            "state",
            format!(
                "state needle length {} differs from params.eps {}",
                state.needles[0].eps, params.eps
            ),
        ));
    }
    if state.torus != params.torus {
        return Err(Error::invalid("state", "state box differs from params box"));
    }
    Ok(())
}

/// Time series of observables sampled along one trajectory. All per-time
/// vectors are aligned with `times`; histograms are probability masses
/// (each sums to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    /// Nematic order `S ∈ [0, 1]`.
    pub nematic_order: Vec<f64>,
    /// Orientation histogram over `[0, π)`, `angular_bins` bins.
    pub angular_histograms: Vec<Vec<f64>>,
    /// Centre histogram over the box, `spatial_bins.0 × spatial_bins.1`
    /// bins, row-major.
    pub spatial_histograms: Vec<Vec<f64>>,
    /// Mean squared unwrapped centre displacement since the start of the run.
    pub msd_translational: Vec<f64>,
    /// Mean squared unwrapped orientation displacement since the start.
    pub msd_angular: Vec<f64>,
    /// Accepted-move fraction over the steps since the previous record
    /// (defined as 1 at the initial record).
    pub acceptance: Vec<f64>,
    pub angular_bins: usize,
    pub spatial_bins: (usize, usize),
}

impl ObservableSeries {
    fn new() -> Self {
        ObservableSeries {
            times: Vec::new(),
            nematic_order: Vec::new(),
            angular_histograms: Vec::new(),
            spatial_histograms: Vec::new(),
            msd_translational: Vec::new(),
            msd_angular: Vec::new(),
            acceptance: Vec::new(),
            angular_bins: ANGULAR_BINS,
            spatial_bins: (SPATIAL_BINS, SPATIAL_BINS),
        }
    }

    fn record(
        &mut self,
        state: &ParticleState,
        ref_x: &[Vector2<f64>],
        ref_theta: &[f64],
        acceptance: f64,
    ) {
        let n = state.n() as f64;
        let weight = 1.0 / n;
        let mut angular = vec![0.0; self.angular_bins];
        let mut spatial = vec![0.0; self.spatial_bins.0 * self.spatial_bins.1];
        for c in state.needles() {
            let ak =
                ((c.theta / PI * self.angular_bins as f64) as usize).min(self.angular_bins - 1);
            angular[ak] += weight;
            let w = state.torus.wrap(c.x);
            let bx = ((w.x / state.torus.lx() * self.spatial_bins.0 as f64) as usize)
                .min(self.spatial_bins.0 - 1);
            let by = ((w.y / state.torus.ly() * self.spatial_bins.1 as f64) as usize)
                .min(self.spatial_bins.1 - 1);
            spatial[by * self.spatial_bins.0 + bx] += weight;
        }
        let msd_t = state
            .unwrapped_x
            .iter()
            .zip(ref_x)
            .map(|(u, r)| (u - r).norm_squared())
            .sum::<f64>()
            / n;
        let msd_r = state
            .unwrapped_theta
            .iter()
            .zip(ref_theta)
            .map(|(u, r)| (u - r) * (u - r))
            .sum::<f64>()
            / n;
        self.times.push(state.time);
        self.nematic_order.push(state.nematic_order());
        self.angular_histograms.push(angular);
        self.spatial_histograms.push(spatial);
        self.msd_translational.push(msd_t);
        self.msd_angular.push(msd_r);
        self.acceptance.push(acceptance);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Run from a given admissible state for `round(t_end/dt)` steps, recording
/// observables at the initial state, every `observe_every` steps, and at the
/// final step. Step indices (and hence noise streams) restart at zero: to
/// continue a trajectory with fresh noise, change the seed.
pub fn run_from(
    initial: ParticleState,
    params: &SimParams,
    t_end: f64,
    observe_every: usize,
) -> Result<ObservableSeries> {
    params.validate()?;
    check_state(&initial, params)?;
    if observe_every == 0 {
        return Err(Error::invalid("observe_every", "must be at least 1"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::invalid("t_end", format!("must be ≥ 0, got {t_end}")));
    }
    let n_steps = (t_end / params.dt).round() as u64;

    let mut state = initial;
    let ref_x = state.unwrapped_x.clone();
    let ref_theta = state.unwrapped_theta.clone();
    let xs: Vec<Vector2<f64>> = state.needles.iter().map(|c| c.x).collect();
    let mut cells = CellList::build(&params.torus, params.eps, &xs);
    let mut order = Vec::new();
    let mut buf = Vec::new();

    let mut series = ObservableSeries::new();
    series.record(&state, &ref_x, &ref_theta, 1.0);
    let mut window_accepted = 0usize;
    let mut window_steps = 0u64;
    for s in 0..n_steps {
        window_accepted += advance(&mut state, params, s, &mut cells, &mut order, &mut buf);
        window_steps += 1;
        if (s + 1) % observe_every as u64 == 0 || s + 1 == n_steps {
            let rate = window_accepted as f64 / (window_steps as f64 * params.n as f64);
            series.record(&state, &ref_x, &ref_theta, rate);
            window_accepted = 0;
            window_steps = 0;
        }
    }
    Ok(series)
}

/// Sample an initial condition and run (see [`run_from`]); sampling errors
/// (saturation at high density) propagate.
pub fn run(params: &SimParams, t_end: f64, observe_every: usize) -> Result<ObservableSeries> {
    run_from(
        sample_admissible_initial(params)?,
        params,
        t_end,
        observe_every,
    )
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of the excluded configuration volume around one
/// needle — the measure (in `dx dθ`, θ over `[0, π)`) of second-needle
/// configurations that overlap it. The exact value is
/// `∫₀^π eps² sin θ dθ = 2 eps²`.
pub fn estimate_excluded_volume(
    eps: f64,
    n_samples: u64,
    rng: &mut impl Rng,
) -> Result<MonteCarloEstimate> {
    mc_excluded(eps, None, n_samples, rng)
}

/// Monte Carlo estimate of the excluded *area* at a fixed relative angle
/// `θ̃` (the rhombus slice, exact value `eps² sin θ̃`; a square cross-section
/// of area `eps²` at `θ̃ = π/2`).
pub fn excluded_area_at_angle(
    eps: f64,
    theta_rel: f64,
    n_samples: u64,
    rng: &mut impl Rng,
) -> Result<MonteCarloEstimate> {
    if !theta_rel.is_finite() {
        return Err(Error::invalid("theta", "must be finite"));
    }
    mc_excluded(eps, Some(theta_rel), n_samples, rng)
}

fn mc_excluded(
    eps: f64,
    theta_rel: Option<f64>,
    n_samples: u64,
    rng: &mut impl Rng,
) -> Result<MonteCarloEstimate> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps", format!("must be ≥ 0, got {eps}")));
    }
    if n_samples < 10_000 {
        return Err(Error::invalid(
            "n_samples",
            format!("need at least 10⁴ samples for a meaningful error bar, got {n_samples}"),
        ));
    }
    if eps == 0.0 {
        return Ok(MonteCarloEstimate {
            value: 0.0,
            std_error: 0.0,
        });
    }
    // Box comfortably larger than the needle; the probe measure is
    // Lx·Ly·π (or Lx·Ly at fixed relative angle).
    let l = (5.0 * eps).max(1.0);
    let torus = Torus2::square(l)?;
    let reference = NeedleConfig::new(Vector2::new(0.5 * l, 0.5 * l), 0.0, eps, &torus)?;
    let mut hits = 0u64;
    for _ in 0..n_samples {
        let theta = match theta_rel {
            Some(t) => reduce_angle(t),
            None => rng.gen::<f64>() * PI,
        };
        let probe = NeedleConfig {
            x: Vector2::new(rng.gen::<f64>() * l, rng.gen::<f64>() * l),
            theta,
            eps,
        };
        if needles_overlap(&reference, &probe, &torus) {
            hits += 1;
        }
    }
    let p = hits as f64 / n_samples as f64;
    let measure = match theta_rel {
        Some(_) => l * l,
        None => l * l * PI,
    };
    Ok(MonteCarloEstimate {
        value: measure * p,
        std_error: measure * (p * (1.0 - p) / n_samples as f64).sqrt(),
    })
}
