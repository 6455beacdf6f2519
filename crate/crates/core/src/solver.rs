//! VB-EM: coordinate descent on the free-energy gap.
//!
//! One sweep recomputes `⟨log a_k⟩` and the moments of `b` from the current
//! responsibilities, then the responsibilities themselves, then ΔF. Each
//! sweep is a mean-field coordinate step, so ΔF never increases.
//!
//! [`solve`] runs the iteration from several starting points and keeps the
//! lowest ΔF: above the phase boundary the minimizer spreads mass α₀ n over
//! the sample, below it the mass concentrates on a few extreme points, and
//! one start does not reach both basins.
//!
//! Internally the sample is processed in sorted order and results are mapped
//! back, which makes the output exactly equivariant under permutations.

use alloc::vec;
use alloc::vec::Vec;

use crate::asymptotics::alpha_star;
use crate::error::{Error, Result};
use crate::model::{
    b_moments_from, free_energy_gap, gap_from_parts, gap_kernel, log_weights_from,
    posterior_moments, stats, update_into, Hyperparameters, LogOdds, PosteriorMoments,
    Responsibilities, Sample, Stats,
};
use crate::sampling::{mix_seed, Stream, TAG_STARTS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop once a sweep changes ΔF by less than this.
    pub tol: f64,
    pub max_iters: usize,
    /// Uniform-random starts in addition to the two deterministic ones.
    pub restarts: usize,
    pub seed: u64,
    /// Extrapolate between sweeps (SQUAREM on `(n₁, Σ Xᵢŷᵢ)`), accepting a
    /// step only when it lowers ΔF.
    pub accelerate: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 2000,
            restarts: 4,
            seed: 0,
            accelerate: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config("tol must be positive and finite"));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// A point of the VB-EM iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct VBState {
    pub resp: Responsibilities,
    /// Moments implied by `resp`.
    pub moments: PosteriorMoments,
    pub delta_f: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl VBState {
    /// Wraps starting responsibilities, evaluating their moments and ΔF.
    pub fn from_responsibilities(
        sample: &Sample,
        resp: Responsibilities,
        hyper: &Hyperparameters,
    ) -> Result<Self> {
        let moments = posterior_moments(sample, &resp, hyper)?;
        let delta_f = free_energy_gap(sample, &resp, hyper)?;
        Ok(Self {
            resp,
            moments,
            delta_f,
            iterations: 0,
            converged: false,
        })
    }

    /// `n₁ = Σ ŷ_i1`.
    pub fn n1(&self) -> f64 {
        self.resp.mass()
    }
}

/// One full sweep: weights, then `b` moments, then responsibilities, then ΔF.
pub fn iterate_once(sample: &Sample, state: &VBState, hyper: &Hyperparameters) -> Result<VBState> {
    if state.resp.len() != sample.n() {
        return Err(Error::LengthMismatch {
            expected: sample.n(),
            got: state.resp.len(),
        });
    }
    let x = sample.values();
    let st = stats(x, state.resp.as_slice());
    let w = log_weights_from(sample.n(), st.n1, hyper);
    let b = b_moments_from(st, hyper);
    let mut y = vec![0.0; sample.n()];
    update_into(x, &PosteriorMoments::from_parts(b, w), &mut y);
    let resp = Responsibilities::from_vec_unchecked(y);
    let moments = posterior_moments(sample, &resp, hyper)?;
    let delta_f = free_energy_gap(sample, &resp, hyper)?;
    Ok(VBState {
        resp,
        moments,
        delta_f,
        iterations: state.iterations + 1,
        converged: state.converged,
    })
}

/// Sample sorted ascending, with the original index of each sorted entry.
struct Sorted {
    x: Vec<f64>,
    order: Vec<usize>,
}

impl Sorted {
    fn new(sample: &Sample) -> Self {
        let v = sample.values();
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let x = order.iter().map(|&i| v[i]).collect();
        Self { x, order }
    }

    fn unsort(&self, sorted: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sorted.len()];
        for (k, &i) in self.order.iter().enumerate() {
            out[i] = sorted[k];
        }
        out
    }
}

/// Level of the constant start: α₀(φ) above the phase boundary, otherwise a
/// small mass `min(½, 10/n)`.
fn constant_start(n: usize, hyper: &Hyperparameters) -> f64 {
    match alpha_star(hyper.phi()) {
        Ok(a) => a,
        Err(_) => (10.0 / n as f64).min(0.5),
    }
}

/// Starting points in ascending order of the observations.
fn starts_sorted(n: usize, hyper: &Hyperparameters, config: &SolverConfig) -> Vec<Vec<f64>> {
    let mut starts = Vec::with_capacity(2 + config.restarts);
    starts.push(vec![constant_start(n, hyper); n]);

    let top = (libm::ceil(libm::sqrt(n as f64)) as usize).min(n);
    let mut tail = vec![0.1; n];
    for y in &mut tail[n - top..] {
        *y = 0.9;
    }
    starts.push(tail);

    for r in 0..config.restarts {
        let mut stream = Stream::new(mix_seed(config.seed, TAG_STARTS, r as u64));
        starts.push((0..n).map(|_| stream.uniform_open()).collect());
    }
    starts
}

/// The starting responsibilities [`solve`] uses, in the sample's own order:
/// a constant start, a start with mass 0.9 on the `⌈√n⌉` largest
/// observations (0.1 elsewhere), and `restarts` uniform-random starts keyed
/// by `config.seed`.
pub fn initial_states(
    sample: &Sample,
    hyper: &Hyperparameters,
    config: &SolverConfig,
) -> Vec<Responsibilities> {
    let sorted = Sorted::new(sample);
    starts_sorted(sample.n(), hyper, config)
        .into_iter()
        .map(|y| Responsibilities::from_vec_unchecked(sorted.unsort(&y)))
        .collect()
}

struct Run {
    y: Vec<f64>,
    delta_f: f64,
    iterations: usize,
    converged: bool,
}

/// One sweep driven by the sufficient statistics of the previous
/// responsibilities. Writes the new responsibilities into `y` and returns
/// their ΔF and statistics.
///
/// With log-odds `d`, `ŷ ln ŷ + (1-ŷ) ln(1-ŷ) = ŷ d - ln(1 + eᵈ)`, so each
/// observation costs one `exp` and one `log1p`.
fn sweep(x: &[f64], prev: Stats, hyper: &Hyperparameters, y: &mut [f64]) -> (f64, Stats) {
    let m = PosteriorMoments::from_parts(
        b_moments_from(prev, hyper),
        log_weights_from(x.len(), prev.n1, hyper),
    );
    let odds = LogOdds::new(&m);
    let mut entropy = 0.0;
    let mut n1 = 0.0;
    let mut sx = 0.0;
    for (yi, &xi) in y.iter_mut().zip(x) {
        let d = odds.at(xi);
        let e = libm::exp(-d.abs());
        let p = if d >= 0.0 {
            1.0 / (1.0 + e)
        } else {
            e / (1.0 + e)
        };
        entropy += p * d - (d.max(0.0) + libm::log1p(e));
        n1 += p;
        sx += xi * p;
        *yi = p;
    }
    let st = Stats { n1, sx };
    (gap_from_parts(x.len(), entropy, st, hyper), st)
}

fn run_plain(x: &[f64], mut y: Vec<f64>, hyper: &Hyperparameters, config: &SolverConfig) -> Run {
    let mut f = gap_kernel(x, &y, hyper);
    let mut st = stats(x, &y);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        let (next, next_st) = sweep(x, st, hyper, &mut y);
        iterations += 1;
        let change = (f - next).abs();
        f = next;
        st = next_st;
        if change < config.tol {
            converged = true;
            break;
        }
    }
    Run {
        y,
        delta_f: f,
        iterations,
        converged,
    }
}

/// SQUAREM (scheme S3) on `θ = (n₁, Σ Xᵢŷᵢ)`: two sweeps give `r = θ₁ - θ₀`
/// and `v = θ₂ - 2θ₁ + θ₀`; the extrapolated point `θ₀ - 2αr + α²v` with
/// `α = -‖r‖/‖v‖` is swept once more and kept only if its ΔF does not exceed
/// that of the second plain sweep.
fn run_squarem(x: &[f64], y: Vec<f64>, hyper: &Hyperparameters, config: &SolverConfig) -> Run {
    let n = x.len() as f64;
    let mut f = gap_kernel(x, &y, hyper);
    let mut st = stats(x, &y);
    let mut cur = y;
    let mut y1 = vec![0.0; x.len()];
    let mut y2 = vec![0.0; x.len()];
    let mut y3 = vec![0.0; x.len()];
    let mut iterations = 0;

    let budget = config.max_iters;
    let done = |run_y: Vec<f64>, delta_f: f64, iterations: usize, converged: bool| Run {
        y: run_y,
        delta_f,
        iterations,
        converged,
    };

    loop {
        if iterations >= budget {
            return done(cur, f, iterations, false);
        }
        let (f1, st1) = sweep(x, st, hyper, &mut y1);
        iterations += 1;
        if (f - f1).abs() < config.tol {
            return done(y1, f1, iterations, true);
        }
        if iterations >= budget {
            return done(y1, f1, iterations, false);
        }
        let (f2, st2) = sweep(x, st1, hyper, &mut y2);
        iterations += 1;
        if (f1 - f2).abs() < config.tol {
            return done(y2, f2, iterations, true);
        }

        let r = (st1.n1 - st.n1, st1.sx - st.sx);
        let v = (st2.n1 - 2.0 * st1.n1 + st.n1, st2.sx - 2.0 * st1.sx + st.sx);
        let r_norm = libm::hypot(r.0, r.1);
        let v_norm = libm::hypot(v.0, v.1);
        let mut accepted = false;
        if v_norm > 0.0 && iterations < budget {
            let mut alpha = (-r_norm / v_norm).min(-1.0);
            // Pull the step back until the extrapolated mass is feasible.
            let mut theta = extrapolate(st, r, v, alpha);
            while !(0.0..=n).contains(&theta.n1) && alpha < -1.0 {
                alpha = (alpha - 1.0) / 2.0;
                theta = extrapolate(st, r, v, alpha);
            }
            if alpha < -1.0 {
                let (f3, st3) = sweep(x, theta, hyper, &mut y3);
                iterations += 1;
                if f3.is_finite() && f3 <= f2 {
                    let change = (f - f3).abs();
                    core::mem::swap(&mut cur, &mut y3);
                    f = f3;
                    st = st3;
                    accepted = true;
                    if change < config.tol {
                        return done(cur, f, iterations, true);
                    }
                }
            }
        }
        if !accepted {
            core::mem::swap(&mut cur, &mut y2);
            f = f2;
            st = st2;
        }
    }
}

fn extrapolate(st: Stats, r: (f64, f64), v: (f64, f64), alpha: f64) -> Stats {
    Stats {
        n1: st.n1 - 2.0 * alpha * r.0 + alpha * alpha * v.0,
        sx: st.sx - 2.0 * alpha * r.1 + alpha * alpha * v.1,
    }
}

fn run_from(x: &[f64], y: Vec<f64>, hyper: &Hyperparameters, config: &SolverConfig) -> Run {
    let mut run = if config.accelerate {
        run_squarem(x, y, hyper, config)
    } else {
        run_plain(x, y, hyper, config)
    };
    // Report the gap through the same summation as `free_energy_gap`.
    run.delta_f = gap_kernel(x, &run.y, hyper);
    run
}

/// Runs VB-EM from every start in [`initial_states`] and returns the state
/// with the smallest ΔF. Hitting `max_iters` is reported through
/// `converged = false`, not as an error.
pub fn solve(sample: &Sample, hyper: &Hyperparameters, config: &SolverConfig) -> Result<VBState> {
    config.validate()?;
    let sorted = Sorted::new(sample);
    let mut best: Option<Run> = None;
    for start in starts_sorted(sample.n(), hyper, config) {
        let run = run_from(&sorted.x, start, hyper, config);
        if best.as_ref().map_or(true, |b| run.delta_f < b.delta_f) {
            best = Some(run);
        }
    }
    let best = best.expect("at least two starts");
    let resp = Responsibilities::from_vec_unchecked(sorted.unsort(&best.y));
    let moments = posterior_moments(sample, &resp, hyper)?;
    Ok(VBState {
        resp,
        moments,
        delta_f: best.delta_f,
        iterations: best.iterations,
        converged: best.converged,
    })
}

/// Largest sample the grid oracle accepts; cost grows as `grid_pointsⁿ`.
pub const ORACLE_MAX_N: usize = 3;

/// Brute-force minimum of ΔF over `[0, 1]ⁿ`: a full grid with `grid_points`
/// nodes per axis, then compass search from the best node down to a step
/// of 1e-13. Uses only [`free_energy_gap`], independent of the VB-EM path.
pub fn oracle_grid_min(
    sample: &Sample,
    hyper: &Hyperparameters,
    grid_points: usize,
) -> Result<f64> {
    let n = sample.n();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleSize {
            max: ORACLE_MAX_N,
            got: n,
        });
    }
    if grid_points < 2 {
        return Err(Error::Config("grid_points must be at least 2"));
    }
    let eval = |y: &[f64]| -> f64 {
        let r = Responsibilities::from_vec_unchecked(y.to_vec());
        free_energy_gap(sample, &r, hyper).expect("lengths match")
    };

    let step = 1.0 / (grid_points - 1) as f64;
    let mut idx = vec![0usize; n];
    let mut y = vec![0.0; n];
    let mut best_y = y.clone();
    let mut best = f64::INFINITY;
    'grid: loop {
        for (yi, &k) in y.iter_mut().zip(&idx) {
            *yi = k as f64 * step;
        }
        let f = eval(&y);
        if f < best {
            best = f;
            best_y.copy_from_slice(&y);
        }
        for k in idx.iter_mut() {
            *k += 1;
            if *k < grid_points {
                continue 'grid;
            }
            *k = 0;
        }
        break;
    }

    let mut h = step;
    let mut trial = best_y.clone();
    while h > 1e-13 {
        let mut improved = false;
        for i in 0..n {
            for dir in [-1.0, 1.0] {
                trial.copy_from_slice(&best_y);
                trial[i] = (best_y[i] + dir * h).clamp(0.0, 1.0);
                let f = eval(&trial);
                if f < best {
                    best = f;
                    best_y.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok(best)
}
