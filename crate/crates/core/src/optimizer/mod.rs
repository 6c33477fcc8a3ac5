//! Joint optimisation of cache weights `p`, multicast bandwidths `β` and the
//! multiplexing order `u`.
//!
//! For fixed `u` the objective is `W_tot = H_w R Σβ + W^UC Σ_n f_n O_n`. We
//! work with `J̃ = W_tot / W^UC = κ Σβ + Σ_n b_n O_n`, `κ = H_w R / W^UC`,
//! and follow its local minimiser along the popularity homotopy `b(θ)` from
//! the uniform law (θ = 0, solved by symmetry) to the Zipf target (θ = τ).
//!
//! Each step predicts with RK4 on the tangent ODE obtained by differentiating
//! the KKT system in θ, then corrects with Newton on the KKT system itself.
//! The tangent system is the bordered Hessian of `J̃` with the capacity dual
//! `v` as the extra unknown; `κ` is constant and drops out of it.
//!
//! A multicast file with `β → 0` has outage 1 with vanishing derivatives,
//! so switching a file off is a jump, not a smooth event. Files are switched
//! off when that lowers `J̃` (first-order test, confirmed by re-correcting)
//! and switched back on when a two-dimensional search finds an entry point
//! with negative reduced cost.

mod kkt;
mod scalar;

pub use kkt::{ActiveSet, FileState, Layout, LocalModel};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hybrid;
use crate::multicast::MulticastModel;
use crate::popularity::{homotopy_popularity, homotopy_popularity_derivative};
use crate::scenario::{DeliveryMetrics, Policy, Scenario, CAPACITY_SLACK};
use crate::specfun::sum::compensated_sum;
use crate::unicast;
use kkt::{bordered, reduced_positive_definite};
use scalar::{golden_section, scan_then_refine};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Nominal number of θ steps from 0 to τ.
    pub steps: usize,
    /// Projected KKT residual of `J̃` accepted by the corrector.
    pub corrector_tol: f64,
    pub max_corrector_iterations: usize,
    /// Step halvings allowed before the path is abandoned.
    pub max_halvings: u32,
    /// Stationarity required of the symmetric starting point.
    pub initial_tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            steps: 8,
            corrector_tol: 1e-9,
            max_corrector_iterations: 60,
            max_halvings: 8,
            initial_tol: 1e-6,
        }
    }
}

/// Changes in `J̃` below this are treated as noise when comparing active sets.
const VALUE_TOL: f64 = 1e-9;

/// `P1` for one multiplexing order.
#[derive(Debug, Clone)]
pub struct Problem {
    pub model: MulticastModel,
    pub kappa: f64,
    pub capacity: f64,
    pub n_files: usize,
    pub skew: f64,
    pub u: usize,
    /// `W^UC(u, λ_u/λ_b)`, the scale of `J̃`.
    pub w_uc: f64,
}

impl Problem {
    pub fn new(scenario: &Scenario, u: usize) -> Result<Self> {
        scenario.validate()?;
        let w_uc = unicast::unicast_bandwidth(scenario, u, hybrid::demand_ratio(scenario))?;
        let hr = scenario.harmonic_factor() * scenario.stream_rate;
        Ok(Problem {
            model: MulticastModel::new(scenario),
            kappa: if w_uc > 0.0 { hr / w_uc } else { f64::INFINITY },
            capacity: scenario.cache_capacity as f64,
            n_files: scenario.n_files,
            skew: scenario.zipf_skew,
            u,
            w_uc,
        })
    }

    pub fn popularity(&self, theta: f64) -> Result<Vec<f64>> {
        Ok(homotopy_popularity(self.n_files, theta, self.skew)?.probs().to_vec())
    }

    pub fn popularity_rate(&self, theta: f64) -> Result<Vec<f64>> {
        homotopy_popularity_derivative(self.n_files, theta)
    }

    /// `J̃ = κ Σβ + Σ b_n O_n`
    pub fn objective(&self, b: &[f64], p: &[f64], beta: &[f64]) -> Result<f64> {
        let outage = self.model.per_file_outage(p, beta)?;
        let s = compensated_sum(beta.iter().copied());
        let bandwidth = if s > 0.0 { self.kappa * s } else { 0.0 };
        Ok(bandwidth + compensated_sum(outage.iter().zip(b).map(|(o, w)| o * w)))
    }
}

/// A point on the solution path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub theta: f64,
    pub policy: Policy,
    /// Capacity dual `v` of `J̃` (zero when the capacity is slack).
    pub multiplier: f64,
    pub active_set: ActiveSet,
    /// `J̃` at this point.
    pub objective: f64,
    /// Projected KKT residual of `J̃`.
    pub kkt_residual: f64,
}

impl PathState {
    fn all_off(problem: &Problem, theta: f64) -> Self {
        PathState {
            theta,
            policy: Policy::unicast_only(problem.n_files, problem.u),
            multiplier: 0.0,
            active_set: ActiveSet::all_off(problem.n_files),
            objective: 1.0,
            kkt_residual: 0.0,
        }
    }

    fn p(&self) -> &[f64] {
        &self.policy.cache_weights
    }

    fn beta(&self) -> &[f64] {
        &self.policy.beta
    }

    fn switch_off(&mut self, n: usize) {
        self.policy.cache_weights[n] = 0.0;
        self.policy.beta[n] = 0.0;
        self.active_set.states[n] = FileState::Off;
    }

    fn free_capacity(&self, problem: &Problem) -> f64 {
        problem.capacity - self.active_set.count(FileState::Full) as f64
    }
}

/// Stationarity residual of `J̃` with the multiplier `v` of the state.
fn kkt_residual(problem: &Problem, b: &[f64], state: &PathState, local: &LocalModel) -> f64 {
    let layout = Layout::new(&state.active_set);
    let g = local.gradient(&layout, b, problem.kappa);
    let nb = layout.beta_idx.len();
    let v = if layout.capacity { state.multiplier } else { 0.0 };
    let mut res: f64 = 0.0;
    for k in 0..nb {
        res = res.max(g[k].abs());
    }
    for k in 0..layout.p_idx.len() {
        res = res.max((g[nb + k] + v).abs());
    }
    for (i, s) in state.active_set.states.iter().enumerate() {
        if *s == FileState::Full {
            res = res.max(b[i] * local.sens[i].d_p() + v);
        }
    }
    if layout.capacity {
        res = res.max(-v);
        let used = compensated_sum(layout.p_idx.iter().map(|&i| state.p()[i]));
        res = res.max((used - state.free_capacity(problem)).abs());
    } else {
        res = res.max(compensated_sum(state.p().iter().copied()) - problem.capacity - CAPACITY_SLACK);
    }
    res
}

fn refresh(problem: &Problem, b: &[f64], state: &mut PathState) -> Result<LocalModel> {
    let local = LocalModel::at(&problem.model, state.p(), state.beta())?;
    state.objective = problem.objective(b, state.p(), state.beta())?;
    state.kkt_residual = kkt_residual(problem, b, state, &local);
    Ok(local)
}

/// Symmetric solution of `P1(0)`: all files share `p̄` and `β̄`.
fn initial_state(problem: &Problem, opts: &OptimizerOptions) -> Result<PathState> {
    let n = problem.n_files;
    if !problem.kappa.is_finite() {
        return Ok(PathState::all_off(problem, 0.0));
    }
    let nf = n as f64;
    let p_max = (problem.capacity / nf).min(1.0);
    let symmetric = |p: f64, log_beta: f64| -> Result<f64> {
        let beta = log_beta.exp();
        Ok(problem.kappa * nf * beta + problem.model.file_outage(p, beta, nf * beta)?)
    };
    let inner = |p: f64| scan_then_refine(|lb| symmetric(p, lb), (1e-4f64).ln(), (1e3f64).ln(), 61, 1e-9);
    let (p_golden, _) = golden_section(|p| inner(p).map(|r| r.1), 0.0, p_max, 1e-6)?;
    let at_golden = inner(p_golden)?;
    let at_max = inner(p_max)?;
    let (p_bar, (log_beta, value)) = if at_max.1 <= at_golden.1 {
        (p_max, at_max)
    } else {
        (p_golden, at_golden)
    };
    if value >= 1.0 {
        return Ok(PathState::all_off(problem, 0.0));
    }
    let full = p_bar >= 1.0;
    let mut state = PathState {
        theta: 0.0,
        policy: Policy {
            cache_weights: vec![if full { 1.0 } else { p_bar }; n],
            beta: vec![log_beta.exp(); n],
            mux_order: problem.u,
        },
        multiplier: 0.0,
        active_set: ActiveSet {
            states: vec![if full { FileState::Full } else { FileState::Free }; n],
            capacity_binding: !full && nf * p_bar >= problem.capacity * (1.0 - 1e-9),
        },
        objective: value,
        kkt_residual: f64::INFINITY,
    };
    let b = problem.popularity(0.0)?;
    // Newton polish of β̄ along the symmetric direction.
    for _ in 0..30 {
        let local = LocalModel::at(&problem.model, state.p(), state.beta())?;
        let layout = Layout::new(&state.active_set);
        let g = local.gradient(&layout, &b, problem.kappa);
        let h = local.hessian(&layout, &b);
        let nb = layout.beta_idx.len();
        let slope = g[0];
        let curvature: f64 = (0..nb).map(|j| h[(0, j)]).sum();
        if slope.abs() < 1e-14 || !(curvature > 0.0) {
            break;
        }
        let beta = state.policy.beta[0];
        let next = (beta - slope / curvature).clamp(0.5 * beta, 2.0 * beta);
        state.policy.beta.fill(next);
        if (next - beta).abs() <= 1e-15 * beta {
            break;
        }
    }
    let local = LocalModel::at(&problem.model, state.p(), state.beta())?;
    let layout = Layout::new(&state.active_set);
    if layout.capacity {
        let g = local.gradient(&layout, &b, problem.kappa);
        let nb = layout.beta_idx.len();
        state.multiplier = -(nb..layout.dim()).map(|k| g[k]).sum::<f64>() / layout.p_idx.len() as f64;
    }
    refresh(problem, &b, &mut state)?;
    if state.kkt_residual > opts.initial_tol {
        let g = local.gradient(&layout, &b, problem.kappa);
        return Err(Error::Optimizer(format!(
            "symmetric start (p̄ = {p_bar}, β̄ = {}) is not stationary: projected gradient {:e}, β-gradient {:e}, \
             capacity dual {:e}",
            state.policy.beta[0],
            state.kkt_residual,
            g[0],
            state.multiplier
        )));
    }
    Ok(state)
}

/// Symmetric solution of `P1(0)` for multiplexing order `u`.
pub fn solve_initial(scenario: &Scenario, u: usize) -> Result<Policy> {
    let problem = Problem::new(scenario, u)?;
    Ok(initial_state(&problem, &OptimizerOptions::default())?.policy)
}

/// Tangent system of the path at one point.
#[derive(Debug, Clone)]
pub struct OdeSystem {
    pub layout: Layout,
    /// Bordered Hessian of `J̃`.
    pub matrix: DMatrix<f64>,
    /// θ-derivative of the gradient, with a trailing zero for the capacity
    /// row.
    pub rhs: DVector<f64>,
}

impl OdeSystem {
    /// `(ẋ, v̇)` with `ẋ` ordered as the layout (β of on files, then free p).
    pub fn solve(&self) -> Result<(DVector<f64>, f64)> {
        let z = self
            .matrix
            .clone()
            .lu()
            .solve(&(-&self.rhs))
            .ok_or_else(|| Error::Numeric("singular path tangent system".into()))?;
        let dim = self.layout.dim();
        let v_dot = if self.layout.capacity { z[dim] } else { 0.0 };
        Ok((z.rows(0, dim).into_owned(), v_dot))
    }
}

pub fn assemble_ode(problem: &Problem, state: &PathState) -> Result<OdeSystem> {
    assemble_at(problem, state.theta, state.p(), state.beta(), &state.active_set)
}

fn assemble_at(problem: &Problem, theta: f64, p: &[f64], beta: &[f64], set: &ActiveSet) -> Result<OdeSystem> {
    let b = problem.popularity(theta)?;
    let b_dot = problem.popularity_rate(theta)?;
    let local = LocalModel::at(&problem.model, p, beta)?;
    let layout = Layout::new(set);
    let h = local.hessian(&layout, &b);
    let matrix = bordered(&layout, &h);
    let mut rhs = DVector::zeros(layout.size());
    rhs.rows_mut(0, layout.dim()).copy_from(&local.outage_gradient(&layout, &b_dot));
    Ok(OdeSystem { layout, matrix, rhs })
}

/// Keeps a predicted point inside the domain where the file stays on.
fn clamp_into_domain(layout: &Layout, x: &mut DVector<f64>, reference: &DVector<f64>) {
    let nb = layout.beta_idx.len();
    for k in 0..x.len() {
        if k < nb {
            x[k] = x[k].max(0.25 * reference[k]);
        } else {
            x[k] = x[k].clamp(0.25 * reference[k], 1.0);
        }
    }
}

/// RK4 step of the tangent ODE from `state` to `theta`.
fn predict(problem: &Problem, state: &PathState, theta: f64) -> Result<PathState> {
    let h = theta - state.theta;
    let layout = Layout::new(&state.active_set);
    let mut next = state.clone();
    next.theta = theta;
    if layout.beta_idx.is_empty() {
        return Ok(next);
    }
    let x0 = layout.gather(state.p(), state.beta());
    let (mut p, mut beta) = (state.p().to_vec(), state.beta().to_vec());
    let mut tangent = |t: f64, x: &DVector<f64>| -> Result<DVector<f64>> {
        let mut x = x.clone();
        clamp_into_domain(&layout, &mut x, &x0);
        layout.scatter(&x, &mut p, &mut beta);
        Ok(assemble_at(problem, t, &p, &beta, &state.active_set)?.solve()?.0)
    };
    let k1 = tangent(state.theta, &x0)?;
    let k2 = tangent(state.theta + 0.5 * h, &(&x0 + 0.5 * h * &k1))?;
    let k3 = tangent(state.theta + 0.5 * h, &(&x0 + 0.5 * h * &k2))?;
    let k4 = tangent(theta, &(&x0 + h * &k3))?;
    let mut x1 = &x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    clamp_into_domain(&layout, &mut x1, &x0);
    layout.scatter(&x1, &mut next.policy.cache_weights, &mut next.policy.beta);
    Ok(next)
}

/// Newton direction for the bordered KKT system, with the Hessian shifted
/// until it is positive definite on the constraint tangent space.
fn newton_direction(layout: &Layout, g: &DVector<f64>, h: &DMatrix<f64>, r: f64) -> Result<(DVector<f64>, f64)> {
    let dim = layout.dim();
    let scale = h.amax().max(g.amax()).max(1e-300);
    let mut shift = 0.0;
    loop {
        let mut hs = h.clone();
        for k in 0..dim {
            hs[(k, k)] += shift;
        }
        if reduced_positive_definite(layout, &hs) {
            let k = bordered(layout, &hs);
            let mut rhs = DVector::zeros(layout.size());
            rhs.rows_mut(0, dim).copy_from(&(-g));
            if layout.capacity {
                rhs[dim] = r;
            }
            if let Some(z) = k.lu().solve(&rhs) {
                if z.iter().all(|v| v.is_finite()) {
                    let v = if layout.capacity { z[dim] } else { 0.0 };
                    return Ok((z.rows(0, dim).into_owned(), v));
                }
            }
        }
        shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
        if shift > 1e6 * scale {
            return Err(Error::Numeric("could not regularise the KKT matrix".into()));
        }
    }
}

/// Newton corrector on the KKT system of `P1(θ)` with a fixed active set,
/// except that cache weights reaching 1 are clamped there and files whose
/// bandwidth or cache weight is repeatedly driven to 0 are switched off.
fn correct(problem: &Problem, b: &[f64], state: &mut PathState, opts: &OptimizerOptions) -> Result<()> {
    let mut pressure = vec![0u32; problem.n_files];
    for _ in 0..opts.max_corrector_iterations {
        let layout = Layout::new(&state.active_set);
        if !layout.capacity {
            state.multiplier = 0.0;
        }
        if layout.beta_idx.is_empty() {
            state.active_set.capacity_binding = false;
            refresh(problem, b, state)?;
            return Ok(());
        }
        let local = LocalModel::at(&problem.model, state.p(), state.beta())?;
        let g = local.gradient(&layout, b, problem.kappa);
        let h = local.hessian(&layout, b);
        let nb = layout.beta_idx.len();
        let r = if layout.capacity {
            state.free_capacity(problem) - compensated_sum(layout.p_idx.iter().map(|&i| state.p()[i]))
        } else {
            0.0
        };
        let (dx, v) = newton_direction(&layout, &g, &h, r)?;
        let mut stationarity = g.clone();
        if layout.capacity {
            for k in nb..layout.dim() {
                stationarity[k] += v;
            }
        }
        let residual = stationarity.amax().max(r.abs());
        let full_ok = state.active_set.states.iter().enumerate().all(|(i, s)| {
            *s != FileState::Full || b[i] * local.sens[i].d_p() + if layout.capacity { v } else { 0.0 } <= opts.corrector_tol
        });
        if residual < opts.corrector_tol && full_ok {
            state.multiplier = if layout.capacity { v } else { 0.0 };
            refresh(problem, b, state)?;
            return Ok(());
        }

        let x = layout.gather(state.p(), state.beta());
        let mut alpha_max = f64::INFINITY;
        let mut blocker = None;
        for k in 0..layout.dim() {
            let limit = if dx[k] < 0.0 {
                Some((-x[k] / dx[k], false))
            } else if k >= nb && dx[k] > 0.0 {
                Some(((1.0 - x[k]) / dx[k], true))
            } else {
                None
            };
            if let Some((a, upper)) = limit {
                if a < alpha_max {
                    alpha_max = a;
                    blocker = Some((k, upper));
                }
            }
        }
        let file_of = |k: usize| if k < nb { layout.beta_idx[k] } else { layout.p_idx[k - nb] };
        let mut alpha = 1.0;
        let mut clamp_full = None;
        let mut pressed = None;
        if alpha_max <= 1.0 {
            let (k, upper) = blocker.expect("a blocking variable limits the step");
            if upper {
                alpha = alpha_max;
                clamp_full = Some(file_of(k));
            } else {
                let file = file_of(k);
                if pressure[file] >= 2 {
                    state.switch_off(file);
                    pressure[file] = 0;
                    continue;
                }
                pressed = Some(file);
                alpha = 0.9 * alpha_max;
            }
        }
        // Damp only far from the solution: near it, changes in J̃ fall
        // below the accuracy of the outage integrals.
        let slope = g.dot(&dx);
        if residual > 1e-5 && r.abs() < 1e-12 && slope < 0.0 && clamp_full.is_none() {
            let f0 = state.objective_or_eval(problem, b)?;
            let floor = 1e-6 * alpha;
            loop {
                let trial = &x + alpha * &dx;
                let (mut p, mut beta) = (state.p().to_vec(), state.beta().to_vec());
                layout.scatter(&trial, &mut p, &mut beta);
                if problem.objective(b, &p, &beta)? <= f0 + 1e-4 * alpha * slope || alpha < floor {
                    break;
                }
                alpha *= 0.5;
                // Backing off from the bound means it no longer blocks.
                pressed = None;
            }
        }
        if let Some(file) = pressed {
            pressure[file] += 1;
        }
        let next = &x + alpha * &dx;
        layout.scatter(&next, &mut state.policy.cache_weights, &mut state.policy.beta);
        if let Some(file) = clamp_full {
            state.policy.cache_weights[file] = 1.0;
            state.active_set.states[file] = FileState::Full;
        }
        state.multiplier = v;
        state.objective = f64::NAN;
    }
    Err(Error::Optimizer(format!(
        "corrector did not converge at θ = {} within {} iterations",
        state.theta, opts.max_corrector_iterations
    )))
}

impl PathState {
    fn objective_or_eval(&mut self, problem: &Problem, b: &[f64]) -> Result<f64> {
        if self.objective.is_nan() {
            self.objective = problem.objective(b, self.p(), self.beta())?;
        }
        Ok(self.objective)
    }
}

/// Best entry point `(gain, p, β)` for an off file: the minimum over
/// `(p, β)` of the reduced cost `μβ + v p + b (O − 1)`.
fn entry_search(problem: &Problem, state: &PathState, b_n: f64, price: f64) -> Result<(f64, f64, f64)> {
    let on = state.active_set.on().count();
    let s = compensated_sum(state.beta().iter().copied());
    let reference = if on > 0 { s / on as f64 } else { 0.1 };
    let v = state.multiplier.max(0.0);
    let cap_room = (problem.capacity - compensated_sum(state.p().iter().copied())).max(0.0);
    let mut best = (0.0, 0.0, 0.0);
    for i in 0..25 {
        let beta = reference * 10f64.powf(-2.0 + 4.0 * i as f64 / 24.0);
        for j in 1..=10 {
            let p = j as f64 / 10.0;
            // Free capacity costs nothing; the rest is bought at price v.
            let cost = price * beta + v * (p - cap_room).max(0.0);
            let value = cost + b_n * (problem.model.file_outage(p, beta, s + beta)? - 1.0);
            if value < best.0 {
                best = (value, p, beta);
            }
        }
    }
    Ok(best)
}

/// Resolves active-set events at fixed θ: capacity release, cache weights
/// leaving 1, saddle points, and files switching off or on.
fn settle(problem: &Problem, b: &[f64], state: &mut PathState, opts: &OptimizerOptions) -> Result<()> {
    let n = problem.n_files;
    let mut rejected_off = vec![false; n];
    let mut rejected_on = vec![false; n];
    for _ in 0..(4 * n + 16) {
        correct(problem, b, state, opts)?;
        let layout = Layout::new(&state.active_set);
        let local = LocalModel::at(&problem.model, state.p(), state.beta())?;
        let v = state.multiplier;
        let total_p = compensated_sum(state.p().iter().copied());

        if layout.capacity && v < -opts.corrector_tol {
            state.active_set.capacity_binding = false;
            continue;
        }
        if !state.active_set.capacity_binding && total_p > problem.capacity + CAPACITY_SLACK {
            state.active_set.capacity_binding = true;
            continue;
        }
        if let Some(i) = (0..n).find(|&i| {
            state.active_set.states[i] == FileState::Full
                && b[i] * local.sens[i].d_p() + if layout.capacity { v } else { 0.0 } > opts.corrector_tol
        }) {
            state.active_set.states[i] = FileState::Free;
            state.active_set.capacity_binding = true;
            continue;
        }

        let price = local.bandwidth_price(b, problem.kappa);
        let removal_gain = |i: usize| {
            price * state.beta()[i] + v.max(0.0) * state.p()[i] + b[i] * (local.outage(i) - 1.0)
        };
        let saddle = !layout.beta_idx.is_empty() && !reduced_positive_definite(&layout, &local.hessian(&layout, b));
        let candidate = state
            .active_set
            .on()
            .filter(|&i| !rejected_off[i])
            .map(|i| (i, removal_gain(i)))
            .max_by(|a, c| a.1.total_cmp(&c.1));
        if let Some((i, gain)) = candidate {
            if gain > VALUE_TOL || saddle {
                let mut trial = state.clone();
                trial.switch_off(i);
                if !trial.active_set.on().any(|_| true) {
                    trial.active_set.capacity_binding = false;
                }
                let accepted = match correct(problem, b, &mut trial, opts) {
                    Ok(()) => trial.objective < state.objective - VALUE_TOL || saddle,
                    Err(_) => false,
                };
                if accepted {
                    *state = trial;
                    rejected_on.fill(false);
                } else {
                    rejected_off[i] = true;
                }
                continue;
            }
        }

        // Entry: the most popular off file dominates all others.
        let entrant = (0..n)
            .filter(|&i| state.active_set.states[i] == FileState::Off && !rejected_on[i])
            .max_by(|a, c| b[*a].total_cmp(&b[*c]).then(c.cmp(a)));
        if let Some(j) = entrant {
            let (gain, p, beta) = entry_search(problem, state, b[j], price)?;
            if gain < -VALUE_TOL {
                let mut trial = state.clone();
                trial.policy.cache_weights[j] = p;
                trial.policy.beta[j] = beta;
                trial.active_set.states[j] = if p >= 1.0 { FileState::Full } else { FileState::Free };
                let overfull = compensated_sum(trial.p().iter().copied()) > problem.capacity + CAPACITY_SLACK;
                trial.active_set.capacity_binding |= overfull;
                if overfull {
                    // Room for the entrant has to come from somewhere: every
                    // fully cached file gets to give some up.
                    for st in trial.active_set.states.iter_mut() {
                        if *st == FileState::Full {
                            *st = FileState::Free;
                        }
                    }
                }
                let accepted = match correct(problem, b, &mut trial, opts) {
                    Ok(()) => trial.objective < state.objective - VALUE_TOL,
                    Err(_) => false,
                };
                if accepted {
                    *state = trial;
                    rejected_off.fill(false);
                } else {
                    rejected_on[j] = true;
                }
                continue;
            }
        }
        refresh(problem, b, state)?;
        return Ok(());
    }
    Err(Error::Optimizer(format!("active set did not settle at θ = {}", state.theta)))
}

/// Path from θ = 0 to θ = τ for one problem; returns every accepted state.
pub fn trace_path(problem: &Problem, opts: &OptimizerOptions) -> Result<Vec<PathState>> {
    let mut state = initial_state(problem, opts)?;
    let tau = problem.skew;
    let mut states = vec![state.clone()];
    if tau == 0.0 {
        return Ok(states);
    }
    settle(problem, &problem.popularity(0.0)?, &mut state, opts)?;
    let nominal = tau / opts.steps.max(1) as f64;
    let mut h = nominal;
    let mut halvings = 0;
    while state.theta < tau {
        let theta = if state.theta + h >= tau * (1.0 - 1e-12) { tau } else { state.theta + h };
        let b = problem.popularity(theta)?;
        let attempt = predict(problem, &state, theta).and_then(|mut next| {
            settle(problem, &b, &mut next, opts)?;
            Ok(next)
        });
        match attempt {
            Ok(next) => {
                state = next;
                states.push(state.clone());
                h = (2.0 * h).min(nominal);
            }
            Err(e) => {
                halvings += 1;
                if halvings > opts.max_halvings {
                    return Err(Error::Optimizer(format!(
                        "path abandoned after θ = {} (last good point): {e}",
                        state.theta
                    )));
                }
                h *= 0.5;
            }
        }
    }
    Ok(states)
}

/// Policy at θ = τ for multiplexing order `u`.
pub fn follow_path(scenario: &Scenario, u: usize, steps: usize, corrector_tol: f64) -> Result<Policy> {
    let opts = OptimizerOptions {
        steps,
        corrector_tol,
        ..OptimizerOptions::default()
    };
    let problem = Problem::new(scenario, u)?;
    let states = trace_path(&problem, &opts)?;
    Ok(states.last().expect("path has a start").policy.clone())
}

/// Outcome of the inner solve for one multiplexing order.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub u: usize,
    pub state: PathState,
    pub metrics: DeliveryMetrics,
}

#[derive(Debug, Clone)]
pub struct Optimum {
    pub policy: Policy,
    pub metrics: DeliveryMetrics,
    pub kkt_residual: f64,
    /// Every multiplexing order tried, in order, with its result.
    pub per_u: Vec<std::result::Result<InnerSolution, String>>,
}

pub fn solve_for_u(scenario: &Scenario, u: usize, opts: &OptimizerOptions) -> Result<InnerSolution> {
    let problem = Problem::new(scenario, u)?;
    let states = trace_path(&problem, opts)?;
    let state = states.last().expect("path has a start").clone();
    let popularity = crate::popularity::zipf(scenario.n_files, scenario.zipf_skew)?;
    // A fresh model, so the reported metrics are exactly those a later
    // evaluation of the same policy produces.
    let metrics = hybrid::evaluate(scenario, &state.policy, &popularity)?;
    Ok(InnerSolution { u, state, metrics })
}

/// Line search over `u ∈ {1, …, L}` (solves run in parallel, the result
/// does not depend on scheduling).
pub fn optimize(scenario: &Scenario) -> Result<(Policy, DeliveryMetrics)> {
    let best = optimize_with(scenario, &OptimizerOptions::default())?;
    Ok((best.policy, best.metrics))
}

pub fn optimize_with(scenario: &Scenario, opts: &OptimizerOptions) -> Result<Optimum> {
    scenario.validate()?;
    let per_u: Vec<std::result::Result<InnerSolution, String>> = (1..=scenario.n_antennas)
        .into_par_iter()
        .map(|u| solve_for_u(scenario, u, opts).map_err(|e| format!("u = {u}: {e}")))
        .collect();
    let best = per_u
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .min_by(|a, b| a.metrics.w_tot.total_cmp(&b.metrics.w_tot).then(a.u.cmp(&b.u)))
        .cloned();
    match best {
        Some(s) => Ok(Optimum {
            policy: s.state.policy,
            metrics: s.metrics,
            kkt_residual: s.state.kkt_residual,
            per_u,
        }),
        None => Err(Error::Optimizer(
            per_u.into_iter().filter_map(|r| r.err()).collect::<Vec<_>>().join("; "),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, m: usize) -> Scenario {
        Scenario {
            n_files: n,
            cache_capacity: m,
            ..Scenario::reference()
        }
    }

    #[test]
    fn everything_cached_when_capacity_allows() {
        let s = small(4, 4);
        let p = solve_initial(&s, 8).unwrap();
        assert!(p.cache_weights.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn zero_skew_returns_initial_policy() {
        let s = Scenario {
            zipf_skew: 0.0,
            ..small(5, 2)
        };
        let initial = solve_initial(&s, 4).unwrap();
        assert_eq!(follow_path(&s, 4, 8, 1e-9).unwrap(), initial);
    }

    #[test]
    fn symmetric_start_binds_capacity() {
        let s = small(20, 2);
        let problem = Problem::new(&s, 8).unwrap();
        let st = initial_state(&problem, &OptimizerOptions::default()).unwrap();
        assert!(st.active_set.capacity_binding);
        assert!((st.policy.cache_weights[0] - 0.1).abs() < 1e-12);
        assert!(st.multiplier > 0.0);
        assert!(st.kkt_residual < 1e-6);
    }

    #[test]
    fn beta_block_is_symmetric() {
        let s = small(6, 2);
        let problem = Problem::new(&s, 8).unwrap();
        let mut st = initial_state(&problem, &OptimizerOptions::default()).unwrap();
        st.theta = 0.3;
        for (i, b) in st.policy.beta.iter_mut().enumerate() {
            *b *= 1.0 + 0.05 * i as f64;
        }
        let ode = assemble_ode(&problem, &st).unwrap();
        let m = &ode.matrix;
        assert_eq!(m.nrows(), 2 * 6 + 1);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                assert!((m[(i, j)] - m[(j, i)]).abs() <= 1e-7 * m[(i, j)].abs().max(1e-12));
            }
        }
        assert!(ode.rhs.iter().all(|x| x.is_finite()));
        assert_eq!(ode.rhs[12], 0.0);
    }
}
