//! Fault Avoidance Routing.
//!
//! Every neighbor `j` of the current node gets a cost
//!
//! ```text
//! G(j) = K3 * d(nbr_j, dest) + K4 * sum over faulty k of 1 / (d(nbr_j, k) + eps)
//! ```
//!
//! and the next hop is the cheapest neighbor. The choice is made by a
//! continuous-time Hopfield network with one neuron per dimension, whose
//! energy
//!
//! ```text
//! E(V) = K1 * (sum_j G(j) V_j)^2 + K2 * (sum_j V_j - 1)^2
//! ```
//!
//! is minimised by switching on the single cheapest neuron. Expanding
//! `-dE/dV_j` gives the closed-form weights `W_jk = -(2 K1 G(j) G(k) + 2 K2)`
//! and thresholds `T_j = 2 K2`, and the inputs follow
//! `dU_j/dt = sum_k W_jk V_k + T_j` (integrated here with explicit Euler).
//! [`far_argmin`] makes the same choice directly and serves as the oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::route::{RouteStatus, RoutingOutcome};
use crate::safety::FaultMap;
use crate::topology::{flip, hamming_distance, DimSet, Hypercube, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FarParams {
    /// Weight of the cost term of the energy.
    pub k1: f64,
    /// Weight of the one-neuron-on term of the energy.
    pub k2: f64,
    /// Weight of the distance-to-destination term of the cost.
    pub k3: f64,
    /// Weight of the fault-proximity term of the cost.
    pub k4: f64,
    /// Keeps `1 / (d + eps)` finite at `d = 0`.
    pub epsilon: f64,
    /// Euler step.
    pub dt: f64,
    /// Sigmoid steepness: `V = 1 / (1 + exp(-gain * U))`.
    pub gain: f64,
    /// The network has settled once `max |dV|` stays below this.
    pub conv_tol: f64,
    /// Consecutive settled steps required to stop.
    pub conv_steps: u32,
    pub max_iters: u32,
    /// The strongest neuron must reach this output to count as a winner.
    pub winner_floor: f64,
    /// Half-width of the uniform noise added to the initial outputs.
    pub init_noise: f64,
    /// Zero the self-weights `W_jj` instead of keeping the closed-form value.
    pub zero_diagonal: bool,
}

impl Default for FarParams {
    fn default() -> Self {
        FarParams {
            k1: 0.01,
            k2: 15.0,
            k3: 1.0,
            k4: 0.42,
            epsilon: 0.01,
            dt: 1e-3,
            gain: 50.0,
            conv_tol: 1e-6,
            conv_steps: 3,
            max_iters: 10_000,
            winner_floor: 0.5,
            init_noise: 0.01,
            zero_diagonal: false,
        }
    }
}

impl FarParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be a positive finite number, got {v}"),
                })
            }
        }
        positive("k1", self.k1)?;
        positive("k2", self.k2)?;
        positive("k3", self.k3)?;
        positive("k4", self.k4)?;
        positive("epsilon", self.epsilon)?;
        positive("dt", self.dt)?;
        positive("gain", self.gain)?;
        positive("conv_tol", self.conv_tol)?;
        if !(self.winner_floor > 0.0 && self.winner_floor < 1.0) {
            return Err(Error::InvalidParameter {
                name: "winner_floor",
                reason: format!("must lie in (0, 1), got {}", self.winner_floor),
            });
        }
        if !(self.init_noise >= 0.0 && self.init_noise < 0.5) {
            return Err(Error::InvalidParameter {
                name: "init_noise",
                reason: format!("must lie in [0, 0.5), got {}", self.init_noise),
            });
        }
        if self.conv_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "conv_steps",
                reason: "must be at least 1".into(),
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Cost of forwarding to `neighbor` on the way to `dest`. Every faulty node
/// contributes, including `neighbor` itself when it is faulty.
pub fn far_cost(faults: &FaultMap, neighbor: NodeId, dest: NodeId, params: &FarParams) -> f64 {
    let proximity: f64 = faults
        .faulty_nodes()
        .iter()
        .map(|&k| 1.0 / (hamming_distance(neighbor, k) as f64 + params.epsilon))
        .sum();
    params.k3 * hamming_distance(neighbor, dest) as f64 + params.k4 * proximity
}

/// Costs of all `n` neighbors of `current` (indexed by dimension) and the
/// mask of admissible (non-faulty) ones.
pub fn neighbor_costs(
    cube: Hypercube,
    faults: &FaultMap,
    current: NodeId,
    dest: NodeId,
    params: &FarParams,
) -> (Vec<f64>, DimSet) {
    let mut mask = DimSet::EMPTY;
    let costs = (0..cube.dimension())
        .map(|j| {
            let y = flip(current, j);
            if !faults.is_faulty(y) {
                mask.insert(j);
            }
            far_cost(faults, y, dest, params)
        })
        .collect();
    (costs, mask)
}

/// Cheapest admissible dimension; ties go to the lowest index.
pub fn far_argmin(costs: &[f64], mask: DimSet) -> Result<u32> {
    let mut best: Option<(u32, f64)> = None;
    for j in mask.iter().filter(|&j| (j as usize) < costs.len()) {
        let g = costs[j as usize];
        if best.is_none_or(|(_, b)| g < b) {
            best = Some((j, g));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::EmptyCandidateSet)
}

#[inline]
fn sigmoid(gain: f64, u: f64) -> f64 {
    1.0 / (1.0 + (-gain * u).exp())
}

/// The network for one routing decision.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfieldState {
    n: usize,
    /// Neuron inputs.
    pub u: Vec<f64>,
    /// Neuron outputs, in (0, 1) for admissible neurons and 0 for the rest.
    pub v: Vec<f64>,
    /// Row-major `n x n` weights.
    w: Vec<f64>,
    t: Vec<f64>,
    costs: Vec<f64>,
    mask: DimSet,
    gain: f64,
    pub iterations: u32,
}

/// Builds the network for `costs` over the admissible neurons in `mask`, with
/// initial outputs `1 / |mask|` perturbed by noise drawn from `rng`.
pub fn build_hopfield<R: Rng + ?Sized>(
    costs: &[f64],
    mask: DimSet,
    params: &FarParams,
    rng: &mut R,
) -> Result<HopfieldState> {
    let n = costs.len();
    let mask = DimSet(mask.0 & DimSet::all(n as u32).0);
    if mask.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let mut w = vec![0.0; n * n];
    let mut t = vec![0.0; n];
    for j in mask {
        let j = j as usize;
        t[j] = 2.0 * params.k2;
        for k in mask {
            let k = k as usize;
            if params.zero_diagonal && j == k {
                continue;
            }
            w[j * n + k] = -(2.0 * params.k1 * (costs[j] * costs[k]) + 2.0 * params.k2);
        }
    }

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let base = 1.0 / mask.len() as f64;
    for j in mask {
        let j = j as usize;
        let noise = if params.init_noise > 0.0 {
            rng.random_range(-params.init_noise..=params.init_noise)
        } else {
            0.0
        };
        // a lone neuron starts at 1 + noise; keep it inside the sigmoid's range
        let v0 = (base + noise).clamp(1e-3, 1.0 - 1e-3);
        u[j] = (v0 / (1.0 - v0)).ln() / params.gain;
        v[j] = sigmoid(params.gain, u[j]);
    }

    Ok(HopfieldState {
        n,
        u,
        v,
        w,
        t,
        costs: costs.to_vec(),
        mask,
        gain: params.gain,
        iterations: 0,
    })
}

impl HopfieldState {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn weight(&self, j: usize, k: usize) -> f64 {
        self.w[j * self.n + k]
    }

    pub fn threshold(&self, j: usize) -> f64 {
        self.t[j]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn mask(&self) -> DimSet {
        self.mask
    }

    /// `dU_j/dt = sum_k W_jk V_k + T_j` for every neuron (zero when masked).
    pub fn drive(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                if !self.mask.contains(j as u32) {
                    return 0.0;
                }
                let row = &self.w[j * self.n..(j + 1) * self.n];
                row.iter().zip(&self.v).map(|(w, v)| w * v).sum::<f64>() + self.t[j]
            })
            .collect()
    }

    /// Replaces the outputs (and matching inputs) of the admissible neurons.
    /// Masked neurons stay at zero.
    pub fn set_outputs(&mut self, v: &[f64]) {
        for (j, &vj) in v.iter().enumerate().take(self.n) {
            if self.mask.contains(j as u32) {
                let vj = vj.clamp(1e-12, 1.0 - 1e-12);
                self.v[j] = vj;
                self.u[j] = (vj / (1.0 - vj)).ln() / self.gain;
            } else {
                self.v[j] = 0.0;
            }
        }
    }

    /// One synchronous Euler step; returns `max_j |dV_j|`.
    pub fn step(&mut self, dt: f64) -> f64 {
        let drive = self.drive();
        let mut max_dv: f64 = 0.0;
        for j in self.mask {
            let j = j as usize;
            self.u[j] += dt * drive[j];
            let vj = sigmoid(self.gain, self.u[j]);
            max_dv = max_dv.max((vj - self.v[j]).abs());
            self.v[j] = vj;
        }
        self.iterations += 1;
        max_dv
    }

    /// Strongest admissible neuron (lowest index on ties) and its output.
    pub fn leader(&self) -> (u32, f64) {
        let mut best = (u32::MAX, f64::NEG_INFINITY);
        for j in self.mask {
            if self.v[j as usize] > best.1 {
                best = (j, self.v[j as usize]);
            }
        }
        best
    }
}

pub fn hopfield_energy(state: &HopfieldState, params: &FarParams) -> f64 {
    energy_of(&state.costs, &state.v, params)
}

/// Energy of an arbitrary output vector under `costs`.
pub fn energy_of(costs: &[f64], v: &[f64], params: &FarParams) -> f64 {
    let weighted: f64 = costs.iter().zip(v).map(|(g, v)| g * v).sum();
    let total: f64 = v.iter().sum();
    params.k1 * weighted * weighted + params.k2 * (total - 1.0) * (total - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopfieldOutcome {
    /// `None` when no neuron reached the winner floor.
    pub winner: Option<u32>,
    pub iterations: u32,
    pub converged: bool,
}

/// Integrates the network until it settles or hits the iteration cap.
pub fn hopfield_run(state: &mut HopfieldState, params: &FarParams) -> HopfieldOutcome {
    hopfield_run_observed(state, params, |_| {})
}

/// As [`hopfield_run`], calling `observe` after every step.
pub fn hopfield_run_observed(
    state: &mut HopfieldState,
    params: &FarParams,
    mut observe: impl FnMut(&HopfieldState),
) -> HopfieldOutcome {
    let mut settled = 0;
    let mut converged = false;
    while state.iterations < params.max_iters {
        let dv = state.step(params.dt);
        observe(state);
        if dv < params.conv_tol {
            settled += 1;
            if settled >= params.conv_steps {
                converged = true;
                break;
            }
        } else {
            settled = 0;
        }
    }
    let (j, vj) = state.leader();
    HopfieldOutcome {
        winner: (vj >= params.winner_floor).then_some(j),
        iterations: state.iterations,
        converged,
    }
}

/// Seed of the network-initialisation RNG for hop `hop` of a route seeded with `run_seed`.
pub fn decision_seed(run_seed: u64, hop: u64) -> u64 {
    crate::seed::mix(run_seed ^ 0x4641_525f_484f_5046, hop)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum DecisionMode {
    #[default]
    Hopfield,
    ArgminOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HopTelemetry {
    /// Network iterations for this decision (Hopfield mode only).
    pub iterations: Option<u32>,
    /// The network produced no winner and the oracle decided instead.
    pub fallback: bool,
    /// The network's winner differs from the oracle's choice.
    pub disagreement: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarRoute {
    pub outcome: RoutingOutcome,
    /// One entry per routing decision that selected a next hop.
    pub telemetry: Vec<HopTelemetry>,
}

impl FarRoute {
    pub fn fallbacks(&self) -> usize {
        self.telemetry.iter().filter(|t| t.fallback).count()
    }

    pub fn disagreements(&self) -> usize {
        self.telemetry.iter().filter(|t| t.disagreement).count()
    }
}

/// A single FAR decision at `current`: the chosen dimension plus telemetry,
/// or `None` when every neighbor is faulty.
pub fn far_decide(
    cube: Hypercube,
    faults: &FaultMap,
    current: NodeId,
    dest: NodeId,
    params: &FarParams,
    mode: DecisionMode,
    seed: u64,
) -> Option<(u32, HopTelemetry)> {
    let (costs, mask) = neighbor_costs(cube, faults, current, dest, params);
    let oracle = far_argmin(&costs, mask).ok()?;
    match mode {
        DecisionMode::ArgminOracle => Some((oracle, HopTelemetry::default())),
        DecisionMode::Hopfield => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = build_hopfield(&costs, mask, params, &mut rng).ok()?;
            let run = hopfield_run(&mut state, params);
            let telemetry = HopTelemetry {
                iterations: Some(run.iterations),
                fallback: run.winner.is_none(),
                disagreement: run.winner.is_some_and(|w| w != oracle),
            };
            Some((run.winner.unwrap_or(oracle), telemetry))
        }
    }
}

/// Routes a message with FAR. Faulty neighbors are never candidates.
#[allow(clippy::too_many_arguments)]
pub fn far_route(
    source: NodeId,
    dest: NodeId,
    cube: Hypercube,
    faults: &FaultMap,
    params: &FarParams,
    max_hops: usize,
    mode: DecisionMode,
    seed: u64,
) -> Result<FarRoute> {
    for x in [source, dest] {
        cube.check(x)?;
        if faults.is_faulty(x) {
            return Err(Error::FaultyEndpoint(x));
        }
    }
    let mut path = vec![source];
    let mut telemetry = Vec::new();
    let mut current = source;
    let status = loop {
        if current == dest {
            break RouteStatus::Delivered;
        }
        if path.len() > max_hops {
            break RouteStatus::HopLimitExceeded;
        }
        let hop = (path.len() - 1) as u64;
        match far_decide(
            cube,
            faults,
            current,
            dest,
            params,
            mode,
            decision_seed(seed, hop),
        ) {
            None => break RouteStatus::Undeliverable,
            Some((j, t)) => {
                telemetry.push(t);
                current = flip(current, j);
                path.push(current);
            }
        }
    };
    Ok(FarRoute {
        outcome: RoutingOutcome { path, status },
        telemetry,
    })
}
