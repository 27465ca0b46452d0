//! Monte Carlo experiments.
//!
//! A case fixes the network dimension, the number of faulty nodes and the
//! router. Each run of a case draws a fresh fault map and a fresh pair of
//! distinct healthy endpoints, routes one message and records the outcome.
//! Path lengths are normalised by the mean Hamming distance of the same
//! sampled endpoint pairs, so cases of different size can be compared.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chiu::chiu_route;
use crate::error::{Error, Result};
use crate::far::{far_route, DecisionMode, FarParams};
use crate::route::{audit_path, default_max_hops, RouteStatus};
use crate::safety::{classify, FaultMap, UnsafeRule};
use crate::seed;
use crate::topology::{flip, hamming_distance, Hypercube, NodeId};

/// Length of the shortest fault-free path, or `None` if `dest` is cut off.
pub fn bfs_shortest(
    cube: Hypercube,
    faults: &FaultMap,
    source: NodeId,
    dest: NodeId,
) -> Option<u32> {
    if faults.is_faulty(source) || faults.is_faulty(dest) {
        return None;
    }
    if source == dest {
        return Some(0);
    }
    let mut dist = vec![u32::MAX; cube.node_count()];
    dist[source.index()] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x.index()];
        for j in 0..cube.dimension() {
            let y = flip(x, j);
            if faults.is_faulty(y) || dist[y.index()] != u32::MAX {
                continue;
            }
            if y == dest {
                return Some(d + 1);
            }
            dist[y.index()] = d + 1;
            queue.push_back(y);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RouterKind {
    #[serde(rename = "chiu")]
    Chiu,
    #[serde(rename = "far")]
    FarHopfield,
    #[serde(rename = "far-argmin")]
    FarArgmin,
}

impl RouterKind {
    pub const ALL: [RouterKind; 3] = [
        RouterKind::Chiu,
        RouterKind::FarHopfield,
        RouterKind::FarArgmin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RouterKind::Chiu => "chiu",
            RouterKind::FarHopfield => "far",
            RouterKind::FarArgmin => "far-argmin",
        }
    }

    pub fn uses_network(self) -> bool {
        self == RouterKind::FarHopfield
    }
}

impl fmt::Display for RouterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RouterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        RouterKind::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown router `{s}`"))
    }
}

pub const DEFAULT_RUNS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub dimension: u32,
    pub fault_count: usize,
    pub runs: usize,
    pub seed: u64,
    pub router: RouterKind,
    pub params: FarParams,
    pub rule: UnsafeRule,
    pub max_hops: usize,
}

impl CaseSpec {
    pub fn new(dimension: u32, fault_count: usize, router: RouterKind) -> Self {
        CaseSpec {
            dimension,
            fault_count,
            runs: DEFAULT_RUNS,
            seed: 0,
            router,
            params: FarParams::default(),
            rule: UnsafeRule::Chiu,
            max_hops: default_max_hops(dimension),
        }
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.runs = runs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<Hypercube> {
        let cube = Hypercube::new(self.dimension)?;
        if self.runs == 0 {
            return Err(Error::InvalidParameter {
                name: "runs",
                reason: "must be at least 1".into(),
            });
        }
        if self.fault_count + 2 > cube.node_count() {
            return Err(Error::InfeasibleFaultCount {
                requested: self.fault_count,
                available: cube.node_count() - 2,
            });
        }
        if self.max_hops == 0 {
            return Err(Error::InvalidParameter {
                name: "max_hops",
                reason: "must be at least 1".into(),
            });
        }
        self.params.validate()?;
        Ok(cube)
    }
}

/// Integer tallies for a set of runs. Merging is associative and
/// commutative, so runs can be aggregated in any grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub runs: u64,
    pub delivered: u64,
    pub undeliverable: u64,
    pub hop_limit: u64,
    /// Runs whose endpoints had no fault-free path at all.
    pub unreachable: u64,
    /// Runs not delivered although a fault-free path existed.
    pub missed_reachable: u64,
    pub audit_violations: u64,
    pub delivered_hops: u64,
    /// Hamming distances of the delivered runs' endpoints.
    pub delivered_distance: u64,
    pub distance_sum: u64,
    pub decisions: u64,
    pub iteration_sum: u64,
    pub max_iterations: u32,
    pub fallbacks: u64,
    pub disagreements: u64,
}

impl Tally {
    pub fn merge(self, o: Tally) -> Tally {
        Tally {
            runs: self.runs + o.runs,
            delivered: self.delivered + o.delivered,
            undeliverable: self.undeliverable + o.undeliverable,
            hop_limit: self.hop_limit + o.hop_limit,
            unreachable: self.unreachable + o.unreachable,
            missed_reachable: self.missed_reachable + o.missed_reachable,
            audit_violations: self.audit_violations + o.audit_violations,
            delivered_hops: self.delivered_hops + o.delivered_hops,
            delivered_distance: self.delivered_distance + o.delivered_distance,
            distance_sum: self.distance_sum + o.distance_sum,
            decisions: self.decisions + o.decisions,
            iteration_sum: self.iteration_sum + o.iteration_sum,
            max_iterations: self.max_iterations.max(o.max_iterations),
            fallbacks: self.fallbacks + o.fallbacks,
            disagreements: self.disagreements + o.disagreements,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStats {
    pub dimension: u32,
    pub fault_count: usize,
    pub router: RouterKind,
    pub runs: usize,
    pub seed: u64,
    pub delivered: u64,
    pub undeliverable: u64,
    pub hop_limit: u64,
    pub unreachable: u64,
    pub missed_reachable: u64,
    pub audit_violations: u64,
    /// Mean hops over delivered runs.
    pub mpl: Option<f64>,
    /// Mean Hamming distance over all sampled endpoint pairs.
    pub fault_free_mpl: f64,
    /// Delivered hops over the Hamming distances of the same delivered pairs.
    pub pl_over_mpl: Option<f64>,
    /// Per network decision; `None` for routers without a network.
    pub mean_iterations: Option<f64>,
    pub max_iterations: Option<u32>,
    pub decisions: Option<u64>,
    pub fallbacks: Option<u64>,
    pub disagreements: Option<u64>,
}

impl CaseStats {
    pub fn from_tally(spec: &CaseSpec, t: &Tally) -> CaseStats {
        let mpl = (t.delivered > 0).then(|| t.delivered_hops as f64 / t.delivered as f64);
        let fault_free_mpl = t.distance_sum as f64 / t.runs as f64;
        let network = spec.router.uses_network();
        CaseStats {
            dimension: spec.dimension,
            fault_count: spec.fault_count,
            router: spec.router,
            runs: spec.runs,
            seed: spec.seed,
            delivered: t.delivered,
            undeliverable: t.undeliverable,
            hop_limit: t.hop_limit,
            unreachable: t.unreachable,
            missed_reachable: t.missed_reachable,
            audit_violations: t.audit_violations,
            mpl,
            fault_free_mpl,
            pl_over_mpl: (t.delivered_distance > 0)
                .then(|| t.delivered_hops as f64 / t.delivered_distance as f64),
            mean_iterations: (network && t.decisions > 0)
                .then(|| t.iteration_sum as f64 / t.decisions as f64),
            max_iterations: network.then_some(t.max_iterations),
            decisions: network.then_some(t.decisions),
            fallbacks: network.then_some(t.fallbacks),
            disagreements: network.then_some(t.disagreements),
        }
    }

    pub fn delivery_rate(&self) -> f64 {
        self.delivered as f64 / self.runs as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// The sampled scenario of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSample {
    pub faults: FaultMap,
    pub source: NodeId,
    pub dest: NodeId,
    pub route_seed: u64,
}

/// Draws the fault map and endpoints of run `run`. The draw does not depend
/// on the router, so cases that differ only in router see identical runs.
pub fn sample_run(cube: Hypercube, fault_count: usize, seed: u64, run: u64) -> Result<RunSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed, run));
    let faults = FaultMap::random_with(cube, fault_count, &mut rng, &[])?;
    let healthy: Vec<NodeId> = cube.nodes().filter(|&x| !faults.is_faulty(x)).collect();
    if healthy.len() < 2 {
        return Err(Error::InfeasibleFaultCount {
            requested: fault_count,
            available: cube.node_count() - 2,
        });
    }
    let source = healthy[rng.random_range(0..healthy.len())];
    let mut i = rng.random_range(0..healthy.len() - 1);
    if healthy[i] == source {
        i = healthy.len() - 1;
    }
    let dest = healthy[i];
    Ok(RunSample {
        faults,
        source,
        dest,
        route_seed: rng.random(),
    })
}

fn run_once(spec: &CaseSpec, cube: Hypercube, run: u64) -> Result<Tally> {
    let RunSample {
        faults,
        source,
        dest,
        route_seed,
    } = sample_run(cube, spec.fault_count, spec.seed, run)?;

    let (outcome, telemetry) = match spec.router {
        RouterKind::Chiu => {
            let cls = classify(cube, &faults, spec.rule);
            (chiu_route(source, dest, &cls, spec.max_hops)?, Vec::new())
        }
        RouterKind::FarHopfield | RouterKind::FarArgmin => {
            let mode = if spec.router == RouterKind::FarHopfield {
                DecisionMode::Hopfield
            } else {
                DecisionMode::ArgminOracle
            };
            let r = far_route(
                source,
                dest,
                cube,
                &faults,
                &spec.params,
                spec.max_hops,
                mode,
                route_seed,
            )?;
            (r.outcome, r.telemetry)
        }
    };

    let shortest = bfs_shortest(cube, &faults, source, dest);
    let mut t = Tally {
        runs: 1,
        distance_sum: hamming_distance(source, dest) as u64,
        unreachable: shortest.is_none() as u64,
        ..Tally::default()
    };
    match outcome.status {
        RouteStatus::Delivered => {
            t.delivered = 1;
            t.delivered_hops = outcome.hops() as u64;
            t.delivered_distance = t.distance_sum;
        }
        RouteStatus::Undeliverable => t.undeliverable = 1,
        RouteStatus::HopLimitExceeded => t.hop_limit = 1,
    }
    if !outcome.delivered() && shortest.is_some() {
        t.missed_reachable = 1;
    }
    let bound = shortest.unwrap_or(0) as usize;
    if audit_path(&outcome, source, dest, &faults, bound).is_err()
        || (outcome.delivered() && shortest.is_none())
    {
        t.audit_violations = 1;
    }
    for h in &telemetry {
        if let Some(it) = h.iterations {
            t.decisions += 1;
            t.iteration_sum += it as u64;
            t.max_iterations = t.max_iterations.max(it);
        }
        t.fallbacks += h.fallback as u64;
        t.disagreements += h.disagreement as u64;
    }
    Ok(t)
}

pub fn run_case(spec: &CaseSpec) -> Result<CaseStats> {
    run_case_with(spec, Execution::default())
}

pub fn run_case_with(spec: &CaseSpec, exec: Execution) -> Result<CaseStats> {
    let cube = spec.validate()?;
    let runs = 0..spec.runs as u64;
    let tally = match exec {
        Execution::Serial => runs
            .map(|r| run_once(spec, cube, r))
            .try_fold(Tally::default(), |acc, t| t.map(|t| acc.merge(t)))?,
        Execution::Parallel => runs
            .into_par_iter()
            .map(|r| run_once(spec, cube, r))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?,
    };
    Ok(CaseStats::from_tally(spec, &tally))
}

/// Runs every case; output order follows input order.
pub fn sweep(specs: &[CaseSpec], exec: Execution) -> Result<Vec<CaseStats>> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter {
            name: "cases",
            reason: "sweep needs at least one case".into(),
        });
    }
    let wrap = |index: usize| {
        move |e: Error| Error::Case {
            index,
            source: Box::new(e),
        }
    };
    match exec {
        Execution::Serial => specs
            .iter()
            .enumerate()
            .map(|(i, s)| run_case_with(s, Execution::Serial).map_err(wrap(i)))
            .collect(),
        Execution::Parallel => specs
            .par_iter()
            .enumerate()
            .map(|(i, s)| run_case_with(s, Execution::Parallel).map_err(wrap(i)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(n: u32) -> Hypercube {
        Hypercube::new(n).unwrap()
    }

    #[test]
    fn bfs_examples() {
        let c = cube(4);
        let free = FaultMap::fault_free(c);
        for s in c.nodes() {
            for t in c.nodes() {
                assert_eq!(bfs_shortest(c, &free, s, t), Some(hamming_distance(s, t)));
            }
        }
        let c2 = cube(2);
        let f = FaultMap::from_list(c2, [NodeId(0b01), NodeId(0b10)]).unwrap();
        assert_eq!(bfs_shortest(c2, &f, NodeId(0), NodeId(3)), None);
    }

    #[test]
    fn bfs_detour() {
        // 0000 -> 0011 with both shortcuts blocked needs a 4-hop detour
        let c = cube(4);
        let f = FaultMap::from_list(c, [NodeId(0b0001), NodeId(0b0010)]).unwrap();
        assert_eq!(bfs_shortest(c, &f, NodeId(0), NodeId(0b0011)), Some(4));
    }

    #[test]
    fn fault_free_cases_are_exact() {
        for router in RouterKind::ALL {
            let spec = CaseSpec::new(4, 0, router).with_runs(300).with_seed(5);
            let s = run_case(&spec).unwrap();
            assert_eq!(s.delivered, 300);
            assert_eq!(s.pl_over_mpl, Some(1.0));
            assert_eq!(s.unreachable, 0);
        }
    }

    #[test]
    fn stretch_is_over_delivered_pairs() {
        for router in [RouterKind::Chiu, RouterKind::FarArgmin] {
            let spec = CaseSpec::new(4, 7, router).with_runs(400).with_seed(11);
            let s = run_case(&spec).unwrap();
            assert!(s.delivered < 400);
            assert!(s.pl_over_mpl.unwrap() >= 1.0, "{s:?}");
        }
    }

    #[test]
    fn iteration_fields_only_for_network_router() {
        let chiu = run_case(&CaseSpec::new(3, 1, RouterKind::Chiu).with_runs(20)).unwrap();
        assert!(chiu.mean_iterations.is_none() && chiu.fallbacks.is_none());
        let arg = run_case(&CaseSpec::new(3, 1, RouterKind::FarArgmin).with_runs(20)).unwrap();
        assert!(arg.mean_iterations.is_none());
        let far = run_case(&CaseSpec::new(3, 1, RouterKind::FarHopfield).with_runs(20)).unwrap();
        assert!(far.mean_iterations.is_some() && far.fallbacks.is_some());
        assert!(far.max_iterations.unwrap() <= FarParams::default().max_iters);
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let spec = CaseSpec::new(5, 6, RouterKind::FarHopfield)
            .with_runs(150)
            .with_seed(77);
        let a = run_case_with(&spec, Execution::Serial).unwrap();
        let b = run_case_with(&spec, Execution::Parallel).unwrap();
        let c = run_case_with(&spec, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn accounting_adds_up() {
        for router in RouterKind::ALL {
            let spec = CaseSpec::new(4, 7, router).with_runs(400).with_seed(3);
            let s = run_case(&spec).unwrap();
            assert_eq!(s.delivered + s.undeliverable + s.hop_limit, 400);
            assert_eq!(s.audit_violations, 0);
            assert!(s.unreachable <= s.undeliverable + s.hop_limit);
        }
    }

    #[test]
    fn paired_sampling() {
        let c = cube(5);
        for r in 0..50 {
            let a = sample_run(c, 9, 1234, r).unwrap();
            let b = sample_run(c, 9, 1234, r).unwrap();
            assert_eq!(a, b);
            assert_ne!(a.source, a.dest);
            assert!(!a.faults.is_faulty(a.source) && !a.faults.is_faulty(a.dest));
            assert_eq!(a.faults.fault_count(), 9);
        }
    }

    #[test]
    fn densest_feasible_case() {
        let spec = CaseSpec::new(2, 2, RouterKind::Chiu).with_runs(50);
        let s = run_case(&spec).unwrap();
        assert_eq!(s.runs, 50);
        let bad = CaseSpec::new(2, 3, RouterKind::Chiu);
        assert!(matches!(
            run_case(&bad),
            Err(Error::InfeasibleFaultCount { .. })
        ));
        let zero = CaseSpec::new(3, 0, RouterKind::Chiu).with_runs(0);
        assert!(run_case(&zero).is_err());
    }

    #[test]
    fn sweep_contract() {
        let one = CaseSpec::new(3, 2, RouterKind::Chiu)
            .with_runs(100)
            .with_seed(9);
        assert_eq!(
            sweep(std::slice::from_ref(&one), Execution::Serial).unwrap(),
            vec![run_case(&one).unwrap()]
        );
        let specs: Vec<CaseSpec> = (3..=5)
            .map(|n| CaseSpec::new(n, 4, RouterKind::FarArgmin).with_runs(100))
            .collect();
        let serial = sweep(&specs, Execution::Serial).unwrap();
        let parallel = sweep(&specs, Execution::Parallel).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(
            serial.iter().map(|s| s.dimension).collect::<Vec<_>>(),
            vec![3, 4, 5]
        );

        let mut bad = specs.clone();
        bad[1].fault_count = 1000;
        match sweep(&bad, Execution::Serial) {
            Err(Error::Case { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(sweep(&[], Execution::Serial).is_err());
    }

    fn tally() -> impl Strategy<Value = Tally> {
        (proptest::collection::vec(0u64..1000, 14), 0u32..10_000).prop_map(|(v, m)| Tally {
            runs: v[0],
            delivered: v[1],
            undeliverable: v[2],
            hop_limit: v[3],
            unreachable: v[4],
            missed_reachable: v[5],
            audit_violations: v[6],
            delivered_hops: v[7],
            distance_sum: v[8],
            decisions: v[9],
            iteration_sum: v[10],
            max_iterations: m,
            fallbacks: v[11],
            disagreements: v[12],
            delivered_distance: v[13],
        })
    }

    proptest! {
        #[test]
        fn merge_is_associative_and_commutative(a in tally(), b in tally(), c in tally()) {
            prop_assert_eq!(a.merge(b), b.merge(a));
            prop_assert_eq!(a.merge(b).merge(c), a.merge(b.merge(c)));
            prop_assert_eq!(a.merge(Tally::default()), a);
        }
    }
}
