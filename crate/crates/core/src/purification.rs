//! Graph-diagonal noise, two-copy purification recurrences and threshold
//! searches.
//!
//! A graph-diagonal state is `Σ_μ λ_μ σ3^μ|G⟩⟨G|σ3^μ`; bit `v` of `μ` marks a
//! `σ3` error on vertex `v`.

use num_rational::Ratio;
use serde::Serialize;

use crate::graphstab::Graph;
use crate::qsim::{DensityMatrix, StateVector, C64};
use crate::{Error, Result};

/// Largest graph handled by the recurrences.
pub const MAX_VERTICES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDiagonalState {
    graph: Graph,
    probs: Vec<f64>,
}

impl GraphDiagonalState {
    pub fn pure(graph: Graph) -> Result<Self> {
        if graph.n() > MAX_VERTICES {
            return Err(Error::QubitBudget(graph.n()));
        }
        let mut probs = vec![0.0; 1 << graph.n()];
        probs[0] = 1.0;
        Ok(GraphDiagonalState { graph, probs })
    }

    pub fn new(graph: Graph, probs: Vec<f64>) -> Result<Self> {
        if graph.n() > MAX_VERTICES {
            return Err(Error::QubitBudget(graph.n()));
        }
        if probs.len() != 1 << graph.n() {
            return Err(Error::ParamCount { expected: 1 << graph.n(), got: probs.len() });
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidParameter("populations must be non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("populations sum to {total}")));
        }
        Ok(GraphDiagonalState { graph, probs })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn fidelity(&self) -> f64 {
        self.probs[0]
    }
}

/// Per-qubit depolarizing survival parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseSpec {
    survival: Vec<f64>,
}

impl NoiseSpec {
    pub fn new(survival: Vec<f64>) -> Result<Self> {
        if let Some(p) = survival.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!("survival parameter {p} outside [0, 1]")));
        }
        Ok(NoiseSpec { survival })
    }

    /// `p` on the transmitted qubits, `q` on the rest.
    pub fn transmitted(n: usize, transmitted: &[usize], p: f64, q: f64) -> Result<Self> {
        Self::new((0..n).map(|v| if transmitted.contains(&v) { p } else { q }).collect())
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }
}

/// Depolarizing noise on every qubit of `|G⟩`, tracked in the graph basis:
/// `σ3` flips `e_j`, `σ1` flips `N(j)` and `σ2` flips both.
pub fn noisy_graph_state(g: &Graph, noise: &NoiseSpec) -> Result<GraphDiagonalState> {
    if noise.survival.len() != g.n() {
        return Err(Error::ParamCount { expected: g.n(), got: noise.survival.len() });
    }
    let mut state = GraphDiagonalState::pure(g.clone())?;
    for (j, &p) in noise.survival.iter().enumerate() {
        if p == 1.0 {
            continue;
        }
        let e = 1usize << j;
        let nb = g.neighbors(j) as usize;
        let w = (1.0 - p) / 4.0;
        let old = std::mem::take(&mut state.probs);
        state.probs = (0..old.len())
            .map(|m| (p + w) * old[m] + w * (old[m ^ e] + old[m ^ nb] + old[m ^ e ^ nb]))
            .collect();
    }
    Ok(state)
}

/// In-place Walsh–Hadamard transform over the bits in `mask`.
fn walsh_hadamard(v: &mut [f64], mask: usize) {
    let mut h = 1;
    while h < v.len() {
        if mask & h != 0 {
            for i in 0..v.len() {
                if i & h == 0 {
                    let (a, b) = (v[i], v[i | h]);
                    v[i] = a + b;
                    v[i | h] = a - b;
                }
            }
        }
        h <<= 1;
    }
}

/// One two-copy round with the colour class `class` as the checked set:
/// `λ'_γ ∝ Σ λ_μ λ_ν` over `μ_C = ν_C = γ_C`, `μ_R ⊕ ν_R = γ_R`.
/// Returns the new state and the success probability.
pub fn subprotocol(state: &GraphDiagonalState, class: &[usize]) -> Result<(GraphDiagonalState, f64)> {
    state.graph.is_independent(class)?;
    let n = state.graph.n();
    let c_mask: usize = class.iter().fold(0, |m, &v| m | (1 << v));
    let r_mask = ((1usize << n) - 1) & !c_mask;
    // the XOR convolution over the R bits acts on each C slice separately
    let mut v = state.probs.clone();
    walsh_hadamard(&mut v, r_mask);
    for x in &mut v {
        *x *= *x;
    }
    walsh_hadamard(&mut v, r_mask);
    let scale = 1.0 / (1u64 << r_mask.count_ones()) as f64;
    let mut clamped = 0usize;
    for x in &mut v {
        *x *= scale;
        if *x < 0.0 {
            if *x < -1e-14 {
                log::warn!("clamping population {x:e} to zero");
            }
            clamped += 1;
            *x = 0.0;
        }
    }
    if clamped > 0 {
        log::debug!("{clamped} rounding-level negative populations clamped");
    }
    let k: f64 = v.iter().sum();
    if !(k > 0.0) {
        return Err(Error::ZeroSuccess);
    }
    for x in &mut v {
        *x /= k;
    }
    Ok((GraphDiagonalState { graph: state.graph.clone(), probs: v }, k))
}

/// Reference implementation of [`subprotocol`] by the explicit pair sum.
pub fn subprotocol_pairwise(state: &GraphDiagonalState, class: &[usize]) -> Result<(GraphDiagonalState, f64)> {
    state.graph.is_independent(class)?;
    let c_mask: usize = class.iter().fold(0, |m, &v| m | (1 << v));
    let d = state.probs.len();
    let mut out = vec![0.0; d];
    for mu in 0..d {
        for nu in 0..d {
            if (mu ^ nu) & c_mask == 0 {
                out[mu ^ nu | (mu & c_mask)] += state.probs[mu] * state.probs[nu];
            }
        }
    }
    let k: f64 = out.iter().sum();
    if !(k > 0.0) {
        return Err(Error::ZeroSuccess);
    }
    Ok((GraphDiagonalState { graph: state.graph.clone(), probs: out.iter().map(|x| x / k).collect() }, k))
}

pub const DEFAULT_TARGET: f64 = 1.0 - 1e-6;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Rounds below the initial fidelity after which a run is abandoned.
pub const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurifyResult {
    pub converged: bool,
    pub iterations: usize,
    /// Fidelity before the first round and after each round.
    pub trajectory: Vec<f64>,
}

/// Applies the classes of `cycle` in turn until the fidelity reaches
/// `target`, `max_iter` rounds elapse, or the fidelity stays below its
/// initial value for [`STALL_LIMIT`] rounds.
pub fn purify_iterate(
    initial: &GraphDiagonalState,
    cycle: &[Vec<usize>],
    max_iter: usize,
    target: f64,
) -> Result<PurifyResult> {
    if cycle.is_empty() {
        return Err(Error::InvalidParameter("empty colour cycle".into()));
    }
    let f0 = initial.fidelity();
    let mut trajectory = vec![f0];
    if f0 >= target {
        return Ok(PurifyResult { converged: true, iterations: 0, trajectory });
    }
    let mut state = initial.clone();
    let mut below = 0;
    for it in 1..=max_iter {
        state = match subprotocol(&state, &cycle[(it - 1) % cycle.len()]) {
            Ok((s, _)) => s,
            Err(Error::ZeroSuccess) => return Ok(PurifyResult { converged: false, iterations: it, trajectory }),
            Err(e) => return Err(e),
        };
        let f = state.fidelity();
        trajectory.push(f);
        if f >= target {
            return Ok(PurifyResult { converged: true, iterations: it, trajectory });
        }
        below = if f < f0 { below + 1 } else { 0 };
        if below >= STALL_LIMIT {
            return Ok(PurifyResult { converged: false, iterations: it, trajectory });
        }
    }
    Ok(PurifyResult { converged: false, iterations: max_iter, trajectory })
}

/// Colour classes that contain a noisy vertex or a neighbour of one, i.e.
/// the classes that can carry errors.
pub fn default_cycle(g: &Graph, coloring: &[usize], noisy: &[usize]) -> Vec<Vec<usize>> {
    let mut touched = 0u64;
    for &v in noisy {
        touched |= (1 << v) | g.neighbors(v);
    }
    crate::graphstab::color_classes(coloring)
        .into_iter()
        .filter(|cls| cls.iter().any(|&v| touched & (1 << v) != 0))
        .collect()
}

/// Purification scenario: graph, colour cycle and noise pattern.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: Graph,
    pub cycle: Vec<Vec<usize>>,
    pub transmitted: Vec<usize>,
    pub q: f64,
}

impl Scenario {
    pub fn run(&self, p: f64) -> Result<PurifyResult> {
        let noise = NoiseSpec::transmitted(self.graph.n(), &self.transmitted, p, self.q)?;
        purify_iterate(&noisy_graph_state(&self.graph, &noise)?, &self.cycle, DEFAULT_MAX_ITER, DEFAULT_TARGET)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    /// Upper end of the final bracket: smallest `p` seen to converge.
    pub p_star: f64,
    pub lower: f64,
    /// Rounds needed at `p_star`.
    pub iterations_at_threshold: usize,
    /// `false` when even `p = 1` fails.
    pub found: bool,
}

/// Bisection on `p` of the convergence predicate. A coarse grid is checked
/// first; a predicate that switches more than once is reported as an error.
pub fn threshold_search(scenario: &Scenario, tol: f64) -> Result<Threshold> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut flags = Vec::with_capacity(grid.len());
    for &p in &grid {
        flags.push(scenario.run(p)?.converged);
    }
    if flags.windows(2).any(|w| w[0] && !w[1]) {
        let desc: Vec<String> = grid.iter().zip(&flags).map(|(p, f)| format!("{p:.1}:{}", *f as u8)).collect();
        return Err(Error::NonMonotone(desc.join(" ")));
    }
    let Some(first) = flags.iter().position(|&f| f) else {
        return Ok(Threshold { p_star: 1.0, lower: 1.0, iterations_at_threshold: 0, found: false });
    };
    if first == 0 {
        let it = scenario.run(0.0)?.iterations;
        return Ok(Threshold { p_star: 0.0, lower: 0.0, iterations_at_threshold: it, found: true });
    }
    let (mut lo, mut hi) = (grid[first - 1], grid[first]);
    let mut hi_iter = scenario.run(hi)?.iterations;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let r = scenario.run(mid)?;
        if r.converged {
            hi = mid;
            hi_iter = r.iterations;
        } else {
            lo = mid;
        }
    }
    Ok(Threshold { p_star: hi, lower: lo, iterations_at_threshold: hi_iter, found: true })
}

/// Graph, colouring and transmitted set used for purifying a resource.
#[derive(Debug, Clone)]
pub struct PurificationSetup {
    pub graph: Graph,
    pub coloring: Vec<usize>,
    pub transmitted: Vec<usize>,
    /// Local complementations taking the built-in graph to `graph`.
    pub lc_sequence: Vec<usize>,
}

impl PurificationSetup {
    /// Scenario with the default colour cycle for noise `(p on transmitted, q)`.
    pub fn scenario(&self, transmitted: &[usize], q: f64) -> Scenario {
        let noisy: Vec<usize> = if q < 1.0 { (0..self.graph.n()).collect() } else { transmitted.to_vec() };
        Scenario {
            graph: self.graph.clone(),
            cycle: default_cycle(&self.graph, &self.coloring, &noisy),
            transmitted: transmitted.to_vec(),
            q,
        }
    }
}

/// First member (in breadth-first LC order) of the labeled orbit of `rep8`
/// with a 3-colouring whose third colour is one vertex outside the
/// transmitted qubits and their neighbourhoods. Noise on the transmitted
/// qubits then never reaches the third colour.
pub fn rep8_setup() -> Result<PurificationSetup> {
    use crate::graphstab::{coloring_with_singleton, find_lc_sequence, rep8, REP8_TRANSMITTED};
    let isolated = |g: &Graph| -> Vec<usize> {
        let touched = REP8_TRANSMITTED.iter().fold(0u64, |m, &v| m | (1 << v) | g.neighbors(v));
        (0..g.n()).filter(|v| touched & (1 << v) == 0).collect()
    };
    let goal = |g: &Graph| coloring_with_singleton(g, 3, &isolated(g)).is_some();
    let (lc_sequence, graph) = find_lc_sequence(&rep8(), goal, 1 << 16)?
        .ok_or_else(|| Error::Malformed("no suitable 3-colouring in the orbit".into()))?;
    let coloring = coloring_with_singleton(&graph, 3, &isolated(&graph)).expect("goal holds");
    Ok(PurificationSetup { graph, coloring, transmitted: REP8_TRANSMITTED.to_vec(), lc_sequence })
}

/// First bipartite member of the labeled orbit of `mes6`.
pub fn mes6_setup() -> Result<PurificationSetup> {
    use crate::graphstab::{chromatic_info, find_lc_sequence, mes6, MES6_TRANSMITTED};
    let (lc_sequence, graph) = find_lc_sequence(&mes6(), Graph::is_bipartite, 1 << 16)?
        .ok_or_else(|| Error::Malformed("no bipartite graph in the orbit".into()))?;
    let coloring = chromatic_info(&graph).1;
    Ok(PurificationSetup { graph, coloring, transmitted: MES6_TRANSMITTED.to_vec(), lc_sequence })
}

pub fn setup(id: &str) -> Result<PurificationSetup> {
    match id {
        "rep8" => rep8_setup(),
        "mes6" => mes6_setup(),
        other => Err(Error::InvalidParameter(format!("unknown graph id {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantRow {
    pub graph: String,
    pub q: f64,
    pub transmitted: Vec<usize>,
    /// Receiver qubit that is not transmitted.
    pub retained: usize,
    pub threshold: Threshold,
}

/// Two-transmitted-qubit thresholds: `rep8` at `q ∈ {0.99, 0.97}` and `mes6`
/// at `q = 1`, for every choice of retained receiver qubit.
pub fn variant_thresholds(tol: f64) -> Result<Vec<VariantRow>> {
    let mut rows = Vec::new();
    for (id, qs) in [("rep8", vec![0.99, 0.97]), ("mes6", vec![1.0])] {
        let s = setup(id)?;
        for q in qs {
            for &retained in &s.transmitted {
                let tx: Vec<usize> = s.transmitted.iter().copied().filter(|&v| v != retained).collect();
                let threshold = threshold_search(&s.scenario(&tx, q), tol)?;
                rows.push(VariantRow { graph: id.to_string(), q, transmitted: tx, retained, threshold });
            }
        }
    }
    Ok(rows)
}

/// One-sided depolarizing fidelity `p + (1-p)/4` of `|Φ+⟩`.
pub fn teleport_fidelity(p: Ratio<i64>) -> Ratio<i64> {
    p + (Ratio::from_integer(1) - p) / 4
}

/// Solves `p + (1-p)/4 = 1/2` exactly.
pub fn bipartite_teleport_threshold() -> Ratio<i64> {
    // (3p + 1)/4 = 1/2
    (Ratio::new(1, 2) * 4 - 1) / 3
}

/// Same fidelity by density-matrix evaluation.
pub fn teleport_fidelity_numeric(p: f64) -> Result<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let phi = StateVector::from_amplitudes(vec![C64::new(h, 0.0), z, z, C64::new(h, 0.0)])?;
    let mut rho = DensityMatrix::from_pure(&phi);
    rho.depolarize(1, p)?;
    Ok(rho.expectation(&phi))
}

/// `|W⟩ = (|001⟩ + |010⟩ + |100⟩)/√3`.
pub fn w_state() -> StateVector {
    let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
    let z = C64::new(0.0, 0.0);
    StateVector::from_amplitudes(vec![z, a, a, z, a, z, z, z]).expect("normalized")
}

/// Minimum eigenvalue of the single-qubit partial transpose of
/// `E_p^{⊗3}(|W⟩⟨W|)`.
pub fn w_ppt_min_eigenvalue(p: f64) -> Result<f64> {
    let mut rho = DensityMatrix::from_pure(&w_state());
    for q in 0..3 {
        rho.depolarize(q, p)?;
    }
    rho.ppt_min_eigenvalue(&[0])
}

/// Boundary between PPT (below) and NPT (above) by bisection.
pub fn w_ppt_boundary(tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if w_ppt_min_eigenvalue(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub mod oracle;
