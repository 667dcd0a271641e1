//! GF(2) stabilizer tableaus, graph states and local complementation.
//!
//! Bit `q` of a row mask refers to qubit (vertex) `q`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliString};
use crate::qsim::{Gate, StateVector, C64};
use crate::{Error, Result};

/// Largest register handled by the GF(2) routines.
pub const MAX_TABLEAU_QUBITS: usize = 32;
/// Largest graph accepted by canonical labeling.
pub const MAX_CANON_VERTICES: usize = 16;

fn bit(q: usize) -> u64 {
    1u64 << q
}

/// Rank over GF(2) of a set of row vectors.
pub fn gf2_rank(rows: &[u128]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for col in (0..128).rev() {
        let m = 1u128 << col;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & m != 0) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && *r & m != 0 {
                *r ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Inverse of an `n × n` GF(2) matrix given as row masks.
pub fn gf2_inverse(rows: &[u64]) -> Option<Vec<u64>> {
    let n = rows.len();
    let mut a = rows.to_vec();
    let mut inv: Vec<u64> = (0..n).map(bit).collect();
    for col in 0..n {
        let p = (col..n).find(|&i| a[i] & bit(col) != 0)?;
        a.swap(col, p);
        inv.swap(col, p);
        for i in 0..n {
            if i != col && a[i] & bit(col) != 0 {
                a[i] ^= a[col];
                inv[i] ^= inv[col];
            }
        }
    }
    Some(inv)
}

/// `a · b` over GF(2), row masks.
fn gf2_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter()
        .map(|&row| {
            let mut acc = 0;
            let mut r = row;
            while r != 0 {
                let k = r.trailing_zeros() as usize;
                acc ^= b[k];
                r &= r - 1;
            }
            acc
        })
        .collect()
}

/// `n` commuting, independent Pauli generators.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerTableau {
    n: usize,
    generators: Vec<PauliString>,
}

/// Graph extracted from a tableau together with the qubits that needed a
/// Hadamard.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphExtraction {
    pub graph: Graph,
    pub hadamards: Vec<usize>,
}

impl StabilizerTableau {
    /// Tableau of `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_TABLEAU_QUBITS {
            return Err(Error::QubitBudget(n));
        }
        Ok(StabilizerTableau { n, generators: (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect() })
    }

    pub fn from_generators(generators: Vec<PauliString>) -> Result<Self> {
        let n = generators.len();
        if n == 0 || n > MAX_TABLEAU_QUBITS {
            return Err(Error::QubitBudget(n));
        }
        if generators.iter().any(|g| g.len() != n || g.phase() % 2 == 1) {
            return Err(Error::Malformed("generators must be Hermitian Pauli strings on n qubits".into()));
        }
        let t = StabilizerTableau { n, generators };
        for i in 0..n {
            for j in 0..i {
                if !t.generators[i].commutes_with(&t.generators[j]) {
                    return Err(Error::Malformed(format!("generators {j} and {i} anticommute")));
                }
            }
        }
        let rows: Vec<u128> = (0..n).map(|i| t.row(i)).collect();
        if gf2_rank(&rows) != n {
            return Err(Error::Malformed("generators are not independent".into()));
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn x_row(&self, i: usize) -> u64 {
        self.mask(i, Pauli::has_x)
    }

    pub fn z_row(&self, i: usize) -> u64 {
        self.mask(i, Pauli::has_z)
    }

    fn mask(&self, i: usize, f: fn(Pauli) -> bool) -> u64 {
        self.generators[i].letters().iter().enumerate().filter(|(_, &p)| f(p)).fold(0, |m, (q, _)| m | bit(q))
    }

    /// `x | z` packed into one row.
    fn row(&self, i: usize) -> u128 {
        ((self.x_row(i) as u128) << 64) | self.z_row(i) as u128
    }

    /// Generator signs, `+1` or `-1`.
    pub fn signs(&self) -> Vec<i8> {
        self.generators.iter().map(|g| if g.phase() == 2 { -1 } else { 1 }).collect()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        for g in &mut self.generators {
            g.conjugate(gate)?;
        }
        Ok(())
    }

    /// State vector stabilized by the generators, fixed up to a global phase.
    pub fn to_state(&self) -> Result<StateVector> {
        if self.n > crate::qsim::MAX_QUBITS {
            return Err(Error::QubitBudget(self.n));
        }
        let d = 1usize << self.n;
        for seed in 1..4u32 {
            let amps: Vec<C64> = (0..d)
                .map(|i| {
                    let t = (i as f64 + 1.0) * seed as f64;
                    C64::new((t * 0.754_877_666).sin() + 1.5, (t * 1.324_717_957).cos())
                })
                .collect();
            let mut psi = StateVector::from_unnormalized(amps)?;
            let mut ok = true;
            for g in &self.generators {
                let mut gp = psi.clone();
                g.apply_to(&mut gp)?;
                let sum: Vec<C64> = psi.amplitudes().iter().zip(gp.amplitudes()).map(|(a, b)| (a + b) * 0.5).collect();
                let norm: f64 = sum.iter().map(|a| a.norm_sqr()).sum();
                if norm < 1e-12 {
                    ok = false;
                    break;
                }
                psi = StateVector::from_unnormalized(sum)?;
            }
            if ok {
                return Ok(psi);
            }
        }
        Err(Error::Malformed("projection onto the stabilizer space vanished".into()))
    }

    /// Graph state LC-equivalent to this stabilizer state. Hadamards are
    /// placed on the lexicographically first smallest qubit set that makes
    /// the X block invertible; signs and diagonal (S-type) terms are dropped.
    pub fn to_graph(&self) -> Result<GraphExtraction> {
        let n = self.n;
        if n > 20 {
            return Err(Error::QubitBudget(n));
        }
        let xs: Vec<u64> = (0..n).map(|i| self.x_row(i)).collect();
        let zs: Vec<u64> = (0..n).map(|i| self.z_row(i)).collect();
        let x_rank = gf2_rank(&xs.iter().map(|&x| x as u128).collect::<Vec<_>>());
        let mut subsets: Vec<u64> = (0..1u64 << n).filter(|s| s.count_ones() as usize >= n - x_rank).collect();
        subsets.sort_by_key(|s| (s.count_ones(), s.reverse_bits()));
        for h in subsets {
            let swap = |a: u64, b: u64| (a & !h) | (b & h);
            let x2: Vec<u64> = xs.iter().zip(&zs).map(|(&x, &z)| swap(x, z)).collect();
            let Some(inv) = gf2_inverse(&x2) else { continue };
            let z2: Vec<u64> = xs.iter().zip(&zs).map(|(&x, &z)| swap(z, x)).collect();
            let a = gf2_mul(&inv, &z2);
            let mut g = Graph::empty(n);
            for (i, &row) in a.iter().enumerate() {
                g.adj[i] = row & !bit(i);
            }
            debug_assert!(g.is_symmetric());
            return Ok(GraphExtraction { graph: g, hadamards: (0..n).filter(|&q| h & bit(q) != 0).collect() });
        }
        Err(Error::Malformed("no Hadamard set makes the X block invertible".into()))
    }
}

/// Tableau of the circuit applied to `|0…0⟩`.
pub fn tableau_from_circuit(n: usize, circuit: &[Gate]) -> Result<StabilizerTableau> {
    let mut t = StabilizerTableau::zero(n)?;
    for g in circuit {
        t.apply(g)?;
    }
    Ok(t)
}

/// Entanglement in ebits across `cut | rest`, as `rank(G|_cut) - |cut|`.
pub fn stabilizer_entanglement(t: &StabilizerTableau, cut: &[usize]) -> Result<usize> {
    let mut mask = 0u64;
    for &q in cut {
        if q >= t.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: t.n });
        }
        mask |= bit(q);
    }
    let k = mask.count_ones() as usize;
    if k == 0 || k == t.n {
        return Err(Error::TrivialBipartition);
    }
    let m = ((mask as u128) << 64) | mask as u128;
    let rows: Vec<u128> = (0..t.n).map(|i| t.row(i) & m).collect();
    Ok(gf2_rank(&rows) - k)
}

/// Simple undirected graph on at most 64 vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WireGraph", into = "WireGraph")]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct WireGraph {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl From<Graph> for WireGraph {
    fn from(g: Graph) -> Self {
        WireGraph { n: g.n, edges: g.edges().into_iter().map(|(a, b)| [a, b]).collect() }
    }
}

impl TryFrom<WireGraph> for Graph {
    type Error = Error;

    fn try_from(w: WireGraph) -> Result<Graph> {
        Graph::from_edges(w.n, &w.edges.iter().map(|e| (e[0], e[1])).collect::<Vec<_>>())
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { n, adj: vec![0; n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > 64 {
            return Err(Error::QubitBudget(n));
        }
        let mut g = Graph::empty(n);
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(Error::Malformed(format!("self-loop at {a}")));
            }
            g.adj[a] |= bit(b);
            g.adj[b] |= bit(a);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighborhood of `v` as a bit mask.
    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn neighbor_list(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.adj[v] & bit(u) != 0).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] & bit(b) != 0
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|a| (a + 1..self.n).filter(move |&b| self.has_edge(a, b)).map(move |b| (a, b))).collect()
    }

    fn is_symmetric(&self) -> bool {
        (0..self.n).all(|a| self.adj[a] & bit(a) == 0 && (0..self.n).all(|b| self.has_edge(a, b) == self.has_edge(b, a)))
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Complements the subgraph induced on the neighborhood of `v`.
    pub fn local_complement(&self, v: usize) -> Result<Graph> {
        self.check_vertex(v)?;
        let nv = self.adj[v];
        let mut g = self.clone();
        for u in 0..self.n {
            if nv & bit(u) != 0 {
                g.adj[u] ^= nv & !bit(u);
            }
        }
        Ok(g)
    }

    /// Generators `X_v Z_{N(v)}`.
    pub fn tableau(&self) -> Result<StabilizerTableau> {
        let gens = (0..self.n)
            .map(|v| {
                let mut s = PauliString::identity(self.n);
                s.set(v, Pauli::X);
                for u in self.neighbor_list(v) {
                    s.set(u, Pauli::Z);
                }
                s
            })
            .collect();
        StabilizerTableau::from_generators(gens)
    }

    /// `|+⟩^{⊗n}` followed by CZ on every edge.
    pub fn circuit(&self) -> Vec<Gate> {
        (0..self.n).map(Gate::H).chain(self.edges().into_iter().map(|(a, b)| Gate::Cz(a, b))).collect()
    }

    pub fn state(&self) -> Result<StateVector> {
        let mut s = StateVector::zero(self.n)?;
        for g in self.circuit() {
            s.apply_mut(&g)?;
        }
        Ok(s)
    }

    pub fn is_independent(&self, set: &[usize]) -> Result<()> {
        for (i, &a) in set.iter().enumerate() {
            self.check_vertex(a)?;
            for &b in &set[..i] {
                if self.has_edge(a, b) {
                    return Err(Error::NotIndependent(b.min(a), b.max(a)));
                }
            }
        }
        Ok(())
    }

    pub fn is_bipartite(&self) -> bool {
        chromatic_info(self).0 <= 2
    }

    /// Graph with vertex `order[i]` renamed to `i`.
    pub fn relabel(&self, order: &[usize]) -> Graph {
        let mut g = Graph::empty(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.has_edge(order[i], order[j]) {
                    g.adj[i] |= bit(j);
                }
            }
        }
        g
    }

    /// Upper-triangle code of the labeled graph, first pair most significant.
    pub fn code(&self) -> u128 {
        self.code_under(&(0..self.n).collect::<Vec<_>>())
    }

    fn code_under(&self, order: &[usize]) -> u128 {
        let mut code = 0u128;
        for i in 0..self.n {
            for j in i + 1..self.n {
                code = (code << 1) | self.has_edge(order[i], order[j]) as u128;
            }
        }
        code
    }

    /// Isomorphism-invariant labeling: vertices are split into color
    /// refinement cells, then the code is minimized over permutations within
    /// cells.
    pub fn canonical(&self) -> Result<(u128, Graph)> {
        if self.n > MAX_CANON_VERTICES {
            return Err(Error::QubitBudget(self.n));
        }
        let colors = self.refined_colors();
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.n {
            cells.entry(colors[v]).or_default().push(v);
        }
        let cells: Vec<Vec<usize>> = cells.into_values().collect();
        let mut best: Option<(u128, Vec<usize>)> = None;
        let mut order = Vec::with_capacity(self.n);
        self.search_cells(&cells, 0, &mut order, &mut best);
        let (code, order) = best.expect("at least one ordering");
        Ok((code, self.relabel(&order)))
    }

    fn search_cells(&self, cells: &[Vec<usize>], c: usize, order: &mut Vec<usize>, best: &mut Option<(u128, Vec<usize>)>) {
        if c == cells.len() {
            let code = self.code_under(order);
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                *best = Some((code, order.clone()));
            }
            return;
        }
        let mut cell = cells[c].clone();
        permute(&mut cell, 0, &mut |perm| {
            let base = order.len();
            order.extend_from_slice(perm);
            self.search_cells(cells, c + 1, order, best);
            order.truncate(base);
        });
    }

    fn refined_colors(&self) -> Vec<usize> {
        let mut colors: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        for _ in 0..self.n {
            let sigs: Vec<(usize, Vec<usize>)> = (0..self.n)
                .map(|v| {
                    let mut nc: Vec<usize> = self.neighbor_list(v).iter().map(|&u| colors[u]).collect();
                    nc.sort_unstable();
                    (colors[v], nc)
                })
                .collect();
            let mut uniq = sigs.clone();
            uniq.sort();
            uniq.dedup();
            let next: Vec<usize> = sigs.iter().map(|s| uniq.binary_search(s).unwrap()).collect();
            let stable = distinct(&next) == distinct(&colors);
            colors = next;
            if stable {
                break;
            }
        }
        colors
    }
}

fn distinct(v: &[usize]) -> usize {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

/// LC orbit up to isomorphism, as canonical representatives sorted by code.
pub fn lc_orbit(g: &Graph, max_size: usize) -> Result<Vec<Graph>> {
    let (code, start) = g.canonical()?;
    let mut seen: BTreeMap<u128, Graph> = BTreeMap::new();
    seen.insert(code, start.clone());
    let mut queue = VecDeque::from([start]);
    while let Some(h) = queue.pop_front() {
        for v in 0..h.n {
            let (c, canon) = h.local_complement(v)?.canonical()?;
            if !seen.contains_key(&c) {
                if seen.len() >= max_size {
                    return Err(Error::OrbitTooLarge { limit: max_size, found: seen.len() });
                }
                seen.insert(c, canon.clone());
                queue.push_back(canon);
            }
        }
    }
    Ok(seen.into_values().collect())
}

/// Whether `b` is isomorphic to a member of the LC orbit of `a`.
pub fn is_lc_equivalent(a: &Graph, b: &Graph, max_size: usize) -> Result<bool> {
    if a.n != b.n {
        return Ok(false);
    }
    let target = b.canonical()?.0;
    Ok(lc_orbit(a, max_size)?.iter().any(|g| g.code() == target))
}

/// Shortest sequence of local complementations (labeled vertices) reaching
/// a graph that satisfies `goal`.
pub fn find_lc_sequence(
    g: &Graph,
    goal: impl Fn(&Graph) -> bool,
    max_states: usize,
) -> Result<Option<(Vec<usize>, Graph)>> {
    let mut parent: HashMap<u128, (u128, usize)> = HashMap::new();
    let mut graphs: HashMap<u128, Graph> = HashMap::new();
    let root = g.code();
    graphs.insert(root, g.clone());
    let mut queue = VecDeque::from([root]);
    while let Some(c) = queue.pop_front() {
        let h = graphs[&c].clone();
        if goal(&h) {
            let mut seq = Vec::new();
            let mut cur = c;
            while cur != root {
                let (p, v) = parent[&cur];
                seq.push(v);
                cur = p;
            }
            seq.reverse();
            return Ok(Some((seq, h)));
        }
        for v in 0..h.n {
            let next = h.local_complement(v)?;
            let nc = next.code();
            if let std::collections::hash_map::Entry::Vacant(e) = graphs.entry(nc) {
                if parent.len() + 1 >= max_states {
                    return Err(Error::OrbitTooLarge { limit: max_states, found: graphs.len() });
                }
                e.insert(next);
                parent.insert(nc, (c, v));
                queue.push_back(nc);
            }
        }
    }
    Ok(None)
}

/// Chromatic number and one optimal coloring (colors `0..k`).
pub fn chromatic_info(g: &Graph) -> (usize, Vec<usize>) {
    if g.n == 0 {
        return (0, Vec::new());
    }
    for k in 1..=g.n {
        if let Some(c) = color_with(g, k, &[]) {
            return (k, c);
        }
    }
    unreachable!("n colors always suffice")
}

/// Proper `k`-coloring respecting `fixed` `(vertex, color)` assignments.
pub fn color_with(g: &Graph, k: usize, fixed: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut colors = vec![usize::MAX; g.n];
    for &(v, c) in fixed {
        if c >= k {
            return None;
        }
        colors[v] = c;
    }
    for &(v, c) in fixed {
        if g.neighbor_list(v).iter().any(|&u| colors[u] == c) {
            return None;
        }
    }
    let mut order: Vec<usize> = (0..g.n).filter(|&v| colors[v] == usize::MAX).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    if backtrack(g, k, &order, 0, &mut colors) {
        Some(colors)
    } else {
        None
    }
}

fn backtrack(g: &Graph, k: usize, order: &[usize], i: usize, colors: &mut [usize]) -> bool {
    if i == order.len() {
        return true;
    }
    let v = order[i];
    for c in 0..k {
        if g.neighbor_list(v).iter().all(|&u| colors[u] != c) {
            colors[v] = c;
            if backtrack(g, k, order, i + 1, colors) {
                return true;
            }
        }
    }
    colors[v] = usize::MAX;
    false
}

/// A `k`-coloring in which color `k-1` is used by exactly one vertex drawn
/// from `allowed`; remaining vertices use colors `0..k-1`.
pub fn coloring_with_singleton(g: &Graph, k: usize, allowed: &[usize]) -> Option<Vec<usize>> {
    if k == 0 {
        return None;
    }
    for &v in allowed {
        let mut h = g.clone();
        let nv = h.adj[v];
        for u in 0..g.n {
            if nv & bit(u) != 0 {
                h.adj[u] &= !bit(v);
            }
        }
        h.adj[v] = 0;
        // v is isolated in h, so any colour is free for it
        if let Some(mut c) = color_with(&h, k - 1, &[(v, 0)]) {
            c[v] = k - 1;
            return Some(c);
        }
    }
    None
}

/// Color classes of a coloring, ordered by color.
pub fn color_classes(coloring: &[usize]) -> Vec<Vec<usize>> {
    let k = coloring.iter().copied().max().map_or(0, |m| m + 1);
    let mut classes = vec![Vec::new(); k];
    for (v, &c) in coloring.iter().enumerate() {
        classes[c].push(v);
    }
    classes
}

/// Edges of the eight-qubit resource `|Φ_3⟩` (vertices numbered from 1).
pub const REP8_EDGES: [(usize, usize); 11] =
    [(1, 2), (2, 3), (3, 7), (2, 4), (2, 5), (2, 7), (4, 6), (4, 8), (5, 8), (6, 7), (7, 8)];

/// Transmitted (receiver) qubits of `rep8`, 0-based.
pub const REP8_TRANSMITTED: [usize; 3] = [5, 6, 7];
/// Transmitted qubits of `mes6`, 0-based.
pub const MES6_TRANSMITTED: [usize; 3] = [3, 4, 5];

pub fn rep8() -> Graph {
    let edges: Vec<(usize, usize)> = REP8_EDGES.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    Graph::from_edges(8, &edges).expect("valid built-in graph")
}

/// Full `|Φ_3⟩` preparation from `|0⟩^{⊗8}`: graph state followed by the
/// local Cliffords `Z_2(π/4)`, `Z_7(-π/4)`, `H_8`, `Z_8(π/4)`, `H_6`.
pub fn rep8_circuit() -> Vec<Gate> {
    use std::f64::consts::FRAC_PI_4;
    let mut c = rep8().circuit();
    c.extend([
        Gate::phase(&[1], FRAC_PI_4),
        Gate::phase(&[6], -FRAC_PI_4),
        Gate::H(7),
        Gate::phase(&[7], FRAC_PI_4),
        Gate::H(5),
    ]);
    c
}

/// Graph of the six-qubit resource compiled from the frozen-angle circuit.
pub fn mes6() -> Graph {
    let cp = crate::compiler::compile(&crate::canonical_form::mes_circuit()).expect("built-in circuit compiles");
    tableau_from_circuit(cp.qubits, &cp.full_circuit())
        .and_then(|t| t.to_graph())
        .expect("resource is a stabilizer state")
        .graph
}

/// Built-in graph by id.
pub fn builtin(id: &str) -> Option<(Graph, Vec<usize>)> {
    match id {
        "rep8" => Some((rep8(), REP8_TRANSMITTED.to_vec())),
        "mes6" => Some((mes6(), MES6_TRANSMITTED.to_vec())),
        _ => None,
    }
}

#[cfg(test)]
mod tests;
