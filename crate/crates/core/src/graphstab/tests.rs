use super::*;
use crate::canonical_form::cf_circuit;
use crate::compiler::{compile, resource_state};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_4;

fn state_of(n: usize, circuit: &[Gate]) -> StateVector {
    let mut s = StateVector::zero(n).unwrap();
    for g in circuit {
        s.apply_mut(g).unwrap();
    }
    s
}

fn random_clifford(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<Gate> {
    (0..len)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n);
            while n > 1 && b == a {
                b = rng.random_range(0..n);
            }
            match rng.random_range(0..5) {
                0 => Gate::H(a),
                1 => Gate::phase(&[a], FRAC_PI_4 * rng.random_range(-3..=3) as f64),
                2 if n > 1 => Gate::Cnot { control: a, target: b },
                3 if n > 1 => Gate::phase(&[a, b], FRAC_PI_4),
                _ => Gate::XQuarter { qubit: a, positive: rng.random_bool(0.5) },
            }
        })
        .collect()
}

fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
}

#[test]
fn gf2_inverse_round_trip() {
    let m = vec![0b011, 0b110, 0b001];
    let inv = gf2_inverse(&m).unwrap();
    let id = gf2_mul(&m, &inv);
    assert_eq!(id, vec![0b001, 0b010, 0b100]);
    assert!(gf2_inverse(&[0b11, 0b11]).is_none());
    assert_eq!(gf2_rank(&[0b11, 0b11, 0b01]), 2);
}

#[test]
fn single_edge_graph_state() {
    let c = vec![Gate::H(0), Gate::H(1), Gate::Cz(0, 1)];
    let t = tableau_from_circuit(2, &c).unwrap();
    let ex = t.to_graph().unwrap();
    assert_eq!(ex.graph.edges(), vec![(0, 1)]);
    assert!(ex.hadamards.is_empty());
    assert!((t.to_state().unwrap().fidelity(&state_of(2, &c)) - 1.0).abs() < 1e-9);
}

#[test]
fn tableau_matches_statevector_on_random_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..60 {
        let n = rng.random_range(1..=6);
        let c = random_clifford(&mut rng, n, 30);
        let t = tableau_from_circuit(n, &c).unwrap();
        let s = state_of(n, &c);
        assert!(t.to_state().unwrap().fidelity(&s) >= 1.0 - 1e-9);
        // the extracted graph state is reachable with local gates, so cut
        // entanglement agrees
        let g = t.to_graph().unwrap().graph;
        let gs = g.state().unwrap();
        for q in 0..n.saturating_sub(1) {
            let cut: Vec<usize> = (0..=q).collect();
            let e = stabilizer_entanglement(&t, &cut).unwrap() as f64;
            assert!((e - s.entanglement_entropy(&cut).unwrap()).abs() < 1e-9);
            assert!((e - gs.entanglement_entropy(&cut).unwrap()).abs() < 1e-9);
            let rest: Vec<usize> = (q + 1..n).collect();
            assert_eq!(stabilizer_entanglement(&t, &rest).unwrap() as f64, e);
        }
    }
}

#[test]
fn ghz_entanglement() {
    let c = vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }, Gate::Cnot { control: 0, target: 2 }];
    let t = tableau_from_circuit(3, &c).unwrap();
    assert_eq!(stabilizer_entanglement(&t, &[0]).unwrap(), 1);
    assert_eq!(stabilizer_entanglement(&t, &[]).unwrap_err(), Error::TrivialBipartition);
    assert!(stabilizer_entanglement(&t, &[0, 1, 2]).is_err());
}

#[test]
fn rep8_circuit_tableau() {
    let c = rep8_circuit();
    let t = tableau_from_circuit(8, &c).unwrap();
    let s = state_of(8, &c);
    assert!(t.to_state().unwrap().fidelity(&s) >= 1.0 - 1e-9);
    assert_eq!(stabilizer_entanglement(&t, &[0, 1, 2, 3, 4]).unwrap(), 3);
    assert!((s.entanglement_entropy(&[5, 6, 7]).unwrap() - 3.0).abs() < 1e-9);
    let g = t.to_graph().unwrap().graph;
    assert!(is_lc_equivalent(&g, &rep8(), 10_000).unwrap());
}

#[test]
fn compiled_resource_is_lc_equivalent_to_rep8() {
    let cp = compile(&cf_circuit(3).unwrap()).unwrap();
    let t = tableau_from_circuit(cp.qubits, &cp.full_circuit()).unwrap();
    assert!(t.to_state().unwrap().fidelity(&resource_state(&cp).unwrap()) >= 1.0 - 1e-9);
    let g = t.to_graph().unwrap().graph;
    assert!(is_lc_equivalent(&g, &rep8(), 10_000).unwrap());
}

#[test]
fn n2_resource_is_ghz_class() {
    let cp = compile(&cf_circuit(2).unwrap()).unwrap();
    let g = tableau_from_circuit(3, &cp.full_circuit()).unwrap().to_graph().unwrap().graph;
    let star = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
    assert!(is_lc_equivalent(&g, &star, 100).unwrap());
}

#[test]
fn local_complement_basics() {
    let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let lc = tri.local_complement(0).unwrap();
    assert_eq!(lc.edges(), vec![(0, 1), (0, 2)]);
    assert_eq!(lc.local_complement(0).unwrap(), tri);
    assert!(tri.local_complement(3).is_err());
    let k2 = Graph::from_edges(2, &[(0, 1)]).unwrap();
    assert_eq!(lc_orbit(&k2, 10).unwrap().len(), 1);
    assert!(is_lc_equivalent(&tri, &lc, 10).unwrap());
    assert!(is_lc_equivalent(&tri, &tri, 10).unwrap());
    assert!(!is_lc_equivalent(&tri, &Graph::empty(3), 10).unwrap());
}

#[test]
fn orbit_is_lc_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..15 {
        let n = rng.random_range(3..=6);
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.random_bool(0.5)).collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        let v = rng.random_range(0..n);
        assert_eq!(lc_orbit(&g, 100_000).unwrap(), lc_orbit(&g.local_complement(v).unwrap(), 100_000).unwrap());
    }
}

#[test]
fn canonical_labeling_is_isomorphism_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.random_range(2..=8);
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.random_bool(0.4)).collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        assert_eq!(g.canonical().unwrap().0, g.relabel(&perm).canonical().unwrap().0);
    }
    // same degree sequence, not isomorphic
    let c6 = cycle(6);
    let two_triangles = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
    assert_ne!(c6.canonical().unwrap().0, two_triangles.canonical().unwrap().0);
}

#[test]
fn orbit_limit_reported() {
    assert!(matches!(lc_orbit(&rep8(), 2), Err(Error::OrbitTooLarge { limit: 2, .. })));
}

#[test]
fn chromatic_numbers() {
    assert_eq!(chromatic_info(&cycle(6)).0, 2);
    assert_eq!(chromatic_info(&cycle(5)).0, 3);
    assert_eq!(chromatic_info(&Graph::empty(4)).0, 1);
    let (k, c) = chromatic_info(&rep8());
    assert_eq!(k, 3);
    for (a, b) in rep8().edges() {
        assert_ne!(c[a], c[b]);
    }
}

#[test]
fn rep8_singleton_third_color_off_receivers() {
    let g = rep8();
    let c = coloring_with_singleton(&g, 3, &[0, 1, 2, 3, 4]).unwrap();
    let classes = color_classes(&c);
    assert_eq!(classes[2].len(), 1);
    assert!(classes[2][0] < 5);
    for (a, b) in g.edges() {
        assert_ne!(c[a], c[b]);
    }
    assert!(coloring_with_singleton(&g, 2, &[0, 1, 2, 3, 4]).is_none());
}

#[test]
fn bipartite_members_of_orbits() {
    assert!(!lc_orbit(&rep8(), 100_000).unwrap().iter().any(Graph::is_bipartite));
    assert!(lc_orbit(&mes6(), 100_000).unwrap().iter().any(Graph::is_bipartite));
    let (seq, h) = find_lc_sequence(&mes6(), Graph::is_bipartite, 1 << 20).unwrap().unwrap();
    let mut g = mes6();
    for v in seq {
        g = g.local_complement(v).unwrap();
    }
    assert_eq!(g, h);
    assert!(h.is_bipartite());
}

#[test]
fn mes6_entanglement() {
    let g = mes6();
    let t = g.tableau().unwrap();
    assert_eq!(stabilizer_entanglement(&t, &MES6_TRANSMITTED).unwrap(), 2);
}

#[test]
fn independence_check() {
    let g = cycle(4);
    assert!(g.is_independent(&[0, 2]).is_ok());
    assert_eq!(g.is_independent(&[0, 1]), Err(Error::NotIndependent(0, 1)));
}

#[test]
fn graph_json() {
    let g = rep8();
    let text = serde_json::to_string(&g).unwrap();
    assert!(text.starts_with(r#"{"n":8,"edges":[[0,1],"#));
    assert_eq!(serde_json::from_str::<Graph>(&text).unwrap(), g);
    assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[0,2]]}"#).is_err());
    assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[1,1]]}"#).is_err());
}

#[test]
fn tableau_validation() {
    let bad = vec!["+XI".parse().unwrap(), "+ZI".parse().unwrap()];
    assert!(StabilizerTableau::from_generators(bad).is_err());
    let dep = vec!["+ZI".parse().unwrap(), "+ZI".parse().unwrap()];
    assert!(StabilizerTableau::from_generators(dep).is_err());
    assert!(tableau_from_circuit(1, &[Gate::phase(&[0], 0.1)]).is_err());
}
