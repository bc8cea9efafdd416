use proptest::prelude::*;
use torus_spine::cheeger::{boundary, BoundaryKind};
use torus_spine::spectral::{constants, rayleigh_quotient, TensorProfile};
use torus_spine::{Power, TorusGraphSpec, TorusVertex, VertexSet};

fn small_specs(max_vertices: usize) -> Vec<TorusGraphSpec> {
    let mut out = Vec::new();
    for power in [Power::One, Power::Inf] {
        for d in 1..=6u32 {
            for m in 3..=12usize {
                if m.pow(d) <= max_vertices {
                    out.push(TorusGraphSpec::new(m, d as usize, power).unwrap());
                }
            }
        }
    }
    out
}

#[test]
fn adjacency_is_symmetric_exhaustively() {
    let mut buf = Vec::new();
    for spec in small_specs(10_000) {
        for u in 0..spec.vertex_count() {
            spec.neighbor_indices(u, &mut buf);
            assert_eq!(buf.len(), spec.degree());
            for &v in &buf {
                assert_ne!(u, v);
                assert!(spec.is_edge(v, u), "{u} -> {v} in {spec:?}");
            }
        }
    }
}

#[test]
fn edge_counts_match_degree() {
    for spec in small_specs(5_000) {
        let mut count = 0;
        spec.for_each_edge(|u, v| {
            assert!(u < v);
            count += 1;
        });
        assert_eq!(count, spec.edge_count());
        assert_eq!(2 * count, spec.vertex_count() * spec.degree());
    }
}

fn spec_strategy() -> impl Strategy<Value = TorusGraphSpec> {
    (3usize..8, 1usize..4, prop::bool::ANY).prop_map(|(m, d, inf)| {
        let power = if inf { Power::Inf } else { Power::One };
        TorusGraphSpec::new(m, d, power).unwrap()
    })
}

proptest! {
    #[test]
    fn closed_walks_have_displacement_divisible_by_m(
        spec in spec_strategy(),
        start in any::<prop::sample::Index>(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 0..60),
    ) {
        let mut buf = Vec::new();
        let first = start.index(spec.vertex_count());
        let mut walk = vec![first];
        for p in &picks {
            spec.neighbor_indices(*walk.last().unwrap(), &mut buf);
            walk.push(buf[p.index(buf.len())]);
        }
        // close the walk with +1 unit steps along each axis
        let target = spec.vertex(first);
        for axis in 0..spec.d() {
            while spec.coord(*walk.last().unwrap(), axis) != target.0[axis] {
                let mut shift = vec![0; spec.d()];
                shift[axis] = 1;
                let next = spec.translate(*walk.last().unwrap(), &shift);
                walk.push(next);
            }
        }
        prop_assert_eq!(*walk.last().unwrap(), first);
        let mut total = vec![0i64; spec.d()];
        for pair in walk.windows(2) {
            let disp = spec.displacement(&spec.vertex(pair[0]), &spec.vertex(pair[1])).unwrap();
            for (t, s) in total.iter_mut().zip(&disp.0) {
                *t += *s as i64;
            }
        }
        for t in total {
            prop_assert_eq!(t.rem_euclid(spec.m() as i64), 0);
        }
    }

    #[test]
    fn boundaries_are_shift_invariant(
        spec in spec_strategy(),
        bits in prop::collection::vec(any::<bool>(), 343),
        shift in prop::collection::vec(0usize..8, 3),
    ) {
        let n = spec.vertex_count();
        let body = VertexSet::from_fn(n, |v| bits[v]);
        let v = TorusVertex(shift[..spec.d()].iter().map(|s| s % spec.m()).collect());
        let moved = spec.shift_set(&body, &v).unwrap();
        prop_assert_eq!(moved.len(), body.len());
        for kind in [BoundaryKind::Edge, BoundaryKind::Vertex] {
            prop_assert_eq!(
                boundary(&spec, &body, kind).unwrap(),
                boundary(&spec, &moved, kind).unwrap()
            );
        }
    }
}

#[test]
fn tensor_profile_rayleigh_matches_closed_forms() {
    for d in 1..=4u32 {
        for m in 3..=20usize {
            if m.pow(d) > 100_000 {
                continue;
            }
            let k = constants(m, d as usize).unwrap();
            let profile = TensorProfile::new(m, d as usize).unwrap();
            let inf = TorusGraphSpec::new(m, d as usize, Power::Inf).unwrap();
            let one = TorusGraphSpec::new(m, d as usize, Power::One).unwrap();
            // independent closed forms
            let three_d = 3f64.powi(d as i32);
            let lam = 2.0 * (std::f64::consts::PI / m as f64).cos();
            let r_inf = three_d - (1.0 + lam).powi(d as i32);
            let r_one = 4.0 * d as f64 * (std::f64::consts::PI / (2.0 * m as f64)).sin().powi(2);
            let q_inf = rayleigh_quotient(&inf, &profile).unwrap();
            let q_one = rayleigh_quotient(&one, &profile).unwrap();
            assert!(
                (q_inf - r_inf).abs() < 1e-9,
                "inf m={m} d={d}: {q_inf} vs {r_inf}"
            );
            assert!(
                (q_one - r_one).abs() < 1e-9,
                "one m={m} d={d}: {q_one} vs {r_one}"
            );
            assert!((k.rayleigh_inf - r_inf).abs() < 1e-9);
            assert!((k.rayleigh_one - r_one).abs() < 1e-9);
        }
    }
}

#[test]
fn tensor_profile_vanishes_exactly_on_zero_labels() {
    for d in 1..=3u32 {
        for m in 3..=9usize {
            let spec = TorusGraphSpec::new(m, d as usize, Power::One).unwrap();
            let profile = TensorProfile::for_spec(&spec);
            let zero = spec.zero_label_set();
            assert_eq!(zero.len(), m.pow(d) - (m - 1).pow(d));
            for v in 0..spec.vertex_count() {
                assert_eq!(profile.value_at_index(v) == 0.0, zero.contains(v));
                assert!(profile.value_at_index(v) >= 0.0);
            }
        }
    }
}
