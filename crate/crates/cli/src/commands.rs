use std::f64::consts::PI;
use std::path::Path;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use torus_spine::cheeger::{ratio_within, sweep, vertex_fraction, CutCertificate};
use torus_spine::continuous::{best_ratio_scan, estimate_spine_area, kappa, MCConfig};
use torus_spine::flow_cert::{
    build_network, certified_c, extract_orientation, max_flow, verify_inequalities, SimpleGraph,
};
use torus_spine::spectral::{check_path_eigen, constants, TensorProfile};
use torus_spine::spine::{
    build_edge_spine, build_vertex_spine, monte_carlo, trivial_edge_spine, trivial_vertex_spine,
    RunStats, PRNG,
};
use torus_spine::verify::{
    brute_force_min_spine_with, disjoint_cycle_lower_bound, induced_nontrivial_cycle, is_spine,
    BruteForceOptions, SpineCandidate,
};
use torus_spine::{
    BoundaryKind, EdgeSet, Power, SpineKind, TorusGraphSpec, TorusVertex, VertexSet,
};

use crate::args::*;
use crate::report::{BoundCheck, Table};
use crate::CliError;

pub struct Outcome {
    pub config: Value,
    pub results: Value,
    pub bounds: Vec<BoundCheck>,
    /// CSV rows, for subcommands that have a table.
    pub table: Option<Table>,
}

fn ratio_json(r: num_rational::Ratio<u64>) -> Value {
    json!({
        "exact": format!("{}/{}", r.numer(), r.denom()),
        "value": *r.numer() as f64 / *r.denom() as f64,
    })
}

fn rational_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn coords(spec: &TorusGraphSpec, v: usize) -> Vec<usize> {
    spec.vertex(v).0
}

fn certificate_json(spec: &TorusGraphSpec, cert: &CutCertificate) -> Value {
    json!({
        "kind": cert.kind.name(),
        "size": cert.body.len(),
        "boundary": cert.boundary_size,
        "ratio": ratio_json(cert.ratio),
        "compared_value": ratio_json(cert.compared_value()),
        "threshold": cert.threshold,
        "rayleigh": cert.rayleigh,
        "bound": cert.bound,
        "body_cycle_free": induced_nontrivial_cycle(spec, &cert.body).is_none(),
    })
}

fn stats_json(stats: &RunStats) -> Value {
    json!({
        "runs": stats.runs,
        "base_seed": stats.base_seed,
        "mean_size": stats.mean_size,
        "stderr": stats.stderr,
        "mean_contribution_sum": stats.mean_contribution_sum,
        "contribution_stderr": stats.contribution_stderr,
        "mean_shifts": stats.mean_shifts,
        "per_run_sizes": stats.per_run_sizes,
        "per_run_contribution_sums": stats.per_run_contribution_sums,
        "per_run_shifts": stats.per_run_shifts,
    })
}

fn runs_table(stats: &RunStats) -> Table {
    Table {
        header: ["run", "seed", "size", "contribution_sum", "shifts"]
            .map(String::from)
            .to_vec(),
        rows: (0..stats.runs)
            .map(|i| {
                vec![
                    i.to_string(),
                    stats.base_seed.wrapping_add(i as u64).to_string(),
                    stats.per_run_sizes[i].to_string(),
                    stats.per_run_contribution_sums[i].to_string(),
                    stats.per_run_shifts[i].to_string(),
                ]
            })
            .collect(),
    }
}

pub fn constants_cmd(a: &ConstantsArgs) -> Result<Outcome, CliError> {
    let (m, d) = (a.torus.m, a.torus.d);
    let k = constants(m, d)?;
    let residual = check_path_eigen(m)?;
    Ok(Outcome {
        config: json!({ "m": m, "d": d }),
        results: json!({
            "m": m,
            "d": d,
            "lambda": k.lambda,
            "tensor_eigenvalue": k.tensor_eigenvalue,
            "rayleigh_inf": k.rayleigh_inf,
            "rayleigh_one": k.rayleigh_one,
            "mu": k.mu,
            "mu_sum_power": k.mu_sum_power(),
            "fraction": k.edge_fraction,
            "path_eigen_residual": residual,
        }),
        bounds: vec![BoundCheck::le(
            "path-eigenvector-residual",
            Some(m),
            d,
            residual,
            1e-10,
        )],
        table: None,
    })
}

pub fn sweep_cmd(a: &SweepArgs) -> Result<Outcome, CliError> {
    let (m, d) = (a.torus.m, a.torus.d);
    let spec = TorusGraphSpec::new(m, d, a.power.into())?;
    let kind: BoundaryKind = a.kind.into();
    let s = sweep(&spec, &TensorProfile::for_spec(&spec), kind)?;
    let cert = &s.best;
    let compared = cert.compared_value();
    let source = match (kind, spec.power()) {
        (BoundaryKind::Edge, Power::Inf) => "level-set-edge-ratio-vs-mu",
        (BoundaryKind::Edge, Power::One) => "level-set-edge-ratio-vs-sqrt-4dR",
        (BoundaryKind::Vertex, _) => "level-set-vertex-fraction-vs-2sqrtR",
    };
    let mut bound = BoundCheck::le(source, Some(m), d, rational_u64(compared), cert.bound)
        .with_pass(ratio_within(compared, cert.bound));
    if kind == BoundaryKind::Vertex {
        // the level-set family is not guaranteed to reach this bound
        bound = bound.recorded_only();
    }
    let cycle_free = induced_nontrivial_cycle(&spec, &cert.body).is_none();
    let bounds = vec![
        bound,
        BoundCheck::eq(
            "certificate-body-cycle-free",
            Some(m),
            d,
            cycle_free as u8 as f64,
            1.0,
        ),
    ];
    let table = Table {
        header: ["threshold", "size", "boundary", "ratio_exact", "ratio"]
            .map(String::from)
            .to_vec(),
        rows: s
            .table
            .iter()
            .map(|r| {
                vec![
                    format!("{:e}", r.threshold),
                    r.size.to_string(),
                    r.boundary.to_string(),
                    format!("{}/{}", r.ratio.numer(), r.ratio.denom()),
                    rational_u64(r.ratio).to_string(),
                ]
            })
            .collect(),
    };
    Ok(Outcome {
        config: json!({ "m": m, "d": d, "power": spec.power().name(), "kind": kind.name() }),
        results: json!({
            "certificate": certificate_json(&spec, cert),
            "levels": s.table.len(),
            "table": s.table.iter().map(|r| json!({
                "threshold": r.threshold,
                "size": r.size,
                "boundary": r.boundary,
                "ratio": ratio_json(r.ratio),
            })).collect::<Vec<_>>(),
        }),
        bounds,
        table: Some(table),
    })
}

fn rational_u64(r: num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn spine_edge_cmd(a: &SpineArgs) -> Result<Outcome, CliError> {
    let (m, d) = (a.torus.m, a.torus.d);
    let spec = TorusGraphSpec::new(m, d, Power::Inf)?;
    let k = constants(m, d)?;
    let cert = sweep(&spec, &TensorProfile::for_spec(&spec), BoundaryKind::Edge)?.best;
    let n = spec.vertex_count() as f64;
    let edges = spec.edge_count() as f64;
    let sum_bound = rational_u64(cert.ratio) * n;
    let stats = monte_carlo(&spec, a.runs, a.seed, sum_bound, a.jobs, |seed| {
        build_edge_spine(&spec, &cert.body, seed)
    })?;
    let fraction = stats.mean_size / edges;
    let bounds = vec![
        BoundCheck::eq(
            "every-run-is-spine",
            Some(m),
            d,
            stats.runs as f64,
            a.runs as f64,
        ),
        BoundCheck::le(
            "shift-sum-vs-certificate-ratio",
            Some(m),
            d,
            stats.mean_contribution_sum,
            sum_bound + 3.0 * stats.contribution_stderr,
        ),
        BoundCheck::le(
            "edge-spine-fraction-vs-2mu",
            Some(m),
            d,
            fraction,
            k.edge_fraction + 3.0 * stats.stderr / edges,
        ),
    ];
    Ok(Outcome {
        config: json!({
            "m": m, "d": d, "power": "inf", "seed": a.seed, "runs": a.runs, "jobs": a.jobs,
        }),
        results: json!({
            "certificate": certificate_json(&spec, &cert),
            "edge_count": spec.edge_count(),
            "mean_fraction": fraction,
            "fraction_bound": k.edge_fraction,
            "stats": stats_json(&stats),
        }),
        bounds,
        table: Some(runs_table(&stats)),
    })
}

pub fn spine_vertex_cmd(a: &SpineArgs) -> Result<Outcome, CliError> {
    let (m, d) = (a.torus.m, a.torus.d);
    let spec = TorusGraphSpec::new(m, d, Power::One)?;
    let cert = sweep(&spec, &TensorProfile::for_spec(&spec), BoundaryKind::Vertex)?.best;
    let n = spec.vertex_count() as f64;
    let expected = rational_u64(vertex_fraction(cert.ratio)) * n;
    let headline = 2.0 * PI * (d as f64).sqrt() * (m as f64).powi(d as i32 - 1);
    let stats = monte_carlo(&spec, a.runs, a.seed, expected, a.jobs, |seed| {
        build_vertex_spine(&spec, &cert.body, seed)
    })?;
    let tol = 3.0 * stats.stderr;
    let bounds = vec![
        BoundCheck::eq(
            "every-run-is-spine",
            Some(m),
            d,
            stats.runs as f64,
            a.runs as f64,
        ),
        BoundCheck::eq(
            "vertex-spine-mean-vs-fraction",
            Some(m),
            d,
            stats.mean_size,
            expected,
        )
        .with_pass((stats.mean_size - expected).abs() <= tol + 1e-9 * expected),
        BoundCheck::le(
            "vertex-spine-mean-vs-2pi-sqrt-d",
            Some(m),
            d,
            stats.mean_size,
            headline + tol,
        ),
    ];
    Ok(Outcome {
        config: json!({
            "m": m, "d": d, "power": "one", "seed": a.seed, "runs": a.runs, "jobs": a.jobs,
        }),
        results: json!({
            "certificate": certificate_json(&spec, &cert),
            "expected_mean": expected,
            "headline_bound": headline,
            "stats": stats_json(&stats),
        }),
        bounds,
        table: Some(runs_table(&stats)),
    })
}

fn parse_vertex(spec: &TorusGraphSpec, text: &str, lineno: usize) -> Result<usize, CliError> {
    let coords: Result<Vec<usize>, _> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect();
    let coords =
        coords.map_err(|e| CliError::Usage(format!("line {lineno}: bad coordinate ({e})")))?;
    Ok(spec.index_of(&TorusVertex(coords))?)
}

fn read_lines(path: &str) -> Result<Vec<(usize, String)>, CliError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect())
}

pub fn verify_cmd(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let (m, d) = (a.torus.m, a.torus.d);
    let spec = TorusGraphSpec::new(m, d, a.power.into())?;
    let (kind, source, size, check) = if let Some(src) = &a.vertex_spine {
        let set = if src == "trivial" {
            trivial_vertex_spine(&spec)?.vertices
        } else {
            let mut set = VertexSet::new(spec.vertex_count());
            for (lineno, line) in read_lines(src)? {
                set.insert(parse_vertex(&spec, &line, lineno)?);
            }
            set
        };
        let check = is_spine(&spec, SpineCandidate::Vertices(&set));
        (SpineKind::Vertex, src.clone(), set.len(), check)
    } else {
        let src = a
            .edge_spine
            .as_ref()
            .expect("clap requires one spine source");
        let set = if src == "trivial" {
            trivial_edge_spine(&spec)?.edges
        } else {
            let mut set = EdgeSet::new();
            for (lineno, line) in read_lines(src)? {
                let (u, v) = line.split_once(';').ok_or_else(|| {
                    CliError::Usage(format!("line {lineno}: expected `u coords ; v coords`"))
                })?;
                let (u, v) = (
                    parse_vertex(&spec, u, lineno)?,
                    parse_vertex(&spec, v, lineno)?,
                );
                if !spec.is_edge(u, v) {
                    return Err(torus_spine::Error::NotAnEdge { u, v }.into());
                }
                set.insert(u, v);
            }
            set
        };
        let check = is_spine(&spec, SpineCandidate::Edges(&set));
        (SpineKind::Edge, src.clone(), set.len(), check)
    };
    let lower = disjoint_cycle_lower_bound(&spec, kind);
    let witness = check.witness.as_ref().map(|w| {
        json!({
            "cycle": w.cycle.iter().map(|&v| coords(&spec, v)).collect::<Vec<_>>(),
            "winding": w.winding,
        })
    });
    let mut bounds = vec![BoundCheck::eq(
        "meets-every-nontrivial-cycle",
        Some(m),
        d,
        check.is_spine as u8 as f64,
        1.0,
    )];
    if check.is_spine {
        bounds.push(BoundCheck::ge(
            "size-vs-disjoint-cycle-count",
            Some(m),
            d,
            size as f64,
            lower as f64,
        ));
    }
    Ok(Outcome {
        config: json!({
            "m": m, "d": d, "power": spec.power().name(), "kind": kind.name(), "spine": source,
        }),
        results: json!({
            "is_spine": check.is_spine,
            "size": size,
            "disjoint_cycle_lower_bound": lower,
            "witness": witness,
        }),
        bounds,
        table: None,
    })
}

pub fn brute_min_cmd(a: &BruteMinArgs) -> Result<Outcome, CliError> {
    let (m, d) = (a.torus.m, a.torus.d);
    let spec = TorusGraphSpec::new(m, d, a.power.into())?;
    let kind: SpineKind = a.kind.into();
    let opts = BruteForceOptions {
        prune_lower_bound: !a.no_prune,
        ..Default::default()
    };
    let r = brute_force_min_spine_with(&spec, kind, opts)?;
    let lower = disjoint_cycle_lower_bound(&spec, kind);
    let mut bounds = vec![BoundCheck::ge(
        "minimum-vs-disjoint-cycle-count",
        Some(m),
        d,
        r.size as f64,
        lower as f64,
    )];
    let exact = match (spec.power(), kind) {
        (Power::One, SpineKind::Edge) => Some(("exact-minimum-edge-spine", lower)),
        (Power::Inf, SpineKind::Vertex) => Some((
            "exact-minimum-vertex-spine",
            m.pow(d as u32) - (m - 1).pow(d as u32),
        )),
        _ => None,
    };
    if let Some((source, value)) = exact {
        bounds.push(BoundCheck::eq(
            source,
            Some(m),
            d,
            r.size as f64,
            value as f64,
        ));
    }
    let example: Vec<Value> = r
        .example
        .iter()
        .map(|&(u, v)| match kind {
            SpineKind::Edge => json!([coords(&spec, u), coords(&spec, v)]),
            SpineKind::Vertex => json!(coords(&spec, u)),
        })
        .collect();
    Ok(Outcome {
        config: json!({
            "m": m, "d": d, "power": spec.power().name(), "kind": kind.name(),
            "prune_lower_bound": opts.prune_lower_bound,
        }),
        results: json!({
            "size": r.size,
            "example": example,
            "candidates_checked": r.candidates_checked.to_string(),
        }),
        bounds,
        table: None,
    })
}

fn flow_instance(a: &FlowCertArgs) -> Result<(String, SimpleGraph, VertexSet), CliError> {
    Ok(match a.graph {
        GraphArg::Torus => {
            let spec = TorusGraphSpec::new(a.m, a.d, a.power.into())?;
            (
                format!("torus m={} d={} {}", a.m, a.d, spec.power().name()),
                SimpleGraph::from_torus(&spec),
                spec.zero_label_set(),
            )
        }
        GraphArg::TwoVertex => (
            "two-vertex".into(),
            SimpleGraph::from_edges(2, &[(0, 1)])?,
            VertexSet::from_indices(2, [1])?,
        ),
        GraphArg::Star => (
            "star".into(),
            SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)])?,
            VertexSet::from_indices(4, [1, 2, 3])?,
        ),
    })
}

pub fn flow_cert_cmd(a: &FlowCertArgs) -> Result<Outcome, CliError> {
    let (name, graph, u) = flow_instance(a)?;
    let c_star = certified_c(&graph, &u)?;
    let c = match &a.c {
        Some(text) => text
            .parse::<Rational64>()
            .map_err(|e| CliError::Usage(format!("--c must be a rational p/q: {e}")))?,
        None => c_star,
    };
    if c < Rational64::from_integer(0) {
        return Err(torus_spine::Error::NegativeExpansion.into());
    }
    let net = build_network(&graph, &u, c)?;
    let flow = max_flow(&net);
    let saturated = flow.value == net.saturating_value();
    let (m, d) = match a.graph {
        GraphArg::Torus => (Some(a.m), a.d),
        _ => (None, 0),
    };
    let mut bounds = vec![BoundCheck::eq(
        "flow-saturates-iff-c-at-most-certified",
        m,
        d,
        rational_f64(flow.value),
        rational_f64(net.saturating_value()),
    )
    .with_pass(saturated == (c <= c_star))];
    let mut orientation = Value::Null;
    let mut inequalities = Value::Null;
    if saturated {
        let h = extract_orientation(&net, &flow)?;
        bounds.push(BoundCheck::eq(
            "orientation-invariants",
            m,
            d,
            h.checks.all() as u8 as f64,
            1.0,
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let n = graph.vertex_count();
        let cf = rational_f64(c);
        let floor = cf * cf / (4.0 + 2.0 * cf * cf);
        let (mut passed, mut min_quotient) = (0usize, f64::INFINITY);
        for _ in 0..a.samples {
            let x: Vec<f64> = (0..n)
                .map(|v| {
                    if u.contains(v) {
                        0.0
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                })
                .collect();
            let norm: f64 = x.iter().map(|v| v * v).sum();
            if verify_inequalities(&graph, &u, c, &h, &x)?.pass {
                passed += 1;
            }
            if norm > 0.0 {
                min_quotient = min_quotient.min(graph.laplacian_form(&x) / norm);
            }
        }
        bounds.push(BoundCheck::eq(
            "orientation-inequalities",
            m,
            d,
            passed as f64,
            a.samples as f64,
        ));
        if a.samples > 0 {
            bounds.push(
                BoundCheck::ge("rayleigh-vs-c2-over-4-plus-2c2", m, d, min_quotient, floor)
                    .with_pass(min_quotient >= floor * (1.0 - 1e-12)),
            );
        }
        orientation = json!({
            "checks": {
                "out_bounded": h.checks.out_bounded,
                "in_bounded": h.checks.in_bounded,
                "net_outflow": h.checks.net_outflow,
                "single_direction": h.checks.single_direction,
                "unit_interval": h.checks.unit_interval,
            },
            "edges": h.edges.iter().map(|e| json!({
                "from": e.from, "to": e.to, "h": e.h.to_string(),
            })).collect::<Vec<_>>(),
        });
        inequalities = json!({
            "vectors": a.samples,
            "passed": passed,
            "min_rayleigh": if a.samples > 0 { json!(min_quotient) } else { Value::Null },
            "rayleigh_floor": floor,
        });
    }
    Ok(Outcome {
        config: json!({
            "graph": name, "c": c.to_string(), "samples": a.samples, "seed": a.seed,
        }),
        results: json!({
            "certified_c": c_star.to_string(),
            "c": c.to_string(),
            "interior": net.interior().len(),
            "flow_value": flow.value.to_string(),
            "saturating_value": net.saturating_value().to_string(),
            "saturated": saturated,
            "orientation": orientation,
            "inequalities": inequalities,
        }),
        bounds,
        table: None,
    })
}

pub fn continuous_cmd(a: &ContinuousArgs) -> Result<Outcome, CliError> {
    let d = a.d;
    let mc = MCConfig::new(a.samples, a.epsilon, a.seed)?.with_jobs(a.jobs);
    let scan = best_ratio_scan(d, &a.t_grid, &mc)?;
    let mut bounds = vec![BoundCheck::le(
        "level-body-ratio-vs-2pi-sqrt-d",
        None,
        d,
        scan.ratio_star,
        scan.bound + 3.0 * scan.ratio_stderr,
    )];
    let mut spine = Value::Null;
    if a.spine_area {
        let est = estimate_spine_area(d, scan.t_star, &mc, a.coverage_samples)?;
        let se = est.area.stderr;
        bounds.push(BoundCheck::le(
            "spine-area-vs-2pi-sqrt-d",
            None,
            d,
            est.area.value,
            est.bound + 3.0 * se,
        ));
        bounds.push(
            BoundCheck::ge(
                "spine-area-vs-kappa-half",
                None,
                d,
                est.area.value,
                est.kappa_floor - 3.0 * se,
            )
            .recorded_only(),
        );
        spine = json!({
            "t": est.t,
            "area": est.area.value,
            "stderr": se,
            "samples_used": est.area.samples_used,
            "shifts": est.shifts.len(),
            "shift_cap": est.shift_cap,
            "coverage_samples": est.coverage_samples,
            "per_shift": est.per_shift,
            "volume": est.volume.value,
            "kappa_floor": est.kappa_floor,
        });
    }
    Ok(Outcome {
        config: json!({
            "d": d, "samples": a.samples, "epsilon": a.epsilon, "t_grid": a.t_grid,
            "seed": a.seed, "jobs": a.jobs, "spine_area": a.spine_area,
            "coverage_samples": a.coverage_samples,
        }),
        results: json!({
            "t_star": scan.t_star,
            "ratio_star": scan.ratio_star,
            "ratio_stderr": scan.ratio_stderr,
            "ratio_is_upper_bound_on_h": true,
            "bound": scan.bound,
            "strip_epsilon": a.epsilon,
            "estimates": scan.estimates.iter().map(|e| json!({
                "t": e.t,
                "volume": e.volume.value,
                "volume_stderr": e.volume.stderr,
                "surface": e.surface.value,
                "surface_stderr": e.surface.stderr,
                "ratio": e.ratio,
                "ratio_stderr": e.ratio_stderr,
            })).collect::<Vec<_>>(),
            "spine_area": spine,
            "kappa": kappa(d),
        }),
        bounds,
        table: None,
    })
}

pub fn prng_name() -> &'static str {
    PRNG
}
