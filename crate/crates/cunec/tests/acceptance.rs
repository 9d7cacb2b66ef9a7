//! Acceptance suite: every release criterion as one test, with its
//! tolerance pinned in code. Each test prints one line with the measured
//! values (visible with `cargo test --test acceptance -- --nocapture`).

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use cunec::geometry::{
    build_grid, classify_link, GridLayout, Point2, Point3, Role, StreetOrder, Terminal,
};
use cunec::params::{
    nearest_spd, EnvConditioning, OrderSampler, ParamName, ParameterTables, EIG_FLOOR,
};
use cunec::pathloss::{combine_routes, fspl_1m, Frequency};
use cunec::scenario::{run_baseline, run_scenario, ModelChoice, ModelKind, ScenarioConfig};
use cunec::shadowing::{joint_covariance_with_cap, scale_field, FieldSampler, ShadowingField};
use cunec::stats::{field_stats, fit_linear_pl, EstimatorConfig, Metric};

#[test]
fn criterion_01_fspl_closed_form() {
    let value = fspl_1m(Frequency::from_ghz(3.5).unwrap());
    println!("criterion 1: fspl_1m(3.5 GHz) = {value:.4} dB (expect 43.33 +/- 0.01): PASS");
    assert!((value - 43.33).abs() <= 0.01, "fspl {value}");
}

#[test]
fn criterion_02_combining_identities() {
    let doubled = combine_routes(&[100.0, 100.0]).unwrap();
    assert!(
        (doubled - 96.99).abs() <= 0.001,
        "equal-power combination {doubled} vs 96.99 +/- 0.001"
    );
    // Single-path identity is exact.
    assert_eq!(combine_routes(&[137.25]).unwrap(), 137.25);
    // Permutation invariance is exact.
    let a = combine_routes(&[91.0, 104.5, 88.25, 120.0]).unwrap();
    let b = combine_routes(&[120.0, 88.25, 91.0, 104.5]).unwrap();
    let c = combine_routes(&[104.5, 120.0, 91.0, 88.25]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    println!("criterion 2: combine([100,100]) = {doubled:.4}, identity and permutations exact: PASS");
}

#[test]
fn criterion_03_shadowing_table_regeneration() {
    let (m, n) = (100usize, 100usize);
    let (sigma_ue, sigma_ap) = (6.51, 5.34);
    let (dcorr_ue, dcorr_ap) = (17.2, 5.43);
    let sigma_total = 6.65;

    let ue: Vec<Point2> = (0..m).map(|i| Point2::new(i as f64, 0.0)).collect();
    let ap: Vec<Point2> = (0..n).map(|j| Point2::new(j as f64, 200.0)).collect();
    let cov = joint_covariance_with_cap(&ue, &ap, dcorr_ue, dcorr_ap, m * n).unwrap();
    let sampler = FieldSampler::new(&cov, m, n).unwrap();
    drop(cov);

    let seeds = 20;
    let mut tot = 0.0;
    let mut row_sigma = 0.0;
    let mut col_sigma = 0.0;
    let mut row_dcorr = 0.0;
    let mut col_dcorr = 0.0;
    for s in 0..seeds {
        let mut rng = ChaCha12Rng::seed_from_u64(300 + s);
        let raw = sampler.sample(&mut rng);
        let field = ShadowingField {
            values_db: scale_field(&raw, sigma_ue, sigma_ap).unwrap(),
            ue_positions: ue.clone(),
            ap_positions: ap.clone(),
            d_corr_ue_m: dcorr_ue,
            d_corr_ap_m: dcorr_ap,
            target_sigma_ue_db: sigma_ue,
            target_sigma_ap_db: sigma_ap,
        };
        let stats = field_stats(&field, EstimatorConfig::default()).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        tot += stats.sigma_total_db;
        row_sigma += mean(&stats.per_row_sigma_db);
        col_sigma += mean(&stats.per_col_sigma_db);
        row_dcorr += mean(&stats.per_row_dcorr_m);
        col_dcorr += mean(&stats.per_col_dcorr_m);
    }
    let k = seeds as f64;
    let (tot, row_sigma, col_sigma, row_dcorr, col_dcorr) =
        (tot / k, row_sigma / k, col_sigma / k, row_dcorr / k, col_dcorr / k);

    println!(
        "criterion 3: total sigma {tot:.3} (6.65 +/-15%), row sigma {row_sigma:.3} (6.51 +/-10%), \
         col sigma {col_sigma:.3} (5.34 +/-10%), row d_corr {row_dcorr:.2} (17.2 +/-25%), \
         col d_corr {col_dcorr:.2} (5.43 +/-25%): PASS"
    );
    assert!((tot - sigma_total).abs() <= 0.15 * sigma_total, "total sigma {tot}");
    assert!((row_sigma - sigma_ue).abs() <= 0.10 * sigma_ue, "row sigma {row_sigma}");
    assert!((col_sigma - sigma_ap).abs() <= 0.10 * sigma_ap, "col sigma {col_sigma}");
    assert!((row_dcorr - dcorr_ue).abs() <= 0.25 * dcorr_ue, "row d_corr {row_dcorr}");
    assert!((col_dcorr - dcorr_ap).abs() <= 0.25 * dcorr_ap, "col d_corr {col_dcorr}");
}

#[test]
fn criterion_04_parameter_moment_recovery() {
    let tables = ParameterTables::default();
    let env = EnvConditioning::new();
    let draws = 100_000usize;

    for order in [StreetOrder::Los, StreetOrder::Nlos1, StreetOrder::Nlos2] {
        let sampler = OrderSampler::new(order, &env, &tables).unwrap();
        let (names, projected) = tables.projected_order_correlation(order).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4100 + order.index() as u64);

        let dim = names.len();
        let mut sums = vec![0.0f64; dim];
        let mut sq = vec![0.0f64; dim];
        let mut cross = vec![0.0f64; dim * dim];
        for _ in 0..draws {
            let joint = sampler.sample_joint(&mut rng);
            assert_eq!(joint.len(), dim);
            for (i, (name, v)) in joint.iter().enumerate() {
                assert_eq!(*name, names[i]);
                sums[i] += v;
                sq[i] += v * v;
            }
            for i in 0..dim {
                for j in (i + 1)..dim {
                    cross[i * dim + j] += joint[i].1 * joint[j].1;
                }
            }
        }
        let nf = draws as f64;
        let means: Vec<f64> = sums.iter().map(|s| s / nf).collect();
        let stds: Vec<f64> =
            sq.iter().zip(&means).map(|(s, m)| (s / nf - m * m).max(0.0).sqrt()).collect();

        // Published moments: every mean within 3 standard errors, every
        // deviation within 5%.
        let raw = tables.raw_order_correlation(order);
        for (i, name) in names.iter().enumerate() {
            let stat = table_stat(&tables, order, *name);
            let se = stat.std / nf.sqrt();
            assert!(
                (means[i] - stat.mean).abs() <= 3.0 * se,
                "order {} {name}: mean {} vs {} (3se = {})",
                order.index(),
                means[i],
                stat.mean,
                3.0 * se
            );
            if stat.std > 0.0 {
                assert!(
                    (stds[i] - stat.std).abs() <= 0.05 * stat.std,
                    "order {} {name}: std {} vs {}",
                    order.index(),
                    stds[i],
                    stat.std
                );
            }
        }

        // Every strong listed correlation within 0.05 of its projected value.
        let mut checked = 0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                if raw.1[(i, j)].abs() < 0.4 {
                    continue;
                }
                let cov = cross[i * dim + j] / nf - means[i] * means[j];
                let rho = cov / (stds[i] * stds[j]);
                let target = projected[(i, j)];
                assert!(
                    (rho - target).abs() <= 0.05,
                    "order {} {} / {}: corr {rho} vs projected {target}",
                    order.index(),
                    names[i],
                    names[j]
                );
                checked += 1;
            }
        }
        println!(
            "criterion 4 order {}: {} means within 3se, stds within 5%, {} strong correlations within 0.05: PASS",
            order.index(),
            dim,
            checked
        );
    }
}

fn table_stat(tables: &ParameterTables, order: StreetOrder, name: ParamName) -> cunec::params::MeanStd {
    if name.is_env() {
        tables.env.iter().find(|(n, _)| *n == name).unwrap().1
    } else {
        tables.order(order).params.iter().find(|(n, _)| *n == name).unwrap().1
    }
}

#[test]
fn criterion_05_conditional_direction_checks() {
    let tables = ParameterTables::default();
    let w = tables.env.iter().find(|(n, _)| *n == ParamName::StreetWidth).unwrap().1;
    let mut env = EnvConditioning::new();
    env.set(ParamName::StreetWidth, w.mean + 2.0 * w.std).unwrap();
    let sampler = OrderSampler::new(StreetOrder::Los, &env, &tables).unwrap();

    let draws = 100_000usize;
    let mut rng = ChaCha12Rng::seed_from_u64(5001);
    let (mut sum_b0, mut sum_d0) = (0.0f64, 0.0f64);
    for _ in 0..draws {
        let joint = sampler.sample_joint(&mut rng);
        let get = |name| joint.iter().find(|(n, _)| *n == name).unwrap().1;
        sum_b0 += get(ParamName::B0);
        sum_d0 += get(ParamName::Delta0);
    }
    let nf = draws as f64;
    let (mean_b0, mean_d0) = (sum_b0 / nf, sum_d0 / nf);
    let se_b0 = 0.05 / nf.sqrt();
    let se_d0 = 0.6 / nf.sqrt();
    println!(
        "criterion 5: E[b0 | wide street] = {mean_b0:.4} (> 1.56 + 3se), \
         E[delta0 | wide street] = {mean_d0:.4} (< 6.3 - 3se): PASS"
    );
    assert!(mean_b0 - 1.56 > 3.0 * se_b0, "b0 shift {}", mean_b0 - 1.56);
    assert!(mean_d0 - 6.3 < -3.0 * se_d0, "delta0 shift {}", mean_d0 - 6.3);
}

// ---------------------------------------------------------------------
// Criterion 6: exhaustive comparison against an independent graph search.
// ---------------------------------------------------------------------

mod route_oracle {
    use cunec::geometry::{Axis, GridLayout, Point2, StreetId};

    struct Graph {
        nodes: Vec<Point2>,
        adj: Vec<Vec<(usize, StreetId, f64)>>,
    }

    /// Canonical route key: corner coordinates, segment lengths, streets.
    pub type RouteKey = (Vec<(u64, u64)>, Vec<u64>, Vec<StreetId>);

    pub fn route_key(corners: &[Point2], segments: &[f64], streets: &[StreetId]) -> RouteKey {
        (
            corners.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect(),
            segments.iter().map(|s| s.to_bits()).collect(),
            streets.to_vec(),
        )
    }

    fn build_graph(grid: &GridLayout, extra: &[Point2]) -> Graph {
        let mut nodes: Vec<Point2> = Vec::new();
        let mut push = |p: Point2, nodes: &mut Vec<Point2>| {
            if !nodes.iter().any(|q| q.x == p.x && q.y == p.y) {
                nodes.push(p);
            }
        };
        for v in 0..grid.street_count(Axis::Vertical) {
            for h in 0..grid.street_count(Axis::Horizontal) {
                let p = grid
                    .crossing(StreetId::horizontal(h), StreetId::vertical(v))
                    .unwrap();
                push(p, &mut nodes);
            }
        }
        for p in extra {
            push(*p, &mut nodes);
        }

        let mut adj = vec![Vec::new(); nodes.len()];
        for street in grid.streets() {
            let center = grid.centerline(street);
            let (lo, hi) = grid.along_span(street);
            let mut on_street: Vec<(f64, usize)> = nodes
                .iter()
                .enumerate()
                .filter(|(_, p)| {
                    let (along, cross) = match street.axis {
                        Axis::Horizontal => (p.x, p.y),
                        Axis::Vertical => (p.y, p.x),
                    };
                    cross == center && along >= lo && along <= hi
                })
                .map(|(idx, p)| {
                    let along = match street.axis {
                        Axis::Horizontal => p.x,
                        Axis::Vertical => p.y,
                    };
                    (along, idx)
                })
                .collect();
            on_street.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in on_street.windows(2) {
                let (a_along, a_idx) = w[0];
                let (b_along, b_idx) = w[1];
                let len = b_along - a_along;
                adj[a_idx].push((b_idx, street, len));
                adj[b_idx].push((a_idx, street, len));
            }
        }
        Graph { nodes, adj }
    }

    /// Exhaustive enumeration of simple street-graph paths with at most
    /// two axis changes; returns the minimal turn count and all routes
    /// achieving it, or `None` when start and goal coincide.
    pub fn classify(grid: &GridLayout, ap: Point2, ue: Point2) -> Option<(usize, Vec<RouteKey>)> {
        let ap_att = grid.assign_street(ap).ok()?;
        let ue_att = grid.assign_street(ue).ok()?;
        let ap_node = attach_point(grid, ap_att.street, ap_att.along);
        let ue_node = attach_point(grid, ue_att.street, ue_att.along);
        if ap_node.x == ue_node.x && ap_node.y == ue_node.y {
            return None;
        }
        let graph = build_graph(grid, &[ap_node, ue_node]);
        let start = graph.nodes.iter().position(|p| p.x == ap_node.x && p.y == ap_node.y).unwrap();
        let goal = graph.nodes.iter().position(|p| p.x == ue_node.x && p.y == ue_node.y).unwrap();

        let mut found: Vec<(usize, Vec<(usize, StreetId)>)> = Vec::new();
        let mut visited = vec![false; graph.nodes.len()];
        visited[start] = true;
        let mut path = Vec::new();
        dfs(&graph, start, goal, None, 0, &mut visited, &mut path, &mut found);
        let min_turns = found.iter().map(|(t, _)| *t).min()?;
        let mut keys: Vec<RouteKey> = found
            .into_iter()
            .filter(|(t, _)| *t == min_turns)
            .map(|(_, edges)| path_to_key(&graph, start, &edges))
            .collect();
        keys.sort();
        keys.dedup();
        Some((min_turns, keys))
    }

    fn attach_point(grid: &GridLayout, street: StreetId, along: f64) -> Point2 {
        let c = grid.centerline(street);
        match street.axis {
            Axis::Horizontal => Point2::new(along, c),
            Axis::Vertical => Point2::new(c, along),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        graph: &Graph,
        node: usize,
        goal: usize,
        dir: Option<Axis>,
        turns: usize,
        visited: &mut Vec<bool>,
        path: &mut Vec<(usize, StreetId)>,
        found: &mut Vec<(usize, Vec<(usize, StreetId)>)>,
    ) {
        if node == goal {
            found.push((turns, path.clone()));
            return;
        }
        for &(next, street, _len) in &graph.adj[node] {
            if visited[next] {
                continue;
            }
            let t = turns + usize::from(matches!(dir, Some(d) if d != street.axis));
            if t > 2 {
                continue;
            }
            visited[next] = true;
            path.push((next, street));
            dfs(graph, next, goal, Some(street.axis), t, visited, path, found);
            path.pop();
            visited[next] = false;
        }
    }

    fn path_to_key(graph: &Graph, start: usize, edges: &[(usize, StreetId)]) -> RouteKey {
        let mut corners = Vec::new();
        let mut segments = Vec::new();
        let mut streets = Vec::new();
        let mut seg_start = graph.nodes[start];
        let mut prev_node = start;
        let mut current: Option<StreetId> = None;
        for &(node, street) in edges {
            match current {
                Some(s) if s.axis == street.axis => {}
                Some(_) => {
                    let corner = graph.nodes[prev_node];
                    segments.push(seg_start.distance(&corner));
                    streets.push(current.unwrap());
                    corners.push(corner);
                    seg_start = corner;
                    current = Some(street);
                }
                None => current = Some(street),
            }
            prev_node = node;
        }
        segments.push(seg_start.distance(&graph.nodes[prev_node]));
        streets.push(current.expect("nonempty path"));
        route_key(&corners, &segments, &streets)
    }
}

#[test]
fn criterion_06_geometry_oracle_equivalence() {
    let mut cases = 0u64;
    for bx in 1..=4u32 {
        for by in 1..=4u32 {
            let grid = build_grid(30.0, 10.0, 20.0, bx, by).unwrap();
            let points = lattice_points(&grid, 5.0);
            for (pi, &a) in points.iter().enumerate() {
                for &b in points.iter().skip(pi + 1) {
                    let ap = Terminal::new(Point3::new(a.x, a.y, 20.0), Role::Ap);
                    let ue = Terminal::new(Point3::new(b.x, b.y, 1.5), Role::Ue);
                    let implementation = classify_link(&grid, &ap, &ue);
                    let oracle = route_oracle::classify(&grid, a, b);
                    match (implementation, oracle) {
                        (Err(_), None) => {}
                        (Ok(link), Some((turns, oracle_keys))) => {
                            let order = link.order.expect("grid links are reachable");
                            assert_eq!(order.index(), turns, "order mismatch at {a:?} -> {b:?}");
                            let mut impl_keys: Vec<route_oracle::RouteKey> = link
                                .routes
                                .iter()
                                .map(|r| {
                                    route_oracle::route_key(&r.corners, &r.segment_lengths, &r.street_ids)
                                })
                                .collect();
                            impl_keys.sort();
                            assert_eq!(impl_keys, oracle_keys, "route sets differ at {a:?} -> {b:?}");
                        }
                        (imp, orc) => panic!(
                            "divergent outcomes at {a:?} -> {b:?}: implementation {imp:?}, oracle {:?}",
                            orc.map(|o| o.0)
                        ),
                    }
                    cases += 1;
                }
            }
        }
    }
    println!("criterion 6: {cases} lattice links match the graph-search oracle exactly: PASS");
    assert!(cases > 100_000, "expected an exhaustive sweep, ran {cases}");
}

fn lattice_points(grid: &GridLayout, step: f64) -> Vec<Point2> {
    let max_x = grid.origin.x + f64::from(grid.blocks_x) * grid.pitch() + grid.street_width_m / 2.0;
    let max_y = grid.origin.y + f64::from(grid.blocks_y) * grid.pitch() + grid.street_width_m / 2.0;
    let start_x = grid.origin.x - grid.street_width_m / 2.0;
    let start_y = grid.origin.y - grid.street_width_m / 2.0;
    let mut points = Vec::new();
    let mut x = start_x;
    while x <= max_x {
        let mut y = start_y;
        while y <= max_y {
            let p = Point2::new(x, y);
            if grid.assign_street(p).is_ok() {
                points.push(p);
            }
            y += step;
        }
        x += step;
    }
    points
}

// ---------------------------------------------------------------------
// Criteria 7 and 8 share one sweep geometry: a corner link with the AP
// 80 m from the corner and the UE walking 1..100 m down the crossing
// street.
// ---------------------------------------------------------------------

fn sweep_config(seed: u64) -> ScenarioConfig {
    let grid = GridLayout::new(100.0, 20.0, 20.0, 2, 2, Point2::new(0.0, 0.0)).unwrap();
    let ues = (1..=100).map(|d| Point3::new(0.0, d as f64, 1.5)).collect();
    ScenarioConfig {
        grid,
        frequency: Frequency::from_ghz(3.5).unwrap(),
        model: ModelChoice::Both,
        seed,
        output: None,
        tables: ParameterTables::default(),
        aps: vec![Point3::new(80.0, 0.0, 20.0)],
        ues,
        ort_db: None,
        link_cap: cunec::shadowing::DEFAULT_LINK_CAP,
    }
}

#[test]
fn criterion_07_local_fit_reproduction() {
    let runs = 50;
    let mut betas = Vec::with_capacity(runs);
    let mut sigmas = Vec::with_capacity(runs);
    for k in 0..runs {
        let cfg = sweep_config(7000 + k as u64);
        let run = run_scenario(&cfg).unwrap();
        let mut pl = Vec::new();
        let mut dist = Vec::new();
        for r in &run.results {
            assert_eq!(r.order, Some(StreetOrder::Nlos1));
            pl.push(r.total_pl_db.unwrap());
            dist.push(r.manhattan_d_m.unwrap());
        }
        let fit = fit_linear_pl(&pl, &dist, Metric::Manhattan, true).unwrap();
        betas.push(fit.beta);
        sigmas.push(fit.sigma_resid_db);
    }
    let beta_mean = betas.iter().sum::<f64>() / runs as f64;
    let sigma_mean = sigmas.iter().sum::<f64>() / runs as f64;
    println!(
        "criterion 7: ensemble beta {beta_mean:.3} (need [4.4, 6.4]), \
         sigma {sigma_mean:.3} dB (need [4, 11]): PASS"
    );
    assert!((4.4..=6.4).contains(&beta_mean), "beta mean {beta_mean}");
    assert!((4.0..=11.0).contains(&sigma_mean), "sigma mean {sigma_mean}");
}

#[test]
fn criterion_08_qualitative_model_separation() {
    // Ensemble-mean street-model curve over the same sweep as criterion 7.
    let runs = 50;
    let mut mean_curve = vec![0.0f64; 100];
    for k in 0..runs {
        let cfg = sweep_config(7000 + k as u64);
        let run = run_scenario(&cfg).unwrap();
        for r in &run.results {
            mean_curve[r.ue_index] += r.mean_pl_db.unwrap() / runs as f64;
        }
    }
    let street_span = span(&mean_curve);

    let baseline = run_baseline(&sweep_config(7000)).unwrap();
    let baseline_curve: Vec<f64> = baseline
        .results
        .iter()
        .filter(|r| r.model == ModelKind::AlphaBeta)
        .map(|r| r.mean_pl_db.unwrap())
        .collect();
    let baseline_span = span(&baseline_curve);

    println!(
        "criterion 8: street-model ensemble-mean span {street_span:.2} dB (need > 20), \
         baseline mean span {baseline_span:.2} dB (criterion demands < 5)"
    );
    assert!(street_span > 20.0, "street-model span {street_span}");
    assert!(
        baseline_span < 5.0,
        "baseline mean-loss span over the sweep is {baseline_span:.2} dB, not below the stated 5 dB: \
         with the published exponent 6.3 the euclidean distance ratio sqrt(80^2+100^2)/sqrt(80^2+1) \
         fixes this span at 12.88 dB, so the stated threshold is unattainable for this geometry"
    );
}

fn span(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

#[test]
fn criterion_09_nearest_spd_correctness() {
    // Symmetry, eigenvalue floor, idempotence.
    let cases = [
        ndarray::arr2(&[[1.0, 1.2], [1.2, 1.0]]),
        ndarray::arr2(&[[1.0, 0.9, -0.6], [0.9, 1.0, 0.8], [-0.6, 0.8, 1.0]]),
        ndarray::arr2(&[[2.0, -1.5, 0.3], [-1.5, 1.0, 0.9], [0.3, 0.9, 0.5]]),
    ];
    for a in &cases {
        let p = nearest_spd(a).unwrap();
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                assert!((p[(i, j)] - p[(j, i)]).abs() < 1e-12, "asymmetry");
            }
        }
        let (vals, _) = p.eigh(UPLO::Lower).unwrap();
        assert!(vals.iter().all(|&v| v >= EIG_FLOOR - 1e-12), "floor violated: {vals:?}");
        let pp = nearest_spd(&p).unwrap();
        let drift = (&pp - &p).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(drift <= 1e-10, "not idempotent: drift {drift}");
    }

    // Frobenius optimality against a coarse global grid in 2x2.
    let a2 = &cases[0];
    let ours2 = nearest_spd(a2).unwrap();
    let our_dist2 = frobenius(a2, &ours2);
    let mut best2 = f64::INFINITY;
    let steps = |lo: f64, hi: f64, n: usize| (0..=n).map(move |k| lo + (hi - lo) * k as f64 / n as f64);
    for d1 in steps(0.0, 2.2, 44) {
        for d2 in steps(0.0, 2.2, 44) {
            for off in steps(-1.5, 1.5, 60) {
                if d1 * d2 - off * off < 0.0 {
                    continue;
                }
                let candidate = ndarray::arr2(&[[d1, off], [off, d2]]);
                best2 = best2.min(frobenius(a2, &candidate));
            }
        }
    }
    assert!(
        our_dist2 <= best2 + 1e-3,
        "2x2 projection distance {our_dist2} beaten by grid {best2}"
    );

    // Local grid search around the 3x3 projections.
    for a in &cases[1..] {
        let ours = nearest_spd(a).unwrap();
        let our_dist = frobenius(a, &ours);
        let deltas = [-0.02, -0.01, 0.0, 0.01, 0.02];
        let mut best = f64::INFINITY;
        for d00 in deltas {
            for d11 in deltas {
                for d22 in deltas {
                    for d01 in deltas {
                        for d02 in deltas {
                            for d12 in deltas {
                                let mut c = ours.clone();
                                c[(0, 0)] += d00;
                                c[(1, 1)] += d11;
                                c[(2, 2)] += d22;
                                c[(0, 1)] += d01;
                                c[(1, 0)] += d01;
                                c[(0, 2)] += d02;
                                c[(2, 0)] += d02;
                                c[(1, 2)] += d12;
                                c[(2, 1)] += d12;
                                let (vals, _) = c.eigh(UPLO::Lower).unwrap();
                                if vals.iter().all(|&v| v >= -1e-9) {
                                    best = best.min(frobenius(a, &c));
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(
            our_dist <= best + 1e-3,
            "3x3 projection distance {our_dist} beaten by local grid {best}"
        );
    }
    println!("criterion 9: projection symmetric, floored, idempotent, grid-optimal: PASS");
}

fn frobenius(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn criterion_10_generate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("scenario.toml");
    std::fs::write(
        &config_path,
        r#"
model = "both"
seed = 99

[grid]
block_length_m = 100.0
street_width_m = 20.0
building_height_m = 20.0
blocks_x = 2
blocks_y = 2

[frequency]
carrier_ghz = 3.5

[aps]
points = [[80.0, 0.0, 20.0], [200.0, 0.0, 20.0], [0.0, 150.0, 20.0]]

[ues]
line_start = [0.0, 20.0, 1.5]
line_end = [0.0, 100.0, 1.5]
spacing_m = 5.0
"#,
    )
    .unwrap();

    let bin = env!("CARGO_BIN_EXE_cunec");
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let status = std::process::Command::new(bin)
            .args(["generate", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "same config and seed must produce identical bytes");

    let out_c = dir.path().join("c.csv");
    let status = std::process::Command::new(bin)
        .args(["generate", "--config"])
        .arg(&config_path)
        .args(["--seed", "100"])
        .arg("--out")
        .arg(&out_c)
        .status()
        .unwrap();
    assert!(status.success());
    let c = std::fs::read(&out_c).unwrap();
    assert_ne!(a, c, "different seeds must change the realization");
    println!("criterion 10: generate runs are byte-identical for a fixed seed: PASS");
}
