//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness; exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DVector;
use netlump::config::ScenarioConfig;
use netlump::coupling::*;
use netlump::diffusion::{boundary_lift, mass_balance_residual, solve_diffusion, DiffusionProblem};
use netlump::grid::*;
use netlump::linalg::{matrix_exponential_apply, matrix_power_apply, SquareMatrix};
use netlump::lumping::sweep::{DiffusionMetric, FitNorm, TransportMetric};
use netlump::lumping::*;
use netlump::mckendrick::*;
use netlump::profile::{EdgeProfiles, Profile};
use netlump::report::{parse_report_csv, report_csv, report_sidecar};
use netlump::scenario::run_sweep_scenario;
use netlump::transport::*;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = Result<Outcome, String>;

fn outcome(pass: bool, detail: impl Into<String>) -> Check {
    Ok(Outcome { pass, detail: detail.into() })
}

fn scenario(name: &str) -> Result<ScenarioConfig, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    ScenarioConfig::load(&path).map_err(|e| e.to_string())
}

fn order_line(r: &ConvergenceReport) -> String {
    let errs: Vec<String> = r.errors.iter().map(|e| format!("{e:.3e}")).collect();
    match r.fitted_order {
        Some(p) => format!("order {p:.3}, band [{}, {}], errors [{}]", r.band.0, r.band.1, errs.join(", ")),
        None => format!("no order ({})", r.degenerate.as_deref().unwrap_or("degenerate")),
    }
}

fn diffusion_order(metric: DiffusionMetric) -> Check {
    let mut cfg = scenario("two_edge.toml")?;
    cfg.eps_list = Some(vec![0.2, 0.1, 0.05, 0.025]);
    cfg.t_final = Some(1.0);
    cfg.discretization.cells = Some(256);
    cfg.sweep.diffusion_metric = Some(metric);
    cfg.sweep.fit_norm = Some(FitNorm::L1);
    cfg.sweep.band = Some((0.8, 1.2));
    let r = run_sweep_scenario(&cfg).map_err(|e| e.to_string())?;
    outcome(r.pass, order_line(&r))
}

fn criterion_1() -> Check {
    diffusion_order(DiffusionMetric::Projected)
}

fn criterion_2() -> Check {
    diffusion_order(DiffusionMetric::Full)
}

fn criterion_3() -> Check {
    let c = scenario("two_edge.toml")?.coupling.diffusion().map_err(|e| e.to_string())?;
    let u0 = GridFunction::from_fn(2, 256, |j, x| 1.0 + (j as f64 + 1.0) * (PI * x).cos()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for eps in [0.05, 0.025, 0.0125] {
        let e = LayerExpansion::diffusion(&c, eps, &u0, 200).map_err(|e| e.to_string())?;
        worst = worst.max(norm_sup(&e.layer(0.2).map_err(|e| e.to_string())?));
    }
    outcome(worst <= 1e-6, format!("max layer sup at t0 = 0.2: {worst:.2e}"))
}

fn transport_order(metric: TransportMetric) -> Result<ConvergenceReport, String> {
    let mut cfg = scenario("transport_demo.toml")?;
    cfg.eps_list = Some(vec![0.2, 0.1, 0.05, 0.025]);
    cfg.t_final = Some(1.0);
    cfg.sweep.transport_metric = Some(metric);
    cfg.sweep.fit_norm = Some(FitNorm::L1);
    cfg.sweep.band = Some((0.8, 1.2));
    run_sweep_scenario(&cfg).map_err(|e| e.to_string())
}

fn criterion_4() -> Check {
    let r = transport_order(TransportMetric::Projected)?;
    outcome(r.pass, order_line(&r))
}

fn criterion_5() -> Check {
    let cfg = scenario("transport_demo.toml")?;
    let c = cfg.coupling.transport(1.0, cfg.seed()).map_err(|e| e.to_string())?;
    let u0 = cfg.initial_profiles(3).and_then(|p| p.sample(cfg.cells())).map_err(|e| e.to_string())?;
    let mut drift = 0.0f64;
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let e = LayerExpansion::transport(&c, eps, &u0).map_err(|e| e.to_string())?;
        for t in [0.3, 0.5, 0.77] {
            let a = norm_l1(&e.layer(t).map_err(|e| e.to_string())?);
            let b = norm_l1(&e.layer(t + eps).map_err(|e| e.to_string())?);
            drift = drift.max((a - b).abs());
        }
    }
    let periodic = drift <= 1e-3;
    let kinetic = transport_order(TransportMetric::Kinetic)?;
    outcome(
        periodic && kinetic.pass,
        format!("layer periodicity drift {drift:.2e}; kinetic estimate {}", order_line(&kinetic)),
    )
}

fn criterion_6() -> Check {
    let cfg = scenario("transport_demo.toml")?;
    let c = cfg.coupling.transport(1.0, cfg.seed()).map_err(|e| e.to_string())?;
    let nb = c.b.norm1();
    let (eps, t) = (0.1, 1.0);
    let bump = Profile::Bump { base: 0.0, height: 1.0 };
    let u0 = EdgeProfiles(vec![bump; 3]);
    let mut dists = Vec::new();
    let mut within = true;
    for n in [256, 512, 1024] {
        let exact = transport_exact_from(&c, eps, &u0, t, n).map_err(|e| e.to_string())?;
        let up = transport_upwind_from(&c, eps, &u0, t, n, 0.9, DEFAULT_MAX_UPWIND_STEPS).map_err(|e| e.to_string())?;
        let d = norm_l1(&exact.axpby(1.0, &up, -1.0).map_err(|e| e.to_string())?);
        let bound = 5.0 / n as f64 * (1.0 + nb) * (t * nb).exp();
        within &= d <= bound;
        dists.push(d);
    }
    let ratios: Vec<f64> = dists.windows(2).map(|w| w[0] / w[1]).collect();
    let first_order = ratios.iter().all(|r| (1.6..=2.4).contains(r));
    outcome(
        within && first_order,
        format!(
            "L1 distances {:?}, ratios {:?}, ||B||_1 = {nb:.3}",
            dists.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_7() -> Check {
    let cfg = scenario("ex52_stochastic.toml")?;
    let eps = cfg.eps();
    let c = cfg.coupling.transport(eps, cfg.seed()).map_err(|e| e.to_string())?;
    let u0 = cfg.initial_profiles(3).map_err(|e| e.to_string())?;
    let rho = u0.integral_all(0.0, 1.0).sum();
    let mut worst = 0.0f64;
    for k in 0..=200 {
        let t = k as f64 / 200.0;
        let v = transport_projection_exact(&c, eps, &u0, t).map_err(|e| e.to_string())?;
        worst = worst.max((v.total() - rho).abs());
    }
    outcome(worst <= 1e-8, format!("max |1.v(t) - rho| on [0, 1]: {worst:.2e}"))
}

fn criterion_8() -> Check {
    let cfg = scenario("ex33_network.toml")?;
    let spec = cfg.coupling.rates.as_ref().ok_or("ex33 scenario has no rates")?;
    let rates = spec.to_rates().map_err(|e| e.to_string())?;
    let c = coupling_from_rates(&rates).map_err(|e| e.to_string())?;
    let balanced = check_markov_conditions(&c) && kolmogorov_check(&c.transpose_lumped_matrix());
    let mut bad = rates.clone();
    let key = *bad.l_pairs.keys().next().ok_or("no l pairs")?;
    bad.l_pairs.get_mut(&key).unwrap().1 += 0.1;
    let cb = coupling_from_rates(&bad).map_err(|e| e.to_string())?;
    let mutated_markov = check_markov_conditions(&cb);
    let mutated_kolmogorov = kolmogorov_check(&cb.transpose_lumped_matrix());
    outcome(
        balanced && !mutated_markov && !mutated_kolmogorov,
        format!(
            "balanced passes: {balanced}; l{key:?} + 0.1: markov {mutated_markov}, kolmogorov {mutated_kolmogorov}"
        ),
    )
}

fn criterion_9() -> Check {
    let cfg = scenario("mckendrick_demo.toml")?;
    let r = run_sweep_scenario(&cfg).map_err(|e| e.to_string())?;
    let g = &r.errors;
    let monotone = g.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    let shrink = g[g.len() - 1] <= g[0] / 3.0;
    outcome(
        monotone && shrink,
        format!(
            "gaps [{}], finest/coarsest {:.3}, {}",
            g.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", "),
            g[g.len() - 1] / g[0],
            order_line(&r)
        ),
    )
}

fn m(rows: &[&[f64]]) -> SquareMatrix {
    SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn vclose(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y, tol))
}

fn grid(m: usize, n: usize, f: impl Fn(usize, f64) -> f64) -> GridFunction {
    GridFunction::from_fn(m, n, f).unwrap()
}

fn netlump_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_netlump")).args(args).env_remove("NETLUMP_TOL").output().unwrap()
}

fn trivial_examples() -> Vec<(&'static str, Box<dyn Fn() -> bool>)> {
    let z1 = || SquareMatrix::zeros(1);
    let i1 = || SquareMatrix::identity(1);
    vec![
        ("integrate constant", Box::new(|| close(integrate_edge(&GridFunction::constant(&[3.5], 8), 0).unwrap(), 3.5, 1e-14))),
        ("integrate x", Box::new(|| close(integrate_edge(&grid(1, 8, |_, x| x), 0).unwrap(), 0.5, 1e-15))),
        ("project constants", Box::new(|| vclose(project_average(&GridFunction::constant(&[1.0, -2.0, 4.0], 16)).unwrap().as_slice(), &[1.0, -2.0, 4.0], 1e-14))),
        ("project (x, 2x)", Box::new(|| vclose(project_average(&grid(2, 8, |j, x| (j + 1) as f64 * x)).unwrap().as_slice(), &[0.5, 1.0], 1e-15))),
        ("norms of zero", Box::new(|| { let z = GridFunction::zeros(2, 8); norm_l1(&z) == 0.0 && norm_sup(&z) == 0.0 })),
        ("norms of one", Box::new(|| { let u = GridFunction::constant(&[1.0], 8); close(norm_l1(&u), 1.0, 1e-15) && norm_sup(&u) == 1.0 })),
        ("exp of zero", Box::new(|| matrix_exponential_apply(&SquareMatrix::zeros(2), 3.0, &DVector::from_vec(vec![1.0, 2.0])).unwrap().as_slice() == [1.0, 2.0])),
        ("exp of nilpotent", Box::new(|| vclose(matrix_exponential_apply(&m(&[&[0.0, 1.0], &[0.0, 0.0]]), 1.0, &DVector::from_vec(vec![0.0, 1.0])).unwrap().as_slice(), &[1.0, 1.0], 1e-14))),
        ("power 0", Box::new(|| matrix_power_apply(&m(&[&[3.0, 1.0], &[0.0, 2.0]]), 0, &DVector::from_vec(vec![1.0, 5.0])).as_slice() == [1.0, 5.0])),
        ("power 2I cubed", Box::new(|| matrix_power_apply(&SquareMatrix::identity(2).scale(2.0), 3, &DVector::from_vec(vec![1.0, 1.0])).as_slice() == [8.0, 8.0])),
        ("lump zero", Box::new(|| DiffusionCoupling::zeros(2).aggregated_matrix() == SquareMatrix::zeros(2))),
        ("lump K10 = I", Box::new(|| DiffusionCoupling::new(SquareMatrix::zeros(2), SquareMatrix::zeros(2), SquareMatrix::identity(2), SquareMatrix::zeros(2)).unwrap().aggregated_matrix() == SquareMatrix::identity(2))),
        ("aux sums zero", Box::new(|| { let a = DiffusionCoupling::zeros(2).auxiliary_sums(); [a.plus0, a.plus1, a.minus0, a.minus1].iter().all(|x| *x == SquareMatrix::zeros(2)) })),
        ("aux sums K11 = I", Box::new(move || { let a = DiffusionCoupling::new(z1(), z1(), z1(), i1()).unwrap().auxiliary_sums(); a.plus1 == i1() && a.minus1 == i1() && a.plus0 == z1() && a.minus0 == z1() })),
        ("positivity zero", Box::new(|| check_diffusion_positivity(&DiffusionCoupling::zeros(2)).positive)),
        ("positivity K01 entry", Box::new(|| { let z = SquareMatrix::zeros(2); !check_diffusion_positivity(&DiffusionCoupling::new(z.clone(), m(&[&[0.0, 0.0], &[1.0, 0.0]]), z.clone(), z).unwrap()).positive })),
        ("markov zero", Box::new(|| check_markov_conditions(&DiffusionCoupling::zeros(2)))),
        ("markov K00 = 1", Box::new(move || !check_markov_conditions(&DiffusionCoupling::new(i1(), z1(), z1(), z1()).unwrap()))),
        ("kolmogorov zero", Box::new(|| kolmogorov_check(&SquareMatrix::zeros(3)))),
        ("kolmogorov 2x2", Box::new(|| kolmogorov_check(&m(&[&[-1.0, 1.0], &[1.0, -1.0]])))),
        ("kolmogorov bad column", Box::new(|| !kolmogorov_check(&m(&[&[-1.0, 0.0], &[1.0, -1.0]])))),
        ("rates zero", Box::new(|| coupling_from_rates(&EdgeExchangeRates::zeros(2)).unwrap() == DiffusionCoupling::zeros(2))),
        ("rates single edge", Box::new(move || { let mut r = EdgeExchangeRates::zeros(1); r.l = vec![1.0]; r.r = vec![1.0]; let c = coupling_from_rates(&r).unwrap(); c.k00 == i1() && c.k11 == i1().scale(-1.0) && c.k01 == z1() && c.k10 == z1() })),
        ("perron swap", Box::new(|| vclose(perron_vector(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap().as_slice(), &[0.5, 0.5], 1e-12))),
        ("perron identity", Box::new(|| vclose(perron_vector(&SquareMatrix::identity(1)).unwrap().as_slice(), &[1.0], 1e-15))),
        ("connected swap", Box::new(|| is_strongly_connected(&m(&[&[0.0, 1.0], &[1.0, 0.0]])))),
        ("upper triangular", Box::new(|| !is_strongly_connected(&m(&[&[1.0, 1.0], &[0.0, 1.0]])))),
        ("neumann equilibrium", Box::new(|| {
            let u0 = GridFunction::constant(&[2.0, -1.0], 16);
            let traj = solve_diffusion(&DiffusionProblem::new(DiffusionCoupling::zeros(2), 0.3, u0.clone(), 1.0)).unwrap();
            traj.states.iter().all(|u| vclose(u.values(), u0.values(), 1e-12))
        })),
        ("residual without coupling", Box::new(|| {
            let p = DiffusionProblem::new(DiffusionCoupling::zeros(2), 1.0, grid(2, 32, |_, x| (PI * x).cos()), 0.1);
            mass_balance_residual(&solve_diffusion(&p).unwrap(), &p).unwrap().iter().all(|r| *r <= 1e-8)
        })),
        ("lift zero", Box::new(|| boundary_lift(&[0.0, 0.0], &[0.0, 0.0], 16).unwrap().values().iter().all(|v| *v == 0.0))),
        ("lift alpha 1", Box::new(|| {
            let v = boundary_lift(&[1.0], &[0.0], 64).unwrap();
            (0..=64).all(|i| { let x = i as f64 / 64.0; close(v.row(0)[i], x * (1.0 - x).powi(2), 1e-15) })
        })),
        ("transport at t = 0", Box::new(|| {
            let u0 = grid(2, 16, |j, x| (j as f64 + 1.0) * x * x);
            let p = TransportProblem::new(TransportCoupling::new(m(&[&[0.3, -1.0], &[0.5, 0.2]])), 0.1, u0.clone(), 1.0);
            transport_exact(&p, 0.0).unwrap() == u0 && transport_upwind(&p, 0.0, 16, 0.9).unwrap() == u0
        })),
        ("transport shift pattern", Box::new(|| {
            let p = TransportProblem::new(TransportCoupling::new(SquareMatrix::zeros(1)), 1.0, grid(1, 16, |_, x| x), 1.0);
            let u = transport_exact(&p, 0.25).unwrap();
            (0..=16).all(|i| { let x = i as f64 / 16.0; close(u.row(0)[i], if x < 0.25 { x + 0.75 } else { x - 0.25 }, 1e-14) })
        })),
        ("decomposition of N", Box::new(|| {
            let t = m(&[&[0.9, 0.2], &[0.1, 0.8]]);
            let n = perron_vector(&t).unwrap();
            let d = stochastic_decomposition(&t, &GridFunction::constant(n.as_slice(), 8)).unwrap();
            close(d.rho, 1.0, 1e-12) && norm_sup(&d.layer0) <= 1e-12
        })),
        ("decomposition swap", Box::new(|| {
            let d = stochastic_decomposition(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), &GridFunction::constant(&[1.0, 0.0], 8)).unwrap();
            close(d.rho, 1.0, 1e-14) && vclose(d.n.as_slice(), &[0.5, 0.5], 1e-12) && vclose(&[d.layer0.row(0)[3], d.layer0.row(1)[3]], &[0.5, -0.5], 1e-12)
        })),
        ("limit without coupling", Box::new(|| aggregated_solution_diffusion(&DiffusionCoupling::zeros(2), &AggregatedState::new(vec![1.0, 2.0]).unwrap(), 4.0).unwrap().as_slice() == [1.0, 2.0])),
        ("limit K10 = 1", Box::new(move || close(aggregated_solution_diffusion(&DiffusionCoupling::new(z1(), z1(), i1(), z1()).unwrap(), &AggregatedState::new(vec![2.0]).unwrap(), 0.7).unwrap().as_slice()[0], 2.0 * 0.7f64.exp(), 1e-13))),
        ("corrector of zero", Box::new(|| corrector_diffusion(&DiffusionCoupling::zeros(2), &AggregatedState::new(vec![0.0, 0.0]).unwrap(), 16).unwrap().values().iter().all(|v| *v == 0.0))),
        ("cosine layer mode", Box::new(|| {
            let (u, _) = initial_layer_diffusion(&grid(1, 256, |_, x| (PI * x).cos()), 0.05, 50).unwrap();
            (0..=256).all(|i| close(u.row(0)[i], (-PI * PI * 0.05f64).exp() * (PI * i as f64 / 256.0).cos(), 1e-7))
        })),
        ("layer at tau = 10", Box::new(|| norm_sup(&initial_layer_diffusion(&grid(1, 64, |_, x| x - 0.5), 10.0, 200).unwrap().0) <= 1e-40)),
        ("transport limit B = 0", Box::new(|| aggregated_solution_transport(&SquareMatrix::zeros(2), &AggregatedState::new(vec![1.0, 3.0]).unwrap(), 2.0).unwrap().as_slice() == [1.0, 3.0])),
        ("transport limit B = -I", Box::new(|| vclose(aggregated_solution_transport(&SquareMatrix::identity(2).scale(-1.0), &AggregatedState::new(vec![1.0, 3.0]).unwrap(), 2.0).unwrap().as_slice(), &[(-2.0f64).exp(), 3.0 * (-2.0f64).exp()], 1e-14))),
        ("transport corrector of zero", Box::new(|| corrector_transport(&SquareMatrix::identity(2), &AggregatedState::new(vec![0.0, 0.0]).unwrap(), 8).unwrap().values().iter().all(|v| *v == 0.0))),
        ("transport corrector midpoint", Box::new(|| corrector_transport(&m(&[&[1.0, 2.0], &[-3.0, 0.5]]), &AggregatedState::new(vec![0.7, -1.1]).unwrap(), 8).unwrap().rows().all(|r| r[4] == 0.0))),
        ("transport corrector at 0", Box::new(|| corrector_transport(&SquareMatrix::identity(2), &AggregatedState::new(vec![1.0, 1.0]).unwrap(), 8).unwrap().rows().all(|r| r[0] == 0.5))),
        ("transport layer tau 0 and 1", Box::new(|| {
            let w0 = grid(1, 64, |_, x| (2.0 * PI * x).sin());
            initial_layer_transport(&w0, 0.0).unwrap() == w0 && norm_sup(&initial_layer_transport(&w0, 1.0).unwrap().axpby(1.0, &w0, -1.0).unwrap()) <= 1e-15
        })),
        ("expansion start", Box::new(|| {
            let u0 = grid(2, 256, |j, x| (j as f64 + 1.0) * x * x * (3.0 - 2.0 * x));
            let p = DiffusionProblem::new(DiffusionCoupling::zeros(2), 0.1, u0.clone(), 1.0);
            let e = assemble_expansion(ExpansionProblem::Diffusion(&p), 0.0, 200).unwrap();
            norm_sup(&e.axpby(1.0, &u0, -1.0).unwrap()) <= 1e-6
        })),
        ("transport expansion periodic", Box::new(|| {
            let u0 = grid(2, 128, |j, x| (x * (j as f64 + 2.0)).exp());
            let p = TransportProblem::new(TransportCoupling::new(SquareMatrix::zeros(2)), 0.25, u0.clone(), 1.0);
            let a = assemble_expansion(ExpansionProblem::Transport(&p), 0.75, 0).unwrap();
            norm_sup(&a.axpby(1.0, &u0, -1.0).unwrap()) <= 1e-12
        })),
        ("error norms identical", Box::new(|| { let u = grid(2, 8, |j, x| x + j as f64); error_norms(&u, &u).unwrap() == (0.0, 0.0) })),
        ("error norms constant", Box::new(|| {
            let u = grid(3, 8, |_, x| x);
            let (l1, sup) = error_norms(&u, &u.add_edge_constants(&[-0.5, -0.5, -0.5]).unwrap()).unwrap();
            close(l1, 1.5, 1e-14) && close(sup, 0.5, 1e-15)
        })),
        ("order of 0.1 eps", Box::new(|| {
            let e = [0.2, 0.1, 0.05, 0.025];
            let err: Vec<f64> = e.iter().map(|x| 0.1 * x).collect();
            close(estimate_order(&e, &err, &err, DEFAULT_BAND).unwrap().fitted_order.unwrap(), 1.0, 1e-12)
        })),
        ("order of 0.1 eps^2", Box::new(|| {
            let e = [0.2, 0.1, 0.05, 0.025];
            let err: Vec<f64> = e.iter().map(|x| 0.1 * x * x).collect();
            close(estimate_order(&e, &err, &err, DEFAULT_BAND).unwrap().fitted_order.unwrap(), 2.0, 1e-12)
        })),
        ("free age shift", Box::new(|| {
            let n0 = grid(1, 100, |_, x| (-(x * 4.0 - 1.0f64).powi(2) / 0.08).exp());
            let p = StructuredPopulation { a_max: 4.0, n_age: 100, beta: vec![Profile::Constant { value: 0.0 }], mu: vec![Profile::Constant { value: 0.0 }], k: SquareMatrix::zeros(1), eps: 1.0, n0: n0.clone(), splitting: Splitting::Lie };
            let traj = solve_structured(&p, 1.0, &[1.0]).unwrap();
            let row = traj.densities[0].row(0);
            (0..25).all(|i| row[i] == 0.0) && (25..=100).all(|i| row[i] == n0.row(0)[i - 25])
        })),
        ("identical mortality", Box::new(|| {
            let mu = vec![Profile::Ramp { start: 0.5, slope: 1.0 }; 2];
            let (star, _) = aggregate_vital_rates(&[0.3, 0.7], &mu, &mu).unwrap();
            (0..10).all(|k| close(star.eval(k as f64 * 0.4), mu[0].eval(k as f64 * 0.4), 1e-14))
        })),
        ("degenerate distribution", Box::new(|| {
            let mu = vec![Profile::Constant { value: 1.0 }, Profile::Constant { value: 4.0 }];
            let beta = vec![Profile::Constant { value: 2.0 }, Profile::Constant { value: 0.5 }];
            let (ms, bs) = aggregate_vital_rates(&[1.0, 0.0], &mu, &beta).unwrap();
            ms.eval(0.3) == 1.0 && bs.eval(0.3) == 2.0
        })),
        ("scalar free shift", Box::new(|| {
            let n0: Vec<f64> = (0..=100).map(|i| (-(i as f64 * 0.04 - 1.0f64).powi(2) / 0.08).exp()).collect();
            let zero = Profile::Constant { value: 0.0 };
            let traj = solve_aggregated_mckendrick(&zero, &zero, &n0, 4.0, 1.0, &[1.0]).unwrap();
            let row = traj.densities[0].row(0);
            (0..25).all(|i| row[i] == 0.0) && (25..=100).all(|i| row[i] == n0[i - 25])
        })),
        ("identical patches gap", Box::new(|| {
            let n0 = grid(2, 200, |j, x| (1.0 + j as f64) * (-(x * 4.0 - 1.0f64).powi(2) / 0.08).exp());
            [0.2, 0.05].iter().all(|&eps| {
                let p = StructuredPopulation { a_max: 4.0, n_age: 200, beta: vec![Profile::Constant { value: 0.4 }; 2], mu: vec![Profile::Constant { value: 0.3 }; 2], k: m(&[&[-1.0, 2.0], &[1.0, -2.0]]), eps, n0: n0.clone(), splitting: Splitting::Lie };
                aggregation_gap(&p, 1.0).unwrap() <= 1e-10
            })
        })),
        ("cli check", Box::new(|| {
            let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/ex33_network.toml");
            let out = netlump_cli(&["check", "--coupling", path.to_str().unwrap()]);
            let text = String::from_utf8_lossy(&out.stdout);
            out.status.code() == Some(0) && text.contains("positivity: yes") && text.contains("markov: yes") && text.contains("kolmogorov (transpose form): yes")
        })),
        ("cli transport emit", Box::new(|| {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("solution.csv");
            let out = netlump_cli(&["transport", "--eps", "0.05", "--t", "1.0", "--emit", path.to_str().unwrap()]);
            out.status.code() == Some(0) && std::fs::read_to_string(&path).is_ok_and(|s| s.starts_with("edge,x,value\n"))
        })),
        ("single-eps report", Box::new(|| {
            let r = estimate_order(&[0.1], &[0.3], &[0.4], DEFAULT_BAND).unwrap();
            let csv = report_csv(&r);
            csv.lines().count() == 2 && report_sidecar(&r, "x").fitted_order.is_none()
        })),
        ("report round trip", Box::new(|| {
            let e = [0.2, 0.1, 0.05];
            let l1 = [0.123456789012345678, 1.0 / 3.0, 2.0f64.sqrt() * 1e-3];
            let sup = [0.5, 0.25, PI];
            let r = estimate_order(&e, &l1, &sup, DEFAULT_BAND).unwrap();
            let back = parse_report_csv(&report_csv(&r)).unwrap();
            back.iter().zip(e.iter().zip(l1.iter().zip(&sup))).all(|(b, (x, (y, z)))| b.0 == *x && b.1 == *y && b.2 == *z)
        })),
    ]
}

fn criterion_10() -> Check {
    let table = trivial_examples();
    let failed: Vec<&str> = table
        .iter()
        .filter(|(_, f)| !std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or(false))
        .map(|(name, _)| *name)
        .collect();
    let detail = if failed.is_empty() {
        format!("{} trivial examples pass; derived oracles run in the other test targets", table.len())
    } else {
        format!("{} of {} trivial examples failed: {}", failed.len(), table.len(), failed.join(", "))
    };
    outcome(failed.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("diffusion projected order", criterion_1),
        ("diffusion full expansion order", criterion_2),
        ("diffusion layer decay", criterion_3),
        ("transport projected order", criterion_4),
        ("transport layer structure", criterion_5),
        ("exact vs upwind", criterion_6),
        ("stochastic mass invariance", criterion_7),
        ("structural checks", criterion_8),
        ("population aggregation", criterion_9),
        ("unit invariant suite", criterion_10),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match f() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.2}s]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 passed in {:.1}s", 10 - failures, start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
