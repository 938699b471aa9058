//! End-to-end behavior of the Nyström solver against independent checks.

use volterra_exec::oracle::{mc_objective, oracle_strategy, perturbation_test, NystromRule, Twap, PERTURBATION_STEPS};
use volterra_exec::signals::simulate_ou_path;
use volterra_exec::{
    nu_matrix, price_from_signal, solve_scenario, Grid, Kernel, NystromSolver, OuSignal, Scenario, ScenarioParams,
    SignalModel, TimeGrid,
};

fn baseline() -> Scenario {
    Scenario::new(10.0, 10.0, 0.5, 4.0, 0.0).unwrap()
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    num / b.iter().fold(0.0f64, |m, y| m.max(y.abs()))
}

#[test]
fn gap_to_oracle_halves_with_the_step() {
    let p = baseline();
    for kernel in [Kernel::exponential(1.0, 0.5).unwrap(), Kernel::fractional(1.0, 0.75).unwrap()] {
        let s = SignalModel::ou(-2.0, 0.3, 0.0).unwrap();
        let gaps: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&n| {
                let g = Grid::uniform(10.0, n).unwrap();
                let u = solve_scenario(&p, &kernel, &s, &g, 0).unwrap().path.speed;
                let q = oracle_strategy(&p, &kernel, &s, &g).unwrap();
                assert_eq!(q.len(), n + 1);
                sup_gap(&u[..n], &q[..n])
            })
            .collect();
        for w in gaps.windows(2) {
            assert!(w[0] / w[1] >= 1.8, "{}: gaps {gaps:?}", kernel.name());
        }
    }
}

#[test]
fn refinement_converges_monotonically() {
    // successive differences of u at a fixed time shrink as the grid refines
    let p = baseline();
    let k = Kernel::exponential(1.0, 0.5).unwrap();
    let s = SignalModel::ou(2.0, 0.3, 0.0).unwrap();
    let at_half: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&n| solve_scenario(&p, &k, &s, &Grid::uniform(10.0, n).unwrap(), 0).unwrap().path.speed[n / 2])
        .collect();
    let diffs: Vec<f64> = at_half.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{at_half:?}");
}

#[test]
fn ou_sample_mean_matches_exact_mean() {
    let ou = OuSignal::new(2.0, 0.3, 0.5).unwrap();
    let g = Grid::uniform(10.0, 50).unwrap();
    let paths: Vec<Vec<f64>> = (0..4000).map(|k| simulate_ou_path(&ou, &g, 7, k)).collect();
    for i in [0, 10, 25, 50] {
        let xs: Vec<f64> = paths.iter().map(|p| p[i]).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let se = (var / xs.len() as f64).sqrt();
        let exact = 2.0 * (-0.3 * g.time(i)).exp();
        assert!((m - exact).abs() <= 4.0 * se + 1e-12, "i={i}: {m} vs {exact} (se {se})");
    }
}

#[test]
fn nu_diagonal_matches_simulated_price_change() {
    let s = SignalModel::ou(2.0, 0.3, 0.5).unwrap();
    let g = Grid::uniform(10.0, 400).unwrap();
    let n = g.steps();
    let path0 = s.realize(&g, 3, 0).unwrap();
    let n00 = nu_matrix(&s, &path0, &g).unwrap().get(0, 0);
    let moves: Vec<f64> = (0..4000)
        .map(|k| {
            let price = price_from_signal(&s.realize(&g, 3, k).unwrap(), &g).unwrap();
            price[0] - price[n]
        })
        .collect();
    let m = moves.iter().sum::<f64>() / moves.len() as f64;
    let var = moves.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (moves.len() - 1) as f64;
    let se = (var / moves.len() as f64).sqrt();
    // left-point sum of the exact mean, then its continuous limit
    let dt = g.dt();
    let discrete: f64 = -(0..n).map(|j| 2.0 * (-0.3 * j as f64 * dt).exp() * dt).sum::<f64>();
    assert!((m - discrete).abs() <= 4.0 * se, "{m} vs {discrete} (se {se})");
    assert!((discrete - n00).abs() <= 2.0 * dt * 2.0, "{discrete} vs {n00}");
}

#[test]
fn nystrom_beats_twap_in_expectation() {
    let p = baseline();
    let g = Grid::uniform(10.0, 128).unwrap();
    for kernel in [Kernel::exponential(1.0, 0.5).unwrap(), Kernel::fractional(1.0, 0.55).unwrap()] {
        for i0 in [-2.0, 2.0] {
            let s = SignalModel::ou(i0, 0.3, 0.5).unwrap();
            let rule = NystromRule::new(NystromSolver::new(&p, &kernel, &g).unwrap(), s.clone());
            let ours = mc_objective(&p, &kernel, &s, &g, &rule, 400, 5).unwrap();
            let twap = mc_objective(&p, &kernel, &s, &g, &Twap::new(&p, &g), 400, 5).unwrap();
            assert!(
                ours.mean >= twap.mean - 2.0 * twap.stderr,
                "{} I0={i0}: {} < {}",
                kernel.name(),
                ours.mean,
                twap.mean
            );
        }
    }
}

#[test]
fn noise_free_perturbations_never_improve() {
    // without noise the estimate is exact; allow rounding in J only
    let p = baseline();
    let g = Grid::uniform(10.0, 128).unwrap();
    for kernel in [Kernel::exponential(1.0, 0.5).unwrap(), Kernel::fractional(1.0, 0.55).unwrap()] {
        let s = SignalModel::ou(2.0, 0.3, 0.0).unwrap();
        let r = perturbation_test(&p, &kernel, &s, &g, 1, 10, 0, &PERTURBATION_STEPS, 1e-9).unwrap();
        assert!(r.pass, "{}: {:?}", kernel.name(), r.worst());
        assert!(r.entries.iter().all(|e| e.stderr == 0.0));
    }
}

#[test]
fn tabulated_signal_with_its_nu_reproduces_ou() {
    let p = baseline();
    let g = Grid::uniform(10.0, 256).unwrap();
    let k = Kernel::exponential(1.0, 0.5).unwrap();
    let ou = SignalModel::ou(1.5, 0.4, 0.0).unwrap();
    let values = ou.realize(&g, 0, 0).unwrap();
    let nu = nu_matrix(&ou, &values, &g).unwrap().matrix().clone();
    let tab = SignalModel::TabulatedPath { values, nu: Some(nu) };
    let a = solve_scenario(&p, &k, &ou, &g, 0).unwrap().path.speed;
    let b = solve_scenario(&p, &k, &tab, &g, 0).unwrap().path.speed;
    assert_eq!(a, b);
}

#[test]
fn single_precision_smoke() {
    let p: ScenarioParams<f32> = ScenarioParams::new(10.0, 10.0, 0.5, 4.0, 0.0).unwrap();
    let g: TimeGrid<f32> = TimeGrid::uniform(10.0, 200).unwrap();
    let k = volterra_exec::Propagator::<f32>::exponential(1.0, 0.5).unwrap();
    let s = SignalModel::<f32>::ou(2.0, 0.3, 0.0).unwrap();
    let single = solve_scenario(&p, &k, &s, &g, 0).unwrap().path.speed;
    let double = solve_scenario(
        &baseline(),
        &Kernel::exponential(1.0, 0.5).unwrap(),
        &SignalModel::ou(2.0, 0.3, 0.0).unwrap(),
        &Grid::uniform(10.0, 200).unwrap(),
        0,
    )
    .unwrap()
    .path
    .speed;
    let gap = single.iter().zip(&double).fold(0.0f64, |m, (a, b)| m.max((*a as f64 - b).abs()));
    assert!(gap < 1e-3, "{gap}");

    let z = solve_scenario(&p, &volterra_exec::Propagator::<f32>::Zero, &SignalModel::Zero, &g, 0).unwrap();
    assert!(z.path.speed.iter().all(|u| (u - 40.0 / 40.5).abs() < 1e-4));
}
