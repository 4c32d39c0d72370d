use proptest::prelude::*;

use rankflow::engine::INIT_STREAM;
use rankflow::quad::{integrate, Tolerance};
use rankflow::special::normal_quantile;
use rankflow::*;

fn burgers_config(n: usize, h: f64, seed: u64) -> Config {
    Config::new(n, h, 1.0, 0.2f64.sqrt()).with_seed(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cdf_form_equals_quantile_form(
        pairs in (1usize..60).prop_flat_map(|n| (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        ))
    ) {
        let (a, b) = pairs;
        let x = w1_cdf_form(&a, &b).unwrap();
        let y = w_rho_empirical(&a, &b, 1.0).unwrap();
        prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
    }

    #[test]
    fn wasserstein_is_a_metric(
        triple in (1usize..40).prop_flat_map(|n| (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
        )),
        rho in prop::sample::select(vec![1.0f64, 2.0]),
    ) {
        let (a, b, c) = triple;
        let ab = w_rho_empirical(&a, &b, rho).unwrap();
        prop_assert!((ab - w_rho_empirical(&b, &a, rho).unwrap()).abs() <= 1e-12);
        prop_assert!(w_rho_empirical(&a, &a, rho).unwrap() == 0.0);
        let ac = w_rho_empirical(&a, &c, rho).unwrap();
        let bc = w_rho_empirical(&b, &c, rho).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn rank_counts_match_brute_force(xs in prop::collection::vec(0u8..8, 1..50)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let brute: Vec<usize> = xs.iter().map(|x| xs.iter().filter(|y| *y <= x).count()).collect();
        prop_assert_eq!(rank_counts(&xs), brute);
        let mut ord = ordinal_ranks(&xs);
        ord.sort_unstable();
        prop_assert_eq!(ord, (1..=xs.len()).collect::<Vec<_>>());
    }

    #[test]
    fn sorted_view_preserves_the_empirical_measure(xs in prop::collection::vec(-1e3f64..1e3, 0..80)) {
        let sorted = sorted_view(&xs);
        prop_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        let mut a: Vec<u64> = xs.iter().map(|x| x.to_bits()).collect();
        let mut b: Vec<u64> = sorted.iter().map(|x| x.to_bits()).collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rank_coefficients_telescope(n in 1usize..1_000_000, which in 0usize..3) {
        let flux = match which {
            0 => Flux::burgers(),
            1 => Flux::quadratic(),
            _ => Flux::polynomial(vec![0.1, -0.4, 0.3, 0.25]).unwrap(),
        };
        let c = flux.rank_coefficients(n).unwrap();
        let mean: f64 = c.iter().sum::<f64>() / n as f64;
        let expect = flux.eval_capital_lambda(1.0).unwrap() - flux.eval_capital_lambda(0.0).unwrap();
        prop_assert!((mean - expect).abs() <= 1e-12, "N={} {} vs {}", n, mean, expect);
    }

    #[test]
    fn optimal_positions_are_monotone(lo in -5.0f64..5.0, width in 0.01f64..10.0, n in 1usize..200) {
        for law in [
            Distribution::uniform(lo, lo + width).unwrap(),
            Distribution::gaussian(lo, width).unwrap(),
            Distribution::table(vec![lo, lo + width, lo + 2.0 * width], vec![0.2, 0.5, 0.3]).unwrap(),
        ] {
            let xs = optimal_positions(&law, n);
            prop_assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn per_step_drift_is_bounded(n in 2usize..60, seed in any::<u64>(), h in 0.01f64..0.5) {
        let cfg = burgers_config(n, h, seed);
        let noise = cfg.noise();
        let mut sim = Simulator::new(cfg.clone()).unwrap();
        let mut state = sim.initial_ensemble();
        let bound = cfg.flux.sup_abs_lambda() * h;
        let diffusion = cfg.sigma * h.sqrt();
        for k in 0..5u64 {
            let before = state.positions.clone();
            sim.step(&mut state, k, h);
            for (i, (after, prev)) in state.positions.iter().zip(&before).enumerate() {
                let xi: f64 = noise.normal(k * n as u64 + i as u64);
                let drift = after - prev - diffusion * xi;
                prop_assert!(drift.abs() <= bound + 1e-12, "|{}| > {}", drift, bound);
            }
        }
    }
}

#[test]
fn reordering_inequality_on_snapshots() {
    let mut checked = 0;
    for trial in 0..1000u64 {
        let pick = NoiseStream::new(trial);
        let n = 2 + (pick.bits(0) % 60) as usize;
        let steps = 2 + pick.bits(1) % 10;
        let h = 1.0 / steps as f64;
        let cfg = burgers_config(n, h, trial);
        let mut snaps = Vec::new();
        Simulator::new(cfg).unwrap().run_observed(|e| snaps.push(e.positions.clone()));
        let last = snaps.len() - 1;
        let s = (pick.bits(2) % last as u64) as usize;
        let t = s + 1 + (pick.bits(3) % (last - s) as u64) as usize;
        let (xs, xt) = (&snaps[s], &snaps[t]);
        let (ys, yt) = (sorted_view(xs), sorted_view(xt));
        for rho in [1i32, 2] {
            let sorted: f64 = ys.iter().zip(&yt).map(|(a, b)| (b - a).abs().powi(rho)).sum();
            let paired: f64 = xs.iter().zip(xt).map(|(a, b)| (b - a).abs().powi(rho)).sum();
            assert!(sorted <= paired * (1.0 + 1e-12) + 1e-300, "trial {trial} rho {rho}");
        }
        checked += 1;
    }
    assert_eq!(checked, 1000);
}

#[test]
fn second_moment_stays_below_a_priori_bound() {
    // M = 3 (sigma^2 T + L^2 T^2) with L = sup |lambda| = 1
    let bound = 3.0 * (0.2 + 1.0);
    for seed in 0..100 {
        let out = simulate(&burgers_config(200, 0.01, seed)).unwrap();
        let m2 = out.positions.iter().map(|x| x * x).sum::<f64>() / 200.0;
        assert!(m2 < bound, "seed {seed}: {m2}");
    }
}

#[test]
fn schemes_differ_by_a_translation() {
    for n in [10usize, 100] {
        let rank = burgers_config(n, 0.01, 5);
        let frac = rank.clone().with_scheme(DriftScheme::FractionalRank);
        let a = simulate(&rank).unwrap();
        let b = simulate(&frac).unwrap();
        let shift = 1.0 / (2.0 * n as f64);
        for (x, y) in a.positions.iter().zip(&b.positions) {
            assert!((x - y - shift).abs() <= 1e-12, "N={n}: {}", x - y);
        }
    }
}

#[test]
fn iid_initialization_is_unbiased() {
    let n = 5;
    let seeds = 100_000u64;
    let law = Distribution::uniform(0.0, 1.0).unwrap();
    let init = Init::Iid(law.clone());
    for x in [0.1, 0.37, 0.5, 0.9] {
        let total: f64 = (0..seeds)
            .map(|s| empirical_cdf_at(&init.positions(n, &NoiseStream::new(s).derive(INIT_STREAM)), x))
            .sum();
        let mean = total / seeds as f64;
        let f = law.cdf(x);
        let tol = 3.0 * (f * (1.0 - f) / (n as f64 * seeds as f64)).sqrt();
        assert!((mean - f).abs() <= tol, "x={x}: {mean} vs {f}");

        // E[#{X_i <= x}] / N under Binomial(N, F(x))
        let binom = |k: u32| -> f64 {
            let c = (1..=k).fold(1.0, |acc, j| acc * (n as u32 + 1 - j) as f64 / j as f64);
            c * f.powi(k as i32) * (1.0 - f).powi(n as i32 - k as i32)
        };
        let exact: f64 = (0..=n as u32).map(|k| k as f64 * binom(k)).sum::<f64>() / n as f64;
        assert!((exact - f).abs() < 1e-15);
    }
}

#[test]
fn optimal_init_bound_on_compact_support() {
    let laws = [
        Distribution::uniform(0.0, 1.0).unwrap(),
        Distribution::uniform(-2.0, 3.0).unwrap(),
        Distribution::table(vec![-1.0, 0.5, 2.0], vec![0.3, 0.3, 0.4]).unwrap(),
    ];
    for law in &laws {
        let (c, d) = law.support().unwrap();
        for n in [1usize, 2, 10, 100] {
            let w = init_w1_to_m(&optimal_positions(law, n), law).unwrap();
            assert!(w <= (d - c) / (2.0 * n as f64) + 1e-12, "{law:?} N={n}: {w}");
        }
    }
}

fn kernel_quad<F: Fn(f64) -> f64>(f: F, half_width: f64) -> f64 {
    integrate(f, -half_width, half_width, Tolerance::relative(1e-10)).unwrap().value
}

#[test]
fn heat_kernel_norms_by_quadrature() {
    for &sigma in &[0.5, 1.0, 2.0] {
        let k = Kernel::new(sigma).unwrap();
        for &t in &[0.1, 1.0, 4.0] {
            let w = 12.0 * k.spread(t);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
            let l1 = kernel_quad(|x| k.dg_dx(t, x).unwrap().abs(), w);
            assert!(rel(l1, k.dx_l1_norm(t)) <= 1e-6);
            let l2 = kernel_quad(|x| k.g(t, x).unwrap().powi(2), w);
            assert!(rel(l2, k.l2_norm_sq(t)) <= 1e-6);
            let d2 = kernel_quad(|x| k.dg_dx(t, x).unwrap().powi(2), w);
            assert!(rel(d2, k.dx_l2_norm_sq(t)) <= 1e-6);
            // constant path: space first, then time with v = sqrt(t - s)
            let in_space = |v: f64| kernel_quad(|x| k.g(v * v, x).unwrap().powi(2), 12.0 * sigma * v);
            let full = integrate(|v: f64| 2.0 * v * in_space(v), 0.0, t.sqrt(), Tolerance::relative(1e-10))
                .unwrap()
                .value;
            assert!(rel(full, k.squared_time_integral(t)) <= 1e-6, "sigma {sigma} t {t}: {full}");
        }
    }
}

#[test]
fn heat_kernel_solves_heat_equation() {
    let delta = 1e-4;
    for &sigma in &[0.5, 1.0, 2.0] {
        let k = Kernel::new(sigma).unwrap();
        for &t in &[0.1, 1.0, 4.0] {
            for j in -8..=8 {
                let x = j as f64 * 0.5 * k.spread(t);
                let g = |tt: f64, xx: f64| k.g(tt, xx).unwrap();
                let dt = (g(t + delta, x) - g(t - delta, x)) / (2.0 * delta);
                let dxx = (g(t, x + delta) - 2.0 * g(t, x) + g(t, x - delta)) / (delta * delta);
                let r = dt - 0.5 * sigma * sigma * dxx;
                assert!(r.abs() <= 1e-5, "sigma {sigma} t {t} x {x}: {r}");
            }
        }
    }
}

/// `N` i.i.d. draws from the Burgers solution at `t = 1`, sorted.
fn burgers_sample(sol: &Burgers, n: usize, seed: u64) -> Vec<f64> {
    let s = NoiseStream::new(seed);
    sorted_view(&(0..n as u64).map(|i| sol.quantile(1.0, s.uniform(i)).unwrap()).collect::<Vec<_>>())
}

#[test]
fn psi_matches_dense_riemann_sum() {
    let sol = Burgers::from_sigma2(0.2).unwrap();
    let f = |x: f64| sol.cdf(1.0, x).unwrap();
    for seed in 0..3 {
        let ys = burgers_sample(&sol, 1000, seed);
        let psi = psi_grid_free(&ys, f).unwrap();
        let (a, b) = (ys[0], ys[999]);
        let m = 2_000_000;
        let dx = (b - a) / m as f64;
        // dense midpoint sum between the extreme particles, quadrature on the tails
        let riemann: f64 = (0..m)
            .map(|j| {
                let x = a + (j as f64 + 0.5) * dx;
                (empirical_cdf_at_sorted(&ys, x) - f(x)).abs()
            })
            .sum::<f64>()
            * dx;
        let left = integrate(f, a - 50.0, a, Tolerance::relative(1e-10)).unwrap().value;
        let right = integrate(|x| 1.0 - f(x), b, b + 50.0, Tolerance::relative(1e-10)).unwrap().value;
        let oracle = left + riemann + right;
        assert!((psi - oracle).abs() <= 0.02 * oracle, "{psi} vs {oracle}");
    }
}

fn empirical_cdf_at_sorted(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|y| *y <= x) as f64 / sorted.len() as f64
}

#[test]
fn phi_matches_quadrature_oracle() {
    let sol = Burgers::from_sigma2(0.2).unwrap();
    let f = |x: f64| sol.cdf(1.0, x).unwrap();
    // synthetic mean CDF u(F(x)) with u(v) = v + 0.05 sin(2 pi v)
    let bump = |v: f64| 0.05 * (2.0 * std::f64::consts::PI * v).sin();
    let (lo, hi) = (sol.quantile(1.0, 1e-15).unwrap(), sol.quantile(1.0, 1.0 - 1e-15).unwrap());
    let mut cuts = vec![lo, sol.quantile(1.0, 0.5).unwrap(), hi];
    cuts.dedup();
    let oracle: f64 = cuts
        .windows(2)
        .map(|w| {
            integrate(|x| bump(f(x)).abs(), w[0], w[1], Tolerance::relative(1e-11))
                .unwrap()
                .value
        })
        .sum();
    let mut prev_err = f64::INFINITY;
    for k in [50usize, 500, 5000] {
        let grid = Grid::burgers(&sol, 1.0, k).unwrap();
        let u: Vec<f64> = (0..k)
            .map(|j| {
                let v = (2 * j + 1) as f64 / (2 * k) as f64;
                v + bump(v)
            })
            .collect();
        let phi = phi_grid(&u, &grid).unwrap();
        let err = (phi - oracle).abs();
        assert!(err <= 1.0 / k as f64, "K={k}: {phi} vs {oracle}");
        assert!(err < prev_err);
        prev_err = err;
    }
}

#[test]
fn gaussian_initial_law_uses_accurate_quantiles() {
    let law = Distribution::gaussian(1.0, 2.0).unwrap();
    for &u in &[1e-6, 0.01, 0.5, 0.975] {
        let x = law.quantile(u).unwrap();
        assert!((x - (1.0 + 2.0 * normal_quantile(u))).abs() < 1e-12);
        assert!((law.cdf(x) - u).abs() < 1e-9);
    }
}
