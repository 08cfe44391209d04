//! End-to-end acceptance checks. Each test prints one PASS/FAIL line; run
//! with `--nocapture` to see them.

use ddtm_core::dynamics::flip_eligible_exact;
use ddtm_core::empirics::chi_square_one_sided;
use ddtm_core::experiments::{results_csv, run_sweep_with, SweepOptions};
use ddtm_core::rng::{stream, SimRng};
use ddtm_core::thresholds::Threshold;
use ddtm_core::{
    build_network, flip_eligible, init_opinions, run_sweep, sample_degree_targets, weighted_in_average, Dynamics,
    Network, Regime, Side, SweepConfig, SweepPoint, ThresholdAssignment,
};
use rand::Rng;

fn report(id: u32, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {detail}");
    assert!(ok, "criterion {id} failed: {detail}");
}

fn sweep(regime: Regime, n: usize, m: u32, n_th: u32, p_grid: Vec<f64>, runs: u32, seed: u64) -> Vec<SweepPoint> {
    let cfg = SweepConfig {
        regime,
        n,
        fixed_degree: m,
        n_th,
        p_grid,
        runs,
        master_seed: seed,
        ..Default::default()
    };
    run_sweep(&cfg).unwrap().points
}

/// 95% interval of the mean.
fn ci(pt: &SweepPoint, runs: u32) -> (f64, f64) {
    let h = 1.96 * pt.std_s_bar / (runs as f64).sqrt();
    (pt.mean_s_bar - h, pt.mean_s_bar + h)
}

#[test]
fn c01_endpoints_are_exact() {
    let mut ok = true;
    let mut detail = Vec::new();
    for regime in [Regime::OutDependent, Regime::InDependent] {
        let pts = sweep(regime, 1000, 15, 10, vec![0.0, 1.0], 50, 3);
        for (pt, want) in pts.iter().zip([0.0, 1.0]) {
            let good = pt.mean_s_bar == want && pt.std_s_bar == 0.0 && pt.mean_t_f == 0.0 && pt.failures == 0;
            ok &= good;
            detail.push(format!("{} p={} s={} sd={} t_f={}", regime.as_str(), pt.p, pt.mean_s_bar, pt.std_s_bar, pt.mean_t_f));
        }
    }
    report(1, ok, format!("endpoints [{}]", detail.join("; ")));
}

fn rescan(net: &Network, thr: &ThresholdAssignment, opinions: &[u8]) -> Vec<u32> {
    (0..net.n())
        .filter(|&i| flip_eligible(opinions[i], weighted_in_average(net, opinions, i), thr.phi()[i]))
        .map(|i| i as u32)
        .collect()
}

#[test]
fn c02_fixed_points_are_sound() {
    let mut rng: SimRng = stream(2, 0);
    let mut mismatches = 0u32;
    let mut unsound = 0u32;
    let mut unfixated = 0u32;
    for k in 0..1000 {
        let n = rng.random_range(2..=12);
        let side = if k % 2 == 0 { Side::In } else { Side::Out };
        let fixed = rng.random_range(1..=4);
        let targets = sample_degree_targets(n, 3.0, side, fixed, &mut rng).unwrap();
        let net = build_network(&targets, &mut rng);
        let n_th = rng.random_range(1..=3u32.min(n as u32));
        let thr = ThresholdAssignment::for_network(&net, side, n_th).unwrap();
        let p = rng.random::<f64>();
        let state = init_opinions(&net, &thr, p, &mut rng).unwrap();
        let mut dynamics = Dynamics::new(&net, &thr, state);
        let mut steps = 0u64;
        loop {
            let st = dynamics.state();
            let mut inc = st.unstable().to_vec();
            inc.sort_unstable();
            if inc != rescan(&net, &thr, st.opinions()) {
                mismatches += 1;
            }
            if st.is_fixated() || steps >= 5000 * n as u64 {
                break;
            }
            dynamics.step(&mut rng).unwrap();
            steps += 1;
        }
        let st = dynamics.state();
        if !st.is_fixated() {
            unfixated += 1;
            continue;
        }
        if (0..n).any(|i| flip_eligible(st.opinions()[i], weighted_in_average(&net, st.opinions(), i), thr.phi()[i])) {
            unsound += 1;
        }
    }
    let ok = mismatches == 0 && unsound == 0 && unfixated == 0;
    report(
        2,
        ok,
        format!("1000 instances: {unsound} unsound fixed points, {mismatches} incremental/rescan mismatches, {unfixated} not fixated"),
    );
}

#[test]
fn c03_threshold_levels() {
    let degrees: Vec<u32> = (0..1000u32).map(|i| (i * 7919) % 97).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for (n_th, want) in [(2u32, vec![0.5, 1.0]), (5, vec![0.5, 0.625, 0.75, 0.875, 1.0])] {
        let rank = ddtm_core::thresholds::rank_degrees(&degrees);
        let a = ddtm_core::assign_thresholds(&rank, n_th).unwrap();
        let mut distinct: Vec<f64> = a.phi().to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        // All levels share one denominator, so the mean is exact.
        let num: u64 = a.levels().iter().map(|t| t.num() as u64).sum();
        let den = a.levels()[0].den() as u64 * 1000;
        assert!(a.levels().iter().all(|t| t.den() == a.levels()[0].den()));
        let levels_ok = distinct == want;
        let mean_ok = 4 * num == 3 * den;
        ok &= levels_ok && mean_ok;
        detail.push(format!("n_th={n_th} levels={distinct:?} mean={}", a.mean_phi()));
    }
    report(3, ok, detail.join("; "));
}

#[test]
fn c04_flip_counts_with_fifteen_neighbours() {
    let expected = [(0.5, 8u32), (0.625, 10), (0.75, 12), (0.875, 14), (1.0, 15)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (g, (phi, want)) in (1u32..=5).zip(expected) {
        let level = Threshold::level(g, 5);
        assert_eq!(level.value(), phi);
        let exact = (0..=15u32).find(|&k| flip_eligible_exact(0, k, 15, level));
        let float = (0..=15u32).find(|&k| flip_eligible(0, Some(k as f64 / 15.0), phi));
        assert_eq!(exact, float);
        ok &= exact == Some(want);
        let got = exact.map_or("none".to_string(), |k| k.to_string());
        detail.push(format!("phi={phi}: {got} (want {want})"));
    }
    report(4, ok, detail.join(", "));
}

#[test]
fn c05_heterogeneity_raises_consensus() {
    let runs = 1000;
    let lo = &sweep(Regime::InDependent, 1000, 15, 2, vec![0.7], runs, 5)[0];
    let hi = &sweep(Regime::InDependent, 1000, 15, 100, vec![0.7], runs, 5)[0];
    let (_, lo_top) = ci(lo, runs);
    let (hi_bottom, _) = ci(hi, runs);
    let trend = hi.mean_s_bar > lo.mean_s_bar && hi_bottom > lo_top;
    let mags = (hi.mean_s_bar - 0.97).abs() <= 0.10 && (lo.mean_s_bar - 0.84).abs() <= 0.10;
    report(
        5,
        trend && mags,
        format!(
            "s(N_th=100)={:.4}±{:.4}, s(N_th=2)={:.4}±{:.4}; separated={trend}, magnitudes={mags}",
            hi.mean_s_bar, hi.std_s_bar, lo.mean_s_bar, lo.std_s_bar
        ),
    );
}

#[test]
fn c06_larger_networks_reach_less_consensus() {
    let runs = 500;
    let small = &sweep(Regime::InDependent, 1000, 15, 10, vec![0.7], runs, 6)[0];
    let large = &sweep(Regime::InDependent, 5000, 15, 10, vec![0.7], runs, 6)[0];
    let (small_bottom, _) = ci(small, runs);
    let (_, large_top) = ci(large, runs);
    let trend = small.mean_s_bar > large.mean_s_bar && small_bottom > large_top;
    let mags = (small.mean_s_bar - 0.948).abs() <= 0.10 && (large.mean_s_bar - 0.7155).abs() <= 0.10;
    report(
        6,
        trend && mags,
        format!(
            "s(N=1000)={:.4}±{:.4}, s(N=5000)={:.4}±{:.4}; separated={trend}, magnitudes={mags}",
            small.mean_s_bar, small.std_s_bar, large.mean_s_bar, large.std_s_bar
        ),
    );
}

#[test]
fn c07_in_dependent_thresholds_favour_consensus() {
    let grid = vec![0.65, 0.70, 0.75];
    let inn = sweep(Regime::InDependent, 1000, 15, 10, grid.clone(), 1000, 7);
    let out = sweep(Regime::OutDependent, 1000, 15, 10, grid, 1000, 7);
    let mut ok = true;
    let mut detail = Vec::new();
    for (a, b) in inn.iter().zip(&out) {
        let s_ok = a.mean_s_bar >= b.mean_s_bar;
        let t_ok = a.mean_t_f > b.mean_t_f;
        ok &= s_ok && t_ok;
        detail.push(format!(
            "p={:.2}: s in/out {:.4}/{:.4} ({s_ok}), t_f in/out {:.0}/{:.0} ({t_ok})",
            a.p, a.mean_s_bar, b.mean_s_bar, a.mean_t_f, b.mean_t_f
        ));
    }
    report(7, ok, detail.join("; "));
}

#[test]
fn c08_mean_degree_does_not_move_consensus() {
    let grid = vec![0.65, 0.70, 0.75];
    let m10 = sweep(Regime::OutDependent, 1000, 10, 10, grid.clone(), 1000, 8);
    let m20 = sweep(Regime::OutDependent, 1000, 20, 10, grid, 1000, 8);
    let mut ok = true;
    let mut detail = Vec::new();
    for (a, b) in m10.iter().zip(&m20) {
        let pooled = ((a.std_s_bar.powi(2) + b.std_s_bar.powi(2)) / 2.0).sqrt();
        let diff = (a.mean_s_bar - b.mean_s_bar).abs();
        ok &= diff < pooled;
        detail.push(format!("p={:.2}: |Δs|={diff:.4} < {pooled:.4}", a.p));
    }
    report(8, ok, detail.join("; "));
}

/// Textbook Pearson statistic from the full 2x2 table of observed and
/// expected counts.
fn textbook_chi2(a: u64, n1: u64, b: u64, n2: u64) -> f64 {
    let obs = [[a as f64, (n1 - a) as f64], [b as f64, (n2 - b) as f64]];
    let total = (n1 + n2) as f64;
    let rows = [n1 as f64, n2 as f64];
    let cols = [obs[0][0] + obs[1][0], obs[0][1] + obs[1][1]];
    let mut chi2 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let e = rows[r] * cols[c] / total;
            chi2 += (obs[r][c] - e).powi(2) / e;
        }
    }
    chi2
}

#[test]
fn c09_chi_square_matches_textbook() {
    let mut rng: SimRng = stream(9, 0);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 10_000 {
        let n1 = rng.random_range(1..=5000u64);
        let n2 = rng.random_range(1..=5000u64);
        let a = rng.random_range(0..=n1);
        let b = rng.random_range(0..=n2);
        let Some(t) = chi_square_one_sided(a, n1, b, n2, 0.005).unwrap() else {
            continue;
        };
        let want = textbook_chi2(a, n1, b, n2);
        let rel = if want == 0.0 { t.chi2.abs() } else { ((t.chi2 - want) / want).abs() };
        worst = worst.max(rel);
        checked += 1;
    }
    let t = chi_square_one_sided(50, 100, 30, 100, 0.005).unwrap().unwrap();
    let ok = worst < 1e-10 && (t.chi2 - 8.3333).abs() <= 1e-4 && t.p_one_sided < 0.005 && t.significant;
    report(
        9,
        ok,
        format!("max rel err {worst:.2e} over 10^4 tables; 50/100 vs 30/100: chi2={:.6}, p={:.5}", t.chi2, t.p_one_sided),
    );
}

#[test]
fn c10_reruns_are_byte_identical() {
    let mut ok = true;
    let mut detail = Vec::new();
    for regime in [Regime::InDependent, Regime::OutDependent] {
        let cfg = SweepConfig {
            regime,
            n: 300,
            runs: 40,
            master_seed: 10,
            ..Default::default()
        };
        for k in [1usize, 4] {
            let opts = SweepOptions { threads: Some(k), trace_dir: None };
            let first = results_csv(&[run_sweep_with(&cfg, &opts).unwrap()]);
            let second = results_csv(&[run_sweep_with(&cfg, &opts).unwrap()]);
            let same = first.as_bytes() == second.as_bytes();
            ok &= same;
            detail.push(format!("{} k={k}: {}", regime.as_str(), if same { "identical" } else { "differs" }));
        }
    }
    report(10, ok, detail.join(", "));
}
