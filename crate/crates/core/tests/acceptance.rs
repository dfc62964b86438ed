//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see the lines for passing
//! criteria too; cargo always shows them for failing ones).
//!
//! Criteria 6 and 10 are asserted exactly as specified and are expected to
//! fail at desk scale; the analysis lives in the project notes.

use rwre_core::clusters::build_cut_plan;
use rwre_core::envspec::Analytics;
use rwre_core::exact::{
    fit_c7, miss_probability_bound, quenched_mean_k, root_excursion_hit, solver_path_hitting,
    solver_root_excursion,
};
use rwre_core::experiments::{
    lefttail_experiment, minvbar_experiment, phase_scan_ray, rn_experiment, witness_experiment,
};
use rwre_core::spine::{
    ballot_f, excursion_sum_check, local_window_check, mto_check_exact, mto_check_mc_library,
    passage_check, Functional,
};
use rwre_core::{derive_rng, exact::PathStart, Accumulator, EnvironmentSpec, TreeArena, Walker};

struct Criterion {
    id: u32,
    name: &'static str,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Criterion { id, name, checks: Vec::new() }
    }

    fn check(&mut self, pass: bool, detail: String) {
        self.checks.push((detail, pass));
    }

    /// Print the one-line verdict, then assert.
    fn finish(self) {
        let fails: Vec<&str> =
            self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        if fails.is_empty() {
            println!(
                "ACCEPTANCE {:02} {}: PASS ({} checks)",
                self.id,
                self.name,
                self.checks.len()
            );
        } else {
            println!(
                "ACCEPTANCE {:02} {}: FAIL — {}",
                self.id,
                self.name,
                fails.join("; ")
            );
        }
        assert!(
            fails.is_empty(),
            "criterion {:02} {}: {}",
            self.id,
            self.name,
            fails.join("; ")
        );
    }
}

/// Grow to `depth` and freeze, so the walk reflects at the frontier exactly
/// like the first-step solver's boundary.
fn frozen_tree(spec: EnvironmentSpec, seed: u64, label: &str, depth: u32) -> TreeArena {
    let mut arena = TreeArena::new(spec, derive_rng(seed, &["acceptance", label]));
    arena.grow_to_depth(depth).expect("growth within node cap");
    arena.freeze();
    arena
}

#[test]
fn criterion_01_calibration_exactness() {
    let mut c = Criterion::new(1, "calibration exactness");
    for spec in [EnvironmentSpec::sym2(), EnvironmentSpec::gauss2()] {
        let p1 = spec.psi(1.0);
        let d1 = spec.psi_prime(1.0);
        c.check(p1.abs() < 1e-10, format!("{}: |psi(1)| = {:.2e}", spec.name, p1.abs()));
        c.check(d1.abs() < 1e-10, format!("{}: |psi'(1)| = {:.2e}", spec.name, d1.abs()));
    }
    let gauss2 = EnvironmentSpec::gauss2();
    let sigma2 = gauss2.sigma2();
    let ln2 = std::f64::consts::LN_2;
    c.check(
        (sigma2 - 2.0 * ln2).abs() < 1e-6,
        format!("gauss2 sigma^2 = {sigma2:.8} vs 2 log 2"),
    );
    let gt = gauss2.gamma_tilde().unwrap();
    c.check((gt - 4.0 * ln2).abs() < 1e-6, format!("gauss2 gamma = {gt:.8} vs 4 log 2"));
    let analytics = Analytics::build(&gauss2, 8, 3).unwrap();
    let lam_max = [0.02, 0.1, 0.2]
        .iter()
        .map(|&x| analytics.lambda(x).abs())
        .fold(0.0, f64::max);
    c.check(lam_max < 1e-6, format!("gauss2 Cramer series vanishes: max |lambda| = {lam_max:.2e}"));
    c.finish();
}

#[test]
fn criterion_02_many_to_one_identity() {
    let mut c = Criterion::new(2, "many-to-one identity");
    let sym2 = EnvironmentSpec::sym2();
    let lib = Functional::library();
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for f in &lib {
            let (lhs, rhs) = mto_check_exact(&sym2, n, *f).unwrap();
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        }
    }
    c.check(
        worst <= 1e-12,
        format!("sym2 exact enumeration n <= 4, {} functionals: worst rel diff {worst:.2e}", lib.len()),
    );
    let gauss2 = EnvironmentSpec::gauss2();
    let mut rng = derive_rng(20_260_826, &["acceptance", "mto-mc"]);
    let results = mto_check_mc_library(&gauss2, 5, &lib, 1_000_000, &mut rng).unwrap();
    for (f, r) in lib.iter().zip(results) {
        let se = (r.lhs.stderr.powi(2) + r.rhs.stderr.powi(2)).sqrt();
        let diff = (r.lhs.value - r.rhs.value).abs();
        c.check(
            diff <= 3.0 * se,
            format!("gauss2 MC n=5 {f:?}: |{:.5} - {:.5}| = {diff:.2e} vs 3 se = {:.2e}",
                r.lhs.value, r.rhs.value, 3.0 * se),
        );
    }
    c.finish();
}

#[test]
fn criterion_03_hitting_formulas() {
    let mut c = Criterion::new(3, "hitting formulas");
    // 100 trees across the calibrated specs, each at most 1e4 nodes.
    let mut worst = 0.0f64;
    let mut total_nodes_ok = true;
    for i in 0..100u64 {
        let (spec, depth) = match i % 4 {
            0 => (EnvironmentSpec::sym2(), 12),
            1 => (EnvironmentSpec::gauss2(), 12),
            2 => (EnvironmentSpec::boettcher2(), 8),
            _ => (EnvironmentSpec::schroeder13(), 10),
        };
        let arena = frozen_tree(spec, 300 + i, &format!("hit-tree-{i}"), depth);
        total_nodes_ok &= arena.len() <= 10_000;
        // Sample vertices spread over the id range; compare both routes.
        let step = (arena.len() / 20).max(1) as u32;
        let mut z = 1u32;
        while (z as usize) < arena.len() {
            let red = root_excursion_hit(&arena, z).unwrap();
            let sol = solver_root_excursion(&arena, z).unwrap();
            worst = worst.max((red - sol).abs());
            if arena.node(z).depth >= 2 {
                let red_p = rwre_core::path_hitting(&arena, 0, z, PathStart::ParentOfTarget).unwrap();
                let sol_p = solver_path_hitting(&arena, 0, z, PathStart::ParentOfTarget).unwrap();
                worst = worst.max((red_p - sol_p).abs());
            }
            z += step;
        }
    }
    c.check(total_nodes_ok, "every tree within 1e4 nodes".to_string());
    c.check(worst <= 1e-10, format!("reduction vs solver on 100 trees: worst diff {worst:.2e}"));
    // Monte Carlo p_z on 10 trees at 1e5 excursions each.
    let mut mc_worst_sigma = 0.0f64;
    for i in 0..10u64 {
        let mut arena = frozen_tree(EnvironmentSpec::sym2(), 500 + i, &format!("hit-mc-{i}"), 12);
        let z = arena.generation_ids(4).unwrap()[0];
        let p = root_excursion_hit(&arena, z).unwrap();
        let mut walker = Walker::new(derive_rng(500 + i, &["acceptance", "hit-mc-walk"]));
        let excursions = 100_000u64;
        let mut hits = 0u64;
        let mut done = 0u64;
        let mut hit = false;
        let mut last_returns = 0u64;
        while done < excursions {
            walker.step(&mut arena).unwrap();
            if walker.position() == z {
                hit = true;
            }
            let r = walker.returns_to_root();
            if r > last_returns {
                done += 1;
                hits += hit as u64;
                hit = false;
                last_returns = r;
            }
        }
        let p_hat = hits as f64 / excursions as f64;
        let se = (p_hat * (1.0 - p_hat) / excursions as f64).sqrt();
        mc_worst_sigma = mc_worst_sigma.max((p_hat - p).abs() / se);
    }
    c.check(
        mc_worst_sigma <= 3.0,
        format!("excursion MC on 10 trees, 1e5 excursions: worst |p_hat - p| = {mc_worst_sigma:.2} sigma"),
    );
    c.finish();
}

#[test]
fn criterion_04_quenched_mean_identity() {
    let mut c = Criterion::new(4, "quenched mean identity");
    let n_returns = 100u64;
    for t in 0..5u64 {
        let spec = if t % 2 == 0 { EnvironmentSpec::sym2() } else { EnvironmentSpec::gauss2() };
        let mut arena = frozen_tree(spec.clone(), 700 + t, &format!("qmean-{t}"), 12);
        let gens = [2u32, 5, 8];
        let mut accs = vec![Accumulator::new(); gens.len()];
        for rep in 0..500u64 {
            let mut walker =
                Walker::new(derive_rng(700 + t, &["acceptance", "qmean-walk", &format!("rep={rep}")]));
            let out = walker.run_until_returns(&mut arena, n_returns, 50_000_000).unwrap();
            assert!(!out.censored, "walk censored before {n_returns} returns");
            for (gi, &g) in gens.iter().enumerate() {
                accs[gi].push(walker.k_of(&arena, g, n_returns).unwrap() as f64);
            }
        }
        for (gi, &g) in gens.iter().enumerate() {
            let exact = quenched_mean_k(&arena, n_returns, g).unwrap();
            let est = accs[gi].estimate();
            let diff = (est.value - exact).abs();
            c.check(
                diff <= 3.0 * est.stderr,
                format!(
                    "{} tree {t} gen {g}: walker mean {:.4} vs exact {exact:.4} ({:.2} sigma)",
                    spec.name, est.value, diff / est.stderr
                ),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_05_ballot_asymptotics() {
    let mut c = Criterion::new(5, "ballot asymptotics");
    let gauss2 = EnvironmentSpec::gauss2();
    let mut rng = derive_rng(20_260_826, &["acceptance", "ballot"]);
    let grid = [(16usize, 2_000_000u64), (64, 2_000_000), (256, 8_000_000), (1024, 20_000_000)];
    let mut normalized = Vec::new();
    let mut f_values = Vec::new();
    for (m, samples) in grid {
        let est = ballot_f(&gauss2, m, samples, &mut rng).unwrap();
        normalized.push(est.normalized);
        f_values.push(est.f.value);
    }
    let lo = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = normalized.iter().cloned().fold(0.0, f64::max);
    c.check(
        hi / lo <= 4.0,
        format!("F_m (m+1)^1.5 in [{lo:.3}, {hi:.3}], band ratio {:.2} <= 4", hi / lo),
    );
    for k in [1usize, 2] {
        let ratio = f_values[k + 1] / f_values[k];
        c.check(
            (0.7 / 8.0..=1.4 / 8.0).contains(&ratio),
            format!("F_4m/F_m at m = {}: {ratio:.4} in [0.0875, 0.175]", grid[k].0),
        );
    }
    c.finish();
}

#[test]
fn criterion_06_local_window() {
    let mut c = Criterion::new(6, "local window");
    let gauss2 = EnvironmentSpec::gauss2();
    let analytics = Analytics::build(&gauss2, 8, 3).unwrap();
    let mut rng = derive_rng(20_260_826, &["acceptance", "window"]);
    for r in [10.0, 20.0] {
        let w = local_window_check(&gauss2, &analytics, 400, r, 10_000_000, &mut rng).unwrap();
        let ratio = w.empirical.value / w.prediction;
        c.check(
            (ratio - 1.0).abs() <= 0.25,
            format!("m=400 r={r}: empirical/prediction = {ratio:.3} (within 25%)"),
        );
    }
    c.finish();
}

#[test]
fn criterion_07_passage_ratios() {
    let mut c = Criterion::new(7, "passage ratios");
    let gauss2 = EnvironmentSpec::gauss2();
    let mut rng = derive_rng(20_260_826, &["acceptance", "passage"]);
    for &(x, m) in &[(0.0, 1_000usize), (2.0, 10_000)] {
        for &y in &[5.0, 10.0, 20.0, 40.0] {
            let r = passage_check(&gauss2, x, y, m, 200_000, &mut rng).unwrap();
            for (label, v) in [
                ("hit", r.hit_ratio.value),
                ("exit-time", r.exit_time_ratio.value),
                ("survival", r.survival_ratio.value),
            ] {
                c.check(
                    (0.25..=4.0).contains(&v),
                    format!("x={x} y={y} m={m} {label} ratio {v:.3}"),
                );
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_08_excursion_sum_bound() {
    let mut c = Criterion::new(8, "excursion-sum bound");
    let gauss2 = EnvironmentSpec::gauss2();
    let mut rng = derive_rng(20_260_826, &["acceptance", "excursion"]);
    for &a in &[1.0, 2.0, 4.0] {
        for &big_m in &[10.0, 100.0, 1000.0] {
            let e = excursion_sum_check(&gauss2, a, big_m, 400_000, &mut rng).unwrap();
            c.check(
                e.value <= 10.0,
                format!("a={a} M={big_m}: M * P = {:.3} <= 10", e.value),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_09_left_tail() {
    let mut c = Criterion::new(9, "left tail");
    let r = lefttail_experiment(&[(1, 0.5), (3, 0.5)], 20, &[0.2, 0.4, 0.6]).unwrap();
    for v in &r.verdicts {
        c.check(v.pass, format!("{} ({})", v.rule, v.detail));
    }
    let nu = r.summary["fitted_nu"];
    c.check((0.75..=1.25).contains(&nu), format!("fitted nu = {nu:.4} in [0.75, 1.25]"));
    c.finish();
}

#[test]
fn criterion_10_phase_transition() {
    let mut c = Criterion::new(10, "phase transition");
    let gauss2 = EnvironmentSpec::gauss2();
    let zetas = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75];
    let r = phase_scan_ray(&gauss2, 12.0, &zetas, 200_000, 41).unwrap();
    for v in &r.verdicts {
        c.check(v.pass, format!("{} ({})", v.rule, v.detail));
    }
    c.finish();
}

#[test]
fn criterion_11_rn_scale() {
    let mut c = Criterion::new(11, "R_n scale");
    let gauss2 = EnvironmentSpec::gauss2();
    let r = rn_experiment(&gauss2, &[10_000, 100_000, 1_000_000], 100, 40, 61).unwrap();
    for v in &r.verdicts {
        c.check(v.pass, format!("{} ({})", v.rule, v.detail));
    }
    c.finish();
}

#[test]
fn criterion_12_witnesses() {
    let mut c = Criterion::new(12, "cluster witnesses");
    let gauss2 = EnvironmentSpec::gauss2();
    let r = witness_experiment(&gauss2, 1_000_000, 100, 3, 1, 1, 71).unwrap();
    for note in &r.notes {
        println!("  {note}");
    }
    for v in &r.verdicts {
        c.check(v.pass, format!("{} ({})", v.rule, v.detail));
    }
    // The asymptotic-scale plan is reported side by side with the desk parameters.
    c.check(!r.notes.is_empty(), "asymptotic-scale thresholds reported".to_string());
    c.finish();
}

#[test]
fn criterion_13_miss_bound() {
    let mut c = Criterion::new(13, "miss probability bound");
    let depths = [4u32, 6, 8];
    let ns = [100u64, 1000];
    // Calibration split: freeze the constant from 50 trees.
    let mut c7 = f64::INFINITY;
    for i in 0..50u64 {
        let arena = frozen_tree(EnvironmentSpec::sym2(), 900 + i, &format!("c7-train-{i}"), 8);
        for &d in &depths {
            let z = arena.generation_ids(d).unwrap()[0];
            for &n in &ns {
                c7 = c7.min(fit_c7(&arena, z, n).unwrap());
            }
        }
    }
    let frozen_c7 = 0.9 * c7;
    // Assessment split: 50 fresh trees, every grid point must satisfy the bound.
    let mut violations = 0usize;
    let mut cases = 0usize;
    for i in 0..50u64 {
        let arena = frozen_tree(EnvironmentSpec::sym2(), 2_900 + i, &format!("c7-test-{i}"), 8);
        for &d in &depths {
            let z = arena.generation_ids(d).unwrap()[0];
            for &n in &ns {
                let mb = miss_probability_bound(&arena, z, n, frozen_c7).unwrap();
                cases += 1;
                violations += (mb.miss > mb.bound) as usize;
            }
        }
    }
    c.check(
        violations == 0,
        format!("frozen c7 = {frozen_c7:.4}: miss <= bound in {}/{cases} cases", cases - violations),
    );
    c.finish();
}

#[test]
fn criterion_14_determinism() {
    let mut c = Criterion::new(14, "determinism");
    let gauss2 = EnvironmentSpec::gauss2();
    let rerun_matches = |name: &str, a: &rwre_core::experiments::ExperimentReport,
                         b: &rwre_core::experiments::ExperimentReport|
     -> (String, bool) {
        let mut worst = 0.0f64;
        let same_shape = a.rows.len() == b.rows.len();
        if same_shape {
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                for (&va, &vb) in ra.iter().zip(rb) {
                    if va.is_nan() && vb.is_nan() {
                        continue;
                    }
                    worst = worst.max((va - vb).abs() / va.abs().max(1.0));
                }
            }
        }
        (format!("{name}: worst relative re-run difference {worst:.2e}"), same_shape && worst <= 1e-9)
    };
    let m1 = minvbar_experiment(&gauss2, &[27], &[1.5, 2.0], 500, 11).unwrap();
    let m2 = minvbar_experiment(&gauss2, &[27], &[1.5, 2.0], 500, 11).unwrap();
    let (d, ok) = rerun_matches("minvbar", &m1, &m2);
    c.check(ok, d);
    let p1 = phase_scan_ray(&gauss2, 6.0, &[0.5, 1.0], 20_000, 13).unwrap();
    let p2 = phase_scan_ray(&gauss2, 6.0, &[0.5, 1.0], 20_000, 13).unwrap();
    let (d, ok) = rerun_matches("phase-scan", &p1, &p2);
    c.check(ok, d);
    let r1 = rn_experiment(&gauss2, &[2_000, 20_000], 16, 30, 17).unwrap();
    let r2 = rn_experiment(&gauss2, &[2_000, 20_000], 16, 30, 17).unwrap();
    let (d, ok) = rerun_matches("rn-scale", &r1, &r2);
    c.check(ok, d);
    c.finish();
}

#[test]
fn cut_plan_identity_reported() {
    // Companion sanity for the witness criterion: the layering identity of
    // the cut plan holds exactly after integer repair at walk-relevant sizes.
    let gauss2 = EnvironmentSpec::gauss2();
    for zeta in [0.5, 1.2] {
        if let Ok(plan) = build_cut_plan(&gauss2, 40.0, zeta, 0.05, 0.2) {
            assert_eq!(
                plan.k_n as i64 * plan.r_n as i64 + (plan.k_n as i64 - 1) * plan.h_n as i64,
                plan.ell as i64
            );
        }
    }
}
