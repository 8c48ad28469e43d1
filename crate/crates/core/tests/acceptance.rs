//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::LN_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use redi::analysis::{
    conditional_tc_exact, conditional_tc_plugin, eval_generation, evaluate_law, plugin_tc_at_root, tc_at_root,
    tc_joint_divergence, GenerationMode, DEFAULT_SUPPORT_CAP,
};
use redi::coupling::Side;
use redi::rectify::battery::battery_case;
use redi::rectify::{
    build_fig1, fig1_target, monotonicity_battery, rectify_exact, rectify_sampled, BatterySettings, Fig1Coupling,
    OneStepModel, RectifyConfig,
};
use redi::{AlphaSchedule, PairCoupling, PathMode, ProbabilityPath, RngSpec, Sampler, TimeGrid};

use common::*;

/// Plug-in band on π0 (5000 roots, 10 samples per root): mean ± 5 sd of 20 calibration runs, seeds 100..120.
const PLUGIN_BAND: (f64, f64) = (
    0.6400761228810586 - 5.0 * 0.0008635240477981073,
    0.6400761228810586 + 5.0 * 0.0008635240477981073,
);

struct Outcome {
    pass: bool,
    detail: String,
}

fn linear() -> ProbabilityPath {
    ProbabilityPath::new(AlphaSchedule::Linear, PathMode::Coordinatewise)
}

fn exact_tc(c: &PairCoupling) -> f64 {
    conditional_tc_exact(&linear(), c, 0.0, 1.0, DEFAULT_SUPPORT_CAP)
        .unwrap()
        .value_nats
}

fn report_dir() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

fn criterion_1() -> Outcome {
    let pi0 = build_fig1(Fig1Coupling::Pi0);
    let pi1 = build_fig1(Fig1Coupling::Pi1);
    let path = linear();
    let x = st(pi0.space(), "00");
    let joint = path.exact_transition(&pi0, &x, 0.0, 1.0).unwrap().prob(&x);
    let product = path.factorized_transition(&pi0, &x, 0.0, 1.0).unwrap().prob(&x);
    let (tc0, tc1) = (exact_tc(&pi0), exact_tc(&pi1));
    let brute = conditional_tc(&pi0, AlphaSchedule::Linear, PathMode::Coordinatewise, 0.0, 1.0);
    let pass = (joint - 0.5).abs() < 1e-15
        && (product - 0.25).abs() < 1e-15
        && (tc0 - LN_2).abs() < 1e-9
        && (tc0 - brute).abs() < 1e-9
        && tc1.abs() < 1e-12;
    Outcome {
        pass,
        detail: format!("p(00|00)={joint} product={product} TC(pi0)={tc0} TC(pi1)={tc1}"),
    }
}

fn criterion_2() -> Outcome {
    let settings = BatterySettings::default();
    let report = monotonicity_battery(&settings).unwrap();
    let dir = report_dir().join("battery");
    report.write(&dir).unwrap();
    let runs = report.runs.len();
    let mut detail = format!(
        "{} cases x M in {:?}, K={}: {} of {runs} runs monotone, {} violations (report: {})",
        settings.cases,
        settings.steps,
        settings.iterations,
        runs - {
            let mut bad: Vec<(usize, usize)> = report.counterexamples.iter().map(|c| (c.case, c.steps)).collect();
            bad.dedup();
            bad.len()
        },
        report.counterexamples.len(),
        dir.display()
    );
    if let Some(worst) = report
        .counterexamples
        .iter()
        .max_by(|a, b| (a.tc_after - a.tc_before).total_cmp(&(b.tc_after - b.tc_before)))
    {
        detail.push_str(&format!(
            "; largest: case {} M={} k={} TC {} -> {}",
            worst.case, worst.steps, worst.k, worst.tc_before, worst.tc_after
        ));
    }
    // Recompute one violation with the switch-time oracle, independently of the library's sampler.
    if let Some(ce) = report.counterexamples.iter().find(|ce| {
        all_states(ce.coupling_before.space())
            .iter()
            .all(|x| ce.coupling_before.marginal(Side::Source).prob(x) > 0.0)
    }) {
        let c = &ce.coupling_before;
        let space = *c.space();
        let mut entries = Vec::new();
        for (x0, p) in c.marginal(Side::Source).iter() {
            let row = factorized_composition(c, AlphaSchedule::Linear, PathMode::Coordinatewise, x0, ce.steps).unwrap();
            for (k, q) in row.into_iter().enumerate() {
                if p * q > 0.0 {
                    entries.push(redi::CouplingEntry::new(x0.clone(), space.state_at(k), p * q));
                }
            }
        }
        let next = PairCoupling::from_entries(space, entries).unwrap();
        let before = conditional_tc(c, AlphaSchedule::Linear, PathMode::Coordinatewise, 0.0, 1.0);
        let after = conditional_tc(&next, AlphaSchedule::Linear, PathMode::Coordinatewise, 0.0, 1.0);
        detail.push_str(&format!(
            "; oracle recheck of case {} M={} k={}: TC {before} -> {after}",
            ce.case, ce.steps, ce.k
        ));
    }
    Outcome {
        pass: report.is_monotone(),
        detail,
    }
}

fn criterion_3() -> Outcome {
    let settings = BatterySettings {
        steps: vec![1],
        ..BatterySettings::default()
    };
    let report = monotonicity_battery(&settings).unwrap();
    let worst = report
        .runs
        .iter()
        .flat_map(|r| r.tc_curve[1..].iter().copied())
        .fold(0.0f64, f64::max);
    Outcome {
        pass: worst <= 1e-12,
        detail: format!(
            "{} couplings, max TC after M=1 rectification {worst:e}",
            report.runs.len()
        ),
    }
}

/// Seeds per pair count; the gap at one seed is a noisy draw, so the mean absolute gap is compared.
const SATURATION_SEEDS: u64 = 8;

fn criterion_4() -> Outcome {
    let settings = BatterySettings::default();
    let mut instances: Vec<(String, PairCoupling, usize)> =
        vec![("fig1 pi0".into(), build_fig1(Fig1Coupling::Pi0), 16)];
    // The first three battery couplings whose exact rectification keeps some TC;
    // a coupling rectified to TC 0 by every sampler has no gap to shrink.
    for case in 0.. {
        if instances.len() == 4 {
            break;
        }
        let c = battery_case(&settings, case).unwrap();
        if exact_tc(&rectify_exact(&c, &RectifyConfig::exact(4).unwrap()).unwrap()) > 1e-9 {
            instances.push((format!("battery case {case}"), c, 4));
        }
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, c, steps) in &instances {
        let exact = exact_tc(&rectify_exact(c, &RectifyConfig::exact(*steps).unwrap()).unwrap());
        let gaps: Vec<f64> = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&pairs| {
                let total: f64 = (0..SATURATION_SEEDS)
                    .map(|seed| {
                        let cfg =
                            RectifyConfig::sampled(*steps, pairs as usize, RngSpec::new(seed, "saturation", pairs))
                                .unwrap();
                        (exact_tc(&rectify_sampled(c, &cfg).unwrap()) - exact).abs()
                    })
                    .sum();
                total / SATURATION_SEEDS as f64
            })
            .collect();
        pass &= gaps.windows(2).all(|w| w[1] < w[0]);
        parts.push(format!(
            "{name} M={steps}: {:.2e} {:.2e} {:.2e}",
            gaps[0], gaps[1], gaps[2]
        ));
    }
    Outcome {
        pass,
        detail: format!(
            "mean |TC gap| over {SATURATION_SEEDS} seeds at P=1e3,1e4,1e5: {}",
            parts.join("; ")
        ),
    }
}

fn criterion_5() -> Outcome {
    let pi0 = build_fig1(Fig1Coupling::Pi0);
    let path = linear();
    let est = conditional_tc_plugin(&path, &pi0, 0.0, 1.0, 5000, 10, &RngSpec::new(1, "tc", 0))
        .unwrap()
        .value_nats;
    let in_band = est >= PLUGIN_BAND.0 && est <= PLUGIN_BAND.1;
    let oracle = expected_binary_plugin_entropy(10);
    let x = st(pi0.space(), "00");
    let forced = plugin_tc_at_root(&path, &pi0, &x, 0.0, 1.0, 100_000, &RngSpec::new(1, "forced-root", 0)).unwrap();
    let exact = tc_at_root(&path, &pi0, &x, 0.0, 1.0).unwrap();
    let err = (forced - exact).abs();
    Outcome {
        pass: in_band && err < 0.01,
        detail: format!(
            "plugin {est} in band [{:.5}, {:.5}] (binomial oracle {oracle:.5}, ln 2 = {LN_2:.5}); forced root 1e5 samples error {err:.2e}",
            PLUGIN_BAND.0, PLUGIN_BAND.1
        ),
    }
}

fn criterion_6() -> Outcome {
    let pi0 = build_fig1(Fig1Coupling::Pi0);
    let target = fig1_target();
    let sampler = Sampler::new(linear(), 1.0).unwrap();
    let tv_at = |m: usize| {
        eval_generation(
            &pi0,
            &TimeGrid::uniform(m).unwrap(),
            &target,
            &sampler,
            &GenerationMode::ExactCompose,
        )
        .unwrap()
        .tv_to_target
    };
    let (tv1, tv16) = (tv_at(1), tv_at(16));
    let one_step_tv = |c: &PairCoupling| {
        let law = OneStepModel::fit(c).unwrap().generated_law(1.0).unwrap();
        evaluate_law(&law, &target, 1).unwrap().tv_to_target
    };
    let rectified = rectify_exact(&pi0, &RectifyConfig::exact(16).unwrap()).unwrap();
    let (before, after) = (one_step_tv(&pi0), one_step_tv(&rectified));
    Outcome {
        pass: tv16 < tv1 && after < before,
        detail: format!("tv M=1 {tv1}, M=16 {tv16}; one-step tv pi0 {before}, rectified {after}"),
    }
}

fn seeded_couplings() -> Vec<PairCoupling> {
    let settings = BatterySettings::default();
    (0..40).map(|i| battery_case(&settings, i).unwrap()).collect()
}

fn full_source(c: &PairCoupling) -> bool {
    all_states(c.space())
        .iter()
        .all(|x| c.marginal(Side::Source).prob(x) > 0.0)
}

fn cli_outputs(dir: &Path, threads: &str) -> Vec<Vec<u8>> {
    let commands: [&[&str]; 9] = [
        &["make", "fig1-pi0", "--out", "pi0.redi"],
        &[
            "make",
            "random",
            "--n",
            "3",
            "--d",
            "3",
            "--support",
            "20",
            "--seed",
            "7",
            "--out",
            "r.redi",
        ],
        &["tc", "pi0.redi", "--method", "plugin", "--seed", "1"],
        &["tc", "r.redi", "--t", "0.25", "--s", "0.75"],
        &[
            "rectify", "pi0.redi", "--method", "sampled", "--pairs", "50000", "--steps", "16", "--seed", "9", "--out",
            "run",
        ],
        &["rectify", "r.redi", "--steps", "2", "--k", "2", "--out", "exact"],
        &[
            "eval",
            "r.redi",
            "--sampler",
            "mc",
            "--n",
            "5000",
            "--seed",
            "2",
            "--target",
            "uniform",
        ],
        &["onestep", "pi0.redi", "--n", "20000", "--seed", "4", "--out", "s.txt"],
        &["sample", "r.redi", "--n", "200", "--seed", "5", "--out", "t.txt"],
    ];
    let mut out = Vec::new();
    for args in commands {
        let o = Command::new(env!("CARGO_BIN_EXE_redi"))
            .current_dir(dir)
            .args(["--threads", threads])
            .args(args)
            .output()
            .unwrap();
        assert!(o.status.success(), "{args:?} failed");
        out.push(o.stdout);
    }
    for file in [
        "pi0.redi",
        "r.redi",
        "run/pi_0.redi",
        "run/pi_1.redi",
        "run/tc_curve.csv",
        "exact/pi_2.redi",
        "exact/tc_curve.csv",
        "s.txt",
        "t.txt",
    ] {
        out.push(fs::read(dir.join(file)).unwrap());
    }
    out
}

fn criterion_7() -> Outcome {
    let couplings = seeded_couplings();
    let probes = [0.0, 0.2, 0.5, 0.8, 1.0];
    let mut worst = [0.0f64; 5];
    for c in &couplings {
        worst[0] = worst[0].max((c.total_weight() - 1.0).abs());
        worst[0] = worst[0].max(if c.clone().normalize().unwrap() == *c { 0.0 } else { 1.0 });
        let space = *c.space();
        for (a, &t) in probes.iter().enumerate() {
            for &s in &probes[a + 1..] {
                let path = linear();
                let p_t = path_marginal(c, AlphaSchedule::Linear, PathMode::Coordinatewise, t);
                let p_s = path_marginal(c, AlphaSchedule::Linear, PathMode::Coordinatewise, s);
                let mut pushed = vec![0.0; p_s.len()];
                for x in all_states(&space) {
                    let w = p_t[space.index_of(&x)];
                    if w == 0.0 {
                        continue;
                    }
                    let joint = path.exact_transition(c, &x, t, s).unwrap();
                    for (y, p) in joint.iter() {
                        pushed[space.index_of(y)] += w * p;
                    }
                    let fact = path.factorized_transition(c, &x, t, s).unwrap();
                    for i in 0..space.n() {
                        let m = joint.coordinate_marginal(i);
                        for v in 0..space.d() {
                            worst[2] = worst[2].max((m[v] - fact.table(i)[v]).abs());
                        }
                    }
                }
                for (x, y) in pushed.iter().zip(&p_s) {
                    worst[1] = worst[1].max((x - y).abs());
                }
            }
        }
        worst[3] = worst[3].max((tc_joint_divergence(c) - exact_tc(c)).abs());
        if full_source(c) {
            let r = rectify_exact(c, &RectifyConfig::exact(2).unwrap()).unwrap();
            let (a, b) = (c.marginal(Side::Source), r.marginal(Side::Source));
            for x in all_states(&space) {
                worst[4] = worst[4].max((a.prob(&x) - b.prob(&x)).abs());
            }
        }
    }
    let base = report_dir().join("cli");
    let _ = fs::remove_dir_all(&base);
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| base.join(d)).collect();
    for d in &dirs {
        fs::create_dir_all(d).unwrap();
    }
    let a = cli_outputs(&dirs[0], "1");
    let b = cli_outputs(&dirs[1], "4");
    let c = cli_outputs(&dirs[2], "1");
    let deterministic = a == b && a == c;
    let pass = worst[0] <= 1e-12 && worst[1..].iter().all(|&w| w <= 1e-12) && deterministic;
    Outcome {
        pass,
        detail: format!(
            "{} couplings: normalization {:.1e}, total probability {:.1e}, factorized marginals {:.1e}, single-KL identity {:.1e}, source marginal {:.1e}; CLI byte-identical across runs and thread counts: {deterministic}",
            couplings.len(),
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            worst[4]
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 7] = [
        ("fig1 golden values", criterion_1, Duration::from_secs(1)),
        (
            "TC nonincreasing under exact rectification",
            criterion_2,
            Duration::from_secs(120),
        ),
        ("one-step rectification zeroes TC", criterion_3, Duration::from_secs(30)),
        ("sampled rectifier saturation", criterion_4, Duration::from_secs(120)),
        ("plug-in estimator fidelity", criterion_5, Duration::from_secs(60)),
        ("multi-step quality ordering", criterion_6, Duration::from_secs(10)),
        (
            "property suites and CLI determinism",
            criterion_7,
            Duration::from_secs(600),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} - {name} ({:.2}s, budget {}s) - {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
