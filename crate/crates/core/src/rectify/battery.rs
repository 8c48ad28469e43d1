//! Seeded battery probing whether conditional TC is nonincreasing under
//! repeated exact rectification.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::coupling::PairCoupling;
use crate::error::Result;
use crate::io::format_coupling;
use crate::rng::RngSpec;
use crate::space::StateSpace;

use super::builders::build_random;
use super::iterate::redi_iterate;
use super::rectifier::RectifyConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct BatterySettings {
    pub cases: usize,
    pub max_n: usize,
    pub max_d: usize,
    pub steps: Vec<usize>,
    pub iterations: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for BatterySettings {
    fn default() -> Self {
        Self {
            cases: 100,
            max_n: 3,
            max_d: 3,
            steps: vec![1, 2, 4],
            iterations: 4,
            seed: 2024,
            tolerance: 1e-9,
        }
    }
}

/// One random coupling run for one step count.
#[derive(Debug, Clone)]
pub struct BatteryRun {
    pub case: usize,
    pub steps: usize,
    pub coupling: PairCoupling,
    pub tc_curve: Vec<f64>,
    /// Couplings `pi_0 .. pi_K`, kept so counterexamples can be dumped.
    pub couplings: Vec<PairCoupling>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub case: usize,
    pub n: usize,
    pub d: usize,
    pub support: usize,
    pub steps: usize,
    pub k: usize,
    pub tc_before: f64,
    pub tc_after: f64,
    pub coupling_before: PairCoupling,
}

#[derive(Debug, Clone)]
pub struct BatteryReport {
    pub settings: BatterySettings,
    pub runs: Vec<BatteryRun>,
    pub counterexamples: Vec<Counterexample>,
}

/// Draws the `(space, support size)` of case `i`.
pub fn battery_case(settings: &BatterySettings, i: usize) -> Result<PairCoupling> {
    let spec = RngSpec::new(settings.seed, "battery-case", i as u64);
    let mut g = spec.rng();
    let n = g.gen_range(2..=settings.max_n.max(2));
    let d = g.gen_range(2..=settings.max_d.max(2));
    let space = StateSpace::new(n, d)?;
    let states = space.require_dense()?;
    let support = g.gen_range(2..=states * states);
    build_random(&space, support, &spec.child("coupling", 0))
}

pub fn monotonicity_battery(settings: &BatterySettings) -> Result<BatteryReport> {
    let jobs: Vec<(usize, usize)> = (0..settings.cases)
        .flat_map(|i| settings.steps.iter().map(move |&m| (i, m)))
        .collect();
    let runs: Vec<BatteryRun> = jobs
        .par_iter()
        .map(|&(case, steps)| {
            let coupling = battery_case(settings, case)?;
            let cfgs = vec![RectifyConfig::exact(steps)?; settings.iterations];
            let run = redi_iterate(&coupling, &cfgs, (0.0, 1.0))?;
            Ok(BatteryRun {
                case,
                steps,
                coupling,
                tc_curve: run.values(),
                couplings: run.couplings,
            })
        })
        .collect::<Result<_>>()?;
    let mut counterexamples = Vec::new();
    for run in &runs {
        for k in 0..run.tc_curve.len() - 1 {
            let (before, after) = (run.tc_curve[k], run.tc_curve[k + 1]);
            if after > before + settings.tolerance {
                counterexamples.push(Counterexample {
                    case: run.case,
                    n: run.coupling.space().n(),
                    d: run.coupling.space().d(),
                    support: run.coupling.len(),
                    steps: run.steps,
                    k,
                    tc_before: before,
                    tc_after: after,
                    coupling_before: run.couplings[k].clone(),
                });
            }
        }
    }
    Ok(BatteryReport {
        settings: settings.clone(),
        runs,
        counterexamples,
    })
}

impl BatteryReport {
    pub fn is_monotone(&self) -> bool {
        self.counterexamples.is_empty()
    }

    /// Per-run TC curves: `case,steps,n,d,support,k,tc_nats`.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("case,steps,n,d,support,k,tc_nats\n");
        for r in &self.runs {
            for (k, v) in r.tc_curve.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{},{k},{v}",
                    r.case,
                    r.steps,
                    r.coupling.space().n(),
                    r.coupling.space().d(),
                    r.coupling.len()
                )
                .unwrap();
            }
        }
        out
    }

    /// `case,steps,n,d,support,k,tc_before,tc_after,increase`.
    pub fn counterexamples_csv(&self) -> String {
        let mut out = String::from("case,steps,n,d,support,k,tc_before,tc_after,increase\n");
        for c in &self.counterexamples {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.case,
                c.steps,
                c.n,
                c.d,
                c.support,
                c.k,
                c.tc_before,
                c.tc_after,
                c.tc_after - c.tc_before
            )
            .unwrap();
        }
        out
    }

    /// Writes `curves.csv`, `counterexamples.csv` and one coupling file per counterexample.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("curves.csv"), self.curves_csv())?;
        fs::write(dir.join("counterexamples.csv"), self.counterexamples_csv())?;
        for c in &self.counterexamples {
            fs::write(
                dir.join(format!("counterexample_case{}_m{}_k{}.redi", c.case, c.steps, c.k)),
                format_coupling(&c.coupling_before),
            )?;
        }
        Ok(())
    }
}
