use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::ValueEnum;

use crate::analysis::eval::{empirical, eval_generation, evaluate_law, GenerationMode};
use crate::analysis::metrics::{eval_row, metrics_header, tc_row};
use crate::analysis::tc::{conditional_tc_exact, conditional_tc_plugin, DEFAULT_SUPPORT_CAP};
use crate::coupling::{PairCoupling, Side};
use crate::dist::SparseDistribution;
use crate::error::{Error, Result};
use crate::flow::{ProbabilityPath, Sampler};
use crate::io;
use crate::rectify::{
    build_fig1, build_independent, build_masked_source, build_random, fig1_target, redi_iterate, Fig1Coupling,
    OneStepModel, RectifyConfig, RectifyMethod,
};
use crate::rng::RngSpec;
use crate::schedule::TimeGrid;
use crate::space::{SequenceState, StateSpace};

use super::manifest::{parent_dir, RunManifest};
use super::{
    Cli, Command, EvalArgs, MakeArgs, MakeKind, OnestepArgs, PathArgs, RectifyArgs, RectifyMethodArg, SampleArgs,
    SamplerArg, TcArgs, TcMethodArg,
};

pub const SAMPLES_HEADER: &str = "#redi samples v1";
pub const TRAJECTORIES_HEADER: &str = "#redi trajectories v1";

pub(super) fn dispatch(cli: &Cli, argv: &[String]) -> Result<()> {
    let ctx = Ctx { cli, argv };
    match &cli.command {
        Command::Make(a) => ctx.make(a),
        Command::Tc(a) => ctx.tc(a),
        Command::Rectify(a) => ctx.rectify(a),
        Command::Eval(a) => ctx.eval(a),
        Command::Onestep(a) => ctx.onestep(a),
        Command::Sample(a) => ctx.sample(a),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    argv: &'a [String],
}

fn path_of(p: &PathArgs) -> ProbabilityPath {
    ProbabilityPath::new(p.schedule, p.mode)
}

/// Creates the directory an output file will live in.
fn prepare_out(path: &Path) -> Result<()> {
    fs::create_dir_all(parent_dir(path))?;
    Ok(())
}

fn set_path(m: &mut RunManifest, p: &PathArgs) {
    m.set("schedule", p.schedule);
    m.set("path", p.mode);
}

impl Ctx<'_> {
    fn manifest(&self) -> RunManifest {
        let mut m = RunManifest::new(self.argv);
        m.set("dense_cap", self.cli.dense_cap);
        m
    }

    fn load_coupling(&self, path: &Path) -> Result<PairCoupling> {
        Ok(io::read_coupling(path)?.with_dense_cap(self.cli.dense_cap))
    }

    fn load_dist(&self, path: &Path) -> Result<SparseDistribution> {
        Ok(io::read_dist(path)?.with_dense_cap(self.cli.dense_cap))
    }

    /// `uniform`, `fig1` or a distribution file; builtins need a space.
    fn law(&self, spec: &str, space: Option<StateSpace>) -> Result<SparseDistribution> {
        match spec {
            "uniform" => {
                let space = space
                    .ok_or_else(|| Error::Config("`uniform` needs --n and --d or a file on the other side".into()))?;
                SparseDistribution::uniform(space)
            }
            "fig1" => {
                let law = fig1_target().with_dense_cap(self.cli.dense_cap);
                if let Some(space) = space {
                    space.check_same(law.space())?;
                }
                Ok(law)
            }
            file => self.load_dist(Path::new(file)),
        }
    }

    /// Target law for evaluation: `coupling` means the coupling's own target marginal.
    fn eval_target(&self, spec: &str, c: &PairCoupling) -> Result<SparseDistribution> {
        let target = match spec {
            "coupling" => c.marginal(Side::Target),
            other => self.law(other, Some(*c.space()))?,
        };
        c.space().check_same(target.space())?;
        Ok(target)
    }

    fn make(&self, a: &MakeArgs) -> Result<()> {
        let shape = match (a.n, a.d) {
            (Some(n), Some(d)) => Some(StateSpace::with_mask(n, d, a.mask)?.with_dense_cap(self.cli.dense_cap)),
            (None, None) if a.mask.is_none() => None,
            _ => return Err(Error::Config("--n, --d and --mask go together".into())),
        };
        let mut m = self.manifest();
        m.set(
            "kind",
            a.kind
                .to_possible_value()
                .map(|v| v.get_name().to_owned())
                .unwrap_or_default(),
        );
        let c = match a.kind {
            MakeKind::Fig1Pi0 | MakeKind::Fig1Pi1 => {
                if shape.is_some() || a.support.is_some() {
                    return Err(Error::Config("fig1 couplings take no shape or support flags".into()));
                }
                build_fig1(if a.kind == MakeKind::Fig1Pi0 {
                    Fig1Coupling::Pi0
                } else {
                    Fig1Coupling::Pi1
                })
                .with_dense_cap(self.cli.dense_cap)
            }
            MakeKind::Independent => {
                let source_file =
                    (a.source != "uniform" && a.source != "fig1").then(|| self.load_dist(Path::new(&a.source)));
                let source_file = source_file.transpose()?;
                let space = shape.or(source_file.as_ref().map(|d| *d.space()));
                let source = match source_file {
                    Some(d) => d,
                    None => self.law(&a.source, space)?,
                };
                let target = self.law(&a.target, space.or(Some(*source.space())))?;
                m.set("source", &a.source);
                m.set("target", &a.target);
                build_independent(&source, &target)?
            }
            MakeKind::Masked => {
                let space = shape.ok_or_else(|| Error::Config("masked needs --n, --d and --mask".into()))?;
                let target = self.law(&a.target, Some(space))?;
                m.set("r", a.r);
                m.set("target", &a.target);
                build_masked_source(&space, a.r, &target)?
            }
            MakeKind::Random => {
                let space = shape.ok_or_else(|| Error::Config("random needs --n and --d".into()))?;
                let support = a
                    .support
                    .ok_or_else(|| Error::Config("random needs --support".into()))?;
                m.set("support", support);
                m.set("seed", a.seed);
                build_random(&space, support, &RngSpec::new(a.seed, "make-random", 0))?
            }
        };
        m.set("space", c.space());
        prepare_out(&a.out)?;
        io::write_coupling(&a.out, &c)?;
        m.output(&a.out)?;
        m.write_in(&parent_dir(&a.out))?;
        Ok(())
    }

    fn tc(&self, a: &TcArgs) -> Result<()> {
        let c = self.load_coupling(&a.coupling)?;
        let path = path_of(&a.path);
        let report = match a.method {
            TcMethodArg::Exact => conditional_tc_exact(&path, &c, a.t, a.s, DEFAULT_SUPPORT_CAP)?,
            TcMethodArg::Plugin => {
                conditional_tc_plugin(&path, &c, a.t, a.s, a.roots, a.samples, &RngSpec::new(a.seed, "tc", 0))?
            }
        };
        println!("{}{}", metrics_header(), tc_row(&report));
        Ok(())
    }

    fn rectify(&self, a: &RectifyArgs) -> Result<()> {
        let c0 = self.load_coupling(&a.coupling)?;
        if a.k < 1 {
            return Err(Error::Config("--k must be at least 1".into()));
        }
        let method = match a.method {
            RectifyMethodArg::Exact => RectifyMethod::Exact,
            RectifyMethodArg::Sampled => RectifyMethod::Sampled { pairs: a.pairs },
        };
        let base = RectifyConfig {
            schedule: a.path.schedule,
            mode: a.path.mode,
            tau: a.tau,
            method,
            ..RectifyConfig::exact(a.steps)?
        };
        let cfgs: Vec<RectifyConfig> = (0..a.k)
            .map(|k| RectifyConfig {
                rng: RngSpec::new(a.seed, "rectify", k as u64),
                ..base.clone()
            })
            .collect();
        let run = redi_iterate(&c0, &cfgs, (0.0, 1.0))?;

        fs::create_dir_all(&a.out)?;
        let mut m = self.manifest();
        m.input(&a.coupling)?;
        m.set("steps", a.steps);
        m.set("grid", "uniform");
        m.set("k", a.k);
        m.set("method", method);
        m.set("tau", a.tau);
        m.set("seed", a.seed);
        set_path(&mut m, &a.path);
        m.set("tc_t", 0.0);
        m.set("tc_s", 1.0);
        let mut curve = String::from("k,tc_nats,method\n");
        for (k, (c, p)) in run.couplings.iter().zip(&run.tc_curve).enumerate() {
            let file = a.out.join(format!("pi_{k}.redi"));
            io::write_coupling(&file, c)?;
            m.output(&file)?;
            m.set(format!("tc.{k}"), format!("{} {}", p.value_nats, p.method));
            writeln!(curve, "{k},{},{}", p.value_nats, p.method).unwrap();
        }
        let curve_path = a.out.join("tc_curve.csv");
        fs::write(&curve_path, curve)?;
        m.output(&curve_path)?;
        m.write_in(&a.out)?;
        Ok(())
    }

    fn eval(&self, a: &EvalArgs) -> Result<()> {
        let c = self.load_coupling(&a.coupling)?;
        let target = self.eval_target(&a.target, &c)?;
        let grid = TimeGrid::uniform(a.steps)?;
        let sampler = Sampler::new(path_of(&a.path), a.tau)?;
        let (mode, seed) = match a.sampler {
            SamplerArg::Exact => (GenerationMode::ExactCompose, None),
            SamplerArg::Mc => (
                GenerationMode::MonteCarlo {
                    n: a.n,
                    rng: RngSpec::new(a.seed, "eval", 0),
                },
                Some(a.seed),
            ),
        };
        let report = eval_generation(&c, &grid, &target, &sampler, &mode)?;
        println!("{}{}", metrics_header(), eval_row(&report, seed));
        Ok(())
    }

    fn onestep(&self, a: &OnestepArgs) -> Result<()> {
        let c = self.load_coupling(&a.coupling)?;
        let target = self.eval_target(&a.target, &c)?;
        let model = OneStepModel::fit(&c)?;
        let pairs = model.sample(a.n, a.tau, &RngSpec::new(a.seed, "onestep", 0))?;
        let mut text = format!("{SAMPLES_HEADER}\n{}\n", c.space());
        for (x0, x1) in &pairs {
            writeln!(text, "{x0} | {x1}").unwrap();
        }
        let x1s: Vec<SequenceState> = pairs.into_iter().map(|(_, x1)| x1).collect();
        let report = evaluate_law(&empirical(&x1s, *c.space())?, &target, 1)?;
        prepare_out(&a.out)?;
        fs::write(&a.out, text)?;

        let mut m = self.manifest();
        m.input(&a.coupling)?;
        m.set("n", a.n);
        m.set("seed", a.seed);
        m.set("tau", a.tau);
        m.set("target", &a.target);
        m.output(&a.out)?;
        m.write_in(&parent_dir(&a.out))?;
        println!("{}{}", metrics_header(), eval_row(&report, Some(a.seed)));
        Ok(())
    }

    fn sample(&self, a: &SampleArgs) -> Result<()> {
        let c = self.load_coupling(&a.coupling)?;
        let grid = TimeGrid::uniform(a.steps)?;
        let sampler = Sampler::new(path_of(&a.path), a.tau)?;
        let paths = sampler.generate_paths(&c, &grid, a.n, &RngSpec::new(a.seed, "sample", 0))?;
        let times: Vec<String> = grid.times().iter().map(f64::to_string).collect();
        let mut text = format!("{TRAJECTORIES_HEADER}\n{}\ngrid={}\n", c.space(), times.join(","));
        for states in &paths {
            let row: Vec<String> = states.iter().map(ToString::to_string).collect();
            writeln!(text, "{}", row.join(" | ")).unwrap();
        }
        prepare_out(&a.out)?;
        fs::write(&a.out, text)?;

        let mut m = self.manifest();
        m.input(&a.coupling)?;
        m.set("steps", a.steps);
        m.set("n", a.n);
        m.set("tau", a.tau);
        m.set("seed", a.seed);
        set_path(&mut m, &a.path);
        m.output(&a.out)?;
        m.write_in(&parent_dir(&a.out))?;
        Ok(())
    }
}
