//! Repeated rectification with a TC curve.

use crate::analysis::tc::{conditional_tc_exact, conditional_tc_plugin, TcMethod, DEFAULT_SUPPORT_CAP};
use crate::coupling::PairCoupling;
use crate::error::{Error, Result};
use crate::flow::ProbabilityPath;
use crate::rng::RngSpec;

use super::rectifier::{rectify, RectifyConfig};

/// Plug-in settings used when exact TC is infeasible.
pub const FALLBACK_ROOTS: usize = 5000;
pub const FALLBACK_SAMPLES_PER_ROOT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcPoint {
    pub value_nats: f64,
    pub method: TcMethod,
}

/// Couplings `pi_0 .. pi_K` and their conditional TC values.
#[derive(Debug, Clone)]
pub struct RediRun {
    pub couplings: Vec<PairCoupling>,
    pub tc_curve: Vec<TcPoint>,
    pub configs: Vec<RectifyConfig>,
    pub tc_at: (f64, f64),
}

impl RediRun {
    pub fn values(&self) -> Vec<f64> {
        self.tc_curve.iter().map(|p| p.value_nats).collect()
    }
}

/// TC of `c` at `(t, s)`, exact when the intermediate support fits, plug-in otherwise.
pub fn measure_tc(path: &ProbabilityPath, c: &PairCoupling, tc_at: (f64, f64), rng: &RngSpec) -> Result<TcPoint> {
    let (t, s) = tc_at;
    match conditional_tc_exact(path, c, t, s, DEFAULT_SUPPORT_CAP) {
        Ok(r) => Ok(TcPoint {
            value_nats: r.value_nats,
            method: TcMethod::Exact,
        }),
        Err(Error::CapExceeded { .. }) => {
            let r = conditional_tc_plugin(path, c, t, s, FALLBACK_ROOTS, FALLBACK_SAMPLES_PER_ROOT, rng)?;
            Ok(TcPoint {
                value_nats: r.value_nats,
                method: TcMethod::Plugin,
            })
        }
        Err(e) => Err(e),
    }
}

/// Applies `cfgs[k]` for `k = 0..K` (`K = cfgs.len()`), recording TC before the
/// first and after every rectification.
pub fn redi_iterate(c0: &PairCoupling, cfgs: &[RectifyConfig], tc_at: (f64, f64)) -> Result<RediRun> {
    if cfgs.is_empty() {
        return Err(Error::Validation("need at least one rectification (K >= 1)".into()));
    }
    let c0 = c0.clone().normalize()?;
    let tc_rng = |k: usize| cfgs[k.min(cfgs.len() - 1)].rng.child("tc", k as u64);
    let mut tc_curve = vec![measure_tc(&cfgs[0].path(), &c0, tc_at, &tc_rng(0))?];
    let mut couplings = vec![c0];
    for (k, cfg) in cfgs.iter().enumerate() {
        let next = rectify(couplings.last().unwrap(), cfg)?;
        tc_curve.push(measure_tc(&cfg.path(), &next, tc_at, &tc_rng(k + 1))?);
        couplings.push(next);
    }
    Ok(RediRun {
        couplings,
        tc_curve,
        configs: cfgs.to_vec(),
        tc_at,
    })
}
