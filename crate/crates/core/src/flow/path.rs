//! Conditional path, bridge kernel and endpoint posterior.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::coupling::PairCoupling;
use crate::error::{Error, Result};
use crate::schedule::{AlphaSchedule, Probability};
use crate::space::{SequenceState, Token};

/// How the Kronecker delta of the mixture path is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathMode {
    /// Every coordinate switches from `x0^i` to `x1^i` independently.
    #[default]
    Coordinatewise,
    /// The whole state switches at once.
    Holistic,
}

impl fmt::Display for PathMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathMode::Coordinatewise => "coordinatewise",
            PathMode::Holistic => "holistic",
        })
    }
}

impl FromStr for PathMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coordinatewise" => Ok(PathMode::Coordinatewise),
            "holistic" => Ok(PathMode::Holistic),
            _ => Err(Error::Validation(format!(
                "unknown path mode '{s}' (expected coordinatewise or holistic)"
            ))),
        }
    }
}

/// What to do when a query state has zero posterior normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffPathPolicy {
    /// Raise [`Error::OffPath`].
    #[default]
    Error,
    /// Condition on the endpoint pairs that disagree with the query on the
    /// fewest coordinates, weighting them by the path factors that are still
    /// positive. Factorized samplers can land on such states.
    Nearest,
}

/// Law of one coordinate at time `s` given the bridge endpoints and `x_t^i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinateLaw {
    Point(Token),
    Switch { stay: Token, to: Token, p_switch: f64 },
}

impl CoordinateLaw {
    pub fn prob(&self, v: Token) -> f64 {
        match *self {
            CoordinateLaw::Point(a) => (v == a) as u8 as f64,
            CoordinateLaw::Switch { stay, to, p_switch } => {
                let mut p = 0.0;
                if v == stay {
                    p += 1.0 - p_switch;
                }
                if v == to {
                    p += p_switch;
                }
                p
            }
        }
    }

    /// Adds `weight * law` into a per-token table.
    pub(crate) fn accumulate(&self, weight: f64, table: &mut [f64]) {
        match *self {
            CoordinateLaw::Point(a) => table[a as usize] += weight,
            CoordinateLaw::Switch { stay, to, p_switch } => {
                table[stay as usize] += weight * (1.0 - p_switch);
                table[to as usize] += weight * p_switch;
            }
        }
    }
}

/// Law of `X_s` given `(x0, x1, x_t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum BridgeLaw {
    Coordinatewise(Vec<CoordinateLaw>),
    Holistic {
        stay: SequenceState,
        to: SequenceState,
        p_switch: f64,
    },
}

impl BridgeLaw {
    pub fn prob(&self, x_s: &SequenceState) -> f64 {
        match self {
            BridgeLaw::Coordinatewise(laws) => laws.iter().zip(x_s.tokens()).map(|(law, &v)| law.prob(v)).product(),
            BridgeLaw::Holistic { stay, to, p_switch } => {
                let mut p = 0.0;
                if x_s == stay {
                    p += 1.0 - p_switch;
                }
                if x_s == to {
                    p += p_switch;
                }
                p
            }
        }
    }

    /// Marginal law of coordinate `i`.
    pub fn coordinate(&self, i: usize) -> CoordinateLaw {
        match self {
            BridgeLaw::Coordinatewise(laws) => laws[i],
            BridgeLaw::Holistic { stay, to, p_switch } => {
                let (a, b) = (stay.get(i), to.get(i));
                if a == b || *p_switch <= 0.0 {
                    CoordinateLaw::Point(a)
                } else if *p_switch >= 1.0 {
                    CoordinateLaw::Point(b)
                } else {
                    CoordinateLaw::Switch {
                        stay: a,
                        to: b,
                        p_switch: *p_switch,
                    }
                }
            }
        }
    }

    /// Calls `f(state, weight * prob)` for every outcome with positive probability.
    pub fn for_each_outcome(&self, weight: f64, mut f: impl FnMut(&SequenceState, f64)) {
        match self {
            BridgeLaw::Holistic { stay, to, p_switch } => {
                if stay == to {
                    f(stay, weight);
                    return;
                }
                if *p_switch < 1.0 {
                    f(stay, weight * (1.0 - p_switch));
                }
                if *p_switch > 0.0 {
                    f(to, weight * p_switch);
                }
            }
            BridgeLaw::Coordinatewise(laws) => {
                let mut tokens: Vec<Token> = laws
                    .iter()
                    .map(|l| match *l {
                        CoordinateLaw::Point(a) => a,
                        CoordinateLaw::Switch { stay, .. } => stay,
                    })
                    .collect();
                let branching: Vec<usize> = laws
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| matches!(l, CoordinateLaw::Switch { stay, to, p_switch } if stay != to && *p_switch > 0.0 && *p_switch < 1.0))
                    .map(|(i, _)| i)
                    .collect();
                // Certain switches resolve up front.
                for (i, l) in laws.iter().enumerate() {
                    if let CoordinateLaw::Switch { to, p_switch, .. } = *l {
                        if p_switch >= 1.0 {
                            tokens[i] = to;
                        }
                    }
                }
                let mut state = SequenceState(tokens);
                for mask in 0u64..(1u64 << branching.len()) {
                    let mut p = weight;
                    for (bit, &i) in branching.iter().enumerate() {
                        let CoordinateLaw::Switch { stay, to, p_switch } = laws[i] else {
                            unreachable!()
                        };
                        if mask >> bit & 1 == 1 {
                            state.0[i] = to;
                            p *= p_switch;
                        } else {
                            state.0[i] = stay;
                            p *= 1.0 - p_switch;
                        }
                    }
                    f(&state, p);
                }
            }
        }
    }
}

/// The mixture path `p_t(x_t | x0, x1)` under a schedule and delta reading.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProbabilityPath {
    pub schedule: AlphaSchedule,
    pub mode: PathMode,
}

/// Per-coordinate path factor for a given `alpha_t`.
#[inline]
fn coordinate_factor(xt: Token, x0: Token, x1: Token, alpha: f64) -> f64 {
    if x0 == x1 {
        (xt == x0) as u8 as f64
    } else if xt == x0 {
        1.0 - alpha
    } else if xt == x1 {
        alpha
    } else {
        0.0
    }
}

/// Switch probability between `t` and `s` for a coordinate still at its source token.
#[inline]
fn switch_probability(alpha_t: f64, alpha_s: f64) -> f64 {
    if alpha_t >= 1.0 {
        1.0
    } else {
        ((alpha_s - alpha_t) / (1.0 - alpha_t)).clamp(0.0, 1.0)
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain(format!("time {t} is outside [0, 1]")))
    }
}

pub(crate) fn check_interval(t: f64, s: f64) -> Result<()> {
    check_time(t)?;
    check_time(s)?;
    if t < s {
        Ok(())
    } else {
        Err(Error::Domain(format!("transition needs t < s, got t={t} s={s}")))
    }
}

impl ProbabilityPath {
    pub fn new(schedule: AlphaSchedule, mode: PathMode) -> Self {
        Self { schedule, mode }
    }

    pub(crate) fn alpha(&self, t: f64) -> f64 {
        self.schedule.eval(t)
    }

    /// `p_t(x_t | x0, x1)`.
    pub fn path_weight(
        &self,
        x_t: &SequenceState,
        x0: &SequenceState,
        x1: &SequenceState,
        t: f64,
    ) -> Result<Probability> {
        check_time(t)?;
        Probability::new(self.weight_with_alpha(x_t, x0, x1, self.alpha(t)))
    }

    pub(crate) fn weight_with_alpha(
        &self,
        x_t: &SequenceState,
        x0: &SequenceState,
        x1: &SequenceState,
        alpha: f64,
    ) -> f64 {
        match self.mode {
            PathMode::Coordinatewise => {
                let mut w = 1.0;
                for i in 0..x_t.len() {
                    w *= coordinate_factor(x_t.get(i), x0.get(i), x1.get(i), alpha);
                    if w == 0.0 {
                        break;
                    }
                }
                w
            }
            PathMode::Holistic => {
                let mut w = 0.0;
                if x_t == x0 {
                    w += 1.0 - alpha;
                }
                if x_t == x1 {
                    w += alpha;
                }
                w
            }
        }
    }

    /// Law of `X_s` given endpoints and the path passing through `x_t` at `t`.
    pub fn bridge(
        &self,
        x_t: &SequenceState,
        x0: &SequenceState,
        x1: &SequenceState,
        t: f64,
        s: f64,
    ) -> Result<BridgeLaw> {
        check_interval(t, s)?;
        let alpha_t = self.alpha(t);
        if self.weight_with_alpha(x_t, x0, x1, alpha_t) <= 0.0 {
            return Err(Error::InconsistentBridge {
                x_t: x_t.clone(),
                x0: x0.clone(),
                x1: x1.clone(),
                t,
            });
        }
        Ok(self.bridge_unchecked(x_t, x0, x1, alpha_t, self.alpha(s), self.mode))
    }

    /// Bridge law without consistency checks.
    ///
    /// A coordinate already at `x1^i` stays there; any other coordinate jumps
    /// to `x1^i` with the switch probability. On consistent inputs this is the
    /// exact bridge; off the path it is the extrapolation used by
    /// [`OffPathPolicy::Nearest`].
    pub(crate) fn bridge_unchecked(
        &self,
        x_t: &SequenceState,
        x0: &SequenceState,
        x1: &SequenceState,
        alpha_t: f64,
        alpha_s: f64,
        mode: PathMode,
    ) -> BridgeLaw {
        let p_switch = switch_probability(alpha_t, alpha_s);
        match mode {
            PathMode::Holistic => {
                if x_t == x1 {
                    BridgeLaw::Holistic {
                        stay: x1.clone(),
                        to: x1.clone(),
                        p_switch: 0.0,
                    }
                } else {
                    debug_assert!(x_t == x0);
                    BridgeLaw::Holistic {
                        stay: x0.clone(),
                        to: x1.clone(),
                        p_switch,
                    }
                }
            }
            PathMode::Coordinatewise => BridgeLaw::Coordinatewise(
                (0..x_t.len())
                    .map(|i| {
                        let (xt, target) = (x_t.get(i), x1.get(i));
                        if xt == target || p_switch >= 1.0 {
                            CoordinateLaw::Point(target)
                        } else if p_switch <= 0.0 {
                            CoordinateLaw::Point(xt)
                        } else {
                            CoordinateLaw::Switch {
                                stay: xt,
                                to: target,
                                p_switch,
                            }
                        }
                    })
                    .collect(),
            ),
        }
    }

    /// Draws `x_t ~ p_t(. | x0, x1)`.
    pub fn sample_intermediate<R: Rng + ?Sized>(
        &self,
        x0: &SequenceState,
        x1: &SequenceState,
        t: f64,
        rng: &mut R,
    ) -> Result<SequenceState> {
        check_time(t)?;
        let alpha = self.alpha(t);
        Ok(match self.mode {
            PathMode::Holistic => {
                if rng.gen::<f64>() < alpha {
                    x1.clone()
                } else {
                    x0.clone()
                }
            }
            PathMode::Coordinatewise => SequenceState(
                x0.tokens()
                    .iter()
                    .zip(x1.tokens())
                    .map(|(&a, &b)| {
                        if a == b {
                            a
                        } else if rng.gen::<f64>() < alpha {
                            b
                        } else {
                            a
                        }
                    })
                    .collect(),
            ),
        })
    }

    /// Bayes posterior over coupling entries given `X_t = x_t`.
    pub fn posterior(&self, c: &PairCoupling, x_t: &SequenceState, t: f64) -> Result<PosteriorTable> {
        self.posterior_with(c, x_t, t, OffPathPolicy::Error)
    }

    pub fn posterior_with(
        &self,
        c: &PairCoupling,
        x_t: &SequenceState,
        t: f64,
        policy: OffPathPolicy,
    ) -> Result<PosteriorTable> {
        check_time(t)?;
        c.space().validate(x_t)?;
        let alpha = self.alpha(t);
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        for (k, e) in c.entries().iter().enumerate() {
            let w = self.weight_with_alpha(x_t, &e.x0, &e.x1, alpha) * e.weight;
            if w > 0.0 {
                indices.push(k);
                weights.push(w);
            }
        }
        let normalizer: f64 = weights.iter().sum();
        if normalizer >= 1e-300 || (normalizer > 0.0 && policy == OffPathPolicy::Nearest) {
            weights.iter_mut().for_each(|w| *w /= normalizer);
            return Ok(PosteriorTable {
                x_t: x_t.clone(),
                t,
                mode: self.mode,
                entries: indices
                    .into_iter()
                    .zip(weights)
                    .map(|(k, w)| PosteriorEntry {
                        x0: c.entries()[k].x0.clone(),
                        x1: c.entries()[k].x1.clone(),
                        weight: w,
                    })
                    .collect(),
            });
        }
        match policy {
            OffPathPolicy::Error => Err(Error::OffPath {
                state: x_t.clone(),
                t,
                normalizer,
            }),
            OffPathPolicy::Nearest => Ok(self.nearest_posterior(c, x_t, t, alpha)),
        }
    }

    fn nearest_posterior(&self, c: &PairCoupling, x_t: &SequenceState, t: f64, alpha: f64) -> PosteriorTable {
        let mut best = usize::MAX;
        let mut picked: Vec<(usize, f64)> = Vec::new();
        for (k, e) in c.entries().iter().enumerate() {
            let mut violations = 0;
            let mut w = e.weight;
            for i in 0..x_t.len() {
                let m = coordinate_factor(x_t.get(i), e.x0.get(i), e.x1.get(i), alpha);
                if m > 0.0 {
                    w *= m;
                } else {
                    violations += 1;
                }
            }
            if w <= 0.0 || violations > best {
                continue;
            }
            if violations < best {
                best = violations;
                picked.clear();
            }
            picked.push((k, w));
        }
        let total: f64 = picked.iter().map(|(_, w)| w).sum();
        PosteriorTable {
            x_t: x_t.clone(),
            t,
            mode: PathMode::Coordinatewise,
            entries: picked
                .into_iter()
                .map(|(k, w)| PosteriorEntry {
                    x0: c.entries()[k].x0.clone(),
                    x1: c.entries()[k].x1.clone(),
                    weight: w / total,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEntry {
    pub x0: SequenceState,
    pub x1: SequenceState,
    pub weight: f64,
}

/// `p_t(x0, x1 | x_t)` restricted to coupling entries with positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    pub x_t: SequenceState,
    pub t: f64,
    /// Mode the bridges from this table follow. Nearest-path fallbacks are always coordinatewise.
    pub mode: PathMode,
    pub entries: Vec<PosteriorEntry>,
}

impl PosteriorTable {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::StateSpace;

    fn st(d: &str) -> SequenceState {
        SequenceState::from_digits(d).unwrap()
    }

    fn lin() -> ProbabilityPath {
        ProbabilityPath::default()
    }

    #[test]
    fn path_weight_boundaries() {
        let p = lin();
        assert_eq!(
            p.path_weight(&st("01"), &st("01"), &st("10"), 0.0).unwrap().value(),
            1.0
        );
        assert_eq!(
            p.path_weight(&st("10"), &st("01"), &st("10"), 1.0).unwrap().value(),
            1.0
        );
        assert!(p.path_weight(&st("10"), &st("01"), &st("10"), 1.2).is_err());
    }

    #[test]
    fn coordinatewise_midpoint_spreads_evenly() {
        let p = lin();
        let sp = StateSpace::new(2, 2).unwrap();
        let mut total = 0.0;
        for x_t in sp.states().unwrap() {
            let w = p.path_weight(&x_t, &st("00"), &st("11"), 0.5).unwrap().value();
            assert_eq!(w, 0.25);
            total += w;
        }
        assert_eq!(total, 1.0);
    }

    #[test]
    fn holistic_path_weight() {
        let p = ProbabilityPath::new(AlphaSchedule::Linear, PathMode::Holistic);
        assert_eq!(
            p.path_weight(&st("00"), &st("00"), &st("11"), 0.3).unwrap().value(),
            0.7
        );
        assert_eq!(
            p.path_weight(&st("11"), &st("00"), &st("11"), 0.3).unwrap().value(),
            0.3
        );
        assert_eq!(
            p.path_weight(&st("01"), &st("00"), &st("11"), 0.3).unwrap().value(),
            0.0
        );
    }

    #[test]
    fn bridge_examples() {
        let p = lin();
        let law = p.bridge(&st("0"), &st("0"), &st("1"), 0.3, 1.0).unwrap();
        assert_eq!(law.prob(&st("1")), 1.0);
        let law = p.bridge(&st("0"), &st("0"), &st("1"), 0.5, 0.75).unwrap();
        assert_eq!(law.prob(&st("1")), 0.5);
        let law = p.bridge(&st("1"), &st("1"), &st("1"), 0.1, 0.2).unwrap();
        assert_eq!(law.prob(&st("1")), 1.0);
        assert!(matches!(
            p.bridge(&st("1"), &st("0"), &st("0"), 0.1, 0.2),
            Err(Error::InconsistentBridge { .. })
        ));
        assert!(matches!(
            p.bridge(&st("0"), &st("0"), &st("1"), 0.5, 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn bridge_outcomes_sum_to_one() {
        let p = ProbabilityPath::new(AlphaSchedule::Cosine, PathMode::Coordinatewise);
        let law = p.bridge(&st("0121"), &st("0122"), &st("2111"), 0.2, 0.7).unwrap();
        let mut total = 0.0;
        let mut count = 0;
        law.for_each_outcome(1.0, |x, w| {
            assert!((law.prob(x) - w).abs() < 1e-15);
            total += w;
            count += 1;
        });
        assert_eq!(count, 4);
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn posterior_off_path_error_names_state() {
        let sp = StateSpace::new(2, 2).unwrap();
        let c = PairCoupling::from_triples(sp, [(st("00"), st("01"), 1.0)]).unwrap();
        let err = lin().posterior(&c, &st("10"), 0.5).unwrap_err();
        assert!(err.to_string().contains("1 0"), "{err}");
        let near = lin()
            .posterior_with(&c, &st("10"), 0.5, OffPathPolicy::Nearest)
            .unwrap();
        assert_eq!(near.entries.len(), 1);
        assert_eq!(near.total(), 1.0);
    }
}
