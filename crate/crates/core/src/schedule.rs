//! Time coefficients and decoding grids.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A probability value in `[0, 1]` (with a `1e-12` allowance above one).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0 + 1e-12).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Validation(format!("{value} is not a probability")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Mixing coefficient `alpha(t)` of the conditional path, with `alpha(0) = 0` and `alpha(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AlphaSchedule {
    #[default]
    Linear,
    /// `1 - cos(pi t / 2)`
    Cosine,
    /// `t^p`
    Power(f64),
}

impl AlphaSchedule {
    pub fn power(p: f64) -> Result<Self> {
        if p.is_finite() && p > 0.0 {
            Ok(AlphaSchedule::Power(p))
        } else {
            Err(Error::Validation(format!(
                "power schedule exponent must be > 0, got {p}"
            )))
        }
    }

    /// Evaluates `alpha(t)`; endpoints are exact.
    pub fn alpha_at(&self, t: f64) -> Result<Probability> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("time {t} is outside [0, 1]")));
        }
        Ok(Probability(self.eval(t)))
    }

    /// Unchecked evaluation for times already known to lie in `[0, 1]`.
    pub(crate) fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let a = match *self {
            AlphaSchedule::Linear => t,
            AlphaSchedule::Cosine => 1.0 - (std::f64::consts::FRAC_PI_2 * t).cos(),
            AlphaSchedule::Power(p) => t.powf(p),
        };
        a.clamp(0.0, 1.0)
    }
}

impl fmt::Display for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSchedule::Linear => f.write_str("linear"),
            AlphaSchedule::Cosine => f.write_str("cosine"),
            AlphaSchedule::Power(p) => write!(f, "power:{p}"),
        }
    }
}

impl FromStr for AlphaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(AlphaSchedule::Linear),
            "cosine" => Ok(AlphaSchedule::Cosine),
            _ => {
                let p = s
                    .strip_prefix("power:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Validation(format!("unknown schedule '{s}' (expected linear, cosine or power:<p>)"))
                    })?;
                AlphaSchedule::power(p)
            }
        }
    }
}

/// Strictly increasing decoding times from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Validation("time grid needs at least two points".into()));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(Error::Validation("time grid must start at 0 and end at 1".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Validation("time grid must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// `steps` equally spaced intervals.
    pub fn uniform(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Validation("step count must be >= 1".into()));
        }
        let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
        times[steps] = 1.0;
        Self::new(times)
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Consecutive `(t, s)` pairs.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.windows(2).map(|w| (w[0], w[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        let lin = AlphaSchedule::Linear;
        assert_eq!(lin.alpha_at(0.5).unwrap().value(), 0.5);
        assert_eq!(lin.alpha_at(1.0).unwrap().value(), 1.0);
        assert_eq!(AlphaSchedule::power(2.0).unwrap().alpha_at(0.5).unwrap().value(), 0.25);
        assert!(matches!(lin.alpha_at(1.5), Err(Error::Domain(_))));
        assert!(matches!(lin.alpha_at(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn schedules_are_monotone_with_exact_endpoints() {
        for sched in [
            AlphaSchedule::Linear,
            AlphaSchedule::Cosine,
            AlphaSchedule::Power(0.5),
            AlphaSchedule::Power(3.0),
        ] {
            assert_eq!(sched.alpha_at(0.0).unwrap().value(), 0.0);
            assert_eq!(sched.alpha_at(1.0).unwrap().value(), 1.0);
            let mut prev = 0.0;
            for k in 0..=1000 {
                let a = sched.alpha_at(k as f64 * 1e-3).unwrap().value();
                assert!(a >= prev, "{sched} decreases at t={}", k as f64 * 1e-3);
                prev = a;
            }
        }
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!("linear".parse::<AlphaSchedule>().unwrap(), AlphaSchedule::Linear);
        assert_eq!("power:2".parse::<AlphaSchedule>().unwrap(), AlphaSchedule::Power(2.0));
        assert!("power:-1".parse::<AlphaSchedule>().is_err());
        assert!("quadratic".parse::<AlphaSchedule>().is_err());
        let s = AlphaSchedule::Power(1.5);
        assert_eq!(s.to_string().parse::<AlphaSchedule>().unwrap(), s);
    }

    #[test]
    fn grids() {
        let g = TimeGrid::uniform(4).unwrap();
        assert_eq!(g.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.steps(), 4);
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.1, 1.0]).is_err());
        assert!(TimeGrid::uniform(0).is_err());
        assert_eq!(TimeGrid::uniform(3).unwrap().times()[3], 1.0);
    }

    #[test]
    fn probability_bounds() {
        assert!(Probability::new(1.0 + 1e-13).is_ok());
        assert!(Probability::new(1.1).is_err());
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(f64::NAN).is_err());
    }
}
