use crate::dist::SparseDistribution;
use crate::error::{Error, Result};

/// `KL(p || q)` in nats.
///
/// With `smoothing = Some(eps)`, `q` is replaced by `(1 - eps) q + eps * uniform`
/// over all `d^n` states, which makes the divergence finite.
pub fn kl(p: &SparseDistribution, q: &SparseDistribution, smoothing: Option<f64>) -> Result<f64> {
    p.space().check_same(q.space())?;
    let (keep, floor) = match smoothing {
        Some(eps) => {
            if !(0.0..=1.0).contains(&eps) {
                return Err(Error::Domain(format!("smoothing epsilon {eps} is outside [0, 1]")));
            }
            let states = p.space().num_states().map_or(f64::INFINITY, |n| n as f64);
            (1.0 - eps, eps / states)
        }
        None => (1.0, 0.0),
    };
    let mut total = 0.0;
    for (x, px) in p.iter() {
        let qx = keep * q.prob(x) + floor;
        if qx <= 0.0 {
            return Err(Error::Divergence { state: x.clone() });
        }
        total += px * (px / qx).ln();
    }
    Ok(total)
}

/// Total variation distance `0.5 * sum |p - q|`.
pub fn tv(p: &SparseDistribution, q: &SparseDistribution) -> Result<f64> {
    p.space().check_same(q.space())?;
    let mut total = 0.0;
    for (x, px) in p.iter() {
        total += (px - q.prob(x)).abs();
    }
    for (x, qx) in q.iter() {
        if p.prob(x) == 0.0 {
            total += qx;
        }
    }
    Ok((0.5 * total).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{SequenceState, StateSpace};

    fn st(d: &str) -> SequenceState {
        SequenceState::from_digits(d).unwrap()
    }

    fn sp() -> StateSpace {
        StateSpace::new(2, 2).unwrap()
    }

    fn two_state() -> SparseDistribution {
        SparseDistribution::uniform_over(sp(), [st("00"), st("11")]).unwrap()
    }

    #[test]
    fn kl_examples() {
        let u = SparseDistribution::uniform(sp()).unwrap();
        assert_eq!(kl(&u, &u, None).unwrap(), 0.0);
        let v = kl(&two_state(), &u, None).unwrap();
        assert!((v - 2.0f64.ln()).abs() < 1e-15);
        let delta = SparseDistribution::point_mass(sp(), st("01")).unwrap();
        assert!((kl(&delta, &u, None).unwrap() - 4.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn kl_requires_absolute_continuity() {
        let u = SparseDistribution::uniform(sp()).unwrap();
        let err = kl(&u, &two_state(), None).unwrap_err();
        assert!(matches!(err, Error::Divergence { ref state } if *state == st("01")));
        let smoothed = kl(&u, &two_state(), Some(1e-9)).unwrap();
        assert!(smoothed.is_finite() && smoothed > 0.0);
    }

    #[test]
    fn tv_examples() {
        let u = SparseDistribution::uniform(sp()).unwrap();
        assert_eq!(tv(&u, &u).unwrap(), 0.0);
        assert_eq!(tv(&u, &two_state()).unwrap(), 0.5);
        let a = SparseDistribution::point_mass(sp(), st("00")).unwrap();
        let b = SparseDistribution::point_mass(sp(), st("11")).unwrap();
        assert_eq!(tv(&a, &b).unwrap(), 1.0);
    }
}
