use serde::{Deserialize, Serialize};

use crate::error::{BaselineError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    InverseSquare,
    InverseCube,
    Exponential,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::InverseSquare, NoiseKind::InverseCube, NoiseKind::Exponential];

    pub fn label(&self) -> &'static str {
        match self {
            NoiseKind::InverseSquare => "inverse_square",
            NoiseKind::InverseCube => "inverse_cube",
            NoiseKind::Exponential => "exponential",
        }
    }
}

/// Bound of the uniform noise added to shared states at iteration t ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub kind: NoiseKind,
    pub n0: f64,
}

impl NoiseSchedule {
    pub fn new(kind: NoiseKind, n0: f64) -> Result<Self> {
        if !(n0 >= 0.0 && n0.is_finite()) {
            return Err(BaselineError::Schedule(format!("n0 = {n0} must be finite and non-negative")));
        }
        Ok(NoiseSchedule { kind, n0 })
    }

    /// n0/t², n0/t³ or n0·e^(−t); t counts from 1.
    pub fn bound(&self, t: usize) -> f64 {
        assert!(t >= 1, "schedules start at t = 1");
        let t = t as f64;
        match self.kind {
            NoiseKind::InverseSquare => self.n0 / (t * t),
            NoiseKind::InverseCube => self.n0 / (t * t * t),
            NoiseKind::Exponential => self.n0 * (-t).exp(),
        }
    }

    /// (Σ bound, Σ bound², last term) over t = 1..=terms.
    pub fn partial_sums(&self, terms: usize) -> (f64, f64, f64) {
        let (mut s, mut s2, mut last) = (0.0, 0.0, 0.0);
        for t in 1..=terms {
            last = self.bound(t);
            s += last;
            s2 += last * last;
        }
        (s, s2, last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_follow_the_schedules() {
        let sq = NoiseSchedule::new(NoiseKind::InverseSquare, 2.0).unwrap();
        assert_eq!(sq.bound(1), 2.0);
        assert_eq!(sq.bound(2), 0.5);
        let cu = NoiseSchedule::new(NoiseKind::InverseCube, 8.0).unwrap();
        assert_eq!(cu.bound(2), 1.0);
        let ex = NoiseSchedule::new(NoiseKind::Exponential, 1.0).unwrap();
        assert!((ex.bound(1) - (-1f64).exp()).abs() < 1e-15);
        assert!(NoiseSchedule::new(NoiseKind::Exponential, -1.0).is_err());
        assert!(NoiseSchedule::new(NoiseKind::Exponential, f64::NAN).is_err());
    }

    #[test]
    fn series_are_summable() {
        // limits: π²/6, ζ(3), 1/(e − 1); squares: π⁴/90, ζ(6), 1/(e² − 1)
        let e = std::f64::consts::E;
        let cases = [
            (NoiseKind::InverseSquare, std::f64::consts::PI.powi(2) / 6.0, std::f64::consts::PI.powi(4) / 90.0, 1e-4),
            (NoiseKind::InverseCube, 1.202_056_903_159_594, 1.017_343_061_984_449, 1e-8),
            (NoiseKind::Exponential, 1.0 / (e - 1.0), 1.0 / (e * e - 1.0), 1e-12),
        ];
        for (kind, sum, sum_sq, tol) in cases {
            let (s, s2, last) = NoiseSchedule::new(kind, 1.0).unwrap().partial_sums(10_000);
            assert!((s - sum).abs() < tol, "{kind:?}: {s}");
            assert!((s2 - sum_sq).abs() < tol, "{kind:?}: {s2}");
            assert!(last <= 1e-8);
        }
    }

    #[test]
    fn zero_bound_is_silent() {
        let z = NoiseSchedule::new(NoiseKind::InverseSquare, 0.0).unwrap();
        assert_eq!(z.partial_sums(100), (0.0, 0.0, 0.0));
    }
}
