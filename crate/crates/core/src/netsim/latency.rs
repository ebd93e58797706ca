use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{NetsimError, SimTime};

/// Pareto (type I) tail: `Pr[tau > t] = (x_m / t)^alpha` for `t >= x_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoParams {
    alpha: f64,
    x_m: f64,
}

impl ParetoParams {
    pub fn new(alpha: f64, x_m: f64) -> Result<Self, NetsimError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(NetsimError::InvalidConfig(format!("pareto alpha must be > 0, got {alpha}")));
        }
        if !(x_m > 0.0 && x_m.is_finite()) {
            return Err(NetsimError::InvalidConfig(format!("pareto x_m must be > 0, got {x_m}")));
        }
        Ok(ParetoParams { alpha, x_m })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x_m(&self) -> f64 {
        self.x_m
    }

    /// Closed-form survival function.
    pub fn survival(&self, t: f64) -> f64 {
        if t < self.x_m {
            1.0
        } else {
            (self.x_m / t).powf(self.alpha)
        }
    }
}

/// Inverse-CDF sample for a uniform `u` in `[0, 1)`.
pub fn sample_pareto(p: &ParetoParams, u: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&u));
    p.x_m * (1.0 - u).powf(-1.0 / p.alpha)
}

/// Per-message or per-task latency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatencyModel {
    Constant { units: SimTime },
    Pareto(ParetoParams),
}

impl LatencyModel {
    pub fn constant(units: SimTime) -> Self {
        LatencyModel::Constant { units }
    }

    pub fn pareto(alpha: f64, x_m: f64) -> Result<Self, NetsimError> {
        Ok(LatencyModel::Pareto(ParetoParams::new(alpha, x_m)?))
    }

    /// Integer simulated time, rounded up and never below one unit.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SimTime {
        match self {
            LatencyModel::Constant { units } => (*units).max(1),
            LatencyModel::Pareto(p) => {
                let u: f64 = rng.gen();
                let t = sample_pareto(p, u).ceil();
                if t >= SimTime::MAX as f64 {
                    SimTime::MAX / 4
                } else {
                    (t as SimTime).max(1)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn inverse_cdf_at_zero_is_scale() {
        let p = ParetoParams::new(2.0, 3.5).unwrap();
        assert_eq!(sample_pareto(&p, 0.0), 3.5);
    }

    #[test]
    fn inverse_cdf_known_point() {
        // (1 - 0.75)^(-1/2) = 0.25^(-0.5) = 2
        let p = ParetoParams::new(2.0, 1.0).unwrap();
        assert!((sample_pareto(&p, 0.75) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_tail_matches_survival() {
        let p = ParetoParams::new(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let over = (0..n)
            .filter(|_| sample_pareto(&p, rng.gen::<f64>()) > 4.0)
            .count();
        let emp = over as f64 / n as f64;
        let exact = p.survival(4.0);
        assert!((exact - 1.0 / 16.0).abs() < 1e-12);
        assert!((emp - exact).abs() / exact < 0.2, "empirical {emp} vs {exact}");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ParetoParams::new(0.0, 1.0).is_err());
        assert!(ParetoParams::new(1.0, -1.0).is_err());
        assert!(ParetoParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn samples_are_at_least_one_unit() {
        let m = LatencyModel::pareto(1.5, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!((0..1000).all(|_| m.sample(&mut rng) >= 1));
        assert_eq!(LatencyModel::constant(7).sample(&mut rng), 7);
    }
}
