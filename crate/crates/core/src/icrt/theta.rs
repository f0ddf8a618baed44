use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ptree::{ProbWeights, PROB_TOL};

/// Largest deviation of `sum theta^2` from 1 that [`ThetaParam::normalized`]
/// silently rescales.
pub const THETA_RESCALE_TOL: f64 = 1e-6;

/// Truncated ICRT parameter `(theta_0; theta_1 >= ... >= theta_I > 0)` with
/// `theta_0 > 0` and unit sum of squares.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaParam {
    theta0: f64,
    thetas: Vec<f64>,
}

impl ThetaParam {
    pub fn new(theta0: f64, thetas: Vec<f64>) -> Result<Self> {
        if !(theta0.is_finite() && theta0 >= 0.0) {
            return Err(Error::UnsupportedParameter(format!("theta0 = {theta0}")));
        }
        if theta0 == 0.0 {
            return Err(Error::UnsupportedParameter(
                "theta0 = 0 needs infinitely many theta_i; only finite truncations with theta0 > 0 are supported"
                    .into(),
            ));
        }
        if let Some(t) = thetas.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::UnsupportedParameter(format!("theta_i = {t} must be positive")));
        }
        if thetas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::UnsupportedParameter("theta_i must be nonincreasing".into()));
        }
        let ss = theta0 * theta0 + thetas.iter().map(|t| t * t).sum::<f64>();
        if (ss - 1.0).abs() > PROB_TOL {
            return Err(Error::UnsupportedParameter(format!("sum of squares is {ss}, not 1")));
        }
        Ok(ThetaParam { theta0, thetas })
    }

    /// The Brownian case `theta = (1)`.
    pub fn brownian() -> Self {
        ThetaParam {
            theta0: 1.0,
            thetas: Vec::new(),
        }
    }

    /// From `[theta0, theta1, ...]`. A sum of squares within
    /// [`THETA_RESCALE_TOL`] of 1 is rescaled; the flag reports whether that
    /// happened.
    pub fn normalized(v: &[f64]) -> Result<(Self, bool)> {
        let (&theta0, rest) = v
            .split_first()
            .ok_or_else(|| Error::UnsupportedParameter("empty theta".into()))?;
        let ss: f64 = v.iter().map(|t| t * t).sum();
        if (ss - 1.0).abs() <= PROB_TOL {
            return Ok((Self::new(theta0, rest.to_vec())?, false));
        }
        if !((ss - 1.0).abs() < THETA_RESCALE_TOL) {
            return Err(Error::UnsupportedParameter(format!(
                "sum of squares is {ss}; expected 1"
            )));
        }
        let s = ss.sqrt();
        let rescaled = Self::new(theta0 / s, rest.iter().map(|t| t / s).collect());
        // rounding may leave the sum of squares a hair off; fix it via theta0
        let fixed = rescaled.or_else(|_| {
            let tail: Vec<f64> = rest.iter().map(|t| t / s).collect();
            let t0 = (1.0 - tail.iter().map(|t| t * t).sum::<f64>()).sqrt();
            Self::new(t0, tail)
        })?;
        Ok((fixed, true))
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// `theta_1, ..., theta_I`.
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.theta0).chain(self.thetas.iter().copied()).collect()
    }
}

impl Serialize for ThetaParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ThetaParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        let (first, rest) = v
            .split_first()
            .ok_or_else(|| serde::de::Error::custom("empty theta"))?;
        ThetaParam::new(*first, rest.to_vec()).map_err(serde::de::Error::custom)
    }
}

/// `P(eta_1 > r) = exp(-theta0^2 r^2 / 2) prod_i (1 + theta_i r) exp(-theta_i r)`.
pub fn survival_eta1(theta: &ThetaParam, r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    let log: f64 = -0.5 * theta.theta0 * theta.theta0 * r * r
        + theta
            .thetas
            .iter()
            .map(|&t| (t * r).ln_1p() - t * r)
            .sum::<f64>();
    log.exp()
}

/// `1 - survival_eta1`.
pub fn eta1_cdf(theta: &ThetaParam, r: f64) -> f64 {
    -(survival_eta1(theta, r).ln()).exp_m1()
}

/// Weights on `1..=n` with `p_i / sigma_n = theta_i` for `i <= I` and the
/// remaining `n - I` vertices sharing `theta_0` equally.
pub fn build_pn(theta: &ThetaParam, n: usize) -> Result<ProbWeights> {
    let big_i = theta.thetas.len();
    let min_n = min_feasible_n(theta);
    if n < min_n {
        return Err(Error::InfeasibleSize { n, min_n });
    }
    let rest = (n - big_i) as f64;
    let sigma = 1.0 / (theta.theta0 * rest.sqrt() + theta.thetas.iter().sum::<f64>());
    let small = sigma * theta.theta0 / rest.sqrt();
    let probs: Vec<f64> = theta
        .thetas
        .iter()
        .map(|t| sigma * t)
        .chain(std::iter::repeat_n(small, n - big_i))
        .collect();
    ProbWeights::new(probs)
}

/// Smallest `n` for which [`build_pn`] keeps the weights sorted.
pub fn min_feasible_n(theta: &ThetaParam) -> usize {
    let big_i = theta.thetas.len();
    match theta.thetas.last() {
        None => 1,
        Some(&last) => {
            let ratio = theta.theta0 / last;
            let mut need = ((ratio * ratio).floor() as usize).saturating_sub(1).max(1);
            while (need as f64).sqrt() * last < theta.theta0 * (1.0 - 1e-12) {
                need += 1;
            }
            big_i + need
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> ThetaParam {
        let h = 0.5f64.sqrt();
        ThetaParam::new(h, vec![h]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ThetaParam::new(0.0, vec![1.0]).is_err());
        assert!(ThetaParam::new(0.6, vec![0.6, 0.8]).is_err());
        assert!(ThetaParam::new(0.6, vec![0.8]).is_ok());
        assert!(ThetaParam::new(0.6, vec![0.48, 0.64]).is_err());
        let (t, warned) = ThetaParam::normalized(&[1.0 + 1e-8]).unwrap();
        assert!(warned);
        assert_eq!(t, ThetaParam::brownian());
        assert!(ThetaParam::normalized(&[1.1]).is_err());
        assert!(!ThetaParam::normalized(&[1.0]).unwrap().1);
    }

    #[test]
    fn survival_examples() {
        assert_eq!(survival_eta1(&ThetaParam::brownian(), 0.0), 1.0);
        assert!((survival_eta1(&ThetaParam::brownian(), 1.0) - 0.606_530_659_712_633).abs() < 1e-12);
        let got = survival_eta1(&half(), 2f64.sqrt());
        assert!((got - 2.0 * (-1.5f64).exp()).abs() < 1e-12, "{got}");
        assert!((got - 0.446_260).abs() < 1e-6);
        let mut prev = 1.0;
        for i in 1..400 {
            let s = survival_eta1(&half(), i as f64 * 0.05);
            assert!(s <= prev);
            prev = s;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn build_pn_examples() {
        let w = build_pn(&ThetaParam::brownian(), 7).unwrap();
        assert!(w.as_slice().iter().all(|&p| (p - 1.0 / 7.0).abs() < 1e-15));
        assert!((w.sigma() - 1.0 / 7f64.sqrt()).abs() < 1e-15);
        // sqrt(n - I) = 100
        let w = build_pn(&half(), 10_001).unwrap();
        let sigma = 2f64.sqrt() / 101.0;
        assert!((w.sigma() - sigma).abs() < 1e-15, "{} vs {sigma}", w.sigma());
        assert!((w.p(1) - 1.0 / 101.0).abs() < 1e-15);
        assert!((w.p(1) / w.sigma() - 0.5f64.sqrt()).abs() < 1e-12);
        let ss: f64 = w.as_slice().iter().map(|p| (p / w.sigma()).powi(2)).sum();
        assert!((ss - 1.0).abs() < 1e-9);
    }

    #[test]
    fn build_pn_reports_minimal_size() {
        // theta_1 = 0.1 needs (theta0 / theta1)^2 = 99 small vertices
        let t1 = 0.1f64;
        let t = ThetaParam::new((1.0 - t1 * t1).sqrt(), vec![t1]).unwrap();
        let min_n = min_feasible_n(&t);
        assert_eq!(min_n, 100);
        assert!(matches!(build_pn(&t, 50), Err(Error::InfeasibleSize { n: 50, min_n: 100 })));
        let w = build_pn(&t, 100).unwrap();
        assert!(w.as_slice().windows(2).all(|p| p[0] >= p[1] * (1.0 - 1e-12)));
    }
}
