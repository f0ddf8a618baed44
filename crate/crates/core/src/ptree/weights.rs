use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute tolerance for probability comparisons.
pub const PROB_TOL: f64 = 1e-12;

/// A strictly positive probability vector on the labels `1..=n`.
///
/// The alias table is built once at construction, so every draw is O(1).
#[derive(Clone, Debug)]
pub struct ProbWeights {
    probs: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl ProbWeights {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::InvalidWeights(format!(
                "weight of vertex {} is {p}, must be strictly positive",
                i + 1
            )));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let alias = WeightedAliasIndex::new(probs.clone())
            .map_err(|e| Error::InvalidWeights(e.to_string()))?;
        Ok(ProbWeights { probs, alias })
    }

    /// Rescales positive masses to a probability vector.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidWeights(format!("total mass {total}")));
        }
        Self::new(masses.iter().map(|m| m / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(vec![1.0 / n as f64; n]).expect("uniform weights are valid")
    }

    /// Random weights `U_i + floor` renormalised; handy for fuzzing.
    pub fn random<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> Self {
        let masses: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + floor).collect();
        Self::from_masses(&masses).expect("positive masses")
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    /// Weight of the 1-based vertex `u`.
    #[inline]
    pub fn p(&self, u: usize) -> f64 {
        self.probs[u - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn mass<I: IntoIterator<Item = usize>>(&self, vertices: I) -> f64 {
        vertices.into_iter().map(|u| self.p(u)).sum()
    }

    /// `sqrt(sum p_i^2)`.
    pub fn sigma(&self) -> f64 {
        compensated_sum(self.probs.iter().map(|p| p * p)).sqrt()
    }

    /// One i.i.d. p-node.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng) + 1
    }
}

/// Neumaier summation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

impl PartialEq for ProbWeights {
    fn eq(&self, other: &Self) -> bool {
        self.probs == other.probs
    }
}

impl Serialize for ProbWeights {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.probs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProbWeights {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        ProbWeights::new(probs).map_err(serde::de::Error::custom)
    }
}

/// Draws from `p` restricted to a shrinking vertex set.
///
/// Draws come from the full alias table (or the last rebuilt one) and are
/// rejected when they fall outside the live set. In adaptive mode, once the
/// rejections since the last rebuild exceed a budget proportional to the
/// table size, the table is rebuilt on the live set. The rebuild decision
/// depends only on the draws themselves, so two procedures that see the same
/// live sets consume the random stream identically.
pub struct RestrictedPicker<'w> {
    weights: &'w ProbWeights,
    table: Option<(Vec<usize>, WeightedAliasIndex<f64>)>,
    rejections: usize,
    adaptive: bool,
}

impl<'w> RestrictedPicker<'w> {
    pub fn adaptive(weights: &'w ProbWeights) -> Self {
        RestrictedPicker {
            weights,
            table: None,
            rejections: 0,
            adaptive: true,
        }
    }

    /// Pure rejection against `p`: accepted picks are exactly the i.i.d.
    /// p-nodes of one shared stream that land in the live set.
    pub fn rejection_only(weights: &'w ProbWeights) -> Self {
        RestrictedPicker {
            adaptive: false,
            ..Self::adaptive(weights)
        }
    }

    fn table_len(&self) -> usize {
        self.table
            .as_ref()
            .map_or(self.weights.n(), |(support, _)| support.len())
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.table {
            None => self.weights.sample(rng),
            Some((support, alias)) => support[alias.sample(rng)],
        }
    }

    /// `alive` decides membership; `support` lists the live set (only
    /// called on a rebuild, must be sorted ascending).
    pub fn pick<R, A, S>(&mut self, rng: &mut R, alive: A, mut support: S) -> usize
    where
        R: Rng + ?Sized,
        A: Fn(usize) -> bool,
        S: FnMut() -> Vec<usize>,
    {
        loop {
            let y = self.draw(rng);
            if alive(y) {
                return y;
            }
            self.rejections += 1;
            if self.adaptive && self.rejections >= 8 + self.table_len() / 4 {
                let live = support();
                debug_assert!(!live.is_empty());
                let masses: Vec<f64> = live.iter().map(|&u| self.weights.p(u)).collect();
                let alias = WeightedAliasIndex::new(masses).expect("positive masses");
                self.table = Some((live, alias));
                self.rejections = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn rejects_bad_weights() {
        assert!(ProbWeights::new(vec![]).is_err());
        assert!(ProbWeights::new(vec![0.5, 0.5, 0.0]).is_err());
        assert!(ProbWeights::new(vec![0.6, 0.6]).is_err());
        assert!(ProbWeights::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbWeights::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn json_is_a_bare_array() {
        let w = ProbWeights::new(vec![0.5, 0.25, 0.25]).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, "[0.5,0.25,0.25]");
        let back: ProbWeights = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<ProbWeights>("[0.5,0.6]").is_err());
    }

    #[test]
    fn restricted_picks_stay_in_live_set_and_follow_restriction() {
        let w = ProbWeights::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let mut rng = rng::master(1);
        let live = [2usize, 4];
        let mut counts = [0usize; 5];
        for adaptive in [false, true] {
            let mut picker = if adaptive {
                RestrictedPicker::adaptive(&w)
            } else {
                RestrictedPicker::rejection_only(&w)
            };
            for _ in 0..20_000 {
                let y = picker.pick(&mut rng, |u| live.contains(&u), || live.to_vec());
                counts[y] += 1;
            }
        }
        assert_eq!(counts[1] + counts[3], 0);
        // p|{2,4} = (0.75, 0.25)
        let frac = counts[2] as f64 / 40_000.0;
        assert!((frac - 0.75).abs() < 0.01, "{frac}");
    }
}
