//! Exact enumeration oracles and the goodness-of-fit machinery used by the
//! verification suites.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::ptree::{enumerate_rooted_trees, ptree_pmf, ProbWeights, RootedTree};

pub const MAX_SPAN_LAW_N: usize = 7;
pub const MAX_TREE_LAW_N: usize = 6;
/// Classes are pooled until each expected count reaches this.
pub const MIN_EXPECTED: f64 = 5.0;

/// One pass/fail line of a verification suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub seed: u64,
    pub n_samples: u64,
}

impl Verdict {
    /// Passes when `statistic < threshold`.
    pub fn below(name: &str, statistic: f64, threshold: f64, seed: u64, n_samples: u64) -> Self {
        Verdict {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic < threshold,
            seed,
            n_samples,
        }
    }

    /// Passes when `statistic > threshold` (p-values).
    pub fn above(name: &str, statistic: f64, threshold: f64, seed: u64, n_samples: u64) -> Self {
        Verdict {
            pass: statistic > threshold,
            ..Self::below(name, statistic, threshold, seed, n_samples)
        }
    }
}

/// Law of `#Span(T; V)` for `T ~ pi` and an independent p-node `V`, by
/// enumeration. Keys are `1..=n`.
pub fn exact_span_law(weights: &ProbWeights) -> Result<BTreeMap<usize, f64>> {
    let n = weights.n();
    if n > MAX_SPAN_LAW_N {
        return Err(Error::EnumerationBoundExceeded { n, max: MAX_SPAN_LAW_N });
    }
    let mut law: BTreeMap<usize, f64> = (1..=n).map(|l| (l, 0.0)).collect();
    for t in enumerate_rooted_trees(n)? {
        let pt = ptree_pmf(weights, &t)?;
        let depths = t.depths();
        for v in 1..=n {
            *law.get_mut(&(depths[v] + 1)).unwrap() += pt * weights.p(v);
        }
    }
    Ok(law)
}

/// `t -> pi(t)` over every rooted tree on `1..=n`.
pub fn exact_tree_law(weights: &ProbWeights) -> Result<BTreeMap<RootedTree, f64>> {
    let n = weights.n();
    if n > MAX_TREE_LAW_N {
        return Err(Error::EnumerationBoundExceeded { n, max: MAX_TREE_LAW_N });
    }
    enumerate_rooted_trees(n)?
        .map(|t| ptree_pmf(weights, &t).map(|p| (t, p)))
        .collect()
}

/// `pi (x) p` on (tree, vertex) pairs.
pub fn exact_tree_vertex_law(weights: &ProbWeights) -> Result<BTreeMap<(RootedTree, usize), f64>> {
    let trees = exact_tree_law(weights)?;
    let mut law = BTreeMap::new();
    for (t, pt) in trees {
        for v in 1..=weights.n() {
            law.insert((t.clone(), v), pt * weights.p(v));
        }
    }
    Ok(law)
}

pub fn counts_of<K: Ord, I: IntoIterator<Item = K>>(it: I) -> BTreeMap<K, u64> {
    let mut c = BTreeMap::new();
    for k in it {
        *c.entry(k).or_insert(0) += 1;
    }
    c
}

/// Adds `b` into `a`.
pub fn merge_counts<K: Ord>(mut a: BTreeMap<K, u64>, b: BTreeMap<K, u64>) -> BTreeMap<K, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Classes after pooling.
    pub classes: usize,
}

/// Pearson goodness of fit of `counts` against the pmf `expected`. Classes
/// with small expected counts are pooled, smallest first, until every pool
/// reaches [`MIN_EXPECTED`]. An observation outside the support of
/// `expected` gives an infinite statistic.
pub fn chi_square_gof<K: Ord>(counts: &BTreeMap<K, u64>, expected: &BTreeMap<K, f64>) -> Result<ChiSquare> {
    let total_p: f64 = expected.values().sum();
    if expected.values().any(|p| !(p.is_finite() && *p >= 0.0)) || (total_p - 1.0).abs() > 1e-6 {
        return Err(Error::Degenerate(format!("expected pmf sums to {total_p}")));
    }
    let n: u64 = counts.values().sum();
    if n == 0 {
        return Err(Error::Degenerate("no observations".into()));
    }
    let nf = n as f64;
    let outside = counts
        .iter()
        .any(|(k, &c)| c > 0 && expected.get(k).is_none_or(|&p| p == 0.0));
    let mut cells: Vec<(f64, f64)> = expected
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| (nf * p, counts.get(k).copied().unwrap_or(0) as f64))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pools: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (e, o) in cells {
        acc = (acc.0 + e, acc.1 + o);
        if acc.0 >= MIN_EXPECTED {
            pools.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 {
        match pools.last_mut() {
            Some(last) => *last = (last.0 + acc.0, last.1 + acc.1),
            None => pools.push(acc),
        }
    }
    if pools.len() < 2 {
        return Err(Error::Degenerate("chi-square test has 0 degrees of freedom".into()));
    }
    let dof = pools.len() - 1;
    if outside {
        return Ok(ChiSquare {
            statistic: f64::INFINITY,
            dof,
            p_value: 0.0,
            classes: pools.len(),
        });
    }
    let statistic: f64 = pools.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
        classes: pools.len(),
    })
}

/// Upper tail of the chi-square law.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, x / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Smallest sample accepted by [`ks_test`].
pub const KS_MIN_SAMPLES: usize = 30;

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    let xs = checked_sorted(samples)?;
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(d, n),
        n: xs.len(),
    })
}

/// Two-sample Kolmogorov-Smirnov distance. Ties are handled by stepping
/// both empirical CDFs past equal values together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (xa, xb) = (checked_sorted(a)?, checked_sorted(b)?);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] == x {
            i += 1;
        }
        while j < xb.len() && xb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(d, ne),
        n: xa.len() + xb.len(),
    })
}

fn checked_sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::Degenerate(format!(
            "{} samples, need at least {KS_MIN_SAMPLES}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Degenerate("NaN sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    Ok(xs)
}

/// Asymptotic `P(D_n > d)` with the usual small-sample correction of the
/// argument.
pub fn kolmogorov_sf(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Half the L1 distance between the normalized count vectors.
pub fn empirical_tv<K: Ord>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> Result<f64> {
    let (na, nb) = (a.values().sum::<u64>() as f64, b.values().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("empty count vector".into()));
    }
    let mut s = 0.0;
    for (k, &ca) in a {
        s += (ca as f64 / na - b.get(k).copied().unwrap_or(0) as f64 / nb).abs();
    }
    for (k, &cb) in b {
        if !a.contains_key(k) {
            s += cb as f64 / nb;
        }
    }
    Ok(0.5 * s)
}

/// TV between empirical counts and a pmf.
pub fn tv_to_pmf<K: Ord>(counts: &BTreeMap<K, u64>, pmf: &BTreeMap<K, f64>) -> Result<f64> {
    let n = counts.values().sum::<u64>() as f64;
    if n == 0.0 {
        return Err(Error::Degenerate("empty count vector".into()));
    }
    let mut s = 0.0;
    for (k, &p) in pmf {
        s += (counts.get(k).copied().unwrap_or(0) as f64 / n - p).abs();
    }
    for (k, &c) in counts {
        if !pmf.contains_key(k) {
            s += c as f64 / n;
        }
    }
    Ok(0.5 * s)
}

/// `1 - exp(-x^2 / 2)`.
pub fn rayleigh_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-0.5 * x * x).exp_m1()
    }
}
