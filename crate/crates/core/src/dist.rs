//! Finite-support offspring distributions.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};

const SUM_TOL: f64 = 1e-12;
const TAIL_MASS: f64 = 1e-12;

/// The law `{p_j}` of the offspring count of a Galton–Watson process.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringDistribution {
    /// `probs[j] = p_j`; trailing zeros are trimmed.
    probs: Vec<f64>,
    /// Present when every probability was given as an exact rational.
    exact: Option<Vec<Rational>>,
    mean: f64,
}

/// Extinction and survival probabilities of the unconditioned process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extinction {
    pub extinction: f64,
    /// `g_∞ = 1 - extinction`.
    pub survival: f64,
}

impl OffspringDistribution {
    pub fn new(pairs: &[(u32, f64)]) -> Result<Self> {
        let probs = dense(pairs.iter().map(|&(j, p)| (j, p)))?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self::from_dense(probs, None))
    }

    /// Exact construction; the probabilities must sum to exactly one.
    pub fn from_rationals(pairs: &[(u32, Rational)]) -> Result<Self> {
        let max_j = pairs.iter().map(|&(j, _)| j).max().unwrap_or(0) as usize;
        let mut exact = vec![Rational::from_integer(0); max_j + 1];
        for &(j, p) in pairs {
            if p < Rational::from_integer(0) {
                return Err(Error::InvalidDistribution(format!("negative probability for j={j}")));
            }
            exact[j as usize] += p;
        }
        let total: Rational = exact.iter().copied().sum();
        if total != Rational::from_integer(1) {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {}, not 1",
                format_rational(&total)
            )));
        }
        while exact.len() > 1 && exact.last() == Some(&Rational::from_integer(0)) {
            exact.pop();
        }
        let probs = exact.iter().map(to_f64).collect();
        Ok(Self::from_dense(probs, Some(exact)))
    }

    /// Parses `"j:p,j:p,..."` where each `p` is `num/den` or a decimal.
    /// Rational and decimal entries are kept exact.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (j, p) = item
                .split_once(':')
                .ok_or_else(|| Error::InvalidDistribution(format!("expected j:p, got {item:?}")))?;
            let j: u32 = j
                .trim()
                .parse()
                .map_err(|_| Error::InvalidDistribution(format!("bad offspring count {j:?}")))?;
            let p = parse_rational(p).map_err(|_| Error::InvalidDistribution(format!("bad probability {p:?}")))?;
            pairs.push((j, p));
        }
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        Self::from_rationals(&pairs)
    }

    /// Builds a finite-support law from a possibly unbounded pmf by cutting
    /// the tail once the cumulative mass exceeds `1 - 1e-12` and renormalizing.
    pub fn from_pmf_truncated(pmf: impl Fn(u32) -> f64, max_j: u32) -> Result<Self> {
        let mut probs = Vec::new();
        let mut cum = 0.0;
        for j in 0..=max_j {
            let p = pmf(j);
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidDistribution(format!("bad pmf value at j={j}")));
            }
            probs.push(p);
            cum += p;
            if cum > 1.0 - TAIL_MASS {
                break;
            }
        }
        if cum <= 1.0 - TAIL_MASS {
            return Err(Error::InvalidDistribution(format!(
                "pmf mass {cum} not exhausted by j={max_j}"
            )));
        }
        let probs = probs.into_iter().map(|p| p / cum).collect();
        Ok(Self::from_dense(trim(probs), None))
    }

    fn from_dense(probs: Vec<f64>, exact: Option<Vec<Rational>>) -> Self {
        let probs = trim(probs);
        let mean = probs.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
        Self { probs, exact, mean }
    }

    pub fn p(&self, j: u32) -> f64 {
        self.probs.get(j as usize).copied().unwrap_or(0.0)
    }

    pub fn exact_p(&self, j: u32) -> Option<Rational> {
        self.exact
            .as_ref()
            .map(|e| e.get(j as usize).copied().unwrap_or(Rational::from_integer(0)))
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Support points with positive probability, ascending.
    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(j, &p)| (j as u32, p))
    }

    pub fn max_offspring(&self) -> u32 {
        (self.probs.len() - 1) as u32
    }

    /// Mean offspring number λ.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn is_supercritical(&self) -> bool {
        self.mean > 1.0
    }

    /// `Some(j)` when the law is a point mass at `j`.
    pub fn degenerate_value(&self) -> Option<u32> {
        let mut it = self.support();
        match (it.next(), it.next()) {
            (Some((j, _)), None) => Some(j),
            _ => None,
        }
    }

    /// Probability generating function `f(s) = Σ p_j s^j` (Horner).
    pub fn pgf(&self, s: f64) -> f64 {
        self.probs.iter().rev().fold(0.0, |acc, &p| acc * s + p)
    }

    /// Smallest fixed point of the generating function in `[0, 1]`, by
    /// monotone iteration from zero.
    pub fn extinction(&self) -> Extinction {
        if self.p(0) == 0.0 {
            return Extinction { extinction: 0.0, survival: 1.0 };
        }
        if self.mean <= 1.0 {
            // (sub)critical with p_1 != 1: dies out almost surely
            return Extinction { extinction: 1.0, survival: 0.0 };
        }
        let mut s = 0.0;
        loop {
            let next = self.pgf(s);
            if (next - s).abs() < 1e-12 {
                s = next;
                break;
            }
            s = next;
        }
        Extinction { extinction: s, survival: 1.0 - s }
    }

    /// `e[m]` = probability that a single progenitor has no descendants in
    /// generation `m`, for `m = 0..=max_m`. `e[0] = 0`, `e[m] = f(e[m-1])`.
    pub fn dies_within(&self, max_m: usize) -> Vec<f64> {
        let mut e = Vec::with_capacity(max_m + 1);
        e.push(0.0);
        for m in 1..=max_m {
            let prev = e[m - 1];
            e.push(self.pgf(prev));
        }
        e
    }

    /// Probability that generation `n` is non-empty.
    pub fn survival_to_depth(&self, n: usize) -> f64 {
        1.0 - self.dies_within(n)[n]
    }

    /// Expected size of the first `t + 1` generations, `Σ_{j≤t} λ^j`.
    pub fn expected_truncated_size(&self, t: u32) -> f64 {
        (0..=t).map(|j| self.mean.powi(j as i32)).sum()
    }

    pub fn sampler(&self) -> DiscreteSampler {
        let (values, weights): (Vec<u32>, Vec<f64>) = self.support().unzip();
        DiscreteSampler::new(values, &weights).expect("validated distribution")
    }
}

impl fmt::Display for OffspringDistribution {
    /// Canonical `"j:p,..."` form; exact laws print as reduced fractions.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, p) in self.support() {
            if !first {
                write!(f, ",")?;
            }
            first = false;
            match self.exact_p(j) {
                Some(r) if *r.denom() == 1 => write!(f, "{j}:{}", r.numer())?,
                Some(r) => write!(f, "{j}:{}", format_rational(&r))?,
                None => write!(f, "{j}:{p}")?,
            }
        }
        Ok(())
    }
}

/// Draws from a finite weighted set of values.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    values: Vec<u32>,
    index: Option<WeightedIndex<f64>>,
}

impl DiscreteSampler {
    pub fn new(values: Vec<u32>, weights: &[f64]) -> Result<Self> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(Error::InvalidDistribution("empty or mismatched weights".into()));
        }
        let index = if values.len() == 1 {
            None
        } else {
            Some(WeightedIndex::new(weights).map_err(|e| Error::InvalidDistribution(e.to_string()))?)
        };
        Ok(Self { values, index })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.index {
            None => self.values[0],
            Some(ix) => self.values[ix.sample(rng)],
        }
    }
}

fn dense(pairs: impl Iterator<Item = (u32, f64)>) -> Result<Vec<f64>> {
    let mut probs: Vec<f64> = Vec::new();
    for (j, p) in pairs {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("bad probability {p} for j={j}")));
        }
        let j = j as usize;
        if probs.len() <= j {
            probs.resize(j + 1, 0.0);
        }
        probs[j] += p;
    }
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    Ok(probs)
}

fn trim(mut probs: Vec<f64>) -> Vec<f64> {
    while probs.len() > 1 && probs.last() == Some(&0.0) {
        probs.pop();
    }
    probs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extinction_of_binary_with_leaves() {
        // 0.8 s^2 - s + 0.2 = 0 has roots 1/4 and 1
        let d = OffspringDistribution::parse("0:0.2,2:0.8").unwrap();
        let e = d.extinction();
        assert!((e.extinction - 0.25).abs() < 1e-11);
        assert!((e.survival - 0.75).abs() < 1e-11);
        assert!((d.mean() - 1.6).abs() < 1e-15);
    }

    #[test]
    fn extinction_trivial_cases() {
        let d = OffspringDistribution::parse("1:1/2,3:1/2").unwrap();
        assert_eq!(d.extinction().extinction, 0.0);
        let sub = OffspringDistribution::parse("0:1/2,1:1/4,2:1/4").unwrap();
        assert_eq!(sub.extinction().extinction, 1.0);
        let crit = OffspringDistribution::parse("0:1/2,2:1/2").unwrap();
        assert_eq!(crit.extinction().extinction, 1.0);
    }

    #[test]
    fn rejects_bad_sums() {
        assert!(OffspringDistribution::parse("0:0.2,2:0.7").is_err());
        assert!(OffspringDistribution::new(&[(0, 0.5), (1, 0.5 + 1e-9)]).is_err());
        assert!(OffspringDistribution::new(&[(0, -0.5), (1, 1.5)]).is_err());
        assert!(OffspringDistribution::parse("").is_err());
        assert!(OffspringDistribution::parse("x:1").is_err());
    }

    #[test]
    fn display_round_trips() {
        let d = OffspringDistribution::parse("0:0.2, 2:4/5").unwrap();
        assert_eq!(d.to_string(), "0:1/5,2:4/5");
        assert_eq!(OffspringDistribution::parse(&d.to_string()).unwrap(), d);
        let p2 = OffspringDistribution::parse("2:1").unwrap();
        assert_eq!(p2.to_string(), "2:1");
        assert_eq!(p2.degenerate_value(), Some(2));
    }

    #[test]
    fn survival_to_depth_matches_pgf_iteration() {
        let d = OffspringDistribution::parse("0:0.2,2:0.8").unwrap();
        assert!((d.survival_to_depth(1) - 0.8).abs() < 1e-15);
        // f(0.2) = 0.2 + 0.8 * 0.04
        assert!((d.survival_to_depth(2) - (1.0 - 0.232)).abs() < 1e-15);
        assert!((d.survival_to_depth(200) - 0.75).abs() < 1e-10);
    }

    #[test]
    fn truncated_tail_renormalizes() {
        // Poisson(2) tail cut at mass 1 - 1e-12
        let lam: f64 = 2.0;
        let pmf = |j: u32| {
            let mut v = (-lam).exp();
            for i in 1..=j {
                v *= lam / i as f64;
            }
            v
        };
        let d = OffspringDistribution::from_pmf_truncated(pmf, 100).unwrap();
        let total: f64 = d.support().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!((d.mean() - 2.0).abs() < 1e-9);
        assert!(d.max_offspring() < 30);
    }

    #[test]
    fn expected_size_formula() {
        let d = OffspringDistribution::parse("0:0.2,2:0.8").unwrap();
        let direct = (1.6f64.powi(7) - 1.0) / 0.6;
        assert!((d.expected_truncated_size(6) - direct).abs() < 1e-12);
    }
}
