//! Concrete inputs: Bessel-type step-line coefficients and exact discrete measures.

use num_traits::{One, Signed, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nearest_neighbor::MarginalRecurrence;
use crate::numerics::{int, Rational};
use crate::oracle::MomentTable;
use crate::stepline::StepLineCoeffs;

/// Step-line coefficients for the pair of weights built from the modified
/// Bessel function `K_nu`, for indices `0..=top`:
///
/// ```text
/// beta_n  = (n+a+1)(3n+a+2v) - (a+1)(v-1)
/// gamma_n = n(n+a)(n+a+v)(3n+2a+v)
/// delta_n = n(n-1)(n+a)(n+a-1)(n+a+v)(n+a+v-1)
/// ```
pub fn bessel_stepline(alpha: &Rational, nu: &Rational, top: usize) -> Result<StepLineCoeffs> {
    let one = Rational::one();
    let (mut beta, mut gamma, mut delta) = (Vec::new(), Vec::new(), Vec::new());
    for n in 0..=top {
        let n = int(n as i64);
        let na = &n + alpha;
        let nav = &na + nu;
        beta.push(
            (&na + &one) * (int(3) * &n + alpha + int(2) * nu) - (alpha + &one) * (nu - &one),
        );
        gamma.push(&n * &na * &nav * (int(3) * &n + int(2) * alpha + nu));
        delta.push(&n * (&n - &one) * &na * (&na - &one) * &nav * (&nav - &one));
    }
    StepLineCoeffs::from_level0(beta, gamma, delta)
}

fn rising(x: &Rational, k: usize) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| acc * (x + int(i as i64)))
}

/// Moments `0..=max_degree` of the Bessel pair, normalised so that `m_0(mu_1) = 1`:
/// `m_k(mu_1) = (1+a+v)_k (1+a)_k` and `m_k(mu_2) = (1+a+v)_{k+1} (1+a)_k`.
pub fn bessel_moments(alpha: &Rational, nu: &Rational, max_degree: usize) -> Result<MomentTable> {
    let a1 = alpha + Rational::one();
    let av1 = &a1 + nu;
    let mu1 = (0..=max_degree)
        .map(|k| rising(&av1, k) * rising(&a1, k))
        .collect();
    let mu2 = (0..=max_degree)
        .map(|k| rising(&av1, k + 1) * rising(&a1, k))
        .collect();
    MomentTable::new(vec![mu1, mu2])
}

/// Finitely supported positive measure with rational atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    support: Vec<Rational>,
    weights: Vec<Rational>,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<Rational>, weights: Vec<Rational>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(Error::Domain(format!(
                "measure needs matching non-empty support and weights, got {} and {}",
                support.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::Domain(format!("weight {w} is not positive")));
        }
        let mut sorted: Vec<&Rational> = support.iter().collect();
        sorted.sort();
        if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::Domain(format!("support point {} repeated", pair[0])));
        }
        Ok(DiscreteMeasure { support, weights })
    }

    pub fn support(&self) -> &[Rational] {
        &self.support
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `m_k = sum_i w_i x_i^k` for `k = 0..=max_degree`.
    pub fn moments(&self, max_degree: usize) -> Vec<Rational> {
        let mut powers = self.weights.clone();
        let mut out = Vec::with_capacity(max_degree + 1);
        for _ in 0..=max_degree {
            out.push(powers.iter().sum());
            for (p, x) in powers.iter_mut().zip(&self.support) {
                *p *= x;
            }
        }
        out
    }

    fn inner(&self, f: &[Rational], g: &[Rational]) -> Rational {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Three-term recurrence coefficients for `n = 0..len` by the Stieltjes
    /// procedure on the support. Requires `len <= self.len()`.
    pub fn recurrence(&self, len: usize, measure: usize) -> Result<MarginalRecurrence> {
        if len > self.len() {
            return Err(Error::Domain(format!(
                "{len} recurrence terms need at least {len} support points, have {}",
                self.len()
            )));
        }
        let mut b = Vec::with_capacity(len);
        let mut a_sq = Vec::with_capacity(len);
        let mut prev: Vec<Rational> = vec![Rational::zero(); self.len()];
        let mut cur: Vec<Rational> = vec![Rational::one(); self.len()];
        let mut prev_norm = Rational::one();
        for n in 0..len {
            let norm = self.inner(&cur, &cur);
            let xp: Vec<Rational> = cur.iter().zip(&self.support).map(|(p, x)| p * x).collect();
            let bn = self.inner(&xp, &cur) / &norm;
            let an = if n == 0 {
                Rational::zero()
            } else {
                &norm / &prev_norm
            };
            let next = xp
                .iter()
                .zip(cur.iter().zip(&prev))
                .map(|(xp, (c, p))| xp - &bn * c - &an * p)
                .collect();
            b.push(bn);
            a_sq.push(an);
            prev = std::mem::replace(&mut cur, next);
            prev_norm = norm;
        }
        MarginalRecurrence::new(measure, b, a_sq)
    }
}

/// `lambda mu_1 + (1 - lambda) mu_2` with supports merged.
pub fn convex_combination(
    lambda: &Rational,
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
) -> Result<DiscreteMeasure> {
    if !lambda.is_positive() || lambda >= &Rational::one() {
        return Err(Error::Domain(format!("lambda = {lambda} must lie in (0, 1)")));
    }
    let other = Rational::one() - lambda;
    let mut atoms: Vec<(Rational, Rational)> = mu1
        .support
        .iter()
        .zip(&mu1.weights)
        .map(|(x, w)| (x.clone(), lambda * w))
        .chain(
            mu2.support
                .iter()
                .zip(&mu2.weights)
                .map(|(x, w)| (x.clone(), &other * w)),
        )
        .collect();
    atoms.sort_by(|p, q| p.0.cmp(&q.0));
    let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => merged.push((x, w)),
        }
    }
    let (support, weights) = merged.into_iter().unzip();
    DiscreteMeasure::new(support, weights)
}

/// Reduced fractions `p/q` with `q <= 3` in `[0, width)`.
fn candidate_points(width: u32) -> Vec<Rational> {
    let mut pts: Vec<Rational> = (1..=3i64)
        .flat_map(|q| (0..q * width as i64).map(move |p| Rational::new(p.into(), q.into())))
        .collect();
    pts.sort();
    pts.dedup();
    pts
}

/// `r` measures with `size` atoms each, reproducible from `seed`.
///
/// Measure `i` lives in `[i (w+1), i (w+1) + w)` with `w = max(spread, size)`,
/// so supports are pairwise separated and every multi-index is normal up to
/// the support sizes. Atoms are fractions with denominator at most 3 and
/// weights are `k/l` with `1 <= k <= 9`, `1 <= l <= 4`.
pub fn random_system(seed: u64, r: usize, size: usize, spread: u32) -> Result<Vec<DiscreteMeasure>> {
    if r == 0 || size == 0 {
        return Err(Error::Domain("random system needs r >= 1 and size >= 1".into()));
    }
    let width = spread.max(size as u32).max(1);
    let pool = candidate_points(width);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let offset = int(i as i64 * (width as i64 + 1));
        loop {
            let mut support: Vec<Rational> = sample(&mut rng, pool.len(), size)
                .into_iter()
                .map(|idx| &pool[idx] + &offset)
                .collect();
            support.sort();
            let weights = (0..size)
                .map(|_| Rational::new(rng.random_range(1..=9i64).into(), rng.random_range(1..=4i64).into()))
                .collect();
            let mu = DiscreteMeasure::new(support, weights)?;
            let b0 = mean(&mu);
            if out.iter().all(|prev: &DiscreteMeasure| mean(prev) != b0) {
                out.push(mu);
                break;
            }
        }
    }
    Ok(out)
}

fn mean(mu: &DiscreteMeasure) -> Rational {
    let m = mu.moments(1);
    &m[1] / &m[0]
}

/// Two-measure case of [`random_system`].
pub fn random_pair(seed: u64, size: usize, spread: u32) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let mut sys = random_system(seed, 2, size, spread)?;
    let mu2 = sys.pop().expect("two measures");
    let mu1 = sys.pop().expect("two measures");
    Ok((mu1, mu2))
}

/// Moment table of a list of discrete measures.
pub fn moment_table(measures: &[DiscreteMeasure], max_degree: usize) -> Result<MomentTable> {
    MomentTable::new(measures.iter().map(|m| m.moments(max_degree)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    #[test]
    fn bessel_values() {
        let s = bessel_stepline(&int(0), &int(0), 3).unwrap();
        assert_eq!(s.beta(0).unwrap(), &int(1));
        assert_eq!(s.beta(1).unwrap(), &int(7));
        assert_eq!(s.gamma(1).unwrap(), &int(3));
        assert_eq!(s.delta(2).unwrap(), &int(8));
        assert_eq!(s.delta(3).unwrap(), &int(216));
        assert!(s.gamma(0).unwrap().is_zero());
        assert!(s.delta(1).unwrap().is_zero());
        assert_eq!(s.top(), Some(3));
    }

    #[test]
    fn bessel_generic_parameters_vanish_at_start() {
        let s = bessel_stepline(&rat(1, 3), &rat(5, 2), 4).unwrap();
        assert!(s.gamma(0).unwrap().is_zero());
        assert!(s.delta(0).unwrap().is_zero());
        assert!(s.delta(1).unwrap().is_zero());
    }

    #[test]
    fn bessel_moment_values() {
        let m = bessel_moments(&int(0), &int(0), 4).unwrap();
        let fact = |k: i64| (1..=k).product::<i64>();
        for k in 0..=4usize {
            let k_i = k as i64;
            assert_eq!(m.moment(0, k).unwrap(), &int(fact(k_i) * fact(k_i)));
            assert_eq!(m.moment(1, k).unwrap(), &int(fact(k_i) * fact(k_i + 1)));
        }
    }

    #[test]
    fn discrete_moments() {
        let point = DiscreteMeasure::new(vec![int(0)], vec![int(1)]).unwrap();
        assert_eq!(point.moments(3), vec![int(1), int(0), int(0), int(0)]);
        let sym = DiscreteMeasure::new(vec![int(-1), int(1)], vec![rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(sym.moments(4), vec![int(1), int(0), int(1), int(0), int(1)]);
        let three = DiscreteMeasure::new(vec![int(1), int(2), int(3)], vec![int(1); 3]).unwrap();
        assert_eq!(&three.moments(2), &[int(3), int(6), int(14)]);
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![int(1), int(1)], vec![int(1), int(1)]).is_err());
        assert!(DiscreteMeasure::new(vec![int(1)], vec![int(0)]).is_err());
        assert!(DiscreteMeasure::new(vec![int(1)], vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
    }

    #[test]
    fn stieltjes_uniform_three_points() {
        // Uniform weights on {-1, 0, 1}: b = 0, a_1^2 = 2/3, a_2^2 = 1/3.
        let mu = DiscreteMeasure::new(vec![int(-1), int(0), int(1)], vec![int(1); 3]).unwrap();
        let rec = mu.recurrence(3, 1).unwrap();
        assert_eq!(rec.bs(), &[int(0), int(0), int(0)]);
        assert_eq!(rec.a_sqs(), &[int(0), rat(2, 3), rat(1, 3)]);
        assert!(mu.recurrence(4, 1).is_err());
    }

    #[test]
    fn stieltjes_mean_of_0_1_2() {
        let mu = DiscreteMeasure::new(vec![int(0), int(1), int(2)], vec![int(1); 3]).unwrap();
        assert_eq!(mu.recurrence(1, 2).unwrap().b(0).unwrap(), &int(1));
    }

    #[test]
    fn convex_combination_is_linear_in_moments() {
        let (mu1, mu2) = random_pair(3, 4, 5).unwrap();
        let lam = rat(1, 4);
        let mix = convex_combination(&lam, &mu1, &mu2).unwrap();
        let (m1, m2, mm) = (mu1.moments(5), mu2.moments(5), mix.moments(5));
        for k in 0..=5 {
            assert_eq!(mm[k], &lam * &m1[k] + (int(1) - &lam) * &m2[k]);
        }
        assert_eq!(mix.len(), 8);
        assert!(convex_combination(&int(1), &mu1, &mu2).is_err());
    }

    #[test]
    fn convex_combination_merges_shared_atoms() {
        let a = DiscreteMeasure::new(vec![int(0), int(1)], vec![int(1), int(1)]).unwrap();
        let b = DiscreteMeasure::new(vec![int(1), int(2)], vec![int(1), int(1)]).unwrap();
        let mix = convex_combination(&rat(1, 2), &a, &b).unwrap();
        assert_eq!(mix.support(), &[int(0), int(1), int(2)]);
        assert_eq!(mix.weights(), &[rat(1, 2), int(1), rat(1, 2)]);
    }

    #[test]
    fn random_pair_is_deterministic() {
        assert_eq!(random_pair(1, 6, 4).unwrap(), random_pair(1, 6, 4).unwrap());
        assert_ne!(random_pair(1, 6, 4).unwrap(), random_pair(2, 6, 4).unwrap());
    }

    #[test]
    fn random_system_shape() {
        for seed in 0..20 {
            let sys = random_system(seed, 3, 5, 2).unwrap();
            assert_eq!(sys.len(), 3);
            let means: Vec<Rational> = sys.iter().map(mean).collect();
            assert!(means[0] != means[1] && means[1] != means[2] && means[0] != means[2]);
            for mu in &sys {
                assert_eq!(mu.len(), 5);
                assert!(mu.support().iter().all(|x| x.denom() <= &3.into()));
            }
        }
    }
}
