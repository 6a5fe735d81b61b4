//! Nearest-neighbor and marginal recurrence coefficients from shifted step-lines.
//!
//! For two measures the nearest-neighbor recurrences read
//!
//! ```text
//! x P_{n,m} = P_{n+1,m} + c_{n,m} P_{n,m} + a_{n,m} P_{n-1,m} + b_{n,m} P_{n,m-1}
//! x P_{n,m} = P_{n,m+1} + d_{n,m} P_{n,m} + a_{n,m} P_{n-1,m} + b_{n,m} P_{n,m-1}
//! ```
//!
//! Below the diagonal (`m < n`) the coefficients come from the e1 shift
//! family, on and above it from the e2 family.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::Rational;
use crate::stepline::{seed_c00, ShiftFamily, StepLineCoeffs};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NNCoeffs {
    /// Coefficient of `P_{n-1,m}`.
    pub a: Rational,
    /// Coefficient of `P_{n,m-1}`.
    pub b: Rational,
    /// Diagonal coefficient in the first relation.
    pub c: Rational,
    /// Diagonal coefficient in the second relation.
    pub d: Rational,
}

impl NNCoeffs {
    /// `kappa_{n,m} = d - c`, the constant in `P_{n+1,m} - P_{n,m+1} = kappa P_{n,m}`.
    pub fn kappa(&self) -> Rational {
        &self.d - &self.c
    }
}

/// Nearest-neighbor coefficients for every `(n, m)` with `n + m <= max_len`,
/// stored as a dense triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NNGrid {
    max_len: usize,
    entries: Vec<NNCoeffs>,
}

fn slot(n: usize, m: usize) -> usize {
    let s = n + m;
    s * (s + 1) / 2 + m
}

impl NNGrid {
    pub fn zeros(max_len: usize) -> Self {
        NNGrid {
            max_len,
            entries: vec![NNCoeffs::default(); slot(0, max_len) + 1],
        }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn contains(&self, n: usize, m: usize) -> bool {
        n + m <= self.max_len
    }

    pub fn get(&self, n: usize, m: usize) -> Result<&NNCoeffs> {
        if !self.contains(n, m) {
            return Err(Error::range("nearest-neighbor grid", format!("({n}, {m})")));
        }
        Ok(&self.entries[slot(n, m)])
    }

    pub fn get_mut(&mut self, n: usize, m: usize) -> Result<&mut NNCoeffs> {
        if !self.contains(n, m) {
            return Err(Error::range("nearest-neighbor grid", format!("({n}, {m})")));
        }
        Ok(&mut self.entries[slot(n, m)])
    }

    pub fn set(&mut self, n: usize, m: usize, coeffs: NNCoeffs) -> Result<()> {
        *self.get_mut(n, m)? = coeffs;
        Ok(())
    }

    /// Entries ordered by total length, then by `n` ascending.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &NNCoeffs)> + '_ {
        (0..=self.max_len).flat_map(move |s| {
            (0..=s).map(move |n| {
                let m = s - n;
                (n, m, &self.entries[slot(n, m)])
            })
        })
    }

    /// Copy restricted to `n + m <= max_len`.
    pub fn truncated(&self, max_len: usize) -> Self {
        let max_len = max_len.min(self.max_len);
        NNGrid {
            max_len,
            entries: self.entries[..=slot(0, max_len)].to_vec(),
        }
    }
}

/// Three-term recurrence `x p_n = p_{n+1} + b_n p_n + a_n^2 p_{n-1}` of one measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalRecurrence {
    measure: usize,
    b: Vec<Rational>,
    a_sq: Vec<Rational>,
}

impl MarginalRecurrence {
    /// `a_sq[0]` is the conventional `a_0^2 = 0`.
    pub fn new(measure: usize, b: Vec<Rational>, a_sq: Vec<Rational>) -> Result<Self> {
        if b.len() != a_sq.len() {
            return Err(Error::Domain(format!(
                "marginal recurrence has {} b values but {} a^2 values",
                b.len(),
                a_sq.len()
            )));
        }
        if a_sq.first().is_some_and(|a| !a.is_zero()) {
            return Err(Error::Domain("a_0^2 must be zero".into()));
        }
        Ok(MarginalRecurrence { measure, b, a_sq })
    }

    pub fn measure(&self) -> usize {
        self.measure
    }

    /// Number of stored terms; indices run over `0..len()`.
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn b(&self, n: usize) -> Result<&Rational> {
        self.b
            .get(n)
            .ok_or_else(|| Error::range(format!("b_n(mu_{})", self.measure), n))
    }

    pub fn a_sq(&self, n: usize) -> Result<&Rational> {
        self.a_sq
            .get(n)
            .ok_or_else(|| Error::range(format!("a_n^2(mu_{})", self.measure), n))
    }

    pub fn bs(&self) -> &[Rational] {
        &self.b
    }

    pub fn a_sqs(&self) -> &[Rational] {
        &self.a_sq
    }

    pub fn with_measure(mut self, measure: usize) -> Self {
        self.measure = measure;
        self
    }

    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        MarginalRecurrence {
            measure: self.measure,
            b: self.b[..len].to_vec(),
            a_sq: self.a_sq[..len].to_vec(),
        }
    }

    /// Fails with the first `n >= 1` whose `a_n^2` is not positive.
    pub fn check_positive(&self) -> Result<()> {
        match self.a_sq.iter().enumerate().skip(1).find(|(_, a)| !a.is_positive()) {
            Some((n, a)) => Err(Error::Domain(format!(
                "a_{n}^2(mu_{}) = {a} is not positive",
                self.measure
            ))),
            None => Ok(()),
        }
    }
}

/// How the free parameter `c_0^{(0,0)}` (equivalently `d_{0,0}`) is fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreeParameter {
    /// First two moments of the second measure; gives `d_{0,0} = m_1 / m_0`.
    Mu2Moments { m0: Rational, m1: Rational },
    /// `c_0^{(0,0)}` given directly.
    RawSeed(Rational),
}

impl FreeParameter {
    pub fn exact_mu2(m0: Rational, m1: Rational) -> Self {
        FreeParameter::Mu2Moments { m0, m1 }
    }

    pub fn raw_seed(value: Rational) -> Self {
        FreeParameter::RawSeed(value)
    }

    /// The value of `c_0^{(0,0)}` for a step-line starting with `beta0`.
    pub fn seed(&self, beta0: &Rational) -> Result<Rational> {
        match self {
            FreeParameter::Mu2Moments { m0, m1 } => seed_c00(m0, m1, beta0),
            FreeParameter::RawSeed(v) => Ok(v.clone()),
        }
    }
}

/// Builds the grid from precomputed shift families of depth at least `max_len`.
pub fn nn_from_families(e1: &ShiftFamily, e2: &ShiftFamily, max_len: usize) -> Result<NNGrid> {
    if e1.depth() < max_len || e2.depth() < max_len {
        return Err(Error::range("shift family depth", max_len));
    }
    let mut grid = NNGrid::zeros(max_len);
    for s in 0..=max_len {
        for n in 0..=s {
            let m = s - n;
            let entry = if m < n {
                below_diagonal(e1, n, m)?
            } else {
                on_or_above_diagonal(e2, n, m)?
            };
            grid.set(n, m, entry)?;
        }
    }
    Ok(grid)
}

fn divide_by_c(num: &Rational, c: &Rational, n: usize, m: usize, label: String) -> Result<Rational> {
    if c.is_zero() {
        return Err(Error::GridNormality { n, m, detail: label });
    }
    Ok(num / c)
}

fn below_diagonal(e1: &ShiftFamily, n: usize, m: usize) -> Result<NNCoeffs> {
    let j = n - m;
    let level = e1.level(j)?;
    let previous = e1.level(j - 1)?;
    let c_seq = e1.c_sequence(j)?;
    let c_m = c_seq.get(m)?;
    let i = 2 * m + j;
    let c = level.beta(i)?.clone();
    let d = &c + c_m;
    let a = -divide_by_c(previous.delta(i + 1)?, c_m, n, m, format!("c_{m}^({j},0)"))?;
    let b = if m == 0 {
        Rational::zero()
    } else {
        level.gamma(i)? - &a
    };
    Ok(NNCoeffs { a, b, c, d })
}

fn on_or_above_diagonal(e2: &ShiftFamily, n: usize, m: usize) -> Result<NNCoeffs> {
    let k = m - n;
    let level = e2.level(k)?;
    let c_seq = e2.c_sequence(k)?;
    let i = 2 * n + k;
    let c = level.beta(i)?.clone();
    let d = &c + c_seq.get(n)?;
    let a = if n == 0 {
        Rational::zero()
    } else {
        let c_prev = c_seq.get(n - 1)?;
        -divide_by_c(level.delta(i)?, c_prev, n, m, format!("c_{}^(0,{k})", n - 1))?
    };
    let b = level.gamma(i)? - &a;
    Ok(NNCoeffs { a, b, c, d })
}

/// Nearest-neighbor coefficients for `n + m <= max_len` from step-line data
/// covering indices `0..=2 max_len + 1` and the free parameter `c_0^{(0,0)}`.
pub fn nn_from_shifts(
    stepline: &StepLineCoeffs,
    c00_seed: &Rational,
    max_len: usize,
) -> Result<NNGrid> {
    let e1 = ShiftFamily::e1(stepline, max_len)?;
    let e2 = ShiftFamily::e2(stepline, c00_seed, max_len)?;
    nn_from_families(&e1, &e2, max_len)
}

/// `b_j(mu_1) = beta_j^{(j,0)}`, `a_j^2(mu_1) = gamma_j^{(j-1,0)}` for `0 <= j <= len`.
pub fn marginal_mu1(e1: &ShiftFamily, len: usize) -> Result<MarginalRecurrence> {
    if e1.axis() != crate::error::Axis::E1 || e1.depth() < len {
        return Err(Error::range("e1 shift family depth", len));
    }
    let mut b = Vec::with_capacity(len + 1);
    let mut a_sq = Vec::with_capacity(len + 1);
    for j in 0..=len {
        b.push(e1.level(j)?.beta(j)?.clone());
        a_sq.push(if j == 0 {
            Rational::zero()
        } else {
            e1.level(j - 1)?.gamma(j)?.clone()
        });
    }
    MarginalRecurrence::new(1, b, a_sq)
}

/// `b_k(mu_2) = beta_k^{(0,k)} + c_0^{(0,k)}`, `a_k^2(mu_2) = gamma_k^{(0,k)}` for `0 <= k <= len`.
pub fn marginal_mu2(e2: &ShiftFamily, len: usize) -> Result<MarginalRecurrence> {
    if e2.axis() != crate::error::Axis::E2 || e2.depth() < len {
        return Err(Error::range("e2 shift family depth", len));
    }
    let mut b = Vec::with_capacity(len + 1);
    let mut a_sq = Vec::with_capacity(len + 1);
    for k in 0..=len {
        let level = e2.level(k)?;
        b.push(level.beta(k)? + e2.c_sequence(k)?.get(0)?);
        a_sq.push(level.gamma(k)?.clone());
    }
    MarginalRecurrence::new(2, b, a_sq)
}

/// Output of the full forward pipeline.
#[derive(Debug, Clone)]
pub struct ForwardResult {
    pub grid: NNGrid,
    pub mu1: MarginalRecurrence,
    pub mu2: MarginalRecurrence,
}

/// Step-line data plus free parameter to nearest-neighbor grid and both marginals.
pub fn forward(
    stepline: &StepLineCoeffs,
    free: &FreeParameter,
    max_len: usize,
) -> Result<ForwardResult> {
    let seed = free.seed(stepline.beta(0)?)?;
    let e1 = ShiftFamily::e1(stepline, max_len)?;
    let e2 = ShiftFamily::e2(stepline, &seed, max_len)?;
    Ok(ForwardResult {
        grid: nn_from_families(&e1, &e2, max_len)?,
        mu1: marginal_mu1(&e1, max_len)?,
        mu2: marginal_mu2(&e2, max_len)?,
    })
}
