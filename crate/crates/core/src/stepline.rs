//! Step-line and shifted step-line recurrence coefficients.
//!
//! For two measures the step-line polynomials `p_{2n} = P_{n,n}` and
//! `p_{2n+1} = P_{n+1,n}` satisfy the four-term recurrence
//!
//! ```text
//! x p_n = p_{n+1} + beta_n p_n + gamma_n p_{n-1} + delta_n p_{n-2}.
//! ```
//!
//! Shifting the step-line by `j` along the first axis (`p_{2n+j} = P_{n+j,n}`)
//! or by `k` along the second axis (`p_{2n+k} = P_{n,n+k}`) gives polynomials
//! with the same kind of recurrence. This module moves from one shift level
//! to the next. Each move solves a Riccati-type difference equation for an
//! auxiliary sequence `c_n`, the constant in
//! `P_{n+j+1,n} - P_{n+j,n+1} = c_n P_{n+j,n}` (and its analogue on the
//! second axis).
//!
//! Everything is exact; a vanishing denominator is reported as
//! [`Error::Normality`] at the level and `n` where it occurs.

use num_traits::{One, Zero};

use crate::error::{Axis, Error, Result};
use crate::numerics::{checked_div, Rational};

/// A sequence stored densely over `start..start + len`. Reads outside that
/// window are errors, never implicit zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedSeq {
    start: usize,
    values: Vec<Rational>,
}

impl IndexedSeq {
    pub fn new(start: usize, values: Vec<Rational>) -> Self {
        IndexedSeq { start, values }
    }

    pub fn get(&self, n: usize) -> Option<&Rational> {
        n.checked_sub(self.start).and_then(|i| self.values.get(i))
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// One past the last stored index.
    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.values.iter().enumerate().map(|(i, v)| (i + self.start, v))
    }

    fn truncate_to(&mut self, top: usize) {
        let keep = (top + 1).saturating_sub(self.start);
        self.values.truncate(keep);
    }
}

/// Recurrence coefficients `(beta, gamma, delta)` on one shifted step-line.
///
/// On axis e1 at level `j >= 1` the sequences start at index `j` with
/// `gamma_j = delta_j = delta_{j+1} = 0`. On axis e2 at level `k + 1` they
/// start at `k` with `gamma_k = delta_k = delta_{k+1} = 0`. Level 0 is the
/// unshifted step-line, shared by both axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepLineCoeffs {
    axis: Axis,
    level: usize,
    beta: IndexedSeq,
    gamma: IndexedSeq,
    delta: IndexedSeq,
}

/// Index of the first stored coefficient at a given shift level.
fn first_index(axis: Axis, level: usize) -> usize {
    match axis {
        Axis::E1 => level,
        Axis::E2 => level.saturating_sub(1),
    }
}

impl StepLineCoeffs {
    /// Unshifted step-line coefficients, all indexed from zero.
    ///
    /// `gamma_0`, `delta_0` and `delta_1` multiply polynomials that do not
    /// exist, so they must be zero when present.
    pub fn from_level0(
        beta: Vec<Rational>,
        gamma: Vec<Rational>,
        delta: Vec<Rational>,
    ) -> Result<Self> {
        for (name, value) in [
            ("gamma_0", gamma.first()),
            ("delta_0", delta.first()),
            ("delta_1", delta.get(1)),
        ] {
            if value.is_some_and(|v| !v.is_zero()) {
                return Err(Error::Domain(format!("{name} must be zero on the step-line")));
            }
        }
        Ok(StepLineCoeffs {
            axis: Axis::E1,
            level: 0,
            beta: IndexedSeq::new(0, beta),
            gamma: IndexedSeq::new(0, gamma),
            delta: IndexedSeq::new(0, delta),
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn first_index(&self) -> usize {
        first_index(self.axis, self.level)
    }

    /// Highest index covered by all three sequences, `None` if any is empty.
    pub fn top(&self) -> Option<usize> {
        let end = self.beta.end().min(self.gamma.end()).min(self.delta.end());
        (end > self.first_index()).then(|| end - 1)
    }

    fn lookup<'a>(&self, seq: &'a IndexedSeq, name: &str, n: usize) -> Result<&'a Rational> {
        seq.get(n).ok_or_else(|| {
            let label = match (self.axis, self.level) {
                (_, 0) => format!("{name} (step-line)"),
                (Axis::E1, l) => format!("{name}^({l},0)"),
                (Axis::E2, l) => format!("{name}^(0,{l})"),
            };
            Error::range(label, n)
        })
    }

    pub fn beta(&self, n: usize) -> Result<&Rational> {
        self.lookup(&self.beta, "beta", n)
    }

    pub fn gamma(&self, n: usize) -> Result<&Rational> {
        self.lookup(&self.gamma, "gamma", n)
    }

    pub fn delta(&self, n: usize) -> Result<&Rational> {
        self.lookup(&self.delta, "delta", n)
    }

    pub fn betas(&self) -> &IndexedSeq {
        &self.beta
    }

    pub fn gammas(&self) -> &IndexedSeq {
        &self.gamma
    }

    pub fn deltas(&self) -> &IndexedSeq {
        &self.delta
    }

    /// Copy restricted to indices `<= top`.
    pub fn truncated(&self, top: usize) -> Self {
        let mut out = self.clone();
        out.beta.truncate_to(top);
        out.gamma.truncate_to(top);
        out.delta.truncate_to(top);
        out
    }

    /// Coefficients at an arbitrary level, each vector starting at
    /// [`first_index`](Self::first_index). Level 0 is stored on axis e1.
    pub(crate) fn from_parts(
        axis: Axis,
        level: usize,
        beta: Vec<Rational>,
        gamma: Vec<Rational>,
        delta: Vec<Rational>,
    ) -> Self {
        let axis = if level == 0 { Axis::E1 } else { axis };
        let start = first_index(axis, level);
        StepLineCoeffs {
            axis,
            level,
            beta: IndexedSeq::new(start, beta),
            gamma: IndexedSeq::new(start, gamma),
            delta: IndexedSeq::new(start, delta),
        }
    }

    fn require_top(&self, top: usize) -> Result<()> {
        self.beta(top)?;
        self.gamma(top)?;
        self.delta(top)?;
        Ok(())
    }
}

/// The auxiliary sequence linking two neighbouring shift levels:
/// `c_n^{(j,0)}` for axis e1 (level `j >= 1`) or `c_n^{(0,k)}` for axis e2
/// (level `k >= 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CSequence {
    axis: Axis,
    level: usize,
    values: Vec<Rational>,
}

impl CSequence {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Result<&Rational> {
        self.values.get(n).ok_or_else(|| {
            let label = match self.axis {
                Axis::E1 => format!("c^({},0)", self.level),
                Axis::E2 => format!("c^(0,{})", self.level),
            };
            Error::range(label, n)
        })
    }
}

/// Two algebraically equivalent orderings of the per-`n` update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateOrder {
    /// New `delta_{2n+j}` first, then `delta_{2n+j+1}` and `c_n` as ratios of it.
    #[default]
    Reordered,
    /// `c_n` straight from the Riccati equation, then the coefficients.
    Original,
}

fn check_input_level(prev: &StepLineCoeffs, axis: Axis) -> Result<()> {
    if prev.level > 0 && prev.axis != axis {
        return Err(Error::Domain(format!(
            "cannot shift along {axis}: input is level {} on axis {}",
            prev.level, prev.axis
        )));
    }
    Ok(())
}

/// Shift from level `j - 1` to level `j` along e1 with the default update order.
///
/// `depth` is the `N` of the computed ranges: the result covers indices
/// `j..=2N - j + 1`, and `prev` must cover `2N - j + 1`.
pub fn shift_e1(prev: &StepLineCoeffs, depth: usize) -> Result<(StepLineCoeffs, CSequence)> {
    shift_e1_with(prev, depth, UpdateOrder::default())
}

pub fn shift_e1_with(
    prev: &StepLineCoeffs,
    depth: usize,
    order: UpdateOrder,
) -> Result<(StepLineCoeffs, CSequence)> {
    check_input_level(prev, Axis::E1)?;
    let j = prev.level + 1;
    if j > depth {
        return Err(Error::Domain(format!("shift level {j} exceeds depth {depth}")));
    }
    let top = 2 * depth - j + 1;
    prev.require_top(top)?;

    let gamma_j = prev.gamma(j)?;
    if gamma_j.is_zero() {
        return Err(Error::Init {
            axis: Axis::E1,
            level: j,
            quantity: format!("gamma_{j}^({},0)", j - 1),
        });
    }
    let c0 = -prev.delta(j + 1)? / gamma_j;

    let len = top + 1 - j;
    let mut beta = Vec::with_capacity(len);
    let mut gamma = Vec::with_capacity(len);
    let mut delta = Vec::with_capacity(len);

    beta.push(prev.beta(j)? - &c0);
    beta.push(prev.beta(j + 1)? + &c0);
    gamma.push(Rational::zero());
    gamma.push(prev.gamma(j + 1)? + &c0 * (prev.beta(j)? - &beta[1]));
    delta.push(Rational::zero());
    delta.push(Rational::zero());

    let mut c = Vec::with_capacity(depth - j + 1);
    c.push(c0);
    for n in 1..=depth - j {
        let i = 2 * n + j;
        let (b_i, b_next) = (prev.beta(i)?, prev.beta(i + 1)?);
        let (g_i, g_next) = (prev.gamma(i)?, prev.gamma(i + 1)?);
        let (d_i, d_next) = (prev.delta(i)?, prev.delta(i + 1)?);
        let c_prev = &c[n - 1];

        let new_d_i = d_i - c_prev * g_i;
        if new_d_i.is_zero() {
            return Err(Error::Normality {
                axis: Axis::E1,
                level: j,
                n,
                denominator: format!(
                    "delta_{i}^({j},0) = delta_{i}^({p},0) - c_{m}^({j},0) gamma_{i}^({p},0)",
                    p = j - 1,
                    m = n - 1
                ),
            });
        }
        let (c_n, new_d_next) = match order {
            UpdateOrder::Reordered => {
                let new_d_next = d_next * d_i / &new_d_i;
                let c_n = c_prev * d_next / &new_d_i;
                (c_n, new_d_next)
            }
            UpdateOrder::Original => {
                let c_n = c_prev * d_next / &new_d_i;
                let new_d_next = d_next + &c_n * g_i;
                (c_n, new_d_next)
            }
        };
        let new_b_next = b_next + &c_n;
        beta.push(b_i - &c_n);
        gamma.push(g_i.clone());
        delta.push(new_d_i);
        gamma.push(g_next + &c_n * (b_i - &new_b_next));
        beta.push(new_b_next);
        delta.push(new_d_next);
        c.push(c_n);
    }

    Ok((
        StepLineCoeffs {
            axis: Axis::E1,
            level: j,
            beta: IndexedSeq::new(j, beta),
            gamma: IndexedSeq::new(j, gamma),
            delta: IndexedSeq::new(j, delta),
        },
        CSequence {
            axis: Axis::E1,
            level: j,
            values: c,
        },
    ))
}

/// `c_0^{(0,0)} = m_1(mu_2) / m_0(mu_2) - beta_0`, the free parameter of the e2 axis.
pub fn seed_c00(m0_mu2: &Rational, m1_mu2: &Rational, beta0: &Rational) -> Result<Rational> {
    if m0_mu2.is_zero() {
        return Err(Error::Domain("second measure has zero total mass".into()));
    }
    Ok(m1_mu2 / m0_mu2 - beta0)
}

/// `c_0^{(0,k)} = delta_{k+1}^{(0,k)} / gamma_k^{(0,k)}` for a level `k >= 1` on axis e2.
pub fn e2_initial_c(level_k: &StepLineCoeffs) -> Result<Rational> {
    let k = level_k.level;
    if k == 0 || level_k.axis != Axis::E2 {
        return Err(Error::Domain(
            "c_0^(0,0) is a free parameter; it has no closed form".into(),
        ));
    }
    let gamma_k = level_k.gamma(k)?;
    if gamma_k.is_zero() {
        return Err(Error::Init {
            axis: Axis::E2,
            level: k,
            quantity: format!("gamma_{k}^(0,{k})"),
        });
    }
    Ok(level_k.delta(k + 1)? / gamma_k)
}

/// Shift from level `k` to level `k + 1` along e2 with the default update order.
///
/// For `k = 0` the seed `c_0^{(0,0)}` is the caller's choice (see
/// [`seed_c00`]). For `k >= 1` it is determined by the level-`k` data and a
/// different value is rejected with [`Error::SeedMismatch`].
pub fn shift_e2(
    prev: &StepLineCoeffs,
    c0_seed: &Rational,
    depth: usize,
) -> Result<(StepLineCoeffs, CSequence)> {
    shift_e2_with(prev, c0_seed, depth, UpdateOrder::default())
}

pub fn shift_e2_with(
    prev: &StepLineCoeffs,
    c0_seed: &Rational,
    depth: usize,
    order: UpdateOrder,
) -> Result<(StepLineCoeffs, CSequence)> {
    check_input_level(prev, Axis::E2)?;
    let k = prev.level;
    if k > depth {
        return Err(Error::Domain(format!("shift level {k} exceeds depth {depth}")));
    }
    if k >= 1 {
        let expected = e2_initial_c(prev)?;
        if &expected != c0_seed {
            return Err(Error::SeedMismatch {
                level: k,
                expected: Box::new(expected),
                supplied: Box::new(c0_seed.clone()),
            });
        }
    }
    let top = 2 * depth - k + 1;
    prev.require_top(top)?;
    let c0 = c0_seed.clone();

    let len = top + 1 - k;
    let mut beta = Vec::with_capacity(len);
    let mut gamma = Vec::with_capacity(len);
    let mut delta = Vec::with_capacity(len);

    beta.push(prev.beta(k)? + &c0);
    beta.push(prev.beta(k + 1)? - &c0);
    gamma.push(Rational::zero());
    gamma.push(prev.gamma(k + 1)? - &c0 * (prev.beta(k)? - &beta[1]));
    delta.push(Rational::zero());
    delta.push(Rational::zero());

    let mut c = Vec::with_capacity(depth - k + 1);
    c.push(c0);
    for n in 1..=depth - k {
        let i = 2 * n + k;
        let (b_i, b_next) = (prev.beta(i)?, prev.beta(i + 1)?);
        let (g_i, g_next) = (prev.gamma(i)?, prev.gamma(i + 1)?);
        let (d_i, d_next) = (prev.delta(i)?, prev.delta(i + 1)?);
        let c_prev = &c[n - 1];

        let new_d_i = d_i + c_prev * g_i;
        if new_d_i.is_zero() {
            return Err(Error::Normality {
                axis: Axis::E2,
                level: k + 1,
                n,
                denominator: format!(
                    "delta_{i}^(0,{l}) = delta_{i}^(0,{k}) + c_{m}^(0,{k}) gamma_{i}^(0,{k})",
                    l = k + 1,
                    m = n - 1
                ),
            });
        }
        let (c_n, new_d_next) = match order {
            UpdateOrder::Reordered => {
                let new_d_next = d_next * d_i / &new_d_i;
                let c_n = c_prev * d_next / &new_d_i;
                (c_n, new_d_next)
            }
            UpdateOrder::Original => {
                let c_n = c_prev * d_next / &new_d_i;
                let new_d_next = d_next - &c_n * g_i;
                (c_n, new_d_next)
            }
        };
        let new_b_next = b_next - &c_n;
        beta.push(b_i + &c_n);
        gamma.push(g_i.clone());
        delta.push(new_d_i);
        gamma.push(g_next - &c_n * (b_i - &new_b_next));
        beta.push(new_b_next);
        delta.push(new_d_next);
        c.push(c_n);
    }

    Ok((
        StepLineCoeffs {
            axis: Axis::E2,
            level: k + 1,
            beta: IndexedSeq::new(k, beta),
            gamma: IndexedSeq::new(k, gamma),
            delta: IndexedSeq::new(k, delta),
        },
        CSequence {
            axis: Axis::E2,
            level: k,
            values: c,
        },
    ))
}

/// `d_n = 1 / c_n` from the explicit sum-product solution of the linearised
/// Riccati equation.
///
/// `prev` is the level the c-sequence is computed from: level `j - 1` for
/// `c^{(j,0)}` on axis e1, level `k` for `c^{(0,k)}` on axis e2. The
/// linearised recursions are
///
/// ```text
/// e1: d_n = (d_{n-1} delta_{2n+j} - gamma_{2n+j}) / delta_{2n+j+1}
/// e2: d_n = (d_{n-1} delta_{2n+k} + gamma_{2n+k}) / delta_{2n+k+1}
/// ```
///
/// so the accumulated `gamma` terms enter with a minus sign on e1 and a plus
/// sign on e2.
pub fn riccati_closed_form(
    axis: Axis,
    prev: &StepLineCoeffs,
    d0: &Rational,
    n: usize,
) -> Result<Rational> {
    check_input_level(prev, axis)?;
    let (offset, c_level, sign) = match axis {
        Axis::E1 => (prev.level + 1, prev.level + 1, -Rational::one()),
        Axis::E2 => (prev.level, prev.level, Rational::one()),
    };
    let (la, lb) = level_label(axis, prev.level);
    let delta = |idx: usize, l: usize| -> Result<Rational> {
        let d = prev.delta(idx)?;
        if d.is_zero() {
            return Err(Error::Normality {
                axis,
                level: c_level,
                n: l,
                denominator: format!("delta_{idx}^({la},{lb})"),
            });
        }
        Ok(d.clone())
    };

    let mut sum = Rational::zero();
    // prod_{l <= i} delta_{2l+o+1} / delta_{2l+o}
    let mut inverse_product = Rational::one();
    for i in 1..=n {
        let lo = delta(2 * i + offset, i)?;
        let hi = delta(2 * i + offset + 1, i)?;
        inverse_product = inverse_product * &hi / &lo;
        sum += checked_div(prev.gamma(2 * i + offset)?, &hi)? * &inverse_product;
    }
    Ok((sign * sum + d0) / inverse_product)
}

fn level_label(axis: Axis, level: usize) -> (usize, usize) {
    match axis {
        Axis::E1 => (level, 0),
        Axis::E2 => (0, level),
    }
}

/// All shift levels along one axis, up to a fixed depth.
///
/// Axis e1 holds levels `0..=N` and `c^{(j,0)}` for `1 <= j <= N`. Axis e2
/// holds levels `0..=N+1` and `c^{(0,k)}` for `0 <= k <= N`.
#[derive(Debug, Clone)]
pub struct ShiftFamily {
    axis: Axis,
    depth: usize,
    levels: Vec<StepLineCoeffs>,
    c: Vec<CSequence>,
}

impl ShiftFamily {
    /// `level0` must cover the step-line indices `0..=2N+1`.
    pub fn e1(level0: &StepLineCoeffs, depth: usize) -> Result<Self> {
        Self::e1_with(level0, depth, UpdateOrder::default())
    }

    pub fn e1_with(level0: &StepLineCoeffs, depth: usize, order: UpdateOrder) -> Result<Self> {
        if level0.level != 0 {
            return Err(Error::Domain("shift family must start at level 0".into()));
        }
        let mut levels = vec![level0.truncated(2 * depth + 1)];
        levels[0].require_top(2 * depth + 1)?;
        let mut c = Vec::with_capacity(depth);
        for _ in 1..=depth {
            let (next, cs) = shift_e1_with(levels.last().expect("non-empty"), depth, order)?;
            levels.push(next);
            c.push(cs);
        }
        Ok(ShiftFamily {
            axis: Axis::E1,
            depth,
            levels,
            c,
        })
    }

    /// `c00` is the free parameter `c_0^{(0,0)}`.
    pub fn e2(level0: &StepLineCoeffs, c00: &Rational, depth: usize) -> Result<Self> {
        Self::e2_with(level0, c00, depth, UpdateOrder::default())
    }

    pub fn e2_with(
        level0: &StepLineCoeffs,
        c00: &Rational,
        depth: usize,
        order: UpdateOrder,
    ) -> Result<Self> {
        if level0.level != 0 {
            return Err(Error::Domain("shift family must start at level 0".into()));
        }
        let mut levels = vec![level0.truncated(2 * depth + 1)];
        levels[0].require_top(2 * depth + 1)?;
        let mut c = Vec::with_capacity(depth + 1);
        let mut seed = c00.clone();
        for k in 0..=depth {
            if k >= 1 {
                seed = e2_initial_c(&levels[k])?;
            }
            let (next, cs) = shift_e2_with(&levels[k], &seed, depth, order)?;
            levels.push(next);
            c.push(cs);
        }
        Ok(ShiftFamily {
            axis: Axis::E2,
            depth,
            levels,
            c,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level(&self, level: usize) -> Result<&StepLineCoeffs> {
        self.levels
            .get(level)
            .ok_or_else(|| Error::range(format!("{} shift level", self.axis), level))
    }

    /// `c^{(j,0)}` (e1, `j >= 1`) or `c^{(0,k)}` (e2, `k >= 0`).
    pub fn c_sequence(&self, level: usize) -> Result<&CSequence> {
        let slot = match self.axis {
            Axis::E1 => level.checked_sub(1),
            Axis::E2 => Some(level),
        };
        slot.and_then(|s| self.c.get(s))
            .ok_or_else(|| Error::range(format!("{} c-sequence level", self.axis), level))
    }
}
