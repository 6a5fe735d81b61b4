//! From marginal recurrences back to nearest-neighbor and step-line coefficients.
//!
//! Directions and measures are indexed from 0 in this module. For two
//! measures the vector form maps onto [`NNGrid`] as `a = a[0]`, `b = a[1]`,
//! `c = b[0]`, `d = b[1]`.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::nearest_neighbor::{MarginalRecurrence, NNCoeffs, NNGrid};
use crate::numerics::Rational;
use crate::poly::Poly;
use crate::stepline::StepLineCoeffs;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Self {
        assert!(!components.is_empty(), "multi-index needs at least one component");
        MultiIndex(components)
    }

    pub fn zero(r: usize) -> Self {
        MultiIndex::new(vec![0; r])
    }

    /// `len * e_k`.
    pub fn axis(r: usize, k: usize, len: usize) -> Self {
        let mut c = vec![0; r];
        c[k] = len;
        MultiIndex::new(c)
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    /// `|n|`, the sum of the components.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn plus(&self, k: usize) -> Self {
        let mut c = self.0.clone();
        c[k] += 1;
        MultiIndex(c)
    }

    /// `n - e_k`, or `None` if component `k` is zero.
    pub fn minus(&self, k: usize) -> Option<Self> {
        let mut c = self.0.clone();
        c[k] = c[k].checked_sub(1)?;
        Some(MultiIndex(c))
    }

    /// Direction `k` if this is `len * e_k` with `len >= 1`.
    fn on_axis(&self) -> Option<usize> {
        let mut nonzero = self.0.iter().enumerate().filter(|(_, &c)| c > 0);
        match (nonzero.next(), nonzero.next()) {
            (Some((k, _)), None) => Some(k),
            _ => None,
        }
    }

    /// All multi-indices with `r` components summing to `len`, in
    /// descending lexicographic order.
    pub fn all_of_len(r: usize, len: usize) -> Vec<MultiIndex> {
        fn fill(prefix: &mut Vec<usize>, r: usize, left: usize, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == r {
                prefix.push(left);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for v in (0..=left).rev() {
                prefix.push(v);
                fill(prefix, r, left - v, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        fill(&mut Vec::with_capacity(r), r, len, &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `a[j]` multiplies `P_{n-e_j}`, `b[k]` is the diagonal coefficient of
/// the relation in direction `k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NNCoeffsR {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

/// Nearest-neighbor coefficients for `r` measures, keyed by multi-index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NNGridR {
    r: usize,
    max_len: usize,
    entries: HashMap<MultiIndex, NNCoeffsR>,
}

impl NNGridR {
    pub fn new(r: usize, max_len: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Domain("need at least one measure".into()));
        }
        Ok(NNGridR {
            r,
            max_len,
            entries: HashMap::new(),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn insert(&mut self, index: MultiIndex, coeffs: NNCoeffsR) -> Result<()> {
        if index.r() != self.r || index.len() > self.max_len {
            return Err(Error::range("nearest-neighbor grid", &index));
        }
        if coeffs.a.len() != self.r || coeffs.b.len() != self.r {
            return Err(Error::Domain(format!("entry at {index} must hold {} values each", self.r)));
        }
        self.entries.insert(index, coeffs);
        Ok(())
    }

    pub fn get(&self, index: &MultiIndex) -> Result<&NNCoeffsR> {
        self.entries
            .get(index)
            .ok_or_else(|| Error::range("nearest-neighbor grid", index))
    }

    pub fn contains(&self, index: &MultiIndex) -> bool {
        self.entries.contains_key(index)
    }

    /// Entries by length, then in descending lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, &NNCoeffsR)> + '_ {
        (0..=self.max_len)
            .flat_map(move |len| MultiIndex::all_of_len(self.r, len))
            .filter_map(move |idx| self.entries.get(&idx).map(|e| (idx, e)))
    }

    pub fn from_r2(grid: &NNGrid) -> Self {
        let mut out = NNGridR {
            r: 2,
            max_len: grid.max_len(),
            entries: HashMap::new(),
        };
        for (n, m, e) in grid.iter() {
            out.entries.insert(
                MultiIndex::new(vec![n, m]),
                NNCoeffsR {
                    a: vec![e.a.clone(), e.b.clone()],
                    b: vec![e.c.clone(), e.d.clone()],
                },
            );
        }
        out
    }

    pub fn to_r2(&self) -> Result<NNGrid> {
        if self.r != 2 {
            return Err(Error::Domain(format!("grid has {} measures, not 2", self.r)));
        }
        let mut grid = NNGrid::zeros(self.max_len);
        for s in 0..=self.max_len {
            for n in 0..=s {
                let e = self.get(&MultiIndex::new(vec![n, s - n]))?;
                grid.set(
                    n,
                    s - n,
                    NNCoeffs {
                        a: e.a[0].clone(),
                        b: e.a[1].clone(),
                        c: e.b[0].clone(),
                        d: e.b[1].clone(),
                    },
                )?;
            }
        }
        Ok(grid)
    }
}

fn require_len(margs: &[&MarginalRecurrence], max_len: usize) -> Result<()> {
    for m in margs {
        if m.len() <= max_len {
            return Err(Error::range(format!("marginal recurrence of mu_{}", m.measure()), max_len));
        }
    }
    Ok(())
}

/// `c - d` at `(n, m)`, rejected when zero because it is about to be a divisor.
fn kappa(grid: &NNGrid, n: usize, m: usize) -> Result<Rational> {
    let e = grid.get(n, m)?;
    let k = &e.c - &e.d;
    if k.is_zero() {
        return Err(Error::SingularSweep {
            index: vec![n, m],
            i: 0,
            j: 1,
        });
    }
    Ok(k)
}

/// Nearest-neighbor grid for two measures from their marginal recurrences
/// (indices `0..=max_len` of each), sweeping anti-diagonals `n + m = s`.
///
/// Each diagonal fills the interior `a` and `b` values, then `c` by
/// increasing `m`, then `d` from `d_{n+1,m} = c_{n,m+1} - c_{n,m} + d_{n,m}`.
pub fn nn_from_marginals_r2(
    mu1: &MarginalRecurrence,
    mu2: &MarginalRecurrence,
    max_len: usize,
) -> Result<NNGrid> {
    require_len(&[mu1, mu2], max_len)?;
    let mut g = NNGrid::zeros(max_len);
    for n in 0..=max_len {
        let e = g.get_mut(n, 0)?;
        e.c = mu1.b(n)?.clone();
        e.a = mu1.a_sq(n)?.clone();
        e.b = Rational::zero();
        let e = g.get_mut(0, n)?;
        e.d = mu2.b(n)?.clone();
        e.a = Rational::zero();
        e.b = mu2.a_sq(n)?.clone();
    }
    for s in 1..=max_len {
        for k in 1..s {
            let a = &g.get(k, s - k - 1)?.a * kappa(&g, k, s - k - 1)? / kappa(&g, k - 1, s - k - 1)?;
            let b = &g.get(k - 1, s - k)?.b * kappa(&g, k - 1, s - k)? / kappa(&g, k - 1, s - k - 1)?;
            let e = g.get_mut(k, s - k)?;
            e.a = a;
            e.b = b;
        }
        for k in 1..=s {
            let (n, m) = (s - k, k);
            let lower = g.get(n + 1, m - 1)?;
            let upper = g.get(n, m)?;
            let jump = &lower.a + &lower.b - &upper.a - &upper.b;
            let c = &g.get(n, m - 1)?.c + jump / kappa(&g, n, m - 1)?;
            g.get_mut(n, m)?.c = c;
        }
        for k in 1..=s {
            let d = &g.get(k - 1, s - k + 1)?.c - &g.get(k - 1, s - k)?.c + &g.get(k - 1, s - k)?.d;
            g.get_mut(k, s - k)?.d = d;
        }
    }
    Ok(g)
}

/// Level-0 step-line coefficients for indices `0..=top` from a grid with
/// `max_len >= top`:
///
/// ```text
/// beta_{2n}   = c_{n,n}         beta_{2n+1}  = d_{n+1,n}
/// gamma_{2n}  = a_{n,n}+b_{n,n}   gamma_{2n+1} = a_{n+1,n}+b_{n+1,n}
/// delta_{2n}  = a_{n,n}(c-d)_{n-1,n-1}
/// delta_{2n+1} = b_{n+1,n}(d-c)_{n,n-1}
/// ```
pub fn stepline_from_nn(grid: &NNGrid, top: usize) -> Result<StepLineCoeffs> {
    if top > grid.max_len() {
        return Err(Error::range("nearest-neighbor grid length", top));
    }
    let mut beta = Vec::with_capacity(top + 1);
    let mut gamma = Vec::with_capacity(top + 1);
    let mut delta = Vec::with_capacity(top + 1);
    for i in 0..=top {
        let n = i / 2;
        if i % 2 == 0 {
            let e = grid.get(n, n)?;
            beta.push(e.c.clone());
            gamma.push(if n == 0 { Rational::zero() } else { &e.a + &e.b });
            delta.push(if n == 0 {
                Rational::zero()
            } else {
                let p = grid.get(n - 1, n - 1)?;
                &e.a * (&p.c - &p.d)
            });
        } else {
            let e = grid.get(n + 1, n)?;
            beta.push(e.d.clone());
            gamma.push(&e.a + &e.b);
            delta.push(if n == 0 {
                Rational::zero()
            } else {
                let p = grid.get(n, n - 1)?;
                &e.b * (&p.d - &p.c)
            });
        }
    }
    StepLineCoeffs::from_level0(beta, gamma, delta)
}

/// Which admissible auxiliary direction the general sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepCheck {
    /// Smallest admissible direction only.
    #[default]
    Off,
    /// Also recompute with the largest admissible direction and require equality.
    CrossCheck,
}

fn b_gap(entry: &NNCoeffsR, index: &MultiIndex, i: usize, j: usize) -> Result<Rational> {
    let gap = &entry.b[j] - &entry.b[i];
    if gap.is_zero() {
        return Err(Error::SingularSweep {
            index: index.components().to_vec(),
            i,
            j,
        });
    }
    Ok(gap)
}

/// Nearest-neighbor coefficients for `r >= 2` measures from their marginal
/// recurrences, by induction on `|n|`.
///
/// For `m = n + e_j` with `m_i >= 1`:
///
/// ```text
/// a_{m,i} = a_{n,i} (b_{n,j} - b_{n,i}) / (b_{n-e_i,j} - b_{n-e_i,i})
/// b_{m,i} = b_{n,i} + (sum_k a_{n+e_j,k} - sum_k a_{n+e_i,k}) / (b_{n,j} - b_{n,i})
/// ```
pub fn nn_from_marginals_general_r(
    margs: &[MarginalRecurrence],
    max_len: usize,
    check: SweepCheck,
) -> Result<NNGridR> {
    let r = margs.len();
    if r < 2 {
        return Err(Error::Domain(format!("need at least 2 measures, got {r}")));
    }
    require_len(&margs.iter().collect::<Vec<_>>(), max_len)?;
    let mut grid = NNGridR::new(r, max_len)?;
    grid.insert(
        MultiIndex::zero(r),
        NNCoeffsR {
            a: vec![Rational::zero(); r],
            b: margs.iter().map(|m| m.b(0).cloned()).collect::<Result<_>>()?,
        },
    )?;

    let a_via = |grid: &NNGridR, m: &MultiIndex, i: usize, j: usize| -> Result<Rational> {
        let n = m.minus(j).expect("m_j >= 1");
        let below = n.minus(i).expect("n_i = m_i >= 1");
        let here = grid.get(&n)?;
        Ok(&here.a[i] * (&here.b[j] - &here.b[i]) / b_gap(grid.get(&below)?, &below, i, j)?)
    };
    let b_via = |grid: &NNGridR,
                 partial: &HashMap<MultiIndex, Vec<Rational>>,
                 m: &MultiIndex,
                 i: usize,
                 j: usize|
     -> Result<Rational> {
        let n = m.minus(j).expect("m_j >= 1");
        let here = grid.get(&n)?;
        let sum_a = |idx: &MultiIndex| -> Rational { partial[idx].iter().sum() };
        let jump = sum_a(m) - sum_a(&n.plus(i));
        Ok(&here.b[i] + jump / b_gap(here, &n, i, j)?)
    };

    for len in 1..=max_len {
        let level = MultiIndex::all_of_len(r, len);
        let mut partial: HashMap<MultiIndex, Vec<Rational>> = HashMap::new();
        for m in &level {
            let mut a = vec![Rational::zero(); r];
            for (i, slot) in a.iter_mut().enumerate() {
                if m.components()[i] == 0 {
                    continue;
                }
                if m.on_axis() == Some(i) {
                    *slot = margs[i].a_sq(len)?.clone();
                    continue;
                }
                let mut admissible = (0..r).filter(|&j| j != i && m.components()[j] >= 1);
                let first = admissible.next().expect("off-axis index");
                *slot = a_via(&grid, m, i, first)?;
                if let (SweepCheck::CrossCheck, Some(last)) = (check, admissible.next_back()) {
                    let other = a_via(&grid, m, i, last)?;
                    if other != *slot {
                        return Err(Error::Internal(format!(
                            "a_({m},{i}) differs between directions {first} and {last}"
                        )));
                    }
                }
            }
            partial.insert(m.clone(), a);
        }
        for m in &level {
            let mut b = vec![Rational::zero(); r];
            for (i, slot) in b.iter_mut().enumerate() {
                if m.on_axis() == Some(i) {
                    *slot = margs[i].b(len)?.clone();
                    continue;
                }
                let mut admissible = (0..r).filter(|&j| j != i && m.components()[j] >= 1);
                let first = admissible.next().expect("some other direction is nonzero");
                *slot = b_via(&grid, &partial, m, i, first)?;
                if let (SweepCheck::CrossCheck, Some(last)) = (check, admissible.next_back()) {
                    let other = b_via(&grid, &partial, m, i, last)?;
                    if other != *slot {
                        return Err(Error::Internal(format!(
                            "b_({m},{i}) differs between directions {first} and {last}"
                        )));
                    }
                }
            }
            let a = partial[m].clone();
            grid.insert(m.clone(), NNCoeffsR { a, b })?;
        }
    }
    Ok(grid)
}

/// Square matrix of polynomials in `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMatrix {
    entries: Vec<Vec<Poly>>,
}

impl TransferMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> &Poly {
        &self.entries[row][col]
    }

    pub fn rows(&self) -> &[Vec<Poly>] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Poly::is_zero)
    }

    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        let n = self.size();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(Poly::zero(), |acc, k| {
                            &acc + &(&self.entries[i][k] * &rhs.entries[k][j])
                        })
                    })
                    .collect()
            })
            .collect();
        TransferMatrix { entries }
    }

    pub fn sub(&self, rhs: &TransferMatrix) -> TransferMatrix {
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p - q).collect())
            .collect();
        TransferMatrix { entries }
    }

    /// `R_k(n)`, advancing `(P_n, P_{n-e_1}, ..., P_{n-e_r})` to `n + e_k`.
    ///
    /// Row `j + 1` reads `P_{n+e_k-e_j} = P_n + (b_{n-e_j,j} - b_{n-e_j,k}) P_{n-e_j}`.
    /// For `j != k` with `n_j = 0` that polynomial has a negative index and
    /// the row is zero.
    pub fn new(grid: &NNGridR, n: &MultiIndex, k: usize) -> Result<Self> {
        let r = grid.r();
        if k >= r {
            return Err(Error::range("direction", k));
        }
        let here = grid.get(n)?;
        let mut entries = vec![vec![Poly::zero(); r + 1]; r + 1];
        entries[0][0] = Poly::linear(&here.b[k]);
        for j in 0..r {
            entries[0][j + 1] = Poly::constant(-here.a[j].clone());
            if j == k {
                entries[j + 1][0] = Poly::one();
            } else if let Some(prev) = n.minus(j) {
                let e = grid.get(&prev)?;
                entries[j + 1][0] = Poly::one();
                entries[j + 1][j + 1] = Poly::constant(&e.b[j] - &e.b[k]);
            }
        }
        Ok(TransferMatrix { entries })
    }
}

/// Compares `R_i(n+e_j) R_j(n)` with `R_j(n+e_i) R_i(n)`; returns whether
/// they agree identically in `x` and their difference.
pub fn compatibility_check(
    grid: &NNGridR,
    n: &MultiIndex,
    i: usize,
    j: usize,
) -> Result<(bool, TransferMatrix)> {
    let left = TransferMatrix::new(grid, &n.plus(j), i)?.mul(&TransferMatrix::new(grid, n, j)?);
    let right = TransferMatrix::new(grid, &n.plus(i), j)?.mul(&TransferMatrix::new(grid, n, i)?);
    let residual = left.sub(&right);
    Ok((residual.is_zero(), residual))
}

/// One evaluated partial-difference identity, as `lhs - rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual {
    pub equation: &'static str,
    pub index: Vec<usize>,
    pub directions: Option<(usize, usize)>,
    pub value: Rational,
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

/// The four two-measure identities at every `(n, m)` with `n + m < max_len`:
///
/// ```text
/// cd:  d_{n+1,m} - d_{n,m} - (c_{n,m+1} - c_{n,m})
/// a+b: a_{n+1,m}+b_{n+1,m} - a_{n,m+1}-b_{n,m+1} - (d_{n+1,m} c_{n,m} - d_{n,m} c_{n,m+1})
/// acd: a_{n,m+1} (c-d)_{n-1,m} - a_{n,m} (c-d)_{n,m}          (n >= 1)
/// bcd: b_{n+1,m} (c-d)_{n,m-1} - b_{n,m} (c-d)_{n,m}          (m >= 1)
/// ```
///
/// The ratio identities are cross-multiplied so that zero denominators do
/// not need special handling.
pub fn pd_residuals_r2(grid: &NNGrid) -> Result<Vec<Residual>> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<Residual>, equation, n, m, value| {
        out.push(Residual {
            equation,
            index: vec![n, m],
            directions: None,
            value,
        })
    };
    for s in 0..grid.max_len() {
        for n in 0..=s {
            let m = s - n;
            let e = grid.get(n, m)?;
            let right = grid.get(n + 1, m)?;
            let up = grid.get(n, m + 1)?;
            let kap = &e.c - &e.d;
            push(&mut out, "cd", n, m, &right.d - &e.d - (&up.c - &e.c));
            push(
                &mut out,
                "a+b",
                n,
                m,
                &right.a + &right.b - &up.a - &up.b - (&right.d * &e.c - &e.d * &up.c),
            );
            if n >= 1 {
                let left = grid.get(n - 1, m)?;
                push(&mut out, "acd", n, m, &up.a * (&left.c - &left.d) - &e.a * &kap);
            }
            if m >= 1 {
                let down = grid.get(n, m - 1)?;
                push(&mut out, "bcd", n, m, &right.b * (&down.c - &down.d) - &e.b * &kap);
            }
        }
    }
    Ok(out)
}

/// The general identities for every `n` with `|n| < max_len` and `i != j`:
///
/// ```text
/// b_step: b_{n+e_i,j} - b_{n,j} - (b_{n+e_j,i} - b_{n,i})
/// a_sum:  sum_k a_{n+e_j,k} - sum_k a_{n+e_i,k} - (b_{n+e_j,i} b_{n,j} - b_{n,i} b_{n+e_i,j})
/// a_ratio: a_{n+e_j,i} (b_{n-e_i,j} - b_{n-e_i,i}) - a_{n,i} (b_{n,j} - b_{n,i})   (n_i >= 1)
/// ```
pub fn pd_residuals(grid: &NNGridR) -> Result<Vec<Residual>> {
    let r = grid.r();
    let mut out = Vec::new();
    for len in 0..grid.max_len() {
        for n in MultiIndex::all_of_len(r, len) {
            let e = grid.get(&n)?;
            for i in 0..r {
                for j in (0..r).filter(|&j| j != i) {
                    let ei = grid.get(&n.plus(i))?;
                    let ej = grid.get(&n.plus(j))?;
                    let mut push = |equation, value| {
                        out.push(Residual {
                            equation,
                            index: n.components().to_vec(),
                            directions: Some((i, j)),
                            value,
                        })
                    };
                    push("b_step", &ei.b[j] - &e.b[j] - (&ej.b[i] - &e.b[i]));
                    let sum_j: Rational = ej.a.iter().sum();
                    let sum_i: Rational = ei.a.iter().sum();
                    push("a_sum", sum_j - sum_i - (&ej.b[i] * &e.b[j] - &e.b[i] * &ei.b[j]));
                    if let Some(below) = n.minus(i) {
                        let lo = grid.get(&below)?;
                        push(
                            "a_ratio",
                            &ej.a[i] * (&lo.b[j] - &lo.b[i]) - &e.a[i] * (&e.b[j] - &e.b[i]),
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}
