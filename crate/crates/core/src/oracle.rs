//! Ground truth straight from moments.
//!
//! Type II polynomials are obtained by solving their orthogonality system
//! with fraction-free elimination, and recurrence coefficients are read off
//! by expanding `x P` in neighbouring polynomials. Nothing here uses the
//! recursions of the other modules.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Axis, Error, Result};
use crate::inverse::{MultiIndex, NNCoeffsR, NNGridR};
use crate::nearest_neighbor::NNGrid;
use crate::numerics::Rational;
use crate::poly::Poly;
use crate::stepline::StepLineCoeffs;

/// Power moments `m_k(mu_i)` for `0 <= k <= max_degree` of each measure.
///
/// Measures are indexed from 0 here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentTable {
    tables: Vec<Vec<Rational>>,
}

impl MomentTable {
    pub fn new(tables: Vec<Vec<Rational>>) -> Result<Self> {
        if tables.is_empty() || tables.iter().any(Vec::is_empty) {
            return Err(Error::Domain("moment table needs at least one moment per measure".into()));
        }
        Ok(MomentTable { tables })
    }

    /// Number of measures.
    pub fn r(&self) -> usize {
        self.tables.len()
    }

    /// Highest degree available for every measure.
    pub fn max_degree(&self) -> usize {
        self.tables.iter().map(Vec::len).min().unwrap_or(0) - 1
    }

    pub fn measure(&self, i: usize) -> Result<&[Rational]> {
        self.tables
            .get(i)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::range("measure", i))
    }

    pub fn moment(&self, i: usize, k: usize) -> Result<&Rational> {
        self.measure(i)?
            .get(k)
            .ok_or_else(|| Error::range(format!("moments of measure {i}"), k))
    }

    /// `m_0 > 0` for each measure.
    pub fn check_positive_mass(&self) -> Result<()> {
        match self.tables.iter().position(|t| !t[0].is_positive()) {
            Some(i) => Err(Error::Domain(format!("measure {i} has m_0 = {}", self.tables[i][0]))),
            None => Ok(()),
        }
    }
}

/// Outcome of an exact linear solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solve {
    Unique(Vec<Rational>),
    /// Rank below the number of unknowns.
    Singular,
    /// Full column rank, but the extra equations disagree.
    Inconsistent,
}

fn integer_row(row: &[Rational], rhs: &Rational) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .chain(std::iter::once(rhs))
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    row.iter()
        .chain(std::iter::once(rhs))
        .map(|q| q.numer() * (&lcm / q.denom()))
        .collect()
}

/// Solves `a x = b` for `rows >= unknowns` with fraction-free (Bareiss)
/// elimination and partial row pivoting.
pub fn solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Solve {
    let unknowns = a.first().map_or(0, Vec::len);
    let rows = a.len();
    let mut m: Vec<Vec<BigInt>> = a.iter().zip(b).map(|(row, r)| integer_row(row, r)).collect();
    let mut prev = BigInt::one();
    for k in 0..unknowns {
        let Some(p) = (k..rows).find(|&i| !m[i][k].is_zero()) else {
            return Solve::Singular;
        };
        m.swap(k, p);
        let pivot_row = m[k].clone();
        for row in m.iter_mut().skip(k + 1) {
            let factor = row[k].clone();
            for j in k + 1..=unknowns {
                row[j] = (&pivot_row[k] * &row[j] - &factor * &pivot_row[j]) / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = pivot_row[k].clone();
    }
    if m[unknowns..].iter().any(|row| !row[unknowns].is_zero()) {
        return Solve::Inconsistent;
    }
    let mut x = vec![Rational::zero(); unknowns];
    for k in (0..unknowns).rev() {
        let mut acc = Rational::from_integer(m[k][unknowns].clone());
        for j in k + 1..unknowns {
            acc -= Rational::from_integer(m[k][j].clone()) * &x[j];
        }
        x[k] = acc / Rational::from_integer(m[k][k].clone());
    }
    Solve::Unique(x)
}

/// The monic type II polynomial of degree `|n|` with
/// `int x^k P dmu_j = 0` for `0 <= k < n_j`.
pub fn mop_from_moments(moments: &MomentTable, index: &MultiIndex) -> Result<Poly> {
    if index.r() != moments.r() {
        return Err(Error::Domain(format!(
            "multi-index has {} components for {} measures",
            index.r(),
            moments.r()
        )));
    }
    let deg = index.len();
    let mut rows = Vec::with_capacity(deg);
    let mut rhs = Vec::with_capacity(deg);
    for (j, &nj) in index.components().iter().enumerate() {
        for k in 0..nj {
            let row: Result<Vec<Rational>> =
                (0..deg).map(|i| moments.moment(j, i + k).cloned()).collect();
            rows.push(row?);
            rhs.push(-moments.moment(j, deg + k)?);
        }
    }
    match solve_exact(&rows, &rhs) {
        Solve::Unique(mut coeffs) => {
            coeffs.push(Rational::one());
            Ok(Poly::new(coeffs))
        }
        Solve::Singular | Solve::Inconsistent => {
            Err(Error::NonNormalIndex(index.components().to_vec()))
        }
    }
}

/// `residual_k = sum_i p_i m_{i+k}(mu_j)` for `0 <= k < count`.
pub fn orthogonality_residuals(
    p: &Poly,
    moments: &MomentTable,
    j: usize,
    count: usize,
) -> Result<Vec<Rational>> {
    (0..count)
        .map(|k| {
            p.coeffs()
                .iter()
                .enumerate()
                .try_fold(Rational::zero(), |acc, (i, c)| {
                    Ok(acc + c * moments.moment(j, i + k)?)
                })
        })
        .collect()
}

/// Memoised type II polynomials for one moment table.
#[derive(Debug)]
pub struct Oracle<'a> {
    moments: &'a MomentTable,
    polys: HashMap<Vec<usize>, Poly>,
}

impl<'a> Oracle<'a> {
    pub fn new(moments: &'a MomentTable) -> Self {
        Oracle {
            moments,
            polys: HashMap::new(),
        }
    }

    pub fn mop(&mut self, index: &MultiIndex) -> Result<Poly> {
        if let Some(p) = self.polys.get(index.components()) {
            return Ok(p.clone());
        }
        let p = mop_from_moments(self.moments, index)?;
        self.polys.insert(index.components().to_vec(), p.clone());
        Ok(p)
    }

    /// Nearest-neighbor coefficients at `index`: `x P_n - P_{n+e_k}` expanded
    /// in `P_n` and the `P_{n-e_j}`, for every direction `k`. The
    /// `a`-vector must come out the same for every `k`.
    pub fn nn(&mut self, index: &MultiIndex) -> Result<NNCoeffsR> {
        let r = index.r();
        let deg = index.len();
        let p = self.mop(index)?;
        let lower: Vec<(usize, Poly)> = (0..r)
            .filter_map(|j| index.minus(j).map(|m| (j, m)))
            .map(|(j, m)| self.mop(&m).map(|q| (j, q)))
            .collect::<Result<_>>()?;
        let mut basis = vec![&p];
        basis.extend(lower.iter().map(|(_, q)| q));
        let rows: Vec<Vec<Rational>> = (0..=deg)
            .map(|i| basis.iter().map(|q| q.coeff(i)).collect())
            .collect();

        let mut a_shared: Option<Vec<Rational>> = None;
        let mut b = Vec::with_capacity(r);
        for k in 0..r {
            let target = &p.shift_up() - &self.mop(&index.plus(k))?;
            let rhs: Vec<Rational> = (0..=deg).map(|i| target.coeff(i)).collect();
            let sol = match solve_exact(&rows, &rhs) {
                Solve::Unique(sol) => sol,
                Solve::Singular => return Err(Error::NonNormalIndex(index.components().to_vec())),
                Solve::Inconsistent => {
                    return Err(Error::Internal(format!(
                        "x P - P_(n+e_{k}) is not in the neighbour span at {:?}",
                        index.components()
                    )))
                }
            };
            let mut a = vec![Rational::zero(); r];
            for ((j, _), v) in lower.iter().zip(&sol[1..]) {
                a[*j] = v.clone();
            }
            match &a_shared {
                Some(prev) if prev != &a => {
                    return Err(Error::Internal(format!(
                        "a-vector depends on direction at {:?}",
                        index.components()
                    )))
                }
                Some(_) => {}
                None => a_shared = Some(a),
            }
            b.push(sol[0].clone());
        }
        Ok(NNCoeffsR {
            a: a_shared.unwrap_or_default(),
            b,
        })
    }
}

/// Nearest-neighbor coefficients at one multi-index.
pub fn nn_oracle(moments: &MomentTable, index: &MultiIndex) -> Result<NNCoeffsR> {
    Oracle::new(moments).nn(index)
}

/// Oracle coefficients at every multi-index of length `<= max_len`.
pub fn nn_grid_oracle(moments: &MomentTable, max_len: usize) -> Result<NNGridR> {
    let mut oracle = Oracle::new(moments);
    let mut grid = NNGridR::new(moments.r(), max_len)?;
    for len in 0..=max_len {
        for index in MultiIndex::all_of_len(moments.r(), len) {
            let entry = oracle.nn(&index)?;
            grid.insert(index, entry)?;
        }
    }
    Ok(grid)
}

/// Two-measure oracle grid in `(a, b, c, d)` form.
pub fn nn_grid_oracle_r2(moments: &MomentTable, max_len: usize) -> Result<NNGrid> {
    if moments.r() != 2 {
        return Err(Error::Domain(format!("expected 2 measures, got {}", moments.r())));
    }
    nn_grid_oracle(moments, max_len)?.to_r2()
}

/// Multi-index of the degree-`degree` polynomial on a shifted step-line of
/// two measures, or `None` below the first index.
///
/// Level 0 runs `(0,0), (1,0), (1,1), (2,1), ...`; level `j` on e1 starts at
/// `(j,0)`; level `k >= 1` on e2 starts at `(0,k-1)` and continues
/// `(0,k), (1,k), (1,k+1), ...`.
pub fn stepline_index(axis: Axis, level: usize, degree: usize) -> Option<MultiIndex> {
    let (n, m) = match (axis, level) {
        (_, 0) => (degree.div_ceil(2), degree / 2),
        (Axis::E1, j) => {
            let t = degree.checked_sub(j)?;
            (t.div_ceil(2) + j, t / 2)
        }
        (Axis::E2, k) => {
            let t = (degree + 1).checked_sub(k)?;
            if t == 0 {
                (0, k - 1)
            } else {
                // t - 1 = degree - k
                (t / 2, (t - 1) / 2 + k)
            }
        }
    };
    Some(MultiIndex::new(vec![n, m]))
}

/// Step-line coefficients at a shift level, for indices up to `top`, read
/// off by expanding `x Q_n - Q_{n+1}` in `Q_n, Q_{n-1}, Q_{n-2}`.
///
/// On a shifted level the relation at the first index also involves a
/// polynomial off the path (`P_{j-1,0}` on e1, `P_{0,k-2}` on e2); there
/// only `beta` is read and `gamma`, `delta` keep their conventional zeros.
pub fn stepline_oracle(
    moments: &MomentTable,
    axis: Axis,
    level: usize,
    top: usize,
) -> Result<StepLineCoeffs> {
    if moments.r() != 2 {
        return Err(Error::Domain(format!("expected 2 measures, got {}", moments.r())));
    }
    let mut oracle = Oracle::new(moments);
    let first = StepLineCoeffs::from_parts(axis, level, vec![], vec![], vec![]).first_index();
    let mut q = |d: usize| -> Result<Option<Poly>> {
        match stepline_index(axis, level, d) {
            Some(idx) if d >= first => oracle.mop(&idx).map(Some),
            _ => Ok(None),
        }
    };
    let (mut beta, mut gamma, mut delta) = (Vec::new(), Vec::new(), Vec::new());
    for d in first..=top {
        let qd = q(d)?.expect("degree at or above first index");
        let mut rest = &qd.shift_up() - &q(d + 1)?.expect("degree above first index");
        let mut take = |rest: &mut Poly, deg: Option<usize>| -> Result<Rational> {
            let Some(deg) = deg.filter(|&g| g >= first) else {
                return Ok(Rational::zero());
            };
            let basis = q(deg)?.expect("degree at or above first index");
            let c = rest.coeff(deg);
            *rest = &*rest - &basis.scale(&c);
            Ok(c)
        };
        beta.push(take(&mut rest, Some(d))?);
        gamma.push(take(&mut rest, d.checked_sub(1))?);
        delta.push(take(&mut rest, d.checked_sub(2))?);
        if d > first && !rest.is_zero() {
            return Err(Error::Internal(format!(
                "step-line expansion leaves a remainder at degree {d} ({axis}, level {level})"
            )));
        }
    }
    Ok(StepLineCoeffs::from_parts(axis, level, beta, gamma, delta))
}

/// `p_m` from the unshifted step-line recurrence, starting at `p_0 = 1`.
pub fn eval_stepline(coeffs: &StepLineCoeffs, m: usize) -> Result<Poly> {
    if coeffs.level() != 0 {
        return Err(Error::Domain("only the unshifted step-line starts at p_0 = 1".into()));
    }
    let mut p: Vec<Poly> = vec![Poly::one()];
    for n in 0..m {
        let mut next = &p[n].shift_up() - &p[n].scale(coeffs.beta(n)?);
        if n >= 1 {
            next = &next - &p[n - 1].scale(coeffs.gamma(n)?);
        }
        if n >= 2 {
            next = &next - &p[n - 2].scale(coeffs.delta(n)?);
        }
        p.push(next);
    }
    Ok(p.swap_remove(m))
}

/// `P_target` by walking the nearest-neighbor recurrences along `path`
/// (a list of directions) from the origin.
///
/// The walk carries `(P_n, P_{n-e_1}, ..., P_{n-e_r})`, with components of
/// negative index set to zero, and advances it by
/// `P_{n+e_k-e_j} = P_n + (b_{n-e_j,j} - b_{n-e_j,k}) P_{n-e_j}`.
pub fn eval_nn_path(grid: &NNGridR, path: &[usize]) -> Result<Poly> {
    let r = grid.r();
    let mut n = MultiIndex::zero(r);
    let mut y: Vec<Poly> = std::iter::once(Poly::one())
        .chain(std::iter::repeat_n(Poly::zero(), r))
        .collect();
    for &k in path {
        if k >= r {
            return Err(Error::range("direction", k));
        }
        let here = grid.get(&n)?;
        let mut next = vec![Poly::zero(); r + 1];
        let mut head = &y[0].shift_up() - &y[0].scale(&here.b[k]);
        for j in 0..r {
            head = &head - &y[j + 1].scale(&here.a[j]);
            next[j + 1] = if j == k {
                y[0].clone()
            } else if let Some(prev) = n.minus(j) {
                let e = grid.get(&prev)?;
                &y[0] + &y[j + 1].scale(&(&e.b[j] - &e.b[k]))
            } else {
                Poly::zero()
            };
        }
        next[0] = head;
        y = next;
        n = n.plus(k);
    }
    Ok(y.swap_remove(0))
}

/// `P_target` along the path that raises component 0 first, then 1, and so on.
pub fn eval_nn(grid: &NNGridR, target: &MultiIndex) -> Result<Poly> {
    let path: Vec<usize> = target
        .components()
        .iter()
        .enumerate()
        .flat_map(|(j, &nj)| std::iter::repeat_n(j, nj))
        .collect();
    eval_nn_path(grid, &path)
}
