//! Dense revised primal simplex, generic over the scalar type.
//!
//! `f64` is the working engine for the master problem; `BigRational` gives
//! exact optima for small reference LPs. Columns are sparse, the basis
//! inverse is kept explicitly, and pricing is Dantzig's rule with a switch to
//! Bland's rule after a run of degenerate pivots.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait LpScalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Exact arithmetic: no tolerances, no refactorization.
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Values within this of zero count as zero in pivoting decisions.
    fn tol() -> Self;
    fn from_int(x: i64) -> Self;
}

impl LpScalar for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tol() -> Self {
        1e-9
    }
    fn from_int(x: i64) -> Self {
        x as f64
    }
}

impl LpScalar for BigRational {
    const EXACT: bool = true;
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite LP data")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tol() -> Self {
        Zero::zero()
    }
    fn from_int(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Ge,
    Le,
    Eq,
}

/// `min cost·x` subject to `rows` and `x ≥ 0`; `cols[j]` lists `(row, coef)`.
#[derive(Debug, Clone)]
pub struct LpProblem<T> {
    pub cost: Vec<T>,
    pub cols: Vec<Vec<(usize, T)>>,
    pub rows: Vec<(RowKind, T)>,
}

impl<T: LpScalar> LpProblem<T> {
    pub fn new(rows: Vec<(RowKind, T)>) -> Self {
        LpProblem {
            cost: Vec::new(),
            cols: Vec::new(),
            rows,
        }
    }

    pub fn add_column(&mut self, cost: T, entries: Vec<(usize, T)>) {
        self.cost.push(cost);
        self.cols.push(entries);
    }

    /// Copies an `f64` problem into another scalar type.
    pub fn convert<U: LpScalar>(&self) -> LpProblem<U> {
        LpProblem {
            cost: self.cost.iter().map(|c| U::from_f64(c.to_f64())).collect(),
            cols: self
                .cols
                .iter()
                .map(|col| col.iter().map(|(i, a)| (*i, U::from_f64(a.to_f64()))).collect())
                .collect(),
            rows: self.rows.iter().map(|(k, b)| (*k, U::from_f64(b.to_f64()))).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub objective: T,
    pub x: Vec<T>,
    /// One per row, signed for the row as given (`≥` rows non-negative,
    /// `≤` rows non-positive at an optimum of a minimization).
    pub duals: Vec<T>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

const BLAND_AFTER: usize = 30;
const REFACTOR_EVERY: usize = 50;

struct Tableau<T> {
    m: usize,
    cols: Vec<Vec<(usize, T)>>,
    kind: Vec<ColKind>,
    b: Vec<T>,
    basis: Vec<usize>,
    in_basis: Vec<Option<usize>>,
    binv: Vec<Vec<T>>,
    xb: Vec<T>,
    iterations: usize,
    since_refactor: usize,
    limit: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<T: LpScalar> Tableau<T> {
    fn duals(&self, cost: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.m];
        for (r, &col) in self.basis.iter().enumerate() {
            let cb = &cost[col];
            if *cb == T::zero() {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                let v = &self.binv[r][i];
                if *v != T::zero() {
                    *yi = yi.clone() + cb.clone() * v.clone();
                }
            }
        }
        y
    }

    fn column_image(&self, j: usize) -> Vec<T> {
        let mut alpha = vec![T::zero(); self.m];
        for (r, a) in alpha.iter_mut().enumerate() {
            let row = &self.binv[r];
            let mut s = T::zero();
            for (i, v) in &self.cols[j] {
                if row[*i] != T::zero() {
                    s = s + row[*i].clone() * v.clone();
                }
            }
            *a = s;
        }
        alpha
    }

    fn pivot(&mut self, r: usize, j: usize, alpha: &[T]) {
        let p = alpha[r].clone();
        for v in self.binv[r].iter_mut() {
            if *v != T::zero() {
                *v = v.clone() / p.clone();
            }
        }
        self.xb[r] = self.xb[r].clone() / p;
        let pivot_row = self.binv[r].clone();
        let xr = self.xb[r].clone();
        for i in 0..self.m {
            if i == r || alpha[i] == T::zero() {
                continue;
            }
            let f = alpha[i].clone();
            for (v, pr) in self.binv[i].iter_mut().zip(&pivot_row) {
                if *pr != T::zero() {
                    *v = v.clone() - f.clone() * pr.clone();
                }
            }
            self.xb[i] = self.xb[i].clone() - f * xr.clone();
        }
        let leaving = self.basis[r];
        self.in_basis[leaving] = None;
        self.in_basis[j] = Some(r);
        self.basis[r] = j;
        self.since_refactor += 1;
    }

    /// Recomputes the basis inverse and basic values from scratch.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![vec![T::zero(); m]; m];
        for (r, &col) in self.basis.iter().enumerate() {
            for (i, v) in &self.cols[col] {
                a[*i][r] = v.clone();
            }
        }
        let mut inv: Vec<Vec<T>> = (0..m)
            .map(|i| (0..m).map(|k| if i == k { T::one() } else { T::zero() }).collect())
            .collect();
        for c in 0..m {
            let mut best = c;
            let mut best_abs = abs(&a[c][c]);
            for r in c + 1..m {
                let v = abs(&a[r][c]);
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            if best_abs == T::zero() {
                return Err(Error::Internal("singular basis during refactorization".into()));
            }
            a.swap(c, best);
            inv.swap(c, best);
            let p = a[c][c].clone();
            for k in 0..m {
                a[c][k] = a[c][k].clone() / p.clone();
                inv[c][k] = inv[c][k].clone() / p.clone();
            }
            for r in 0..m {
                if r == c || a[r][c] == T::zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for k in 0..m {
                    a[r][k] = a[r][k].clone() - f.clone() * a[c][k].clone();
                    inv[r][k] = inv[r][k].clone() - f.clone() * inv[c][k].clone();
                }
            }
        }
        // inv now maps row space to basis positions
        self.binv = inv;
        self.xb = (0..m)
            .map(|r| {
                let mut s = T::zero();
                for i in 0..m {
                    s = s + self.binv[r][i].clone() * self.b[i].clone();
                }
                s
            })
            .collect();
        self.since_refactor = 0;
        Ok(())
    }

    fn run(&mut self, cost: &[T], allowed: impl Fn(usize) -> bool) -> Result<Outcome> {
        let tol = T::tol();
        let neg_tol = -tol.clone();
        let mut streak = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(Error::Internal("simplex iteration limit reached".into()));
            }
            if !T::EXACT && self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let y = self.duals(cost);
            let bland = streak >= BLAND_AFTER;
            let mut enter: Option<(usize, T)> = None;
            for j in 0..self.cols.len() {
                if self.in_basis[j].is_some() || !allowed(j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, a) in &self.cols[j] {
                    if y[*i] != T::zero() {
                        d = d - y[*i].clone() * a.clone();
                    }
                }
                if d < neg_tol {
                    if bland {
                        enter = Some((j, d));
                        break;
                    }
                    if enter.as_ref().is_none_or(|(_, best)| d < *best) {
                        enter = Some((j, d));
                    }
                }
            }
            let Some((j, _)) = enter else {
                return Ok(Outcome::Optimal);
            };
            let alpha = self.column_image(j);
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.m {
                if alpha[r] > tol {
                    let xr = if self.xb[r] < T::zero() { T::zero() } else { self.xb[r].clone() };
                    let ratio = xr / alpha[r].clone();
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < best.clone() - tol.clone()
                                || (ratio <= best.clone() + tol.clone() && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            // once Bland kicks in it stays on; in floating point a tiny
            // "improvement" can otherwise restart a cycle
            if ratio <= tol {
                streak += 1;
            } else if streak < BLAND_AFTER {
                streak = 0;
            }
            self.pivot(r, j, &alpha);
        }
    }
}

fn abs<T: LpScalar>(x: &T) -> T {
    if *x < T::zero() {
        -x.clone()
    } else {
        x.clone()
    }
}

/// Solves `p` to optimality with the two-phase method.
pub fn solve<T: LpScalar>(p: &LpProblem<T>) -> Result<LpSolution<T>> {
    let m = p.rows.len();
    let n = p.cols.len();
    if p.cost.len() != n {
        return Err(Error::Contract("cost and column counts differ".into()));
    }
    let mut flip = vec![false; m];
    let mut kinds = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (i, (k, rhs)) in p.rows.iter().enumerate() {
        if *rhs < T::zero() {
            flip[i] = true;
            kinds.push(match k {
                RowKind::Ge => RowKind::Le,
                RowKind::Le => RowKind::Ge,
                RowKind::Eq => RowKind::Eq,
            });
            b.push(-rhs.clone());
        } else {
            kinds.push(*k);
            b.push(rhs.clone());
        }
    }

    let mut cols: Vec<Vec<(usize, T)>> = Vec::with_capacity(n + 2 * m);
    let mut kind = Vec::with_capacity(n + 2 * m);
    for col in &p.cols {
        let mut c: Vec<(usize, T)> = col
            .iter()
            .filter(|(_, a)| *a != T::zero())
            .map(|(i, a)| (*i, if flip[*i] { -a.clone() } else { a.clone() }))
            .collect();
        c.sort_by_key(|e| e.0);
        if c.iter().any(|(i, _)| *i >= m) {
            return Err(Error::Contract("column references a missing row".into()));
        }
        cols.push(c);
        kind.push(ColKind::Structural);
    }
    let mut basis = vec![usize::MAX; m];
    for (i, k) in kinds.iter().enumerate() {
        match k {
            RowKind::Le => {
                basis[i] = cols.len();
                cols.push(vec![(i, T::one())]);
                kind.push(ColKind::Slack);
            }
            RowKind::Ge => {
                cols.push(vec![(i, -T::one())]);
                kind.push(ColKind::Slack);
            }
            RowKind::Eq => {}
        }
    }
    for (i, k) in kinds.iter().enumerate() {
        if *k != RowKind::Le {
            basis[i] = cols.len();
            cols.push(vec![(i, T::one())]);
            kind.push(ColKind::Artificial);
        }
    }
    let total = cols.len();
    let mut in_basis = vec![None; total];
    for (r, &c) in basis.iter().enumerate() {
        in_basis[c] = Some(r);
    }
    let binv = (0..m)
        .map(|i| (0..m).map(|k| if i == k { T::one() } else { T::zero() }).collect())
        .collect();
    let mut t = Tableau {
        m,
        cols,
        kind,
        xb: b.clone(),
        b,
        basis,
        in_basis,
        binv,
        iterations: 0,
        since_refactor: 0,
        limit: 50 * (total + m) + 1000,
    };

    let has_artificial = t.kind.contains(&ColKind::Artificial);
    if has_artificial {
        let phase1: Vec<T> = t
            .kind
            .iter()
            .map(|k| if *k == ColKind::Artificial { T::one() } else { T::zero() })
            .collect();
        t.run(&phase1, |_| true)?;
        if !T::EXACT {
            t.refactor()?;
        }
        let infeas = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &c)| t.kind[c] == ColKind::Artificial)
            .fold(T::zero(), |acc, (r, _)| acc + t.xb[r].clone());
        let feas_tol = if T::EXACT { T::zero() } else { T::from_f64(1e-7) };
        if infeas > feas_tol {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: T::zero(),
                x: vec![T::zero(); n],
                duals: vec![T::zero(); m],
                iterations: t.iterations,
            });
        }
        // drive zero-level artificials out of the basis
        for r in 0..m {
            if t.kind[t.basis[r]] != ColKind::Artificial {
                continue;
            }
            let row = t.binv[r].clone();
            let mut pick = None;
            for j in 0..t.cols.len() {
                if t.in_basis[j].is_some() || t.kind[j] == ColKind::Artificial {
                    continue;
                }
                let mut v = T::zero();
                for (i, a) in &t.cols[j] {
                    v = v + row[*i].clone() * a.clone();
                }
                if abs(&v) > T::tol() {
                    pick = Some(j);
                    break;
                }
            }
            if let Some(j) = pick {
                let alpha = t.column_image(j);
                t.pivot(r, j, &alpha);
            }
        }
    }

    let mut cost2 = vec![T::zero(); t.cols.len()];
    cost2[..n].clone_from_slice(&p.cost);
    let kind2 = t.kind.clone();
    let outcome = t.run(&cost2, |j| kind2[j] != ColKind::Artificial)?;
    if !T::EXACT {
        t.refactor()?;
    }
    let mut x = vec![T::zero(); n];
    for (r, &c) in t.basis.iter().enumerate() {
        if c < n {
            x[c] = if !T::EXACT && t.xb[r] < T::zero() { T::zero() } else { t.xb[r].clone() };
        }
    }
    let objective = x
        .iter()
        .zip(&p.cost)
        .fold(T::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
    let y = t.duals(&cost2);
    let duals = y
        .into_iter()
        .enumerate()
        .map(|(i, v)| if flip[i] { -v } else { v })
        .collect();
    Ok(LpSolution {
        status: match outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Unbounded => LpStatus::Unbounded,
        },
        objective,
        x,
        duals,
        iterations: t.iterations,
    })
}
