//! Uniform-grid numerics: sampled functions, finite differences, cumulative
//! quadrature and a Runge–Kutta integrator for first-order linear ODEs.
//!
//! Every indefinite integral on a [`Grid`] starts at the grid's anchor point
//! `x0`, so the value of a cumulative integral at the anchor is exactly zero
//! and an ODE solution takes its initial value there.

use crate::error::{Error, Result};
use crate::real::Real;

/// A uniform grid on `[x_lo, x_hi]` with `n` points and a distinguished
/// anchor index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    x_lo: T,
    x_hi: T,
    n: usize,
    anchor: usize,
}

impl<T: Real> Grid<T> {
    pub const MIN_POINTS: usize = 16;

    /// Grid anchored at its left endpoint.
    pub fn new(x_lo: T, x_hi: T, n: usize) -> Result<Self> {
        if !(x_lo.is_finite() && x_hi.is_finite() && x_hi > x_lo) {
            return Err(Error::GridInterval {
                lo: x_lo.as_f64(),
                hi: x_hi.as_f64(),
            });
        }
        if n < Self::MIN_POINTS {
            return Err(Error::GridTooSmall {
                n,
                min: Self::MIN_POINTS,
            });
        }
        Ok(Self {
            x_lo,
            x_hi,
            n,
            anchor: 0,
        })
    }

    pub fn with_anchor(mut self, index: usize) -> Result<Self> {
        if index >= self.n {
            return Err(Error::AnchorOutOfRange { index, n: self.n });
        }
        self.anchor = index;
        Ok(self)
    }

    /// Moves the anchor to the grid point closest to `x0` (clamped to the grid).
    pub fn with_anchor_near(mut self, x0: T) -> Self {
        self.anchor = self.index_near(x0);
        self
    }

    pub fn index_near(&self, x: T) -> usize {
        let t = ((x - self.x_lo) / self.spacing()).round();
        if t <= T::zero() {
            0
        } else {
            t.to_usize().unwrap_or(self.n - 1).min(self.n - 1)
        }
    }

    pub fn x_lo(&self) -> T {
        self.x_lo
    }

    pub fn x_hi(&self) -> T {
        self.x_hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn anchor_index(&self) -> usize {
        self.anchor
    }

    pub fn anchor_x(&self) -> T {
        self.x(self.anchor)
    }

    pub fn spacing(&self) -> T {
        (self.x_hi - self.x_lo) / T::from_index(self.n - 1)
    }

    /// Coordinate of point `i`; the last point is `x_hi` exactly.
    pub fn x(&self, i: usize) -> T {
        if i + 1 == self.n {
            self.x_hi
        } else {
            self.x_lo + self.spacing() * T::from_index(i)
        }
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Same interval with `(n - 1) * factor + 1` points; the anchor keeps its
    /// coordinate.
    pub fn refined(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        Self {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            n: (self.n - 1) * factor + 1,
            anchor: self.anchor * factor,
        }
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.x_lo && x <= self.x_hi
    }
}

/// Values of a function on a [`Grid`] together with a mask of untrusted
/// points. Unmasked values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
    mask: Vec<bool>,
}

impl<T: Real> SampledFunction<T> {
    /// Samples `f` on the grid; non-finite values are masked.
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(T) -> T) -> Self {
        let values: Vec<T> = grid.points().map(&mut f).collect();
        let mask = values.iter().map(|v| !v.is_finite()).collect();
        Self { grid, values, mask }
    }

    pub fn from_values(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let mask = values.iter().map(|v| !v.is_finite()).collect();
        Ok(Self { grid, values, mask })
    }

    /// Builds from values and an explicit mask; non-finite values are masked
    /// in addition.
    pub fn with_mask(grid: Grid<T>, values: Vec<T>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != grid.len() || mask.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len().min(mask.len()),
            });
        }
        let mask = mask
            .into_iter()
            .zip(&values)
            .map(|(m, v)| m || !v.is_finite())
            .collect();
        Ok(Self { grid, values, mask })
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn value(&self, i: usize) -> Option<T> {
        if self.mask[i] {
            None
        } else {
            Some(self.values[i])
        }
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn valid_count(&self) -> usize {
        self.grid.len() - self.masked_count()
    }

    /// Masks `i` in place.
    pub fn mask_point(&mut self, i: usize) {
        self.mask[i] = true;
    }

    /// `(index, x, value)` for every unmasked point.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, T, T)> + '_ {
        (0..self.grid.len())
            .filter(move |&i| !self.mask[i])
            .map(move |i| (i, self.grid.x(i), self.values[i]))
    }

    pub fn max_abs(&self) -> T {
        self.iter_valid()
            .fold(T::zero(), |acc, (_, _, v)| acc.max(v.abs()))
    }

    /// `(min, max)` over unmasked points, `None` when everything is masked.
    pub fn range(&self) -> Option<(T, T)> {
        self.iter_valid().fold(None, |acc, (_, _, v)| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// `max - min` over unmasked points.
    pub fn flatness(&self) -> Option<T> {
        self.range().map(|(lo, hi)| hi - lo)
    }

    pub fn mean(&self) -> Option<T> {
        let (sum, count) = self
            .iter_valid()
            .fold((T::zero(), 0usize), |(s, c), (_, _, v)| (s + v, c + 1));
        (count > 0).then(|| sum / T::from_index(count))
    }

    /// Discrete L² norm `sqrt(h Σ v²)` over unmasked points.
    pub fn l2_norm(&self) -> T {
        let h = self.grid.spacing();
        (self.iter_valid().fold(T::zero(), |acc, (_, _, v)| acc + v * v) * h).sqrt()
    }

    /// Discrete inner product `h Σ f g` over points unmasked in both.
    pub fn dot(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        let h = self.grid.spacing();
        let sum = (0..self.grid.len())
            .filter(|&i| !self.mask[i] && !other.mask[i])
            .fold(T::zero(), |acc, i| acc + self.values[i] * other.values[i]);
        Ok(sum * h)
    }

    pub fn map(&self, mut f: impl FnMut(T, T) -> T) -> Self {
        let values: Vec<T> = (0..self.grid.len())
            .map(|i| f(self.grid.x(i), self.values[i]))
            .collect();
        let mask = self
            .mask
            .iter()
            .zip(&values)
            .map(|(m, v)| *m || !v.is_finite())
            .collect();
        Self {
            grid: self.grid,
            values,
            mask,
        }
    }

    /// Pointwise combination; the result is masked wherever either input is.
    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Result<Self> {
        self.check_same_grid(other)?;
        let values: Vec<T> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        let mask = (0..self.grid.len())
            .map(|i| self.mask[i] || other.mask[i] || !values[i].is_finite())
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
            mask,
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid || same_points(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn same_points<T: Real>(a: &Grid<T>, b: &Grid<T>) -> bool {
    a.x_lo == b.x_lo && a.x_hi == b.x_hi && a.n == b.n
}

fn masked_output<T: Real>(grid: Grid<T>, values: Vec<T>, mask: Vec<bool>) -> SampledFunction<T> {
    let mask = mask
        .into_iter()
        .zip(&values)
        .map(|(m, v)| m || !v.is_finite())
        .collect();
    SampledFunction { grid, values, mask }
}

/// Second-order finite-difference derivative: central in the interior,
/// three-point one-sided at the endpoints. An output point is masked when any
/// point of its stencil is.
pub fn derivative<T: Real>(f: &SampledFunction<T>) -> SampledFunction<T> {
    let grid = f.grid;
    let n = grid.len();
    let h2 = grid.spacing() * T::lit(2.0);
    let v = &f.values;
    let m = &f.mask;
    let mut out = vec![T::zero(); n];
    let mut mask = vec![false; n];

    out[0] = (T::lit(-3.0) * v[0] + T::lit(4.0) * v[1] - v[2]) / h2;
    mask[0] = m[0] || m[1] || m[2];
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / h2;
        mask[i] = m[i - 1] || m[i] || m[i + 1];
    }
    out[n - 1] = (T::lit(3.0) * v[n - 1] - T::lit(4.0) * v[n - 2] + v[n - 3]) / h2;
    mask[n - 1] = m[n - 1] || m[n - 2] || m[n - 3];
    masked_output(grid, out, mask)
}

/// Fourth-order finite-difference derivative (five-point stencils, one-sided
/// near the endpoints). Masks widen by the stencil reach.
pub fn derivative_fourth_order<T: Real>(f: &SampledFunction<T>) -> SampledFunction<T> {
    let grid = f.grid;
    let n = grid.len();
    let h12 = grid.spacing() * T::lit(12.0);
    let v = &f.values;
    let m = &f.mask;
    let c = T::lit;
    let mut out = vec![T::zero(); n];
    let mut mask = vec![false; n];

    let any = |lo: usize, hi: usize| m[lo..=hi].iter().any(|b| *b);

    out[0] = (c(-25.0) * v[0] + c(48.0) * v[1] - c(36.0) * v[2] + c(16.0) * v[3] - c(3.0) * v[4]) / h12;
    mask[0] = any(0, 4);
    out[1] = (c(-3.0) * v[0] - c(10.0) * v[1] + c(18.0) * v[2] - c(6.0) * v[3] + v[4]) / h12;
    mask[1] = any(0, 4);
    for i in 2..n - 2 {
        out[i] = (v[i - 2] - c(8.0) * v[i - 1] + c(8.0) * v[i + 1] - v[i + 2]) / h12;
        mask[i] = any(i - 2, i + 2);
    }
    let k = n - 1;
    out[k - 1] = (c(3.0) * v[k] + c(10.0) * v[k - 1] - c(18.0) * v[k - 2] + c(6.0) * v[k - 3] - v[k - 4]) / h12;
    mask[k - 1] = any(k - 4, k);
    out[k] = (c(25.0) * v[k] - c(48.0) * v[k - 1] + c(36.0) * v[k - 2] - c(16.0) * v[k - 3] + c(3.0) * v[k - 4]) / h12;
    mask[k] = any(k - 4, k);
    masked_output(grid, out, mask)
}

/// Composite trapezoid integral `∫_{x0}^{x} f` with `x0` the grid anchor.
///
/// The value at the anchor is exactly zero. A masked point poisons every
/// point at or beyond it, counted outward from the anchor.
pub fn cumulative_integral<T: Real>(f: &SampledFunction<T>) -> SampledFunction<T> {
    let grid = f.grid;
    let n = grid.len();
    let a = grid.anchor_index();
    let half_h = grid.spacing() / T::lit(2.0);
    let mut out = vec![T::nan(); n];
    let mut mask = vec![true; n];
    if f.mask[a] {
        return masked_output(grid, out, mask);
    }
    out[a] = T::zero();
    mask[a] = false;

    let mut acc = T::zero();
    for i in a + 1..n {
        if f.mask[i] || f.mask[i - 1] {
            break;
        }
        acc = acc + half_h * (f.values[i - 1] + f.values[i]);
        out[i] = acc;
        mask[i] = false;
    }
    acc = T::zero();
    for i in (0..a).rev() {
        if f.mask[i] || f.mask[i + 1] {
            break;
        }
        acc = acc - half_h * (f.values[i] + f.values[i + 1]);
        out[i] = acc;
        mask[i] = false;
    }
    masked_output(grid, out, mask)
}

/// Solves `y' = p(x) y + q(x)` with `y(x0) = y0` by classical RK4 on the
/// grid, marching outward from the anchor in both directions.
///
/// Midpoint coefficients come from four-point Lagrange interpolation of the
/// samples, which keeps the scheme fourth order. Once the solution overflows
/// (or reaches a masked coefficient) the remaining points on that side are
/// masked.
pub fn integrate_linear_ode<T: Real>(
    p: &SampledFunction<T>,
    q: &SampledFunction<T>,
    y0: T,
) -> Result<SampledFunction<T>> {
    p.check_same_grid(q)?;
    let grid = p.grid;
    let n = grid.len();
    let coef = |half_index: usize| -> Option<(T, T)> {
        let i = half_index / 2;
        if half_index.is_multiple_of(2) {
            if p.mask[i] || q.mask[i] {
                None
            } else {
                Some((p.values[i], q.values[i]))
            }
        } else {
            let idx = midpoint_stencil(i, n);
            if idx.iter().any(|&j| p.mask[j] || q.mask[j]) {
                return None;
            }
            let w = midpoint_weights::<T>(i, n);
            let mut pm = T::zero();
            let mut qm = T::zero();
            for (j, wj) in idx.iter().zip(w) {
                pm = pm + wj * p.values[*j];
                qm = qm + wj * q.values[*j];
            }
            Some((pm, qm))
        }
    };
    Ok(march_linear(grid, y0, coef))
}

/// Like [`integrate_linear_ode`] but with coefficients given as a closure
/// `x -> (p(x), q(x))`, evaluated exactly at the RK4 stage points.
pub fn integrate_linear_ode_with<T: Real>(
    grid: Grid<T>,
    y0: T,
    coefficients: impl Fn(T) -> (T, T),
) -> SampledFunction<T> {
    let h = grid.spacing();
    let coef = |half_index: usize| -> Option<(T, T)> {
        let x = if half_index.is_multiple_of(2) {
            grid.x(half_index / 2)
        } else {
            grid.x(half_index / 2) + h / T::lit(2.0)
        };
        let (p, q) = coefficients(x);
        (p.is_finite() && q.is_finite()).then_some((p, q))
    };
    march_linear(grid, y0, coef)
}

fn midpoint_stencil(i: usize, n: usize) -> [usize; 4] {
    if i == 0 {
        [0, 1, 2, 3]
    } else if i + 2 >= n {
        [n - 4, n - 3, n - 2, n - 1]
    } else {
        [i - 1, i, i + 1, i + 2]
    }
}

fn midpoint_weights<T: Real>(i: usize, n: usize) -> [T; 4] {
    let w = if i == 0 {
        [5.0, 15.0, -5.0, 1.0]
    } else if i + 2 >= n {
        [1.0, -5.0, 15.0, 5.0]
    } else {
        [-1.0, 9.0, 9.0, -1.0]
    };
    w.map(|c| T::lit(c / 16.0))
}

/// RK4 over the grid. `coef(k)` yields `(p, q)` at half-index `k`
/// (`k = 2i` is grid point `i`, `k = 2i + 1` the midpoint of `[x_i, x_{i+1}]`).
fn march_linear<T: Real>(
    grid: Grid<T>,
    y0: T,
    coef: impl Fn(usize) -> Option<(T, T)>,
) -> SampledFunction<T> {
    let n = grid.len();
    let a = grid.anchor_index();
    let h = grid.spacing();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let mut out = vec![T::nan(); n];
    let mut mask = vec![true; n];
    if !y0.is_finite() {
        return masked_output(grid, out, mask);
    }
    out[a] = y0;
    mask[a] = false;

    let step = |y: T, start: (T, T), mid: (T, T), end: (T, T), dx: T| -> T {
        let rhs = |c: (T, T), y: T| c.0 * y + c.1;
        let k1 = rhs(start, y);
        let k2 = rhs(mid, y + dx / two * k1);
        let k3 = rhs(mid, y + dx / two * k2);
        let k4 = rhs(end, y + dx * k3);
        y + dx / six * (k1 + two * k2 + two * k3 + k4)
    };

    let mut y = y0;
    for i in a..n - 1 {
        let (Some(s), Some(m), Some(e)) = (coef(2 * i), coef(2 * i + 1), coef(2 * i + 2)) else {
            break;
        };
        y = step(y, s, m, e, h);
        if !y.is_finite() {
            break;
        }
        out[i + 1] = y;
        mask[i + 1] = false;
    }
    y = y0;
    for i in (1..=a).rev() {
        let (Some(s), Some(m), Some(e)) = (coef(2 * i), coef(2 * i - 1), coef(2 * i - 2)) else {
            break;
        };
        y = step(y, s, m, e, -h);
        if !y.is_finite() {
            break;
        }
        out[i - 1] = y;
        mask[i - 1] = false;
    }
    masked_output(grid, out, mask)
}
