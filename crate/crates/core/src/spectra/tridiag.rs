//! Symmetric tridiagonal eigen-solver: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the eigenvectors.

use crate::error::{Error, Result};
use crate::real::Real;

/// Relative convergence target for bisection.
pub const BISECTION_REL_TOL: f64 = 1e-12;
const MAX_BISECTION_STEPS: usize = 400;
const MAX_INVERSE_ITERATIONS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    /// `off.len()` must be `diag.len() - 1`.
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert!(!diag.is_empty() && off.len() + 1 == diag.len());
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[T] {
        &self.off
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { T::zero() };
            let right = if i + 1 < n { self.off[i].abs() } else { T::zero() };
            let r = left + right;
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> T {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x` (count of negative pivots of
    /// the LDLᵀ factorization of `T − xI`).
    pub fn sturm_count(&self, x: T) -> usize {
        let pivmin = T::min_positive_value()
            * self
                .off
                .iter()
                .fold(T::one(), |m, e| m.max(*e * *e));
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.dim() {
            if i > 0 {
                q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue `index` (0-based, ascending) by bisection.
    pub fn eigenvalue(&self, index: usize) -> Result<T> {
        let (mut lo, mut hi) = self.gershgorin();
        let floor = T::epsilon() * self.norm_bound() * T::lit(2.0);
        let rel = T::lit(BISECTION_REL_TOL);
        for _ in 0..MAX_BISECTION_STEPS {
            let tol = floor.max(rel * lo.abs().max(hi.abs()));
            if hi - lo <= tol {
                return Ok((lo + hi) / T::lit(2.0));
            }
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.sturm_count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::BisectionStalled {
            index,
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        })
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y = y + self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y = y + self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Euclidean `‖Tx − λx‖ / ‖x‖`.
    pub fn residual(&self, lambda: T, x: &[T]) -> T {
        let tx = self.apply(x);
        let num = tx
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (t, v)| acc + (*t - lambda * *v).powi(2))
            .sqrt();
        num / euclid(x)
    }

    /// Eigenvector for a converged eigenvalue by shifted inverse iteration,
    /// orthogonalized against `previous` vectors whose eigenvalues lie
    /// within `10⁻³‖T‖`. Returned with unit Euclidean norm.
    pub fn eigenvector(&self, lambda: T, previous: &[(T, Vec<T>)]) -> Vec<T> {
        let n = self.dim();
        let norm = self.norm_bound();
        let ortho_gap = T::lit(1e-3) * norm;
        let lu = ShiftedLu::factor(self, lambda, T::epsilon() * norm);
        let close: Vec<&Vec<T>> = previous
            .iter()
            .filter(|(mu, _)| (*mu - lambda).abs() < ortho_gap)
            .map(|(_, v)| v)
            .collect();

        let mut x = start_vector::<T>(n);
        let target = T::lit(10.0) * T::epsilon() * norm;
        for _ in 0..MAX_INVERSE_ITERATIONS {
            let mut y = lu.solve(&x);
            for v in &close {
                let proj = dot(&y, v);
                for (yi, vi) in y.iter_mut().zip(v.iter()) {
                    *yi = *yi - proj * *vi;
                }
            }
            let s = euclid(&y);
            if !(s > T::zero() && s.is_finite()) {
                break;
            }
            x = y.into_iter().map(|v| v / s).collect();
            if self.residual(lambda, &x) < target {
                break;
            }
        }
        x
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

fn euclid<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Deterministic pseudo-random start, so symmetric problems do not start
/// orthogonal to odd eigenvectors.
fn start_vector<T: Real>(n: usize) -> Vec<T> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let v: Vec<T> = (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            T::lit(0.5 + (state >> 11) as f64 / (1u64 << 53) as f64)
        })
        .collect();
    let s = euclid(&v);
    v.into_iter().map(|x| x / s).collect()
}

/// LU factorization with partial pivoting of `T − σI`.
struct ShiftedLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> ShiftedLu<T> {
    fn factor(m: &SymTridiagonal<T>, shift: T, tiny: T) -> Self {
        let n = m.dim();
        let mut d: Vec<T> = m.diag.iter().map(|x| *x - shift).collect();
        let mut dl = m.off.clone();
        let mut du = m.off.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != T::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] = d[i + 1] - fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < T::zero() { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}
