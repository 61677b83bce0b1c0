//! Black-box objective functions and evaluation accounting.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// A real-valued function on `R^d`, evaluated as a black box.
///
/// Implementations must return a finite value or `+inf` (characteristic
/// functions of sets take `+inf` outside the set); they must never return
/// NaN inside their declared domain. Implementations are shared across
/// threads for read-only evaluation, hence the `Sync` bound.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
}

/// Adapter turning a closure into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Shorthand for [`FnObjective::new`].
pub fn func<F: Fn(&[f64]) -> f64 + Sync>(dim: usize, f: F) -> FnObjective<F> {
    FnObjective::new(dim, f)
}

/// Wrapper that counts evaluations of an inner objective.
///
/// The count increases by exactly one per `eval` call; accounting is atomic
/// so shared-objective parallel evaluation stays exact.
pub struct CountingFn<O> {
    inner: O,
    count: AtomicU64,
}

impl<O: Objective> CountingFn<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for CountingFn<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x)
    }
}

/// Wrap an objective with an evaluation counter.
pub fn with_counter<O: Objective>(f: O) -> CountingFn<O> {
    CountingFn::new(f)
}

/// An axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "domain box bounds must be nonempty and of equal length (got {} and {})",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "domain box must satisfy lo < hi with finite bounds; coordinate {i} has [{l}, {h}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-half_width, half_width]^dim`.
    pub fn centered(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&l, &h))| v >= l && v <= h)
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| h - l)
            .product()
    }
}
