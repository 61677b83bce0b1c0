//! Sampling-based approximation of infimal convolutions.
//!
//! The central object is the self-normalized exponentially-tilted average
//! ([`laplace`]): draw points, weight them by `exp(-objective/delta)`
//! through a shifted softmax, and average. Specializations give a
//! zeroth-order proximal operator and Moreau envelope ([`prox`]), smoothed
//! set projections, Hopf-Lax solutions of Hamilton-Jacobi equations
//! ([`hj`]), proximal-point and gradient-free optimizers ([`optimizers`])
//! over a benchmark suite ([`benchmarks`]), and Bregman proximal gradient
//! descent for Poisson inverse problems ([`bpgd`]). A deterministic
//! tensor-grid quadrature of the same ratio ([`quad`]) serves as ground
//! truth in one and two dimensions.
//!
//! Everything stochastic is driven by explicit seeded streams ([`rng`]);
//! identical `(seed, stream_id)` reproduce results bitwise, and parallel
//! work always splits into derived substreams with deterministic
//! reduction order.

pub mod benchmarks;
pub mod bpgd;
mod error;
pub mod hj;
pub mod laplace;
mod objective;
pub mod optimizers;
pub mod prox;
pub mod quad;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use objective::{func, with_counter, CountingFn, DomainBox, FnObjective, Objective};
