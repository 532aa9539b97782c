//! Certified verification of series identities and supercongruences built
//! from binomial coefficients and harmonic numbers.
//!
//! Infinite sums are enclosed in real balls with rigorous tail bounds and
//! compared against closed forms; truncated sums are evaluated p-adically and
//! checked modulo prime powers. A PSLQ front end searches for closed forms.

pub mod exact;
pub mod constants;
pub mod realball;
pub mod expr;
pub mod series_engine;
pub mod congruence_engine;
pub mod discover;
