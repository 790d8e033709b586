//! Thin sampling and special-function helpers over `rand_distr` and `statrs`.
//!
//! Gamma draws use the shape/rate convention throughout the crate. Draws that
//! land exactly on a boundary (possible for tiny shapes in floating point) are
//! nudged inside the open support so downstream logs stay finite.

use rand::{Rng, RngExt};
use rand_distr::{Beta, Binomial, Distribution, Gamma, Open01, Poisson, StandardNormal};

pub use statrs::function::beta::ln_beta;
pub use statrs::function::factorial::{ln_binomial, ln_factorial};
pub use statrs::function::gamma::ln_gamma;

/// Largest double strictly below one.
pub(crate) const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

/// `Ga(shape, rate)` draw, clamped to be strictly positive.
pub fn gamma_rate<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    let g = Gamma::new(shape, 1.0 / rate).expect("gamma parameters must be positive and finite");
    g.sample(rng).max(f64::MIN_POSITIVE)
}

/// `Be(a, b)` draw, clamped into the open unit interval.
pub fn beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let d = Beta::new(a, b).expect("beta parameters must be positive and finite");
    d.sample(rng).clamp(f64::MIN_POSITIVE, ONE_MINUS)
}

pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("poisson mean must be finite");
    d.sample(rng) as u64
}

pub fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    Binomial::new(n, p)
        .expect("binomial probability must lie in [0, 1]")
        .sample(rng)
}

pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform draw on the open interval (0, 1).
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Log density of `Be(a, b)` at `x`.
pub fn beta_log_pdf(x: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)
}

/// Log density of `Ga(shape, rate)` at `x`.
pub fn gamma_log_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}
