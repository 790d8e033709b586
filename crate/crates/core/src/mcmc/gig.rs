//! Generalized inverse Gaussian variates.
//!
//! Density `∝ x^{p-1} exp(-(a x + b / x) / 2)` on `x > 0`. Sampling works on
//! the standardized law `GIG(λ = |p|, ω, ω)` with `ω = sqrt(a b)` and rescales
//! by `sqrt(b / a)`; negative `p` uses the reciprocal. Three rejection
//! schemes cover the parameter plane (Hörmann and Leydold, 2014): ratio of
//! uniforms with mode shift for large `λ` or `ω`, ratio of uniforms without
//! shift in the middle band, and a three-piece hat for `λ < 1` with small
//! `ω`.

use std::f64::consts::PI;

use rand::Rng;

use crate::dist::open01;
use crate::error::{Error, Result};

pub fn sample_gig<R: Rng + ?Sized>(p: f64, a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::param("a", format!("GIG needs a > 0, got {a}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::param("b", format!("GIG needs b > 0, got {b}")));
    }
    if !p.is_finite() {
        return Err(Error::NonFinite("GIG index"));
    }
    let lambda = p.abs();
    let omega = (a * b).sqrt();
    let alpha = (b / a).sqrt();
    let y = if lambda > 2.0 || omega > 3.0 {
        rou_shift(lambda, omega, rng)
    } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_noshift(lambda, omega, rng)
    } else {
        three_piece(lambda, omega, rng)
    };
    let x = if p < 0.0 { alpha / y } else { alpha * y };
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite("GIG draw"))
    }
}

/// Mode of the standardized density.
fn mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        ((lambda - 1.0) + ((lambda - 1.0).powi(2) + omega * omega).sqrt()) / omega
    } else {
        omega / (((1.0 - lambda).powi(2) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

fn rou_noshift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + ((lambda + 1.0).powi(2) + omega * omega).sqrt()) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    loop {
        let u = um * open01(rng);
        let v = open01(rng);
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

fn rou_shift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);

    // the extremes of (x - xm) sqrt(f(x)) solve a depressed cubic
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let phi = (-q / (2.0 * (-p * p * p / 27.0).sqrt())).clamp(-1.0, 1.0).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (phi / 3.0).cos() - a / 3.0;
    let y2 = fak * (phi / 3.0 + 4.0 / 3.0 * PI).cos() - a / 3.0;
    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
    loop {
        let u = uminus + open01(rng) * (uplus - uminus);
        let v = open01(rng);
        let x = u / v + xm;
        if x <= 0.0 {
            continue;
        }
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

fn three_piece<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let xm = mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;
    let (k1, a1, k2, a2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let total = a0 + a1 + a2;
    let tail_start = x0.max(2.0 / omega);
    loop {
        let mut v = total * open01(rng);
        let (x, hx);
        if v <= a0 {
            x = x0 * v / a0;
            hx = k0;
        } else if v <= a0 + a1 {
            v -= a0;
            if lambda == 0.0 {
                x = omega * (omega.exp() * v).exp();
                hx = k1 / x;
            } else {
                x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                hx = k1 * x.powf(lambda - 1.0);
            }
        } else {
            v -= a0 + a1;
            x = -2.0 / omega * ((-omega / 2.0 * tail_start).exp() - omega / (2.0 * k2) * v).ln();
            hx = k2 * (-omega / 2.0 * x).exp();
        }
        if !(x > 0.0 && x.is_finite()) {
            continue;
        }
        let u = open01(rng) * hx;
        if u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return x;
        }
    }
}
