use crate::dist::ln_factorial;
use crate::error::{Error, Result};
use crate::logprob::LogSumExp;

/// Log mass at `y` of the Poisson mixture `Poi(μ Z)`, `Z ~ IG(1, ψ)`.
///
/// Uses the finite-sum form of the half-integer Bessel function `K_{y-1/2}`:
///
/// `log P(y) = y log μ - log y! - (y/2) log(1 + 2μ/ψ) - 2μψ/(ψ + x)
///             + log Σ_{k<y} (y-1+k)! / (k! (y-1-k)!) (2x)^{-k}`
///
/// with `x = ψ sqrt(1 + 2μ/ψ)`. The sum is accumulated in log space so large
/// counts and extreme dispersions stay finite.
pub fn pig_log_pmf(y: u64, mu: f64, psi: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be positive and finite, got {mu}")));
    }
    if !(psi > 0.0 && psi.is_finite()) {
        return Err(Error::param("psi", format!("must be positive and finite, got {psi}")));
    }
    let r = 2.0 * mu / psi;
    let root = (1.0 + r).sqrt();
    let x = psi * root;
    // psi (1 - sqrt(1 + r)) without cancellation
    let head = -2.0 * mu / (1.0 + root);
    if y == 0 {
        return finite(head);
    }
    let n = (y - 1) as f64;
    let ln_2x = (2.0 * x).ln();
    let mut acc = LogSumExp::new();
    let mut term = 0.0;
    acc.push(term);
    for k in 0..(y - 1) {
        let k = k as f64;
        term += ((n + k + 1.0) * (n - k)).ln() - (k + 1.0).ln() - ln_2x;
        acc.push(term);
    }
    let series = acc.value().expect("series has at least one term");
    let yf = y as f64;
    finite(yf * mu.ln() - ln_factorial(y) - 0.5 * yf * r.ln_1p() + head + series)
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("Poisson-inverse-Gaussian log mass"))
    }
}
