//! Zeroth-order Bessel function of the first kind.

use std::f64::consts::{FRAC_PI_4, PI};

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_TERMS: usize = 8;

/// `J₀(x)`, absolute error below 1e-8 on the whole real line.
///
/// Uses the ascending power series for `|x| < 8` and the Hankel asymptotic
/// expansion (eight terms each for `P` and `Q`) beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    }
}

fn series(x: f64) -> f64 {
    // sum_k (-1)^k (x²/4)^k / (k!)²
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn asymptotic(x: f64) -> f64 {
    // a_k = prod_{j=1..k} (2j-1)² / (k! 8^k); P takes even k, Q odd k,
    // both with alternating signs.
    let mut a = [0.0f64; 2 * ASYMPTOTIC_TERMS];
    a[0] = 1.0;
    for k in 1..a.len() {
        let odd = (2 * k - 1) as f64;
        a[k] = a[k - 1] * odd * odd / (k as f64 * 8.0);
    }
    let inv = 1.0 / x;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut sign = 1.0;
    for k in 0..ASYMPTOTIC_TERMS {
        p += sign * a[2 * k] * inv.powi(2 * k as i32);
        q -= sign * a[2 * k + 1] * inv.powi(2 * k as i32 + 1);
        sign = -sign;
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
