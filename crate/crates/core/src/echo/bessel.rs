//! Bessel function of the first kind, order one.

use std::f64::consts::{FRAC_PI_4, PI};

/// Switch from the power series to the Hankel asymptotic expansion.
const SERIES_LIMIT: f64 = 12.0;

/// J₁(x).
///
/// Power series below |x| = 12, where cancellation costs at most ~4 digits,
/// and the Hankel asymptotic expansion above, where truncated terms fall
/// below 1e-11.
pub fn bessel_j1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x < SERIES_LIMIT {
        series_j1(x)
    } else {
        asymptotic_j1(x)
    }
}

fn series_j1(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    for k in 1..80 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn asymptotic_j1(x: f64) -> f64 {
    // P and Q series for ν = 1 with μ = 4ν² = 4.
    const MU: f64 = 4.0;
    let z8 = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    for k in 1..16 {
        let odd = (2 * k - 1) as f64;
        term *= (MU - odd * odd) / (k as f64 * z8);
        if k % 2 == 1 {
            // Q collects odd terms with alternating sign starting positive.
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * term;
        } else {
            let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
            p += sign * term;
        }
        if term.abs() < 1e-16 {
            break;
        }
    }
    let chi = x - 3.0 * FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Far-field pattern of a baffled circular piston, 2·J₁(x)/x, with the x → 0
/// limit of 1.
pub fn jinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        // 2J₁(x)/x = 1 − x²/8 + O(x⁴)
        1.0 - x * x / 8.0
    } else {
        2.0 * bessel_j1(x) / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// J₁(x) = (1/π)∫₀^π cos(τ − x·sin τ) dτ. The integrand is smooth and
    /// periodic, so the trapezoid rule converges geometrically.
    fn j1_quadrature(x: f64) -> f64 {
        let n = 4000;
        let h = PI / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let t = i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * (t - x * t.sin()).cos();
        }
        acc * h / PI
    }

    #[test]
    fn matches_integral_representation() {
        let mut x = 0.0;
        while x < 30.0 {
            let err = (bessel_j1(x) - j1_quadrature(x)).abs();
            assert!(err < 1e-10, "x = {x}: err {err}");
            x += 0.173;
        }
    }

    #[test]
    fn series_and_asymptotic_agree_at_switch() {
        let a = series_j1(SERIES_LIMIT);
        let b = asymptotic_j1(SERIES_LIMIT);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn first_zero() {
        assert!(bessel_j1(3.831_705_970_207_512_3).abs() < 1e-12);
        assert!(jinc(3.831_71).abs() < 1e-6);
        // the four-digit root is off by 6e-6, worth ~1.3e-6 of jinc
        assert!(jinc(3.8317).abs() < 2e-6);
    }

    #[test]
    fn jinc_limit_and_parity() {
        assert_eq!(jinc(0.0), 1.0);
        assert!((jinc(1e-9) - 1.0).abs() < 1e-15);
        assert_eq!(jinc(0.7), jinc(-0.7));
    }
}
