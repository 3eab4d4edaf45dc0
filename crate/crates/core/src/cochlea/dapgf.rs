//! Differentiated all-pole gammatone filter (DAPGF),
//!
//! ```text
//! H(s) = ω₀^(2N−1)·s / (s² + (ω₀/Q)·s + ω₀²)^N
//! ```
//!
//! discretized with the bilinear transform pre-warped at the centre
//! frequency. The N identical resonators become N biquads; the
//! differentiator `s` is folded into the first one, giving it the numerator
//! (1 − z⁻²) instead of (1 + z⁻¹)².

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direct-form-II-transposed second-order section, normalized so a0 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2]) / (1.0 + z_inv * self.a[0] + z2 * self.a[1])
    }

    /// Roots of z² + a1·z + a2.
    pub fn poles(&self) -> [Complex64; 2] {
        let [a1, a2] = self.a;
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }
}

/// Cascade of biquads realizing one DAPGF channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DapgfFilter {
    pub center_freq: f64,
    pub sample_rate: f64,
    pub sections: Vec<Biquad>,
}

impl DapgfFilter {
    pub fn design(center_freq: f64, order: usize, q: f64, sample_rate: f64) -> Result<Self> {
        if !(center_freq > 0.0 && center_freq < sample_rate / 2.0) {
            return Err(Error::param(format!(
                "centre frequency {center_freq} Hz must lie in (0, {}) Hz",
                sample_rate / 2.0
            )));
        }
        if order == 0 || !(q > 0.0) {
            return Err(Error::param("DAPGF order must be ≥ 1 and Q > 0"));
        }
        let w0 = 2.0 * PI * center_freq;
        let k = w0 / (w0 / (2.0 * sample_rate)).tan();
        let a0 = k * k + w0 * k / q + w0 * w0;
        let a = [(2.0 * w0 * w0 - 2.0 * k * k) / a0, (k * k - w0 * k / q + w0 * w0) / a0];
        let mut sections = Vec::with_capacity(order);
        // ω₀^(2N−1) = ω₀ · (ω₀²)^(N−1): ω₀ goes with the differentiator.
        let g = w0 * k / a0;
        sections.push(Biquad { b: [g, 0.0, -g], a });
        let g = w0 * w0 / a0;
        for _ in 1..order {
            sections.push(Biquad { b: [g, 2.0 * g, g], a });
        }
        Ok(DapgfFilter { center_freq, sample_rate, sections })
    }

    pub fn response(&self, freq: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq / self.sample_rate);
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    pub fn magnitude(&self, freq: f64) -> f64 {
        self.response(freq).norm()
    }

    /// Group delay in seconds, −dφ/dω by central difference per section.
    pub fn group_delay(&self, freq: f64) -> f64 {
        let df = 1.0;
        let step = |f: f64| Complex64::from_polar(1.0, -2.0 * PI * f / self.sample_rate);
        let dphi: f64 =
            self.sections.iter().map(|s| (s.response(step(freq + df)) / s.response(step(freq - df))).arg()).sum();
        -dphi / (2.0 * PI * 2.0 * df)
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let mut out = input.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, x: &mut [f64]) {
        for s in &self.sections {
            let [b0, b1, b2] = s.b;
            let [a1, a2] = s.a;
            let (mut z1, mut z2) = (0.0, 0.0);
            for v in x.iter_mut() {
                let input = *v;
                let y = b0 * input + z1;
                z1 = b1 * input - a1 * y + z2;
                z2 = b2 * input - a2 * y;
                *v = y;
            }
        }
    }
}

/// Layout of the cochlear filterbank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterbankSpec {
    pub f_low: f64,
    pub f_high: f64,
    pub step: f64,
    pub order: usize,
    pub q: f64,
    pub sample_rate: f64,
}

impl Default for FilterbankSpec {
    /// 20–100 kHz in 0.5 kHz steps, N = 4, Q = 15, at 1 MHz.
    fn default() -> Self {
        FilterbankSpec { f_low: 20e3, f_high: 100e3, step: 500.0, order: 4, q: 15.0, sample_rate: 1e6 }
    }
}

impl FilterbankSpec {
    pub fn channel_count(&self) -> usize {
        ((self.f_high - self.f_low) / self.step).round() as usize + 1
    }

    /// Centre frequencies, ascending.
    pub fn center_freqs(&self) -> Vec<f64> {
        (0..self.channel_count()).map(|i| self.f_low + self.step * i as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_low > 0.0 && self.f_high >= self.f_low && self.step > 0.0) {
            return Err(Error::param("filterbank needs 0 < f_low ≤ f_high and step > 0"));
        }
        if self.order == 0 || !(self.q > 0.0) {
            return Err(Error::param("filterbank needs N ≥ 1 and Q > 0"));
        }
        if self.f_high >= self.sample_rate / 2.0 {
            return Err(Error::param("filterbank extends past Nyquist"));
        }
        Ok(())
    }

    pub fn design(&self) -> Result<Vec<DapgfFilter>> {
        self.validate()?;
        self.center_freqs().into_iter().map(|cf| design_dapgf(cf, self)).collect()
    }
}

pub fn design_dapgf(cf: f64, spec: &FilterbankSpec) -> Result<DapgfFilter> {
    DapgfFilter::design(cf, spec.order, spec.q, spec.sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> FilterbankSpec {
        FilterbankSpec::default()
    }

    fn peak_on_grid(f: &DapgfFilter, lo: f64, hi: f64, step: f64) -> f64 {
        let mut best = (lo, 0.0);
        let mut x = lo;
        while x <= hi {
            let m = f.magnitude(x);
            if m > best.1 {
                best = (x, m);
            }
            x += step;
        }
        best.0
    }

    #[test]
    fn channel_layout() {
        let s = spec();
        assert_eq!(s.channel_count(), 161);
        let cfs = s.center_freqs();
        assert_eq!(cfs[0], 20e3);
        assert_eq!(cfs[160], 100e3);
    }

    #[test]
    fn zero_at_dc_and_stable() {
        for f in spec().design().unwrap() {
            assert!(f.is_stable());
            assert!(f.magnitude(0.0) < 1e-12);
        }
    }

    #[test]
    fn peak_near_center() {
        let f = design_dapgf(60e3, &spec()).unwrap();
        let peak = peak_on_grid(&f, 30e3, 120e3, 10.0);
        assert!((peak - 60e3).abs() / 60e3 < 0.05, "{peak}");
        // analog peak gain at ω₀ is Q^N; pre-warping preserves it at cf
        let g = f.magnitude(60e3);
        assert!((g - 15f64.powi(4)).abs() / 15f64.powi(4) < 1e-9, "{g}");
    }

    #[test]
    fn cascade_narrows_bandwidth() {
        let f = design_dapgf(60e3, &spec()).unwrap();
        let peak_f = peak_on_grid(&f, 50e3, 70e3, 10.0);
        let half_power = f.magnitude(peak_f) / 2f64.sqrt();
        let mut lo = peak_f;
        while f.magnitude(lo) > half_power {
            lo -= 10.0;
        }
        let mut hi = peak_f;
        while f.magnitude(hi) > half_power {
            hi += 10.0;
        }
        let bw = hi - lo;
        // single resonator: cf/Q = 4 kHz; four in cascade ≈ 0.435·cf/Q
        assert!(bw < 60e3 / 15.0, "{bw}");
        assert!(bw > 0.3 * 60e3 / 15.0, "{bw}");
    }

    #[test]
    fn rejects_cf_past_nyquist() {
        assert!(matches!(design_dapgf(500e3, &spec()), Err(Error::Parameter(_))));
        assert!(design_dapgf(0.0, &spec()).is_err());
    }

    #[test]
    fn impulse_matches_frequency_response() {
        let f = design_dapgf(40e3, &spec()).unwrap();
        let mut imp = vec![0.0; 8192];
        imp[0] = 1.0;
        let h = f.apply(&imp);
        let probe = 37e3;
        let dft: Complex64 =
            h.iter().enumerate().map(|(n, &v)| Complex64::from_polar(v, -2.0 * PI * probe * n as f64 / 1e6)).sum();
        assert!((dft - f.response(probe)).norm() / f.response(probe).norm() < 1e-6);
    }
}
