use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::broadcast::Broadcast;
use super::geometry::{Ear, SonarGeometry, Vec3};
use super::model::{EchoModelConstants, EchoPath};
use crate::dsp;
use crate::error::{Error, Result};

pub const MAX_GLINTS: usize = 4;
pub const MAX_OFFSET_M: f64 = 0.07;

/// Record time kept after the last possible echo sample.
const TAIL_S: f64 = 3e-3;

/// Point reflectors strung along +y behind the first glint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub glint_y_offsets: Vec<f64>,
    pub base_position: Vec3,
}

impl Target {
    pub fn new(glint_y_offsets: Vec<f64>) -> Result<Self> {
        let t = Target { glint_y_offsets, base_position: Vec3::new(0.0, 1.0, 0.0) };
        t.validate()?;
        Ok(t)
    }

    /// Builds a target from offsets that may contain coincident glints;
    /// coincident reflectors collapse into one.
    pub fn from_offsets_merged(offsets: &[f64]) -> Result<Self> {
        let mut v = offsets.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        Target::new(v)
    }

    pub fn validate(&self) -> Result<()> {
        let o = &self.glint_y_offsets;
        if o.is_empty() || o.len() > MAX_GLINTS {
            return Err(Error::param(format!("target needs 1..=4 glints, got {}", o.len())));
        }
        if o[0] != 0.0 {
            return Err(Error::param("first glint offset must be 0"));
        }
        if o.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("glint offsets must be strictly increasing"));
        }
        if o.iter().any(|&v| !(0.0..=MAX_OFFSET_M + 1e-12).contains(&v)) {
            return Err(Error::param("glint offsets must lie within [0, 7] cm"));
        }
        Ok(())
    }

    pub fn glints(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.glint_y_offsets.iter().map(|&dy| self.base_position + Vec3::new(0.0, dy, 0.0))
    }

    /// Along-axis distances between neighbouring glints.
    pub fn spacings(&self) -> Vec<f64> {
        self.glint_y_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Sampled pressure at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("time series contains non-finite samples"));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::param("sample rate must be positive"));
        }
        Ok(TimeSeries { samples, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }
}

/// Everything needed to synthesize one broadcast/echo record.
#[derive(Debug, Clone)]
pub struct Scene<'a> {
    pub broadcast: &'a Broadcast,
    pub target: &'a Target,
    pub geometry: &'a SonarGeometry,
    pub constants: &'a EchoModelConstants,
}

impl Scene<'_> {
    fn paths(&self) -> Result<Vec<EchoPath>> {
        self.target.glints().map(|g| EchoPath::new(g, self.geometry, Ear::Left)).collect()
    }

    /// Record length: farthest echo plus the broadcast plus a fixed tail.
    pub fn record_len(&self) -> Result<usize> {
        let c = self.constants.speed_of_sound;
        let far = self.paths()?.iter().map(|p| p.delay(c)).fold(0.0, f64::max);
        let fs = self.broadcast.sample_rate;
        Ok(((far + self.broadcast.duration + TAIL_S) * fs).ceil() as usize)
    }

    /// Sample span over which any glint echo is non-zero.
    pub fn echo_support(&self) -> Result<std::ops::Range<usize>> {
        let c = self.constants.speed_of_sound;
        let fs = self.broadcast.sample_rate;
        let delays: Vec<f64> = self.paths()?.iter().map(|p| p.delay(c) * fs).collect();
        let first = delays.iter().copied().fold(f64::INFINITY, f64::min).floor() as usize;
        let last = delays.iter().copied().fold(0.0, f64::max).ceil() as usize + self.broadcast.len();
        Ok(first..last.min(self.record_len()?))
    }

    /// Echo component alone: the broadcast filtered through the summed glint
    /// transfer functions in the frequency domain.
    pub fn echo(&self) -> Result<Vec<f64>> {
        self.constants.validate()?;
        self.target.validate()?;
        let len = self.record_len()?;
        let paths = self.paths()?;
        let nfft = dsp::next_pow2(len + self.broadcast.len());
        let fs = self.broadcast.sample_rate;
        let mut planner = FftPlanner::new();
        let mut spec = dsp::rfft_padded(&mut planner, &self.broadcast.samples, nfft);
        let half = nfft / 2;
        for k in 0..=half {
            let f = k as f64 * fs / nfft as f64;
            let h: Complex64 = paths.iter().map(|p| p.transfer(f, self.constants)).sum();
            let h = if k == half { Complex64::new(h.re, 0.0) } else { h };
            spec[k] *= h;
            if k > 0 && k < half {
                spec[nfft - k] *= h.conj();
            }
        }
        let time = dsp::ifft(&mut planner, spec);
        Ok(time[..len].iter().map(|c| c.re).collect())
    }

    /// Broadcast at t = 0, echo, and optional white Gaussian noise whose RMS
    /// sits `snr_db` below the echo RMS over the echo support.
    pub fn simulate(&self, snr_db: Option<f64>, seed: u64) -> Result<TimeSeries> {
        let mut out = self.echo()?;
        let echo_rms = {
            let support = self.echo_support()?;
            dsp::rms(&out[support])
        };
        for (o, b) in out.iter_mut().zip(&self.broadcast.samples) {
            *o += b;
        }
        if let Some(snr) = snr_db {
            if !snr.is_finite() {
                return Err(Error::param("SNR must be finite"));
            }
            let sigma = echo_rms / 10f64.powf(snr / 20.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for o in out.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *o += sigma * z;
            }
        }
        TimeSeries::new(out, self.broadcast.sample_rate)
    }
}

/// Convenience wrapper over [`Scene::simulate`]. `snr_db = None` disables noise.
pub fn simulate_scene(
    broadcast: &Broadcast,
    target: &Target,
    geometry: &SonarGeometry,
    constants: &EchoModelConstants,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<TimeSeries> {
    Scene { broadcast, target, geometry, constants }.simulate(snr_db, seed)
}

/// Pulse-compression delay estimate: peak of the matched-filter envelope,
/// searched at lags ≥ `min_lag`.
pub fn matched_filter_delay(signal: &[f64], broadcast: &[f64], min_lag: usize) -> Option<usize> {
    let mut planner = FftPlanner::new();
    let corr = dsp::cross_correlate(&mut planner, signal, broadcast);
    let env = dsp::analytic_envelope(&mut planner, &corr);
    if min_lag >= env.len() {
        return None;
    }
    dsp::argmax(&env[min_lag..]).map(|i| i + min_lag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::absorption::AbsorptionModel;
    use crate::echo::broadcast::Window;

    fn plain() -> EchoModelConstants {
        EchoModelConstants { absorption: AbsorptionModel::None, ..Default::default() }
    }

    #[test]
    fn target_validation() {
        assert!(Target::new(vec![0.0, 0.0111, 0.0481]).is_ok());
        assert!(Target::new(vec![]).is_err());
        assert!(Target::new(vec![0.0, 0.01, 0.02, 0.03, 0.04]).is_err());
        assert!(Target::new(vec![0.0, 0.08]).is_err());
        assert!(Target::new(vec![0.0, 0.02, 0.01]).is_err());
        assert!(Target::new(vec![0.01]).is_err());
        assert_eq!(Target::from_offsets_merged(&[0.0, 0.0]).unwrap().glint_y_offsets, vec![0.0]);
    }

    #[test]
    fn single_glint_delay_law() {
        let b = Broadcast::new(3e-3, Window::Welch).unwrap();
        let t = Target::new(vec![0.0]).unwrap();
        let g = SonarGeometry::default();
        let c = plain();
        let scene = Scene { broadcast: &b, target: &t, geometry: &g, constants: &c };
        let echo = scene.echo().unwrap();
        let path = EchoPath::new(Vec3::new(0.0, 1.0, 0.0), &g, Ear::Left).unwrap();
        let expected = (path.delay(343.0) * 1e6).round() as i64;
        let got = matched_filter_delay(&echo, &b.samples, 0).unwrap() as i64;
        assert!((got - expected).abs() <= 2, "{got} vs {expected}");
    }

    #[test]
    fn superposition_and_determinism() {
        let b = Broadcast::new(1e-3, Window::Welch).unwrap();
        let g = SonarGeometry::default();
        let c = EchoModelConstants::default();
        let both = Target::new(vec![0.0, 0.035]).unwrap();
        let first = Target::new(vec![0.0]).unwrap();
        // second glint alone: shift the base so it sits where glint 2 was
        let second = Target { glint_y_offsets: vec![0.0], base_position: Vec3::new(0.0, 1.035, 0.0) };
        let sim = |t: &Target| simulate_scene(&b, t, &g, &c, None, 0).unwrap().samples;
        let sb = sim(&both);
        let s1 = sim(&first);
        let s2 = sim(&second);
        // s1 and s2 each carry the broadcast once
        let n = sb.len().min(s1.len()).min(s2.len());
        for i in 0..n {
            let b_i = b.samples.get(i).copied().unwrap_or(0.0);
            assert!((sb[i] - (s1[i] + s2[i] - b_i)).abs() < 1e-9, "sample {i}");
        }
        let a = simulate_scene(&b, &both, &g, &c, Some(20.0), 42).unwrap();
        let a2 = simulate_scene(&b, &both, &g, &c, Some(20.0), 42).unwrap();
        assert_eq!(a, a2);
        let a3 = simulate_scene(&b, &both, &g, &c, Some(20.0), 43).unwrap();
        assert_ne!(a, a3);
    }

    #[test]
    fn snr_is_measured_against_echo() {
        let b = Broadcast::new(3e-3, Window::Welch).unwrap();
        let t = Target::new(vec![0.0]).unwrap();
        let g = SonarGeometry::default();
        let c = EchoModelConstants::default();
        let scene = Scene { broadcast: &b, target: &t, geometry: &g, constants: &c };
        let clean = scene.echo().unwrap();
        let support = scene.echo_support().unwrap();
        let echo_power = dsp::rms(&clean[support.clone()]).powi(2);
        let noisy = scene.simulate(Some(20.0), 9).unwrap();
        // broadcast ends at 3 ms, echo starts near 5.8 ms
        let quiet = &noisy.samples[3200..support.start - 50];
        let noise_power = dsp::rms(quiet).powi(2);
        let snr = 10.0 * (echo_power / noise_power).log10();
        assert!((snr - 20.0).abs() < 0.5, "{snr}");
    }
}
