//! Atmospheric absorption of sound after ISO 9613-1.

use serde::{Deserialize, Serialize};

const T0: f64 = 293.15;
const T01: f64 = 273.16;
const P_REF_KPA: f64 = 101.325;

/// Frequency- and range-dependent amplitude loss along the acoustic path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbsorptionModel {
    None,
    Iso9613 { temperature_c: f64, relative_humidity: f64 },
}

impl Default for AbsorptionModel {
    fn default() -> Self {
        AbsorptionModel::Iso9613 { temperature_c: 20.0, relative_humidity: 50.0 }
    }
}

impl AbsorptionModel {
    /// Pressure-amplitude factor after travelling `range` metres at `freq` Hz.
    pub fn factor(&self, freq: f64, range: f64) -> f64 {
        match *self {
            AbsorptionModel::None => 1.0,
            AbsorptionModel::Iso9613 { temperature_c, relative_humidity } => {
                let db = attenuation_db_per_m(freq, temperature_c, relative_humidity, P_REF_KPA);
                10f64.powf(-db * range / 20.0)
            }
        }
    }
}

/// Pure-tone attenuation coefficient in dB/m.
pub fn attenuation_db_per_m(freq: f64, temperature_c: f64, humidity_pct: f64, pressure_kpa: f64) -> f64 {
    let t = temperature_c + 273.15;
    let pa = pressure_kpa / P_REF_KPA;
    let c = -6.8346 * (T01 / t).powf(1.261) + 4.6151;
    let psat = 10f64.powf(c);
    let h = humidity_pct * psat / pa;
    let tr = t / T0;

    let fr_o = pa * (24.0 + 4.04e4 * h * (0.02 + h) / (0.391 + h));
    let fr_n = pa * tr.powf(-0.5) * (9.0 + 280.0 * h * (-4.170 * (tr.powf(-1.0 / 3.0) - 1.0)).exp());

    let f2 = freq * freq;
    8.686
        * f2
        * (1.84e-11 / pa * tr.sqrt()
            + tr.powf(-2.5)
                * (0.01275 * (-2239.1 / t).exp() / (fr_o + f2 / fr_o)
                    + 0.1068 * (-3352.0 / t).exp() / (fr_n + f2 / fr_n)))
}
