//! Correlators and the CHSH combination.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::law::{JointLaw2x2, LawEstimate, SettingsPair};
use crate::scalar::Scalar;
use crate::UnitVector;

pub const BELL_BOUND: f64 = 2.0;
pub const CIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;
pub const ALGEBRAIC_BOUND: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelatorEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_trials: u64,
}

impl CorrelatorEstimate {
    /// An exact value (zero standard error).
    pub fn exact(value: f64) -> Self {
        CorrelatorEstimate { value, std_error: 0.0, n_trials: 0 }
    }

    pub fn from_law<T: Scalar>(law: &JointLaw2x2<T>) -> Self {
        Self::exact(law.correlator().to_f64().expect("finite correlator"))
    }

    /// Mean of `sigma * tau` over the recorded trials with its standard error.
    pub fn from_counts(est: &LawEstimate) -> Result<Self> {
        let n = est.n();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let same = est.counts[0][0] + est.counts[1][1];
        let mean = (2.0 * same as f64 - n as f64) / n as f64;
        let std_error = if n > 1 {
            let var = (1.0 - mean * mean) * n as f64 / (n - 1) as f64;
            (var.max(0.0) / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(CorrelatorEstimate { value: mean, std_error, n_trials: n })
    }

    /// Mean of products given as `+-1` values.
    pub fn from_products(products: &[i8]) -> Result<Self> {
        let mut est = LawEstimate::new();
        for &p in products {
            // Only the product matters; encode it as (+, p).
            est.counts[0][if p > 0 { 0 } else { 1 }] += 1;
        }
        Self::from_counts(&est)
    }
}

/// The four analyzer directions of a CHSH test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshSettings {
    pub a: UnitVector,
    pub a2: UnitVector,
    pub b: UnitVector,
    pub b2: UnitVector,
}

impl ChshSettings {
    pub fn planar_degrees(a: f64, a2: f64, b: f64, b2: f64) -> Self {
        ChshSettings {
            a: UnitVector::planar_degrees(a),
            a2: UnitVector::planar_degrees(a2),
            b: UnitVector::planar_degrees(b),
            b2: UnitVector::planar_degrees(b2),
        }
    }

    /// Angles maximizing the singlet value of `C1 + C2 + C3 - C4`: 0, 90, 45 and -45 degrees,
    /// so that `(a', b')` is the pair 135 degrees apart.
    pub fn singlet_optimal() -> Self {
        Self::planar_degrees(0.0, 90.0, 45.0, -45.0)
    }

    /// `a = x`, `a' = y`, `b = -(x + y)/sqrt 2`, `b' = (y - x)/sqrt 2`: every overlap has the sign
    /// that saturates the algebraic bound for a correlator `-sgn(a.b)`.
    pub fn sign_saturating() -> Self {
        Self::planar_degrees(0.0, 90.0, 225.0, 135.0)
    }

    /// Settings pairs in correlator order: `(a,b), (a',b), (a,b'), (a',b')`.
    pub fn pairs(&self) -> [SettingsPair<f64>; 4] {
        [
            SettingsPair::new(self.a, self.b),
            SettingsPair::new(self.a2, self.b),
            SettingsPair::new(self.a, self.b2),
            SettingsPair::new(self.a2, self.b2),
        ]
    }
}

/// `C1 + C2 + C3 - C4` in correlator order.
pub fn chsh_combination<T: Clone + std::ops::Add<Output = T> + std::ops::Sub<Output = T>>(c: &[T; 4]) -> T {
    c[0].clone() + c[1].clone() + c[2].clone() - c[3].clone()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshReport {
    #[serde(rename = "E")]
    pub e: f64,
    pub std_error: f64,
    pub correlators: [CorrelatorEstimate; 4],
    pub settings: ChshSettings,
    pub exceeds_bell: bool,
    pub exceeds_cirelson: bool,
}

impl ChshReport {
    pub fn new(settings: ChshSettings, correlators: [CorrelatorEstimate; 4]) -> Self {
        let e = chsh_combination(&correlators.map(|c| c.value)).abs();
        let std_error = correlators.iter().map(|c| c.std_error.powi(2)).sum::<f64>().sqrt();
        ChshReport {
            e,
            std_error,
            correlators,
            settings,
            exceeds_bell: e > BELL_BOUND,
            exceeds_cirelson: e > CIRELSON_BOUND,
        }
    }

    /// Evaluates a closed-form law at the four settings pairs.
    pub fn analytic(
        settings: ChshSettings,
        law: impl Fn(&SettingsPair<f64>) -> Result<JointLaw2x2<f64>>,
    ) -> Result<Self> {
        let pairs = settings.pairs();
        let mut c = [CorrelatorEstimate::exact(0.0); 4];
        for (slot, s) in c.iter_mut().zip(&pairs) {
            *slot = CorrelatorEstimate::from_law(&law(s)?);
        }
        Ok(Self::new(settings, c))
    }

    /// `E` recomputed from the stored correlators.
    pub fn recomputed_e(&self) -> f64 {
        chsh_combination(&self.correlators.map(|c| c.value)).abs()
    }
}
