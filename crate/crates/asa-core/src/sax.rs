//! SAX discretization: real-valued multivariate series → symbolic sequences.
//!
//! The pipeline per attribute is normalize → piecewise aggregate
//! approximation (PAA) → bin against breakpoints. Bins are half-open,
//! `[breakpoint[k-1], breakpoint[k])`, with the last bin closed above by
//! +∞, so every finite value maps to exactly one symbol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AlphabetSpec, Mvs, Symbol};

/// How bin breakpoints are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BreakpointMode {
    /// Quantiles of the standard normal: breakpoints at Φ⁻¹(i/k). The
    /// canonical SAX choice, equiprobable under z-normalized data.
    #[default]
    GaussianEquiprobable,
    /// Equal-width bins spanning the post-PAA min..max of each attribute.
    UniformRange,
}

/// Pre-binning normalization scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalize {
    /// z-score each attribute of each sequence independently
    /// (population standard deviation).
    #[default]
    Zscore,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaxConfig {
    pub alphabet_size: usize,
    pub breakpoint_mode: BreakpointMode,
    /// PAA window width; each output symbol averages this many input
    /// values. A trailing partial window is dropped.
    pub paa_window: usize,
    pub normalize: Normalize,
}

impl Default for SaxConfig {
    fn default() -> Self {
        Self {
            alphabet_size: 10,
            breakpoint_mode: BreakpointMode::GaussianEquiprobable,
            paa_window: 1,
            normalize: Normalize::Zscore,
        }
    }
}

/// A real-valued multivariate series: one equal-length row of values per
/// attribute, times 1..n.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    id: String,
    attributes: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl RawSeries {
    pub fn new(
        id: impl Into<String>,
        attributes: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let id = id.into();
        if attributes.is_empty() || attributes.len() != values.len() {
            return Err(Error::Validation(format!(
                "series '{id}': need one value row per attribute"
            )));
        }
        let n = values[0].len();
        if n == 0 {
            return Err(Error::Validation(format!("series '{id}': empty series")));
        }
        for (a, row) in attributes.iter().zip(&values) {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "series '{id}': attribute '{a}' has {} values, expected {n}",
                    row.len()
                )));
            }
            if let Some(t) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "series '{id}': non-finite value for attribute '{a}' at t={}",
                    t + 1
                )));
            }
        }
        Ok(Self {
            id,
            attributes,
            values,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty series
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn values(&self, attribute_index: usize) -> &[f64] {
        &self.values[attribute_index]
    }
}

/// Standard-normal quantiles Φ⁻¹(i/k) for i = 1..k−1, strictly increasing
/// and exactly antisymmetric about 0.
pub fn gaussian_breakpoints(k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::Config(format!(
            "alphabet size {k} too small: need at least 2 bins"
        )));
    }
    let mut bps = Vec::with_capacity(k - 1);
    for i in 1..k {
        // mirror the upper half so antisymmetry is exact in floating point
        let x = match (2 * i).cmp(&k) {
            std::cmp::Ordering::Less => inverse_normal_cdf(i as f64 / k as f64),
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => -inverse_normal_cdf((k - i) as f64 / k as f64),
        };
        bps.push(x);
    }
    Ok(bps)
}

/// Acklam's rational approximation to Φ⁻¹ (relative error < 1.2e-9 over
/// (0,1)). Only ever called with p in (0, 0.5] here.
fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// 0-based bin of `v`: the number of breakpoints at or below it.
fn bin_of(breakpoints: &[f64], v: f64) -> usize {
    breakpoints.partition_point(|b| *b <= v)
}

/// Bin used for degenerate (constant) attributes: the middle one, the
/// lower of the two middles when the alphabet size is even.
fn middle_bin(k: usize) -> usize {
    (k - 1) / 2
}

/// Discretize one series into a symbolic sequence of length
/// `floor(n / paa_window)`.
///
/// A constant attribute (zero variance under z-scoring, or zero range
/// under uniform breakpoints) maps every step to the middle bin rather
/// than failing on the degenerate denominator.
pub fn discretize(series: &RawSeries, cfg: &SaxConfig, alphabet: &AlphabetSpec) -> Result<Mvs> {
    if cfg.alphabet_size < 2 {
        return Err(Error::Config(format!(
            "alphabet size {} too small: need at least 2 bins",
            cfg.alphabet_size
        )));
    }
    if alphabet.len() != cfg.alphabet_size {
        return Err(Error::Config(format!(
            "alphabet has {} symbols but the discretizer is configured for {}",
            alphabet.len(),
            cfg.alphabet_size
        )));
    }
    if cfg.paa_window == 0 {
        return Err(Error::Config("paa_window must be at least 1".into()));
    }
    let n = series.len();
    let m = n / cfg.paa_window;
    if m == 0 {
        return Err(Error::Validation(format!(
            "series '{}': length {n} is shorter than one PAA window of {}",
            series.id(),
            cfg.paa_window
        )));
    }
    let k = cfg.alphabet_size;
    let gaussian = match cfg.breakpoint_mode {
        BreakpointMode::GaussianEquiprobable => Some(gaussian_breakpoints(k)?),
        BreakpointMode::UniformRange => None,
    };

    let mut rows = Vec::with_capacity(series.attributes().len());
    for a in 0..series.attributes().len() {
        let raw = series.values(a);

        let normalized: Option<Vec<f64>> = match cfg.normalize {
            Normalize::None => Some(raw.to_vec()),
            Normalize::Zscore => {
                let mean = raw.iter().sum::<f64>() / n as f64;
                let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                let std = var.sqrt();
                if std == 0.0 {
                    None // constant attribute
                } else {
                    Some(raw.iter().map(|v| (v - mean) / std).collect())
                }
            }
        };

        let row: Vec<Symbol> = match normalized {
            None => vec![Symbol(middle_bin(k) as u16); m],
            Some(vals) => {
                let paa: Vec<f64> = (0..m)
                    .map(|w| {
                        let window = &vals[w * cfg.paa_window..(w + 1) * cfg.paa_window];
                        window.iter().sum::<f64>() / cfg.paa_window as f64
                    })
                    .collect();
                let breakpoints = match &gaussian {
                    Some(b) => b.clone(),
                    None => {
                        let lo = paa.iter().cloned().fold(f64::INFINITY, f64::min);
                        let hi = paa.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        if lo == hi {
                            rows.push(vec![Symbol(middle_bin(k) as u16); m]);
                            continue;
                        }
                        (1..k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
                    }
                };
                paa.iter()
                    .map(|v| Symbol(bin_of(&breakpoints, *v) as u16))
                    .collect()
            }
        };
        rows.push(row);
    }

    Mvs::from_rows(series.id(), &rows)
}
