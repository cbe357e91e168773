//! Smoothing, oscillation amplitude and frequency extraction, straight-line
//! fits and the condensate-fraction calibration.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dynamics::TimeSeries;
use crate::{Error, Result};

/// Fraction of the dominant period spanned by the default smoothing window.
pub const DEFAULT_WINDOW_FRACTION: f64 = 1.0 / 20.0;
/// Zero-padding factor of the periodogram.
const PADDING: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Half the peak-to-peak range of the smoothed signal.
    HalfPeakToPeak,
    /// Peak of the zero-padded periodogram with quadratic refinement.
    Periodogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationMetrics {
    /// Units of the lattice constant.
    pub amplitude: Option<f64>,
    /// Angular frequency in rad per time unit.
    pub frequency: Option<f64>,
    pub smoothing_window: usize,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

/// Centered moving mean; near the ends the window shrinks symmetrically.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("smoothing window must be odd and >= 1, got {window}")));
    }
    if window > series.len() {
        return Err(Error::InvalidParameter(format!(
            "smoothing window {window} exceeds series length {}",
            series.len()
        )));
    }
    let half = window / 2;
    let n = series.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in series {
        prefix.push(prefix.last().unwrap() + v);
    }
    Ok((0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            if h == 0 {
                return series[i];
            }
            (prefix[i + h + 1] - prefix[i - h]) / (2 * h + 1) as f64
        })
        .collect())
}

/// Odd sample count spanning `DEFAULT_WINDOW_FRACTION` of `period`.
pub fn default_window(dt: f64, period: f64) -> usize {
    let w = (DEFAULT_WINDOW_FRACTION * period / dt).round().max(1.0) as usize;
    if w.is_multiple_of(2) {
        w + 1
    } else {
        w
    }
}

fn sample_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("sample times must increase".into()));
    }
    let uneven = times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs()));
    if uneven {
        return Err(Error::InvalidParameter("sample times must be uniformly spaced".into()));
    }
    Ok(dt)
}

/// Half peak-to-peak of the smoothed signal.
///
/// With `window = None` the window spans a twentieth of the dominant period
/// (no smoothing when the signal has no oscillatory component), clamped to
/// the record length.
pub fn oscillation_amplitude(signal: &[f64], dt: f64, window: Option<usize>) -> Result<(f64, usize)> {
    if signal.is_empty() {
        return Err(Error::InvalidParameter("empty signal".into()));
    }
    let window = match window {
        Some(w) => w,
        None => match dominant_frequency(signal, dt) {
            Ok(omega) => {
                let w = default_window(dt, 2.0 * PI / omega);
                let cap = if signal.len() % 2 == 1 { signal.len() } else { signal.len() - 1 };
                w.min(cap)
            }
            Err(Error::NoPeak) => 1,
            Err(e) => return Err(e),
        },
    };
    let smooth = moving_average(signal, window)?;
    let (lo, hi) = smooth.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    Ok((0.5 * (hi - lo), window))
}

pub fn extract_amplitude(ts: &TimeSeries, window: Option<usize>) -> Result<OscillationMetrics> {
    let dt = sample_step(&ts.times)?;
    let (amplitude, smoothing_window) = oscillation_amplitude(&ts.mean_x, dt, window)?;
    Ok(OscillationMetrics {
        amplitude: Some(amplitude),
        frequency: None,
        smoothing_window,
        methods: vec![Method::HalfPeakToPeak],
    })
}

pub fn extract_frequency(ts: &TimeSeries) -> Result<OscillationMetrics> {
    let dt = sample_step(&ts.times)?;
    let omega = dominant_frequency(&ts.mean_x, dt)?;
    Ok(OscillationMetrics {
        amplitude: None,
        frequency: Some(omega),
        smoothing_window: 1,
        methods: vec![Method::Periodogram],
    })
}

/// Dominant nonzero angular frequency of a uniformly sampled signal.
///
/// The signal is linearly detrended, zero-padded and Fourier transformed; the
/// strongest positive-frequency bin is refined by a parabola through it and
/// its neighbours. A signal without oscillatory content yields
/// [`Error::NoPeak`].
pub fn dominant_frequency(signal: &[f64], dt: f64) -> Result<f64> {
    let n = signal.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 samples, got {n}")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("sample step must be > 0, got {dt}")));
    }
    let t: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let trend = linear_fit(&t, signal)?;
    let scale = signal.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let wiggle = trend.residuals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if wiggle <= 1e-12 * scale {
        return Err(Error::NoPeak);
    }

    let len = (PADDING * n).next_power_of_two();
    let mut buf: Vec<Complex64> = trend.residuals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let power: Vec<f64> = buf[..=len / 2].iter().map(|z| z.norm_sqr()).collect();

    let (k, &peak) =
        power.iter().enumerate().skip(1).fold((0, &0.0), |best, (k, p)| if *p > *best.1 { (k, p) } else { best });
    if k == 0 || peak <= 0.0 {
        return Err(Error::NoPeak);
    }
    let shift = if k + 1 < power.len() {
        let (a, b, c) = (power[k - 1], peak, power[k + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(2.0 * PI * (k as f64 + shift) / (len as f64 * dt))
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (slope * a + intercept)).collect();
    let r_squared = r_squared(y, &residuals);
    Ok(FitResult { slope, intercept, r_squared, residuals })
}

/// Least squares `y ≈ slope·x` through the origin. `r_squared` is still taken
/// against the mean of `y`.
pub fn proportional_fit(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if x.is_empty() || !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae are all zero".into()));
    }
    let slope = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - slope * a).collect();
    let r_squared = r_squared(y, &residuals);
    Ok(FitResult { slope, intercept: 0.0, r_squared, residuals })
}

fn r_squared(y: &[f64], residuals: &[f64]) -> f64 {
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let scale = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    if ss_tot <= 1e-28 * scale {
        // constant data: perfect if the fit reproduces it
        return if ss_res <= 1e-28 * scale { 1.0 } else { 0.0 };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

/// Tight-binding oscillation frequency `ω = 2π/(M-1) · J · sin(ka)` with
/// `J` as a rate (`J/ħ`).
pub fn tb_frequency(ka: f64, hop_j: f64, n_sites: usize) -> Result<f64> {
    if n_sites < 2 {
        return Err(Error::InvalidParameter(format!("need at least two sites, got {n_sites}")));
    }
    Ok(2.0 * PI / (n_sites - 1) as f64 * hop_j * ka.sin())
}

/// Affine map from oscillation amplitude to condensate fraction anchored on a
/// superfluid (`n = 1`) and a Mott-like (`n = n_mi`) reference run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub amp_sf: f64,
    pub amp_mi: f64,
    pub n_mi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedFraction {
    /// Clamped to `[0, 1]`.
    pub value: f64,
    pub out_of_range: bool,
}

pub fn calibrate_condensate_probe(amp_sf: f64, amp_mi: f64, n_mi: f64) -> Result<Calibration> {
    if !(amp_sf > amp_mi) || !(amp_mi >= 0.0) || !amp_sf.is_finite() {
        return Err(Error::CalibrationNotSeparated { amp_sf, amp_mi });
    }
    if !(n_mi > 0.0 && n_mi < 1.0) {
        return Err(Error::InvalidParameter(format!("Mott reference fraction must lie in (0, 1), got {n_mi}")));
    }
    Ok(Calibration { amp_sf, amp_mi, n_mi })
}

impl Calibration {
    pub fn estimate(&self, amplitude: f64) -> CalibratedFraction {
        let raw = self.n_mi + (1.0 - self.n_mi) * (amplitude - self.amp_mi) / (self.amp_sf - self.amp_mi);
        let value = raw.clamp(0.0, 1.0);
        CalibratedFraction { value, out_of_range: value != raw }
    }

    /// Amplitude predicted for condensate fraction `n`.
    pub fn forward(&self, n: f64) -> f64 {
        self.amp_mi + (self.amp_sf - self.amp_mi) * (n - self.n_mi) / (1.0 - self.n_mi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_definition() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(moving_average(&s, 1).unwrap(), s.to_vec());
        let impulse = [0.0, 0.0, 1.0, 0.0, 0.0];
        let m = moving_average(&impulse, 3).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(m, vec![0.0, third, third, third, 0.0]);
        assert_eq!(moving_average(&[2.5; 7], 5).unwrap(), vec![2.5; 7]);
        assert!(moving_average(&s, 2).is_err());
        assert!(moving_average(&s, 7).is_err());
    }

    #[test]
    fn sinusoid_amplitude_and_frequency() {
        let omega = 0.7;
        let dt = 0.05;
        let n = (5.0 * 2.0 * PI / omega / dt) as usize;
        let s: Vec<f64> = (0..n).map(|k| 0.3 * (omega * k as f64 * dt).sin()).collect();
        let (a, w) = oscillation_amplitude(&s, dt, None).unwrap();
        assert!((a - 0.3).abs() / 0.3 < 0.02, "{a}");
        assert_eq!(w % 2, 1);
        let f = dominant_frequency(&s, dt).unwrap();
        assert!((f - omega).abs() / omega < 0.01, "{f}");
    }

    #[test]
    fn flat_signals() {
        assert!(matches!(dominant_frequency(&[1.5; 64], 0.1), Err(Error::NoPeak)));
        assert_eq!(oscillation_amplitude(&[0.0; 64], 0.1, None).unwrap().0, 0.0);
    }

    #[test]
    fn stronger_tone_wins() {
        let dt = 0.02;
        let s: Vec<f64> = (0..4000)
            .map(|k| {
                let t = k as f64 * dt;
                3f64.sqrt() * (2.0 * t).sin() + (5.0 * t).sin()
            })
            .collect();
        assert!((dominant_frequency(&s, dt).unwrap() - 2.0).abs() < 0.02);
    }

    #[test]
    fn fits() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert_eq!(f.r_squared, 1.0);
        assert_eq!(linear_fit(&[0.0, 1.0], &[3.0, -1.0]).unwrap().r_squared, 1.0);
        assert!(matches!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::DegenerateFit(_))));
        let p = proportional_fit(&x, &[0.0, 3.0, 6.0, 9.0]).unwrap();
        assert!((p.slope - 3.0).abs() < 1e-14 && p.r_squared == 1.0);
    }

    #[test]
    fn tb_frequency_values() {
        assert_eq!(tb_frequency(0.0, 1.0, 10).unwrap(), 0.0);
        let a = tb_frequency(0.4, 1.0, 10).unwrap();
        let b = tb_frequency(PI - 0.4, 1.0, 10).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(tb_frequency(1.0, 1.0, 1).is_err());
    }

    #[test]
    fn calibration_anchors() {
        let c = calibrate_condensate_probe(2.0, 0.2, 0.25).unwrap();
        assert_eq!(c.estimate(2.0).value, 1.0);
        assert!((c.estimate(0.2).value - 0.25).abs() < 1e-15);
        assert!((c.estimate(1.1).value - 0.625).abs() < 1e-15);
        assert!(c.estimate(3.0).out_of_range && c.estimate(3.0).value == 1.0);
        assert!(calibrate_condensate_probe(0.1, 0.2, 0.25).is_err());
        assert!(calibrate_condensate_probe(1.0, 0.2, 1.0).is_err());
    }
}
