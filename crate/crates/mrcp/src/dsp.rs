//! Signal conditioning: z-normalization, anti-aliased resampling, zero-phase
//! bandpass filtering, filter-bank division and Savitzky–Golay smoothing.
//!
//! The bandpass is a cascade of Butterworth biquads applied forward and
//! backward (zero phase). Design cutoffs are widened by √2 relative to the
//! nominal band edges so that the whole nominal band, edges included, keeps
//! a two-pass gain of at least 0.9 while frequencies at twice the upper edge
//! are attenuated below 0.1.

use ndarray::{Array1, Array2};

use crate::data::{Epochs, Trial};
use crate::error::{Error, Result};
use crate::linalg;

/// A nominal passband in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandSpec {
    pub fn new(low_hz: f64, high_hz: f64) -> Self {
        Self { low_hz, high_hz }
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz && self.high_hz < fs / 2.0) {
            return Err(Error::invalid(
                "band",
                format!(
                    "need 0 < low < high < fs/2, got [{}, {}] at fs {}",
                    self.low_hz, self.high_hz, fs
                ),
            ));
        }
        Ok(())
    }
}

/// Per-band copies of an epoch set after zero-phase bandpass filtering.
#[derive(Debug, Clone)]
pub struct FilterBankSet {
    pub banks: Vec<(BandSpec, Epochs)>,
}

impl FilterBankSet {
    pub fn bank_count(&self) -> usize {
        self.banks.len()
    }
}

/// The filter-bank scheme: low cutoffs fixed at 0.5 Hz, high cutoffs an
/// arithmetic sequence ending at 10 Hz. `count = 10` gives edges 1..=10 Hz.
pub fn bank_specs(count: usize) -> Vec<BandSpec> {
    assert!(count >= 1, "need at least one bank");
    (1..=count)
        .map(|i| {
            let high = if count == 1 {
                10.0
            } else {
                1.0 + 9.0 * (i - 1) as f64 / (count - 1) as f64
            };
            BandSpec::new(0.5, high)
        })
        .collect()
}

/// The wide 0.5–10 Hz band used before bank division and by single-band
/// methods.
pub fn wide_band() -> BandSpec {
    BandSpec::new(0.5, 10.0)
}

// ---------------------------------------------------------------------------
// z-normalization

/// Per-channel z-normalization: each channel of the output has mean 0 and
/// unit (population) variance.
pub fn zscore(trial: &Trial) -> Result<Trial> {
    let t = trial.samples() as f64;
    let mut data = trial.data.clone();
    for (channel, mut row) in data.rows_mut().into_iter().enumerate() {
        let mean = row.sum() / t;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t;
        if var <= 1e-300 {
            return Err(Error::DegenerateChannel { channel });
        }
        let std = var.sqrt();
        row.mapv_inplace(|v| (v - mean) / std);
    }
    Ok(trial.with_data(data))
}

// ---------------------------------------------------------------------------
// Biquad filtering

/// One second-order section, direct form II transposed, normalized a0 = 1.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn lowpass(fc: f64, fs: f64, q: f64) -> Self {
        let k = (std::f64::consts::PI * fc / fs).tan();
        let norm = 1.0 / (1.0 + k / q + k * k);
        Self {
            b0: k * k * norm,
            b1: 2.0 * k * k * norm,
            b2: k * k * norm,
            a1: 2.0 * (k * k - 1.0) * norm,
            a2: (1.0 - k / q + k * k) * norm,
        }
    }

    fn highpass(fc: f64, fs: f64, q: f64) -> Self {
        let k = (std::f64::consts::PI * fc / fs).tan();
        let norm = 1.0 / (1.0 + k / q + k * k);
        Self {
            b0: norm,
            b1: -2.0 * norm,
            b2: norm,
            a1: 2.0 * (k * k - 1.0) * norm,
            a2: (1.0 - k / q + k * k) * norm,
        }
    }

    /// Filter in place with the internal state initialized to the steady
    /// state for a constant input equal to `x0` (suppresses step transients,
    /// as in standard filtfilt implementations).
    fn apply(&self, x: &mut [f64], x0: f64) {
        let dc = (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2);
        let mut z1 = (dc - self.b0) * x0;
        let mut z2 = (self.b2 - self.a2 * dc) * x0;
        for v in x.iter_mut() {
            let input = *v;
            let out = self.b0 * input + z1;
            z1 = self.b1 * input - self.a1 * out + z2;
            z2 = self.b2 * input - self.a2 * out;
            *v = out;
        }
    }

    fn is_stable(&self) -> bool {
        // pole polynomial z² + a1 z + a2: Schur stability triangle
        self.a2 < 1.0 && self.a1.abs() < 1.0 + self.a2
    }

    /// Decay time constant of the section's pole pair, in samples.
    fn time_constant(&self) -> f64 {
        let radius = self.a2.clamp(0.0, 1.0 - 1e-12).sqrt();
        if radius <= 0.0 {
            1.0
        } else {
            -1.0 / radius.ln()
        }
    }

    /// Magnitude response at frequency `hz`.
    #[cfg(test)]
    fn gain(&self, hz: f64, fs: f64) -> f64 {
        let w = std::f64::consts::TAU * hz / fs;
        let (re, im) = ((-w).cos(), (-w).sin());
        // e^{-jw} and e^{-2jw}
        let (re2, im2) = (re * re - im * im, 2.0 * re * im);
        let num_re = self.b0 + self.b1 * re + self.b2 * re2;
        let num_im = self.b1 * im + self.b2 * im2;
        let den_re = 1.0 + self.a1 * re + self.a2 * re2;
        let den_im = self.a1 * im + self.a2 * im2;
        ((num_re * num_re + num_im * num_im) / (den_re * den_re + den_im * den_im)).sqrt()
    }
}

/// Butterworth pole-pair quality factors for an order-4 filter.
const BUTTER4_Q: [f64; 2] = [0.541196100146197, 1.3065629648763766];

/// Design the zero-phase bandpass cascade: order-4 Butterworth highpass at
/// `low/√2` plus order-4 Butterworth lowpass at `√2·high`.
fn design_bandpass(band: BandSpec, fs: f64) -> Result<Vec<Biquad>> {
    band.validate(fs)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let hp_fc = band.low_hz / sqrt2;
    let lp_fc = band.high_hz * sqrt2;
    if lp_fc >= 0.95 * fs / 2.0 {
        return Err(Error::UnstableFilter(format!(
            "design cutoff {lp_fc:.3} Hz too near Nyquist {:.3} Hz",
            fs / 2.0
        )));
    }
    let sections: Vec<Biquad> = BUTTER4_Q
        .iter()
        .map(|&q| Biquad::highpass(hp_fc, fs, q))
        .chain(BUTTER4_Q.iter().map(|&q| Biquad::lowpass(lp_fc, fs, q)))
        .collect();
    if let Some(bad) = sections.iter().find(|s| !s.is_stable()) {
        return Err(Error::UnstableFilter(format!(
            "section poles outside unit circle: {bad:?}"
        )));
    }
    Ok(sections)
}

/// Forward–backward filtering through a biquad cascade with odd-reflection
/// padding. The pad must outlast the slowest section's transient, so it is
/// three times the largest pole time constant (at least three times the
/// filter order), capped by the signal length.
fn filtfilt(sections: &[Biquad], signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let order = 2 * sections.len();
    let slowest = sections
        .iter()
        .map(|s| s.time_constant())
        .fold(1.0_f64, f64::max);
    let pad = (3 * order)
        .max((3.0 * slowest).ceil() as usize)
        .min(n.saturating_sub(1));

    let mut ext = Vec::with_capacity(n + 2 * pad);
    let first = signal[0];
    let last = signal[n - 1];
    for i in (1..=pad).rev() {
        ext.push(2.0 * first - signal[i]);
    }
    ext.extend_from_slice(signal);
    for i in 1..=pad {
        ext.push(2.0 * last - signal[n - 1 - i]);
    }

    for s in sections {
        let x0 = ext[0];
        s.apply(&mut ext, x0);
    }
    ext.reverse();
    for s in sections {
        let x0 = ext[0];
        s.apply(&mut ext, x0);
    }
    ext.reverse();
    ext[pad..pad + n].to_vec()
}

/// Zero-phase bandpass of every channel; output length equals input length.
pub fn bandpass(trial: &Trial, band: BandSpec) -> Result<Trial> {
    let sections = design_bandpass(band, trial.fs)?;
    let mut data = trial.data.clone();
    for mut row in data.rows_mut() {
        let filtered = filtfilt(&sections, row.as_slice().expect("row contiguous"));
        for (dst, src) in row.iter_mut().zip(filtered) {
            *dst = src;
        }
    }
    Ok(trial.with_data(data))
}

/// Split z-normalized epochs into the filter banks (0.5, 1), (0.5, 2), ...,
/// (0.5, 10) Hz. Banks are cut from the signals as given (not from an extra
/// 0.5–10 Hz pre-filtered copy); labels and trial order are preserved.
pub fn divide_filter_banks(epochs: &Epochs) -> Result<FilterBankSet> {
    divide_filter_banks_with(epochs, &bank_specs(10))
}

/// Filter-bank division with caller-provided band edges.
pub fn divide_filter_banks_with(epochs: &Epochs, specs: &[BandSpec]) -> Result<FilterBankSet> {
    if epochs.fs() < 64.0 {
        return Err(Error::invalid(
            "filter banks",
            format!("fs {} below 64 Hz", epochs.fs()),
        ));
    }
    let banks = specs
        .iter()
        .map(|&band| {
            let filtered = epochs
                .try_map(|t| bandpass(t, band))
                .map_err(|e| e.in_context(format!("bank {}-{} Hz", band.low_hz, band.high_hz)))?;
            Ok((band, filtered))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FilterBankSet { banks })
}

// ---------------------------------------------------------------------------
// Resampling

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Best rational approximation `num/den` of `ratio` with `den <= max_den`,
/// by continued fractions.
fn to_rational(ratio: f64, max_den: u64) -> (u64, u64) {
    let mut x = ratio;
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    for _ in 0..64 {
        let a = x.floor() as u64;
        let h2 = a.checked_mul(h1).and_then(|v| v.checked_add(h0));
        let k2 = a.checked_mul(k1).and_then(|v| v.checked_add(k0));
        match (h2, k2) {
            (Some(h2), Some(k2)) if k2 <= max_den => {
                h0 = h1;
                h1 = h2;
                k0 = k1;
                k1 = k2;
            }
            _ => break,
        }
        let frac = x - x.floor();
        if frac.abs() < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    let g = gcd(h1, k1).max(1);
    (h1 / g, k1 / g)
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc lowpass, β for ~80 dB stopband, odd length.
fn design_kaiser_lowpass(cutoff_norm: f64, transition_norm: f64) -> Vec<f64> {
    let atten_db = 80.0;
    let beta = 0.1102 * (atten_db - 8.7);
    let taps_est =
        ((atten_db - 7.95) / (2.285 * std::f64::consts::TAU * transition_norm)).ceil() as usize;
    let taps = if taps_est % 2 == 0 { taps_est + 1 } else { taps_est };
    let center = (taps / 2) as f64;
    let i0_beta = bessel_i0(beta);
    (0..taps)
        .map(|i| {
            let x = i as f64 - center;
            let sinc = if x == 0.0 {
                2.0 * cutoff_norm
            } else {
                (std::f64::consts::TAU * cutoff_norm * x).sin() / (std::f64::consts::PI * x)
            };
            let r = 2.0 * i as f64 / (taps as f64 - 1.0) - 1.0;
            let window = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
            sinc * window
        })
        .collect()
}

/// Anti-aliased polyphase resampling to `target_fs <= fs`. Output length is
/// `round(T·target_fs/fs)`. Each polyphase branch is normalized to unit DC
/// gain, so constant signals are preserved exactly.
pub fn resample(trial: &Trial, target_fs: f64) -> Result<Trial> {
    if !(target_fs > 0.0) {
        return Err(Error::invalid("resample", "target_fs must be positive"));
    }
    if target_fs > trial.fs {
        return Err(Error::invalid(
            "resample",
            format!("target_fs {} above source fs {}", target_fs, trial.fs),
        ));
    }
    if (target_fs - trial.fs).abs() < 1e-12 {
        return Ok(trial.clone());
    }
    let ratio = target_fs / trial.fs;
    let (up, down) = to_rational(ratio, 1024);

    // FIR designed at the upsampled rate fs·up; cutoff guards the new Nyquist
    let cutoff_norm = 0.46 * ratio / up as f64;
    let transition_norm = 0.08 * ratio / up as f64;
    let mut taps = design_kaiser_lowpass(cutoff_norm, transition_norm);
    for v in taps.iter_mut() {
        *v *= up as f64;
    }
    // exact unit DC gain per polyphase branch
    for phase in 0..up as usize {
        let sum: f64 = taps.iter().skip(phase).step_by(up as usize).sum();
        if sum.abs() > 1e-12 {
            for v in taps.iter_mut().skip(phase).step_by(up as usize) {
                *v /= sum;
            }
        }
    }

    let t_in = trial.samples();
    let t_out = (t_in as f64 * ratio).round() as usize;
    let center = (taps.len() / 2) as i64;
    let mut data = Array2::zeros((trial.channels(), t_out));
    for (ch, row) in trial.data.rows().into_iter().enumerate() {
        let x = row.as_slice().expect("row contiguous");
        for n in 0..t_out {
            let pos = n as i64 * down as i64 + center;
            let mut acc = 0.0;
            // taps j with (pos - j) divisible by up hit real input samples
            let rem = (pos % up as i64) as usize;
            let mut j = rem;
            while j < taps.len() {
                // replicate edges so branch normalization keeps DC exact
                let idx = ((pos - j as i64) / up as i64).clamp(0, t_in as i64 - 1);
                acc += taps[j] * x[idx as usize];
                j += up as usize;
            }
            data[[ch, n]] = acc;
        }
    }
    let onset = trial
        .onset_sample
        .map(|o| ((o as f64 * ratio).round() as usize).min(t_out.saturating_sub(1)));
    Trial::new(data, target_fs, trial.label, onset)
}

// ---------------------------------------------------------------------------
// Savitzky–Golay

/// Savitzky–Golay smoothing: each output point is the value at the window
/// center of the least-squares polynomial fit over the centered window.
/// Edge points evaluate the first/last window's polynomial at their offset
/// instead of shrinking the window.
pub fn savgol_smooth(signal: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 {
        return Err(Error::invalid("savgol", format!("window {window} must be odd")));
    }
    if order >= window {
        return Err(Error::invalid(
            "savgol",
            format!("order {order} must be below window {window}"),
        ));
    }
    if signal.len() < window {
        return Err(Error::invalid(
            "savgol",
            format!("signal length {} below window {window}", signal.len()),
        ));
    }

    let half = window / 2;
    let n = signal.len();
    let m = order + 1;

    // Vandermonde over offsets -half..=half and its normal matrix
    let positions: Vec<f64> = (0..window).map(|i| i as f64 - half as f64).collect();
    let vandermonde = Array2::from_shape_fn((window, m), |(i, j)| positions[i].powi(j as i32));
    let normal = vandermonde.t().dot(&vandermonde);

    // center weights: w = A (AᵀA)⁻¹ e₀
    let mut e0 = Array1::zeros(m);
    e0[0] = 1.0;
    let z = linalg::solve(&normal, &e0)?;
    let center_weights = vandermonde.dot(&z);

    let fit_window = |ys: &[f64]| -> Result<Array1<f64>> {
        let rhs = vandermonde.t().dot(&Array1::from_iter(ys.iter().cloned()));
        linalg::solve(&normal, &rhs)
    };
    let eval_poly =
        |coef: &Array1<f64>, x: f64| -> f64 { coef.iter().rev().fold(0.0, |acc, &c| acc * x + c) };

    let mut out = vec![0.0; n];
    for i in half..n - half {
        let mut acc = 0.0;
        for (j, &w) in center_weights.iter().enumerate() {
            acc += w * signal[i + j - half];
        }
        out[i] = acc;
    }
    let head = fit_window(&signal[..window])?;
    for i in 0..half {
        out[i] = eval_poly(&head, i as f64 - half as f64);
    }
    let tail = fit_window(&signal[n - window..])?;
    for i in n - half..n {
        out[i] = eval_poly(&tail, (i + window - n) as f64 - half as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SeededRng;

    fn sine_trial(freq: f64, fs: f64, seconds: f64) -> Trial {
        let t = (fs * seconds) as usize;
        let data = Array2::from_shape_fn((1, t), |(_, i)| {
            (std::f64::consts::TAU * freq * i as f64 / fs).sin()
        });
        Trial::new(data, fs, 0, None).unwrap()
    }

    /// Amplitude of a sinusoid estimated over the central half of a signal.
    fn central_amplitude(x: &[f64]) -> f64 {
        let n = x.len();
        x[n / 4..3 * n / 4]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    // ---- zscore ----

    #[test]
    fn zscore_zero_variance_rejected() {
        let t = Trial::new(Array2::ones((1, 16)), 32.0, 0, None).unwrap();
        assert!(matches!(
            zscore(&t),
            Err(Error::DegenerateChannel { channel: 0 })
        ));
    }

    #[test]
    fn zscore_alternating_is_scale_only() {
        let data = Array2::from_shape_fn((1, 8), |(_, i)| if i % 2 == 0 { -1.0 } else { 1.0 });
        let t = Trial::new(data, 32.0, 0, None).unwrap();
        let z = zscore(&t).unwrap();
        for (a, b) in z.data.iter().zip(t.data.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    /// Matches the direct (x - mean)/std recomputation on random channels.
    #[test]
    fn zscore_matches_oracle() {
        let mut rng = SeededRng::new(3);
        let data = Array2::from_shape_fn((3, 64), |_| 4.0 * rng.standard_normal() + 2.0);
        let t = Trial::new(data.clone(), 32.0, 0, None).unwrap();
        let z = zscore(&t).unwrap();
        for ch in 0..3 {
            let row: Vec<f64> = data.row(ch).to_vec();
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / row.len() as f64;
            let std = var.sqrt();
            for (i, &v) in row.iter().enumerate() {
                assert!((z.data[[ch, i]] - (v - mean) / std).abs() < 1e-12);
            }
            let zmean = z.data.row(ch).sum() / row.len() as f64;
            let zvar =
                z.data.row(ch).iter().map(|v| (v - zmean).powi(2)).sum::<f64>() / row.len() as f64;
            assert!(zmean.abs() < 1e-9);
            assert!((zvar - 1.0).abs() < 1e-6);
        }
    }

    // ---- bandpass ----

    #[test]
    fn bandpass_passband_and_stopband_gains() {
        let band = BandSpec::new(0.5, 10.0);
        let passed = bandpass(&sine_trial(5.0, 256.0, 8.0), band).unwrap();
        let ratio = central_amplitude(passed.data.row(0).as_slice().unwrap());
        assert!((0.9..=1.1).contains(&ratio), "passband gain {ratio}");

        let stopped = bandpass(&sine_trial(40.0, 256.0, 8.0), band).unwrap();
        let ratio = central_amplitude(stopped.data.row(0).as_slice().unwrap());
        assert!(ratio <= 0.1, "stopband gain {ratio}");
    }

    #[test]
    fn bandpass_edge_frequency_still_passes() {
        // gain contract holds at the nominal band edge itself
        let band = BandSpec::new(0.5, 8.0);
        let passed = bandpass(&sine_trial(8.0, 256.0, 8.0), band).unwrap();
        let ratio = central_amplitude(passed.data.row(0).as_slice().unwrap());
        assert!((0.9..=1.1).contains(&ratio), "edge gain {ratio}");
    }

    #[test]
    fn bandpass_zero_in_zero_out() {
        let t = Trial::new(Array2::zeros((2, 256)), 256.0, 0, None).unwrap();
        let out = bandpass(&t, wide_band()).unwrap();
        assert!(out.data.iter().all(|&v| v.abs() < 1e-12));
        assert_eq!(out.samples(), t.samples());
    }

    #[test]
    fn bandpass_design_gain_bounds_analytic() {
        // check the cascade's frequency response directly on a grid
        let fs = 256.0;
        for high in 1..=10 {
            let band = BandSpec::new(0.5, high as f64);
            let sections = design_bandpass(band, fs).unwrap();
            let cascade_gain = |hz: f64| -> f64 {
                let one_pass: f64 = sections.iter().map(|s| s.gain(hz, fs)).product();
                one_pass * one_pass // forward–backward
            };
            let mut f = band.low_hz;
            while f <= band.high_hz {
                let g = cascade_gain(f);
                assert!((0.9..=1.1).contains(&g), "gain {g} at {f} Hz in {band:?}");
                f += 0.25;
            }
            let g2 = cascade_gain(2.0 * band.high_hz);
            assert!(g2 <= 0.1, "stopband gain {g2} for {band:?}");
        }
    }

    #[test]
    fn bandpass_rejects_cutoff_near_nyquist() {
        let t = sine_trial(2.0, 64.0, 4.0);
        assert!(matches!(
            bandpass(&t, BandSpec::new(0.5, 23.0)),
            Err(Error::UnstableFilter(_))
        ));
    }

    #[test]
    fn bandpass_is_linear() {
        let mut rng = SeededRng::new(12);
        let fs = 128.0;
        let n = 256;
        let x = Array2::from_shape_fn((1, n), |_| rng.standard_normal());
        let y = Array2::from_shape_fn((1, n), |_| rng.standard_normal());
        let (a, b) = (1.7, -0.6);
        let combined = Trial::new(a * &x + b * &y, fs, 0, None).unwrap();
        let band = wide_band();
        let fx = bandpass(&Trial::new(x, fs, 0, None).unwrap(), band).unwrap();
        let fy = bandpass(&Trial::new(y, fs, 0, None).unwrap(), band).unwrap();
        let fc = bandpass(&combined, band).unwrap();
        for i in 0..n {
            let expect = a * fx.data[[0, i]] + b * fy.data[[0, i]];
            assert!((fc.data[[0, i]] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_phase_keeps_pulse_symmetric() {
        let fs = 128.0;
        let n = 512;
        let center = n / 2;
        let data = Array2::from_shape_fn((1, n), |(_, i)| {
            let d = (i as f64 - center as f64) / 20.0;
            (-d * d).exp()
        });
        let t = Trial::new(data, fs, 0, None).unwrap();
        let y = bandpass(&t, BandSpec::new(0.5, 10.0)).unwrap();
        let row = y.data.row(0);
        let peak = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(
            (peak as i64 - center as i64).abs() <= 1,
            "peak moved to {peak}, center {center}"
        );
    }

    // ---- filter banks ----

    #[test]
    fn ten_banks_with_unit_step_edges() {
        let specs = bank_specs(10);
        assert_eq!(specs.len(), 10);
        for (i, s) in specs.iter().enumerate() {
            assert_eq!(s.low_hz, 0.5);
            assert!((s.high_hz - (i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bank_division_respects_8hz_sine() {
        let trial = sine_trial(8.0, 256.0, 6.0);
        let epochs = Epochs::new(
            vec![trial.clone(), trial],
            2,
            Epochs::default_channel_names(1),
        );
        let mut epochs = epochs.unwrap();
        epochs.trials[1].label = 1;
        let set = divide_filter_banks(&epochs).unwrap();
        assert_eq!(set.bank_count(), 10);
        let mut amps = Vec::new();
        for (band, bank) in &set.banks {
            let amp = central_amplitude(bank.trials[0].data.row(0).as_slice().unwrap());
            if 8.0 >= 2.0 * band.high_hz {
                // banks 1..4: 8 Hz is in the contractual stopband
                assert!(amp <= 0.1, "bank {band:?} amp {amp}");
            } else if band.high_hz >= 8.0 {
                // banks 8..10: 8 Hz is inside the nominal passband
                assert!((0.9..=1.1).contains(&amp), "bank {band:?} amp {amp}");
            }
            // banks 5..7 see 8 Hz in the filter transition zone: only
            // monotone growth of the gain with bandwidth is guaranteed
            amps.push(amp);
            assert_eq!(bank.labels(), epochs.labels());
        }
        // measured amplitudes carry ~1e-2 of edge-transient residue in the
        // deep stopband, so the monotone comparison gets that slack
        for j in 1..amps.len() {
            assert!(amps[j - 1] <= amps[j] + 0.01, "gains not monotone: {amps:?}");
        }
    }

    #[test]
    fn bank_power_is_monotone_in_bandwidth() {
        let mut rng = SeededRng::new(77);
        let fs = 128.0;
        let data = Array2::from_shape_fn((1, 512), |_| rng.standard_normal());
        let epochs = Epochs::new(
            vec![
                Trial::new(data, fs, 0, None).unwrap(),
                Trial::new(
                    Array2::from_shape_fn((1, 512), |_| rng.standard_normal()),
                    fs,
                    1,
                    None,
                )
                .unwrap(),
            ],
            2,
            Epochs::default_channel_names(1),
        )
        .unwrap();
        let set = divide_filter_banks(&epochs).unwrap();
        for trial_idx in 0..epochs.len() {
            let powers: Vec<f64> = set
                .banks
                .iter()
                .map(|(_, bank)| {
                    bank.trials[trial_idx]
                        .data
                        .iter()
                        .map(|v| v * v)
                        .sum::<f64>()
                })
                .collect();
            for j in 1..powers.len() {
                assert!(
                    powers[j - 1] <= powers[j] + 1e-9,
                    "bank {} power {} > bank {} power {}",
                    j - 1,
                    powers[j - 1],
                    j,
                    powers[j]
                );
            }
        }
    }

    #[test]
    fn bank_division_requires_64hz() {
        let t = sine_trial(2.0, 32.0, 4.0);
        let e = Epochs::new(
            vec![t.clone(), Trial { label: 1, ..t }],
            2,
            Epochs::default_channel_names(1),
        )
        .unwrap();
        assert!(divide_filter_banks(&e).is_err());
    }

    // ---- resample ----

    #[test]
    fn resample_identity() {
        let t = sine_trial(5.0, 256.0, 2.0);
        let r = resample(&t, 256.0).unwrap();
        assert_eq!(r, t);
    }

    #[test]
    fn resample_halves_sine() {
        let t = sine_trial(5.0, 512.0, 4.0);
        let r = resample(&t, 256.0).unwrap();
        assert_eq!(r.fs, 256.0);
        assert_eq!(r.samples(), t.samples() / 2);
        // compare against the analytic 5 Hz sine at the new rate
        let n = r.samples();
        for i in n / 4..3 * n / 4 {
            let expect = (std::f64::consts::TAU * 5.0 * i as f64 / 256.0).sin();
            assert!(
                (r.data[[0, i]] - expect).abs() < 0.01,
                "sample {i}: {} vs {expect}",
                r.data[[0, i]]
            );
        }
    }

    #[test]
    fn resample_preserves_dc_exactly() {
        let t = Trial::new(Array2::from_elem((2, 500), 3.25), 500.0, 0, None).unwrap();
        let r = resample(&t, 125.0).unwrap();
        for &v in r.data.iter() {
            assert!((v - 3.25).abs() < 1e-9, "dc drifted to {v}");
        }
    }

    #[test]
    fn resample_rejects_upsampling() {
        let t = sine_trial(5.0, 128.0, 1.0);
        assert!(resample(&t, 256.0).is_err());
    }

    #[test]
    fn resample_rational_ratio() {
        let t = Trial::new(Array2::from_elem((1, 640), 1.0), 320.0, 0, None).unwrap();
        let r = resample(&t, 120.0).unwrap(); // ratio 3/8
        assert_eq!(r.samples(), 240);
        for &v in r.data.iter() {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    // ---- savgol ----

    #[test]
    fn savgol_rejects_bad_parameters() {
        let x = vec![0.0; 64];
        assert!(savgol_smooth(&x, 30, 1).is_err());
        assert!(savgol_smooth(&x, 31, 31).is_err());
        assert!(savgol_smooth(&x[..16], 31, 1).is_err());
    }

    #[test]
    fn savgol_exact_on_ramp() {
        let x: Vec<f64> = (0..200).map(|i| 2.0 * i as f64 + 3.0).collect();
        let y = savgol_smooth(&x, 31, 1).unwrap();
        assert_eq!(y.len(), x.len());
        for (a, b) in y.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn savgol_exact_on_constant() {
        let x = vec![4.5; 100];
        let y = savgol_smooth(&x, 31, 2).unwrap();
        for v in y {
            assert!((v - 4.5).abs() < 1e-9);
        }
    }

    #[test]
    fn savgol_polynomial_reproduction_up_to_order() {
        // degree <= order polynomials are fixed points (interior and edges)
        for order in 1..=3 {
            let x: Vec<f64> = (0..120)
                .map(|i| {
                    let t = i as f64 / 10.0;
                    (0..=order).map(|p| 0.3 * t.powi(p as i32)).sum()
                })
                .collect();
            let y = savgol_smooth(&x, 21, order).unwrap();
            for (i, (a, b)) in y.iter().zip(x.iter()).enumerate() {
                assert!((a - b).abs() < 1e-9, "order {order} sample {i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn savgol_reduces_noise_variance_about_true_line() {
        let mut rng = SeededRng::new(8);
        let truth: Vec<f64> = (0..300).map(|i| 0.5 * i as f64).collect();
        let noisy: Vec<f64> = truth.iter().map(|v| v + rng.standard_normal()).collect();
        let smooth = savgol_smooth(&noisy, 31, 1).unwrap();
        let var = |xs: &[f64]| -> f64 {
            xs.iter()
                .zip(truth.iter())
                .map(|(x, t)| (x - t).powi(2))
                .sum::<f64>()
                / xs.len() as f64
        };
        assert!(var(&smooth) < var(&noisy));
    }
}
