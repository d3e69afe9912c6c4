//! Synthetic movement-related cortical potential generator.
//!
//! Real recordings are not bundled with the crate, so experiments run on
//! synthetic trials with the canonical MRCP morphology: a slow negative
//! deflection that peaks at the movement onset, followed by a smaller
//! positive rebound. Each movement-class trial places that template at a
//! jittered onset, mixes it into the channels with a fixed spatial profile
//! and adds white Gaussian noise. Rest-class trials are noise only.

use ndarray::Array2;

use crate::error::{Error, Result};

use super::{Epochs, SeededRng, Trial};

/// Recipe for a synthetic epoch set. Generation is a pure function of the
/// spec, seed included.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    /// Number of classes `K` (including the rest class when `include_rest`).
    pub class_count: usize,
    pub trials_per_class: usize,
    pub channels: usize,
    /// Samples per trial.
    pub samples: usize,
    /// Sampling rate, Hz.
    pub fs: f64,
    /// Template peak amplitude per class, arbitrary units. The entry of the
    /// rest class (last class when `include_rest`) is unused.
    pub template_amps: Vec<f64>,
    /// Standard deviation of the additive white noise.
    pub noise_std: f64,
    /// Maximum onset latency jitter, seconds; onsets are shifted by a uniform
    /// draw in `[-jitter_max_s, +jitter_max_s]`.
    pub jitter_max_s: f64,
    /// When set, the last class (`K-1`) is a resting state: noise only, with
    /// a fake onset recorded at the nominal cue position.
    pub include_rest: bool,
    pub seed: u64,
}

impl SynthSpec {
    /// Desk-scale defaults: binary movement-vs-rest, 60 trials per class,
    /// 5-second trials at 64 Hz, template peak 5.0, noise 0.5.
    pub fn new(class_count: usize, include_rest: bool) -> Self {
        Self {
            class_count,
            trials_per_class: 60,
            channels: 8,
            samples: 320,
            fs: 64.0,
            template_amps: Self::default_amps(class_count),
            noise_std: 0.5,
            jitter_max_s: 0.0,
            include_rest,
            seed: 0,
        }
    }

    /// Class `k` template peak: `5·(1 + 0.3k)`.
    pub fn default_amps(class_count: usize) -> Vec<f64> {
        (0..class_count).map(|k| 5.0 * (1.0 + 0.3 * k as f64)).collect()
    }

    /// Nominal cue sample: `round(0.6·T)`. Movement onsets jitter around it.
    pub fn cue_sample(&self) -> usize {
        (0.6 * self.samples as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_count < 2 {
            return Err(Error::invalid("synth spec", "class_count < 2"));
        }
        if self.trials_per_class == 0 || self.channels == 0 || self.samples == 0 {
            return Err(Error::invalid("synth spec", "zero-sized dimension"));
        }
        if !(self.fs > 0.0) {
            return Err(Error::invalid("synth spec", "fs not > 0"));
        }
        if self.noise_std < 0.0 {
            return Err(Error::invalid("synth spec", "noise_std < 0"));
        }
        if self.jitter_max_s * self.fs >= self.samples as f64 / 4.0 {
            return Err(Error::invalid(
                "synth spec",
                "jitter_max_s·fs must stay below T/4",
            ));
        }
        if self.template_amps.len() != self.class_count {
            return Err(Error::invalid(
                "synth spec",
                format!(
                    "{} template amplitudes for {} classes",
                    self.template_amps.len(),
                    self.class_count
                ),
            ));
        }
        Ok(())
    }
}

/// Raised cosine bump of the given width (seconds), peak 1 at `center`.
fn raised_cosine(t: f64, center: f64, width_s: f64, fs: f64) -> f64 {
    let x = (t - center) / (width_s * fs);
    if x.abs() <= 0.5 {
        0.5 * (1.0 + (std::f64::consts::TAU * x).cos())
    } else {
        0.0
    }
}

/// MRCP-like source waveform for one class: a negativity of width 1 s
/// peaking at `onset` plus a 0.4-amplitude rebound peaking 0.75 s later.
fn template_value(t: usize, onset: usize, amp: f64, fs: f64) -> f64 {
    let t = t as f64;
    let onset = onset as f64;
    let neg = raised_cosine(t, onset, 1.0, fs);
    let reb = raised_cosine(t, onset + 0.75 * fs, 1.0, fs);
    amp * (0.4 * reb - neg)
}

/// Fixed spatial mixing profile; central channels carry more of the source.
fn mixing_gain(channel: usize, channels: usize) -> f64 {
    let x = (channel + 1) as f64 / (channels + 1) as f64;
    0.3 + 0.7 * (std::f64::consts::PI * x).sin()
}

/// Generate a synthetic epoch set. Trials are ordered class-major; samples
/// are quantized to f32 so the set round-trips bit-exactly through the EPO1
/// container.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Epochs> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let cue = spec.cue_sample();
    let gains: Vec<f64> = (0..spec.channels)
        .map(|c| mixing_gain(c, spec.channels))
        .collect();

    let mut trials = Vec::with_capacity(spec.class_count * spec.trials_per_class);
    for class in 0..spec.class_count {
        let is_rest = spec.include_rest && class == spec.class_count - 1;
        for _ in 0..spec.trials_per_class {
            let onset = if is_rest {
                cue
            } else {
                let jitter = rng.uniform(-spec.jitter_max_s, spec.jitter_max_s);
                (cue as f64 + (jitter * spec.fs).round()) as usize
            };
            let mut data = Array2::zeros((spec.channels, spec.samples));
            for c in 0..spec.channels {
                for t in 0..spec.samples {
                    let signal = if is_rest {
                        0.0
                    } else {
                        gains[c] * template_value(t, onset, spec.template_amps[class], spec.fs)
                    };
                    let noise = if spec.noise_std > 0.0 {
                        spec.noise_std * rng.standard_normal()
                    } else {
                        0.0
                    };
                    data[[c, t]] = ((signal + noise) as f32) as f64;
                }
            }
            trials.push(Trial::new(data, spec.fs, class, Some(onset))?);
        }
    }
    Epochs::new(
        trials,
        spec.class_count,
        Epochs::default_channel_names(spec.channels),
    )
}
