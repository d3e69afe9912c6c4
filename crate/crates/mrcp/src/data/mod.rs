//! Domain types: trials, labeled epoch sets, synthetic data and seeded
//! randomness, plus the on-disk "EPO1" container.

mod io;
mod rng;
mod synth;

pub use io::{epochs_from_bytes, epochs_to_bytes, read_epochs, write_epochs, EPOCH_MAGIC};
pub use rng::{derive_seed, SeededRng};
pub use synth::{generate_synthetic, SynthSpec};

use ndarray::Array2;

use crate::error::{Error, Result};

/// One recorded (or synthesized) trial: a channels × samples matrix with its
/// sampling rate, class label, and, when known, the movement-onset sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// Signal, `[C, T]`, microvolt-scaled arbitrary units.
    pub data: Array2<f64>,
    /// Sampling rate in Hz.
    pub fs: f64,
    /// Class index in `0..K`.
    pub label: usize,
    /// Movement onset as a sample index into `data`, if located.
    pub onset_sample: Option<usize>,
}

impl Trial {
    pub fn new(
        data: Array2<f64>,
        fs: f64,
        label: usize,
        onset_sample: Option<usize>,
    ) -> Result<Self> {
        let trial = Self {
            data,
            fs,
            label,
            onset_sample,
        };
        trial.validate()?;
        Ok(trial)
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels() == 0 || self.samples() == 0 {
            return Err(Error::invalid("trial", "empty channel or sample axis"));
        }
        if !(self.fs > 0.0) {
            return Err(Error::invalid("trial", format!("fs = {} not > 0", self.fs)));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("trial", "non-finite sample"));
        }
        if let Some(onset) = self.onset_sample {
            if onset >= self.samples() {
                return Err(Error::invalid(
                    "trial",
                    format!("onset_sample {} outside [0, {})", onset, self.samples()),
                ));
            }
        }
        Ok(())
    }

    /// Same trial with the data matrix replaced; fs/label/onset carried over.
    pub fn with_data(&self, data: Array2<f64>) -> Trial {
        Trial {
            data,
            fs: self.fs,
            label: self.label,
            onset_sample: self.onset_sample,
        }
    }
}

/// A labeled set of trials sharing channel count, length and sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Epochs {
    pub trials: Vec<Trial>,
    /// Number of classes `K`; every label is `< K`.
    pub class_count: usize,
    /// `C` channel identifiers.
    pub channel_names: Vec<String>,
}

impl Epochs {
    pub fn new(trials: Vec<Trial>, class_count: usize, channel_names: Vec<String>) -> Result<Self> {
        let epochs = Self {
            trials,
            class_count,
            channel_names,
        };
        epochs.validate()?;
        Ok(epochs)
    }

    /// Canonical channel names `ch0`, `ch1`, ...
    pub fn default_channel_names(channels: usize) -> Vec<String> {
        (0..channels).map(|c| format!("ch{c}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_count < 2 {
            return Err(Error::invalid(
                "epochs",
                format!("class_count {} < 2", self.class_count),
            ));
        }
        let first = self
            .trials
            .first()
            .ok_or_else(|| Error::invalid("epochs", "no trials"))?;
        let (c, t, fs) = (first.channels(), first.samples(), first.fs);
        if self.channel_names.len() != c {
            return Err(Error::invalid(
                "epochs",
                format!("{} channel names for {} channels", self.channel_names.len(), c),
            ));
        }
        for (i, trial) in self.trials.iter().enumerate() {
            trial.validate()?;
            if trial.channels() != c || trial.samples() != t || trial.fs != fs {
                return Err(Error::DimMismatch {
                    context: "epochs",
                    expected: format!("[{c}, {t}] @ {fs} Hz"),
                    found: format!(
                        "trial {i}: [{}, {}] @ {} Hz",
                        trial.channels(),
                        trial.samples(),
                        trial.fs
                    ),
                });
            }
            if trial.label >= self.class_count {
                return Err(Error::LabelOutOfRange {
                    label: trial.label,
                    classes: self.class_count,
                });
            }
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.trials[0].channels()
    }

    pub fn samples(&self) -> usize {
        self.trials[0].samples()
    }

    pub fn fs(&self) -> f64 {
        self.trials[0].fs
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.trials.iter().map(|t| t.label).collect()
    }

    /// Trial indices grouped by class, preserving trial order.
    pub fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.class_count];
        for (i, trial) in self.trials.iter().enumerate() {
            groups[trial.label].push(i);
        }
        groups
    }

    /// New `Epochs` holding clones of the selected trials, same metadata.
    pub fn subset(&self, indices: &[usize]) -> Epochs {
        Epochs {
            trials: indices.iter().map(|&i| self.trials[i].clone()).collect(),
            class_count: self.class_count,
            channel_names: self.channel_names.clone(),
        }
    }

    /// Apply a fallible per-trial transform, keeping labels and metadata.
    pub fn try_map<F>(&self, mut f: F) -> Result<Epochs>
    where
        F: FnMut(&Trial) -> Result<Trial>,
    {
        let trials = self
            .trials
            .iter()
            .map(|t| f(t))
            .collect::<Result<Vec<_>>>()?;
        Epochs::new(trials, self.class_count, self.channel_names.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn trial_invariants() {
        let t = Trial::new(array![[1.0, 2.0]], 10.0, 0, Some(1)).unwrap();
        assert_eq!(t.channels(), 1);
        assert_eq!(t.samples(), 2);
        assert!(Trial::new(array![[1.0, f64::NAN]], 10.0, 0, None).is_err());
        assert!(Trial::new(array![[1.0, 2.0]], 0.0, 0, None).is_err());
        assert!(Trial::new(array![[1.0, 2.0]], 10.0, 0, Some(2)).is_err());
    }

    #[test]
    fn epochs_reject_label_out_of_range() {
        let t = Trial::new(array![[1.0, 2.0]], 10.0, 3, None).unwrap();
        let err = Epochs::new(vec![t], 2, Epochs::default_channel_names(1));
        assert!(matches!(err, Err(Error::LabelOutOfRange { .. })));
    }

    #[test]
    fn epochs_reject_mixed_shapes() {
        let a = Trial::new(array![[1.0, 2.0]], 10.0, 0, None).unwrap();
        let b = Trial::new(array![[1.0, 2.0, 3.0]], 10.0, 1, None).unwrap();
        assert!(Epochs::new(vec![a, b], 2, Epochs::default_channel_names(1)).is_err());
    }
}
