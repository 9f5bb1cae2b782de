//! Experiment configuration: one TOML file drives every pipeline stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::body::FRAME_RATE_HZ;
use crate::data::Protocol;
use crate::{Error, Result};

/// All tunables for simulation, training, and evaluation. Defaults are the
/// published operating point; a run manifest echoes any field that differs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root seed; every random draw in a run derives from it.
    pub seed: u64,
    /// Quantization window length in seconds (one token per window).
    pub window_seconds: f64,
    pub codebook_size: usize,
    pub token_width: usize,
    /// EMA decay for codebook updates.
    pub alpha: f64,
    /// Token dropout probability during quantizer training.
    pub dropout_p: f64,
    /// Weight of the sequence-consistency term in the predictor loss.
    pub lambda: f64,
    pub batch: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    /// Early-stopping patience in epochs, on validation loss.
    pub patience: usize,
    pub lr_schedule: LrSchedule,
    /// Cross-validation protocol for `eval`.
    pub protocol: String,
    /// Directory of recordings (one subdirectory per recording).
    pub data_dir: PathBuf,
    /// Directory for checkpoints, reports, and manifests.
    pub out_dir: PathBuf,
    pub simulate: SimulateConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Cosine,
    Constant,
}

/// Corpus-generation settings for the `simulate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Built-in chair names, or paths to chair point-cloud files.
    pub chairs: Vec<String>,
    pub subjects: Vec<SubjectConfig>,
    /// Activity names; empty means all twelve.
    pub activities: Vec<String>,
    pub seconds_per_recording: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectConfig {
    pub id: String,
    pub height_m: f64,
    pub mass_kg: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            window_seconds: 1.0,
            codebook_size: 1028,
            token_width: 512,
            alpha: 0.99,
            dropout_p: 0.2,
            lambda: 0.5,
            batch: 32,
            lr: 1e-4,
            weight_decay: 1e-5,
            max_epochs: 200,
            patience: 15,
            lr_schedule: LrSchedule::Cosine,
            protocol: "louocv".to_string(),
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            simulate: SimulateConfig::default(),
        }
    }
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            chairs: vec!["flat_plane".into(), "office".into(), "stool".into(), "recliner".into()],
            subjects: vec![
                SubjectConfig { id: "synth_a".into(), height_m: 1.58, mass_kg: 54.0 },
                SubjectConfig { id: "synth_b".into(), height_m: 1.68, mass_kg: 63.0 },
                SubjectConfig { id: "synth_c".into(), height_m: 1.76, mass_kg: 74.0 },
                SubjectConfig { id: "synth_d".into(), height_m: 1.88, mass_kg: 89.0 },
            ],
            activities: Vec::new(),
            seconds_per_recording: 30.0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serialize config: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let window_frames = self.window_seconds * FRAME_RATE_HZ;
        if window_frames < 1.0 - 1e-9 || (window_frames - window_frames.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "window_seconds {} is not a whole number of frames at {FRAME_RATE_HZ} Hz",
                self.window_seconds
            )));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} outside (0,1)", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::Config(format!("dropout_p {} outside [0,1)", self.dropout_p)));
        }
        if self.lambda < 0.0 {
            return Err(Error::Config(format!("lambda {} is negative", self.lambda)));
        }
        if self.codebook_size == 0 || self.token_width == 0 || self.batch == 0 {
            return Err(Error::Config(
                "codebook_size, token_width, and batch must be positive".to_string(),
            ));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Config("max_epochs and patience must be positive".to_string()));
        }
        if !(self.lr > 0.0) || self.weight_decay < 0.0 {
            return Err(Error::Config(format!(
                "lr {} / weight_decay {} out of range",
                self.lr, self.weight_decay
            )));
        }
        if Protocol::from_name(&self.protocol).is_none() {
            return Err(Error::Config(format!("unknown protocol \"{}\"", self.protocol)));
        }
        if self.simulate.seconds_per_recording <= 0.0 {
            return Err(Error::Config("seconds_per_recording must be positive".to_string()));
        }
        Ok(())
    }

    /// Frames per quantization window.
    pub fn window_frames(&self) -> usize {
        (self.window_seconds * FRAME_RATE_HZ).round() as usize
    }

    /// Fields that differ from the defaults, as `key = value` TOML lines.
    /// The run manifest records these so a reader can spot deviations from
    /// the published operating point without diffing files.
    pub fn overrides(&self) -> Vec<String> {
        let this = toml::Value::try_from(self).expect("config serializes");
        let base = toml::Value::try_from(ExperimentConfig::default()).expect("config serializes");
        let mut out = Vec::new();
        diff_tables("", &this, &base, &mut out);
        out
    }
}

fn diff_tables(prefix: &str, this: &toml::Value, base: &toml::Value, out: &mut Vec<String>) {
    match (this, base) {
        (toml::Value::Table(a), toml::Value::Table(b)) => {
            for (k, va) in a {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                match b.get(k) {
                    Some(vb) => diff_tables(&path, va, vb, out),
                    None => out.push(format!("{path} = {va}")),
                }
            }
        }
        _ if this != base => out.push(format!("{prefix} = {this}")),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.batch, 32);
        assert_eq!(cfg.lr, 1e-4);
        assert_eq!(cfg.weight_decay, 1e-5);
        assert_eq!(cfg.max_epochs, 200);
        assert_eq!(cfg.patience, 15);
        assert_eq!(cfg.codebook_size, 1028);
        assert_eq!(cfg.token_width, 512);
        assert_eq!(cfg.alpha, 0.99);
        assert_eq!(cfg.dropout_p, 0.2);
        assert_eq!(cfg.lambda, 0.5);
        assert_eq!(cfg.window_frames(), 15);
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overrides_lists_only_changed_fields() {
        let cfg = ExperimentConfig::default();
        assert!(cfg.overrides().is_empty());
        let mut cfg = cfg;
        cfg.batch = 16;
        cfg.simulate.seconds_per_recording = 12.0;
        let o = cfg.overrides();
        assert_eq!(o.len(), 2);
        assert!(o.iter().any(|l| l == "batch = 16"));
        assert!(o.iter().any(|l| l.starts_with("simulate.seconds_per_recording")));
    }

    #[test]
    fn bad_window_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.window_seconds = 0.9;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.window_seconds = 2.0;
        cfg.validate().unwrap();
        assert_eq!(cfg.window_frames(), 30);
    }
}
