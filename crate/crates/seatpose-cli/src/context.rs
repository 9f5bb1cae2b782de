//! Shared command plumbing: resolved configuration, chair geometry,
//! recording loading, and manifest construction.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use seatpose::config::ExperimentConfig;
use seatpose::data::{read_recording, Recording, MAGIC_CHAIR};
use seatpose::manifest::{sha256_bytes, RunManifest};
use seatpose::sim::ChairModel;
use seatpose::{Error, Result};

pub struct Context {
    pub cfg: ExperimentConfig,
    pub config_sha256: String,
}

impl Context {
    pub fn build(
        config: Option<&Path>,
        sets: &[String],
        seed: Option<u64>,
        data_dir: Option<&Path>,
        out_dir: Option<&Path>,
    ) -> Result<Context> {
        let mut table = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        for set in sets {
            apply_set(&mut table, set)?;
        }
        let mut cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::Config(format!("config: {e}")))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(d) = data_dir {
            cfg.data_dir = d.to_path_buf();
        }
        if let Some(o) = out_dir {
            cfg.out_dir = o.to_path_buf();
        }
        cfg.validate()?;
        let canonical = toml::to_string_pretty(&cfg)
            .map_err(|e| Error::Config(format!("serialize config: {e}")))?;
        Ok(Context { cfg, config_sha256: sha256_bytes(canonical.as_bytes()) })
    }

    /// Manifest seeded with this run's identity; commands add hashes and
    /// notes, then call [`Context::write_manifest`].
    pub fn manifest(&self, command: &str) -> RunManifest {
        RunManifest::new(command, self.cfg.seed, self.config_sha256.clone(), self.cfg.overrides())
    }

    pub fn write_manifest(&self, manifest: &RunManifest, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.cfg.out_dir)
            .map_err(|e| Error::io(self.cfg.out_dir.display().to_string(), e))?;
        let path = self.cfg.out_dir.join(name);
        manifest.write(&path)?;
        Ok(path)
    }

    pub fn checkpoint_path(&self, stage: &str) -> PathBuf {
        self.cfg.out_dir.join(format!("{stage}.ckpt"))
    }

    /// Checkpoint path for a stage, or the missing-checkpoint error that
    /// names it.
    pub fn require_checkpoint(&self, stage: &'static str) -> Result<PathBuf> {
        let path = self.checkpoint_path(stage);
        if !path.is_file() {
            return Err(Error::MissingCheckpoint { stage, path: path.display().to_string() });
        }
        Ok(path)
    }

    /// Chair models named in the config: built-ins by name, anything else is
    /// read as a chair point-cloud file.
    pub fn chairs(&self) -> Result<Vec<ChairModel>> {
        self.cfg
            .simulate
            .chairs
            .iter()
            .map(|name| match name.as_str() {
                "flat_plane" => Ok(ChairModel::flat_plane(name)),
                "office" => Ok(ChairModel::office(name)),
                "stool" => Ok(ChairModel::stool(name)),
                "recliner" => Ok(ChairModel::recliner(name)),
                path => load_chair_file(Path::new(path)),
            })
            .collect()
    }

    /// Chair id / point-cloud pairs in config order, the shape the predictor
    /// training and evaluation entry points take.
    pub fn chair_clouds(&self) -> Result<Vec<(String, Array2<f64>)>> {
        Ok(self.chairs()?.into_iter().map(|c| (c.id, c.points)).collect())
    }

    /// All recordings under the data directory, sorted by directory name so
    /// every command sees the same order.
    pub fn load_recordings(&self) -> Result<Vec<(String, Recording)>> {
        let dir = &self.cfg.data_dir;
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut names: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        if names.is_empty() {
            return Err(Error::Config(format!("no recordings under {}", dir.display())));
        }
        names
            .into_iter()
            .map(|name| read_recording(&dir.join(&name)).map(|rec| (name, rec)))
            .collect()
    }
}

/// Deterministic train/validation split over loaded recordings: every fifth
/// recording (by sorted name) validates once there are enough to spare.
pub fn train_val_split(recordings: &[(String, Recording)]) -> (Vec<Recording>, Vec<Recording>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (i, (_, rec)) in recordings.iter().enumerate() {
        if recordings.len() >= 5 && i % 5 == 4 {
            val.push(rec.clone());
        } else {
            train.push(rec.clone());
        }
    }
    (train, val)
}

fn load_chair_file(path: &Path) -> Result<ChairModel> {
    let (dims, data) = seatpose::data::read_tensor(path, MAGIC_CHAIR, 2)?;
    let n = dims[0] as usize;
    let cols = dims[1] as usize;
    let points =
        Array2::from_shape_vec((n, cols), data.into_iter().map(f64::from).collect()).unwrap();
    let id = path.file_stem().map_or_else(|| "chair".to_string(), |s| s.to_string_lossy().into_owned());
    ChairModel::from_points(&id, points)
}

fn apply_set(table: &mut toml::Table, set: &str) -> Result<()> {
    let (key, value) = set
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set needs KEY=VALUE, got {set:?}")))?;
    let key = key.trim();
    let value = value.trim();
    // Parse through a scratch document so numbers, booleans, arrays, and
    // quoted strings all come out typed; bare words fall back to strings.
    let parsed: toml::Value = match format!("v = {value}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(value.to_string()),
    };

    let mut node = table;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("--set key {key:?} is malformed")));
    }
    for part in &parts[..parts.len() - 1] {
        node = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("--set key {key:?} crosses a non-table field")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}
