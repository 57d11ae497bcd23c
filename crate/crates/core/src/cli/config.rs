use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::jpeg_core::{DctBasis, QuantTable};
use crate::nonideal::{apply_parasitics, perturb_caps, MismatchModel, ParasiticModel, ROOM_TEMPERATURE};
use crate::sc_sim::{DesignParams, PipelineConfig};
use crate::stream::EncoderSettings;

/// The `--config` JSON file. Every key is optional; unknown keys are an
/// error.
///
/// ```json
/// {
///   "design": { "c_q_out_ff": 90, "gain_error": 0.01 },
///   "quant_table": null,
///   "v_thresh_mv": 18,
///   "noise": true,
///   "temperature_k": 300,
///   "mismatch_sigma": 0.05,
///   "mismatch_seed": 1,
///   "parasitic_ff": 1.0
/// }
/// ```
///
/// `mismatch_*` and `parasitic_ff` describe the simulated silicon: the same
/// values must be used when encoding and when calibrating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecConfig {
    pub design: DesignParams,
    /// Row-major 8×8 table; Q50 when absent.
    pub quant_table: Option<[[u16; 8]; 8]>,
    pub v_thresh_mv: u16,
    pub noise: bool,
    pub temperature_k: f64,
    pub mismatch_sigma: f64,
    pub mismatch_seed: u64,
    pub parasitic_ff: f64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            design: DesignParams::default(),
            quant_table: None,
            v_thresh_mv: 18,
            noise: true,
            temperature_k: ROOM_TEMPERATURE,
            mismatch_sigma: 0.0,
            mismatch_seed: 0,
            parasitic_ff: 0.0,
        }
    }
}

impl CodecConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if !(cfg.temperature_k > 0.0) {
            return Err(CliError::Config(format!("temperature_k {} must be positive", cfg.temperature_k)));
        }
        Ok(cfg)
    }

    pub fn quant_table(&self) -> Result<QuantTable, CliError> {
        match self.quant_table {
            Some(q) => QuantTable::new(q).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(QuantTable::q50()),
        }
    }

    /// The designed (unperturbed) pipeline.
    pub fn nominal_pipeline(&self) -> Result<PipelineConfig, CliError> {
        Ok(PipelineConfig::from_design(&self.design, &self.quant_table()?, &DctBasis::new())?)
    }

    /// The pipeline as fabricated: mismatch first, then parasitics.
    pub fn silicon_pipeline(&self) -> Result<PipelineConfig, CliError> {
        let cfg = perturb_caps(
            &self.nominal_pipeline()?,
            &MismatchModel { sigma_rel: self.mismatch_sigma, seed: self.mismatch_seed },
        )?;
        Ok(apply_parasitics(&cfg, &ParasiticModel { c_par_node: self.parasitic_ff })?)
    }

    pub fn encoder_settings(&self, seed: u64) -> Result<EncoderSettings, CliError> {
        Ok(EncoderSettings {
            pipeline: self.silicon_pipeline()?,
            v_thresh_mv: self.v_thresh_mv,
            seed,
            noise: self.noise,
            temperature: self.temperature_k,
            ..EncoderSettings::default()
        })
    }
}

/// Written next to every output so a run can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config_path: Option<PathBuf>,
    /// The effective configuration after command-line overrides.
    pub config: CodecConfig,
    pub seeds: Vec<u64>,
    pub input_paths: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub timestamp_unix: u64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, config: &CodecConfig) -> Self {
        Self {
            command: command.into(),
            args: std::env::args().collect(),
            config_path: config_path.map(Path::to_path_buf),
            config: config.clone(),
            seeds: Vec::new(),
            input_paths: Vec::new(),
            output_dir: PathBuf::new(),
            outputs: Vec::new(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    /// Saves as `<output>.manifest.json`.
    pub fn write_beside(&mut self, output: &Path) -> Result<PathBuf, CliError> {
        let dir = output.parent().map(Path::to_path_buf).unwrap_or_default();
        self.output_dir = dir;
        if !self.outputs.iter().any(|o| o == output) {
            self.outputs.push(output.to_path_buf());
        }
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
