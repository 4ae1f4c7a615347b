//! JSON run configurations. Unknown keys are rejected and every config
//! re-emits in a canonical form that parses back to the same value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use graphomic_core::eval::{GraphSource, ModelSpec, SplitKind};
use graphomic_core::models::{GraphModelSpec, Integration, ModelKind, VaeSpec};
use graphomic_core::nn::RegularizerKind;
use graphomic_core::synthgen::SynthConfig;

use crate::AppError;

pub type Result<T> = std::result::Result<T, AppError>;

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
}

/// Canonical JSON emission (pretty, struct field order).
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("configs serialize") + "\n"
}

/// Configuration of `gen-synth`. Every generator knob is optional; the
/// seed is mandatory.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SynthGenConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_per_class: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims_alpha: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims_beta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_range_alpha: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_range_beta: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_beta: Option<Vec<f64>>,
}

impl SynthGenConfig {
    pub fn to_synth_config(&self) -> SynthConfig {
        let d = SynthConfig::default();
        SynthConfig {
            n_per_class: self.n_per_class.unwrap_or(d.n_per_class),
            dims_alpha: self.dims_alpha.unwrap_or(d.dims_alpha),
            dims_beta: self.dims_beta.unwrap_or(d.dims_beta),
            mu_range_alpha: self.mu_range_alpha.unwrap_or(d.mu_range_alpha),
            mu_range_beta: self.mu_range_beta.unwrap_or(d.mu_range_beta),
            theta_alpha: self.theta_alpha.unwrap_or(d.theta_alpha),
            theta_beta: self.theta_beta.unwrap_or(d.theta_beta),
            sigma: self.sigma.unwrap_or(d.sigma),
            sigma_alpha: self.sigma_alpha.clone(),
            sigma_beta: self.sigma_beta.clone(),
            seed: self.seed,
        }
    }
}

/// Graph recipe in configs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphConfig {
    Knn {
        k: usize,
    },
    Radius {
        r: f64,
    },
    Hybrid {
        k: usize,
        r: f64,
    },
    SyntheticHomophily {
        target_h: f64,
        #[serde(default = "default_total_edges")]
        total_edges: usize,
    },
}

fn default_total_edges() -> usize {
    4000
}

impl GraphConfig {
    pub fn to_source(&self) -> GraphSource {
        match *self {
            GraphConfig::Knn { k } => GraphSource::Knn { k },
            GraphConfig::Radius { r } => GraphSource::Radius { r },
            GraphConfig::Hybrid { k, r } => GraphSource::Hybrid { k, r },
            GraphConfig::SyntheticHomophily {
                target_h,
                total_edges,
            } => GraphSource::SyntheticHomophily {
                target_h,
                total_edges,
            },
        }
    }
}

/// Classifier split selector: `"holdout"` or `{"kfold": 5}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SplitConfig {
    #[serde(rename = "holdout")]
    Holdout,
    #[serde(rename = "kfold", untagged)]
    KFold { kfold: usize },
}

impl SplitConfig {
    pub fn to_kind(&self) -> SplitKind {
        match self {
            SplitConfig::Holdout => SplitKind::Holdout75_25,
            SplitConfig::KFold { kfold } => SplitKind::KFold(*kfold),
        }
    }
}

/// Overrides for the variational-model hyper-parameters.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VaeParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// `"kl"` or `"mmd"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mmd_bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
}

fn parse_reg(
    reg: &Option<String>,
    mmd_bandwidth: Option<f64>,
    latent: usize,
    default: RegularizerKind,
) -> Result<RegularizerKind> {
    match reg.as_deref() {
        None => Ok(default),
        Some("kl") => Ok(RegularizerKind::Kl),
        Some("mmd") => Ok(match mmd_bandwidth {
            Some(bandwidth) => RegularizerKind::Mmd { bandwidth },
            None => RegularizerKind::mmd_for_latent(latent),
        }),
        Some(other) => Err(AppError::Config(format!(
            "unknown regularizer {other:?}; expected \"kl\" or \"mmd\""
        ))),
    }
}

impl VaeParams {
    pub fn to_spec(&self) -> Result<VaeSpec> {
        let d = VaeSpec::default();
        let latent = self.latent_size.unwrap_or(d.latent_size);
        let reg = parse_reg(
            &self.reg,
            self.mmd_bandwidth,
            latent,
            RegularizerKind::mmd_for_latent(latent),
        )?;
        Ok(VaeSpec {
            dense_size: self.dense_size.unwrap_or(d.dense_size),
            latent_size: latent,
            beta: self.beta.unwrap_or(d.beta),
            recon_override: None,
            reg,
            epochs: self.epochs.unwrap_or(d.epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
        })
    }
}

/// Overrides for the graph-model hyper-parameters.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GraphModelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conv_layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_size: Option<usize>,
    /// `"avg"` or `"dense"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration: Option<String>,
    /// `"kl"` or `"mmd"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mmd_bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
}

impl GraphModelParams {
    pub fn to_spec(&self, kind: ModelKind) -> Result<GraphModelSpec> {
        let d = GraphModelSpec::for_kind(kind);
        let latent = self.latent_size.unwrap_or(d.latent_size);
        let integration = match self.integration.as_deref() {
            None => d.integration,
            Some("avg") => Integration::Average,
            Some("dense") => Integration::Dense,
            Some(other) => {
                return Err(AppError::Config(format!(
                    "unknown integration {other:?}; expected \"avg\" or \"dense\""
                )))
            }
        };
        let reg = parse_reg(&self.reg, self.mmd_bandwidth, latent, d.reg)?;
        Ok(GraphModelSpec {
            conv_layers: self.conv_layers.unwrap_or(d.conv_layers),
            latent_size: latent,
            dense_size: self.dense_size.unwrap_or(d.dense_size),
            integration,
            reg,
            epochs: self.epochs.unwrap_or(d.epochs),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
        })
    }
}

/// Build the core model spec for a given architecture.
pub fn build_model_spec(
    kind: ModelKind,
    vae: &Option<VaeParams>,
    graph_model: &Option<GraphModelParams>,
) -> Result<ModelSpec> {
    let vae_spec = || -> Result<VaeSpec> {
        vae.clone().unwrap_or_default().to_spec()
    };
    let graph_spec = |k: ModelKind| -> Result<GraphModelSpec> {
        graph_model.clone().unwrap_or_default().to_spec(k)
    };
    Ok(match kind {
        ModelKind::CncVae => ModelSpec::CncVae(vae_spec()?),
        ModelKind::HVae => ModelSpec::HVae(vae_spec()?),
        ModelKind::CncVgae => ModelSpec::CncVgae(graph_spec(kind)?),
        ModelKind::CncDgi => ModelSpec::CncDgi(graph_spec(kind)?),
        ModelKind::TwoGraphDgi => ModelSpec::TwoGraphDgi(graph_spec(kind)?),
        ModelKind::HeteroDgi => ModelSpec::HeteroDgi(graph_spec(kind)?),
    })
}

/// Configuration of `train`: everything but the model name, which the
/// CLI flag supplies.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: u64,
    /// Pair of modality names; defaults to the dataset's first two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modalities: Option<(String, String)>,
    /// Defaults to the dataset's only label class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vae: Option<VaeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_model: Option<GraphModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitConfig>,
}

/// Configuration of `sweep`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    /// Dataset directory to ingest.
    pub data: String,
    pub models: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modalities: Option<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_classes: Option<Vec<String>>,
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    #[serde(default = "default_r_values")]
    pub r_values: Vec<f64>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vae: Option<VaeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_model: Option<GraphModelParams>,
}

fn default_k_values() -> Vec<usize> {
    vec![2, 4, 16, 64]
}

fn default_r_values() -> Vec<f64> {
    vec![0.005, 0.05, 0.5, 1.0, 5.0]
}

fn default_repeats() -> usize {
    3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<TrainConfig>(r#"{"seed": 1, "modle": "x"}"#);
        assert!(err.is_err());
    }

    #[test]
    fn canonical_emission_is_idempotent() {
        let text = r#"{"seed": 3,
            "graph": {"method": "hybrid", "k": 4, "r": 0.5},
            "graph_model": {"conv_layers": 2}}"#;
        let parsed: TrainConfig = serde_json::from_str(text).unwrap();
        let emitted = to_canonical_json(&parsed);
        let reparsed: TrainConfig = serde_json::from_str(&emitted).unwrap();
        assert_eq!(parsed, reparsed);
        assert_eq!(emitted, to_canonical_json(&reparsed));
    }

    #[test]
    fn graph_config_maps_to_source() {
        let g: GraphConfig =
            serde_json::from_str(r#"{"method": "synthetic-homophily", "target_h": 0.73}"#).unwrap();
        assert_eq!(
            g.to_source(),
            GraphSource::SyntheticHomophily {
                target_h: 0.73,
                total_edges: 4000
            }
        );
    }

    #[test]
    fn split_config_forms() {
        let holdout: SplitConfig = serde_json::from_str(r#""holdout""#).unwrap();
        assert_eq!(holdout.to_kind(), SplitKind::Holdout75_25);
        let kfold: SplitConfig = serde_json::from_str(r#"{"kfold": 5}"#).unwrap();
        assert_eq!(kfold.to_kind(), SplitKind::KFold(5));
    }

    #[test]
    fn model_spec_defaults_follow_architecture() {
        let spec = build_model_spec(ModelKind::CncVgae, &None, &None).unwrap();
        match spec {
            ModelSpec::CncVgae(s) => {
                assert_eq!(s.conv_layers, 3);
                assert_eq!(s.reg, RegularizerKind::Kl);
            }
            _ => panic!("wrong kind"),
        }
        let spec = build_model_spec(ModelKind::HeteroDgi, &None, &None).unwrap();
        match spec {
            ModelSpec::HeteroDgi(s) => assert_eq!(s.integration, Integration::Dense),
            _ => panic!("wrong kind"),
        }
    }
}
