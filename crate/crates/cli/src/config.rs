//! The run configuration: one schema-versioned TOML file drives every
//! command. A single master seed fans out to all module seeds.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use evoad::autoencoders::{CnnAeSpec, ModelFamily, UsadSpec};
use evoad::dataset::SynthConfig;
use evoad::ensemble::VotingRule;
use evoad::evolution::EvolutionConfig;
use evoad::seeds;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or inputs; exit code 1.
    Validation(String),
    /// Failure during the run itself; exit code 2.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub model: ModelSection,
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSource>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub train: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    /// Label column stripped from the test file (and from the train
    /// file when present there).
    #[serde(default = "default_label_column")]
    pub label_column: String,
}

fn default_label_column() -> String {
    "label".to_string()
}

/// Synthetic source: the data seed derives from the master seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSource {
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub n_clusters: usize,
    #[serde(default = "default_intra_corr")]
    pub intra_cluster_corr: f64,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
}

fn default_intra_corr() -> f64 {
    0.9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: usize,
    pub end: usize,
    pub cluster: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub downsample_ratio: usize,
    pub val_fraction: f64,
    pub normalize: bool,
    /// Downsample before fitting normalisation (the default order);
    /// `false` splits and normalises first, then downsamples.
    pub downsample_first: bool,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            downsample_ratio: 5,
            val_fraction: 0.2,
            normalize: true,
            downsample_first: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub family: FamilyName,
    pub batch_size: usize,
    pub cnn: CnnAeSpec,
    pub usad: UsadSpec,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            family: FamilyName::Cnn1d,
            batch_size: 32,
            cnn: CnnAeSpec::default(),
            usad: UsadSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Cnn1d,
    Usad,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub k: usize,
    #[serde(default = "default_mutation_prob")]
    pub mutation_prob: f64,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_parents")]
    pub parents: usize,
    #[serde(default = "default_fitness_epochs")]
    pub fitness_epochs: usize,
    #[serde(default = "default_penalty_empty")]
    pub penalty_empty: f64,
    #[serde(default = "default_init_jitter")]
    pub init_jitter: f64,
}

fn default_mutation_prob() -> f64 {
    0.1
}
fn default_generations() -> usize {
    10
}
fn default_population() -> usize {
    8
}
fn default_parents() -> usize {
    4
}
fn default_fitness_epochs() -> usize {
    15
}
fn default_penalty_empty() -> f64 {
    10.0
}
fn default_init_jitter() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub final_epochs: usize,
    pub percentile: f64,
    pub voting: VotingName,
    /// Votes required when `voting = "quorum"`.
    pub quorum: usize,
    pub point_adjust: bool,
    pub dump_scores: bool,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            final_epochs: 70,
            percentile: 99.0,
            voting: VotingName::Majority,
            quorum: 1,
            point_adjust: false,
            dump_scores: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotingName {
    Majority,
    Any,
    Quorum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every invariant that can be checked before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Validation(msg));
        if self.version != CONFIG_SCHEMA_VERSION {
            return fail(format!(
                "config schema version {} unsupported (expected {CONFIG_SCHEMA_VERSION})",
                self.version
            ));
        }
        match (&self.dataset.csv, &self.dataset.synth) {
            (None, None) => return fail("dataset: neither csv nor synth source given".into()),
            (Some(_), Some(_)) => return fail("dataset: csv and synth are mutually exclusive".into()),
            (Some(csv), None) => {
                if !csv.train.exists() {
                    return fail(format!("dataset.csv.train {} does not exist", csv.train.display()));
                }
                if let Some(test) = &csv.test {
                    if !test.exists() {
                        return fail(format!("dataset.csv.test {} does not exist", test.display()));
                    }
                }
            }
            (None, Some(synth)) => {
                self.synth_config(synth).validate().map_err(|e| CliError::Validation(e.to_string()))?;
            }
        }
        if self.preprocess.downsample_ratio == 0 {
            return fail("preprocess.downsample_ratio must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.preprocess.val_fraction) || self.preprocess.val_fraction == 0.0 {
            return fail(format!(
                "preprocess.val_fraction {} outside (0, 1)",
                self.preprocess.val_fraction
            ));
        }
        if self.model.batch_size == 0 {
            return fail("model.batch_size must be >= 1".into());
        }
        self.evolution_config().validate().map_err(|e| CliError::Validation(e.to_string()))?;
        if !(50.0..=100.0).contains(&self.ensemble.percentile) || self.ensemble.percentile == 50.0 {
            return fail(format!(
                "ensemble.percentile {} outside (50, 100]",
                self.ensemble.percentile
            ));
        }
        if self.ensemble.final_epochs == 0 {
            return fail("ensemble.final_epochs must be >= 1".into());
        }
        if self.ensemble.voting == VotingName::Quorum && self.ensemble.quorum == 0 {
            return fail("ensemble.quorum must be >= 1".into());
        }
        Ok(())
    }

    pub fn model_family(&self) -> ModelFamily {
        match self.model.family {
            FamilyName::Cnn1d => ModelFamily::Cnn1d(self.model.cnn.clone()),
            FamilyName::Usad => ModelFamily::Usad(self.model.usad.clone()),
        }
    }

    pub fn voting_rule(&self) -> VotingRule {
        match self.ensemble.voting {
            VotingName::Majority => VotingRule::Majority,
            VotingName::Any => VotingRule::Any,
            VotingName::Quorum => VotingRule::Quorum(self.ensemble.quorum),
        }
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        EvolutionConfig {
            k: self.evolution.k,
            mutation_prob: self.evolution.mutation_prob,
            n_generations: self.evolution.generations,
            population_size: self.evolution.population,
            n_parents: self.evolution.parents,
            fitness_epochs: self.evolution.fitness_epochs,
            penalty_empty: self.evolution.penalty_empty,
            init_jitter: self.evolution.init_jitter,
            batch_size: self.model.batch_size,
            family: self.model_family(),
            seed: self.seed,
        }
    }

    pub fn synth_config(&self, synth: &SynthSource) -> SynthConfig {
        SynthConfig {
            n_train: synth.n_train,
            n_test: synth.n_test,
            n_features: synth.n_features,
            n_clusters: synth.n_clusters,
            intra_cluster_corr: synth.intra_cluster_corr,
            anomaly_segments: synth
                .segments
                .iter()
                .map(|s| evoad::dataset::AnomalySegment {
                    start: s.start,
                    end: s.end,
                    cluster: s.cluster,
                    magnitude: s.magnitude,
                })
                .collect(),
            seed: seeds::derive(self.seed, "dataset", &[]),
        }
    }

    /// Stable fingerprint of the configuration; the output directory is
    /// excluded so reruns into different directories hash identically.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output.dir = PathBuf::new();
        let text = toml::to_string(&canonical).expect("config serialises");
        format!("{:016x}", seeds::content_hash(text.as_bytes()))
    }

    pub fn snapshot_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_toml() -> String {
        r#"
version = 1
seed = 7

[dataset.synth]
n_train = 400
n_test = 100
n_features = 6
n_clusters = 2

[evolution]
k = 2

[output]
dir = "runs/test"
"#
        .to_string()
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: RunConfig = toml::from_str(&minimal_toml()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.preprocess.downsample_ratio, 5);
        assert_eq!(cfg.ensemble.final_epochs, 70);
        assert_eq!(cfg.evolution.population, 8);
        assert_eq!(cfg.model.batch_size, 32);
        assert!(matches!(cfg.model_family(), ModelFamily::Cnn1d(_)));
    }

    #[test]
    fn synth_smaller_than_clusters_is_rejected() {
        let mut cfg: RunConfig = toml::from_str(&minimal_toml()).unwrap();
        cfg.dataset.synth.as_mut().unwrap().n_clusters = 12;
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn missing_csv_path_is_rejected() {
        let toml_text = r#"
version = 1
seed = 1

[dataset.csv]
train = "/definitely/not/here.csv"

[evolution]
k = 2

[output]
dir = "runs/x"
"#;
        let cfg: RunConfig = toml::from_str(toml_text).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = minimal_toml().replace("[evolution]", "[evolution]\nbogus_knob = 3");
        assert!(toml::from_str::<RunConfig>(&bad).is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a: RunConfig = toml::from_str(&minimal_toml()).unwrap();
        let mut b = a.clone();
        b.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.config_hash(), b.config_hash());
        let mut c = a.clone();
        c.seed = 8;
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn seed_override_changes_derived_dataset_seed() {
        let a: RunConfig = toml::from_str(&minimal_toml()).unwrap();
        let mut b = a.clone();
        b.seed = 8;
        let sa = a.synth_config(a.dataset.synth.as_ref().unwrap());
        let sb = b.synth_config(b.dataset.synth.as_ref().unwrap());
        assert_ne!(sa.seed, sb.seed);
    }
}
