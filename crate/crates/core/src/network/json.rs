use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Network, NetworkError, OutcomeRule};
use crate::resource::{Alphabet, NonsignalingResource, ResourceError, ResourceFile};
use crate::wiring::{TreeFile, TreeFileError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: invalid JSON: {message}")]
    Json { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Resource {
        context: String,
        #[source]
        source: ResourceError,
    },
    #[error(transparent)]
    Tree(#[from] TreeFileError),
    #[error("bad bin key `{0}`")]
    BinKey(String),
    #[error("no settings alphabet for party `{0}`")]
    MissingSettings(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl ScenarioError {
    /// Input problems (unreadable or malformed files) as opposed to domain
    /// failures such as signaling resources.
    pub fn is_input_error(&self) -> bool {
        match self {
            ScenarioError::Io { .. }
            | ScenarioError::Json { .. }
            | ScenarioError::Tree(_)
            | ScenarioError::BinKey(_)
            | ScenarioError::MissingSettings(_) => true,
            ScenarioError::Resource { source, .. } => !matches!(
                source,
                ResourceError::Signaling(_)
                    | ResourceError::NotNormalized { .. }
                    | ResourceError::Negative { .. }
            ),
            ScenarioError::Network(_) => false,
        }
    }
}

/// A file reference (relative to the scenario file) or an inline object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ref<T> {
    Path(String),
    Inline(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<u32>>,
    /// Transcript key (`"o1,o2,..."`, resources in id order) to outcome.
    pub map: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum OutcomeFile {
    Transcript,
    Labels {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<Vec<u32>>,
    },
    Bins(BinFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub parties: Vec<String>,
    pub settings: BTreeMap<String, Vec<u32>>,
    pub resources: Vec<Ref<ResourceFile>>,
    pub trees: Vec<Ref<TreeFile>>,
    /// Per-party outcome rule; parties not listed use the full transcript.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub outcomes: BTreeMap<String, OutcomeFile>,
    /// Admit resources that fail the nonsignaling check.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub counterexample: bool,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| ScenarioError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn resolve<T: Clone + for<'de> Deserialize<'de>>(
    r: &Ref<T>,
    base: &Path,
) -> Result<T, ScenarioError> {
    match r {
        Ref::Inline(t) => Ok(t.clone()),
        Ref::Path(p) => read_json(&base.join(p)),
    }
}

fn parse_bin_key(k: &str) -> Result<Vec<u32>, ScenarioError> {
    if k.trim().is_empty() {
        return Ok(Vec::new());
    }
    k.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| ScenarioError::BinKey(k.to_string()))
        })
        .collect()
}

fn alphabet(v: &Option<Vec<u32>>, context: &str) -> Result<Option<Alphabet>, ScenarioError> {
    v.clone()
        .map(Alphabet::new)
        .transpose()
        .map_err(|source| ScenarioError::Resource {
            context: context.to_string(),
            source,
        })
}

impl OutcomeFile {
    pub fn to_rule(&self, party: &str) -> Result<OutcomeRule, ScenarioError> {
        let ctx = format!("outcome alphabet of `{party}`");
        Ok(match self {
            OutcomeFile::Transcript => OutcomeRule::Transcript,
            OutcomeFile::Labels { alphabet: a } => OutcomeRule::Labels {
                alphabet: alphabet(a, &ctx)?,
            },
            OutcomeFile::Bins(b) => OutcomeRule::Bins {
                alphabet: alphabet(&b.alphabet, &ctx)?,
                map: b
                    .map
                    .iter()
                    .map(|(k, v)| Ok((parse_bin_key(k)?, *v)))
                    .collect::<Result<_, ScenarioError>>()?,
            },
        })
    }

    pub fn from_rule(rule: &OutcomeRule) -> Self {
        match rule {
            OutcomeRule::Transcript => OutcomeFile::Transcript,
            OutcomeRule::Labels { alphabet } => OutcomeFile::Labels {
                alphabet: alphabet.clone().map(Into::into),
            },
            OutcomeRule::Bins { alphabet, map } => OutcomeFile::Bins(BinFile {
                alphabet: alphabet.clone().map(Into::into),
                map: map
                    .iter()
                    .map(|(k, v)| {
                        (
                            k.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
                            *v,
                        )
                    })
                    .collect(),
            }),
        }
    }
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        read_json(path)
    }

    /// Resource files with references resolved relative to `base`.
    pub fn resource_files(&self, base: &Path) -> Result<Vec<ResourceFile>, ScenarioError> {
        self.resources.iter().map(|r| resolve(r, base)).collect()
    }

    pub fn tree_files(&self, base: &Path) -> Result<Vec<TreeFile>, ScenarioError> {
        self.trees.iter().map(|t| resolve(t, base)).collect()
    }

    /// Resolves references relative to `base` and builds the network.
    pub fn to_network(&self, base: &Path) -> Result<Network, ScenarioError> {
        let mut resources = Vec::with_capacity(self.resources.len());
        for r in &self.resources {
            let file = resolve(r, base)?;
            let context = format!("resource `{}`", file.id);
            let checked = file.to_resource();
            let res = match checked {
                Ok(r) => r,
                Err(ResourceError::Signaling(_)) | Err(ResourceError::NotNormalized { .. })
                    if self.counterexample =>
                {
                    file.to_unchecked_resource()
                        .map_err(|source| ScenarioError::Resource { context, source })?
                }
                Err(source) => return Err(ScenarioError::Resource { context, source }),
            };
            resources.push(res);
        }
        let trees = self
            .trees
            .iter()
            .map(|t| Ok(resolve(t, base)?.to_tree()?))
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let mut settings = Vec::with_capacity(self.parties.len());
        let mut rules = Vec::with_capacity(self.parties.len());
        for p in &self.parties {
            let s = self
                .settings
                .get(p)
                .ok_or_else(|| ScenarioError::MissingSettings(p.clone()))?;
            settings.push(
                Alphabet::new(s.clone()).map_err(|source| ScenarioError::Resource {
                    context: format!("settings of `{p}`"),
                    source,
                })?,
            );
            rules.push(match self.outcomes.get(p) {
                None => OutcomeRule::Transcript,
                Some(o) => o.to_rule(p)?,
            });
        }
        Ok(Network::new(
            self.parties.clone(),
            settings,
            resources,
            trees,
            rules,
        )?)
    }

    /// Self-contained scenario with every resource and tree inline.
    pub fn from_network(net: &Network, name: &str, description: &str) -> Self {
        let outcomes = net
            .parties()
            .iter()
            .zip(net.outcome_rules())
            .filter(|(_, r)| **r != OutcomeRule::Transcript)
            .map(|(p, r)| (p.clone(), OutcomeFile::from_rule(r)))
            .collect();
        Self {
            name: name.to_string(),
            description: description.to_string(),
            parties: net.parties().to_vec(),
            settings: net
                .parties()
                .iter()
                .zip(net.settings_alphabets())
                .map(|(p, a)| (p.clone(), a.symbols().to_vec()))
                .collect(),
            resources: net
                .resources()
                .iter()
                .map(|r| Ref::Inline(ResourceFile::from_resource(r)))
                .collect(),
            trees: net
                .trees()
                .iter()
                .map(|t| Ref::Inline(TreeFile::from_tree(t)))
                .collect(),
            outcomes,
            counterexample: !net.all_verified(),
        }
    }
}

/// Reads a resource file, checked unless `unchecked` is set.
pub fn load_resource(path: &Path, unchecked: bool) -> Result<NonsignalingResource, ScenarioError> {
    let file: ResourceFile = read_json(path)?;
    let context = format!("resource `{}`", file.id);
    let r = if unchecked {
        file.to_unchecked_resource()
    } else {
        file.to_resource()
    };
    r.map_err(|source| ScenarioError::Resource { context, source })
}
