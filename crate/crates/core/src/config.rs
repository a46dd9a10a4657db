//! Run configuration: a flat `key = value` file whose keys mirror the
//! command-line flags, merged with flags given on the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::InputFormat;
use crate::error::{Error, Result};
use crate::fluency::{DEFAULT_ADD_K, DEFAULT_CONCURRENCY, DEFAULT_LANGUAGE, DEFAULT_ORDER};
use crate::semantic::{DEFAULT_BATCH_SIZE, DEFAULT_DIM};

pub const CACHE_ENV: &str = "CORPUS_SCOPE_CACHE";

/// Every key accepted in a config file.
pub const KEYS: &[&str] = &[
    "train",
    "test",
    "valid",
    "generated",
    "format",
    "embedding",
    "embed-endpoint",
    "embed-dim",
    "embed-seed",
    "embed-batch",
    "proofreader",
    "proofreader-endpoint",
    "language",
    "proofreader-concurrency",
    "lm",
    "lm-order",
    "lm-addk",
    "lm-endpoint",
    "sample-g",
    "sample-seed",
    "checkpoints",
    "cache-dir",
    "http-attempts",
    "http-timeout-secs",
];

/// Raw key/value settings, later entries overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment line, blank lines
    /// are ignored, unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                });
            }
            if map
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("key `{key}` given twice"),
                });
            }
        }
        Ok(Settings(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Settings::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key), "unknown key {key}");
        self.0.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// `other` wins on conflicts.
    pub fn merged(mut self, other: Settings) -> Settings {
        self.0.extend(other.0);
        self
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| {
                    Error::InvalidArgument(format!("bad value `{v}` for `{key}`: {e}"))
                })
            })
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EmbeddingConfig {
    Builtin { dim: usize, seed: u64 },
    Remote { endpoint: String, batch_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProofreaderConfig {
    None,
    Remote {
        endpoint: String,
        language: String,
        concurrency: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlausibilityConfig {
    Ngram { order: usize, add_k: f64 },
    Remote { endpoint: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub valid: Option<PathBuf>,
    pub generated: Vec<PathBuf>,
    pub format: String,
    pub embedding: EmbeddingConfig,
    pub proofreader: ProofreaderConfig,
    pub plausibility: PlausibilityConfig,
    pub sample_g: Option<usize>,
    pub sample_seed: u64,
    pub checkpoints: Vec<usize>,
    pub cache_dir: Option<PathBuf>,
    pub http_attempts: u32,
    pub http_timeout_secs: u64,
}

fn contradiction(a: &str, b: &str) -> Error {
    Error::InvalidArgument(format!("`{a}` contradicts `{b}`"))
}

fn required(s: &Settings, key: &str) -> Result<String> {
    s.get(key)
        .map(str::to_string)
        .ok_or_else(|| Error::InvalidArgument(format!("missing required setting `{key}`")))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|p| !p.is_empty())
}

impl RunConfig {
    /// Resolves settings into a complete configuration, filling defaults.
    ///
    /// `cache_env` is the value of the cache-directory environment override,
    /// if any; it takes precedence over `cache-dir`.
    pub fn resolve(s: &Settings, cache_env: Option<&str>) -> Result<Self> {
        let format = s.get("format").unwrap_or("lines").to_string();
        format.parse::<InputFormat>()?;

        let embedding = match s.get("embedding").unwrap_or("builtin") {
            "builtin" => {
                for key in ["embed-endpoint", "embed-batch"] {
                    if s.get(key).is_some() {
                        return Err(contradiction("embedding = builtin", key));
                    }
                }
                EmbeddingConfig::Builtin {
                    dim: s.parsed("embed-dim")?.unwrap_or(DEFAULT_DIM),
                    seed: s.parsed("embed-seed")?.unwrap_or(0),
                }
            }
            "remote" => {
                for key in ["embed-dim", "embed-seed"] {
                    if s.get(key).is_some() {
                        return Err(contradiction("embedding = remote", key));
                    }
                }
                let batch_size = s.parsed("embed-batch")?.unwrap_or(DEFAULT_BATCH_SIZE);
                if batch_size == 0 {
                    return Err(Error::InvalidArgument(
                        "embed-batch must be positive".into(),
                    ));
                }
                EmbeddingConfig::Remote {
                    endpoint: required(s, "embed-endpoint")?,
                    batch_size,
                }
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "embedding must be `builtin` or `remote`, got `{other}`"
                )))
            }
        };
        if let EmbeddingConfig::Builtin { dim: 0, .. } = embedding {
            return Err(Error::InvalidArgument("embed-dim must be positive".into()));
        }

        let default_proofreader = if s.get("proofreader-endpoint").is_some() {
            "remote"
        } else {
            "none"
        };
        let proofreader = match s.get("proofreader").unwrap_or(default_proofreader) {
            "none" => {
                for key in [
                    "proofreader-endpoint",
                    "proofreader-concurrency",
                    "language",
                ] {
                    if s.get(key).is_some() {
                        return Err(contradiction("proofreader = none", key));
                    }
                }
                ProofreaderConfig::None
            }
            "remote" => ProofreaderConfig::Remote {
                endpoint: required(s, "proofreader-endpoint")?,
                language: s.get("language").unwrap_or(DEFAULT_LANGUAGE).to_string(),
                concurrency: s
                    .parsed("proofreader-concurrency")?
                    .unwrap_or(DEFAULT_CONCURRENCY)
                    .max(1),
            },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "proofreader must be `none` or `remote`, got `{other}`"
                )))
            }
        };

        let default_lm = if s.get("lm-endpoint").is_some() {
            "remote"
        } else {
            "ngram"
        };
        let plausibility = match s.get("lm").unwrap_or(default_lm) {
            "ngram" => {
                if s.get("lm-endpoint").is_some() {
                    return Err(contradiction("lm = ngram", "lm-endpoint"));
                }
                let order = s.parsed("lm-order")?.unwrap_or(DEFAULT_ORDER);
                let add_k: f64 = s.parsed("lm-addk")?.unwrap_or(DEFAULT_ADD_K);
                if order == 0 || !(add_k >= 0.0 && add_k.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "lm-order must be >= 1 and lm-addk finite and >= 0".into(),
                    ));
                }
                PlausibilityConfig::Ngram { order, add_k }
            }
            "remote" => {
                for key in ["lm-order", "lm-addk"] {
                    if s.get(key).is_some() {
                        return Err(contradiction("lm = remote", key));
                    }
                }
                PlausibilityConfig::Remote {
                    endpoint: required(s, "lm-endpoint")?,
                }
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "lm must be `ngram` or `remote`, got `{other}`"
                )))
            }
        };

        let checkpoints = match s.get("checkpoints") {
            None => Vec::new(),
            Some(v) => list(v)
                .map(|p| {
                    p.parse::<usize>()
                        .map_err(|e| Error::InvalidArgument(format!("bad checkpoint `{p}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints.contains(&0) {
            return Err(Error::InvalidArgument(
                "checkpoints must be positive and strictly ascending".into(),
            ));
        }

        let generated: Vec<PathBuf> = list(&required(s, "generated")?)
            .map(PathBuf::from)
            .collect();
        if generated.is_empty() {
            return Err(Error::InvalidArgument("no generated corpora given".into()));
        }

        let sample_g: Option<usize> = s.parsed("sample-g")?;
        if sample_g == Some(0) {
            return Err(Error::InvalidArgument("sample-g must be positive".into()));
        }

        let cache_dir = cache_env
            .filter(|v| !v.is_empty())
            .or(s.get("cache-dir"))
            .map(PathBuf::from);

        Ok(RunConfig {
            train: required(s, "train")?.into(),
            test: required(s, "test")?.into(),
            valid: s.get("valid").map(PathBuf::from),
            generated,
            format,
            embedding,
            proofreader,
            plausibility,
            sample_g,
            sample_seed: s.parsed("sample-seed")?.unwrap_or(0),
            checkpoints,
            cache_dir,
            http_attempts: s.parsed("http-attempts")?.unwrap_or(3).max(1),
            http_timeout_secs: s.parsed("http-timeout-secs")?.unwrap_or(30),
        })
    }

    pub fn input_format(&self) -> InputFormat {
        self.format.parse().expect("validated in resolve")
    }

    /// Every corpus file the run reads.
    pub fn input_files(&self) -> impl Iterator<Item = &Path> {
        [&self.train, &self.test]
            .into_iter()
            .chain(self.valid.as_ref())
            .chain(&self.generated)
            .map(PathBuf::as_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Settings {
        Settings::parse("train = t.txt\ntest = s.txt\ngenerated = a.txt, b.txt\n").unwrap()
    }

    #[test]
    fn parses_flat_files() {
        let s = Settings::parse("# comment\n\ntrain = data/train.txt\n lm-order=4 \n").unwrap();
        assert_eq!(s.get("train"), Some("data/train.txt"));
        assert_eq!(s.get("lm-order"), Some("4"));
        assert!(matches!(
            Settings::parse("nope = 1"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            Settings::parse("train\n"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(Settings::parse("train = a\ntrain = b\n").is_err());
    }

    #[test]
    fn defaults_are_filled() {
        let c = RunConfig::resolve(&base(), None).unwrap();
        assert_eq!(
            c.generated,
            vec![PathBuf::from("a.txt"), PathBuf::from("b.txt")]
        );
        assert_eq!(c.embedding, EmbeddingConfig::Builtin { dim: 256, seed: 0 });
        assert_eq!(c.proofreader, ProofreaderConfig::None);
        assert_eq!(
            c.plausibility,
            PlausibilityConfig::Ngram {
                order: 3,
                add_k: 0.1
            }
        );
        assert_eq!(c.http_attempts, 3);
        assert!(c.checkpoints.is_empty());
    }

    #[test]
    fn later_settings_override() {
        let mut cli = Settings::default();
        cli.set("lm-order", "2");
        let c = RunConfig::resolve(&base().merged(cli), None).unwrap();
        assert_eq!(
            c.plausibility,
            PlausibilityConfig::Ngram {
                order: 2,
                add_k: 0.1
            }
        );
    }

    #[test]
    fn endpoints_imply_remote_backends() {
        let mut s = base();
        s.set("proofreader-endpoint", "http://localhost:8081");
        s.set("lm-endpoint", "http://localhost:9000");
        let c = RunConfig::resolve(&s, None).unwrap();
        assert!(
            matches!(c.proofreader, ProofreaderConfig::Remote { ref language, concurrency: 4, .. } if language == "en-US")
        );
        assert!(matches!(c.plausibility, PlausibilityConfig::Remote { .. }));
    }

    #[test]
    fn contradictions_are_rejected() {
        let cases: &[&[(&str, &str)]] = &[
            &[("embedding", "builtin"), ("embed-endpoint", "http://x")],
            &[("embedding", "remote")],
            &[
                ("embedding", "remote"),
                ("embed-endpoint", "http://x"),
                ("embed-dim", "3"),
            ],
            &[
                ("proofreader", "none"),
                ("proofreader-endpoint", "http://x"),
            ],
            &[("proofreader", "remote")],
            &[("lm", "ngram"), ("lm-endpoint", "http://x")],
            &[("lm-endpoint", "http://x"), ("lm-order", "2")],
            &[("embedding", "fancy")],
            &[("checkpoints", "20,10")],
            &[("sample-g", "0")],
            &[("format", "xml")],
        ];
        for case in cases {
            let mut s = base();
            for (k, v) in *case {
                s.set(k, *v);
            }
            assert!(RunConfig::resolve(&s, None).is_err(), "{case:?}");
        }
    }

    #[test]
    fn cache_env_overrides_setting() {
        let mut s = base();
        s.set("cache-dir", "from-config");
        assert_eq!(
            RunConfig::resolve(&s, None).unwrap().cache_dir,
            Some("from-config".into())
        );
        assert_eq!(
            RunConfig::resolve(&s, Some("from-env")).unwrap().cache_dir,
            Some("from-env".into())
        );
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = RunConfig::resolve(&base(), None).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
    }
}
