//! Run configuration: a JSON file naming the source, the abstraction, the
//! solver, and the output artifacts. Paths are resolved relative to the
//! config file's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::catalog::Catalog;
use crate::fsm::AnalyzerOptions;
use crate::par::Parallelism;
use crate::predicate::Predicate;
use crate::sat::{BlockingMode, SolverChoice};
use crate::source::parse_source;
use crate::ApiUnitModel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("config {path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("config {path}: cannot read `{file}`: {source}")]
    Io {
        path: String,
        file: String,
        #[source]
        source: std::io::Error,
    },
}

fn default_true() -> bool {
    true
}

fn default_dot() -> String {
    "model.dot".to_string()
}

fn default_json() -> String {
    "model.json".to_string()
}

/// The on-disk configuration. Unknown keys are rejected by name.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Exactly one source file per run.
    pub sources: Vec<String>,
    /// Overrides for field collection kinds, by field name.
    #[serde(default)]
    pub collection_kinds: BTreeMap<String, String>,
    /// `"auto"` (the default) derives the context from the unit; an object
    /// with `values`/`collections` adds extra constant symbols to it.
    #[serde(default)]
    pub context: ContextConfig,
    /// Predicate strings to use as state predicates; defaults to all of them.
    #[serde(default)]
    pub state_predicates: Option<Vec<String>>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// `"projection"` (default) or `"full-trace"`.
    #[serde(default)]
    pub blocking: BlockingConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default = "default_true")]
    pub prune_unreachable: bool,
    /// Path to a catalog extension file with additional operation semantics.
    #[serde(default)]
    pub catalog_extension: Option<String>,
    /// `"auto"` (default) or `"sequential"`.
    #[serde(default)]
    pub parallelism: ParallelismConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ContextConfig {
    Keyword(String),
    Extra {
        #[serde(default)]
        values: Vec<String>,
        #[serde(default)]
        collections: Vec<String>,
    },
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig::Keyword("auto".to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SolverConfig {
    Keyword(String),
    External {
        command: String,
        #[serde(default)]
        args: Vec<String>,
    },
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::Keyword("embedded".to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct BlockingConfig(String);

impl Default for BlockingConfig {
    fn default() -> Self {
        BlockingConfig("projection".to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ParallelismConfig(String);

impl Default for ParallelismConfig {
    fn default() -> Self {
        ParallelismConfig("auto".to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dot")]
    pub dot: String,
    #[serde(default = "default_json")]
    pub json: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dot: default_dot(),
            json: default_json(),
        }
    }
}

/// A fully resolved run: the parsed unit, the catalog, analyzer options, and
/// absolute output paths.
#[derive(Debug)]
pub struct Plan {
    pub unit: ApiUnitModel,
    pub catalog: Catalog,
    pub options: AnalyzerOptions,
    pub source_path: PathBuf,
    pub dot_path: PathBuf,
    pub json_path: PathBuf,
}

/// Loads and validates a config file, returning the resolved plan.
pub fn load_plan(path: &Path) -> crate::Result<Plan> {
    let display = path.display().to_string();
    let invalid = |msg: String| {
        crate::Error::Config(ConfigError::Invalid {
            path: display.clone(),
            msg,
        })
    };
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: display.clone(),
        file: display.clone(),
        source,
    })?;
    let config: ConfigFile =
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: display.clone(),
            source,
        })?;
    let base = path.parent().unwrap_or(Path::new("."));

    if config.sources.len() != 1 {
        return Err(invalid(format!(
            "expected exactly one entry in `sources`, found {}",
            config.sources.len()
        )));
    }
    let source_path = base.join(&config.sources[0]);
    let source_text =
        std::fs::read_to_string(&source_path).map_err(|source| ConfigError::Io {
            path: display.clone(),
            file: source_path.display().to_string(),
            source,
        })?;
    let mut unit = parse_source(&source_text)?;

    for (field, kind) in &config.collection_kinds {
        let decl = unit
            .fields
            .iter_mut()
            .find(|f| &f.name == field)
            .ok_or_else(|| {
                invalid(format!("collection_kinds names unknown field `{field}`"))
            })?;
        decl.kind = kind.clone();
    }

    let mut catalog = Catalog::builtin();
    if let Some(ext) = &config.catalog_extension {
        catalog.load_extension(&base.join(ext))?;
    }

    let state_predicates = match &config.state_predicates {
        None => None,
        Some(texts) => {
            let mut set = BTreeSet::new();
            for text in texts {
                let pred = Predicate::parse(text)
                    .map_err(|e| invalid(format!("state_predicates: {e}")))?;
                set.insert(pred);
            }
            Some(set)
        }
    };

    let (extra_values, extra_collections) = match &config.context {
        ContextConfig::Keyword(word) if word == "auto" => (Vec::new(), Vec::new()),
        ContextConfig::Keyword(word) => {
            return Err(invalid(format!(
                "context: expected \"auto\" or an object, found \"{word}\""
            )))
        }
        ContextConfig::Extra {
            values,
            collections,
        } => (values.clone(), collections.clone()),
    };

    let solver = match &config.solver {
        SolverConfig::Keyword(word) if word == "embedded" => SolverChoice::Embedded,
        SolverConfig::Keyword(word) => {
            return Err(invalid(format!(
                "solver: expected \"embedded\" or {{\"command\": ...}}, found \"{word}\""
            )))
        }
        SolverConfig::External { command, args } => SolverChoice::External {
            command: command.clone(),
            args: args.clone(),
        },
    };

    let blocking = match config.blocking.0.as_str() {
        "projection" => BlockingMode::Projection,
        "full-trace" => BlockingMode::FullTrace,
        other => {
            return Err(invalid(format!(
                "blocking: expected \"projection\" or \"full-trace\", found \"{other}\""
            )))
        }
    };

    let parallelism = match config.parallelism.0.as_str() {
        "auto" => Parallelism::Auto,
        "sequential" => Parallelism::Sequential,
        other => {
            return Err(invalid(format!(
                "parallelism: expected \"auto\" or \"sequential\", found \"{other}\""
            )))
        }
    };

    Ok(Plan {
        unit,
        catalog,
        options: AnalyzerOptions {
            state_predicates,
            extra_values,
            extra_collections,
            solver,
            blocking,
            parallelism,
            prune_unreachable: config.prune_unreachable,
        },
        source_path,
        dot_path: base.join(&config.output.dot),
        json_path: base.join(&config.output.json),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    const V1: &str = r#"
class ExampleImpl implements ExampleAPI {
    private Set<String> idSet;

    public ExampleImpl() {
        idSet = new HashSet<>();
    }

    public void add(String id) {
        idSet.add(id);
    }
}
"#;

    fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn minimal_config_resolves_defaults() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Impl.java"), V1).unwrap();
        let config = write_config(
            dir.path(),
            "run.json",
            r#"{"sources": ["Impl.java"]}"#,
        );
        let plan = load_plan(&config).unwrap();
        assert_eq!(plan.unit.name, "ExampleImpl");
        assert_eq!(plan.options.state_predicates, None);
        assert_eq!(plan.options.solver, SolverChoice::Embedded);
        assert_eq!(plan.options.blocking, BlockingMode::Projection);
        assert!(plan.options.prune_unreachable);
        assert_eq!(plan.dot_path, dir.path().join("model.dot"));
        assert_eq!(plan.json_path, dir.path().join("model.json"));
    }

    #[test]
    fn unknown_keys_are_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Impl.java"), V1).unwrap();
        let config = write_config(
            dir.path(),
            "run.json",
            r#"{"sources": ["Impl.java"], "solvr": "embedded"}"#,
        );
        let err = load_plan(&config).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("solvr"), "got: {text}");
        assert!(matches!(err, crate::Error::Config(ConfigError::Parse { .. })));
    }

    #[test]
    fn full_config_round_trips_choices() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Impl.java"), V1).unwrap();
        let config = write_config(
            dir.path(),
            "run.json",
            r#"{
  "sources": ["Impl.java"],
  "collection_kinds": {"idSet": "TreeSet"},
  "context": {"values": ["spare"]},
  "state_predicates": ["empty(idSet)", "exc"],
  "solver": {"command": "minisat", "args": ["-verb=0"]},
  "blocking": "full-trace",
  "output": {"dot": "out/x.dot", "json": "out/x.json"},
  "prune_unreachable": false,
  "parallelism": "sequential"
}"#,
        );
        let plan = load_plan(&config).unwrap();
        assert_eq!(plan.unit.fields[0].kind, "TreeSet");
        assert_eq!(plan.options.extra_values, ["spare"]);
        assert_eq!(
            plan.options.state_predicates,
            Some([Predicate::empty("idSet"), Predicate::Exc].into())
        );
        assert_eq!(
            plan.options.solver,
            SolverChoice::External {
                command: "minisat".into(),
                args: vec!["-verb=0".into()]
            }
        );
        assert_eq!(plan.options.blocking, BlockingMode::FullTrace);
        assert!(!plan.options.prune_unreachable);
        assert_eq!(plan.options.parallelism, Parallelism::Sequential);
        assert_eq!(plan.dot_path, dir.path().join("out/x.dot"));
    }

    #[test]
    fn bad_enum_values_are_rejected_with_field_names() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Impl.java"), V1).unwrap();
        for (body, needle) in [
            (r#"{"sources": ["Impl.java"], "blocking": "both"}"#, "blocking"),
            (r#"{"sources": ["Impl.java"], "parallelism": "superfast"}"#, "parallelism"),
            (r#"{"sources": ["Impl.java"], "solver": "external"}"#, "solver"),
            (r#"{"sources": []}"#, "sources"),
            (
                r#"{"sources": ["Impl.java"], "collection_kinds": {"ghost": "TreeSet"}}"#,
                "ghost",
            ),
            (
                r#"{"sources": ["Impl.java"], "state_predicates": ["empt(idSet)"]}"#,
                "state_predicates",
            ),
        ] {
            let config = write_config(dir.path(), "run.json", body);
            let err = load_plan(&config).unwrap_err();
            assert!(
                err.to_string().contains(needle),
                "expected `{needle}` in: {err}"
            );
        }
    }

    #[test]
    fn missing_source_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(
            dir.path(),
            "run.json",
            r#"{"sources": ["Nope.java"]}"#,
        );
        let err = load_plan(&config).unwrap_err();
        assert!(err.to_string().contains("Nope.java"));
    }
}
