//! Flat `[section]` / `key = value` configuration for the benchmark command.
//! The format is deliberately tiny: full- or end-of-line `#` comments,
//! sections named after models, and scalar values. Parsing is strict —
//! unknown sections, unknown keys, duplicates, and malformed values are all
//! errors that name the offending line.

use std::collections::BTreeSet;
use std::fmt;

/// A hyperparameter that is either searched automatically or pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Choice<T> {
    Auto,
    Fixed(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub plsda_components: Choice<usize>,
    pub plsda_autoscale: bool,
    pub knn_k: usize,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub svm_learning_rate: Option<f64>,
    pub slda_gamma: Choice<f64>,
    pub dlda_m: Option<usize>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            plsda_components: Choice::Auto,
            plsda_autoscale: false,
            knn_k: 3,
            svm_c: 1.0,
            svm_epochs: 2000,
            svm_learning_rate: None,
            slda_gamma: Choice::Fixed(0.5),
            dlda_m: None,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

const SECTIONS: [&str; 5] = ["plsda", "knn", "svm", "slda", "dlda"];

pub fn parse(text: &str) -> Result<BenchmarkConfig, ConfigError> {
    let mut config = BenchmarkConfig::default();
    let mut section: Option<String> = None;
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let err = |message: String| ConfigError {
            line: line_no,
            message,
        };
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| err(format!("unterminated section header {line:?}")))?
                .trim()
                .to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(err(format!(
                    "unknown section [{name}]; expected one of {}",
                    SECTIONS.map(|s| format!("[{s}]")).join(", ")
                )));
            }
            section = Some(name);
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
        let key = key.trim().to_string();
        let value = value.trim();
        if value.is_empty() {
            return Err(err(format!("key {key:?} has an empty value")));
        }
        let section_name = section
            .clone()
            .ok_or_else(|| err(format!("key {key:?} appears before any [section]")))?;
        if !seen.insert((section_name.clone(), key.clone())) {
            return Err(err(format!(
                "duplicate key {key:?} in section [{section_name}]"
            )));
        }

        let parse_usize = |what: &str| {
            value.parse::<usize>().map_err(|_| {
                err(format!("{what} must be a positive integer, got {value:?}"))
            })
        };
        let parse_f64 = |what: &str| {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("{what} must be a number, got {value:?}")))
        };
        let parse_bool = |what: &str| match value {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(err(format!("{what} must be true or false, got {value:?}"))),
        };

        match (section_name.as_str(), key.as_str()) {
            ("plsda", "components") => {
                config.plsda_components = if value == "auto" {
                    Choice::Auto
                } else {
                    let p = parse_usize("components")?;
                    if p == 0 {
                        return Err(err("components must be at least 1".into()));
                    }
                    Choice::Fixed(p)
                };
            }
            ("plsda", "autoscale") => config.plsda_autoscale = parse_bool("autoscale")?,
            ("knn", "k") => {
                let k = parse_usize("k")?;
                if k == 0 {
                    return Err(err("k must be at least 1".into()));
                }
                config.knn_k = k;
            }
            ("svm", "c") => config.svm_c = parse_f64("c")?,
            ("svm", "epochs") => config.svm_epochs = parse_usize("epochs")?,
            ("svm", "learning_rate") => {
                config.svm_learning_rate = Some(parse_f64("learning_rate")?)
            }
            ("slda", "gamma") => {
                config.slda_gamma = if value == "auto" {
                    Choice::Auto
                } else {
                    Choice::Fixed(parse_f64("gamma")?)
                };
            }
            ("dlda", "m") => {
                config.dlda_m = if value == "auto" {
                    None
                } else {
                    Some(parse_usize("m")?)
                };
            }
            (s, k) => {
                return Err(err(format!("unknown key {k:?} in section [{s}]")));
            }
        }
    }
    Ok(config)
}
