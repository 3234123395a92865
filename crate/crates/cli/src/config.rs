//! Declarative run configuration: one `[output]` section plus exactly one
//! command section. Command-line flags override file values field by field.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

macro_rules! merge_fields {
    ($cli:expr, $file:expr; $($field:ident),+ $(,)?) => {{
        let mut out = $cli;
        $( out.$field = out.$field.take().or($file.$field); )+
        out
    }};
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// Statistic to estimate: mean, var, or cov.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(skip)]
    pub kind: Option<String>,
    /// Functional, e.g. max, qbeta, logs, p:1, pp:1,2, x:1, sqnorm.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    /// Second functional (cov only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional2: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_dim: Option<usize>,
    /// Off-diagonal correlations, 1-based: "1,2=0.5;1,3=0.2".
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corr: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl EstimateConfig {
    pub fn merge(self, file: Self) -> Self {
        merge_fields!(self, file; kind, functional, functional2, n_dim, corr, beta, samples, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Check: cov-equality, vardiff, i-constant, oddeven, or integrals.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(skip)]
    pub id: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_dim: Option<usize>,
    /// First functional (cov-equality).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Second functional (cov-equality).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Off-diagonal correlations of the base spec, 1-based.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corr: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl VerifyConfig {
    pub fn merge(self, file: Self) -> Self {
        merge_fields!(self, file; id, n_dim, f, g, corr, rho, theta, beta, samples, nodes, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct TheoremConfig {
    /// Theorem: thm-iid, thm-iid-bivariate, thm-rho, lemma-a1, reduced-max-cov,
    /// slepian, harge, decreasing, or suite.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(skip)]
    pub id: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c11: Option<f64>,
    /// Coordinate pair, 1-based: "1,2".
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Also evaluate the beta-limit route of the variance comparison.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_limit: Option<bool>,
    /// Base-spec correlation for slepian's X arm, 1-based list.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_x: Option<f64>,
    /// Y-arm correlation for slepian (must be <= rho_x entrywise).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_y: Option<f64>,
    /// Functional for harge, e.g. qbeta, sqnorm, max.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Weight for harge: uniform, bump:1,0,0, or sigmoid:0.5,0.5,0.5.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
}

impl TheoremConfig {
    pub fn merge(self, file: Self) -> Self {
        merge_fields!(self, file; id, n_dim, beta, rho, theta, c11, pair, samples, seed, n_max,
                      beta_limit, rho_x, rho_y, f, g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    /// Table: var-max.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(skip)]
    pub id: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

impl TableConfig {
    pub fn merge(self, file: Self) -> Self {
        merge_fields!(self, file; id, n_min, n_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Coordinate pair, 1-based: "1,2".
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_per_eval: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Where the per-iteration log goes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_log: Option<String>,
}

impl SearchConfig {
    pub fn merge(self, file: Self) -> Self {
        merge_fields!(self, file; n_dim, beta, pair, budget, n_per_eval, seed, search_log)
    }
}

/// The full declarative run description; round-trips losslessly through TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "is_default_output")]
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
}

fn is_default_output(o: &OutputConfig) -> bool {
    o == &OutputConfig::default()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_is_lossless() {
        let config = RunConfig {
            output: OutputConfig {
                format: Some(OutputFormat::Json),
                path: Some("out.json".into()),
                threads: Some(2),
            },
            theorem: Some(TheoremConfig {
                id: Some("thm-iid".into()),
                n_dim: Some(3),
                beta: Some(1.0),
                pair: Some("1,2".into()),
                samples: Some(1_000_000),
                seed: Some(7),
                ..Default::default()
            }),
            ..Default::default()
        };
        let text = config.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[theorem]\nid = \"thm-iid\"\nbogus_key = 1\n";
        assert!(RunConfig::from_toml(text).is_err());
        let text = "[output]\nformat = \"csv\"\nwhatever = true\n";
        assert!(RunConfig::from_toml(text).is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let cli = TheoremConfig {
            samples: Some(500),
            ..Default::default()
        };
        let file = TheoremConfig {
            id: Some("thm-rho".into()),
            samples: Some(1_000_000),
            rho: Some(0.5),
            ..Default::default()
        };
        let merged = cli.merge(file);
        assert_eq!(merged.samples, Some(500));
        assert_eq!(merged.rho, Some(0.5));
        assert_eq!(merged.id.as_deref(), Some("thm-rho"));
    }
}
