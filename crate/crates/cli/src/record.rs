//! Run configurations and result records, with their JSON and CSV encodings.

use std::path::PathBuf;

use multisum::asymptotics::{ContractionReport, GammaBoundReport, InclusionCodomain, InclusionReport, SlopeFit};
use multisum::multilinear::OperatorDocument;
use multisum::stable::MomentConstant;
use multisum::summing::SearchResult;
use multisum::{Field, NormEstimate};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AlphaKind {
    /// Every coefficient multiplied by 1.
    Ones,
    /// One coefficient negated (see `--flip-index`).
    Flip,
    /// Independent random signs drawn from the run seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub family_size: usize,
    pub restarts: usize,
    pub rounds: usize,
}

/// Everything a command needs besides the shared Monte Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Params {
    CConst {
        s: f64,
        q: f64,
        field: Field,
    },
    Pi {
        operator_path: Option<PathBuf>,
        operator: OperatorDocument,
        p: f64,
        #[serde(with = "multisum::serde_exponent")]
        r: f64,
        field: Field,
        /// `None` skips the definition-based search.
        search: Option<SearchParams>,
    },
    LimitOrder {
        m: usize,
        #[serde(with = "multisum::serde_exponent")]
        r: f64,
        q: f64,
        n_list: Vec<usize>,
        bootstrap: usize,
        tolerance: f64,
        table: Option<PathBuf>,
    },
    Contraction {
        operator_path: Option<PathBuf>,
        operator: OperatorDocument,
        p: f64,
        #[serde(with = "multisum::serde_exponent")]
        r: f64,
        alpha: AlphaKind,
        flip_index: usize,
    },
    Inclusion {
        m: usize,
        q: f64,
        #[serde(with = "multisum::serde_exponent")]
        r: f64,
        n_list: Vec<usize>,
        p1: f64,
        p2: f64,
        codomain: InclusionCodomain,
    },
    GammaBound {
        operator_path: Option<PathBuf>,
        operator: OperatorDocument,
        p: f64,
        field: Field,
        sup_restarts: usize,
    },
}

impl Params {
    pub fn name(&self) -> &'static str {
        match self {
            Params::CConst { .. } => "c-const",
            Params::Pi { .. } => "pi",
            Params::LimitOrder { .. } => "limit-order",
            Params::Contraction { .. } => "contraction",
            Params::Inclusion { .. } => "inclusion",
            Params::GammaBound { .. } => "gamma-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: Params,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub blocks: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Worker threads; never changes the numbers.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantOutput {
    pub constant: MomentConstant,
    pub relative_disagreement: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiOutput {
    pub estimate: NormEstimate,
    pub basis_lower_bound: f64,
    pub search: Option<SearchResult>,
    /// Why the search did not run, when it did not.
    pub search_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "output", rename_all = "kebab-case")]
pub enum Outputs {
    Constant(ConstantOutput),
    Pi(PiOutput),
    LimitOrder(SlopeFit),
    Contraction(ContractionReport),
    Inclusion(InclusionReport),
    GammaBound(GammaBoundReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub version: String,
    pub config: RunConfig,
    pub outputs: Outputs,
    pub duration_seconds: f64,
}

impl ResultRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// `key,value` rows, one per leaf of the JSON tree.
    pub fn to_csv(&self) -> String {
        let value = serde_json::to_value(self).expect("records serialize");
        let mut rows = Vec::new();
        flatten("", &value, &mut rows);
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            out.push_str(&csv_field(&k));
            out.push(',');
            out.push_str(&csv_field(&v));
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Floats at 17 significant digits, so every value parses back to the
/// same bits.
pub fn format_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format!("{:.16e}", n.as_f64().unwrap())
    } else {
        n.to_string()
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => out.push((prefix.to_string(), format_number(n))),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
