//! Edge-perspective ensembles of variable and check node types.
//!
//! An [`Ensemble`] is what the JSON description holds; [`Ensemble::validate`]
//! checks the standing hypotheses (edge fractions, full-rank generators,
//! `d_min >= 2`) and caches the per-type code properties in a
//! [`ValidatedEnsemble`], which is what every analysis takes.

use std::fmt;
use std::sync::OnceLock;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::binmat::BinaryMatrix;
use crate::codeprops::{CodeError, ComponentCode, DeltaParams};
use crate::exit::ExitCoefficients;

/// Tolerance on `Σ edge_fraction = 1` per side.
pub const FRACTION_SUM_TOLERANCE: f64 = 1e-12;
/// Longest repetition / SPC node accepted.
pub const MAX_CLOSED_FORM_LENGTH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Variable,
    Check,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Variable => "variable",
            Side::Check => "check",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownKind,
    MalformedMatrix,
}

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("{}: {message} at line {line} column {column}", match .kind {
        ParseErrorKind::Syntax => "syntax error",
        ParseErrorKind::UnknownKind => "unknown node kind",
        ParseErrorKind::MalformedMatrix => "malformed matrix literal",
    })]
    Parse {
        kind: ParseErrorKind,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{side} node {index}: {message}")]
    Structure { side: Side, index: usize, message: String },
    #[error("{side} nodes: edge fractions sum to {sum}, expected 1")]
    FractionSum { side: Side, sum: f64 },
    #[error("{side} node {index}: edge fraction {value} outside (0, 1]")]
    FractionRange { side: Side, index: usize, value: f64 },
    #[error("{side} nodes: no node types given")]
    EmptySide { side: Side },
    #[error("{side} node {index} ({description}): minimum distance {d_min} < 2")]
    MinDistance {
        side: Side,
        index: usize,
        description: String,
        d_min: usize,
    },
    #[error("{side} node {index}: {source}")]
    InvalidCode {
        side: Side,
        index: usize,
        #[source]
        source: CodeError,
    },
    #[error("{side} node {index}: length {length} outside [2, {max}]", max = MAX_CLOSED_FORM_LENGTH)]
    BadLength { side: Side, index: usize, length: usize },
    #[error("{side} node {index}: {kind} nodes are not allowed on the {side} side")]
    WrongSide { side: Side, index: usize, kind: &'static str },
    #[error("{side} node {index} duplicates node {first}")]
    Duplicate { side: Side, index: usize, first: usize },
}

/// Component code of a node type as declared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// `(j, 1)` repetition variable node.
    Repetition(usize),
    /// `(j, j-1)` single parity-check node.
    Spc(usize),
    /// Any other generator matrix (rows = information bits).
    Generic(BinaryMatrix),
}

impl NodeKind {
    fn name(&self) -> &'static str {
        match self {
            NodeKind::Repetition(_) => "repetition",
            NodeKind::Spc(_) => "spc",
            NodeKind::Generic(_) => "generic",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            NodeKind::Repetition(j) => format!("repetition({j})"),
            NodeKind::Spc(j) => format!("spc({j})"),
            NodeKind::Generic(g) => format!("generic({}x{})", g.rows(), g.cols()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeType {
    pub kind: NodeKind,
    /// Fraction of the graph edges attached to nodes of this type.
    pub edge_fraction: f64,
}

impl NodeType {
    pub fn repetition(length: usize, edge_fraction: f64) -> Self {
        Self { kind: NodeKind::Repetition(length), edge_fraction }
    }

    pub fn spc(length: usize, edge_fraction: f64) -> Self {
        Self { kind: NodeKind::Spc(length), edge_fraction }
    }

    pub fn generic(generator: BinaryMatrix, edge_fraction: f64) -> Self {
        Self { kind: NodeKind::Generic(generator), edge_fraction }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub variable_nodes: Vec<NodeType>,
    pub check_nodes: Vec<NodeType>,
}

/// How a validated type enters the EXIT and stability formulas.
#[derive(Debug, Clone)]
pub enum NodeModel {
    Repetition { length: usize },
    Spc { length: usize },
    Generic(Box<GenericNode>),
}

/// Cached properties of a generic component code.
#[derive(Debug, Clone)]
pub struct GenericNode {
    pub code: ComponentCode,
    pub d_min: usize,
    pub delta: DeltaParams,
    /// False when the code is a repetition code (variable side) or an SPC
    /// code (check side), whatever its declaration.
    pub generalized: bool,
    side: Side,
    coefficients: OnceLock<ExitCoefficients>,
}

impl GenericNode {
    /// EXIT polynomial coefficients, enumerated on first use.
    ///
    /// Variable nodes get the split table (`2^(n+k)` ranks), check nodes
    /// only the plain one (`2^n`).
    pub fn coefficients(&self) -> &ExitCoefficients {
        self.coefficients.get_or_init(|| match self.side {
            Side::Variable => ExitCoefficients::for_variable(&self.code),
            Side::Check => ExitCoefficients::for_check(&self.code),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ValidatedType {
    pub edge_fraction: f64,
    pub model: NodeModel,
}

impl ValidatedType {
    pub fn n(&self) -> usize {
        match &self.model {
            NodeModel::Repetition { length } | NodeModel::Spc { length } => *length,
            NodeModel::Generic(g) => g.code.n(),
        }
    }

    pub fn k(&self) -> usize {
        match &self.model {
            NodeModel::Repetition { .. } => 1,
            NodeModel::Spc { length } => length - 1,
            NodeModel::Generic(g) => g.code.k(),
        }
    }

    pub fn d_min(&self) -> usize {
        match &self.model {
            NodeModel::Repetition { length } => *length,
            NodeModel::Spc { .. } => 2,
            NodeModel::Generic(g) => g.d_min,
        }
    }

    /// Neither a repetition (variable side) nor an SPC code (check side).
    pub fn is_generalized(&self) -> bool {
        match &self.model {
            NodeModel::Generic(g) => g.generalized,
            _ => false,
        }
    }

    pub fn generic(&self) -> Option<&GenericNode> {
        match &self.model {
            NodeModel::Generic(g) => Some(g),
            _ => None,
        }
    }
}

/// An ensemble that passed [`Ensemble::validate`], with per-type caches.
#[derive(Debug, Clone)]
pub struct ValidatedEnsemble {
    ensemble: Ensemble,
    variable: Vec<ValidatedType>,
    check: Vec<ValidatedType>,
}

impl ValidatedEnsemble {
    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn variable_types(&self) -> &[ValidatedType] {
        &self.variable
    }

    pub fn check_types(&self) -> &[ValidatedType] {
        &self.check
    }

    /// `R = 1 - [Σ ρ_i (n_i - k_i) / n_i] / [Σ λ_i k_i / n_i]`.
    pub fn design_rate(&self) -> f64 {
        let per_edge = |types: &[ValidatedType], f: fn(&ValidatedType) -> usize| -> f64 {
            types
                .iter()
                .map(|t| t.edge_fraction * f(t) as f64 / t.n() as f64)
                .sum()
        };
        let checks = per_edge(&self.check, |t| t.n() - t.k());
        let bits = per_edge(&self.variable, |t| t.k());
        1.0 - checks / bits
    }

    /// Plain LDPC: only repetition variables and SPC checks, as declared.
    pub fn is_plain_ldpc(&self) -> bool {
        self.variable.iter().all(|t| matches!(t.model, NodeModel::Repetition { .. }))
            && self.check.iter().all(|t| matches!(t.model, NodeModel::Spc { .. }))
    }
}

fn validate_side(side: Side, nodes: &[NodeType]) -> Result<Vec<ValidatedType>, EnsembleError> {
    if nodes.is_empty() {
        return Err(EnsembleError::EmptySide { side });
    }
    let mut out = Vec::with_capacity(nodes.len());
    for (index, node) in nodes.iter().enumerate() {
        let f = node.edge_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(EnsembleError::FractionRange { side, index, value: f });
        }
        if let Some(first) = nodes[..index].iter().position(|o| o.kind == node.kind) {
            return Err(EnsembleError::Duplicate { side, index, first });
        }
        let model = match (&node.kind, side) {
            (NodeKind::Repetition(_), Side::Check) | (NodeKind::Spc(_), Side::Variable) => {
                return Err(EnsembleError::WrongSide { side, index, kind: node.kind.name() });
            }
            (NodeKind::Repetition(length), _) | (NodeKind::Spc(length), _)
                if !(2..=MAX_CLOSED_FORM_LENGTH).contains(length) =>
            {
                return Err(EnsembleError::BadLength { side, index, length: *length });
            }
            (NodeKind::Repetition(length), _) => NodeModel::Repetition { length: *length },
            (NodeKind::Spc(length), _) => NodeModel::Spc { length: *length },
            (NodeKind::Generic(gen), _) => {
                let code = ComponentCode::new(gen.clone())
                    .map_err(|source| EnsembleError::InvalidCode { side, index, source })?;
                let d_min = code.min_distance();
                if d_min < 2 {
                    return Err(EnsembleError::MinDistance {
                        side,
                        index,
                        description: node.kind.describe(),
                        d_min,
                    });
                }
                let generalized = match side {
                    Side::Variable => !code.is_repetition(),
                    Side::Check => !code.is_single_parity_check(),
                };
                let delta = code.delta_params();
                NodeModel::Generic(Box::new(GenericNode {
                    code,
                    d_min,
                    delta,
                    generalized,
                    side,
                    coefficients: OnceLock::new(),
                }))
            }
        };
        out.push(ValidatedType { edge_fraction: f, model });
    }
    let sum: f64 = nodes.iter().map(|n| n.edge_fraction).sum();
    if (sum - 1.0).abs() > FRACTION_SUM_TOLERANCE {
        return Err(EnsembleError::FractionSum { side, sum });
    }
    Ok(out)
}

impl Ensemble {
    /// Checks the ensemble and computes the per-type caches.
    pub fn validate(self) -> Result<ValidatedEnsemble, EnsembleError> {
        let variable = validate_side(Side::Variable, &self.variable_nodes)?;
        let check = validate_side(Side::Check, &self.check_nodes)?;
        Ok(ValidatedEnsemble { ensemble: self, variable, check })
    }

    /// Parses the JSON description. Validation is a separate step.
    pub fn from_json(text: &str) -> Result<Self, EnsembleError> {
        let doc: EnsembleDoc = serde_json::from_str(text).map_err(parse_error)?;
        Ok(Self {
            variable_nodes: convert_side(Side::Variable, doc.variable_nodes)?,
            check_nodes: convert_side(Side::Check, doc.check_nodes)?,
        })
    }

    /// JSON description: 2-space indentation, LF line endings, trailing newline.
    pub fn to_json(&self) -> String {
        let side = |nodes: &[NodeType]| -> Vec<NodeDoc> {
            nodes
                .iter()
                .map(|n| {
                    let (kind, length, generator) = match &n.kind {
                        NodeKind::Repetition(j) => (KindTag::Repetition, Some(*j), None),
                        NodeKind::Spc(j) => (KindTag::Spc, Some(*j), None),
                        NodeKind::Generic(g) => (KindTag::Generic, None, Some(MatrixLiteral(g.clone()))),
                    };
                    NodeDoc { kind, length, generator, edge_fraction: n.edge_fraction }
                })
                .collect()
        };
        let doc = EnsembleDoc {
            variable_nodes: side(&self.variable_nodes),
            check_nodes: side(&self.check_nodes),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("ensemble documents always serialize");
        out.push('\n');
        out
    }
}

const UNKNOWN_KIND: &str = "unknown node kind";
const BAD_MATRIX: &str = "malformed matrix literal";

fn parse_error(err: serde_json::Error) -> EnsembleError {
    let full = err.to_string();
    // serde_json appends " at line L column C"; keep only the message.
    let message = match full.rfind(" at line ") {
        Some(pos) => full[..pos].to_string(),
        None => full,
    };
    let (kind, message) = if let Some(rest) = message.strip_prefix(UNKNOWN_KIND) {
        (ParseErrorKind::UnknownKind, rest.trim_start().to_string())
    } else if let Some(rest) = message.strip_prefix(BAD_MATRIX) {
        (ParseErrorKind::MalformedMatrix, rest.trim_start_matches(':').trim_start().to_string())
    } else {
        (ParseErrorKind::Syntax, message)
    };
    EnsembleError::Parse { kind, line: err.line(), column: err.column(), message }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KindTag {
    Repetition,
    Spc,
    Generic,
}

impl Serialize for KindTag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            KindTag::Repetition => "repetition",
            KindTag::Spc => "spc",
            KindTag::Generic => "generic",
        })
    }
}

impl<'de> Deserialize<'de> for KindTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "repetition" => Ok(KindTag::Repetition),
            "spc" => Ok(KindTag::Spc),
            "generic" => Ok(KindTag::Generic),
            other => Err(de::Error::custom(format!(
                "{UNKNOWN_KIND} `{other}`, expected repetition, spc or generic"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
struct MatrixLiteral(BinaryMatrix);

impl Serialize for MatrixLiteral {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_text())
    }
}

impl<'de> Deserialize<'de> for MatrixLiteral {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse()
            .map(MatrixLiteral)
            .map_err(|e| de::Error::custom(format!("{BAD_MATRIX}: {e}")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<MatrixLiteral>,
    edge_fraction: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleDoc {
    variable_nodes: Vec<NodeDoc>,
    check_nodes: Vec<NodeDoc>,
}

fn convert_side(side: Side, docs: Vec<NodeDoc>) -> Result<Vec<NodeType>, EnsembleError> {
    docs.into_iter()
        .enumerate()
        .map(|(index, doc)| {
            let structure = |message: &str| EnsembleError::Structure {
                side,
                index,
                message: message.to_string(),
            };
            let kind = match (doc.kind, doc.length, doc.generator) {
                (KindTag::Repetition, Some(j), None) => NodeKind::Repetition(j),
                (KindTag::Spc, Some(j), None) => NodeKind::Spc(j),
                (KindTag::Generic, None, Some(g)) => NodeKind::Generic(g.0),
                (KindTag::Generic, _, None) => return Err(structure("generic node needs a `generator`")),
                (KindTag::Generic, Some(_), _) => return Err(structure("generic node takes no `length`")),
                (_, None, _) => return Err(structure("repetition/spc node needs a `length`")),
                (_, _, Some(_)) => return Err(structure("repetition/spc node takes no `generator`")),
            };
            Ok(NodeType { kind, edge_fraction: doc.edge_fraction })
        })
        .collect()
}
