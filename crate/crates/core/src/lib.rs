//! Analysis of GLDPC and doubly-generalized LDPC ensembles on the binary
//! erasure channel.
//!
//! * [`binmat`]: dense GF(2) matrices and rank.
//! * [`codeprops`]: information functions, minimum distance and rank
//!   deficiencies of component codes.
//! * [`exit`]: exact EXIT functions of component codes and of the variable
//!   and check node decoders.
//! * [`ensemble`]: edge-perspective ensembles, validation and the JSON format.
//! * [`stability`]: derivatives at `p = 0`, stability bound and inequality,
//!   derivative matching.
//! * [`de`]: density evolution and threshold search.
//! * [`cli`]: the `dgldpc` command-line front end.

pub mod binmat;
pub mod cli;
pub mod codeprops;
pub mod de;
pub mod ensemble;
pub mod exit;
pub mod format;
pub mod stability;
mod subsets;

pub use binmat::{BinaryMatrix, MatrixError};
pub use codeprops::{CodeError, ComponentCode, DeltaParams, InfoFunctionTable, SplitInfoFunctionTable};
pub use ensemble::{Ensemble, EnsembleError, NodeKind, NodeType, ValidatedEnsemble};
pub use subsets::binomial;
