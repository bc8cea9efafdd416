//! Torus graphs, spectral sweep cuts, flow certificates and random-shift
//! spines.

pub mod cheeger;
pub mod continuous;
pub mod error;
pub mod flow_cert;
pub mod spectral;
pub mod spine;
pub mod stats;
pub mod torus_graph;
pub mod verify;

pub use cheeger::{BoundaryKind, CutCertificate, Sweep, SweepRow};
pub use error::{Error, Result};
pub use spectral::{SpectralConstants, TensorProfile};
pub use spine::{EdgeSpine, RunStats, ShiftTrace, VertexSpine};
pub use torus_graph::{Displacement, Power, TorusGraphSpec, TorusVertex, VertexSet};
pub use verify::{EdgeSet, SpineKind, WindingWitness};
