//! Exact tilting and cluster-tilting combinatorics for hereditary categories.
//!
//! Two backends share one set of algorithms:
//!
//! - [`coh::Coh`]: coherent sheaves on a weighted projective line, restricted
//!   to line bundles and torsion sheaves, with Hom/Ext dimensions computed
//!   from the graded coordinate ring and Serre duality;
//! - [`dynkin::Dynkin`]: the cluster category of a Dynkin quiver, via
//!   positive roots and the Euler form.
//!
//! On top of them, [`rigid`] builds tilting objects and mutation,
//! [`graph`] explores exchange graphs and produces reachability
//! certificates, and [`seeds`] runs Fomin-Zelevinsky seed mutation with
//! exact Laurent polynomial arithmetic.

pub mod coh;
pub mod dynkin;
pub mod graph;
pub mod lattice;
pub mod laurent;
pub mod oracle;
pub mod reach;
pub mod rigid;
pub mod seeds;
pub mod verify;

pub use coh::{Coh, CohError, SheafObject, TubeId};
pub use dynkin::{AcyclicQuiver, Dynkin, DynkinError, DynkinObject};
pub use graph::{ExchangeGraph, GraphError};
pub use lattice::{GenusClass, GenusKind, LElement, LatticeError, WeightType};
pub use laurent::LaurentPoly;
pub use reach::ReachCertificate;
pub use rigid::{Backend, RigidError, RigidSet, SearchWindow};
pub use seeds::{ExchangeMatrix, Seed, SeedError};
