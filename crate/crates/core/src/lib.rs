//! Numerical laboratory for the quasihyperbolic metric on bounded planar domains.

pub mod conditions;
pub mod curve;
pub mod domain;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod hyperbolicity;
pub mod jsonf;
pub mod reach;
pub mod report;
pub mod sampling;
pub mod theorems;

pub use curve::{Arc, ConeReport};
pub use domain::{gallery, DomainKind, PlanarDomain};
pub use engine::{build_graph, graph_for, shortest_path, GeodesicResult, MetricKind, QhGraph};
pub use error::{LabError, Result};
pub use geometry::Point2;
pub use grid::{discretize, GridDomain};
