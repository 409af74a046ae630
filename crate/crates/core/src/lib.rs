//! Soft Mapper: a stochastic relaxation of the Mapper graph, and stochastic
//! subgradient descent of persistence-based risks over parameterized filters.
//!
//! The pipeline for a single Mapper graph is
//!
//! 1. evaluate a filter family on a [`PointCloud`] ([`filter`]),
//! 2. build an interval cover and a cover assignment scheme, then draw a
//!    binary assignment matrix from it ([`cover`]),
//! 3. cluster every latent cover element and take the nerve ([`mapper`]),
//! 4. filter the graph by mean node values and compute its persistence
//!    diagram, loss and subgradient ([`persistence`]).
//!
//! [`optimize`] wraps steps 1–4 in a Monte-Carlo estimate of the expected
//! loss and runs subgradient descent on the filter parameters.

pub mod cloud;
pub mod cluster;
pub mod cover;
pub mod error;
pub mod filter;
pub mod mapper;
pub mod optimize;
pub mod persistence;
pub mod union_find;

pub use cloud::PointCloud;
pub use cluster::Clusterer;
pub use cover::{AssignmentScheme, CoverAssignment, IntervalCover, SchemeKind};
pub use error::{Error, Result};
pub use filter::{FilterFamily, FilterParams, FilterValues, FixedFilter, LinearFilter};
pub use mapper::{MapperGraph, MapperNode};
pub use optimize::{OptimConfig, SchemeChoice, StepSchedule, Trace};
pub use persistence::{Diagram, DiagramPoint, FilteredGraph, PersistenceMode, PointClass};
