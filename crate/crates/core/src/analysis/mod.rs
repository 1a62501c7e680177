//! Curvature, symmetry and foliation checks on immersed surfaces.

pub mod curvature;
pub mod foliation;
pub mod symmetry;

pub use curvature::{abs_gauss_curvature, general_curvature, verify_curvature_bound, CurvatureReport, PolarGrid};
pub use foliation::{foliation_summary, FoliationSlice, FoliationSummary, LevelSetSampler, SliceKind};
pub use symmetry::{check_symmetries, line_colinearity, planar_coplanarity, Symmetry, SymmetryReport};
