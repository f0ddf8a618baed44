//! Continuum side: reduced ICRTs from Poisson line-breaking, Poisson cuts
//! on them, and the discrete distance bundles that converge to the
//! continuum cut tree.

mod cuts;
mod discrete;
mod gamma;
mod realtree;
mod theta;

pub use cuts::{
    first_separation, genealogy_matrix, genealogy_on, on_path, restricted_cut_measure, simulate_cuts, CutAtom,
    CutMeasure, CutPointProcess, Genealogy, TreePoint,
};
pub use discrete::{one_cut_distance_matrix, timed_cut_one, CutDistances, TimedOneCut};
pub use gamma::{gamma_walk, gamma_walk_with, GammaWalk};
pub use realtree::{line_break, BranchPoint, CutSource, LineBreakTrace, RealTree, RtVertex, VertexKind};
pub use theta::{build_pn, eta1_cdf, min_feasible_n, survival_eta1, ThetaParam, THETA_RESCALE_TOL};
