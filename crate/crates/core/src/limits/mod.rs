//! Local structure of the line graph and its block Galton-Watson limit.

pub mod ball;
pub mod canon;
pub mod graph;
pub mod gw;
pub mod lwc;

pub use ball::{bipartite_ball, line_graph_ball};
pub use canon::{ball_signature, canonical_signature, BallSignature};
pub use graph::{phi, BipartiteRootedGraph, RootedGraph, Side};
pub use gw::{
    mass_transport_check, root_spectral_moments, sample_dgw, sample_poisson_dtree, survival_fraction, BlockLaw,
    GwConfig, TransportFn,
};
pub use lwc::{empirical_ball_distribution, tv_distance, BallDistribution, BallOptions, BallSource};
