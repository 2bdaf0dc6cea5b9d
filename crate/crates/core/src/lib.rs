//! Rooted prize-collecting Steiner tree: moat growing, Steiner subroutines,
//! the iterative best-of-three solver and a certification layer.

pub mod certify;
pub mod cli;
pub mod graph;
pub mod instance;
pub mod iterate;
pub mod moat;
pub mod rational;
pub mod steiner;

pub use instance::{PcstInstance, Solution, Tree};
pub use iterate::{ipcst, IterOptions, IterTrace};
pub use moat::{run_gw, MoatRun};
pub use steiner::{steiner_tree, SteinerKind, SteinerSolver};
