//! Exact, horizon-bounded checks of transitivity-type properties for
//! non-autonomous discrete dynamical systems.

pub mod chain;
pub mod classifier;
pub mod error;
pub mod gallery;
pub mod hitting;
pub mod map;
pub mod properties;
pub mod rational;
pub mod space;
pub mod system;
pub mod verdict;

pub use error::{Error, Result};
pub use gallery::{build_example, run_example, search_counterexample, verify_theorem, ExampleId, TheoremId};
pub use hitting::{delta_intersection, hitting_set, multi_hitting, orbit, HittingSet, Orbit};
pub use map::MapSpec;
pub use properties::{check, CheckSpec, Notion};
pub use rational::Q;
pub use space::{basis, eps_dense, Cylinder, OpenSet, Point, ShiftPoint, Space};
pub use system::{BlockRule, Derivation, Dynamics, FactorMap, MapSequence, OpenBox, System};
pub use verdict::{Certificate, Status, Verdict};
