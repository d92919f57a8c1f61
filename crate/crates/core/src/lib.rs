//! Verification and exploration of population protocols through stage graphs.
//!
//! * [`model`]: protocols, configurations, the random scheduler.
//! * [`io`]: JSON formats and the bundled example protocols.
//! * [`linear`]: exact-rational constraint reasoning, semiflows, root stages.
//! * [`oracle`]: brute-force ground truth at fixed population sizes.
//! * [`stage`]: stage graphs and their independent checker.
//! * [`synthesis`]: automatic stage-graph construction.
//! * [`report`]: JSON documents for verification results.
//! * [`speed`]: speed classes and empirical phase lengths.
//! * [`session`]: steerable simulation inside the stage graphs.
//! * [`api`]: HTTP service over all of the above.

pub mod api;
pub mod io;
pub mod linear;
pub mod model;
pub mod oracle;
pub mod report;
pub mod session;
pub mod speed;
pub mod stage;
pub mod synthesis;

pub use model::{Configuration, Consensus, Protocol};
