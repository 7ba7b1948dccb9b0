//! Energy-efficient downlink design for a single dielectric waveguide with
//! pinching antennas serving NOMA users.
//!
//! The crate is layered bottom-up:
//!
//! - [`geometry`]: layout, channel coefficients and SIC ordering
//! - [`link`]: per-user rates, power consumption and EE
//! - [`power_alloc`]: closed-form Dinkelbach power allocation for a fixed activation set
//! - [`matching`]: swap-matching search over activation sets
//! - [`benchmarks`]: conventional, min-power, nearest and exhaustive references
//! - [`experiment`]: seeded Monte-Carlo sweeps and CSV/JSON output
//! - [`validation`]: reference oracles and end-to-end checks
//!
//! ```
//! use pinch_ee::{experiment::generate_scenario, matching::run_matching, ScenarioConfig};
//! use rand::SeedableRng;
//!
//! let config = ScenarioConfig { num_positions: 10, ..ScenarioConfig::default() };
//! let scn = generate_scenario(&config, 7).unwrap();
//! let run = run_matching(&scn.channel, &config, &mut rand_chacha::ChaCha8Rng::seed_from_u64(7)).unwrap();
//! assert!(run.state.utility >= run.initial_utility);
//! ```

// `!(a <= b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod config;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod link;
pub mod matching;
pub mod power_alloc;
pub mod validation;

pub use benchmarks::SchemeId;
pub use config::{ConfigFile, ScenarioConfig};
pub use error::{Error, Result};
pub use geometry::{ChannelMatrix, Layout};
pub use link::{EEOutcome, PowerAllocation, Radiators};
pub use power_alloc::{InnerRule, InnerSolution};
