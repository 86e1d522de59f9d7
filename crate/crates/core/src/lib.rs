//! Bid-ask market models with one risky asset on finite event trees.
//!
//! The crate computes actual bid/ask envelopes, runs self-financing ledgers
//! under proportional transaction costs, decides numéraire-free and
//! prospective strict no-arbitrage by linear programming, builds consistent
//! price systems, and checks the continuous-time constructions (excursions,
//! dormant wealth, admissibility bounds, Doob decompositions) on sampled
//! paths. Tree algorithms are generic over [`Scalar`]; use the `Exact*`
//! aliases for certified rational arithmetic.

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod acceptance;
pub mod arbitrage;
pub mod corpus;
pub mod cps;
pub mod doob;
pub mod envelopes;
pub mod ledger;
pub mod lp;
pub mod market_io;
pub mod oracle;
pub mod pathlab;
pub mod scalar;
pub mod tree;

pub use arbitrage::{check_na_nf, check_na_ps, max_position_lp, position_bound, ArbitrageVerdict, Condition, Extended};
pub use cps::{duality_check, find_cps, frictionless_roundtrip, verify_cps, CpsCertificate, CpsOptions, CpsOutcome};
pub use envelopes::{compute_envelopes, envelope_crossing, predictable_envelopes, EnvelopePair};
pub use ledger::{is_admissible, portfolio_values, wealth_ledger, Execution, Strategy};
pub use scalar::{Rational, Scalar};
pub use tree::{build_tree, enumerate_paths, validate_market, EventTree, MarketModel, NodeId, Role, TreeProcess, TreeSpec};

pub type ExactTree = EventTree<Rational>;
pub type ExactProcess = TreeProcess<Rational>;
pub type ExactMarket = MarketModel<Rational>;
pub type ExactEnvelopes = EnvelopePair<Rational>;
pub type FloatTree = EventTree<f64>;
pub type FloatProcess = TreeProcess<f64>;
pub type FloatMarket = MarketModel<f64>;
pub type FloatEnvelopes = EnvelopePair<f64>;
