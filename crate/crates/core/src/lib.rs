//! Greedy algorithms for metric Steiner forest, with the machinery needed to
//! check them: exact brute-force oracles, executable certificates for the
//! constructive analyses, cost-sharing schemes with strictness verifiers, and
//! a boosted-sampling two-stage stochastic solver.
//!
//! All arithmetic is exact rational arithmetic ([`rational::Rational`]); ties
//! between merge candidates are semantically load-bearing and are broken by
//! explicit deterministic rules, so repeated runs are byte-identical.

pub mod certify;
pub mod clustering;
pub mod costshare;
pub mod exact;
pub mod forest;
pub mod greedy;
pub mod instance;
pub mod primal_dual;
pub mod rational;
pub mod stochastic;
pub mod trace;

pub use instance::Instance;
pub use rational::Rational;
pub use trace::RunTrace;
