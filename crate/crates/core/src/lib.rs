//! One-standard-deviation concentration probabilities
//! `P{|X - E[X]| <= sd(X)}` (closed) and `P{|X - E[X]| < sd(X)}` (open) for
//! the geometric, symmetric geometric, Poisson and symmetric Poisson
//! (equal-rate Skellam) families, with certified error bounds, breakpoint
//! scans, Berry–Esseen bands and end-to-end infimum certificates.

pub mod certify;
pub mod concentration;
pub mod distributions;
pub mod error;
pub mod fmt;
pub mod oracle;
pub mod search;

pub use concentration::{concentration, Mode, PinnedParam, SupportRange};
pub use distributions::{BoundedValue, Family, FamilyKind, MomentSet, Prob};
pub use error::{Error, Result};
