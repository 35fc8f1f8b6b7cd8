//! Smallest solutions of totient inequalities `φ(Mn + b) < φ(Mn)`, proven
//! without factoring `n`.
//!
//! The pipeline has two halves. [`search`] finds the least `z ≡ b (mod M)`
//! whose φ-ratio drops below a threshold, with a ledger of every smaller
//! candidate. [`verify`] then shows `φ(z) < φ(z − b)` by peeling small primes
//! off `n = (z − b)/M` with batched gcds and bounding the rest by its size
//! ([`bounds`]). The result is a [`certificate::Certificate`] that anyone
//! can replay.

pub mod bounds;
pub mod certificate;
pub mod error;
pub mod oracle;
pub mod pipeline;
pub mod prime_table;
pub mod product;
pub mod ratio;
pub mod search;
pub mod verify;

pub use bounds::CoprimalityContext;
pub use certificate::{
    check_certificate, check_certificate_text, Certificate, CertificateChecker, CheckOutcome,
    Outcome,
};
pub use error::{Error, Result};
pub use prime_table::PrimeTable;
pub use ratio::ExactRatio;
pub use search::{enumerate_candidates, find_smallest_z, SearchProblem, SearchResult};
pub use verify::{extract_known_factors, phi_exact, verify_inequality, FactorizationSketch};
