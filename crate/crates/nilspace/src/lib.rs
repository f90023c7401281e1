//! Exact-arithmetic engine for cube structures on filtered groups,
//! nilmanifolds, and finite cubespaces, together with Gowers uniformity
//! norms on Z/NZ.
//!
//! The crate is organized bottom-up:
//!
//! * [`cube`] — discrete-cube bookkeeping (vertices, faces, morphisms),
//! * [`group`] — filtered groups with exact element arithmetic,
//! * [`hk`] — cube groups over a filtered group: factorization, membership,
//!   corner completion,
//! * [`nil`] — cubes on quotients G/Γ (torus and Heisenberg examples),
//! * [`space`] — the finite-cubespace engine: certification, canonical
//!   quotients, structure groups, fibrations,
//! * [`poly`] — polynomial sequences into filtered groups,
//! * [`gowers`] — uniformity norms, inner products, and nilsequences.
//!
//! All algebra is exact (big rationals); floating point appears only in the
//! analytic layer where complex exponentials are unavoidable.

pub mod cli;
pub mod cube;
pub mod error;
pub mod gowers;
pub mod group;
pub mod hk;
pub mod nil;
pub mod poly;
pub mod report;
pub mod sample;
pub mod space;

pub use error::Error;
