//! Exact combinatorics of derivatives, Whittaker dimensions and wavefront
//! sets for representations of Kazhdan-Patterson and Savin covers of `GL_r`
//! in the tame case.
//!
//! Every quantity is computed in exact integer arithmetic. Divisions that
//! must be exact return [`Error::Integrity`] when they are not.

pub mod arith;
pub mod covers;
pub mod derivatives;
pub mod error;
pub mod langlands;
pub mod partitions;
pub mod segments;
pub mod session;
pub mod sweep;

pub use covers::{CoverSpec, Family};
pub use derivatives::{DerivativeResult, FormalSum, Tag, WhDim};
pub use error::{Error, Result};
pub use langlands::{BvCheck, ParameterOrbit};
pub use partitions::{Composition, Partition};
pub use segments::{CuspidalDatum, Multisegment, Segment};
pub use session::{ParseError, Session};
