//! Exact construction and certification of closed embeddings of the
//! projective line into smooth projective toric 3-folds.

pub mod curve;
pub mod embed;
pub mod error;
pub mod fan;
pub mod fixtures;
pub mod intersect;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod verify;

pub use curve::{CDivisor, CurvePoint, FunctionField, PointValue, ProjectiveLine, RationalFunction};
pub use embed::{ChartMap, ConditionReport, EmbeddingData};
pub use error::{Error, Result};
pub use fan::{Fan, Ray, ValidationReport, Wall};
pub use intersect::{TDivisor, XiMethod, XiVector};
pub use rational::Rational;
pub use verify::{Certificate, VerifyOptions, Witness};
