//! Magnitude comparison, multiseries expansion and limits at a point.
//!
//! Expressions in one variable are expanded as truncated multiseries
//! ([`GNum`]) over a scale of iterated logarithms, powers and exponentials.
//! On top of that sit [`relate::compare`], limits and a checker for
//! derivation chains.

pub mod assume;
pub mod coeff;
pub mod error;
pub mod expr;
pub mod gnum;
pub mod limit;
pub mod point;
pub mod relate;
pub mod scale;

pub use assume::Assumptions;
pub use coeff::{Coeff, Sign, Q};
pub use error::{Error, ParseError, Result};
pub use expr::{Context, Expr, Format, Parsed};
pub use gnum::{ExtendedReal, Form, GNum};
pub use limit::{limit, limit_lhopital, newton_sqrt2_demo, LimitResult};
pub use point::{Point, Side};
pub use relate::{apply_rel_op, compare, relation_holds, verify_chain, Order, RelOp, Relation, RelationResult};
pub use scale::{Element, Monomial, ScaleBasis};
