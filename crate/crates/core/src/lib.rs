//! Relationship explanations between two entities of a labeled knowledge graph.
//!
//! Given a [`KnowledgeBase`](kb::KnowledgeBase) and a target pair, the crate
//! enumerates every minimal explanation pattern up to a size limit together
//! with its complete instance set ([`enumerate`]), scores explanations with
//! structural, aggregate and distributional measures ([`measures`]) and
//! returns the top-k ([`rank`]).
//!
//! ```
//! use rex_core::kb::KnowledgeBase;
//! use rex_core::enumerate::{general_enum, EnumOptions, EnumStrategy};
//!
//! let kb = KnowledgeBase::parse("A\tstarring\tM\tD\nB\tstarring\tM\tD\nA\tspouse\tB\tU\n").unwrap();
//! let (a, b) = (kb.resolve("A").unwrap(), kb.resolve("B").unwrap());
//! let out = general_enum(&kb, a, b, 5, EnumStrategy::default(), &EnumOptions::default()).unwrap();
//! assert_eq!(out.explanations.len(), 2);
//! ```

pub mod bench;
pub mod doc;
pub mod enumerate;
pub mod error;
pub mod gen;
pub mod kb;
pub mod measures;
pub mod pathenum;
pub mod pattern;
pub mod rank;

pub use error::{Error, Result};
