//! Exact Novikov-ring arithmetic, Floer-type chain complexes over group rings,
//! their Reidemeister torsion and zeta functions, and the handle-slide /
//! birth-death moves that relate them.

pub mod complex;
pub mod cyclotomic;
pub mod descriptor;
pub mod engine;
pub mod error;
pub mod fields;
pub mod group;
pub mod laurent;
pub mod novikov;
pub mod random;
pub mod scalar;
pub mod snf;
pub mod zeta;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use complex::{GradedComplex, Grading, TorsionValue, UnitWitness};
pub use engine::{EngineOptions, FloerState, Move, MoveKind};
pub use error::{Error, Result};
pub use fields::{character_split, CharacterIndex, CharacterSplit, FieldSeries};
pub use group::{GradingGroup, GroupElement, WeightHom};
pub use laurent::{FieldCtx, FieldElement};
pub use novikov::{Degree, Novikov, SeriesBase};
pub use scalar::{Coefficient, Cutoff, Weight};

pub type IntSeries = Novikov<BigInt>;
pub type RatSeries = Novikov<BigRational>;
