//! Symbolic verification of Weyl group symmetries, Lax gauge transformations
//! and time evolutions for the q-Painleve equations of types D5, E6 and E7.
//!
//! Transformations act on expressions by simultaneous substitution. A word
//! `a b` acts as `a(b(x))`: the rightmost letter is applied first.

pub mod error;
pub mod eval;
pub mod evolution;
pub mod expr;
pub mod field;
pub mod identity;
pub mod lax;
pub mod parse;
pub mod ratfun;
pub mod report;
pub mod symbol;
pub mod weyl;

pub use error::{EvalError, ExprError, IdentityError, LaxError, OrbitError, WeylError};
pub use eval::{eval, FieldValue, Program, Valuation};
pub use expr::{Expr, Node};
pub use identity::{check_pairs, identities_equal, ConstraintRelation, IdentityConfig, Verdict, Witness};
pub use parse::parse;
pub use symbol::Symbol;
pub use report::{CheckRecord, Report, Status};
pub use weyl::{compose, family, make_family, word_to_transform, FamilyDescriptor, FamilyName, Transformation, WeylWord};
pub use lax::{apply_gauge, build_l1, equations_equivalent, substitute_params, GaugeSpec, LinearQDE};
pub use evolution::{orbit, orbit_step, time_evolution, Direction, Orbit, OrbitState};
pub use evolution::{apply_at, time_evolution_from, verify_theorem_i, verify_theorem_i_for, verify_theorem_ii, verify_theorem_ii_for, printed_xi_factorization, xi_factorization, Stepper};
