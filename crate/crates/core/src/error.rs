use thiserror::Error;

use crate::expr::Expr;
use crate::symbol::Symbol;

#[derive(Debug, Clone, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("division by a literal zero")]
    ZeroDenominator,
    #[error("invalid symbol name `{0}`")]
    InvalidSymbolName(String),
}

#[derive(Debug, Clone, Error)]
pub enum EvalError {
    #[error("division by zero in denominator `{denominator}`")]
    DivisionByZero { denominator: Expr },
    #[error("symbol `{0}` has no value")]
    Unbound(Symbol),
}

#[derive(Debug, Clone, Error)]
pub enum IdentityError {
    #[error("invalid identity-test configuration: {0}")]
    Config(String),
    #[error("every one of {attempts} sampled points hit a zero denominator")]
    ResamplingExhausted { attempts: usize },
    #[error("exact normalization found a nonzero residual that random evaluation missed")]
    ExactDisagrees,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Error)]
pub enum WeylError {
    #[error("unknown family `{0}` (expected D5, E6 or E7)")]
    UnknownFamily(String),
    #[error("unknown generator `{name}` for family {family}")]
    UnknownGenerator { family: String, name: String },
    #[error("malformed word at byte {offset}: {message}")]
    Word { offset: usize, message: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

#[derive(Debug, Clone, Error)]
pub enum LaxError {
    #[error("transformation moves the shift variable `{0}`")]
    MovesShiftVariable(Symbol),
    #[error("unknown gauge claim `{0}`")]
    UnknownClaim(String),
    #[error("degenerate comparison: every coefficient of an equation is identically zero")]
    Degenerate,
    #[error("equations use different shift variables ({0} vs {1})")]
    ShiftMismatch(Symbol, Symbol),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

#[derive(Debug, Clone, Error)]
pub enum OrbitError {
    #[error("pole at step {step}: denominator `{denominator}` vanishes")]
    Pole { step: i64, denominator: Expr },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
