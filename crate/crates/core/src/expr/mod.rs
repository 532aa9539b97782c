//! The conjecture language: summands, closed forms and congruence right-hand
//! sides, their canonical forms and printers, and the registry of records.
//!
//! Grammar (shared by all three expression families):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary | power)*        juxtaposition multiplies
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?                      right associative
//! primary := integer | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Summand functions: `C(n,r)`, `H(n)`, `H(n,m)`, `AltH(2n,m)` and registered
//! sequence names; `k` is the summation index, `p` the prime. Closed forms add
//! `pi G K L phi zeta(n) beta(n) Gamma(q) log(x) sqrt(x) sum(summand, start)`.
//! Congruence right-hand sides use `kron(a,p) kron(p,n) q(a) B(p-3) E(p-3)
//! B(p-2,1/3) E(p-3,1/4) H(p-1,m)` and `a^((p-1)/2)`-style powers.

pub mod ast;
mod closed;
mod congruence;
mod general;
mod registry;
mod summand;

pub use ast::{parse_ast, Ast};
pub use closed::ClosedFormExpr;
pub use congruence::{pow_exponent, CAtom, CMono, CongruenceRHS};
pub use general::{derive_general_conjecture, ramanujan_series_record, Family};
pub use registry::{
    load_registry, parse_registry, shipped_registry, ConjectureRecord, Instance, Kind, Limit, PBound,
    Pred, PrimeFilter, RecurrenceSpec, Registry, RegistryError, Rhs, Role,
};
pub use summand::{eval_summand_rational, HAtom, Lin, Poly, SummandExpr, Term};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("malformed expression: {0}")]
    Shape(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Parse a summand with no sequence names in scope.
pub fn parse_summand(s: &str) -> Result<SummandExpr, ExprError> {
    SummandExpr::parse(s, &[])
}

pub fn parse_closed_form(s: &str) -> Result<ClosedFormExpr, ExprError> {
    ClosedFormExpr::parse(s, &[])
}

pub fn parse_congruence_rhs(s: &str) -> Result<CongruenceRHS, ExprError> {
    CongruenceRHS::parse(s)
}
