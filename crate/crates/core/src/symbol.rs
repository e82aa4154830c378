//! Interned symbol names.
//!
//! The reserved universe is fixed at startup: `q`, `nu1`..`nu8`, `kappa1`,
//! `kappa2`, `f`, `g`, `z`, `u`, `delta`, `c`, `s`. Additional names can be
//! declared with [`Symbol::declare`]. Generator names (`s0`.., `pi1`, `pi2`,
//! `pi`) are reserved for Weyl words and are never valid symbols.

use std::fmt;
use std::sync::{LazyLock, RwLock};

use crate::error::ExprError;

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u16);

const RESERVED: [&str; 18] = [
    "q", "nu1", "nu2", "nu3", "nu4", "nu5", "nu6", "nu7", "nu8", "kappa1", "kappa2", "f", "g", "z",
    "u", "delta", "c", "s",
];

static REGISTRY: LazyLock<RwLock<Vec<String>>> =
    LazyLock::new(|| RwLock::new(RESERVED.iter().map(|s| s.to_string()).collect()));

impl Symbol {
    pub const Q: Symbol = Symbol(0);
    pub const KAPPA1: Symbol = Symbol(9);
    pub const KAPPA2: Symbol = Symbol(10);
    pub const F: Symbol = Symbol(11);
    pub const G: Symbol = Symbol(12);
    pub const Z: Symbol = Symbol(13);
    pub const U: Symbol = Symbol(14);
    pub const DELTA: Symbol = Symbol(15);
    pub const C: Symbol = Symbol(16);
    pub const S: Symbol = Symbol(17);

    /// `nu(i)` for `i` in `1..=8`.
    pub fn nu(i: usize) -> Symbol {
        assert!((1..=8).contains(&i), "nu index out of range: {i}");
        Symbol(i as u16)
    }

    /// The index `i` if this symbol is `nu_i`.
    pub fn nu_index(self) -> Option<usize> {
        (1..=8).contains(&self.0).then_some(self.0 as usize)
    }

    /// The parameters and dependent variables every family acts on:
    /// q, nu1..nu8, kappa1, kappa2, f, g.
    pub fn family_symbols() -> Vec<Symbol> {
        (0..=12).map(Symbol).collect()
    }

    /// Parameters only (q, nu1..nu8, kappa1, kappa2).
    pub fn parameters() -> Vec<Symbol> {
        (0..=10).map(Symbol).collect()
    }

    pub fn is_parameter(self) -> bool {
        self.0 <= 10
    }

    pub fn lookup(name: &str) -> Option<Symbol> {
        let reg = REGISTRY.read().expect("symbol registry poisoned");
        reg.iter().position(|n| n == name).map(|i| Symbol(i as u16))
    }

    /// Declares a fresh symbol, or returns the existing one with that name.
    pub fn declare(name: &str) -> Result<Symbol, ExprError> {
        if !is_identifier(name) || is_word_letter(name) {
            return Err(ExprError::InvalidSymbolName(name.to_string()));
        }
        if let Some(s) = Symbol::lookup(name) {
            return Ok(s);
        }
        let mut reg = REGISTRY.write().expect("symbol registry poisoned");
        if let Some(i) = reg.iter().position(|n| n == name) {
            return Ok(Symbol(i as u16));
        }
        if reg.len() >= u16::MAX as usize {
            return Err(ExprError::InvalidSymbolName(name.to_string()));
        }
        reg.push(name.to_string());
        Ok(Symbol((reg.len() - 1) as u16))
    }

    pub fn name(self) -> String {
        REGISTRY.read().expect("symbol registry poisoned")[self.0 as usize].clone()
    }

    pub(crate) fn from_index(i: usize) -> Symbol {
        Symbol(i as u16)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn latex(self) -> String {
        let name = self.name();
        if let Some(i) = name.strip_prefix("nu") {
            if !i.is_empty() && i.chars().all(|c| c.is_ascii_digit()) {
                return format!("\\nu_{{{i}}}");
            }
        }
        if let Some(i) = name.strip_prefix("kappa") {
            if !i.is_empty() && i.chars().all(|c| c.is_ascii_digit()) {
                return format!("\\kappa_{{{i}}}");
            }
        }
        match name.as_str() {
            "delta" => "\\delta".to_string(),
            _ if name.len() == 1 => name,
            _ => format!("\\mathrm{{{name}}}"),
        }
    }
}

/// Names used as Weyl-word letters: `s0`..`s9`, `pi`, `pi1`, `pi2`.
pub fn is_word_letter(name: &str) -> bool {
    if matches!(name, "pi" | "pi1" | "pi2") {
        return true;
    }
    match name.strip_prefix('s') {
        Some(rest) => !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()),
        None => false,
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
