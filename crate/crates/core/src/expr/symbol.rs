use std::fmt;

use serde::{Deserialize, Serialize};

/// Dimensions of one symbol table: `n` states, `r` controls, `k` arbitrary
/// functions with jets of order `0..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub m: usize,
}

impl Dims {
    pub fn new(n: usize, r: usize, k: usize, m: usize) -> Self {
        Dims { n, r, k, m }
    }

    /// A context without jet variables.
    pub fn plain(n: usize, r: usize) -> Self {
        Dims { n, r, k: 0, m: 0 }
    }

    /// Whether `sym` is a valid symbol of this table. Jet orders may reach
    /// `m + 1`, the order introduced by one total derivative.
    pub fn contains(&self, sym: Symbol) -> bool {
        match sym {
            Symbol::Time | Symbol::Costate0 => true,
            Symbol::State(i) | Symbol::Costate(i) => (1..=self.n).contains(&i),
            Symbol::Control(j) | Symbol::ControlDot(j) => (1..=self.r).contains(&j),
            Symbol::Jet { func, order } => (1..=self.k).contains(&func) && order <= self.m + 1,
        }
    }
}

/// A scalar variable. All indices are 1-based, as written in expressions.
/// Serialized as its display name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Symbol {
    Time,
    State(usize),
    Control(usize),
    /// Time derivative of a control; produced only by total differentiation.
    ControlDot(usize),
    /// The `order`-th derivative of the arbitrary function `p_func`.
    Jet { func: usize, order: usize },
    Costate0,
    Costate(usize),
}

/// Broad category of a symbol, used to restrict which symbols an input may
/// mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Time,
    State,
    Control,
    ControlDot,
    Jet,
    Costate,
}

impl Symbol {
    pub fn jet(func: usize, order: usize) -> Self {
        Symbol::Jet { func, order }
    }

    pub fn kind(self) -> SymbolKind {
        match self {
            Symbol::Time => SymbolKind::Time,
            Symbol::State(_) => SymbolKind::State,
            Symbol::Control(_) => SymbolKind::Control,
            Symbol::ControlDot(_) => SymbolKind::ControlDot,
            Symbol::Jet { .. } => SymbolKind::Jet,
            Symbol::Costate0 | Symbol::Costate(_) => SymbolKind::Costate,
        }
    }

    pub fn is_jet(self) -> bool {
        matches!(self, Symbol::Jet { .. })
    }

    /// Inverse of `Display`, without range checks.
    pub fn from_name(name: &str) -> Option<Symbol> {
        if let Some((func, rest)) = name.strip_prefix('p').and_then(|r| r.split_once("^(")) {
            let order = rest.strip_suffix(')')?.parse().ok()?;
            return Some(Symbol::jet(func.parse().ok()?, order));
        }
        super::parse::symbol_of(name)
    }
}

impl From<Symbol> for String {
    fn from(s: Symbol) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Symbol {
    type Error = String;

    fn try_from(name: String) -> Result<Symbol, String> {
        Symbol::from_name(&name).ok_or_else(|| format!("unknown symbol `{name}`"))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Symbol::Time => write!(f, "t"),
            Symbol::State(i) => write!(f, "x{i}"),
            Symbol::Control(j) => write!(f, "u{j}"),
            Symbol::ControlDot(j) => write!(f, "du{j}"),
            Symbol::Jet { func, order: 0 } => write!(f, "p{func}"),
            Symbol::Jet { func, order: 1 } => write!(f, "dp{func}"),
            Symbol::Jet { func, order: 2 } => write!(f, "ddp{func}"),
            Symbol::Jet { func, order } => write!(f, "p{func}^({order})"),
            Symbol::Costate0 => write!(f, "psi0"),
            Symbol::Costate(i) => write!(f, "psi{i}"),
        }
    }
}

/// The set of symbol kinds an input expression is allowed to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scope {
    pub time: bool,
    pub state: bool,
    pub control: bool,
    pub jets: bool,
    pub costates: bool,
}

impl Scope {
    /// `t`, `x`, `u`: cost and dynamics of a problem.
    pub const PROBLEM: Scope = Scope { time: true, state: true, control: true, jets: false, costates: false };
    /// `t`, `x`, `u` and jets: components of a transformation group.
    pub const SYMMETRY: Scope = Scope { time: true, state: true, control: true, jets: true, costates: false };
    /// `t`, `x`, `psi0`, `psi`: feedback control laws.
    pub const CONTROL_LAW: Scope = Scope { time: true, state: true, control: false, jets: false, costates: true };
    /// Everything a user may write; `du` symbols are never accepted.
    pub const ALL: Scope = Scope { time: true, state: true, control: true, jets: true, costates: true };

    pub fn allows(&self, kind: SymbolKind) -> bool {
        match kind {
            SymbolKind::Time => self.time,
            SymbolKind::State => self.state,
            SymbolKind::Control => self.control,
            SymbolKind::Jet => self.jets,
            SymbolKind::Costate => self.costates,
            SymbolKind::ControlDot => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        let all = [
            Symbol::Time,
            Symbol::State(3),
            Symbol::Control(1),
            Symbol::ControlDot(2),
            Symbol::jet(1, 0),
            Symbol::jet(2, 1),
            Symbol::jet(1, 2),
            Symbol::jet(4, 7),
            Symbol::Costate0,
            Symbol::Costate(2),
        ];
        for s in all {
            assert_eq!(Symbol::from_name(&s.to_string()), Some(s));
        }
        assert_eq!(Symbol::from_name("q1"), None);
        assert_eq!(Symbol::from_name("p1^(x)"), None);
    }

    #[test]
    fn jet_orders_may_exceed_m_by_one() {
        let d = Dims::new(1, 1, 1, 2);
        assert!(d.contains(Symbol::jet(1, 3)));
        assert!(!d.contains(Symbol::jet(1, 4)));
        assert!(!d.contains(Symbol::jet(2, 0)));
        assert!(!Dims::plain(1, 1).contains(Symbol::State(0)));
    }
}
