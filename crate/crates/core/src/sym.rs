//! Alphabet atoms and 2-track letters.

use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

/// Name of a string variable. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(Arc<str>);

impl VarName {
    pub fn new(name: &str) -> Self {
        VarName(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Names produced by the solver itself contain a character that the
    /// input grammars never accept in identifiers.
    pub fn is_reserved(&self) -> bool {
        self.0.chars().any(|c| matches!(c, '\'' | '!' | '~'))
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> Self {
        VarName::new(s)
    }
}

impl From<String> for VarName {
    fn from(s: String) -> Self {
        VarName(Arc::from(s.as_str()))
    }
}

/// One symbol of a track. The derived order is the canonical one:
/// constants by character, then variables by name, then `Pad < Deli < LenSep`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Const(char),
    Var(VarName),
    Pad,
    Deli,
    LenSep,
}

impl Sym {
    pub fn var(name: &str) -> Self {
        Sym::Var(VarName::new(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Sym::Var(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Sym::Const(_))
    }

    /// Constants and variables; the symbols allowed inside word terms.
    pub fn is_term_symbol(&self) -> bool {
        matches!(self, Sym::Const(_) | Sym::Var(_))
    }

    pub fn as_var(&self) -> Option<&VarName> {
        match self {
            Sym::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Const(c) => write!(f, "{c}"),
            Sym::Var(v) => write!(f, "{v}"),
            Sym::Pad => f.write_str("⋄"),
            Sym::Deli => f.write_str("#"),
            Sym::LenSep => f.write_str("ℓ"),
        }
    }
}

/// A letter of a configuration word.
///
/// `Pair` is a 2-track letter `(top/bottom)`. `Delim` separates the
/// equations of a system and `LenSep` separates the equation part from the
/// length part. `Bits` is one column of the LSBF length tracks: bit `k` of
/// `value` belongs to the `k`-th length-tracked variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrackSym {
    Pair(Sym, Sym),
    Delim,
    LenSep,
    Bits { width: u8, value: u32 },
}

impl TrackSym {
    pub fn pair(top: Sym, bottom: Sym) -> Self {
        TrackSym::Pair(top, bottom)
    }

    pub fn pad() -> Self {
        TrackSym::Pair(Sym::Pad, Sym::Pad)
    }

    pub fn is_pad(&self) -> bool {
        matches!(self, TrackSym::Pair(Sym::Pad, Sym::Pad))
    }

    pub fn bit(&self, k: usize) -> Option<bool> {
        match self {
            TrackSym::Bits { width, value } if k < *width as usize => Some(value >> k & 1 == 1),
            _ => None,
        }
    }
}

impl fmt::Debug for TrackSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for TrackSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackSym::Pair(a, b) => write!(f, "({a}/{b})"),
            TrackSym::Delim => f.write_str("(#/#)"),
            TrackSym::LenSep => f.write_str("ℓ"),
            TrackSym::Bits { width, value } => {
                f.write_str("[")?;
                for k in 0..*width {
                    write!(f, "{}", value >> k & 1)?;
                }
                f.write_str("]")
            }
        }
    }
}
