//! The PDE hyperparameter genome and the `DE/<left>[-to-<right>]/<dn>/<cs>`
//! naming grammar.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which population member anchors one side of the base vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseVector {
    Rand = 1,
    Best = 2,
    PBest = 3,
    Current = 4,
}

impl BaseVector {
    pub const ALL: [BaseVector; 4] = [
        BaseVector::Rand,
        BaseVector::Best,
        BaseVector::PBest,
        BaseVector::Current,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(BaseVector::Rand),
            2 => Ok(BaseVector::Best),
            3 => Ok(BaseVector::PBest),
            4 => Ok(BaseVector::Current),
            _ => Err(Error::Domain {
                field: "base vector",
                value: code.to_string(),
                domain: "{1, 2, 3, 4}",
            }),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            BaseVector::Rand => "rand",
            BaseVector::Best => "best",
            BaseVector::PBest => "pbest",
            BaseVector::Current => "current",
        }
    }

    fn from_token(token: &str) -> Option<Self> {
        BaseVector::ALL.into_iter().find(|b| b.token() == token)
    }
}

/// Crossover scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossoverScheme {
    Binomial = 1,
    Exponential = 2,
    Arithmetic = 3,
}

impl CrossoverScheme {
    pub const ALL: [CrossoverScheme; 3] = [
        CrossoverScheme::Binomial,
        CrossoverScheme::Exponential,
        CrossoverScheme::Arithmetic,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(CrossoverScheme::Binomial),
            2 => Ok(CrossoverScheme::Exponential),
            3 => Ok(CrossoverScheme::Arithmetic),
            _ => Err(Error::Domain {
                field: "crossover scheme",
                value: code.to_string(),
                domain: "{1, 2, 3}",
            }),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            CrossoverScheme::Binomial => "bin",
            CrossoverScheme::Exponential => "exp",
            CrossoverScheme::Arithmetic => "arith",
        }
    }

    fn from_token(token: &str) -> Option<Self> {
        CrossoverScheme::ALL.into_iter().find(|c| c.token() == token)
    }
}

pub const MAX_DIFFERENCES: u8 = 4;

/// The categorical part of a PDE configuration: `(bl, br, dn, cs)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Strategy {
    pub left: BaseVector,
    pub right: BaseVector,
    differences: u8,
    pub crossover: CrossoverScheme,
}

impl Strategy {
    pub fn new(
        left: BaseVector,
        right: BaseVector,
        differences: u8,
        crossover: CrossoverScheme,
    ) -> Result<Self> {
        if !(1..=MAX_DIFFERENCES).contains(&differences) {
            return Err(Error::Domain {
                field: "difference count",
                value: differences.to_string(),
                domain: "{1, 2, 3, 4}",
            });
        }
        Ok(Strategy {
            left,
            right,
            differences,
            crossover,
        })
    }

    /// Builds a strategy from the integer codes `(bl, br, dn, cs)`.
    pub fn from_codes(bl: u8, br: u8, dn: u8, cs: u8) -> Result<Self> {
        Strategy::new(
            BaseVector::from_code(bl)?,
            BaseVector::from_code(br)?,
            dn,
            CrossoverScheme::from_code(cs)?,
        )
    }

    pub fn codes(&self) -> (u8, u8, u8, u8) {
        (
            self.left.code(),
            self.right.code(),
            self.differences,
            self.crossover.code(),
        )
    }

    pub fn differences(&self) -> usize {
        self.differences as usize
    }

    /// False when `left == right`, in which case the `F·(x_br − x_bl)` term
    /// is dropped.
    pub fn is_directional(&self) -> bool {
        self.left != self.right
    }

    /// Every one of the 4 × 4 × 4 × 3 = 192 categorical combinations, in
    /// lexicographic code order.
    pub fn all() -> impl Iterator<Item = Strategy> {
        BaseVector::ALL.into_iter().flat_map(|left| {
            BaseVector::ALL.into_iter().flat_map(move |right| {
                (1..=MAX_DIFFERENCES).flat_map(move |dn| {
                    CrossoverScheme::ALL.into_iter().map(move |crossover| Strategy {
                        left,
                        right,
                        differences: dn,
                        crossover,
                    })
                })
            })
        })
    }

    /// Canonical name, e.g. `DE/current-to-pbest/1/bin`.
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DE/{}", self.left.token())?;
        if self.is_directional() {
            write!(f, "-to-{}", self.right.token())?;
        }
        write!(f, "/{}/{}", self.differences, self.crossover.token())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Accepts the canonical grammar with or without the `DE/` prefix, the
    /// redundant explicit form `DE/rand-to-rand/1/bin`, and the alias
    /// `DE/current-to-rand/1`, which is `DE/rand/1/arith`.
    fn from_str(name: &str) -> Result<Self> {
        let err = |token: &str| Error::StrategyParse {
            name: name.to_string(),
            token: token.to_string(),
        };
        let body = name.trim();
        let body = body.strip_prefix("DE/").unwrap_or(body);
        if body == "current-to-rand/1" {
            return Strategy::from_codes(1, 1, 1, 3);
        }
        let mut parts = body.split('/');
        let base = parts.next().filter(|s| !s.is_empty()).ok_or_else(|| err(""))?;
        let dn = parts.next().ok_or_else(|| err(base))?;
        let cs = parts.next().ok_or_else(|| err(dn))?;
        if let Some(extra) = parts.next() {
            return Err(err(extra));
        }

        let (left, right) = match base.split_once("-to-") {
            Some((l, r)) => (l, r),
            None => (base, base),
        };
        let left = BaseVector::from_token(left).ok_or_else(|| err(left))?;
        let right = BaseVector::from_token(right).ok_or_else(|| err(right))?;
        let dn: u8 = dn
            .parse()
            .ok()
            .filter(|d| (1..=MAX_DIFFERENCES).contains(d))
            .ok_or_else(|| err(dn))?;
        let crossover = CrossoverScheme::from_token(cs).ok_or_else(|| err(cs))?;
        Strategy::new(left, right, dn, crossover)
    }
}

/// Parses a strategy name into its categorical codes.
pub fn encode_strategy(name: &str) -> Result<Strategy> {
    name.parse()
}

/// Canonical name of the strategy with codes `(bl, br, dn, cs)`.
pub fn decode_strategy_name(bl: u8, br: u8, dn: u8, cs: u8) -> Result<String> {
    Ok(Strategy::from_codes(bl, br, dn, cs)?.name())
}

/// The six-element PDE configuration `(F, CR, bl, br, dn, cs)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperConfig {
    f: f64,
    cr: f64,
    pub strategy: Strategy,
}

impl HyperConfig {
    pub fn new(f: f64, cr: f64, strategy: Strategy) -> Result<Self> {
        for (field, value) in [("F", f), ("CR", cr)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Domain {
                    field,
                    value: value.to_string(),
                    domain: "[0, 1]",
                });
            }
        }
        Ok(HyperConfig { f, cr, strategy })
    }

    /// Convenience constructor from a strategy name.
    pub fn named(name: &str, f: f64, cr: f64) -> Result<Self> {
        HyperConfig::new(f, cr, name.parse()?)
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn cr(&self) -> f64 {
        self.cr
    }
}

impl fmt::Display for HyperConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (F={:.4}, CR={:.4})", self.strategy, self.f, self.cr)
    }
}
