use std::fmt;
use std::str::FromStr;

use super::BuildError;

/// Which bound a linear program certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Upper error bound `Σ π̄ (F̄ + G)`; perturbations along unit steps only.
    UpperError,
    /// Lower error bound `Σ π̄ (F̄ − G)`; unit steps only.
    LowerError,
    /// One-sided upper bound `Σ π̄ F̄`; unit steps only.
    ComparisonUpper,
    /// One-sided lower bound `Σ π̄ F̄`; unit steps only.
    ComparisonLower,
    /// Upper error bound for perturbations in any direction.
    ArbitraryUpper,
    /// Lower error bound for perturbations in any direction.
    ArbitraryLower,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 6] = [
        ProblemKind::UpperError,
        ProblemKind::LowerError,
        ProblemKind::ComparisonUpper,
        ProblemKind::ComparisonLower,
        ProblemKind::ArbitraryUpper,
        ProblemKind::ArbitraryLower,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ProblemKind::UpperError => "upper-error",
            ProblemKind::LowerError => "lower-error",
            ProblemKind::ComparisonUpper => "comparison-upper",
            ProblemKind::ComparisonLower => "comparison-lower",
            ProblemKind::ArbitraryUpper => "arbitrary-upper",
            ProblemKind::ArbitraryLower => "arbitrary-lower",
        }
    }

    /// Whether the kind uses the error function `G`.
    pub fn has_error_term(self) -> bool {
        !self.is_comparison()
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, ProblemKind::ComparisonUpper | ProblemKind::ComparisonLower)
    }

    pub fn is_upper(self) -> bool {
        matches!(self, ProblemKind::UpperError | ProblemKind::ComparisonUpper | ProblemKind::ArbitraryUpper)
    }

    /// Whether `q` must vanish outside `{0, ±e1, ±e2}`.
    pub fn unit_steps_only(self) -> bool {
        !matches!(self, ProblemKind::ArbitraryUpper | ProblemKind::ArbitraryLower)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ProblemKind {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_ascii_lowercase();
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.key().replace('-', "") == norm)
            .ok_or_else(|| BuildError::UnknownName(s.to_string()))
    }
}

/// Restriction on the bias-bound functions `A_i`, `B_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunctionShape {
    /// Independent coefficients on every C-component (8 per function).
    CLinear,
    /// One affine function on all of `S` (3 per function).
    GlobalLinear,
    /// A constant (1 per function).
    Constant,
}

impl FunctionShape {
    pub const ALL: [FunctionShape; 3] = [FunctionShape::CLinear, FunctionShape::GlobalLinear, FunctionShape::Constant];

    pub fn key(self) -> &'static str {
        match self {
            FunctionShape::CLinear => "clinear",
            FunctionShape::GlobalLinear => "global-linear",
            FunctionShape::Constant => "constant",
        }
    }

    pub fn variables_per_function(self) -> usize {
        match self {
            FunctionShape::CLinear => 8,
            FunctionShape::GlobalLinear => 3,
            FunctionShape::Constant => 1,
        }
    }
}

impl fmt::Display for FunctionShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for FunctionShape {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match norm.as_str() {
            "clinear" | "componentwise" => Ok(FunctionShape::CLinear),
            "globallinear" | "linear" => Ok(FunctionShape::GlobalLinear),
            "constant" => Ok(FunctionShape::Constant),
            _ => Err(BuildError::UnknownName(s.to_string())),
        }
    }
}
