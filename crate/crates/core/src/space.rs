//! Fréchet spaces with a Schauder basis, given as seminorm oracles over an
//! enumerated basis, and the invariant-subspace classifier.
//!
//! Every built-in is already normalized: the basis inequality holds with
//! `J = j + 1` and `C_j = 1`, and levels are read off the enumeration.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarMode};
use crate::vector::{FinVector, Frame};

/// Spaces that can serve as a factor of a countable power.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Base {
    L1,
    L2,
    Omega,
    /// `K^d` with the sup norm.
    Finite(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    /// The factor space on its own.
    Single(Base),
    /// `X^N` with `p_j((x_n)) = max{q_j(x_n) : n <= j}`.
    Power(Base),
    /// `ω ⊕ ℓ₂` graded so that `p_1` already sees the `ℓ₂` summand.
    OmegaPlusL2,
}

/// Human-facing label of a basis vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    Coord(u64),
    /// Copy (from 1) and coordinate (from 0) in a power space.
    Pair {
        copy: u64,
        coord: u64,
    },
    OmegaPart(u64),
    HilbertPart(u64),
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Coord(k) => write!(f, "e({k})"),
            BasisLabel::Pair { copy, coord } => write!(f, "e({copy},{coord})"),
            BasisLabel::OmegaPart(k) => write!(f, "omega({k})"),
            BasisLabel::HilbertPart(k) => write!(f, "l2({k})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub enum_no: u64,
    pub label: BasisLabel,
}

/// Codimension of `ker p_{j+1}` in `ker p_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codim {
    Finite,
    Infinite,
}

/// Classifier output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IspVerdict {
    /// Every operator has a nontrivial invariant subspace; `j0` is the least
    /// level from which all codimensions are finite.
    Satisfies { j0: u32 },
    /// Infinitely many levels of infinite codimension; the first few listed.
    Fails { infinite_levels: Vec<u32> },
}

impl IspVerdict {
    pub fn satisfies_isp(&self) -> bool {
        matches!(self, IspVerdict::Satisfies { .. })
    }
}

impl fmt::Display for IspVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IspVerdict::Satisfies { j0 } => {
                write!(f, "ISP: yes (finite codimension for every j >= {j0})")
            }
            IspVerdict::Fails { .. } => f.write_str("ISP: no (infinite codimension at every level)"),
        }
    }
}

/// Number of infinite-codimension levels listed in a negative verdict.
const WITNESS_LEVELS: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceDescriptor {
    kind: SpaceKind,
    codim_known: bool,
}

fn tri(d: u64) -> u64 {
    d * (d + 1) / 2
}

/// Cantor diagonal on (copy - 1, coord), coordinates increasing along a diagonal.
fn cantor_enum(copy: u64, coord: u64) -> u64 {
    tri(copy - 1 + coord) + coord
}

fn cantor_pair(e: u64) -> (u64, u64) {
    let mut d = ((((8 * e + 1) as f64).sqrt() - 1.0) / 2.0) as u64;
    while tri(d) > e {
        d -= 1;
    }
    while tri(d + 1) <= e {
        d += 1;
    }
    let coord = e - tri(d);
    (d - coord + 1, coord)
}

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind) -> Self {
        SpaceDescriptor { kind, codim_known: true }
    }

    pub fn omega() -> Self {
        Self::new(SpaceKind::Single(Base::Omega))
    }

    pub fn l1_power() -> Self {
        Self::new(SpaceKind::Power(Base::L1))
    }

    pub fn l2_power() -> Self {
        Self::new(SpaceKind::Power(Base::L2))
    }

    pub fn omega_plus_l2() -> Self {
        Self::new(SpaceKind::OmegaPlusL2)
    }

    /// Looks up a built-in by its configuration name.
    pub fn by_name(name: &str) -> Result<Self> {
        let kind = match name {
            "omega" => SpaceKind::Single(Base::Omega),
            "l1" => SpaceKind::Single(Base::L1),
            "l2" => SpaceKind::Single(Base::L2),
            "l1_power" => SpaceKind::Power(Base::L1),
            "l2_power" => SpaceKind::Power(Base::L2),
            "omega_power" => SpaceKind::Power(Base::Omega),
            "omega_plus_l2" => SpaceKind::OmegaPlusL2,
            other => {
                let parse_dim =
                    |s: &str| s.strip_prefix("finite").and_then(|d| d.parse::<u32>().ok()).filter(|d| *d > 0);
                if let Some(d) = other.strip_suffix("_power").and_then(parse_dim) {
                    SpaceKind::Power(Base::Finite(d))
                } else if let Some(d) = parse_dim(other) {
                    SpaceKind::Single(Base::Finite(d))
                } else {
                    return Err(Error::Config(format!("unknown space '{name}'")));
                }
            }
        };
        Ok(Self::new(kind))
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn name(&self) -> String {
        let base = |b: Base| match b {
            Base::L1 => "l1".to_string(),
            Base::L2 => "l2".to_string(),
            Base::Omega => "omega".to_string(),
            Base::Finite(d) => format!("finite{d}"),
        };
        match self.kind {
            SpaceKind::Single(b) => base(b),
            SpaceKind::Power(b) => format!("{}_power", base(b)),
            SpaceKind::OmegaPlusL2 => "omega_plus_l2".to_string(),
        }
    }

    /// Same space with the codimension metadata withheld.
    pub fn without_codim_metadata(mut self) -> Self {
        self.codim_known = false;
        self
    }

    /// Whether seminorms are rational on rational inputs.
    pub fn supports_mode(&self, mode: ScalarMode) -> bool {
        let has_l2 =
            matches!(self.kind, SpaceKind::Single(Base::L2) | SpaceKind::Power(Base::L2) | SpaceKind::OmegaPlusL2);
        mode == ScalarMode::Binary64 || !has_l2
    }

    pub fn has_continuous_norm(&self) -> bool {
        matches!(self.kind, SpaceKind::Single(Base::L1 | Base::L2 | Base::Finite(_)))
    }

    fn finite_dim(&self) -> Option<u64> {
        match self.kind {
            SpaceKind::Single(Base::Finite(d)) => Some(d as u64),
            _ => None,
        }
    }

    pub fn label(&self, enum_no: u64) -> Result<BasisLabel> {
        Ok(match self.kind {
            SpaceKind::Single(_) => {
                if let Some(d) = self.finite_dim() {
                    if enum_no >= d {
                        return Err(Error::DescriptorMismatch(format!("index {enum_no} outside {}", self.name())));
                    }
                }
                BasisLabel::Coord(enum_no)
            }
            SpaceKind::Power(Base::Finite(d)) => {
                let d = d as u64;
                BasisLabel::Pair { copy: enum_no / d + 1, coord: enum_no % d }
            }
            SpaceKind::Power(_) => {
                let (copy, coord) = cantor_pair(enum_no);
                BasisLabel::Pair { copy, coord }
            }
            SpaceKind::OmegaPlusL2 => {
                if enum_no.is_multiple_of(2) {
                    BasisLabel::OmegaPart(enum_no / 2)
                } else {
                    BasisLabel::HilbertPart(enum_no / 2)
                }
            }
        })
    }

    pub fn index(&self, enum_no: u64) -> Result<BasisIndex> {
        Ok(BasisIndex { enum_no, label: self.label(enum_no)? })
    }

    pub fn enum_of(&self, label: BasisLabel) -> Result<u64> {
        let mismatch = || Error::DescriptorMismatch(format!("label {label} not in {}", self.name()));
        match (self.kind, label) {
            (SpaceKind::Single(_), BasisLabel::Coord(k)) => {
                if self.finite_dim().is_some_and(|d| k >= d) {
                    return Err(mismatch());
                }
                Ok(k)
            }
            (SpaceKind::Power(b), BasisLabel::Pair { copy, coord }) => {
                if copy == 0 {
                    return Err(mismatch());
                }
                match b {
                    Base::Finite(d) if coord >= d as u64 => Err(mismatch()),
                    Base::Finite(d) => Ok((copy - 1) * d as u64 + coord),
                    _ => Ok(cantor_enum(copy, coord)),
                }
            }
            (SpaceKind::OmegaPlusL2, BasisLabel::OmegaPart(k)) => Ok(2 * k),
            (SpaceKind::OmegaPlusL2, BasisLabel::HilbertPart(k)) => Ok(2 * k + 1),
            _ => Err(mismatch()),
        }
    }

    /// Seminorm `p_j` of an e-frame vector.
    pub fn seminorm<S: Scalar>(&self, j: u32, v: &FinVector<S>) -> Result<S> {
        if j == 0 {
            return Err(Error::Precondition("seminorm level must be >= 1".into()));
        }
        if v.frame() != Frame::E {
            return Err(Error::Frame(format!("seminorm expects an e-frame vector, got {}", v.frame())));
        }
        let mut labelled = Vec::with_capacity(v.len());
        for (k, c) in v.iter() {
            labelled.push((self.label(k)?, c));
        }
        Ok(self.eval_seminorm(j, labelled.into_iter()))
    }

    /// `p_j(coef * e_i)`.
    pub fn seminorm_of_term<S: Scalar>(&self, j: u32, enum_no: u64, coef: &S) -> Result<S> {
        if j == 0 {
            return Err(Error::Precondition("seminorm level must be >= 1".into()));
        }
        let label = self.label(enum_no)?;
        Ok(self.eval_seminorm(j, std::iter::once((label, coef))))
    }

    fn eval_seminorm<'a, S: Scalar>(&self, j: u32, terms: impl Iterator<Item = (BasisLabel, &'a S)>) -> S {
        let j = j as u64;
        match self.kind {
            SpaceKind::Single(b) => base_seminorm(
                b,
                j,
                terms.map(|(l, c)| match l {
                    BasisLabel::Coord(k) => (k, c),
                    _ => unreachable!(),
                }),
            ),
            SpaceKind::Power(b) => {
                // group by copy; only copies <= j count
                let mut groups: std::collections::BTreeMap<u64, Vec<(u64, &S)>> = Default::default();
                for (l, c) in terms {
                    if let BasisLabel::Pair { copy, coord } = l {
                        if copy <= j {
                            groups.entry(copy).or_default().push((coord, c));
                        }
                    }
                }
                groups.into_values().map(|g| base_seminorm(b, j, g.into_iter())).fold(S::zero(), S::max_of)
            }
            SpaceKind::OmegaPlusL2 => {
                let mut omega = S::zero();
                let mut sq = S::zero();
                for (l, c) in terms {
                    match l {
                        BasisLabel::OmegaPart(k) if k < j => omega = omega.max_of(c.abs()),
                        BasisLabel::HilbertPart(_) => sq = sq + c.clone() * c.clone(),
                        _ => {}
                    }
                }
                omega.max_of(sq.sqrt())
            }
        }
    }

    /// The unique `j` with `e_i ∈ E_j`.
    pub fn level_of(&self, enum_no: u64) -> Result<u32> {
        let label = self.label(enum_no)?;
        Ok(match (self.kind, label) {
            (SpaceKind::Single(Base::Omega), BasisLabel::Coord(k)) => k as u32,
            (SpaceKind::Single(_), _) => 0,
            (SpaceKind::Power(Base::Omega), BasisLabel::Pair { copy, coord }) => (copy.max(coord + 1) - 1) as u32,
            (SpaceKind::Power(_), BasisLabel::Pair { copy, .. }) => (copy - 1) as u32,
            (SpaceKind::OmegaPlusL2, BasisLabel::OmegaPart(k)) => k as u32,
            (SpaceKind::OmegaPlusL2, _) => 0,
            _ => unreachable!("label produced by this descriptor"),
        })
    }

    /// `C_j`; every built-in has contractive coordinate projections.
    pub fn basis_constant<S: Scalar>(&self, j: u32) -> S {
        debug_assert!(j >= 1);
        S::one()
    }

    pub fn codim(&self, j: u32) -> Option<Codim> {
        debug_assert!(j >= 1);
        if !self.codim_known {
            return None;
        }
        Some(match self.kind {
            SpaceKind::Power(Base::L1 | Base::L2) => Codim::Infinite,
            _ => Codim::Finite,
        })
    }

    /// Whether `E_level` is infinite.
    pub fn level_is_infinite(&self, level: u32) -> bool {
        match self.kind {
            SpaceKind::Power(Base::L1 | Base::L2) => true,
            SpaceKind::Single(Base::L1 | Base::L2) => level == 0,
            SpaceKind::OmegaPlusL2 => level == 0,
            _ => false,
        }
    }

    /// Every level set is infinite (the construction's standing assumption).
    pub fn level_infinite(&self) -> bool {
        matches!(self.kind, SpaceKind::Power(Base::L1 | Base::L2))
    }

    /// Members of `E_level` with `enum_no >= floor`, ascending.
    pub fn level_members(&self, level: u32, floor: u64) -> Box<dyn Iterator<Item = u64> + '_> {
        let l = level as u64;
        match self.kind {
            SpaceKind::Power(Base::L1 | Base::L2) => {
                let copy = l + 1;
                // enum is increasing in coord; find the first coord reaching the floor
                let (mut lo, mut hi) = (0u64, 1u64);
                while cantor_enum(copy, hi) < floor {
                    hi *= 2;
                }
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if cantor_enum(copy, mid) < floor {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                Box::new((lo..).map(move |k| cantor_enum(copy, k)))
            }
            SpaceKind::Power(Base::Finite(d)) => {
                let d = d as u64;
                Box::new((l * d..(l + 1) * d).filter(move |e| *e >= floor))
            }
            SpaceKind::Power(Base::Omega) => {
                let mut v: Vec<u64> = (0..=l)
                    .map(|k| cantor_enum(l + 1, k))
                    .chain((1..=l).map(|c| cantor_enum(c, l)))
                    .filter(|e| *e >= floor)
                    .collect();
                v.sort_unstable();
                v.dedup();
                Box::new(v.into_iter())
            }
            SpaceKind::Single(Base::Omega) => Box::new(std::iter::once(l).filter(move |e| *e >= floor)),
            SpaceKind::Single(_) => {
                if level > 0 {
                    return Box::new(std::iter::empty());
                }
                match self.finite_dim() {
                    Some(d) => Box::new(floor..d),
                    None => Box::new(floor..),
                }
            }
            SpaceKind::OmegaPlusL2 => {
                if level == 0 {
                    let start = floor;
                    Box::new((start..).filter(|e| *e == 0 || e % 2 == 1))
                } else {
                    Box::new(std::iter::once(2 * l).filter(move |e| *e >= floor))
                }
            }
        }
    }

    /// `count` distinct members of `E_level` outside `exclude`, smallest first.
    pub fn fresh_indices(&self, level: u32, count: usize, exclude: &HashSet<u64>, floor: u64) -> Result<Vec<u64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let out: Vec<u64> = self.level_members(level, floor).filter(|e| !exclude.contains(e)).take(count).collect();
        if out.len() < count {
            return Err(Error::LevelExhausted { space: self.name(), level });
        }
        Ok(out)
    }

    pub fn classify_isp(&self) -> Result<IspVerdict> {
        if self.has_continuous_norm() {
            return Err(Error::Unclassifiable(format!(
                "{} has a continuous norm; the criterion covers spaces without one",
                self.name()
            )));
        }
        // Built-in codimensions are constant in j, so scanning a prefix decides.
        let codims: Vec<Codim> = (1..=WITNESS_LEVELS)
            .map(|j| self.codim(j).ok_or_else(|| Error::Unclassifiable(self.name())))
            .collect::<Result<_>>()?;
        let infinite: Vec<u32> = (1..=WITNESS_LEVELS).filter(|j| codims[*j as usize - 1] == Codim::Infinite).collect();
        if infinite.is_empty() {
            Ok(IspVerdict::Satisfies { j0: 1 })
        } else {
            Ok(IspVerdict::Fails { infinite_levels: infinite })
        }
    }
}

fn base_seminorm<'a, S: Scalar>(base: Base, j: u64, coords: impl Iterator<Item = (u64, &'a S)>) -> S {
    match base {
        Base::L1 => coords.fold(S::zero(), |acc, (_, c)| acc + c.abs()),
        Base::L2 => coords.fold(S::zero(), |acc, (_, c)| acc + c.clone() * c.clone()).sqrt(),
        Base::Omega => coords.filter(|(k, _)| *k < j).fold(S::zero(), |acc, (_, c)| acc.max_of(c.abs())),
        Base::Finite(_) => coords.fold(S::zero(), |acc, (_, c)| acc.max_of(c.abs())),
    }
}

/// Descriptor of `X^N` for a factor space `X`.
pub fn power_space(base: &SpaceDescriptor) -> Result<SpaceDescriptor> {
    match base.kind {
        SpaceKind::Single(b) => Ok(SpaceDescriptor::new(SpaceKind::Power(b))),
        _ => Err(Error::Config(format!("no built-in power of '{}'", base.name()))),
    }
}
