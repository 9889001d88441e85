//! Levels, fractional turns, level-induced forests and turn classification.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::forest::{ForestError, Graph, OnlineForest, VertexId};
use crate::minimax::MiniMaxTable;
use crate::vitality::{alive_flags, dispatch_node};

/// The growth factor separating slow from jumping dispatch levels; always
/// strictly greater than one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Beta(Ratio<u64>);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BetaError {
    #[error("beta must be greater than 1, got {0}")]
    TooSmall(String),
    #[error("cannot parse beta `{0}` (expected an integer, a fraction p/q or a decimal)")]
    Parse(String),
}

impl Beta {
    pub fn new(numer: u64, denom: u64) -> Result<Self, BetaError> {
        if denom == 0 {
            return Err(BetaError::Parse(format!("{numer}/{denom}")));
        }
        let r = Ratio::new(numer, denom);
        if r <= Ratio::from_integer(1) {
            return Err(BetaError::TooSmall(r.to_string()));
        }
        Ok(Beta(r))
    }

    pub fn two() -> Self {
        Beta(Ratio::from_integer(2))
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn numer(self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(self) -> u64 {
        *self.0.denom()
    }

    pub fn as_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `(β − 1)/(β + 1)`.
    pub fn rho(self) -> Ratio<u64> {
        let (p, q) = (self.numer(), self.denom());
        Ratio::new(p - q, p + q)
    }

    /// `2β/(β − 1)`, equal to `2/(1 − 1/β)`.
    pub fn delta(self) -> Ratio<u64> {
        let (p, q) = (self.numer(), self.denom());
        Ratio::new(2 * p, p - q)
    }

    /// `a < β·b` on finite values, decided exactly.
    pub fn below_times(self, a: u64, b: u64) -> bool {
        (a as u128) * (self.denom() as u128) < (self.numer() as u128) * (b as u128)
    }

    /// `size ≥ ρ·l`, decided exactly.
    pub fn reaches_share(self, size: u64, l: u64) -> bool {
        let (p, q) = (self.numer() as u128, self.denom() as u128);
        (size as u128) * (p + q) >= (p - q) * (l as u128)
    }

    /// `δ/ρ = 2β(β + 1)/(β − 1)²` as a float.
    pub fn delta_over_rho(self) -> f64 {
        let b = self.as_f64();
        2.0 * b * (b + 1.0) / ((b - 1.0) * (b - 1.0))
    }
}

impl Default for Beta {
    fn default() -> Self {
        Beta::two()
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Beta {
    type Err = BetaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || BetaError::Parse(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            return Beta::new(
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            );
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let scale = 10u64.pow(frac.len() as u32);
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let frac: u64 = frac.parse().map_err(|_| bad())?;
            return Beta::new(int * scale + frac, scale);
        }
        Beta::new(s.parse().map_err(|_| bad())?, 1)
    }
}

impl Serialize for Beta {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// How the dispatching vertex's level moved in a turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TurnClass {
    NoDispatch,
    CaseSlow,
    CaseJump,
    DistInfinite,
}

impl TurnClass {
    /// Classifies from the dispatch levels before and after the turn.
    pub fn from_levels(beta: Beta, before: Distance, after: Distance) -> TurnClass {
        match (before, after) {
            (Distance::Finite(a), Distance::Finite(b)) if beta.below_times(b as u64, a as u64) => TurnClass::CaseSlow,
            (Distance::Infinite, Distance::Finite(_)) => TurnClass::CaseSlow,
            _ => TurnClass::CaseJump,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TurnClass::NoDispatch => "NO_DISPATCH",
            TurnClass::CaseSlow => "CASE_SLOW",
            TurnClass::CaseJump => "CASE_JUMP",
            TurnClass::DistInfinite => "DIST_INFINITE",
        }
    }
}

impl fmt::Display for TurnClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A whole turn `t` or the half turn `t − ½` between `t − 1` and `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum When {
    Turn(usize),
    /// `Half(t)` is the moment `t − ½`; `t ≥ 1`.
    Half(usize),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LevelError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("turn {0} has no dispatching vertex")]
    DispatchUndefined(usize),
}

/// Level of a dense index in a snapshot table; 0 for vertices not yet arrived.
pub(crate) fn level_of(table: &MiniMaxTable, at: &crate::forest::ForestAt<'_>, ix: usize) -> Distance {
    if at.contains(ix) {
        table.level(at, ix)
    } else {
        Distance::ZERO
    }
}

/// `level_t(v)`: second distance for whites, distance for arrived blacks,
/// 0 for blacks that have not arrived.
pub fn level(forest: &OnlineForest, v: VertexId, t: usize) -> Result<Distance, LevelError> {
    let at = forest.at(t)?;
    let ix = forest.node(v)?;
    Ok(level_of(&MiniMaxTable::build(&at), &at, ix))
}

/// Dispatching vertex of turn `t` as a dense index, from the turn's table.
fn dispatch_at(forest: &OnlineForest, t: usize, table: &MiniMaxTable) -> Option<usize> {
    let at = forest.at(t).ok()?;
    let b = forest.black_node(t);
    if table.dist(b).is_infinite() {
        return None;
    }
    let alive = alive_flags(&at, table);
    dispatch_node(&at, &alive, &table.path(&at, b))
}

/// `level_{t−½}(v)`: the previous level for the dispatching vertex, the
/// current one otherwise.
pub fn level_half(forest: &OnlineForest, v: VertexId, t: usize) -> Result<Distance, LevelError> {
    let levels = half_levels(forest, t)?;
    Ok(levels[forest.node(v)?])
}

fn half_levels(forest: &OnlineForest, t: usize) -> Result<Vec<Distance>, LevelError> {
    let at = forest.at(t)?;
    let table = MiniMaxTable::build(&at);
    let d = dispatch_at(forest, t, &table).ok_or(LevelError::DispatchUndefined(t))?;
    let mut levels = levels_at(forest, t)?;
    let prev = forest.at(t - 1)?;
    levels[d] = level_of(&MiniMaxTable::build(&prev), &prev, d);
    Ok(levels)
}

fn levels_at(forest: &OnlineForest, t: usize) -> Result<Vec<Distance>, LevelError> {
    let at = forest.at(t)?;
    let table = MiniMaxTable::build(&at);
    Ok((0..forest.vertex_count()).map(|x| level_of(&table, &at, x)).collect())
}

/// `F_t^l`: the final forest induced on vertices of level at least `l`.
pub fn level_forest(forest: &OnlineForest, when: When, l: u32) -> Result<Graph, LevelError> {
    let levels = match when {
        When::Turn(t) => levels_at(forest, t)?,
        When::Half(t) => half_levels(forest, t)?,
    };
    let xs: BTreeSet<VertexId> = levels
        .iter()
        .enumerate()
        .filter(|(_, &lv)| lv >= Distance::Finite(l))
        .map(|(x, _)| forest.vertex(x))
        .collect();
    Ok(forest.induced_subforest(&xs, forest.turn())?)
}

/// Class of turn `t ≥ 1` for the given β.
pub fn classify_turn(forest: &OnlineForest, t: usize, beta: Beta) -> Result<TurnClass, LevelError> {
    let at = forest.at(t)?;
    let table = MiniMaxTable::build(&at);
    let b = forest.black_node(t);
    if table.dist(b).is_infinite() {
        return Ok(TurnClass::DistInfinite);
    }
    let Some(d) = dispatch_at(forest, t, &table) else {
        return Ok(TurnClass::NoDispatch);
    };
    let prev = forest.at(t - 1)?;
    let before = level_of(&MiniMaxTable::build(&prev), &prev, d);
    Ok(TurnClass::from_levels(beta, before, table.level(&at, d)))
}
