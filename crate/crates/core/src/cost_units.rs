//! Tunable cost units, their search space, and samplers over that space.
//!
//! The engine exposes six cost units with fixed order. Every vector in a
//! tuning session shares that order, so vectors are stored as plain arrays
//! and names are looked up from [`COST_UNITS`].

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const UNIT_COUNT: usize = 6;

/// Upper bound on the number of vectors [`grid_points`] will materialize.
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostUnit {
    pub name: &'static str,
    pub default_value: f64,
}

/// PostgreSQL planner cost units and their built-in defaults, in engine order.
pub const COST_UNITS: [CostUnit; UNIT_COUNT] = [
    CostUnit {
        name: "seq_page_cost",
        default_value: 1.0,
    },
    CostUnit {
        name: "random_page_cost",
        default_value: 4.0,
    },
    CostUnit {
        name: "cpu_tuple_cost",
        default_value: 0.01,
    },
    CostUnit {
        name: "cpu_index_tuple_cost",
        default_value: 0.005,
    },
    CostUnit {
        name: "cpu_operator_cost",
        default_value: 0.0025,
    },
    CostUnit {
        name: "parallel_tuple_cost",
        default_value: 0.1,
    },
];

/// Index of each unit inside a [`CostUnitVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitKind {
    SeqPage = 0,
    RandomPage = 1,
    CpuTuple = 2,
    CpuIndexTuple = 3,
    CpuOperator = 4,
    /// Carried for arity only; no operator in the cost model consumes it.
    ParallelTuple = 5,
}

impl UnitKind {
    pub const ALL: [UnitKind; UNIT_COUNT] = [
        UnitKind::SeqPage,
        UnitKind::RandomPage,
        UnitKind::CpuTuple,
        UnitKind::CpuIndexTuple,
        UnitKind::CpuOperator,
        UnitKind::ParallelTuple,
    ];

    pub fn name(self) -> &'static str {
        COST_UNITS[self as usize].name
    }

    pub fn from_name(name: &str) -> Option<UnitKind> {
        COST_UNITS
            .iter()
            .position(|u| u.name == name)
            .map(|i| UnitKind::ALL[i])
    }
}

/// An ordered assignment of strictly positive values to every cost unit.
#[derive(Clone, Copy, PartialEq)]
pub struct CostUnitVector {
    values: [f64; UNIT_COUNT],
}

/// The built-in cost units.
pub fn default_vector() -> CostUnitVector {
    CostUnitVector {
        values: COST_UNITS.map(|u| u.default_value),
    }
}

impl Default for CostUnitVector {
    fn default() -> Self {
        default_vector()
    }
}

impl CostUnitVector {
    pub fn new(values: [f64; UNIT_COUNT]) -> Result<Self> {
        for (unit, v) in COST_UNITS.iter().zip(values) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(
                    unit.name,
                    format!("cost unit must be a positive finite number, got {v}"),
                ));
            }
        }
        Ok(CostUnitVector { values })
    }

    #[inline]
    pub fn get(&self, kind: UnitKind) -> f64 {
        self.values[kind as usize]
    }

    pub fn by_name(&self, name: &str) -> Option<f64> {
        UnitKind::from_name(name).map(|k| self.get(k))
    }

    pub fn values(&self) -> &[f64; UNIT_COUNT] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        COST_UNITS.iter().map(|u| u.name).zip(self.values)
    }

    /// Multiplies every unit by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        CostUnitVector::new(self.values.map(|v| v * alpha))
    }

    pub fn with(&self, kind: UnitKind, value: f64) -> Result<Self> {
        let mut values = self.values;
        values[kind as usize] = value;
        CostUnitVector::new(values)
    }
}

impl fmt::Debug for CostUnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}

impl Serialize for CostUnitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(UNIT_COUNT))?;
        for (name, value) in self.iter() {
            map.serialize_entry(name, &value)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for CostUnitVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(deserializer)?;
        CostUnitVector::from_map(&raw).map_err(D::Error::custom)
    }
}

impl CostUnitVector {
    /// Builds a vector from name/value pairs. Order comes from the engine,
    /// not the map; unknown and missing names are rejected.
    pub fn from_map(raw: &BTreeMap<String, f64>) -> Result<Self> {
        if let Some(unknown) = raw.keys().find(|k| UnitKind::from_name(k).is_none()) {
            return Err(Error::validation(unknown.as_str(), "unknown cost unit"));
        }
        let mut values = [0.0; UNIT_COUNT];
        for (slot, unit) in values.iter_mut().zip(COST_UNITS.iter()) {
            *slot = *raw
                .get(unit.name)
                .ok_or_else(|| Error::validation(unit.name, "missing cost unit"))?;
        }
        CostUnitVector::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Per-unit closed intervals, one for each cost unit in engine order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace {
    intervals: [Interval; UNIT_COUNT],
}

impl SearchSpace {
    pub fn new(intervals: [Interval; UNIT_COUNT]) -> Result<Self> {
        for (unit, iv) in COST_UNITS.iter().zip(intervals) {
            let ok = iv.low.is_finite() && iv.high.is_finite() && iv.low > 0.0 && iv.low <= iv.high;
            if !ok {
                return Err(Error::validation(
                    unit.name,
                    format!("interval [{}, {}] must satisfy 0 < low <= high", iv.low, iv.high),
                ));
            }
        }
        Ok(SearchSpace { intervals })
    }

    pub fn interval(&self, kind: UnitKind) -> Interval {
        self.intervals[kind as usize]
    }

    pub fn intervals(&self) -> &[Interval; UNIT_COUNT] {
        &self.intervals
    }

    pub fn contains(&self, v: &CostUnitVector) -> bool {
        self.intervals
            .iter()
            .zip(v.values())
            .all(|(iv, &x)| iv.low <= x && x <= iv.high)
    }
}

/// `[low_mult * default, high_mult * default]` for every unit.
pub fn make_search_space(
    defaults: &CostUnitVector,
    low_mult: f64,
    high_mult: f64,
) -> Result<SearchSpace> {
    if !(low_mult.is_finite() && low_mult > 0.0 && high_mult.is_finite() && high_mult > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "search-space multipliers must be positive, got low={low_mult} high={high_mult}"
        )));
    }
    if low_mult > high_mult {
        return Err(Error::InvalidArgument(format!(
            "low multiplier {low_mult} exceeds high multiplier {high_mult}"
        )));
    }
    let intervals = defaults.values().map(|d| Interval {
        low: low_mult * d,
        high: high_mult * d,
    });
    SearchSpace::new(intervals)
}

/// Deterministic generator for a `(seed, stream)` pair.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn log_uniform<R: Rng + ?Sized>(rng: &mut R, low: f64, high: f64) -> f64 {
    if low == high {
        return low;
    }
    let x = rng.gen_range(low.ln()..=high.ln()).exp();
    x.clamp(low, high)
}

/// Draws each unit independently and log-uniformly from its interval.
pub fn sample_log_uniform<R: Rng + ?Sized>(space: &SearchSpace, rng: &mut R) -> CostUnitVector {
    CostUnitVector {
        values: space.intervals.map(|iv| log_uniform(rng, iv.low, iv.high)),
    }
}

/// `k` geometrically spaced points from `low` to `high` inclusive.
/// A single point is the geometric midpoint.
pub fn geometric_points(low: f64, high: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![(low * high).sqrt()],
        _ => {
            let ratio = high / low;
            let last = (k - 1) as f64;
            (0..k)
                .map(|i| match i {
                    0 => low,
                    i if i == k - 1 => high,
                    i => (low * ratio.powf(i as f64 / last)).clamp(low, high),
                })
                .collect()
        }
    }
}

/// Cartesian product of per-dimension point lists; the first dimension
/// varies slowest.
pub fn cartesian_product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut next = prefix.clone();
                    next.push(x);
                    next
                })
            })
            .collect();
    }
    out
}

/// Full grid of `k` geometric points per unit, in lexicographic unit order.
pub fn grid_points(space: &SearchSpace, k: usize, cap: usize) -> Result<Vec<CostUnitVector>> {
    if k == 0 {
        return Err(Error::InvalidArgument("grid resolution k must be >= 1".into()));
    }
    let size = k
        .checked_pow(UNIT_COUNT as u32)
        .filter(|&n| n <= cap)
        .ok_or(Error::TooLarge {
            what: "grid",
            size: k.saturating_pow(UNIT_COUNT as u32),
            cap,
        })?;
    let axes: Vec<Vec<f64>> = space
        .intervals
        .iter()
        .map(|iv| geometric_points(iv.low, iv.high, k))
        .collect();
    let points = cartesian_product(&axes)
        .into_iter()
        .map(|p| {
            let mut values = [0.0; UNIT_COUNT];
            values.copy_from_slice(&p);
            CostUnitVector { values }
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(points.len(), size);
    Ok(points)
}
