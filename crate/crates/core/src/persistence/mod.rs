//! Vietoris–Rips persistence and the bottleneck distance.

mod bottleneck;
mod filtration;
mod reduction;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bottleneck::{
    bottleneck_bruteforce, bottleneck_distance, bottleneck_matching, matching_cost, Matching,
    BRUTEFORCE_MAX_BARS,
};
pub use filtration::{build_rips_filtration, Filtration, Simplex};
pub use reduction::compute_barcode;

/// What to do with classes that are still alive at the end of the filtration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EssentialPolicy {
    /// Close them at the filtration's `max_scale`.
    #[default]
    Truncate,
    Drop,
}

/// One interval `[birth, death)`. Persistence is `death - birth`.
///
/// Bars are stored by endpoints so that the interval form used in files
/// round-trips exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    /// Bar from birth and persistence.
    pub fn new(birth: f64, persistence: f64) -> Result<Self> {
        if !(birth.is_finite() && persistence.is_finite()) {
            return Err(Error::Input(format!(
                "bar ({birth}, {persistence}) is not finite"
            )));
        }
        if birth < 0.0 || persistence < 0.0 {
            return Err(Error::Input(format!(
                "bar ({birth}, {persistence}) has a negative birth or persistence"
            )));
        }
        Ok(Bar {
            birth,
            death: birth + persistence,
        })
    }

    pub(crate) fn new_unchecked(birth: f64, death: f64) -> Self {
        Bar { birth, death }
    }

    pub fn from_interval(birth: f64, death: f64) -> Result<Self> {
        if !(birth.is_finite() && death.is_finite()) {
            return Err(Error::Input(format!("bar [{birth}, {death}) is not finite")));
        }
        if birth < 0.0 || death < birth {
            return Err(Error::Input(format!(
                "bar [{birth}, {death}) must satisfy 0 <= birth <= death"
            )));
        }
        Ok(Bar { birth, death })
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// A finite multiset of bars in one homology dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    bars: Vec<Bar>,
    homology_dim: usize,
}

impl Barcode {
    pub fn new(homology_dim: usize, bars: Vec<Bar>) -> Result<Self> {
        for b in &bars {
            Bar::from_interval(b.birth, b.death)?;
        }
        Ok(Self::from_bars_unchecked(homology_dim, bars))
    }

    /// Builds a barcode from `(birth, persistence)` pairs.
    pub fn from_pairs(homology_dim: usize, pairs: &[(f64, f64)]) -> Result<Self> {
        let bars = pairs
            .iter()
            .map(|&(b, l)| Bar::new(b, l))
            .collect::<Result<_>>()?;
        Ok(Self::from_bars_unchecked(homology_dim, bars))
    }

    /// Builds a barcode from `(birth, death)` intervals.
    pub fn from_intervals(homology_dim: usize, intervals: &[(f64, f64)]) -> Result<Self> {
        let bars = intervals
            .iter()
            .map(|&(b, d)| Bar::from_interval(b, d))
            .collect::<Result<_>>()?;
        Ok(Self::from_bars_unchecked(homology_dim, bars))
    }

    pub(crate) fn from_bars_unchecked(homology_dim: usize, mut bars: Vec<Bar>) -> Self {
        bars.sort_by(|a, b| {
            a.birth
                .total_cmp(&b.birth)
                .then(a.death.total_cmp(&b.death))
        });
        Barcode { bars, homology_dim }
    }

    /// Bars ordered by birth, then persistence.
    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn homology_dim(&self) -> usize {
        self.homology_dim
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn positive_count(&self) -> usize {
        self.bars.iter().filter(|b| b.persistence() > 0.0).count()
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.bars.iter().map(|b| (b.birth, b.death)).collect()
    }
}
