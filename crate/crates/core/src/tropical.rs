//! Tropical coordinates on regularized barcodes.
//!
//! A barcode with at most `n` bars is padded with `(0, 0)` bars to exactly
//! `n` slots. For an orbit of 0/1 exponent rows with `i` rows `(0,1)`,
//! `j` rows `(1,1)` and `k` rows `(1,0)` (the rest `(0,0)`), the elementary
//! 2-symmetric max-plus polynomial is the maximum, over every way of handing
//! those rows to distinct slots, of the sum of the selected monomials. Slot
//! `t` contributes `ℓ_t` for a `(0,1)` row, `x_t + ℓ_t` for `(1,1)` and
//! `x_t` for `(1,0)`, where `x_t = min(b_t, m ℓ_t)` is the regularized birth.
//!
//! Coordinates use `k = 0` only; there are `d = n + n(n+1)/2` of them.

use std::ops::Add;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::persistence::{Bar, Barcode};

/// Scalars the max-plus evaluation runs on. `i64` gives exact arithmetic
/// for integer-valued barcodes.
pub trait Coord: Copy + PartialOrd + Add<Output = Self> {
    fn zero() -> Self;
    /// `self * m`
    fn times(self, m: u64) -> Self;

    fn tmin(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn tmax(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Coord for f64 {
    fn zero() -> Self {
        0.0
    }
    fn times(self, m: u64) -> Self {
        self * m as f64
    }
}

impl Coord for i64 {
    fn zero() -> Self {
        0
    }
    fn times(self, m: u64) -> Self {
        self * m as i64
    }
}

/// Orbit `[(0,1)^i, (1,1)^j, (1,0)^k, (0,0)^(n-i-j-k)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrbitIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub n: usize,
}

impl OrbitIndex {
    pub fn new(i: usize, j: usize, k: usize, n: usize) -> Result<Self> {
        if i + j + k > n {
            return Err(Error::Parameter(format!(
                "orbit ({i}, {j}, {k}) has more than n = {n} rows"
            )));
        }
        if i + j + k == 0 {
            return Err(Error::Parameter("orbit (0, 0, 0) is the constant monomial".into()));
        }
        Ok(OrbitIndex { i, j, k, n })
    }

    /// Number of non-`(0,0)` rows.
    pub fn weight(&self) -> usize {
        self.i + self.j + self.k
    }

    /// The exponent rows of the orbit representative, `(0,1)` rows first.
    pub fn rows(&self) -> Vec<(u8, u8)> {
        let mut rows = Vec::with_capacity(self.n);
        rows.extend(std::iter::repeat_n((0, 1), self.i));
        rows.extend(std::iter::repeat_n((1, 1), self.j));
        rows.extend(std::iter::repeat_n((1, 0), self.k));
        rows.resize(self.n, (0, 0));
        rows
    }
}

/// Number of tropical coordinates for capacity `n`.
pub fn coordinate_count(n: usize) -> usize {
    n + n * (n + 1) / 2
}

/// All `(i, j)` with `1 <= i + j <= n`, lexicographic in `(i, j)`.
pub fn orbit_indices(n: usize) -> Result<Vec<OrbitIndex>> {
    if n < 1 {
        return Err(Error::Parameter("bar capacity n must be >= 1".into()));
    }
    Ok((0..=n)
        .flat_map(|i| (0..=n - i).map(move |j| (i, j)))
        .filter(|&(i, j)| i + j > 0)
        .map(|(i, j)| OrbitIndex { i, j, k: 0, n })
        .collect())
}

/// Regularization parameter `m`: positive bars must satisfy `b <= m ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegularizationParam(u64);

impl RegularizationParam {
    pub const UNIVERSAL: RegularizationParam = RegularizationParam(100);

    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("regularization parameter m must be >= 1".into()));
        }
        Ok(RegularizationParam(m))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MPolicy {
    /// Smallest integer m admitting every observed positive bar.
    #[default]
    DataDriven,
    /// m = 100 regardless of data.
    Universal,
}

// Ratios beyond this would lose integer precision in f64.
const MAX_M: u64 = 1 << 52;

fn admits(bar: &Bar, m: u64) -> bool {
    let l = bar.persistence();
    l <= 0.0 || bar.birth <= l * m as f64
}

/// Smallest m with `b <= m ℓ` for this bar, as checked in floating point.
fn required_m(bar: &Bar) -> Result<u64> {
    let l = bar.persistence();
    if l <= 0.0 {
        return Ok(1);
    }
    let ratio = (bar.birth / l).ceil();
    if ratio >= MAX_M as f64 {
        return Err(Error::Degenerate(format!(
            "bar [{}, {}) has birth/persistence ratio {ratio:e}, too large to regularize",
            bar.birth, bar.death
        )));
    }
    let mut m = (ratio as u64).max(1);
    while !admits(bar, m) {
        m += 1;
    }
    Ok(m)
}

pub fn regularization_parameter(barcodes: &[Barcode], policy: MPolicy) -> Result<RegularizationParam> {
    match policy {
        MPolicy::Universal => Ok(RegularizationParam::UNIVERSAL),
        MPolicy::DataDriven => {
            let positive: Vec<&Bar> = barcodes
                .iter()
                .flat_map(|b| b.bars())
                .filter(|b| b.persistence() > 0.0)
                .collect();
            if positive.is_empty() {
                return Err(Error::Degenerate(
                    "no bar with positive persistence; a data-driven m is undefined".into(),
                ));
            }
            let mut m = 1;
            for bar in positive {
                m = m.max(required_m(bar)?);
            }
            RegularizationParam::new(m)
        }
    }
}

/// Whether every positive-persistence bar satisfies `b <= m ℓ`.
/// Zero-persistence bars are exempt.
pub fn check_regularized(bars: &Barcode, m: RegularizationParam) -> bool {
    bars.bars().iter().all(|b| admits(b, m.get()))
}

fn regularization_error(bars: &Barcode, m: RegularizationParam) -> Result<Error> {
    let offending: Vec<&Bar> = bars.bars().iter().filter(|b| !admits(b, m.get())).collect();
    let mut required = m.get();
    for bar in &offending {
        required = required.max(required_m(bar)?);
    }
    Ok(Error::Regularization {
        offending: offending.len(),
        m: m.get(),
        required,
    })
}

/// Shrinks each offending birth to `m ℓ`.
pub fn clip_to_regularized(bars: &Barcode, m: RegularizationParam) -> Barcode {
    let clipped = bars
        .bars()
        .iter()
        .map(|b| {
            if admits(b, m.get()) {
                *b
            } else {
                let l = b.persistence();
                let mut birth = l * m.get() as f64;
                let mut bar = Bar::new_unchecked(birth, birth + l);
                while !admits(&bar, m.get()) {
                    birth = birth.next_down();
                    bar = Bar::new_unchecked(birth, birth + l);
                }
                bar
            }
        })
        .collect();
    Barcode::from_bars_unchecked(bars.homology_dim(), clipped)
}

/// Drops zero-persistence bars; the remaining slots up to `n` are implicit
/// `(0, 0)` padding.
pub fn canonicalize(bars: &Barcode, n: usize) -> Result<Barcode> {
    let kept: Vec<Bar> = bars
        .bars()
        .iter()
        .copied()
        .filter(|b| b.persistence() > 0.0)
        .collect();
    if kept.len() > n {
        return Err(Error::Capacity {
            found: kept.len(),
            capacity: n,
        });
    }
    Ok(Barcode::from_bars_unchecked(bars.homology_dim(), kept))
}

fn check_index(n: usize, slots: usize, idx: &OrbitIndex) -> Result<()> {
    if idx.n != n {
        return Err(Error::Parameter(format!(
            "orbit index built for n = {} used with n = {n}",
            idx.n
        )));
    }
    if slots > n {
        return Err(Error::Capacity {
            found: slots,
            capacity: n,
        });
    }
    Ok(())
}

/// Max-plus evaluation of the orbit polynomial on `(birth, persistence)`
/// slots by dynamic programming over the bars: the state is how many rows
/// of each kind have been handed out so far.
pub fn gamma_max_plus<T: Coord>(slots: &[(T, T)], n: usize, m: RegularizationParam, idx: &OrbitIndex) -> Result<T> {
    check_index(n, slots.len(), idx)?;
    let (ni, nj, nk) = (idx.i + 1, idx.j + 1, idx.k + 1);
    let at = |a: usize, c: usize, e: usize| (a * nj + c) * nk + e;
    let mut best: Vec<Option<T>> = vec![None; ni * nj * nk];
    best[0] = Some(T::zero());
    let mut next = best.clone();
    for &(b, l) in slots {
        let x = b.tmin(l.times(m.get()));
        next.copy_from_slice(&best);
        for a in 0..ni {
            for c in 0..nj {
                for e in 0..nk {
                    let Some(v) = best[at(a, c, e)] else { continue };
                    let mut offer = |pos: usize, val: T| {
                        next[pos] = Some(match next[pos] {
                            Some(cur) => cur.tmax(val),
                            None => val,
                        });
                    };
                    if a + 1 < ni {
                        offer(at(a + 1, c, e), v + l);
                    }
                    if c + 1 < nj {
                        offer(at(a, c + 1, e), v + x + l);
                    }
                    if e + 1 < nk {
                        offer(at(a, c, e + 1), v + x);
                    }
                }
            }
        }
        std::mem::swap(&mut best, &mut next);
    }
    // Rows not placed on a real bar land on (0, 0) padding, which
    // contributes nothing; there are n - len such slots.
    let padding = n - slots.len();
    let mut result: Option<T> = None;
    for a in 0..ni {
        for c in 0..nj {
            for e in 0..nk {
                let unplaced = (idx.i - a) + (idx.j - c) + (idx.k - e);
                if unplaced > padding {
                    continue;
                }
                if let Some(v) = best[at(a, c, e)] {
                    result = Some(match result {
                        Some(r) => r.tmax(v),
                        None => v,
                    });
                }
            }
        }
    }
    result.ok_or_else(|| Error::Parameter("orbit has more rows than slots".into()))
}

/// Largest `n` accepted by [`gamma_bruteforce_slots`].
pub const BRUTEFORCE_MAX_N: usize = 7;

/// Evaluates the orbit polynomial by listing every row permutation of the
/// exponent matrix (all `n!` of them, duplicates included) and taking the
/// largest monomial.
pub fn gamma_bruteforce_slots<T: Coord>(
    slots: &[(T, T)],
    n: usize,
    m: RegularizationParam,
    idx: &OrbitIndex,
) -> Result<T> {
    check_index(n, slots.len(), idx)?;
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::TooLarge(format!(
            "n = {n} would enumerate {n}! matrices, at most n = {BRUTEFORCE_MAX_N} supported"
        )));
    }
    let padded: Vec<(T, T)> = slots
        .iter()
        .map(|&(b, l)| (b.tmin(l.times(m.get())), l))
        .chain(std::iter::repeat((T::zero(), T::zero())))
        .take(n)
        .collect();
    let rows = idx.rows();
    let mut best: Option<T> = None;
    for perm in (0..n).permutations(n) {
        let monomial = perm
            .iter()
            .zip(&padded)
            .fold(T::zero(), |acc, (&r, &(x, l))| {
                let (eb, el) = rows[r];
                let acc = if eb == 1 { acc + x } else { acc };
                if el == 1 {
                    acc + l
                } else {
                    acc
                }
            });
        best = Some(match best {
            Some(v) => v.tmax(monomial),
            None => monomial,
        });
    }
    best.ok_or_else(|| Error::Parameter("n must be >= 1".into()))
}

fn slots_of(bars: &Barcode) -> Vec<(f64, f64)> {
    bars.bars().iter().map(|b| (b.birth, b.persistence())).collect()
}

/// Orbit polynomial on a barcode. Every bar occupies a slot, so the barcode
/// may hold at most `n` bars.
pub fn gamma_eval(bars: &Barcode, n: usize, m: RegularizationParam, idx: &OrbitIndex) -> Result<f64> {
    gamma_max_plus(&slots_of(bars), n, m, idx)
}

pub fn gamma_bruteforce(bars: &Barcode, n: usize, m: RegularizationParam, idx: &OrbitIndex) -> Result<f64> {
    gamma_bruteforce_slots(&slots_of(bars), n, m, idx)
}

/// All `d` coordinates in [`orbit_indices`] order.
pub fn coordinates<T: Coord>(slots: &[(T, T)], n: usize, m: RegularizationParam) -> Result<Vec<T>> {
    orbit_indices(n)?
        .iter()
        .map(|idx| gamma_max_plus(slots, n, m, idx))
        .collect()
}

/// Tropical coordinates of a barcode, listed in a chosen order.
#[derive(Debug, Clone, PartialEq)]
pub struct TropicalEmbedding {
    pub values: Vec<f64>,
    pub n: usize,
    pub m: RegularizationParam,
    /// `values[t]` is the coordinate at position `coordinate_order[t]` of
    /// [`orbit_indices`].
    pub coordinate_order: Vec<usize>,
}

impl TropicalEmbedding {
    pub fn d(&self) -> usize {
        self.values.len()
    }
}

fn check_permutation(order: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if order.len() != d {
        return Err(Error::Parameter(format!(
            "coordinate order has length {}, expected {d}",
            order.len()
        )));
    }
    for &p in order {
        if p >= d || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Parameter(format!(
                "coordinate order is not a permutation of 0..{d}"
            )));
        }
    }
    Ok(())
}

fn prepared(bars: &Barcode, n: usize, m: RegularizationParam) -> Result<Barcode> {
    if !check_regularized(bars, m) {
        return Err(regularization_error(bars, m)?);
    }
    canonicalize(bars, n)
}

/// The embedding `(T_{π(1)}, …, T_{π(d)})`. Pass `None` for the identity
/// order.
pub fn tropical_embedding(
    bars: &Barcode,
    n: usize,
    m: RegularizationParam,
    order: Option<&[usize]>,
) -> Result<TropicalEmbedding> {
    let d = coordinate_count(n);
    let identity: Vec<usize> = (0..d).collect();
    let order = order.unwrap_or(&identity);
    check_permutation(order, d)?;
    let bars = prepared(bars, n, m)?;
    let raw = coordinates(&slots_of(&bars), n, m)?;
    Ok(TropicalEmbedding {
        values: order.iter().map(|&p| raw[p]).collect(),
        n,
        m,
        coordinate_order: order.to_vec(),
    })
}

/// A point of the ordered cone `x_1 <= x_2 <= … <= x_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedEmbedding {
    values: Vec<f64>,
}

impl SortedEmbedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("embedding has a non-finite entry".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Input("embedding is not nondecreasing".into()));
        }
        Ok(SortedEmbedding { values })
    }

    /// Sorts arbitrary coordinates into the cone.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(f64::total_cmp);
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn d(&self) -> usize {
        self.values.len()
    }
}

impl From<&TropicalEmbedding> for SortedEmbedding {
    fn from(e: &TropicalEmbedding) -> Self {
        let mut values = e.values.clone();
        values.sort_by(f64::total_cmp);
        SortedEmbedding { values }
    }
}

/// The coordinates sorted nondecreasing: the k-th entry is the k-th
/// smallest tropical coordinate.
pub fn sufficient_statistic(bars: &Barcode, n: usize, m: RegularizationParam) -> Result<SortedEmbedding> {
    tropical_embedding(bars, n, m, None).map(|e| SortedEmbedding::from(&e))
}
