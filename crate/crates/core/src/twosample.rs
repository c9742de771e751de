//! Energy statistic and its permutation test.
//!
//! For samples `S1` (size `n1`) and `S2` (size `n2`) the statistic is the
//! V-statistic
//!
//! ```text
//! E = 2/(n1 n2) Σ_{S1×S2} |x - y| - 1/n1² Σ_{S1×S1} |x - x'| - 1/n2² Σ_{S2×S2} |y - y'|
//! ```
//!
//! with Euclidean norms and the zero diagonal terms included in the within
//! sums. Under the null hypothesis the pooled sample is exchangeable, so the
//! statistic is compared against its values under random relabelings that
//! keep the group sizes.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthgeo::euclidean;
use crate::tropical::SortedEmbedding;

/// A nonempty collection of cone vectors of one common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    vectors: Vec<Vec<f64>>,
}

impl Sample {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Input("sample is empty".into()));
        };
        let d = first.len();
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != d {
                return Err(Error::Input(format!(
                    "vector {i} has dimension {}, expected {d}",
                    v.len()
                )));
            }
            SortedEmbedding::new(v.clone())
                .map_err(|e| Error::Input(format!("vector {i}: {e}")))?;
        }
        Ok(Sample { vectors })
    }

    pub fn from_embeddings(embeddings: &[SortedEmbedding]) -> Result<Self> {
        Sample::new(embeddings.iter().map(|e| e.values().to_vec()).collect())
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// Number of relabelings the null distribution was built from.
    #[serde(rename = "permutations")]
    pub num_permutations: usize,
    pub reject: bool,
    pub seed: u64,
    /// Whether every distinct relabeling was enumerated.
    #[serde(skip)]
    pub exact: bool,
}

/// Sum with error growing as O(log n) rather than O(n).
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    pairwise_sum(&terms)
}

fn check_dims(s1: &Sample, s2: &Sample) -> Result<()> {
    if s1.dim() != s2.dim() {
        return Err(Error::Input(format!(
            "samples have dimensions {} and {}",
            s1.dim(),
            s2.dim()
        )));
    }
    Ok(())
}

fn combine(cross: f64, within1: f64, within2: f64, n1: usize, n2: usize) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    // Tiny negative values are rounding noise; the V-statistic is >= 0.
    ((2.0 * cross) / (n1 * n2) - (within1 / (n1 * n1) + within2 / (n2 * n2))).max(0.0)
}

/// The energy statistic. Terms are summed in sorted order, so the result
/// does not depend on argument order or on the order of vectors within a
/// sample.
pub fn energy_statistic(s1: &Sample, s2: &Sample) -> Result<f64> {
    check_dims(s1, s2)?;
    let within = |s: &Sample| {
        sorted_sum(
            s.vectors
                .iter()
                .flat_map(|x| s.vectors.iter().map(move |y| euclidean(x, y)))
                .collect(),
        )
    };
    let cross = sorted_sum(
        s1.vectors
            .iter()
            .flat_map(|x| s2.vectors.iter().map(move |y| euclidean(x, y)))
            .collect(),
    );
    Ok(combine(cross, within(s1), within(s2), s1.len(), s2.len()))
}

/// Pooled sample with its distance matrix, for cheap relabeled statistics.
struct Pooled {
    n: usize,
    n1: usize,
    dist: Vec<f64>,
    scale: f64,
}

impl Pooled {
    fn new(s1: &Sample, s2: &Sample) -> Self {
        let all: Vec<&Vec<f64>> = s1.vectors.iter().chain(&s2.vectors).collect();
        let n = all.len();
        let mut dist = vec![0.0; n * n];
        let mut scale: f64 = 0.0;
        for a in 0..n {
            for b in (a + 1)..n {
                let d = euclidean(all[a], all[b]);
                dist[a * n + b] = d;
                dist[b * n + a] = d;
                scale = scale.max(d);
            }
        }
        Pooled {
            n,
            n1: s1.len(),
            dist,
            scale,
        }
    }

    /// Statistic when `first[a]` marks membership of pooled item `a` in the
    /// first group.
    fn statistic(&self, first: &[bool]) -> f64 {
        let (mut cross, mut w1, mut w2) = (0.0, 0.0, 0.0);
        for a in 0..self.n {
            let row = &self.dist[a * self.n..(a + 1) * self.n];
            let (mut c, mut x, mut y) = (0.0, 0.0, 0.0);
            for b in (a + 1)..self.n {
                match (first[a], first[b]) {
                    (true, true) => x += row[b],
                    (false, false) => y += row[b],
                    _ => c += row[b],
                }
            }
            cross += c;
            w1 += x;
            w2 += y;
        }
        // unordered pairs: within sums count each ordered pair twice
        combine(cross, 2.0 * w1, 2.0 * w2, self.n1, self.n - self.n1)
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Relabelings are enumerated exhaustively for pooled sizes up to this.
pub const EXACT_MAX_POOLED: usize = 8;

/// Null values, already snapped so that values equal to `observed` up to
/// rounding compare equal to it. Returns `(values, exact)`.
fn null_values(pooled: &Pooled, observed: f64, num_permutations: usize, seed: u64) -> (Vec<f64>, bool) {
    let (n, n1) = (pooled.n, pooled.n1);
    let exact = n <= EXACT_MAX_POOLED && num_permutations >= factorial(n);
    let mut values = if exact {
        (0..n)
            .combinations(n1)
            .map(|chosen| {
                let mut first = vec![false; n];
                for a in chosen {
                    first[a] = true;
                }
                pooled.statistic(&first)
            })
            .collect()
    } else {
        crate::par::map_range(num_permutations, |r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut first = vec![false; n];
            for &a in &order[..n1] {
                first[a] = true;
            }
            pooled.statistic(&first)
        })
    };
    let tol = TIE_TOLERANCE * pooled.scale.max(observed.abs());
    for v in values.iter_mut() {
        if (*v - observed).abs() <= tol {
            *v = observed;
        }
    }
    (values, exact)
}

/// Relative tolerance under which a relabeled statistic counts as a tie
/// with the observed one.
pub const TIE_TOLERANCE: f64 = 1e-10;

fn validate(alpha: Option<f64>, num_permutations: usize) -> Result<()> {
    if let Some(alpha) = alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
    }
    if num_permutations == 0 {
        return Err(Error::Parameter("need at least one permutation".into()));
    }
    Ok(())
}

/// Statistic values under random group-size-preserving relabelings of the
/// pooled sample. Replicate `r` draws its relabeling from ChaCha stream `r`
/// of `seed`, so the output does not depend on thread count. When the pooled
/// size is at most [`EXACT_MAX_POOLED`] and `num_permutations >= N!`, every
/// distinct split is listed once instead.
pub fn permutation_null_distribution(
    s1: &Sample,
    s2: &Sample,
    num_permutations: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    validate(None, num_permutations)?;
    let observed = energy_statistic(s1, s2)?;
    let pooled = Pooled::new(s1, s2);
    Ok(null_values(&pooled, observed, num_permutations, seed).0)
}

/// Index (1-based) of the critical order statistic among `count` values.
pub fn critical_rank(alpha: f64, count: usize) -> usize {
    let k = ((1.0 - alpha) * count as f64 - 1e-9).ceil() as usize;
    k.clamp(1, count)
}

/// Monte-Carlo permutation test of equal distributions.
///
/// * `critical_value` is the `⌈(1-α)B⌉`-th smallest null value.
/// * `p_value` is `(1 + #{null >= observed}) / (B + 1)`, or the plain
///   fraction `#{null >= observed} / B` when the null was enumerated
///   exactly (the identity split is then among the null values).
/// * `reject` requires `statistic >= critical_value` and `p_value <= alpha`;
///   the second condition only bites when the observed value ties with the
///   critical value.
pub fn permutation_test(
    s1: &Sample,
    s2: &Sample,
    alpha: f64,
    num_permutations: usize,
    seed: u64,
) -> Result<TestResult> {
    validate(Some(alpha), num_permutations)?;
    let statistic = energy_statistic(s1, s2)?;
    let pooled = Pooled::new(s1, s2);
    let (values, exact) = null_values(&pooled, statistic, num_permutations, seed);
    Ok(summarize(statistic, values, alpha, seed, exact))
}

fn summarize(statistic: f64, mut values: Vec<f64>, alpha: f64, seed: u64, exact: bool) -> TestResult {
    let count = values.len();
    let at_least = values.iter().filter(|&&v| v >= statistic).count();
    let p_value = if exact {
        at_least as f64 / count as f64
    } else {
        (1 + at_least) as f64 / (count + 1) as f64
    };
    values.sort_by(f64::total_cmp);
    let critical_value = values[critical_rank(alpha, count) - 1];
    TestResult {
        statistic,
        critical_value,
        p_value,
        alpha,
        num_permutations: count,
        reject: statistic >= critical_value && p_value <= alpha,
        seed,
        exact,
    }
}
