//! Bottleneck distance between barcodes.
//!
//! Bars are compared in interval form: a matched pair costs
//! `max(|b1 - b2|, |d1 - d2|)`, a bar sent to the diagonal costs `l / 2`.

use super::{Bar, Barcode};
use crate::error::{Error, Result};

/// A partial bijection between the bars of two barcodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    /// `(left index, right index)` pairs, sorted by left index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_left: Vec<usize>,
    pub unmatched_right: Vec<usize>,
}

#[inline]
fn pair_cost(a: &Bar, b: &Bar) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

#[inline]
fn diagonal_cost(a: &Bar) -> f64 {
    a.persistence() / 2.0
}

fn check_dims(b1: &Barcode, b2: &Barcode) -> Result<()> {
    if b1.homology_dim() != b2.homology_dim() {
        return Err(Error::Input(format!(
            "cannot compare barcodes of dimensions {} and {}",
            b1.homology_dim(),
            b2.homology_dim()
        )));
    }
    Ok(())
}

/// Bipartite graph on `p + q` nodes per side. Left holds the bars of `a`
/// then the diagonal copies of `b`; right holds the bars of `b` then the
/// diagonal copies of `a`.
struct Graph<'a> {
    a: &'a [Bar],
    b: &'a [Bar],
}

impl Graph<'_> {
    fn size(&self) -> usize {
        self.a.len() + self.b.len()
    }

    /// Cost of edge (u, v), or `None` if there is no such edge.
    fn cost(&self, u: usize, v: usize) -> Option<f64> {
        let (p, q) = (self.a.len(), self.b.len());
        match (u < p, v < q) {
            (true, true) => Some(pair_cost(&self.a[u], &self.b[v])),
            (true, false) => (v - q == u).then(|| diagonal_cost(&self.a[u])),
            (false, true) => (u - p == v).then(|| diagonal_cost(&self.b[v])),
            (false, false) => Some(0.0),
        }
    }

    /// Perfect matching using only edges of cost <= `threshold`, by
    /// augmenting paths. Returns `mate[u] = v` on success.
    fn perfect_matching(&self, threshold: f64) -> Option<Vec<usize>> {
        let n = self.size();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|u| {
                (0..n)
                    .filter(|&v| self.cost(u, v).is_some_and(|c| c <= threshold))
                    .collect()
            })
            .collect();
        let mut mate_right = vec![usize::MAX; n];
        for u in 0..n {
            let mut seen = vec![false; n];
            if !augment(u, &adj, &mut mate_right, &mut seen) {
                return None;
            }
        }
        let mut mate = vec![usize::MAX; n];
        for (v, &u) in mate_right.iter().enumerate() {
            mate[u] = v;
        }
        Some(mate)
    }
}

fn augment(u: usize, adj: &[Vec<usize>], mate_right: &mut [usize], seen: &mut [bool]) -> bool {
    for &v in &adj[u] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if mate_right[v] == usize::MAX || augment(mate_right[v], adj, mate_right, seen) {
            mate_right[v] = u;
            return true;
        }
    }
    false
}

/// Bottleneck distance together with an optimal matching.
pub fn bottleneck_matching(b1: &Barcode, b2: &Barcode) -> Result<(f64, Matching)> {
    check_dims(b1, b2)?;
    let graph = Graph {
        a: b1.bars(),
        b: b2.bars(),
    };
    let n = graph.size();
    let mut candidates: Vec<f64> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter_map(|(u, v)| graph.cost(u, v))
        .collect();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // The largest candidate always admits a perfect matching.
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if graph.perfect_matching(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let distance = candidates[lo];
    let mate = graph
        .perfect_matching(distance)
        .expect("threshold found by search admits a matching");

    let (p, q) = (b1.len(), b2.len());
    let mut matching = Matching::default();
    for (u, &v) in mate.iter().enumerate().take(p) {
        if v < q {
            matching.pairs.push((u, v));
        } else {
            matching.unmatched_left.push(u);
        }
    }
    let matched_right: Vec<bool> = {
        let mut m = vec![false; q];
        for &(_, v) in &matching.pairs {
            m[v] = true;
        }
        m
    };
    matching.unmatched_right = (0..q).filter(|&v| !matched_right[v]).collect();
    Ok((distance, matching))
}

pub fn bottleneck_distance(b1: &Barcode, b2: &Barcode) -> Result<f64> {
    bottleneck_matching(b1, b2).map(|(d, _)| d)
}

/// Penalty of a given matching: the worst matched or diagonal cost.
pub fn matching_cost(b1: &Barcode, b2: &Barcode, m: &Matching) -> f64 {
    let matched = m
        .pairs
        .iter()
        .map(|&(u, v)| pair_cost(&b1.bars()[u], &b2.bars()[v]));
    let left = m.unmatched_left.iter().map(|&u| diagonal_cost(&b1.bars()[u]));
    let right = m.unmatched_right.iter().map(|&v| diagonal_cost(&b2.bars()[v]));
    matched.chain(left).chain(right).fold(0.0, f64::max)
}

/// Largest total bar count accepted by [`bottleneck_bruteforce`].
pub const BRUTEFORCE_MAX_BARS: usize = 8;

/// Minimum penalty over every partial bijection, by exhaustive search.
pub fn bottleneck_bruteforce(b1: &Barcode, b2: &Barcode) -> Result<f64> {
    check_dims(b1, b2)?;
    if b1.len() + b2.len() > BRUTEFORCE_MAX_BARS {
        return Err(Error::TooLarge(format!(
            "{} bars in total, at most {BRUTEFORCE_MAX_BARS} supported",
            b1.len() + b2.len()
        )));
    }
    let mut used = vec![false; b2.len()];
    Ok(search(b1.bars(), b2.bars(), 0, &mut used, 0.0))
}

fn search(a: &[Bar], b: &[Bar], i: usize, used: &mut [bool], worst: f64) -> f64 {
    if i == a.len() {
        return b
            .iter()
            .zip(used.iter())
            .filter(|(_, &u)| !u)
            .map(|(bar, _)| diagonal_cost(bar))
            .fold(worst, f64::max);
    }
    let mut best = search(a, b, i + 1, used, worst.max(diagonal_cost(&a[i])));
    for j in 0..b.len() {
        if !used[j] {
            used[j] = true;
            let cost = worst.max(pair_cost(&a[i], &b[j]));
            best = best.min(search(a, b, i + 1, used, cost));
            used[j] = false;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bc(pairs: &[(f64, f64)]) -> Barcode {
        Barcode::from_pairs(1, pairs).unwrap()
    }

    #[test]
    fn examples() {
        let x = bc(&[(2.0, 1.0)]);
        let y = bc(&[(2.0, 3.0)]);
        assert_eq!(bottleneck_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(bottleneck_distance(&x, &y).unwrap(), 1.5);
        assert_eq!(bottleneck_bruteforce(&x, &y).unwrap(), 1.5);
        assert_eq!(bottleneck_bruteforce(&x, &x).unwrap(), 0.0);
        assert_eq!(bottleneck_distance(&bc(&[(0.0, 2.0)]), &bc(&[])).unwrap(), 1.0);
        assert_eq!(bottleneck_distance(&bc(&[]), &bc(&[])).unwrap(), 0.0);
    }

    #[test]
    fn matching_realises_distance() {
        let x = bc(&[(0.0, 4.0), (1.0, 0.2), (3.0, 2.0)]);
        let y = bc(&[(0.1, 3.8), (2.5, 2.4)]);
        let (d, m) = bottleneck_matching(&x, &y).unwrap();
        assert_eq!(matching_cost(&x, &y, &m), d);
        assert_eq!(m.pairs.len() + m.unmatched_left.len(), 3);
        assert_eq!(m.pairs.len() + m.unmatched_right.len(), 2);
    }

    #[test]
    fn dimension_mismatch() {
        let x = Barcode::from_pairs(0, &[]).unwrap();
        let y = Barcode::from_pairs(1, &[]).unwrap();
        assert!(matches!(bottleneck_distance(&x, &y), Err(Error::Input(_))));
        assert!(bottleneck_bruteforce(&x, &y).is_err());
    }

    #[test]
    fn bruteforce_refuses_large_inputs() {
        let x = bc(&[(0.0, 1.0); 5]);
        assert!(matches!(bottleneck_bruteforce(&x, &x), Err(Error::TooLarge(_))));
    }

    fn barcode(max_bars: usize) -> impl Strategy<Value = Barcode> {
        prop::collection::vec((0.0..10.0f64, 0.0..5.0f64), 0..=max_bars).prop_map(|v| bc(&v))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn pseudometric(a in barcode(5), b in barcode(5), c in barcode(5)) {
            let ab = bottleneck_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, bottleneck_distance(&b, &a).unwrap());
            let bc_ = bottleneck_distance(&b, &c).unwrap();
            let ac = bottleneck_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc_ + 1e-9);
        }

        #[test]
        fn zero_bars_are_free(a in barcode(4), b in barcode(4), birth in 0.0..10.0f64) {
            let d = bottleneck_distance(&a, &b).unwrap();
            let mut bars = a.bars().to_vec();
            bars.push(Bar::new(birth, 0.0).unwrap());
            let a2 = Barcode::new(1, bars).unwrap();
            prop_assert_eq!(d, bottleneck_distance(&a2, &b).unwrap());
        }
    }
}
