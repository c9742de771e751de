use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::synthgeo::DistanceMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    pub scale: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Faces obtained by dropping one vertex, in the order of the dropped
    /// vertex position.
    pub fn faces(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.vertices.len()).map(move |skip| {
            self.vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
    }
}

/// Filtration order: scale, then dimension, then lexicographic vertices.
pub(crate) fn filtration_cmp(a: &Simplex, b: &Simplex) -> Ordering {
    a.scale
        .total_cmp(&b.scale)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// A Vietoris–Rips filtration, stored as a list of simplices in filtration
/// order. Every face precedes its cofaces.
#[derive(Debug, Clone)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    max_dim: usize,
    max_scale: f64,
    n_vertices: usize,
}

impl Filtration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_scale(&self) -> f64 {
        self.max_scale
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn count_of_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }
}

/// Enumerates every clique of the neighbourhood graph at `max_scale` with at
/// most `max_dim + 1` vertices. A simplex enters at the largest pairwise
/// distance among its vertices.
pub fn build_rips_filtration(dm: &DistanceMatrix, max_dim: usize, max_scale: f64) -> Result<Filtration> {
    if !(max_scale.is_finite() && max_scale > 0.0) {
        return Err(Error::Parameter(format!(
            "max_scale must be finite and > 0, got {max_scale}"
        )));
    }
    let n = dm.size();
    // Forward neighbours only, so each clique is generated once in
    // increasing vertex order.
    let upper: Vec<Vec<usize>> = (0..n)
        .map(|i| ((i + 1)..n).filter(|&j| dm.get(i, j) <= max_scale).collect())
        .collect();

    let mut simplices = Vec::new();
    let mut clique = Vec::with_capacity(max_dim + 1);
    for v in 0..n {
        clique.push(v);
        extend_clique(dm, &upper, max_dim, &mut clique, 0.0, &upper[v], &mut simplices);
        clique.pop();
    }
    simplices.sort_by(filtration_cmp);
    Ok(Filtration {
        simplices,
        max_dim,
        max_scale,
        n_vertices: n,
    })
}

fn extend_clique(
    dm: &DistanceMatrix,
    upper: &[Vec<usize>],
    max_dim: usize,
    clique: &mut Vec<usize>,
    scale: f64,
    candidates: &[usize],
    out: &mut Vec<Simplex>,
) {
    out.push(Simplex {
        vertices: clique.clone(),
        scale,
    });
    if clique.len() > max_dim {
        return;
    }
    for (pos, &w) in candidates.iter().enumerate() {
        let new_scale = clique.iter().fold(scale, |s, &u| s.max(dm.get(u, w)));
        // Remaining candidates adjacent to w as well.
        let next: Vec<usize> = candidates[pos + 1..]
            .iter()
            .copied()
            .filter(|x| upper[w].binary_search(x).is_ok())
            .collect();
        clique.push(w);
        extend_clique(dm, upper, max_dim, clique, new_scale, &next, out);
        clique.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(rows: Vec<Vec<f64>>) -> DistanceMatrix {
        DistanceMatrix::from_rows(rows).unwrap()
    }

    fn unit_square() -> DistanceMatrix {
        let s = 2f64.sqrt();
        dm(vec![
            vec![0.0, 1.0, s, 1.0],
            vec![1.0, 0.0, 1.0, s],
            vec![s, 1.0, 0.0, 1.0],
            vec![1.0, s, 1.0, 0.0],
        ])
    }

    #[test]
    fn two_points() {
        let f = build_rips_filtration(&dm(vec![vec![0.0, 3.0], vec![3.0, 0.0]]), 1, 5.0).unwrap();
        let got: Vec<_> = f.simplices().iter().map(|s| (s.vertices.clone(), s.scale)).collect();
        assert_eq!(got, vec![(vec![0], 0.0), (vec![1], 0.0), (vec![0, 1], 3.0)]);
    }

    #[test]
    fn equilateral_triangle() {
        let f = build_rips_filtration(
            &dm(vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ]),
            2,
            5.0,
        )
        .unwrap();
        let tri = f.simplices().last().unwrap();
        assert_eq!(tri.vertices, vec![0, 1, 2]);
        assert_eq!(tri.scale, 1.0);
    }

    #[test]
    fn unit_square_counts() {
        let s = 2f64.sqrt();
        let f = build_rips_filtration(&unit_square(), 3, 2.0).unwrap();
        let count = |dim: usize, scale: f64| {
            f.simplices()
                .iter()
                .filter(|x| x.dim() == dim && x.scale == scale)
                .count()
        };
        assert_eq!(count(0, 0.0), 4);
        assert_eq!(count(1, 1.0), 4);
        assert_eq!(count(1, s), 2);
        assert_eq!(count(2, s), 4);
        assert_eq!(count(3, s), 1);

        let f2 = build_rips_filtration(&unit_square(), 2, 2.0).unwrap();
        assert_eq!(f2.count_of_dim(3), 0);
        assert_eq!(f2.count_of_dim(2), 4);

        // scale cutoff drops the diagonals and everything above them
        let f3 = build_rips_filtration(&unit_square(), 2, 1.2).unwrap();
        assert_eq!(f3.count_of_dim(1), 4);
        assert_eq!(f3.count_of_dim(2), 0);
    }

    #[test]
    fn faces_precede_cofaces() {
        let f = build_rips_filtration(&unit_square(), 3, 2.0).unwrap();
        let pos = |v: &[usize]| f.simplices().iter().position(|s| s.vertices == v).unwrap();
        for (i, s) in f.simplices().iter().enumerate() {
            if s.dim() > 0 {
                for face in s.faces() {
                    assert!(pos(&face) < i);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(build_rips_filtration(&unit_square(), 2, 0.0).is_err());
        assert!(build_rips_filtration(&unit_square(), 2, f64::NAN).is_err());
    }
}
