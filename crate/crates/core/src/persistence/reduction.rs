//! Column reduction over the two-element field.
//!
//! Barcodes are read off the reduced coboundary matrix, i.e. the boundary
//! matrix with rows and columns reversed. The pairing is the same as for the
//! boundary matrix, but Rips complexes have far fewer edges than triangles,
//! so reducing edge columns is much cheaper than reducing triangle columns.
//! Columns whose simplex was already paired as a death in the previous
//! dimension are known to reduce to zero and are skipped (clearing).

use std::collections::HashMap;

use super::filtration::Filtration;
use super::{Bar, Barcode, EssentialPolicy};
use crate::error::{Error, Result};

/// Persistence pairs of one homology dimension, as filtration indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Pairs {
    pub finite: Vec<(usize, usize)>,
    pub essential: Vec<usize>,
}

/// Symmetric difference of two ascending index lists.
pub(crate) fn xor_into(acc: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < other.len() {
        match acc[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(acc[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&acc[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(acc, scratch);
}

/// Standard left-to-right reduction. `columns` yields (column id, ascending
/// row keys); the pivot of a column is its largest key. Returns the
/// (column id, pivot key) pairs and the ids of columns reducing to zero.
pub(crate) fn reduce<I>(columns: I, n_rows: usize) -> (Vec<(usize, u32)>, Vec<usize>)
where
    I: IntoIterator<Item = (usize, Vec<u32>)>,
{
    let mut pivot_owner: Vec<u32> = vec![u32::MAX; n_rows];
    let mut reduced: Vec<Vec<u32>> = Vec::new();
    let mut pairs = Vec::new();
    let mut zero = Vec::new();
    let mut scratch = Vec::new();
    for (id, mut col) in columns {
        while let Some(&low) = col.last() {
            let owner = pivot_owner[low as usize];
            if owner == u32::MAX {
                break;
            }
            xor_into(&mut col, &reduced[owner as usize], &mut scratch);
        }
        match col.last() {
            Some(&low) => {
                pivot_owner[low as usize] = reduced.len() as u32;
                reduced.push(col);
                pairs.push((id, low));
            }
            None => zero.push(id),
        }
    }
    (pairs, zero)
}

struct Indexed<'a> {
    by_dim: Vec<Vec<usize>>,
    lookup: HashMap<&'a [usize], usize>,
}

impl<'a> Indexed<'a> {
    fn new(f: &'a Filtration, top_dim: usize) -> Self {
        let mut by_dim = vec![Vec::new(); top_dim + 1];
        let mut lookup = HashMap::new();
        for (i, s) in f.simplices().iter().enumerate() {
            let d = s.dim();
            if d <= top_dim {
                by_dim[d].push(i);
                lookup.insert(s.vertices.as_slice(), i);
            }
        }
        Indexed { by_dim, lookup }
    }

    fn face_indices<'b>(&'b self, f: &'b Filtration, idx: usize) -> impl Iterator<Item = usize> + 'b {
        f.simplices()[idx].faces().map(move |face| self.lookup[face.as_slice()])
    }
}

/// Persistence pairs of dimensions `0..=top_dim` by cohomology with clearing.
pub(crate) fn cohomology_pairs(f: &Filtration, top_dim: usize) -> Vec<Pairs> {
    let total = f.len();
    let index = Indexed::new(f, top_dim + 1);
    let rev = |i: usize| (total - 1 - i) as u32;
    let mut cleared = vec![false; total];
    let mut out = Vec::with_capacity(top_dim + 1);
    for dim in 0..=top_dim {
        let mut cob: HashMap<usize, Vec<u32>> = index.by_dim[dim]
            .iter()
            .filter(|&&i| !cleared[i])
            .map(|&i| (i, Vec::new()))
            .collect();
        for &tau in &index.by_dim[dim + 1] {
            for face in index.face_indices(f, tau) {
                if let Some(col) = cob.get_mut(&face) {
                    col.push(rev(tau));
                }
            }
        }
        let columns = index.by_dim[dim]
            .iter()
            .rev()
            .filter(|&&i| !cleared[i])
            .map(|&i| {
                let mut col = cob.remove(&i).unwrap_or_default();
                col.sort_unstable();
                (i, col)
            });
        let (pairs, zero) = reduce(columns, total);
        let mut result = Pairs {
            finite: Vec::with_capacity(pairs.len()),
            essential: zero,
        };
        for (sigma, low) in pairs {
            let tau = total - 1 - low as usize;
            cleared[tau] = true;
            result.finite.push((sigma, tau));
        }
        result.essential.sort_unstable();
        result.finite.sort_unstable();
        out.push(result);
    }
    out
}

/// Persistence pairs of dimension `dim` from the plain boundary matrix,
/// clearing from the top dimension down. Used to cross-check the
/// cohomology route.
#[cfg(test)]
pub(crate) fn homology_pairs(f: &Filtration, dim: usize) -> Pairs {
    let total = f.len();
    let index = Indexed::new(f, dim + 1);
    let boundary = |i: usize| {
        let mut col: Vec<u32> = if f.simplices()[i].dim() == 0 {
            Vec::new()
        } else {
            index.face_indices(f, i).map(|x| x as u32).collect()
        };
        col.sort_unstable();
        (i, col)
    };
    let (upper, _) = reduce(index.by_dim[dim + 1].iter().map(|&i| boundary(i)), total);
    let mut paired = vec![false; total];
    let mut finite = Vec::new();
    for (tau, low) in upper {
        paired[low as usize] = true;
        finite.push((low as usize, tau));
    }
    let (_, zero) = reduce(
        index.by_dim[dim]
            .iter()
            .filter(|&&i| !paired[i])
            .map(|&i| boundary(i)),
        total,
    );
    let mut essential = zero;
    essential.sort_unstable();
    finite.sort_unstable();
    Pairs { finite, essential }
}

pub(crate) fn pairs_to_barcode(
    f: &Filtration,
    dim: usize,
    pairs: &Pairs,
    policy: EssentialPolicy,
) -> Barcode {
    let scale = |i: usize| f.simplices()[i].scale;
    let mut bars: Vec<Bar> = pairs
        .finite
        .iter()
        .filter(|&&(s, t)| scale(s) < scale(t))
        .map(|&(s, t)| Bar::new_unchecked(scale(s), scale(t)))
        .collect();
    if policy == EssentialPolicy::Truncate {
        bars.extend(
            pairs
                .essential
                .iter()
                .filter(|&&s| scale(s) < f.max_scale())
                .map(|&s| Bar::new_unchecked(scale(s), f.max_scale())),
        );
    }
    Barcode::from_bars_unchecked(dim, bars)
}

/// Barcode of `homology_dim` over the two-element field.
///
/// Pairs born and killed at the same scale are not reported. Classes that
/// are never killed within the filtration are cut at `max_scale` under
/// [`EssentialPolicy::Truncate`] and omitted under [`EssentialPolicy::Drop`].
pub fn compute_barcode(f: &Filtration, homology_dim: usize, policy: EssentialPolicy) -> Result<Barcode> {
    if homology_dim >= f.max_dim() {
        return Err(Error::Config(format!(
            "homology dimension {homology_dim} needs a filtration with max_dim > {homology_dim}, got {}",
            f.max_dim()
        )));
    }
    let pairs = cohomology_pairs(f, homology_dim);
    Ok(pairs_to_barcode(f, homology_dim, &pairs[homology_dim], policy))
}
