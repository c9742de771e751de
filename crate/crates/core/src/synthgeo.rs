//! Synthetic geometric objects: noisy samples of parametric shapes and
//! their pairwise distance matrices.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    /// Parameter `radius`.
    Circle,
    /// Parameters `inner_radius` < `outer_radius`; uniform in area.
    Annulus,
    /// Two circles of radius `radius` touching at the origin.
    FigureEight,
    /// 2-sphere of radius `radius`.
    Sphere,
    /// Parameters `ring_radius` > `tube_radius`.
    Torus,
    /// Isotropic Gaussian blob with standard deviation `spread`.
    ClusterBlob,
}

impl ShapeKind {
    fn required_params(self) -> &'static [&'static str] {
        match self {
            ShapeKind::Circle | ShapeKind::FigureEight | ShapeKind::Sphere => &["radius"],
            ShapeKind::Annulus => &["inner_radius", "outer_radius"],
            ShapeKind::Torus => &["ring_radius", "tube_radius"],
            ShapeKind::ClusterBlob => &["spread"],
        }
    }

    fn min_ambient_dim(self) -> usize {
        match self {
            ShapeKind::Circle | ShapeKind::Annulus | ShapeKind::FigureEight => 2,
            ShapeKind::Sphere | ShapeKind::Torus => 3,
            ShapeKind::ClusterBlob => 1,
        }
    }
}

/// A parametric shape together with the dimension of the space it lives in.
///
/// Shapes occupy the leading coordinates; any extra ambient coordinates are
/// zero before noise is added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub parameters: BTreeMap<String, f64>,
    pub ambient_dim: usize,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, parameters: &[(&str, f64)], ambient_dim: usize) -> Result<Self> {
        let spec = ShapeSpec {
            kind,
            parameters: parameters
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            ambient_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(ShapeKind::Circle, &[("radius", radius)], 2)
    }

    pub fn figure_eight(radius: f64) -> Result<Self> {
        Self::new(ShapeKind::FigureEight, &[("radius", radius)], 2)
    }

    pub fn torus(ring_radius: f64, tube_radius: f64) -> Result<Self> {
        Self::new(
            ShapeKind::Torus,
            &[("ring_radius", ring_radius), ("tube_radius", tube_radius)],
            3,
        )
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        self.parameters
            .get(name)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("{:?} shape needs parameter `{name}`", self.kind)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim < self.kind.min_ambient_dim() {
            return Err(Error::Parameter(format!(
                "{:?} needs ambient_dim >= {}, got {}",
                self.kind,
                self.kind.min_ambient_dim(),
                self.ambient_dim
            )));
        }
        for name in self.kind.required_params() {
            let v = self.param(name)?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!(
                    "parameter `{name}` must be finite and > 0, got {v}"
                )));
            }
        }
        match self.kind {
            ShapeKind::Annulus if self.param("inner_radius")? >= self.param("outer_radius")? => {
                Err(Error::Parameter(
                    "annulus needs inner_radius < outer_radius".into(),
                ))
            }
            ShapeKind::Torus if self.param("tube_radius")? >= self.param("ring_radius")? => Err(
                Error::Parameter("torus needs tube_radius < ring_radius".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// A finite sample of a geometric object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    pub label: Option<String>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Input("point cloud is empty".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::Input("points must have at least one coordinate".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Input(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Input(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(PointCloud {
            points,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// Symmetric, nonnegative, zero-diagonal matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates and wraps a square matrix given row by row.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::Input("distance matrix is empty".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(Error::Input(format!(
                    "distance matrix row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        let dm = DistanceMatrix { size, entries };
        dm.validate()?;
        Ok(dm)
    }

    fn validate(&self) -> Result<()> {
        let scale = self.entries.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let tol = 1e-12 * (1.0 + scale);
        for i in 0..self.size {
            if self.get(i, i) != 0.0 {
                return Err(Error::Input(format!("diagonal entry ({i},{i}) is not zero")));
            }
            for j in 0..self.size {
                let v = self.get(i, j);
                if !v.is_finite() {
                    return Err(Error::Input(format!("entry ({i},{j}) is not finite")));
                }
                if v < 0.0 {
                    return Err(Error::Input(format!("entry ({i},{j}) is negative")));
                }
                if (v - self.get(j, i)).abs() > tol {
                    return Err(Error::Input(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.size)
    }

    /// Smallest over points of the largest distance to any other point.
    /// Every Rips complex at or beyond this scale is a cone, hence contractible.
    pub fn enclosing_radius(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().copied().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks the triangle inequality on `samples` random triples.
    pub fn triangle_inequality_holds(&self, samples: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.size;
        (0..samples).all(|_| {
            let (i, j, k) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            let lhs = self.get(i, k);
            let rhs = self.get(i, j) + self.get(j, k);
            lhs <= rhs + 1e-12 * (1.0 + rhs)
        })
    }
}

/// Draws `count` points uniformly from the shape (arc-length / area /
/// surface measure) and perturbs each coordinate with N(0, noise_sd²).
pub fn sample_shape(spec: &ShapeSpec, count: usize, noise_sd: f64, seed: u64) -> Result<PointCloud> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::Parameter("count must be >= 1".into()));
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(Error::Parameter(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = vec![0.0; spec.ambient_dim];
        sample_ideal(spec, &mut rng, &mut p)?;
        if noise_sd > 0.0 {
            for c in p.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *c += noise_sd * z;
            }
        }
        points.push(p);
    }
    PointCloud::new(points)
}

fn sample_ideal(spec: &ShapeSpec, rng: &mut ChaCha8Rng, p: &mut [f64]) -> Result<()> {
    match spec.kind {
        ShapeKind::Circle => {
            let r = spec.param("radius")?;
            let t = rng.random_range(0.0..TAU);
            p[0] = r * t.cos();
            p[1] = r * t.sin();
        }
        ShapeKind::Annulus => {
            let (ri, ro) = (spec.param("inner_radius")?, spec.param("outer_radius")?);
            let r = rng.random_range(ri * ri..ro * ro).sqrt();
            let t = rng.random_range(0.0..TAU);
            p[0] = r * t.cos();
            p[1] = r * t.sin();
        }
        ShapeKind::FigureEight => {
            let r = spec.param("radius")?;
            let center = if rng.random_bool(0.5) { r } else { -r };
            let t = rng.random_range(0.0..TAU);
            p[0] = center + r * t.cos();
            p[1] = r * t.sin();
        }
        ShapeKind::Sphere => {
            let r = spec.param("radius")?;
            loop {
                let v: [f64; 3] = [
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                ];
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    for k in 0..3 {
                        p[k] = r * v[k] / norm;
                    }
                    break;
                }
            }
        }
        ShapeKind::Torus => {
            let (big, small) = (spec.param("ring_radius")?, spec.param("tube_radius")?);
            // The surface element is proportional to (R + r cos φ).
            let phi = loop {
                let phi = rng.random_range(0.0..TAU);
                let u: f64 = rng.random();
                if u * (big + small) <= big + small * phi.cos() {
                    break phi;
                }
            };
            let theta = rng.random_range(0.0..TAU);
            let w = big + small * phi.cos();
            p[0] = w * theta.cos();
            p[1] = w * theta.sin();
            p[2] = small * phi.sin();
        }
        ShapeKind::ClusterBlob => {
            let s = spec.param("spread")?;
            for c in p.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *c = s * z;
            }
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn pairwise_distances(pc: &PointCloud) -> DistanceMatrix {
    let n = pc.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(&pc.points[i], &pc.points[j]);
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix { size: n, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn radius(p: &[f64]) -> f64 {
        p.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_noise_circle_points_lie_on_circle() {
        let spec = ShapeSpec::circle(1.0).unwrap();
        let one = sample_shape(&spec, 1, 0.0, 3).unwrap();
        assert_relative_eq!(radius(&one.points()[0]), 1.0, epsilon = 1e-12);
        let many = sample_shape(&spec, 500, 0.0, 3).unwrap();
        assert_eq!(many.len(), 500);
        for p in many.points() {
            assert!((radius(p) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn noisy_torus_stays_near_surface() {
        // exact point-to-torus distance
        let dist = |p: &[f64]| {
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            (((rho - 2.0).powi(2) + p[2] * p[2]).sqrt() - 0.5).abs()
        };
        let spec = ShapeSpec::torus(2.0, 0.5).unwrap();
        for seed in 0..20 {
            let pc = sample_shape(&spec, 200, 0.01, seed).unwrap();
            let near = pc.points().iter().filter(|p| dist(p) <= 0.07).count();
            assert!(near as f64 >= 0.99 * 200.0, "seed {seed}: {near}/200");
        }
    }

    #[test]
    fn torus_rejection_sampling_matches_surface_measure() {
        // Under the surface measure the fraction of points on the outer half
        // (cos φ > 0) is (π R + 2 r) / (2 π R).
        let (big, small) = (2.0, 0.5);
        let spec = ShapeSpec::torus(big, small).unwrap();
        let pc = sample_shape(&spec, 40_000, 0.0, 11).unwrap();
        let outer = pc
            .points()
            .iter()
            .filter(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() > big)
            .count() as f64
            / 40_000.0;
        let expected = (std::f64::consts::PI * big + 2.0 * small) / (TAU * big);
        assert!((outer - expected).abs() < 0.01, "{outer} vs {expected}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = ShapeSpec::new(ShapeKind::Annulus, &[("inner_radius", 0.5), ("outer_radius", 1.0)], 3)
            .unwrap();
        let a = sample_shape(&spec, 64, 0.1, 42).unwrap();
        let b = sample_shape(&spec, 64, 0.1, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_shape(&spec, 64, 0.1, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(ShapeSpec::circle(0.0).is_err());
        assert!(ShapeSpec::circle(-1.0).is_err());
        assert!(ShapeSpec::torus(0.5, 2.0).is_err());
        assert!(
            ShapeSpec::new(ShapeKind::Annulus, &[("inner_radius", 2.0), ("outer_radius", 1.0)], 2)
                .is_err()
        );
        assert!(ShapeSpec::new(ShapeKind::Sphere, &[("radius", 1.0)], 2).is_err());
        assert!(ShapeSpec::new(ShapeKind::Circle, &[], 2).is_err());
        let spec = ShapeSpec::circle(1.0).unwrap();
        assert!(sample_shape(&spec, 0, 0.0, 1).is_err());
        assert!(sample_shape(&spec, 3, -0.1, 1).is_err());
    }

    #[test]
    fn distance_examples() {
        let single = PointCloud::new(vec![vec![1.0, 2.0]]).unwrap();
        let dm = pairwise_distances(&single);
        assert_eq!(dm.size(), 1);
        assert_eq!(dm.get(0, 0), 0.0);

        let pair = PointCloud::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(pairwise_distances(&pair).get(0, 1), 5.0);

        let square = PointCloud::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let dm = pairwise_distances(&square);
        let mut off: Vec<f64> = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| dm.get(i, j))
            .collect();
        off.sort_by(f64::total_cmp);
        assert_eq!(&off[..8], &[1.0; 8]);
        for v in &off[8..] {
            assert_relative_eq!(*v, 2f64.sqrt(), epsilon = 1e-15);
        }
        assert!(dm.triangle_inequality_holds(200, 0));
    }

    #[test]
    fn malformed_inputs() {
        assert!(PointCloud::new(vec![]).is_err());
        assert!(PointCloud::new(vec![vec![0.0, 1.0], vec![0.0]]).is_err());
        assert!(PointCloud::new(vec![vec![f64::NAN]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![1.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn enclosing_radius_of_square() {
        let square = PointCloud::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        assert_relative_eq!(pairwise_distances(&square).enclosing_radius(), 2f64.sqrt());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn distances_symmetric_and_rigid_motion_invariant(
                seed in any::<u64>(),
                angle in 0.0..TAU,
                tx in -10.0..10.0f64,
                ty in -10.0..10.0f64,
            ) {
                let spec = ShapeSpec::figure_eight(0.7).unwrap();
                let pc = sample_shape(&spec, 25, 0.05, seed).unwrap();
                let dm = pairwise_distances(&pc);
                let (s, c) = angle.sin_cos();
                let moved = PointCloud::new(
                    pc.points()
                        .iter()
                        .map(|p| vec![c * p[0] - s * p[1] + tx, s * p[0] + c * p[1] + ty])
                        .collect(),
                )
                .unwrap();
                let dm2 = pairwise_distances(&moved);
                for i in 0..dm.size() {
                    prop_assert_eq!(dm.get(i, i), 0.0);
                    for j in 0..dm.size() {
                        prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                        let (a, b) = (dm.get(i, j), dm2.get(i, j));
                        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-3), "{} vs {}", a, b);
                    }
                }
            }
        }
    }
}
