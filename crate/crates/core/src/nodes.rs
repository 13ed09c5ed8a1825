//! Reference-element collocation points and physical meshes.
//!
//! All node sets live on the reference element `[-1, 1]`. Scattered sets are
//! drawn from a `ChaCha8Rng` seeded with the user seed; the noise values are
//! consumed in ascending node order so a `(n_points, seed)` pair always yields
//! the same set on every platform.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dop::legendre_eval;
use crate::error::{Error, Result};
use crate::report::fmt_f64;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Equidistant,
    Scattered,
    GaussLobatto,
    GaussLegendre,
}

impl NodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Equidistant => "equidistant",
            NodeKind::Scattered => "scattered",
            NodeKind::GaussLobatto => "gauss-lobatto",
            NodeKind::GaussLegendre => "gauss-legendre",
        }
    }
}

impl std::str::FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "equidistant" | "equid" => Ok(NodeKind::Equidistant),
            "scattered" | "rand" | "random" => Ok(NodeKind::Scattered),
            "gauss-lobatto" | "gl" | "lobatto" => Ok(NodeKind::GaussLobatto),
            "gauss-legendre" | "legendre" => Ok(NodeKind::GaussLegendre),
            other => Err(Error::invalid(format!("unknown node kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered, distinct points in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    points: Vec<f64>,
    kind: NodeKind,
}

impl NodeSet {
    /// Wraps user-supplied points after checking ordering and range.
    pub fn new(points: Vec<f64>, kind: NodeKind) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("node set is empty"));
        }
        if points.iter().any(|p| !p.is_finite() || p.abs() > 1.0) {
            return Err(Error::invalid("nodes must lie in [-1, 1]"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("nodes must be strictly increasing"));
        }
        Ok(NodeSet { points, kind })
    }

    /// Builds a set without validation. Used by generators that guarantee
    /// the invariants, and by tests that need deliberately broken input.
    pub fn from_raw(points: Vec<f64>, kind: NodeKind) -> Self {
        NodeSet { points, kind }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `N` in the usual notation: number of points minus one.
    pub fn degree_n(&self) -> usize {
        self.points.len() - 1
    }

    pub fn min_gap(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi\n");
        for p in &self.points {
            out.push_str(&fmt_f64(*p));
            out.push('\n');
        }
        out
    }
}

/// `xi_n = -1 + 2n/N` for `n = 0..=N`, `N = n_points - 1`.
pub fn equidistant_nodes(n_points: usize) -> Result<NodeSet> {
    if n_points < 2 {
        return Err(Error::invalid(format!(
            "equidistant nodes need at least 2 points, got {n_points}"
        )));
    }
    let n = (n_points - 1) as f64;
    let points = (0..n_points).map(|i| -1.0 + 2.0 * i as f64 / n).collect();
    Ok(NodeSet::from_raw(points, NodeKind::Equidistant))
}

/// Equidistant points with interior nodes perturbed by uniform noise on
/// `[-1/(40N), 1/(40N)]`; endpoints stay pinned at `-1` and `1`.
pub fn scattered_nodes(n_points: usize, seed: u64) -> Result<NodeSet> {
    if n_points < 3 {
        return Err(Error::invalid(format!(
            "scattered nodes need at least 3 points, got {n_points}"
        )));
    }
    let base = equidistant_nodes(n_points)?;
    let n = (n_points - 1) as f64;
    let amplitude = 1.0 / (40.0 * n);
    let noise = Uniform::new_inclusive(-amplitude, amplitude);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = base.points;
    let last = points.len() - 1;
    for p in points[1..last].iter_mut() {
        *p += noise.sample(&mut rng);
    }
    Ok(NodeSet::from_raw(points, NodeKind::Scattered))
}

/// Gauss-Lobatto points: `+-1` plus the roots of `P'_{n-1}`.
pub fn gauss_lobatto_nodes(n_points: usize) -> Result<NodeSet> {
    if n_points < 2 {
        return Err(Error::invalid(format!(
            "Gauss-Lobatto nodes need at least 2 points, got {n_points}"
        )));
    }
    let n = n_points - 1;
    let mut points = vec![0.0; n_points];
    points[0] = -1.0;
    points[n] = 1.0;
    for (j, p) in points.iter_mut().enumerate().take(n).skip(1) {
        let guess = -(std::f64::consts::PI * j as f64 / n as f64).cos();
        *p = newton(guess, |x| {
            let (d1, d2) = legendre_d1_d2(n, x);
            (d1, d2)
        })?;
    }
    symmetrize(&mut points);
    Ok(NodeSet::from_raw(points, NodeKind::GaussLobatto))
}

/// Gauss-Legendre points: roots of `P_n`.
pub fn gauss_legendre_nodes(n_points: usize) -> Result<NodeSet> {
    if n_points < 1 {
        return Err(Error::invalid("Gauss-Legendre nodes need at least 1 point"));
    }
    let n = n_points;
    let mut points = vec![0.0; n];
    for (i, p) in points.iter_mut().enumerate() {
        let guess = -(std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64).cos();
        *p = newton(guess, |x| legendre_eval(n, x))?;
    }
    symmetrize(&mut points);
    Ok(NodeSet::from_raw(points, NodeKind::GaussLegendre))
}

fn newton(mut x: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<f64> {
    for _ in 0..NEWTON_MAX_ITER {
        let (value, deriv) = f(x);
        let step = value / deriv;
        x -= step;
        if step.abs() <= NEWTON_TOL {
            return Ok(x);
        }
    }
    Err(Error::Internal(format!(
        "Newton iteration for Gauss nodes did not converge near {x}"
    )))
}

// Exact mirror symmetry; also pins the middle node of odd sets at 0.
fn symmetrize(points: &mut [f64]) {
    let n = points.len();
    for i in 0..n / 2 {
        let m = 0.5 * (points[n - 1 - i] - points[i]);
        points[i] = -m;
        points[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
}

/// First and second derivative of `P_n`.
pub(crate) fn legendre_d1_d2(n: usize, x: f64) -> (f64, f64) {
    // P'_{k+1} = P'_{k-1} + (2k+1) P_k, and the same relation differentiated.
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d1_prev, mut d1) = (0.0, 1.0);
    let (mut d2_prev, mut d2) = (0.0, 0.0);
    if n == 0 {
        return (0.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let d1_next = d1_prev + (2.0 * kf + 1.0) * p;
        let d2_next = d2_prev + (2.0 * kf + 1.0) * d1;
        p_prev = p;
        p = p_next;
        d1_prev = d1;
        d1 = d1_next;
        d2_prev = d2;
        d2 = d2_next;
    }
    (d1, d2)
}

/// Element subdivision of `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    boundaries: Vec<f64>,
}

impl Mesh1D {
    pub fn from_boundaries(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::invalid("mesh needs at least one element"));
        }
        if boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("mesh boundaries must be increasing"));
        }
        Ok(Mesh1D { boundaries })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn n_elements(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn left(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn right(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.boundaries[i] + self.boundaries[i + 1])
    }

    pub fn length(&self, i: usize) -> f64 {
        self.boundaries[i + 1] - self.boundaries[i]
    }

    /// Affine map from the reference element onto element `i`.
    pub fn to_physical(&self, i: usize, xi: f64) -> Result<f64> {
        if i >= self.n_elements() {
            return Err(Error::invalid(format!(
                "element index {i} out of range for {} elements",
                self.n_elements()
            )));
        }
        Ok(self.map(i, xi))
    }

    /// Unchecked variant of [`Mesh1D::to_physical`] for inner loops. The
    /// faces map exactly onto the stored boundaries.
    #[inline]
    pub fn map(&self, i: usize, xi: f64) -> f64 {
        if xi == -1.0 {
            self.boundaries[i]
        } else if xi == 1.0 {
            self.boundaries[i + 1]
        } else {
            self.center(i) + 0.5 * self.length(i) * xi
        }
    }
}

/// `n_elements` equal elements covering `[a, b]`.
pub fn uniform_mesh(a: f64, b: f64, n_elements: usize) -> Result<Mesh1D> {
    if !(a < b) {
        return Err(Error::invalid(format!("mesh needs a < b, got [{a}, {b}]")));
    }
    if n_elements == 0 {
        return Err(Error::invalid("mesh needs at least one element"));
    }
    let h = (b - a) / n_elements as f64;
    let mut boundaries: Vec<f64> = (0..=n_elements).map(|i| a + h * i as f64).collect();
    boundaries[n_elements] = b;
    Ok(Mesh1D { boundaries })
}

/// Tensor-product grid built from one mesh per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub x: Mesh1D,
    pub y: Mesh1D,
}

impl Mesh2D {
    pub fn new(x: Mesh1D, y: Mesh1D) -> Self {
        Mesh2D { x, y }
    }

    pub fn n_elements(&self) -> usize {
        self.x.n_elements() * self.y.n_elements()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_valid(set: &NodeSet) {
        let p = set.points();
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert!(p.iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn equidistant_examples() {
        assert_eq!(equidistant_nodes(2).unwrap().points(), &[-1.0, 1.0]);
        assert_eq!(equidistant_nodes(3).unwrap().points(), &[-1.0, 0.0, 1.0]);
        assert_eq!(
            equidistant_nodes(5).unwrap().points(),
            &[-1.0, -0.5, 0.0, 0.5, 1.0]
        );
        assert!(equidistant_nodes(1).is_err());
        for n in 2..100 {
            let set = equidistant_nodes(n).unwrap();
            assert_valid(&set);
            assert_eq!(set.points()[0], -1.0);
            assert_eq!(set.points()[n - 1], 1.0);
        }
    }

    #[test]
    fn scattered_amplitude_and_determinism() {
        for seed in 0..50 {
            let s = scattered_nodes(3, seed).unwrap();
            assert_eq!(s.points()[0], -1.0);
            assert_eq!(s.points()[2], 1.0);
            assert!(s.points()[1].abs() <= 1.0 / 80.0);
        }
        assert!(scattered_nodes(2, 1).is_err());
        let a = scattered_nodes(17, 42).unwrap();
        let b = scattered_nodes(17, 42).unwrap();
        assert_eq!(a, b);
        let c = scattered_nodes(17, 43).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.points()[0], c.points()[0]);
        assert_eq!(a.points()[16], c.points()[16]);
        for n in 3..130 {
            assert_valid(&scattered_nodes(n, n as u64).unwrap());
        }
    }

    #[test]
    fn gauss_lobatto_known_sets() {
        assert_eq!(gauss_lobatto_nodes(3).unwrap().points(), &[-1.0, 0.0, 1.0]);
        let p = gauss_lobatto_nodes(4).unwrap();
        let r = 1.0 / 5f64.sqrt();
        assert!((p.points()[1] + r).abs() < 1e-15);
        assert!((p.points()[2] - r).abs() < 1e-15);
        assert_eq!(gauss_lobatto_nodes(2).unwrap().points(), &[-1.0, 1.0]);
    }

    #[test]
    fn gauss_lobatto_interior_are_roots_of_legendre_derivative() {
        for n_points in 3..=64 {
            let set = gauss_lobatto_nodes(n_points).unwrap();
            assert_valid(&set);
            let n = n_points - 1;
            for &x in &set.points()[1..n] {
                let (_, d) = legendre_eval(n, x);
                // Past ~24 points the roundoff in evaluating P' itself exceeds
                // 1e-12, so the residual is scaled by max |P'| = n(n+1)/2.
                let scale = if n_points <= 24 { 1.0 } else { (n * (n + 1)) as f64 / 2.0 };
                assert!(d.abs() <= 1e-12 * scale, "n={n_points} x={x} r={d}");
            }
        }
    }

    #[test]
    fn gauss_legendre_known_sets() {
        let p = gauss_legendre_nodes(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((p.points()[0] + r).abs() < 1e-15);
        assert!((p.points()[1] - r).abs() < 1e-15);
        assert_eq!(gauss_legendre_nodes(1).unwrap().points(), &[0.0]);
        for n in 1..=64 {
            let set = gauss_legendre_nodes(n).unwrap();
            assert_valid(&set);
            for &x in set.points() {
                assert!(legendre_eval(n, x).0.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn uniform_mesh_and_map() {
        let m = uniform_mesh(0.0, 1.0, 5).unwrap();
        let expected = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        for (b, e) in m.boundaries().iter().zip(expected) {
            assert!((b - e).abs() < 1e-15);
        }
        assert_eq!(uniform_mesh(0.0, 1.0, 1).unwrap().length(0), 1.0);
        assert!(uniform_mesh(1.0, 0.0, 5).is_err());
        assert!((m.to_physical(0, 0.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(m.to_physical(0, -1.0).unwrap(), 0.0);
        assert_eq!(m.to_physical(4, 1.0).unwrap(), 1.0);
        assert!(m.to_physical(5, 0.0).is_err());
    }

    #[test]
    fn to_physical_is_affine() {
        let m = uniform_mesh(-0.3, 2.1, 7).unwrap();
        for i in 0..7 {
            for &(a, b) in &[(-1.0, 1.0), (-0.3, 0.77), (0.1, 0.9)] {
                let mid = m.to_physical(i, 0.5 * (a + b)).unwrap();
                let avg =
                    0.5 * (m.to_physical(i, a).unwrap() + m.to_physical(i, b).unwrap());
                assert!((mid - avg).abs() <= 1e-15 * (1.0 + mid.abs()) * 4.0);
            }
        }
    }

    #[test]
    fn csv_has_header() {
        let csv = equidistant_nodes(3).unwrap().to_csv();
        assert!(csv.starts_with("xi\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
