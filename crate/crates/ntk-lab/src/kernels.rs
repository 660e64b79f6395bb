//! Closed-form evaluation of the deep ReLU tangent and random-feature kernels.
//!
//! On the unit sphere both kernels are dot-product kernels built from the two
//! arc-cosine link functions
//!
//! ```text
//! kappa0(u) = (pi - arccos u) / pi
//! kappa1(u) = (sqrt(1 - u^2) + u (pi - arccos u)) / pi
//! ```
//!
//! For a network with `L` hidden layers, the random-feature kernel (the
//! infinite-width covariance of the output at initialization) is the `L`-fold
//! composition `kappa1^(L)(u)`, and the tangent kernel is the layer sum
//!
//! ```text
//! ntk(u, L) = sum_{r=0}^{L} kappa1^(r)(u) * prod_{s=r}^{L-1} kappa0(kappa1^(s)(u))
//! ```
//!
//! with `kappa1^(0)(u) = u` and the empty product equal to 1, so that
//! `ntk(1, L) = L + 1`.
//!
//! Bounded Euclidean inputs are handled by the lift `x -> (x, 1)/||(x, 1)||`
//! onto the sphere one dimension up; the lifted kernels rescale the sphere
//! kernels by the product of the lifted norms, which matches the positive
//! 1-homogeneity of the ReLU network with first-layer bias.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Tolerance for accepting a scalar kernel argument just outside `[-1, 1]`;
/// values within this distance are clamped, values beyond are rejected.
pub const DOT_CLAMP_TOL: f64 = 1e-12;

/// Tolerance for the unit-norm check on sphere-domain points.
pub const SPHERE_NORM_TOL: f64 = 1e-9;

/// Kernel family: tangent kernel of the trained network, or random-feature
/// kernel (initialization covariance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Ntk,
    Rfk,
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelFamily::Ntk => write!(f, "ntk"),
            KernelFamily::Rfk => write!(f, "rfk"),
        }
    }
}

/// Input-domain convention: points on the unit sphere, or Euclidean points
/// mapped through the unit-augmentation lift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelDomain {
    Sphere,
    Lifted,
}

impl std::fmt::Display for KernelDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelDomain::Sphere => write!(f, "sphere"),
            KernelDomain::Lifted => write!(f, "lifted"),
        }
    }
}

/// Identifies a kernel: family, network depth (number of hidden layers,
/// `>= 1`), and domain convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub depth: usize,
    pub domain: KernelDomain,
}

impl KernelSpec {
    /// Builds a spec, rejecting `depth == 0`.
    pub fn new(family: KernelFamily, depth: usize, domain: KernelDomain) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Config(
                "kernel depth must be at least 1 hidden layer".into(),
            ));
        }
        Ok(KernelSpec {
            family,
            depth,
            domain,
        })
    }
}

/// A point in the kernel's input domain.
///
/// For the `Sphere` domain coordinates live in the ambient space of the
/// sphere (dimension `d + 1` for the `d`-sphere) and must be unit-norm within
/// [`SPHERE_NORM_TOL`]; for the `Lifted` domain they are unconstrained finite
/// Euclidean coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Norm of the unit-augmented vector `(x, 1)`; always `>= 1`.
    pub fn lifted_norm(&self) -> f64 {
        (self.dot(self) + 1.0).sqrt()
    }

    /// Checks all entries are finite.
    pub fn validate_finite(&self) -> Result<()> {
        if let Some(bad) = self.coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {bad}")));
        }
        Ok(())
    }

    /// Checks the point sits on the unit sphere within [`SPHERE_NORM_TOL`].
    pub fn validate_on_sphere(&self) -> Result<()> {
        self.validate_finite()?;
        let norm = self.norm();
        if (norm - 1.0).abs() > SPHERE_NORM_TOL {
            return Err(Error::Domain(format!(
                "point norm {norm:.12} is not 1 within {SPHERE_NORM_TOL:.1e}"
            )));
        }
        Ok(())
    }
}

/// Validates and clamps a scalar kernel argument to `[-1, 1]`.
///
/// Arguments within [`DOT_CLAMP_TOL`] of the boundary are clamped (floating
/// drift on near-unit vectors must not reach `arccos`); anything further out
/// is a domain error.
fn checked_unit_interval(u: f64) -> Result<f64> {
    if !(u.is_finite() && (-1.0 - DOT_CLAMP_TOL..=1.0 + DOT_CLAMP_TOL).contains(&u)) {
        return Err(Error::Domain(format!(
            "kernel argument {u} outside [-1, 1] beyond tolerance {DOT_CLAMP_TOL:.1e}"
        )));
    }
    Ok(u.clamp(-1.0, 1.0))
}

/// Clamp for internal compositions whose inputs are already validated; guards
/// against last-bit drift only.
#[inline]
fn clamp_unit(u: f64) -> f64 {
    u.clamp(-1.0, 1.0)
}

#[inline]
fn kappa0_unchecked(u: f64) -> f64 {
    use std::f64::consts::PI;
    (PI - u.acos()) / PI
}

#[inline]
fn kappa1_unchecked(u: f64) -> f64 {
    use std::f64::consts::PI;
    ((1.0 - u * u).max(0.0).sqrt() + u * (PI - u.acos())) / PI
}

/// Zeroth arc-cosine link function `(pi - arccos u)/pi`.
///
/// Maps `[-1, 1]` onto `[0, 1]`, nondecreasing.
pub fn kappa0(u: f64) -> Result<f64> {
    Ok(kappa0_unchecked(checked_unit_interval(u)?))
}

/// First arc-cosine link function `(sqrt(1-u^2) + u(pi - arccos u))/pi`.
///
/// Maps `[-1, 1]` onto `[0, 1]`, nondecreasing, and satisfies
/// `kappa1(u) >= u`.
pub fn kappa1(u: f64) -> Result<f64> {
    Ok(kappa1_unchecked(checked_unit_interval(u)?))
}

/// `r`-fold composition of [`kappa1`]; `r = 0` returns `u` unchanged.
pub fn kappa1_iter(u: f64, r: usize) -> Result<f64> {
    let mut v = checked_unit_interval(u)?;
    for _ in 0..r {
        v = clamp_unit(kappa1_unchecked(v));
    }
    Ok(v)
}

fn ntk_sphere_unchecked(u: f64, depth: usize) -> f64 {
    // Compositions kappa1^(r)(u) for r = 0..=depth, then suffix products of
    // kappa0 over those compositions; depth is small so no memoization.
    let mut comps = Vec::with_capacity(depth + 1);
    let mut v = u;
    comps.push(v);
    for _ in 0..depth {
        v = clamp_unit(kappa1_unchecked(v));
        comps.push(v);
    }
    let mut total = comps[depth]; // r = depth carries the empty product
    let mut suffix = 1.0;
    for r in (0..depth).rev() {
        suffix *= kappa0_unchecked(comps[r]);
        total += comps[r] * suffix;
    }
    total
}

#[inline]
fn rfk_sphere_unchecked(u: f64, depth: usize) -> f64 {
    let mut v = u;
    for _ in 0..depth {
        v = clamp_unit(kappa1_unchecked(v));
    }
    v
}

fn checked_depth(depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::Config(
            "kernel depth must be at least 1 hidden layer".into(),
        ));
    }
    Ok(())
}

/// Sphere tangent kernel of a depth-`depth` ReLU network as a function of the
/// dot product `u`; normalized so that `ntk_sphere(1, depth) = depth + 1`.
pub fn ntk_sphere(u: f64, depth: usize) -> Result<f64> {
    checked_depth(depth)?;
    Ok(ntk_sphere_unchecked(checked_unit_interval(u)?, depth))
}

/// Sphere random-feature kernel: the `depth`-fold composition of [`kappa1`];
/// `rfk_sphere(1, depth) = 1` for every depth.
pub fn rfk_sphere(u: f64, depth: usize) -> Result<f64> {
    checked_depth(depth)?;
    Ok(rfk_sphere_unchecked(checked_unit_interval(u)?, depth))
}

/// Unit-augmentation lift `x -> (x, 1)/||(x, 1)||` from Euclidean space onto
/// the upper hemisphere one dimension up; the last coordinate is strictly
/// positive.
pub fn lift(x: &Point) -> Point {
    let norm = x.lifted_norm();
    let mut coords: Vec<f64> = x.coords.iter().map(|c| c / norm).collect();
    coords.push(1.0 / norm);
    Point::new(coords)
}

/// Scalar kernel value for already-validated inputs producing dot product `u`
/// and norm factor `scale` (`1` on the sphere, product of lifted norms
/// otherwise).
fn eval_scalar(spec: &KernelSpec, u: f64, scale: f64) -> f64 {
    let k0 = match spec.family {
        KernelFamily::Ntk => ntk_sphere_unchecked(u, spec.depth),
        KernelFamily::Rfk => rfk_sphere_unchecked(u, spec.depth),
    };
    scale * k0
}

/// Validates a pair of points against the spec's domain and returns
/// `(u, scale)`: the normalized dot product fed to the sphere kernel and the
/// norm rescaling factor.
fn prepare_pair(spec: &KernelSpec, x: &Point, y: &Point) -> Result<(f64, f64)> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    match spec.domain {
        KernelDomain::Sphere => {
            x.validate_on_sphere()?;
            y.validate_on_sphere()?;
            // Normalizing by the actual norms keeps u inside [-1, 1] up to
            // rounding even for points at the edge of the sphere tolerance.
            let u = checked_unit_interval(x.dot(y) / (x.norm() * y.norm()))?;
            Ok((u, 1.0))
        }
        KernelDomain::Lifted => {
            x.validate_finite()?;
            y.validate_finite()?;
            let (nx, ny) = (x.lifted_norm(), y.lifted_norm());
            let u = checked_unit_interval((x.dot(y) + 1.0) / (nx * ny))?;
            Ok((u, nx * ny))
        }
    }
}

/// Evaluates the kernel named by `spec` at a pair of points.
///
/// Sphere domain: `K0(x . y)` for unit-norm inputs. Lifted domain:
/// `||(x,1)|| ||(y,1)|| K0(phi(x) . phi(y))` with `phi` the unit-augmentation
/// lift, so the lifted tangent kernel's diagonal is `(depth+1) ||(x,1)||^2`
/// and the lifted random-feature diagonal is `||(x,1)||^2`.
pub fn kernel_eval(spec: &KernelSpec, x: &Point, y: &Point) -> Result<f64> {
    checked_depth(spec.depth)?;
    let (u, scale) = prepare_pair(spec, x, y)?;
    Ok(eval_scalar(spec, u, scale))
}

/// Gram matrix `[K(x_i, x_j)]` over a point list.
///
/// Each unordered pair is evaluated once and mirrored, so the result is
/// exactly symmetric; diagonal entries use the exact dot product 1 so sphere
/// tangent diagonals equal `depth + 1` to the last bit.
pub fn gram(spec: &KernelSpec, points: &[Point]) -> Result<DMatrix<f64>> {
    checked_depth(spec.depth)?;
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyDataset(
            "gram matrix requires at least one point".into(),
        ));
    }
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        // Diagonal: u = 1 exactly by construction.
        let scale = match spec.domain {
            KernelDomain::Sphere => {
                points[i].validate_on_sphere()?;
                1.0
            }
            KernelDomain::Lifted => {
                points[i].validate_finite()?;
                let nx = points[i].lifted_norm();
                nx * nx
            }
        };
        g[(i, i)] = eval_scalar(spec, 1.0, scale);
        for j in (i + 1)..n {
            let (u, scale) = prepare_pair(spec, &points[i], &points[j])?;
            let v = eval_scalar(spec, u, scale);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PI: f64 = std::f64::consts::PI;

    fn p(coords: &[f64]) -> Point {
        Point::new(coords.to_vec())
    }

    // Frozen high-precision values computed independently with 50-digit
    // arithmetic from the closed forms.
    const KAPPA1_HALF: f64 = 0.608_997_781_044_229_36;
    const KAPPA1_NEG_HALF: f64 = 0.108_997_781_044_229_36;
    const KAPPA1_ITER_0_2: f64 = 0.493_731_090_200_371_55;
    const KAPPA1_ITER_0_3: f64 = 0.604_825_720_112_944_55;
    const NTK_HALF_1: f64 = 0.942_331_114_377_562_69;
    const NTK_HALF_2: f64 = 1.351_479_561_123_483_2;
    const NTK_HALF_3: f64 = 1.737_844_679_215_309;
    const NTK_NEG_HALF_1: f64 = -0.057_668_885_622_437_309;
    const RFK_HALF_2: f64 = 0.683_905_650_898_705_97;
    const RFK_HALF_3: f64 = 0.738_128_192_301_000_52;

    #[test]
    fn kappa0_anchor_values() {
        assert_eq!(kappa0(1.0).unwrap(), 1.0);
        assert_eq!(kappa0(-1.0).unwrap(), 0.0);
        assert_relative_eq!(kappa0(0.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(kappa0(0.5).unwrap(), 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(kappa0(-0.5).unwrap(), 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn kappa1_anchor_values() {
        assert_eq!(kappa1(1.0).unwrap(), 1.0);
        assert_relative_eq!(kappa1(-1.0).unwrap(), 0.0, epsilon = 1e-16);
        assert_relative_eq!(kappa1(0.0).unwrap(), 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(kappa1(0.5).unwrap(), KAPPA1_HALF, max_relative = 1e-14);
        assert_relative_eq!(kappa1(-0.5).unwrap(), KAPPA1_NEG_HALF, max_relative = 1e-13);
    }

    #[test]
    fn kappa_domain_checks() {
        assert!(kappa0(1.0 + 1e-13).is_ok()); // clamped
        assert!(kappa0(-1.0 - 1e-13).is_ok());
        assert!(kappa0(1.0 + 1e-11).is_err());
        assert!(kappa1(-1.2).is_err());
        assert!(kappa1(f64::NAN).is_err());
    }

    #[test]
    fn kappa1_iter_values() {
        assert_eq!(kappa1_iter(0.5, 0).unwrap(), 0.5);
        assert_eq!(kappa1_iter(1.0, 7).unwrap(), 1.0);
        assert_relative_eq!(
            kappa1_iter(0.0, 2).unwrap(),
            KAPPA1_ITER_0_2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            kappa1_iter(0.0, 3).unwrap(),
            KAPPA1_ITER_0_3,
            max_relative = 1e-14
        );
        // One composition of the anchor: kappa1_iter(-1, 2) = kappa1(0).
        assert_relative_eq!(
            kappa1_iter(-1.0, 2).unwrap(),
            1.0 / PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn ntk_sphere_values() {
        for depth in [1usize, 2, 3, 5] {
            assert_eq!(ntk_sphere(1.0, depth).unwrap(), (depth + 1) as f64);
        }
        assert_relative_eq!(ntk_sphere(0.0, 1).unwrap(), 1.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(ntk_sphere(-1.0, 1).unwrap(), 0.0, epsilon = 1e-16);
        assert_relative_eq!(ntk_sphere(0.5, 1).unwrap(), NTK_HALF_1, max_relative = 1e-13);
        assert_relative_eq!(ntk_sphere(0.5, 2).unwrap(), NTK_HALF_2, max_relative = 1e-13);
        assert_relative_eq!(ntk_sphere(0.5, 3).unwrap(), NTK_HALF_3, max_relative = 1e-13);
        assert_relative_eq!(
            ntk_sphere(-0.5, 1).unwrap(),
            NTK_NEG_HALF_1,
            max_relative = 1e-12
        );
        assert!(ntk_sphere(0.0, 0).is_err());
    }

    #[test]
    fn rfk_sphere_values() {
        for depth in [1usize, 2, 3, 5] {
            assert_eq!(rfk_sphere(1.0, depth).unwrap(), 1.0);
        }
        assert_relative_eq!(rfk_sphere(0.0, 1).unwrap(), 1.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(rfk_sphere(-1.0, 1).unwrap(), 0.0, epsilon = 1e-16);
        assert_relative_eq!(rfk_sphere(0.5, 2).unwrap(), RFK_HALF_2, max_relative = 1e-13);
        assert_relative_eq!(rfk_sphere(0.5, 3).unwrap(), RFK_HALF_3, max_relative = 1e-13);
    }

    #[test]
    fn kappa_monotone_and_bounded_on_grid() {
        // 10^4-point grid: range [0,1] and monotonicity for both links.
        let grid: Vec<f64> = (0..=10_000).map(|i| -1.0 + 2.0 * i as f64 / 10_000.0).collect();
        let mut prev0 = -f64::INFINITY;
        let mut prev1 = -f64::INFINITY;
        for &u in &grid {
            let k0 = kappa0(u).unwrap();
            let k1 = kappa1(u).unwrap();
            assert!((0.0..=1.0).contains(&k0), "kappa0({u}) = {k0}");
            assert!((0.0..=1.0).contains(&k1), "kappa1({u}) = {k1}");
            assert!(k1 >= u, "kappa1({u}) = {k1} < u");
            assert!(k0 >= prev0 - 1e-15);
            assert!(k1 >= prev1 - 1e-15);
            prev0 = k0;
            prev1 = k1;
        }
    }

    #[test]
    fn sphere_kernels_bounded_by_diagonal() {
        let grid: Vec<f64> = (0..=1000).map(|i| -1.0 + 2.0 * i as f64 / 1000.0).collect();
        for depth in [1usize, 2, 3] {
            for &u in &grid {
                assert!(ntk_sphere(u, depth).unwrap() <= (depth + 1) as f64 + 1e-12);
                assert!(rfk_sphere(u, depth).unwrap() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn lift_examples() {
        let zero = lift(&p(&[0.0, 0.0, 0.0]));
        assert_eq!(zero.coords, vec![0.0, 0.0, 0.0, 1.0]);

        let far = lift(&p(&[1e6, 0.0]));
        assert!(far.coords[2].abs() < 1e-5);
        assert_relative_eq!(far.norm(), 1.0, max_relative = 1e-12);

        let e1 = lift(&p(&[1.0, 0.0, 0.0]));
        let s = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(e1.coords[0], s, max_relative = 1e-15);
        assert_eq!(e1.coords[1], 0.0);
        assert_eq!(e1.coords[2], 0.0);
        assert_relative_eq!(e1.coords[3], s, max_relative = 1e-15);
        assert!(e1.coords[3] > 0.0);
    }

    #[test]
    fn kernel_eval_lifted_examples() {
        let ntk2 = KernelSpec::new(KernelFamily::Ntk, 2, KernelDomain::Lifted).unwrap();
        let origin = p(&[0.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!(
            kernel_eval(&ntk2, &origin, &origin).unwrap(),
            3.0,
            max_relative = 1e-15
        );

        // Frozen oracle: 2 * ntk(1/2, 2) for orthogonal unit vectors in R^3.
        let x = p(&[1.0, 0.0, 0.0]);
        let y = p(&[0.0, 1.0, 0.0]);
        assert_relative_eq!(
            kernel_eval(&ntk2, &x, &y).unwrap(),
            2.702_959_122_246_966_3,
            max_relative = 1e-13
        );

        let rfk2 = KernelSpec::new(KernelFamily::Rfk, 2, KernelDomain::Lifted).unwrap();
        assert_relative_eq!(
            kernel_eval(&rfk2, &x, &y).unwrap(),
            1.367_811_301_797_411_9,
            max_relative = 1e-13
        );
        // Lifted random-feature diagonal = ||(x,1)||^2.
        let z = p(&[3.0, -4.0]);
        let rfk1 = KernelSpec::new(KernelFamily::Rfk, 1, KernelDomain::Lifted).unwrap();
        assert_relative_eq!(
            kernel_eval(&rfk1, &z, &z).unwrap(),
            26.0,
            max_relative = 1e-15
        );
        // Lifted tangent diagonal = (depth + 1) ||(x,1)||^2.
        let ntk3 = KernelSpec::new(KernelFamily::Ntk, 3, KernelDomain::Lifted).unwrap();
        assert_relative_eq!(
            kernel_eval(&ntk3, &z, &z).unwrap(),
            4.0 * 26.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn kernel_eval_sphere_examples() {
        let ntk1 = KernelSpec::new(KernelFamily::Ntk, 1, KernelDomain::Sphere).unwrap();
        let x = p(&[1.0, 0.0, 0.0, 0.0]);
        let mut y = x.clone();
        y.coords.iter_mut().for_each(|c| *c = -*c);
        assert_relative_eq!(kernel_eval(&ntk1, &x, &y).unwrap(), 0.0, epsilon = 1e-15);

        // Off-sphere input rejected.
        let bad = p(&[0.5, 0.0, 0.0, 0.0]);
        assert!(matches!(
            kernel_eval(&ntk1, &x, &bad),
            Err(Error::Domain(_))
        ));
        // Dimension mismatch.
        let short = p(&[1.0, 0.0]);
        assert!(matches!(
            kernel_eval(&ntk1, &x, &short),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn kernel_eval_symmetry_is_exact() {
        let specs = [
            KernelSpec::new(KernelFamily::Ntk, 2, KernelDomain::Lifted).unwrap(),
            KernelSpec::new(KernelFamily::Rfk, 3, KernelDomain::Lifted).unwrap(),
        ];
        let xs = [p(&[0.3, -1.2, 0.7]), p(&[2.0, 0.1, -0.4]), p(&[0.0, 0.0, 1.0])];
        for spec in &specs {
            for a in &xs {
                for b in &xs {
                    let ab = kernel_eval(spec, a, b).unwrap();
                    let ba = kernel_eval(spec, b, a).unwrap();
                    assert_eq!(ab.to_bits(), ba.to_bits());
                }
            }
        }
    }

    #[test]
    fn gram_examples() {
        let ntk1 = KernelSpec::new(KernelFamily::Ntk, 1, KernelDomain::Sphere).unwrap();
        let single = gram(&ntk1, &[p(&[0.0, 1.0])]).unwrap();
        assert_eq!(single.nrows(), 1);
        assert_eq!(single[(0, 0)], 2.0);

        let rfk1 = KernelSpec::new(KernelFamily::Rfk, 1, KernelDomain::Sphere).unwrap();
        let g = gram(&rfk1, &[p(&[1.0, 0.0]), p(&[0.0, 1.0])]).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], 1.0);
        assert_relative_eq!(g[(0, 1)], 1.0 / PI, max_relative = 1e-14);
        assert_eq!(g[(0, 1)].to_bits(), g[(1, 0)].to_bits());

        assert!(gram(&rfk1, &[]).is_err());
    }

    #[test]
    fn gram_is_exactly_symmetric_backed_by_psd() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 60;
        let points: Vec<Point> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..4)
                    .map(|_| rand_distr::StandardNormal.sample(&mut rng))
                    .collect();
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                Point::new(v.into_iter().map(|c| c / norm).collect())
            })
            .collect();
        for spec in [
            KernelSpec::new(KernelFamily::Ntk, 2, KernelDomain::Sphere).unwrap(),
            KernelSpec::new(KernelFamily::Rfk, 1, KernelDomain::Sphere).unwrap(),
        ] {
            let g = gram(&spec, &points).unwrap();
            assert_eq!(g.transpose(), g);
            let eig = g.clone().symmetric_eigen();
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8 * n as f64, "min eigenvalue {min}");
        }
    }

    #[test]
    fn lifted_matches_sphere_on_embedded_image() {
        // For lifted points, K(x, y) = ||(x,1)|| ||(y,1)|| K0(phi(x).phi(y)).
        let xs = [p(&[0.4, -0.2, 1.5]), p(&[-1.0, 0.3, 0.2]), p(&[0.0, 0.0, 0.0])];
        for family in [KernelFamily::Ntk, KernelFamily::Rfk] {
            for depth in [1usize, 2, 3] {
                let lifted = KernelSpec::new(family, depth, KernelDomain::Lifted).unwrap();
                let sphere = KernelSpec::new(family, depth, KernelDomain::Sphere).unwrap();
                for a in &xs {
                    for b in &xs {
                        let direct = kernel_eval(&lifted, a, b).unwrap();
                        let via_sphere = a.lifted_norm()
                            * b.lifted_norm()
                            * kernel_eval(&sphere, &lift(a), &lift(b)).unwrap();
                        assert_relative_eq!(direct, via_sphere, max_relative = 1e-12);
                    }
                }
            }
        }
    }
}
