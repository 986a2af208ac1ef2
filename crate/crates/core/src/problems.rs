//! Convex test objectives with analytic gradients, known minimizers and
//! (L0,L1)-smoothness certificates, plus numerical checkers for the standard
//! consequences of (L0,L1)-smoothness.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::omega::omega_constant;
use crate::vector::RealVector;

/// Relative slack used by every inequality check in this module.
pub const CHECK_TOL: f64 = 1e-9;

/// Default number of equispaced points used as a surrogate for the segment
/// supremum of the gradient norm.
pub const DEFAULT_SEG_SAMPLES: usize = 17;

/// Constants `(L0, L1)` such that
/// `‖∇f(x) − ∇f(y)‖ ≤ (L0 + L1 sup_{u∈[x,y]} ‖∇f(u)‖) ‖x − y‖`
/// on the ball of radius `valid_radius` around the minimizer (`None`: everywhere).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothnessCertificate {
    pub l0: f64,
    pub l1: f64,
    pub valid_radius: Option<f64>,
}

impl SmoothnessCertificate {
    pub fn new(l0: f64, l1: f64, valid_radius: Option<f64>) -> Result<Self> {
        if !(l0 >= 0.0 && l0.is_finite()) || !(l1 >= 0.0 && l1.is_finite()) {
            return Err(domain(format!("certificate constants must be finite and nonnegative, got ({l0}, {l1})")));
        }
        if let Some(r) = valid_radius {
            if !(r > 0.0) {
                return Err(domain(format!("certificate radius must be positive, got {r}")));
            }
        }
        Ok(Self { l0, l1, valid_radius })
    }

    /// `L0 / L1`, infinite when `L1 = 0`.
    pub fn gradient_threshold(&self) -> f64 {
        if self.l1 == 0.0 {
            f64::INFINITY
        } else {
            self.l0 / self.l1
        }
    }
}

/// Differentiable objectives available to the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Function {
    /// `½⟨x, A x⟩ − ⟨b, x⟩`, `A` stored row-major.
    Quadratic { dim: usize, a: Vec<f64>, b: Vec<f64> },
    /// `‖x‖^n`.
    PowerNorm { dim: usize, n: u32 },
    /// `exp(‖x‖) + exp(−‖x‖)`.
    CoshNorm { dim: usize },
    /// `Σ_i exp(⟨a_i,x⟩ − b_i) + exp(−⟨a_i,x⟩ + b_i)`.
    SymExpSum { directions: Vec<RealVector>, offsets: Vec<f64> },
    /// `⟨a, x⟩ + c`; unbounded below, only usable where no minimizer is needed.
    Linear { slope: RealVector, intercept: f64 },
}

impl Function {
    pub fn dimension(&self) -> usize {
        match self {
            Function::Quadratic { dim, .. } | Function::PowerNorm { dim, .. } | Function::CoshNorm { dim } => *dim,
            Function::SymExpSum { directions, .. } => directions[0].dim(),
            Function::Linear { slope, .. } => slope.dim(),
        }
    }

    pub fn value(&self, x: &RealVector) -> f64 {
        match self {
            Function::Quadratic { dim, a, b } => {
                let xs = x.as_slice();
                let mut quad = 0.0;
                for i in 0..*dim {
                    let row = &a[i * dim..(i + 1) * dim];
                    let ax: f64 = row.iter().zip(xs).map(|(r, v)| r * v).sum();
                    quad += xs[i] * ax;
                }
                0.5 * quad - b.iter().zip(xs).map(|(p, q)| p * q).sum::<f64>()
            }
            Function::PowerNorm { n, .. } => x.norm().powi(*n as i32),
            Function::CoshNorm { .. } => 2.0 * x.norm().cosh(),
            Function::SymExpSum { directions, offsets } => directions.iter().zip(offsets).map(|(a, b)| 2.0 * (a.dot(x) - b).cosh()).sum(),
            Function::Linear { slope, intercept } => slope.dot(x) + intercept,
        }
    }

    pub fn gradient(&self, x: &RealVector) -> RealVector {
        match self {
            Function::Quadratic { dim, a, b } => {
                let xs = x.as_slice();
                let g = (0..*dim)
                    .map(|i| {
                        let row = &a[i * dim..(i + 1) * dim];
                        row.iter().zip(xs).map(|(r, v)| r * v).sum::<f64>() - b[i]
                    })
                    .collect();
                RealVector::from_raw(g)
            }
            Function::PowerNorm { n, .. } => {
                let r = x.norm();
                x.scale(*n as f64 * r.powi(*n as i32 - 2))
            }
            Function::CoshNorm { dim } => {
                let r = x.norm();
                if r == 0.0 {
                    RealVector::zeros(*dim)
                } else {
                    x.scale(2.0 * r.sinh() / r)
                }
            }
            Function::SymExpSum { directions, offsets } => {
                let mut g = RealVector::zeros(directions[0].dim());
                for (a, b) in directions.iter().zip(offsets) {
                    g.add_assign_scaled(2.0 * (a.dot(x) - b).sinh(), a);
                }
                g
            }
            Function::Linear { slope, .. } => slope.clone(),
        }
    }

    pub fn evaluate(&self, x: &RealVector) -> Result<(f64, RealVector)> {
        x.check_dim(self.dimension())?;
        Ok((self.value(x), self.gradient(x)))
    }
}

/// A convex objective with a known minimizer, optimal value and certificate.
#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    function: Function,
    x_star: RealVector,
    f_star: f64,
    certificate: SmoothnessCertificate,
}

impl Problem {
    fn finish(name: &str, function: Function, x_star: RealVector, f_star: f64, certificate: SmoothnessCertificate) -> Result<Self> {
        let g = function.gradient(&x_star);
        if !(g.norm() <= 1e-9) {
            return Err(domain(format!("{name}: gradient norm {} at the claimed minimizer", g.norm())));
        }
        Ok(Self {
            name: name.to_owned(),
            function,
            x_star,
            f_star,
            certificate,
        })
    }

    /// Quadratic with symmetric positive definite `A` (row-major, `dim × dim`).
    /// The certificate is `(λ_max(A), 0)`, valid everywhere.
    pub fn quadratic(dim: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim == 0 || a.len() != dim * dim || b.len() != dim {
            return Err(domain("quadratic: matrix must be dim×dim and b of length dim"));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadratic parameters"));
        }
        let m = DMatrix::from_row_slice(dim, dim, &a);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * (1.0 + m.amax()) {
            return Err(domain("quadratic: matrix is not symmetric"));
        }
        let chol = m.clone().cholesky().ok_or_else(|| domain("quadratic: matrix is not positive definite"))?;
        let x = chol.solve(&DVector::from_column_slice(&b));
        let l0 = m.symmetric_eigenvalues().max();
        let x_star = RealVector::new(x.iter().copied().collect())?;
        let function = Function::Quadratic { dim, a, b };
        let f_star = function.value(&x_star);
        let cert = SmoothnessCertificate::new(l0, 0.0, None)?;
        Self::finish("quadratic", function, x_star, f_star, cert)
    }

    /// Diagonal quadratic with minimizer `x_star`: `b = A x_star`.
    pub fn diagonal_quadratic(eigenvalues: &[f64], x_star: &RealVector) -> Result<Self> {
        let dim = eigenvalues.len();
        x_star.check_dim(dim)?;
        let mut a = vec![0.0; dim * dim];
        for (i, &e) in eigenvalues.iter().enumerate() {
            a[i * dim + i] = e;
        }
        let b = eigenvalues.iter().zip(x_star.as_slice()).map(|(e, x)| e * x).collect();
        Self::quadratic(dim, a, b)
    }

    /// `‖x‖^n` with the free constant `L1 > 0`. The matching
    /// `L0 = max_t n(n−1)t^{n−2} − L1 n t^{n−1} = n ((n−2)/L1)^{n−2}` bounds the
    /// radial curvature, which dominates the tangential one, so the certificate
    /// holds everywhere.
    pub fn power_norm(dim: usize, n: u32, l1: f64) -> Result<Self> {
        if n <= 2 {
            return Err(domain(format!("power norm: exponent must exceed 2, got {n}")));
        }
        if !(l1 > 0.0 && l1.is_finite()) {
            return Err(domain(format!("power norm: L1 must be positive, got {l1}")));
        }
        let cert = SmoothnessCertificate::new(power_norm_l0(n, l1), l1, None)?;
        Self::finish("power_norm", Function::PowerNorm { dim, n }, RealVector::zeros(dim), 0.0, cert)
    }

    /// `exp(‖x‖) + exp(−‖x‖)` with certificate `(2, 1)`:
    /// `‖∇²f‖ = 2 cosh r ≤ 2 + 2 sinh r = 2 + ‖∇f‖`.
    pub fn cosh_norm(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(domain("cosh norm: dimension must be positive"));
        }
        let cert = SmoothnessCertificate::new(2.0, 1.0, None)?;
        Self::finish("cosh_norm", Function::CoshNorm { dim }, RealVector::zeros(dim), 2.0, cert)
    }

    /// Symmetric exponential sum over `m ≤ dim` orthonormal directions drawn
    /// from `seed`, with `x_star ~ N(0, I)` and `b_i = ⟨a_i, x_star⟩`.
    /// Orthonormality gives the certificate `(2, 1)` everywhere.
    pub fn sym_exp_sum(dim: usize, m: usize, seed: u64) -> Result<Self> {
        if m == 0 || m > dim {
            return Err(domain(format!("sym_exp_sum: need 1 ≤ m ≤ dim, got m={m}, dim={dim}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut directions: Vec<RealVector> = Vec::with_capacity(m);
        while directions.len() < m {
            let mut v = RealVector::from_raw((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
            for u in &directions {
                let c = v.dot(u);
                v.add_assign_scaled(-c, u);
            }
            let n = v.norm();
            if n > 1e-8 {
                directions.push(v.scale(1.0 / n));
            }
        }
        let x_star = RealVector::from_raw((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
        let offsets: Vec<f64> = directions.iter().map(|a| a.dot(&x_star)).collect();
        let cert = SmoothnessCertificate::new(2.0, 1.0, None)?;
        Self::finish("sym_exp_sum", Function::SymExpSum { directions, offsets }, x_star, 2.0 * m as f64, cert)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn function(&self) -> &Function {
        &self.function
    }

    pub fn dimension(&self) -> usize {
        self.function.dimension()
    }

    pub fn x_star(&self) -> &RealVector {
        &self.x_star
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn certificate(&self) -> &SmoothnessCertificate {
        &self.certificate
    }

    /// Replaces the certificate radius; used to restrict checks to a ball.
    pub fn with_valid_radius(mut self, radius: Option<f64>) -> Result<Self> {
        self.certificate = SmoothnessCertificate::new(self.certificate.l0, self.certificate.l1, radius)?;
        Ok(self)
    }

    pub fn evaluate(&self, x: &RealVector) -> Result<(f64, RealVector)> {
        self.function.evaluate(x)
    }

    pub fn gradient(&self, x: &RealVector) -> RealVector {
        self.function.gradient(x)
    }

    /// `f(x) − f*` evaluated in a cancellation-free closed form.
    pub(crate) fn raw_gap(&self, x: &RealVector) -> f64 {
        match &self.function {
            Function::Quadratic { dim, a, .. } => {
                let d = x - &self.x_star;
                let ds = d.as_slice();
                let mut quad = 0.0;
                for i in 0..*dim {
                    let row = &a[i * dim..(i + 1) * dim];
                    quad += ds[i] * row.iter().zip(ds).map(|(r, v)| r * v).sum::<f64>();
                }
                0.5 * quad
            }
            Function::PowerNorm { n, .. } => x.norm().powi(*n as i32),
            Function::CoshNorm { .. } => {
                let s = (0.5 * x.norm()).sinh();
                4.0 * s * s
            }
            Function::SymExpSum { directions, offsets } => directions
                .iter()
                .zip(offsets)
                .map(|(a, b)| {
                    let s = (0.5 * (a.dot(x) - b)).sinh();
                    4.0 * s * s
                })
                .sum(),
            Function::Linear { .. } => unreachable!("linear functions never form a Problem"),
        }
    }

    fn check_inside(&self, x: &RealVector) -> Result<()> {
        x.check_dim(self.dimension())?;
        if let Some(r) = self.certificate.valid_radius {
            let dist = x.distance(&self.x_star);
            if dist > r {
                return Err(domain(format!("point at distance {dist} lies outside the certificate radius {r}")));
            }
        }
        Ok(())
    }
}

/// `n ((n−2)/L1)^{n−2}`, the smallest `L0` making `(L0, L1)` a curvature
/// envelope for `‖x‖^n`.
pub fn power_norm_l0(n: u32, l1: f64) -> f64 {
    let n_f = n as f64;
    n_f * ((n_f - 2.0) / l1).powi(n as i32 - 2)
}

/// Maps a raw gap to a suboptimality: small negative values are rounding and
/// clamp to zero, anything below `-1e-9` means `x_star` was not optimal.
pub fn clamp_gap(raw: f64) -> Result<f64> {
    if raw >= 0.0 {
        Ok(raw)
    } else if raw >= -1e-9 {
        Ok(0.0)
    } else {
        Err(Error::CertificateViolation(raw))
    }
}

/// `f(x) − f*`.
pub fn suboptimality(p: &Problem, x: &RealVector) -> Result<f64> {
    x.check_dim(p.dimension())?;
    clamp_gap(p.raw_gap(x))
}

/// Outcome of an inequality check `lhs ≤ rhs (1 + tol)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + CHECK_TOL),
        }
    }
}

/// `ν‖∇f(x)‖² ≤ 2 (L0 + L1‖∇f(x)‖)(f(x) − f*)`.
pub fn check_gradient_gap_bound(p: &Problem, x: &RealVector) -> Result<InequalityCheck> {
    p.check_inside(x)?;
    let nu = omega_constant().nu;
    let g = p.gradient(x).norm();
    let gap = suboptimality(p, x)?;
    let c = p.certificate();
    Ok(InequalityCheck::new(nu * g * g, 2.0 * (c.l0 + c.l1 * g) * gap))
}

/// `‖∇f(y) − ∇f(x)‖ ≤ (L0 + L1‖∇f(x)‖) exp(L1‖y − x‖) ‖y − x‖`.
pub fn check_gradient_growth(p: &Problem, x: &RealVector, y: &RealVector) -> Result<InequalityCheck> {
    p.check_inside(x)?;
    p.check_inside(y)?;
    let gx = p.gradient(x);
    let gy = p.gradient(y);
    let c = p.certificate();
    let dist = x.distance(y);
    let lhs = gx.distance(&gy);
    let rhs = (c.l0 + c.l1 * gx.norm()) * (c.l1 * dist).exp() * dist;
    Ok(InequalityCheck::new(lhs, rhs))
}

/// Largest gradient norm over `samples` equispaced points of `[x, y]`,
/// endpoints included.
pub fn segment_gradient_sup(f: &Function, x: &RealVector, y: &RealVector, samples: usize) -> f64 {
    let samples = samples.max(2);
    let diff = y - x;
    (0..samples)
        .map(|i| {
            let t = i as f64 / (samples - 1) as f64;
            f.gradient(&x.axpy(t, &diff)).norm()
        })
        .fold(0.0, f64::max)
}

/// The defining (L0,L1) inequality, with the segment supremum replaced by a
/// `seg_samples`-point maximum.
pub fn check_generalized_smoothness(p: &Problem, x: &RealVector, y: &RealVector, seg_samples: usize) -> Result<InequalityCheck> {
    if seg_samples < 2 {
        return Err(domain("seg_samples must be at least 2"));
    }
    p.check_inside(x)?;
    p.check_inside(y)?;
    let c = p.certificate();
    let lhs = p.gradient(x).distance(&p.gradient(y));
    let sup = segment_gradient_sup(p.function(), x, y, seg_samples);
    Ok(InequalityCheck::new(lhs, (c.l0 + c.l1 * sup) * x.distance(y)))
}

/// Uniform draw from the ball of radius `radius` around `center`.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, center: &RealVector, radius: f64) -> RealVector {
    let d = center.dim();
    let dir = RealVector::from_raw((0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
    let n = dir.norm();
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    if n == 0.0 {
        return center.clone();
    }
    center.axpy(r / n, &dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn v(x: &[f64]) -> RealVector {
        RealVector::new(x.to_vec()).unwrap()
    }

    fn identity_quadratic(dim: usize) -> Problem {
        Problem::diagonal_quadratic(&vec![1.0; dim], &RealVector::zeros(dim)).unwrap()
    }

    fn all_problems() -> Vec<Problem> {
        vec![
            Problem::diagonal_quadratic(&[3.0, 1.0, 0.5], &v(&[1.0, -2.0, 0.5])).unwrap(),
            Problem::quadratic(2, vec![2.0, 0.5, 0.5, 1.0], vec![1.0, -1.0]).unwrap(),
            Problem::power_norm(3, 4, 2.0).unwrap(),
            Problem::power_norm(2, 5, 1.0).unwrap(),
            Problem::cosh_norm(3).unwrap(),
            Problem::cosh_norm(1).unwrap(),
            Problem::sym_exp_sum(4, 3, 11).unwrap(),
        ]
    }

    #[test]
    fn evaluate_examples() {
        let (f, g) = identity_quadratic(2).evaluate(&v(&[3.0, 4.0])).unwrap();
        assert_eq!(f, 12.5);
        assert_eq!(g, v(&[3.0, 4.0]));

        let (f, g) = Problem::cosh_norm(3).unwrap().evaluate(&RealVector::zeros(3)).unwrap();
        assert_eq!(f, 2.0);
        assert_eq!(g, RealVector::zeros(3));

        let (f, g) = Problem::power_norm(2, 4, 2.0).unwrap().evaluate(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(f, 1.0);
        assert_eq!(g, v(&[4.0, 0.0]));
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let p = identity_quadratic(2);
        assert!(matches!(p.evaluate(&v(&[1.0])), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
    }

    #[test]
    fn suboptimality_examples() {
        let p = identity_quadratic(2);
        assert_eq!(suboptimality(&p, p.x_star()).unwrap(), 0.0);

        let c = Problem::cosh_norm(2).unwrap();
        let gap = suboptimality(&c, &v(&[0.6, 0.8])).unwrap();
        assert!((gap - (E + 1.0 / E - 2.0)).abs() < 1e-14);
        assert!((gap - 1.0861).abs() < 1e-4);

        let s = Problem::sym_exp_sum(5, 3, 1).unwrap();
        assert_eq!(suboptimality(&s, s.x_star()).unwrap(), 0.0);
    }

    #[test]
    fn stable_gap_matches_value_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in all_problems() {
            for _ in 0..50 {
                let x = sample_ball(&mut rng, p.x_star(), 2.0);
                let direct = p.function().value(&x) - p.f_star();
                let stable = suboptimality(&p, &x).unwrap();
                assert!(
                    (direct - stable).abs() <= 1e-9 * (1.0 + direct.abs()),
                    "{}: {direct} vs {stable}",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn clamp_gap_rules() {
        assert_eq!(clamp_gap(0.5).unwrap(), 0.5);
        assert_eq!(clamp_gap(-1e-13).unwrap(), 0.0);
        assert!(matches!(clamp_gap(-1e-6), Err(Error::CertificateViolation(_))));
    }

    #[test]
    fn rejects_invalid_constructions() {
        assert!(Problem::quadratic(2, vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(Problem::quadratic(2, vec![1.0, 0.0, 0.0, -1.0], vec![0.0, 0.0]).is_err());
        assert!(Problem::power_norm(2, 2, 1.0).is_err());
        assert!(Problem::power_norm(2, 4, 0.0).is_err());
        assert!(Problem::sym_exp_sum(2, 3, 0).is_err());
    }

    #[test]
    fn quadratic_certificate_is_largest_eigenvalue() {
        let p = Problem::quadratic(2, vec![2.0, 1.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert!((p.certificate().l0 - 3.0).abs() < 1e-12);
        assert_eq!(p.certificate().l1, 0.0);
    }

    #[test]
    fn power_norm_envelope_matches_grid_oracle() {
        for (n, l1) in [(3u32, 0.5), (4, 2.0), (4, 0.3), (5, 1.0), (6, 3.0)] {
            let n_f = n as f64;
            let l0 = power_norm_l0(n, l1);
            let mut best = f64::NEG_INFINITY;
            let t_max = 4.0 * (n_f - 2.0) / l1;
            for i in 0..=200_000 {
                let t = t_max * i as f64 / 200_000.0;
                let h = n_f * (n_f - 1.0) * t.powi(n as i32 - 2) - l1 * n_f * t.powi(n as i32 - 1);
                best = best.max(h);
            }
            assert!(best <= l0 * (1.0 + 1e-12), "n={n}: grid max {best} exceeds {l0}");
            assert!(best >= l0 * (1.0 - 1e-6), "n={n}: envelope {l0} is not tight ({best})");
        }
        assert!((power_norm_l0(4, 2.0) - 4.0).abs() < 1e-12);
        assert!((power_norm_l0(4, 3.0) - 16.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in all_problems() {
            let f = p.function();
            for _ in 0..1000 {
                let x = sample_ball(&mut rng, p.x_star(), 2.0);
                let g = f.gradient(&x);
                let h = 1e-6 * (1.0 + x.norm());
                for i in 0..x.dim() {
                    let e = RealVector::basis(x.dim(), i, h);
                    let fd = (f.value(&(&x + &e)) - f.value(&(&x - &e))) / (2.0 * h);
                    let scale = 1.0 + g.norm();
                    assert!((fd - g[i]).abs() <= 1e-5 * scale, "{} coord {i}: fd {fd} vs {}", p.name(), g[i]);
                }
            }
        }
    }

    #[test]
    fn convex_along_sampled_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in all_problems() {
            let f = p.function();
            for _ in 0..2000 {
                let x = sample_ball(&mut rng, p.x_star(), 3.0);
                let y = sample_ball(&mut rng, p.x_star(), 3.0);
                let t: f64 = rng.random();
                let (fx, fy) = (f.value(&x), f.value(&y));
                let mid = f.value(&y.axpy(t, &(&x - &y)));
                assert!(mid <= t * fx + (1.0 - t) * fy + 1e-9 * (1.0 + fx.abs() + fy.abs()), "{}", p.name());
            }
        }
    }

    #[test]
    fn minimizer_is_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in all_problems() {
            assert_eq!(suboptimality(&p, p.x_star()).unwrap(), 0.0);
            for _ in 0..500 {
                let x = sample_ball(&mut rng, p.x_star(), 3.0);
                assert!(suboptimality(&p, &x).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn gradient_gap_bound_examples() {
        let q = identity_quadratic(3);
        assert!(check_gradient_gap_bound(&q, &v(&[1.0, -2.0, 3.0])).unwrap().holds);

        let c = Problem::cosh_norm(2).unwrap();
        let r = check_gradient_gap_bound(&c, &RealVector::zeros(2)).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (0.0, 0.0, true));

        // L1 = 2 ⇒ L0 = 16 / L1² = 4.
        let pn = Problem::power_norm(3, 4, 2.0).unwrap();
        assert_eq!(pn.certificate().l0, 4.0);
        let r = check_gradient_gap_bound(&pn, &v(&[0.5, 0.0, 0.0])).unwrap();
        // ∇f = 4‖x‖²x ⇒ ‖∇f‖ = 0.5, f − f* = 0.0625.
        let nu = omega_constant().nu;
        assert!((r.lhs - nu * 0.25).abs() < 1e-15);
        assert!((r.rhs - 2.0 * (4.0 + 2.0 * 0.5) * 0.0625).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn gradient_growth_examples() {
        let q = Problem::diagonal_quadratic(&[2.0, 1.0], &RealVector::zeros(2)).unwrap();
        let x = v(&[0.3, -1.0]);
        let r = check_gradient_growth(&q, &x, &x).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (0.0, 0.0, true));

        let y = v(&[1.3, 0.5]);
        let r = check_gradient_growth(&q, &x, &y).unwrap();
        assert!(r.holds);
        assert!((r.rhs - 2.0 * x.distance(&y)).abs() < 1e-15);

        let c = Problem::cosh_norm(1).unwrap();
        let r = check_gradient_growth(&c, &v(&[0.3]), &v(&[1.1])).unwrap();
        let lhs = 2.0 * (1.1f64.sinh() - 0.3f64.sinh());
        let rhs = (2.0 + 2.0 * 0.3f64.sinh()) * 0.8f64.exp() * 0.8;
        assert!((r.lhs - lhs).abs() < 1e-14 && (r.rhs - rhs).abs() < 1e-13);
        assert!(r.holds);
    }

    #[test]
    fn generalized_smoothness_examples() {
        let q = Problem::diagonal_quadratic(&[2.0, 1.0], &RealVector::zeros(2)).unwrap();
        let x = v(&[0.5, 0.5]);
        assert!(check_generalized_smoothness(&q, &x, &x, 17).unwrap().holds);
        assert!(check_generalized_smoothness(&q, &x, &v(&[-1.0, 2.0]), 17).unwrap().holds);
        assert!(check_generalized_smoothness(&q, &x, &x, 1).is_err());

        let c = Problem::cosh_norm(1).unwrap().with_valid_radius(Some(3.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = sample_ball(&mut rng, c.x_star(), 3.0);
            let y = sample_ball(&mut rng, c.x_star(), 3.0);
            assert!(check_generalized_smoothness(&c, &x, &y, DEFAULT_SEG_SAMPLES).unwrap().holds);
        }
        assert!(check_generalized_smoothness(&c, &v(&[0.0]), &v(&[3.5]), 17).is_err());
    }
}
