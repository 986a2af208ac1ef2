//! Radially symmetric gradient-noise models with α-th moment certificates,
//! the additive stochastic gradient oracle, and deterministic per-trial RNG
//! streams.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Error, Result};
use crate::problems::Problem;
use crate::quadrature::integrate;
use crate::vector::RealVector;

/// Independent, reproducible random substream for one trial.
///
/// Streams are ChaCha12 keyed by `base_seed` with the trial index as the
/// ChaCha stream id, so distinct indices never overlap.
#[derive(Debug, Clone)]
pub struct SeedStream {
    base_seed: u64,
    stream_index: u64,
    rng: ChaCha12Rng,
}

impl SeedStream {
    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }
}

pub fn derive_stream(base_seed: u64, trial_index: u64) -> SeedStream {
    let mut rng = ChaCha12Rng::seed_from_u64(base_seed);
    rng.set_stream(trial_index);
    SeedStream {
        base_seed,
        stream_index: trial_index,
        rng,
    }
}

/// Radial law of the noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseKind {
    None,
    /// `scale · N(0, I_d)`.
    Gaussian {
        scale: f64,
    },
    /// Pareto(`scale`, `tail`) magnitude times a uniform direction.
    SymmetricPareto {
        scale: f64,
        tail: f64,
    },
    /// |S| times a uniform direction, `S` symmetric `stability`-stable with
    /// characteristic function `exp(−|scale·u|^stability)`.
    StableRadial {
        stability: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub dimension: usize,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(domain("noise dimension must be positive"));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match kind {
            NoiseKind::None => {}
            NoiseKind::Gaussian { scale } => positive("gaussian scale", scale)?,
            NoiseKind::SymmetricPareto { scale, tail } => {
                positive("pareto scale", scale)?;
                if !(tail > 1.0 && tail.is_finite()) {
                    return Err(domain(format!("pareto tail index must exceed 1, got {tail}")));
                }
            }
            NoiseKind::StableRadial { stability, scale } => {
                positive("stable scale", scale)?;
                if !(stability > 1.0 && stability <= 2.0) {
                    return Err(domain(format!("stability index must lie in (1, 2], got {stability}")));
                }
            }
        }
        Ok(Self { kind, dimension })
    }

    pub fn none(dimension: usize) -> Self {
        Self {
            kind: NoiseKind::None,
            dimension,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self.kind, NoiseKind::None)
    }
}

/// `E‖ξ‖^alpha ≤ sigma^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCertificate {
    pub alpha: f64,
    pub sigma: f64,
    /// Closed form (`true`) or numeric quadrature (`false`).
    pub exact: bool,
}

fn unit_direction<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> RealVector {
    loop {
        let z: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            return RealVector::from_raw(z.into_iter().map(|v| v / n).collect());
        }
    }
}

/// Chambers–Mallows–Stuck draw of a symmetric `a`-stable variable with unit scale.
pub fn sample_symmetric_stable<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    let half_pi = 0.5 * PI;
    let v = loop {
        let u: f64 = rng.random();
        let v = PI * (u - 0.5);
        if v.abs() < half_pi {
            break v;
        }
    };
    let w: f64 = loop {
        let w: f64 = Exp1.sample(rng);
        if w > 0.0 {
            break w;
        }
    };
    let cos_v = v.cos();
    (a * v).sin() / cos_v.powf(1.0 / a) * (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a)
}

/// One draw `ξ` of the noise model.
pub fn sample_noise(model: &NoiseModel, stream: &mut SeedStream) -> RealVector {
    let d = model.dimension;
    let rng = stream.rng();
    match model.kind {
        NoiseKind::None => RealVector::zeros(d),
        NoiseKind::Gaussian { scale } => RealVector::from_raw((0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()),
        NoiseKind::SymmetricPareto { scale, tail } => {
            let dir = unit_direction(rng, d);
            let r = Pareto::new(scale, tail).expect("validated parameters").sample(rng);
            dir.scale(r)
        }
        NoiseKind::StableRadial { stability, scale } => {
            let dir = unit_direction(rng, d);
            let r = scale * sample_symmetric_stable(rng, stability).abs();
            dir.scale(r)
        }
    }
}

/// `∫_0^∞ (1 − e^{−v^a}) v^{−p−1} dv` by quadrature, split at `v = 1` and
/// mapped to `[0, 1]` with substitutions that make both integrands smooth.
fn stable_moment_integral(p: f64, a: f64) -> Result<f64> {
    // v = w^s with s = 1/(a−p): integrand reduces to s·(1 − e^{−y})/y, y = w^{s a}.
    let s = 1.0 / (a - p);
    let inner = move |w: f64| {
        let y = w.powf(s * a);
        if y == 0.0 {
            s
        } else {
            s * (-(-y).exp_m1()) / y
        }
    };
    // v = w^{−1/p}: integrand reduces to (1 − e^{−w^{−a/p}})/p.
    let outer = move |w: f64| {
        if w == 0.0 {
            1.0 / p
        } else {
            -(-w.powf(-a / p)).exp_m1() / p
        }
    };
    let (lo, _) = integrate(inner, 0.0, 1.0, 1e-12, 0.0)?;
    let (hi, _) = integrate(outer, 0.0, 1.0, 1e-12, 0.0)?;
    Ok(lo + hi)
}

/// `E|S|^p` for symmetric stable `S` with characteristic function
/// `exp(−|c u|^a)`, `0 < p < a ≤ 2`, from the characteristic-function identity
/// `E|X|^p = (2/π) Γ(p+1) sin(πp/2) ∫_0^∞ (1 − Re φ(u)) u^{−p−1} du`.
pub fn stable_absolute_moment(p: f64, a: f64, c: f64) -> Result<f64> {
    if !(p > 0.0 && p < a && p < 2.0) {
        return Err(Error::NoCertificate { alpha: p, index: a });
    }
    let j = stable_moment_integral(p, a)?;
    Ok(c.powf(p) * (2.0 / PI) * gamma(p + 1.0) * (0.5 * PI * p).sin() * j)
}

/// Smallest `sigma` with `E‖ξ‖^alpha ≤ sigma^alpha` for the model.
pub fn moment_certificate(model: &NoiseModel, alpha: f64) -> Result<MomentCertificate> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(domain(format!("alpha must lie in (1, 2], got {alpha}")));
    }
    let d = model.dimension as f64;
    let (moment, exact) = match model.kind {
        NoiseKind::None => (0.0, true),
        NoiseKind::Gaussian { scale } => {
            if alpha == 2.0 {
                (d * scale * scale, true)
            } else {
                // s^α 2^{α/2} Γ((d+α)/2) / Γ(d/2)
                let log_m = alpha * scale.ln() + 0.5 * alpha * 2f64.ln() + ln_gamma(0.5 * (d + alpha)) - ln_gamma(0.5 * d);
                (log_m.exp(), true)
            }
        }
        NoiseKind::SymmetricPareto { scale, tail } => {
            if alpha >= tail {
                return Err(Error::NoCertificate { alpha, index: tail });
            }
            (tail * scale.powf(alpha) / (tail - alpha), true)
        }
        NoiseKind::StableRadial { stability, scale } => {
            if alpha >= stability {
                return Err(Error::NoCertificate { alpha, index: stability });
            }
            (stable_absolute_moment(alpha, stability, scale)?, false)
        }
    };
    let sigma = if alpha == 2.0 { moment.sqrt() } else { moment.powf(1.0 / alpha) };
    Ok(MomentCertificate { alpha, sigma, exact })
}

/// `∇f(x) + ξ`.
pub fn stochastic_gradient(p: &Problem, model: &NoiseModel, x: &RealVector, stream: &mut SeedStream) -> Result<RealVector> {
    x.check_dim(p.dimension())?;
    if model.dimension != p.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            found: model.dimension,
        });
    }
    let g = p.gradient(x);
    if model.is_none() {
        return Ok(g);
    }
    Ok(&g + &sample_noise(model, stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCheck {
    pub estimate: f64,
    pub bound: f64,
    pub stderr: f64,
    pub passed: bool,
}

/// Monte Carlo estimate of `E‖ξ‖^alpha` against the certificate bound.
pub fn empirical_moment_check(model: &NoiseModel, alpha: f64, n: usize, stream: &mut SeedStream) -> Result<MomentCheck> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let cert = moment_certificate(model, alpha)?;
    let bound = cert.sigma.powf(alpha);
    let mut stats = crate::analysis::stats::RunningMoments::default();
    for _ in 0..n {
        stats.push(sample_noise(model, stream).norm().powf(alpha));
    }
    let estimate = stats.mean();
    let stderr = stats.stderr();
    Ok(MomentCheck {
        estimate,
        bound,
        stderr,
        passed: estimate <= bound + 3.0 * stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Problem;

    fn pareto(d: usize, scale: f64, tail: f64) -> NoiseModel {
        NoiseModel::new(NoiseKind::SymmetricPareto { scale, tail }, d).unwrap()
    }

    #[test]
    fn none_is_zero() {
        let m = NoiseModel::none(3);
        let mut s = derive_stream(1, 0);
        for _ in 0..10 {
            assert_eq!(sample_noise(&m, &mut s), RealVector::zeros(3));
        }
        let c = moment_certificate(&m, 1.5).unwrap();
        assert_eq!(c.sigma, 0.0);
        let chk = empirical_moment_check(&m, 1.7, 100, &mut s).unwrap();
        assert_eq!((chk.estimate, chk.bound), (0.0, 0.0));
        assert!(chk.passed);
    }

    #[test]
    fn pareto_support() {
        let m = pareto(4, 1.0, 2.0);
        let mut s = derive_stream(5, 0);
        for _ in 0..10_000 {
            assert!(sample_noise(&m, &mut s).norm() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn pareto_certificate_closed_form() {
        let c = moment_certificate(&pareto(3, 1.0, 2.0), 1.5).unwrap();
        assert!(c.exact);
        assert!((c.sigma.powf(1.5) - 4.0).abs() < 1e-12);
        assert!((c.sigma - 4f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((c.sigma - 2.5198).abs() < 1e-4);
        assert!(matches!(moment_certificate(&pareto(3, 1.0, 1.25), 1.5), Err(Error::NoCertificate { .. })));
    }

    #[test]
    fn gaussian_certificate() {
        let m = NoiseModel::new(NoiseKind::Gaussian { scale: 0.7 }, 5).unwrap();
        let c = moment_certificate(&m, 2.0).unwrap();
        assert!((c.sigma * c.sigma - 5.0 * 0.49).abs() < 1e-12);
        // α = 1: E‖z‖ for z ~ N(0, I_1) is sqrt(2/π); check via d = 1, α → near 1 is not allowed,
        // so compare α = 1.5 in d = 1 against ∫ |x|^1.5 φ(x) dx = 2^{0.75} Γ(1.25)/√π.
        let m1 = NoiseModel::new(NoiseKind::Gaussian { scale: 1.0 }, 1).unwrap();
        let c1 = moment_certificate(&m1, 1.5).unwrap();
        let exact = 2f64.powf(0.75) * gamma(1.25) / PI.sqrt();
        assert!((c1.sigma.powf(1.5) - exact).abs() < 1e-12);
    }

    #[test]
    fn stable_certificate_matches_closed_form() {
        // E|S|^p = c^p 2^p Γ((1+p)/2) Γ(1 − p/a) / (√π Γ(1 − p/2)).
        for &(p, a, c) in &[(1.5, 1.8, 1.0), (1.2, 1.5, 2.0), (1.1, 1.9, 0.5), (1.5, 2.0, 1.0), (1.7, 1.75, 1.0)] {
            let quad = stable_absolute_moment(p, a, c).unwrap();
            let exact = c.powf(p) * 2f64.powf(p) * gamma(0.5 * (1.0 + p)) * gamma(1.0 - p / a) / (PI.sqrt() * gamma(1.0 - 0.5 * p));
            assert!(((quad - exact) / exact).abs() < 1e-8, "p={p} a={a}: {quad} vs {exact}");
        }
        let m = NoiseModel::new(NoiseKind::StableRadial { stability: 1.8, scale: 1.0 }, 3).unwrap();
        let cert = moment_certificate(&m, 1.5).unwrap();
        assert!(!cert.exact);
        assert!(matches!(moment_certificate(&m, 1.8), Err(Error::NoCertificate { .. })));
        assert!(matches!(moment_certificate(&m, 2.0), Err(Error::NoCertificate { .. })));
    }

    #[test]
    fn alpha_range_enforced() {
        let m = NoiseModel::none(2);
        assert!(moment_certificate(&m, 1.0).is_err());
        assert!(moment_certificate(&m, 2.5).is_err());
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(NoiseModel::new(NoiseKind::SymmetricPareto { scale: 1.0, tail: 1.0 }, 2).is_err());
        assert!(NoiseModel::new(NoiseKind::StableRadial { stability: 1.0, scale: 1.0 }, 2).is_err());
        assert!(NoiseModel::new(NoiseKind::StableRadial { stability: 2.1, scale: 1.0 }, 2).is_err());
        assert!(NoiseModel::new(NoiseKind::Gaussian { scale: 0.0 }, 2).is_err());
        assert!(NoiseModel::new(NoiseKind::None, 0).is_err());
    }

    #[test]
    fn gaussian_mean_within_clt_width() {
        let m = NoiseModel::new(NoiseKind::Gaussian { scale: 1.0 }, 2).unwrap();
        let mut s = derive_stream(2024, 0);
        let n = 1_000_000;
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let x = sample_noise(&m, &mut s);
            sum[0] += x[0];
            sum[1] += x[1];
        }
        for v in sum {
            assert!((v / n as f64).abs() <= 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn oracle_is_exact_without_noise() {
        let p = Problem::quadratic(2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let m = NoiseModel::none(2);
        let mut s = derive_stream(0, 0);
        let x = RealVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(stochastic_gradient(&p, &m, &x, &mut s).unwrap(), p.gradient(&x));
        assert_eq!(stochastic_gradient(&p, &m, p.x_star(), &mut s).unwrap(), RealVector::zeros(2));
        let wrong = NoiseModel::none(3);
        assert!(stochastic_gradient(&p, &wrong, &x, &mut s).is_err());
    }

    #[test]
    fn oracle_is_unbiased() {
        let p = Problem::diagonal_quadratic(&[1.0, 1.0], &RealVector::zeros(2)).unwrap();
        let m = NoiseModel::new(NoiseKind::Gaussian { scale: 1.0 }, 2).unwrap();
        let mut s = derive_stream(17, 3);
        let x = RealVector::new(vec![1.0, 0.0]).unwrap();
        let n = 100_000;
        let mut acc = RealVector::zeros(2);
        for _ in 0..n {
            acc.add_assign_scaled(1.0 / n as f64, &stochastic_gradient(&p, &m, &x, &mut s).unwrap());
        }
        assert!((acc[0] - 1.0).abs() < 0.02 && acc[1].abs() < 0.02, "{acc:?}");
    }

    #[test]
    fn pareto_moment_estimate() {
        let m = pareto(3, 1.0, 2.0);
        let mut s = derive_stream(99, 0);
        let chk = empirical_moment_check(&m, 1.5, 1_000_000, &mut s).unwrap();
        assert!((chk.estimate - 4.0).abs() <= 3.0 * chk.stderr, "{chk:?}");
        assert!(chk.passed);
    }

    #[test]
    fn stable_moment_estimate() {
        let m = NoiseModel::new(NoiseKind::StableRadial { stability: 1.8, scale: 1.0 }, 3).unwrap();
        let mut s = derive_stream(100, 0);
        let chk = empirical_moment_check(&m, 1.5, 1_000_000, &mut s).unwrap();
        assert!(chk.passed, "{chk:?}");
    }

    #[test]
    fn certificates_sound_across_alphas() {
        let models = [
            NoiseModel::new(NoiseKind::Gaussian { scale: 0.5 }, 4).unwrap(),
            pareto(4, 1.0, 2.5),
            pareto(2, 0.5, 3.0),
            NoiseModel::new(NoiseKind::StableRadial { stability: 1.9, scale: 1.0 }, 2).unwrap(),
        ];
        for (i, m) in models.iter().enumerate() {
            for alpha in [1.2, 1.5, 2.0] {
                let mut s = derive_stream(7, i as u64);
                match empirical_moment_check(m, alpha, 200_000, &mut s) {
                    Ok(chk) => assert!(chk.passed, "model {i} alpha {alpha}: {chk:?}"),
                    Err(Error::NoCertificate { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn radial_symmetry_mean() {
        let n = 1_000_000;
        for (i, m) in [
            pareto(2, 1.0, 2.5),
            NoiseModel::new(NoiseKind::StableRadial { stability: 1.9, scale: 1.0 }, 2).unwrap(),
        ]
        .iter()
        .enumerate()
        {
            let mut s = derive_stream(31, i as u64);
            let mut sum = [0.0; 2];
            let mut sq = [0.0; 2];
            for _ in 0..n {
                let x = sample_noise(m, &mut s);
                for j in 0..2 {
                    sum[j] += x[j];
                    sq[j] += x[j] * x[j];
                }
            }
            for j in 0..2 {
                let mean = sum[j] / n as f64;
                let sd = (sq[j] / n as f64 - mean * mean).sqrt();
                assert!(mean.abs() <= 4.0 * sd / (n as f64).sqrt(), "model {i} coord {j}: {mean}");
            }
        }
    }

    fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / na - j as f64 / nb).abs());
        }
        d
    }

    #[test]
    fn stable_at_index_two_is_gaussian() {
        // S(2, c) = N(0, 2c²); in one dimension the radial laws coincide.
        let n = 100_000;
        let stable = NoiseModel::new(NoiseKind::StableRadial { stability: 2.0, scale: 1.0 }, 1).unwrap();
        let gauss = NoiseModel::new(NoiseKind::Gaussian { scale: 2f64.sqrt() }, 1).unwrap();
        let mut s1 = derive_stream(11, 0);
        let mut s2 = derive_stream(11, 1);
        let a: Vec<f64> = (0..n).map(|_| sample_noise(&stable, &mut s1).norm()).collect();
        let b: Vec<f64> = (0..n).map(|_| sample_noise(&gauss, &mut s2).norm()).collect();
        let d = ks_two_sample(a, b);
        // 1% critical value: 1.628 · sqrt(2/n).
        let crit = 1.628 * (2.0 / n as f64).sqrt();
        assert!(d < crit, "KS statistic {d} ≥ {crit}");
    }

    #[test]
    fn streams_are_deterministic() {
        let mut a = derive_stream(42, 0);
        let mut b = derive_stream(42, 0);
        for _ in 0..100 {
            assert_eq!(a.rng().random::<u64>(), b.rng().random::<u64>());
        }
        let m = pareto(3, 1.0, 2.0);
        let mut a = derive_stream(42, 7);
        let mut b = derive_stream(42, 7);
        for _ in 0..100 {
            assert_eq!(sample_noise(&m, &mut a), sample_noise(&m, &mut b));
        }
    }

    #[test]
    fn streams_do_not_collide() {
        let firsts: Vec<[u64; 4]> = (0..1000)
            .map(|i| {
                let mut s = derive_stream(42, i);
                [s.rng().random(), s.rng().random(), s.rng().random(), s.rng().random()]
            })
            .collect();
        let mut heads: Vec<u64> = firsts.iter().map(|f| f[0]).collect();
        heads.sort_unstable();
        heads.dedup();
        assert_eq!(heads.len(), 1000);
        // No stream is a shifted copy of another: no stream's first word appears
        // among the next words of any other stream.
        let mut later: Vec<u64> = firsts.iter().flat_map(|f| f[1..].to_vec()).collect();
        later.sort_unstable();
        for f in &firsts {
            assert!(later.binary_search(&f[0]).is_err());
        }
        let mut a = derive_stream(42, 0);
        let mut b = derive_stream(42, 1);
        assert_ne!(a.rng().random::<u64>(), b.rng().random::<u64>());
    }
}
