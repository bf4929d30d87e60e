//! Monte-Carlo estimates of prior-averaged fidelities.
//!
//! Samples are drawn in fixed-size batches; batch `b` uses a ChaCha8 stream
//! seeded with `seed` and stream id `b`, so results do not depend on the
//! thread count. Batch statistics are merged pairwise in batch order.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::squeezer_fidelity_pointwise;
use crate::error::{domain, Result};

/// Samples per independent RNG stream.
pub const BATCH_SIZE: usize = 10_000;
/// Smallest sample count accepted by the fidelity estimators.
pub const MIN_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub lambda: f64,
    pub alpha0: Complex64,
}

impl PriorSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        Self::centered_at(lambda, Complex64::new(0.0, 0.0))
    }

    pub fn centered_at(lambda: f64, alpha0: Complex64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain("lambda", lambda, "prior width needs lambda > 0"));
        }
        Ok(Self { lambda, alpha0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Estimate {
    /// `|mean - target| / stderr`, or 0/∞ when the spread vanishes.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, target: f64, bands: f64) -> bool {
        self.z_score(target) <= bands
    }
}

/// Draw from `λ e^{-λ|α-α₀|²} d²α/π`: each quadrature has variance `1/(2λ)`.
pub fn sample_prior<R: Rng + ?Sized>(prior: &PriorSpec, rng: &mut R) -> Complex64 {
    let sigma = (0.5 / prior.lambda).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    prior.alpha0 + Complex64::new(re, im) * sigma
}

/// Heterodyne outcome for a coherent input: `α + (n₁ + i n₂)/√2`.
pub fn sample_heterodyne<R: Rng + ?Sized>(alpha: Complex64, rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    alpha + Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(a: Moments, b: Moments) -> Moments {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let count = a.count + b.count;
        let delta = b.mean - a.mean;
        let (na, nb, n) = (a.count as f64, b.count as f64, count as f64);
        Moments {
            count,
            mean: a.mean + delta * nb / n,
            m2: a.m2 + b.m2 + delta * delta * na * nb / n,
        }
    }
}

fn pairwise(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => Moments {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        },
        1 => parts[0],
        len => {
            let (l, r) = parts.split_at(len / 2);
            Moments::merge(pairwise(l), pairwise(r))
        }
    }
}

/// Mean and standard error of `sample(rng)` over `n` draws.
pub fn estimate<F>(n: usize, seed: u64, sample: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if n < 2 {
        return Err(domain("n", n as f64, "an estimate needs at least two samples"));
    }
    let batches = n.div_ceil(BATCH_SIZE);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
            let mut m = Moments {
                count: 0,
                mean: 0.0,
                m2: 0.0,
            };
            for _ in 0..len {
                let v = sample(&mut rng);
                m.count += 1;
                let delta = v - m.mean;
                m.mean += delta / m.count as f64;
                m.m2 += delta * (v - m.mean);
            }
            m
        })
        .collect();
    let total = pairwise(&parts);
    let var = total.m2 / (total.count - 1) as f64;
    Ok(Estimate {
        mean: total.mean,
        stderr: (var / total.count as f64).sqrt(),
        n_samples: total.count,
        seed,
    })
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(domain("n", n as f64, "fidelity estimates need at least 1000 samples"));
    }
    Ok(())
}

/// Heterodyne-and-reprepare protocol: `α` from the prior, `α̂` from the
/// heterodyne outcome, fidelity `|⟨gα|gα̂/(1+λ)⟩|²`.
pub fn mc_cft(g: f64, lambda: f64, n: usize, seed: u64) -> Result<Estimate> {
    mc_cft_displaced(g, lambda, Complex64::new(0.0, 0.0), n, seed)
}

/// As [`mc_cft`] with the prior centred at `α₀`; the re-prepared amplitude is
/// `g α₀ + g(α̂ - α₀)/(1+λ)`.
pub fn mc_cft_displaced(g: f64, lambda: f64, alpha0: Complex64, n: usize, seed: u64) -> Result<Estimate> {
    check_samples(n)?;
    let prior = PriorSpec::centered_at(lambda, alpha0)?;
    let shrink = 1.0 / (1.0 + lambda);
    let g2 = g * g;
    estimate(n, seed, |rng| {
        let alpha = sample_prior(&prior, rng);
        let outcome = sample_heterodyne(alpha, rng);
        let prepared = alpha0 + (outcome - alpha0) * shrink;
        (-g2 * (alpha - prepared).norm_sqr()).exp()
    })
}

/// Prior average of the squeezer's pointwise fidelity.
pub fn mc_squeezer(g: f64, lambda: f64, r: f64, n: usize, seed: u64) -> Result<Estimate> {
    check_samples(n)?;
    let prior = PriorSpec::new(lambda)?;
    squeezer_fidelity_pointwise(g, r, Complex64::new(0.0, 0.0))?;
    estimate(n, seed, |rng| {
        let alpha = sample_prior(&prior, rng);
        squeezer_fidelity_pointwise(g, r, alpha).unwrap_or(f64::NAN)
    })
}
