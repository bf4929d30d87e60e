//! Fock-space simulators for the amplifier channels and the exact or
//! quadrature fidelity oracles that check the closed forms.
//!
//! All channels here are phase covariant, so average fidelities over the
//! Gaussian prior reduce to one-dimensional integrals in `u = |α|²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::closed_forms::classical_limit_params;
use crate::error::{domain, Error, Result};
use crate::fock::{
    coherent_state, trace_distance, unitary_from_generator, CMatrix, CVector, FockDim,
    FockOperator, FockVector, Unitary,
};
use crate::quadrature::{gauss_hermite, gauss_laguerre};

/// Largest edge population tolerated by [`apply_squeezer`].
pub const DEFAULT_MAX_DEFICIT: f64 = 1e-6;
/// Radial Gauss-Laguerre order for prior averages.
pub const LAGUERRE_ORDER: usize = 64;
/// Per-axis Gauss-Hermite order for the heterodyne channel.
pub const HERMITE_ORDER: usize = 48;
/// Doubling discrepancy above which a quadrature result is flagged.
pub const QUADRATURE_WARNING: f64 = 1e-10;

/// Tagged description of a simulated channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ChannelSpec {
    /// Two-mode squeezer `e^{r(a†b† - ab)}` with a vacuum ancilla.
    Squeezer { r: f64 },
    /// Pure loss with amplitude transmissivity `eta`.
    Attenuator { eta: f64 },
    /// Heralded filter `Q = Σ_{n≤N} cₙ |n⟩⟨n|`, `cₙ ∝ xⁿ`.
    Filter { x: f64, n_cut: usize },
    /// Heterodyne measurement followed by preparation of `|c α̂⟩`.
    MeasurePrepareHeterodyne { c: f64 },
}

/// Simulation sizes shared by all channel variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationDims {
    /// Ancilla truncation; `None` uses the system dimension.
    pub anc_dim: Option<usize>,
    /// Output truncation for measure-and-prepare; `None` uses the input dimension.
    pub out_dim: Option<usize>,
    pub quad_order: usize,
    pub max_deficit: f64,
}

impl Default for SimulationDims {
    fn default() -> Self {
        Self {
            anc_dim: None,
            out_dim: None,
            quad_order: HERMITE_ORDER,
            max_deficit: DEFAULT_MAX_DEFICIT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChannelOutput {
    /// Unnormalized for the filter; trace equals the success probability.
    pub state: FockOperator,
    pub success_probability: f64,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Squeezer { r } if !(r >= 0.0) || !r.is_finite() => {
                Err(domain("r", r, "squeezing parameter must be non-negative"))
            }
            ChannelSpec::Attenuator { eta } if !(eta > 0.0 && eta <= 1.0) => {
                Err(domain("eta", eta, "attenuation must lie in (0, 1]"))
            }
            ChannelSpec::Filter { x, .. } if !(x > 0.0) || !x.is_finite() => {
                Err(domain("x", x, "filter ratio must be positive"))
            }
            ChannelSpec::MeasurePrepareHeterodyne { c } if !(c > 0.0) || !c.is_finite() => {
                Err(domain("c", c, "re-preparation gain must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, rho: &FockOperator, dims: &SimulationDims) -> Result<ChannelOutput> {
        self.validate()?;
        let d = rho.dim().get();
        match *self {
            ChannelSpec::Squeezer { r } => {
                let anc = dims.anc_dim.unwrap_or(d);
                let s = apply_squeezer_report(rho, r, FockDim::new(anc)?, dims.max_deficit)?;
                Ok(deterministic(s.state))
            }
            ChannelSpec::Attenuator { eta } => Ok(deterministic(apply_attenuator(rho, eta)?)),
            ChannelSpec::Filter { x, n_cut } => {
                let f = apply_filter(rho, x, n_cut)?;
                Ok(ChannelOutput {
                    state: f.state,
                    success_probability: f.success_probability,
                })
            }
            ChannelSpec::MeasurePrepareHeterodyne { c } => {
                let out = FockDim::new(dims.out_dim.unwrap_or(d))?;
                Ok(deterministic(apply_measure_prepare(rho, c, out, dims.quad_order)?))
            }
        }
    }
}

fn deterministic(state: FockOperator) -> ChannelOutput {
    let p = state.trace().re;
    ChannelOutput {
        state,
        success_probability: p,
    }
}

// ---------------------------------------------------------------------------
// Two-mode squeezer
// ---------------------------------------------------------------------------

/// Squeezer generator restricted to the chain `(m₀+j, p₀+j)`, `j < len`.
fn squeezer_chain_generator(r: f64, m0: usize, p0: usize, len: usize) -> CMatrix {
    let mut k = CMatrix::zeros(len, len);
    for j in 0..len.saturating_sub(1) {
        let amp = r * (((m0 + j + 1) * (p0 + j + 1)) as f64).sqrt();
        k[(j + 1, j)] = Complex64::from(amp);
        k[(j, j + 1)] = Complex64::from(-amp);
    }
    k
}

/// Full truncated two-mode squeezer on `system ⊗ ancilla`, assembled from the
/// blocks of constant `m - p`. The reported defect is the worst block defect.
pub fn squeezer_unitary(r: f64, dim: FockDim, anc_dim: FockDim) -> Result<Unitary> {
    let (d, da) = (dim.get(), anc_dim.get());
    let mut matrix = CMatrix::zeros(d * da, d * da);
    let mut defect = 0.0_f64;
    for k in -(da as isize - 1)..=(d as isize - 1) {
        let (m0, p0) = if k >= 0 { (k as usize, 0) } else { (0, (-k) as usize) };
        let len = (d - m0).min(da - p0);
        let u = unitary_from_generator(&squeezer_chain_generator(r, m0, p0, len))?;
        defect = defect.max(u.defect);
        for i in 0..len {
            for j in 0..len {
                matrix[((m0 + i) * da + p0 + i, (m0 + j) * da + p0 + j)] = u.matrix[(i, j)];
            }
        }
    }
    Ok(Unitary { matrix, defect })
}

/// Squeezer output together with the population that reached the truncation edge.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub state: FockOperator,
    pub deficit: f64,
}

/// `Tr_B[U (ρ ⊗ |0⟩⟨0|) U†]` with `U = e^{r(a†b† - ab)}`.
pub fn apply_squeezer(rho: &FockOperator, r: f64, anc_dim: FockDim) -> Result<FockOperator> {
    apply_squeezer_report(rho, r, anc_dim, DEFAULT_MAX_DEFICIT).map(|s| s.state)
}

/// As [`apply_squeezer`], failing when the edge population exceeds `max_deficit`.
///
/// The truncated unitary is exactly unitary, so no trace is lost; instead the
/// weight that each input level sends to the last state of its chain measures
/// how much the truncation distorts the evolution.
pub fn apply_squeezer_report(
    rho: &FockOperator,
    r: f64,
    anc_dim: FockDim,
    max_deficit: f64,
) -> Result<Simulated> {
    ChannelSpec::Squeezer { r }.validate()?;
    if r == 0.0 {
        return Ok(Simulated {
            state: rho.clone(),
            deficit: 0.0,
        });
    }
    let d = rho.dim().get();
    let da = anc_dim.get();
    // cols[n][p] = ⟨n+p, p| U |n, 0⟩
    let mut cols: Vec<CVector> = Vec::with_capacity(d);
    let mut deficit = 0.0;
    for n in 0..d {
        let len = (d - n).min(da);
        let u = unitary_from_generator(&squeezer_chain_generator(r, n, 0, len))?;
        let col = u.matrix.column(0).into_owned();
        deficit += rho.matrix()[(n, n)].re.max(0.0) * col[len - 1].norm_sqr();
        cols.push(col);
    }
    if deficit > max_deficit {
        return Err(Error::Truncation {
            deficit,
            threshold: max_deficit,
        });
    }
    let amp = |n: usize, p: usize| -> Complex64 {
        cols[n].get(p).copied().unwrap_or(Complex64::new(0.0, 0.0))
    };
    let m_in = rho.matrix();
    let out = CMatrix::from_fn(d, d, |m, mp| {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..=m.min(mp) {
            acc += amp(m - p, p) * m_in[(m - p, mp - p)] * amp(mp - p, p).conj();
        }
        acc
    });
    Ok(Simulated {
        state: FockOperator::from_parts(out, rho.is_hermitian()),
        deficit,
    })
}

/// Exact `⟨gα|C_r(|α⟩⟨α|)|gα⟩ = e^{-(g - cosh r)²|α|²/cosh²r} / cosh²r`.
pub fn squeezer_fidelity_pointwise(g: f64, r: f64, alpha: Complex64) -> Result<f64> {
    ChannelSpec::Squeezer { r }.validate()?;
    let c = r.cosh();
    Ok((-(g - c).powi(2) * alpha.norm_sqr() / (c * c)).exp() / (c * c))
}

// ---------------------------------------------------------------------------
// Prior averages
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// `|Q(2n) - Q(n)|`.
    pub error_estimate: f64,
    pub order: usize,
    pub precision_warning: bool,
}

/// `∫₀^∞ λ e^{-λu} f(u) du` by Gauss-Laguerre after the substitution `t = λu`.
pub fn average_fidelity_quadrature<F>(pointwise: F, lambda: f64, order: usize) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain("lambda", lambda, "prior average needs lambda > 0"));
    }
    if order == 0 {
        return Err(domain("order", 0.0, "quadrature order must be positive"));
    }
    let coarse = gauss_laguerre(order).integrate(|t| pointwise(t / lambda));
    let fine = gauss_laguerre(2 * order).integrate(|t| pointwise(t / lambda));
    let error_estimate = (fine - coarse).abs();
    Ok(QuadratureResult {
        value: coarse,
        error_estimate,
        order,
        precision_warning: error_estimate > QUADRATURE_WARNING * coarse.abs().max(1.0),
    })
}

// ---------------------------------------------------------------------------
// Heralded filter
// ---------------------------------------------------------------------------

/// `cₙ = xⁿ / max_{k≤N} xᵏ`, so the largest coefficient is 1.
pub fn filter_coefficients(x: f64, n_cut: usize) -> Vec<f64> {
    let top = if x > 1.0 { n_cut as i32 } else { 0 };
    (0..=n_cut).map(|n| x.powi(n as i32 - top)).collect()
}

#[derive(Debug, Clone)]
pub struct FilteredState {
    /// `Q ρ Q†`, not renormalized.
    pub state: FockOperator,
    pub success_probability: f64,
}

pub fn apply_filter(rho: &FockOperator, x: f64, n_cut: usize) -> Result<FilteredState> {
    ChannelSpec::Filter { x, n_cut }.validate()?;
    let d = rho.dim().get();
    if n_cut >= d {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "filter cutoff must be below the truncation dimension",
        });
    }
    let coeffs = filter_coefficients(x, n_cut);
    let c = |n: usize| coeffs.get(n).copied().unwrap_or(0.0);
    let out = CMatrix::from_fn(d, d, |m, n| rho.matrix()[(m, n)] * (c(m) * c(n)));
    let state = FockOperator::from_parts(out, rho.is_hermitian());
    let success_probability = state.trace().re;
    Ok(FilteredState {
        state,
        success_probability,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterResult {
    pub conditional_fidelity: f64,
    pub success_probability: f64,
    pub n_cut: usize,
}

/// Conditional fidelity of the filter `Q_N` over the Gaussian prior, from the
/// exact finite double series
///
/// ```text
/// num = λ Σ_{m,n≤N} cₘ cₙ g^{m+n} C(m+n, m) / s^{m+n+1},  s = λ+1+g²
/// den = λ Σ_{n≤N} cₙ² / (λ+1)^{n+1}
/// ```
///
/// `den` is also the success probability of the min-normalized filter.
pub fn filter_fidelity_exact(g: f64, lambda: f64, x: f64, n_cut: usize) -> Result<FilterResult> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(domain("g", g, "gain must be positive"));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain("lambda", lambda, "lambda must be positive"));
    }
    ChannelSpec::Filter { x, n_cut }.validate()?;
    if lambda + 1.0 <= x * x {
        return Err(Error::DivergentSeries(
            "filter normalization requires lambda + 1 > x^2",
        ));
    }
    let s = lambda + 1.0 + g * g;
    let top = if x > 1.0 { n_cut as f64 } else { 0.0 };
    let ln_c = |n: usize| (n as f64 - top) * x.ln();
    let mut ln_fact = vec![0.0_f64; 2 * n_cut + 2];
    for k in 1..ln_fact.len() {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let mut num = 0.0;
    for m in 0..=n_cut {
        for n in 0..=n_cut {
            let k = m + n;
            let ln_term = ln_c(m) + ln_c(n) + k as f64 * g.ln() + ln_fact[k]
                - ln_fact[m]
                - ln_fact[n]
                - (k + 1) as f64 * s.ln();
            num += ln_term.exp();
        }
    }
    let den: f64 = (0..=n_cut)
        .map(|n| (2.0 * ln_c(n) - (n + 1) as f64 * (lambda + 1.0).ln()).exp())
        .sum();
    Ok(FilterResult {
        conditional_fidelity: num / den,
        success_probability: lambda * den,
        n_cut,
    })
}

/// Lower bound `1 - 2 (g²/(λ+1))^{N+1}` for the filter with `x = g` when `λ > g²-1`.
pub fn noiseless_filter_bound(g: f64, lambda: f64, n_cut: usize) -> f64 {
    1.0 - 2.0 * (g * g / (lambda + 1.0)).powi(n_cut as i32 + 1)
}

// ---------------------------------------------------------------------------
// Pure loss
// ---------------------------------------------------------------------------

/// Pure-loss channel: beamsplitter of transmissivity `η²` with a vacuum
/// ancilla, then a partial trace. Photon number is conserved, so each block
/// of fixed total number is simulated without truncation error.
pub fn apply_attenuator(rho: &FockOperator, eta: f64) -> Result<FockOperator> {
    ChannelSpec::Attenuator { eta }.validate()?;
    let d = rho.dim().get();
    let theta = eta.clamp(-1.0, 1.0).acos();
    // cols[n][p] = ⟨n-p, p| U |n, 0⟩
    let mut cols: Vec<CVector> = Vec::with_capacity(d);
    for total in 0..d {
        // Block basis: index m ↔ (m, total - m).
        let len = total + 1;
        let mut k = CMatrix::zeros(len, len);
        for m in 1..len {
            let amp = theta * ((m * (total - m + 1)) as f64).sqrt();
            k[(m - 1, m)] = Complex64::from(amp);
            k[(m, m - 1)] = Complex64::from(-amp);
        }
        let u = unitary_from_generator(&k)?;
        cols.push(CVector::from_fn(len, |p, _| u.matrix[(total - p, total)]));
    }
    let m_in = rho.matrix();
    let out = CMatrix::from_fn(d, d, |m, mp| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = 0;
        while m + p < d && mp + p < d {
            acc += cols[m + p][p] * m_in[(m + p, mp + p)] * cols[mp + p][p].conj();
            p += 1;
        }
        acc
    });
    Ok(FockOperator::from_parts(out, rho.is_hermitian()))
}

// ---------------------------------------------------------------------------
// Heterodyne measure-and-prepare
// ---------------------------------------------------------------------------

/// Coherent amplitudes `zⁿ/√n!` without the Gaussian prefactor.
fn raw_coherent(z: Complex64, dim: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    let mut a = Complex64::new(1.0, 0.0);
    v[0] = a;
    for n in 1..dim {
        a = a * z / (n as f64).sqrt();
        v[n] = a;
    }
    v
}

/// `∫ d²α̂/π e^{-|α̂-β|²} |cα̂⟩⟨cα̂|`: the heterodyne measure-and-prepare channel
/// acting on the coherent input `|β⟩`.
///
/// Completing the square leaves a polynomial of degree `2(dim-1)` per axis
/// against a Gaussian weight, so the Gauss-Hermite order is raised to at least
/// `dim`, which makes the integral exact up to rounding.
pub fn mp_heterodyne_apply(
    beta: Complex64,
    c: f64,
    dim: FockDim,
    quad_order: usize,
) -> Result<FockOperator> {
    ChannelSpec::MeasurePrepareHeterodyne { c }.validate()?;
    let d = dim.get();
    let s = 1.0 + c * c;
    let mu = beta / s;
    let scale = 1.0 / s.sqrt();
    let rule = gauss_hermite(quad_order.max(d));
    let mut out = CMatrix::zeros(d, d);
    for (&xi, &wi) in rule.nodes.iter().zip(&rule.weights) {
        for (&yi, &wj) in rule.nodes.iter().zip(&rule.weights) {
            let alpha = mu + Complex64::new(xi, yi) * scale;
            let v = raw_coherent(alpha * c, d);
            out.gerc(Complex64::from(wi * wj), &v, &v, Complex64::new(1.0, 0.0));
        }
    }
    let prefactor = (-c * c * beta.norm_sqr() / s).exp() / (std::f64::consts::PI * s);
    Ok(FockOperator::from_parts(out * Complex64::from(prefactor), true))
}

/// Measure-and-prepare channel on an arbitrary input, `∫ d²α/π ⟨α|ρ|α⟩ |cα⟩⟨cα|`.
pub fn apply_measure_prepare(
    rho: &FockOperator,
    c: f64,
    out_dim: FockDim,
    quad_order: usize,
) -> Result<FockOperator> {
    ChannelSpec::MeasurePrepareHeterodyne { c }.validate()?;
    let d_in = rho.dim().get();
    let d_out = out_dim.get();
    let s = 1.0 + c * c;
    let scale = 1.0 / s.sqrt();
    let rule = gauss_hermite(quad_order.max(d_in + d_out));
    let mut out = CMatrix::zeros(d_out, d_out);
    for (&xi, &wi) in rule.nodes.iter().zip(&rule.weights) {
        for (&yi, &wj) in rule.nodes.iter().zip(&rule.weights) {
            let alpha = Complex64::new(xi, yi) * scale;
            let probe = raw_coherent(alpha, d_in);
            let husimi = probe.dotc(&(rho.matrix() * &probe)).re;
            let v = raw_coherent(alpha * c, d_out);
            out.gerc(Complex64::from(wi * wj * husimi), &v, &v, Complex64::new(1.0, 0.0));
        }
    }
    Ok(FockOperator::from_parts(
        out * Complex64::from(1.0 / (std::f64::consts::PI * s)),
        true,
    ))
}

/// Exact `⟨gα|C̃_c(|α⟩⟨α|)|gα⟩ = e^{-(g-c)²|α|²/(1+c²)} / (1+c²)`.
pub fn mp_fidelity_pointwise(g: f64, c: f64, alpha: Complex64) -> f64 {
    let s = 1.0 + c * c;
    (-(g - c).powi(2) * alpha.norm_sqr() / s).exp() / s
}

// ---------------------------------------------------------------------------
// Measure-and-prepare as an attenuated amplifier
// ---------------------------------------------------------------------------

/// Trace distance between the optimal measure-and-prepare output on `|β⟩` and
/// the output of pure loss `η = g/g'` followed by the squeezer with
/// `cosh r' = g'/(λ+1)`, where `g' = √(g² + (λ+1)²)`.
///
/// The loss must act first: loss after the squeezer scales the added noise by
/// `η²` and no longer matches. The squeezer runs in a working space of twice
/// `dims` levels and the result is compressed back to `dims`, so both outputs
/// are compared as compressions of untruncated states.
pub fn verify_mp_attenuated_equivalence(
    g: f64,
    lambda: f64,
    beta: Complex64,
    dims: FockDim,
) -> Result<f64> {
    let (mp, amp) = mp_and_attenuated_amplifier(g, lambda, beta, dims)?;
    trace_distance(&mp, &amp)
}

/// Both sides of the attenuated-amplifier identity on `|β⟩`.
pub fn mp_and_attenuated_amplifier(
    g: f64,
    lambda: f64,
    beta: Complex64,
    dims: FockDim,
) -> Result<(FockOperator, FockOperator)> {
    let limit = classical_limit_params(g, lambda)?;
    let c = g / (1.0 + lambda);
    let mp = mp_heterodyne_apply(beta, c, dims, HERMITE_ORDER)?;

    let work = FockDim::new(2 * dims.get())?;
    let input = coherent_state(beta, work).projector();
    let attenuated = apply_attenuator(&input, limit.eta)?;
    let r_prime = (limit.g_prime / (lambda + 1.0)).acosh();
    let amplified = apply_squeezer(&attenuated, r_prime, work)?;
    Ok((mp, amplified.crop(dims)?))
}

/// Per-input fidelity `⟨gα|C(|α⟩⟨α|)|gα⟩` from a Fock-space simulation.
pub fn simulated_fidelity(
    channel: &ChannelSpec,
    g: f64,
    alpha: Complex64,
    dim: FockDim,
    dims: &SimulationDims,
) -> Result<ChannelFidelity> {
    let rho = coherent_state(alpha, dim).projector();
    let out = channel.apply(&rho, dims)?;
    let target_dim = out.state.dim();
    let target: FockVector = coherent_state(alpha * g, target_dim);
    Ok(ChannelFidelity {
        weighted_fidelity: out.state.expectation(&target)?.re,
        success_probability: out.success_probability,
    })
}

/// Unnormalized fidelity numerator and heralding probability for one input.
#[derive(Debug, Clone, Copy)]
pub struct ChannelFidelity {
    pub weighted_fidelity: f64,
    pub success_probability: f64,
}

/// Prior-averaged conditional fidelity of a simulated channel, by radial
/// Gauss-Laguerre over `u = |α|²` (phase covariance makes the angle irrelevant).
///
/// Quadrature nodes far outside the truncation carry negligible weight; the
/// squeezer's edge check is relaxed for them.
pub fn simulated_average_fidelity(
    channel: &ChannelSpec,
    g: f64,
    lambda: f64,
    dim: FockDim,
    order: usize,
    anc_dim: Option<usize>,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(domain("lambda", lambda, "prior average needs lambda > 0"));
    }
    let dims = SimulationDims {
        anc_dim,
        max_deficit: f64::INFINITY,
        ..SimulationDims::default()
    };
    let rule = gauss_laguerre(order);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let alpha = Complex64::from((t / lambda).sqrt());
        let f = simulated_fidelity(channel, g, alpha, dim, &dims)?;
        num += w * f.weighted_fidelity;
        den += w * f.success_probability;
    }
    Ok(num / den)
}
