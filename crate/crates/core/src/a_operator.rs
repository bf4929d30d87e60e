//! The performance operator `A_{g,λ,x}` for a thermal reference state `σ_x`,
//! truncated to `dim_out × dim_in` Fock levels.
//!
//! Its operator norm bounds the deterministic fidelity (and equals the
//! probabilistic one at `x = 1/(λ+1)`); its injective cross norm bounds the
//! measure-and-prepare fidelity.
//!
//! Matrix elements follow from the Gaussian moments
//! `∫ d²α/π e^{-s|α|²} α^j ᾱ^k = δ_jk k!/s^{k+1}` with `s = λ+1+g²`:
//!
//! ```text
//! ⟨m,p|A|n,q⟩ = λ g^{m+n} x^{-(p+q)/2} (m+q)! / ((1-x) √(m! n! p! q!) s^{m+q+1})
//! ```
//!
//! and vanish unless `m + q = n + p`, so `A` is block diagonal in `m - p`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::fock::{
    dominant_eigenvalue, trace_power, CMatrix, CVector, FockDim, FockVector, TwoModeOperator,
};

/// Adaptive truncation: starting size, increment and cap (per mode).
pub const ADAPTIVE_START_DIM: usize = 30;
pub const ADAPTIVE_STEP: usize = 10;
pub const ADAPTIVE_MAX_DIM: usize = 120;
/// Default number of random starts for [`cross_norm_numeric`].
pub const DEFAULT_RESTARTS: usize = 20;
const DEFAULT_CROSS_SEED: u64 = 0x5eed_c0ffee;
const MAX_SWEEPS: usize = 2_000;
/// Convergence tolerance of the per-block power iterations.
const INNER_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AOperatorSpec {
    pub g: f64,
    pub lambda: f64,
    pub x: f64,
    pub dim_out: FockDim,
    pub dim_in: FockDim,
}

impl AOperatorSpec {
    pub fn new(g: f64, lambda: f64, x: f64, dim_out: usize, dim_in: usize) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(domain("g", g, "gain must be positive"));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain("lambda", lambda, "lambda must be positive"));
        }
        if !(x > 0.0 && x < 1.0) {
            return Err(domain("x", x, "thermal parameter must lie in (0, 1)"));
        }
        Ok(Self {
            g,
            lambda,
            x,
            dim_out: FockDim::new(dim_out)?,
            dim_in: FockDim::new(dim_in)?,
        })
    }

    pub fn with_dims(self, dim_out: usize, dim_in: usize) -> Result<Self> {
        Self::new(self.g, self.lambda, self.x, dim_out, dim_in)
    }

    /// Matrix element `⟨m,p|A|n,q⟩`.
    pub fn element(&self, m: usize, p: usize, n: usize, q: usize) -> f64 {
        let lf = LnFactorial::new(m.max(n).max(p).max(q) + m + q + 1);
        self.element_with(&lf, m, p, n, q)
    }

    fn element_with(&self, lf: &LnFactorial, m: usize, p: usize, n: usize, q: usize) -> f64 {
        if m + q != n + p {
            return 0.0;
        }
        let s = self.lambda + 1.0 + self.g * self.g;
        let t = m + q;
        let ln = self.lambda.ln() - (1.0 - self.x).ln() + (m + n) as f64 * self.g.ln()
            - 0.5 * (p + q) as f64 * self.x.ln()
            + lf.get(t)
            - 0.5 * (lf.get(m) + lf.get(n) + lf.get(p) + lf.get(q))
            - (t + 1) as f64 * s.ln();
        ln.exp()
    }
}

struct LnFactorial(Vec<f64>);

impl LnFactorial {
    fn new(max: usize) -> Self {
        let mut v = Vec::with_capacity(max + 1);
        v.push(0.0);
        for k in 1..=max {
            v.push(v[k - 1] + (k as f64).ln());
        }
        Self(v)
    }

    #[inline]
    fn get(&self, k: usize) -> f64 {
        self.0[k]
    }
}

/// One diagonal block of `A`: all `(m, p)` with `m - p = offset`.
#[derive(Debug, Clone)]
pub struct Block {
    pub offset: isize,
    pub states: Vec<(usize, usize)>,
    pub matrix: CMatrix,
}

pub fn blocks(spec: &AOperatorSpec) -> Vec<Block> {
    let (d_out, d_in) = (spec.dim_out.get(), spec.dim_in.get());
    let lf = LnFactorial::new(2 * (d_out + d_in));
    let lo = -(d_in as isize - 1);
    let hi = d_out as isize - 1;
    (lo..=hi)
        .map(|k| {
            let states: Vec<(usize, usize)> = (0..d_out)
                .filter_map(|m| {
                    let p = m as isize - k;
                    (p >= 0 && (p as usize) < d_in).then_some((m, p as usize))
                })
                .collect();
            let n = states.len();
            let matrix = CMatrix::from_fn(n, n, |i, j| {
                let (m, p) = states[i];
                let (nn, q) = states[j];
                Complex64::from(spec.element_with(&lf, m, p, nn, q))
            });
            Block {
                offset: k,
                states,
                matrix,
            }
        })
        .collect()
}

/// Dense two-mode matrix of `A`.
pub fn build_a(spec: &AOperatorSpec) -> TwoModeOperator {
    let (d_out, d_in) = (spec.dim_out.get(), spec.dim_in.get());
    let total = d_out * d_in;
    let mut matrix = CMatrix::zeros(total, total);
    for block in blocks(spec) {
        for (i, &(m, p)) in block.states.iter().enumerate() {
            for (j, &(n, q)) in block.states.iter().enumerate() {
                matrix[(m * d_in + p, n * d_in + q)] = block.matrix[(i, j)];
            }
        }
    }
    TwoModeOperator::new(spec.dim_out, spec.dim_in, matrix)
        .expect("block assembly preserves the declared dimensions")
}

/// Largest eigenvalue of the truncated `A`, by power iteration on each block.
pub fn operator_norm_numeric(spec: &AOperatorSpec, tol: f64) -> Result<f64> {
    let tol = tol.min(INNER_TOL);
    let values: Result<Vec<f64>> = blocks(spec)
        .par_iter()
        .map(|b| dominant_eigenvalue(&b.matrix, tol).map(|e| e.value))
        .collect();
    Ok(values?.into_iter().fold(0.0, f64::max))
}

/// Dense power iteration on the whole two-mode matrix; reference path for small sizes.
pub fn operator_norm_dense(a: &TwoModeOperator, tol: f64) -> Result<f64> {
    dominant_eigenvalue(a.matrix(), tol).map(|e| e.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptiveNorm {
    pub value: f64,
    /// Per-mode truncation at which the value was accepted.
    pub dim: usize,
    /// The cap was reached before successive values agreed to `tol/2`.
    pub truncation_warning: bool,
    pub history: Vec<(usize, f64)>,
}

/// Operator norm with the truncation grown from 30 in steps of 10 until the
/// relative change drops below `tol/2`, capped at 120 levels per mode.
pub fn operator_norm_adaptive(g: f64, lambda: f64, x: f64, tol: f64) -> Result<AdaptiveNorm> {
    let mut dim = ADAPTIVE_START_DIM;
    let mut spec = AOperatorSpec::new(g, lambda, x, dim, dim)?;
    let mut value = operator_norm_numeric(&spec, INNER_TOL)?;
    let mut history = vec![(dim, value)];
    while dim < ADAPTIVE_MAX_DIM {
        dim += ADAPTIVE_STEP;
        spec = spec.with_dims(dim, dim)?;
        let next = operator_norm_numeric(&spec, INNER_TOL)?;
        history.push((dim, next));
        let change = (next - value).abs() / next.abs().max(f64::MIN_POSITIVE);
        value = next;
        if change < 0.5 * tol {
            return Ok(AdaptiveNorm {
                value,
                dim,
                truncation_warning: false,
                history,
            });
        }
    }
    Ok(AdaptiveNorm {
        value,
        dim,
        truncation_warning: true,
        history,
    })
}

/// `Tr[A^p]` of the truncated operator, summed over blocks.
pub fn trace_power_numeric(spec: &AOperatorSpec, p: u32) -> Result<f64> {
    blocks(spec)
        .iter()
        .map(|b| trace_power(&b.matrix, p))
        .sum()
}

/// Transpose on the input factor: `⟨m,p|A^{T₂}|n,q⟩ = ⟨m,q|A|n,p⟩`.
pub fn partial_transpose(a: &TwoModeOperator) -> TwoModeOperator {
    let (d_out, d_in) = (a.dim_out().get(), a.dim_in().get());
    let total = d_out * d_in;
    let matrix = CMatrix::from_fn(total, total, |row, col| {
        let (m, p) = (row / d_in, row % d_in);
        let (n, q) = (col / d_in, col % d_in);
        a.element(m, q, n, p)
    });
    TwoModeOperator::new(a.dim_out(), a.dim_in(), matrix)
        .expect("partial transpose keeps the dimensions")
}

/// Best product-vector value found by alternating ascent.
///
/// The value is attained by the returned pair, so it is always a lower bound on
/// the injective cross norm; it is exact only when the ascent reaches the global
/// maximum.
#[derive(Debug, Clone)]
pub struct CrossNormResult {
    pub value: f64,
    pub phi: FockVector,
    pub psi: FockVector,
    pub restarts_used: usize,
    /// Alternating sweeps summed over all restarts.
    pub sweeps: usize,
}

pub fn cross_norm_numeric(a: &TwoModeOperator, restarts: usize, tol: f64) -> Result<CrossNormResult> {
    cross_norm_numeric_seeded(a, restarts, tol, DEFAULT_CROSS_SEED)
}

pub fn cross_norm_numeric_seeded(
    a: &TwoModeOperator,
    restarts: usize,
    tol: f64,
    seed: u64,
) -> Result<CrossNormResult> {
    let restarts = restarts.max(1);
    let (d_out, d_in) = (a.dim_out().get(), a.dim_in().get());
    let entries = nonzero_entries(a);

    let runs: Vec<(f64, CVector, CVector, usize)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut psi = random_unit(d_in, &mut rng);
            let mut phi = CVector::zeros(d_out);
            let mut last = f64::NEG_INFINITY;
            let mut sweeps = 0;
            while sweeps < MAX_SWEEPS {
                sweeps += 1;
                phi = top_eigenvector(&contract_output(&entries, d_out, &psi)).1;
                let (value, next_psi) = top_eigenvector(&contract_input(&entries, d_in, &phi));
                psi = next_psi;
                if (value - last).abs() <= tol * value.abs() {
                    break;
                }
                last = value;
            }
            let value = product_expectation(&entries, &phi, &psi);
            (value, phi, psi, sweeps)
        })
        .collect();

    let sweeps = runs.iter().map(|r| r.3).sum();
    let (value, phi, psi, _) = runs
        .into_iter()
        .reduce(|best, run| if run.0 > best.0 { run } else { best })
        .expect("at least one restart");
    Ok(CrossNormResult {
        value,
        phi: FockVector::from_amplitudes(phi)?,
        psi: FockVector::from_amplitudes(psi)?,
        restarts_used: restarts,
        sweeps,
    })
}

/// `⟨φ|⟨ψ|A|φ⟩|ψ⟩`.
pub fn product_value(a: &TwoModeOperator, phi: &FockVector, psi: &FockVector) -> f64 {
    product_expectation(&nonzero_entries(a), phi.amplitudes(), psi.amplitudes())
}

type Entry = (usize, usize, usize, usize, Complex64);

fn nonzero_entries(a: &TwoModeOperator) -> Vec<Entry> {
    let d_in = a.dim_in().get();
    let m = a.matrix();
    let mut out = Vec::new();
    for col in 0..m.ncols() {
        for row in 0..m.nrows() {
            let v = m[(row, col)];
            if v != Complex64::new(0.0, 0.0) {
                out.push((row / d_in, row % d_in, col / d_in, col % d_in, v));
            }
        }
    }
    out
}

fn contract_output(entries: &[Entry], d_out: usize, psi: &CVector) -> CMatrix {
    let mut out = CMatrix::zeros(d_out, d_out);
    for &(m, p, n, q, v) in entries {
        out[(m, n)] += psi[p].conj() * v * psi[q];
    }
    out
}

fn contract_input(entries: &[Entry], d_in: usize, phi: &CVector) -> CMatrix {
    let mut out = CMatrix::zeros(d_in, d_in);
    for &(m, p, n, q, v) in entries {
        out[(p, q)] += phi[m].conj() * v * phi[n];
    }
    out
}

fn product_expectation(entries: &[Entry], phi: &CVector, psi: &CVector) -> f64 {
    entries
        .iter()
        .map(|&(m, p, n, q, v)| phi[m].conj() * psi[p].conj() * v * phi[n] * psi[q])
        .sum::<Complex64>()
        .re
}

fn top_eigenvector(h: &CMatrix) -> (f64, CVector) {
    let sym = (h + h.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(sym);
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    (value, eig.eigenvectors.column(idx).into_owned())
}

fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> CVector {
    let mut v = CVector::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    v.normalize_mut();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{norm_a_closed, trace_power_closed};
    use crate::fock::{coherent_state, hermitian_defect, hermitian_eigenvalues, tensor};
    use crate::quadrature::gauss_laguerre;

    fn spec(g: f64, lambda: f64, x: f64, d: usize) -> AOperatorSpec {
        AOperatorSpec::new(g, lambda, x, d, d).unwrap()
    }

    #[test]
    fn vacuum_element_and_selection_rule() {
        let s = spec(2.0, 3.0, 1.0 / 3.0, 4);
        assert!((s.element(0, 0, 0, 0) - 0.5625).abs() < 1e-15);
        assert_eq!(s.element(1, 0, 0, 0), 0.0);
        let a = build_a(&s);
        assert_eq!(a.element(1, 0, 0, 0), Complex64::new(0.0, 0.0));
    }

    /// Brute-force 2-D quadrature of the defining integral, using only coherent
    /// state amplitudes: polar angle by the trapezoid rule (exact for the
    /// trigonometric polynomials involved), radius by Gauss-Laguerre.
    fn element_by_quadrature(s: &AOperatorSpec, m: usize, p: usize, n: usize, q: usize) -> f64 {
        let d = FockDim::new(8).unwrap();
        let kappa = s.lambda + 1.0 - 1.0 / s.x;
        // Substitute u = |α|² and rescale by the total Gaussian exponent so the
        // radial integrand becomes polynomial.
        let total = s.lambda + 1.0 + s.g * s.g;
        let radial = gauss_laguerre(24);
        let n_theta = 32;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&t, &w) in radial.nodes.iter().zip(&radial.weights) {
            let u = t / total;
            for k in 0..n_theta {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
                let alpha = Complex64::from_polar(u.sqrt(), theta);
                let out = coherent_state(alpha * s.g, d);
                let inp = coherent_state(alpha.conj() / s.x.sqrt(), d);
                let integrand = out.amplitudes()[m]
                    * out.amplitudes()[n].conj()
                    * inp.amplitudes()[p]
                    * inp.amplitudes()[q].conj();
                // Undo the weight e^{-t}: the integrand already carries e^{-(g²+1/x)u}.
                let prior = (-kappa * u).exp();
                acc += integrand * prior * t.exp() * w / n_theta as f64;
            }
        }
        // d²α/π = du dθ/(2π); du = dt/total.
        (acc / total).re * s.lambda / (1.0 - s.x)
    }

    #[test]
    fn entries_match_defining_integral() {
        for &(g, lambda, x) in &[(2.0, 3.0, 1.0 / 3.0), (1.5, 1.0, 0.6)] {
            let s = spec(g, lambda, x, 6);
            for m in 0..6 {
                for p in 0..6 {
                    for n in 0..6 {
                        for q in 0..6 {
                            let formula = s.element(m, p, n, q);
                            let brute = element_by_quadrature(&s, m, p, n, q);
                            assert!(
                                (formula - brute).abs() < 1e-10 * formula.abs().max(1e-3),
                                "⟨{m},{p}|A|{n},{q}⟩: {formula} vs {brute}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hermitian_psd_and_block_diagonal() {
        let s = spec(2.0, 3.0, 1.0 / 3.0, 12);
        let a = build_a(&s);
        assert!(hermitian_defect(a.matrix()) < 1e-12);
        assert!(hermitian_eigenvalues(a.matrix())[0] > -1e-10);
        let d = 12;
        let mut off_block = 0.0;
        for m in 0..d {
            for p in 0..d {
                for n in 0..d {
                    for q in 0..d {
                        if m as isize - p as isize != n as isize - q as isize {
                            off_block += a.element(m, p, n, q).norm_sqr();
                        }
                    }
                }
            }
        }
        assert!(off_block < 1e-14);
    }

    #[test]
    fn block_path_agrees_with_dense_path() {
        for &(g, lambda, x) in &[(2.0, 3.0, 1.0 / 3.0), (2.0, 1.0, 0.5), (1.3, 0.4, 0.9)] {
            let s = spec(g, lambda, x, 8);
            let blockwise = operator_norm_numeric(&s, 1e-13).unwrap();
            let dense_eig = *hermitian_eigenvalues(build_a(&s).matrix()).as_slice().last().unwrap();
            assert!((blockwise - dense_eig).abs() < 1e-9, "{blockwise} vs {dense_eig}");
            for p in 1..=3 {
                let tb = trace_power_numeric(&s, p).unwrap();
                let td = trace_power(build_a(&s).matrix(), p).unwrap();
                assert!((tb - td).abs() < 1e-10 * td.abs().max(1.0));
            }
        }
    }

    #[test]
    fn dense_power_iteration_on_small_truncation() {
        let s = spec(2.0, 3.0, 1.0 / 3.0, 6);
        let dense = operator_norm_dense(&build_a(&s), 1e-13).unwrap();
        let blockwise = operator_norm_numeric(&s, 1e-13).unwrap();
        assert!((dense - blockwise).abs() < 1e-9);
    }

    #[test]
    fn norm_examples() {
        let v = operator_norm_numeric(&spec(2.0, 3.0, 1.0 / 3.0, 40), 1e-12).unwrap();
        assert!((v - 0.75).abs() < 1e-3);
        let v = operator_norm_numeric(&spec(2.0, 1.0, 0.5, 40), 1e-12).unwrap();
        assert!((v - 0.5).abs() < 1e-3);
    }

    #[test]
    fn norm_grows_with_truncation() {
        // Away from the optimal x the top eigenvector is not a finite combination
        // of Fock states, so truncation visibly lowers the norm.
        for &(g, lambda, x) in &[(2.0, 3.0, 1.0 / 3.0), (2.0, 3.0, 0.25), (2.0, 3.0, 0.6)] {
            let mut last = 0.0;
            for d in [5, 10, 20, 30, 40] {
                let v = operator_norm_numeric(&spec(g, lambda, x, d), 1e-13).unwrap();
                assert!(v >= last - 1e-12, "x={x} d={d}: {v} < {last}");
                last = v;
            }
            let small = operator_norm_numeric(&spec(g, lambda, x, 5), 1e-13).unwrap();
            assert!(small < last);
            assert!(last <= norm_a_closed(g, lambda, x).unwrap() + 1e-12);
        }
        // Also monotone in each mode separately.
        let base = AOperatorSpec::new(2.0, 3.0, 0.25, 10, 10).unwrap();
        let v0 = operator_norm_numeric(&base, 1e-13).unwrap();
        let v1 = operator_norm_numeric(&base.with_dims(20, 10).unwrap(), 1e-13).unwrap();
        let v2 = operator_norm_numeric(&base.with_dims(10, 20).unwrap(), 1e-13).unwrap();
        assert!(v1 >= v0 - 1e-12 && v2 >= v0 - 1e-12);
    }

    #[test]
    fn trace_power_examples() {
        let s = spec(2.0, 3.0, 1.0 / 3.0, 80);
        let t1 = trace_power_numeric(&s, 1).unwrap();
        assert!((t1 - 4.5).abs() < 1e-6);
        let t2 = trace_power_numeric(&s, 2).unwrap();
        assert!((t2 - trace_power_closed(2, 2.0, 3.0, 1.0 / 3.0).unwrap()).abs() < 1e-6);
        let small = spec(2.0, 3.0, 1.0 / 3.0, 10);
        let a = build_a(&small);
        let frob: f64 = a.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert!((trace_power_numeric(&small, 2).unwrap() - frob).abs() < 1e-12 * frob);
    }

    #[test]
    fn partial_transpose_properties() {
        let x = CMatrix::from_fn(2, 2, |i, j| Complex64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let y = CMatrix::from_fn(3, 3, |i, j| Complex64::new((3 * i + j) as f64, (i * j) as f64));
        let t = tensor(&x, &y).unwrap();
        let expected = tensor(&x, &y.transpose()).unwrap();
        assert_eq!(partial_transpose(&t).matrix(), expected.matrix());
        assert_eq!(partial_transpose(&partial_transpose(&t)).matrix(), t.matrix());
    }

    #[test]
    fn cross_norm_of_product_operator() {
        let d = |v: &[f64]| {
            CMatrix::from_diagonal(&CVector::from_iterator(
                v.len(),
                v.iter().map(|&x| Complex64::from(x)),
            ))
        };
        let a = tensor(&d(&[1.0, 2.0]), &d(&[1.0, 3.0])).unwrap();
        let r = cross_norm_numeric(&a, 5, 1e-12).unwrap();
        assert!((r.value - 6.0).abs() < 1e-10);
        assert!(r.phi.amplitudes()[1].norm() > 1.0 - 1e-8);
        assert!(r.psi.amplitudes()[1].norm() > 1.0 - 1e-8);
    }

    #[test]
    fn cross_norm_value_is_attained_and_bounded() {
        let s = spec(2.0, 3.0, 1.0 / 3.0, 12);
        let a = build_a(&s);
        let r = cross_norm_numeric(&a, 6, 1e-12).unwrap();
        assert!((product_value(&a, &r.phi, &r.psi) - r.value).abs() < 1e-10);
        assert!(r.value <= operator_norm_numeric(&s, 1e-13).unwrap() + 1e-10);
        assert_eq!(r.restarts_used, 6);
    }

    #[test]
    fn cross_norm_is_reproducible() {
        let a = build_a(&spec(2.0, 3.0, 0.25, 8));
        let r1 = cross_norm_numeric_seeded(&a, 4, 1e-12, 7).unwrap();
        let r2 = cross_norm_numeric_seeded(&a, 4, 1e-12, 7).unwrap();
        assert_eq!(r1.value, r2.value);
    }

    #[test]
    fn adaptive_norm_reaches_closed_form() {
        let n = operator_norm_adaptive(2.0, 3.0, 1.0 / 3.0, 1e-3).unwrap();
        assert!(!n.truncation_warning);
        assert!((n.value - 0.75).abs() / 0.75 < 1e-3);
        assert_eq!(n.history.first().unwrap().0, ADAPTIVE_START_DIM);
    }

    #[test]
    fn transposed_operator_peaks_on_vacuum() {
        // At x = 1/(λ+1) the largest eigenvalue of A^{T₂} is its vacuum entry.
        let s = spec(2.0, 3.0, 0.25, 14);
        let at = partial_transpose(&build_a(&s));
        let top = hermitian_eigenvalues(at.matrix()).max();
        let vac = at.element(0, 0, 0, 0).re;
        assert!((vac - 0.5).abs() < 1e-14);
        assert!((top - vac).abs() < 2e-3, "{top} vs {vac}");
        let r = cross_norm_numeric(&at, 4, 1e-10).unwrap();
        assert!((r.value - top).abs() < 2e-3);
    }
}
