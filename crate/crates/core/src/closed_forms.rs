//! Closed-form fidelities, operator norms and circulant determinants.
//!
//! `g` is the amplitude gain, `lambda` the inverse variance of the Gaussian
//! prior. Branch points use `<=` on the left branch: `λ = g-1` belongs to the
//! squeezing branch and `λ = g²-1` to the `(λ+1)/g²` branch.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Offset used when the optimal thermal parameter would be exactly 1.
pub const SIGMA_X_CLAMP: f64 = 1e-9;

/// Scenario parameters shared by the formulas and the simulators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplifierParams {
    pub g: f64,
    pub lambda: f64,
    pub r: Option<f64>,
    pub x: Option<f64>,
    pub n_cut: Option<usize>,
}

impl AmplifierParams {
    pub fn new(g: f64, lambda: f64) -> Result<Self> {
        check_gain_positive(g)?;
        check_lambda(lambda)?;
        Ok(Self {
            g,
            lambda,
            r: None,
            x: None,
            n_cut: None,
        })
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        check_r(r)?;
        self.r = Some(r);
        Ok(self)
    }

    pub fn with_x(mut self, x: f64) -> Self {
        self.x = Some(x);
        self
    }

    pub fn with_cutoff(mut self, n: usize) -> Self {
        self.n_cut = Some(n);
        self
    }
}

/// Gain and loss of the quantum amplifier that, followed by pure loss, reproduces
/// the optimal measure-and-prepare channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalLimitParams {
    pub g_prime: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeOptimum {
    pub fidelity: f64,
    pub r_opt: f64,
}

/// Thermal parameter of the reference state that makes the norm bound tight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalSigma {
    pub x: f64,
    /// The formula gave `x = 1` (only at `λ = 0`) and the value was moved to `1 - SIGMA_X_CLAMP`.
    pub clamped: bool,
}

/// Fidelity of the two-mode squeezer with parameter `r`:
/// `λ / (λ cosh²r + (g - cosh r)²)`.
pub fn f_squeeze_r(g: f64, lambda: f64, r: f64) -> Result<f64> {
    check_gain_positive(g)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(
            "lambda",
            lambda,
            "squeezer fidelity needs lambda > 0 (lambda = 0 exists only as a limit)",
        ));
    }
    check_r(r)?;
    let c = r.cosh();
    Ok(lambda / (lambda * c * c + (g - c).powi(2)))
}

/// Best deterministic fidelity and the squeezing that attains it.
pub fn f_squeeze_opt(g: f64, lambda: f64) -> Result<SqueezeOptimum> {
    check_gain_amplifying(g)?;
    check_lambda(lambda)?;
    if lambda <= g - 1.0 {
        Ok(SqueezeOptimum {
            fidelity: (lambda + 1.0) / (g * g),
            r_opt: (g / (lambda + 1.0)).acosh(),
        })
    } else {
        Ok(SqueezeOptimum {
            fidelity: lambda / (lambda + (g - 1.0).powi(2)),
            r_opt: 0.0,
        })
    }
}

/// Best probabilistic (heralded) fidelity.
pub fn f_prob(g: f64, lambda: f64) -> Result<f64> {
    check_gain_amplifying(g)?;
    check_lambda(lambda)?;
    if lambda <= g * g - 1.0 {
        Ok((lambda + 1.0) / (g * g))
    } else {
        Ok(1.0)
    }
}

/// Classical fidelity threshold `(1+λ)/(1+λ+g²)`.
pub fn cft(g: f64, lambda: f64) -> Result<f64> {
    check_gain_positive(g)?;
    check_lambda(lambda)?;
    Ok((1.0 + lambda) / (1.0 + lambda + g * g))
}

/// Operator norm of the performance operator for the thermal reference `σ_x`.
///
/// Valid for `1/(λ+1) <= x < 1`.
pub fn norm_a_closed(g: f64, lambda: f64, x: f64) -> Result<f64> {
    check_gain_positive(g)?;
    check_lambda(lambda)?;
    check_x_open_unit(x)?;
    if x < 1.0 / (lambda + 1.0) {
        return Err(domain(
            "x",
            x,
            "closed-form norm requires x >= 1/(lambda+1)",
        ));
    }
    let a = lambda + g * g + 1.0;
    let disc = (a * a - 4.0 * g * g / x).max(0.0);
    Ok(2.0 * lambda / ((1.0 - x) * (a + disc.sqrt())))
}

pub fn optimal_sigma_x(g: f64, lambda: f64) -> Result<OptimalSigma> {
    check_gain_amplifying(g)?;
    check_lambda(lambda)?;
    let x = if lambda > g - 1.0 {
        g / (lambda + g + (g - 1.0).powi(2))
    } else {
        1.0 / (lambda + 1.0)
    };
    if x >= 1.0 {
        Ok(OptimalSigma {
            x: 1.0 - SIGMA_X_CLAMP,
            clamped: true,
        })
    } else {
        Ok(OptimalSigma { x, clamped: false })
    }
}

/// `det Γ_p` as the product of the circulant eigenvalues `a - b ωⁿ - c ω⁻ⁿ`,
/// `a = λ+1+g²`, `b = g²`, `c = 1/x`, `ω = e^{2πi/p}`.
pub fn det_gamma(p: u32, g: f64, lambda: f64, x: f64) -> Result<f64> {
    if p == 0 {
        return Err(domain("p", 0.0, "circulant size must be at least 1"));
    }
    check_gain_positive(g)?;
    check_lambda(lambda)?;
    check_x_open_unit(x)?;
    let a = lambda + 1.0 + g * g;
    let b = g * g;
    let c = 1.0 / x;
    let pf = f64::from(p);
    let det = (0..p).fold(Complex64::new(1.0, 0.0), |acc, n| {
        let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f64::from(n) / pf);
        acc * (a - b * omega - c * omega.conj())
    });
    // Conjugate eigenvalue pairs cancel the imaginary part up to rounding.
    debug_assert!(det.im.abs() <= 1e-10 * det.norm().max(1.0));
    Ok(det.re)
}

/// `Tr[A^p] = λ^p / ((1-x)^p det Γ_p)`.
pub fn trace_power_closed(p: u32, g: f64, lambda: f64, x: f64) -> Result<f64> {
    let det = det_gamma(p, g, lambda, x)?;
    if lambda + 1.0 <= 1.0 / x {
        return Err(Error::DivergentIntegral(
            "lambda + 1 must exceed 1/x for the trace to be finite",
        ));
    }
    if det <= 0.0 {
        return Err(Error::DivergentIntegral("det Gamma_p is not positive"));
    }
    let pi = p as i32;
    Ok(lambda.powi(pi) / ((1.0 - x).powi(pi) * det))
}

/// Filter ratio for the heralded amplifier in the non-squeezing regime.
pub fn filter_x(g: f64, lambda: f64) -> Result<f64> {
    check_gain_amplifying(g)?;
    check_lambda(lambda)?;
    if lambda <= g - 1.0 {
        return Err(domain(
            "lambda",
            lambda,
            "lambda <= g-1 is the squeezer regime; no filter is needed",
        ));
    }
    if lambda <= g * g - 1.0 {
        Ok((lambda + 1.0) / g)
    } else {
        Ok(g)
    }
}

pub fn classical_limit_params(g: f64, lambda: f64) -> Result<ClassicalLimitParams> {
    check_gain_amplifying(g)?;
    check_lambda(lambda)?;
    if lambda > g - 1.0 {
        return Err(domain(
            "lambda",
            lambda,
            "the attenuated-amplifier relation holds only for lambda <= g-1",
        ));
    }
    let g_prime = (g * g + (lambda + 1.0).powi(2)).sqrt();
    Ok(ClassicalLimitParams {
        g_prime,
        eta: g / g_prime,
    })
}

fn check_gain_positive(g: f64) -> Result<()> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(domain("g", g, "gain must be positive"));
    }
    Ok(())
}

fn check_gain_amplifying(g: f64) -> Result<()> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(domain("g", g, "gain must be at least 1"));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(domain("lambda", lambda, "lambda must be non-negative"));
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(domain("r", r, "squeezing parameter must be non-negative"));
    }
    Ok(())
}

fn check_x_open_unit(x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(domain("x", x, "thermal parameter must lie in (0, 1)"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL * b.abs().max(1.0)
    }

    #[test]
    fn squeezer_fidelity_examples() {
        assert!(close(f_squeeze_r(2.0, 3.0, 0.0).unwrap(), 0.75));
        assert!(close(f_squeeze_r(2.0, 3.0, 2f64.acosh()).unwrap(), 0.25));
        assert!(close(f_squeeze_r(1.0, 5.0, 0.0).unwrap(), 1.0));
        assert!(f_squeeze_r(2.0, 0.0, 0.5).is_err());
        assert!(f_squeeze_r(2.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn optimal_squeezer_examples() {
        let o = f_squeeze_opt(2.0, 0.0).unwrap();
        assert!(close(o.fidelity, 0.25));
        assert!((o.r_opt - 1.316_957_896_924_816_6).abs() < 1e-12);
        let o = f_squeeze_opt(2.0, 3.0).unwrap();
        assert!(close(o.fidelity, 0.75));
        assert_eq!(o.r_opt, 0.0);
        // At λ = g-1 both branches give 1/2.
        let o = f_squeeze_opt(2.0, 1.0).unwrap();
        assert!(close(o.fidelity, 0.5));
        assert!(close(1.0 / (1.0 + 1.0), 0.5));
        assert!(o.r_opt.abs() < 1e-12);
        assert!(f_squeeze_opt(0.5, 1.0).is_err());
    }

    #[test]
    fn probabilistic_examples() {
        assert!(close(f_prob(2.0, 0.0).unwrap(), 0.25));
        assert!(close(f_prob(2.0, 2.0).unwrap(), 0.75));
        assert_eq!(f_prob(2.0, 5.0).unwrap(), 1.0);
        assert_eq!(f_prob(2.0, 3.0).unwrap(), 1.0);
        assert!(f_prob(0.9, 1.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert!(close(cft(2.0, 3.0).unwrap(), 0.5));
        assert!(close(cft(1.0, 0.0).unwrap(), 0.5));
        assert!(close(cft(2.0, 0.0).unwrap(), 0.2));
    }

    #[test]
    fn norm_examples() {
        assert!(close(norm_a_closed(2.0, 3.0, 1.0 / 3.0).unwrap(), 0.75));
        assert!(close(norm_a_closed(2.0, 1.0, 0.5).unwrap(), 0.5));
        match norm_a_closed(2.0, 3.0, 0.2) {
            Err(Error::Domain { name, .. }) => assert_eq!(name, "x"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn optimal_sigma_examples() {
        let s = optimal_sigma_x(2.0, 3.0).unwrap();
        assert!(close(s.x, 1.0 / 3.0) && !s.clamped);
        assert!(close(optimal_sigma_x(2.0, 1.0).unwrap().x, 0.5));
        // λ = g-1 boundary: both expressions agree.
        assert!(close(2.0 / (1.0 + 2.0 + 1.0), 0.5));
        let s = optimal_sigma_x(3.0, 0.0).unwrap();
        assert!(s.clamped);
        assert_eq!(s.x, 1.0 - SIGMA_X_CLAMP);
    }

    #[test]
    fn circulant_determinant_examples() {
        let third = 1.0 / 3.0;
        assert!(close(det_gamma(1, 2.0, 3.0, third).unwrap(), 1.0));
        assert!(close(det_gamma(2, 2.0, 3.0, third).unwrap(), 15.0));
        assert!(det_gamma(2, 1.0, 1.0, 0.5).unwrap().abs() < 1e-12);
    }

    /// Determinant of the explicit circulant `Γ_p` by Gaussian elimination.
    fn det_dense(p: usize, g: f64, lambda: f64, x: f64) -> f64 {
        let a = lambda + 1.0 + g * g;
        let mut m = vec![vec![0.0; p]; p];
        for j in 0..p {
            m[j][j] += a;
            m[j][(j + 1) % p] -= g * g;
            m[(j + 1) % p][j] -= 1.0 / x;
        }
        let mut det = 1.0;
        for col in 0..p {
            let piv = (col..p)
                .max_by(|&i, &k| m[i][col].abs().total_cmp(&m[k][col].abs()))
                .unwrap();
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            det *= m[col][col];
            for row in col + 1..p {
                let f = m[row][col] / m[col][col];
                for k in col..p {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
        det
    }

    #[test]
    fn circulant_product_matches_dense_determinant() {
        for p in 1..=8 {
            for &(g, lambda, x) in &[(2.0, 3.0, 1.0 / 3.0), (1.5, 0.7, 0.8), (3.0, 2.0, 0.5)] {
                let fast = det_gamma(p as u32, g, lambda, x).unwrap();
                let dense = det_dense(p, g, lambda, x);
                assert!(
                    (fast - dense).abs() <= 1e-10 * dense.abs().max(1.0),
                    "p={p}: {fast} vs {dense}"
                );
            }
        }
    }

    #[test]
    fn trace_power_examples() {
        let third = 1.0 / 3.0;
        let t1 = trace_power_closed(1, 2.0, 3.0, third).unwrap();
        assert!(close(t1, 4.5));
        // Direct one-dimensional Gaussian integral λ / ((1-x)(λ+1-1/x)).
        assert!(close(t1, 3.0 / ((2.0 / 3.0) * (4.0 - 3.0))));
        assert!(close(trace_power_closed(2, 2.0, 3.0, third).unwrap(), 1.35));
        assert!(matches!(
            trace_power_closed(1, 2.0, 1.0, third),
            Err(Error::DivergentIntegral(_))
        ));
    }

    #[test]
    fn filter_examples() {
        assert!(close(filter_x(2.0, 2.0).unwrap(), 1.5));
        assert!(close(filter_x(2.0, 5.0).unwrap(), 2.0));
        assert!(filter_x(2.0, 0.5).is_err());
    }

    #[test]
    fn classical_limit_examples() {
        let c = classical_limit_params(2.0, 1.0).unwrap();
        assert!(close(c.g_prime, 8f64.sqrt()));
        assert!((c.eta - 0.707_11).abs() < 1e-5);
        let c = classical_limit_params(2.0, 0.0).unwrap();
        assert!((c.g_prime - 2.236_07).abs() < 1e-5);
        assert!((c.eta - 0.894_43).abs() < 1e-5);
        let c = classical_limit_params(10.0, 0.0).unwrap();
        assert!((c.eta - 0.995_04).abs() < 1e-5);
        assert!(classical_limit_params(2.0, 1.5).is_err());
    }

    /// Golden-section maximization used as an oracle for the optimal squeezing.
    fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        while (b - a).abs() > 1e-12 {
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - inv_phi * (b - a);
            d = a + inv_phi * (b - a);
        }
        f(0.5 * (a + b))
    }

    #[test]
    fn optimum_matches_golden_section() {
        for &g in &[1.0, 1.3, 2.0, 3.5, 6.0] {
            for &lambda in &[0.05, 0.5, 1.0, 2.0, 4.0, 9.0] {
                let best = golden_max(|r| f_squeeze_r(g, lambda, r).unwrap(), 0.0, 5.0);
                let opt = f_squeeze_opt(g, lambda).unwrap().fidelity;
                assert!((best - opt).abs() < 1e-8, "g={g} λ={lambda}: {best} vs {opt}");
            }
        }
    }

    #[test]
    fn norm_at_optimal_sigma_matches_squeezer() {
        for &g in &[1.0, 1.5, 2.0, 3.0, 5.0] {
            for &lambda in &[0.1, 0.5, 1.0, 2.0, 3.0, 7.0] {
                let s = optimal_sigma_x(g, lambda).unwrap();
                let n = norm_a_closed(g, lambda, s.x).unwrap();
                let f = f_squeeze_opt(g, lambda).unwrap().fidelity;
                assert!((n - f).abs() < 1e-12, "g={g} λ={lambda}: {n} vs {f}");
            }
        }
    }

    #[test]
    fn norm_at_average_state_matches_probabilistic_bound() {
        for &g in &[1.0, 1.5, 2.0, 3.0] {
            for &lambda in &[0.1, 1.0, 3.0, 8.0, 20.0] {
                let x = 1.0 / (lambda + 1.0);
                let n = norm_a_closed(g, lambda, x).unwrap();
                let a = lambda + g * g + 1.0;
                let rhs = 2.0 * (lambda + 1.0) / (a + (lambda + 1.0 - g * g).abs());
                assert!((n - rhs).abs() < 1e-12);
                assert!((n - f_prob(g, lambda).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn continuity_at_branch_points() {
        for g in [1.2_f64, 2.0, 4.0] {
            let lo = g - 1.0;
            let left = (lo + 1.0) / (g * g);
            let right = lo / (lo + (g - 1.0) * (g - 1.0));
            assert!((left - right).abs() < 1e-12);
            let hi = g * g - 1.0;
            assert!(((hi + 1.0) / (g * g) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelities_are_ordered_and_in_unit_interval() {
        for i in 0..25 {
            let g = 1.0 + 0.4 * i as f64;
            for j in 0..25 {
                let lambda = 0.3 * j as f64;
                let p = f_prob(g, lambda).unwrap();
                let d = f_squeeze_opt(g, lambda).unwrap().fidelity;
                let c = cft(g, lambda).unwrap();
                assert!(p >= d - 1e-15 && d >= c - 1e-15, "g={g} λ={lambda}");
                for v in [p, d, c] {
                    assert!(v > 0.0 && v <= 1.0);
                }
            }
        }
    }
}
