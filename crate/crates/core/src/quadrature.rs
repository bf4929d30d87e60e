//! Gauss–Laguerre and Gauss–Hermite rules.
//!
//! Nodes come from Newton iteration on the three-term recurrences, seeded with
//! the usual asymptotic guesses, which holds full double precision for the
//! orders used here (up to a few hundred points).

const EPS: f64 = 1e-16;
const MAX_NEWTON: usize = 100;

/// A quadrature rule `∫ w(x) f(x) dx ≈ Σ wᵢ f(xᵢ)`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Rule for `∫₀^∞ e^{-x} f(x) dx`.
pub fn gauss_laguerre(n: usize) -> Rule {
    assert!(n >= 1, "quadrature order must be positive");
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        let mut last_step = f64::INFINITY;
        for _ in 0..MAX_NEWTON {
            // Recurrence scaled by e^{-z/2}; L_n grows like e^{z/2} near the largest nodes.
            let mut p1 = (-0.5 * z).exp();
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
            }
            let step = p1 / (nf * (p1 - p2) / z);
            // Rounding limits the attainable accuracy near the smallest nodes.
            if step.abs() >= last_step {
                break;
            }
            z -= step;
            last_step = step.abs();
            if last_step <= EPS * z.abs() {
                break;
            }
        }
        // Christoffel weight 1/Σ_{k<n} L_k(z)²; a sum of squares, so small
        // node errors do not cancel.
        let s = (-0.5 * z).exp();
        let mut p1 = s;
        let mut p2 = 0.0;
        let mut acc = s * s;
        for j in 1..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
            acc += p1 * p1;
        }
        nodes[i] = z;
        weights[i] = (-z).exp() / acc;
    }
    Rule { nodes, weights }
}

/// Rule for `∫_{-∞}^{∞} e^{-x²} f(x) dx`.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1, "quadrature order must be positive");
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    let mut z = 0.0_f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..MAX_NEWTON {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= EPS * z.abs().max(1.0) {
                break;
            }
        }
        // Odd orders have an exact zero node; clean up Newton residue.
        if n % 2 == 1 && i == half - 1 {
            z = 0.0;
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    Rule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    #[test]
    fn laguerre_is_exact_on_polynomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let rule = gauss_laguerre(n);
            for k in 0..(2 * n as u32).min(30) {
                let q = rule.integrate(|x| x.powi(k as i32));
                let exact = factorial(k);
                assert!(
                    (q - exact).abs() <= 1e-12 * exact,
                    "n={n} k={k}: {q} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn laguerre_high_order_weights() {
        for n in [128usize, 256] {
            let rule = gauss_laguerre(n);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-13, "n={n}: {total}");
            assert!(rule.weights.iter().all(|w| w.is_finite() && *w >= 0.0));
            let q = rule.integrate(|x| (-3.0 * x).exp());
            assert!((q - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_moments() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        for n in [1usize, 2, 3, 8, 48, 101] {
            let rule = gauss_hermite(n);
            let m0 = rule.integrate(|_| 1.0);
            assert!((m0 - sqrt_pi).abs() < 1e-13, "n={n}");
            if n >= 2 {
                let m2 = rule.integrate(|x| x * x);
                assert!((m2 - sqrt_pi / 2.0).abs() < 1e-13);
                let m1 = rule.integrate(|x| x);
                assert!(m1.abs() < 1e-13);
            }
            if n >= 5 {
                let m8 = rule.integrate(|x| x.powi(8));
                assert!((m8 - 105.0 / 16.0 * sqrt_pi).abs() < 1e-11);
            }
        }
    }
}
