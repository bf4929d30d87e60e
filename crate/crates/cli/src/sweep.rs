use ampbench::closed_forms::{cft, f_prob, f_squeeze_opt};
use clap::ValueEnum;
use rayon::prelude::*;

use crate::output::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    FDet,
    FProb,
    Cft,
    /// `f_prob - cft`.
    NormGap,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::FDet, Quantity::FProb, Quantity::Cft, Quantity::NormGap];

    fn name(self) -> &'static str {
        match self {
            Quantity::FDet => "f_det",
            Quantity::FProb => "f_prob",
            Quantity::Cft => "cft",
            Quantity::NormGap => "norm_gap",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub g_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub quantities: Vec<Quantity>,
}

impl SweepConfig {
    pub fn new(g_values: Vec<f64>, lambda_values: Vec<f64>, quantities: Vec<Quantity>) -> Result<Self, String> {
        if g_values.is_empty() || lambda_values.is_empty() || quantities.is_empty() {
            return Err("sweep needs at least one g, one lambda and one quantity".into());
        }
        if let Some(g) = g_values.iter().find(|g| !(**g >= 1.0) || !g.is_finite()) {
            return Err(format!("sweep gains must satisfy g >= 1, got {g}"));
        }
        if let Some(l) = lambda_values.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(format!("sweep prior widths must satisfy lambda >= 0, got {l}"));
        }
        Ok(Self {
            g_values,
            lambda_values,
            quantities,
        })
    }
}

/// Rows in grid order: g outer, lambda inner, quantities in the requested order.
pub fn run_sweep(config: &SweepConfig) -> ampbench::Result<Vec<Record>> {
    let points: Vec<(f64, f64)> = config
        .g_values
        .iter()
        .flat_map(|&g| config.lambda_values.iter().map(move |&l| (g, l)))
        .collect();
    let blocks: ampbench::Result<Vec<Vec<Record>>> = points
        .par_iter()
        .map(|&(g, lambda)| {
            config
                .quantities
                .iter()
                .map(|&q| {
                    let (value, meta) = evaluate(q, g, lambda)?;
                    Ok(Record::new()
                        .num("g", g)
                        .num("lambda", lambda)
                        .text("quantity", q.name())
                        .num("value", value)
                        .text("meta", meta))
                })
                .collect()
        })
        .collect();
    Ok(blocks?.into_iter().flatten().collect())
}

fn evaluate(q: Quantity, g: f64, lambda: f64) -> ampbench::Result<(f64, String)> {
    Ok(match q {
        Quantity::FDet => {
            let o = f_squeeze_opt(g, lambda)?;
            (o.fidelity, format!("r_opt={}", crate::output::round12(o.r_opt)))
        }
        Quantity::FProb => (f_prob(g, lambda)?, String::new()),
        Quantity::Cft => (cft(g, lambda)?, String::new()),
        Quantity::NormGap => (f_prob(g, lambda)? - cft(g, lambda)?, String::new()),
    })
}
