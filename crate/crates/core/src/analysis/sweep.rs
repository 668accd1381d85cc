//! Parameter sweeps. Runs are independent and dispatched to the rayon pool;
//! rows always come back in parameter order.

use rayon::prelude::*;
use serde::Serialize;

use super::coupling::{
    coupled_mode_frequency_closed_form, coupling_grid, effective_two_state_hamiltonian,
    numerical_oscillation_frequency, oscillation_run_time,
};
use super::{run_metrics, FidelityConvention, MetricsReport};
use crate::error::{Error, Result};
use crate::guides::SlopeLaw;
use crate::presets::{self, Numerics};
use crate::propagator::SplitStepPropagator;

/// One parameter point and its outcome. A failed run does not stop the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow<R> {
    pub key: Vec<f64>,
    pub outcome: Result<R>,
}

#[derive(Debug, Clone)]
pub struct SweepTable<R> {
    /// Names of the entries of each row key.
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow<R>>,
}

impl<R: Send> SweepTable<R> {
    fn run<F>(columns: &[&str], keys: Vec<Vec<f64>>, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<R> + Sync,
    {
        let rows = keys
            .into_par_iter()
            .map(|key| {
                let outcome = f(&key);
                SweepRow { key, outcome }
            })
            .collect();
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }
}

impl<R> SweepTable<R> {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// Rows whose first key equals `value`.
    pub fn slice(&self, value: f64) -> impl Iterator<Item = &SweepRow<R>> {
        self.rows.iter().filter(move |r| r.key[0] == value)
    }
}

fn strictly_increasing(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} list is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} values must be finite"
        )));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{name} values must be strictly increasing"
        )));
    }
    Ok(())
}

/// `n` points from `10^lo` to `10^hi`, evenly spaced in the exponent.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linear_space(lo, hi, n)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

pub fn linear_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// True when no value exceeds its predecessor by more than `slack`.
pub fn is_non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Corner fidelity over `r × θ`; keys are `[r, theta]`, `r` outermost.
pub fn sweep_corner(
    num: &Numerics,
    r_values: &[f64],
    theta_values: &[f64],
    t_f: f64,
    slope: SlopeLaw,
    convention: FidelityConvention,
) -> Result<SweepTable<MetricsReport>> {
    strictly_increasing("theta", theta_values)?;
    let keys = r_values
        .iter()
        .flat_map(|&r| theta_values.iter().map(move |&th| vec![r, th]))
        .collect();
    Ok(SweepTable::run(&["r", "theta"], keys, |k| {
        run_metrics(&presets::corner(num, k[0], k[1], t_f, slope)?, convention)
    }))
}

/// X-junction R, T over `θ` with `t_f = x_l / tan(θ/2)`.
pub fn sweep_xjunction(
    num: &Numerics,
    theta_values: &[f64],
    x_l: f64,
    convention: FidelityConvention,
) -> Result<SweepTable<MetricsReport>> {
    strictly_increasing("theta", theta_values)?;
    let keys = theta_values.iter().map(|&t| vec![t]).collect();
    Ok(SweepTable::run(&["theta"], keys, |k| {
        run_metrics(&presets::xjunction(num, k[0], x_l)?, convention)
    }))
}

/// Exit fractions of the two-arm superposition over the relative phase α.
pub fn sweep_interference(
    num: &Numerics,
    alphas: &[f64],
    theta: f64,
    x_l: f64,
) -> Result<SweepTable<MetricsReport>> {
    strictly_increasing("alpha", alphas)?;
    let keys = alphas.iter().map(|&a| vec![a]).collect();
    Ok(SweepTable::run(&["alpha"], keys, |k| {
        run_metrics(
            &presets::xjunction_superposition(num, theta, x_l, k[0])?,
            FidelityConvention::default(),
        )
    }))
}

/// Three estimates of the coupling frequency at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingRow {
    pub closed_form: f64,
    pub two_state_gap: f64,
    pub numerical: f64,
    pub run_time: f64,
}

/// Closed form, Gram-Schmidt gap and the frequency extracted from a full run
/// lasting `periods` closed-form periods.
pub fn sweep_coupling(
    num: &Numerics,
    d_values: &[f64],
    periods: f64,
) -> Result<SweepTable<CouplingRow>> {
    strictly_increasing("d", d_values)?;
    if !(periods >= 2.0 && periods.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need at least two oscillation periods, got {periods}"
        )));
    }
    let keys = d_values.iter().map(|&d| vec![d]).collect();
    Ok(SweepTable::run(&["d"], keys, |k| {
        let d = k[0];
        let closed_form = coupled_mode_frequency_closed_form(d)?;
        let two_state_gap =
            effective_two_state_hamiltonian(d, &num.constants, coupling_grid())?.gap;
        let run_time = oscillation_run_time(closed_form, periods);
        let scn = presets::coupled_pair(num, d, run_time)?;
        let (psi0, _) = scn.initial_state()?;
        let record = SplitStepPropagator::new(&scn)?.evolve(&psi0, &scn)?;
        Ok(CouplingRow {
            closed_form,
            two_state_gap,
            numerical: numerical_oscillation_frequency(&record, &scn)?,
            run_time,
        })
    }))
}
