//! Continuum solver against the discrete chain.

use std::time::Instant;

use serde::Serialize;

use crate::chain::{chain_continuum_overlap, evolve_chain, ChainConfig, ChainState};
use crate::error::Result;
use crate::guides::Scenario;
use crate::propagator::SplitStepPropagator;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainComparison {
    pub spacing: f64,
    pub n_spins: usize,
    /// |⟨chain|continuum⟩|² at t_f.
    pub overlap: f64,
    pub chain_norm_drift: f64,
    pub max_boundary_occupation: f64,
    /// False when the chain excitation reached the edge region.
    pub trusted: bool,
    pub chain_seconds: f64,
    pub continuum_seconds: f64,
}

/// Runs `scn` once on the continuum grid and once per lattice spacing on the
/// chain, starting the chain from the sampled continuum initial state.
pub fn chain_compare(scn: &Scenario, spacings: &[f64]) -> Result<Vec<ChainComparison>> {
    let (psi0, _) = scn.initial_state()?;
    let clock = Instant::now();
    let continuum = SplitStepPropagator::new(scn)?.evolve_final(&psi0, scn)?;
    let continuum_seconds = clock.elapsed().as_secs_f64();
    spacings
        .iter()
        .map(|&a| {
            let cfg = ChainConfig::for_scenario(scn, a)?;
            let start = ChainState::from_wavefunction(&psi0, &cfg)?;
            let clock = Instant::now();
            let run = evolve_chain(&start, &cfg, scn)?;
            let chain_seconds = clock.elapsed().as_secs_f64();
            Ok(ChainComparison {
                spacing: a,
                n_spins: cfg.n_spins,
                overlap: chain_continuum_overlap(&run.final_state, &cfg, &continuum.psi)?,
                chain_norm_drift: run.norm_drift,
                max_boundary_occupation: run.max_boundary_occupation,
                trusted: run.trusted(),
                chain_seconds,
                continuum_seconds,
            })
        })
        .collect()
}
