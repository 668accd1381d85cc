//! Transport metrics, the coupled-guide frequency and parameter sweeps.

mod compare;
mod coupling;
mod sweep;

pub use compare::{chain_compare, ChainComparison};
pub use coupling::{
    coupled_mode_frequency_closed_form, coupling_grid, effective_two_state_hamiltonian,
    left_occupation_series, numerical_oscillation_frequency, oscillation_run_time, TwoStateModel,
};
pub use sweep::{
    is_non_increasing, linear_space, log_space, sweep_corner, sweep_coupling, sweep_interference,
    sweep_xjunction, CouplingRow, SweepRow, SweepTable,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{inner_product, WaveFunction};
use crate::guides::{ground_mode, Direction, GuideTrajectory, InitialState, Scenario};
use crate::propagator::{absorber_profile, FinalState, SplitStepPropagator};

/// How the final state is compared with the guide mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityConvention {
    /// Overlap of the initial state with the final state translated back by
    /// the guide displacement `x0(t_f) - x0(t0)`.
    #[default]
    Literal,
    /// Overlap with the instantaneous guide mode at `t_f`, velocity phase
    /// included.
    PhaseMatched,
}

/// A number plus whatever went wrong while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub warnings: Vec<String>,
}

/// Fraction of `psi` lying in the absorbing layer above which a shifted
/// overlap is flagged.
const ABSORBER_WARNING_LEVEL: f64 = 1e-3;

fn absorber_weight(psi: &WaveFunction, width: f64) -> f64 {
    let profile = absorber_profile(psi.grid(), width);
    psi.amplitudes()
        .iter()
        .zip(profile)
        .filter(|(_, s)| *s > 0.0)
        .map(|(c, _)| c.norm_sqr())
        .sum::<f64>()
        * psi.grid().dx()
}

/// `|⟨ref| ψ(· + shift)⟩|²`, warning if the translated state sits in the
/// absorbing layer.
fn shifted_overlap(
    reference: &WaveFunction,
    psi: &WaveFunction,
    shift: f64,
    width: f64,
    warnings: &mut Vec<String>,
) -> Result<f64> {
    let moved = psi.shifted(-shift);
    let weight = absorber_weight(&moved, width);
    if weight > ABSORBER_WARNING_LEVEL {
        warnings.push(format!(
            "shift by {shift:.6} moves {weight:.3e} of the probability into the absorbing layer"
        ));
    }
    Ok(inner_product(reference, &moved)?.norm_sqr())
}

/// Transport fidelity of `psi_f` with respect to the mode of `traj`.
pub fn transport_fidelity(
    psi0: &WaveFunction,
    psi_f: &WaveFunction,
    traj: &GuideTrajectory,
    scn: &Scenario,
    convention: FidelityConvention,
) -> Result<Measured> {
    let mut warnings = Vec::new();
    let value = match convention {
        FidelityConvention::Literal => {
            let shift = traj.center(scn.t_f)? - traj.center(scn.t0)?;
            shifted_overlap(psi0, psi_f, shift, scn.solver.absorber_width, &mut warnings)?
        }
        FidelityConvention::PhaseMatched => {
            let mode = ground_mode(traj, scn.t_f, &scn.constants, scn.grid)?;
            inner_product(&mode, psi_f)?.norm_sqr()
        }
    };
    Ok(Measured { value, warnings })
}

/// Indices `(left_to_right, right_to_left)` when `scn` is an X-junction fed
/// through its left-to-right arm.
fn xjunction_arms(scn: &Scenario) -> Result<(usize, usize)> {
    let not_x = |why: &str| {
        Err(Error::Precondition(format!(
            "not an X-junction scenario: {why}"
        )))
    };
    if scn.guides.len() != 2 {
        return not_x("exactly two guides are required");
    }
    let mut lr = None;
    let mut rl = None;
    let mut shape = None;
    for (i, g) in scn.guides.iter().enumerate() {
        match *g {
            GuideTrajectory::XBranch {
                x_l,
                theta,
                direction,
            } => {
                if shape.is_some_and(|s| s != (x_l, theta)) {
                    return not_x("the two arms differ in x_l or theta");
                }
                shape = Some((x_l, theta));
                match direction {
                    Direction::LeftToRight => lr = Some(i),
                    Direction::RightToLeft => rl = Some(i),
                }
            }
            _ => return not_x("guides must be X-junction arms"),
        }
    }
    let (Some(lr), Some(rl)) = (lr, rl) else {
        return not_x("one arm per direction is required");
    };
    match scn.initial {
        InitialState::Ground { guide } if guide == lr => Ok((lr, rl)),
        _ => not_x("the excitation must start in the left-to-right arm"),
    }
}

/// Reflection (exit through the crossing arm) and transmission (stay in the
/// original arm) probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionTransmission {
    pub reflection: f64,
    pub transmission: f64,
    pub warnings: Vec<String>,
}

impl ReflectionTransmission {
    pub fn total(&self) -> f64 {
        self.reflection + self.transmission
    }
}

/// Löwdin (symmetric) orthonormalization of two normalized states, so that
/// projections onto them never sum to more than the norm.
fn symmetric_orthonormalize(
    a: &WaveFunction,
    b: &WaveFunction,
) -> Result<(WaveFunction, WaveFunction)> {
    let s = inner_product(a, b)?;
    let m = s.norm();
    if m > 1.0 - 1e-9 {
        return Err(Error::Precondition(
            "the two exit modes coincide; R and T are undefined".into(),
        ));
    }
    let (up, down) = ((1.0 + m).powf(-0.5), (1.0 - m).powf(-0.5));
    let diag = Complex64::new(0.5 * (up + down), 0.0);
    // off-diagonal of S^{-1/2} times the phase of s
    let off = if m > 0.0 {
        s / m * (0.5 * (up - down))
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok((
        WaveFunction::linear_combination(diag, a, off.conj(), b)?,
        WaveFunction::linear_combination(off, a, diag, b)?,
    ))
}

/// R and T as projections of `psi_f` onto the two exit modes. Literal:
/// the initial mode translated to each exit position. Phase-matched: the
/// guide modes at `t_f`. The pair is orthonormalized first.
pub fn reflection_transmission(
    psi_f: &WaveFunction,
    scn: &Scenario,
    convention: FidelityConvention,
) -> Result<ReflectionTransmission> {
    let (lr, rl) = xjunction_arms(scn)?;
    let (g_lr, g_rl) = (&scn.guides[lr], &scn.guides[rl]);
    let mut warnings = Vec::new();
    let (stay, cross) = match convention {
        FidelityConvention::Literal => {
            let reference = ground_mode(g_lr, scn.t0, &scn.constants, scn.grid)?;
            let start = g_lr.center(scn.t0)?;
            let width = scn.solver.absorber_width;
            let mut placed = |g: &GuideTrajectory| -> Result<WaveFunction> {
                let moved = reference.shifted(g.center(scn.t_f)? - start);
                let weight = absorber_weight(&moved, width);
                if weight > ABSORBER_WARNING_LEVEL {
                    warnings.push(format!(
                        "exit reference overlaps the absorbing layer by {weight:.3e}"
                    ));
                }
                Ok(moved)
            };
            (placed(g_lr)?, placed(g_rl)?)
        }
        FidelityConvention::PhaseMatched => (
            ground_mode(g_lr, scn.t_f, &scn.constants, scn.grid)?,
            ground_mode(g_rl, scn.t_f, &scn.constants, scn.grid)?,
        ),
    };
    let (stay, cross) = symmetric_orthonormalize(&stay, &cross)?;
    Ok(ReflectionTransmission {
        reflection: inner_product(&cross, psi_f)?.norm_sqr(),
        transmission: inner_product(&stay, psi_f)?.norm_sqr(),
        warnings,
    })
}

/// Probability on `x < 0` and on `x >= 0`.
pub fn left_right_fraction(psi: &WaveFunction) -> (f64, f64) {
    let dx = psi.grid().dx();
    let mut left = 0.0;
    let mut right = 0.0;
    for (x, c) in psi.grid().points().zip(psi.amplitudes()) {
        if x < 0.0 {
            left += c.norm_sqr();
        } else {
            right += c.norm_sqr();
        }
    }
    (left * dx, right * dx)
}

/// Everything measured at the end of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub convention: FidelityConvention,
    /// Transport fidelity in the initially populated guide; absent for
    /// superposition starts.
    pub fidelity: Option<f64>,
    pub reflection: Option<f64>,
    pub transmission: Option<f64>,
    /// R + T.
    pub total_fidelity: Option<f64>,
    pub left_fraction: f64,
    pub right_fraction: f64,
    pub final_norm: f64,
    pub absorbed: f64,
    pub warnings: Vec<String>,
}

impl MetricsReport {
    /// Computes all applicable metrics for a finished run.
    pub fn evaluate(
        scn: &Scenario,
        psi0: &WaveFunction,
        fin: &FinalState,
        convention: FidelityConvention,
    ) -> Result<Self> {
        let mut warnings = Vec::new();
        let fidelity = match scn.initial {
            InitialState::Ground { guide } => {
                let m = transport_fidelity(psi0, &fin.psi, &scn.guides[guide], scn, convention)?;
                warnings.extend(m.warnings);
                Some(m.value)
            }
            InitialState::Superposition { .. } => None,
        };
        let (reflection, transmission) = match xjunction_arms(scn) {
            Ok(_) => {
                let rt = reflection_transmission(&fin.psi, scn, convention)?;
                warnings.extend(rt.warnings);
                (Some(rt.reflection), Some(rt.transmission))
            }
            Err(_) => (None, None),
        };
        let (left_fraction, right_fraction) = left_right_fraction(&fin.psi);
        let report = Self {
            convention,
            fidelity,
            reflection,
            transmission,
            total_fidelity: reflection.zip(transmission).map(|(r, t)| r + t),
            left_fraction,
            right_fraction,
            final_norm: fin.ledger.norm,
            absorbed: fin.ledger.absorbed,
            warnings,
        };
        report.check()?;
        Ok(report)
    }

    fn check(&self) -> Result<()> {
        let values = [
            self.fidelity,
            self.reflection,
            self.transmission,
            Some(self.left_fraction),
            Some(self.right_fraction),
            Some(self.absorbed),
        ];
        for v in values.into_iter().flatten() {
            if !v.is_finite() || !(-1e-12..=1.0 + 1e-9).contains(&v) {
                return Err(Error::Numerical {
                    t: f64::NAN,
                    reason: format!("metric {v} outside [0, 1]"),
                });
            }
        }
        Ok(())
    }
}

/// Evolves the scenario's initial state and evaluates the metrics.
pub fn run_metrics(scn: &Scenario, convention: FidelityConvention) -> Result<MetricsReport> {
    let (psi0, warnings) = scn.initial_state()?;
    let fin = SplitStepPropagator::new(scn)?.evolve_final(&psi0, scn)?;
    let mut report = MetricsReport::evaluate(scn, &psi0, &fin, convention)?;
    report.warnings.splice(0..0, warnings);
    Ok(report)
}
