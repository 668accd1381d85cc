//! Evanescent coupling between two parallel stationary guides.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{inner_product, Grid1D, WaveFunction};
use crate::guides::{ground_mode, sech2, GuideTrajectory, PhysicalConstants, Scenario};
use crate::propagator::EvolutionRecord;

/// Below this separation the closed form is evaluated from its Taylor series;
/// the direct expression loses digits to cancellation (numerator ~ 32 d⁶/45).
const SERIES_CUTOFF: f64 = 0.3;

/// Taylor coefficients of Ω in powers of d².
const SERIES: [f64; 6] = [
    16.0 / 15.0,
    -424.0 / 1575.0,
    1058.0 / 23625.0,
    -171617.0 / 27286875.0,
    34517941.0 / 42567525000.0,
    -98867557.0 / 993242250000.0,
];

/// Tunnelling frequency between two sech modes a distance `d` apart,
/// `J = B0 = w = 1`:
/// `csch²d [cosh 3d + 4d sinh d - (8d² + 1) cosh d] / (cosh 2d - 2d² - 1)`.
pub fn coupled_mode_frequency_closed_form(d: f64) -> Result<f64> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "guide separation must be a finite number >= 0, got {d}"
        )));
    }
    if d < SERIES_CUTOFF {
        let d2 = d * d;
        return Ok(SERIES.iter().rev().fold(0.0, |acc, c| acc * d2 + c));
    }
    if d > 300.0 {
        // every hyperbolic term overflows; use the leading asymptotics
        // 4 e^{-d} (1 + O(d e^{-2d}))
        return Ok(4.0 * (-d).exp());
    }
    let (s, c) = (d.sinh(), d.cosh());
    let numerator = (3.0 * d).cosh() + 4.0 * d * s - (8.0 * d * d + 1.0) * c;
    let denominator = (2.0 * d).cosh() - 2.0 * d * d - 1.0;
    Ok(numerator / (s * s * denominator))
}

/// Grid wide enough for the coupling calculations up to d ≈ 20.
pub fn coupling_grid() -> Grid1D {
    Grid1D::new(-60.0, 60.0, 8192).expect("static grid is valid")
}

/// The coupled pair projected onto the Gram-Schmidt basis built from the
/// left and right guide modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateModel {
    pub hamiltonian: Matrix2<f64>,
    /// Raw overlap ⟨ψ_left|ψ_right⟩ before orthonormalization.
    pub overlap: f64,
    /// Difference of the two eigenvalues.
    pub gap: f64,
    /// Largest |imaginary part| met in the projected elements.
    pub imaginary_residue: f64,
    /// |H_01 - H_10|.
    pub asymmetry: f64,
}

/// (-J/2 ∂² + V) ψ, derivative taken spectrally.
fn apply_hamiltonian(psi: &WaveFunction, potential: &[f64], j: f64) -> WaveFunction {
    let grid = *psi.grid();
    let n = grid.n_points();
    let mut planner = FftPlanner::new();
    let mut buf = psi.amplitudes().to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    let inv_n = 1.0 / n as f64;
    for (c, k) in buf.iter_mut().zip(grid.wavenumbers()) {
        *c *= 0.5 * j * k * k * inv_n;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    for ((h, c), v) in buf.iter_mut().zip(psi.amplitudes()).zip(potential) {
        *h += c * v;
    }
    WaveFunction::from_amplitudes(grid, buf).expect("same grid")
}

pub fn effective_two_state_hamiltonian(
    d: f64,
    constants: &PhysicalConstants,
    grid: Grid1D,
) -> Result<TwoStateModel> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "guide separation must be positive, got {d}"
        )));
    }
    constants.validate()?;
    let left = GuideTrajectory::Stationary { x0: -0.5 * d };
    let right = GuideTrajectory::Stationary { x0: 0.5 * d };
    let psi_l = ground_mode(&left, 0.0, constants, grid)?;
    let psi_r = ground_mode(&right, 0.0, constants, grid)?;
    let overlap = inner_product(&psi_l, &psi_r)?.re;
    if overlap > 1.0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "modes at separation {d} overlap by {overlap}; Gram-Schmidt is ill-conditioned"
        )));
    }
    let mut second = WaveFunction::linear_combination(
        Complex64::new(1.0, 0.0),
        &psi_r,
        Complex64::new(-overlap, 0.0),
        &psi_l,
    )?;
    second.scale(Complex64::new(1.0 / (1.0 - overlap * overlap).sqrt(), 0.0));

    let potential: Vec<f64> = grid
        .points()
        .map(|x| {
            [-0.5 * d, 0.5 * d]
                .iter()
                .map(|c| -constants.b0 * sech2((x - c) / constants.w))
                .sum()
        })
        .collect();
    let basis = [psi_l, second];
    let images: Vec<WaveFunction> = basis
        .iter()
        .map(|b| apply_hamiltonian(b, &potential, constants.j))
        .collect();
    let mut h = Matrix2::zeros();
    let mut imaginary_residue: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let e = inner_product(&basis[a], &images[b])?;
            imaginary_residue = imaginary_residue.max(e.im.abs());
            h[(a, b)] = e.re;
        }
    }
    let asymmetry = (h[(0, 1)] - h[(1, 0)]).abs();
    let diff = h[(0, 0)] - h[(1, 1)];
    let off = 0.5 * (h[(0, 1)] + h[(1, 0)]);
    let gap = (diff * diff + 4.0 * off * off).sqrt();
    Ok(TwoStateModel {
        hamiltonian: h,
        overlap,
        gap,
        imaginary_residue,
        asymmetry,
    })
}

/// Left-guide occupation `Σ_{x < mid} |ψ|² dx` at every snapshot, `mid`
/// being halfway between the two guides.
pub fn left_occupation_series(record: &EvolutionRecord, scn: &Scenario) -> Result<Vec<f64>> {
    let (a, b) = stationary_pair(scn)?;
    let mid = 0.5 * (a + b);
    let grid = scn.grid;
    let dx = grid.dx();
    Ok(record
        .densities
        .iter()
        .map(|rho| {
            grid.points()
                .zip(rho)
                .filter(|(x, _)| *x < mid)
                .map(|(_, p)| p)
                .sum::<f64>()
                * dx
        })
        .collect())
}

fn stationary_pair(scn: &Scenario) -> Result<(f64, f64)> {
    match scn.guides.as_slice() {
        [GuideTrajectory::Stationary { x0: a }, GuideTrajectory::Stationary { x0: b }] => {
            Ok((a.min(*b), a.max(*b)))
        }
        _ => Err(Error::Precondition(
            "frequency extraction needs exactly two stationary guides".into(),
        )),
    }
}

/// Run time that covers `periods` full oscillations at frequency `omega` plus
/// a quarter period so the last extremum is confirmed.
pub fn oscillation_run_time(omega: f64, periods: f64) -> f64 {
    (periods + 0.75) * 2.0 * std::f64::consts::PI / omega
}

/// Oscillation frequency Ω of the left-guide occupation, from the spacing of
/// its interior extrema (parabolic refinement, half-period = π/Ω).
pub fn numerical_oscillation_frequency(record: &EvolutionRecord, scn: &Scenario) -> Result<f64> {
    let series = left_occupation_series(record, scn)?;
    let times = &record.times;
    let too_short = |found: usize| {
        Error::Precondition(format!(
            "found {found} interior occupation extrema in t = [{}, {}]; at least two full \
             oscillations are needed, extend t_f",
            scn.t0, scn.t_f
        ))
    };
    if series.len() < 5 {
        return Err(too_short(0));
    }
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            (l.min(*v), h.max(*v))
        });
    if hi - lo < 1e-3 {
        return Err(too_short(0));
    }
    let threshold = 0.25 * (hi - lo);

    let mut extrema = Vec::new();
    let mut seeking_max = series[1] >= series[0];
    let mut candidate = 0;
    for (i, &v) in series.iter().enumerate().skip(1) {
        if seeking_max {
            if v > series[candidate] {
                candidate = i;
            } else if series[candidate] - v > threshold {
                extrema.push(candidate);
                seeking_max = false;
                candidate = i;
            }
        } else if v < series[candidate] {
            candidate = i;
        } else if v - series[candidate] > threshold {
            extrema.push(candidate);
            seeking_max = true;
            candidate = i;
        }
    }
    let refined: Vec<f64> = extrema
        .into_iter()
        .filter(|&i| i > 0 && i + 1 < series.len())
        .map(|i| {
            let (a, b, c) = (series[i - 1], series[i], series[i + 1]);
            let curvature = a - 2.0 * b + c;
            let h = times[i + 1] - times[i];
            let offset = if curvature != 0.0 {
                (0.5 * (a - c) / curvature).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            times[i] + offset * h
        })
        .collect();
    if refined.len() < 5 {
        return Err(too_short(refined.len()));
    }
    let mean_half_period = (refined[refined.len() - 1] - refined[0]) / (refined.len() - 1) as f64;
    Ok(std::f64::consts::PI / mean_half_period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self, Numerics};
    use crate::propagator::{SolverSettings, SplitStepPropagator};
    use approx::assert_relative_eq;

    /// Direct evaluation with compensated arithmetic on exponentials, valid for
    /// moderate d; used as an independent check of both branches.
    fn closed_form_by_exponentials(d: f64) -> f64 {
        // Every hyperbolic function written through e^{±d}; the numerator
        // is regrouped to avoid subtracting nearly equal cosh terms.
        let e = d.exp();
        let ei = 1.0 / e;
        let cosh = |k: f64| 0.5 * ((k * d).exp() + (-k * d).exp());
        let num = cosh(3.0) + 2.0 * d * (e - ei) - (8.0 * d * d + 1.0) * cosh(1.0);
        let den = cosh(2.0) - 2.0 * d * d - 1.0;
        let s = 0.5 * (e - ei);
        num / (s * s * den)
    }

    #[test]
    fn zero_separation_limit() {
        assert_eq!(
            coupled_mode_frequency_closed_form(0.0).unwrap(),
            16.0 / 15.0
        );
        assert!(coupled_mode_frequency_closed_form(-0.1).is_err());
        assert!(coupled_mode_frequency_closed_form(f64::NAN).is_err());
    }

    #[test]
    fn series_and_direct_branches_join() {
        let below = coupled_mode_frequency_closed_form(SERIES_CUTOFF - 1e-12).unwrap();
        let direct = closed_form_by_exponentials(SERIES_CUTOFF);
        assert_relative_eq!(below, direct, max_relative = 1e-9);
        for d in [0.5, 1.0, 2.0, 4.0, 7.0] {
            assert_relative_eq!(
                coupled_mode_frequency_closed_form(d).unwrap(),
                closed_form_by_exponentials(d),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn closed_form_decreases_and_approaches_asymptote() {
        let mut prev = coupled_mode_frequency_closed_form(1e-3).unwrap();
        for i in 2..=8000 {
            let d = i as f64 * 1e-3;
            let v = coupled_mode_frequency_closed_form(d).unwrap();
            assert!(v < prev, "d = {d}");
            prev = v;
        }
        let ratio = coupled_mode_frequency_closed_form(5.0).unwrap() / (4.0 * (-5.0f64).exp());
        assert!((0.9..=1.1).contains(&ratio));
        assert!(coupled_mode_frequency_closed_form(1000.0).unwrap() >= 0.0);
    }

    #[test]
    fn gram_schmidt_gap_reproduces_closed_form() {
        let c = PhysicalConstants::default();
        // 0.25 exercises the series branch
        for d in [0.25, 1.0, 2.0, 3.0] {
            let m = effective_two_state_hamiltonian(d, &c, coupling_grid()).unwrap();
            let exact = coupled_mode_frequency_closed_form(d).unwrap();
            assert!(
                ((m.gap - exact) / exact).abs() < 1e-6,
                "d = {d}: {} vs {exact}",
                m.gap
            );
            assert!(m.asymmetry < 1e-10);
            assert!(m.imaginary_residue < 1e-10);
        }
        let m = effective_two_state_hamiltonian(6.0, &c, coupling_grid()).unwrap();
        assert!((m.gap / (4.0 * (-6.0f64).exp()) - 1.0).abs() < 0.1);
    }

    #[test]
    fn coincident_guides_are_rejected() {
        let c = PhysicalConstants::default();
        assert!(matches!(
            effective_two_state_hamiltonian(1e-9, &c, coupling_grid()),
            Err(Error::Precondition(_))
        ));
    }

    fn pair_record(d: f64, t_f: f64) -> (EvolutionRecord, Scenario) {
        let num = Numerics {
            solver: SolverSettings {
                snapshot_stride: 4,
                ..Default::default()
            },
            ..Default::default()
        };
        let scn = presets::coupled_pair(&num, d, t_f).unwrap();
        let (psi0, _) = scn.initial_state().unwrap();
        let rec = SplitStepPropagator::new(&scn)
            .unwrap()
            .evolve(&psi0, &scn)
            .unwrap();
        (rec, scn)
    }

    #[test]
    fn extracted_frequency_matches_closed_form() {
        let d = 2.0;
        let omega = coupled_mode_frequency_closed_form(d).unwrap();
        let (rec, scn) = pair_record(d, oscillation_run_time(omega, 2.5));
        let measured = numerical_oscillation_frequency(&rec, &scn).unwrap();
        assert!(
            ((measured - omega) / omega).abs() < 0.05,
            "{measured} vs {omega}"
        );
    }

    #[test]
    fn distant_guides_give_no_frequency() {
        let (rec, scn) = pair_record(12.0, 20.0);
        assert!(matches!(
            numerical_oscillation_frequency(&rec, &scn),
            Err(Error::Precondition(_))
        ));
    }
}
