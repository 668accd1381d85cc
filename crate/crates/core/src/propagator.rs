//! Strang split-step Fourier integration of
//! `i ∂ψ/∂t = [B(x,t) - (J/2) ∂²/∂x²] ψ`.
//!
//! One step of length `h` starting at `t`:
//!
//! 1. `ψ ← exp(-i B(x, t + h/2) h/2) ψ`
//! 2. `ψ ← F⁻¹ exp(-i (J/2) k² h) F ψ`
//! 3. `ψ ← exp(-i B(x, t + h/2) h/2) ψ`
//! 4. `ψ ← m(x) ψ` with the absorbing mask `m = exp(-η h s(x))`
//!
//! Sampling the potential at the midpoint keeps the scheme second order for
//! moving guides. The probability removed in step 4 is accumulated in a
//! ledger so that `norm² + absorbed = 1` can be checked at any time.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_squared, Grid1D, WaveFunction};
use crate::guides::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub dt: f64,
    pub absorber_width: f64,
    pub absorber_strength: f64,
    pub snapshot_stride: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            dt: 0.005,
            absorber_width: 10.0,
            absorber_strength: 2.0,
            snapshot_stride: 20,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.absorber_width >= 0.0 && self.absorber_width < grid.length() / 4.0) {
            return Err(Error::InvalidParameter(format!(
                "absorber width {} must lie in [0, {})",
                self.absorber_width,
                grid.length() / 4.0
            )));
        }
        if !(self.absorber_strength >= 0.0 && self.absorber_strength.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "absorber strength must be >= 0, got {}",
                self.absorber_strength
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter(
                "snapshot_stride must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Settings with the absorbing layer switched off.
    pub fn without_absorber(self) -> Self {
        Self {
            absorber_strength: 0.0,
            ..self
        }
    }
}

/// Absorber profile s(x): cos² ramp from 0 at the inner edge of the layer to 1
/// at the (periodic) boundary; zero in the interior.
pub fn absorber_profile(grid: &Grid1D, width: f64) -> Vec<f64> {
    let n = grid.n_points();
    let dx = grid.dx();
    (0..n)
        .map(|j| {
            // distance to the wrap point x_min ≡ x_max
            let d = (j.min(n - j) as f64) * dx;
            if width > 0.0 && d < width {
                (FRAC_PI_2 * d / width).cos().powi(2)
            } else {
                0.0
            }
        })
        .collect()
}

/// Per-step multiplicative mask `exp(-strength * dt * s(x))`.
pub fn make_absorber(grid: &Grid1D, settings: &SolverSettings) -> Vec<f64> {
    absorber_mask(
        &absorber_profile(grid, settings.absorber_width),
        settings.absorber_strength,
        settings.dt,
    )
}

fn absorber_mask(profile: &[f64], strength: f64, dt: f64) -> Vec<f64> {
    profile
        .iter()
        .map(|s| {
            if *s == 0.0 || strength == 0.0 {
                1.0
            } else {
                (-strength * dt * s).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub norm: f64,
    pub absorbed: f64,
}

impl LedgerEntry {
    pub fn total(&self) -> f64 {
        self.norm + self.absorbed
    }
}

/// Snapshots of |ψ|² together with the probability bookkeeping.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
    pub ledger: Vec<LedgerEntry>,
    pub initial: WaveFunction,
    pub final_state: WaveFunction,
}

impl EvolutionRecord {
    pub fn final_ledger(&self) -> LedgerEntry {
        *self
            .ledger
            .last()
            .expect("record always holds the initial snapshot")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Final state of a run without intermediate snapshots.
#[derive(Debug, Clone)]
pub struct FinalState {
    pub psi: WaveFunction,
    pub ledger: LedgerEntry,
}

/// Split-step integrator bound to one grid and one set of solver settings.
/// FFT plans and the default-step kinetic factor are computed once.
pub struct SplitStepPropagator {
    grid: Grid1D,
    j: f64,
    settings: SolverSettings,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
    profile: Vec<f64>,
    kinetic: Vec<Complex64>,
    mask: Vec<f64>,
    potential: Vec<f64>,
    half_phase: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SplitStepPropagator {
    pub fn new(scn: &Scenario) -> Result<Self> {
        scn.validate()?;
        let grid = scn.grid;
        let settings = scn.solver;
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft
            .get_inplace_scratch_len()
            .max(ifft.get_inplace_scratch_len());
        let wavenumbers = grid.wavenumbers();
        let profile = absorber_profile(&grid, settings.absorber_width);
        let mut prop = Self {
            grid,
            j: scn.constants.j,
            settings,
            fft,
            ifft,
            kinetic: Vec::new(),
            mask: absorber_mask(&profile, settings.absorber_strength, settings.dt),
            wavenumbers,
            profile,
            potential: vec![0.0; n],
            half_phase: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        };
        prop.kinetic = prop.kinetic_factor(settings.dt);
        Ok(prop)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// exp(-i (J/2) k² h), with the 1/N of the inverse FFT folded in.
    fn kinetic_factor(&self, h: f64) -> Vec<Complex64> {
        let inv_n = 1.0 / self.grid.n_points() as f64;
        self.wavenumbers
            .iter()
            .map(|k| Complex64::from_polar(inv_n, -0.5 * self.j * k * k * h))
            .collect()
    }

    /// Advances `psi` from `t` to `t + dt` in place and returns the
    /// probability removed by the absorber during the step.
    pub fn step(&mut self, psi: &mut WaveFunction, scn: &Scenario, t: f64, dt: f64) -> Result<f64> {
        if *psi.grid() != self.grid {
            return Err(Error::GridMismatch(
                psi.grid().to_string(),
                self.grid.to_string(),
            ));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("step length {dt}")));
        }
        let default_step = dt == self.settings.dt;

        scn.potential_into(t + 0.5 * dt, &mut self.potential)?;
        for (h, b) in self.half_phase.iter_mut().zip(&self.potential) {
            *h = Complex64::from_polar(1.0, -0.5 * b * dt);
        }
        let amps = psi.amplitudes_mut();
        for (a, p) in amps.iter_mut().zip(&self.half_phase) {
            *a *= p;
        }

        self.fft.process_with_scratch(amps, &mut self.scratch);
        if default_step {
            for (a, k) in amps.iter_mut().zip(&self.kinetic) {
                *a *= k;
            }
        } else {
            let kinetic = self.kinetic_factor(dt);
            for (a, k) in amps.iter_mut().zip(&kinetic) {
                *a *= k;
            }
        }
        self.ifft.process_with_scratch(amps, &mut self.scratch);

        for (a, p) in amps.iter_mut().zip(&self.half_phase) {
            *a *= p;
        }

        let partial_mask;
        let mask = if default_step {
            &self.mask
        } else {
            partial_mask = absorber_mask(&self.profile, self.settings.absorber_strength, dt);
            &partial_mask
        };
        let mut lost = 0.0;
        let mut total = 0.0;
        for (a, m) in amps.iter_mut().zip(mask) {
            let p = a.norm_sqr();
            total += p;
            if *m != 1.0 {
                lost += p * (1.0 - m * m);
                *a *= m;
            }
        }
        if !(total.is_finite() && lost.is_finite()) {
            return Err(Error::Numerical {
                t: t + dt,
                reason: "wavefunction became non-finite".into(),
            });
        }
        Ok(lost * self.grid.dx())
    }

    /// Step lengths covering [t0, t_f] exactly: full steps plus one final
    /// partial step when the window is not a multiple of dt.
    fn schedule(&self, t0: f64, t_f: f64) -> (usize, f64) {
        let dt = self.settings.dt;
        let span = t_f - t0;
        let full = (span / dt + 1e-9).floor() as usize;
        let rest = span - full as f64 * dt;
        let rest = if rest > 1e-9 * dt { rest } else { 0.0 };
        (full, rest)
    }

    fn run<F>(&mut self, psi0: &WaveFunction, scn: &Scenario, mut observe: F) -> Result<FinalState>
    where
        F: FnMut(usize, f64, &WaveFunction, LedgerEntry, bool),
    {
        if *psi0.grid() != self.grid {
            return Err(Error::GridMismatch(
                psi0.grid().to_string(),
                self.grid.to_string(),
            ));
        }
        let dt = self.settings.dt;
        let (full, rest) = self.schedule(scn.t0, scn.t_f);
        let mut psi = psi0.clone();
        let mut absorbed = 0.0;
        let mut entry = LedgerEntry {
            norm: norm_squared(&psi),
            absorbed,
        };
        let total_steps = full + usize::from(rest > 0.0);
        observe(0, scn.t0, &psi, entry, total_steps == 0);
        for i in 0..full {
            let t = scn.t0 + i as f64 * dt;
            absorbed += self.step(&mut psi, scn, t, dt)?;
            let last = i + 1 == total_steps;
            let t_next = if last {
                scn.t_f
            } else {
                scn.t0 + (i + 1) as f64 * dt
            };
            entry = LedgerEntry {
                norm: norm_squared(&psi),
                absorbed,
            };
            observe(i + 1, t_next, &psi, entry, last);
        }
        if rest > 0.0 {
            let t = scn.t0 + full as f64 * dt;
            absorbed += self.step(&mut psi, scn, t, rest)?;
            entry = LedgerEntry {
                norm: norm_squared(&psi),
                absorbed,
            };
            observe(full + 1, scn.t_f, &psi, entry, true);
        }
        Ok(FinalState { psi, ledger: entry })
    }

    /// Evolves over the scenario window, recording |ψ|² every
    /// `snapshot_stride` steps plus the final state.
    pub fn evolve(&mut self, psi0: &WaveFunction, scn: &Scenario) -> Result<EvolutionRecord> {
        let stride = self.settings.snapshot_stride;
        let mut times = Vec::new();
        let mut densities = Vec::new();
        let mut ledger = Vec::new();
        let fin = self.run(psi0, scn, |i, t, psi, entry, last| {
            if i % stride == 0 || last {
                times.push(t);
                densities.push(psi.density());
                ledger.push(entry);
            }
        })?;
        Ok(EvolutionRecord {
            times,
            densities,
            ledger,
            initial: psi0.clone(),
            final_state: fin.psi,
        })
    }

    /// Evolves without keeping snapshots.
    pub fn evolve_final(&mut self, psi0: &WaveFunction, scn: &Scenario) -> Result<FinalState> {
        self.run(psi0, scn, |_, _, _, _, _| {})
    }

    /// Evolves and hands every intermediate state to `observe(t, ψ)`.
    pub fn evolve_observed<F>(
        &mut self,
        psi0: &WaveFunction,
        scn: &Scenario,
        mut observe: F,
    ) -> Result<FinalState>
    where
        F: FnMut(f64, &WaveFunction),
    {
        self.run(psi0, scn, |_, t, psi, _, _| observe(t, psi))
    }
}

/// Builds the propagator for `scn` and evolves its initial state.
pub fn evolve(scn: &Scenario) -> Result<EvolutionRecord> {
    let (psi0, _) = scn.initial_state()?;
    SplitStepPropagator::new(scn)?.evolve(&psi0, scn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, sample};
    use crate::guides::{GuideTrajectory, InitialState, PhysicalConstants};
    use approx::assert_abs_diff_eq;

    fn scenario(guide: GuideTrajectory, t_f: f64, solver: SolverSettings) -> Scenario {
        Scenario::new(
            PhysicalConstants::default(),
            vec![guide],
            Grid1D::standard(),
            (0.0, t_f),
            solver,
            InitialState::Ground { guide: 0 },
        )
        .unwrap()
    }

    /// A scenario whose well is too shallow to matter: B0 = 1e-300.
    fn free(t_f: f64, solver: SolverSettings) -> Scenario {
        let mut scn = scenario(GuideTrajectory::Stationary { x0: 0.0 }, t_f, solver);
        scn.constants.b0 = 1e-300;
        scn
    }

    fn gaussian(grid: Grid1D, x0: f64, sigma: f64, k0: f64) -> WaveFunction {
        let mut psi = sample(grid, |x| {
            Complex64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), k0 * x)
        })
        .unwrap();
        psi.normalize().unwrap();
        psi
    }

    #[test]
    fn mask_is_one_without_strength_and_in_the_interior() {
        let g = Grid1D::standard();
        let off = SolverSettings::default().without_absorber();
        assert!(make_absorber(&g, &off).iter().all(|m| *m == 1.0));
        let on = make_absorber(&g, &SolverSettings::default());
        for (j, m) in on.iter().enumerate() {
            if g.x(j).abs() < 30.0 {
                assert_eq!(*m, 1.0);
            }
        }
        assert!(on[0] < 1.0);
        // symmetric about the wrap point
        for j in 1..g.n_points() {
            assert_eq!(on[j], on[g.n_points() - j]);
        }
    }

    #[test]
    fn free_step_is_unitary() {
        let scn = free(1.0, SolverSettings::default().without_absorber());
        let mut prop = SplitStepPropagator::new(&scn).unwrap();
        let mut psi = gaussian(scn.grid, 0.0, 1.0, 0.7);
        for i in 0..50 {
            let before = norm_squared(&psi);
            prop.step(&mut psi, &scn, i as f64 * 0.005, 0.005).unwrap();
            assert!((norm_squared(&psi) - before).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_mode_only_picks_up_its_energy_phase() {
        let scn = scenario(
            GuideTrajectory::Stationary { x0: 0.0 },
            10.0,
            SolverSettings::default(),
        );
        let (psi0, _) = scn.initial_state().unwrap();
        let fin = SplitStepPropagator::new(&scn)
            .unwrap()
            .evolve_final(&psi0, &scn)
            .unwrap();
        let ov = inner_product(&psi0, &fin.psi).unwrap();
        assert!(ov.norm_sqr() >= 0.9999);
        // E = -1/2 → ψ(t) = e^{+i t/2} ψ0
        let expected = Complex64::from_polar(1.0, 0.5 * 10.0);
        assert!((ov - expected).norm() < 1e-4, "{ov}");
    }

    #[test]
    fn free_packet_moves_at_group_velocity() {
        let k0 = 1.2;
        let scn = free(5.0, SolverSettings::default().without_absorber());
        let psi0 = gaussian(scn.grid, -5.0, 1.5, k0);
        let fin = SplitStepPropagator::new(&scn)
            .unwrap()
            .evolve_final(&psi0, &scn)
            .unwrap();
        let centroid = |p: &WaveFunction| {
            p.grid()
                .points()
                .zip(p.amplitudes())
                .map(|(x, a)| x * a.norm_sqr())
                .sum::<f64>()
                * p.grid().dx()
        };
        let moved = centroid(&fin.psi) - centroid(&psi0);
        let expected = scn.constants.j * k0 * 5.0;
        assert!((moved - expected).abs() < 0.005 * expected, "{moved}");
    }

    #[test]
    fn empty_window_gives_single_snapshot() {
        let scn = scenario(
            GuideTrajectory::Stationary { x0: 0.0 },
            0.0,
            SolverSettings::default(),
        );
        let rec = evolve(&scn).unwrap();
        assert_eq!(rec.len(), 1);
        assert_eq!(rec.final_state, rec.initial);
        assert_eq!(rec.times, vec![0.0]);
    }

    #[test]
    fn partial_final_step_lands_on_t_f() {
        let solver = SolverSettings {
            snapshot_stride: 7,
            ..Default::default()
        };
        let scn = scenario(GuideTrajectory::Linear { x0: 0.0, v: 0.2 }, 1.0123, solver);
        let rec = evolve(&scn).unwrap();
        assert_eq!(*rec.times.last().unwrap(), 1.0123);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(rec.densities.len(), rec.times.len());
        // 202 full steps + 1 partial → snapshots at 0,7,..,196 and the end
        assert_eq!(rec.len(), 29 + 1);
    }

    #[test]
    fn ledger_closes_with_absorber() {
        let scn = free(30.0, SolverSettings::default());
        let psi0 = gaussian(scn.grid, 10.0, 1.0, 2.0);
        let mut prop = SplitStepPropagator::new(&scn).unwrap();
        let rec = prop.evolve(&psi0, &scn).unwrap();
        let last = rec.final_ledger();
        assert!(last.absorbed > 0.5, "packet should have left: {last:?}");
        for e in &rec.ledger {
            assert!((e.total() - 1.0).abs() < 1e-6, "{e:?}");
        }
        assert!(norm_squared(&rec.final_state) <= 1.0);
        assert_abs_diff_eq!(
            norm_squared(&rec.final_state),
            1.0 - last.absorbed,
            epsilon = 1e-8
        );
    }

    #[test]
    fn runs_are_bit_identical() {
        let scn = scenario(
            GuideTrajectory::Corner {
                r: 2.0,
                theta: 0.3,
                t_f: 2.0,
                slope: Default::default(),
                mirrored: false,
            },
            2.0,
            SolverSettings::default(),
        );
        let a = evolve(&scn).unwrap();
        let b = evolve(&scn).unwrap();
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.densities, b.densities);
    }

    #[test]
    fn time_reversal_recovers_the_initial_state() {
        // Static double well, absorber off: conjugate, evolve again, conjugate.
        let mut scn = scenario(
            GuideTrajectory::Stationary { x0: -1.0 },
            5.0,
            SolverSettings::default().without_absorber(),
        );
        scn.guides.push(GuideTrajectory::Stationary { x0: 1.5 });
        let psi0 = gaussian(scn.grid, 0.0, 1.0, 0.5);
        let mut prop = SplitStepPropagator::new(&scn).unwrap();
        let mut forward = prop.evolve_final(&psi0, &scn).unwrap().psi;
        forward
            .amplitudes_mut()
            .iter_mut()
            .for_each(|a| *a = a.conj());
        let mut back = prop.evolve_final(&forward, &scn).unwrap().psi;
        back.amplitudes_mut().iter_mut().for_each(|a| *a = a.conj());
        let f = inner_product(&psi0, &back).unwrap().norm_sqr();
        assert!(f > 1.0 - 1e-8, "{f}");
    }
}
