//! Discrete Heisenberg chain restricted to one flipped spin.
//!
//! For `H = -J Σ S_n·S_{n+1} - Σ B(n,t) S^z_n`, the states `|n⟩` with spin `n`
//! flipped against the all-up background span an invariant subspace. Relative
//! to the all-up energy:
//!
//! * every intact bond touching the flipped spin costs `J/2`, so the diagonal is
//!   `J` in the bulk and `J/2` at the ends of an open chain;
//! * the transverse part `(J/2)(S⁺S⁻ + S⁻S⁺)` hops the flip with amplitude
//!   `-J/2`;
//! * flipping spin `n` changes `-B S^z` by `+B(n,t)`, so a negative field
//!   (the `-B0 sech²` wells) is attractive for the magnon.
//!
//! With lattice spacing `a` and `J_chain = J/a²` the band bottom is
//! `J_chain (1 - cos qa) ≈ J q²/2`, i.e. the continuum kinetic term. The chain
//! amplitudes relate to the continuum field by `c_n ≈ sqrt(a) ψ(x_n)`.
//!
//! Time stepping is Crank-Nicolson with the Hamiltonian sampled at the step
//! midpoint, which is exactly unitary for a Hermitian tridiagonal matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::WaveFunction;
use crate::guides::{sech2, GuideTrajectory, PhysicalConstants, Scenario, EDGE_MARGIN_WIDTHS};

/// Boundary occupation above which the chain result is no longer trusted.
pub const BOUNDARY_OCCUPATION_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainBoundary {
    #[default]
    Open,
    Periodic,
}

/// Field applied to each spin.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainField {
    Zero,
    Uniform(f64),
    /// Summed PT wells sampled at the spin positions.
    Guides {
        constants: PhysicalConstants,
        guides: Vec<GuideTrajectory>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_spins: usize,
    /// Exchange strength of the chain Hamiltonian (`J/a²` when built from a
    /// continuum scenario).
    pub exchange: f64,
    pub spacing: f64,
    /// Position of spin 0; spin `n` sits at `x_min + n a`.
    pub x_min: f64,
    pub field: ChainField,
    pub boundary: ChainBoundary,
    /// Spins closer than this to either end count as boundary occupation.
    pub edge_margin: f64,
}

impl ChainConfig {
    pub fn new(
        n_spins: usize,
        exchange: f64,
        spacing: f64,
        x_min: f64,
        field: ChainField,
        boundary: ChainBoundary,
    ) -> Result<Self> {
        if n_spins < 3 {
            return Err(Error::InvalidParameter(format!(
                "chain needs at least 3 spins, got {n_spins}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lattice spacing must be positive, got {spacing}"
            )));
        }
        if !(exchange.is_finite() && exchange > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "exchange must be positive, got {exchange}"
            )));
        }
        Ok(Self {
            n_spins,
            exchange,
            spacing,
            x_min,
            field,
            boundary,
            edge_margin: 0.0,
        })
    }

    /// Chain covering the scenario grid with spacing `a` and the scenario's
    /// guides as field. Open boundaries.
    pub fn for_scenario(scn: &Scenario, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lattice spacing must be positive, got {spacing}"
            )));
        }
        let n_spins = (scn.grid.length() / spacing + 1e-9).floor() as usize;
        let mut cfg = Self::new(
            n_spins,
            scn.constants.j / (spacing * spacing),
            spacing,
            scn.grid.x_min(),
            ChainField::Guides {
                constants: scn.constants,
                guides: scn.guides.clone(),
            },
            ChainBoundary::Open,
        )?;
        cfg.edge_margin = EDGE_MARGIN_WIDTHS * scn.constants.w;
        Ok(cfg)
    }

    pub fn position(&self, n: usize) -> f64 {
        self.x_min + n as f64 * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_spins).map(|n| self.position(n)).collect()
    }

    /// B(n, t) for every spin.
    pub fn field_at(&self, t: f64) -> Result<Vec<f64>> {
        Ok(match &self.field {
            ChainField::Zero => vec![0.0; self.n_spins],
            ChainField::Uniform(b) => vec![*b; self.n_spins],
            ChainField::Guides { constants, guides } => {
                let mut out = vec![0.0; self.n_spins];
                for g in guides {
                    let c = g.center(t)?;
                    for (n, v) in out.iter_mut().enumerate() {
                        *v -= constants.b0 * sech2((self.position(n) - c) / constants.w);
                    }
                }
                out
            }
        })
    }

    fn is_edge_site(&self, n: usize) -> bool {
        let from_left = n as f64 * self.spacing;
        let from_right = (self.n_spins - 1 - n) as f64 * self.spacing;
        from_left < self.edge_margin || from_right < self.edge_margin
    }
}

/// Real symmetric tridiagonal matrix, optionally with the periodic corner
/// couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainHamiltonian {
    pub diagonal: Vec<f64>,
    /// Nearest-neighbour element (`-J/2`).
    pub hopping: f64,
    pub periodic: bool,
}

impl ChainHamiltonian {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diagonal[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.hopping;
                m[(i + 1, i)] = self.hopping;
            }
        }
        if self.periodic {
            m[(0, n - 1)] += self.hopping;
            m[(n - 1, 0)] += self.hopping;
        }
        m
    }

    pub fn apply(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = c[i] * self.diagonal[i];
                if i > 0 {
                    v += c[i - 1] * self.hopping;
                } else if self.periodic {
                    v += c[n - 1] * self.hopping;
                }
                if i + 1 < n {
                    v += c[i + 1] * self.hopping;
                } else if self.periodic {
                    v += c[0] * self.hopping;
                }
                v
            })
            .collect()
    }
}

/// One-flip Hamiltonian of the chain at time `t`, all-up energy removed.
pub fn single_excitation_hamiltonian(cfg: &ChainConfig, t: f64) -> Result<ChainHamiltonian> {
    let j = cfg.exchange;
    let field = cfg.field_at(t)?;
    let n = cfg.n_spins;
    let diagonal = field
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let bonds = match cfg.boundary {
                ChainBoundary::Periodic => 2.0,
                ChainBoundary::Open if i == 0 || i == n - 1 => 1.0,
                ChainBoundary::Open => 2.0,
            };
            0.5 * j * bonds + b
        })
        .collect();
    Ok(ChainHamiltonian {
        diagonal,
        hopping: -0.5 * j,
        periodic: cfg.boundary == ChainBoundary::Periodic,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub amplitudes: Vec<Complex64>,
}

impl ChainState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// `c_n = sqrt(a) ψ(x_n)` by band-limited interpolation, then normalized.
    pub fn from_wavefunction(psi: &WaveFunction, cfg: &ChainConfig) -> Result<Self> {
        check_domain(psi, cfg)?;
        let values = psi.interpolate(&cfg.positions())?;
        let mut s = Self {
            amplitudes: values.into_iter().map(|v| v * cfg.spacing.sqrt()).collect(),
        };
        s.normalize()?;
        Ok(s)
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_squared();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Precondition(format!(
                "cannot normalize chain state with norm² = {n}"
            )));
        }
        let s = 1.0 / n.sqrt();
        self.amplitudes.iter_mut().for_each(|c| *c *= s);
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ⟨x⟩ over the spin positions.
    pub fn centroid(&self, cfg: &ChainConfig) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * cfg.position(n))
            .sum::<f64>()
            / self.norm_squared()
    }

    fn boundary_occupation(&self, cfg: &ChainConfig) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(n, _)| cfg.is_edge_site(*n))
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub final_state: ChainState,
    pub times: Vec<f64>,
    /// Site probabilities every `snapshot_stride` steps and at the end.
    pub snapshots: Vec<Vec<f64>>,
    /// Largest probability found within `edge_margin` of a chain end.
    pub max_boundary_occupation: f64,
    /// |Σ|c_n|² - initial| at the end of the run.
    pub norm_drift: f64,
}

impl ChainRun {
    pub fn trusted(&self) -> bool {
        self.max_boundary_occupation < BOUNDARY_OCCUPATION_LIMIT
    }
}

/// Evolves `state` over the scenario's time window with Crank-Nicolson steps
/// of `scn.solver.dt` (plus a final partial step ending exactly at `t_f`).
pub fn evolve_chain(state: &ChainState, cfg: &ChainConfig, scn: &Scenario) -> Result<ChainRun> {
    if state.amplitudes.len() != cfg.n_spins {
        return Err(Error::InvalidParameter(format!(
            "state has {} amplitudes for a chain of {} spins",
            state.amplitudes.len(),
            cfg.n_spins
        )));
    }
    let dt = scn.solver.dt;
    let stride = scn.solver.snapshot_stride.max(1);
    let span = scn.t_f - scn.t0;
    let full = (span / dt + 1e-9).floor() as usize;
    let rest = span - full as f64 * dt;
    let rest = if rest > 1e-9 * dt { rest } else { 0.0 };

    let initial_norm = state.norm_squared();
    let mut c = state.amplitudes.clone();
    let mut solver = CrankNicolson::new(cfg.n_spins);
    let mut times = vec![scn.t0];
    let mut snapshots = vec![state.probabilities()];
    let mut max_edge = state.boundary_occupation(cfg);

    let total = full + usize::from(rest > 0.0);
    for i in 0..total {
        let (t, h) = if i < full {
            (scn.t0 + i as f64 * dt, dt)
        } else {
            (scn.t0 + full as f64 * dt, rest)
        };
        let ham = single_excitation_hamiltonian(cfg, t + 0.5 * h)?;
        solver.step(&ham, h, &mut c);
        let current = ChainState::new(c);
        if !current.norm_squared().is_finite() {
            return Err(Error::Numerical {
                t: t + h,
                reason: "chain amplitudes became non-finite".into(),
            });
        }
        max_edge = max_edge.max(current.boundary_occupation(cfg));
        let last = i + 1 == total;
        if (i + 1) % stride == 0 || last {
            times.push(if last { scn.t_f } else { t + h });
            snapshots.push(current.probabilities());
        }
        c = current.amplitudes;
    }
    let final_state = ChainState::new(c);
    Ok(ChainRun {
        norm_drift: (final_state.norm_squared() - initial_norm).abs(),
        final_state,
        times,
        snapshots,
        max_boundary_occupation: max_edge,
    })
}

/// `(1 + i h H/2) c' = (1 - i h H/2) c`, solved by the Thomas algorithm (with a
/// Sherman-Morrison correction for the periodic corners).
struct CrankNicolson {
    rhs: Vec<Complex64>,
    upper: Vec<Complex64>,
    diag: Vec<Complex64>,
    corr: Vec<Complex64>,
}

impl CrankNicolson {
    fn new(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            rhs: vec![z; n],
            upper: vec![z; n],
            diag: vec![z; n],
            corr: vec![z; n],
        }
    }

    fn step(&mut self, ham: &ChainHamiltonian, h: f64, c: &mut [Complex64]) {
        let n = ham.dim();
        let i_half = Complex64::new(0.0, 0.5 * h);
        let hc = ham.apply(c);
        for k in 0..n {
            self.rhs[k] = c[k] - i_half * hc[k];
        }
        let off = i_half * ham.hopping;
        for (d, hd) in self.diag.iter_mut().zip(&ham.diagonal) {
            *d = Complex64::new(1.0, 0.0) + i_half * hd;
        }
        if !ham.periodic {
            let rhs = std::mem::take(&mut self.rhs);
            self.thomas(off, &rhs, c);
            self.rhs = rhs;
            return;
        }
        // A = T + u vᵀ with u = (γ, 0, .., 0, off), v = (1, 0, .., 0, off/γ).
        let gamma = -self.diag[0];
        self.diag[0] -= gamma;
        self.diag[n - 1] -= off * off / gamma;
        let rhs = std::mem::take(&mut self.rhs);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        self.thomas(off, &rhs, &mut y);
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[0] = gamma;
        u[n - 1] = off;
        let mut q = std::mem::take(&mut self.corr);
        self.thomas(off, &u, &mut q);
        let vy = y[0] + y[n - 1] * off / gamma;
        let vq = q[0] + q[n - 1] * off / gamma;
        let factor = vy / (Complex64::new(1.0, 0.0) + vq);
        for k in 0..n {
            c[k] = y[k] - factor * q[k];
        }
        self.corr = q;
        self.rhs = rhs;
    }

    /// Solves the tridiagonal system with diagonal `self.diag` and constant
    /// off-diagonal `off`.
    fn thomas(&mut self, off: Complex64, rhs: &[Complex64], out: &mut [Complex64]) {
        let n = rhs.len();
        let mut denom = self.diag[0];
        self.upper[0] = off / denom;
        out[0] = rhs[0] / denom;
        for k in 1..n {
            denom = self.diag[k] - off * self.upper[k - 1];
            self.upper[k] = off / denom;
            out[k] = (rhs[k] - off * out[k - 1]) / denom;
        }
        for k in (0..n - 1).rev() {
            let next = out[k + 1];
            out[k] -= self.upper[k] * next;
        }
    }
}

fn check_domain(psi: &WaveFunction, cfg: &ChainConfig) -> Result<()> {
    let g = psi.grid();
    let first = cfg.position(0);
    let last = cfg.position(cfg.n_spins - 1);
    if first < g.x_min() - 1e-9 || last > g.x_max() + 1e-9 {
        return Err(Error::Precondition(format!(
            "chain spans [{first}, {last}] but the wavefunction grid is {g}"
        )));
    }
    Ok(())
}

/// `|Σ_n conj(c_n) ψ(x_n) sqrt(a)|²`, with ψ interpolated band-limited.
pub fn chain_continuum_overlap(
    chain: &ChainState,
    cfg: &ChainConfig,
    psi: &WaveFunction,
) -> Result<f64> {
    check_domain(psi, cfg)?;
    if chain.amplitudes.len() != cfg.n_spins {
        return Err(Error::InvalidParameter(format!(
            "state has {} amplitudes for a chain of {} spins",
            chain.amplitudes.len(),
            cfg.n_spins
        )));
    }
    let values = psi.interpolate(&cfg.positions())?;
    let s: Complex64 = chain
        .amplitudes
        .iter()
        .zip(values)
        .map(|(c, v)| c.conj() * v)
        .sum();
    Ok((s * cfg.spacing.sqrt()).norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, Grid1D};
    use crate::guides::InitialState;
    use crate::propagator::{SolverSettings, SplitStepPropagator};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ring(n: usize, field: ChainField) -> ChainConfig {
        ChainConfig::new(n, 1.0, 1.0, 0.0, field, ChainBoundary::Periodic).unwrap()
    }

    fn window(t_f: f64) -> Scenario {
        Scenario::new(
            PhysicalConstants::default(),
            vec![GuideTrajectory::Stationary { x0: 0.0 }],
            Grid1D::standard(),
            (0.0, t_f),
            SolverSettings::default(),
            InitialState::Ground { guide: 0 },
        )
        .unwrap()
    }

    fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    #[test]
    fn ring_dispersion_is_one_minus_cos() {
        let n = 24;
        let ham = single_excitation_hamiltonian(&ring(n, ChainField::Zero), 0.0).unwrap();
        let numeric = sorted_eigenvalues(ham.to_dense());
        let mut analytic: Vec<f64> = (0..n)
            .map(|m| 1.0 - (2.0 * PI * m as f64 / n as f64).cos())
            .collect();
        analytic.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in numeric.iter().zip(&analytic) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn matrix_is_symmetric_and_open_ends_cost_half() {
        let cfg = ChainConfig::new(
            9,
            2.0,
            0.5,
            -2.0,
            ChainField::Uniform(-0.3),
            ChainBoundary::Open,
        )
        .unwrap();
        let ham = single_excitation_hamiltonian(&cfg, 0.0).unwrap();
        let m = ham.to_dense();
        assert_eq!((&m - m.transpose()).abs().max(), 0.0);
        assert_abs_diff_eq!(m[(0, 0)], 1.0 - 0.3);
        assert_abs_diff_eq!(m[(4, 4)], 2.0 - 0.3);
        assert_abs_diff_eq!(m[(4, 5)], -1.0);
    }

    #[test]
    fn uniform_field_shifts_spectrum_rigidly() {
        let n = 16;
        let base = single_excitation_hamiltonian(&ring(n, ChainField::Zero), 0.0).unwrap();
        let shifted =
            single_excitation_hamiltonian(&ring(n, ChainField::Uniform(-0.7)), 0.0).unwrap();
        let a = base.to_dense().symmetric_eigen();
        let b = shifted.to_dense().symmetric_eigen();
        let mut ea: Vec<f64> = a.eigenvalues.iter().copied().collect();
        let mut eb: Vec<f64> = b.eigenvalues.iter().copied().collect();
        ea.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in ea.iter().zip(&eb) {
            assert_abs_diff_eq!(x - 0.7, y, epsilon = 1e-12);
        }
        // Every eigenvector of the base matrix is an eigenvector of the shifted one.
        let hs = shifted.to_dense();
        for (k, val) in a.eigenvalues.iter().enumerate() {
            let v = a.eigenvectors.column(k);
            let r = &hs * v - v * (val - 0.7);
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_only_acquires_a_phase() {
        let cfg = ChainConfig::new(
            40,
            1.0,
            1.0,
            0.0,
            ChainField::Uniform(0.2),
            ChainBoundary::Open,
        )
        .unwrap();
        let ham = single_excitation_hamiltonian(&cfg, 0.0).unwrap();
        let eig = ham.to_dense().symmetric_eigen();
        let v: Vec<Complex64> = eig
            .eigenvectors
            .column(3)
            .iter()
            .map(|x| Complex64::new(*x, 0.0))
            .collect();
        let start = ChainState::new(v);
        let run = evolve_chain(&start, &cfg, &window(10.0)).unwrap();
        for (p, q) in start
            .probabilities()
            .iter()
            .zip(run.final_state.probabilities())
        {
            assert!((p - q).abs() < 1e-8);
        }
        assert!(run.norm_drift < 1e-9);
    }

    #[test]
    fn periodic_evolution_commutes_with_translation() {
        let n = 32;
        let cfg = ring(n, ChainField::Zero);
        let amps: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = i as f64 - 10.0;
                Complex64::from_polar((-x * x / 8.0).exp(), 0.4 * i as f64)
            })
            .collect();
        let mut start = ChainState::new(amps);
        start.normalize().unwrap();
        let mut shifted = start.clone();
        shifted.amplitudes.rotate_right(1);

        let scn = window(3.0);
        let mut a = evolve_chain(&start, &cfg, &scn).unwrap().final_state;
        let b = evolve_chain(&shifted, &cfg, &scn).unwrap().final_state;
        a.amplitudes.rotate_right(1);
        for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn self_overlap_and_parity_orthogonality() {
        let g = Grid1D::standard();
        let psi = sample(g, |x| Complex64::new(1.0 / x.cosh() / 2f64.sqrt(), 0.0)).unwrap();
        let cfg = ChainConfig::new(
            2000,
            1.0,
            g.dx() * 0.99,
            g.x_min() + 0.5,
            ChainField::Zero,
            ChainBoundary::Open,
        )
        .unwrap();
        let chain = ChainState::from_wavefunction(&psi, &cfg).unwrap();
        assert!(chain_continuum_overlap(&chain, &cfg, &psi).unwrap() >= 0.9999);

        let odd = sample(g, |x| Complex64::new(x.tanh() / x.cosh(), 0.0)).unwrap();
        let cfg_sym =
            ChainConfig::new(401, 1.0, 0.1, -20.0, ChainField::Zero, ChainBoundary::Open).unwrap();
        let even_chain = ChainState::from_wavefunction(&psi, &cfg_sym).unwrap();
        assert!(chain_continuum_overlap(&even_chain, &cfg_sym, &odd).unwrap() <= 1e-6);
    }

    #[test]
    fn overlap_rejects_chains_outside_the_grid() {
        let g = Grid1D::new(-10.0, 10.0, 256).unwrap();
        let psi = sample(g, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap();
        let cfg =
            ChainConfig::new(100, 1.0, 0.5, -5.0, ChainField::Zero, ChainBoundary::Open).unwrap();
        let chain = ChainState::new(vec![Complex64::new(0.1, 0.0); 100]);
        assert!(matches!(
            chain_continuum_overlap(&chain, &cfg, &psi),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn stationary_well_profile_matches_continuum() {
        let scn = window(10.0);
        let cfg = ChainConfig::for_scenario(&scn, 0.2).unwrap();
        let (psi0, _) = scn.initial_state().unwrap();
        let start = ChainState::from_wavefunction(&psi0, &cfg).unwrap();
        let run = evolve_chain(&start, &cfg, &scn).unwrap();
        assert!(run.trusted());
        assert!(run.norm_drift < 1e-9);

        let fin = SplitStepPropagator::new(&scn)
            .unwrap()
            .evolve_final(&psi0, &scn)
            .unwrap()
            .psi;
        let cont = fin.interpolate(&cfg.positions()).unwrap();
        let l2: f64 = run
            .final_state
            .probabilities()
            .iter()
            .zip(&cont)
            .map(|(p, c)| (p / cfg.spacing - c.norm_sqr()).powi(2) * cfg.spacing)
            .sum::<f64>()
            .sqrt();
        assert!(l2 < 0.01, "{l2}");
    }

    #[test]
    fn moving_guide_carries_the_chain_magnon() {
        let scn = Scenario::new(
            PhysicalConstants::default(),
            vec![GuideTrajectory::Linear { x0: -1.5, v: 0.3 }],
            Grid1D::standard(),
            (0.0, 10.0),
            SolverSettings {
                snapshot_stride: 200,
                ..Default::default()
            },
            InitialState::Ground { guide: 0 },
        )
        .unwrap();
        let cfg = ChainConfig::for_scenario(&scn, 0.1).unwrap();
        let (psi0, _) = scn.initial_state().unwrap();
        let start = ChainState::from_wavefunction(&psi0, &cfg).unwrap();
        let run = evolve_chain(&start, &cfg, &scn).unwrap();
        for (t, probs) in run.times.iter().zip(&run.snapshots) {
            let state = ChainState::new(
                probs
                    .iter()
                    .map(|p| Complex64::new(p.sqrt(), 0.0))
                    .collect(),
            );
            let guide = scn.guides[0].center(*t).unwrap();
            assert!((state.centroid(&cfg) - guide).abs() < 0.1, "t = {t}");
        }
    }

    #[test]
    fn edge_occupation_is_flagged() {
        let scn = Scenario::new(
            PhysicalConstants::default(),
            vec![GuideTrajectory::Linear { x0: 30.0, v: 1.0 }],
            Grid1D::standard(),
            (0.0, 5.0),
            SolverSettings::default(),
            InitialState::Ground { guide: 0 },
        )
        .unwrap();
        let cfg = ChainConfig::for_scenario(&scn, 0.2).unwrap();
        let (psi0, _) = scn.initial_state().unwrap();
        let start = ChainState::from_wavefunction(&psi0, &cfg).unwrap();
        let run = evolve_chain(&start, &cfg, &scn).unwrap();
        assert!(!run.trusted());
    }
}
