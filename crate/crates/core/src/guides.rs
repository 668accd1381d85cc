//! Guide trajectories, the summed Pöschl-Teller potential and the initial
//! magnon states.
//!
//! A guide is a moving well `-B0 sech²[(x - x0(t)) / w]`. Several guides are
//! combined by plain summation. The bound mode of a single well (for
//! `2 B0 w² / J = 2`) is `sech[(x - x0)/w] / sqrt(2w)` with energy `-B0/2`;
//! a guide moving at velocity `v` carries it with the Galilean boost phase
//! `exp(i v x / J)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid1D, WaveFunction};
use crate::propagator::SolverSettings;

/// Guides must start at least this many well widths inside the grid.
pub const EDGE_MARGIN_WIDTHS: f64 = 5.0;

/// Two modes closer than this (in well widths) overlap noticeably.
pub const SUPERPOSITION_SEPARATION_WIDTHS: f64 = 4.0;

const TIME_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Exchange strength; the kinetic term is `-(J/2) ∂²`.
    #[serde(rename = "J", default = "one")]
    pub j: f64,
    /// Well depth.
    #[serde(rename = "B0", default = "one")]
    pub b0: f64,
    /// Well width.
    #[serde(default = "one")]
    pub w: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            j: 1.0,
            b0: 1.0,
            w: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("J", self.j), ("B0", self.b0), ("w", self.w)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `2 B0 w² / J`; the sech mode is an exact eigenstate only when this is 2.
    pub fn well_strength(&self) -> f64 {
        2.0 * self.b0 * self.w * self.w / self.j
    }

    /// Warning text when the sech mode is not the exact ground state.
    pub fn mode_warning(&self) -> Option<String> {
        let s = self.well_strength();
        if (s - 2.0).abs() > 1e-12 {
            Some(format!(
                "2*B0*w^2/J = {s}; the sech mode is only the exact ground state when it equals 2"
            ))
        } else {
            None
        }
    }
}

/// How the corner angle turns into the asymptotic guide slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeLaw {
    /// slope = tan θ
    #[default]
    Tan,
    /// slope = tanh θ; differs from `Tan` by O(θ³).
    Tanh,
}

impl SlopeLaw {
    pub fn slope(self, theta: f64) -> f64 {
        match self {
            SlopeLaw::Tan => theta.tan(),
            SlopeLaw::Tanh => theta.tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "left_to_right")]
    LeftToRight,
    #[serde(rename = "right_to_left")]
    RightToLeft,
}

fn default_x_l() -> f64 {
    10.0
}

/// Centre path `x0(t)` of one guide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GuideTrajectory {
    Stationary {
        x0: f64,
    },
    Linear {
        x0: f64,
        v: f64,
    },
    /// `x0(t) = sqrt(r + s² (t - t_f/2)²) + s (t - t_f/2)` with `s` the slope
    /// given by `slope` applied to `theta`. `mirrored` negates the path.
    Corner {
        r: f64,
        theta: f64,
        t_f: f64,
        #[serde(default)]
        slope: SlopeLaw,
        #[serde(default)]
        mirrored: bool,
    },
    /// One branch of the parallel splitter. With
    /// `f(t) = sqrt(r + (4mt + d - x_l)²/16) - mt + (d + x_l)/4` the right
    /// branch follows `f(t)` before `t_f/2` and `f(t_f - t)` after it; the
    /// left branch is its mirror image. For `x_l >> d` the branches start
    /// near `±x_l/2` and run parallel at `±d/2`.
    ParallelSplitterBranch {
        r: f64,
        d: f64,
        m: f64,
        #[serde(default = "default_x_l")]
        x_l: f64,
        t_f: f64,
        side: Side,
    },
    /// Straight arm of an X-junction: `±(x_l/2 - tan(θ/2) t)`, the left-to-right
    /// arm starting at `-x_l/2`.
    XBranch {
        x_l: f64,
        theta: f64,
        direction: Direction,
    },
}

impl GuideTrajectory {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match *self {
            GuideTrajectory::Stationary { x0 } => finite("x0", x0),
            GuideTrajectory::Linear { x0, v } => {
                finite("x0", x0)?;
                finite("v", v)
            }
            GuideTrajectory::Corner {
                r,
                theta,
                t_f,
                slope,
                ..
            } => {
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "corner sharpness r must be >= 0, got {r}"
                    )));
                }
                if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
                    return Err(Error::InvalidParameter(format!(
                        "corner angle must lie in (0, pi/2), got {theta}"
                    )));
                }
                if !(t_f > 0.0 && t_f.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "corner t_f must be positive, got {t_f}"
                    )));
                }
                finite("slope", slope.slope(theta))
            }
            GuideTrajectory::ParallelSplitterBranch {
                r, d, m, x_l, t_f, ..
            } => {
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "splitter sharpness r must be >= 0, got {r}"
                    )));
                }
                finite("d", d)?;
                finite("m", m)?;
                finite("x_l", x_l)?;
                if !(t_f > 0.0 && t_f.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "splitter t_f must be positive, got {t_f}"
                    )));
                }
                Ok(())
            }
            GuideTrajectory::XBranch { x_l, theta, .. } => {
                finite("x_l", x_l)?;
                let s = (theta / 2.0).tan();
                if !(theta > 0.0 && s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "X-junction angle {theta} gives crossing speed tan(theta/2) = {s}; it must be positive and finite"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Closed time interval on which the path is defined, if bounded.
    pub fn time_domain(&self) -> Option<(f64, f64)> {
        match *self {
            GuideTrajectory::Corner { t_f, .. }
            | GuideTrajectory::ParallelSplitterBranch { t_f, .. } => Some((0.0, t_f)),
            _ => None,
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time {t} is not finite")));
        }
        if let Some((start, end)) = self.time_domain() {
            if t < start - TIME_SLACK || t > end + TIME_SLACK {
                return Err(Error::TimeOutOfRange { t, start, end });
            }
        }
        Ok(())
    }

    pub fn center(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match *self {
            GuideTrajectory::Stationary { x0 } => x0,
            GuideTrajectory::Linear { x0, v } => x0 + v * t,
            GuideTrajectory::Corner {
                r,
                theta,
                t_f,
                slope,
                mirrored,
            } => {
                let s = slope.slope(theta);
                let tau = t - 0.5 * t_f;
                let x = (r + s * s * tau * tau).sqrt() + s * tau;
                if mirrored {
                    -x
                } else {
                    x
                }
            }
            GuideTrajectory::ParallelSplitterBranch {
                r,
                d,
                m,
                x_l,
                t_f,
                side,
            } => {
                let local = if t < 0.5 * t_f { t } else { t_f - t };
                let x = splitter_profile(r, d, m, x_l, local);
                match side {
                    Side::Right => x,
                    Side::Left => -x,
                }
            }
            GuideTrajectory::XBranch {
                x_l,
                theta,
                direction,
            } => {
                let x = 0.5 * x_l - (0.5 * theta).tan() * t;
                match direction {
                    Direction::RightToLeft => x,
                    Direction::LeftToRight => -x,
                }
            }
        })
    }

    /// dx0/dt. At a kink (r = 0) the right-sided derivative is returned.
    pub fn velocity(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match *self {
            GuideTrajectory::Stationary { .. } => 0.0,
            GuideTrajectory::Linear { v, .. } => v,
            GuideTrajectory::Corner {
                r,
                theta,
                t_f,
                slope,
                mirrored,
            } => {
                let s = slope.slope(theta);
                let tau = t - 0.5 * t_f;
                let root = (r + s * s * tau * tau).sqrt();
                let v = if root == 0.0 {
                    // r = 0 exactly at the kink; to the right the path is 2 s τ.
                    2.0 * s
                } else {
                    s * s * tau / root + s
                };
                if mirrored {
                    -v
                } else {
                    v
                }
            }
            GuideTrajectory::ParallelSplitterBranch {
                r,
                d,
                m,
                x_l,
                t_f,
                side,
            } => {
                let v = if t < 0.5 * t_f {
                    splitter_slope(r, d, m, x_l, t, 1.0)
                } else {
                    // d/dt f(t_f - t) = -f'(t_f - t); "right-sided" in t means
                    // left-sided in the local argument.
                    -splitter_slope(r, d, m, x_l, t_f - t, -1.0)
                };
                match side {
                    Side::Right => v,
                    Side::Left => -v,
                }
            }
            GuideTrajectory::XBranch {
                theta, direction, ..
            } => {
                let s = (0.5 * theta).tan();
                match direction {
                    Direction::RightToLeft => -s,
                    Direction::LeftToRight => s,
                }
            }
        })
    }

    /// The same guide reflected through x = 0.
    pub fn mirrored(&self) -> GuideTrajectory {
        match self.clone() {
            GuideTrajectory::Stationary { x0 } => GuideTrajectory::Stationary { x0: -x0 },
            GuideTrajectory::Linear { x0, v } => GuideTrajectory::Linear { x0: -x0, v: -v },
            GuideTrajectory::Corner {
                r,
                theta,
                t_f,
                slope,
                mirrored,
            } => GuideTrajectory::Corner {
                r,
                theta,
                t_f,
                slope,
                mirrored: !mirrored,
            },
            GuideTrajectory::ParallelSplitterBranch {
                r,
                d,
                m,
                x_l,
                t_f,
                side,
            } => GuideTrajectory::ParallelSplitterBranch {
                r,
                d,
                m,
                x_l,
                t_f,
                side: match side {
                    Side::Left => Side::Right,
                    Side::Right => Side::Left,
                },
            },
            GuideTrajectory::XBranch {
                x_l,
                theta,
                direction,
            } => GuideTrajectory::XBranch {
                x_l,
                theta,
                direction: match direction {
                    Direction::LeftToRight => Direction::RightToLeft,
                    Direction::RightToLeft => Direction::LeftToRight,
                },
            },
        }
    }
}

fn splitter_profile(r: f64, d: f64, m: f64, x_l: f64, t: f64) -> f64 {
    let u = 4.0 * m * t + d - x_l;
    (r + u * u / 16.0).sqrt() - m * t + 0.25 * (d + x_l)
}

/// f'(t); `side` selects the one-sided limit (+1 right, -1 left) at a kink.
fn splitter_slope(r: f64, d: f64, m: f64, x_l: f64, t: f64, side: f64) -> f64 {
    let u = 4.0 * m * t + d - x_l;
    let root = (r + u * u / 16.0).sqrt();
    if root == 0.0 {
        // |mt + (d - x_l)/4| - mt: slope m·sign(m·side) - m
        m.abs() * side - m
    } else {
        m * u / (4.0 * root) - m
    }
}

/// sech²(u) evaluated without overflow.
#[inline]
pub(crate) fn sech2(u: f64) -> f64 {
    let e = (-2.0 * u.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Which guide(s) the magnon starts in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Bound mode of one guide.
    Ground { guide: usize },
    /// `[ψ_first + e^{iα} ψ_second] / sqrt(2)`, renormalized.
    Superposition {
        first: usize,
        second: usize,
        alpha: f64,
    },
}

/// A complete experiment: guides, constants, grid, time window, numerics and
/// the initial-state recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub constants: PhysicalConstants,
    pub guides: Vec<GuideTrajectory>,
    pub grid: Grid1D,
    pub t0: f64,
    pub t_f: f64,
    pub solver: SolverSettings,
    pub initial: InitialState,
}

impl Scenario {
    pub fn new(
        constants: PhysicalConstants,
        guides: Vec<GuideTrajectory>,
        grid: Grid1D,
        (t0, t_f): (f64, f64),
        solver: SolverSettings,
        initial: InitialState,
    ) -> Result<Self> {
        let scn = Self {
            constants,
            guides,
            grid,
            t0,
            t_f,
            solver,
            initial,
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.solver.validate(&self.grid)?;
        if self.guides.is_empty() {
            return Err(Error::InvalidParameter("scenario has no guides".into()));
        }
        if !(self.t0.is_finite() && self.t_f.is_finite()) || self.t_f < self.t0 {
            return Err(Error::InvalidParameter(format!(
                "time window [{}, {}] is invalid",
                self.t0, self.t_f
            )));
        }
        let margin = EDGE_MARGIN_WIDTHS * self.constants.w;
        for (index, g) in self.guides.iter().enumerate() {
            g.validate().map_err(|e| match e {
                Error::InvalidParameter(msg) => {
                    Error::InvalidParameter(format!("guide {index}: {msg}"))
                }
                other => other,
            })?;
            if let Some((start, end)) = g.time_domain() {
                if self.t0 < start - TIME_SLACK || self.t_f > end + TIME_SLACK {
                    return Err(Error::InvalidParameter(format!(
                        "guide {index} is defined on [{start}, {end}] but the scenario runs over [{}, {}]",
                        self.t0, self.t_f
                    )));
                }
            }
            let center = g.center(self.t0)?;
            if center < self.grid.x_min() + margin || center > self.grid.x_max() - margin {
                return Err(Error::GuideNearBoundary {
                    index,
                    center,
                    t: self.t0,
                    margin,
                    x_min: self.grid.x_min(),
                    x_max: self.grid.x_max(),
                });
            }
        }
        let n = self.guides.len();
        let check = |i: usize| {
            if i < n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "initial state refers to guide {i} but only {n} guides exist"
                )))
            }
        };
        match self.initial {
            InitialState::Ground { guide } => check(guide)?,
            InitialState::Superposition {
                first,
                second,
                alpha,
            } => {
                check(first)?;
                check(second)?;
                if first == second {
                    return Err(Error::InvalidParameter(
                        "superposition needs two distinct guides".into(),
                    ));
                }
                if !alpha.is_finite() {
                    return Err(Error::InvalidParameter("alpha must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// B(x_j, t) at every grid point.
    pub fn potential(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.grid.n_points()];
        self.potential_into(t, &mut out)?;
        Ok(out)
    }

    pub fn potential_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.grid.n_points());
        out.iter_mut().for_each(|v| *v = 0.0);
        let inv_w = 1.0 / self.constants.w;
        let (x_min, dx) = (self.grid.x_min(), self.grid.dx());
        for g in &self.guides {
            let c = g.center(t)?;
            for (j, v) in out.iter_mut().enumerate() {
                let x = x_min + j as f64 * dx;
                *v -= self.constants.b0 * sech2((x - c) * inv_w);
            }
        }
        Ok(())
    }

    /// The initial wavefunction plus any warnings raised while building it.
    pub fn initial_state(&self) -> Result<(WaveFunction, Vec<String>)> {
        let mut warnings: Vec<String> = self.constants.mode_warning().into_iter().collect();
        let psi = match self.initial {
            InitialState::Ground { guide } => {
                ground_mode(&self.guides[guide], self.t0, &self.constants, self.grid)?
            }
            InitialState::Superposition {
                first,
                second,
                alpha,
            } => {
                let (psi, warning) = initial_superposition(
                    &self.guides[first],
                    &self.guides[second],
                    alpha,
                    self.t0,
                    &self.constants,
                    self.grid,
                )?;
                warnings.extend(warning);
                psi
            }
        };
        Ok((psi, warnings))
    }
}

/// Bound mode of a moving guide:
/// `exp(i k x) sech[(x - x0(t))/w] / sqrt(2w)` with `k = v(t)/J`.
pub fn ground_mode(
    traj: &GuideTrajectory,
    t: f64,
    constants: &PhysicalConstants,
    grid: Grid1D,
) -> Result<WaveFunction> {
    constants.validate()?;
    let x0 = traj.center(t)?;
    let k = traj.velocity(t)? / constants.j;
    let margin = EDGE_MARGIN_WIDTHS * constants.w;
    if x0 < grid.x_min() + margin || x0 > grid.x_max() - margin {
        return Err(Error::Precondition(format!(
            "guide centre {x0} at t = {t} lies within {margin} of the grid edge; the mode tail would be truncated"
        )));
    }
    let k_max = 0.5 * PI / grid.dx();
    if k.abs() > k_max {
        return Err(Error::Precondition(format!(
            "guide momentum {k} at t = {t} exceeds the resolvable {k_max}; refine the grid"
        )));
    }
    let w = constants.w;
    let amp = 1.0 / (2.0 * w).sqrt();
    grid::sample(grid, |x| {
        let u = (x - x0) / w;
        // sech without overflow for large |u|
        let e = (-u.abs()).exp();
        let sech = 2.0 * e / (1.0 + e * e);
        Complex64::from_polar(amp * sech, k * x)
    })
}

/// `[ψ_a + e^{iα} ψ_b]/sqrt(2)` renormalized to exactly one. The warning is
/// set when the two modes overlap enough that the plain 1/sqrt(2) would be off.
pub fn initial_superposition(
    a: &GuideTrajectory,
    b: &GuideTrajectory,
    alpha: f64,
    t: f64,
    constants: &PhysicalConstants,
    grid: Grid1D,
) -> Result<(WaveFunction, Option<String>)> {
    let psi_a = ground_mode(a, t, constants, grid)?;
    let psi_b = ground_mode(b, t, constants, grid)?;
    let separation = (a.center(t)? - b.center(t)?).abs();
    let warning = (separation < SUPERPOSITION_SEPARATION_WIDTHS * constants.w).then(|| {
        format!("superposed guides are only {separation} apart at t = {t}; state renormalized")
    });
    let mut psi = WaveFunction::linear_combination(
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        &psi_a,
        Complex64::from_polar(FRAC_1_SQRT_2, alpha),
        &psi_b,
    )?;
    psi.normalize()?;
    Ok((psi, warning))
}
