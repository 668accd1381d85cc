//! Ready-made scenarios for the standard geometries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::guides::{
    Direction, GuideTrajectory, InitialState, PhysicalConstants, Scenario, Side, SlopeLaw,
};
use crate::propagator::SolverSettings;

/// Arm separation used for X-junctions unless stated otherwise.
pub const DEFAULT_X_L: f64 = 10.0;

/// Everything about a run that is not geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub constants: PhysicalConstants,
    pub grid: Grid1D,
    pub solver: SolverSettings,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::default(),
            grid: Grid1D::standard(),
            solver: SolverSettings::default(),
        }
    }
}

impl Numerics {
    /// Halves `dt` and doubles the number of grid points.
    pub fn refined(&self) -> Self {
        Self {
            grid: self.grid.refined(),
            solver: SolverSettings {
                dt: 0.5 * self.solver.dt,
                snapshot_stride: self.solver.snapshot_stride * 2,
                ..self.solver
            },
            ..*self
        }
    }

    fn scenario(
        &self,
        guides: Vec<GuideTrajectory>,
        t_f: f64,
        initial: InitialState,
    ) -> Result<Scenario> {
        Scenario::new(
            self.constants,
            guides,
            self.grid,
            (0.0, t_f),
            self.solver,
            initial,
        )
    }
}

pub fn stationary(num: &Numerics, x0: f64, t_f: f64) -> Result<Scenario> {
    num.scenario(
        vec![GuideTrajectory::Stationary { x0 }],
        t_f,
        InitialState::Ground { guide: 0 },
    )
}

pub fn linear(num: &Numerics, x0: f64, v: f64, t_f: f64) -> Result<Scenario> {
    num.scenario(
        vec![GuideTrajectory::Linear { x0, v }],
        t_f,
        InitialState::Ground { guide: 0 },
    )
}

pub fn corner(num: &Numerics, r: f64, theta: f64, t_f: f64, slope: SlopeLaw) -> Result<Scenario> {
    num.scenario(
        vec![GuideTrajectory::Corner {
            r,
            theta,
            t_f,
            slope,
            mirrored: false,
        }],
        t_f,
        InitialState::Ground { guide: 0 },
    )
}

/// Run time `x_l / tan(θ/2)` at which the two arms have swapped ends.
pub fn xjunction_duration(theta: f64, x_l: f64) -> Result<f64> {
    let s = (0.5 * theta).tan();
    if !(s > 0.0 && s.is_finite() && x_l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "X-junction with theta = {theta}, x_l = {x_l} has no crossing (tan(theta/2) = {s})"
        )));
    }
    Ok(x_l / s)
}

fn xjunction_guides(theta: f64, x_l: f64) -> Vec<GuideTrajectory> {
    vec![
        GuideTrajectory::XBranch {
            x_l,
            theta,
            direction: Direction::LeftToRight,
        },
        GuideTrajectory::XBranch {
            x_l,
            theta,
            direction: Direction::RightToLeft,
        },
    ]
}

/// Guide 0 runs left to right and carries the excitation; guide 1 runs right
/// to left.
pub fn xjunction(num: &Numerics, theta: f64, x_l: f64) -> Result<Scenario> {
    let t_f = xjunction_duration(theta, x_l)?;
    num.scenario(
        xjunction_guides(theta, x_l),
        t_f,
        InitialState::Ground { guide: 0 },
    )
}

/// Both arms populated: `[ψ_LR + e^{iα} ψ_RL]/sqrt(2)`.
pub fn xjunction_superposition(
    num: &Numerics,
    theta: f64,
    x_l: f64,
    alpha: f64,
) -> Result<Scenario> {
    let t_f = xjunction_duration(theta, x_l)?;
    num.scenario(
        xjunction_guides(theta, x_l),
        t_f,
        InitialState::Superposition {
            first: 0,
            second: 1,
            alpha,
        },
    )
}

/// Two stationary guides at `∓d/2`, excitation in the left one.
pub fn coupled_pair(num: &Numerics, d: f64, t_f: f64) -> Result<Scenario> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "guide separation must be positive, got {d}"
        )));
    }
    num.scenario(
        vec![
            GuideTrajectory::Stationary { x0: -0.5 * d },
            GuideTrajectory::Stationary { x0: 0.5 * d },
        ],
        t_f,
        InitialState::Ground { guide: 0 },
    )
}

/// Both splitter branches, excitation in the left one.
pub fn parallel_splitter(
    num: &Numerics,
    r: f64,
    d: f64,
    m: f64,
    x_l: f64,
    t_f: f64,
) -> Result<Scenario> {
    let branch = |side| GuideTrajectory::ParallelSplitterBranch {
        r,
        d,
        m,
        x_l,
        t_f,
        side,
    };
    num.scenario(
        vec![branch(Side::Left), branch(Side::Right)],
        t_f,
        InitialState::Ground { guide: 0 },
    )
}
