//! Uniform periodic grid and the wavefunction stored on it.
//!
//! The grid follows the FFT convention: `x_j = x_min + j dx` for
//! `j = 0..n_points` and `x_max` is the wrap point, never a stored sample.
//! Integrals are plain Riemann sums, which are spectrally accurate for smooth
//! functions that decay (or are periodic) across the domain.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridParams")]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

/// Unvalidated grid fields as read from a config file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GridParams {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        let g = Grid1D::standard();
        Self {
            x_min: g.x_min,
            x_max: g.x_max,
            n_points: g.n_points,
        }
    }
}

impl TryFrom<GridParams> for Grid1D {
    type Error = Error;

    fn try_from(s: GridParams) -> Result<Self> {
        Grid1D::new(s.x_min, s.x_max, s.n_points)
    }
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite x_max > x_min, got [{x_min}, {x_max})"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        let grid = Self {
            x_min,
            x_max,
            n_points,
        };
        if !(grid.dx() > 0.0 && grid.dx().is_finite()) {
            return Err(Error::InvalidParameter("grid spacing underflows".into()));
        }
        Ok(grid)
    }

    /// [-40, 40) with 2048 points.
    pub fn standard() -> Self {
        Self {
            x_min: -40.0,
            x_max: 40.0,
            n_points: 2048,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.n_points).map(move |j| self.x_min + j as f64 * dx)
    }

    /// Angular wavenumbers in FFT order (0, 1, .., N/2-1, -N/2, .., -1) * 2π/L.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points as i64;
        let dk = 2.0 * std::f64::consts::PI / self.length();
        (0..n)
            .map(|j| {
                let m = if j < (n + 1) / 2 { j } else { j - n };
                m as f64 * dk
            })
            .collect()
    }

    /// Same grid with twice the resolution over the same domain.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points,
            ..*self
        }
    }
}

impl fmt::Display for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}) x {}", self.x_min, self.x_max, self.n_points)
    }
}

/// Complex amplitudes ψ(x_j) over a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn from_amplitudes(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// |ψ_j|² at every grid point.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// Rescales to unit norm. Fails on the zero state.
    pub fn normalize(&mut self) -> Result<()> {
        let n = norm_squared(self);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Precondition(format!(
                "cannot normalize a state with norm² = {n}"
            )));
        }
        self.scale(Complex64::new(1.0 / n.sqrt(), 0.0));
        Ok(())
    }

    /// αψ + βφ on the shared grid.
    pub fn linear_combination(
        alpha: Complex64,
        a: &WaveFunction,
        beta: Complex64,
        b: &WaveFunction,
    ) -> Result<WaveFunction> {
        ensure_same_grid(a, b)?;
        let amplitudes = a
            .amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        Ok(WaveFunction {
            grid: a.grid,
            amplitudes,
        })
    }
}

impl WaveFunction {
    fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.amplitudes.clone();
        FftPlanner::new()
            .plan_fft_forward(buf.len())
            .process(&mut buf);
        let inv_n = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|c| *c *= inv_n);
        buf
    }

    /// Band-limited (trigonometric) interpolation at arbitrary positions.
    /// The Nyquist mode is split evenly between ±k so real data stays real.
    pub fn interpolate(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let n = self.grid.n_points;
        let coeffs = self.spectrum();
        let dk = 2.0 * PI / self.grid.length();
        let half = n / 2;
        xs.iter()
            .map(|&x| {
                if !x.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "cannot interpolate at x = {x}"
                    )));
                }
                let z = Complex64::from_polar(1.0, dk * (x - self.grid.x_min));
                let zi = z.conj();
                let mut acc = coeffs[0];
                let (mut up, mut down) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
                for m in 1..half {
                    up *= z;
                    down *= zi;
                    acc += coeffs[m] * up + coeffs[n - m] * down;
                }
                if n.is_multiple_of(2) {
                    up *= z;
                    down *= zi;
                    acc += coeffs[half] * 0.5 * (up + down);
                } else {
                    up *= z;
                    down *= zi;
                    acc += coeffs[half] * up + coeffs[n - half] * down;
                }
                Ok(acc)
            })
            .collect()
    }

    /// ψ(x - s) by a Fourier phase ramp, wrapping periodically.
    pub fn shifted(&self, s: f64) -> WaveFunction {
        let n = self.grid.n_points;
        let mut buf = self.spectrum();
        for (j, (c, k)) in buf.iter_mut().zip(self.grid.wavenumbers()).enumerate() {
            if n.is_multiple_of(2) && j == n / 2 {
                *c *= (k * s).cos();
            } else {
                *c *= Complex64::from_polar(1.0, -k * s);
            }
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        WaveFunction {
            grid: self.grid,
            amplitudes: buf,
        }
    }
}

fn ensure_same_grid(a: &WaveFunction, b: &WaveFunction) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(a.grid.to_string(), b.grid.to_string()));
    }
    Ok(())
}

/// ⟨a|b⟩ = Σ_j conj(a_j) b_j dx.
pub fn inner_product(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    ensure_same_grid(a, b)?;
    let sum: Complex64 = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(sum * a.grid.dx())
}

pub fn norm_squared(a: &WaveFunction) -> f64 {
    a.amplitudes.iter().map(|x| x.norm_sqr()).sum::<f64>() * a.grid.dx()
}

/// Samples `f` at every grid point without normalizing.
pub fn sample<F>(grid: Grid1D, f: F) -> Result<WaveFunction>
where
    F: Fn(f64) -> Complex64,
{
    let amplitudes = grid
        .points()
        .map(|x| {
            let v = f(x);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteSample {
                    x,
                    value: v.to_string(),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WaveFunction { grid, amplitudes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    fn mode(grid: Grid1D, x0: f64, k: f64) -> WaveFunction {
        sample(grid, |x| {
            Complex64::from_polar(sech(x - x0) / 2f64.sqrt(), k * x)
        })
        .unwrap()
    }

    #[test]
    fn interpolation_reproduces_nodes_and_smooth_values() {
        let g = Grid1D::new(-20.0, 20.0, 256).unwrap();
        let f = |x: f64| Complex64::from_polar(sech(x - 0.3), 0.7 * x);
        let psi = sample(g, f).unwrap();
        let nodes: Vec<f64> = g.points().take(20).collect();
        for (v, x) in psi.interpolate(&nodes).unwrap().iter().zip(&nodes) {
            assert!((v - f(*x)).norm() < 1e-12);
        }
        let off: Vec<f64> = (0..50).map(|i| -7.0 + 0.2731 * i as f64).collect();
        for (v, x) in psi.interpolate(&off).unwrap().iter().zip(&off) {
            assert!((v - f(*x)).norm() < 1e-9, "{x}");
        }
    }

    #[test]
    fn shift_moves_profile_and_composes() {
        let g = Grid1D::new(-30.0, 30.0, 512).unwrap();
        let a = mode(g, -2.0, 0.4);
        let b = a.shifted(3.7);
        let want = sample(g, |x| {
            Complex64::from_polar(sech(x - 1.7) / 2f64.sqrt(), 0.4 * (x - 3.7))
        })
        .unwrap();
        for (x, y) in b.amplitudes().iter().zip(want.amplitudes()) {
            assert!((x - y).norm() < 1e-9);
        }
        let back = b.shifted(-3.7);
        for (x, y) in back.amplitudes().iter().zip(a.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(1.0, 1.0, 64).is_err());
        assert!(Grid1D::new(0.0, 1.0, 8).is_err());
        assert!(Grid1D::new(0.0, f64::INFINITY, 64).is_err());
    }

    #[test]
    fn points_follow_periodic_convention() {
        let g = Grid1D::new(-2.0, 2.0, 16).unwrap();
        let xs: Vec<f64> = g.points().collect();
        assert_eq!(xs.len(), 16);
        assert_eq!(xs[0], -2.0);
        assert_abs_diff_eq!(xs[15], 2.0 - g.dx(), epsilon = 1e-15);
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert_abs_diff_eq!(
            k[8],
            -8.0 * 2.0 * std::f64::consts::PI / 4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn normalized_self_overlap_is_one() {
        let g = Grid1D::standard();
        let a = mode(g, 0.0, 0.0);
        let ip = inner_product(&a, &a).unwrap();
        assert_abs_diff_eq!(ip.re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm_squared(&a), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn global_phase_shows_up_in_overlap() {
        let g = Grid1D::standard();
        let a = mode(g, 0.0, 0.0);
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let mut b = a.clone();
        b.scale(phase);
        let ip = inner_product(&a, &b).unwrap();
        assert_abs_diff_eq!(ip.re, phase.re, epsilon = 1e-10);
        assert_abs_diff_eq!(ip.im, phase.im, epsilon = 1e-10);
    }

    #[test]
    fn displaced_sech_overlap_matches_quadrature() {
        // Composite Simpson on [-60, 65] with 2e5 panels as the reference.
        let f = |x: f64| sech(x) * sech(x - 5.0) / 2.0;
        let (a, b, n) = (-60.0, 65.0, 200_000usize);
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        let reference = s * h / 3.0;
        // Closed form for cross-checking the quadrature itself: Δ / sinh Δ.
        assert_abs_diff_eq!(reference, 5.0 / 5f64.sinh(), epsilon = 1e-12);

        let g = Grid1D::standard();
        let ip = inner_product(&mode(g, 0.0, 0.0), &mode(g, 5.0, 0.0)).unwrap();
        assert_abs_diff_eq!(ip.norm(), reference, epsilon = 1e-10);
    }

    #[test]
    fn zero_state_has_zero_norm() {
        let g = Grid1D::new(0.0, 1.0, 32).unwrap();
        assert_eq!(norm_squared(&WaveFunction::zeros(g)), 0.0);
        assert!(WaveFunction::zeros(g).normalize().is_err());
    }

    #[test]
    fn sample_constant_and_nonfinite() {
        let g = Grid1D::new(0.0, 1.0, 16).unwrap();
        let w = sample(g, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(w
            .amplitudes()
            .iter()
            .all(|a| *a == Complex64::new(1.0, 0.0)));

        let err = sample(g, |x| Complex64::new(1.0 / (x - 0.5), 0.0)).unwrap_err();
        match err {
            Error::NonFiniteSample { x, .. } => assert_eq!(x, 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sampled_sech_normalizes_on_short_domain() {
        let g = Grid1D::new(-10.0, 10.0, 512).unwrap();
        let mut w = sample(g, |x| Complex64::new(sech(x) / 2f64.sqrt(), 0.0)).unwrap();
        w.normalize().unwrap();
        assert_abs_diff_eq!(norm_squared(&w), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn boost_phase_keeps_modulus() {
        let g = Grid1D::standard();
        let a = mode(g, 0.0, 0.0);
        let b = mode(g, 0.0, 0.5);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert_abs_diff_eq!(x.norm(), y.norm(), epsilon = 1e-15);
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = WaveFunction::zeros(Grid1D::new(0.0, 1.0, 16).unwrap());
        let b = WaveFunction::zeros(Grid1D::new(0.0, 1.0, 32).unwrap());
        assert!(matches!(
            inner_product(&a, &b),
            Err(Error::GridMismatch(..))
        ));
    }

    #[test]
    fn refinement_leaves_smooth_overlaps_unchanged() {
        let g = Grid1D::standard();
        let coarse = inner_product(&mode(g, -1.0, 0.3), &mode(g, 1.5, -0.2)).unwrap();
        let f = g.refined();
        let fine = inner_product(&mode(f, -1.0, 0.3), &mode(f, 1.5, -0.2)).unwrap();
        assert!((coarse - fine).norm() < 1e-8);
    }

    fn random_state(g: Grid1D, c: [f64; 4]) -> WaveFunction {
        sample(g, move |x| {
            Complex64::new(c[0], c[1])
                * Complex64::from_polar((-(x - c[2]).powi(2)).exp(), c[3] * x)
        })
        .unwrap()
    }

    proptest! {
        #[test]
        fn inner_product_is_sesquilinear(
            ca in proptest::array::uniform4(-3.0f64..3.0),
            cb in proptest::array::uniform4(-3.0f64..3.0),
            cc in proptest::array::uniform4(-3.0f64..3.0),
            al in proptest::array::uniform2(-2.0f64..2.0),
            be in proptest::array::uniform2(-2.0f64..2.0),
        ) {
            let g = Grid1D::new(-12.0, 12.0, 256).unwrap();
            let (a, b, c) = (random_state(g, ca), random_state(g, cb), random_state(g, cc));
            let alpha = Complex64::new(al[0], al[1]);
            let beta = Complex64::new(be[0], be[1]);
            let combo = WaveFunction::linear_combination(alpha, &b, beta, &c).unwrap();
            let lhs = inner_product(&a, &combo).unwrap();
            let rhs = alpha * inner_product(&a, &b).unwrap() + beta * inner_product(&a, &c).unwrap();
            let scale = lhs.norm().max(rhs.norm()).max(1e-300);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));

            let ab = inner_product(&a, &b).unwrap();
            let ba = inner_product(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() <= 1e-12 * ab.norm().max(1.0));

            prop_assert!(ab.norm_sqr() <= norm_squared(&a) * norm_squared(&b) * (1.0 + 1e-12));
        }
    }
}
