//! Uniform periodic grid on the unit torus and the Fourier machinery built on
//! it: spectral derivatives, quadrature, zero-mean antiderivatives and 2/3-rule
//! dealiasing.
//!
//! Fields are plain slices of samples `f(x_j)` with `x_j = j / n`. The torus
//! length is fixed to one, so quadrature is the sample mean.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default tolerance on `|mean(f)|` for [`Grid::antideriv_zero_mean`].
pub const MEAN_TOL: f64 = 1e-10;

/// Uniform sampling of the unit torus together with cached FFT plans.
///
/// Cloning is cheap; plans and wavenumbers are shared.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Arc<[f64]>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let wavenumbers: Vec<f64> = (0..n).map(|j| 2.0 * PI * mode_index(j, n) as f64).collect();
        Ok(Self {
            n,
            forward,
            inverse,
            wavenumbers: wavenumbers.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 / self.n as f64).collect()
    }

    /// Angular wavenumbers `2π m` in FFT order; the Nyquist entry carries `m = -n/2`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Samples `f` at the grid points.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points().into_iter().map(f).collect()
    }

    pub fn sample_complex(&self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        self.points().into_iter().map(f).collect()
    }

    pub fn forward(&self, field: &[f64]) -> Vec<Complex64> {
        self.check_len(field.len());
        let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn forward_complex(&self, field: &[Complex64]) -> Vec<Complex64> {
        self.check_len(field.len());
        let mut buf = field.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform, normalized so that `inverse(forward(f)) == f`.
    pub fn inverse_complex(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        self.check_len(spectrum.len());
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Inverse transform of a (numerically) Hermitian spectrum; the imaginary
    /// residue is discarded.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(spectrum).into_iter().map(|c| c.re).collect()
    }

    /// Inverse transform returning the real part and the ratio of the
    /// discarded imaginary residue to the norm of the real part.
    pub fn inverse_real_checked(&self, spectrum: &[Complex64]) -> (Vec<f64>, f64) {
        let full = self.inverse_complex(spectrum);
        let re_norm = full.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
        let im_norm = full.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
        let residue = if re_norm > 0.0 { im_norm / re_norm } else { im_norm };
        (full.into_iter().map(|c| c.re).collect(), residue)
    }

    /// Multiplier `(ik)^order` for mode `j`; odd orders drop the Nyquist mode.
    fn deriv_symbol(&self, j: usize, order: u32) -> Complex64 {
        if order == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if order % 2 == 1 && j == self.n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumbers[j]).powu(order)
    }

    /// Spectral derivative of order `order` of a real field.
    pub fn deriv(&self, field: &[f64], order: u32) -> Vec<f64> {
        let mut spec = self.forward(field);
        for (j, c) in spec.iter_mut().enumerate() {
            *c *= self.deriv_symbol(j, order);
        }
        self.inverse_real(&spec)
    }

    pub fn deriv_complex(&self, field: &[Complex64], order: u32) -> Vec<Complex64> {
        let mut spec = self.forward_complex(field);
        for (j, c) in spec.iter_mut().enumerate() {
            *c *= self.deriv_symbol(j, order);
        }
        self.inverse_complex(&spec)
    }

    /// Several derivatives of one field from a single forward transform.
    pub fn derivs<const K: usize>(&self, field: &[f64], orders: [u32; K]) -> [Vec<f64>; K] {
        self.derivs_of_spectrum(&self.forward(field), orders)
    }

    /// Derivatives of the real field whose transform is `spec`.
    pub fn derivs_of_spectrum<const K: usize>(&self, spec: &[Complex64], orders: [u32; K]) -> [Vec<f64>; K] {
        orders.map(|order| {
            let scaled: Vec<Complex64> = spec
                .iter()
                .enumerate()
                .map(|(j, &c)| c * self.deriv_symbol(j, order))
                .collect();
            self.inverse_real(&scaled)
        })
    }

    /// `∫_𝕋 f dx`, i.e. the sample mean on the unit torus.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        self.check_len(field.len());
        field.iter().sum::<f64>() / self.n as f64
    }

    pub fn mean(&self, field: &[f64]) -> f64 {
        self.integrate(field)
    }

    /// `∫_𝕋 f g dx`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.check_len(f.len());
        self.check_len(g.len());
        f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / self.n as f64
    }

    /// `‖f‖_{L²}` on the unit torus.
    pub fn l2_norm(&self, field: &[f64]) -> f64 {
        self.inner(field, field).sqrt()
    }

    /// `‖f − g‖_{L²}`.
    pub fn l2_distance(&self, f: &[f64], g: &[f64]) -> f64 {
        self.check_len(f.len());
        self.check_len(g.len());
        let s: f64 = f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum();
        (s / self.n as f64).sqrt()
    }

    /// `Σ_m |f̂_m|²` with coefficients normalized as Fourier-series
    /// amplitudes; equals `∫ f²` by Parseval.
    pub fn spectral_energy(&self, field: &[f64]) -> f64 {
        let spec = self.forward(field);
        let n2 = (self.n * self.n) as f64;
        spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / n2
    }

    pub fn antideriv_zero_mean(&self, field: &[f64]) -> Result<Vec<f64>> {
        self.antideriv_zero_mean_with_tol(field, MEAN_TOL)
    }

    /// The zero-mean primitive `F` with `∂ₓF = f`. Fails with
    /// [`Error::NonZeroMean`] when `f` has mean beyond `tol`, which is the
    /// obstruction to a periodic primitive.
    pub fn antideriv_zero_mean_with_tol(&self, field: &[f64], tol: f64) -> Result<Vec<f64>> {
        let mean = self.integrate(field);
        if mean.abs() > tol {
            return Err(Error::NonZeroMean { mean, tol });
        }
        let mut spec = self.forward(field);
        let nyquist = self.n / 2;
        for (j, c) in spec.iter_mut().enumerate() {
            if j == 0 || j == nyquist {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= Complex64::new(0.0, self.wavenumbers[j]);
            }
        }
        Ok(self.inverse_real(&spec))
    }

    /// Largest retained `|m|` under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    fn zero_high_modes(&self, spec: &mut [Complex64]) {
        let cutoff = self.dealias_cutoff() as i64;
        for (j, c) in spec.iter_mut().enumerate() {
            if mode_index(j, self.n).abs() > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Zeroes every Fourier mode above two thirds of the Nyquist index.
    pub fn dealias(&self, field: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(field);
        self.zero_high_modes(&mut spec);
        self.inverse_real(&spec)
    }

    pub fn dealias_complex(&self, field: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.forward_complex(field);
        self.zero_high_modes(&mut spec);
        self.inverse_complex(&spec)
    }

    /// Pointwise complex multiplier applied in Fourier space: returns
    /// `F⁻¹[symbol(k) · F[field]]`.
    pub fn apply_symbol(&self, field: &[Complex64], symbol: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let mut spec = self.forward_complex(field);
        for (c, &k) in spec.iter_mut().zip(self.wavenumbers.iter()) {
            *c *= symbol(k);
        }
        self.inverse_complex(&spec)
    }

    /// Real-field version of [`Grid::apply_symbol`] for even (real) symbols.
    pub fn apply_real_symbol(&self, field: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut spec = self.forward(field);
        for (c, &k) in spec.iter_mut().zip(self.wavenumbers.iter()) {
            *c *= symbol(k);
        }
        self.inverse_real(&spec)
    }

    /// Evaluates the trigonometric interpolant of `field` at arbitrary points.
    pub fn interpolate(&self, field: &[f64], at: &[f64]) -> Vec<f64> {
        let spec = self.forward(field);
        let n = self.n as f64;
        let nyquist = self.n / 2;
        at.iter()
            .map(|&x| {
                let mut acc = spec[0].re;
                for (j, c) in spec.iter().enumerate().skip(1) {
                    let m = mode_index(j, self.n) as f64;
                    let w = if j == nyquist { 0.5 } else { 1.0 };
                    // Nyquist term split symmetrically between ±n/2.
                    let phase = Complex64::from_polar(1.0, 2.0 * PI * m * x);
                    if j == nyquist {
                        acc += w * 2.0 * (c * Complex64::new((PI * n * x).cos(), 0.0)).re;
                    } else {
                        acc += (c * phase).re;
                    }
                }
                acc / n
            })
            .collect()
    }

    fn check_len(&self, len: usize) {
        assert_eq!(len, self.n, "field length {len} does not match grid size {}", self.n);
    }
}

/// Signed mode number for FFT index `j`; the Nyquist index maps to `-n/2`.
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
