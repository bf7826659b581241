//! Physical states, equations of state, doping profiles and the Madelung
//! bridge between wave functions and hydrodynamic fields.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Grid;

/// Default density floor as a fraction of the mass `M₀`.
pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-4;

/// Tolerance on `|∫ v|` accepted by [`wave_lift`].
pub const LIFT_WINDING_TOL: f64 = 1e-8;

/// Tolerance on the winding of a [`WaveState`].
pub const WINDING_TOL: f64 = 1e-6;

/// Tolerance on `|∫ C − M₀|` for a doping profile.
pub const DOPING_MASS_TOL: f64 = 1e-10;

/// Internal energy density `f(s)` and the pressure `p = s f′ − f` it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Eos {
    Zero,
    /// `f(s) = s^γ / (γ − 1)`, `p(s) = s^γ`.
    GammaLaw { gamma: f64 },
    /// `f(s) = (s − M₀)^{2n}`.
    CenteredPower { n: u32, m0: f64 },
}

impl Eos {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Eos::Zero => Ok(()),
            Eos::GammaLaw { gamma } if gamma > 1.0 && gamma.is_finite() => Ok(()),
            Eos::GammaLaw { gamma } => Err(Error::InvalidConfig(format!("gamma must exceed 1, got {gamma}"))),
            Eos::CenteredPower { n, m0 } if n >= 1 && m0 > 0.0 => Ok(()),
            Eos::CenteredPower { n, m0 } => Err(Error::InvalidConfig(format!(
                "centered power needs n >= 1 and m0 > 0, got n = {n}, m0 = {m0}"
            ))),
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        match *self {
            Eos::Zero => 0.0,
            Eos::GammaLaw { gamma } => s.powf(gamma) / (gamma - 1.0),
            Eos::CenteredPower { n, m0 } => (s - m0).powi(2 * n as i32),
        }
    }

    pub fn df(&self, s: f64) -> f64 {
        match *self {
            Eos::Zero => 0.0,
            Eos::GammaLaw { gamma } => gamma / (gamma - 1.0) * s.powf(gamma - 1.0),
            Eos::CenteredPower { n, m0 } => {
                let e = 2 * n as i32;
                e as f64 * (s - m0).powi(e - 1)
            }
        }
    }

    pub fn d2f(&self, s: f64) -> f64 {
        match *self {
            Eos::Zero => 0.0,
            Eos::GammaLaw { gamma } => gamma * s.powf(gamma - 2.0),
            Eos::CenteredPower { n, m0 } => {
                let e = 2 * n as i32;
                (e * (e - 1)) as f64 * (s - m0).powi(e - 2)
            }
        }
    }

    pub fn p(&self, s: f64) -> f64 {
        match *self {
            Eos::Zero => 0.0,
            Eos::GammaLaw { gamma } => s.powf(gamma),
            Eos::CenteredPower { .. } => s * self.df(s) - self.f(s),
        }
    }

    pub fn dp(&self, s: f64) -> f64 {
        match *self {
            Eos::Zero => 0.0,
            Eos::GammaLaw { gamma } => gamma * s.powf(gamma - 1.0),
            Eos::CenteredPower { .. } => s * self.d2f(s),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Eos::Zero)
    }
}

/// Density and velocity samples. Stored as `(ρ, v)`; `J = ρv` and
/// `Λ = √ρ v` are derived on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroState {
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
}

impl HydroState {
    pub fn new(rho: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(rho.len(), v.len(), "density and velocity lengths differ");
        Self { rho, v }
    }

    /// Uniform density `m0` at rest.
    pub fn constant(grid: &Grid, m0: f64) -> Self {
        Self::new(vec![m0; grid.n()], vec![0.0; grid.n()])
    }

    pub fn mass(&self, grid: &Grid) -> f64 {
        grid.integrate(&self.rho)
    }

    pub fn momentum(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.v).map(|(r, v)| r * v).collect()
    }

    pub fn lambda(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.v).map(|(r, v)| r.sqrt() * v).collect()
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_floor(&self, floor: f64) -> Result<()> {
        check_density_floor(&self.rho, floor)
    }
}

pub(crate) fn check_density_floor(rho: &[f64], floor: f64) -> Result<()> {
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= floor) {
        return Err(Error::VacuumBreach { min, floor });
    }
    Ok(())
}

/// Wave function samples with the constant part `S*` of the phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveState {
    pub psi: Vec<Complex64>,
    pub s_offset: f64,
}

impl WaveState {
    pub fn new(psi: Vec<Complex64>, s_offset: f64) -> Self {
        Self { psi, s_offset }
    }

    pub fn min_modulus(&self) -> f64 {
        self.psi.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn check_floor(&self, floor: f64) -> Result<()> {
        let min = self.min_modulus();
        if !(min >= floor.sqrt()) {
            return Err(Error::VacuumBreach {
                min: min * min,
                floor,
            });
        }
        Ok(())
    }

    /// `∮ Im(∂ₓψ/ψ) dx`, i.e. `2π` times the winding number of the phase.
    pub fn winding(&self, grid: &Grid) -> f64 {
        let dpsi = grid.deriv_complex(&self.psi, 1);
        let dens: Vec<f64> = self
            .psi
            .iter()
            .zip(&dpsi)
            .map(|(p, d)| (p.conj() * d).im / p.norm_sqr())
            .collect();
        grid.integrate(&dens)
    }

    pub fn check_winding(&self, grid: &Grid) -> Result<()> {
        let mean = self.winding(grid);
        if mean.abs() > WINDING_TOL {
            return Err(Error::NonZeroWinding { mean });
        }
        Ok(())
    }
}

/// Background charge `C(x)` of the Poisson coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DopingProfile {
    pub c: Vec<f64>,
}

impl DopingProfile {
    /// Checks `∫ C = m0`.
    pub fn new(grid: &Grid, c: Vec<f64>, m0: f64) -> Result<Self> {
        assert_eq!(c.len(), grid.n());
        let mean = grid.integrate(&c);
        if (mean - m0).abs() > DOPING_MASS_TOL {
            return Err(Error::MassMismatch { first: mean, second: m0 });
        }
        Ok(Self { c })
    }

    pub fn uniform(grid: &Grid, m0: f64) -> Self {
        Self { c: vec![m0; grid.n()] }
    }
}

/// Output of [`polar_decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct Polar {
    pub sqrt_rho: Vec<f64>,
    pub lambda: Vec<f64>,
    pub dx_sqrt_rho: Vec<f64>,
}

/// `√ρ = |ψ|`, `Λ = Im(φ̄ ∂ₓψ)` and `∂ₓ√ρ = Re(φ̄ ∂ₓψ)` with `φ = ψ/|ψ|`.
pub fn polar_decompose(grid: &Grid, w: &WaveState, floor: f64) -> Result<Polar> {
    w.check_floor(floor)?;
    let dpsi = grid.deriv_complex(&w.psi, 1);
    let n = grid.n();
    let mut sqrt_rho = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    let mut dx_sqrt_rho = Vec::with_capacity(n);
    for (p, d) in w.psi.iter().zip(&dpsi) {
        let m = p.norm();
        let proj = (p.conj() / m) * d;
        sqrt_rho.push(m);
        lambda.push(proj.im);
        dx_sqrt_rho.push(proj.re);
    }
    Ok(Polar {
        sqrt_rho,
        lambda,
        dx_sqrt_rho,
    })
}

/// `ρ = |ψ|²`, `v = Im(ψ̄ ∂ₓψ)/ρ`.
pub fn hydro_from_wave(grid: &Grid, w: &WaveState, floor: f64) -> Result<HydroState> {
    w.check_floor(floor)?;
    let dpsi = grid.deriv_complex(&w.psi, 1);
    let rho: Vec<f64> = w.psi.iter().map(|p| p.norm_sqr()).collect();
    let v = w
        .psi
        .iter()
        .zip(&dpsi)
        .zip(&rho)
        .map(|((p, d), r)| (p.conj() * d).im / r)
        .collect();
    Ok(HydroState::new(rho, v))
}

/// Phase field `S = S* + ∫ v` with the primitive normalized to zero mean.
pub fn phase_from_velocity(grid: &Grid, v: &[f64], s_star: f64) -> Result<Vec<f64>> {
    let mean = grid.integrate(v);
    if mean.abs() > LIFT_WINDING_TOL {
        return Err(Error::NonZeroWinding { mean });
    }
    let prim = grid.antideriv_zero_mean_with_tol(v, LIFT_WINDING_TOL)?;
    Ok(prim.into_iter().map(|s| s + s_star).collect())
}

/// `ψ = √ρ exp(iS)` with `S` from [`phase_from_velocity`].
pub fn wave_lift(grid: &Grid, h: &HydroState, s_star: f64, floor: f64) -> Result<WaveState> {
    h.check_floor(floor)?;
    let s = phase_from_velocity(grid, &h.v, s_star)?;
    let psi = h
        .rho
        .iter()
        .zip(&s)
        .map(|(r, s)| Complex64::from_polar(r.sqrt(), *s))
        .collect();
    Ok(WaveState::new(psi, s_star))
}

/// Bohm potential `Q = −∂ₓ²√ρ / (2√ρ)`.
pub fn bohm_potential(grid: &Grid, rho: &[f64]) -> Vec<f64> {
    let sq: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let d2 = grid.deriv(&sq, 2);
    d2.iter().zip(&sq).map(|(d, s)| -d / (2.0 * s)).collect()
}

/// Chemical potential. Unrescaled: `μ = Q + v²/2 + f′(ρ) + V`; rescaled:
/// `μ_τ = (Q + τ²v²/2 + f′(ρ) + V)/τ`, where `v` is the rescaled velocity.
pub fn chemical_potential(
    grid: &Grid,
    h: &HydroState,
    eos: &Eos,
    potential: &[f64],
    tau: f64,
    rescaled: bool,
    floor: f64,
) -> Result<Vec<f64>> {
    h.check_floor(floor)?;
    let q = bohm_potential(grid, &h.rho);
    let (kin, scale) = if rescaled { (tau * tau, 1.0 / tau) } else { (1.0, 1.0) };
    Ok(q
        .iter()
        .zip(&h.rho)
        .zip(&h.v)
        .zip(potential)
        .map(|(((q, r), v), pot)| scale * (q + 0.5 * kin * v * v + eos.df(*r) + pot))
        .collect())
}

/// `σ = −∂ₓ(ρv)/(2ρ)`, the rate of change of `log √ρ`.
pub fn sigma_field(grid: &Grid, h: &HydroState, floor: f64) -> Result<Vec<f64>> {
    h.check_floor(floor)?;
    let dj = grid.deriv(&h.momentum(), 1);
    Ok(dj.iter().zip(&h.rho).map(|(d, r)| -d / (2.0 * r)).collect())
}

/// Smooth form of the quantum stress, `¼∂ₓ³ρ − ∂ₓ[(∂ₓ√ρ)²]`. Written with
/// `(∂ₓ√ρ)² = (∂ₓρ)²/(4ρ)` it stays finite at analytic zeros of `ρ` such as
/// `cos²(πx)`, where the ratio is evaluated from its limit.
///
/// Fourier coefficients below `10⁻¹⁴` of the largest are treated as round-off
/// and dropped before differentiating; the third derivative would otherwise
/// amplify them by `k³`.
pub fn quantum_stress(grid: &Grid, rho: &[f64]) -> Vec<f64> {
    let [d1, d2, d3] = filtered_derivs(grid, rho, [1, 2, 3]);
    let scale = rho.iter().map(|r| r.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    // At an analytic zero ρ ≈ ½ρ″(x−x₀)², so (∂ₓρ)²/(4ρ) → ρ″/2.
    let grad_sq: Vec<f64> = rho
        .iter()
        .zip(&d1)
        .zip(&d2)
        .map(|((r, a), b)| {
            if *r > 1e-12 * scale {
                a * a / (4.0 * r)
            } else {
                0.5 * b
            }
        })
        .collect();
    let [dg] = filtered_derivs(grid, &grad_sq, [1]);
    d3.iter().zip(&dg).map(|(a, b)| 0.25 * a - b).collect()
}

fn filtered_derivs<const K: usize>(grid: &Grid, field: &[f64], orders: [u32; K]) -> [Vec<f64>; K] {
    let mut spec = grid.forward(field);
    let cut = 1e-14 * spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for c in spec.iter_mut().filter(|c| c.norm() < cut) {
        *c = Complex64::new(0.0, 0.0);
    }
    grid.derivs_of_spectrum(&spec, orders)
}

/// Enthalpy form of the quantum stress, `½ρ ∂ₓ(∂ₓ²√ρ/√ρ)`, with the same
/// round-off filtering as [`quantum_stress`].
pub fn quantum_stress_enthalpy(grid: &Grid, rho: &[f64], floor: f64) -> Result<Vec<f64>> {
    check_density_floor(rho, floor)?;
    let sq: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let [d2] = filtered_derivs(grid, &sq, [2]);
    let ratio: Vec<f64> = d2.iter().zip(&sq).map(|(d, s)| d / s).collect();
    let [dr] = filtered_derivs(grid, &ratio, [1]);
    Ok(rho.iter().zip(&dr).map(|(r, d)| 0.5 * r * d).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleDirection {
    Forward,
    Inverse,
}

/// Diffusive rescaling `(ρ, J)(t) ↦ (ρ, J/τ)(τt)`. Returns the new state and
/// the factor by which time labels must be multiplied.
pub fn rescale_state(h: &HydroState, tau: f64, direction: RescaleDirection) -> (HydroState, f64) {
    let (vf, tf) = match direction {
        RescaleDirection::Forward => (1.0 / tau, tau),
        RescaleDirection::Inverse => (tau, 1.0 / tau),
    };
    let v = h.v.iter().map(|v| v * vf).collect();
    (HydroState::new(h.rho.clone(), v), tf)
}

/// Random trigonometric polynomial with `modes` modes, coefficients uniform in
/// `[-amplitude, amplitude]` and decaying like `1/m`.
pub fn random_smooth_field(grid: &Grid, rng: &mut impl Rng, modes: usize, amplitude: f64) -> Vec<f64> {
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|m| {
            let a = rng.gen_range(-amplitude..=amplitude) / m as f64;
            let b = rng.gen_range(-amplitude..=amplitude) / m as f64;
            (a, b)
        })
        .collect();
    grid.sample(|x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let th = 2.0 * std::f64::consts::PI * (i + 1) as f64 * x;
                a * th.cos() + b * th.sin()
            })
            .sum()
    })
}

/// Seeded random hydrodynamic state with `ρ ≥ 0.5` and zero-mean `v`.
pub fn random_hydro_state(grid: &Grid, seed: u64) -> HydroState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dr = random_smooth_field(grid, &mut rng, 4, 0.2);
    let rho = dr.iter().map(|d| 1.0 + d).collect();
    let v = random_smooth_field(grid, &mut rng, 4, 1.0);
    let mean = grid.integrate(&v);
    HydroState::new(rho, v.into_iter().map(|x| x - mean).collect())
}

/// Seeded random non-vanishing wave function with zero winding.
pub fn random_wave_state(grid: &Grid, seed: u64) -> WaveState {
    let h = random_hydro_state(grid, seed);
    let s_star = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed).gen_range(0.0..std::f64::consts::TAU);
    wave_lift(grid, &h, s_star, 0.0).expect("random state is admissible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sup(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn eos_consistency() {
        let families = [
            Eos::Zero,
            Eos::GammaLaw { gamma: 2.0 },
            Eos::GammaLaw { gamma: 5.0 / 3.0 },
            Eos::CenteredPower { n: 1, m0: 1.0 },
            Eos::CenteredPower { n: 2, m0: 0.7 },
        ];
        for eos in families {
            for i in 0..200 {
                let s = 0.05 + 2.95 * i as f64 / 199.0;
                let scale = 1.0 + eos.p(s).abs();
                assert!((eos.p(s) - (s * eos.df(s) - eos.f(s))).abs() < 1e-12 * scale, "{eos:?} at {s}");
                let scale = 1.0 + eos.dp(s).abs();
                assert!((eos.dp(s) - s * eos.d2f(s)).abs() < 1e-12 * scale, "{eos:?} at {s}");
            }
        }
        assert_eq!(Eos::CenteredPower { n: 2, m0: 1.0 }.f(3.0), 16.0);
        assert!((Eos::GammaLaw { gamma: 2.0 }.f(3.0) - 9.0).abs() < 1e-14);
    }

    #[test]
    fn polar_of_unit_modulus_phase() {
        let g = Grid::new(64).unwrap();
        let w = WaveState::new(g.sample_complex(|x| Complex64::from_polar(1.0, (2.0 * PI * x).sin())), 0.0);
        let p = polar_decompose(&g, &w, 1e-4).unwrap();
        assert!(p.sqrt_rho.iter().all(|s| (s - 1.0).abs() < 1e-14));
        assert!(sup(&p.lambda, &g.sample(|x| 2.0 * PI * (2.0 * PI * x).cos())) < 1e-11);

        let real = WaveState::new(g.sample_complex(|x| Complex64::new(1.2 + 0.1 * (2.0 * PI * x).cos(), 0.0)), 0.0);
        let p = polar_decompose(&g, &real, 1e-4).unwrap();
        assert!(p.lambda.iter().all(|l| l.abs() < 1e-13));
    }

    #[test]
    fn hydro_from_wave_basics() {
        let g = Grid::new(32).unwrap();
        let m0: f64 = 1.7;
        let w = WaveState::new(vec![Complex64::new(m0.sqrt(), 0.0); 32], 0.0);
        let h = hydro_from_wave(&g, &w, 1e-4).unwrap();
        assert!(h.rho.iter().all(|r| (r - m0).abs() < 1e-14));
        assert!(h.v.iter().all(|v| v.abs() < 1e-14));

        let w = WaveState::new(g.sample_complex(|x| Complex64::from_polar(1.0, (2.0 * PI * x).sin())), 0.0);
        let h = hydro_from_wave(&g, &w, 1e-4).unwrap();
        assert!(sup(&h.v, &g.sample(|x| 2.0 * PI * (2.0 * PI * x).cos())) < 1e-11);
    }

    #[test]
    fn vacuum_is_rejected() {
        let g = Grid::new(16).unwrap();
        let w = WaveState::new(g.sample_complex(|x| Complex64::new((PI * x).cos(), 0.0)), 0.0);
        assert!(matches!(polar_decompose(&g, &w, 1e-4), Err(Error::VacuumBreach { .. })));
        assert!(matches!(hydro_from_wave(&g, &w, 1e-4), Err(Error::VacuumBreach { .. })));
    }

    #[test]
    fn lift_examples() {
        let g = Grid::new(64).unwrap();
        let h = HydroState::new(vec![1.0; 64], g.sample(|x| 2.0 * PI * (2.0 * PI * x).cos()));
        let w = wave_lift(&g, &h, 0.0, 1e-4).unwrap();
        let expect = g.sample_complex(|x| Complex64::from_polar(1.0, (2.0 * PI * x).sin()));
        let err = w.psi.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);

        let c = HydroState::constant(&g, 2.0);
        let w1 = wave_lift(&g, &c, 0.3, 1e-4).unwrap();
        let w2 = wave_lift(&g, &c, 1.1, 1e-4).unwrap();
        let expect = Complex64::from_polar(2f64.sqrt(), 0.3);
        assert!(w1.psi.iter().all(|p| (p - expect).norm() < 1e-14));
        let rot = Complex64::from_polar(1.0, 0.8);
        assert!(w1.psi.iter().zip(&w2.psi).all(|(a, b)| (a * rot - b).norm() < 1e-14));

        let wind = HydroState::new(vec![1.0; 64], vec![2.0 * PI; 64]);
        assert!(matches!(wave_lift(&g, &wind, 0.0, 1e-4), Err(Error::NonZeroWinding { .. })));
    }

    #[test]
    fn chemical_potential_cases() {
        let g = Grid::new(32).unwrap();
        let eos = Eos::CenteredPower { n: 2, m0: 1.3 };
        let h = HydroState::constant(&g, 1.3);
        let mu = chemical_potential(&g, &h, &eos, &vec![0.0; 32], 0.4, true, 1e-4).unwrap();
        assert!(mu.iter().all(|m| m.abs() < 1e-14));

        let h = random_hydro_state(&g, 4);
        let pot = g.sample(|x| 0.01 * (2.0 * PI * x).sin());
        let eos = Eos::GammaLaw { gamma: 2.0 };
        let a = chemical_potential(&g, &h, &eos, &pot, 1.0, true, 1e-4).unwrap();
        let b = chemical_potential(&g, &h, &eos, &pot, 1.0, false, 1e-4).unwrap();
        assert!(sup(&a, &b) < 1e-14);
    }

    #[test]
    fn sigma_cases() {
        let g = Grid::new(32).unwrap();
        let h = HydroState::new(g.sample(|x| 1.0 + 0.2 * (2.0 * PI * x).cos()), vec![0.0; 32]);
        assert!(sigma_field(&g, &h, 1e-4).unwrap().iter().all(|s| *s == 0.0));
        let h = HydroState::new(vec![1.0; 32], g.sample(|x| (2.0 * PI * x).sin()));
        let s = sigma_field(&g, &h, 1e-4).unwrap();
        assert!(sup(&s, &g.sample(|x| -PI * (2.0 * PI * x).cos())) < 1e-12);
    }

    #[test]
    fn quantum_stress_cases() {
        let g = Grid::new(256).unwrap();
        assert!(quantum_stress(&g, &vec![1.4; 256]).iter().all(|q| q.abs() < 1e-12));

        let cos2 = g.sample(|x| (PI * x).cos().powi(2));
        let q = quantum_stress(&g, &cos2);
        assert!(q.iter().all(|v| v.abs() < 1e-8), "{}", q.iter().map(|v| v.abs()).fold(0.0, f64::max));

        let rho = g.sample(|x| 1.0 + 0.1 * (2.0 * PI * x).cos());
        let a = quantum_stress(&g, &rho);
        let b = quantum_stress_enthalpy(&g, &rho, 1e-4).unwrap();
        assert!(sup(&a, &b) < 1e-8);
    }

    #[test]
    fn rescaling_roundtrip() {
        let g = Grid::new(16).unwrap();
        let h = random_hydro_state(&g, 9);
        let (same, tf) = rescale_state(&h, 1.0, RescaleDirection::Forward);
        assert_eq!(same, h);
        assert_eq!(tf, 1.0);
        let (fwd, tf) = rescale_state(&h, 0.5, RescaleDirection::Forward);
        assert_eq!(tf, 0.5);
        for ((a, b), r) in fwd.momentum().iter().zip(h.momentum()).zip(&h.rho) {
            assert!((a - 2.0 * b).abs() < 1e-15 * (1.0 + r));
        }
        let (back, tb) = rescale_state(&fwd, 0.5, RescaleDirection::Inverse);
        assert_eq!(tb, 2.0);
        assert!(sup(&back.v, &h.v) < 1e-15);
    }

    #[test]
    fn doping_mass_is_checked() {
        let g = Grid::new(16).unwrap();
        assert!(DopingProfile::new(&g, vec![1.0; 16], 1.0).is_ok());
        assert!(matches!(DopingProfile::new(&g, vec![1.0; 16], 1.1), Err(Error::MassMismatch { .. })));
    }
}
