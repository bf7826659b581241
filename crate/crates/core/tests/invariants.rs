//! Property tests over randomized smooth fields.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qhdrelax::diagnostics::{energy, entropy, gcp_functional, h2_identity, log_sobolev, relative_entropy};
use qhdrelax::experiments::polar_defect;
use qhdrelax::poisson::{electric_energy, solve_potential};
use qhdrelax::state::{
    chemical_potential, hydro_from_wave, random_hydro_state, random_smooth_field, random_wave_state, wave_lift,
    DopingProfile, Eos,
};
use qhdrelax::{Grid, HydroState};

fn grid_size() -> impl Strategy<Value = usize> {
    prop_oneof![Just(32usize), Just(64), Just(128)]
}

// Nonlinear identities need enough modes to resolve |ψ|, log ρ and ρ^¼.
fn resolved_grid_size() -> impl Strategy<Value = usize> {
    prop_oneof![Just(64usize), Just(128), Just(256)]
}

fn smooth(grid: &Grid, seed: u64, amplitude: f64) -> Vec<f64> {
    random_smooth_field(grid, &mut ChaCha8Rng::seed_from_u64(seed), 6, amplitude)
}

fn sup(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn eos_strategy() -> impl Strategy<Value = Eos> {
    prop_oneof![
        Just(Eos::Zero),
        (1.1f64..3.0).prop_map(|gamma| Eos::GammaLaw { gamma }),
        (1u32..3, 0.5f64..1.5).prop_map(|(n, m0)| Eos::CenteredPower { n, m0 }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_composition(n in grid_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let f = smooth(&g, seed, 1.0);
        let twice = g.deriv(&g.deriv(&f, 1), 1);
        let direct = g.deriv(&f, 2);
        prop_assert!(sup_diff(&twice, &direct) <= 1e-10 * sup(&direct).max(1.0));
    }

    #[test]
    fn derivative_integrates_to_zero(n in grid_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let f = smooth(&g, seed, 1.0);
        prop_assert!(g.integrate(&g.deriv(&f, 1)).abs() <= 1e-12);
    }

    #[test]
    fn antiderivative_inverts_derivative(n in grid_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let f = smooth(&g, seed, 1.0);
        let m = g.mean(&f);
        let f0: Vec<f64> = f.iter().map(|x| x - m).collect();
        let back = g.deriv(&g.antideriv_zero_mean(&f0).unwrap(), 1);
        prop_assert!(sup_diff(&back, &f0) <= 1e-10);
    }

    #[test]
    fn parseval(n in grid_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let f = smooth(&g, seed, 1.0);
        let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
        prop_assert!((g.integrate(&sq) - g.spectral_energy(&f)).abs() <= 1e-12);
    }

    #[test]
    fn polar_identity_pointwise(n in resolved_grid_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let w = random_wave_state(&g, seed);
        prop_assert!(polar_defect(&g, &w, 0.0).unwrap() <= 1e-8);
    }

    #[test]
    fn lift_roundtrip_up_to_phase(n in grid_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let w = random_wave_state(&g, seed);
        let back = wave_lift(&g, &hydro_from_wave(&g, &w, 0.0).unwrap(), 0.0, 0.0).unwrap();
        let overlap: num_complex::Complex64 = w.psi.iter().zip(&back.psi).map(|(a, b)| a.conj() * b).sum();
        let norm = |p: &[num_complex::Complex64]| p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let corr = overlap.norm() / (norm(&w.psi) * norm(&back.psi));
        prop_assert!((corr - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn eos_consistency(eos in eos_strategy(), s in 0.05f64..4.0) {
        let tol = 1e-10 * (1.0 + eos.f(s).abs() + eos.p(s).abs() + s * eos.df(s).abs());
        prop_assert!((eos.p(s) - (eos.df(s) * s - eos.f(s))).abs() <= tol);
        prop_assert!((eos.dp(s) - s * eos.d2f(s)).abs() <= 1e-10 * (1.0 + eos.dp(s).abs()));
    }

    #[test]
    fn poisson_linearity(seed in any::<u64>(), alpha in 0.0f64..1.0) {
        let g = Grid::new(64).unwrap();
        let r1 = random_hydro_state(&g, seed).rho;
        let m = g.integrate(&r1);
        let r2: Vec<f64> = smooth(&g, seed ^ 1, 0.2).iter().map(|d| m + d - g.mean(&smooth(&g, seed ^ 1, 0.2))).collect();
        let c = DopingProfile::uniform(&g, m);
        let v1 = solve_potential(&g, &r1, &c).unwrap();
        let v2 = solve_potential(&g, &r2, &c).unwrap();
        let mix: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let vm = solve_potential(&g, &mix, &c).unwrap();
        let lin: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        prop_assert!(sup_diff(&vm, &lin) <= 1e-12);
    }

    #[test]
    fn poisson_energy_identity(seed in any::<u64>()) {
        let g = Grid::new(64).unwrap();
        let rho = random_hydro_state(&g, seed).rho;
        let c = DopingProfile::uniform(&g, g.integrate(&rho));
        let v = solve_potential(&g, &rho, &c).unwrap();
        let rhs: Vec<f64> = rho.iter().zip(&c.c).zip(&v).map(|((r, c), v)| 0.5 * (r - c) * v).collect();
        let e = electric_energy(&g, &v);
        prop_assert!(e >= 0.0);
        prop_assert!((e - g.integrate(&rhs)).abs() <= 1e-10);
    }

    #[test]
    fn functionals_nonnegative(seed in any::<u64>(), eos in eos_strategy(), tau in 0.01f64..2.0) {
        let g = Grid::new(64).unwrap();
        let h = random_hydro_state(&g, seed);
        let c = DopingProfile::uniform(&g, g.integrate(&h.rho));
        let pot = solve_potential(&g, &h.rho, &c).unwrap();
        let parts = energy(&g, &h, &eos, &pot, tau, false);
        prop_assert!(parts.kinetic >= 0.0 && parts.quantum >= 0.0 && parts.electric >= 0.0);
        let gamma_law = matches!(eos, Eos::GammaLaw { .. });
        prop_assert!(parts.internal >= 0.0 || gamma_law);
        prop_assert!(entropy(&g, &h.rho).unwrap() >= 0.0);
        prop_assert!(gcp_functional(&g, &h, &eos, &pot, tau, false, 1e-4).unwrap() >= 0.0);
    }

    #[test]
    fn relative_entropy_sandwich(s1 in any::<u64>(), s2 in any::<u64>()) {
        let g = Grid::new(64).unwrap();
        let a = random_hydro_state(&g, s1).rho;
        let b0 = random_hydro_state(&g, s2).rho;
        let shift = g.integrate(&a) - g.integrate(&b0);
        let b: Vec<f64> = b0.iter().map(|x| x + shift).collect();
        let hr = relative_entropy(&g, &a, &b, 1e-4).unwrap();
        let all = a.iter().chain(&b);
        let hi = all.clone().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = all.copied().fold(f64::INFINITY, f64::min);
        let d2 = g.l2_distance(&a, &b).powi(2);
        prop_assert!(hr >= d2 / (2.0 * hi) * (1.0 - 1e-12) - 1e-15);
        prop_assert!(hr <= d2 / (2.0 * lo) * (1.0 + 1e-12) + 1e-15);
        prop_assert!(relative_entropy(&g, &a, &a, 1e-4).unwrap().abs() <= 1e-15);
    }

    #[test]
    fn h2_identity_on_positive_fields(n in resolved_grid_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let rho = random_hydro_state(&g, seed).rho;
        let (lhs, (a, b)) = h2_identity(&g, &rho).unwrap();
        prop_assert!((lhs - a - 16.0 / 3.0 * b).abs() <= 1e-8 * lhs.abs().max(1.0));
    }

    #[test]
    fn log_sobolev_holds(n in grid_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let rho = random_hydro_state(&g, seed).rho;
        let (h, bound) = log_sobolev(&g, &rho).unwrap();
        prop_assert!(h <= bound);
    }

    #[test]
    fn constant_state_has_zero_chemical_potential(n in 1u32..3, m0 in 0.5f64..2.0, tau in 0.05f64..2.0) {
        let g = Grid::new(64).unwrap();
        let h = HydroState::constant(&g, m0);
        let eos = Eos::CenteredPower { n, m0 };
        let pot = solve_potential(&g, &h.rho, &DopingProfile::uniform(&g, m0)).unwrap();
        for rescaled in [false, true] {
            let mu = chemical_potential(&g, &h, &eos, &pot, tau, rescaled, 1e-4).unwrap();
            prop_assert!(sup(&mu) == 0.0);
        }
    }
}
