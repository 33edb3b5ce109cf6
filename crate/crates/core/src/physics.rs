//! Internal-energy laws, pressure, and the discrete total-energy
//! functionals of the two state representations.

use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{ln, powf, sq};

/// Internal-energy law U(ρ) of the fluid.
///
/// `Polytropic` is U(ρ) = κ ρ^γ / (γ−1) with pressure P(ρ) = κ ρ^γ;
/// `Isothermal` is U(ρ) = ρ log ρ with P(ρ) = ρ. The default κ is the
/// common normalization θ²/γ with θ = (γ−1)/2; porous-medium runs use κ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyModel {
    Polytropic { gamma: f64, kappa: f64 },
    Isothermal,
}

impl EnergyModel {
    /// Polytropic law with the normalization κ = θ²/γ, θ = (γ−1)/2.
    pub fn polytropic(gamma: f64) -> Result<Self, Error> {
        let theta = 0.5 * (gamma - 1.0);
        Self::polytropic_with_kappa(gamma, sq(theta) / gamma)
    }

    /// Polytropic law with an explicit pressure constant κ ≥ 0.
    /// κ = 0 disables pressure entirely (free transport, used by tests).
    pub fn polytropic_with_kappa(gamma: f64, kappa: f64) -> Result<Self, Error> {
        if !(gamma > 1.0) {
            return Err(Error::Domain("polytropic gamma must exceed 1"));
        }
        if !(kappa >= 0.0) {
            return Err(Error::Domain("kappa must be nonnegative"));
        }
        Ok(EnergyModel::Polytropic { gamma, kappa })
    }

    /// Porous-medium normalization U(ρ) = ρ^γ/(γ−1), i.e. κ = 1.
    pub fn porous_medium(gamma: f64) -> Result<Self, Error> {
        Self::polytropic_with_kappa(gamma, 1.0)
    }

    fn check_rho(rho: f64) -> Result<(), Error> {
        if rho < 0.0 || rho.is_nan() {
            Err(Error::Domain("density must be nonnegative"))
        } else {
            Ok(())
        }
    }

    /// Energy density U(ρ). U(0) = 0 for both laws (ρ log ρ → 0).
    pub fn energy_density(&self, rho: f64) -> Result<f64, Error> {
        Self::check_rho(rho)?;
        Ok(self.u(rho))
    }

    /// Pressure P(ρ) = U′(ρ)ρ − U(ρ).
    pub fn pressure(&self, rho: f64) -> Result<f64, Error> {
        Self::check_rho(rho)?;
        Ok(self.p(rho))
    }

    #[inline]
    pub(crate) fn u(&self, rho: f64) -> f64 {
        match *self {
            EnergyModel::Polytropic { gamma, kappa } => {
                if rho == 0.0 {
                    0.0
                } else {
                    kappa * powf(rho, gamma) / (gamma - 1.0)
                }
            }
            EnergyModel::Isothermal => {
                if rho == 0.0 {
                    0.0
                } else {
                    rho * ln(rho)
                }
            }
        }
    }

    /// U′(ρ), for ρ > 0.
    #[inline]
    pub(crate) fn du(&self, rho: f64) -> f64 {
        match *self {
            EnergyModel::Polytropic { gamma, kappa } => {
                kappa * gamma * powf(rho, gamma - 1.0) / (gamma - 1.0)
            }
            EnergyModel::Isothermal => ln(rho) + 1.0,
        }
    }

    /// U″(ρ), for ρ > 0. Strictly positive: U is strictly convex.
    #[inline]
    pub(crate) fn ddu(&self, rho: f64) -> f64 {
        match *self {
            EnergyModel::Polytropic { gamma, kappa } => kappa * gamma * powf(rho, gamma - 2.0),
            EnergyModel::Isothermal => 1.0 / rho,
        }
    }

    #[inline]
    pub(crate) fn p(&self, rho: f64) -> f64 {
        match *self {
            EnergyModel::Polytropic { gamma, kappa } => {
                if rho == 0.0 {
                    0.0
                } else {
                    kappa * powf(rho, gamma)
                }
            }
            EnergyModel::Isothermal => rho,
        }
    }

    /// P′(ρ) = U″(ρ)ρ, for ρ > 0.
    #[inline]
    pub(crate) fn dp(&self, rho: f64) -> f64 {
        match *self {
            EnergyModel::Polytropic { gamma, kappa } => kappa * gamma * powf(rho, gamma - 1.0),
            EnergyModel::Isothermal => 1.0,
        }
    }
}

/// Kinetic/internal/total energy of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub internal: f64,
    pub total: f64,
}

/// Equal-mass point-particle configuration used by the first-order schemes:
/// N ordered particles of mass m = 1/N.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    /// Strictly increasing particle positions.
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    /// Common particle mass m = 1/N.
    pub particle_mass: f64,
    pub time: f64,
}

impl ParticleState {
    pub fn new(positions: Vec<f64>, velocities: Vec<f64>, time: f64) -> Result<Self, Error> {
        let n = positions.len();
        if n < 2 {
            return Err(Error::InvalidState("need at least two particles"));
        }
        if velocities.len() != n {
            return Err(Error::InvalidState("positions/velocities length mismatch"));
        }
        if !strictly_increasing(&positions) {
            return Err(Error::InvalidState("positions must be strictly increasing"));
        }
        Ok(ParticleState {
            positions,
            velocities,
            particle_mass: 1.0 / n as f64,
            time,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Piecewise-constant density / piecewise-linear velocity configuration
/// used by the second-order schemes: N+1 knots bounding N cells of fixed
/// mass m_i, with velocities carried at the knots.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    /// Strictly increasing knots x_0 < … < x_N.
    pub knots: Vec<f64>,
    /// Cell masses m_i ≥ 0 with Σ m_i = 1.
    pub masses: Vec<f64>,
    /// Knot velocities u_0, …, u_N.
    pub velocities: Vec<f64>,
    pub time: f64,
}

impl CellState {
    pub fn new(
        knots: Vec<f64>,
        masses: Vec<f64>,
        velocities: Vec<f64>,
        time: f64,
    ) -> Result<Self, Error> {
        if knots.len() < 2 || masses.len() + 1 != knots.len() {
            return Err(Error::InvalidState("need N+1 knots bounding N cells"));
        }
        if velocities.len() != knots.len() {
            return Err(Error::InvalidState("knots/velocities length mismatch"));
        }
        if !strictly_increasing(&knots) {
            return Err(Error::InvalidState("knots must be strictly increasing"));
        }
        if masses.iter().any(|&m| m < 0.0) {
            return Err(Error::InvalidState("cell masses must be nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState("cell masses must sum to 1"));
        }
        Ok(CellState {
            knots,
            masses,
            velocities,
            time,
        })
    }

    /// Number of cells N.
    pub fn num_cells(&self) -> usize {
        self.masses.len()
    }
}

pub(crate) fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// Total energy E = Σ ½ m u_i² + Σ U(m/(x_{i+1}−x_i)) (x_{i+1}−x_i) of a
/// particle configuration.
pub fn total_energy_particles(
    state: &ParticleState,
    model: &EnergyModel,
) -> Result<EnergyBreakdown, Error> {
    let m = state.particle_mass;
    let kinetic: f64 = state.velocities.iter().map(|&u| 0.5 * m * sq(u)).sum();
    let mut internal = 0.0;
    for w in state.positions.windows(2) {
        let gap = w[1] - w[0];
        if gap <= 0.0 {
            return Err(Error::InfiniteEnergy);
        }
        internal += model.u(m / gap) * gap;
    }
    Ok(EnergyBreakdown {
        kinetic,
        internal,
        total: kinetic + internal,
    })
}

/// Total energy of a cell configuration. The kinetic term integrates
/// ½ u² ρ exactly with u piecewise linear and ρ constant per cell:
/// Σ (m_i/6)(u_{i−1}² + u_{i−1} u_i + u_i²).
pub fn total_energy_cells(state: &CellState, model: &EnergyModel) -> Result<EnergyBreakdown, Error> {
    let mut kinetic = 0.0;
    let mut internal = 0.0;
    for i in 0..state.num_cells() {
        let gap = state.knots[i + 1] - state.knots[i];
        let m = state.masses[i];
        if gap <= 0.0 {
            if m > 0.0 {
                return Err(Error::InfiniteEnergy);
            }
            continue;
        }
        let (ul, ur) = (state.velocities[i], state.velocities[i + 1]);
        kinetic += m / 6.0 * (sq(ul) + ul * ur + sq(ur));
        internal += model.u(m / gap) * gap;
    }
    Ok(EnergyBreakdown {
        kinetic,
        internal,
        total: kinetic + internal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    fn models() -> Vec<EnergyModel> {
        vec![
            EnergyModel::polytropic(1.4).unwrap(),
            EnergyModel::polytropic(5.0 / 3.0).unwrap(),
            EnergyModel::polytropic(5.0).unwrap(),
            EnergyModel::porous_medium(3.0).unwrap(),
            EnergyModel::Isothermal,
        ]
    }

    #[test]
    fn energy_density_hand_values() {
        let m = EnergyModel::polytropic_with_kappa(2.0, 0.125).unwrap();
        assert!((m.energy_density(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(m.energy_density(0.0).unwrap(), 0.0);
        assert_eq!(EnergyModel::Isothermal.energy_density(0.0).unwrap(), 0.0);
        assert_eq!(EnergyModel::Isothermal.energy_density(1.0).unwrap(), 0.0);
    }

    #[test]
    fn pressure_hand_values() {
        assert!((EnergyModel::Isothermal.pressure(3.0).unwrap() - 3.0).abs() < 1e-15);
        let m = EnergyModel::polytropic_with_kappa(2.0, 0.125).unwrap();
        assert!((m.pressure(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(m.pressure(0.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_density_rejected() {
        for m in models() {
            assert!(m.energy_density(-1.0).is_err());
            assert!(m.pressure(-0.5).is_err());
        }
    }

    #[test]
    fn pressure_identity_and_derivatives() {
        // P(ρ) = U′(ρ)ρ − U(ρ), with U′ cross-checked by central differences.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for model in models() {
            for _ in 0..200 {
                let rho: f64 = rng.gen_range(1e-3..10.0);
                let p = model.pressure(rho).unwrap();
                let exact = model.du(rho) * rho - model.u(rho);
                assert!((p - exact).abs() <= 1e-12 * (1.0 + p.abs()));

                let h = 1e-6 * rho;
                let du_fd = (model.u(rho + h) - model.u(rho - h)) / (2.0 * h);
                assert!(
                    (du_fd - model.du(rho)).abs() <= 1e-6 * (1.0 + model.du(rho).abs()),
                    "du mismatch at rho = {rho}"
                );
                let ddu_fd = (model.du(rho + h) - model.du(rho - h)) / (2.0 * h);
                assert!((ddu_fd - model.ddu(rho)).abs() <= 1e-5 * (1.0 + model.ddu(rho).abs()));
            }
        }
    }

    #[test]
    fn energy_density_is_convex() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for model in models() {
            for _ in 0..500 {
                let r1: f64 = rng.gen_range(1e-3..10.0);
                let r2: f64 = rng.gen_range(1e-3..10.0);
                let lam: f64 = rng.gen_range(0.0..1.0);
                let mid = model.u(lam * r1 + (1.0 - lam) * r2);
                let chord = lam * model.u(r1) + (1.0 - lam) * model.u(r2);
                assert!(mid <= chord + 1e-12);
            }
        }
    }

    #[test]
    fn particle_energy_hand_values() {
        let s = ParticleState::new(vec![0.0, 1.0], vec![0.0, 0.0], 0.0).unwrap();
        let e = total_energy_particles(&s, &EnergyModel::Isothermal).unwrap();
        assert_eq!(e.kinetic, 0.0);
        assert!((e.internal - 0.5 * (0.5f64).ln()).abs() < 1e-15);

        let s = ParticleState::new(vec![0.0, 1.0], vec![2.0, -2.0], 0.0).unwrap();
        let e = total_energy_particles(&s, &EnergyModel::Isothermal).unwrap();
        assert!((e.kinetic - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cell_kinetic_energy_hand_values() {
        // Linear ramp over a single unit-mass cell: ∫₀¹ ½ s² ds = 1/6.
        let s = CellState::new(vec![0.0, 1.0], vec![1.0], vec![0.0, 1.0], 0.0).unwrap();
        let e = total_energy_cells(&s, &EnergyModel::Isothermal).unwrap();
        assert!((e.kinetic - 1.0 / 6.0).abs() < 1e-15);

        // Constant velocity c with unit total mass: kinetic = c²/2.
        let s = CellState::new(
            vec![0.0, 0.3, 1.0, 2.5],
            vec![0.2, 0.5, 0.3],
            vec![3.0; 4],
            0.0,
        )
        .unwrap();
        let e = total_energy_cells(&s, &EnergyModel::Isothermal).unwrap();
        assert!((e.kinetic - 4.5).abs() < 1e-12);

        let s = CellState::new(vec![0.0, 1.0], vec![1.0], vec![0.0, 0.0], 0.0).unwrap();
        assert_eq!(
            total_energy_cells(&s, &EnergyModel::Isothermal).unwrap().kinetic,
            0.0
        );
    }

    #[test]
    fn cell_kinetic_energy_matches_quadrature() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.gen_range(2..8);
            let mut knots = vec![0.0];
            for _ in 0..n {
                let last = *knots.last().unwrap();
                knots.push(last + rng.gen_range(0.1..2.0));
            }
            let mut masses: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = masses.iter().sum();
            masses.iter_mut().for_each(|m| *m /= total);
            let velocities: Vec<f64> = (0..=n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let s = CellState::new(knots.clone(), masses.clone(), velocities.clone(), 0.0).unwrap();

            let e = total_energy_cells(&s, &EnergyModel::Isothermal).unwrap();
            let mut quad_kin = 0.0;
            for i in 0..n {
                let (a, b) = (knots[i], knots[i + 1]);
                let rho = masses[i] / (b - a);
                let (ul, ur) = (velocities[i], velocities[i + 1]);
                quad_kin += crate::quad::integrate(
                    |x| {
                        let s = (x - a) / (b - a);
                        let u = ul * (1.0 - s) + ur * s;
                        0.5 * u * u * rho
                    },
                    a,
                    b,
                    1e-13,
                );
            }
            assert!(
                (e.kinetic - quad_kin).abs() <= 1e-10 * (1.0 + quad_kin.abs()),
                "kinetic {} vs quadrature {}",
                e.kinetic,
                quad_kin
            );
        }
    }

    #[test]
    fn coincident_positions_are_infinite_energy() {
        let s = ParticleState {
            positions: vec![0.0, 0.0, 1.0],
            velocities: vec![0.0; 3],
            particle_mass: 1.0 / 3.0,
            time: 0.0,
        };
        assert_eq!(
            total_energy_particles(&s, &EnergyModel::Isothermal),
            Err(Error::InfiniteEnergy)
        );
    }

    #[test]
    fn state_invariants_enforced() {
        assert!(ParticleState::new(vec![0.0], vec![0.0], 0.0).is_err());
        assert!(ParticleState::new(vec![0.0, 0.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(CellState::new(vec![0.0, 1.0], vec![0.5], vec![0.0, 0.0], 0.0).is_err());
        assert!(CellState::new(vec![1.0, 0.0], vec![1.0], vec![0.0, 0.0], 0.0).is_err());
        let s = ParticleState::new(vec![0.0, 0.5, 2.0], vec![1.0, 0.0, -1.0], 0.0).unwrap();
        assert!((s.particle_mass * s.len() as f64 - 1.0).abs() < 1e-15);
    }
}
