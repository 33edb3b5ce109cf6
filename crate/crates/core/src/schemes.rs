//! Time steppers: the first-order variational particle scheme VPS1 and its
//! α-family, the porous-medium variants PM1/PM2, the BDF2-based VPS2, its
//! first-order hybrid VPS1a, and a two-stage second-order DIRK scheme.
//!
//! Every step assembles a strictly convex objective
//! `penalty(transport) + internal energy` and hands it to the trust-region
//! Newton solver of [`crate::optimizer`]. Kinetic energy is dissipated by
//! replacing velocities with optimal-transport velocities: free-transport
//! the mass, sort (and for cell states redistribute + project), and read
//! the velocity off the rearrangement.

use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{fmin, sq};
use crate::optimizer::{
    minimize, spread_initial_guess, Evaluation, MinimizeStats, Objective, SymTridiag,
    TrustRegionConfig,
};
use crate::physics::{CellState, EnergyModel, ParticleState};
use crate::transport1d::{
    mass_matrix, project_fixed_masses, redistribute_masses, sort_with_permutation,
    PiecewiseMeasure,
};

/// Schemes implemented by this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Vps1,
    Vps1a,
    Vps2,
    Dirk2,
    Pm1,
    Pm2,
}

/// Step parameters shared by all schemes.
///
/// `alpha` parametrizes the first-order family: the implicit penalty
/// coefficient is 1/(2ατ²), so α = 2/3 recovers the variational 3/(4τ²)
/// discretization, α = 1 backward Euler, and α = 1/2 the Taylor-consistent
/// variant. Second-order schemes ignore `alpha`.
#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    pub alpha: f64,
    pub tau: f64,
    pub model: EnergyModel,
    pub trust_region: TrustRegionConfig,
}

impl SchemeConfig {
    pub const ALPHA_BACKWARD_EULER: f64 = 1.0;
    pub const ALPHA_VARIATIONAL: f64 = 2.0 / 3.0;
    pub const ALPHA_TAYLOR: f64 = 0.5;

    pub fn new(alpha: f64, tau: f64, model: EnergyModel) -> Result<Self, Error> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain("alpha must lie in (0, 1]"));
        }
        if !(tau > 0.0) {
            return Err(Error::Domain("tau must be positive"));
        }
        Ok(SchemeConfig {
            alpha,
            tau,
            model,
            trust_region: TrustRegionConfig::default(),
        })
    }

    /// The paper's default α = 2/3.
    pub fn variational(tau: f64, model: EnergyModel) -> Result<Self, Error> {
        Self::new(Self::ALPHA_VARIATIONAL, tau, model)
    }
}

/// Optimizer counters accumulated over the minimizations of one step.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub optimizer_iterations: usize,
    pub lambda_iterations: usize,
    pub final_scaled_grad_norm: f64,
}

impl StepStats {
    fn absorb(&mut self, stats: &MinimizeStats) {
        self.optimizer_iterations += stats.iterations;
        self.lambda_iterations += stats.lambda_iterations;
        self.final_scaled_grad_norm = stats.final_scaled_grad_norm;
    }
}

/// A stepped state together with the solver statistics of the step.
#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub state: T,
    pub stats: StepStats,
}

/// Two-level state window for the BDF2 schemes (VPS2, PM2).
#[derive(Debug, Clone)]
pub struct Bdf2History {
    previous: Option<CellState>,
    current: CellState,
}

impl Bdf2History {
    pub fn new(initial: CellState) -> Self {
        Bdf2History {
            previous: None,
            current: initial,
        }
    }

    pub fn current(&self) -> &CellState {
        &self.current
    }

    pub fn previous(&self) -> Option<&CellState> {
        self.previous.as_ref()
    }

    pub fn first_step(&self) -> bool {
        self.previous.is_none()
    }

    /// Shift the window: the current state becomes the previous one.
    pub fn advance(&mut self, next: CellState) {
        debug_assert_eq!(next.masses, self.current.masses);
        self.previous = Some(core::mem::replace(&mut self.current, next));
    }
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

/// Objective of the point-particle schemes:
/// F(z) = coeff Σ (z_i − a_i)² + Σ U(m/(z_{i+1}−z_i)) (z_{i+1}−z_i),
/// with coeff = m/(2ατ²) for VPS1 and m/(2τ) for the porous-medium step.
pub struct ParticleObjective<'a> {
    anchor: &'a [f64],
    coeff: f64,
    particle_mass: f64,
    model: EnergyModel,
}

/// The VPS1 functional: anchor x̂, penalty m/(2ατ²) (3m/(4τ²) at α = 2/3).
pub fn objective_vps1<'a>(
    xhat: &'a [f64],
    tau: f64,
    alpha: f64,
    particle_mass: f64,
    model: EnergyModel,
) -> ParticleObjective<'a> {
    ParticleObjective {
        anchor: xhat,
        coeff: particle_mass / (2.0 * alpha * sq(tau)),
        particle_mass,
        model,
    }
}

/// The JKO / porous-medium functional: anchor x^n, penalty m/(2τ).
pub fn objective_pm1<'a>(
    xn: &'a [f64],
    tau: f64,
    particle_mass: f64,
    model: EnergyModel,
) -> ParticleObjective<'a> {
    ParticleObjective {
        anchor: xn,
        coeff: particle_mass / (2.0 * tau),
        particle_mass,
        model,
    }
}

impl Objective for ParticleObjective<'_> {
    fn value(&self, z: &[f64]) -> Option<f64> {
        let m = self.particle_mass;
        let mut v = 0.0;
        for (zi, ai) in z.iter().zip(self.anchor) {
            v += self.coeff * sq(zi - ai);
        }
        for w in z.windows(2) {
            let gap = w[1] - w[0];
            if gap <= 0.0 {
                return None;
            }
            v += self.model.u(m / gap) * gap;
        }
        Some(v)
    }

    fn evaluate(&self, z: &[f64]) -> Option<Evaluation> {
        let n = z.len();
        let m = self.particle_mass;
        let mut value = 0.0;
        let mut gradient = Vec::with_capacity(n);
        for (zi, ai) in z.iter().zip(self.anchor) {
            value += self.coeff * sq(zi - ai);
            gradient.push(2.0 * self.coeff * (zi - ai));
        }
        let mut hessian = SymTridiag::zeros(n);
        hessian.diag.iter_mut().for_each(|d| *d += 2.0 * self.coeff);
        for i in 0..n - 1 {
            let gap = z[i + 1] - z[i];
            if gap <= 0.0 {
                return None;
            }
            let rho = m / gap;
            value += self.model.u(rho) * gap;
            let p = self.model.p(rho);
            gradient[i] += p;
            gradient[i + 1] -= p;
            // d²/dg² of U(m/g)·g is P′(m/g)·m/g².
            let curvature = self.model.dp(rho) * m / sq(gap);
            hessian.diag[i] += curvature;
            hessian.diag[i + 1] += curvature;
            hessian.off[i] -= curvature;
        }
        Some(Evaluation {
            value,
            gradient,
            hessian,
        })
    }
}

/// Objective of the cell schemes:
/// F(Z) = c1 ‖Z − A1‖²_m − c2 ‖Z − A2‖²_m + Σ U(m_i/(z_i−z_{i−1})) (z_i−z_{i−1}).
/// The net quadratic Hessian is 2(c1 − c2) A, positive definite whenever
/// c1 > c2 ≥ 0 and all masses are positive.
pub struct CellObjective<'a> {
    anchor1: &'a [f64],
    c1: f64,
    anchor2: Option<&'a [f64]>,
    c2: f64,
    mass_matrix: &'a SymTridiag,
    masses: &'a [f64],
    model: EnergyModel,
}

/// The VPS2 functional of the BDF2 step: (3/(2τ²))‖Z−X′‖²_m −
/// (3/(8τ²))‖Z−X″‖²_m + internal energy. With `xpp = None` (first
/// iteration) it degenerates to (3/(4τ²))‖Z−X′‖²_m + internal energy.
pub fn objective_vps2<'a>(
    xp: &'a [f64],
    xpp: Option<&'a [f64]>,
    tau: f64,
    a: &'a SymTridiag,
    masses: &'a [f64],
    model: EnergyModel,
) -> CellObjective<'a> {
    let (c1, c2) = if xpp.is_some() {
        (1.5 / sq(tau), 0.375 / sq(tau))
    } else {
        (0.75 / sq(tau), 0.0)
    };
    CellObjective {
        anchor1: xp,
        c1,
        anchor2: xpp,
        c2,
        mass_matrix: a,
        masses,
        model,
    }
}

impl CellObjective<'_> {
    fn quadratic(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let d1: Vec<f64> = z.iter().zip(self.anchor1).map(|(&a, &b)| a - b).collect();
        let ad1 = self.mass_matrix.matvec(&d1);
        let mut value = self.c1 * d1.iter().zip(&ad1).map(|(&x, &y)| x * y).sum::<f64>();
        let mut grad: Vec<f64> = ad1.iter().map(|&v| 2.0 * self.c1 * v).collect();
        if let Some(a2) = self.anchor2 {
            let d2: Vec<f64> = z.iter().zip(a2).map(|(&a, &b)| a - b).collect();
            let ad2 = self.mass_matrix.matvec(&d2);
            value -= self.c2 * d2.iter().zip(&ad2).map(|(&x, &y)| x * y).sum::<f64>();
            for (g, &v) in grad.iter_mut().zip(&ad2) {
                *g -= 2.0 * self.c2 * v;
            }
        }
        (value, grad)
    }
}

impl Objective for CellObjective<'_> {
    fn value(&self, z: &[f64]) -> Option<f64> {
        let mut v = self.quadratic(z).0;
        for (i, w) in z.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if gap <= 0.0 {
                return None;
            }
            if self.masses[i] > 0.0 {
                v += self.model.u(self.masses[i] / gap) * gap;
            }
        }
        Some(v)
    }

    fn evaluate(&self, z: &[f64]) -> Option<Evaluation> {
        let n = z.len();
        let (mut value, mut gradient) = self.quadratic(z);
        let scale = 2.0 * (self.c1 - self.c2);
        let mut hessian = self.mass_matrix.clone();
        hessian.diag.iter_mut().for_each(|d| *d *= scale);
        hessian.off.iter_mut().for_each(|e| *e *= scale);
        for i in 0..n - 1 {
            let gap = z[i + 1] - z[i];
            if gap <= 0.0 {
                return None;
            }
            let m = self.masses[i];
            if m == 0.0 {
                continue;
            }
            let rho = m / gap;
            value += self.model.u(rho) * gap;
            let p = self.model.p(rho);
            gradient[i] += p;
            gradient[i + 1] -= p;
            let curvature = self.model.dp(rho) * m / sq(gap);
            hessian.diag[i] += curvature;
            hessian.diag[i + 1] += curvature;
            hessian.off[i] -= curvature;
        }
        Some(Evaluation {
            value,
            gradient,
            hessian,
        })
    }
}

// ---------------------------------------------------------------------------
// Shared step machinery
// ---------------------------------------------------------------------------

fn min_gap(xs: &[f64]) -> f64 {
    xs.windows(2).fold(f64::INFINITY, |m, w| fmin(m, w[1] - w[0]))
}

/// dmin := ½ min_i (x_{i+1} − x_i) of the pre-step configuration.
fn spreading_floor(xs: &[f64]) -> f64 {
    0.5 * min_gap(xs)
}

/// Free-transport knots by `disp`, restore order, redistribute the cell
/// masses, and project back onto the fixed-mass piecewise-constant
/// densities. Returns the projected knots (possibly slightly non-monotone).
fn transport_and_project(knots: &[f64], masses: &[f64], disp: &[f64]) -> Result<Vec<f64>, Error> {
    let y: Vec<f64> = knots.iter().zip(disp).map(|(&x, &d)| x + d).collect();
    let (xhat, sigma) = sort_with_permutation(&y)?;
    let mhat = redistribute_masses(masses, &sigma, &xhat);
    let nu = PiecewiseMeasure {
        breakpoints: xhat,
        masses: mhat,
    };
    project_fixed_masses(&nu, masses)
}

fn run_minimizer(
    objective: &dyn Objective,
    anchor: &[f64],
    dmin: f64,
    config: &SchemeConfig,
    stats: &mut StepStats,
) -> Result<Vec<f64>, Error> {
    let z0 = spread_initial_guess(anchor, dmin);
    let (z, min_stats) = minimize(objective, &z0, &config.trust_region)?;
    stats.absorb(&min_stats);
    Ok(z)
}

// ---------------------------------------------------------------------------
// Particle steppers (VPS1, PM1)
// ---------------------------------------------------------------------------

/// One step of the first-order variational particle scheme: free transport,
/// stable sort (the 1D optimal-transport velocity projection), minimize the
/// VPS1 functional, and update velocities by
/// u^{n+1} = û + (1/(ατ)) (x^{n+1} − x̂).
pub fn vps1_step(
    state: &ParticleState,
    config: &SchemeConfig,
) -> Result<StepOutcome<ParticleState>, Error> {
    let tau = config.tau;
    let y: Vec<f64> = state
        .positions
        .iter()
        .zip(&state.velocities)
        .map(|(&x, &u)| x + tau * u)
        .collect();
    let (xhat, _) = sort_with_permutation(&y)?;
    let uhat: Vec<f64> = xhat
        .iter()
        .zip(&state.positions)
        .map(|(&xh, &x)| (xh - x) / tau)
        .collect();

    let mut stats = StepStats::default();
    let objective = objective_vps1(&xhat, tau, config.alpha, state.particle_mass, config.model);
    let z = run_minimizer(
        &objective,
        &xhat,
        spreading_floor(&state.positions),
        config,
        &mut stats,
    )?;

    let inv_atau = 1.0 / (config.alpha * tau);
    let velocities: Vec<f64> = uhat
        .iter()
        .zip(z.iter().zip(&xhat))
        .map(|(&uh, (&zi, &xh))| uh + inv_atau * (zi - xh))
        .collect();
    Ok(StepOutcome {
        state: ParticleState {
            positions: z,
            velocities,
            particle_mass: state.particle_mass,
            time: state.time + tau,
        },
        stats,
    })
}

/// One JKO step for the porous medium / heat equation on point particles:
/// minimize Σ (m/(2τ)) |z_i − x_i|² + internal energy. Velocities are
/// carried through unchanged (they play no role in the diffusion flow).
pub fn pm1_step(
    state: &ParticleState,
    config: &SchemeConfig,
) -> Result<StepOutcome<ParticleState>, Error> {
    let mut stats = StepStats::default();
    let objective = objective_pm1(
        &state.positions,
        config.tau,
        state.particle_mass,
        config.model,
    );
    let z = run_minimizer(
        &objective,
        &state.positions,
        spreading_floor(&state.positions),
        config,
        &mut stats,
    )?;
    Ok(StepOutcome {
        state: ParticleState {
            positions: z,
            velocities: state.velocities.clone(),
            particle_mass: state.particle_mass,
            time: state.time + config.tau,
        },
        stats,
    })
}

// ---------------------------------------------------------------------------
// Cell steppers (VPS2, VPS1a, PM2, DIRK2)
// ---------------------------------------------------------------------------

struct CellTransport {
    xp: Vec<f64>,
    up: Vec<f64>,
}

/// Transport `from` by `velocity` over `span`, project, and return the
/// projected knots with the realized transport velocity (x′ − x)/span.
fn projected_transport(
    from: &CellState,
    velocity: impl Iterator<Item = f64>,
    span: f64,
) -> Result<CellTransport, Error> {
    let disp: Vec<f64> = velocity.map(|u| span * u).collect();
    let xp = transport_and_project(&from.knots, &from.masses, &disp)?;
    let up = xp
        .iter()
        .zip(&from.knots)
        .map(|(&x1, &x0)| (x1 - x0) / span)
        .collect();
    Ok(CellTransport { xp, up })
}

/// One step of the second-order variational particle scheme (BDF2 in the
/// optimal-transport setting). The first step falls back to the
/// backward-Euler-style variant of the definition.
pub fn vps2_step(
    history: &Bdf2History,
    config: &SchemeConfig,
) -> Result<StepOutcome<CellState>, Error> {
    let cur = history.current();
    let tau = config.tau;
    let a = mass_matrix(&cur.masses);
    let dmin = spreading_floor(&cur.knots);
    let mut stats = StepStats::default();

    // (1a) transport from t^n along u^n.
    let t1 = projected_transport(cur, cur.velocities.iter().copied(), tau)?;

    if let Some(prev) = history.previous() {
        // (1b) transport from t^{n−1} along ⅔u^n + ⅓u^{n−1} over 2τ.
        let mix = cur
            .velocities
            .iter()
            .zip(&prev.velocities)
            .map(|(&un, &unm1)| (2.0 * un + unm1) / 3.0);
        let t2 = projected_transport(prev, mix, 2.0 * tau)?;

        // (2) minimize the BDF2 functional.
        let objective = objective_vps2(&t1.xp, Some(&t2.xp), tau, &a, &cur.masses, config.model);
        let z = run_minimizer(&objective, &t1.xp, dmin, config, &mut stats)?;

        // (3) u^{n+1} = 2u′ − u″ + (2/τ)(x^{n+1}−x′) − (1/(2τ))(x^{n+1}−x″).
        let velocities: Vec<f64> = (0..z.len())
            .map(|i| {
                2.0 * t1.up[i] - t2.up[i] + 2.0 / tau * (z[i] - t1.xp[i])
                    - 0.5 / tau * (z[i] - t2.xp[i])
            })
            .collect();
        Ok(StepOutcome {
            state: CellState {
                knots: z,
                masses: cur.masses.clone(),
                velocities,
                time: cur.time + tau,
            },
            stats,
        })
    } else {
        let objective = objective_vps2(&t1.xp, None, tau, &a, &cur.masses, config.model);
        let z = run_minimizer(&objective, &t1.xp, dmin, config, &mut stats)?;
        let velocities: Vec<f64> = (0..z.len())
            .map(|i| t1.up[i] + 1.5 / tau * (z[i] - t1.xp[i]))
            .collect();
        Ok(StepOutcome {
            state: CellState {
                knots: z,
                masses: cur.masses.clone(),
                velocities,
                time: cur.time + tau,
            },
            stats,
        })
    }
}

/// The VPS1a hybrid of the shock experiments: the VPS2 spatial pipeline
/// with the first-iteration (backward-Euler-style) objective and velocity
/// formulas applied at every step, so no history is carried.
pub fn vps1a_step(
    state: &CellState,
    config: &SchemeConfig,
) -> Result<StepOutcome<CellState>, Error> {
    vps2_step(&Bdf2History::new(state.clone()), config)
}

/// One BDF2 step for the porous medium / heat equation on cells: no
/// transport or velocity update, only the minimization with the
/// (1/τ, 1/(4τ)) penalty pair ((1/(2τ)) on the first step).
pub fn pm2_step(
    history: &Bdf2History,
    config: &SchemeConfig,
) -> Result<StepOutcome<CellState>, Error> {
    let cur = history.current();
    let tau = config.tau;
    let a = mass_matrix(&cur.masses);
    let mut stats = StepStats::default();
    let (c1, c2) = if history.first_step() {
        (0.5 / tau, 0.0)
    } else {
        (1.0 / tau, 0.25 / tau)
    };
    let objective = CellObjective {
        anchor1: &cur.knots,
        c1,
        anchor2: history.previous().map(|p| p.knots.as_slice()),
        c2,
        mass_matrix: &a,
        masses: &cur.masses,
        model: config.model,
    };
    let z = run_minimizer(
        &objective,
        &cur.knots,
        spreading_floor(&cur.knots),
        config,
        &mut stats,
    )?;
    Ok(StepOutcome {
        state: CellState {
            knots: z,
            masses: cur.masses.clone(),
            velocities: cur.velocities.clone(),
            time: cur.time + tau,
        },
        stats,
    })
}

/// One step of the two-stage, second-order, stiffly accurate DIRK scheme
/// with Butcher nodes (1/4, 1).
///
/// Stage 1 is a backward Euler (α = 1) step of length τ/4 through the full
/// transport/sort/redistribute/project/minimize pipeline. Stage 2
/// eliminates the stage-1 force evaluation, leaving a BDF2-like two-anchor
/// functional with coefficients (12/τ², 15/(2τ²)); both of its transports
/// run through the dissipative projection pipeline as well.
pub fn dirk2_step(
    state: &CellState,
    config: &SchemeConfig,
) -> Result<StepOutcome<CellState>, Error> {
    let tau = config.tau;
    let a = mass_matrix(&state.masses);
    let dmin = spreading_floor(&state.knots);
    let mut stats = StepStats::default();

    // Stage 1: backward Euler with steplength τ/4.
    let h = 0.25 * tau;
    let t1 = projected_transport(state, state.velocities.iter().copied(), h)?;
    let stage1 = CellObjective {
        anchor1: &t1.xp,
        c1: 0.5 / sq(h),
        anchor2: None,
        c2: 0.0,
        mass_matrix: &a,
        masses: &state.masses,
        model: config.model,
    };
    let x_quarter = run_minimizer(&stage1, &t1.xp, dmin, config, &mut stats)?;
    let v_quarter: Vec<f64> = (0..x_quarter.len())
        .map(|i| t1.up[i] + (x_quarter[i] - t1.xp[i]) / h)
        .collect();

    // Stage 2 anchors: X^{1/4} + τ(¾V^{1/4}) and X^n + τ(⅓V^n + ⅔V^{1/4}),
    // each transported dissipatively.
    let quarter_state = CellState {
        knots: x_quarter.clone(),
        masses: state.masses.clone(),
        velocities: v_quarter.clone(),
        time: state.time + h,
    };
    let b1 = projected_transport(&quarter_state, v_quarter.iter().map(|&v| 0.75 * v), tau)?;
    let mix = state
        .velocities
        .iter()
        .zip(&v_quarter)
        .map(|(&vn, &vq)| (vn + 2.0 * vq) / 3.0);
    let b2 = projected_transport(state, mix, tau)?;

    let dmin2 = spreading_floor(&x_quarter);
    let stage2 = CellObjective {
        anchor1: &b1.xp,
        c1: 12.0 / sq(tau),
        anchor2: Some(&b2.xp),
        c2: 7.5 / sq(tau),
        mass_matrix: &a,
        masses: &state.masses,
        model: config.model,
    };
    let z = run_minimizer(&stage2, &b1.xp, dmin2, config, &mut stats)?;

    // V^{n+1} = 8w₁ − 5w₂ + (τ/3) f[X^{n+1}], with f substituted from the
    // stationarity relation (24/τ²)[(X−B₁) − (5/8)(X−B₂)].
    let velocities: Vec<f64> = (0..z.len())
        .map(|i| {
            8.0 * b1.up[i] - 5.0 * b2.up[i] + 8.0 / tau * (z[i] - b1.xp[i])
                - 5.0 / tau * (z[i] - b2.xp[i])
        })
        .collect();
    Ok(StepOutcome {
        state: CellState {
            knots: z,
            masses: state.masses.clone(),
            velocities,
            time: state.time + tau,
        },
        stats,
    })
}

// ---------------------------------------------------------------------------

/// Kinetic energies (Σ û_i², Σ u_i²) before and after the sorting step;
/// sorting is the optimal assignment in 1D, so the first never exceeds the
/// second. Exposed for the property suites.
pub fn sorted_velocity_energy(state: &ParticleState, tau: f64) -> Result<(f64, f64), Error> {
    let y: Vec<f64> = state
        .positions
        .iter()
        .zip(&state.velocities)
        .map(|(&x, &u)| x + tau * u)
        .collect();
    let (xhat, _) = sort_with_permutation(&y)?;
    let before = state.velocities.iter().map(|&u| sq(u)).sum();
    let after = xhat
        .iter()
        .zip(&state.positions)
        .map(|(&xh, &x)| sq((xh - x) / tau))
        .sum();
    Ok((after, before))
}
