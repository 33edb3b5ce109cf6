//! 1D optimal-transport toolkit: inverse distribution functions, exact
//! Wasserstein distances, the sorting/permutation transport step, mass
//! redistribution after particle crossings, and the L2 projection onto
//! piecewise-constant densities with prescribed cell masses.
//!
//! All integrals here (W distances, projection right-hand sides) are
//! piecewise quadratic on the merged mass partition of the two measures
//! involved, and are evaluated in closed form by a single linear sweep —
//! no quadrature error enters the convergence studies.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{fmin, sqrt};
use crate::optimizer::{solve_tridiag_spd, SymTridiag};
use crate::physics::{CellState, ParticleState};

/// A probability measure on the line with piecewise-constant density:
/// nondecreasing breakpoints x̂_0 ≤ … ≤ x̂_K and per-interval masses.
/// Equal consecutive breakpoints encode an atom of the interval's mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMeasure {
    pub breakpoints: Vec<f64>,
    pub masses: Vec<f64>,
}

impl PiecewiseMeasure {
    pub fn new(breakpoints: Vec<f64>, masses: Vec<f64>) -> Result<Self, Error> {
        if breakpoints.len() != masses.len() + 1 || masses.is_empty() {
            return Err(Error::InvalidState("need K+1 breakpoints for K masses"));
        }
        if breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidState("breakpoints must be nondecreasing"));
        }
        if masses.iter().any(|&m| m < 0.0 || m.is_nan()) {
            return Err(Error::InvalidState("masses must be nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState("masses must sum to 1"));
        }
        Ok(PiecewiseMeasure {
            breakpoints,
            masses,
        })
    }

    /// The density of a cell configuration, Eq.-for-Eq.
    pub fn from_cells(state: &CellState) -> Self {
        PiecewiseMeasure {
            breakpoints: state.knots.clone(),
            masses: state.masses.clone(),
        }
    }

    /// The empirical measure (1/N) Σ δ_{x_i} of a particle configuration,
    /// encoded as atoms (zero-width intervals) separated by massless gaps.
    pub fn from_particles(state: &ParticleState) -> Self {
        let n = state.len();
        let mut breakpoints = Vec::with_capacity(2 * n);
        let mut masses = Vec::with_capacity(2 * n - 1);
        for (i, &x) in state.positions.iter().enumerate() {
            if i > 0 {
                masses.push(0.0); // massless gap between consecutive atoms
            }
            breakpoints.push(x);
            breakpoints.push(x);
            masses.push(state.particle_mass);
        }
        debug_assert_eq!(breakpoints.len(), masses.len() + 1);
        PiecewiseMeasure {
            breakpoints,
            masses,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    s0: f64,
    s1: f64,
    x0: f64,
    x1: f64,
}

impl Seg {
    #[inline]
    fn interp(&self, s: f64) -> f64 {
        let t = (s - self.s0) / (self.s1 - self.s0);
        self.x0 + (self.x1 - self.x0) * t
    }
}

/// Generalized inverse F_μ⁻¹ of the distribution function of a
/// [`PiecewiseMeasure`]: piecewise affine on the cumulative-mass nodes
/// s_k = Σ_{i≤k} m_i, constant across atoms, jumping across massless gaps.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    /// Cumulative-mass nodes s_0 = 0 ≤ … ≤ s_K = 1.
    pub mass_nodes: Vec<f64>,
    /// Positions x_k at each mass node; nondecreasing.
    pub values: Vec<f64>,
    segs: Vec<Seg>,
}

impl InverseCdf {
    /// F_μ⁻¹(s) for s ∈ [0, 1], with the sup convention at jumps.
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let idx = self.segs.partition_point(|seg| seg.s1 < s);
        match self.segs.get(idx) {
            None => self.segs.last().expect("nonempty").x1,
            Some(seg) if s <= seg.s0 => seg.x0,
            Some(seg) => seg.interp(s),
        }
    }
}

/// Build the inverse distribution function of a measure. F_μ⁻¹ pushes the
/// uniform measure on [0,1] forward to μ.
pub fn inverse_cdf(mu: &PiecewiseMeasure) -> InverseCdf {
    let k = mu.masses.len();
    let mut mass_nodes = Vec::with_capacity(k + 1);
    let mut segs = Vec::with_capacity(k);
    let mut s = 0.0;
    mass_nodes.push(0.0);
    for i in 0..k {
        let s0 = s;
        s += mu.masses[i];
        mass_nodes.push(s);
        if mu.masses[i] > 0.0 {
            segs.push(Seg {
                s0,
                s1: s,
                x0: mu.breakpoints[i],
                x1: mu.breakpoints[i + 1],
            });
        }
    }
    InverseCdf {
        mass_nodes,
        values: mu.breakpoints.clone(),
        segs,
    }
}

/// Exact ∫ over [a,b] of the quadratic with endpoint values fa, fb and
/// midpoint value fm (Simpson's rule, exact for quadratics).
#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Wasserstein distance W(μ, ν) = √(∫₀¹ |F_μ⁻¹ − F_ν⁻¹|² ds), evaluated
/// exactly by merging the two mass partitions; the integrand is quadratic
/// on every merged subinterval.
pub fn wasserstein(mu: &PiecewiseMeasure, nu: &PiecewiseMeasure) -> f64 {
    let f = inverse_cdf(mu);
    let g = inverse_cdf(nu);
    sqrt(wasserstein_sq_cdfs(&f, &g))
}

pub(crate) fn wasserstein_sq_cdfs(f: &InverseCdf, g: &InverseCdf) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut s = 0.0;
    let mut total = 0.0;
    while i < f.segs.len() && j < g.segs.len() {
        let (fi, gj) = (f.segs[i], g.segs[j]);
        let end = fmin(fi.s1, gj.s1);
        if end > s {
            let (fa, fb) = (fi.interp(s), fi.interp(end));
            let (ga, gb) = (gj.interp(s), gj.interp(end));
            let da = fa - ga;
            let db = fb - gb;
            let dm = 0.5 * (fa + fb) - 0.5 * (ga + gb);
            total += simpson(s, end, da * da, dm * dm, db * db);
            s = end;
        }
        if fi.s1 <= s {
            i += 1;
        }
        if gj.s1 <= s {
            j += 1;
        }
    }
    total
}

/// Stable sort returning the permutation: `sorted[i] = y[sigma[i]]`, with
/// ties broken by original order (σ increasing among equal values).
pub fn sort_with_permutation(y: &[f64]) -> Result<(Vec<f64>, Vec<usize>), Error> {
    if y.iter().any(|v| v.is_nan()) {
        return Err(Error::NaN);
    }
    let mut sigma: Vec<usize> = (0..y.len()).collect();
    sigma.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let sorted = sigma.iter().map(|&i| y[i]).collect();
    Ok((sorted, sigma))
}

/// Redistribute the original cell masses onto the sorted, transported knots
/// x̂: cell i, whose endpoints land at sorted slots [k, l], splits its mass
/// over the new intervals k+1..l in proportion to their lengths, or equally
/// when the slots share one position (point-mass case). Conserves each
/// cell's mass exactly by assigning the remainder to the last interval.
pub fn redistribute_masses(masses: &[f64], sigma: &[usize], xhat: &[f64]) -> Vec<f64> {
    let n = masses.len();
    debug_assert_eq!(sigma.len(), n + 1);
    debug_assert_eq!(xhat.len(), n + 1);
    let mut inv = vec![0usize; n + 1];
    for (slot, &orig) in sigma.iter().enumerate() {
        inv[orig] = slot;
    }
    let mut mhat = vec![0.0; n];
    for i in 0..n {
        let (a, b) = (inv[i], inv[i + 1]);
        let (k, l) = if a <= b { (a, b) } else { (b, a) };
        let m = masses[i];
        if xhat[k] == xhat[l] {
            let share = m / (l - k) as f64;
            let mut acc = 0.0;
            for j in k + 1..l {
                mhat[j - 1] += share;
                acc += share;
            }
            mhat[l - 1] += crate::math::fmax(m - acc, 0.0);
        } else {
            let span = xhat[l] - xhat[k];
            let mut acc = 0.0;
            for j in k + 1..l {
                let c = m * (xhat[j] - xhat[j - 1]) / span;
                mhat[j - 1] += c;
                acc += c;
            }
            mhat[l - 1] += crate::math::fmax(m - acc, 0.0);
        }
    }
    mhat
}

/// FEM mass matrix A_{kl} = ∫ φ_k φ_l ds of the hat functions on the
/// cumulative-mass nodes: diagonal (m_k + m_{k+1})/3 (one-sided at the
/// boundary), off-diagonal m_{k+1}/6.
pub fn mass_matrix(masses: &[f64]) -> SymTridiag {
    let n = masses.len();
    let mut a = SymTridiag::zeros(n + 1);
    for i in 0..n {
        let m = masses[i];
        a.diag[i] += m / 3.0;
        a.diag[i + 1] += m / 3.0;
        a.off[i] = m / 6.0;
    }
    a
}

/// ‖z‖²_m = zᵀ A z = ∫₀¹ |Σ z_i φ_i(s)|² ds.
pub fn m_norm_sq(z: &[f64], a: &SymTridiag) -> f64 {
    a.quadratic_form(z)
}

/// Project ν onto the densities that are piecewise constant on N intervals
/// carrying the prescribed masses: returns the knot vector X = A⁻¹ b with
/// b_k = ∫ φ_k F_ν⁻¹ ds, minimizing W(μ_X, ν).
///
/// The output need not be monotone; callers that require ordering repair it
/// downstream (see the spreading step of the optimizer).
pub fn project_fixed_masses(nu: &PiecewiseMeasure, masses: &[f64]) -> Result<Vec<f64>, Error> {
    let (a, b) = projection_system(nu, masses)?;
    solve_tridiag_spd(&a, &b)
}

fn projection_system(
    nu: &PiecewiseMeasure,
    masses: &[f64],
) -> Result<(SymTridiag, Vec<f64>), Error> {
    let n = masses.len();
    if n == 0 {
        return Err(Error::InvalidState("no cells"));
    }
    if masses.iter().any(|&m| m <= 0.0) {
        return Err(Error::SingularMass);
    }
    let g = inverse_cdf(nu);
    let mut s_nodes = Vec::with_capacity(n + 1);
    let mut s = 0.0;
    s_nodes.push(0.0);
    for &m in masses {
        s += m;
        s_nodes.push(s);
    }

    let mut b = vec![0.0; n + 1];
    let mut k = 1usize; // hat segment [s_{k-1}, s_k]
    let mut j = 0usize; // ν segment
    let mut s = 0.0;
    while k <= n && j < g.segs.len() {
        let gj = g.segs[j];
        let end = fmin(s_nodes[k], gj.s1);
        if end > s {
            let mk = masses[k - 1];
            let (fa, fb) = (gj.interp(s), gj.interp(end));
            let fm = 0.5 * (fa + fb);
            // Falling hat φ_{k−1} and rising hat φ_k on this subinterval.
            let (pa, pb) = ((s_nodes[k] - s) / mk, (s_nodes[k] - end) / mk);
            b[k - 1] += simpson(s, end, pa * fa, 0.5 * (pa + pb) * fm, pb * fb);
            let (qa, qb) = ((s - s_nodes[k - 1]) / mk, (end - s_nodes[k - 1]) / mk);
            b[k] += simpson(s, end, qa * fa, 0.5 * (qa + qb) * fm, qb * fb);
            s = end;
        }
        if s_nodes[k] <= s {
            k += 1;
        }
        if gj.s1 <= s {
            j += 1;
        }
    }

    Ok((mass_matrix(masses), b))
}
