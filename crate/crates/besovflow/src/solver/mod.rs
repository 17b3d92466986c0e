//! Time evolution: pseudo-spectral method-of-lines for the primitive and
//! reformulated systems, the classical RK4 stepper, and an exact
//! Fourier-multiplier oracle for the linearized dynamics.

mod dump;
mod oracle;
mod rhs;

pub use dump::{dump_fields, read_dump, DumpRecord};
pub use oracle::{expm_damped_wave, linear_evolve_grid, LinearOracle, OracleState};
pub use rhs::{rhs_primitive, rhs_transformed, z_variable};

use std::time::Instant;

use crate::lpbesov::Field;
use crate::scalar::{lit, Real};
use crate::{Error, Result};

/// Reformulated state `(P~, u~, c~)` on a periodic grid.
#[derive(Debug, Clone)]
pub struct TState<T: Real> {
    pub t: f64,
    pub pt: Field<T>,
    pub ut: Vec<Field<T>>,
    pub ct: Field<T>,
}

/// Primitive state `(m, n, u)` on a periodic grid.
#[derive(Debug, Clone)]
pub struct PState<T: Real> {
    pub t: f64,
    pub m: Field<T>,
    pub n: Field<T>,
    pub u: Vec<Field<T>>,
}

/// Time-integration scheme. Only classical RK4 is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub output_every: usize,
    pub cfl: f64,
    pub scheme: Scheme,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.0, // chosen from the CFL bound when nonpositive
            t_end: 1.0,
            dealias: true,
            output_every: 10,
            cfl: 0.4,
            scheme: Scheme::Rk4,
        }
    }
}

impl SolverConfig {
    /// Largest admissible step `C_cfl * dx / speed` for the given grid
    /// spacing and signal speed.
    pub fn cfl_dt(&self, dx: f64, speed: f64) -> f64 {
        self.cfl * dx / speed
    }

    pub fn validate(&self, dx: f64, speed: f64) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!(
                "time step dt = {} must be positive",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "t_end = {} must be nonnegative",
                self.t_end
            )));
        }
        let bound = self.cfl_dt(dx, speed);
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} violates the CFL bound {bound:.6e} (dx = {dx}, speed = {speed})",
                self.dt
            )));
        }
        Ok(())
    }
}

/// A state whose components form a flat vector of fields, so generic
/// linear-combination steppers apply.
pub trait StateVec<T: Real>: Clone {
    fn time(&self) -> f64;
    fn components(&self) -> Vec<&Field<T>>;
    fn rebuild(&self, fields: Vec<Field<T>>, t: f64) -> Self;
}

impl<T: Real> StateVec<T> for TState<T> {
    fn time(&self) -> f64 {
        self.t
    }

    fn components(&self) -> Vec<&Field<T>> {
        let mut v = vec![&self.pt];
        v.extend(self.ut.iter());
        v.push(&self.ct);
        v
    }

    fn rebuild(&self, mut fields: Vec<Field<T>>, t: f64) -> Self {
        let ct = fields.pop().expect("component count");
        let pt = fields.remove(0);
        TState {
            t,
            pt,
            ut: fields,
            ct,
        }
    }
}

impl<T: Real> StateVec<T> for PState<T> {
    fn time(&self) -> f64 {
        self.t
    }

    fn components(&self) -> Vec<&Field<T>> {
        let mut v = vec![&self.m, &self.n];
        v.extend(self.u.iter());
        v
    }

    fn rebuild(&self, mut fields: Vec<Field<T>>, t: f64) -> Self {
        let m = fields.remove(0);
        let n = fields.remove(0);
        PState { t, m, n, u: fields }
    }
}

/// `s + dt * k`, with the time slot set explicitly.
fn saxpy<T: Real, S: StateVec<T>>(s: &S, dt: T, k: &S, t: f64) -> S {
    let fields = s
        .components()
        .iter()
        .zip(k.components())
        .map(|(a, b)| a.zip_map(b, |x, y| x + dt * y))
        .collect();
    s.rebuild(fields, t)
}

fn assert_finite<T: Real, S: StateVec<T>>(s: &S, label: &str) -> Result<()> {
    for f in s.components() {
        if f.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!(
                "non-finite values in {label}; last good time t = {}",
                s.time()
            )));
        }
    }
    Ok(())
}

/// One classical fourth-order Runge-Kutta step.
pub fn step_rk4<T, S, F>(s: &S, rhs: &F, dt: f64) -> Result<S>
where
    T: Real,
    S: StateVec<T>,
    F: Fn(&S) -> Result<S>,
{
    let t = s.time();
    let h = lit::<T>(dt);
    let half = lit::<T>(0.5) * h;
    let k1 = rhs(s)?;
    let k2 = rhs(&saxpy(s, half, &k1, t + dt / 2.0))?;
    let k3 = rhs(&saxpy(s, half, &k2, t + dt / 2.0))?;
    let k4 = rhs(&saxpy(s, h, &k3, t + dt))?;
    let sixth = h / lit::<T>(6.0);
    let third = h / lit::<T>(3.0);
    let mut out = saxpy(s, sixth, &k1, t + dt);
    out = saxpy(&out, third, &k2, t + dt);
    out = saxpy(&out, third, &k3, t + dt);
    out = saxpy(&out, sixth, &k4, t + dt);
    assert_finite(&out, "RK4 update")?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct EvolveSummary {
    pub steps: usize,
    pub final_t: f64,
    pub wall_secs: f64,
}

/// Advances the state to `t_end`, invoking the sink at step 0, every
/// `output_every` steps, and at the final step.
pub fn evolve<T, S, F>(
    initial: S,
    cfg: &SolverConfig,
    rhs: F,
    sink: &mut dyn FnMut(&S) -> Result<()>,
) -> Result<(S, EvolveSummary)>
where
    T: Real,
    S: StateVec<T>,
    F: Fn(&S) -> Result<S>,
{
    let start = Instant::now();
    let n_steps = if cfg.t_end <= 0.0 {
        0
    } else {
        (cfg.t_end / cfg.dt).ceil() as usize
    };
    let dt = if n_steps > 0 {
        cfg.t_end / n_steps as f64
    } else {
        0.0
    };
    let mut state = initial;
    sink(&state)?;
    for step in 1..=n_steps {
        state = step_rk4(&state, &rhs, dt)?;
        if step % cfg.output_every.max(1) == 0 || step == n_steps {
            sink(&state)?;
        }
    }
    let summary = EvolveSummary {
        steps: n_steps,
        final_t: state.time(),
        wall_secs: start.elapsed().as_secs_f64(),
    };
    Ok((state, summary))
}

impl<T: Real> TState<T> {
    pub fn zeros(grid: crate::lpbesov::Grid) -> Self {
        TState {
            t: 0.0,
            pt: Field::zeros(grid),
            ut: (0..grid.dim).map(|_| Field::zeros(grid)).collect(),
            ct: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> crate::lpbesov::Grid {
        self.pt.grid()
    }

    /// Pointwise change of variables to the primitive state.
    pub fn to_primitive(&self, params: &crate::model::ModelParams<T>) -> Result<PState<T>> {
        let grid = self.grid();
        let mut m = Vec::with_capacity(grid.len());
        let mut n = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let pt = self.pt.values()[i];
            let ct = self.ct.values()[i];
            let mv = params.mass_from_pressure(pt + params.p_inf, ct)?;
            let nv = mv * (ct / params.a0 + params.n_inf / params.m_inf);
            if nv < -lit::<T>(1e-10) {
                return Err(Error::Domain(format!(
                    "negative reconstructed gas mass {nv} at grid index {i}"
                )));
            }
            m.push(mv);
            n.push(nv.max(T::zero()));
        }
        Ok(PState {
            t: self.t,
            m: Field::from_values(grid, m)?,
            n: Field::from_values(grid, n)?,
            u: self.ut.iter().map(|f| f.scale(params.kappa1)).collect(),
        })
    }
}

impl<T: Real> PState<T> {
    pub fn grid(&self) -> crate::lpbesov::Grid {
        self.m.grid()
    }

    /// Pointwise change of variables to the reformulated state.
    pub fn to_transformed(&self, params: &crate::model::ModelParams<T>) -> Result<TState<T>> {
        let grid = self.grid();
        let mut pt = Vec::with_capacity(grid.len());
        let mut ct = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let m = self.m.values()[i];
            let n = self.n.values()[i];
            if m <= T::zero() {
                return Err(Error::Domain(format!(
                    "nonpositive liquid mass {m} at grid index {i}"
                )));
            }
            pt.push(params.pressure(m, n.max(T::zero()))? - params.p_inf);
            ct.push(params.a0 * (n / m - params.n_inf / params.m_inf));
        }
        Ok(TState {
            t: self.t,
            pt: Field::from_values(grid, pt)?,
            ct: Field::from_values(grid, ct)?,
            ut: self
                .u
                .iter()
                .map(|f| f.scale(T::one() / params.kappa1))
                .collect(),
        })
    }

    /// Volume integrals of the conserved masses.
    pub fn total_masses(&self) -> (T, T) {
        let dv = lit::<T>(self.grid().cell_volume());
        let sm = self.m.values().iter().copied().sum::<T>() * dv;
        let sn = self.n.values().iter().copied().sum::<T>() * dv;
        (sm, sn)
    }
}
