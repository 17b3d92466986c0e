//! Spectral right-hand sides for the primitive and reformulated systems.
//! Derivatives are taken in Fourier space; products are formed pointwise in
//! physical space with optional 2/3-rule dealiasing.

use super::{PState, TState};
use crate::lpbesov::{divergence, Field};
use crate::model::ModelParams;
use crate::scalar::{lit, Real};
use crate::{Error, Result};

fn product<T: Real>(a: &Field<T>, b: &Field<T>, dealias: bool) -> Field<T> {
    let p = a.mul(b);
    if dealias {
        p.dealias()
    } else {
        p
    }
}

/// Lifts a pointwise binary map over two fields, reporting the grid index on
/// the first failure.
fn lift2<T: Real>(a: &Field<T>, b: &Field<T>, f: impl Fn(T, T) -> Result<T>) -> Result<Field<T>> {
    let grid = a.grid();
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let v = f(a.values()[i], b.values()[i]).map_err(|e| {
            Error::Domain(format!("{e} (grid index {i}, coords {:?})", grid.coords(i)))
        })?;
        out.push(v);
    }
    Field::from_values(grid, out)
}

/// Advection term `(u . grad) f`.
fn advect<T: Real>(u: &[Field<T>], f: &Field<T>, dealias: bool) -> Field<T> {
    let mut out = product(&u[0], &f.deriv(0), dealias);
    for (axis, ui) in u.iter().enumerate().skip(1) {
        out = out.add(&product(ui, &f.deriv(axis), dealias));
    }
    out
}

/// Time derivative of the reformulated state:
///
/// dP~/dt = -kappa2 div u~ + G1,   G1 = -kappa1 h(P~,c~) div u~ - kappa1 u~.grad P~
/// du~/dt = -kappa2 grad P~ - alpha u~ + G2,
///           G2 = -kappa1 (u~.grad) u~ - (1/kappa1) (1/m - 1/m_inf) grad P~
/// dc~/dt = -kappa1 u~.grad c~
pub fn rhs_transformed<T: Real>(
    s: &TState<T>,
    params: &ModelParams<T>,
    dealias: bool,
) -> Result<TState<T>> {
    let k1 = params.kappa1;
    let k2 = params.kappa2;
    let div_u = divergence(&s.ut);
    let grad_p: Vec<Field<T>> = s.pt.grad();

    let h = lift2(&s.pt, &s.ct, |p, c| params.h_coeff(p, c))?;
    let m_dev = lift2(&s.pt, &s.ct, |p, c| params.m_reciprocal_dev(p, c))?;

    // dP~/dt
    let mut dpt = div_u.scale(-k2);
    dpt = dpt.sub(&product(&h, &div_u, dealias).scale(k1));
    dpt = dpt.sub(&advect(&s.ut, &s.pt, dealias).scale(k1));

    // du~/dt
    let mut dut = Vec::with_capacity(s.ut.len());
    for (axis, ui) in s.ut.iter().enumerate() {
        let mut d = grad_p[axis].scale(-k2).sub(&ui.scale(params.alpha));
        d = d.sub(&advect(&s.ut, ui, dealias).scale(k1));
        d = d.sub(&product(&m_dev, &grad_p[axis], dealias).scale(T::one() / k1));
        dut.push(d);
    }

    // dc~/dt
    let dct = advect(&s.ut, &s.ct, dealias).scale(-k1);

    Ok(TState {
        t: s.t,
        pt: dpt,
        ut: dut,
        ct: dct,
    })
}

/// Time derivative of the primitive state in velocity form:
///
/// dm/dt = -div(m u),  dn/dt = -div(n u),
/// du/dt = -(u.grad) u - grad P(m,n) / m - alpha u
pub fn rhs_primitive<T: Real>(
    s: &PState<T>,
    params: &ModelParams<T>,
    dealias: bool,
) -> Result<PState<T>> {
    let floor = lit::<T>(1e-8) * params.m_inf;
    if let Some(i) = s.m.values().iter().position(|&v| v < floor) {
        return Err(Error::Domain(format!(
            "liquid mass below floor at grid index {i}: m = {}",
            s.m.values()[i]
        )));
    }
    // conservative mass updates
    let flux = |density: &Field<T>| -> Vec<Field<T>> {
        s.u.iter().map(|ui| product(density, ui, dealias)).collect()
    };
    let dm = divergence(&flux(&s.m)).scale(-T::one());
    let dn = divergence(&flux(&s.n)).scale(-T::one());

    // pressure field and its gradient
    let p = lift2(&s.m, &s.n, |m, n| params.pressure(m, n.max(T::zero())))?;
    let grad_p = p.grad();
    let inv_m = s.m.map(|m| T::one() / m);

    let mut du = Vec::with_capacity(s.u.len());
    for (axis, ui) in s.u.iter().enumerate() {
        let mut d = advect(&s.u, ui, dealias).scale(-T::one());
        d = d.sub(&product(&grad_p[axis], &inv_m, dealias));
        d = d.sub(&ui.scale(params.alpha));
        du.push(d);
    }
    Ok(PState {
        t: s.t,
        m: dm,
        n: dn,
        u: du,
    })
}

/// The damped-mode variable `Z = kappa2 grad P~ + alpha u~`.
pub fn z_variable<T: Real>(s: &TState<T>, params: &ModelParams<T>) -> Vec<Field<T>> {
    s.pt.grad()
        .into_iter()
        .zip(&s.ut)
        .map(|(gp, u)| gp.scale(params.kappa2).add(&u.scale(params.alpha)))
        .collect()
}
