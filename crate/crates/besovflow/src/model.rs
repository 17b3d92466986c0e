//! Pressure law, equilibrium constants and the change of variables between
//! the primitive state `(m, n, u)` and the reformulated state `(P~, u~, c~)`.
//!
//! All operations here are pointwise and grid-agnostic; the solver lifts them
//! to fields by mapping.

use crate::scalar::{lit, Real};
use crate::{Error, Result};

/// Physical constants of the mixture pressure law together with the derived
/// equilibrium quantities.
///
/// The derived members satisfy `kappa1 * kappa2 * m_inf = 1` and
/// `p_inf = P(m_inf, n_inf)` by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T: Real> {
    pub c0: T,
    pub k0: T,
    pub a0: T,
    pub alpha: T,
    pub m_inf: T,
    pub n_inf: T,
    pub c_inf: T,
    pub p_inf: T,
    pub kappa1: T,
    pub kappa2: T,
}

/// Pointwise primitive state: liquid mass, gas mass and mixture velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive<T: Real> {
    pub m: T,
    pub n: T,
    pub u: Vec<T>,
}

/// Pointwise reformulated state: pressure perturbation, rescaled velocity
/// and gas-fraction perturbation. All components vanish at equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed<T: Real> {
    pub pt: T,
    pub ut: Vec<T>,
    pub ct: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(c0: T, k0: T, a0: T, alpha: T, m_inf: T, n_inf: T) -> Result<Self> {
        let zero = T::zero();
        if c0 <= zero || k0 <= zero || a0 <= zero || alpha <= zero {
            return Err(Error::Domain(
                "model constants C0, k0, a0, alpha must all be positive".into(),
            ));
        }
        if n_inf < zero {
            return Err(Error::Domain("n_inf must be nonnegative".into()));
        }
        // Far-field admissibility: m_inf > (1 - sgn n_inf) * k0.
        let sgn = if n_inf > zero { T::one() } else { zero };
        if m_inf <= (T::one() - sgn) * k0 {
            return Err(Error::Domain(format!(
                "far-field state inadmissible: m_inf = {m_inf} must exceed (1 - sgn n_inf)*k0 = {}",
                (T::one() - sgn) * k0
            )));
        }
        let c_inf = a0 * n_inf / m_inf;
        let mut params = ModelParams {
            c0,
            k0,
            a0,
            alpha,
            m_inf,
            n_inf,
            c_inf,
            p_inf: zero,
            kappa1: zero,
            kappa2: zero,
        };
        params.p_inf = params.pressure(m_inf, n_inf)?;
        let pm = params.pressure_dm(m_inf, zero)?;
        if pm <= zero {
            return Err(Error::Domain(format!(
                "P_m(m_inf, 0) = {pm} is not positive; equilibrium sound speed undefined"
            )));
        }
        params.kappa2 = pm.sqrt();
        params.kappa1 = T::one() / (params.kappa2 * m_inf);
        Ok(params)
    }

    /// Default constants used throughout the test harness: C0=0.5, k0=1,
    /// a0=0.25, alpha=1, m_inf=2, n_inf=1.
    pub fn default_params() -> Self {
        Self::new(lit(0.5), T::one(), lit(0.25), T::one(), lit(2.0), T::one())
            .expect("default constants are admissible")
    }

    /// Admissible liquid-mass interval. Inputs outside it are close enough to
    /// degeneracy that the closed forms lose their uniform bounds.
    pub fn admissible_m(&self) -> (T, T) {
        (lit::<T>(0.25) * self.m_inf, lit::<T>(4.0) * self.m_inf)
    }

    /// Admissible gas-fraction-perturbation interval.
    pub fn admissible_ct(&self) -> (T, T) {
        let half = lit::<T>(0.5) * self.c_inf + lit::<T>(0.1);
        (-half, half)
    }

    /// Mixture pressure `P(m, n) = C0 (-b1 + sqrt(b1^2 + b2))`.
    pub fn pressure(&self, m: T, n: T) -> Result<T> {
        if m <= T::zero() {
            return Err(Error::Domain(format!(
                "pressure: nonpositive liquid mass m = {m}"
            )));
        }
        if n < T::zero() {
            return Err(Error::Domain(format!(
                "pressure: negative gas mass n = {n}"
            )));
        }
        let b1 = self.k0 - m - self.a0 * n;
        let b2 = lit::<T>(4.0) * self.k0 * self.a0 * n;
        let val = self.c0 * (-b1 + (b1 * b1 + b2).sqrt());
        if !val.is_finite() {
            return Err(Error::Domain(format!(
                "pressure overflow at (m, n) = ({m}, {n})"
            )));
        }
        Ok(val)
    }

    /// Pressure expressed in the `(m, c~)` variables, i.e. with the gas mass
    /// eliminated through `n = m (c~ + c_inf) / a0`.
    pub fn pressure_mc(&self, m: T, ct: T) -> Result<T> {
        let gamma = ct + self.c_inf;
        let b1 = self.k0 - m - m * gamma;
        let arg = b1 * b1 + lit::<T>(4.0) * self.k0 * m * gamma;
        if arg < T::zero() {
            return Err(Error::Domain(format!(
                "pressure_mc: negative square-root argument at (m, ct) = ({m}, {ct})"
            )));
        }
        Ok(self.c0 * (-b1 + arg.sqrt()))
    }

    /// Closed-form partial derivative of the pressure with respect to the
    /// liquid mass at fixed gas fraction.
    pub fn pressure_dm(&self, m: T, ct: T) -> Result<T> {
        let gamma = ct + self.c_inf;
        let a = self.k0 - m - m * gamma;
        let arg = a * a + lit::<T>(4.0) * self.k0 * m * gamma;
        if arg <= T::zero() {
            return Err(Error::Domain(format!(
                "pressure_dm: degenerate state at (m, ct) = ({m}, {ct})"
            )));
        }
        let s = arg.sqrt();
        let one_g = T::one() + gamma;
        Ok(self.c0 * (one_g + (-a * one_g + lit::<T>(2.0) * self.k0 * gamma) / s))
    }

    /// Inverts the pressure law for the liquid mass at fixed `c~`.
    ///
    /// Uses the rational closed form away from its singular set and falls
    /// back to bisection on the pressure when the denominator degenerates
    /// (the `n_inf = 0, c~ = 0` branch).
    pub fn mass_from_pressure(&self, p: T, ct: T) -> Result<T> {
        // Equilibrium is a fixed point by definition of the perturbation.
        if p == self.p_inf && ct == T::zero() {
            return Ok(self.m_inf);
        }
        let gamma = ct + self.c_inf;
        let two = lit::<T>(2.0);
        let num = p * p + two * self.k0 * self.c0 * p;
        let den = two * self.c0 * (T::one() + gamma) * p
            + lit::<T>(4.0) * self.k0 * self.c0 * self.c0 * gamma;
        let scale = self.c0 * (self.p_inf + p.abs() + T::one());
        if den.abs() > lit::<T>(1e-10) * scale {
            return Ok(num / den);
        }
        self.mass_by_bisection(p, ct)
    }

    fn mass_by_bisection(&self, p: T, ct: T) -> Result<T> {
        if p < T::zero() {
            return Err(Error::Domain(format!(
                "mass_from_pressure: degenerate denominator and negative pressure {p}"
            )));
        }
        let mut lo = lit::<T>(1e-8) * self.m_inf;
        let mut hi = lit::<T>(16.0) * self.m_inf;
        let f = |m: T| -> Result<T> { Ok(self.pressure_mc(m, ct)? - p) };
        let mut flo = f(lo)?;
        let fhi = f(hi)?;
        if flo * fhi > T::zero() {
            return Err(Error::Domain(format!(
                "mass_from_pressure: pressure {p} not bracketed at ct = {ct}"
            )));
        }
        let tol = lit::<T>(1e-12).max(T::epsilon() * self.m_inf);
        for _ in 0..200 {
            let mid = (lo + hi) * lit::<T>(0.5);
            let fm = f(mid)?;
            if fm == T::zero() || (hi - lo) * lit::<T>(0.5) < tol {
                return Ok(mid);
            }
            if fm * flo < T::zero() {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        Ok((lo + hi) * lit::<T>(0.5))
    }

    /// The nonlinear coefficient `h(P~, c~) = P_m(m, c~) m - P_m(m_inf, 0) m_inf`
    /// multiplying the velocity divergence in the reformulated system.
    pub fn h_coeff(&self, pt: T, ct: T) -> Result<T> {
        let m = self.mass_from_pressure(pt + self.p_inf, ct)?;
        if m == self.m_inf && ct == T::zero() {
            return Ok(T::zero());
        }
        Ok(self.pressure_dm(m, ct)? * m - self.kappa2 * self.kappa2 * self.m_inf)
    }

    /// The reciprocal-mass deviation `M(P~, c~) = 1/m - 1/m_inf` appearing in
    /// the momentum source term.
    pub fn m_reciprocal_dev(&self, pt: T, ct: T) -> Result<T> {
        let m = self.mass_from_pressure(pt + self.p_inf, ct)?;
        Ok((self.m_inf - m) / (m * self.m_inf))
    }

    /// Forward change of variables `(m, n, u) -> (P~, u~, c~)`.
    pub fn to_transformed(&self, state: &Primitive<T>) -> Result<Transformed<T>> {
        if state.m <= T::zero() {
            return Err(Error::Domain(format!(
                "to_transformed: nonpositive liquid mass m = {}",
                state.m
            )));
        }
        let pt = self.pressure(state.m, state.n)? - self.p_inf;
        let ct = self.a0 * (state.n / state.m - self.n_inf / self.m_inf);
        let ut = state.u.iter().map(|&u| u / self.kappa1).collect();
        Ok(Transformed { pt, ut, ct })
    }

    /// Backward change of variables `(P~, u~, c~) -> (m, n, u)`.
    pub fn to_primitive(&self, state: &Transformed<T>) -> Result<Primitive<T>> {
        let m = self.mass_from_pressure(state.pt + self.p_inf, state.ct)?;
        let n = m * (state.ct / self.a0 + self.n_inf / self.m_inf);
        if n < -lit::<T>(1e-10) * (T::one() + self.n_inf) {
            return Err(Error::Domain(format!(
                "to_primitive: reconstructed gas mass n = {n} is negative"
            )));
        }
        let u = state.u_scaled(self.kappa1);
        Ok(Primitive {
            m,
            n: n.max(T::zero()),
            u,
        })
    }
}

impl<T: Real> Transformed<T> {
    fn u_scaled(&self, kappa1: T) -> Vec<T> {
        self.ut.iter().map(|&v| kappa1 * v).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> ModelParams<f64> {
        ModelParams::default_params()
    }

    #[test]
    fn pressure_vanishes_below_reference_mass_without_gas() {
        // b2 = 0 and b1 > 0 forces -b1 + |b1| = 0.
        let p = ModelParams::<f64>::new(0.5, 1.0, 0.25, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(p.pressure(0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn pressure_matches_high_precision_reference() {
        // 0.5*(1.25 + sqrt(2.5625)), frozen from a 40-digit evaluation.
        let p = params();
        let got = p.pressure(2.0, 1.0).unwrap();
        assert!((got - 1.425390529679106).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_pressure_is_stored() {
        let p = params();
        assert_eq!(p.pressure(p.m_inf, p.n_inf).unwrap(), p.p_inf);
    }

    #[test]
    fn kappa_identity_holds() {
        for (m_inf, n_inf) in [(2.0, 1.0), (1.5, 0.3), (3.0, 0.0), (2.5, 2.0)] {
            let p = ModelParams::<f64>::new(0.5, 1.0, 0.25, 1.0, m_inf, n_inf).unwrap();
            assert!((p.kappa1 * p.kappa2 * p.m_inf - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn kappa2_squared_is_pressure_slope_at_equilibrium() {
        let p = params();
        let pm = p.pressure_dm(p.m_inf, 0.0).unwrap();
        assert!((pm - p.kappa2 * p.kappa2).abs() < 1e-15);
        // frozen reference: P_m(2, 0) = 1.0798255862560076
        assert!((pm - 1.0798255862560076).abs() < 1e-14);
    }

    #[test]
    fn pressure_dm_agrees_with_central_differences() {
        let p = params();
        let (m_lo, m_hi) = (0.5 * p.m_inf, 1.5 * p.m_inf);
        for i in 0..100 {
            let m = m_lo + (m_hi - m_lo) * (i as f64) / 99.0;
            for ct in [-0.05, 0.0, 0.08] {
                let exact = p.pressure_dm(m, ct).unwrap();
                let h = 1e-6 * m;
                let fd = (p.pressure_mc(m + h, ct).unwrap() - p.pressure_mc(m - h, ct).unwrap())
                    / (2.0 * h);
                assert!(
                    (exact - fd).abs() <= 1e-6 * exact.abs().max(1.0),
                    "m={m} ct={ct} exact={exact} fd={fd}"
                );
            }
        }
    }

    #[test]
    fn pressure_dm_step_sweep_at_equilibrium() {
        // Finite-difference oracle with decreasing step; the closed form must
        // sit within the extrapolated limit to 1e-8 relative.
        let p = params();
        let exact = p.pressure_dm(p.m_inf, 0.0).unwrap();
        let mut best = f64::INFINITY;
        for k in 2..7 {
            let h = 10f64.powi(-k);
            let fd = (p.pressure_mc(p.m_inf + h, 0.0).unwrap()
                - p.pressure_mc(p.m_inf - h, 0.0).unwrap())
                / (2.0 * h);
            best = best.min((fd - exact).abs() / exact.abs());
        }
        assert!(best < 1e-8, "best relative error {best}");
    }

    #[test]
    fn pressure_dm_positive_on_admissible_grid() {
        let p = params();
        let (m_lo, m_hi) = p.admissible_m();
        let (c_lo, c_hi) = p.admissible_ct();
        let mut scanned = 0usize;
        for i in 0..40 {
            let m = m_lo + (m_hi - m_lo) * (i as f64) / 39.0;
            for j in 0..20 {
                let ct = c_lo + (c_hi - c_lo) * (j as f64) / 19.0;
                // monotonicity is only claimed where the implied gas mass
                // n = m (ct + c_inf) / a0 is positive
                if ct + p.c_inf <= 0.0 {
                    continue;
                }
                scanned += 1;
                assert!(p.pressure_dm(m, ct).unwrap() > 0.0, "m={m} ct={ct}");
            }
        }
        assert!(scanned > 500, "scan covered only {scanned} points");
    }

    #[test]
    fn mass_fixed_point_at_equilibrium() {
        let p = params();
        assert_eq!(p.mass_from_pressure(p.p_inf, 0.0).unwrap(), p.m_inf);
    }

    #[test]
    fn mass_inverts_pressure_example() {
        let p = params();
        // ct at (m=2, n=1) is exactly 0 for the default equilibrium.
        let m = p.mass_from_pressure(1.425390529679106, 0.0).unwrap();
        assert!((m - 2.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_gasless_branch_uses_bisection() {
        // n_inf = 0 requires m_inf > k0; the closed-form denominator vanishes
        // on the c~ = 0 line when P -> 0.
        let p = ModelParams::<f64>::new(0.5, 1.0, 0.25, 1.0, 3.0, 0.0).unwrap();
        assert_eq!(p.c_inf, 0.0);
        for m in [2.0, 2.5, 3.5] {
            let pr = p.pressure(m, 0.0).unwrap();
            let back = p.mass_from_pressure(pr, 0.0).unwrap();
            assert!((back - m).abs() < 1e-9, "m={m} back={back}");
        }
    }

    #[test]
    fn h_and_reciprocal_dev_vanish_at_equilibrium() {
        let p = params();
        assert_eq!(p.h_coeff(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(p.m_reciprocal_dev(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn h_is_locally_lipschitz_in_pressure() {
        let p = params();
        let mut c = 0.0f64;
        for i in 1..50 {
            let pt = 0.01 * (i as f64) / 50.0;
            c = c.max((p.h_coeff(pt, 0.0).unwrap() / pt).abs());
        }
        let h = p.h_coeff(0.01, 0.0).unwrap();
        assert!(h.abs() <= (c + 0.1) * 0.01, "h={h} lipschitz={c}");
    }

    #[test]
    fn h_matches_finite_difference_along_ct() {
        // d/dc~ of P_m(m, c~) m at fixed P~ = 0, compared against h(0, eps)/eps.
        let p = params();
        let eps = 1e-5;
        let h = p.h_coeff(0.0, eps).unwrap();
        let g = |ct: f64| {
            let m = p.mass_from_pressure(p.p_inf, ct).unwrap();
            p.pressure_dm(m, ct).unwrap() * m
        };
        let fd = (g(eps) - g(-eps)) / 2.0;
        assert!((h - fd).abs() < 1e-8 * fd.abs().max(1.0), "h={h} fd={fd}");
    }

    #[test]
    fn reciprocal_dev_matches_finite_difference() {
        let p = params();
        let eps = 0.01;
        let got = p.m_reciprocal_dev(eps, 0.0).unwrap();
        let h = 1e-6;
        let dm_dp = (p.mass_from_pressure(p.p_inf + h, 0.0).unwrap()
            - p.mass_from_pressure(p.p_inf - h, 0.0).unwrap())
            / (2.0 * h);
        let lin = -dm_dp / (p.m_inf * p.m_inf) * eps;
        assert!((got - lin).abs() < 1e-4, "got={got} linearized={lin}");
    }

    #[test]
    fn reciprocal_dev_sign_follows_pressure() {
        let p = params();
        for i in 1..30 {
            let pt = 0.3 * (i as f64) / 30.0;
            assert!(p.m_reciprocal_dev(pt, 0.0).unwrap() < 0.0);
            assert!(p.m_reciprocal_dev(-pt, 0.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn equilibrium_maps_to_zero() {
        let p = params();
        let t = p
            .to_transformed(&Primitive {
                m: p.m_inf,
                n: p.n_inf,
                u: vec![0.0, 0.0],
            })
            .unwrap();
        assert_eq!(t.pt, 0.0);
        assert_eq!(t.ct, 0.0);
        assert_eq!(t.ut, vec![0.0, 0.0]);
    }

    #[test]
    fn proportional_gas_mass_gives_zero_ct() {
        let p = params();
        let m = 1.3;
        let n = p.n_inf * m / p.m_inf;
        let t = p.to_transformed(&Primitive { m, n, u: vec![0.1] }).unwrap();
        assert!(t.ct.abs() < 1e-16);
    }

    #[test]
    fn far_field_condition_is_enforced() {
        // n_inf = 0 demands m_inf > k0.
        assert!(ModelParams::<f64>::new(0.5, 1.0, 0.25, 1.0, 0.8, 0.0).is_err());
        assert!(ModelParams::<f64>::new(0.5, 1.0, 0.25, 1.0, 1.2, 0.0).is_ok());
    }

    #[test]
    fn pressure_increasing_in_mass_with_gas_present() {
        let p = params();
        let (m_lo, m_hi) = p.admissible_m();
        let mut prev = -1.0;
        for i in 0..200 {
            let m = m_lo + (m_hi - m_lo) * (i as f64) / 199.0;
            let pr = p.pressure(m, 1.0).unwrap();
            assert!(pr > prev, "pressure not increasing at m={m}");
            prev = pr;
        }
    }

    proptest! {
        #[test]
        fn round_trip_primitive_transformed(
            m in 1.0f64..3.0,
            ct in -0.1f64..0.1,
            u0 in -1.0f64..1.0,
            u1 in -1.0f64..1.0,
        ) {
            let p = params();
            let n = m * (ct / p.a0 + p.n_inf / p.m_inf);
            prop_assume!(n >= 0.0);
            let prim = Primitive { m, n, u: vec![u0, u1] };
            let back = p.to_primitive(&p.to_transformed(&prim).unwrap()).unwrap();
            prop_assert!((back.m - m).abs() <= 1e-10 * m.abs());
            prop_assert!((back.n - n).abs() <= 1e-10 * n.abs().max(1.0));
            prop_assert!((back.u[0] - u0).abs() <= 1e-12 * u0.abs().max(1.0));
            prop_assert!((back.u[1] - u1).abs() <= 1e-12 * u1.abs().max(1.0));
        }

        #[test]
        fn mass_pressure_round_trip(m in 1.0f64..3.0, ct in -0.1f64..0.1) {
            let p = params();
            let pr = p.pressure_mc(m, ct).unwrap();
            let back = p.mass_from_pressure(pr, ct).unwrap();
            prop_assert!((back - m).abs() <= 1e-10 * m, "m={m} back={back}");
        }
    }
}
