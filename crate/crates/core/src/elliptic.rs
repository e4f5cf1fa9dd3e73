//! Elliptic integrals and Jacobi elliptic functions.
//!
//! Everything here is parameterised by the complementary parameter
//! `mc = 1 - m = 1 - k^2`, which callers can usually form without
//! cancellation. That matters close to the pendulum separatrix where `m -> 1`.

use std::f64::consts::FRAC_PI_2;

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
///
/// At most one argument may be zero; all must be non-negative.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0008;
    const C1: f64 = 1.0 / 24.0;
    const C2: f64 = 0.1;
    const C3: f64 = 3.0 / 44.0;
    const C4: f64 = 1.0 / 14.0;
    debug_assert!(x >= 0.0 && y >= 0.0 && z >= 0.0);

    let (mut xt, mut yt, mut zt) = (x, y, z);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lambda);
        yt = 0.25 * (yt + lambda);
        zt = 0.25 * (zt + lambda);
        let ave = (xt + yt + zt) / 3.0;
        let dx = (ave - xt) / ave;
        let dy = (ave - yt) / ave;
        let dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 + (C1 * e2 - C2 - C3 * e3) * e2 + C4 * e3) / ave.sqrt();
        }
    }
}

/// Arithmetic-geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K` as a function of `mc = 1 - m`.
pub fn complete_k(mc: f64) -> f64 {
    debug_assert!(mc > 0.0);
    FRAC_PI_2 / agm(1.0, mc.sqrt())
}

/// Incomplete integral `F(psi | m)` for `|psi| <= pi/2`, given
/// `sin psi`, `cos psi` and `delta2 = 1 - m sin^2 psi`.
///
/// Supplying `delta2` directly lets the caller avoid the cancellation in
/// `1 - m sin^2 psi` when `m` is close to 1.
pub fn incomplete_f_parts(sin_psi: f64, cos_psi: f64, delta2: f64) -> f64 {
    sin_psi * carlson_rf(cos_psi * cos_psi, delta2, 1.0)
}

/// Incomplete integral `F(psi | m)` for any real amplitude `psi`.
pub fn incomplete_f(psi: f64, m: f64) -> f64 {
    let half_turns = (psi / std::f64::consts::PI).round();
    let r = psi - half_turns * std::f64::consts::PI;
    let (s, c) = r.sin_cos();
    let base = incomplete_f_parts(s, c, 1.0 - m * s * s);
    if half_turns == 0.0 {
        base
    } else {
        base + 2.0 * half_turns * complete_k(1.0 - m)
    }
}

/// Jacobi `sn`, `cn`, `dn` at argument `u` and complementary parameter `mc`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Jacobi elliptic functions by the descending Landen (Gauss) transformation.
///
/// `mc = 1 - m`; `mc = 0` gives the hyperbolic limit. Negative `mc`
/// (i.e. `m > 1`) is handled through the reciprocal-modulus transformation.
pub fn jacobi(u: f64, mc: f64) -> Jacobi {
    const CA: f64 = 1e-9;
    if mc == 0.0 {
        let cn = 1.0 / u.cosh();
        return Jacobi { sn: u.tanh(), cn, dn: cn };
    }
    let mut emc = mc;
    let mut u = u;
    let reciprocal = emc < 0.0;
    let mut d = 0.0;
    if reciprocal {
        d = 1.0 - emc;
        emc /= -1.0 / d;
        d = d.sqrt();
        u *= d;
    }
    let mut em = [0.0f64; 16];
    let mut en = [0.0f64; 16];
    let mut a = 1.0;
    let mut dn = 1.0;
    let mut c = 1.0;
    let mut last = 0;
    for i in 0..16 {
        last = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= CA * a {
            break;
        }
        emc *= a;
        a = c;
    }
    u *= c;
    let mut sn = u.sin();
    let mut cn = u.cos();
    if sn != 0.0 {
        a = cn / sn;
        c *= a;
        for i in (0..=last).rev() {
            let b = em[i];
            a *= c;
            c *= dn;
            dn = (en[i] + a) / (b + a);
            a = c / b;
        }
        a = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { a } else { -a };
        cn = c * sn;
    }
    if reciprocal {
        std::mem::swap(&mut cn, &mut dn);
        sn /= d;
    }
    Jacobi { sn, cn, dn }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Midpoint-free Gauss–Legendre-style oracle: composite Simpson on a
    /// substituted integrand that stays bounded.
    fn f_quadrature(psi: f64, m: f64) -> f64 {
        let n = 20_000;
        let h = psi / n as f64;
        let g = |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt();
        let mut acc = g(0.0) + g(psi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn rf_special_values() {
        // R_F(x, x, x) = 1/sqrt(x)
        assert!((carlson_rf(4.0, 4.0, 4.0) - 0.5).abs() < 1e-15);
        // R_F(0, 1, 1) = pi/2
        assert!((carlson_rf(0.0, 1.0, 1.0) - FRAC_PI_2).abs() < 1e-15);
        // Published value R_F(1, 2, 0) = 1.3110287771461
        assert!((carlson_rf(1.0, 2.0, 0.0) - 1.311_028_777_146_1).abs() < 1e-12);
        // Symmetric in its arguments
        let a = carlson_rf(0.3, 1.7, 2.9);
        assert!((a - carlson_rf(2.9, 0.3, 1.7)).abs() < 1e-15);
    }

    #[test]
    fn complete_k_routes_agree() {
        for &m in &[0.0, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-10] {
            let mc: f64 = 1.0 - m;
            let via_rf = carlson_rf(0.0, mc, 1.0);
            assert!((complete_k(mc) - via_rf).abs() < 1e-13 * via_rf, "m = {m}");
        }
        assert!((complete_k(1.0) - FRAC_PI_2).abs() < 1e-15);
        // K(m = 1/2) = 1.854074677301372
        assert!((complete_k(0.5) - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn incomplete_matches_quadrature() {
        for &m in &[0.0, 0.3, 0.8, 0.95] {
            for &psi in &[0.1, 0.7, 1.2, 1.5] {
                let expect = f_quadrature(psi, m);
                assert!((incomplete_f(psi, m) - expect).abs() < 1e-11, "m={m} psi={psi}");
            }
        }
        // quasi-periodicity
        let m = 0.6;
        let k = complete_k(1.0 - m);
        assert!((incomplete_f(PI + 0.3, m) - (2.0 * k + incomplete_f(0.3, m))).abs() < 1e-13);
        assert!((incomplete_f(-0.4, m) + incomplete_f(0.4, m)).abs() < 1e-15);
    }

    #[test]
    fn jacobi_inverts_incomplete_integral() {
        for &m in &[0.0, 0.2, 0.7, 0.99, 1.0 - 1e-8] {
            for &psi in &[0.05, 0.6, 1.1, 1.55] {
                let u = incomplete_f(psi, m);
                let j = jacobi(u, 1.0 - m);
                assert!((j.sn - psi.sin()).abs() < 1e-12, "m={m} psi={psi}");
                assert!((j.cn - psi.cos()).abs() < 1e-12, "m={m} psi={psi}");
                let dn = (1.0 - m * psi.sin().powi(2)).sqrt();
                assert!((j.dn - dn).abs() < 1e-12, "m={m} psi={psi}");
            }
        }
    }

    #[test]
    fn jacobi_limits() {
        let j = jacobi(0.8, 1.0);
        assert!((j.sn - 0.8f64.sin()).abs() < 1e-15);
        assert!((j.cn - 0.8f64.cos()).abs() < 1e-15);
        assert!((j.dn - 1.0).abs() < 1e-15);
        let j = jacobi(0.8, 0.0);
        assert!((j.sn - 0.8f64.tanh()).abs() < 1e-15);
        assert!((j.cn - 1.0 / 0.8f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn jacobi_identities_and_period() {
        for &mc in &[0.9, 0.5, 0.1, 1e-4, 1e-9] {
            let m = 1.0 - mc;
            let k = complete_k(mc);
            for i in 0..40 {
                let u = -5.0 + 0.27 * i as f64;
                let j = jacobi(u, mc);
                assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-13);
                assert!((j.dn * j.dn + m * j.sn * j.sn - 1.0).abs() < 1e-13);
                let shifted = jacobi(u + 4.0 * k, mc);
                let tol = 1e-12 * (1.0 + u.abs() + 4.0 * k);
                assert!((shifted.sn - j.sn).abs() < tol, "mc={mc} u={u}");
                assert!((shifted.cn - j.cn).abs() < tol, "mc={mc} u={u}");
            }
        }
    }

    #[test]
    fn jacobi_derivative_matches_finite_difference() {
        // d sn/du = cn dn
        let mc = 0.3;
        let h = 1e-5;
        for i in 0..20 {
            let u = 0.31 * i as f64;
            let fd = (jacobi(u + h, mc).sn - jacobi(u - h, mc).sn) / (2.0 * h);
            let j = jacobi(u, mc);
            assert!((fd - j.cn * j.dn).abs() < 1e-9);
        }
    }
}
