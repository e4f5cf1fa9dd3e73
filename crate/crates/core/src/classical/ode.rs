//! Adaptive Dormand-Prince 5(4) integration of the pendulum, used where the
//! elliptic-function solution degenerates at the separatrix.

// The pendulum is autonomous, so the stage nodes c_i never enter.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Differences between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

fn axpy(y: State, terms: &[(f64, State)], h: f64) -> State {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrates `y' = f(y)` over `[0, duration]` with mixed absolute/relative tolerance `tol`.
pub fn integrate<F: Fn(State) -> State>(f: F, mut y: State, duration: f64, tol: f64) -> State {
    if duration <= 0.0 {
        return y;
    }
    let mut t = 0.0;
    let mut h = (duration / 16.0).min(1e-3);
    let mut k1 = f(y);
    while t < duration {
        if t + h > duration {
            h = duration - t;
        }
        let k2 = f(axpy(y, &[(A21, k1)], h));
        let k3 = f(axpy(y, &[(A31, k1), (A32, k2)], h));
        let k4 = f(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
        let k5 = f(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
        let k6 = f(axpy(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], h));
        let y5 = axpy(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], h);
        let k7 = f(y5);
        let mut err = 0.0f64;
        for i in 0..2 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol * (1.0 + y[i].abs().max(y5[i].abs()));
            err = err.max((e / scale).abs());
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * duration {
            h = 1e-14 * duration;
        }
    }
    y
}

/// Pendulum `phi' = p`, `p' = -K sin phi` for time `w`; returns unreduced `(phi, p)`.
pub fn pendulum(phi: f64, p: f64, w: f64, k: f64, tol: f64) -> (f64, f64) {
    let out = integrate(|s| [s[1], -k * s[0].sin()], [phi, p], w, tol);
    (out[0], out[1])
}
