//! Classical fourth-order Runge–Kutta step on fixed-size state arrays.

/// Advances `x` by `h` with the derivative `f(t, x)`.
pub fn rk4_step<const N: usize>(t: f64, x: &[f64; N], h: f64, mut f: impl FnMut(f64, &[f64; N]) -> [f64; N]) -> [f64; N] {
    let axpy = |x: &[f64; N], k: &[f64; N], s: f64| -> [f64; N] { std::array::from_fn(|i| x[i] + s * k[i]) };
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * h, &axpy(x, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &axpy(x, &k2, 0.5 * h));
    let k4 = f(t + h, &axpy(x, &k3, h));
    std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}
