//! Large-deviation rate of the empirical measure of `N` samples in six dimensions.

/// Bound `a(N, p, alpha)` on `P[W_p(mu_N, f0) > N^(-alpha)]` for samples in `R^6`.
///
/// Three regimes: `p > 3`, `p = 3` and `1 <= p < 3`. The constants `c` and
/// `c_prime` depend on `p`, `alpha` and `f0` and are not known explicitly;
/// `1.0` is a neutral default.
pub fn fournier_rate(n: f64, p: f64, alpha: f64, c: f64, c_prime: f64) -> f64 {
    let exponent = if p > 3.0 {
        n.powf(1.0 - 2.0 * p * alpha)
    } else if p == 3.0 {
        n.powf(1.0 - 6.0 * alpha) / (2.0 + n.powf(3.0 * alpha)).ln().powi(2)
    } else {
        n.powf(1.0 - 6.0 * alpha)
    };
    c_prime * (-c * exponent).exp()
}
