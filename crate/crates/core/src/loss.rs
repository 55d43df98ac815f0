//! Elementary functions of binary log loss.

use crate::error::{Error, Result};
use crate::num::Real;
use serde::{Deserialize, Serialize};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Prob<T = f64>(T);

impl<T: Real> Prob<T> {
    pub fn new(value: T) -> Result<Self> {
        if value >= T::zero() && value <= T::one() {
            Ok(Prob(value))
        } else {
            Err(Error::InvalidArgument(format!("probability {value} outside [0, 1]")))
        }
    }

    pub fn get(self) -> T {
        self.0
    }
}

impl<T: Serialize> Serialize for Prob<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for Prob<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Prob::new(T::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `(2 - log 2) / (log 3 - log 2)`.
pub fn regret_constant<T: Real>() -> T {
    let two = T::lit(2.0);
    let l2 = T::LN_2();
    (two - l2) / (T::lit(3.0).ln() - l2)
}

/// The threshold `1 / c`.
pub fn lambda_star<T: Real>() -> T {
    T::one() / regret_constant::<T>()
}

/// `-y log p - (1-y) log(1-p)`, `+inf` when the realized outcome had probability zero.
pub fn log_loss<T: Real>(p: T, y: bool) -> T {
    if y {
        if p <= T::zero() {
            T::infinity()
        } else {
            -p.ln()
        }
    } else if p >= T::one() {
        T::infinity()
    } else {
        -(-p).ln_1p()
    }
}

/// First derivative of the loss in `p`.
pub fn eta<T: Real>(p: T, y: bool) -> T {
    if y {
        if p <= T::zero() {
            T::neg_infinity()
        } else {
            -p.recip()
        }
    } else if p >= T::one() {
        T::infinity()
    } else {
        (T::one() - p).recip()
    }
}

/// Second derivative of the loss in `p`.
pub fn loss_d2<T: Real>(p: T, y: bool) -> T {
    let e = eta(p, y);
    e * e
}

/// Third derivative of the loss in `p`.
pub fn loss_d3<T: Real>(p: T, y: bool) -> T {
    let e = eta(p, y);
    T::lit(2.0) * e * e * e
}

/// `z - |z| + log(1 + |z|)`.
pub fn phi<T: Real>(z: T) -> T {
    let a = z.abs();
    z - a + a.ln_1p()
}

/// `z - log(1 + z)` for `z >= 0`.
pub fn omega<T: Real>(z: T) -> Result<T> {
    if !(z >= T::zero()) {
        return Err(Error::InvalidArgument(format!("omega needs z >= 0, got {z}")));
    }
    Ok(z - z.ln_1p())
}

fn xlogx_ratio<T: Real>(a: T, b: T) -> T {
    if a == T::zero() {
        T::zero()
    } else if b == T::zero() {
        T::infinity()
    } else {
        a * (a / b).ln()
    }
}

/// KL divergence between `Ber(p)` and `Ber(q)`.
pub fn kl_bernoulli<T: Real>(p: T, q: T) -> T {
    let one = T::one();
    let v = xlogx_ratio(p, q) + xlogx_ratio(one - p, one - q);
    // rounding can leave a tiny negative value near p == q
    v.max(T::zero())
}

/// Clips `p` into `[delta, 1 - delta]`.
pub fn clip_prob<T: Real>(p: T, delta: T) -> Result<T> {
    if !(delta > T::zero() && delta <= T::lit(0.5)) {
        return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1/2]")));
    }
    Ok(if p < delta {
        delta
    } else if p > T::one() - delta {
        T::one() - delta
    } else {
        p
    })
}

/// `E_{y ~ Ber(p)} exp(lambda * phi(eta(p, y) * v))` in closed form, for `v` in `[p-1, p]`.
pub fn psi<T: Real>(p: T, lambda: T, v: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidArgument(format!("p {p} outside [0, 1]")));
    }
    if !(v >= p - T::one() && v <= p) {
        return Err(Error::InvalidArgument(format!("v {v} outside [p-1, p] for p = {p}")));
    }
    let one = T::one();
    let two = T::lit(2.0);
    if p == T::zero() {
        return Ok(((one - v).ln() * lambda + two * lambda * v).exp());
    }
    if p == one {
        return Ok(((one + v).ln() * lambda - two * lambda * v).exp());
    }
    let a = v.abs();
    let q = one - p;
    let t1 = p * (lambda * (a / p).ln_1p() - lambda * (v + a) / p).exp();
    let t0 = q * (lambda * (a / q).ln_1p() + lambda * (v - a) / q).exp();
    Ok(t1 + t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn log_loss_examples() {
        assert!(close(log_loss(0.5, true), LN2, 1e-15));
        assert_eq!(log_loss(1.0, true), 0.0);
        assert_eq!(log_loss(0.0_f64, true), f64::INFINITY);
        assert_eq!(log_loss(1.0_f64, false), f64::INFINITY);
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(0.5, true), -2.0);
        assert_eq!(eta(0.25, true), -4.0);
        assert!(close(eta(0.25, false), 4.0 / 3.0, 1e-15));
        assert_eq!(eta(0.0_f64, true), f64::NEG_INFINITY);
        assert_eq!(eta(1.0_f64, false), f64::INFINITY);
    }

    #[test]
    fn phi_and_omega_examples() {
        assert_eq!(phi(0.0), 0.0);
        assert!(close(phi(1.0), LN2, 1e-15));
        assert!(close(phi(-1.0), -2.0 + LN2, 1e-15));
        assert_eq!(omega(0.0).unwrap(), 0.0);
        assert!(close(omega(1.0).unwrap(), 1.0 - LN2, 1e-15));
        let e = std::f64::consts::E;
        assert!(close(omega(e - 1.0).unwrap(), e - 2.0, 1e-15));
        assert!(omega(-1e-3).is_err());
        assert!(omega(f64::NAN).is_err());
    }

    #[test]
    fn phi_is_z_minus_omega_abs() {
        for i in -2000..=2000 {
            let z = i as f64 * 0.01;
            let w = omega(z.abs()).unwrap();
            assert!(close(phi(z), z - w, 1e-12), "z = {z}");
        }
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bernoulli(0.5, 0.5), 0.0);
        let k = kl_bernoulli(0.04, 0.01);
        let direct = 0.04 * (4.0_f64).ln() + 0.96 * (0.96_f64 / 0.99).ln();
        assert!(close(k, direct, 1e-15));
        assert!(close(k, 0.02591, 1e-5) && k <= 0.08);
        let k2 = kl_bernoulli(0.1, 0.2);
        assert!(close(k2, 0.03669, 1e-5) && k2 >= 0.1 / 4.0);
        assert_eq!(kl_bernoulli(0.0, 0.0), 0.0);
        assert_eq!(kl_bernoulli(0.3, 0.0), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.3, 1.0), f64::INFINITY);
        assert!(close(kl_bernoulli(0.0, 0.5), LN2, 1e-15));
    }

    #[test]
    fn kl_nonnegative_with_equality_on_diagonal() {
        for i in 0..=100 {
            for j in 0..=100 {
                let (p, q) = (i as f64 / 100.0, j as f64 / 100.0);
                let k = kl_bernoulli(p, q);
                assert!(k >= 0.0);
                if i == j {
                    assert!(k < 1e-15);
                } else {
                    assert!(k > 0.0, "({p}, {q})");
                }
            }
        }
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_prob(0.0, 0.1).unwrap(), 0.1);
        assert_eq!(clip_prob(0.5, 0.1).unwrap(), 0.5);
        assert_eq!(clip_prob(0.95, 0.1).unwrap(), 0.9);
        assert!(clip_prob(0.5, 0.0).is_err());
        assert!(clip_prob(0.5, 0.6).is_err());
    }

    #[test]
    fn clip_costs_at_most_two_delta() {
        for i in 0..=200 {
            let p = i as f64 / 200.0;
            for j in 1..=50 {
                let d = j as f64 / 100.0;
                for y in [false, true] {
                    let c = clip_prob(p, d).unwrap();
                    assert!(log_loss(c, y) <= log_loss(p, y) + 2.0 * d + 1e-12);
                }
            }
        }
    }

    #[test]
    fn self_concordance_closed_form_and_finite_differences() {
        let h = 1e-4;
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            for y in [false, true] {
                let d2 = loss_d2(p, y);
                let d3 = loss_d3(p, y);
                assert!(((d3.abs() - 2.0 * d2.powf(1.5)) / d3.abs()).abs() < 1e-12);
                // truncation error of the differences grows like (h/p)^2 near the ends
                if !(0.05..=0.95).contains(&p) {
                    continue;
                }
                let l = |x: f64| log_loss(x, y);
                let fd1 = (l(p + h) - l(p - h)) / (2.0 * h);
                let fd2 = (l(p + h) - 2.0 * l(p) + l(p - h)) / (h * h);
                let fd3 = (l(p + 2.0 * h) - 2.0 * l(p + h) + 2.0 * l(p - h) - l(p - 2.0 * h)) / (2.0 * h * h * h);
                assert!(((fd1 - eta(p, y)) / eta(p, y)).abs() < 1e-4, "p={p}");
                assert!(((fd2 - d2) / d2).abs() < 1e-4, "p={p}");
                assert!(((fd3 - d3) / d3).abs() < 1e-4, "p={p} fd3={fd3} d3={d3}");
            }
        }
    }

    fn psi_oracle(p: f64, lambda: f64, v: f64) -> f64 {
        let mut s = 0.0;
        if p > 0.0 {
            s += p * (lambda * phi(eta(p, true) * v)).exp();
        }
        if p < 1.0 {
            s += (1.0 - p) * (lambda * phi(eta(p, false) * v)).exp();
        }
        s
    }

    #[test]
    fn psi_examples() {
        let ls = 0.31;
        assert!(close(psi(0.5, ls, 0.0).unwrap(), 1.0, 1e-15));
        let a = psi(0.0, ls, -0.5).unwrap();
        assert!(close(a, 1.5_f64.powf(ls) * (-ls).exp(), 1e-15));
        assert!(a <= 1.0);
        let b = psi(1.0, ls, 0.5).unwrap();
        assert!(close(b, 1.5_f64.powf(ls) * (-ls).exp(), 1e-15));
        assert!(b <= 1.0);
        assert!(psi(0.5, ls, 0.6).is_err());
        assert!(psi(0.5, ls, -0.6).is_err());
        assert!(psi(0.5, 0.0, 0.1).is_err());
    }

    #[test]
    fn psi_matches_expectation() {
        for i in 0..=40 {
            let p = i as f64 / 40.0;
            for k in 0..=40 {
                let v = p - 1.0 + k as f64 / 40.0;
                let v = v.clamp(p - 1.0, p);
                for lambda in [0.1, 0.31, 1.0, 2.5] {
                    let got = psi(p, lambda, v).unwrap();
                    let want = psi_oracle(p, lambda, v);
                    assert!(close(got, want, 1e-13 * want.max(1.0)), "p={p} v={v} l={lambda}");
                }
            }
        }
    }

    #[test]
    fn constants() {
        let c: f64 = regret_constant();
        assert!(close(c, 3.22310, 1e-4) && c <= 4.0);
        assert!(close(lambda_star::<f64>(), 0.3102607, 1e-7));
        let cf: f32 = regret_constant();
        assert!((cf - 3.2231).abs() < 1e-3);
    }

    #[test]
    fn single_precision_paths() {
        assert!((log_loss(0.5_f32, true) - std::f32::consts::LN_2).abs() < 1e-7);
        assert_eq!(eta(0.25_f32, true), -4.0);
        assert!((psi(0.5_f32, 0.31, 0.0).unwrap() - 1.0).abs() < 1e-6);
        assert!(Prob::new(1.5_f32).is_err());
    }
}
