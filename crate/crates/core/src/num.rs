use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Scalar type used by the generic parts of the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the type cannot hold finite `f64` values.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `log(exp(a) + exp(b))` with max shift; absorbs negative infinities.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    let m = a.max(b);
    if m == T::neg_infinity() {
        return m;
    }
    if m == T::infinity() {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Stable `exp(a) / (exp(a) + exp(b))`.
pub fn sigmoid_diff<T: Real>(a: T, b: T) -> T {
    let d = a - b;
    if d >= T::zero() {
        T::one() / (T::one() + (-d).exp())
    } else {
        let e = d.exp();
        e / (T::one() + e)
    }
}

/// Formats `x` with 12 significant digits, `%.12g` style.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..12).contains(&exp) {
        let mant = trim_zeros(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.11e}", x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digit_format() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(1.4_f64.ln()), "0.336472236621");
        assert_eq!(fmt12(123456.5), "123456.5");
        assert_eq!(fmt12(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(fmt12(2.5e15), "2.5e15");
        assert_eq!(fmt12(-0.25), "-0.25");
        assert_eq!(fmt12(f64::INFINITY), "inf");
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }

    #[test]
    fn log_add_exp_absorbs_infinities() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        assert!((log_add_exp(0.0_f64, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((log_add_exp(1000.0_f64, 1000.0) - 1000.0 - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((sigmoid_diff(-800.0_f64, 0.0)).abs() < 1e-300);
        assert!((sigmoid_diff(0.49_f64.ln(), 0.21_f64.ln()) - 0.7).abs() < 1e-15);
    }
}
