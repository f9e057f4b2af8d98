use num_rational::Rational64;
use serde::{Deserialize, Serialize};

/// Exponents of the scaling parameter κ: `d ∝ κ^{c_d}`, `γ ∝ κ^{c_γ}`,
/// `σ_u² ∝ κ^{c_u}`, `σ_w² ∝ κ^{c_w}`, `η_u ∝ κ^{c_ηu}`, `η_w ∝ κ^{c_ηw}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalingExponents {
    #[serde(with = "rational")]
    pub c_d: Rational64,
    #[serde(with = "rational")]
    pub c_gamma: Rational64,
    #[serde(with = "rational")]
    pub c_u: Rational64,
    #[serde(with = "rational")]
    pub c_w: Rational64,
    #[serde(with = "rational")]
    pub c_eta_u: Rational64,
    #[serde(with = "rational")]
    pub c_eta_w: Rational64,
}

pub(crate) fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

pub(crate) fn int(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

impl ScalingExponents {
    pub fn new(
        c_d: Rational64,
        c_gamma: Rational64,
        c_u: Rational64,
        c_w: Rational64,
        c_eta_u: Rational64,
        c_eta_w: Rational64,
    ) -> Self {
        Self { c_d, c_gamma, c_u, c_w, c_eta_u, c_eta_w }
    }

    /// Both learning rates scaled with the same exponent.
    pub fn equal_rates(c_d: Rational64, c_gamma: Rational64, c_u: Rational64, c_w: Rational64, c_eta: Rational64) -> Self {
        Self::new(c_d, c_gamma, c_u, c_w, c_eta, c_eta)
    }

    pub fn with_eta(self, c_eta: Rational64) -> Self {
        Self { c_eta_u: c_eta, c_eta_w: c_eta, ..self }
    }

    pub fn with_gamma(self, c_gamma: Rational64) -> Self {
        Self { c_gamma, ..self }
    }
}

/// Rationals as `"a/b"` strings; numbers and integer strings are also accepted on input.
pub mod rational {
    use num_rational::Rational64;
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn parse(text: &str) -> Result<Rational64, String> {
        let t = text.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| format!("bad numerator in {t:?}"))?;
            let d: i64 = d.trim().parse().map_err(|_| format!("bad denominator in {t:?}"))?;
            if d == 0 {
                return Err(format!("zero denominator in {t:?}"));
            }
            return Ok(Rational64::new(n, d));
        }
        if let Ok(n) = t.parse::<i64>() {
            return Ok(Rational64::from_integer(n));
        }
        let f: f64 = t.parse().map_err(|_| format!("not a rational: {t:?}"))?;
        from_f64(f)
    }

    fn from_f64(f: f64) -> Result<Rational64, String> {
        Rational64::approximate_float(f).ok_or_else(|| format!("cannot represent {f} as a rational"))
    }

    struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or a string \"a/b\"")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational64, E> {
            Ok(Rational64::from_integer(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational64, E> {
            i64::try_from(v).map(Rational64::from_integer).map_err(E::custom)
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational64, E> {
            from_f64(v).map_err(E::custom)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational64, E> {
            parse(v).map_err(E::custom)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        d.deserialize_any(RationalVisitor)
    }
}
