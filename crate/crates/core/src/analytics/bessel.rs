use super::{invalid, AnalyticsError};

/// `I_0(x)`, either as a plain value or, for `x > 700`, as its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BesselI0 {
    Value(f64),
    Log(f64),
}

impl BesselI0 {
    pub fn ln(&self) -> f64 {
        match *self {
            BesselI0::Value(v) => v.ln(),
            BesselI0::Log(l) => l,
        }
    }

    /// The value itself; infinite when only the logarithm fits.
    pub fn value(&self) -> f64 {
        match *self {
            BesselI0::Value(v) => v,
            BesselI0::Log(l) => l.exp(),
        }
    }

    pub fn is_log(&self) -> bool {
        matches!(self, BesselI0::Log(_))
    }
}

const OVERFLOW_GUARD: f64 = 700.0;
const TERM_CUTOFF: f64 = 1e-16;

/// `sum_{k >= first} (x/2)^(2k) / (k!)^2`, stopping once a term past the
/// peak contributes less than `1e-16` of the running sum.
fn i0_series(x: f64, first: u32) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    for k in 1..=first {
        term *= q / (k as f64 * k as f64);
    }
    let mut sum = 0.0;
    let mut k = first as f64;
    loop {
        sum += term;
        k += 1.0;
        term *= q / (k * k);
        if term < sum * TERM_CUTOFF && k * k > q {
            return sum;
        }
        if term == 0.0 {
            return sum;
        }
    }
}

/// `ln sum_{k >= first} (x/2)^(2k) / (k!)^2` accumulated in log space.
fn ln_i0_series(x: f64, first: u32) -> f64 {
    let ln_q = 2.0 * (0.5 * x).ln();
    let mut ln_term = 0.0;
    for k in 1..=first {
        ln_term += ln_q - 2.0 * (k as f64).ln();
    }
    // running sum represented as exp(shift) * scaled
    let mut shift = ln_term;
    let mut scaled = 1.0;
    let mut k = first as f64;
    loop {
        k += 1.0;
        ln_term += ln_q - 2.0 * k.ln();
        if ln_term > shift {
            scaled = scaled * (shift - ln_term).exp() + 1.0;
            shift = ln_term;
        } else {
            let rel = (ln_term - shift).exp();
            scaled += rel;
            if rel < scaled * TERM_CUTOFF && k * k > (0.5 * x).powi(2) {
                return shift + scaled.ln();
            }
        }
    }
}

/// Modified Bessel function of the first kind of order zero, by its power series.
pub fn bessel_i0(x: f64) -> Result<BesselI0, AnalyticsError> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(invalid(format!("bessel_i0 needs a finite x >= 0, got {x}")));
    }
    if x > OVERFLOW_GUARD {
        Ok(BesselI0::Log(ln_i0_series(x, 0)))
    } else {
        Ok(BesselI0::Value(i0_series(x, 0)))
    }
}

/// `exp(-λ(1 + p)) (I_0(2λ√p) - 1)`, the probability that the source of a
/// Poisson(λ) tree has at least one child and all of them are activated.
///
/// `I_0 - 1` is summed from `k = 1` directly so small arguments keep their
/// relative precision.
pub fn prob_all_children_activated(lambda: f64, p: f64) -> Result<f64, AnalyticsError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive and finite, got {lambda}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let x = 2.0 * lambda * p.sqrt();
    let ln_prefactor = -lambda * (1.0 + p);
    if x > OVERFLOW_GUARD {
        Ok((ln_prefactor + ln_i0_series(x, 1)).exp())
    } else {
        Ok(ln_prefactor.exp() * i0_series(x, 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i0_at_zero_is_one() {
        assert_eq!(bessel_i0(0.0).unwrap(), BesselI0::Value(1.0));
    }

    #[test]
    fn i0_at_two_matches_twenty_terms() {
        let mut oracle = 0.0;
        let mut factorial = 1.0;
        for k in 0..20 {
            if k > 0 {
                factorial *= k as f64;
            }
            oracle += 1.0f64.powi(2 * k) / (factorial * factorial);
        }
        let got = bessel_i0(2.0).unwrap().value();
        assert!((got - oracle).abs() < 1e-14 * oracle);
        assert!((got - 2.279_585_302_336_067).abs() < 1e-13);
    }

    #[test]
    fn asymptotic_agreement_improves_with_x() {
        let rel = |x: f64| {
            let asym = x.exp() / (2.0 * std::f64::consts::PI * x).sqrt()
                * (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
            let exact = bessel_i0(x).unwrap().value();
            ((exact - asym) / exact).abs()
        };
        assert!(rel(20.0) < 1e-3);
        assert!(rel(40.0) < rel(20.0));
    }

    #[test]
    fn log_branch_is_continuous_at_the_guard() {
        let below = bessel_i0(699.9).unwrap();
        let above = bessel_i0(700.1).unwrap();
        assert!(!below.is_log() && above.is_log());
        assert!((above.ln() - below.ln() - 0.2).abs() < 1e-3);
        assert!((ln_i0_series(300.0, 0) - i0_series(300.0, 0).ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_argument() {
        assert!(bessel_i0(-1.0).is_err());
        assert!(bessel_i0(f64::NAN).is_err());
    }

    #[test]
    fn all_children_probability() {
        assert_eq!(prob_all_children_activated(2.0, 0.0).unwrap(), 0.0);
        let (lambda, p) = (3.0f64, 0.5f64);
        let mut term = 1.0;
        let mut series = 0.0;
        for k in 1..=200 {
            term *= lambda * lambda * p / (k as f64 * k as f64);
            series += term;
        }
        series *= (-lambda * (1.0 + p)).exp();
        let got = prob_all_children_activated(lambda, p).unwrap();
        assert!((got - series).abs() < 1e-15);
        assert!(prob_all_children_activated(0.0, 0.5).is_err());
    }
}
