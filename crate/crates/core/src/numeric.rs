//! Small numeric helpers shared by the distance and cutoff kernels.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `ln(Σ exp(x_i))` without overflow; `-inf` for an empty input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + compensated_sum(xs.iter().map(|x| (x - max).exp())).ln()
}

/// A positive real stored through its natural logarithm.
///
/// Rates such as `exp(-n^γ)` underflow long before the quantities built from
/// them (cutoff times, their products with rates) become uninteresting, so
/// the cutoff kernels keep everything in log-space and only exponentiate at
/// the end.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        LogValue(ln)
    }

    /// Panics on non-positive input; callers validate positivity upstream.
    pub fn from_value(x: f64) -> Self {
        assert!(x > 0.0, "LogValue requires a positive value, got {x}");
        LogValue(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }
}

// Products and quotients add and subtract logarithms.
#[allow(clippy::suspicious_arithmetic_impl)]
impl std::ops::Mul for LogValue {
    type Output = LogValue;

    fn mul(self, other: LogValue) -> LogValue {
        LogValue(self.0 + other.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl std::ops::Div for LogValue {
    type Output = LogValue;

    fn div(self, other: LogValue) -> LogValue {
        LogValue(self.0 - other.0)
    }
}

/// Bisection for the first point where a non-increasing `f` drops to `target`.
///
/// Requires `f(lo) > target >= f(hi)`. Returns the right end of the final
/// bracket, so the returned point always satisfies `f(x) <= target`.
pub fn bisect_decreasing<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    for _ in 0..2000 {
        let width = hi - lo;
        if width <= abs_tol || width <= rel_tol * hi.abs() {
            break;
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
