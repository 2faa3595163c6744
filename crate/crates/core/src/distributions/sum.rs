use super::bounded::{BoundedValue, UNIT_ROUNDOFF};

/// Neumaier-compensated accumulator that also tracks the error bounds of
/// the summands.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    term_err: f64,
    abs_total: f64,
    count: u64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_total += x.abs();
        self.count += 1;
    }

    pub fn add_bounded(&mut self, x: BoundedValue) {
        self.add(x.value);
        self.term_err += x.abs_err;
    }

    /// Adds an error contribution that is not attached to a summand, such as
    /// a truncated tail.
    pub fn add_err(&mut self, err: f64) {
        self.term_err += err;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Result with the compensated-summation bound
    /// `2u|S| + 2n u^2 sum|x_i|` on top of the summand errors.
    pub fn finish(&self) -> BoundedValue {
        let s = self.value();
        let n = self.count as f64;
        let rounding =
            2.0 * UNIT_ROUNDOFF * s.abs() + 2.0 * n * UNIT_ROUNDOFF * UNIT_ROUNDOFF * self.abs_total;
        BoundedValue::new(s, rounding + self.term_err)
    }
}
