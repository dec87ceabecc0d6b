/// Compensated (Kahan) accumulator.
///
/// Deficits near zero are compared against a −1e−9 violation threshold, so
/// summation error has to stay well below that scale even for long sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    err: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.err;
        let t = self.sum + y;
        self.err = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(self) -> f64 {
        self.sum
    }
}
