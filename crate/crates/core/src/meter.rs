/// Cumulative count of component-function evaluations.
///
/// Every evaluation of a subsampled objective over a batch of size `S`
/// adds `S`. Gradient evaluations are free and never touch the meter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalMeter {
    count: u64,
}

impl EvalMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, units: usize) {
        self.count += units as u64;
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}
