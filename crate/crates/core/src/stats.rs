use serde::Serialize;

/// Running maximum and mean of a residual over samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
    /// Sample index of the maximum.
    pub argmax: usize,
}

impl ResidualStats {
    pub fn push(&mut self, index: usize, value: f64) {
        let v = if value.is_nan() { f64::INFINITY } else { value };
        self.mean += (v - self.mean) / (self.count + 1) as f64;
        self.count += 1;
        if v > self.max || self.count == 1 {
            self.max = v;
            self.argmax = index;
        }
    }

    pub fn merge(&mut self, other: &ResidualStats) {
        if other.count == 0 {
            return;
        }
        let total = self.count + other.count;
        self.mean =
            (self.mean * self.count as f64 + other.mean * other.count as f64) / total as f64;
        if other.max > self.max || self.count == 0 {
            self.max = other.max;
            self.argmax = other.argmax;
        }
        self.count = total;
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = ResidualStats::default();
        for (i, v) in values.into_iter().enumerate() {
            s.push(i, v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_mean_and_merge() {
        let a = ResidualStats::from_values([1.0, 3.0, 2.0]);
        assert_eq!((a.max, a.argmax, a.count), (3.0, 1, 3));
        assert!((a.mean - 2.0).abs() < 1e-15);
        let mut b = ResidualStats::from_values([5.0]);
        b.argmax = 7;
        let mut c = a;
        c.merge(&b);
        assert_eq!((c.max, c.argmax, c.count), (5.0, 7, 4));
        assert!((c.mean - 2.75).abs() < 1e-15);
        assert_eq!(ResidualStats::from_values([f64::NAN]).max, f64::INFINITY);
    }
}
