//! Shared stochastic infrastructure: seedable deterministic RNG streams,
//! Poisson sampling, tally accumulators and plug-in mutual information.

use crate::error::{Error, Result};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};

/// Deterministic random stream identified by `(seed, stream_id)`.
///
/// ChaCha's 64-bit stream counter guarantees non-overlapping substreams
/// for any pair of distinct ids under the same seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
    seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            rng,
            seed,
            stream_id,
        }
    }

    /// Independent substream derived from the same seed.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn gen_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn gen_bool(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    pub fn gen_range_usize(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Draws one Poisson variate with the given mean. A mean of zero yields zero.
pub fn poisson_sample(stream: &mut RngStream, mean: f64) -> Result<u64> {
    if mean < 0.0 || !mean.is_finite() {
        return Err(Error::NegativeMean(mean));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|_| Error::NegativeMean(mean))?;
    Ok(dist.sample(stream) as u64)
}

/// Binomial thinning: number of successes out of `n` trials at probability `p`.
pub fn binomial_sample(stream: &mut RngStream, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let dist = rand_distr::Binomial::new(n, p).expect("valid binomial parameters");
    dist.sample(stream)
}

/// Streaming first/second-moment accumulator with associative merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub count: u64,
    pub sum: f64,
    pub sum_of_squares: f64,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_of_squares += x * x;
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_of_squares: self.sum_of_squares + other.sum_of_squares,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        ((self.sum_of_squares - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Plug-in Shannon mutual information (bits) of an empirical joint count
/// table, rows indexing one alphabet and columns the other.
pub fn mutual_information(joint: &[Vec<u64>]) -> Result<f64> {
    if joint.is_empty() || joint[0].is_empty() {
        return Err(Error::EmptyTable);
    }
    let cols = joint[0].len();
    if joint.iter().any(|row| row.len() != cols) {
        return Err(Error::EmptyTable);
    }
    let total: u64 = joint.iter().flatten().sum();
    if total == 0 {
        return Err(Error::EmptyTable);
    }
    let n = total as f64;
    let row_sums: Vec<f64> = joint
        .iter()
        .map(|row| row.iter().sum::<u64>() as f64)
        .collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| joint.iter().map(|row| row[j]).sum::<u64>() as f64)
        .collect();
    let mut info = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let p = c as f64 / n;
                info += p * (p * n * n / (row_sums[i] * col_sums[j])).log2();
            }
        }
    }
    Ok(info.max(0.0))
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}
