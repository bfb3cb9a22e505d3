//! Deterministic random streams.
//!
//! Every random draw in the crate comes from an [`RngStream`] addressed by a
//! master seed and a [`StreamId`]. The generator is ChaCha8, which is
//! counter based: the key is derived from `(master_seed, role)` and the
//! stream index selects an independent 2^64-block sequence. Because each
//! row of each generation gets its own stream, the values a row sees do not
//! depend on the order in which rows are processed or on how many threads
//! are used.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

/// What a stream is used for. Each role keys a distinct generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Initial executor population.
    Init,
    /// Executor mutation index draws.
    Mutation,
    /// Executor crossover draws.
    Crossover,
    /// Initial meta population.
    MetaInit,
    /// Evolver mutation index draws.
    MetaMutation,
    /// Evolver crossover draws.
    MetaCrossover,
    /// Problem shift and rotation.
    Transform,
    /// Landscape sampling and random walks.
    Landscape,
}

impl Role {
    pub const fn tag(self) -> u64 {
        match self {
            Role::Init => 0x1A17_0000_0000_0001,
            Role::Mutation => 0x1A17_0000_0000_0002,
            Role::Crossover => 0x1A17_0000_0000_0003,
            Role::MetaInit => 0x3E7A_0000_0000_0001,
            Role::MetaMutation => 0x3E7A_0000_0000_0002,
            Role::MetaCrossover => 0x3E7A_0000_0000_0003,
            Role::Transform => 0x7F00_0000_0000_0001,
            Role::Landscape => 0x7F00_0000_0000_0002,
        }
    }
}

/// Structured label of a stream: a role plus an integer index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub role: Role,
    pub index: u64,
}

impl StreamId {
    pub const fn new(role: Role, index: u64) -> Self {
        StreamId { role, index }
    }

    /// Stream for one row of one generation. Rows above `u32::MAX` are not
    /// supported.
    pub const fn row(role: Role, generation: u64, row: usize) -> Self {
        StreamId {
            role,
            index: (generation << 32) | (row as u64 & 0xFFFF_FFFF),
        }
    }
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// A reproducible random sequence.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, id: StreamId) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&id.role.tag().to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(id.index);
        RngStream { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform on `(0, 1]`. Used for the `r <= CR` tests so that `CR = 0`
    /// never passes and `CR = 1` always does.
    #[inline]
    pub fn uniform_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * INV_2_53
    }

    /// Uniform on `[lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform() * (hi - lo)
    }

    /// Uniform integer in `0..n`, unbiased (rejection sampling on u64).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// `k` pairwise-distinct indices from `0..n`, none equal to `exclude`,
    /// drawn by a partial Fisher-Yates shuffle of the remaining `n - 1`
    /// indices in ascending order.
    pub fn distinct_excluding(&mut self, n: usize, exclude: usize, k: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).filter(|&j| j != exclude).collect();
        assert!(k <= pool.len(), "cannot draw {k} distinct indices from {}", pool.len());
        for t in 0..k {
            let j = t + self.below(pool.len() - t);
            pool.swap(t, j);
        }
        pool.truncate(k);
        pool
    }
}
