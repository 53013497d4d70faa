//! Seeded uniform-random interleaver.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleaverSpec {
    pub len: usize,
    pub seed: u64,
}

/// `interleave(v)[i] = v[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<u32>,
}

impl Interleaver {
    pub fn new(spec: InterleaverSpec) -> Self {
        let mut perm: Vec<u32> = (0..spec.len as u32).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
        Self { perm }
    }

    pub fn identity(len: usize) -> Self {
        Self {
            perm: (0..len as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[u32] {
        &self.perm
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.perm.len() {
            return Err(Error::invalid(format!(
                "interleaver length {} does not match input length {n}",
                self.perm.len()
            )));
        }
        Ok(())
    }

    pub fn interleave<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        Ok(self.perm.iter().map(|&p| v[p as usize]).collect())
    }

    pub fn deinterleave<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        let mut out = v.to_vec();
        for (i, &p) in self.perm.iter().enumerate() {
            out[p as usize] = v[i];
        }
        Ok(out)
    }
}
