use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::instance::ArmId;

/// Field modulus used by [`sample_hash`], `2^61 - 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Polynomial hash `h(i) = (c_0 + c_1 i + ... + c_d i^d mod p) mod K`.
///
/// Coefficients are stored constant term first. With coefficients drawn
/// uniformly from the field, the values at any `d + 1` distinct points are
/// independent, so a degree-`d` polynomial is a `(d + 1)`-wise independent
/// family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyHash {
    prime: u64,
    coefficients: Vec<u64>,
    agents: usize,
}

/// Degree used for `n` arms, `ceil(10 ln n)`.
pub fn hash_degree(n: usize) -> usize {
    libm::ceil(10.0 * libm::log(n as f64)) as usize
}

/// Draws a hash over `n` arms into `agents` buckets with coefficients uniform in the field.
pub fn sample_hash(n: usize, agents: usize, rng: &mut dyn RngCore) -> PolyHash {
    assert!(n >= 2 && agents >= 1);
    let coefficients = (0..=hash_degree(n)).map(|_| rng.random_range(0..MERSENNE_61)).collect();
    PolyHash { prime: MERSENNE_61, coefficients, agents }
}

impl PolyHash {
    pub fn from_parts(prime: u64, coefficients: Vec<u64>, agents: usize) -> Result<Self> {
        if prime < 2 || agents == 0 || coefficients.is_empty() {
            return Err(Error::InvalidParams("hash needs a prime, coefficients and agents"));
        }
        if coefficients.iter().any(|&c| c >= prime) {
            return Err(Error::InvalidParams("hash coefficients must be field elements"));
        }
        Ok(PolyHash { prime, coefficients, agents })
    }

    /// Rebuilds a hash from its wire form; the modulus is always [`MERSENNE_61`].
    pub fn from_words(words: &[u64], agents: usize) -> Result<Self> {
        Self::from_parts(MERSENNE_61, words.to_vec(), agents)
    }

    /// Wire form: the coefficients, one word each.
    pub fn to_words(&self) -> Vec<u64> {
        self.coefficients.clone()
    }

    pub fn word_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    /// Zero-based agent that owns `arm`.
    pub fn eval(&self, arm: ArmId) -> usize {
        let x = u64::from(arm.get()) % self.prime;
        let mut acc = 0u64;
        for &c in self.coefficients.iter().rev() {
            acc = self.add(self.mul(acc, x), c);
        }
        (acc % self.agents as u64) as usize
    }

    /// Splits arms `1..=n` into one sorted list per agent.
    pub fn partition(&self, n: usize) -> Vec<Vec<ArmId>> {
        let mut parts = alloc::vec![Vec::new(); self.agents];
        for i in 0..n {
            let arm = ArmId::from_index(i);
            parts[self.eval(arm)].push(arm);
        }
        parts
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        let wide = a as u128 * b as u128;
        if self.prime == MERSENNE_61 {
            let folded = (wide & MERSENNE_61 as u128) + (wide >> 61);
            let folded = folded as u64;
            if folded >= MERSENNE_61 {
                folded - MERSENNE_61
            } else {
                folded
            }
        } else {
            (wide % self.prime as u128) as u64
        }
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.prime as u128) as u64
    }
}

/// True when every pair of subset sizes is within a factor of two, inclusive.
pub fn is_balanced(sizes: &[usize]) -> bool {
    match (sizes.iter().min(), sizes.iter().max()) {
        (Some(&lo), Some(&hi)) => hi <= 2 * lo,
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn horner_examples() {
        let h = PolyHash::from_parts(11, vec![3, 2], 2).unwrap();
        assert_eq!(h.eval(ArmId::new(4)), 0);
        assert_eq!(h.eval(ArmId::new(1)), 1);
    }

    #[test]
    fn zero_polynomial() {
        let h = PolyHash::from_parts(MERSENNE_61, vec![0; 5], 7).unwrap();
        assert!((1..100).all(|i| h.eval(ArmId::new(i)) == 0));
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let a = sample_hash(100, 4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_hash(100, 4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn degree_for_eight_arms() {
        let h = sample_hash(8, 3, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(h.degree(), 21);
        assert_eq!(h.word_count(), 22);
        assert_eq!(PolyHash::from_words(&h.to_words(), 3).unwrap(), h);
    }

    #[test]
    fn single_agent_owns_everything() {
        let h = sample_hash(50, 1, &mut ChaCha8Rng::seed_from_u64(4));
        assert!((1..=50).all(|i| h.eval(ArmId::new(i)) == 0));
    }

    #[test]
    fn mersenne_reduction_matches_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = sample_hash(64, 5, &mut rng);
        for _ in 0..1000 {
            let a = rng.random_range(0..MERSENNE_61);
            let b = rng.random_range(0..MERSENNE_61);
            let want = ((a as u128 * b as u128) % MERSENNE_61 as u128) as u64;
            assert_eq!(h.mul(a, b), want);
        }
    }

    #[test]
    fn balance_examples() {
        assert!(is_balanced(&[4, 4]));
        assert!(!is_balanced(&[5, 2]));
        assert!(is_balanced(&[3, 6]));
        assert!(!is_balanced(&[0, 1]));
        assert!(is_balanced(&[0, 0]));
        assert!(is_balanced(&[9]));
    }

    #[test]
    fn partition_covers_all_arms() {
        let h = sample_hash(200, 6, &mut ChaCha8Rng::seed_from_u64(5));
        let parts = h.partition(200);
        assert_eq!(parts.iter().map(Vec::len).sum::<usize>(), 200);
        for (k, part) in parts.iter().enumerate() {
            assert!(part.iter().all(|&a| h.eval(a) == k));
        }
    }
}
