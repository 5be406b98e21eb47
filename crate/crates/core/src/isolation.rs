//! Small-seed isolation oracle.
//!
//! The oracle hands out an integer weight for every index `i` of a ground set
//! of size `N`. For any family of at most `Z` subsets, the minimum-weight
//! member is unique with probability at least 1/4, and the whole state is a
//! few integers: a random modulus and `t` random multipliers.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolationOracle {
    n: u64,
    z_base: u64,
    z_exp: u64,
    modulus: BigUint,
    r: Vec<u128>,
    seed: u64,
}

/// JSON form of the oracle state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsolationState {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "Z_base")]
    pub z_base: u64,
    #[serde(rename = "Z_exp")]
    pub z_exp: u64,
    /// Decimal string; the modulus can exceed 128 bits.
    pub modulus: String,
    pub t: u32,
    pub r: Vec<u128>,
    pub seed: u64,
}

// Largest N for which N^5 and the weights still fit comfortably in u128.
const MAX_N: u64 = 1 << 18;

/// `(2 N Z^2)^2`
fn modulus_range(n: u64, z_base: u64, z_exp: u64) -> BigUint {
    let z = BigUint::from(z_base).pow(z_exp as u32);
    let inner = BigUint::from(2u8) * BigUint::from(n) * &z * &z;
    &inner * &inner
}

/// Smallest `t` with `n^t >= x`.
fn digits_needed(x: &BigUint, n: u64) -> u32 {
    let base = BigUint::from(n);
    let mut t = 0;
    let mut pow = BigUint::one();
    while &pow < x {
        pow *= &base;
        t += 1;
    }
    t
}

fn check_params(n: u64, z_base: u64, z_exp: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "isolation ground set size N = {n} < 2"
        )));
    }
    if n > MAX_N {
        return Err(Error::Parameter(format!(
            "isolation ground set size N = {n} > {MAX_N}"
        )));
    }
    if z_base < 1 || z_exp > u32::MAX as u64 {
        return Err(Error::Parameter("family bound Z must be at least 1".into()));
    }
    Ok(())
}

impl IsolationOracle {
    /// Draws a fresh oracle for ground set size `n` and family bound
    /// `Z = z_base^z_exp`.
    pub fn new(n: u64, z_base: u64, z_exp: u64, seed: u64) -> Result<IsolationOracle> {
        check_params(n, z_base, z_exp)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let range = modulus_range(n, z_base, z_exp);
        let modulus = rng.gen_biguint_range(&BigUint::one(), &(range + 1u8));
        let t = digits_needed(&modulus, n);
        let r_max = (n as u128).pow(5);
        let r = (0..t).map(|_| rng.gen_range(1..=r_max)).collect();
        Ok(IsolationOracle {
            n,
            z_base,
            z_exp,
            modulus,
            r,
            seed,
        })
    }

    /// Builds an oracle from explicit internals. `r.len()` must equal the
    /// digit count implied by `modulus`.
    pub fn from_parts(
        n: u64,
        z_base: u64,
        z_exp: u64,
        modulus: BigUint,
        r: Vec<u128>,
        seed: u64,
    ) -> Result<IsolationOracle> {
        check_params(n, z_base, z_exp)?;
        if modulus.is_zero() || modulus > modulus_range(n, z_base, z_exp) {
            return Err(Error::Parameter("modulus outside [1, (2NZ^2)^2]".into()));
        }
        let t = digits_needed(&modulus, n);
        if r.len() != t as usize {
            return Err(Error::Parameter(format!(
                "expected {t} multipliers, got {}",
                r.len()
            )));
        }
        let r_max = (n as u128).pow(5);
        if r.iter().any(|&x| x == 0 || x > r_max) {
            return Err(Error::Parameter("multiplier outside [1, N^5]".into()));
        }
        Ok(IsolationOracle {
            n,
            z_base,
            z_exp,
            modulus,
            r,
            seed,
        })
    }

    pub fn ground_size(&self) -> u64 {
        self.n
    }
    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }
    pub fn digits(&self) -> u32 {
        self.r.len() as u32
    }
    pub fn multipliers(&self) -> &[u128] {
        &self.r
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `2^i mod modulus`
    pub fn residue(&self, i: u64) -> BigUint {
        if i < 128 {
            let p = 1u128 << i;
            if BigUint::from(p) < self.modulus {
                return BigUint::from(p);
            }
        }
        BigUint::from(2u8).modpow(&BigUint::from(i), &self.modulus)
    }

    /// Weight of index `i`, `1 <= i <= N`.
    pub fn query(&self, i: u64) -> Result<u128> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.n,
            });
        }
        let res = self.residue(i);
        let mut w = 0u128;
        let n = self.n as u128;
        if let Some(mut x) = res.to_u128() {
            for r in &self.r {
                w += (x % n) * r;
                x /= n;
            }
        } else {
            let mut x = res;
            let base = BigUint::from(self.n);
            for r in &self.r {
                let d = (&x % &base).to_u128().expect("digit below N");
                w += d * r;
                x /= &base;
            }
        }
        Ok(w)
    }

    /// Upper bound on any query answer that holds for every seed:
    /// `t_max * (N - 1) * N^5` where `t_max` is the digit count of the
    /// largest possible modulus.
    pub fn weight_bound(n: u64, z_base: u64, z_exp: u64) -> Result<BigUint> {
        check_params(n, z_base, z_exp)?;
        let t_max = digits_needed(&modulus_range(n, z_base, z_exp), n);
        Ok(BigUint::from(t_max) * BigUint::from(n - 1) * BigUint::from(n).pow(5))
    }

    /// Bits of state: the modulus, `t` multipliers of `5 log N` bits each,
    /// and the scalar parameters.
    pub fn storage_bits(&self) -> u64 {
        let log_n = 64 - self.n.leading_zeros() as u64;
        let scalars = [
            self.n,
            self.z_base,
            self.z_exp,
            self.r.len() as u64,
            self.seed,
        ]
        .iter()
        .map(|x| 64 - x.leading_zeros() as u64)
        .sum::<u64>();
        self.modulus.bits() + self.r.len() as u64 * 5 * log_n + scalars
    }

    pub fn storage_words(&self) -> usize {
        self.storage_bits().div_ceil(64) as usize
    }

    pub fn state(&self) -> IsolationState {
        IsolationState {
            n: self.n,
            z_base: self.z_base,
            z_exp: self.z_exp,
            modulus: self.modulus.to_string(),
            t: self.digits(),
            r: self.r.clone(),
            seed: self.seed,
        }
    }

    pub fn from_state(s: &IsolationState) -> Result<IsolationOracle> {
        let modulus: BigUint = s
            .modulus
            .parse()
            .map_err(|_| Error::Parameter("modulus is not a decimal integer".into()))?;
        let o = IsolationOracle::from_parts(s.n, s.z_base, s.z_exp, modulus, s.r.clone(), s.seed)?;
        if o.digits() != s.t {
            return Err(Error::Parameter(
                "digit count does not match modulus".into(),
            ));
        }
        Ok(o)
    }
}
