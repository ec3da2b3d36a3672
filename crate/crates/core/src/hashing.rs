//! Two-universal hash families on bit strings with enumerable seed spaces.
//!
//! Three real families plus one deliberately broken one:
//!
//! - `Toeplitz`: the linear map `T z` over GF(2) where the `s x n` Toeplitz
//!   matrix is read off an (n + s - 1)-bit seed.
//! - `Gf2nMult`: multiply by the seed in GF(2^n) and keep the low `s` bits.
//! - `AllFunctions`: the seed is the full truth table; the uniform random
//!   function itself.
//! - `Constant`: every function is constant; collides with probability one
//!   and exists so that certification has something to reject.
//!
//! Bit strings are little-endian throughout: bit `k` of a seed or input is
//! bit `k` of the underlying word, and hex serialization packs bit `8i + j`
//! into bit `j` of byte `i`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed spaces larger than `2^SEED_CAP_BITS` are not enumerated.
pub const SEED_CAP_BITS: u64 = 24;
/// Exhaustive two-universality certification is limited to this input size.
pub const CERTIFY_MAX_INPUT_BITS: u32 = 6;

/// One canonical irreducible polynomial per degree n = 1..=24, encoded with
/// the `x^n` bit set. Taken from the standard table of low-weight binary
/// irreducible polynomials; irreducibility is re-verified by a unit test.
pub const GF2_POLYNOMIALS: [u64; 25] = [
    0,
    0x3,        // x + 1
    0x7,        // x^2 + x + 1
    0xB,        // x^3 + x + 1
    0x13,       // x^4 + x + 1
    0x25,       // x^5 + x^2 + 1
    0x43,       // x^6 + x + 1
    0x83,       // x^7 + x + 1
    0x11B,      // x^8 + x^4 + x^3 + x + 1
    0x203,      // x^9 + x + 1
    0x409,      // x^10 + x^3 + 1
    0x805,      // x^11 + x^2 + 1
    0x1009,     // x^12 + x^3 + 1
    0x201B,     // x^13 + x^4 + x^3 + x + 1
    0x4021,     // x^14 + x^5 + 1
    0x8003,     // x^15 + x + 1
    0x1002B,    // x^16 + x^5 + x^3 + x + 1
    0x20009,    // x^17 + x^3 + 1
    0x40009,    // x^18 + x^3 + 1
    0x80027,    // x^19 + x^5 + x^2 + x + 1
    0x100009,   // x^20 + x^3 + 1
    0x200005,   // x^21 + x^2 + 1
    0x400003,   // x^22 + x + 1
    0x800021,   // x^23 + x^5 + 1
    0x100001B,  // x^24 + x^4 + x^3 + x + 1
];

/// Bit string of fixed length, bit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    pub fn zeros(len: usize) -> Self {
        BitString {
            bits: vec![false; len],
        }
    }

    /// Low `len` bits of a word, bit 0 first.
    pub fn from_word(word: u64, len: usize) -> Self {
        assert!(len <= 64);
        BitString {
            bits: (0..len).map(|k| (word >> k) & 1 == 1).collect(),
        }
    }

    pub fn to_word(&self) -> u64 {
        assert!(self.bits.len() <= 64);
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, b)| acc | ((*b as u64) << k))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, k: usize) -> bool {
        self.bits[k]
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.len(), other.len());
        BitString {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    /// Lowercase hex, bit `8i + j` packed into bit `j` of byte `i`.
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for chunk in self.bits.chunks(8) {
            let mut byte = 0u8;
            for (j, b) in chunk.iter().enumerate() {
                byte |= (*b as u8) << j;
            }
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let need = len.div_ceil(8);
        if hex.len() != 2 * need {
            return Err(Error::LengthMismatch {
                expected: 2 * need,
                got: hex.len(),
            });
        }
        let mut bits = Vec::with_capacity(len);
        for i in 0..need {
            let byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
                .map_err(|e| Error::invalid("hex seed", e.to_string()))?;
            for j in 0..8 {
                if bits.len() < len {
                    bits.push((byte >> j) & 1 == 1);
                }
            }
        }
        Ok(BitString { bits })
    }
}

/// Which construction a family uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HashKind {
    Toeplitz,
    Gf2nMult,
    AllFunctions,
    Constant,
}

/// A keyed family of functions from n-bit strings to s-bit strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashFamily {
    pub kind: HashKind,
    pub input_bits: u32,
    pub output_bits: u32,
}

impl HashFamily {
    pub fn new(kind: HashKind, input_bits: u32, output_bits: u32) -> Result<Self> {
        if input_bits == 0 || input_bits > 24 {
            return Err(Error::invalid(
                "hash family",
                format!("input bits {input_bits} outside 1..=24"),
            ));
        }
        if output_bits == 0 || output_bits > input_bits {
            return Err(Error::invalid(
                "hash family",
                format!("output bits {output_bits} outside 1..={input_bits}"),
            ));
        }
        Ok(HashFamily {
            kind,
            input_bits,
            output_bits,
        })
    }

    /// Length of a seed, i.e. log2 of the family size.
    pub fn seed_bits(&self) -> u64 {
        let n = self.input_bits as u64;
        let s = self.output_bits as u64;
        match self.kind {
            HashKind::Toeplitz => n + s - 1,
            HashKind::Gf2nMult => n,
            HashKind::AllFunctions => s << n,
            HashKind::Constant => s,
        }
    }

    pub fn enumerable(&self, cap_bits: u64) -> bool {
        self.seed_bits() <= cap_bits.min(63)
    }

    pub fn seed_count(&self, cap_bits: u64) -> Result<u64> {
        let bits = self.seed_bits();
        if !self.enumerable(cap_bits) {
            return Err(Error::SeedSpaceTooLarge {
                bits,
                cap: cap_bits,
            });
        }
        Ok(1u64 << bits)
    }
}

/// Carryless multiplication in GF(2^n) modulo the embedded polynomial.
fn gf2_mul(a: u64, b: u64, n: u32) -> u64 {
    let poly = GF2_POLYNOMIALS[n as usize];
    let mut prod = 0u64;
    for i in 0..n {
        if (b >> i) & 1 == 1 {
            prod ^= a << i;
        }
    }
    for bit in (n..=(2 * n).saturating_sub(2)).rev() {
        if (prod >> bit) & 1 == 1 {
            prod ^= poly << (bit - n);
        }
    }
    prod & ((1u64 << n) - 1)
}

/// Word-level evaluation. The seed must fit in a u64, which always holds for
/// Toeplitz, GF(2^n) and constant families at the supported sizes.
pub(crate) fn evaluate_word(fam: &HashFamily, seed: u64, z: u64) -> u64 {
    let n = fam.input_bits;
    let s = fam.output_bits;
    match fam.kind {
        HashKind::Toeplitz => {
            // row i of the Toeplitz matrix is seed bits s-1-i .. s-1-i+n
            let mask = (1u64 << n) - 1;
            let mut out = 0u64;
            for i in 0..s {
                let row = (seed >> (s - 1 - i)) & mask;
                let parity = (row & z).count_ones() as u64 & 1;
                out |= parity << i;
            }
            out
        }
        HashKind::Gf2nMult => gf2_mul(seed, z, n) & ((1u64 << s) - 1),
        HashKind::AllFunctions => (seed >> (z * s as u64)) & ((1u64 << s) - 1),
        HashKind::Constant => seed & ((1u64 << s) - 1),
    }
}

/// Applies the function selected by `seed` to the input `z`.
pub fn evaluate(fam: &HashFamily, seed: &BitString, z: &BitString) -> Result<BitString> {
    let expected_seed = fam.seed_bits() as usize;
    if seed.len() != expected_seed {
        return Err(Error::LengthMismatch {
            expected: expected_seed,
            got: seed.len(),
        });
    }
    if z.len() != fam.input_bits as usize {
        return Err(Error::LengthMismatch {
            expected: fam.input_bits as usize,
            got: z.len(),
        });
    }
    let s = fam.output_bits as usize;
    if fam.kind == HashKind::AllFunctions && seed.len() > 64 {
        // truth table wider than a word: pick the z-th block directly
        let idx = z.to_word() as usize;
        let bits = (0..s).map(|j| seed.bit(idx * s + j)).collect();
        return Ok(BitString::new(bits));
    }
    Ok(BitString::from_word(
        evaluate_word(fam, seed.to_word(), z.to_word()),
        s,
    ))
}

/// Exact collision probability `Pr[F(x) = F(x')]` over a uniform seed, as a
/// reduced rational.
///
/// The complete-function family needs no enumeration: the truth-table blocks
/// at `x` and `x'` are independent, so exactly `2^(seed_bits - s)` of the
/// seeds collide. Everything else is counted by exhaustive enumeration.
pub fn collision_probability(
    fam: &HashFamily,
    x: &BitString,
    x_prime: &BitString,
) -> Result<Ratio<u64>> {
    if x == x_prime {
        return Err(Error::invalid("collision pair", "inputs must be distinct"));
    }
    if x.len() != fam.input_bits as usize || x_prime.len() != fam.input_bits as usize {
        return Err(Error::LengthMismatch {
            expected: fam.input_bits as usize,
            got: x.len().max(x_prime.len()),
        });
    }
    if fam.kind == HashKind::AllFunctions {
        return Ok(Ratio::new(1, 1u64 << fam.output_bits));
    }
    let total = fam.seed_count(SEED_CAP_BITS)?;
    let (xw, xpw) = (x.to_word(), x_prime.to_word());
    let colliding = (0..total)
        .filter(|&seed| evaluate_word(fam, seed, xw) == evaluate_word(fam, seed, xpw))
        .count() as u64;
    Ok(Ratio::new(colliding, total))
}

/// Exhaustively checks `Pr[F(x) = F(x')] <= 2^-s` for every distinct input
/// pair. Only feasible for small input spaces.
pub fn certify_two_universal(fam: &HashFamily) -> Result<bool> {
    if fam.input_bits > CERTIFY_MAX_INPUT_BITS {
        return Err(Error::SeedSpaceTooLarge {
            bits: fam.seed_bits(),
            cap: SEED_CAP_BITS,
        });
    }
    let bound = Ratio::new(1, 1u64 << fam.output_bits);
    let m = 1u64 << fam.input_bits;
    for x in 0..m {
        for xp in (x + 1)..m {
            let p = collision_probability(
                fam,
                &BitString::from_word(x, fam.input_bits as usize),
                &BitString::from_word(xp, fam.input_bits as usize),
            )?;
            if p > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
