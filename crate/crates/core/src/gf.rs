//! Arithmetic in GF(2^v) for 1 <= v <= 16.
//!
//! Elements are stored as integers whose bits are polynomial coefficients.
//! Multiplication goes through log/antilog tables generated from a fixed
//! primitive polynomial per field size, so every build agrees on products:
//!
//! | v  | polynomial                    | hex     |
//! |----|-------------------------------|---------|
//! | 1  | x + 1                         | 0x3     |
//! | 2  | x^2 + x + 1                   | 0x7     |
//! | 3  | x^3 + x + 1                   | 0xB     |
//! | 4  | x^4 + x + 1                   | 0x13    |
//! | 5  | x^5 + x^2 + 1                 | 0x25    |
//! | 6  | x^6 + x + 1                   | 0x43    |
//! | 7  | x^7 + x + 1                   | 0x83    |
//! | 8  | x^8 + x^4 + x^3 + x^2 + 1     | 0x11D   |
//! | 9  | x^9 + x^4 + 1                 | 0x211   |
//! | 10 | x^10 + x^3 + 1                | 0x409   |
//! | 11 | x^11 + x^2 + 1                | 0x805   |
//! | 12 | x^12 + x^6 + x^4 + x + 1      | 0x1053  |
//! | 13 | x^13 + x^4 + x^3 + x + 1      | 0x201B  |
//! | 14 | x^14 + x^10 + x^6 + x + 1     | 0x4443  |
//! | 15 | x^15 + x + 1                  | 0x8003  |
//! | 16 | x^16 + x^5 + x^3 + x^2 + 1    | 0x1002D |

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_BITS: u32 = 1;
pub const MAX_BITS: u32 = 16;

const PRIMITIVE_POLYNOMIALS: [u32; 16] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1002D,
];

/// Primitive polynomial used for GF(2^bits).
pub fn primitive_polynomial(bits: u32) -> Result<u32> {
    check_bits(bits)?;
    Ok(PRIMITIVE_POLYNOMIALS[(bits - MIN_BITS) as usize])
}

fn check_bits(bits: u32) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::InvalidParameter(format!(
            "field bit-width {bits} outside supported range {MIN_BITS}..={MAX_BITS}"
        )));
    }
    Ok(())
}

/// Log/antilog tables for one field size.
#[derive(Debug)]
pub struct FieldTables {
    bits: u32,
    // exp has length 2 * (q - 1) so products of logs need no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl FieldTables {
    fn build(bits: u32) -> Self {
        let poly = PRIMITIVE_POLYNOMIALS[(bits - MIN_BITS) as usize];
        let size = 1usize << bits;
        let order = size - 1;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![0u32; size];
        let mut x = 1u32;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            *slot = x;
            log[x as usize] = i as u32;
            x <<= 1;
            if x & (1 << bits) != 0 {
                x ^= poly;
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        FieldTables { bits, exp, log }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn order(&self) -> usize {
        (1usize << self.bits) - 1
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let order = self.order() as u32;
        Some(self.exp[((order - self.log[a as usize]) % order) as usize])
    }

    /// Antilog table entry `alpha^i`.
    pub fn alpha_pow(&self, i: usize) -> u32 {
        self.exp[i % self.order()]
    }
}

static TABLES: [OnceLock<FieldTables>; 17] = [const { OnceLock::new() }; 17];

/// Shared tables for GF(2^bits), built on first use.
pub fn tables(bits: u32) -> Result<&'static FieldTables> {
    check_bits(bits)?;
    Ok(TABLES[bits as usize].get_or_init(|| FieldTables::build(bits)))
}

/// An element of GF(2^bits).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement {
    value: u32,
    bits: u8,
}

impl FieldElement {
    pub fn new(value: u32, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        if value >> bits != 0 {
            return Err(Error::InvalidParameter(format!(
                "value {value} does not fit in GF(2^{bits})"
            )));
        }
        Ok(FieldElement {
            value,
            bits: bits as u8,
        })
    }

    pub fn zero(bits: u32) -> Result<Self> {
        Self::new(0, bits)
    }

    pub fn one(bits: u32) -> Result<Self> {
        Self::new(1, bits)
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn bits(self) -> u32 {
        self.bits as u32
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn tables(self) -> &'static FieldTables {
        // bit-width validated at construction
        tables(self.bits as u32).expect("validated field width")
    }

    pub fn inverse(self) -> Option<Self> {
        self.tables().inv(self.value).map(|value| FieldElement {
            value,
            bits: self.bits,
        })
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF2^{}({})", self.bits, self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.bits, rhs.bits, "adding elements of different fields");
        FieldElement {
            value: self.value ^ rhs.value,
            bits: self.bits,
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: Self) -> Self {
        assert_eq!(
            self.bits, rhs.bits,
            "multiplying elements of different fields"
        );
        FieldElement {
            value: self.tables().mul(self.value, rhs.value),
            bits: self.bits,
        }
    }
}
