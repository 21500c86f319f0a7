//! Arithmetic in GF(2^L) for L ∈ {4, 8, 16}, via log/antilog tables.

use crate::error::{Error, Result};

/// Reduction polynomial per supported width, bit `L` included.
fn reduction_poly(bits: u32) -> Option<u32> {
    match bits {
        // x^4 + x + 1
        4 => Some(0x13),
        // x^8 + x^4 + x^3 + x + 1
        8 => Some(0x11B),
        // x^16 + x^5 + x^3 + x^2 + 1
        16 => Some(0x1_002D),
        _ => None,
    }
}

/// Carry-less multiply then reduce. Table-free; used to build the tables and
/// as an independent reference in tests.
pub fn mul_reference(a: u16, b: u16, bits: u32, poly: u32) -> u16 {
    let mut acc: u32 = 0;
    let mut a = a as u32;
    let mut b = b as u32;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << bits) != 0 {
            a ^= poly;
        }
    }
    acc as u16
}

#[derive(Debug, Clone)]
pub struct GaloisField {
    bits: u32,
    poly: u32,
    generator: u16,
    /// `exp[i] = g^i`, doubled so sums of two logs index directly.
    exp: Vec<u16>,
    log: Vec<u32>,
}

impl GaloisField {
    pub fn new(bits: u32) -> Result<Self> {
        let poly = reduction_poly(bits)
            .ok_or_else(|| Error::Domain(format!("unsupported field width L={bits}")))?;
        let order = (1usize << bits) - 1;
        let generator = (2..=order as u16)
            .find(|&g| multiplicative_order(g, bits, poly) == order)
            .expect("reduction polynomials are irreducible");

        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u32; order + 1];
        let mut x: u16 = 1;
        for i in 0..order {
            exp[i] = x;
            exp[i + order] = x;
            log[x as usize] = i as u32;
            x = mul_reference(x, generator, bits, poly);
        }
        Ok(GaloisField {
            bits,
            poly,
            generator,
            exp,
            log,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    pub fn generator(&self) -> u16 {
        self.generator
    }

    /// Number of field elements, `2^L`.
    pub fn size(&self) -> usize {
        1 << self.bits
    }

    pub fn contains(&self, a: u16) -> bool {
        (a as usize) < self.size()
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u16) -> Result<u16> {
        if a == 0 {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        let order = self.exp.len() / 2;
        Ok(self.exp[(order - self.log[a as usize] as usize) % order])
    }

    pub fn div(&self, a: u16, b: u16) -> Result<u16> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u16, e: usize) -> u16 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = self.exp.len() / 2;
        self.exp[(self.log[a as usize] as usize * (e % order)) % order]
    }
}

fn multiplicative_order(g: u16, bits: u32, poly: u32) -> usize {
    let mut x = g;
    let mut n = 1;
    while x != 1 {
        x = mul_reference(x, g, bits, poly);
        n += 1;
        if n > 1 << bits {
            return 0;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_widths_build() {
        for bits in [4, 8, 16] {
            let f = GaloisField::new(bits).unwrap();
            assert_eq!(f.size(), 1 << bits);
            assert_eq!(f.mul(1, 1), 1);
        }
        assert!(GaloisField::new(5).is_err());
    }

    #[test]
    fn gf256_known_products() {
        let f = GaloisField::new(8).unwrap();
        // standard AES-field products
        assert_eq!(f.mul(0x57, 0x83), 0xC1);
        assert_eq!(f.mul(0x57, 0x13), 0xFE);
        assert_eq!(f.inv(0x53).unwrap(), 0xCA);
        assert!(f.inv(0).is_err());
    }

    #[test]
    fn tables_match_reference_gf16_exhaustively() {
        let f = GaloisField::new(4).unwrap();
        for a in 0..16u16 {
            for b in 0..16u16 {
                assert_eq!(f.mul(a, b), mul_reference(a, b, 4, f.poly()));
            }
        }
    }

    fn elem(bits: u32) -> impl Strategy<Value = u16> {
        (0u32..(1 << bits)).prop_map(|v| v as u16)
    }

    proptest! {
        #[test]
        fn field_axioms_gf256(a in elem(8), b in elem(8), c in elem(8)) {
            let f = GaloisField::new(8).unwrap();
            prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(a, b), mul_reference(a, b, 8, f.poly()));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }

        #[test]
        fn field_axioms_gf65536(a in elem(16), b in elem(16), c in elem(16)) {
            let f = GaloisField::new(16).unwrap();
            prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(a, b), mul_reference(a, b, 16, f.poly()));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                prop_assert_eq!(f.pow(a, 3), f.mul(a, f.mul(a, a)));
            }
        }
    }
}
