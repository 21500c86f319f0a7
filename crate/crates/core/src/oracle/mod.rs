//! Exact decodability checks over GF(2^L).
//!
//! A set of computed IVs `{c_i X : i ∈ S}` determines every output `W X`
//! exactly when the rows of the coding matrix `G` indexed by `S` have rank
//! `m`. This module builds real coding matrices, encodes random models and
//! decodes from the computed IVs to confirm the latency modules' stopping
//! rules. It is never used on the latency evaluation path.

mod field;
mod matrix;
pub mod verify;

pub use field::{mul_reference, GaloisField};
pub use matrix::GfMatrix;

use crate::error::{Error, Result};

/// `mprime × m` Vandermonde matrix `G[i][j] = α_i^j` with `α_i = i`. Any `m`
/// rows are linearly independent since the evaluation points are distinct.
pub fn mds_generator(field: &GaloisField, mprime: usize, m: usize) -> Result<GfMatrix> {
    if mprime > field.size() {
        return Err(Error::FieldTooSmall {
            bits: field.bits(),
            size: field.size(),
            needed: mprime,
        });
    }
    Ok(GfMatrix::from_fn(mprime, m, |i, j| field.pow(i as u16, j)))
}

/// Coded model rows `G·W`.
pub fn encode_model(field: &GaloisField, g: &GfMatrix, w: &GfMatrix) -> Result<GfMatrix> {
    g.mul(field, w)
}

/// Deduplicated, sorted copy of `indices`.
fn distinct(indices: &[usize]) -> Vec<usize> {
    let mut v = indices.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// True iff the rows of `g` at `computed` have full column rank.
pub fn feasible(field: &GaloisField, computed: &[usize], g: &GfMatrix) -> bool {
    match g.select_rows(&distinct(computed)) {
        Ok(sub) => sub.rank(field) == g.cols(),
        Err(_) => false,
    }
}

/// Recovers `Y = W X` (m × N) from computed IVs.
///
/// `ivs` holds one row per entry of `computed`: row `t` is `c_{computed[t]} X`.
pub fn decode_outputs(
    field: &GaloisField,
    g: &GfMatrix,
    computed: &[usize],
    ivs: &GfMatrix,
) -> Result<GfMatrix> {
    if ivs.rows() != computed.len() {
        return Err(Error::Shape(format!(
            "{} IV rows for {} computed indices",
            ivs.rows(),
            computed.len()
        )));
    }
    let m = g.cols();
    let n = ivs.cols();
    let coeffs = g.select_rows(computed)?;
    let mut aug = GfMatrix::from_fn(computed.len(), m + n, |i, j| {
        if j < m {
            coeffs.get(i, j)
        } else {
            ivs.get(i, j - m)
        }
    });
    let pivots = aug.reduce(field, m);
    if pivots.len() < m {
        return Err(Error::Singular {
            rank: pivots.len(),
            needed: m,
        });
    }
    // full rank: row i of the reduced system reads y_i = aug[i, m..]
    Ok(GfMatrix::from_fn(m, n, |i, j| aug.get(i, m + j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::subsets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(
        rng: &mut ChaCha8Rng,
        rows: usize,
        cols: usize,
        field: &GaloisField,
    ) -> GfMatrix {
        GfMatrix::from_fn(rows, cols, |_, _| rng.random_range(0..field.size()) as u16)
    }

    /// Scalar triple loop, independent of `GfMatrix::mul`.
    fn naive_product(field: &GaloisField, a: &GfMatrix, b: &GfMatrix) -> GfMatrix {
        GfMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).fold(0u16, |acc, k| {
                acc ^ mul_reference(a.get(i, k), b.get(k, j), field.bits(), field.poly())
            })
        })
    }

    #[test]
    fn square_generator_invertible() {
        let f = GaloisField::new(8).unwrap();
        let g = mds_generator(&f, 5, 5).unwrap();
        assert_eq!(g.rank(&f), 5);
    }

    #[test]
    fn all_pairs_of_four_invertible() {
        let f = GaloisField::new(8).unwrap();
        let g = mds_generator(&f, 4, 2).unwrap();
        for pair in subsets(4, 2) {
            assert!(feasible(&f, &pair, &g), "{pair:?}");
        }
    }

    #[test]
    fn random_subsets_invertible() {
        let f = GaloisField::new(8).unwrap();
        let g = mds_generator(&f, 36, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let mut idx: Vec<usize> = (0..36).collect();
            for i in 0..12 {
                let j = rng.random_range(i..36);
                idx.swap(i, j);
            }
            assert!(feasible(&f, &idx[..12], &g));
        }
    }

    #[test]
    fn field_too_small() {
        let f = GaloisField::new(4).unwrap();
        assert!(matches!(
            mds_generator(&f, 17, 4),
            Err(Error::FieldTooSmall { .. })
        ));
        assert!(mds_generator(&f, 16, 4).is_ok());
    }

    #[test]
    fn encode_matches_scalar_reference() {
        let f = GaloisField::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = mds_generator(&f, 9, 4).unwrap();
        let w = random_matrix(&mut rng, 4, 5, &f);
        assert_eq!(encode_model(&f, &g, &w).unwrap(), naive_product(&f, &g, &w));
        assert_eq!(encode_model(&f, &GfMatrix::identity(4), &w).unwrap(), w);
        let w2 = random_matrix(&mut rng, 4, 5, &f);
        let lhs = encode_model(&f, &g, &w.add(&w2).unwrap()).unwrap();
        let rhs = encode_model(&f, &g, &w)
            .unwrap()
            .add(&encode_model(&f, &g, &w2).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        assert!(encode_model(&f, &g, &random_matrix(&mut rng, 3, 5, &f)).is_err());
    }

    #[test]
    fn identity_feasibility_is_coverage() {
        let f = GaloisField::new(8).unwrap();
        let g = GfMatrix::identity(4);
        assert!(feasible(&f, &[3, 1, 0, 2], &g));
        assert!(feasible(&f, &[3, 1, 0, 2, 1], &g));
        assert!(!feasible(&f, &[0, 1, 3], &g));
        assert!(!feasible(&f, &[0, 1, 2, 9], &g));
    }

    #[test]
    fn decode_recovers_outputs() {
        let f = GaloisField::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (m, r, n) = (4, 3, 2);
        let g = mds_generator(&f, 8, m).unwrap();
        for _ in 0..20 {
            let w = random_matrix(&mut rng, m, r, &f);
            let x = random_matrix(&mut rng, r, n, &f);
            let coded = encode_model(&f, &g, &w).unwrap();
            let computed = [6, 1, 3, 7];
            let ivs = coded.select_rows(&computed).unwrap().mul(&f, &x).unwrap();
            let y = decode_outputs(&f, &g, &computed, &ivs).unwrap();
            assert_eq!(y, naive_product(&f, &w, &x));
        }
    }

    #[test]
    fn decode_identity_and_singular() {
        let f = GaloisField::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_matrix(&mut rng, 3, 2, &f);
        let x = random_matrix(&mut rng, 2, 2, &f);
        let y = w.mul(&f, &x).unwrap();
        let g = GfMatrix::identity(3);
        assert_eq!(decode_outputs(&f, &g, &[0, 1, 2], &y).unwrap(), y);
        let short = y.select_rows(&[0, 1]).unwrap();
        assert!(matches!(
            decode_outputs(&f, &g, &[0, 1], &short),
            Err(Error::Singular { rank: 2, needed: 3 })
        ));
    }
}
