//! Balanced product trees.
//!
//! Multiplying many small factors into one big integer is quadratic with a
//! left fold; splitting in halves keeps the operands balanced so the large
//! multiplications hit Karatsuba/Toom sizes instead.

use num_bigint::BigUint;
use num_traits::One;

const LEAF: usize = 16;

/// Product of machine-word factors via a balanced tree.
pub fn product_u64(values: &[u64]) -> BigUint {
    if values.len() <= LEAF {
        let mut acc = BigUint::one();
        for &v in values {
            acc *= v;
        }
        return acc;
    }
    let (left, right) = values.split_at(values.len() / 2);
    product_u64(left) * product_u64(right)
}

/// Product of big factors via a balanced tree.
pub fn product_big(values: &[BigUint]) -> BigUint {
    match values.len() {
        0 => BigUint::one(),
        1 => values[0].clone(),
        n => {
            let (left, right) = values.split_at(n / 2);
            product_big(left) * product_big(right)
        }
    }
}

/// Number of decimal digits of `n` (1 for zero).
pub fn digit_count(n: &BigUint) -> usize {
    n.to_str_radix(10).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_matches_fold() {
        let values: Vec<u64> = (1..=200).map(|v| v * 7 + 3).collect();
        let folded = values.iter().fold(BigUint::one(), |acc, &v| acc * v);
        assert_eq!(product_u64(&values), folded);
        let big: Vec<BigUint> = values.iter().map(|&v| BigUint::from(v)).collect();
        assert_eq!(product_big(&big), folded);
    }

    #[test]
    fn empty_products_are_one() {
        assert_eq!(product_u64(&[]), BigUint::one());
        assert_eq!(product_big(&[]), BigUint::one());
    }

    #[test]
    fn digits() {
        assert_eq!(digit_count(&BigUint::from(0u32)), 1);
        assert_eq!(digit_count(&BigUint::from(999u32)), 3);
        assert_eq!(digit_count(&BigUint::from(1000u32)), 4);
    }
}
