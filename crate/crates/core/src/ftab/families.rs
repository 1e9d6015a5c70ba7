use super::FunctionTable;
use crate::error::{Error, Result};

/// `GT(x, y) = 1` iff `x > y` on `[N] × [N]`; stored 0-indexed (index `i` is the value `i + 1`).
pub fn make_gt(n: usize) -> Result<FunctionTable> {
    if n < 1 {
        return Err(Error::InvalidArgument("GT needs N >= 1".into()));
    }
    FunctionTable::from_fn(format!("gt({n})"), n, n, 2, |x, y| usize::from(x > y))
}

pub fn is_odd_prime(q: u64) -> bool {
    if q < 3 || q.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn check_prime(q: u64) -> Result<usize> {
    if is_odd_prime(q) {
        usize::try_from(q).map_err(|_| Error::NotOddPrime(q))
    } else {
        Err(Error::NotOddPrime(q))
    }
}

/// Quadratic character of `F_q`, encoded `0 ↦ 0`, `1 ↦ 1`, `-1 ↦ 2`.
pub fn make_chi(q: u64) -> Result<Vec<usize>> {
    let q = check_prime(q)?;
    let mut chi = vec![2; q];
    chi[0] = 0;
    for z in 1..q {
        chi[z * z % q] = 1;
    }
    Ok(chi)
}

/// Decodes the `{0, 1, 2}` encoding back to `{0, 1, -1}`.
pub fn chi_value(encoded: usize) -> i8 {
    match encoded {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// `PS(x, y) = 1` iff `x + y` is a square in `F_q` (zero included).
pub fn make_ps(q: u64) -> Result<FunctionTable> {
    let chi = make_chi(q)?;
    let q = chi.len();
    FunctionTable::from_fn(format!("ps({q})"), q, q, 2, |x, y| {
        usize::from(chi[(x + y) % q] != 2)
    })
}

/// `PS'(x, y) = χ(x + y)` with the `{0, 1, 2}` answer encoding.
pub fn make_ps_prime(q: u64) -> Result<FunctionTable> {
    let chi = make_chi(q)?;
    let q = chi.len();
    FunctionTable::from_fn(format!("ps_prime({q})"), q, q, 3, |x, y| chi[(x + y) % q])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gt_values() {
        let gt = make_gt(4).unwrap();
        // 1-indexed GT(3, 2) = 1 and GT(2, 2) = 0
        assert_eq!(gt.get(2, 1), 1);
        assert_eq!(gt.get(1, 1), 0);
        assert!(gt.row(0).iter().all(|&v| v == 0));
        assert!(make_gt(0).is_err());
    }

    #[test]
    fn chi_mod_7() {
        // z² mod 7 for z = 1..6 is {1, 4, 2}
        let chi = make_chi(7).unwrap();
        assert_eq!(chi_value(chi[1]), 1);
        assert_eq!(chi_value(chi[2]), 1);
        assert_eq!(chi_value(chi[4]), 1);
        assert_eq!(chi_value(chi[3]), -1);
        assert_eq!(chi_value(chi[0]), 0);
    }

    #[test]
    fn chi_balance() {
        for q in [3u64, 5, 7, 11, 13, 101] {
            let chi = make_chi(q).unwrap();
            let plus = chi.iter().filter(|&&v| v == 1).count();
            let minus = chi.iter().filter(|&&v| v == 2).count();
            assert_eq!(plus as u64, (q - 1) / 2);
            assert_eq!(minus as u64, (q - 1) / 2);
        }
    }

    #[test]
    fn rejects_non_primes() {
        for q in [0u64, 1, 2, 4, 9, 15, 21] {
            assert!(matches!(make_chi(q), Err(Error::NotOddPrime(_))));
        }
        assert!(make_ps(9).is_err());
        assert!(make_ps_prime(2).is_err());
    }

    #[test]
    fn ps_examples() {
        let ps = make_ps(7).unwrap();
        // 3 + 1 = 4 = 2²
        assert_eq!(ps.get(3, 1), 1);
        // 3 + 4 = 0 = 0²
        assert_eq!(ps.get(3, 4), 1);
        let psp = make_ps_prime(7).unwrap();
        assert_eq!(psp.size_z(), 3);
        assert_eq!(chi_value(psp.get(3, 4)), 0);
        // 1 + 1 = 2 = 3² mod 7
        assert_eq!(chi_value(psp.get(1, 1)), 1);
    }
}
