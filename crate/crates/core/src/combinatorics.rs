/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::binomial;

    #[test]
    fn small_values() {
        assert_eq!(binomial(15, 5), 3003);
        assert_eq!(binomial(30, 10), 30_045_015);
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(7, 0), 1);
    }
}
