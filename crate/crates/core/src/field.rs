//! Arithmetic in the prime field F_p.
//!
//! Every residue is kept as its least nonnegative representative so that
//! records produced from different code paths compare bit-exactly. Moduli
//! stay below 2^32, so a product of two residues always fits in a `u64`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default ceiling for the modulus of a [`PrimeCtx`].
pub const DEFAULT_PRIME_BOUND: u64 = 1 << 20;

/// Hard ceiling: products of two residues must fit in a `u64`.
const MAX_PRIME_BOUND: u64 = 1 << 32;

/// A validated prime p > 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeCtx {
    p: u64,
}

/// A canonical residue in `[0, p)`. Only a [`PrimeCtx`] hands these out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue(u64);

impl Residue {
    pub const ZERO: Residue = Residue(0);
    pub const ONE: Residue = Residue(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl PrimeCtx {
    pub fn new(p: u64) -> Result<Self> {
        Self::with_bound(p, DEFAULT_PRIME_BOUND)
    }

    /// Like [`PrimeCtx::new`] with a caller-chosen upper bound (at most 2^32).
    pub fn with_bound(p: u64, bound: u64) -> Result<Self> {
        if bound > MAX_PRIME_BOUND {
            return Err(Error::usage(format!("prime bound {bound} exceeds 2^32")));
        }
        if p <= 3 {
            return Err(Error::usage(format!("modulus must exceed 3, got {p}")));
        }
        if p > bound {
            return Err(Error::usage(format!("modulus {p} exceeds bound {bound}")));
        }
        if !is_prime(p)? {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeCtx { p })
    }

    pub fn p(self) -> u64 {
        self.p
    }

    /// (p - 1) / 2
    pub fn half(self) -> u64 {
        (self.p - 1) / 2
    }

    pub fn residue(self, n: u64) -> Residue {
        Residue(n % self.p)
    }

    /// Reduces a signed integer to its canonical representative.
    pub fn reduce(self, n: i64) -> Residue {
        Residue(n.rem_euclid(self.p as i64) as u64)
    }

    pub fn add(self, a: Residue, b: Residue) -> Residue {
        let s = a.0 + b.0;
        Residue(if s >= self.p { s - self.p } else { s })
    }

    pub fn sub(self, a: Residue, b: Residue) -> Residue {
        Residue(if a.0 >= b.0 {
            a.0 - b.0
        } else {
            a.0 + self.p - b.0
        })
    }

    pub fn neg(self, a: Residue) -> Residue {
        if a.0 == 0 {
            a
        } else {
            Residue(self.p - a.0)
        }
    }

    pub fn mul(self, a: Residue, b: Residue) -> Residue {
        Residue(a.0 * b.0 % self.p)
    }

    /// `base^exp` by square-and-multiply. `0^0` is taken to be 1.
    pub fn pow(self, base: Residue, mut exp: u64) -> Residue {
        let mut acc = Residue::ONE;
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, sq);
            }
            sq = self.mul(sq, sq);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat: a^(p-2).
    pub fn inv(self, a: Residue) -> Result<Residue> {
        if a.is_zero() {
            return Err(Error::NonInvertible {
                value: 0,
                p: self.p,
            });
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// Legendre symbol (a / p) by Euler's criterion.
    pub fn legendre(self, a: i64) -> i8 {
        let r = self.reduce(a);
        if r.is_zero() {
            return 0;
        }
        if self.pow(r, self.half()) == Residue::ONE {
            1
        } else {
            -1
        }
    }

    /// Maps a symbol value in {-1, 0, 1} into F_p.
    pub fn from_sign(self, s: i8) -> Residue {
        self.reduce(s as i64)
    }
}

impl fmt::Display for PrimeCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.p.fmt(f)
    }
}

pub fn mod_pow(base: Residue, exp: u64, ctx: PrimeCtx) -> Residue {
    ctx.pow(base, exp)
}

pub fn mod_inv(a: Residue, ctx: PrimeCtx) -> Result<Residue> {
    ctx.inv(a)
}

pub fn legendre(a: i64, ctx: PrimeCtx) -> i8 {
    ctx.legendre(a)
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

// The first twelve primes as bases are a deterministic witness set for all
// n < 3.3 * 10^24, which covers every u64.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin for `2 <= n <= 2^63 - 1`.
pub fn is_prime(n: u64) -> Result<bool> {
    if n < 2 || n > i64::MAX as u64 {
        return Err(Error::usage(format!(
            "primality input {n} outside [2, 2^63 - 1]"
        )));
    }
    for &b in &MR_BASES {
        if n == b {
            return Ok(true);
        }
        if n.is_multiple_of(b) {
            return Ok(false);
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// A set of residues modulo `modulus`, written `"3,7 mod 20"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueClass {
    residues: Vec<u64>,
    modulus: u64,
}

impl ResidueClass {
    pub fn new(residues: impl IntoIterator<Item = u64>, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::usage("class modulus must be positive"));
        }
        let mut residues: Vec<u64> = residues.into_iter().collect();
        if residues.is_empty() {
            return Err(Error::usage("empty residue set"));
        }
        if let Some(r) = residues.iter().find(|&&r| r >= modulus) {
            return Err(Error::usage(format!(
                "residue {r} not reduced mod {modulus}"
            )));
        }
        residues.sort_unstable();
        residues.dedup();
        Ok(ResidueClass { residues, modulus })
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, n: u64) -> bool {
        self.residues.binary_search(&(n % self.modulus)).is_ok()
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rs: Vec<String> = self.residues.iter().map(u64::to_string).collect();
        write!(f, "{} mod {}", rs.join(","), self.modulus)
    }
}

impl FromStr for ResidueClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::usage(format!(
                "cannot parse residue class {s:?}, expected \"r1,r2 mod m\""
            ))
        };
        let (lhs, rhs) = s.split_once("mod").ok_or_else(bad)?;
        let modulus: u64 = rhs.trim().parse().map_err(|_| bad())?;
        let residues = lhs
            .split(',')
            .map(|r| r.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        ResidueClass::new(residues, modulus)
    }
}

/// All primes q with `lo <= q <= hi`, q > 3 and `q mod modulus` in `residues`,
/// in increasing order.
pub fn primes_in_classes(
    lo: u64,
    hi: u64,
    residues: &[u64],
    modulus: u64,
) -> Result<Vec<PrimeCtx>> {
    let class = ResidueClass::new(residues.iter().copied(), modulus)?;
    primes_in_class(lo, hi, &class)
}

pub fn primes_in_class(lo: u64, hi: u64, class: &ResidueClass) -> Result<Vec<PrimeCtx>> {
    if lo > hi {
        return Err(Error::usage(format!("empty range [{lo}, {hi}]")));
    }
    if hi > DEFAULT_PRIME_BOUND {
        return Err(Error::usage(format!(
            "upper bound {hi} exceeds {DEFAULT_PRIME_BOUND}"
        )));
    }
    let hi = hi as usize;
    let mut composite = vec![false; hi + 1];
    let mut out = Vec::new();
    for n in 2..=hi {
        if composite[n] {
            continue;
        }
        let mut m = n * n;
        while m <= hi {
            composite[m] = true;
            m += n;
        }
        let q = n as u64;
        if q > 3 && q >= lo && class.contains(q) {
            out.push(PrimeCtx { p: q });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrimeCtx {
        PrimeCtx::new(p).unwrap()
    }

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn is_prime_examples() {
        assert!(is_prime(2).unwrap());
        assert!(is_prime(503).unwrap());
        assert!(!is_prime(511).unwrap());
        assert!(matches!(is_prime(1), Err(Error::Usage(_))));
        assert!(matches!(is_prime(1 << 63), Err(Error::Usage(_))));
    }

    #[test]
    fn is_prime_matches_trial_division() {
        for n in 2..20_000 {
            assert_eq!(is_prime(n).unwrap(), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn is_prime_large_inputs() {
        // 2^61 - 1 is a Mersenne prime; 3215031751 is a strong pseudoprime to bases 2, 3, 5, 7.
        assert!(is_prime((1 << 61) - 1).unwrap());
        assert!(!is_prime(3_215_031_751).unwrap());
        assert!(!is_prime(((1u64 << 31) - 1) * 65_537).unwrap());
        assert!(is_prime(i64::MAX as u64 - 24).unwrap());
    }

    #[test]
    fn prime_ctx_validation() {
        assert!(PrimeCtx::new(3).is_err());
        assert!(matches!(PrimeCtx::new(9), Err(Error::NotPrime(9))));
        assert!(PrimeCtx::new((1 << 20) + 7).is_err());
        assert_eq!(
            PrimeCtx::with_bound(1_048_583, 1 << 21).unwrap().p(),
            1_048_583
        );
        assert!(PrimeCtx::with_bound(5, 1 << 40).is_err());
    }

    #[test]
    fn mod_pow_examples() {
        for p in [5, 7, 101] {
            let c = ctx(p);
            for a in 0..p {
                assert_eq!(mod_pow(c.residue(a), 0, c), Residue::ONE);
            }
        }
        assert_eq!(mod_pow(ctx(7).residue(2), 3, ctx(7)).value(), 1);
        assert_eq!(mod_pow(ctx(7).residue(5), 5, ctx(7)).value(), 3);
    }

    #[test]
    fn mod_inv_examples() {
        let c = ctx(7);
        assert_eq!(mod_inv(Residue::ONE, c).unwrap(), Residue::ONE);
        assert_eq!(mod_inv(c.residue(2), c).unwrap().value(), 4);
        assert!(matches!(
            mod_inv(Residue::ZERO, c),
            Err(Error::NonInvertible { .. })
        ));
    }

    #[test]
    fn legendre_examples() {
        for p in [5, 7, 11, 13] {
            assert_eq!(legendre(1, ctx(p)), 1);
            assert_eq!(legendre(p as i64, ctx(p)), 0);
        }
        assert_eq!(legendre(2, ctx(7)), 1);
        assert_eq!(legendre(-2, ctx(5)), -1);
    }

    #[test]
    fn legendre_multiplicative() {
        for p in (5..50).filter(|&n| trial_division(n)) {
            let c = ctx(p);
            for a in -(p as i64)..(p as i64) {
                for b in 0..(p as i64) {
                    assert_eq!(c.legendre(a * b), c.legendre(a) * c.legendre(b));
                }
            }
        }
    }

    #[test]
    fn legendre_matches_square_search() {
        for p in (5..100).filter(|&n| trial_division(n)) {
            let c = ctx(p);
            for a in 1..p {
                let is_square = (1..p).any(|x| x * x % p == a);
                assert_eq!(c.legendre(a as i64) == 1, is_square, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn inverse_involution_and_fermat() {
        for p in (5..100).filter(|&n| trial_division(n)) {
            let c = ctx(p);
            for a in 1..p {
                let r = c.residue(a);
                assert_eq!(c.inv(c.inv(r).unwrap()).unwrap(), r);
                assert_eq!(c.mul(r, c.inv(r).unwrap()), Residue::ONE);
                assert_eq!(c.pow(r, p - 1), Residue::ONE);
            }
        }
    }

    #[test]
    fn wilson_corollary() {
        // (p-2)! = (p-1)!/(p-1) = -1/-1 = 1
        for p in (5..=200).filter(|&n| trial_division(n)) {
            let c = ctx(p);
            let f = (1..=p - 2).fold(Residue::ONE, |acc, k| c.mul(acc, c.residue(k)));
            assert_eq!(f, Residue::ONE, "p = {p}");
        }
    }

    #[test]
    fn negative_constants_reduce_canonically() {
        let c = ctx(101);
        assert_eq!(c.reduce(-4).value(), 97);
        assert_eq!(c.reduce(-27).value(), 74);
        assert_eq!(c.reduce(-101).value(), 0);
        assert_eq!(c.sub(c.residue(3), c.residue(5)).value(), 99);
        assert_eq!(c.neg(Residue::ZERO), Residue::ZERO);
    }

    #[test]
    fn primes_in_classes_examples() {
        let ps = |v: Vec<PrimeCtx>| v.into_iter().map(PrimeCtx::p).collect::<Vec<_>>();
        assert_eq!(
            ps(primes_in_classes(5, 50, &[7], 8).unwrap()),
            vec![7, 23, 31, 47]
        );
        assert_eq!(
            ps(primes_in_classes(5, 30, &[3, 7], 20).unwrap()),
            vec![7, 23]
        );
        assert_eq!(ps(primes_in_classes(5, 6, &[1], 4).unwrap()), vec![5]);
        assert!(primes_in_classes(6, 6, &[1], 4).unwrap().is_empty());
        assert!(primes_in_classes(0, 10, &[], 4).is_err());
        assert!(primes_in_classes(10, 5, &[1], 4).is_err());
        // 2 and 3 are never returned.
        assert_eq!(
            ps(primes_in_classes(0, 12, &[0, 1, 2], 3).unwrap()),
            vec![5, 7, 11]
        );
    }

    #[test]
    fn residue_class_parsing() {
        let c: ResidueClass = "3, 7 mod 20".parse().unwrap();
        assert_eq!(c.residues(), &[3, 7]);
        assert_eq!(c.modulus(), 20);
        assert_eq!(c.to_string(), "3,7 mod 20");
        assert!("7 mod 0".parse::<ResidueClass>().is_err());
        assert!("9 mod 8".parse::<ResidueClass>().is_err());
        assert!("seven mod 8".parse::<ResidueClass>().is_err());
    }
}
