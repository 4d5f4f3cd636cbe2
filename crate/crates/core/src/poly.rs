//! Reduction of (T^2 + cT + d)^(p-2) to the unique polynomial of degree at
//! most p - 2 that agrees with it on the nonzero residues, plus comparison of
//! those coefficients against closed-form predictions.
//!
//! The coefficients come from the finite-field interpolation identity
//!
//! ```text
//! a_k = -sum_{t=1}^{p-1} g(t) t^(-k)   (mod p)
//! ```
//!
//! which holds because sum_t t^m over F_p^* is -1 when (p - 1) | m and 0
//! otherwise. This is the ground truth every other coefficient source is
//! measured against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeCtx, Residue};
use crate::lucas::{closed_form_u, ClosedForm};

/// The binary quadratic form i^2 + c ij + d j^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub c: i64,
    pub d: i64,
}

impl QuadForm {
    pub const fn new(c: i64, d: i64) -> Self {
        QuadForm { c, d }
    }

    /// i^2 + c ij + d j^2 mod p.
    pub fn eval(self, ctx: PrimeCtx, i: u64, j: u64) -> Residue {
        let (i, j) = (ctx.residue(i), ctx.residue(j));
        let c = ctx.reduce(self.c);
        let d = ctx.reduce(self.d);
        let ii = ctx.mul(i, i);
        let cij = ctx.mul(c, ctx.mul(i, j));
        let djj = ctx.mul(d, ctx.mul(j, j));
        ctx.add(ctx.add(ii, cij), djj)
    }

    /// t^2 + c t + d mod p.
    pub fn at(self, ctx: PrimeCtx, t: u64) -> Residue {
        self.eval(ctx, t, 1)
    }

    /// c^2 - 4d mod p.
    pub fn discriminant(self, ctx: PrimeCtx) -> Residue {
        let c = ctx.reduce(self.c);
        ctx.sub(ctx.mul(c, c), ctx.mul(ctx.residue(4), ctx.reduce(self.d)))
    }

    /// Whether both forms coincide once reduced mod p.
    pub fn same_mod(self, other: QuadForm, ctx: PrimeCtx) -> bool {
        ctx.reduce(self.c) == ctx.reduce(other.c) && ctx.reduce(self.d) == ctx.reduce(other.d)
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.c, self.d)
    }
}

/// Coefficients a_0..a_{p-2} of the reduced polynomial for one form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedPoly {
    ctx: PrimeCtx,
    form: QuadForm,
    coeffs: Vec<Residue>,
}

impl ReducedPoly {
    /// Wraps an explicit coefficient vector; the length must be p - 1.
    pub fn from_coeffs(ctx: PrimeCtx, form: QuadForm, coeffs: Vec<Residue>) -> Result<Self> {
        if coeffs.len() as u64 != ctx.p() - 1 {
            return Err(Error::usage(format!(
                "expected {} coefficients mod {}, got {}",
                ctx.p() - 1,
                ctx,
                coeffs.len()
            )));
        }
        Ok(ReducedPoly { ctx, form, coeffs })
    }

    pub fn ctx(&self) -> PrimeCtx {
        self.ctx
    }

    pub fn form(&self) -> QuadForm {
        self.form
    }

    pub fn coeffs(&self) -> &[Residue] {
        &self.coeffs
    }

    pub fn eval(&self, t: Residue) -> Residue {
        let ctx = self.ctx;
        self.coeffs
            .iter()
            .rev()
            .fold(Residue::ZERO, |acc, &a| ctx.add(ctx.mul(acc, t), a))
    }
}

/// g(t) = (t^2 + ct + d)^(p-2) for t = 1..p-1 (index t - 1).
pub(crate) fn power_form_values(ctx: PrimeCtx, form: QuadForm) -> Vec<Residue> {
    (1..ctx.p())
        .map(|t| ctx.pow(form.at(ctx, t), ctx.p() - 2))
        .collect()
}

pub fn reduce_power_form(ctx: PrimeCtx, form: QuadForm) -> ReducedPoly {
    let p = ctx.p();
    let n = (p - 1) as usize;
    let g = power_form_values(ctx, form);
    let mut acc = vec![0u64; n];
    for t in 1..p {
        let gt = g[(t - 1) as usize];
        if gt.is_zero() {
            continue;
        }
        let t_inv = ctx.inv(ctx.residue(t)).expect("t is nonzero");
        let mut term = gt;
        for slot in acc.iter_mut() {
            *slot = (*slot + term.value()) % p;
            term = ctx.mul(term, t_inv);
        }
    }
    let coeffs = acc.into_iter().map(|s| ctx.neg(ctx.residue(s))).collect();
    ReducedPoly { ctx, form, coeffs }
}

/// The two printed coefficient formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffFormula {
    /// 4 a_k = (k+1) u'_{p-k+1} - 2(k-1) u'_{p-k-1} + 2^-k ((2k+4) u'_k - k u'_{k+2}),
    /// u' = u(-2, 2), for the form (2, 2).
    F21,
    /// 3 b_k = (k+1) w_{p-k+1} - 3(k-1) w_{p-k-1} + 3^-k ((3k+6) w_k - k w_{k+2}),
    /// w = u(-3, 3), for the form (3, 3).
    F26,
}

impl CoeffFormula {
    pub fn form(self) -> QuadForm {
        match self {
            CoeffFormula::F21 => QuadForm::new(2, 2),
            CoeffFormula::F26 => QuadForm::new(3, 3),
        }
    }
}

/// Evaluates a printed coefficient formula verbatim for k = 0..p-2.
pub fn formula_coeffs(variant: CoeffFormula, ctx: PrimeCtx) -> Vec<Residue> {
    // s is the sequence scale; lhs_scale is the multiplier on the left-hand side.
    let (seq, s, lhs_scale) = match variant {
        CoeffFormula::F21 => (ClosedForm::U22, 2i64, 4u64),
        CoeffFormula::F26 => (ClosedForm::U33, 3, 3),
    };
    let p = ctx.p();
    let u = |k: u64| closed_form_u(seq, k, ctx);
    let s_inv = ctx.inv(ctx.reduce(s)).expect("p > 3");
    let lhs_inv = ctx.inv(ctx.residue(lhs_scale)).expect("p > 3");

    (0..p - 1)
        .map(|k| {
            let ki = k as i64;
            let t1 = ctx.mul(ctx.reduce(ki + 1), u(p - k + 1));
            let t2 = ctx.mul(ctx.reduce(s * (ki - 1)), u(p - k - 1));
            let inner = ctx.sub(
                ctx.mul(ctx.reduce(s * ki + 2 * s), u(k)),
                ctx.mul(ctx.reduce(ki), u(k + 2)),
            );
            let t3 = ctx.mul(ctx.pow(s_inv, k), inner);
            ctx.mul(lhs_inv, ctx.add(ctx.sub(t1, t2), t3))
        })
        .collect()
}

/// Smallest cyclic shift s with `candidate[k] == oracle[(k - s) mod (p - 1)]`
/// for every k, if any.
pub fn cyclic_index_shift(candidate: &[Residue], oracle: &[Residue]) -> Option<usize> {
    let n = oracle.len();
    if candidate.len() != n {
        return None;
    }
    (0..n).find(|&s| (0..n).all(|k| candidate[k] == oracle[(k + n - s) % n]))
}

/// A coefficient-level claim that can be compared against the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Claim {
    /// Formula F21 equals the oracle for (2, 2), all k.
    F21,
    /// a_k = 0 for k = 1 mod 4, form (2, 2), p = 7 mod 8.
    F23,
    /// Formula F26 equals the oracle for (3, 3), all k.
    F26,
    /// b_k = 0 for k = 2 mod 6, form (3, 3), p = 2 mod 3.
    F210,
    /// c_{(p-3)/2} = c_{(p+1)/2} = 0, form (3, 1), p = 3, 7 mod 20.
    F213,
    /// c_k = c_{p-1-k} for 1 <= k <= p-2, form (3, 1).
    Sym43,
}

impl Claim {
    pub const ALL: [Claim; 6] = [
        Claim::F21,
        Claim::F23,
        Claim::F26,
        Claim::F210,
        Claim::F213,
        Claim::Sym43,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Claim::F21 => "f21",
            Claim::F23 => "f23",
            Claim::F26 => "f26",
            Claim::F210 => "f210",
            Claim::F213 => "f213",
            Claim::Sym43 => "sym43",
        }
    }

    /// The only form the claim is about.
    pub fn form(self) -> QuadForm {
        match self {
            Claim::F21 | Claim::F23 => QuadForm::new(2, 2),
            Claim::F26 | Claim::F210 => QuadForm::new(3, 3),
            Claim::F213 | Claim::Sym43 => QuadForm::new(3, 1),
        }
    }

    /// Primes for which the claim is stated, if restricted.
    pub fn prime_class(self) -> Option<(&'static [u64], u64)> {
        match self {
            Claim::F23 => Some((&[7], 8)),
            Claim::F210 => Some((&[2], 3)),
            Claim::F213 => Some((&[3, 7], 20)),
            Claim::F21 | Claim::F26 | Claim::Sym43 => None,
        }
    }

    fn check_applicable(self, ctx: PrimeCtx, form: QuadForm) -> Result<()> {
        if !form.same_mod(self.form(), ctx) {
            return Err(Error::usage(format!(
                "claim {} concerns the form {}, not {}",
                self.as_str(),
                self.form(),
                form
            )));
        }
        if let Some((residues, m)) = self.prime_class() {
            if !residues.contains(&(ctx.p() % m)) {
                return Err(Error::usage(format!(
                    "claim {} is stated for p in {:?} mod {}, not p = {}",
                    self.as_str(),
                    residues,
                    m,
                    ctx
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::usage(format!("unknown claim {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticEntry {
    pub index: u64,
    pub oracle: u64,
    pub claimed: u64,
    pub matches: bool,
}

/// Per-index comparison of one claim against the oracle coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagnosticRecord {
    pub ctx: PrimeCtx,
    pub form: QuadForm,
    pub claim: Claim,
    pub entries: Vec<DiagnosticEntry>,
}

impl DiagnosticRecord {
    pub fn matched(&self) -> usize {
        self.entries.iter().filter(|e| e.matches).count()
    }

    pub fn mismatched(&self) -> usize {
        self.entries.len() - self.matched()
    }

    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.matches)
    }
}

/// Compares the oracle coefficients of `form` against each claim. Mismatches
/// are reported, never raised.
pub fn coeff_diagnostics(
    ctx: PrimeCtx,
    form: QuadForm,
    claims: &[Claim],
) -> Result<Vec<DiagnosticRecord>> {
    for claim in claims {
        claim.check_applicable(ctx, form)?;
    }
    let poly = reduce_power_form(ctx, form);
    Ok(claims
        .iter()
        .map(|&claim| DiagnosticRecord {
            ctx,
            form,
            claim,
            entries: claim_entries(claim, &poly),
        })
        .collect())
}

fn claim_entries(claim: Claim, poly: &ReducedPoly) -> Vec<DiagnosticEntry> {
    let ctx = poly.ctx();
    let p = ctx.p();
    let a = poly.coeffs();
    let entry = |k: u64, claimed: Residue| {
        let oracle = a[k as usize];
        DiagnosticEntry {
            index: k,
            oracle: oracle.value(),
            claimed: claimed.value(),
            matches: oracle == claimed,
        }
    };
    let vanishing = |ks: Vec<u64>| ks.into_iter().map(|k| entry(k, Residue::ZERO)).collect();

    match claim {
        Claim::F21 | Claim::F26 => {
            let formula = if claim == Claim::F21 {
                CoeffFormula::F21
            } else {
                CoeffFormula::F26
            };
            formula_coeffs(formula, ctx)
                .into_iter()
                .enumerate()
                .map(|(k, v)| entry(k as u64, v))
                .collect()
        }
        Claim::F23 => vanishing((0..p - 1).filter(|k| k % 4 == 1).collect()),
        Claim::F210 => vanishing((0..p - 1).filter(|k| k % 6 == 2).collect()),
        Claim::F213 => vanishing(vec![(p - 3) / 2, p.div_ceil(2)]),
        Claim::Sym43 => (1..p - 1)
            .map(|k| entry(k, a[(p - 1 - k) as usize]))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrimeCtx {
        PrimeCtx::new(p).unwrap()
    }

    fn values(v: &[Residue]) -> Vec<u64> {
        v.iter().map(|r| r.value()).collect()
    }

    #[test]
    fn oracle_examples() {
        let p22 = reduce_power_form(ctx(7), QuadForm::new(2, 2));
        assert_eq!(values(p22.coeffs()), vec![0, 5, 2, 6, 0, 4]);
        assert_eq!(p22.eval(ctx(7).residue(1)).value(), 3);

        let p31 = reduce_power_form(ctx(7), QuadForm::new(3, 1));
        assert_eq!(p31.coeffs()[0], Residue::ZERO);
        assert_eq!(p31.coeffs()[4], Residue::ZERO);
    }

    #[test]
    fn zero_form_folds_to_single_monomial() {
        for p in [5, 7, 11, 13, 29] {
            let poly = reduce_power_form(ctx(p), QuadForm::new(p as i64, 0));
            for (k, &a) in poly.coeffs().iter().enumerate() {
                let want = if k as u64 == p - 3 { 1 } else { 0 };
                assert_eq!(a.value(), want, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn forms_with_roots_are_legal() {
        // t^2 - 1 vanishes at t = 1 and t = p - 1.
        let c = ctx(11);
        let poly = reduce_power_form(c, QuadForm::new(0, -1));
        assert_eq!(poly.eval(c.residue(1)), Residue::ZERO);
        assert_eq!(poly.eval(c.residue(10)), Residue::ZERO);
        for t in 1..11 {
            assert_eq!(
                poly.eval(c.residue(t)),
                c.pow(QuadForm::new(0, -1).at(c, t), 9)
            );
        }
    }

    #[test]
    fn from_coeffs_checks_length() {
        assert!(
            ReducedPoly::from_coeffs(ctx(7), QuadForm::new(1, 1), vec![Residue::ZERO; 5]).is_err()
        );
        assert!(
            ReducedPoly::from_coeffs(ctx(7), QuadForm::new(1, 1), vec![Residue::ZERO; 6]).is_ok()
        );
    }

    #[test]
    fn formula_examples() {
        let f21 = formula_coeffs(CoeffFormula::F21, ctx(7));
        assert_eq!(f21.len(), 6);
        assert_eq!(f21[1].value(), 0);
        assert_eq!(f21[0].value(), 4);

        // k = 0 at p = 11: w_12 = 0, w_10 = (-27)(-9) = 243, w_0 = 0, so
        // 3 b_0 = 3 * 243 and b_0 = 243 = 1 mod 11.
        let f26 = formula_coeffs(CoeffFormula::F26, ctx(11));
        assert_eq!(f26[0].value(), 1);
    }

    #[test]
    fn diagnostic_examples() {
        let c = ctx(7);
        let recs = coeff_diagnostics(c, QuadForm::new(3, 1), &[Claim::F213]).unwrap();
        let e = &recs[0].entries;
        assert_eq!(e.len(), 2);
        assert_eq!(
            e[0],
            DiagnosticEntry {
                index: 2,
                oracle: 1,
                claimed: 0,
                matches: false
            }
        );
        assert_eq!(
            e[1],
            DiagnosticEntry {
                index: 4,
                oracle: 0,
                claimed: 0,
                matches: true
            }
        );

        let recs = coeff_diagnostics(c, QuadForm::new(2, 2), &[Claim::F23, Claim::F21]).unwrap();
        let f23 = &recs[0];
        assert_eq!(
            f23.entries[0],
            DiagnosticEntry {
                index: 1,
                oracle: 5,
                claimed: 0,
                matches: false
            }
        );
        assert_eq!(f23.entries.len(), 2);
        assert_eq!(f23.entries[1].index, 5);
        // Formula F21 predicts a_1 = 0 where the oracle has 5.
        assert_eq!(
            recs[1].entries[1],
            DiagnosticEntry {
                index: 1,
                oracle: 5,
                claimed: 0,
                matches: false
            }
        );
        assert!(!recs[1].holds());
    }

    #[test]
    fn formulas_are_oracle_shifted_by_one() {
        for p in [5, 7, 11, 13, 17, 23, 47, 101] {
            let c = ctx(p);
            for variant in [CoeffFormula::F21, CoeffFormula::F26] {
                let oracle = reduce_power_form(c, variant.form());
                let shift = cyclic_index_shift(&formula_coeffs(variant, c), oracle.coeffs());
                assert_eq!(shift, Some(1), "{variant:?} p={p}");
            }
        }
        let c = ctx(7);
        let a = vec![c.residue(1), c.residue(2), c.residue(3)];
        assert_eq!(cyclic_index_shift(&a, &a), Some(0));
        assert_eq!(
            cyclic_index_shift(&[c.residue(2), c.residue(1), c.residue(3)], &a),
            None
        );
        assert_eq!(cyclic_index_shift(&a[..2], &a), None);
    }

    #[test]
    fn diagnostics_reject_bad_pairings() {
        let c = ctx(7);
        assert!(coeff_diagnostics(c, QuadForm::new(3, 3), &[Claim::F21]).is_err());
        assert!(coeff_diagnostics(c, QuadForm::new(2, 2), &[Claim::F213]).is_err());
        // (2.10) needs p = 2 mod 3, and 7 = 1 mod 3.
        assert!(coeff_diagnostics(c, QuadForm::new(3, 3), &[Claim::F210]).is_err());
        // Forms are compared mod p.
        assert!(coeff_diagnostics(c, QuadForm::new(9, -5), &[Claim::F21]).is_ok());
    }

    #[test]
    fn sym43_covers_every_inner_index() {
        let c = ctx(23);
        let recs = coeff_diagnostics(c, QuadForm::new(3, 1), &[Claim::Sym43]).unwrap();
        let idx: Vec<u64> = recs[0].entries.iter().map(|e| e.index).collect();
        assert_eq!(idx, (1..=21).collect::<Vec<_>>());
        assert_eq!(recs[0].matched() + recs[0].mismatched(), 21);
    }

    #[test]
    fn claim_names_round_trip() {
        for claim in Claim::ALL {
            assert_eq!(claim.as_str().parse::<Claim>().unwrap(), claim);
        }
        assert!("f99".parse::<Claim>().is_err());
    }
}
