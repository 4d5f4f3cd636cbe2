//! Verifiers that turn determinant and coefficient computations into
//! [`CheckRecord`]s.
//!
//! Checks fall in two groups. Asserting checks (the three theorem instances
//! and the four introductory identities) pass or fail. Diagnostic checks
//! (the hat-product cross-check, the half-index probe and the coefficient
//! claims) pass when the claim holds at p and otherwise report `diagnostic`;
//! they never fail.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeCtx, Residue};
use crate::lucas::half_index_probe;
use crate::matrix::{build_matrix, det_mod, MatrixKind};
use crate::poly::{
    coeff_diagnostics, cyclic_index_shift, reduce_power_form, Claim, DiagnosticEntry, QuadForm,
    ReducedPoly,
};

/// Registered check identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CheckId {
    Theorem(Theorem),
    Intro(IntroIdentity),
    Reduction,
    HalfIndex,
    Diag(Claim),
}

impl CheckId {
    pub fn all() -> Vec<CheckId> {
        let mut ids: Vec<CheckId> = Theorem::ALL.into_iter().map(CheckId::Theorem).collect();
        ids.extend(IntroIdentity::ALL.into_iter().map(CheckId::Intro));
        ids.extend([CheckId::Reduction, CheckId::HalfIndex]);
        ids.extend(Claim::ALL.into_iter().map(CheckId::Diag));
        ids
    }

    pub fn name(self) -> String {
        match self {
            CheckId::Theorem(t) => t.as_str().to_owned(),
            CheckId::Intro(i) => i.as_str().to_owned(),
            CheckId::Reduction => "reduction".to_owned(),
            CheckId::HalfIndex => "halfindex".to_owned(),
            CheckId::Diag(c) => format!("diag_{}", c.as_str()),
        }
    }

    /// Whether a failure of this check is a failure of the run.
    pub fn is_asserting(self) -> bool {
        matches!(self, CheckId::Theorem(_) | CheckId::Intro(_))
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::all()
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown check {s:?}")))
    }
}

impl TryFrom<String> for CheckId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CheckId> for String {
    fn from(id: CheckId) -> String {
        id.name()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Diagnostic,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Diagnostic => "diagnostic",
        })
    }
}

/// One verification outcome. Field order is the serialized column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: CheckId,
    pub p: u64,
    pub c: i64,
    pub d: i64,
    pub lhs: i64,
    pub rhs: i64,
    pub status: Status,
    pub notes: String,
    /// Wall time in milliseconds; filled in by the sweep runner.
    pub ms: f64,
}

impl CheckRecord {
    fn new(
        check: CheckId,
        ctx: PrimeCtx,
        form: QuadForm,
        lhs: i64,
        rhs: i64,
        status: Status,
    ) -> Self {
        CheckRecord {
            check,
            p: ctx.p(),
            c: form.c,
            d: form.d,
            lhs,
            rhs,
            status,
            notes: String::new(),
            ms: 0.0,
        }
    }

    fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }
}

fn residue_i64(r: Residue) -> i64 {
    r.value() as i64
}

/// The hat-product reduction of a coefficient vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HatReduction {
    pub even_sum: Residue,
    pub odd_sum: Residue,
    /// 4 * even_sum * odd_sum
    pub value: Residue,
}

/// â_k: the product of every a_j with j = k mod 2 and j != k.
pub fn hat_products(ctx: PrimeCtx, coeffs: &[Residue]) -> Vec<Residue> {
    let mut hats = vec![Residue::ZERO; coeffs.len()];
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..coeffs.len()).step_by(2).collect();
        // prefix[i] = product of the first i entries of this class.
        let mut prefix = Vec::with_capacity(idx.len() + 1);
        prefix.push(Residue::ONE);
        for &j in &idx {
            prefix.push(ctx.mul(*prefix.last().unwrap(), coeffs[j]));
        }
        let mut suffix = Residue::ONE;
        for (pos, &k) in idx.iter().enumerate().rev() {
            hats[k] = ctx.mul(prefix[pos], suffix);
            suffix = ctx.mul(suffix, coeffs[k]);
        }
    }
    hats
}

pub fn hat_reduction(ctx: PrimeCtx, coeffs: &[Residue]) -> HatReduction {
    let hats = hat_products(ctx, coeffs);
    let sum = |parity: usize| {
        hats.iter()
            .skip(parity)
            .step_by(2)
            .fold(Residue::ZERO, |acc, &h| ctx.add(acc, h))
    };
    let (even_sum, odd_sum) = (sum(0), sum(1));
    let value = ctx.mul(ctx.residue(4), ctx.mul(even_sum, odd_sum));
    HatReduction {
        even_sum,
        odd_sum,
        value,
    }
}

pub fn reduced_det_from_coeffs(poly: &ReducedPoly) -> HatReduction {
    hat_reduction(poly.ctx(), poly.coeffs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theorem {
    /// p | D_p^-(2, 2) for p = 7 mod 8
    I,
    /// p | D_p^-(3, 3) for p > 5, p = 2 mod 3
    II,
    /// p | D_p^-(3, 1) for p = 3, 7 mod 20
    III,
}

impl Theorem {
    pub const ALL: [Theorem; 3] = [Theorem::I, Theorem::II, Theorem::III];

    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::I => "thm_i",
            Theorem::II => "thm_ii",
            Theorem::III => "thm_iii",
        }
    }

    pub fn form(self) -> QuadForm {
        match self {
            Theorem::I => QuadForm::new(2, 2),
            Theorem::II => QuadForm::new(3, 3),
            Theorem::III => QuadForm::new(3, 1),
        }
    }

    pub fn applies(self, p: u64) -> bool {
        match self {
            Theorem::I => p % 8 == 7,
            Theorem::II => p > 5 && p % 3 == 2,
            Theorem::III => p > 3 && matches!(p % 20, 3 | 7),
        }
    }
}

pub fn verify_theorem(which: Theorem, ctx: PrimeCtx) -> Result<CheckRecord> {
    if !which.applies(ctx.p()) {
        return Err(Error::usage(format!(
            "{} does not cover p = {}",
            which.as_str(),
            ctx
        )));
    }
    let form = which.form();
    let det = det_mod(&build_matrix(MatrixKind::DMinus, ctx, form)?);
    let status = if det.is_zero() {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(CheckRecord::new(
        CheckId::Theorem(which),
        ctx,
        form,
        residue_i64(det),
        0,
        status,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntroIdentity {
    /// (D_p(1, 1) / p) = (-2 / p) for p = 2 mod 3
    D11,
    /// [c, d]_p against (c, d)_p when (d / p) = 1
    Bracket,
    /// |1 / (i^2 + j^2)| over 1..(p-1)/2 is (2 / p) mod p, p = 3 mod 4
    Recip,
    /// 2 |1 / (i^2 - ij + j^2)| over 1..p-1 is a square mod p, p = 5 mod 6
    Wsn,
}

impl IntroIdentity {
    pub const ALL: [IntroIdentity; 4] = [
        IntroIdentity::D11,
        IntroIdentity::Bracket,
        IntroIdentity::Recip,
        IntroIdentity::Wsn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntroIdentity::D11 => "d11",
            IntroIdentity::Bracket => "bracket",
            IntroIdentity::Recip => "recip",
            IntroIdentity::Wsn => "wsn",
        }
    }

    /// Residue-class condition on p alone.
    pub fn applies(self, p: u64) -> bool {
        match self {
            IntroIdentity::D11 => p % 3 == 2,
            IntroIdentity::Bracket => true,
            IntroIdentity::Recip => p % 4 == 3,
            IntroIdentity::Wsn => p % 6 == 5,
        }
    }

    /// Whether the identity's preconditions hold at p for `form`.
    pub fn admits(self, ctx: PrimeCtx, form: Option<QuadForm>) -> bool {
        self.applies(ctx.p())
            && match self {
                IntroIdentity::Bracket => form.is_some_and(|f| ctx.legendre(f.d) == 1),
                _ => true,
            }
    }
}

pub fn verify_intro_identity(
    which: IntroIdentity,
    ctx: PrimeCtx,
    form: Option<QuadForm>,
) -> Result<CheckRecord> {
    if !which.applies(ctx.p()) {
        return Err(Error::usage(format!(
            "{} does not cover p = {}",
            which.as_str(),
            ctx
        )));
    }
    let id = CheckId::Intro(which);
    let status_of = |ok: bool| if ok { Status::Pass } else { Status::Fail };

    match which {
        IntroIdentity::D11 => {
            let form = QuadForm::new(1, 1);
            let det = det_mod(&build_matrix(MatrixKind::DFull, ctx, form)?);
            let lhs = ctx.legendre(residue_i64(det)) as i64;
            let rhs = ctx.legendre(-2) as i64;
            Ok(
                CheckRecord::new(id, ctx, form, lhs, rhs, status_of(lhs == rhs))
                    .with_notes(format!("Legendre symbols; D_p(1,1) = {det} mod p")),
            )
        }
        IntroIdentity::Bracket => {
            let form = form.ok_or_else(|| Error::usage("bracket needs an explicit (c, d)"))?;
            if ctx.legendre(form.d) != 1 {
                return Err(Error::usage(format!(
                    "bracket needs (d/p) = 1; d = {} at p = {}",
                    form.d, ctx
                )));
            }
            let inner = det_mod(&build_matrix(MatrixKind::Leg, ctx, form)?);
            let outer = det_mod(&build_matrix(MatrixKind::LegZ, ctx, form)?);
            let p = ctx.p() as i64;
            let (factor, branch) = if form.discriminant(ctx).is_zero() {
                // (1 - p) / (p - 2)
                let den = ctx.inv(ctx.reduce(p - 2))?;
                (
                    ctx.mul(ctx.reduce(1 - p), den),
                    "p | c^2-4d, factor (1-p)/(p-2)",
                )
            } else {
                (ctx.reduce((p - 1) / 2), "p !| c^2-4d, factor (p-1)/2")
            };
            let rhs = ctx.mul(factor, inner);
            Ok(CheckRecord::new(
                id,
                ctx,
                form,
                residue_i64(outer),
                residue_i64(rhs),
                status_of(outer == rhs),
            )
            .with_notes(format!(
                "{branch}; (c,d)_p = {inner} mod p; checked mod p only"
            )))
        }
        IntroIdentity::Recip => {
            let m = build_matrix(MatrixKind::RecipSum, ctx, QuadForm::new(0, 1))?;
            let det = det_mod(&m);
            let rhs = ctx.from_sign(ctx.legendre(2));
            Ok(CheckRecord::new(
                id,
                ctx,
                m.form(),
                residue_i64(det),
                residue_i64(rhs),
                status_of(det == rhs),
            ))
        }
        IntroIdentity::Wsn => {
            let m = build_matrix(MatrixKind::RecipMix, ctx, QuadForm::new(-1, 1))?;
            let det = det_mod(&m);
            let symbol = ctx.legendre(2 * residue_i64(det)) as i64;
            Ok(
                CheckRecord::new(id, ctx, m.form(), symbol, 1, status_of(symbol == 1))
                    .with_notes(format!("det = {det} mod p")),
            )
        }
    }
}

/// Compares det D_p^-(c, d) with the hat-product reduction of the oracle
/// coefficients of (c, d).
pub fn reduction_crosscheck(ctx: PrimeCtx, form: QuadForm) -> Result<CheckRecord> {
    let det = det_mod(&build_matrix(MatrixKind::DMinus, ctx, form)?);
    let hat = reduced_det_from_coeffs(&reduce_power_form(ctx, form));
    let status = if det == hat.value {
        Status::Pass
    } else {
        Status::Diagnostic
    };
    Ok(CheckRecord::new(
        CheckId::Reduction,
        ctx,
        form,
        residue_i64(det),
        residue_i64(hat.value),
        status,
    )
    .with_notes(format!(
        "even_sum = {}, odd_sum = {}",
        hat.even_sum, hat.odd_sum
    )))
}

/// Records which of u_{(p+1)/2}(-3, 1), v_{(p+1)/2}(-3, 1) vanishes mod p.
/// Passes when v vanishes, which is the cited reading.
pub fn half_index_check(ctx: PrimeCtx) -> CheckRecord {
    let (u, v) = half_index_probe(ctx);
    let vanishing = match (u.is_zero(), v.is_zero()) {
        (true, true) => "both",
        (true, false) => "u",
        (false, true) => "v",
        (false, false) => "neither",
    };
    let status = if v.is_zero() {
        Status::Pass
    } else {
        Status::Diagnostic
    };
    CheckRecord::new(
        CheckId::HalfIndex,
        ctx,
        QuadForm::new(-3, 1),
        residue_i64(u),
        residue_i64(v),
        status,
    )
    .with_notes(format!("vanishing: {vanishing}"))
}

/// Mismatched indices listed in notes before truncation.
const NOTE_INDEX_LIMIT: usize = 16;

/// Summarizes one coefficient claim at p: lhs = matching indices, rhs = indices examined.
pub fn diagnostic_check(ctx: PrimeCtx, claim: Claim) -> Result<CheckRecord> {
    let form = claim.form();
    let rec = coeff_diagnostics(ctx, form, &[claim])?.remove(0);
    let status = if rec.holds() {
        Status::Pass
    } else {
        Status::Diagnostic
    };
    let bad: Vec<String> = rec
        .entries
        .iter()
        .filter(|e| !e.matches)
        .map(|e| e.index.to_string())
        .collect();
    let mut notes = if bad.is_empty() {
        String::new()
    } else if bad.len() > NOTE_INDEX_LIMIT {
        format!(
            "mismatch at k = {}, ... ({} total)",
            bad[..NOTE_INDEX_LIMIT].join(" "),
            bad.len()
        )
    } else {
        format!("mismatch at k = {}", bad.join(" "))
    };
    if matches!(claim, Claim::F21 | Claim::F26) && !bad.is_empty() {
        let column = |f: fn(&DiagnosticEntry) -> u64| -> Vec<Residue> {
            rec.entries.iter().map(|e| ctx.residue(f(e))).collect()
        };
        let shift = cyclic_index_shift(&column(|e| e.claimed), &column(|e| e.oracle));
        match shift {
            Some(s) => notes.push_str(&format!("; formula equals oracle shifted by {s}")),
            None => notes.push_str("; no cyclic shift of the oracle matches"),
        }
    }
    Ok(CheckRecord::new(
        CheckId::Diag(claim),
        ctx,
        form,
        rec.matched() as i64,
        rec.entries.len() as i64,
        status,
    )
    .with_notes(notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrimeCtx {
        PrimeCtx::new(p).unwrap()
    }

    fn residues(c: PrimeCtx, v: &[u64]) -> Vec<Residue> {
        v.iter().map(|&x| c.residue(x)).collect()
    }

    #[test]
    fn hat_examples() {
        let c = ctx(7);
        let a = residues(c, &[0, 5, 2, 6, 0, 4]);
        let hats: Vec<u64> = hat_products(c, &a).iter().map(|h| h.value()).collect();
        assert_eq!(hats, vec![0, 3, 0, 6, 0, 2]);
        let r = hat_reduction(c, &a);
        assert_eq!(
            (r.even_sum.value(), r.odd_sum.value(), r.value.value()),
            (0, 4, 0)
        );
    }

    #[test]
    fn hat_products_match_naive() {
        let c = ctx(13);
        let a = residues(c, &[3, 0, 7, 1, 12, 5, 9, 2, 4, 11, 6, 8]);
        let hats = hat_products(c, &a);
        for k in 0..a.len() {
            let naive = (0..a.len())
                .filter(|&j| j % 2 == k % 2 && j != k)
                .fold(Residue::ONE, |acc, j| c.mul(acc, a[j]));
            assert_eq!(hats[k], naive, "k = {k}");
        }
    }

    #[test]
    fn theorem_examples() {
        for (t, p) in [(Theorem::I, 7), (Theorem::III, 7), (Theorem::II, 11)] {
            let r = verify_theorem(t, ctx(p)).unwrap();
            assert_eq!(
                (r.lhs, r.rhs, r.status),
                (0, 0, Status::Pass),
                "{t:?} p={p}"
            );
        }
        assert!(verify_theorem(Theorem::II, ctx(5)).is_err());
        assert!(verify_theorem(Theorem::I, ctx(11)).is_err());
    }

    #[test]
    fn intro_examples() {
        let r = verify_intro_identity(IntroIdentity::D11, ctx(5), None).unwrap();
        assert_eq!((r.lhs, r.rhs, r.status), (-1, -1, Status::Pass));
        assert!(r.notes.contains("= 3 mod p"));

        let r = verify_intro_identity(IntroIdentity::Recip, ctx(7), None).unwrap();
        assert_eq!((r.lhs, r.rhs, r.status), (1, 1, Status::Pass));

        let r = verify_intro_identity(IntroIdentity::Bracket, ctx(5), Some(QuadForm::new(0, 1)))
            .unwrap();
        assert_eq!(r.status, Status::Pass);

        let r = verify_intro_identity(IntroIdentity::Wsn, ctx(5), None).unwrap();
        assert_eq!((r.lhs, r.rhs, r.status), (1, 1, Status::Pass));
    }

    #[test]
    fn intro_preconditions() {
        assert!(verify_intro_identity(IntroIdentity::D11, ctx(7), None).is_err());
        assert!(verify_intro_identity(IntroIdentity::Recip, ctx(13), None).is_err());
        assert!(verify_intro_identity(IntroIdentity::Wsn, ctx(7), None).is_err());
        assert!(verify_intro_identity(IntroIdentity::Bracket, ctx(7), None).is_err());
        // 3 is a nonresidue mod 7.
        assert!(
            verify_intro_identity(IntroIdentity::Bracket, ctx(7), Some(QuadForm::new(1, 3)))
                .is_err()
        );
        assert!(!IntroIdentity::Bracket.admits(ctx(7), Some(QuadForm::new(1, 3))));
        assert!(IntroIdentity::Bracket.admits(ctx(7), Some(QuadForm::new(1, 2))));
    }

    #[test]
    fn bracket_degenerate_branch() {
        // c^2 - 4d = 25 - 12 = 13: both branches at p = 13.
        let r = verify_intro_identity(IntroIdentity::Bracket, ctx(13), Some(QuadForm::new(-5, 3)))
            .unwrap();
        assert!(r.notes.starts_with("p | c^2-4d"));
        assert_eq!(r.status, Status::Pass);
        assert_eq!((r.lhs, r.rhs), (12, 12));
    }

    #[test]
    fn reduction_examples() {
        for (p, f) in [(7, (2, 2)), (7, (3, 1)), (11, (3, 3))] {
            let r = reduction_crosscheck(ctx(p), QuadForm::new(f.0, f.1)).unwrap();
            assert_eq!((r.lhs, r.rhs, r.status), (0, 0, Status::Pass));
        }
    }

    #[test]
    fn half_index_records_u_vanishing_at_7() {
        let r = half_index_check(ctx(7));
        assert_eq!((r.lhs, r.rhs), (0, 5));
        assert_eq!(r.status, Status::Diagnostic);
        assert_eq!(r.notes, "vanishing: u");
    }

    #[test]
    fn diagnostic_summary() {
        let r = diagnostic_check(ctx(7), Claim::F213).unwrap();
        assert_eq!((r.lhs, r.rhs, r.status), (1, 2, Status::Diagnostic));
        assert_eq!(r.notes, "mismatch at k = 2");
        assert_eq!((r.c, r.d), (3, 1));

        let r = diagnostic_check(ctx(7), Claim::F21).unwrap();
        assert_eq!((r.lhs, r.rhs, r.status), (0, 6, Status::Diagnostic));
        assert!(
            r.notes.ends_with("; formula equals oracle shifted by 1"),
            "{}",
            r.notes
        );
    }

    #[test]
    fn check_ids_round_trip() {
        let all = CheckId::all();
        assert_eq!(all.len(), 15);
        for id in all {
            assert_eq!(id.name().parse::<CheckId>().unwrap(), id);
        }
        assert!("thm_iv".parse::<CheckId>().is_err());
        assert!(CheckId::Theorem(Theorem::I).is_asserting());
        assert!(!CheckId::Diag(Claim::F21).is_asserting());
    }
}
