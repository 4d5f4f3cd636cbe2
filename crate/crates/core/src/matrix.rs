//! Dense matrices over F_p, the builders for every determinant family, and
//! Gaussian elimination.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{PrimeCtx, Residue};
use crate::poly::{reduce_power_form, QuadForm, ReducedPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    /// (i^2 + cij + dj^2)^(p-2), 2 <= i, j <= p-2
    DMinus,
    /// (i^2 + cij + dj^2)^(p-2), 1 <= i, j <= p-1
    DFull,
    /// Legendre symbol of i^2 + cij + dj^2, 1 <= i, j <= p-1
    Leg,
    /// Legendre symbol of i^2 + cij + dj^2, 0 <= i, j <= p-1
    LegZ,
    /// 1 / (i^2 + j^2), 1 <= i, j <= (p-1)/2
    RecipSum,
    /// 1 / (i^2 - ij + j^2), 1 <= i, j <= p-1
    RecipMix,
    /// P(i / j) for the reduced polynomial P of the form, 2 <= i, j <= p-2
    KernelP,
    /// Supplied entry by entry.
    Explicit,
}

impl MatrixKind {
    pub const BUILDABLE: [MatrixKind; 7] = [
        MatrixKind::DMinus,
        MatrixKind::DFull,
        MatrixKind::Leg,
        MatrixKind::LegZ,
        MatrixKind::RecipSum,
        MatrixKind::RecipMix,
        MatrixKind::KernelP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::DMinus => "dminus",
            MatrixKind::DFull => "dfull",
            MatrixKind::Leg => "leg",
            MatrixKind::LegZ => "legz",
            MatrixKind::RecipSum => "recipsum",
            MatrixKind::RecipMix => "recipmix",
            MatrixKind::KernelP => "kernelP",
            MatrixKind::Explicit => "explicit",
        }
    }

    /// Index range `lo..=hi` for the matrix at p.
    fn index_range(self, p: u64) -> (u64, u64) {
        match self {
            MatrixKind::DMinus | MatrixKind::KernelP => (2, p - 2),
            MatrixKind::DFull | MatrixKind::Leg | MatrixKind::RecipMix => (1, p - 1),
            MatrixKind::LegZ => (0, p - 1),
            MatrixKind::RecipSum => (1, (p - 1) / 2),
            MatrixKind::Explicit => unreachable!("explicit matrices have no index range"),
        }
    }

    /// The recip families carry a fixed form.
    fn fixed_form(self) -> Option<QuadForm> {
        match self {
            MatrixKind::RecipSum => Some(QuadForm::new(0, 1)),
            MatrixKind::RecipMix => Some(QuadForm::new(-1, 1)),
            _ => None,
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MatrixKind::BUILDABLE
            .into_iter()
            .chain([MatrixKind::Explicit])
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::usage(format!("unknown matrix kind {s:?}")))
    }
}

/// Square matrix of canonical residues, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    ctx: PrimeCtx,
    n: usize,
    entries: Vec<Residue>,
    kind: MatrixKind,
    form: QuadForm,
}

impl FpMatrix {
    /// An explicit matrix; every row must have length `rows.len()`.
    pub fn from_rows(ctx: PrimeCtx, rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::usage("matrix dimension must be at least 1"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::usage("matrix rows must all have length n"));
        }
        let entries = rows.iter().flatten().map(|&v| ctx.residue(v)).collect();
        Ok(FpMatrix {
            ctx,
            n,
            entries,
            kind: MatrixKind::Explicit,
            form: QuadForm::new(0, 0),
        })
    }

    pub fn identity(ctx: PrimeCtx, n: usize) -> Result<Self> {
        let rows: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
            .collect();
        Self::from_rows(ctx, &rows)
    }

    pub fn ctx(&self) -> PrimeCtx {
        self.ctx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// The form the builder used (fixed for the recip families).
    pub fn form(&self) -> QuadForm {
        self.form
    }

    pub fn get(&self, row: usize, col: usize) -> Residue {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[Residue] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Residue]> {
        self.entries.chunks(self.n)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for col in 0..self.n {
            self.entries.swap(a * self.n + col, b * self.n + col);
        }
    }

    /// Writes `p n kind c d` followed by n rows of space-separated residues.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{} {} {} {} {}",
            self.ctx, self.n, self.kind, self.form.c, self.form.d
        )?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(Residue::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Self> {
        let bad = |msg: &str| Error::usage(format!("malformed matrix dump: {msg}"));
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [p, n, kind, c, d] = fields[..] else {
            return Err(bad("header must be \"p n kind c d\""));
        };
        let num = |s: &str| {
            s.parse::<i64>()
                .map_err(|_| bad("non-numeric header field"))
        };
        let ctx = PrimeCtx::new(num(p)? as u64)?;
        let n = num(n)? as usize;
        let kind: MatrixKind = kind.parse()?;
        let form = QuadForm::new(num(c)?, num(d)?);

        let mut rows = Vec::with_capacity(n);
        for line in lines.take(n) {
            let row = line?
                .split_whitespace()
                .map(|v| v.parse::<u64>().map_err(|_| bad("non-numeric entry")))
                .collect::<Result<Vec<_>>>()?;
            if row.iter().any(|&v| v >= ctx.p()) {
                return Err(bad("entry not reduced mod p"));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(bad("too few rows"));
        }
        let mut m = FpMatrix::from_rows(ctx, &rows)?;
        m.kind = kind;
        m.form = form;
        Ok(m)
    }

    fn from_fn(
        ctx: PrimeCtx,
        kind: MatrixKind,
        form: QuadForm,
        mut entry: impl FnMut(u64, u64) -> Result<Residue>,
    ) -> Result<Self> {
        let (lo, hi) = kind.index_range(ctx.p());
        if hi < lo {
            return Err(Error::usage(format!("{kind} is empty at p = {ctx}")));
        }
        let n = (hi - lo + 1) as usize;
        let mut entries = Vec::with_capacity(n * n);
        for i in lo..=hi {
            for j in lo..=hi {
                entries.push(entry(i, j)?);
            }
        }
        Ok(FpMatrix {
            ctx,
            n,
            entries,
            kind,
            form,
        })
    }
}

/// Caches f(x) for x in F_p, since most builders only see p distinct bases.
struct Memo<F> {
    table: Vec<Option<Residue>>,
    f: F,
}

impl<F: Fn(Residue) -> Residue> Memo<F> {
    fn new(ctx: PrimeCtx, f: F) -> Self {
        Memo {
            table: vec![None; ctx.p() as usize],
            f,
        }
    }

    fn get(&mut self, x: Residue) -> Residue {
        let slot = &mut self.table[x.value() as usize];
        *slot.get_or_insert_with(|| (self.f)(x))
    }
}

fn require_p7(kind: MatrixKind, ctx: PrimeCtx) -> Result<()> {
    if ctx.p() < 7 {
        return Err(Error::usage(format!("{kind} requires p >= 7, got {ctx}")));
    }
    Ok(())
}

/// Builds one of the matrix families at p. `form` is ignored by the recip
/// families, which have fixed denominators.
pub fn build_matrix(kind: MatrixKind, ctx: PrimeCtx, form: QuadForm) -> Result<FpMatrix> {
    let p = ctx.p();
    match kind {
        MatrixKind::DMinus | MatrixKind::DFull => {
            if kind == MatrixKind::DMinus {
                require_p7(kind, ctx)?;
            }
            let mut pow = Memo::new(ctx, |x| ctx.pow(x, p - 2));
            FpMatrix::from_fn(ctx, kind, form, |i, j| Ok(pow.get(form.eval(ctx, i, j))))
        }
        MatrixKind::Leg | MatrixKind::LegZ => {
            let mut leg = Memo::new(ctx, |x| ctx.from_sign(ctx.legendre(x.value() as i64)));
            FpMatrix::from_fn(ctx, kind, form, |i, j| Ok(leg.get(form.eval(ctx, i, j))))
        }
        MatrixKind::RecipSum | MatrixKind::RecipMix => {
            let form = kind.fixed_form().expect("recip kinds carry a form");
            FpMatrix::from_fn(ctx, kind, form, |i, j| {
                ctx.inv(form.eval(ctx, i, j))
                    .map_err(|_| Error::ZeroDenominator { i, j, p })
            })
        }
        MatrixKind::KernelP => {
            require_p7(kind, ctx)?;
            build_kernel_matrix(&reduce_power_form(ctx, form))
        }
        MatrixKind::Explicit => Err(Error::usage("explicit matrices are built with from_rows")),
    }
}

/// [P(i j^-1)] over 2 <= i, j <= p-2 for a supplied reduced polynomial.
pub fn build_kernel_matrix(poly: &ReducedPoly) -> Result<FpMatrix> {
    let ctx = poly.ctx();
    require_p7(MatrixKind::KernelP, ctx)?;
    let mut eval = Memo::new(ctx, |t| poly.eval(t));
    let inverses: Vec<Residue> = (0..ctx.p())
        .map(|j| ctx.inv(ctx.residue(j)).unwrap_or(Residue::ZERO))
        .collect();
    FpMatrix::from_fn(ctx, MatrixKind::KernelP, poly.form(), |i, j| {
        Ok(eval.get(ctx.mul(ctx.residue(i), inverses[j as usize])))
    })
}

/// Determinant mod p by Gaussian elimination, pivoting on the first nonzero
/// entry of each column. Singular matrices give 0.
pub fn det_mod(m: &FpMatrix) -> Residue {
    let ctx = m.ctx();
    let p = ctx.p();
    let n = m.n();
    let mut a: Vec<u64> = m.entries.iter().map(|r| r.value()).collect();
    let mut det = Residue::ONE;

    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| a[r * n + col] != 0) else {
            return Residue::ZERO;
        };
        if pivot != col {
            for c in col..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = ctx.neg(det);
        }
        let pv = ctx.residue(a[col * n + col]);
        det = ctx.mul(det, pv);
        let pv_inv = ctx.inv(pv).expect("pivot is nonzero").value();

        let (upper, lower) = a.split_at_mut((col + 1) * n);
        let pivot_row = &upper[col * n..];
        for row in lower.chunks_exact_mut(n) {
            let lead = row[col];
            if lead == 0 {
                continue;
            }
            let f = p - lead * pv_inv % p;
            for c in col + 1..n {
                row[c] = (row[c] + f * pivot_row[c]) % p;
            }
            row[col] = 0;
        }
    }
    det
}
