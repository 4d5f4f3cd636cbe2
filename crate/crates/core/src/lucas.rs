//! Lucas sequences u_n(A, B), v_n(A, B) reduced mod p, and the periodic
//! closed forms of u_k(-2, 2) and u_k(-3, 3).

use crate::field::{PrimeCtx, Residue};

/// Recurrence parameters: x_{n+1} = A x_n - B x_{n-1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LucasParams {
    pub a: i64,
    pub b: i64,
}

impl LucasParams {
    pub const fn new(a: i64, b: i64) -> Self {
        LucasParams { a, b }
    }
}

/// (u_n, v_n) mod p by the defining recurrence.
pub fn lucas_uv_mod(params: LucasParams, n: u64, ctx: PrimeCtx) -> (Residue, Residue) {
    let a = ctx.reduce(params.a);
    let b = ctx.reduce(params.b);
    let step = |prev: Residue, cur: Residue| ctx.sub(ctx.mul(a, cur), ctx.mul(b, prev));

    let (mut u_prev, mut u) = (Residue::ZERO, Residue::ONE);
    let (mut v_prev, mut v) = (ctx.residue(2), a);
    if n == 0 {
        return (u_prev, v_prev);
    }
    for _ in 1..n {
        let u_next = step(u_prev, u);
        let v_next = step(v_prev, v);
        (u_prev, u) = (u, u_next);
        (v_prev, v) = (v, v_next);
    }
    (u, v)
}

/// (u_n, v_n) mod p by index doubling, O(log n).
///
/// Uses u_{2n} = u_n v_n, v_{2n} = v_n^2 - 2B^n, and
/// 2u_{n+1} = A u_n + v_n, 2v_{n+1} = D u_n + A v_n with D = A^2 - 4B.
pub fn lucas_uv_mod_fast(params: LucasParams, n: u64, ctx: PrimeCtx) -> (Residue, Residue) {
    let a = ctx.reduce(params.a);
    let b = ctx.reduce(params.b);
    let disc = ctx.sub(ctx.mul(a, a), ctx.mul(ctx.residue(4), b));
    // p is odd, so 2 is invertible.
    let half = ctx.residue(ctx.half() + 1);
    let (mut u, mut v, mut bk) = (Residue::ZERO, ctx.residue(2), Residue::ONE);
    for bit in (0..u64::BITS - n.leading_zeros()).rev() {
        u = ctx.mul(u, v);
        v = ctx.sub(ctx.mul(v, v), ctx.mul(ctx.residue(2), bk));
        bk = ctx.mul(bk, bk);
        if (n >> bit) & 1 == 1 {
            let u1 = ctx.mul(half, ctx.add(ctx.mul(a, u), v));
            let v1 = ctx.mul(half, ctx.add(ctx.mul(disc, u), ctx.mul(a, v)));
            (u, v) = (u1, v1);
            bk = ctx.mul(bk, b);
        }
    }
    (u, v)
}

/// Which tabulated sequence to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    /// u_k(-2, 2) = (-4)^floor(k/4) * (0, 1, -2, 2)[k mod 4]
    U22,
    /// u_k(-3, 3) = (-27)^floor(k/6) * (0, 1, -3, 6, -9, 9)[k mod 6]
    U33,
}

impl ClosedForm {
    pub fn params(self) -> LucasParams {
        match self {
            ClosedForm::U22 => LucasParams::new(-2, 2),
            ClosedForm::U33 => LucasParams::new(-3, 3),
        }
    }

    fn table(self) -> (i64, &'static [i64]) {
        match self {
            ClosedForm::U22 => (-4, &[0, 1, -2, 2]),
            ClosedForm::U33 => (-27, &[0, 1, -3, 6, -9, 9]),
        }
    }
}

pub fn closed_form_u(variant: ClosedForm, k: u64, ctx: PrimeCtx) -> Residue {
    let (base, period) = variant.table();
    let len = period.len() as u64;
    let scale = ctx.pow(ctx.reduce(base), k / len);
    ctx.mul(scale, ctx.reduce(period[(k % len) as usize]))
}

/// (u_{(p+1)/2}(-3, 1), v_{(p+1)/2}(-3, 1)) mod p.
pub fn half_index_probe(ctx: PrimeCtx) -> (Residue, Residue) {
    lucas_uv_mod(LucasParams::new(-3, 1), ctx.p().div_ceil(2), ctx)
}
