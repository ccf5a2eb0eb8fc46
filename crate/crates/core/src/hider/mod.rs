//! Value-preserving expressions for integer constants.
//!
//! The opaque function is `F(a, b) = a mod b`. An integer `m >= 0` becomes
//! `floor(m/2) * F(a, b)` with `F(a, b) = 2`, plus `1` when `m` is odd. Each
//! further level of nesting replaces the literal first argument `c` of the
//! innermost `F` call with `(F(a', b') * p) % q`, where `F(a', b') = 2`, `q` is
//! odd and `p = c * (q + 1) / 2 mod q`, so that `2p mod q = c`. Negative
//! values are the negation of the hidden absolute value.

mod expr;
mod rng;

pub use expr::{mod_nonneg, EvalError, HiddenExpr};
pub use rng::{derive_site_rng, fnv1a64, mix64, SiteRng, Uniform};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest value every emitted sub-expression must fit in (Java `int`).
pub const INT_MAX: i64 = i32::MAX as i64;
pub const INT_MIN: i64 = i32::MIN as i64;

/// Upper limit on nesting depth; expression size grows linearly with it.
pub const MAX_DEPTH: u32 = 64;

/// Attempts made to draw an expression in which no literal equals the
/// hidden value itself.
const MAX_DRAWS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HideError {
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("{value} does not fit in a 32-bit signed integer")]
    Width { value: i64 },
    #[error("no F arguments evaluate to {target} within the configured bounds")]
    InfeasibleBounds { target: i64 },
    #[error("{c} cannot be hidden under modulus bound {q_max}")]
    ParamBounds { c: i64, q_max: i64 },
    #[error("invalid hiding parameters: {0}")]
    Params(String),
    #[error("could not hide {value} without repeating it as a literal")]
    Leak { value: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HideParams {
    /// Number of `F` calls in each emitted chain.
    pub depth: u32,
    pub seed: u64,
    /// Upper bound for second arguments of `F`.
    pub b_max: i64,
    /// Upper bound for literal first arguments of `F`.
    pub a_max: i64,
    /// Upper bound for moduli of the nesting identity.
    pub q_max: i64,
}

impl Default for HideParams {
    fn default() -> Self {
        HideParams {
            depth: 2,
            seed: 0,
            b_max: 1024,
            a_max: 1_000_000,
            q_max: (1 << 20) - 1,
        }
    }
}

impl HideParams {
    pub fn validate(&self) -> Result<(), HideError> {
        let fail = |msg: String| Err(HideError::Params(msg));
        if self.depth < 1 || self.depth > MAX_DEPTH {
            return fail(format!(
                "depth must be in 1..={MAX_DEPTH}, got {}",
                self.depth
            ));
        }
        // F(a, b) = 2 needs some b in 3..=b_max with b + 2 <= a_max.
        if self.b_max < 4 {
            return fail(format!("b_max must be at least 4, got {}", self.b_max));
        }
        if self.a_max < self.b_max + 2 {
            return fail(format!(
                "a_max must be at least b_max + 2 = {}, got {}",
                self.b_max + 2,
                self.a_max
            ));
        }
        if self.q_max < 3 || 2 * self.q_max > INT_MAX {
            return fail(format!(
                "q_max must be in 3..={}, got {}",
                INT_MAX / 2,
                self.q_max
            ));
        }
        // Nesting hides literals up to a_max under moduli above them.
        if self.a_max >= self.q_max {
            return fail(format!(
                "a_max ({}) must be below q_max ({})",
                self.a_max, self.q_max
            ));
        }
        Ok(())
    }
}

/// The opaque function: `a mod b`.
pub fn f_eval(a: i64, b: i64) -> Result<i64, EvalError> {
    if !(0..=INT_MAX).contains(&a) || !(2..=INT_MAX).contains(&b) {
        return Err(EvalError::FDomain { a, b });
    }
    Ok(a % b)
}

/// Draw `(a, b)` with `f_eval(a, b) == target`.
///
/// `b` is uniform in `max(2, target + 1)..=b_max`, then `a = b * k + target`
/// for `k` uniform among the values `>= 1` keeping `a <= a_max`.
pub fn gen_f_args(
    target: i64,
    rng: &mut impl Uniform,
    params: &HideParams,
) -> Result<(i64, i64), HideError> {
    if target < 0 || target + 1 >= params.b_max {
        return Err(HideError::InfeasibleBounds { target });
    }
    let b = rng.uniform((target + 1).max(2), params.b_max);
    let k_max = (params.a_max - target) / b;
    if k_max < 1 {
        return Err(HideError::InfeasibleBounds { target });
    }
    let k = rng.uniform(1, k_max);
    Ok((b * k + target, b))
}

/// `(F(a, b) * p) % q` evaluating to `c`, with `q` odd and uniform in
/// `(c, q_max]`.
pub fn hide_param(
    c: i64,
    rng: &mut impl Uniform,
    params: &HideParams,
) -> Result<HiddenExpr, HideError> {
    if c < 0 || c >= params.q_max {
        return Err(HideError::ParamBounds {
            c,
            q_max: params.q_max,
        });
    }
    let lo = (c + 1).max(3) | 1;
    if lo > params.q_max {
        return Err(HideError::ParamBounds {
            c,
            q_max: params.q_max,
        });
    }
    let slots = (params.q_max - lo) / 2;
    let q = lo + 2 * rng.uniform(0, slots);
    hide_param_with_modulus(c, q, rng, params)
}

/// [`hide_param`] with the modulus chosen by the caller.
pub fn hide_param_with_modulus(
    c: i64,
    q: i64,
    rng: &mut impl Uniform,
    params: &HideParams,
) -> Result<HiddenExpr, HideError> {
    if q % 2 == 0 || q <= c || q < 3 || c < 0 || 2 * q > INT_MAX {
        return Err(HideError::ParamBounds { c, q_max: q });
    }
    let p = half_multiplier(c, q);
    let (a, b) = gen_f_args(2, rng, params)?;
    Ok(HiddenExpr::modulo(
        HiddenExpr::mul(
            HiddenExpr::call_f(HiddenExpr::lit(a), HiddenExpr::lit(b)),
            HiddenExpr::lit(p),
        ),
        HiddenExpr::lit(q),
    ))
}

/// `c * (q + 1) / 2 mod q`: the `p` with `2p = c (mod q)` for odd `q`.
pub fn half_multiplier(c: i64, q: i64) -> i64 {
    (c % q) * ((q + 1) / 2) % q
}

/// Hide `m` behind a chain of `params.depth` nested `F` calls.
pub fn hide_int(
    m: i64,
    params: &HideParams,
    rng: &mut impl Uniform,
) -> Result<HiddenExpr, HideError> {
    if !(-INT_MAX..=INT_MAX).contains(&m) {
        return Err(HideError::Width { value: m });
    }
    if params.depth < 1 {
        return Err(HideError::Params("depth must be at least 1".into()));
    }
    let magnitude = m.abs();
    let mut attempt = 0;
    let hidden = loop {
        let candidate = hide_nonneg(magnitude, params, rng)?;
        attempt += 1;
        if magnitude < 2 || !candidate.literals().contains(&magnitude) {
            break candidate;
        }
        if attempt == MAX_DRAWS {
            return Err(HideError::Leak { value: m });
        }
    };
    Ok(if m < 0 {
        HiddenExpr::neg(hidden)
    } else {
        hidden
    })
}

fn hide_nonneg(
    m: i64,
    params: &HideParams,
    rng: &mut impl Uniform,
) -> Result<HiddenExpr, HideError> {
    let (a, b) = gen_f_args(2, rng, params)?;
    let mut call = HiddenExpr::call_f(HiddenExpr::lit(a), HiddenExpr::lit(b));
    {
        let mut slot = f_first_arg(&mut call);
        for _ in 1..params.depth {
            let c = slot.as_lit().expect("innermost F argument is a literal");
            *slot = hide_param(c, rng, params)?;
            slot = identity_first_arg(slot);
        }
    }
    let scaled = HiddenExpr::mul(HiddenExpr::lit(m / 2), call);
    Ok(if m % 2 == 1 {
        HiddenExpr::add(scaled, HiddenExpr::lit(1))
    } else {
        scaled
    })
}

fn f_first_arg(call: &mut HiddenExpr) -> &mut HiddenExpr {
    match call {
        HiddenExpr::CallF(a, _) => a,
        _ => unreachable!("not an F call"),
    }
}

/// The `a` in `(F(a, b) * p) % q`.
fn identity_first_arg(e: &mut HiddenExpr) -> &mut HiddenExpr {
    match e {
        HiddenExpr::Mod(l, _) => match &mut **l {
            HiddenExpr::Mul(l, _) => f_first_arg(l),
            _ => unreachable!("identity shape"),
        },
        _ => unreachable!("identity shape"),
    }
}
