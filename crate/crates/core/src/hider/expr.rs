use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("arithmetic overflow")]
    Overflow,
    #[error("F({a}, {b}) is outside the domain a >= 0, b >= 2")]
    FDomain { a: i64, b: i64 },
    #[error("{left} % {right} is outside the domain left >= 0, right >= 1")]
    ModDomain { left: i64, right: i64 },
}

/// Expression tree that replaces a literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HiddenExpr {
    Lit(i64),
    Neg(Box<HiddenExpr>),
    Add(Box<HiddenExpr>, Box<HiddenExpr>),
    Mul(Box<HiddenExpr>, Box<HiddenExpr>),
    Mod(Box<HiddenExpr>, Box<HiddenExpr>),
    CallF(Box<HiddenExpr>, Box<HiddenExpr>),
}

use HiddenExpr::*;

#[allow(clippy::should_implement_trait)]
impl HiddenExpr {
    pub fn lit(v: i64) -> Self {
        Lit(v)
    }

    pub fn neg(e: HiddenExpr) -> Self {
        Neg(Box::new(e))
    }

    pub fn add(l: HiddenExpr, r: HiddenExpr) -> Self {
        Add(Box::new(l), Box::new(r))
    }

    pub fn mul(l: HiddenExpr, r: HiddenExpr) -> Self {
        Mul(Box::new(l), Box::new(r))
    }

    pub fn modulo(l: HiddenExpr, r: HiddenExpr) -> Self {
        Mod(Box::new(l), Box::new(r))
    }

    pub fn call_f(a: HiddenExpr, b: HiddenExpr) -> Self {
        CallF(Box::new(a), Box::new(b))
    }

    pub fn as_lit(&self) -> Option<i64> {
        match self {
            Lit(v) => Some(*v),
            _ => None,
        }
    }

    fn children(&self) -> impl Iterator<Item = &HiddenExpr> {
        let (l, r): (Option<&HiddenExpr>, Option<&HiddenExpr>) = match self {
            Lit(_) => (None, None),
            Neg(x) => (Some(x), None),
            Add(l, r) | Mul(l, r) | Mod(l, r) | CallF(l, r) => (Some(l), Some(r)),
        };
        l.into_iter().chain(r)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().map(HiddenExpr::node_count).sum::<usize>()
    }

    pub fn call_count(&self) -> usize {
        let own = usize::from(matches!(self, CallF(..)));
        own + self.children().map(HiddenExpr::call_count).sum::<usize>()
    }

    /// Nodes that cost an operation at run time: everything except literals.
    pub fn op_count(&self) -> usize {
        let own = usize::from(!matches!(self, Lit(_)));
        own + self.children().map(HiddenExpr::op_count).sum::<usize>()
    }

    /// Longest root-to-leaf path, counted in nodes.
    pub fn height(&self) -> usize {
        1 + self.children().map(HiddenExpr::height).max().unwrap_or(0)
    }

    pub fn literals(&self) -> Vec<i64> {
        let mut out = Vec::new();
        self.collect_literals(&mut out);
        out
    }

    fn collect_literals(&self, out: &mut Vec<i64>) {
        if let Lit(v) = self {
            out.push(*v);
        }
        for c in self.children() {
            c.collect_literals(out);
        }
    }

    pub fn eval(&self) -> Result<i64, EvalError> {
        self.eval_observed(&mut |_| {})
    }

    /// Evaluate, reporting the value of every node to `observe` (post-order).
    pub fn eval_observed(&self, observe: &mut impl FnMut(i64)) -> Result<i64, EvalError> {
        let v = match self {
            Lit(v) => *v,
            Neg(x) => x
                .eval_observed(observe)?
                .checked_neg()
                .ok_or(EvalError::Overflow)?,
            Add(l, r) => {
                let (l, r) = (l.eval_observed(observe)?, r.eval_observed(observe)?);
                l.checked_add(r).ok_or(EvalError::Overflow)?
            }
            Mul(l, r) => {
                let (l, r) = (l.eval_observed(observe)?, r.eval_observed(observe)?);
                l.checked_mul(r).ok_or(EvalError::Overflow)?
            }
            Mod(l, r) => {
                let (l, r) = (l.eval_observed(observe)?, r.eval_observed(observe)?);
                mod_nonneg(l, r)?
            }
            CallF(a, b) => {
                let (a, b) = (a.eval_observed(observe)?, b.eval_observed(observe)?);
                super::f_eval(a, b)?
            }
        };
        observe(v);
        Ok(v)
    }
}

/// Remainder restricted to nonnegative operands, where Java's `%` and the
/// mathematical remainder agree.
pub fn mod_nonneg(left: i64, right: i64) -> Result<i64, EvalError> {
    if left < 0 || right < 1 {
        return Err(EvalError::ModDomain { left, right });
    }
    Ok(left % right)
}
