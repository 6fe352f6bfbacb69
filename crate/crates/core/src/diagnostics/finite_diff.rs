use crate::error::{Error, Result};

/// Closed rectangle `[lo, hi]^2` the stencil must stay inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn unit_with_floor(epsilon: f64) -> Self {
        Self { lo: epsilon, hi: 1.0 }
    }

    fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Central mixed difference of `f` in `(ln V, ln E)`:
/// `[f(++) - f(+-) - f(-+) + f(--)] / (4 d^2)` with `d = ln(1 + h)` and the
/// stencil placed at `V e^(+-d)`, `E e^(+-d)`.
pub fn finite_diff_log_cross_partial<F>(f: F, v: f64, e: f64, h: f64, domain: Domain) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    if !(h > 0.0 && h < 0.1) {
        return Err(Error::InvalidInput(format!("step h must lie in (0, 0.1), got {h}")));
    }
    let d = h.ln_1p();
    let (vp, vm) = (v * d.exp(), v * (-d).exp());
    let (ep, em) = (e * d.exp(), e * (-d).exp());
    for (corner, cv, ce) in [("++", vp, ep), ("+-", vp, em), ("-+", vm, ep), ("--", vm, em)] {
        if !(domain.contains(cv) && domain.contains(ce)) {
            return Err(Error::Stencil { corner, v: cv, e: ce });
        }
    }
    Ok((f(vp, ep) - f(vp, em) - f(vm, ep) + f(vm, em)) / (4.0 * d * d))
}
