use super::{norm, rearrangement, LorentzIndex};
use crate::error::{domain, Error, Result};
use crate::grid::{gradient, ScalarField};

/// `(||f||_{L^{p,inf}}, ||f||_{L^{p0,inf}}^{1-theta} ||f||_{L^{p1,inf}}^theta)`
/// with `1/p = (1-theta)/p0 + theta/p1`. The first never exceeds the second.
pub fn interpolation_check(f: &ScalarField, p0: f64, p1: f64, theta: f64) -> Result<(f64, f64)> {
    if !(p0 > 1.0 && p1 > p0) {
        return domain(format!("interpolation needs 1 < p0 < p1 <= inf, got p0={p0}, p1={p1}"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("interpolation parameter must lie in (0, 1), got {theta}"));
    }
    let inv = (1.0 - theta) / p0 + theta / p1;
    let r = rearrangement(f);
    let lhs = r.norm(LorentzIndex::weak(1.0 / inv)?)?;
    let n0 = r.norm(LorentzIndex::weak(p0)?)?;
    let n1 = r.norm(LorentzIndex::weak(p1)?)?;
    Ok((lhs, n0.powf(1.0 - theta) * n1.powf(theta)))
}

/// `||u||_{L^{r,2}} / (||u||_2^{1-n/p} ||grad u||_2^{n/p})` with
/// `r = 2p/(p-2)`; for `p = inf` this is `||u||_{L^{2,2}} / ||u||_2`.
///
/// Both sides are homogeneous of degree one in `u`, so the ratio is scale
/// invariant.
pub fn sobolev_ratio(u: &ScalarField, p: f64) -> Result<f64> {
    let n = u.grid().dim() as f64;
    if !(p > n) {
        return domain(format!("Sobolev ratio needs p > n = {n}, got {p}"));
    }
    let l2 = u.l2_norm();
    if l2 == 0.0 {
        return domain("Sobolev ratio is undefined for u = 0");
    }
    let (r, s) = if p.is_infinite() { (2.0, 0.0) } else { (2.0 * p / (p - 2.0), n / p) };
    let top = norm(u, LorentzIndex::new(r, 2.0)?)?;
    if s == 0.0 {
        return Ok(top / l2);
    }
    let grad = gradient(u).l2_norm();
    if grad == 0.0 {
        return Err(Error::Domain("Sobolev ratio is undefined for constant u".into()));
    }
    Ok(top / (l2.powf(1.0 - s) * grad.powf(s)))
}

/// `(int |f g|, int f* g*)`; the first never exceeds the second.
pub fn holder_rearranged(f: &ScalarField, g: &ScalarField) -> Result<(f64, f64)> {
    f.grid().ensure_same(g.grid())?;
    let lhs = f.values().iter().zip(g.values()).map(|(a, b)| (a * b).abs()).sum::<f64>() * f.grid().cell_volume();
    Ok((lhs, rearrangement(f).product_integral(&rearrangement(g))))
}
