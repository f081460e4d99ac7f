use crate::error::{Error, Result};

/// Inputs of the balance equation `(H₊ − H)·Ω = [β − H₊·ρ]₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceInputs {
    /// Current coefficient `H ≥ 0`.
    pub h: f64,
    /// Bregman surrogate of the last step (may be negative for stochastic surrogates).
    pub beta: f64,
    /// `½r²`.
    pub rho: f64,
    /// `D²`.
    pub omega: f64,
}

/// Unique solution `H₊ = H + [β − Hρ]₊ / (Ω + ρ)` of the balance equation.
///
/// Always `H₊ ≥ H`, with equality exactly when `β ≤ Hρ`.
pub fn balance_update(inputs: BalanceInputs) -> f64 {
    let BalanceInputs {
        h,
        beta,
        rho,
        omega,
    } = inputs;
    debug_assert!(h >= 0.0 && rho >= 0.0 && omega > 0.0, "{inputs:?}");
    let excess = beta - h * rho;
    if excess > 0.0 {
        h + excess / (omega + rho)
    } else {
        h
    }
}

/// `max_{r ≥ 0} { M/(1+ν)·r^{1+ν} − H/2·r² }` in closed form:
/// `(1−ν)/(2(1+ν)) · M^{2/(1−ν)} / H^{(1+ν)/(1−ν)}`.
pub fn reg_max_bound(m: f64, nu: f64, h: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&nu) {
        return Err(Error::usage(format!(
            "reg_max_bound needs 0 <= nu < 1, got {nu}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::usage(format!("reg_max_bound needs H > 0, got {h}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::usage(format!("reg_max_bound needs M >= 0, got {m}")));
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    let q = 1.0 - nu;
    // Work in logs: M^{2/q} and H^{(1+ν)/q} overflow quickly as ν → 1.
    let log_val = (2.0 / q) * m.ln() - ((1.0 + nu) / q) * h.ln();
    Ok(q / (2.0 * (1.0 + nu)) * log_val.exp())
}
