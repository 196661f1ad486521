//! Closed-form performance bounds for the threshold strategy and the
//! converse bound for any strategy. Quantities are in queries, logs base 2.

use serde::{Deserialize, Serialize};

/// Finite-`m` upper bound on the expected query count, in two variants
/// that differ only in the exponent of the exhaustive-phase tail term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// Tail `(m/2) eps^l`.
    #[serde(with = "crate::serde_float")]
    pub stated: f64,
    /// Tail `(m/2) eps^(l-1)`; never smaller than `stated`.
    #[serde(with = "crate::serde_float")]
    pub certified: f64,
}

fn threshold_phase_cost(h: f64, i_uy: f64, i_max: f64, epsilon: f64) -> f64 {
    ((h + (1.0 / epsilon).log2() + i_max) / i_uy + 1.0) / (1.0 - epsilon)
}

/// Both variants of the finite upper bound. `i_uy <= 0` gives `+inf`.
pub fn theorem1_upper(h: f64, i_uy: f64, i_max: f64, epsilon: f64, l: usize, m: usize) -> UpperBound {
    if i_uy <= 0.0 {
        return UpperBound {
            stated: f64::INFINITY,
            certified: f64::INFINITY,
        };
    }
    let head = threshold_phase_cost(h, i_uy, i_max, epsilon);
    let half_m = m as f64 / 2.0;
    UpperBound {
        stated: head + half_m * epsilon.powi(l as i32),
        certified: head + half_m * epsilon.powi(l as i32 - 1),
    }
}

/// Asymptotic `(epsilon, l)` from `log2 m`. Iterated logs must be
/// positive, which holds for `log2 m > 4`; smaller inputs get `(0.25, 3)`.
pub fn asymptotic_params_log2(log2_m: f64) -> (f64, usize) {
    if log2_m <= 4.0 {
        return (0.25, 3);
    }
    let ll = log2_m.log2();
    let lll = ll.log2();
    let epsilon = ll / log2_m;
    let l = (log2_m / (ll - lll)).ceil() as usize;
    (epsilon, l)
}

/// `epsilon = log log m / log m`, `l = ceil(log m / (log log m - log log log m))`.
pub fn asymptotic_params(m: usize) -> (f64, usize) {
    asymptotic_params_log2((m as f64).log2())
}

/// A validity condition `lhs < n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    #[serde(with = "crate::serde_float")]
    pub lhs: f64,
    pub met: bool,
}

impl Condition {
    fn new(lhs: f64, n: usize) -> Self {
        Self {
            lhs,
            met: lhs < n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupConditions {
    /// Enough groups that the threshold steps rarely run out.
    pub eq3: Condition,
    /// The same requirement at the asymptotic parameters.
    pub eq4: Condition,
    /// The finite bound itself must fit in `n` groups.
    pub remark1: Condition,
}

impl GroupConditions {
    pub fn all(&self) -> bool {
        self.eq3.met && self.eq4.met && self.remark1.met
    }
}

fn log2_log2(m: usize) -> f64 {
    if m <= 2 {
        return 0.0;
    }
    (m as f64).log2().log2()
}

pub fn group_sufficiency(
    n: usize,
    h: f64,
    i_uy: f64,
    i_max: f64,
    epsilon: f64,
    l: usize,
    m: usize,
) -> GroupConditions {
    if i_uy <= 0.0 {
        let never = Condition {
            lhs: f64::INFINITY,
            met: false,
        };
        return GroupConditions {
            eq3: never,
            eq4: never,
            remark1: never,
        };
    }
    let head = threshold_phase_cost(h, i_uy, i_max, epsilon);
    let upper = theorem1_upper(h, i_uy, i_max, epsilon, l, m);
    GroupConditions {
        eq3: Condition::new(head / epsilon.powi(l as i32), n),
        eq4: Condition::new(h / i_uy * log2_log2(m), n),
        remark1: Condition::new(upper.stated, n),
    }
}

/// Leading term `H(J) / I(U;Y)` of the converse bound.
pub fn converse_lower(h: f64, i_uy: f64) -> f64 {
    if h <= 0.0 {
        0.0
    } else if i_uy <= 0.0 {
        f64::INFINITY
    } else {
        h / i_uy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub epsilon: f64,
    pub l: usize,
    pub entropy: f64,
    pub mutual_info: f64,
    pub i_max: f64,
    pub m: usize,
    pub n: usize,
}

/// Every bound quantity for one model, as embedded in experiment output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Certified finite upper bound (tail exponent `l - 1`).
    #[serde(with = "crate::serde_float")]
    pub upper_finite: f64,
    /// Finite upper bound with tail exponent `l`.
    #[serde(with = "crate::serde_float")]
    pub upper_finite_stated: f64,
    /// Certified bound evaluated at `asymptotic_params(m)`.
    #[serde(with = "crate::serde_float")]
    pub upper_asymptotic_leading: f64,
    #[serde(with = "crate::serde_float")]
    pub lower_converse: f64,
    #[serde(with = "crate::serde_float")]
    pub groups_required_finite: f64,
    #[serde(with = "crate::serde_float")]
    pub groups_required_asymptotic: f64,
    pub params_used: BoundParams,
    pub conditions_met: GroupConditions,
}

impl BoundReport {
    pub fn compute(params: BoundParams) -> Self {
        let BoundParams {
            epsilon,
            l,
            entropy: h,
            mutual_info: i,
            i_max,
            m,
            n,
        } = params;
        let upper = theorem1_upper(h, i, i_max, epsilon, l, m);
        let (ea, la) = asymptotic_params(m);
        let conditions = group_sufficiency(n, h, i, i_max, epsilon, l, m);
        Self {
            upper_finite: upper.certified,
            upper_finite_stated: upper.stated,
            upper_asymptotic_leading: theorem1_upper(h, i, i_max, ea, la, m).certified,
            lower_converse: converse_lower(h, i),
            groups_required_finite: conditions.eq3.lhs,
            groups_required_asymptotic: conditions.eq4.lhs,
            params_used: params,
            conditions_met: conditions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vanishing_tail() {
        let i = 0.7;
        let b = theorem1_upper(0.0, i, 1.0, 0.5, 200, 2);
        let expect = (2.0 / i + 1.0) / 0.5;
        assert!((b.stated - expect).abs() < 1e-12);
        assert!((b.certified - expect).abs() < 1e-12);
    }

    #[test]
    fn desk_scale_formula() {
        // direct evaluation, both tail exponents
        let head = (1.0 / 0.9) * ((8.0 + 10f64.log2() + 2.0) / 0.5 + 1.0);
        let b = theorem1_upper(8.0, 0.5, 2.0, 0.1, 4, 256);
        assert!((b.stated - (head + 128.0 * 1e-4)).abs() < 1e-9);
        assert!((b.certified - (head + 128.0 * 1e-3)).abs() < 1e-9);
        let tighter = theorem1_upper(8.0, 1.0, 2.0, 0.1, 4, 256);
        assert!(tighter.certified < b.certified);
        assert!(theorem1_upper(8.0, 0.0, 2.0, 0.1, 4, 256).certified.is_infinite());
    }

    #[test]
    fn asymptotic_parameter_values() {
        assert_eq!(asymptotic_params(1 << 16), (0.25, 8));
        let (e, l) = asymptotic_params_log2(256.0);
        assert_eq!(e, 0.03125);
        assert_eq!(l, 52);
        let lm = 1e6f64.log2();
        let (e, l) = asymptotic_params(1_000_000);
        assert!((e - lm.log2() / lm).abs() < 1e-15);
        assert!((e - 0.216_590_246).abs() < 1e-8);
        assert_eq!(l, 10);
        assert_eq!(asymptotic_params(16), (0.25, 3));
    }

    #[test]
    fn sufficiency_extremes_and_boundary() {
        let c = group_sufficiency(1_000_000_000, 8.0, 0.5, 1.0, 0.25, 3, 256);
        assert!(c.all());
        let c = group_sufficiency(0, 8.0, 0.5, 1.0, 0.25, 3, 256);
        assert!(!c.eq3.met && !c.eq4.met && !c.remark1.met);
        // H/I log2 log2 m = 16 * 3 = 48, strict inequality
        assert_eq!(group_sufficiency(48, 8.0, 0.5, 1.0, 0.25, 3, 256).eq4.lhs, 48.0);
        assert!(!group_sufficiency(48, 8.0, 0.5, 1.0, 0.25, 3, 256).eq4.met);
        assert!(group_sufficiency(49, 8.0, 0.5, 1.0, 0.25, 3, 256).eq4.met);
    }

    #[test]
    fn converse_values() {
        assert_eq!(converse_lower(0.0, 0.3), 0.0);
        assert_eq!(converse_lower(3.0, 1.0), 3.0);
        assert!(converse_lower(3.0, 0.0).is_infinite());
    }

    #[test]
    fn doubling_m_adds_one_over_i() {
        for i in [0.1, 0.5, 1.0] {
            for k in 1..20 {
                let h = k as f64;
                let d = converse_lower(h + 1.0, i) - converse_lower(h, i);
                assert!((d - 1.0 / i).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn upper_bound_monotone(
            h in 0.0f64..20.0, i in 0.01f64..1.0, imax in 0.0f64..3.0,
            eps in 0.01f64..0.9, l in 1usize..12, m in 1usize..10_000,
            dh in 0.0f64..5.0, di in 0.0f64..1.0, dmax in 0.0f64..2.0, dm in 0usize..1000,
        ) {
            let base = theorem1_upper(h, i, imax, eps, l, m).certified;
            let tol = 1e-9 * base.abs().max(1.0);
            prop_assert!(theorem1_upper(h, i + di, imax, eps, l, m).certified <= base + tol);
            prop_assert!(theorem1_upper(h, i, imax, eps, l + 1, m).certified <= base + tol);
            prop_assert!(theorem1_upper(h + dh, i, imax, eps, l, m).certified >= base - tol);
            prop_assert!(theorem1_upper(h, i, imax + dmax, eps, l, m).certified >= base - tol);
            prop_assert!(theorem1_upper(h, i, imax, eps, l, m + dm).certified >= base - tol);
            let b = theorem1_upper(h, i, imax, eps, l, m);
            prop_assert!(b.certified >= b.stated);
        }

        #[test]
        fn converse_below_upper(
            h in 0.0f64..20.0, i in 0.01f64..1.0, imax in 0.0f64..3.0,
            eps in 0.01f64..0.5, l in 1usize..12, m in 1usize..10_000, n in 1usize..1_000_000_000,
        ) {
            let c = group_sufficiency(n, h, i, imax, eps, l, m);
            if c.all() {
                prop_assert!(converse_lower(h, i) <= theorem1_upper(h, i, imax, eps, l, m).certified);
            }
        }
    }
}
