//! The five weighted coefficient inequalities that certify an approximation
//! factor, the exact feasibility test behind them, and the min-alpha search.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{frac, int, Rational};

/// ln 4 to 12 significant digits.
pub fn ln4() -> Rational {
    Rational::new(138_629_436_112i64.into(), 100_000_000_000i64.into())
}

pub const TERMS: [&str; 5] = ["r_A", "b1", "b2", "r_C", "r_D"];
pub const ROWS: [&str; 3] = ["GW", "ST", "IT"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("weights must be nonnegative and sum to 1")]
    BadWeights,
    #[error("need 1 <= p <= alpha <= 2, got p = {p}, alpha = {alpha}")]
    BadFactors { p: Rational, alpha: Rational },
    #[error("need 0 < beta <= 2, got {0}")]
    BadBeta(Rational),
    #[error("sign analysis needs 1 < p < alpha < 1.8 and 2/alpha <= beta <= alpha")]
    SignRange,
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("p must lie in [1, 2], got {0}")]
    BadP(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub p: Rational,
    pub alpha: Rational,
    pub beta: Rational,
    pub w_gw: Rational,
    pub w_st: Rational,
    pub w_it: Rational,
}

impl ConstraintSystem {
    pub fn new(
        p: Rational,
        alpha: Rational,
        beta: Rational,
        [w_gw, w_st, w_it]: [Rational; 3],
    ) -> Result<Self, ConstraintError> {
        if w_gw.is_negative() || w_st.is_negative() || w_it.is_negative() || &w_gw + &w_st + &w_it != int(1) {
            return Err(ConstraintError::BadWeights);
        }
        if p < int(1) || alpha < p || alpha > int(2) {
            return Err(ConstraintError::BadFactors { p, alpha });
        }
        if !beta.is_positive() || beta > int(2) {
            return Err(ConstraintError::BadBeta(beta));
        }
        Ok(ConstraintSystem {
            p,
            alpha,
            beta,
            w_gw,
            w_st,
            w_it,
        })
    }

    pub fn weights(&self) -> [Rational; 3] {
        [self.w_gw.clone(), self.w_st.clone(), self.w_it.clone()]
    }
}

/// Per-candidate coefficients of the five mass terms, rows GW, ST, IT.
pub fn coefficients(p: &Rational, alpha: &Rational, beta: &Rational) -> [[Rational; 5]; 3] {
    let two = int(2);
    let ab = alpha * beta;
    [
        [
            &two - alpha,
            &two - alpha,
            &two - &two * alpha,
            &two - &ab,
            &two - &ab,
        ],
        [
            p - alpha,
            p + beta - alpha,
            &two * p + beta - &two * alpha,
            &two * p - &ab,
            &two * p + beta - &ab,
        ],
        [Rational::zero(), beta - alpha, beta.clone(), Rational::zero(), beta - &ab],
    ]
}

fn slacks_at(coef: &[[Rational; 5]; 3], w: &[Rational; 3]) -> [Rational; 5] {
    std::array::from_fn(|j| (0..3).map(|i| &w[i] * &coef[i][j]).fold(Rational::zero(), |a, x| a + x))
}

/// Weighted sum of each term's coefficients; the system holds iff all five
/// are nonpositive.
pub fn feasible(cs: &ConstraintSystem) -> [Rational; 5] {
    slacks_at(&coefficients(&cs.p, &cs.alpha, &cs.beta), &cs.weights())
}

/// A weight vector making all five slacks nonpositive at fixed factors, if one
/// exists. Decided exactly by checking every vertex of the feasible polygon
/// in the (w_GW, w_ST) plane.
pub fn feasible_weights(p: &Rational, alpha: &Rational, beta: &Rational) -> Option<[Rational; 3]> {
    let coef = coefficients(p, alpha, beta);
    // half-planes a*x + b*y <= c with x = w_GW, y = w_ST, w_IT = 1 - x - y
    let mut planes: Vec<(Rational, Rational, Rational)> = vec![
        (int(-1), int(0), int(0)),
        (int(0), int(-1), int(0)),
        (int(1), int(1), int(1)),
    ];
    for j in 0..5 {
        planes.push((
            &coef[0][j] - &coef[2][j],
            &coef[1][j] - &coef[2][j],
            -coef[2][j].clone(),
        ));
    }
    for i in 0..planes.len() {
        for k in i + 1..planes.len() {
            let (a1, b1, c1) = &planes[i];
            let (a2, b2, c2) = &planes[k];
            let det = a1 * b2 - a2 * b1;
            if det.is_zero() {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / &det;
            let y = (a1 * c2 - a2 * c1) / &det;
            if planes.iter().all(|(a, b, c)| a * &x + b * &y <= *c) {
                let z = int(1) - &x - &y;
                return Some([x, y, z]);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinAlpha {
    pub alpha: Rational,
    pub beta: Rational,
    pub weights: [Rational; 3],
    pub slacks: [Rational; 5],
}

fn beta_grid_witness(p: &Rational, alpha: &Rational) -> Option<(Rational, [Rational; 3])> {
    // beta < 2/alpha leaves only the IT row for the r_C term, whose b2 slack
    // is then beta > 0; beta > alpha makes every b1 coefficient positive
    // unless alpha = 2. Neither region can hold a witness.
    let lo = int(2) / alpha;
    let cap = alpha < &int(2);
    (1..=2000)
        .map(|k| frac(k, 1000))
        .filter(|b| *b >= lo && (!cap || b <= alpha))
        .find_map(|b| feasible_weights(p, alpha, &b).map(|w| (b, w)))
}

/// Smallest alpha (within `tolerance`) for which some beta on the 1/1000 grid
/// and some weights satisfy the system.
pub fn min_alpha(p: &Rational, tolerance: &Rational) -> Result<MinAlpha, ConstraintError> {
    if p < &int(1) || p > &int(2) {
        return Err(ConstraintError::BadP(p.clone()));
    }
    if !tolerance.is_positive() {
        return Err(ConstraintError::BadTolerance);
    }
    let finish = |alpha: Rational, (beta, weights): (Rational, [Rational; 3])| {
        let slacks = slacks_at(&coefficients(p, &alpha, &beta), &weights);
        MinAlpha {
            alpha,
            beta,
            weights,
            slacks,
        }
    };
    let mut lo = p.clone();
    if let Some(w) = beta_grid_witness(p, &lo) {
        return Ok(finish(lo, w));
    }
    let mut hi = int(2);
    let mut witness = beta_grid_witness(p, &hi).expect("the GW-only corner is feasible at alpha = 2");
    while &hi - &lo > *tolerance {
        let mid = (&lo + &hi) / int(2);
        match beta_grid_witness(p, &mid) {
            Some(w) => {
                hi = mid;
                witness = w;
            }
            None => lo = mid,
        }
    }
    Ok(finish(hi, witness))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Neg,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "+")]
    Pos,
}

impl Sign {
    fn of(r: &Rational) -> Sign {
        if r.is_negative() {
            Sign::Neg
        } else if r.is_zero() {
            Sign::Zero
        } else {
            Sign::Pos
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }
}

/// Expected signs per candidate and term; `None` marks the entry that depends
/// on the constants.
pub const EXPECTED_SIGNS: [[Option<Sign>; 5]; 3] = {
    use Sign::*;
    [
        [Some(Pos), Some(Pos), Some(Neg), Some(Neg), Some(Neg)],
        [Some(Neg), Some(Pos), Some(Pos), None, Some(Pos)],
        [Some(Zero), Some(Neg), Some(Pos), Some(Zero), Some(Neg)],
    ]
};

pub fn sign_table(cs: &ConstraintSystem) -> Result<[[Sign; 5]; 3], ConstraintError> {
    let (p, a, b) = (&cs.p, &cs.alpha, &cs.beta);
    if !(p > &int(1) && p < a && a < &frac(9, 5) && b >= &(int(2) / a) && b <= a) {
        return Err(ConstraintError::SignRange);
    }
    let coef = coefficients(p, a, b);
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| Sign::of(&coef[i][j]))))
}

/// Entries of `table` that contradict [`EXPECTED_SIGNS`], as (row, term).
pub fn sign_mismatches(table: &[[Sign; 5]; 3]) -> Vec<(&'static str, &'static str)> {
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..5 {
            if let Some(expected) = EXPECTED_SIGNS[i][j] {
                if table[i][j] != expected {
                    out.push((ROWS[i], TERMS[j]));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_rational, to_f64};

    fn reference_system() -> ConstraintSystem {
        ConstraintSystem::new(
            ln4(),
            parse_rational("1.7994").unwrap(),
            parse_rational("1.252").unwrap(),
            [frac(385, 1000), frac(187, 1000), frac(428, 1000)],
        )
        .unwrap()
    }

    #[test]
    fn reference_constants_are_feasible_and_tight() {
        let slacks = feasible(&reference_system());
        let expected = [-1.975e-5, -1.83e-4, -5.95e-5, -1.554e-4, -0.1944];
        for (s, e) in slacks.iter().zip(expected) {
            assert!(!s.is_positive());
            assert!((to_f64(s) - e).abs() < 1e-6 + 1e-3 * e.abs(), "{} vs {e}", to_f64(s));
        }
    }

    #[test]
    fn gw_only_corner() {
        let cs = ConstraintSystem::new(int(2), int(2), int(2), [int(1), int(0), int(0)]).unwrap();
        assert_eq!(feasible(&cs), [int(0), int(0), int(-2), int(-2), int(-2)]);
    }

    #[test]
    fn validates_system() {
        let w = [int(1), int(0), int(0)];
        assert!(ConstraintSystem::new(int(1), int(2), int(1), [int(1), int(1), int(-1)]).is_err());
        assert!(ConstraintSystem::new(int(2), frac(3, 2), int(1), w.clone()).is_err());
        assert!(ConstraintSystem::new(int(1), int(2), int(0), w.clone()).is_err());
        assert!(ConstraintSystem::new(int(1), int(2), int(3), w).is_err());
    }

    #[test]
    fn slightly_smaller_alpha_is_infeasible() {
        let alpha = parse_rational("1.795").unwrap();
        for k in 1..=2000 {
            assert!(feasible_weights(&ln4(), &alpha, &frac(k, 1000)).is_none(), "beta {k}/1000");
        }
    }

    #[test]
    fn witness_weights_satisfy_the_system() {
        let alpha = parse_rational("1.7994").unwrap();
        let beta = parse_rational("1.252").unwrap();
        let w = feasible_weights(&ln4(), &alpha, &beta).unwrap();
        let cs = ConstraintSystem::new(ln4(), alpha, beta, w).unwrap();
        assert!(feasible(&cs).iter().all(|s| !s.is_positive()));
    }

    #[test]
    fn min_alpha_at_two_is_two() {
        let r = min_alpha(&int(2), &frac(1, 10_000)).unwrap();
        assert_eq!(r.alpha, int(2));
        assert!(r.slacks.iter().all(|s| !s.is_positive()));
    }

    #[test]
    fn min_alpha_rejects_bad_input() {
        assert!(min_alpha(&frac(1, 2), &frac(1, 100)).is_err());
        assert!(min_alpha(&int(1), &int(0)).is_err());
    }

    #[test]
    fn table_signs_at_reference_constants() {
        let table = sign_table(&reference_system()).unwrap();
        assert!(sign_mismatches(&table).is_empty());
        assert_eq!(table[1][2], Sign::Pos);
        let mut other = reference_system();
        other.p = frac(11, 10);
        assert_eq!(sign_table(&other).unwrap()[0], table[0]);
        other.alpha = int(2);
        assert!(sign_table(&other).is_err());
    }
}
