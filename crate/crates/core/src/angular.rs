//! Angular-momentum algebra for `l ⊗ 1/2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::JBranch;

/// Half-integer quantum number stored as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    /// `m + 1/2`
    pub const fn plus_half(m: i32) -> Self {
        HalfInt(2 * m + 1)
    }

    /// `m - 1/2`
    pub const fn minus_half(m: i32) -> Self {
        HalfInt(2 * m - 1)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Coefficients of `|l j m_j⟩` on the two product states sharing `m_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgPair {
    /// Coefficient of `|m_l = m_j − 1/2⟩|↑⟩`.
    pub up_coeff: f64,
    /// Coefficient of `|m_l = m_j + 1/2⟩|↓⟩`.
    pub down_coeff: f64,
}

/// Clebsch–Gordan pair for coupling orbital `l` with spin 1/2.
///
/// Condon–Shortley convention with the `j = l − 1/2` sign carried by the
/// spin-up component.
pub fn cg(l: u32, m_j: HalfInt, branch: JBranch) -> Result<CgPair> {
    let twice_j = branch.twice_j(l)? as i32;
    if m_j.twice().abs() > twice_j || m_j.twice() % 2 == 0 {
        return domain(format!("m_j = {m_j} outside j = {}/2 for l = {l}", twice_j));
    }
    let norm = (2 * l + 1) as f64;
    // 2(l ± m_j) + 1, kept integral
    let plus = (2 * l as i32 + m_j.twice() + 1) as f64 / 2.0;
    let minus = (2 * l as i32 - m_j.twice() + 1) as f64 / 2.0;
    Ok(match branch {
        JBranch::Plus => CgPair {
            up_coeff: (plus / norm).sqrt(),
            down_coeff: (minus / norm).sqrt(),
        },
        JBranch::Minus => CgPair {
            up_coeff: -(minus / norm).sqrt(),
            down_coeff: (plus / norm).sqrt(),
        },
    })
}

/// `⟨l, m+1 | l₊ | l, m⟩ = √(l(l+1) − m(m+1))`.
pub fn ladder_coeff(l: u32, m: i32) -> Result<f64> {
    if m.unsigned_abs() > l {
        return domain(format!("|m| = {} exceeds l = {l}", m.abs()));
    }
    let l = l as i64;
    let m = m as i64;
    Ok(((l * (l + 1) - m * (m + 1)) as f64).sqrt())
}
