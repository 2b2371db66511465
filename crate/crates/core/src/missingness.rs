//! Missing-data mechanisms and mask diagnostics.
//!
//! Three generators are provided:
//!
//! - [`gen_mcar`]: every entry missing independently with probability `p`.
//!   The function takes no data matrix, so it cannot depend on values.
//! - [`gen_mar_rowperm`]: an MCAR donor mask whose row patterns are
//!   reassigned to rows according to a fully observed anchor column. The
//!   result depends on data only through always-observed values (MAR) and
//!   has the same multiset of row patterns as its donor.
//! - [`gen_nmar_logistic`]: entry `(i, j)` missing with probability
//!   `sigmoid(α + β·Y_ij)`, i.e. driven by the value that goes missing.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{num_err, param_err, Result};
use crate::linalg::{DenseMatrix, ObservationMask};

/// Executable mechanism variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MechanismKind {
    #[serde(rename = "MCAR")]
    Mcar,
    #[serde(rename = "MAR_ROWPERM")]
    MarRowPerm,
    #[serde(rename = "NMAR_LOGISTIC")]
    NmarLogistic,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 3] = [Self::Mcar, Self::MarRowPerm, Self::NmarLogistic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mcar => "MCAR",
            Self::MarRowPerm => "MAR_ROWPERM",
            Self::NmarLogistic => "NMAR_LOGISTIC",
        }
    }

    /// Short label used in tables.
    pub fn label(self) -> &'static str {
        match self {
            Self::Mcar => "MCAR",
            Self::MarRowPerm => "MAR",
            Self::NmarLogistic => "NMAR",
        }
    }
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MechanismKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "MCAR" => Ok(Self::Mcar),
            "MAR" | "MAR_ROWPERM" => Ok(Self::MarRowPerm),
            "NMAR" | "NMAR_LOGISTIC" => Ok(Self::NmarLogistic),
            other => Err(param_err!("unknown mechanism {other:?}")),
        }
    }
}

/// The statistical class of a mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MechanismClass {
    Mcar,
    Mar,
    Nmar,
}

impl MechanismClass {
    /// Whether likelihood-based completion may ignore the mechanism
    /// (MAR with separable parameters; MCAR is a special case).
    pub fn is_ignorable(self) -> bool {
        !matches!(self, Self::Nmar)
    }
}

/// Declarative description of a mask generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    /// Target missing proportion (MCAR, MAR).
    pub p: f64,
    /// Column kept fully observed (MAR); also excluded from MCAR draws when
    /// a fair MCAR/MAR comparison is wanted.
    pub anchor_col: usize,
    /// Logistic intercept (NMAR).
    pub alpha: f64,
    /// Logistic slope (NMAR).
    pub beta: f64,
}

impl MechanismSpec {
    pub fn mcar(p: f64) -> Self {
        Self {
            kind: MechanismKind::Mcar,
            p,
            anchor_col: 0,
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn mar_rowperm(p: f64, anchor_col: usize) -> Self {
        Self {
            kind: MechanismKind::MarRowPerm,
            p,
            anchor_col,
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn nmar_logistic(alpha: f64, beta: f64) -> Self {
        Self {
            kind: MechanismKind::NmarLogistic,
            p: 0.0,
            anchor_col: 0,
            alpha,
            beta,
        }
    }

    pub fn class(&self) -> MechanismClass {
        classify_mechanism(self)
    }

    /// Draws a mask for `y` (MCAR ignores the values and uses no anchor).
    pub fn generate<R: Rng + ?Sized>(
        &self,
        y: &DenseMatrix,
        rng: &mut R,
    ) -> Result<ObservationMask> {
        match self.kind {
            MechanismKind::Mcar => gen_mcar(y.rows(), y.cols(), self.p, rng),
            MechanismKind::MarRowPerm => Ok(gen_mar_rowperm(y, self.p, self.anchor_col, rng)?.mask),
            MechanismKind::NmarLogistic => gen_nmar_logistic(y, self.alpha, self.beta, rng),
        }
    }
}

pub fn classify_mechanism(spec: &MechanismSpec) -> MechanismClass {
    match spec.kind {
        MechanismKind::Mcar => MechanismClass::Mcar,
        MechanismKind::MarRowPerm => MechanismClass::Mar,
        MechanismKind::NmarLogistic => MechanismClass::Nmar,
    }
}

fn check_prob(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(param_err!("missing proportion must lie in [0, 1], got {p}"));
    }
    Ok(())
}

/// Entries missing independently with probability `p`.
pub fn gen_mcar<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    p: f64,
    rng: &mut R,
) -> Result<ObservationMask> {
    check_prob(p)?;
    Ok(ObservationMask::from_fn(m, n, |_, _| rng.gen::<f64>() >= p))
}

/// MCAR over every column except `anchor_col`, which stays observed.
///
/// Consumes exactly one uniform per non-anchor entry, row-major.
pub fn gen_mcar_anchored<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    p: f64,
    anchor_col: usize,
    rng: &mut R,
) -> Result<ObservationMask> {
    check_prob(p)?;
    if anchor_col >= n {
        return Err(param_err!("anchor column {anchor_col} outside 0..{n}"));
    }
    Ok(ObservationMask::from_fn(m, n, |_, j| {
        j == anchor_col || rng.gen::<f64>() >= p
    }))
}

/// A MAR mask together with the MCAR donor it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarMask {
    pub mask: ObservationMask,
    pub donor: ObservationMask,
    /// `assignment[k] = (donor_row, data_row)` in rank order.
    pub assignment: Vec<(usize, usize)>,
}

/// Row-permutation MAR: donor MCAR row patterns ranked by missing count are
/// handed to rows ranked by their anchor value.
///
/// The most-missing donor row goes to the row with the largest anchor value,
/// the next to the next, and so on. Ties in either ranking are broken by
/// ascending row index. Only `y[·, anchor_col]` is read.
pub fn gen_mar_rowperm<R: Rng + ?Sized>(
    y: &DenseMatrix,
    p: f64,
    anchor_col: usize,
    rng: &mut R,
) -> Result<MarMask> {
    let (m, n) = y.shape();
    let donor = gen_mcar_anchored(m, n, p, anchor_col, rng)?;
    let anchor: Vec<f64> = (0..m).map(|i| y.get(i, anchor_col)).collect();
    if anchor.iter().any(|x| !x.is_finite()) {
        return Err(num_err!("anchor column {anchor_col} has non-finite values"));
    }

    let counts: Vec<usize> = (0..m)
        .map(|i| donor.row_pattern(i).iter().filter(|&&o| !o).count())
        .collect();
    let mut donor_order: Vec<usize> = (0..m).collect();
    donor_order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut data_order: Vec<usize> = (0..m).collect();
    data_order.sort_by(|&a, &b| {
        anchor[b]
            .partial_cmp(&anchor[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut observed = vec![true; m * n];
    let mut assignment = Vec::with_capacity(m);
    for (&src, &dst) in donor_order.iter().zip(&data_order) {
        observed[dst * n..(dst + 1) * n].copy_from_slice(donor.row_pattern(src));
        assignment.push((src, dst));
    }
    let mask = ObservationMask::new(m, n, observed)?;
    Ok(MarMask {
        mask,
        donor,
        assignment,
    })
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Entry `(i, j)` missing independently with probability `sigmoid(α + β·Y_ij)`.
pub fn gen_nmar_logistic<R: Rng + ?Sized>(
    y: &DenseMatrix,
    alpha: f64,
    beta: f64,
    rng: &mut R,
) -> Result<ObservationMask> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(param_err!("logistic parameters must be finite"));
    }
    if !y.is_finite() {
        return Err(num_err!("NMAR generator needs finite data"));
    }
    let (m, n) = y.shape();
    Ok(ObservationMask::from_fn(m, n, |i, j| {
        rng.gen::<f64>() >= sigmoid(alpha + beta * y.get(i, j))
    }))
}

/// Summary counts of a mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskStats {
    pub missing_fraction: f64,
    pub per_row_missing: Vec<usize>,
    /// Missing entries in the anchor column, when one was given and exists.
    pub anchor_missing: Option<usize>,
}

pub fn mask_stats(mask: &ObservationMask, anchor_col: Option<usize>) -> MaskStats {
    let (m, n) = mask.shape();
    let total = m * n;
    let missing_fraction = if total == 0 {
        0.0
    } else {
        mask.n_missing() as f64 / total as f64
    };
    let per_row_missing = (0..m)
        .map(|i| mask.row_pattern(i).iter().filter(|&&o| !o).count())
        .collect();
    let anchor_missing = anchor_col
        .filter(|&c| c < n)
        .map(|c| (0..m).filter(|&i| mask.is_missing(i, c)).count());
    MaskStats {
        missing_fraction,
        per_row_missing,
        anchor_missing,
    }
}
