//! Asymmetric logistic losses and the primal/dual objectives of the
//! totally-corrective boosting problems.
//!
//! Both variants minimise `sum_i c_i logit(z_i + s_i) + theta * sum_j w_j` over
//! `w >= 0`, where `z = y . (H w)` are the margins:
//!
//! * `Tc1`: `c = l` (class costs `C1/M1`, `C2/M2`), shift `s_i = 0`;
//! * `Tc2`: `c = e` (`1/M1`, `1/M2`), shift `s_i = 2 y_i eta`.
//!
//! The optimal dual weights are `u_i = c_i / (1 + exp(z_i + s_i))`.
//!
//! `C1` is the cost of misclassifying a positive and `C2` that of a negative,
//! with `(C1 + C2)/2 = 1` and `eta = log(C2/C1)/2`. The asymmetric factor `k`
//! is the ratio between the two costs; [`CostConvention`] says which class
//! carries the larger one.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypothesis::Responses;

/// Which asymmetric loss is optimised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Tc1,
    Tc2,
}

/// How the example weights are initialised before the first round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitRule {
    /// Dual map evaluated at zero margins (`l_i/2`, or `e_i/(1+exp(2 y_i eta))` for TC2).
    #[default]
    Eq8AtZero,
    /// `l_i/2`, or `e_i/(1+k^{-y_i})` for TC2, independent of the cost convention.
    Algorithm1Literal,
}

/// Which class's misclassification cost is `k` times the other's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostConvention {
    /// `k = C1/C2`: a missed positive costs `k` times a false positive, so
    /// `k > 1` trades false positives for fewer false negatives. At zero
    /// margins the TC2 weights are `e_i/(1 + k^{-y_i})`.
    #[default]
    PositiveCostlier,
    /// `k = C2/C1`: a false positive costs `k` times a missed positive
    /// (`C1 = 2/(1+k)`, `C2 = 2k/(1+k)`, `eta = log(k)/2`).
    NegativeCostlier,
}

/// Cost constants derived from the asymmetric factor `k` with
/// `gamma = (C1 + C2)/2` fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetryParams {
    pub k: f64,
    pub convention: CostConvention,
    /// Cost of misclassifying a positive.
    pub c1: f64,
    /// Cost of misclassifying a negative.
    pub c2: f64,
    /// `log(C2/C1)/2`.
    pub eta: f64,
    pub gamma: f64,
}

impl AsymmetryParams {
    pub fn new(k: f64) -> Result<Self> {
        Self::with_convention(k, CostConvention::default())
    }

    pub fn with_convention(k: f64, convention: CostConvention) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument(format!("asymmetric factor k = {k}")));
        }
        let (small, large) = (2.0 / (1.0 + k), 2.0 * k / (1.0 + k));
        let (c1, c2, eta) = match convention {
            CostConvention::PositiveCostlier => (large, small, -0.5 * k.ln()),
            CostConvention::NegativeCostlier => (small, large, 0.5 * k.ln()),
        };
        Ok(AsymmetryParams {
            k,
            convention,
            c1,
            c2,
            eta,
            gamma: 1.0,
        })
    }
}

/// Per-example loss weights, constant within each class.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector {
    values: Vec<f64>,
}

impl CostVector {
    pub fn new(variant: Variant, asym: &AsymmetryParams, labels: &[i8]) -> Result<Self> {
        let n_pos = labels.iter().filter(|&&y| y == 1).count();
        let n_neg = labels.iter().filter(|&&y| y == -1).count();
        if n_pos == 0 || n_neg == 0 || n_pos + n_neg != labels.len() {
            return Err(Error::InvalidArgument(
                "cost vector needs +/-1 labels from both classes".into(),
            ));
        }
        let (pos, neg) = match variant {
            Variant::Tc1 => (asym.c1 / n_pos as f64, asym.c2 / n_neg as f64),
            Variant::Tc2 => (1.0 / n_pos as f64, 1.0 / n_neg as f64),
        };
        Ok(CostVector {
            values: labels
                .iter()
                .map(|&y| if y == 1 { pos } else { neg })
                .collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Additive shift inside the loss for each example (`2 y_i eta` for TC2, zero for TC1).
pub fn loss_shifts(variant: Variant, asym: &AsymmetryParams, labels: &[i8]) -> Vec<f64> {
    match variant {
        Variant::Tc1 => vec![0.0; labels.len()],
        Variant::Tc2 => labels
            .iter()
            .map(|&y| 2.0 * f64::from(y) * asym.eta)
            .collect(),
    }
}

/// `log(1 + exp(-x))`, without overflow for large `|x|`.
#[inline]
pub fn logit_loss(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// `c / (1 + exp(t))`, without overflow for large `|t|`.
#[inline]
fn scaled_sigmoid_neg(c: f64, t: f64) -> f64 {
    if t > 0.0 {
        let e = (-t).exp();
        c * e / (1.0 + e)
    } else {
        c / (1.0 + t.exp())
    }
}

#[inline]
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Fenchel conjugate of [`logit_loss`]:
/// `(-u) log(-u) + (1 + u) log(1 + u)` on `[-1, 0]`, `+inf` elsewhere.
pub fn logit_conjugate(u: f64) -> f64 {
    if !(-1.0..=0.0).contains(&u) {
        return f64::INFINITY;
    }
    xlogx(-u) + xlogx(1.0 + u)
}

/// Margins, weights and loss settings of one training run.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub variant: Variant,
    pub theta: f64,
    pub cost: CostVector,
    pub asym: AsymmetryParams,
    pub labels: Vec<i8>,
}

impl TrainState {
    /// State at `w = 0` with weights initialised by `init`, under the default
    /// cost convention.
    pub fn initial(
        dataset: &LabeledDataset,
        variant: Variant,
        theta: f64,
        k: f64,
        init: InitRule,
    ) -> Result<Self> {
        Self::initial_with(dataset, variant, theta, AsymmetryParams::new(k)?, init)
    }

    pub fn initial_with(
        dataset: &LabeledDataset,
        variant: Variant,
        theta: f64,
        asym: AsymmetryParams,
        init: InitRule,
    ) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidArgument(format!("theta = {theta}")));
        }
        let labels = dataset.labels().to_vec();
        let cost = CostVector::new(variant, &asym, &labels)?;
        let mut state = TrainState {
            u: Vec::new(),
            z: vec![0.0; labels.len()],
            variant,
            theta,
            cost,
            asym,
            labels,
        };
        state.u = match (init, variant) {
            (InitRule::Algorithm1Literal, Variant::Tc2) => state
                .cost
                .values()
                .iter()
                .zip(&state.labels)
                .map(|(&e, &y)| e / (1.0 + state.asym.k.powi(-i32::from(y))))
                .collect(),
            _ => weights_from_margins(&state),
        };
        Ok(state)
    }

    pub fn shifts(&self) -> Vec<f64> {
        loss_shifts(self.variant, &self.asym, &self.labels)
    }

    /// Replaces the margins and recomputes `u` from them.
    pub fn set_margins(&mut self, z: Vec<f64>) {
        self.z = z;
        self.u = weights_from_margins(self);
    }
}

/// Dual weights from the current margins: `u_i = c_i exp(-t_i)/(1 + exp(-t_i))`
/// with `t_i = z_i + s_i`.
///
/// Strictly inside `(0, c_i)` in exact arithmetic; in floating point the
/// value saturates at the bounds for very large `|t_i|`.
pub fn weights_from_margins(state: &TrainState) -> Vec<f64> {
    let shifts = state.shifts();
    state
        .z
        .iter()
        .zip(&shifts)
        .zip(state.cost.values())
        .map(|((&z, &s), &c)| scaled_sigmoid_neg(c, z + s))
        .collect()
}

/// Dual objective (including the constant `sum_i c_i log c_i` the dual needs
/// to match the primal at the optimum):
/// `-sum_i [u_i log u_i + (c_i - u_i) log(c_i - u_i) - c_i log c_i + u_i s_i]`.
pub fn dual_value(state: &TrainState, u: &[f64]) -> Result<f64> {
    if u.len() != state.labels.len() {
        return Err(Error::DimensionMismatch {
            what: "dual weights",
            expected: state.labels.len(),
            got: u.len(),
        });
    }
    let shifts = state.shifts();
    let mut total = 0.0;
    for (i, ((&ui, &c), &s)) in u.iter().zip(state.cost.values()).zip(&shifts).enumerate() {
        if !(0.0..=c).contains(&ui) {
            return Err(Error::Domain(format!(
                "dual weight u[{i}] = {ui} outside [0, {c}]"
            )));
        }
        total += xlogx(ui) + xlogx(c - ui) - xlogx(c) + ui * s;
    }
    Ok(-total)
}

/// Edges `sum_i u_i y_i H[i][j]` of every column of `h`.
pub fn edges<R: Responses + ?Sized>(u: &[f64], labels: &[i8], h: &R) -> Vec<f64> {
    (0..h.n_cols())
        .map(|j| {
            h.column(j)
                .iter()
                .zip(u)
                .zip(labels)
                .map(|((&hij, &ui), &y)| ui * f64::from(y * hij))
                .sum()
        })
        .collect()
}

/// The restricted (or full) primal problem over the columns of a response matrix.
#[derive(Debug, Clone)]
pub struct PrimalObjective {
    pub variant: Variant,
    pub theta: f64,
    cost: Vec<f64>,
    shift: Vec<f64>,
    labels: Vec<i8>,
    /// Column-major `y_i * H[i][j]`.
    signed: Vec<f64>,
    n_cols: usize,
}

impl PrimalObjective {
    pub fn new<R: Responses + ?Sized>(
        variant: Variant,
        theta: f64,
        k: f64,
        labels: &[i8],
        h: &R,
    ) -> Result<Self> {
        Self::with_params(variant, theta, &AsymmetryParams::new(k)?, labels, h)
    }

    pub fn with_params<R: Responses + ?Sized>(
        variant: Variant,
        theta: f64,
        asym: &AsymmetryParams,
        labels: &[i8],
        h: &R,
    ) -> Result<Self> {
        let asym = *asym;
        let cost = CostVector::new(variant, &asym, labels)?;
        let mut obj = PrimalObjective {
            variant,
            theta,
            cost: cost.values,
            shift: loss_shifts(variant, &asym, labels),
            labels: labels.to_vec(),
            signed: Vec::new(),
            n_cols: 0,
        };
        if h.n_rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                what: "response rows",
                expected: labels.len(),
                got: h.n_rows(),
            });
        }
        for j in 0..h.n_cols() {
            obj.push_column(&h.column(j))?;
        }
        Ok(obj)
    }

    /// Objective sharing the loss settings of `state`, over the columns of `h`.
    pub fn for_state<R: Responses + ?Sized>(state: &TrainState, h: &R) -> Result<Self> {
        let mut obj = PrimalObjective {
            variant: state.variant,
            theta: state.theta,
            cost: state.cost.values().to_vec(),
            shift: state.shifts(),
            labels: state.labels.clone(),
            signed: Vec::new(),
            n_cols: 0,
        };
        for j in 0..h.n_cols() {
            obj.push_column(&h.column(j))?;
        }
        Ok(obj)
    }

    pub fn push_column(&mut self, column: &[i8]) -> Result<()> {
        if column.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                what: "response column",
                expected: self.labels.len(),
                got: column.len(),
            });
        }
        self.signed.extend(
            column
                .iter()
                .zip(&self.labels)
                .map(|(&h, &y)| f64::from(h * y)),
        );
        self.n_cols += 1;
        Ok(())
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    fn check_len(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                expected: self.n_cols,
                got: w.len(),
            });
        }
        Ok(())
    }

    fn signed_column(&self, j: usize) -> &[f64] {
        let m = self.labels.len();
        &self.signed[j * m..(j + 1) * m]
    }

    /// Margins `z = y . (H w)`.
    pub fn margins(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w)?;
        let mut z = vec![0.0; self.labels.len()];
        for (j, &wj) in w.iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            for (zi, &a) in z.iter_mut().zip(self.signed_column(j)) {
                *zi += a * wj;
            }
        }
        Ok(z)
    }

    /// Dual weights at the margins produced by `w`.
    pub fn weights_at(&self, w: &[f64]) -> Result<Vec<f64>> {
        let z = self.margins(w)?;
        Ok(self.weights_for_margins(&z))
    }

    fn weights_for_margins(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.shift)
            .zip(&self.cost)
            .map(|((&zi, &s), &c)| scaled_sigmoid_neg(c, zi + s))
            .collect()
    }

    pub fn value(&self, w: &[f64]) -> Result<f64> {
        let z = self.margins(w)?;
        Ok(self.value_at_margins(&z, w))
    }

    fn value_at_margins(&self, z: &[f64], w: &[f64]) -> f64 {
        let loss: f64 = z
            .iter()
            .zip(&self.shift)
            .zip(&self.cost)
            .map(|((&zi, &s), &c)| c * logit_loss(zi + s))
            .sum();
        loss + self.theta * w.iter().sum::<f64>()
    }

    pub fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; w.len()];
        self.value_and_gradient(w, &mut g)?;
        Ok(g)
    }

    /// Objective value; writes `theta - sum_i u_i y_i H[i][j]` into `grad`.
    pub fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.check_len(w)?;
        if grad.len() != w.len() {
            return Err(Error::DimensionMismatch {
                what: "gradient buffer",
                expected: w.len(),
                got: grad.len(),
            });
        }
        let z = self.margins(w)?;
        let u = self.weights_for_margins(&z);
        for (j, g) in grad.iter_mut().enumerate() {
            let edge: f64 = self
                .signed_column(j)
                .iter()
                .zip(&u)
                .map(|(&a, &ui)| a * ui)
                .sum();
            *g = self.theta - edge;
        }
        Ok(self.value_at_margins(&z, w))
    }
}

impl crate::boxsolver::Objective for PrimalObjective {
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.value_and_gradient(x, grad).unwrap_or(f64::NAN)
    }
}
