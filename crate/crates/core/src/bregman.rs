//! ℓ1 proximal machinery: soft-thresholding, sub-gradient selection,
//! Bregman distance and exact non-zero accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProxKind {
    None,
    L1,
}

/// Regulariser `J(θ) = λ‖θ‖₁`, or nothing.
///
/// Equality compares the effective threshold, so `None` and `L1(0)` are equal.
#[derive(Clone, Copy, Debug)]
pub struct ProxSpec {
    pub kind: ProxKind,
    pub lambda: f64,
}

impl ProxSpec {
    pub fn none() -> Self {
        Self {
            kind: ProxKind::None,
            lambda: 0.0,
        }
    }

    pub fn l1(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            kind: ProxKind::L1,
            lambda,
        })
    }

    /// Threshold actually applied; `None` acts as `λ = 0`.
    pub fn effective_lambda(&self) -> f64 {
        match self.kind {
            ProxKind::None => 0.0,
            ProxKind::L1 => self.lambda,
        }
    }

    pub fn prox(&self, v: &Tensor) -> Tensor {
        soft_threshold_unchecked(v, self.effective_lambda())
    }

    /// `J(x)`.
    pub fn value(&self, x: &Tensor) -> f64 {
        self.effective_lambda() * x.data().iter().map(|v| v.abs()).sum::<f64>()
    }
}

impl PartialEq for ProxSpec {
    fn eq(&self, other: &Self) -> bool {
        self.effective_lambda() == other.effective_lambda()
    }
}

impl Default for ProxSpec {
    fn default() -> Self {
        Self::none()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Scalar soft-thresholding. Returns a literal `0.0` whenever `|v| <= λ`.
#[inline]
pub fn shrink(v: f64, lambda: f64) -> f64 {
    if v.abs() <= lambda {
        0.0
    } else {
        v - lambda.copysign(v)
    }
}

/// Elementwise `sign(v)·max(0, |v| − λ)`.
pub fn soft_threshold(v: &Tensor, lambda: f64) -> Result<Tensor> {
    check_lambda(lambda)?;
    Ok(soft_threshold_unchecked(v, lambda))
}

fn soft_threshold_unchecked(v: &Tensor, lambda: f64) -> Tensor {
    v.map(|x| shrink(x, lambda))
}

/// `λ·sign(y)` with the selection `0` at `y = 0`.
pub fn subgradient_l1(y: &Tensor, lambda: f64) -> Tensor {
    y.map(|v| {
        if v > 0.0 {
            lambda
        } else if v < 0.0 {
            -lambda
        } else {
            0.0
        }
    })
}

/// `D_J(x, y) = J(x) − J(y) − ⟨p, x − y⟩` with `p = subgradient_l1(y)`.
///
/// Diagnostic only; optimizer updates never consult it.
pub fn bregman_distance(prox: &ProxSpec, x: &Tensor, y: &Tensor) -> Result<f64> {
    let diff = x.sub(y)?;
    let p = subgradient_l1(y, prox.effective_lambda());
    Ok(prox.value(x) - prox.value(y) - p.dot(&diff)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSparsity {
    pub name: String,
    pub total: usize,
    pub nonzero: usize,
}

/// Per-group and network-wide non-zero counts.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparsityReport {
    pub groups: Vec<GroupSparsity>,
    pub total: usize,
    pub nonzero: usize,
}

impl SparsityReport {
    pub fn nonzero_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.nonzero as f64 / self.total as f64
        }
    }

    /// `group,total,nonzero` rows followed by a `TOTAL` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,total,nonzero\n");
        for g in &self.groups {
            out.push_str(&format!("{},{},{}\n", g.name, g.total, g.nonzero));
        }
        out.push_str(&format!("TOTAL,{},{}\n", self.total, self.nonzero));
        out
    }

    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let width = self
            .groups
            .iter()
            .map(|g| g.name.len())
            .max()
            .unwrap_or(0)
            .max(5);
        let mut out = format!(
            "{:<width$}  {:>9}  {:>9}  {:>8}\n",
            "group", "total", "nonzero", "fraction"
        );
        let row = |name: &str, total: usize, nonzero: usize| {
            let frac = if total == 0 {
                0.0
            } else {
                nonzero as f64 / total as f64
            };
            format!("{name:<width$}  {total:>9}  {nonzero:>9}  {frac:>8.4}\n")
        };
        for g in &self.groups {
            out.push_str(&row(&g.name, g.total, g.nonzero));
        }
        out.push_str(&row("TOTAL", self.total, self.nonzero));
        out
    }
}

pub fn sparsity_report<'a, I, S>(groups: I) -> SparsityReport
where
    I: IntoIterator<Item = (S, &'a Tensor)>,
    S: Into<String>,
{
    let groups: Vec<GroupSparsity> = groups
        .into_iter()
        .map(|(name, t)| GroupSparsity {
            name: name.into(),
            total: t.len(),
            nonzero: t.count_nonzero(),
        })
        .collect();
    SparsityReport {
        total: groups.iter().map(|g| g.total).sum(),
        nonzero: groups.iter().map(|g| g.nonzero).sum(),
        groups,
    }
}
