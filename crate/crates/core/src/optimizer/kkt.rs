//! First- and second-order information of the scaled objective
//! `J̃ = κ Σβ + Σ_n b_n O_n`, with `κ = H_w R / W^UC`, on the free variables
//! of an active set.

use nalgebra::{DMatrix, DVector};

use crate::multicast::{FileSensitivity, MulticastModel};
use crate::specfun::sum::compensated_sum;

/// Role of a file in the current active set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FileState {
    /// Not multicast: `p = 0`, `β = 0`.
    Off,
    /// Multicast with a free cache weight in (0, 1).
    Free,
    /// Multicast and cached by every HN (`p = 1`).
    Full,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ActiveSet {
    pub states: Vec<FileState>,
    /// Whether `Σ p = M` is enforced as an equality.
    pub capacity_binding: bool,
}

impl ActiveSet {
    pub fn all_off(n: usize) -> Self {
        ActiveSet {
            states: vec![FileState::Off; n],
            capacity_binding: false,
        }
    }

    pub fn on(&self) -> impl Iterator<Item = usize> + '_ {
        self.states.iter().enumerate().filter(|(_, s)| **s != FileState::Off).map(|(i, _)| i)
    }

    pub fn count(&self, state: FileState) -> usize {
        self.states.iter().filter(|s| **s == state).count()
    }

    /// Indices clamped at a bound (`Off` or `Full`).
    pub fn clamped(&self) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != FileState::Free)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Mapping between files and positions in the KKT vectors:
/// `[β of on files, p of free files, v if the capacity binds]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub beta_idx: Vec<usize>,
    pub p_idx: Vec<usize>,
    pub capacity: bool,
}

impl Layout {
    pub fn new(set: &ActiveSet) -> Self {
        let beta_idx: Vec<usize> = set.on().collect();
        let p_idx: Vec<usize> = set
            .states
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == FileState::Free)
            .map(|(i, _)| i)
            .collect();
        let capacity = set.capacity_binding && !p_idx.is_empty();
        Layout {
            beta_idx,
            p_idx,
            capacity,
        }
    }

    /// Number of primal unknowns.
    pub fn dim(&self) -> usize {
        self.beta_idx.len() + self.p_idx.len()
    }

    /// Size of the bordered system.
    pub fn size(&self) -> usize {
        self.dim() + usize::from(self.capacity)
    }

    /// Capacity constraint normal: ones on the free `p` entries.
    pub fn capacity_normal(&self) -> DVector<f64> {
        let mut a = DVector::zeros(self.dim());
        for k in 0..self.p_idx.len() {
            a[self.beta_idx.len() + k] = 1.0;
        }
        a
    }

    pub fn gather(&self, p: &[f64], beta: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.beta_idx.iter().map(|&i| beta[i]).chain(self.p_idx.iter().map(|&i| p[i])),
        )
    }

    pub fn scatter(&self, x: &DVector<f64>, p: &mut [f64], beta: &mut [f64]) {
        let nb = self.beta_idx.len();
        for (k, &i) in self.beta_idx.iter().enumerate() {
            beta[i] = x[k];
        }
        for (k, &i) in self.p_idx.iter().enumerate() {
            p[i] = x[nb + k];
        }
    }
}

/// Sensitivities of every file at one point.
#[derive(Debug, Clone)]
pub struct LocalModel {
    pub sens: Vec<FileSensitivity>,
    pub beta_sum: f64,
}

impl LocalModel {
    pub fn at(model: &MulticastModel, p: &[f64], beta: &[f64]) -> crate::Result<Self> {
        Ok(LocalModel {
            sens: model.sensitivities(p, beta)?,
            beta_sum: compensated_sum(beta.iter().copied()),
        })
    }

    pub fn outage(&self, n: usize) -> f64 {
        self.sens[n].outage()
    }

    /// `Σ_n w_n O_n`
    pub fn weighted_outage(&self, weights: &[f64]) -> f64 {
        compensated_sum(self.sens.iter().zip(weights).map(|(s, w)| w * s.outage()))
    }

    /// `Σ_n w_n ∂O_n/∂β_i` for on file `i`.
    fn beta_gradient(&self, weights: &[f64], shared: f64, i: usize) -> f64 {
        let s = &self.sens[i];
        shared + weights[i] * (s.d_beta(true) - s.d_beta(false))
    }

    /// `Σ_n w_n ∂O_n/∂β_m` for any m ≠ n: the common effect of `Σβ`.
    fn shared_beta_gradient(&self, weights: &[f64]) -> f64 {
        compensated_sum(self.sens.iter().zip(weights).map(|(s, w)| w * s.d_beta(false)))
    }

    /// Gradient of `Σ w_n O_n` (without the bandwidth cost) on the layout.
    pub fn outage_gradient(&self, layout: &Layout, weights: &[f64]) -> DVector<f64> {
        let shared = self.shared_beta_gradient(weights);
        let nb = layout.beta_idx.len();
        let mut g = DVector::zeros(layout.dim());
        for (k, &i) in layout.beta_idx.iter().enumerate() {
            g[k] = self.beta_gradient(weights, shared, i);
        }
        for (k, &i) in layout.p_idx.iter().enumerate() {
            g[nb + k] = weights[i] * self.sens[i].d_p();
        }
        g
    }

    /// Gradient of `J̃`.
    pub fn gradient(&self, layout: &Layout, b: &[f64], kappa: f64) -> DVector<f64> {
        let mut g = self.outage_gradient(layout, b);
        for k in 0..layout.beta_idx.len() {
            g[k] += kappa;
        }
        g
    }

    /// Hessian of `J̃` (the bandwidth cost is linear and drops out).
    pub fn hessian(&self, layout: &Layout, b: &[f64]) -> DMatrix<f64> {
        let nb = layout.beta_idx.len();
        let dim = layout.dim();
        let mut h = DMatrix::zeros(dim, dim);
        let ff: Vec<f64> = self.sens.iter().zip(b).map(|(s, w)| w * s.d_beta_beta(false, false)).collect();
        let total_ff = compensated_sum(ff.iter().copied());
        for (ki, &i) in layout.beta_idx.iter().enumerate() {
            let si = &self.sens[i];
            for (kj, &j) in layout.beta_idx.iter().enumerate().skip(ki) {
                let v = if i == j {
                    total_ff - ff[i] + b[i] * si.d_beta_beta(true, true)
                } else {
                    let sj = &self.sens[j];
                    total_ff - ff[i] - ff[j] + b[i] * si.d_beta_beta(true, false) + b[j] * sj.d_beta_beta(false, true)
                };
                h[(ki, kj)] = v;
                h[(kj, ki)] = v;
            }
        }
        for (kp, &j) in layout.p_idx.iter().enumerate() {
            let sj = &self.sens[j];
            for (kb, &i) in layout.beta_idx.iter().enumerate() {
                let v = b[j] * sj.d_p_beta(i == j);
                h[(kb, nb + kp)] = v;
                h[(nb + kp, kb)] = v;
            }
            h[(nb + kp, nb + kp)] = b[j] * sj.d_pp();
        }
        h
    }

    /// Price of one unit of `β` through its cost and the shared noise
    /// bandwidth: `μ = κ + Σ_n b_n ∂O_n/∂Σβ`.
    pub fn bandwidth_price(&self, b: &[f64], kappa: f64) -> f64 {
        kappa + self.shared_beta_gradient(b)
    }
}

/// Bordered matrix `[[H, a], [aᵀ, 0]]`, or `H` alone when the capacity is
/// not enforced.
pub fn bordered(layout: &Layout, h: &DMatrix<f64>) -> DMatrix<f64> {
    if !layout.capacity {
        return h.clone();
    }
    let dim = layout.dim();
    let mut k = DMatrix::zeros(dim + 1, dim + 1);
    k.view_mut((0, 0), (dim, dim)).copy_from(h);
    let a = layout.capacity_normal();
    for r in 0..dim {
        k[(r, dim)] = a[r];
        k[(dim, r)] = a[r];
    }
    k
}

/// Whether `H` is positive definite on the tangent space of the capacity
/// constraint, tested by Cholesky of `H + c aaᵀ` with a large `c`.
pub fn reduced_positive_definite(layout: &Layout, h: &DMatrix<f64>) -> bool {
    let mut m = h.clone();
    if layout.capacity {
        let a = layout.capacity_normal();
        let c = 1e3 * h.amax().max(1e-300);
        m += c * &a * a.transpose();
    }
    m.cholesky().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    fn sample_point() -> (MulticastModel, Vec<f64>, Vec<f64>, Vec<f64>) {
        let s = Scenario::reference();
        let model = MulticastModel::new(&s);
        let p = vec![0.3, 0.2, 0.5, 0.0];
        let beta = vec![0.12, 0.09, 0.15, 0.0];
        let b = vec![0.4, 0.3, 0.2, 0.1];
        (model, p, beta, b)
    }

    fn objective(model: &MulticastModel, p: &[f64], beta: &[f64], b: &[f64]) -> f64 {
        let o = model.per_file_outage(p, beta).unwrap();
        compensated_sum(o.iter().zip(b).map(|(o, b)| o * b))
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let (model, p, beta, b) = sample_point();
        let set = ActiveSet {
            states: vec![FileState::Free, FileState::Free, FileState::Free, FileState::Off],
            capacity_binding: true,
        };
        let layout = Layout::new(&set);
        let local = LocalModel::at(&model, &p, &beta).unwrap();
        let g = local.outage_gradient(&layout, &b);
        let h = local.hessian(&layout, &b);
        let x0 = layout.gather(&p, &beta);
        let f = |x: &DVector<f64>| {
            let (mut pp, mut bb) = (p.clone(), beta.clone());
            layout.scatter(x, &mut pp, &mut bb);
            objective(&model, &pp, &bb, &b)
        };
        let grad_at = |x: &DVector<f64>| {
            let (mut pp, mut bb) = (p.clone(), beta.clone());
            layout.scatter(x, &mut pp, &mut bb);
            LocalModel::at(&model, &pp, &bb).unwrap().outage_gradient(&layout, &b)
        };
        let step = 1e-5;
        for k in 0..layout.dim() {
            let mut xp = x0.clone();
            let mut xm = x0.clone();
            xp[k] += step;
            xm[k] -= step;
            let fd = (f(&xp) - f(&xm)) / (2.0 * step);
            assert!((fd - g[k]).abs() < 1e-6 * g[k].abs().max(1e-3), "grad {k}: {fd} vs {}", g[k]);
            let col = (grad_at(&xp) - grad_at(&xm)) / (2.0 * step);
            for r in 0..layout.dim() {
                let tol = 1e-4 * h[(r, k)].abs().max(1e-2);
                assert!((col[r] - h[(r, k)]).abs() < tol, "hess ({r},{k}): {} vs {}", col[r], h[(r, k)]);
            }
        }
    }

    #[test]
    fn bordered_layout() {
        let set = ActiveSet {
            states: vec![FileState::Full, FileState::Free, FileState::Off],
            capacity_binding: true,
        };
        let layout = Layout::new(&set);
        assert_eq!(layout.beta_idx, vec![0, 1]);
        assert_eq!(layout.p_idx, vec![1]);
        assert_eq!(layout.size(), 4);
        let k = bordered(&layout, &DMatrix::identity(3, 3));
        assert_eq!(k[(3, 2)], 1.0);
        assert_eq!(k[(3, 0)], 0.0);
    }
}
