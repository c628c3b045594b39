//! Non-demolition check on a repeat-interaction truncation.
//!
//! The continuum field over [0, T] is replaced by one qubit per time slot of
//! duration τ = T/m. Slot k couples to the system through the unitary
//! exp(√τ(L⊗σ₊ − L†⊗σ₋) − iτ H) — the emission-absorption interaction with
//! ΔB ≈ √τ σ₋ — and the input quadrature up to time s is
//! Y_in(s) = √τ Σ_{j≤k} σx_j. Times inside a slot are handled by linearly
//! scaling the slot generator and quadrature with the elapsed fraction; this
//! partial-slot interpolation is exactly where the truncation gives up:
//! the commutator [j_t(X), Y_out(s)] vanishes identically when both times
//! sit on slot boundaries and is O(τ) otherwise, shrinking as the slots
//! refine.

use super::BelavkinError;
use crate::linalg::{self, CMatrix, I};
use crate::slh::SlhModel;

#[derive(Debug, Clone)]
pub struct NondemolitionReport {
    /// max over evaluated pairs (t > s) of the spectral norm
    /// ||[j_t(X), Y_out(s)]||. (Frobenius norms would grow with the slot
    /// count through the identity factors; the operator norm is the
    /// dimension-free measure of the truncation defect.)
    pub max_residual: f64,
    /// First-order heuristic bound on the partial-slot truncation error.
    pub error_bound: f64,
    pub pairs_evaluated: usize,
    pub slot_duration: f64,
}

const MAX_SLOTS: usize = 10;
const BOUNDARY_EPS: f64 = 1e-12;

struct Truncation {
    sys_dim: usize,
    slots: usize,
    tau: f64,
    /// Two-site slot generator on system ⊗ qubit (anti-Hermitian).
    slot_generator: CMatrix,
    /// Prefix products U_k … U_1 on the full space, k = 0..=slots.
    prefixes: Vec<CMatrix>,
}

impl Truncation {
    fn full_dim(&self) -> usize {
        self.sys_dim << self.slots
    }

    /// Embed a two-site operator W acting on (system, slot j) into the full
    /// space sys ⊗ q_1 ⊗ … ⊗ q_m (slot 1 owns the highest field bit).
    fn embed_pair(&self, w: &CMatrix, slot: usize) -> CMatrix {
        let m = self.slots;
        let bit = m - slot; // bit position of slot j (1-based)
        let dim = self.full_dim();
        let field = 1usize << m;
        let mut out = CMatrix::zeros(dim, dim);
        for s_row in 0..self.sys_dim {
            for s_col in 0..self.sys_dim {
                for b_row in 0..field {
                    let rest_row = b_row & !(1 << bit);
                    let q_row = (b_row >> bit) & 1;
                    for q_col in 0..2 {
                        let b_col = rest_row | (q_col << bit);
                        let v = w[(s_row * 2 + q_row, s_col * 2 + q_col)];
                        if v != linalg::ZERO {
                            out[(s_row * field + b_row, s_col * field + b_col)] = v;
                        }
                    }
                }
            }
        }
        out
    }

    /// X ⊗ 1_field.
    fn embed_system(&self, x: &CMatrix) -> CMatrix {
        linalg::kron(x, &linalg::identity(1 << self.slots))
    }

    /// σx on slot j ⊗ identity elsewhere.
    fn quadrature_slot(&self, slot: usize) -> CMatrix {
        let w = linalg::kron(&linalg::identity(self.sys_dim), &linalg::pauli_x());
        self.embed_pair(&w, slot)
    }

    fn locate(&self, time: f64, t_total: f64) -> Result<(usize, f64), BelavkinError> {
        if !(0.0..=t_total + BOUNDARY_EPS).contains(&time) {
            return Err(BelavkinError::InvalidTimeGrid(format!(
                "time {time} outside [0, {t_total}]"
            )));
        }
        let pos = time / self.tau;
        let mut k = pos.floor() as usize;
        let mut f = pos - k as f64;
        if f < BOUNDARY_EPS {
            f = 0.0;
        } else if f > 1.0 - BOUNDARY_EPS {
            k += 1;
            f = 0.0;
        }
        if k > self.slots {
            return Err(BelavkinError::InvalidTimeGrid(format!(
                "time {time} beyond the last slot"
            )));
        }
        Ok((k, f))
    }

    /// U(t): full slots 1..k then a partial factor exp(f·A) on slot k+1.
    fn unitary_at(&self, time: f64, t_total: f64) -> Result<CMatrix, BelavkinError> {
        let (k, f) = self.locate(time, t_total)?;
        if f == 0.0 {
            return Ok(self.prefixes[k].clone());
        }
        let partial = linalg::antihermitian_exp(&self.slot_generator.scale(f));
        Ok(self.embed_pair(&partial, k + 1) * &self.prefixes[k])
    }

    /// Y_in(s) = √τ (Σ_{j ≤ k} σx_j + f σx_{k+1}).
    fn input_quadrature(&self, time: f64, t_total: f64) -> Result<CMatrix, BelavkinError> {
        let (k, f) = self.locate(time, t_total)?;
        let dim = self.full_dim();
        let mut q = CMatrix::zeros(dim, dim);
        for j in 1..=k {
            q += self.quadrature_slot(j);
        }
        if f > 0.0 {
            q += self.quadrature_slot(k + 1).scale(f);
        }
        Ok(q.scale(self.tau.sqrt()))
    }
}

/// Evaluate max_{t > s} ||[j_t(X), Y_out(s)]|| on the truncated model.
///
/// Pairs with t ≤ s are rejected: if the grids produce no evaluable pair the
/// call errors. The reported `error_bound` is the first-order partial-slot
/// estimate 2‖X‖‖L‖τ(1 + ‖L‖√τ + ‖H‖τ); the call fails with
/// `TruncationTooCoarse` when it exceeds `tol`.
pub fn nondemolition_check(
    model: &SlhModel,
    x: &CMatrix,
    t_grid: &[f64],
    s_grid: &[f64],
    slots: usize,
    t_total: f64,
    tol: f64,
) -> Result<NondemolitionReport, BelavkinError> {
    if slots == 0 || slots > MAX_SLOTS {
        return Err(BelavkinError::BadArguments(format!(
            "slots = {slots} outside 1..={MAX_SLOTS}"
        )));
    }
    if t_total <= 0.0 {
        return Err(BelavkinError::BadArguments(format!("t_total = {t_total}")));
    }
    let scattering = model.scattering_residual();
    if scattering > super::SCATTERING_TOL {
        return Err(BelavkinError::ScatteringNotSupported(scattering));
    }
    let d = model.dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(BelavkinError::DimensionMismatch(x.nrows(), d));
    }
    if linalg::hermiticity_residual(x) > 1e-10 {
        return Err(BelavkinError::BadArguments(
            "observable must be hermitian".into(),
        ));
    }

    let tau = t_total / slots as f64;
    let l = model.l();
    let coupling = linalg::kron(l, &linalg::sigma_plus())
        - linalg::kron(&l.adjoint(), &linalg::sigma_minus());
    let slot_generator = coupling.scale(tau.sqrt())
        - linalg::kron(model.h(), &linalg::identity(2)).map(|z| z * I * linalg::cr(tau));

    let mut trunc = Truncation {
        sys_dim: d,
        slots,
        tau,
        slot_generator,
        prefixes: Vec::new(),
    };
    let slot_unitary = linalg::antihermitian_exp(&trunc.slot_generator);
    let mut prefixes = Vec::with_capacity(slots + 1);
    prefixes.push(linalg::identity(trunc.full_dim()));
    for k in 1..=slots {
        let u_k = trunc.embed_pair(&slot_unitary, k);
        let prev = prefixes.last().unwrap();
        prefixes.push(&u_k * prev);
    }
    trunc.prefixes = prefixes;

    let lnorm = linalg::norm(l);
    let hnorm = linalg::norm(model.h());
    let xnorm = linalg::norm(x);
    let error_bound = 2.0 * xnorm * lnorm * tau * (1.0 + lnorm * tau.sqrt() + hnorm * tau);
    if error_bound > tol {
        return Err(BelavkinError::TruncationTooCoarse {
            bound: error_bound,
            tol,
        });
    }

    let x_full = trunc.embed_system(x);
    let mut max_residual: f64 = 0.0;
    let mut pairs = 0;
    for &s in s_grid {
        let u_s = trunc.unitary_at(s, t_total)?;
        let y_out = u_s.adjoint() * trunc.input_quadrature(s, t_total)? * &u_s;
        for &t in t_grid {
            if t <= s + BOUNDARY_EPS {
                continue;
            }
            let u_t = trunc.unitary_at(t, t_total)?;
            let j_t = u_t.adjoint() * &x_full * u_t;
            // j_t(X) and Y_out are hermitian, so the commutator is
            // anti-hermitian and its spectral norm is the largest
            // |eigenvalue| of i[.,.].
            let herm = linalg::commutator(&j_t, &y_out).map(|z| z * I);
            let (eigs, _) = linalg::hermitian_eigen(&herm);
            let residual = eigs.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
            max_residual = max_residual.max(residual);
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(BelavkinError::InvalidTimeGrid(
            "no pair with t > s; the check requires the observable time to follow the record time"
                .into(),
        ));
    }
    Ok(NondemolitionReport {
        max_residual,
        error_bound,
        pairs_evaluated: pairs,
        slot_duration: tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{number_op, pauli_z, zeros};

    #[test]
    fn uncoupled_system_commutes() {
        // L = 0: the unitary never touches the field, so the commutator is
        // structurally zero (exact up to eigensolver rounding).
        let model = SlhModel::emission_absorption(zeros(2), pauli_z()).unwrap();
        let rep = nondemolition_check(
            &model,
            &number_op(),
            &[0.7 * 0.02],
            &[0.35 * 0.02],
            2,
            0.02,
            0.05,
        )
        .unwrap();
        assert!(rep.max_residual < 1e-13, "residual {}", rep.max_residual);
    }

    #[test]
    fn weak_coupling_residual_small_and_refining() {
        // γ·τ = 0.01 at m = 2 slots. With s = T/3 and t = 2T/3 the slot
        // fractions alternate between 1/3 and 2/3 under dyadic refinement,
        // so the partial-slot factor f(1−f) is constant and the residual
        // scales cleanly with τ.
        let t_total = 0.02;
        let model = SlhModel::amplitude_damping(1.0);
        let x = number_op();
        let t_grid = [2.0 * t_total / 3.0];
        let s_grid = [t_total / 3.0];
        let residual = |slots: usize| {
            nondemolition_check(&model, &x, &t_grid, &s_grid, slots, t_total, 0.05)
                .unwrap()
                .max_residual
        };
        let r2 = residual(2);
        let r4 = residual(4);
        let r8 = residual(8);
        assert!(r2 <= 1e-2, "residual at m=2: {r2}");
        assert!(r2 > 0.0);
        assert!(r4 < 0.7 * r2, "r2 = {r2}, r4 = {r4}");
        assert!(r8 < 0.7 * r4, "r4 = {r4}, r8 = {r8}");
    }

    #[test]
    fn boundary_times_commute_up_to_rounding() {
        let t_total = 0.02;
        let model = SlhModel::amplitude_damping(1.0);
        let rep = nondemolition_check(
            &model,
            &number_op(),
            &[t_total],
            &[t_total / 2.0],
            2,
            t_total,
            0.05,
        )
        .unwrap();
        assert!(rep.max_residual < 1e-13, "residual {}", rep.max_residual);
    }

    #[test]
    fn rejects_bad_grids_and_coarse_truncations() {
        let model = SlhModel::amplitude_damping(1.0);
        let x = number_op();
        // s > t: no evaluable pair
        assert!(matches!(
            nondemolition_check(&model, &x, &[0.005], &[0.015], 2, 0.02, 0.05),
            Err(BelavkinError::InvalidTimeGrid(_))
        ));
        // bound exceeds the requested tolerance
        assert!(matches!(
            nondemolition_check(&model, &x, &[0.015], &[0.005], 2, 0.02, 1e-3),
            Err(BelavkinError::TruncationTooCoarse { .. })
        ));
        // time outside the horizon
        assert!(matches!(
            nondemolition_check(&model, &x, &[0.05], &[0.005], 2, 0.02, 0.05),
            Err(BelavkinError::InvalidTimeGrid(_))
        ));
    }
}
