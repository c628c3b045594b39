//! Single-channel SLH models: validity checks, the Lindblad generator and
//! its trace dual, Heisenberg-Langevin increment coefficients, and the
//! output-field differential.

use crate::linalg::{self, CMatrix, I};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SlhError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("observable is not hermitian (residual {0:.3e})")]
    NonHermitianObservable(f64),
}

pub const MODEL_TOL: f64 = 1e-10;

/// The triple (S, L, H): scattering unitary, collapse operator, Hamiltonian,
/// all on the same system space (one field channel).
#[derive(Debug, Clone)]
pub struct SlhModel {
    s: CMatrix,
    l: CMatrix,
    h: CMatrix,
}

impl SlhModel {
    pub fn new(s: CMatrix, l: CMatrix, h: CMatrix) -> Result<Self, SlhError> {
        let dim = s.nrows();
        for m in [&s, &l, &h] {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(SlhError::DimensionMismatch(m.nrows(), dim));
            }
        }
        Ok(SlhModel { s, l, h })
    }

    /// Emission-absorption model: S = 1.
    pub fn emission_absorption(l: CMatrix, h: CMatrix) -> Result<Self, SlhError> {
        let dim = l.nrows();
        Self::new(linalg::identity(dim), l, h)
    }

    /// Amplitude damping: S = 1, L = √γ σ₋, H = 0.
    pub fn amplitude_damping(gamma: f64) -> Self {
        Self::emission_absorption(
            linalg::sigma_minus().scale(gamma.sqrt()),
            linalg::zeros(2),
        )
        .expect("2x2 shapes agree")
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn s(&self) -> &CMatrix {
        &self.s
    }

    pub fn l(&self) -> &CMatrix {
        &self.l
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            unitarity_residual: linalg::unitarity_residual(&self.s),
            hermiticity_residual: linalg::hermiticity_residual(&self.h),
        }
    }

    /// ||S - 1||, for deciding whether the homodyne filter applies.
    pub fn scattering_residual(&self) -> f64 {
        linalg::norm(&(&self.s - linalg::identity(self.dim())))
    }
}

/// Residual report for the SLH validity requirements S†S = 1 and H = H†.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub unitarity_residual: f64,
    pub hermiticity_residual: f64,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.unitarity_residual <= MODEL_TOL && self.hermiticity_residual <= MODEL_TOL
    }
}

/// Cayley transform S = (1 + iE/2)(1 - iE/2)⁻¹ of a hermitian E; always
/// unitary, the scattering matrix generated by a pure number-coupling.
pub fn cayley_scattering(e: &CMatrix) -> CMatrix {
    let dim = e.nrows();
    let half = e.map(|z| z * I * linalg::cr(0.5));
    let plus = linalg::identity(dim) + &half;
    let minus = linalg::identity(dim) - half;
    plus * minus.try_inverse().expect("1 - iE/2 is invertible for hermitian E")
}

fn check_dim(model: &SlhModel, x: &CMatrix) -> Result<(), SlhError> {
    if x.nrows() != model.dim() || x.ncols() != model.dim() {
        return Err(SlhError::DimensionMismatch(x.nrows(), model.dim()));
    }
    Ok(())
}

/// Lindblad generator LX = ½L†[X,L] + ½[L†,X]L − i[X,H].
/// Conservative (L1 = 0) and hermiticity-preserving.
pub fn lindblad_generator(model: &SlhModel, x: &CMatrix) -> Result<CMatrix, SlhError> {
    check_dim(model, x)?;
    let l = &model.l;
    let ldag = l.adjoint();
    let term1 = (&ldag * linalg::commutator(x, l)).scale(0.5);
    let term2 = (linalg::commutator(&ldag, x) * l).scale(0.5);
    let ham = linalg::commutator(x, &model.h).map(|z| z * I);
    Ok(term1 + term2 - ham)
}

/// Trace dual of the Lindblad generator, assembled in closed form:
/// L*ρ = −i[H,ρ] + LρL† − ½{L†L, ρ}, so that tr((L*ρ)X) = tr(ρ(LX)).
pub fn adjoint_generator(model: &SlhModel, rho: &CMatrix) -> Result<CMatrix, SlhError> {
    check_dim(model, rho)?;
    let l = &model.l;
    let ldag = l.adjoint();
    let ldl = &ldag * l;
    let ham = linalg::commutator(&model.h, rho).map(|z| z * I);
    Ok(l * rho * ldag - linalg::anticommutator(&ldl, rho).scale(0.5) - ham)
}

/// Increment coefficients of the Heisenberg-Langevin equation
/// dj_t(X) = j_t(LX)dt + j_t(S†[X,L])dB* + j_t([L†,X]S)dB
///         + j_t(S†XS − X)dΛ.
#[derive(Debug, Clone)]
pub struct LangevinCoefficients {
    pub drift: CMatrix,
    pub db_coeff: CMatrix,
    pub db_dag_coeff: CMatrix,
    pub dlambda_coeff: CMatrix,
}

pub fn langevin_coefficients(
    model: &SlhModel,
    x: &CMatrix,
) -> Result<LangevinCoefficients, SlhError> {
    check_dim(model, x)?;
    let s = &model.s;
    let l = &model.l;
    Ok(LangevinCoefficients {
        drift: lindblad_generator(model, x)?,
        db_coeff: linalg::commutator(&l.adjoint(), x) * s,
        db_dag_coeff: s.adjoint() * linalg::commutator(x, l),
        dlambda_coeff: s.adjoint() * x * s - x,
    })
}

/// Output field differential dB_out = S dB + L dt. With S = 1 the homodyne
/// observable follows as dY_out = dY_in + (L + L†)dt.
#[derive(Debug, Clone)]
pub struct OutputDifferential {
    pub db_coeff: CMatrix,
    pub dt_coeff: CMatrix,
}

pub fn output_differential(model: &SlhModel) -> OutputDifferential {
    OutputDifferential {
        db_coeff: model.s.clone(),
        dt_coeff: model.l.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        cr, identity, kron, norm, number_op, pauli_x, pauli_z, sigma_minus, zeros,
    };
    use crate::rng::SplitRng;
    use crate::sampling;

    #[test]
    fn validation_examples() {
        let m = SlhModel::new(identity(2), zeros(2), pauli_z()).unwrap();
        assert!(m.validate().passes());

        // constructed violation with ||S†S - 1|| = 0.1 exactly
        let bad_s = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cr(1.1f64.sqrt()),
            cr(1.0),
        ]));
        let m = SlhModel::new(bad_s, zeros(2), zeros(2)).unwrap();
        let report = m.validate();
        assert!(!report.passes());
        assert!((report.unitarity_residual - 0.1).abs() < 1e-12);

        let e = pauli_x().scale(0.7);
        let s = cayley_scattering(&e);
        let m = SlhModel::new(s, zeros(2), zeros(2)).unwrap();
        assert!(m.validate().passes());
    }

    #[test]
    fn lindblad_examples() {
        let gamma = 1.7;
        let model = SlhModel::amplitude_damping(gamma);
        // conservativity
        let l1 = lindblad_generator(&model, &identity(2)).unwrap();
        assert!(norm(&l1) < 1e-12);
        // number operator decays: L(σ₊σ₋) = −γ σ₊σ₋ (2x2 algebra by hand)
        let ln = lindblad_generator(&model, &number_op()).unwrap();
        assert!(norm(&(ln + number_op().scale(gamma))) < 1e-12);
        // closed dynamics
        let model = SlhModel::emission_absorption(zeros(2), pauli_z()).unwrap();
        let x = pauli_x();
        let expected = linalg::commutator(&x, &pauli_z()).map(|z| z * crate::linalg::I * cr(-1.0));
        assert!(norm(&(lindblad_generator(&model, &x).unwrap() - expected)) < 1e-12);
        // hermiticity preservation on a random hermitian observable
        let mut rng = SplitRng::new(5);
        let model = SlhModel::amplitude_damping(0.8);
        let h = sampling::random_hermitian(&mut rng, 2);
        let lh = lindblad_generator(&model, &h).unwrap();
        assert!(linalg::hermiticity_residual(&lh) < 1e-12);
    }

    #[test]
    fn adjoint_duality_and_damping() {
        let mut rng = SplitRng::new(17);
        let model = SlhModel::emission_absorption(
            sampling::ginibre(&mut rng, 3),
            sampling::random_hermitian(&mut rng, 3),
        )
        .unwrap();
        for k in 0..100 {
            let mut r = rng.stream(k);
            let rho = sampling::random_density(&mut r, 3, 0.05);
            let x = sampling::ginibre(&mut r, 3);
            let lhs = (adjoint_generator(&model, rho.matrix()).unwrap() * &x).trace();
            let rhs = (rho.matrix() * lindblad_generator(&model, &x).unwrap()).trace();
            assert!((lhs - rhs).norm() < 1e-12, "duality residual at seed {k}");
            // trace preservation of the dual
            assert!(
                adjoint_generator(&model, rho.matrix()).unwrap().trace().norm() < 1e-12
            );
        }

        // amplitude damping sends |e⟩⟨e| to γ(|g⟩⟨g| − |e⟩⟨e|)
        let gamma = 0.6;
        let model = SlhModel::amplitude_damping(gamma);
        let excited = number_op(); // |1⟩⟨1|
        let out = adjoint_generator(&model, &excited).unwrap();
        let ground = identity(2) - number_op();
        assert!(norm(&(out - (ground - number_op()).scale(gamma))) < 1e-12);

        // diagonal ρ, H = Z, L = 0: commutator vanishes
        let model = SlhModel::emission_absorption(zeros(2), pauli_z()).unwrap();
        let rho = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(0.3), cr(0.7)]));
        assert!(norm(&adjoint_generator(&model, &rho).unwrap()) < 1e-14);
    }

    #[test]
    fn langevin_coefficient_examples() {
        let mut rng = SplitRng::new(23);
        let l = sampling::ginibre(&mut rng, 2);
        let h = sampling::random_hermitian(&mut rng, 2);
        let model = SlhModel::emission_absorption(l.clone(), h).unwrap();
        // X = 1: everything vanishes
        let c = langevin_coefficients(&model, &identity(2)).unwrap();
        assert!(norm(&c.drift) < 1e-12);
        assert!(norm(&c.db_coeff) < 1e-12);
        assert!(norm(&c.db_dag_coeff) < 1e-12);
        assert!(norm(&c.dlambda_coeff) < 1e-14);
        // S = 1: dB* coefficient is [X, L], and the dΛ coefficient vanishes
        let x = sampling::random_hermitian(&mut rng, 2);
        let c = langevin_coefficients(&model, &x).unwrap();
        assert!(norm(&(&c.db_dag_coeff - linalg::commutator(&x, &l))) < 1e-12);
        assert!(norm(&c.dlambda_coeff) < 1e-14);
        // adjoint consistency for hermitian X: (S†[X,L])† = [L†,X]S
        assert!(norm(&(c.db_dag_coeff.adjoint() - &c.db_coeff)) < 1e-12);
        // pure scattering: only the dΛ coefficient S†XS − X survives
        let s = cayley_scattering(&pauli_x());
        let model = SlhModel::new(s.clone(), zeros(2), zeros(2)).unwrap();
        let c = langevin_coefficients(&model, &x).unwrap();
        assert!(norm(&c.drift) < 1e-12);
        assert!(norm(&c.db_coeff) < 1e-12);
        assert!(norm(&c.db_dag_coeff) < 1e-12);
        assert!(norm(&(&c.dlambda_coeff - (s.adjoint() * &x * &s - &x))) < 1e-12);
    }

    #[test]
    fn output_differential_examples() {
        let gamma = 0.5;
        let model = SlhModel::amplitude_damping(gamma);
        let out = output_differential(&model);
        assert!(norm(&(&out.dt_coeff - sigma_minus().scale(gamma.sqrt()))) < 1e-14);
        assert!(norm(&(&out.db_coeff - identity(2))) < 1e-14);
        // no coupling: output = input
        let model = SlhModel::emission_absorption(zeros(2), zeros(2)).unwrap();
        let out = output_differential(&model);
        assert!(norm(&out.dt_coeff) < 1e-14);
        assert!(norm(&(&out.db_coeff - identity(2))) < 1e-14);
    }

    #[test]
    fn wiener_classical_embedding() {
        // L = −iR with R hermitian reproduces the classical-noise generator
        // −i[X,H] − ½[[X,R],R] on random hermitian X.
        let rng = SplitRng::new(31);
        for k in 0..50 {
            let mut r = rng.stream(k);
            let dim = 2 + (k as usize % 3);
            let rr = sampling::random_hermitian(&mut r, dim);
            let h = sampling::random_hermitian(&mut r, dim);
            let l = rr.map(|z| z * crate::linalg::I * cr(-1.0));
            let model = SlhModel::emission_absorption(l, h.clone()).unwrap();
            let x = sampling::random_hermitian(&mut r, dim);
            let got = lindblad_generator(&model, &x).unwrap();
            let expected = linalg::commutator(&x, &h).map(|z| z * crate::linalg::I * cr(-1.0))
                - linalg::commutator(&linalg::commutator(&x, &rr), &rr).scale(0.5);
            assert!(norm(&(got - expected)) < 1e-12, "seed {k}");
        }
    }

    #[test]
    fn poisson_classical_embedding() {
        // pure scattering kick generator S†XS − X
        let s = cayley_scattering(&kron(&pauli_z(), &pauli_x()).scale(0.4));
        let model = SlhModel::new(s.clone(), zeros(4), zeros(4)).unwrap();
        let mut rng = SplitRng::new(37);
        let x = sampling::random_hermitian(&mut rng, 4);
        let kick = langevin_coefficients(&model, &x).unwrap().dlambda_coeff;
        assert!(norm(&(kick - (s.adjoint() * &x * &s - &x))) < 1e-12);
    }

    #[test]
    fn dissipativity() {
        // L(X²) − XL(X) − L(X)X = [L,X]†[L,X] ⪰ 0 for hermitian X.
        let rng = SplitRng::new(41);
        for k in 0..50 {
            let mut r = rng.stream(k);
            let dim = 2 + (k as usize % 3);
            let model = SlhModel::emission_absorption(
                sampling::ginibre(&mut r, dim),
                sampling::random_hermitian(&mut r, dim),
            )
            .unwrap();
            let x = sampling::random_hermitian(&mut r, dim);
            let d = lindblad_generator(&model, &(&x * &x)).unwrap()
                - &x * lindblad_generator(&model, &x).unwrap()
                - lindblad_generator(&model, &x).unwrap() * &x;
            let comm = linalg::commutator(model.l(), &x);
            assert!(norm(&(&d - comm.adjoint() * &comm)) < 1e-10, "seed {k}");
            assert!(linalg::min_eigenvalue(&d) >= -1e-10, "seed {k}");
        }
    }
}
