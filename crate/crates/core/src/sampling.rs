//! Random operators, states, and measurement algebras for property tests and
//! randomized experiment suites. Everything is driven by [`SplitRng`] so
//! instances are reproducible from a seed.

use crate::linalg::{self, CMatrix, CVector, C64};
use crate::qp::{AlgebraSpec, DensityMatrix, QPState};
use crate::rng::SplitRng;

/// Matrix with i.i.d. standard-complex-Gaussian entries.
pub fn ginibre(rng: &mut SplitRng, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.next_gaussian(), rng.next_gaussian())
    })
}

/// Haar-ish random unitary via QR of a Ginibre matrix.
pub fn random_unitary(rng: &mut SplitRng, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim).qr();
    qr.q()
}

pub fn random_hermitian(rng: &mut SplitRng, dim: usize) -> CMatrix {
    let g = ginibre(rng, dim);
    (&g + g.adjoint()).scale(0.5)
}

/// Random density matrix mixed with the tracial floor
/// ρ = (1−floor)·GG†/tr(GG†) + floor·1/d, so the state is faithful and every
/// measurement block keeps non-negligible probability.
pub fn random_density(rng: &mut SplitRng, dim: usize, floor: f64) -> DensityMatrix {
    let g = ginibre(rng, dim);
    let pos = &g * g.adjoint();
    let tr = pos.trace().re;
    let m = pos.scale((1.0 - floor) / tr) + linalg::identity(dim).scale(floor / dim as f64);
    DensityMatrix::with_tolerance(m, 1e-9).expect("construction is valid by design")
}

pub fn random_state(rng: &mut SplitRng, dim: usize) -> QPState {
    QPState::new(random_density(rng, dim, 0.1))
}

pub fn random_unit_vector(rng: &mut SplitRng, dim: usize) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| C64::new(rng.next_gaussian(), rng.next_gaussian()));
        let n = v.norm();
        if n > 1e-6 {
            return v.unscale(n);
        }
    }
}

/// Complete orthogonal projection family: a random unitary applied to a
/// random partition of the basis into at least two blocks (when dim > 1).
pub fn random_projection_family(rng: &mut SplitRng, dim: usize) -> AlgebraSpec {
    let u = random_unitary(rng, dim);
    let mut sizes = Vec::new();
    let mut left = dim;
    while left > 0 {
        let cap = if sizes.is_empty() && dim > 1 { left - 1 } else { left };
        let take = 1 + (rng.next_u64() as usize) % cap;
        sizes.push(take);
        left -= take;
    }
    let mut projections = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for size in sizes {
        let mut p = linalg::zeros(dim);
        for k in start..start + size {
            let col: CVector = u.column(k).into();
            p += linalg::outer(&col, &col);
        }
        projections.push(p);
        start += size;
    }
    AlgebraSpec::new(projections).expect("family is complete and orthogonal by construction")
}

/// Random element of the commutant of {P_a}: Σ_a P_a G P_a for Ginibre G.
pub fn random_commutant_element(rng: &mut SplitRng, alg: &AlgebraSpec) -> CMatrix {
    let g = ginibre(rng, alg.dim());
    compress_to_commutant(&g, alg)
}

/// Block-diagonal compression Σ_a P_a G P_a of an arbitrary matrix.
pub fn compress_to_commutant(g: &CMatrix, alg: &AlgebraSpec) -> CMatrix {
    let mut out = linalg::zeros(alg.dim());
    for p in alg.projections() {
        out += p * g * p;
    }
    out
}

/// Random algebra member Σ_a c_a P_a with complex Gaussian coefficients.
pub fn random_algebra_member(rng: &mut SplitRng, alg: &AlgebraSpec) -> CMatrix {
    let coeffs: Vec<C64> = (0..alg.len())
        .map(|_| C64::new(rng.next_gaussian(), rng.next_gaussian()))
        .collect();
    alg.member(&coeffs)
}
