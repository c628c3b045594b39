//! Symbolic quantum Ito calculus.
//!
//! Expressions are formal sums of monomials `w · ν^{k/2} · s₁s₂… · dξ` where
//! `w` is a complex scalar, `ν` the Poisson intensity, the `sᵢ` are
//! noncommuting coefficient symbols (adapted processes, so they commute with
//! the increments but not with each other), and `dξ` is at most one
//! fundamental increment among `dt, dB, dB*, dΛ`.
//!
//! The multiplication table for the fundamental increments (row·column) is
//!
//! ```text
//! x    | dt  dB  dB*  dL
//! -----+------------------
//! dt   | 0   0   0    0
//! dB   | 0   0   dt   dB
//! dB*  | 0   0   0    0
//! dL   | 0   0   dB*  dL
//! ```
//!
//! exactly the Hudson-Parthasarathy rules: only out-of-Wick-order pairs
//! survive. The classical increments are aliases expanded before any product
//! is taken: `dW = dQ = dB + dB*` (the vacuum quadrature) and
//! `dN = dL + √ν dB* + √ν dB + ν dt`. Products of expressions distribute
//! monomial by monomial, resolve increment pairs through the table, and are
//! returned in canonical form (like monomials merged, zero weights dropped,
//! increments ordered dt < dB < dB* < dL), which makes symbolic equality a
//! plain structural comparison.

mod parser;

pub use parser::{parse_ito_expr, SyntaxError};

use crate::linalg::{self, CMatrix, C64, I, ONE};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ItoError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("unbound coefficient symbol `{0}`")]
    UnboundSymbol(String),
    #[error("expression contains the Poisson intensity nu but no numeric value was bound")]
    UnboundNu,
    #[error("bound matrices have mismatched dimensions: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Stochastic increment kinds. `Dt, Db, DbDag, DLambda` are fundamental;
/// `Dw, Dn, Dq, Dp` are aliases expanded at construction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Increment {
    Dt,
    Db,
    DbDag,
    DLambda,
    Dw,
    Dn,
    Dq,
    Dp,
}

impl Increment {
    pub fn is_fundamental(self) -> bool {
        matches!(self, Increment::Dt | Increment::Db | Increment::DbDag | Increment::DLambda)
    }

    fn token(self) -> &'static str {
        match self {
            Increment::Dt => "dt",
            Increment::Db => "dB",
            Increment::DbDag => "dB*",
            Increment::DLambda => "dL",
            Increment::Dw => "dW",
            Increment::Dn => "dN",
            Increment::Dq => "dQ",
            Increment::Dp => "dP",
        }
    }
}

/// One occurrence of a coefficient symbol, possibly adjointed.
/// Adjoint is involutive: starring twice gives the symbol back.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolFactor {
    pub name: String,
    pub dagger: bool,
}

impl SymbolFactor {
    pub fn new(name: impl Into<String>) -> Self {
        SymbolFactor {
            name: name.into(),
            dagger: false,
        }
    }

    pub fn adjoint(&self) -> Self {
        SymbolFactor {
            name: self.name.clone(),
            dagger: !self.dagger,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ItoMonomial {
    pub weight: C64,
    /// Power of √ν carried by the monomial (0 for none, 2 for ν, …).
    pub nu_half_power: u32,
    /// Ordered product of coefficient symbols (noncommuting).
    pub coeff: Vec<SymbolFactor>,
    /// At most one fundamental increment.
    pub increment: Option<Increment>,
}

impl ItoMonomial {
    fn key(&self) -> (u8, &[SymbolFactor], u32) {
        let inc = match self.increment {
            None => 0,
            Some(Increment::Dt) => 1,
            Some(Increment::Db) => 2,
            Some(Increment::DbDag) => 3,
            Some(Increment::DLambda) => 4,
            Some(other) => unreachable!("alias {other:?} in canonical monomial"),
        };
        (inc, &self.coeff, self.nu_half_power)
    }
}

/// Formal sum of monomials in canonical form.
#[derive(Debug, Clone)]
pub struct ItoExpr {
    monomials: Vec<ItoMonomial>,
}

impl PartialEq for ItoExpr {
    fn eq(&self, other: &Self) -> bool {
        if self.monomials.len() != other.monomials.len() {
            return false;
        }
        self.monomials.iter().zip(&other.monomials).all(|(a, b)| {
            a.key() == b.key() && a.weight == b.weight
        })
    }
}

impl ItoExpr {
    pub fn zero() -> Self {
        ItoExpr { monomials: vec![] }
    }

    pub fn scalar(w: C64) -> Self {
        ItoExpr {
            monomials: vec![ItoMonomial {
                weight: w,
                nu_half_power: 0,
                coeff: vec![],
                increment: None,
            }],
        }
        .canonicalized()
    }

    /// ν as an expression factor.
    pub fn nu() -> Self {
        ItoExpr {
            monomials: vec![ItoMonomial {
                weight: ONE,
                nu_half_power: 2,
                coeff: vec![],
                increment: None,
            }],
        }
    }

    pub fn symbol(name: impl Into<String>) -> Self {
        ItoExpr {
            monomials: vec![ItoMonomial {
                weight: ONE,
                nu_half_power: 0,
                coeff: vec![SymbolFactor::new(name)],
                increment: None,
            }],
        }
    }

    fn fundamental(kind: Increment) -> Self {
        ItoExpr {
            monomials: vec![ItoMonomial {
                weight: ONE,
                nu_half_power: 0,
                coeff: vec![],
                increment: Some(kind),
            }],
        }
    }

    /// Build an increment expression; classical aliases expand immediately:
    /// dW and dQ become dB + dB*, dP becomes -i dB + i dB*, and dN becomes
    /// dL + √ν dB* + √ν dB + ν dt.
    pub fn increment(kind: Increment) -> Self {
        match kind {
            k if k.is_fundamental() => Self::fundamental(k),
            Increment::Dw | Increment::Dq => {
                Self::fundamental(Increment::Db).add(&Self::fundamental(Increment::DbDag))
            }
            Increment::Dp => Self::fundamental(Increment::Db)
                .scale(-I)
                .add(&Self::fundamental(Increment::DbDag).scale(I)),
            Increment::Dn => {
                let sqrt_nu = |inc| ItoExpr {
                    monomials: vec![ItoMonomial {
                        weight: ONE,
                        nu_half_power: 1,
                        coeff: vec![],
                        increment: Some(inc),
                    }],
                };
                Self::fundamental(Increment::DLambda)
                    .add(&sqrt_nu(Increment::DbDag))
                    .add(&sqrt_nu(Increment::Db))
                    .add(&ItoExpr {
                        monomials: vec![ItoMonomial {
                            weight: ONE,
                            nu_half_power: 2,
                            coeff: vec![],
                            increment: Some(Increment::Dt),
                        }],
                    })
            }
            _ => unreachable!(),
        }
    }

    pub fn monomials(&self) -> &[ItoMonomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    fn canonicalized(mut self) -> Self {
        self.monomials.sort_by(|a, b| {
            let (ia, ca, na) = a.key();
            let (ib, cb, nb) = b.key();
            ia.cmp(&ib).then_with(|| ca.cmp(cb)).then_with(|| na.cmp(&nb))
        });
        let mut out: Vec<ItoMonomial> = Vec::with_capacity(self.monomials.len());
        for m in self.monomials {
            if let Some(last) = out.last_mut() {
                if last.key() == m.key() {
                    last.weight += m.weight;
                    continue;
                }
            }
            out.push(m);
        }
        out.retain(|m| m.weight.re != 0.0 || m.weight.im != 0.0);
        ItoExpr { monomials: out }
    }

    pub fn add(&self, other: &ItoExpr) -> ItoExpr {
        let mut monomials = self.monomials.clone();
        monomials.extend(other.monomials.iter().cloned());
        ItoExpr { monomials }.canonicalized()
    }

    pub fn sub(&self, other: &ItoExpr) -> ItoExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ItoExpr {
        self.scale(-ONE)
    }

    pub fn scale(&self, w: C64) -> ItoExpr {
        let monomials = self
            .monomials
            .iter()
            .map(|m| ItoMonomial {
                weight: m.weight * w,
                ..m.clone()
            })
            .collect();
        ItoExpr { monomials }.canonicalized()
    }

    /// Ito product: distributes over monomials, concatenates coefficient
    /// products in order (adapted coefficients commute with increments but
    /// not with each other), and resolves increment pairs through
    /// [`ito_table`]. No monomial with two unresolved increments survives.
    pub fn mul(&self, other: &ItoExpr) -> ItoExpr {
        let mut monomials = Vec::new();
        for m in &self.monomials {
            for n in &other.monomials {
                let weight = m.weight * n.weight;
                let nu_half_power = m.nu_half_power + n.nu_half_power;
                let mut coeff = m.coeff.clone();
                coeff.extend(n.coeff.iter().cloned());
                match (m.increment, n.increment) {
                    (a, None) => monomials.push(ItoMonomial {
                        weight,
                        nu_half_power,
                        coeff,
                        increment: a,
                    }),
                    (None, b) => monomials.push(ItoMonomial {
                        weight,
                        nu_half_power,
                        coeff,
                        increment: b,
                    }),
                    (Some(a), Some(b)) => {
                        for t in ito_table(a, b).monomials {
                            monomials.push(ItoMonomial {
                                weight: weight * t.weight,
                                nu_half_power,
                                coeff: coeff.clone(),
                                increment: t.increment,
                            });
                        }
                    }
                }
            }
        }
        ItoExpr { monomials }.canonicalized()
    }

    /// Substitute a numeric value for ν, folding ν^{k/2} into the weights.
    pub fn bind_nu(&self, nu: f64) -> ItoExpr {
        let monomials = self
            .monomials
            .iter()
            .map(|m| ItoMonomial {
                weight: m.weight * linalg::cr(nu.sqrt().powi(m.nu_half_power as i32)),
                nu_half_power: 0,
                coeff: m.coeff.clone(),
                increment: m.increment,
            })
            .collect();
        ItoExpr { monomials }.canonicalized()
    }

    /// Formal adjoint: conjugate weights, reverse and star coefficient
    /// products, and swap dB ↔ dB* (dt and dΛ are self-adjoint).
    pub fn adjoint(&self) -> ItoExpr {
        let monomials = self
            .monomials
            .iter()
            .map(|m| ItoMonomial {
                weight: m.weight.conj(),
                nu_half_power: m.nu_half_power,
                coeff: m.coeff.iter().rev().map(|s| s.adjoint()).collect(),
                increment: m.increment.map(|inc| match inc {
                    Increment::Db => Increment::DbDag,
                    Increment::DbDag => Increment::Db,
                    other => other,
                }),
            })
            .collect();
        ItoExpr { monomials }.canonicalized()
    }
}

/// The quantum Ito table for a pair of fundamental increments.
///
/// dB·dB* = dt, dB·dΛ = dB, dΛ·dB* = dB*, dΛ·dΛ = dΛ; every other product
/// vanishes.
pub fn ito_table(a: Increment, b: Increment) -> ItoExpr {
    assert!(
        a.is_fundamental() && b.is_fundamental(),
        "ito_table is defined on fundamental increments"
    );
    match (a, b) {
        (Increment::Db, Increment::DbDag) => ItoExpr::increment(Increment::Dt),
        (Increment::Db, Increment::DLambda) => ItoExpr::increment(Increment::Db),
        (Increment::DLambda, Increment::DbDag) => ItoExpr::increment(Increment::DbDag),
        (Increment::DLambda, Increment::DLambda) => ItoExpr::increment(Increment::DLambda),
        _ => ItoExpr::zero(),
    }
}

/// Increment-level quadrature identities derived from the table.
#[derive(Debug, Clone)]
pub struct QuadratureReport {
    pub qq: ItoExpr,
    pub pp: ItoExpr,
    pub qp: ItoExpr,
    pub pq: ItoExpr,
    /// dQ·dP − dP·dQ; equals 2i·dt.
    pub commutator: ItoExpr,
}

/// Expand dQ = dB + dB*, dP = -i(dB - dB*) and multiply out through the
/// table: dQ·dQ = dP·dP = dt, dQ·dP = i·dt, dP·dQ = -i·dt, so the increment
/// commutator [dQ, dP] = 2i·dt.
pub fn quadrature_pair_commutator_check() -> QuadratureReport {
    let q = ItoExpr::increment(Increment::Dq);
    let p = ItoExpr::increment(Increment::Dp);
    let qp = q.mul(&p);
    let pq = p.mul(&q);
    QuadratureReport {
        qq: q.mul(&q),
        pp: p.mul(&p),
        commutator: qp.sub(&pq),
        qp,
        pq,
    }
}

/// Numeric bindings for [`evaluate_numeric`].
#[derive(Debug, Clone)]
pub struct SymbolBindings {
    dim: usize,
    symbols: BTreeMap<String, CMatrix>,
    nu: Option<f64>,
}

impl SymbolBindings {
    pub fn new(dim: usize) -> Self {
        SymbolBindings {
            dim,
            symbols: BTreeMap::new(),
            nu: None,
        }
    }

    pub fn bind(mut self, name: impl Into<String>, m: CMatrix) -> Result<Self, ItoError> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(ItoError::DimensionMismatch(m.nrows(), self.dim));
        }
        self.symbols.insert(name.into(), m);
        Ok(self)
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = Some(nu);
        self
    }
}

/// Evaluate the matrix coefficient in front of each increment kind (`None`
/// keys the increment-free part). Coefficient symbols multiply in recorded
/// order; starred occurrences use the adjoint of the bound matrix.
pub fn evaluate_numeric(
    expr: &ItoExpr,
    bindings: &SymbolBindings,
) -> Result<BTreeMap<Option<Increment>, CMatrix>, ItoError> {
    let mut out: BTreeMap<Option<Increment>, CMatrix> = BTreeMap::new();
    for m in &expr.monomials {
        let nu_factor = if m.nu_half_power == 0 {
            1.0
        } else {
            let nu = bindings.nu.ok_or(ItoError::UnboundNu)?;
            nu.sqrt().powi(m.nu_half_power as i32)
        };
        let mut acc = linalg::identity(bindings.dim).map(|z| z * m.weight * linalg::cr(nu_factor));
        for s in &m.coeff {
            let bound = bindings
                .symbols
                .get(&s.name)
                .ok_or_else(|| ItoError::UnboundSymbol(s.name.clone()))?;
            acc = if s.dagger { acc * bound.adjoint() } else { acc * bound };
        }
        out.entry(m.increment)
            .and_modify(|e| *e += &acc)
            .or_insert(acc);
    }
    out.retain(|_, m| linalg::norm(m) > 0.0);
    Ok(out)
}

fn fmt_weight(w: C64) -> Option<String> {
    if w == ONE {
        return None;
    }
    let part = |v: f64| format!("{v}");
    Some(if w.im == 0.0 {
        format!("({}+0i)", part(w.re))
    } else if w.im < 0.0 {
        format!("({}-{}i)", part(w.re), part(-w.im))
    } else {
        format!("({}+{}i)", part(w.re), part(w.im))
    })
}

impl fmt::Display for ItoExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (idx, m) in self.monomials.iter().enumerate() {
            let negative = m.weight.re < 0.0 || (m.weight.re == 0.0 && m.weight.im < 0.0);
            let w = if negative { -m.weight } else { m.weight };
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            for _ in 0..m.nu_half_power / 2 {
                factors.push("nu".into());
            }
            if m.nu_half_power % 2 == 1 {
                factors.push("sqrt_nu".into());
            }
            for s in &m.coeff {
                factors.push(if s.dagger {
                    format!("{}*", s.name)
                } else {
                    s.name.clone()
                });
            }
            if let Some(inc) = m.increment {
                factors.push(inc.token().into());
            }
            match (fmt_weight(w), factors.is_empty()) {
                (None, true) => write!(f, "(1+0i)")?,
                (None, false) => write!(f, "{}", factors.join("."))?,
                (Some(ws), true) => write!(f, "{ws}")?,
                (Some(ws), false) => write!(f, "{ws} {}", factors.join("."))?,
            }
        }
        Ok(())
    }
}

/// The 4×4 increment table rendered as text, row·column order
/// dt, dB, dB*, dL.
pub fn table_text() -> String {
    let incs = [Increment::Dt, Increment::Db, Increment::DbDag, Increment::DLambda];
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["x".to_string()];
    header.extend(incs.iter().map(|i| i.token().to_string()));
    rows.push(header);
    for &a in &incs {
        let mut row = vec![a.token().to_string()];
        for &b in &incs {
            row.push(format!("{}", ito_table(a, b)));
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..5)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap())
        .collect();
    let mut out = String::new();
    for (ridx, row) in rows.iter().enumerate() {
        let mut line = String::new();
        for (cidx, cell) in row.iter().enumerate() {
            if cidx == 1 {
                line.push_str("| ");
            }
            line.push_str(&format!("{:w$}", cell, w = widths[cidx]));
            if cidx + 1 < row.len() {
                line.push_str("  ");
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
        if ridx == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * 4 + 2;
            let bar_at = widths[0] + 2;
            for k in 0..total {
                out.push(if k == bar_at { '+' } else { '-' });
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr};
    use Increment::*;

    #[test]
    fn table_matches_hp_rules() {
        let incs = [Dt, Db, DbDag, DLambda];
        for &a in &incs {
            for &b in &incs {
                let expected = match (a, b) {
                    (Db, DbDag) => ItoExpr::increment(Dt),
                    (Db, DLambda) => ItoExpr::increment(Db),
                    (DLambda, DbDag) => ItoExpr::increment(DbDag),
                    (DLambda, DLambda) => ItoExpr::increment(DLambda),
                    _ => ItoExpr::zero(),
                };
                assert_eq!(ito_table(a, b), expected, "entry ({a:?}, {b:?})");
            }
        }
    }

    #[test]
    fn wick_order_provenance() {
        // Nonzero entries are exactly the out-of-Wick-order pairs:
        // an annihilating factor (dB or dΛ) followed by a creating one
        // (dB* or dΛ).
        let incs = [Dt, Db, DbDag, DLambda];
        for &a in &incs {
            for &b in &incs {
                let annihilates_right = matches!(a, Db | DLambda);
                let creates_left = matches!(b, DbDag | DLambda);
                let nonzero = !ito_table(a, b).is_zero();
                assert_eq!(nonzero, annihilates_right && creates_left);
            }
        }
    }

    #[test]
    fn associativity_on_fundamental_triples() {
        let incs = [Dt, Db, DbDag, DLambda];
        for &a in &incs {
            for &b in &incs {
                for &c in &incs {
                    let ea = ItoExpr::increment(a);
                    let eb = ItoExpr::increment(b);
                    let ec = ItoExpr::increment(c);
                    assert_eq!(
                        ea.mul(&eb).mul(&ec),
                        ea.mul(&eb.mul(&ec)),
                        "triple ({a:?}, {b:?}, {c:?})"
                    );
                }
            }
        }
    }

    #[test]
    fn quadrature_identities() {
        let rep = quadrature_pair_commutator_check();
        let dt = ItoExpr::increment(Dt);
        assert_eq!(rep.qq, dt);
        assert_eq!(rep.pp, dt);
        assert_eq!(rep.qp, dt.scale(I));
        assert_eq!(rep.pq, dt.scale(-I));
        assert_eq!(rep.commutator, dt.scale(c(0.0, 2.0)));
    }

    #[test]
    fn classical_wiener_subtable() {
        let dw = ItoExpr::increment(Dw);
        let dt = ItoExpr::increment(Dt);
        assert_eq!(dw.mul(&dw), dt);
        assert_eq!(dw.mul(&dt), ItoExpr::zero());
        assert_eq!(dt.mul(&dw), ItoExpr::zero());
        assert_eq!(dt.mul(&dt), ItoExpr::zero());
    }

    #[test]
    fn poisson_idempotence_symbolic_and_numeric() {
        let dn = ItoExpr::increment(Dn);
        assert_eq!(dn.mul(&dn), dn); // identically in ν
        for &nu in &[0.1, 1.0, 10.0] {
            assert_eq!(dn.mul(&dn).bind_nu(nu), dn.bind_nu(nu));
        }
    }

    #[test]
    fn product_keeps_coefficient_order() {
        let l = ItoExpr::symbol("L");
        let m = ItoExpr::symbol("M");
        let lm = l.mul(&m);
        let ml = m.mul(&l);
        assert_ne!(lm, ml);
        let mono = &lm.monomials()[0];
        assert_eq!(mono.coeff[0].name, "L");
        assert_eq!(mono.coeff[1].name, "M");
    }

    #[test]
    fn evaluate_numeric_examples() {
        // L·dB* with L bound
        let expr = ItoExpr::symbol("L").mul(&ItoExpr::increment(DbDag));
        let m = crate::linalg::sigma_minus();
        let bindings = SymbolBindings::new(2).bind("L", m.clone()).unwrap();
        let coeffs = evaluate_numeric(&expr, &bindings).unwrap();
        assert_eq!(coeffs.len(), 1);
        assert!(linalg::norm(&(&coeffs[&Some(DbDag)] - &m)) < 1e-15);

        // HP drift −(½ L*L + iH)·dt against direct matrix arithmetic
        let h = crate::linalg::pauli_z();
        let drift = ItoExpr::symbol("L")
            .adjoint()
            .mul(&ItoExpr::symbol("L"))
            .scale(cr(-0.5))
            .sub(&ItoExpr::symbol("H").scale(I))
            .mul(&ItoExpr::increment(Dt));
        let bindings = SymbolBindings::new(2)
            .bind("L", m.clone())
            .unwrap()
            .bind("H", h.clone())
            .unwrap();
        let coeffs = evaluate_numeric(&drift, &bindings).unwrap();
        let expected = (m.adjoint() * &m).scale(0.5).map(|z| -z) - h.map(|z| z * I);
        assert!(linalg::norm(&(&coeffs[&Some(Dt)] - expected)) < 1e-15);

        // zero expression -> empty map
        assert!(evaluate_numeric(&ItoExpr::zero(), &bindings).unwrap().is_empty());

        // unbound symbol
        let bad = evaluate_numeric(&ItoExpr::symbol("K"), &bindings);
        assert!(matches!(bad, Err(ItoError::UnboundSymbol(name)) if name == "K"));
    }

    #[test]
    fn adjoint_is_involutive() {
        let e = ItoExpr::symbol("L")
            .mul(&ItoExpr::increment(DbDag))
            .scale(c(0.3, -1.2))
            .add(&ItoExpr::symbol("H").adjoint().mul(&ItoExpr::increment(Dt)));
        assert_eq!(e.adjoint().adjoint(), e);
    }

    #[test]
    fn table_text_golden() {
        let expected = "\
x    | dt  dB  dB*  dL
-----+----------------
dt   | 0   0   0    0
dB   | 0   0   dt   dB
dB*  | 0   0   0    0
dL   | 0   0   dB*  dL
";
        assert_eq!(table_text(), expected);
    }
}
