//! Galerkin matrices and load vectors.
//!
//! For basis members `B_i` and the trial fields
//! `M = theta0 + sum c_j B_j`, `N = gamma0 + sum d_j B_j`:
//!
//! | object | entry |
//! |--------|-------|
//! | `C1 = C2` | `int B_j B_i` |
//! | `K1` | `eps1 int B_j' B_i' + decay_M int B_j B_i - eps1 [B_j' B_i]` |
//! | `K4` | same with `eps2`, `decay_N` |
//! | `K2` | `-sign_M int omega B_j B_i` |
//! | `K3` | `-sign_N int phi B_j B_i` |
//! | `F1` | `sign_M int gamma B_i + (source_M - decay_M theta0) int B_i` |
//! | `F2` | `sign_N int pi B_i + (source_N - decay_N gamma0) int B_i` |
//!
//! The bracketed endpoint terms are evaluated and checked to be zero rather
//! than dropped.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::basis::BasisSpec;
use crate::dense_solve::{LuFactors, SolveError};
use crate::problem::{split_at, PicardSplit, ProblemSpec, SineProfile};
use crate::quadrature::QuadratureRule;

/// Largest endpoint-bracket magnitude tolerated (the exact value is zero).
const BRACKET_TOL: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("quadrature interval [{rule_lower}, {rule_upper}] does not match basis interval [{lower}, {upper}]")]
    DomainMismatch {
        rule_lower: f64,
        rule_upper: f64,
        lower: f64,
        upper: f64,
    },
    #[error("mass matrix is singular: {0}")]
    SingularMass(#[source] SolveError),
}

/// Basis values and derivatives tabulated at every quadrature node.
#[derive(Debug, Clone)]
pub struct BasisTable {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // row-major: values[q * len + j]
    values: Vec<f64>,
    derivs: Vec<f64>,
    len: usize,
}

impl BasisTable {
    pub fn new(basis: &BasisSpec, rule: &QuadratureRule) -> Result<Self, AssemblyError> {
        let width = basis.width();
        if (rule.lower() - basis.lower()).abs() > 1e-12 * width
            || (rule.upper() - basis.upper()).abs() > 1e-12 * width
        {
            return Err(AssemblyError::DomainMismatch {
                rule_lower: rule.lower(),
                rule_upper: rule.upper(),
                lower: basis.lower(),
                upper: basis.upper(),
            });
        }
        let len = basis.len();
        let mut values = vec![0.0; rule.point_count() * len];
        let mut derivs = vec![0.0; rule.point_count() * len];
        for (q, &x) in rule.nodes().iter().enumerate() {
            // rule nodes sit strictly inside the interval
            basis
                .eval_all(x, &mut values[q * len..(q + 1) * len])
                .expect("quadrature node inside basis interval");
            basis
                .eval_deriv_all(x, &mut derivs[q * len..(q + 1) * len])
                .expect("quadrature node inside basis interval");
        }
        Ok(Self {
            nodes: rule.nodes().to_vec(),
            weights: rule.weights().to_vec(),
            values,
            derivs,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.len..(q + 1) * self.len]
    }

    pub fn derivs_at(&self, q: usize) -> &[f64] {
        &self.derivs[q * self.len..(q + 1) * self.len]
    }

    /// Trial field `offset + sum coeffs_j B_j` at node `q`.
    pub fn field_at(&self, q: usize, offset: f64, coeffs: &[f64]) -> f64 {
        offset
            + self
                .values_at(q)
                .iter()
                .zip(coeffs)
                .map(|(b, c)| b * c)
                .sum::<f64>()
    }

    /// `int w(x) B_j B_i dx` for a weight sampled at the nodes; upper triangle mirrored.
    pub fn weighted_mass(&self, weight: &[f64]) -> DMatrix<f64> {
        let n = self.len;
        let mut out = DMatrix::zeros(n, n);
        for (q, (&w, &g)) in self.weights.iter().zip(weight).enumerate() {
            let wg = w * g;
            if wg == 0.0 {
                continue;
            }
            let b = self.values_at(q);
            for i in 0..n {
                for j in i..n {
                    out[(i, j)] += wg * b[i] * b[j];
                }
            }
        }
        mirror_upper(&mut out);
        out
    }

    pub fn mass(&self) -> DMatrix<f64> {
        self.weighted_mass(&vec![1.0; self.nodes.len()])
    }

    /// `int B_j' B_i' dx`.
    pub fn derivative_products(&self) -> DMatrix<f64> {
        let n = self.len;
        let mut out = DMatrix::zeros(n, n);
        for (q, &w) in self.weights.iter().enumerate() {
            let d = self.derivs_at(q);
            for i in 0..n {
                for j in i..n {
                    out[(i, j)] += w * d[i] * d[j];
                }
            }
        }
        mirror_upper(&mut out);
        out
    }

    /// `int g(x) B_i dx` for `g` sampled at the nodes.
    pub fn weighted_load(&self, g: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.len);
        for (q, (&w, &gq)) in self.weights.iter().zip(g).enumerate() {
            let wg = w * gq;
            for (i, b) in self.values_at(q).iter().enumerate() {
                out[i] += wg * b;
            }
        }
        out
    }
}

fn mirror_upper(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
}

/// The eight Galerkin objects for one Picard iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub c1: DMatrix<f64>,
    pub c2: DMatrix<f64>,
    pub k1: DMatrix<f64>,
    pub k2: DMatrix<f64>,
    pub k3: DMatrix<f64>,
    pub k4: DMatrix<f64>,
    pub f1: DVector<f64>,
    pub f2: DVector<f64>,
}

/// Parts of the system that do not depend on the Picard iterate.
#[derive(Debug, Clone)]
pub struct FixedMatrices {
    pub mass: DMatrix<f64>,
    pub k1: DMatrix<f64>,
    pub k4: DMatrix<f64>,
    /// `int B_i dx`, scaled by each species' constant load.
    pub unit_load: DVector<f64>,
}

/// Iterate-dependent coupling blocks and loads.
#[derive(Debug, Clone)]
pub struct IterateMatrices {
    pub k2: DMatrix<f64>,
    pub k3: DMatrix<f64>,
    pub f1: DVector<f64>,
    pub f2: DVector<f64>,
}

/// Caches the basis table and the iterate-independent matrices for one problem.
#[derive(Debug, Clone)]
pub struct Assembler {
    problem: ProblemSpec,
    table: BasisTable,
    fixed: FixedMatrices,
}

impl Assembler {
    pub fn new(
        problem: &ProblemSpec,
        basis: &BasisSpec,
        rule: &QuadratureRule,
    ) -> Result<Self, AssemblyError> {
        let table = BasisTable::new(basis, rule)?;
        let mass = table.mass();
        let derivs = table.derivative_products();
        let m = problem.m_terms();
        let n = problem.n_terms();
        let k1 = stiffness_from(
            &derivs,
            &mass,
            &boundary_bracket(basis, m.diffusion),
            m.diffusion,
            m.decay,
        );
        let k4 = stiffness_from(
            &derivs,
            &mass,
            &boundary_bracket(basis, n.diffusion),
            n.diffusion,
            n.decay,
        );
        let unit_load = table.weighted_load(&vec![1.0; rule.point_count()]);
        Ok(Self {
            problem: problem.clone(),
            table,
            fixed: FixedMatrices {
                mass,
                k1,
                k4,
                unit_load,
            },
        })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn table(&self) -> &BasisTable {
        &self.table
    }

    pub fn fixed(&self) -> &FixedMatrices {
        &self.fixed
    }

    /// K2, K3, F1, F2 at the iterate `(c, d)`.
    pub fn iterate(&self, c: &[f64], d: &[f64]) -> IterateMatrices {
        let p = &self.problem;
        let nq = self.table.nodes().len();
        let mut omega = Vec::with_capacity(nq);
        let mut phi = Vec::with_capacity(nq);
        let mut gamma = Vec::with_capacity(nq);
        let mut pi = Vec::with_capacity(nq);
        for q in 0..nq {
            let mf = self.table.field_at(q, p.theta0, c);
            let nf = self.table.field_at(q, p.gamma0, d);
            let s = split_at(p, mf, nf);
            omega.push(-p.sign_m * s.omega);
            phi.push(-p.sign_n * s.phi);
            gamma.push(p.sign_m * s.gamma);
            pi.push(p.sign_n * s.pi);
        }
        let const_m = p.m_terms().constant_load();
        let const_n = p.n_terms().constant_load();
        IterateMatrices {
            k2: self.table.weighted_mass(&omega),
            k3: self.table.weighted_mass(&phi),
            f1: self.table.weighted_load(&gamma) + &self.fixed.unit_load * const_m,
            f2: self.table.weighted_load(&pi) + &self.fixed.unit_load * const_n,
        }
    }

    pub fn system(&self, c: &[f64], d: &[f64]) -> SystemMatrices {
        let it = self.iterate(c, d);
        SystemMatrices {
            c1: self.fixed.mass.clone(),
            c2: self.fixed.mass.clone(),
            k1: self.fixed.k1.clone(),
            k2: it.k2,
            k3: it.k3,
            k4: self.fixed.k4.clone(),
            f1: it.f1,
            f2: it.f2,
        }
    }

    /// Galerkin projections of the reaction-diffusion operators,
    /// `-(K1 c + K2 d - F1)` and `-(K3 c + K4 d - F2)`, with the iterate-dependent
    /// parts taken at `(c, d)` itself. This is the exact semi-discrete right-hand side.
    pub fn rates(&self, c: &DVector<f64>, d: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let it = self.iterate(c.as_slice(), d.as_slice());
        let rm = &it.f1 - &self.fixed.k1 * c - &it.k2 * d;
        let rn = &it.f2 - &it.k3 * c - &self.fixed.k4 * d;
        (rm, rn)
    }
}

fn stiffness_from(
    derivs: &DMatrix<f64>,
    mass: &DMatrix<f64>,
    bracket: &DMatrix<f64>,
    eps: f64,
    decay: f64,
) -> DMatrix<f64> {
    derivs * eps + mass * decay - bracket
}

/// `C_ij = int B_j B_i dx`.
pub fn assemble_mass(
    basis: &BasisSpec,
    rule: &QuadratureRule,
) -> Result<DMatrix<f64>, AssemblyError> {
    Ok(BasisTable::new(basis, rule)?.mass())
}

/// `eps [B_j' B_i]` evaluated between the endpoints.
///
/// Every member vanishes at both ends, so this is identically zero; a
/// non-zero entry means the basis is broken and assembly panics.
pub fn boundary_bracket(basis: &BasisSpec, eps: f64) -> DMatrix<f64> {
    let n = basis.len();
    let (l, u) = (basis.lower(), basis.upper());
    let at = |f: fn(&BasisSpec, usize, f64) -> Result<f64, _>, k: usize, x: f64| {
        f(basis, k, x).expect("endpoints lie in the basis interval")
    };
    let out = DMatrix::from_fn(n, n, |i, j| {
        let upper = at(BasisSpec::eval_deriv, j, u) * at(BasisSpec::eval, i, u);
        let lower = at(BasisSpec::eval_deriv, j, l) * at(BasisSpec::eval, i, l);
        eps * (upper - lower)
    });
    assert!(
        out.iter().all(|v| v.abs() <= BRACKET_TOL),
        "basis members do not vanish at the endpoints"
    );
    out
}

/// `eps int B_j' B_i' + decay int B_j B_i - eps [B_j' B_i]`.
pub fn assemble_stiffness(
    basis: &BasisSpec,
    rule: &QuadratureRule,
    eps: f64,
    decay: f64,
) -> Result<DMatrix<f64>, AssemblyError> {
    let table = BasisTable::new(basis, rule)?;
    Ok(stiffness_from(
        &table.derivative_products(),
        &table.mass(),
        &boundary_bracket(basis, eps),
        eps,
        decay,
    ))
}

/// `int w(x) B_j B_i dx`; the caller folds the equation's reaction sign into `weight`.
pub fn assemble_coupling<F: Fn(f64) -> f64>(
    basis: &BasisSpec,
    rule: &QuadratureRule,
    weight: F,
) -> Result<DMatrix<f64>, AssemblyError> {
    let table = BasisTable::new(basis, rule)?;
    let w: Vec<f64> = rule.nodes().iter().map(|&x| weight(x)).collect();
    Ok(table.weighted_mass(&w))
}

/// `(F1, F2)` from a Picard split.
pub fn assemble_loads(
    problem: &ProblemSpec,
    basis: &BasisSpec,
    rule: &QuadratureRule,
    split: &PicardSplit<'_>,
) -> Result<(DVector<f64>, DVector<f64>), AssemblyError> {
    let table = BasisTable::new(basis, rule)?;
    let const_m = problem.m_terms().constant_load();
    let const_n = problem.n_terms().constant_load();
    let mut g1 = Vec::with_capacity(rule.point_count());
    let mut g2 = Vec::with_capacity(rule.point_count());
    for &x in rule.nodes() {
        let v = split.values(x);
        g1.push(problem.sign_m * v.gamma + const_m);
        g2.push(problem.sign_n * v.pi + const_n);
    }
    Ok((table.weighted_load(&g1), table.weighted_load(&g2)))
}

/// Galerkin projection of a profile minus its boundary offset.
pub fn project_profile(
    profile: &SineProfile,
    offset: f64,
    basis: &BasisSpec,
    rule: &QuadratureRule,
) -> Result<DVector<f64>, AssemblyError> {
    let table = BasisTable::new(basis, rule)?;
    let lu = LuFactors::factor(&table.mass()).map_err(AssemblyError::SingularMass)?;
    let g: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&x| profile.eval(x) - offset)
        .collect();
    lu.solve(&table.weighted_load(&g))
        .map_err(AssemblyError::SingularMass)
}

/// Initial coefficients `(c(0), d(0))` from the Galerkin projection of the initial data.
pub fn project_initial(
    problem: &ProblemSpec,
    basis: &BasisSpec,
    boosted_rule: &QuadratureRule,
) -> Result<(DVector<f64>, DVector<f64>), AssemblyError> {
    let c0 = project_profile(&problem.initial_m, problem.theta0, basis, boosted_rule)?;
    let d0 = project_profile(&problem.initial_n, problem.gamma0, basis, boosted_rule)?;
    Ok((c0, d0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::picard_split;
    use crate::quadrature::{boosted_point_count, default_point_count, gauss_legendre};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn setup(l: f64, u: f64, m: usize) -> (BasisSpec, QuadratureRule) {
        let b = BasisSpec::new(l, u, m).unwrap();
        let r = gauss_legendre(default_point_count(m), l, u).unwrap();
        (b, r)
    }

    #[test]
    fn degree_zero_closed_forms() {
        let (b, r) = setup(0.0, 1.0, 0);
        assert_relative_eq!(
            assemble_mass(&b, &r).unwrap()[(0, 0)],
            1.0 / 30.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            assemble_stiffness(&b, &r, 1.0, 0.0).unwrap()[(0, 0)],
            1.0 / 3.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            assemble_stiffness(&b, &r, 1.0, 0.09).unwrap()[(0, 0)],
            1.0 / 3.0 + 0.09 / 30.0,
            epsilon = 1e-12
        );
        let (b, r) = setup(0.0, 2.0, 0);
        assert_relative_eq!(
            assemble_mass(&b, &r).unwrap()[(0, 0)],
            16.0 / 15.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bracket_is_zero() {
        for m in [0, 3, 6, 10] {
            let b = BasisSpec::new(-50.0, 50.0, m).unwrap();
            assert!(boundary_bracket(&b, 1.0).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn symmetric_mass_and_stiffness() {
        for &(l, u) in &[(0.0, 2.0), (-50.0, 50.0)] {
            let (b, r) = setup(l, u, 6);
            let c = assemble_mass(&b, &r).unwrap();
            let k = assemble_stiffness(&b, &r, 0.01, 0.086).unwrap();
            assert_eq!(c, c.transpose());
            assert_eq!(k, k.transpose());
        }
    }

    #[test]
    fn mass_positive_definite_up_to_degree_ten() {
        for &(l, u) in &[(0.0, 2.0), (-50.0, 50.0)] {
            for m in 0..=10 {
                let (b, r) = setup(l, u, m);
                let c = assemble_mass(&b, &r).unwrap();
                assert!(c.clone().cholesky().is_some(), "m = {m} on [{l}, {u}]");
            }
        }
    }

    #[test]
    fn coupling_reductions() {
        let (b, r) = setup(0.0, 2.0, 6);
        assert!(assemble_coupling(&b, &r, |_| 0.0)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let unit = assemble_coupling(&b, &r, |_| 1.0).unwrap();
        let mass = assemble_mass(&b, &r).unwrap();
        assert!((unit - &mass).amax() <= 1e-12 * mass.amax());
    }

    #[test]
    fn grayscott_rest_state_has_no_coupling_or_load() {
        let p = ProblemSpec::builtin_grayscott();
        let (b, r) = setup(p.lower, p.upper, 6);
        let zero = vec![0.0; 7];
        let split = picard_split(&p, &b, &zero, &zero);
        let k2 = assemble_coupling(&b, &r, |x| -p.sign_m * split.omega(x)).unwrap();
        assert!(k2.iter().all(|&v| v == 0.0));
        let (f1, f2) = assemble_loads(&p, &b, &r, &split).unwrap();
        assert!(f1.iter().all(|&v| v == 0.0));
        assert!(f2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tp1_rest_state_load_matches_direct_quadrature() {
        let p = ProblemSpec::builtin_tp1();
        let (b, r) = setup(p.lower, p.upper, 6);
        let zero = vec![0.0; 7];
        let split = picard_split(&p, &b, &zero, &zero);
        let (_, f2) = assemble_loads(&p, &b, &r, &split).unwrap();
        for i in 0..7 {
            // theta0 N^2 + p - p gamma0 with theta0 = 0, gamma0 = 1
            let direct =
                r.integrate(|x| (p.theta0 * 1.0 + p.p - p.p * p.gamma0) * b.eval(i, x).unwrap());
            assert!((f2[i] - direct).abs() < 1e-15);
            assert_eq!(f2[i], 0.0);
        }
    }

    #[test]
    fn assembler_matches_free_functions() {
        for p in [ProblemSpec::builtin_tp1(), ProblemSpec::builtin_grayscott()] {
            let (b, r) = setup(p.lower, p.upper, 6);
            let asm = Assembler::new(&p, &b, &r).unwrap();
            let scale = 4.0 / (b.width() * b.width());
            let c: Vec<f64> = (0..7).map(|j| 0.02 * scale * (j as f64 - 2.5)).collect();
            let d: Vec<f64> = (0..7)
                .map(|j| -0.05 * scale * (j as f64 * 0.7).sin())
                .collect();
            let sys = asm.system(&c, &d);
            let split = picard_split(&p, &b, &c, &d);
            let k2 = assemble_coupling(&b, &r, |x| -p.sign_m * split.omega(x)).unwrap();
            let k3 = assemble_coupling(&b, &r, |x| -p.sign_n * split.phi(x)).unwrap();
            let (f1, f2) = assemble_loads(&p, &b, &r, &split).unwrap();
            let k1 = assemble_stiffness(&b, &r, p.eps1, p.decay_m).unwrap();
            let k4 = assemble_stiffness(&b, &r, p.eps2, p.decay_n).unwrap();
            let close_m =
                |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).amax() <= 1e-12 * b.amax().max(1e-300);
            let close_v =
                |a: &DVector<f64>, b: &DVector<f64>| (a - b).amax() <= 1e-12 * b.amax().max(1e-300);
            assert!(close_m(&sys.k1, &k1));
            assert!(close_m(&sys.k4, &k4));
            assert!(close_m(&sys.k2, &k2));
            assert!(close_m(&sys.k3, &k3));
            assert!(close_v(&sys.f1, &f1));
            assert!(close_v(&sys.f2, &f2));
            assert_eq!(sys.c1, sys.c2);
        }
    }

    #[test]
    fn doubling_quadrature_changes_nothing() {
        for p in [ProblemSpec::builtin_tp1(), ProblemSpec::builtin_grayscott()] {
            let b = BasisSpec::new(p.lower, p.upper, 6).unwrap();
            let n = default_point_count(6);
            let r1 = gauss_legendre(n, p.lower, p.upper).unwrap();
            let r2 = gauss_legendre(2 * n, p.lower, p.upper).unwrap();
            let scale = 4.0 / (b.width() * b.width());
            let c: Vec<f64> = (0..7).map(|j| 0.3 * scale * (j as f64).cos()).collect();
            let d: Vec<f64> = (0..7)
                .map(|j| 0.2 * scale * (j as f64 + 1.0).sin())
                .collect();
            let s1 = Assembler::new(&p, &b, &r1).unwrap().system(&c, &d);
            let s2 = Assembler::new(&p, &b, &r2).unwrap().system(&c, &d);
            let pairs = [
                (&s1.c1, &s2.c1),
                (&s1.k1, &s2.k1),
                (&s1.k2, &s2.k2),
                (&s1.k3, &s2.k3),
                (&s1.k4, &s2.k4),
            ];
            for (a, b) in pairs {
                for (x, y) in a.iter().zip(b.iter()) {
                    assert!((x - y).abs() <= 1e-10 * y.abs().max(a.amax() * 1e-6));
                }
            }
            for (a, b) in [(&s1.f1, &s2.f1), (&s1.f2, &s2.f2)] {
                for (x, y) in a.iter().zip(b.iter()) {
                    assert!((x - y).abs() <= 1e-10 * y.abs().max(a.amax() * 1e-6));
                }
            }
        }
    }

    #[test]
    fn constant_initial_data_project_to_zero() {
        let mut p = ProblemSpec::builtin_grayscott();
        p.initial_m.amplitude = 0.0;
        let b = BasisSpec::new(p.lower, p.upper, 6).unwrap();
        let r = gauss_legendre(boosted_point_count(6), p.lower, p.upper).unwrap();
        let (c0, _) = project_initial(&p, &b, &r).unwrap();
        assert!(c0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tp1_degree_zero_projection() {
        let p = ProblemSpec::builtin_tp1();
        let b = BasisSpec::new(p.lower, p.upper, 0).unwrap();
        let r = gauss_legendre(boosted_point_count(0), p.lower, p.upper).unwrap();
        let (c0, _) = project_initial(&p, &b, &r).unwrap();
        // int_0^2 0.01 sin(pi (x - 2) / 2) x (2 - x) dx = -0.01 * 32 / pi^3
        let expected = (-0.01 * 32.0 / PI.powi(3)) / (16.0 / 15.0);
        assert_relative_eq!(c0[0], expected, max_relative = 1e-10);
        assert!((c0[0] + 0.00967546).abs() < 1e-8);
    }

    #[test]
    fn tp1_projection_reconstructs_initial_field() {
        let p = ProblemSpec::builtin_tp1();
        let b = BasisSpec::new(p.lower, p.upper, 6).unwrap();
        let r = gauss_legendre(boosted_point_count(6), p.lower, p.upper).unwrap();
        let (c0, _) = project_initial(&p, &b, &r).unwrap();
        let worst = (0..=2000)
            .map(|k| {
                let x = 2.0 * k as f64 / 2000.0;
                let approx: f64 =
                    p.theta0 + (0..7).map(|j| c0[j] * b.eval(j, x).unwrap()).sum::<f64>();
                (approx - p.initial_m.eval(x)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 2e-4, "L-inf reconstruction error {worst}");
    }

    #[test]
    fn projection_minimizes_l2_error() {
        for p in [ProblemSpec::builtin_tp1(), ProblemSpec::builtin_grayscott()] {
            let b = BasisSpec::new(p.lower, p.upper, 6).unwrap();
            let r = gauss_legendre(boosted_point_count(6), p.lower, p.upper).unwrap();
            let (c0, _) = project_initial(&p, &b, &r).unwrap();
            let err = |c: &DVector<f64>| {
                r.integrate(|x| {
                    let approx: f64 =
                        p.theta0 + (0..7).map(|j| c[j] * b.eval(j, x).unwrap()).sum::<f64>();
                    (approx - p.initial_m.eval(x)).powi(2)
                })
            };
            let base = err(&c0);
            let delta = 1e-3;
            for j in 0..7 {
                for s in [-1.0, 1.0] {
                    let mut c = c0.clone();
                    c[j] += s * delta;
                    assert!(err(&c) > base);
                }
            }
        }
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let b = BasisSpec::new(0.0, 2.0, 3).unwrap();
        let r = gauss_legendre(8, 0.0, 1.0).unwrap();
        assert!(matches!(
            assemble_mass(&b, &r),
            Err(AssemblyError::DomainMismatch { .. })
        ));
    }
}
