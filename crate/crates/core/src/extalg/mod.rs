//! Differential forms and vector fields on a single chart, with
//! expression coefficients.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::symexpr::{Domain, Expr, SampleOpts, SymError, Tape, ZeroReport};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FormError {
    #[error("wedge of degrees {a} and {b} exceeds chart dimension {dim}")]
    DegreeOverflow { a: usize, b: usize, dim: usize },
    #[error("cannot contract a 0-form")]
    ContractScalar,
    #[error("cannot take d of a top-degree form on a {dim}-dimensional chart")]
    TopDegree { dim: usize },
    #[error("chart dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// A k-form stored on strictly increasing index tuples.
#[derive(Debug, Clone)]
pub struct KForm {
    dim: usize,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

/// A vector field given by its components in coordinate order.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub comps: Vec<Expr>,
}

/// Sort `idx` in place and return the permutation sign, or `None` when an
/// index repeats.
fn sort_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

fn signed(e: &Expr, sign: f64) -> Expr {
    if sign < 0.0 {
        e.neg()
    } else {
        e.clone()
    }
}

impl KForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        KForm {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, f: Expr) -> Self {
        let mut k = KForm::zero(dim, 0);
        k.add_term(vec![], f);
        k
    }

    /// The coordinate differential `dq^i`.
    pub fn dq(dim: usize, i: usize) -> Self {
        KForm::one_form(dim, (0..dim).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect())
    }

    /// `Σ comps[i] dq^i`.
    pub fn one_form(dim: usize, comps: Vec<Expr>) -> Self {
        assert_eq!(comps.len(), dim, "one-form needs one component per coordinate");
        let mut k = KForm::zero(dim, 1);
        for (i, c) in comps.into_iter().enumerate() {
            k.add_term(vec![i], c);
        }
        k
    }

    /// Build from arbitrary-order index tuples; signs are normalized and
    /// repeated indices dropped.
    pub fn from_terms(dim: usize, degree: usize, terms: Vec<(Vec<usize>, Expr)>) -> Self {
        let mut k = KForm::zero(dim, degree);
        for (mut idx, c) in terms {
            assert_eq!(idx.len(), degree);
            assert!(idx.iter().all(|&i| i < dim));
            if let Some(s) = sort_sign(&mut idx) {
                k.add_term(idx, signed(&c, s));
            }
        }
        k
    }

    fn add_term(&mut self, idx: Vec<usize>, c: Expr) {
        if c.is_const_zero() {
            return;
        }
        match self.terms.get_mut(&idx) {
            Some(old) => {
                let s = old.add(&c);
                if s.is_const_zero() {
                    self.terms.remove(&idx);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(idx, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Stored terms in canonical (increasing) index order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.terms.iter()
    }

    /// Coefficient on `dq^{i1} ∧ … ∧ dq^{ik}` for any index order.
    pub fn coeff(&self, idx: &[usize]) -> Expr {
        let mut v = idx.to_vec();
        match sort_sign(&mut v) {
            None => Expr::zero(),
            Some(s) => self
                .terms
                .get(&v)
                .map(|c| signed(c, s))
                .unwrap_or_else(Expr::zero),
        }
    }

    /// Components of a 1-form in coordinate order.
    pub fn components(&self) -> Vec<Expr> {
        assert_eq!(self.degree, 1);
        (0..self.dim).map(|i| self.coeff(&[i])).collect()
    }

    /// The function of a 0-form.
    pub fn as_scalar(&self) -> Expr {
        assert_eq!(self.degree, 0);
        self.coeff(&[])
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &KForm) -> KForm {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.add_term(idx.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &KForm) -> KForm {
        self.add(&other.scale(&Expr::constant(-1.0)))
    }

    pub fn scale(&self, f: &Expr) -> KForm {
        let mut out = KForm::zero(self.dim, self.degree);
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), f.mul(c));
        }
        out
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm, FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimMismatch(self.dim, other.dim));
        }
        if self.degree + other.degree > self.dim {
            return Err(FormError::DegreeOverflow {
                a: self.degree,
                b: other.degree,
                dim: self.dim,
            });
        }
        let mut out = KForm::zero(self.dim, self.degree + other.degree);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let mut idx: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
                if let Some(s) = sort_sign(&mut idx) {
                    out.add_term(idx, signed(&a.mul(b), s));
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self) -> Result<KForm, FormError> {
        if self.degree >= self.dim {
            return Err(FormError::TopDegree { dim: self.dim });
        }
        let mut out = KForm::zero(self.dim, self.degree + 1);
        for (idx, c) in &self.terms {
            for j in 0..self.dim {
                if idx.contains(&j) || !c.depends_on(j) {
                    continue;
                }
                let mut full = Vec::with_capacity(idx.len() + 1);
                full.push(j);
                full.extend_from_slice(idx);
                let s = sort_sign(&mut full).expect("distinct indices");
                out.add_term(full, signed(&c.diff(j), s));
            }
        }
        Ok(out)
    }

    /// Interior product `i_X a`.
    pub fn contract(&self, x: &VectorField) -> Result<KForm, FormError> {
        if self.degree == 0 {
            return Err(FormError::ContractScalar);
        }
        if x.comps.len() != self.dim {
            return Err(FormError::DimMismatch(x.comps.len(), self.dim));
        }
        let mut out = KForm::zero(self.dim, self.degree - 1);
        for (idx, c) in &self.terms {
            for (r, &i) in idx.iter().enumerate() {
                if x.comps[i].is_const_zero() {
                    continue;
                }
                let rest: Vec<usize> = idx.iter().enumerate().filter(|&(k, _)| k != r).map(|(_, &v)| v).collect();
                let term = x.comps[i].mul(c);
                out.add_term(rest, if r % 2 == 1 { term.neg() } else { term });
            }
        }
        Ok(out)
    }

    /// Lie derivative by Cartan's formula `d(i_X a) + i_X(da)`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<KForm, FormError> {
        let second = if self.degree < self.dim {
            self.d()?.contract(x)?
        } else {
            KForm::zero(self.dim, self.degree)
        };
        if self.degree == 0 {
            return Ok(second);
        }
        Ok(self.contract(x)?.d()?.add(&second))
    }

    /// Evaluate on `k` vector fields, giving a scalar.
    pub fn apply(&self, fields: &[&VectorField]) -> Result<Expr, FormError> {
        assert_eq!(fields.len(), self.degree);
        let mut cur = self.clone();
        for x in fields {
            cur = cur.contract(x)?;
        }
        Ok(cur.as_scalar())
    }

    /// Pull back along `q^i = phi[i](z)`, where `z` has `target_dim` coordinates.
    pub fn pullback(&self, phi: &[Expr], target_dim: usize) -> Result<KForm, FormError> {
        if phi.len() != self.dim {
            return Err(FormError::DimMismatch(phi.len(), self.dim));
        }
        if self.degree > target_dim {
            return Ok(KForm::zero(target_dim, self.degree));
        }
        let dphi: Vec<KForm> = phi
            .iter()
            .map(|p| KForm::one_form(target_dim, (0..target_dim).map(|j| p.diff(j)).collect()))
            .collect();
        let mut out = KForm::zero(target_dim, self.degree);
        for (idx, c) in &self.terms {
            let mut acc = KForm::scalar(target_dim, c.substitute(phi));
            for &i in idx {
                acc = acc.wedge(&dphi[i])?;
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    pub fn coefficient_exprs(&self) -> Vec<Expr> {
        self.terms.values().cloned().collect()
    }

    /// Randomized test that every coefficient vanishes on `dom`.
    pub fn zero_test(&self, dom: &Domain, opts: SampleOpts) -> Result<ZeroReport, SymError> {
        crate::symexpr::zero_test(&self.coefficient_exprs(), dom, opts)
    }

    /// Numeric coefficients of a 1-form at `q`.
    pub fn eval_components(&self, q: &[f64], params: &[f64]) -> Result<Vec<f64>, SymError> {
        Tape::new(&self.components()).eval(q, params)
    }
}

impl VectorField {
    pub fn new(comps: Vec<Expr>) -> Self {
        VectorField { comps }
    }

    /// The coordinate field `∂/∂q^i`.
    pub fn coord(dim: usize, i: usize) -> Self {
        VectorField {
            comps: (0..dim).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField::new(self.comps.iter().map(|c| f.mul(c)).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect())
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let terms: Vec<Expr> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(j, c)| !c.is_const_zero() && f.depends_on(*j))
            .map(|(j, c)| c.mul(&f.diff(j)))
            .collect();
        Expr::sum(&terms)
    }

    /// Lie bracket `[X, Y]`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, FormError> {
        if self.dim() != other.dim() {
            return Err(FormError::DimMismatch(self.dim(), other.dim()));
        }
        Ok(VectorField::new(
            (0..self.dim())
                .map(|i| self.apply(&other.comps[i]).sub(&other.apply(&self.comps[i])))
                .collect(),
        ))
    }
}
