use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Elementary functions understood by the expression core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Arctan,
    Arctanh,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Arctan => "arctan",
            UnaryOp::Arctanh => "arctanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "arctan" => UnaryOp::Arctan,
            "arctanh" => UnaryOp::Arctanh,
            _ => return None,
        })
    }

    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Neg => -x,
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Tan => x.tan(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Ln => x.ln(),
            UnaryOp::Sqrt => x.sqrt(),
            UnaryOp::Arctan => x.atan(),
            UnaryOp::Arctanh => x.atanh(),
        }
    }

    /// Whether `x` lies outside the real domain of the function.
    pub(crate) fn domain_violation(self, x: f64) -> bool {
        match self {
            UnaryOp::Ln => x <= 0.0,
            UnaryOp::Sqrt => x < 0.0,
            UnaryOp::Arctanh => x.abs() >= 1.0,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }
}

/// Exponent of a power node, stored in halves so that `k/2` covers the
/// integer and half-integer cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfInt(pub i32);

impl HalfInt {
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn from_f64(v: f64) -> Option<Self> {
        let twice = v * 2.0;
        if (twice - twice.round()).abs() < 1e-12 && twice.abs() < i32::MAX as f64 {
            Some(HalfInt(twice.round() as i32))
        } else {
            None
        }
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    /// Index into the parameter table.
    Param(usize),
    /// Index into the chart coordinates.
    Var(usize),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
    Pow(Expr, HalfInt),
}

/// Immutable, cheaply clonable expression DAG over chart coordinates and
/// parameters. Shared subtrees stay shared through differentiation and
/// substitution.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

/// Names for coordinates and parameters of one chart.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Symbols {
    pub coords: Vec<String>,
    pub params: Vec<String>,
}

impl Symbols {
    pub fn new<S: AsRef<str>>(coords: &[S], params: &[S]) -> Self {
        Symbols {
            coords: coords.iter().map(|s| s.as_ref().to_string()).collect(),
            params: params.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|c| c == name)
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn constant(v: f64) -> Self {
        Expr::new(Node::Const(v))
    }

    pub fn zero() -> Self {
        Expr::constant(0.0)
    }

    pub fn one() -> Self {
        Expr::constant(1.0)
    }

    pub fn var(index: usize) -> Self {
        Expr::new(Node::Var(index))
    }

    pub fn param(index: usize) -> Self {
        Expr::new(Node::Param(index))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_const_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_const_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn unary(op: UnaryOp, a: &Expr) -> Expr {
        if let Some(v) = a.as_const() {
            let r = op.apply(v);
            if r.is_finite() && !op.domain_violation(v) {
                return Expr::constant(r);
            }
        }
        if op == UnaryOp::Neg {
            if let Node::Unary(UnaryOp::Neg, inner) = a.node() {
                return inner.clone();
            }
        }
        Expr::new(Node::Unary(op, a.clone()))
    }

    pub fn neg(&self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }

    pub fn tan(&self) -> Expr {
        Expr::unary(UnaryOp::Tan, self)
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }

    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Ln, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }

    pub fn arctan(&self) -> Expr {
        Expr::unary(UnaryOp::Arctan, self)
    }

    pub fn arctanh(&self) -> Expr {
        Expr::unary(UnaryOp::Arctanh, self)
    }

    pub fn add(&self, b: &Expr) -> Expr {
        match (self.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            (Some(x), _) if x == 0.0 => b.clone(),
            (_, Some(y)) if y == 0.0 => self.clone(),
            _ => {
                if let Node::Unary(UnaryOp::Neg, inner) = b.node() {
                    return self.sub(inner);
                }
                Expr::new(Node::Binary(BinaryOp::Add, self.clone(), b.clone()))
            }
        }
    }

    pub fn sub(&self, b: &Expr) -> Expr {
        if self.ptr_eq(b) {
            return Expr::zero();
        }
        match (self.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            (Some(x), _) if x == 0.0 => b.neg(),
            (_, Some(y)) if y == 0.0 => self.clone(),
            _ => {
                if let Node::Unary(UnaryOp::Neg, inner) = b.node() {
                    return self.add(inner);
                }
                Expr::new(Node::Binary(BinaryOp::Sub, self.clone(), b.clone()))
            }
        }
    }

    pub fn mul(&self, b: &Expr) -> Expr {
        match (self.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x * y),
            (Some(x), _) if x == 0.0 => Expr::zero(),
            (_, Some(y)) if y == 0.0 => Expr::zero(),
            (Some(x), _) if x == 1.0 => b.clone(),
            (_, Some(y)) if y == 1.0 => self.clone(),
            (Some(x), _) if x == -1.0 => b.neg(),
            (_, Some(y)) if y == -1.0 => self.neg(),
            _ => Expr::new(Node::Binary(BinaryOp::Mul, self.clone(), b.clone())),
        }
    }

    pub fn div(&self, b: &Expr) -> Expr {
        match (self.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
            (Some(x), _) if x == 0.0 => Expr::zero(),
            (_, Some(y)) if y == 1.0 => self.clone(),
            (_, Some(y)) if y == -1.0 => self.neg(),
            _ => Expr::new(Node::Binary(BinaryOp::Div, self.clone(), b.clone())),
        }
    }

    pub fn powh(&self, e: HalfInt) -> Expr {
        if e.0 == 0 {
            return Expr::one();
        }
        if e.0 == 2 {
            return self.clone();
        }
        if let Some(v) = self.as_const() {
            let r = v.powf(e.value());
            if r.is_finite() && (e.is_integer() || v >= 0.0) {
                return Expr::constant(r);
            }
        }
        if let Node::Pow(base, inner) = self.node() {
            // (b^(i/2))^(j/2) = b^(ij/4) only stays a half-integer when the product is even
            // and only composes safely for integer outer exponents.
            if e.is_integer() && (inner.0 * e.0) % 2 == 0 {
                return base.powh(HalfInt(inner.0 * e.0 / 2));
            }
        }
        Expr::new(Node::Pow(self.clone(), e))
    }

    pub fn powi(&self, n: i32) -> Expr {
        self.powh(HalfInt(2 * n))
    }

    pub fn square(&self) -> Expr {
        self.powi(2)
    }

    /// Sum of a list, folding constants.
    pub fn sum<'a, I: IntoIterator<Item = &'a Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), |acc, t| acc.add(t))
    }

    /// Partial derivative with respect to coordinate `var`.
    pub fn diff(&self, var: usize) -> Expr {
        let mut memo = HashMap::new();
        diff_rec(self, var, &mut memo)
    }

    /// Replace every coordinate `i` by `subs[i]`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        let mut memo = HashMap::new();
        subst_rec(self, subs, &mut memo)
    }

    /// Whether coordinate `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: usize) -> bool {
        let mut seen = HashMap::new();
        depends_rec(self, var, &mut seen)
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut seen = std::collections::HashSet::new();
        let mut best = None;
        max_var_rec(self, &mut seen, &mut best);
        best
    }

    /// Number of distinct DAG nodes.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        count_rec(self, &mut seen);
        seen.len()
    }

    /// Number of nodes when the DAG is printed as a tree, saturating at `cap`.
    pub fn tree_size(&self, cap: usize) -> usize {
        let mut memo = HashMap::new();
        tree_size_rec(self, cap, &mut memo)
    }

    /// Render with coordinate and parameter names.
    pub fn display<'a>(&'a self, symbols: &'a Symbols) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            symbols,
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let symbols = Symbols::default();
        write!(f, "{}", self.display(&symbols))
    }
}

fn diff_rec(e: &Expr, var: usize, memo: &mut HashMap<*const Node, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.ptr()) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Const(_) | Node::Param(_) => Expr::zero(),
        Node::Var(i) => {
            if *i == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Unary(op, a) => {
            let da = diff_rec(a, var, memo);
            if da.is_const_zero() {
                Expr::zero()
            } else {
                let outer = match op {
                    UnaryOp::Neg => Expr::constant(-1.0),
                    UnaryOp::Sin => a.cos(),
                    UnaryOp::Cos => a.sin().neg(),
                    UnaryOp::Tan => a.cos().powi(-2),
                    UnaryOp::Exp => e.clone(),
                    UnaryOp::Ln => a.powi(-1),
                    UnaryOp::Sqrt => Expr::constant(0.5).div(e),
                    UnaryOp::Arctan => Expr::one().add(&a.square()).powi(-1),
                    UnaryOp::Arctanh => Expr::one().sub(&a.square()).powi(-1),
                };
                outer.mul(&da)
            }
        }
        Node::Binary(op, a, b) => {
            let da = diff_rec(a, var, memo);
            let db = diff_rec(b, var, memo);
            match op {
                BinaryOp::Add => da.add(&db),
                BinaryOp::Sub => da.sub(&db),
                BinaryOp::Mul => da.mul(b).add(&a.mul(&db)),
                BinaryOp::Div => {
                    if db.is_const_zero() {
                        da.div(b)
                    } else {
                        da.div(b).sub(&a.mul(&db).div(&b.square()))
                    }
                }
            }
        }
        Node::Pow(a, k) => {
            let da = diff_rec(a, var, memo);
            if da.is_const_zero() {
                Expr::zero()
            } else {
                Expr::constant(k.value())
                    .mul(&a.powh(HalfInt(k.0 - 2)))
                    .mul(&da)
            }
        }
    };
    memo.insert(e.ptr(), d.clone());
    d
}

fn subst_rec(e: &Expr, subs: &[Expr], memo: &mut HashMap<*const Node, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.ptr()) {
        return d.clone();
    }
    let r = match e.node() {
        Node::Const(_) | Node::Param(_) => e.clone(),
        Node::Var(i) => subs[*i].clone(),
        Node::Unary(op, a) => Expr::unary(*op, &subst_rec(a, subs, memo)),
        Node::Binary(op, a, b) => {
            let a = subst_rec(a, subs, memo);
            let b = subst_rec(b, subs, memo);
            match op {
                BinaryOp::Add => a.add(&b),
                BinaryOp::Sub => a.sub(&b),
                BinaryOp::Mul => a.mul(&b),
                BinaryOp::Div => a.div(&b),
            }
        }
        Node::Pow(a, k) => subst_rec(a, subs, memo).powh(*k),
    };
    memo.insert(e.ptr(), r.clone());
    r
}

fn depends_rec(e: &Expr, var: usize, seen: &mut HashMap<*const Node, bool>) -> bool {
    if let Some(v) = seen.get(&e.ptr()) {
        return *v;
    }
    let r = match e.node() {
        Node::Const(_) | Node::Param(_) => false,
        Node::Var(i) => *i == var,
        Node::Unary(_, a) | Node::Pow(a, _) => depends_rec(a, var, seen),
        Node::Binary(_, a, b) => depends_rec(a, var, seen) || depends_rec(b, var, seen),
    };
    seen.insert(e.ptr(), r);
    r
}

fn max_var_rec(
    e: &Expr,
    seen: &mut std::collections::HashSet<*const Node>,
    best: &mut Option<usize>,
) {
    if !seen.insert(e.ptr()) {
        return;
    }
    match e.node() {
        Node::Var(i) => *best = Some(best.map_or(*i, |b| b.max(*i))),
        Node::Unary(_, a) | Node::Pow(a, _) => max_var_rec(a, seen, best),
        Node::Binary(_, a, b) => {
            max_var_rec(a, seen, best);
            max_var_rec(b, seen, best);
        }
        _ => {}
    }
}

fn count_rec(e: &Expr, seen: &mut std::collections::HashSet<*const Node>) {
    if !seen.insert(e.ptr()) {
        return;
    }
    match e.node() {
        Node::Unary(_, a) | Node::Pow(a, _) => count_rec(a, seen),
        Node::Binary(_, a, b) => {
            count_rec(a, seen);
            count_rec(b, seen);
        }
        _ => {}
    }
}

fn tree_size_rec(e: &Expr, cap: usize, memo: &mut HashMap<*const Node, usize>) -> usize {
    if let Some(v) = memo.get(&e.ptr()) {
        return *v;
    }
    let r = match e.node() {
        Node::Unary(_, a) | Node::Pow(a, _) => 1 + tree_size_rec(a, cap, memo),
        Node::Binary(_, a, b) => 1 + tree_size_rec(a, cap, memo) + tree_size_rec(b, cap, memo),
        _ => 1,
    }
    .min(cap);
    memo.insert(e.ptr(), r);
    r
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    symbols: &'a Symbols,
}

impl ExprDisplay<'_> {
    fn write(&self, e: &Expr, parent_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e.node() {
            Node::Const(v) => {
                if *v < 0.0 && parent_prec > 0 {
                    write!(f, "({})", fmt_num(*v))
                } else {
                    write!(f, "{}", fmt_num(*v))
                }
            }
            Node::Param(i) => match self.symbols.params.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "p{i}"),
            },
            Node::Var(i) => match self.symbols.coords.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "q{i}"),
            },
            Node::Unary(UnaryOp::Neg, a) => {
                // unary minus binds like a sum term
                if parent_prec > 1 {
                    write!(f, "(")?;
                }
                write!(f, "-")?;
                self.write(a, 3, f)?;
                if parent_prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Node::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                self.write(a, 0, f)?;
                write!(f, ")")
            }
            Node::Binary(op, a, b) => {
                let p = op.precedence();
                let paren = p < parent_prec;
                if paren {
                    write!(f, "(")?;
                }
                self.write(a, p, f)?;
                write!(f, " {} ", op.symbol())?;
                // right operand of - and / needs stricter grouping
                let right_prec = match op {
                    BinaryOp::Sub | BinaryOp::Div => p + 1,
                    _ => p,
                };
                self.write(b, right_prec, f)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Node::Pow(a, k) => {
                let paren = parent_prec > 3;
                if paren {
                    write!(f, "(")?;
                }
                self.write(a, 4, f)?;
                if k.is_integer() && k.0 >= 0 {
                    write!(f, "^{}", k.0 / 2)?;
                } else if k.is_integer() {
                    write!(f, "^({})", k.0 / 2)?;
                } else {
                    write!(f, "^({}/2)", k.0)?;
                }
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_rewrites_keep_trees_small() {
        let x = Expr::var(0);
        assert!(x.mul(&Expr::zero()).is_const_zero());
        assert!(x.mul(&Expr::one()).ptr_eq(&x));
        assert_eq!(Expr::constant(2.0).add(&Expr::constant(3.0)).as_const(), Some(5.0));
        assert!(x.sub(&x).is_const_zero());
        assert!(x.neg().neg().ptr_eq(&x));
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let s = Symbols::new(&["theta"], &[] as &[&str]);
        let d = Expr::var(0).sin().diff(0);
        assert_eq!(d.display(&s).to_string(), "cos(theta)");
    }

    #[test]
    fn derivative_of_unrelated_var_is_zero() {
        assert!(Expr::var(1).diff(0).is_const_zero());
    }

    #[test]
    fn shared_subtrees_survive_differentiation() {
        let mut e = Expr::var(0);
        for _ in 0..40 {
            e = e.mul(&e).sin();
        }
        let d = e.diff(0);
        assert!(d.dag_size() < 2000);
    }

    #[test]
    fn half_integer_powers_compose() {
        let x = Expr::var(0);
        let r = x.powh(HalfInt(1)).powi(2);
        assert!(r.ptr_eq(&x));
    }
}
