use std::collections::HashMap;

use super::expr::{BinaryOp, Expr, HalfInt, Node, Symbols, UnaryOp};
use super::SymError;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Instr {
    Const(f64),
    Param(usize),
    Var(usize),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    Pow(usize, HalfInt),
}

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Const(u64),
    Param(usize),
    Var(usize),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    Pow(usize, HalfInt),
}

/// A set of expressions flattened into one straight-line program with
/// common subexpressions merged. Use this whenever the same expressions are
/// evaluated at many points.
#[derive(Debug, Clone)]
pub struct Tape {
    instrs: Vec<Instr>,
    outputs: Vec<usize>,
    exprs: Vec<Expr>,
    node_of: Vec<Expr>,
}

/// Result of one tape evaluation.
#[derive(Debug, Clone)]
pub struct TapeValues {
    pub values: Vec<f64>,
    /// Largest operand magnitude entering an addition or subtraction.
    pub scale: f64,
}

impl Tape {
    pub fn new(exprs: &[Expr]) -> Self {
        let mut builder = Builder {
            instrs: Vec::new(),
            node_of: Vec::new(),
            by_ptr: HashMap::new(),
            by_key: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| builder.push(e)).collect();
        Tape {
            instrs: builder.instrs,
            outputs,
            exprs: exprs.to_vec(),
            node_of: builder.node_of,
        }
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    /// Evaluate every output. Fails on the first subexpression that leaves
    /// the real domain (division by zero, logarithm of a nonpositive value).
    pub fn eval(&self, vars: &[f64], params: &[f64]) -> Result<Vec<f64>, SymError> {
        self.eval_scaled(vars, params).map(|v| v.values)
    }

    pub fn eval_scaled(&self, vars: &[f64], params: &[f64]) -> Result<TapeValues, SymError> {
        let mut slots = vec![0.0; self.instrs.len()];
        let mut scale: f64 = 0.0;
        for (k, instr) in self.instrs.iter().enumerate() {
            let v = match *instr {
                Instr::Const(c) => c,
                Instr::Param(i) => *params.get(i).ok_or(SymError::Unbound {
                    what: format!("parameter #{i}"),
                })?,
                Instr::Var(i) => *vars.get(i).ok_or(SymError::Unbound {
                    what: format!("coordinate #{i}"),
                })?,
                Instr::Unary(op, a) => {
                    let x = slots[a];
                    if op.domain_violation(x) {
                        return Err(self.domain_error(k, x));
                    }
                    op.apply(x)
                }
                Instr::Binary(op, a, b) => {
                    let (x, y) = (slots[a], slots[b]);
                    match op {
                        BinaryOp::Add => {
                            scale = scale.max(x.abs()).max(y.abs());
                            x + y
                        }
                        BinaryOp::Sub => {
                            scale = scale.max(x.abs()).max(y.abs());
                            x - y
                        }
                        BinaryOp::Mul => x * y,
                        BinaryOp::Div => {
                            if y == 0.0 {
                                return Err(self.domain_error(k, y));
                            }
                            x / y
                        }
                    }
                }
                Instr::Pow(a, e) => {
                    let x = slots[a];
                    if e.is_integer() {
                        if x == 0.0 && e.0 < 0 {
                            return Err(self.domain_error(k, x));
                        }
                        x.powi(e.0 / 2)
                    } else {
                        if x < 0.0 || (x == 0.0 && e.0 < 0) {
                            return Err(self.domain_error(k, x));
                        }
                        x.sqrt().powi(e.0)
                    }
                }
            };
            if !v.is_finite() {
                return Err(self.domain_error(k, v));
            }
            slots[k] = v;
        }
        Ok(TapeValues {
            values: self.outputs.iter().map(|&o| slots[o]).collect(),
            scale,
        })
    }

    fn domain_error(&self, k: usize, value: f64) -> SymError {
        let symbols = Symbols::default();
        let mut text = self.node_of[k].display(&symbols).to_string();
        if text.len() > 160 {
            text.truncate(157);
            text.push_str("...");
        }
        SymError::Domain {
            subexpr: text,
            value,
        }
    }
}

struct Builder {
    instrs: Vec<Instr>,
    node_of: Vec<Expr>,
    by_ptr: HashMap<*const Node, usize>,
    by_key: HashMap<Key, usize>,
}

impl Builder {
    fn push(&mut self, e: &Expr) -> usize {
        if let Some(&k) = self.by_ptr.get(&e.ptr()) {
            return k;
        }
        let (instr, key) = match e.node() {
            Node::Const(c) => (Instr::Const(*c), Key::Const(c.to_bits())),
            Node::Param(i) => (Instr::Param(*i), Key::Param(*i)),
            Node::Var(i) => (Instr::Var(*i), Key::Var(*i)),
            Node::Unary(op, a) => {
                let a = self.push(a);
                (Instr::Unary(*op, a), Key::Unary(*op, a))
            }
            Node::Binary(op, a, b) => {
                let a = self.push(a);
                let b = self.push(b);
                (Instr::Binary(*op, a, b), Key::Binary(*op, a, b))
            }
            Node::Pow(a, k) => {
                let a = self.push(a);
                (Instr::Pow(a, *k), Key::Pow(a, *k))
            }
        };
        let slot = match self.by_key.get(&key) {
            Some(&k) => k,
            None => {
                self.instrs.push(instr);
                self.node_of.push(e.clone());
                let k = self.instrs.len() - 1;
                self.by_key.insert(key, k);
                k
            }
        };
        self.by_ptr.insert(e.ptr(), slot);
        slot
    }
}

impl Expr {
    /// Evaluate at one point. For repeated evaluation compile a [`Tape`].
    pub fn eval(&self, vars: &[f64], params: &[f64]) -> Result<f64, SymError> {
        Tape::new(std::slice::from_ref(self))
            .eval(vars, params)
            .map(|v| v[0])
    }
}
