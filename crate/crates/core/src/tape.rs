//! Reverse-mode automatic differentiation over a linear tape.
//!
//! Every primitive evaluates its forward value eagerly and appends a node to
//! the tape. `backward` replays the nodes in reverse order, visiting each one
//! exactly once. Gradients of leaves and parameters accumulate across
//! `backward` calls on the same tape.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{contract, Error, Result};
use crate::tensor::{ParamGrads, ParamId, ParamSet, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    MatVec(Var, Var),
    VecMat(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    Softmax(Var),
    Concat(Vec<Var>),
    StackRows(Vec<Var>),
    Row(Var, usize),
    Sum(Var),
    CrossEntropy {
        logits: Var,
        targets: Vec<usize>,
        padding: Vec<bool>,
        count: usize,
    },
}

#[derive(Debug, Clone)]
struct Node {
    shape: Vec<usize>,
    // Empty for parameter nodes, whose value lives in the borrowed ParamSet.
    value: Vec<f64>,
    op: Op,
    requires_grad: bool,
}

/// Records a forward computation for later differentiation.
pub struct Tape<'p> {
    params: Option<&'p ParamSet>,
    nodes: Vec<Node>,
    leaf_grads: Vec<Option<Vec<f64>>>,
    param_grads: Vec<Option<Vec<f64>>>,
    param_vars: Vec<Option<Var>>,
}

impl Default for Tape<'static> {
    fn default() -> Self {
        Tape::new()
    }
}

impl Tape<'static> {
    /// A tape with no parameter set attached; inputs come from [`Tape::leaf`].
    pub fn new() -> Self {
        Tape {
            params: None,
            nodes: Vec::new(),
            leaf_grads: Vec::new(),
            param_grads: Vec::new(),
            param_vars: Vec::new(),
        }
    }
}

fn shape_err(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Error {
    Error::Shape {
        op,
        lhs: lhs.to_vec(),
        rhs: rhs.to_vec(),
    }
}

fn add_into(dst: &mut Option<Vec<f64>>, len: usize, f: impl FnOnce(&mut [f64])) {
    let g = dst.get_or_insert_with(|| vec![0.0; len]);
    f(g);
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Numerically stable softmax using max subtraction.
pub fn softmax_slice(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = x.iter().map(|&v| libm::exp(v - max)).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= z);
    out
}

impl<'p> Tape<'p> {
    /// A tape whose parameter nodes read from `params` without copying.
    pub fn with_params(params: &'p ParamSet) -> Self {
        Tape {
            params: Some(params),
            nodes: Vec::new(),
            leaf_grads: Vec::new(),
            param_grads: vec![None; params.len()],
            param_vars: vec![None; params.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    pub fn value(&self, v: Var) -> &[f64] {
        let node = &self.nodes[v.0];
        match node.op {
            Op::Param(id) => self
                .params
                .expect("parameter node without parameter set")
                .get(id)
                .data(),
            _ => &node.value,
        }
    }

    /// Scalar value of a one-element node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.value(v)[0]
    }

    fn push(&mut self, shape: Vec<usize>, value: Vec<f64>, op: Op, requires_grad: bool) -> Var {
        debug_assert!(matches!(op, Op::Param(_)) || shape.iter().product::<usize>() == value.len());
        self.nodes.push(Node {
            shape,
            value,
            op,
            requires_grad,
        });
        self.leaf_grads.push(None);
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Records a copy of `t` as a leaf; it accumulates gradient if `t.requires_grad()`.
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push(t.shape().to_vec(), t.data().to_vec(), Op::Leaf, t.requires_grad())
    }

    /// Records a constant (non-differentiable) value.
    pub fn constant(&mut self, shape: Vec<usize>, data: Vec<f64>) -> Result<Var> {
        let t = Tensor::new(shape, data)?;
        Ok(self.leaf(&t))
    }

    /// Node for parameter `id`; repeated calls return the same node.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.param_vars[id.index()] {
            return v;
        }
        let params = self.params.expect("tape has no parameter set");
        let t = params.get(id);
        let v = self.push(t.shape().to_vec(), Vec::new(), Op::Param(id), t.requires_grad());
        self.param_vars[id.index()] = Some(v);
        v
    }

    /// Matrix product `[m×k] · [k×n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(shape_err("matmul", sa, sb));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let (av, bv) = (self.value(a), self.value(b));
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for p in 0..k {
                let x = av[i * k + p];
                if x == 0.0 {
                    continue;
                }
                let brow = &bv[p * n..(p + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for (o, &y) in orow.iter_mut().zip(brow) {
                    *o += x * y;
                }
            }
        }
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(vec![m, n], out, Op::MatMul(a, b), rg))
    }

    /// Matrix-vector product `[m×k] · [k]`.
    pub fn matvec(&mut self, w: Var, x: Var) -> Result<Var> {
        let (sw, sx) = (self.shape(w), self.shape(x));
        if sw.len() != 2 || sx.len() != 1 || sw[1] != sx[0] {
            return Err(shape_err("matvec", sw, sx));
        }
        let (m, k) = (sw[0], sw[1]);
        let (wv, xv) = (self.value(w), self.value(x));
        let out: Vec<f64> = (0..m)
            .map(|i| wv[i * k..(i + 1) * k].iter().zip(xv).map(|(a, b)| a * b).sum())
            .collect();
        let rg = self.rg(w) || self.rg(x);
        Ok(self.push(vec![m], out, Op::MatVec(w, x), rg))
    }

    /// Vector-matrix product `[m] · [m×n]`, i.e. a weighted sum of rows.
    pub fn vecmat(&mut self, x: Var, a: Var) -> Result<Var> {
        let (sx, sa) = (self.shape(x), self.shape(a));
        if sx.len() != 1 || sa.len() != 2 || sx[0] != sa[0] {
            return Err(shape_err("vecmat", sx, sa));
        }
        let (m, n) = (sa[0], sa[1]);
        let (xv, av) = (self.value(x), self.value(a));
        let mut out = vec![0.0; n];
        for i in 0..m {
            for (o, &v) in out.iter_mut().zip(&av[i * n..(i + 1) * n]) {
                *o += xv[i] * v;
            }
        }
        let rg = self.rg(x) || self.rg(a);
        Ok(self.push(vec![n], out, Op::VecMat(x, a), rg))
    }

    fn zip_same(&mut self, a: Var, b: Var, name: &'static str, f: fn(f64, f64) -> f64, op: Op) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(shape_err(name, self.shape(a), self.shape(b)));
        }
        let out = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| f(x, y))
            .collect();
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(self.shape(a).to_vec(), out, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_same(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_same(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_same(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    /// Adds the vector `b [n]` to every row of `a [m×n]` (or to `a [n]`).
    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        let n = *sa.last().unwrap_or(&0);
        if sa.is_empty() || sa.len() > 2 || sb != [n] {
            return Err(shape_err("add_row", sa, sb));
        }
        let bv = self.value(b);
        let out = self.value(a).iter().enumerate().map(|(i, &x)| x + bv[i % n]).collect();
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(sa.to_vec(), out, Op::AddRow(a, b), rg))
    }

    fn map(&mut self, a: Var, f: fn(f64) -> f64, op: Op) -> Var {
        let out = self.value(a).iter().map(|&x| f(x)).collect();
        let rg = self.rg(a);
        self.push(self.shape(a).to_vec(), out, op, rg)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, sigmoid, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, libm::tanh, Op::Tanh(a))
    }

    /// Softmax over a vector.
    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        let s = self.shape(a);
        if s.len() != 1 {
            return Err(shape_err("softmax", s, &[]));
        }
        let out = softmax_slice(self.value(a));
        let rg = self.rg(a);
        Ok(self.push(s.to_vec(), out, Op::Softmax(a), rg))
    }

    /// Concatenates vectors end to end.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(contract("concat of zero vectors"));
        }
        let mut out = Vec::new();
        for &p in parts {
            if self.shape(p).len() != 1 {
                return Err(shape_err("concat", self.shape(p), &[]));
            }
            out.extend_from_slice(self.value(p));
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(vec![out.len()], out, Op::Concat(parts.to_vec()), rg))
    }

    /// Stacks equal-length vectors into the rows of a matrix.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Result<Var> {
        let first = *rows.first().ok_or_else(|| contract("stack of zero rows"))?;
        let n = self.shape(first).to_vec();
        if n.len() != 1 {
            return Err(shape_err("stack_rows", &n, &[]));
        }
        let mut out = Vec::with_capacity(rows.len() * n[0]);
        for &r in rows {
            if self.shape(r) != n.as_slice() {
                return Err(shape_err("stack_rows", &n, self.shape(r)));
            }
            out.extend_from_slice(self.value(r));
        }
        let rg = rows.iter().any(|&r| self.rg(r));
        Ok(self.push(vec![rows.len(), n[0]], out, Op::StackRows(rows.to_vec()), rg))
    }

    /// Row `index` of a matrix (embedding lookup).
    pub fn row(&mut self, table: Var, index: usize) -> Result<Var> {
        let s = self.shape(table);
        if s.len() != 2 {
            return Err(shape_err("row", s, &[]));
        }
        let (m, n) = (s[0], s[1]);
        if index >= m {
            return Err(Error::Index {
                what: "embedding table",
                index,
                size: m,
            });
        }
        let out = self.value(table)[index * n..(index + 1) * n].to_vec();
        let rg = self.rg(table);
        Ok(self.push(vec![n], out, Op::Row(table, index), rg))
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&mut self, a: Var) -> Var {
        let s: f64 = self.value(a).iter().sum();
        let rg = self.rg(a);
        self.push(Vec::new(), vec![s], Op::Sum(a), rg)
    }

    /// Mean negative log-likelihood of `targets` under row-wise softmax of
    /// `logits [batch×vocab]`, skipping rows whose `padding` flag is set.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[usize], padding: &[bool]) -> Result<Var> {
        let s = self.shape(logits).to_vec();
        if s.len() != 2 || targets.len() != s[0] || padding.len() != s[0] {
            return Err(shape_err("cross_entropy", &s, &[targets.len(), padding.len()]));
        }
        let (b, v) = (s[0], s[1]);
        if let Some(&t) = targets.iter().find(|&&t| t >= v) {
            return Err(Error::Index {
                what: "vocabulary",
                index: t,
                size: v,
            });
        }
        let count = padding.iter().filter(|&&p| !p).count();
        if count == 0 {
            return Err(contract("cross_entropy over zero unmasked positions"));
        }
        let lv = self.value(logits);
        let mut total = 0.0;
        for i in 0..b {
            if padding[i] {
                continue;
            }
            let row = &lv[i * v..(i + 1) * v];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + libm::log(row.iter().map(|&x| libm::exp(x - max)).sum::<f64>());
            total += lse - row[targets[i]];
        }
        let loss = total / count as f64;
        let rg = self.rg(logits);
        Ok(self.push(
            Vec::new(),
            vec![loss],
            Op::CrossEntropy {
                logits,
                targets: targets.to_vec(),
                padding: padding.to_vec(),
                count,
            },
            rg,
        ))
    }

    /// Backpropagates from the scalar `loss`, accumulating into leaf and
    /// parameter gradients.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.value(loss).len() != 1 {
            return Err(contract("backward requires a scalar loss"));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if !self.nodes[i].requires_grad {
                continue;
            }
            let op = self.nodes[i].op.clone();
            match op {
                Op::Leaf => {
                    add_into(&mut self.leaf_grads[i], g.len(), |d| {
                        d.iter_mut().zip(&g).for_each(|(a, b)| *a += b)
                    });
                }
                Op::Param(id) => {
                    add_into(&mut self.param_grads[id.index()], g.len(), |d| {
                        d.iter_mut().zip(&g).for_each(|(a, b)| *a += b)
                    });
                }
                Op::MatMul(a, b) => {
                    let (m, k) = (self.shape(a)[0], self.shape(a)[1]);
                    let n = self.shape(b)[1];
                    if self.rg(a) {
                        let bv = self.value(b);
                        let mut da = vec![0.0; m * k];
                        for i2 in 0..m {
                            for p in 0..k {
                                da[i2 * k + p] = (0..n).map(|j| g[i2 * n + j] * bv[p * n + j]).sum();
                            }
                        }
                        acc(&mut grads, a, &da);
                    }
                    if self.rg(b) {
                        let av = self.value(a);
                        let mut db = vec![0.0; k * n];
                        for i2 in 0..m {
                            for p in 0..k {
                                let x = av[i2 * k + p];
                                for j in 0..n {
                                    db[p * n + j] += x * g[i2 * n + j];
                                }
                            }
                        }
                        acc(&mut grads, b, &db);
                    }
                }
                Op::MatVec(w, x) => {
                    let (m, k) = (self.shape(w)[0], self.shape(w)[1]);
                    if self.rg(w) {
                        let xv = self.value(x);
                        let mut dw = vec![0.0; m * k];
                        for r in 0..m {
                            if g[r] == 0.0 {
                                continue;
                            }
                            for (d, &xx) in dw[r * k..(r + 1) * k].iter_mut().zip(xv) {
                                *d = g[r] * xx;
                            }
                        }
                        acc(&mut grads, w, &dw);
                    }
                    if self.rg(x) {
                        let wv = self.value(w);
                        let mut dx = vec![0.0; k];
                        for r in 0..m {
                            for (d, &ww) in dx.iter_mut().zip(&wv[r * k..(r + 1) * k]) {
                                *d += g[r] * ww;
                            }
                        }
                        acc(&mut grads, x, &dx);
                    }
                }
                Op::VecMat(x, a) => {
                    let (m, n) = (self.shape(a)[0], self.shape(a)[1]);
                    if self.rg(x) {
                        let av = self.value(a);
                        let dx: Vec<f64> = (0..m)
                            .map(|r| av[r * n..(r + 1) * n].iter().zip(&g).map(|(p, q)| p * q).sum())
                            .collect();
                        acc(&mut grads, x, &dx);
                    }
                    if self.rg(a) {
                        let xv = self.value(x);
                        let mut da = vec![0.0; m * n];
                        for r in 0..m {
                            for (d, &gg) in da[r * n..(r + 1) * n].iter_mut().zip(&g) {
                                *d = xv[r] * gg;
                            }
                        }
                        acc(&mut grads, a, &da);
                    }
                }
                Op::Add(a, b) => {
                    if self.rg(a) {
                        acc(&mut grads, a, &g);
                    }
                    if self.rg(b) {
                        acc(&mut grads, b, &g);
                    }
                }
                Op::Sub(a, b) => {
                    if self.rg(a) {
                        acc(&mut grads, a, &g);
                    }
                    if self.rg(b) {
                        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
                        acc(&mut grads, b, &neg);
                    }
                }
                Op::Mul(a, b) => {
                    if self.rg(a) {
                        let d: Vec<f64> = g.iter().zip(self.value(b)).map(|(p, q)| p * q).collect();
                        acc(&mut grads, a, &d);
                    }
                    if self.rg(b) {
                        let d: Vec<f64> = g.iter().zip(self.value(a)).map(|(p, q)| p * q).collect();
                        acc(&mut grads, b, &d);
                    }
                }
                Op::AddRow(a, b) => {
                    if self.rg(a) {
                        acc(&mut grads, a, &g);
                    }
                    if self.rg(b) {
                        let n = self.shape(b)[0];
                        let mut db = vec![0.0; n];
                        for (i2, &x) in g.iter().enumerate() {
                            db[i2 % n] += x;
                        }
                        acc(&mut grads, b, &db);
                    }
                }
                Op::Sigmoid(a) => {
                    let y = &self.nodes[i].value;
                    let d: Vec<f64> = g.iter().zip(y).map(|(gg, yy)| gg * yy * (1.0 - yy)).collect();
                    acc(&mut grads, a, &d);
                }
                Op::Tanh(a) => {
                    let y = &self.nodes[i].value;
                    let d: Vec<f64> = g.iter().zip(y).map(|(gg, yy)| gg * (1.0 - yy * yy)).collect();
                    acc(&mut grads, a, &d);
                }
                Op::Softmax(a) => {
                    let y = &self.nodes[i].value;
                    let dot: f64 = g.iter().zip(y).map(|(p, q)| p * q).sum();
                    let d: Vec<f64> = g.iter().zip(y).map(|(gg, yy)| yy * (gg - dot)).collect();
                    acc(&mut grads, a, &d);
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let n = self.shape(p)[0];
                        if self.rg(p) {
                            acc(&mut grads, p, &g[off..off + n]);
                        }
                        off += n;
                    }
                }
                Op::StackRows(rows) => {
                    let n = self.shape(rows[0])[0];
                    for (r, p) in rows.into_iter().enumerate() {
                        if self.rg(p) {
                            acc(&mut grads, p, &g[r * n..(r + 1) * n]);
                        }
                    }
                }
                Op::Row(table, index) => {
                    let s = self.shape(table);
                    let (m, n) = (s[0], s[1]);
                    let slot = grads[table.0].get_or_insert_with(|| vec![0.0; m * n]);
                    for (d, &x) in slot[index * n..(index + 1) * n].iter_mut().zip(&g) {
                        *d += x;
                    }
                }
                Op::Sum(a) => {
                    let n = self.value(a).len();
                    let d = vec![g[0]; n];
                    acc(&mut grads, a, &d);
                }
                Op::CrossEntropy {
                    logits,
                    targets,
                    padding,
                    count,
                } => {
                    let v = self.shape(logits)[1];
                    let lv = self.value(logits);
                    let scale = g[0] / count as f64;
                    let mut d = vec![0.0; lv.len()];
                    for (r, (&t, &pad)) in targets.iter().zip(&padding).enumerate() {
                        if pad {
                            continue;
                        }
                        let p = softmax_slice(&lv[r * v..(r + 1) * v]);
                        for (j, pj) in p.into_iter().enumerate() {
                            let onehot = if j == t { 1.0 } else { 0.0 };
                            d[r * v + j] = scale * (pj - onehot);
                        }
                    }
                    acc(&mut grads, logits, &d);
                }
            }
        }
        Ok(())
    }

    /// Accumulated gradient of a leaf recorded with [`Tape::leaf`].
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        match self.nodes[v.0].op {
            Op::Param(id) => self.param_grads[id.index()].as_deref(),
            _ => self.leaf_grads[v.0].as_deref(),
        }
    }

    /// Accumulated gradient of parameter `id`, if the loss reached it.
    pub fn param_grad(&self, id: ParamId) -> Option<&[f64]> {
        self.param_grads.get(id.index()).and_then(|g| g.as_deref())
    }

    /// Consumes the tape, returning the per-parameter gradients.
    pub fn into_param_grads(self) -> ParamGrads {
        ParamGrads(self.param_grads)
    }
}

fn acc(grads: &mut [Option<Vec<f64>>], v: Var, d: &[f64]) {
    add_into(&mut grads[v.0], d.len(), |slot| {
        slot.iter_mut().zip(d).for_each(|(a, b)| *a += b)
    });
}
