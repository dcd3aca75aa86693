//! Reverse-mode automatic differentiation over a recorded operation graph.
//!
//! A [`Graph`] is an arena of nodes in topological order: every node's
//! inputs were created before it, so the forward pass is the recording
//! itself and the backward pass is a single reverse sweep. Ops store
//! whatever the backward rule needs (masks, token ids, cached softmax).
//!
//! One graph corresponds to one forward/backward pass, typically a single
//! training minibatch. Graphs are confined to one thread; independent
//! graphs may run concurrently.

use crate::autodiff::kernels::{mm_nn, mm_nt, mm_tn};
use crate::autodiff::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

#[derive(Debug)]
enum Op<S: Scalar> {
    Leaf,
    Add,
    Mul,
    Scale(S),
    Sum,
    Matmul,
    /// a * b^T with b stored untransposed.
    MatmulNT,
    Relu,
    Sigmoid,
    Tanh,
    /// x[n,d] + bias[d] broadcast over rows.
    AddBias,
    /// Row gather from an embedding table.
    Embedding { ids: Vec<u32> },
    /// Mean over rows where mask is true.
    MeanPool { mask: Vec<bool> },
    /// Width-3 same-length convolution; masked rows contribute zero.
    Conv1d { mask: Option<Vec<bool>> },
    /// Mean over batch of -log softmax(logits)[label]; softmax kept for backward.
    SoftmaxCrossEntropy { labels: Vec<usize>, probs: Tensor<S> },
    /// Per-row normalization with learned gain/shift; xhat and 1/std kept.
    LayerNorm { xhat: Tensor<S>, inv_std: Vec<S> },
    /// Row-wise softmax with masked-out (false) columns forced to zero weight.
    MaskedSoftmax { mask: Vec<bool> },
    SliceCols { start: usize },
    SliceRows { start: usize },
    ConcatCols,
    StackRows,
    /// Same data, new shape; gradient passes through reshaped back.
    Reshape,
}

struct Node<S: Scalar> {
    op: Op<S>,
    inputs: Vec<Var>,
    value: Tensor<S>,
    requires_grad: bool,
}

/// Recorded computation with reverse-mode gradients.
pub struct Graph<S: Scalar> {
    nodes: Vec<Node<S>>,
    grads: Vec<Option<Tensor<S>>>,
    check_finite: bool,
    trace: Option<Vec<usize>>,
}

impl<S: Scalar> Default for Graph<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> Graph<S> {
    pub fn new() -> Self {
        Graph { nodes: Vec::new(), grads: Vec::new(), check_finite: false, trace: None }
    }

    /// Graph that verifies every op output is finite (used by tests; the
    /// trainer checks the loss instead to keep the hot path lean).
    pub fn new_checked() -> Self {
        Graph { check_finite: true, ..Graph::new() }
    }

    /// Record the order backward visits nodes; read it with [`Graph::take_trace`].
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<usize> {
        self.trace.take().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<S> {
        &self.nodes[v.0].value
    }

    /// Gradient accumulated at `v`, if any flowed there.
    pub fn grad(&self, v: Var) -> Option<&Tensor<S>> {
        self.grads[v.0].as_ref()
    }

    /// Gradient at a leaf, zeros if nothing flowed (same shape as the value).
    pub fn leaf_grad(&self, v: Var) -> Tensor<S> {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => Tensor::zeros(self.nodes[v.0].value.shape().to_vec()),
        }
    }

    fn push(&mut self, op: Op<S>, inputs: Vec<Var>, value: Tensor<S>) -> Result<Var> {
        if self.check_finite && !value.is_finite() {
            return Err(Error::NonFinite { op: op_name(&op) });
        }
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        let id = self.nodes.len();
        self.nodes.push(Node { op, inputs, value, requires_grad });
        self.grads.push(None);
        Ok(Var(id))
    }

    /// Constant input: gradients do not flow into it.
    pub fn leaf(&mut self, value: Tensor<S>) -> Var {
        let id = self.nodes.len();
        self.nodes.push(Node { op: Op::Leaf, inputs: vec![], value, requires_grad: false });
        self.grads.push(None);
        Var(id)
    }

    /// Trainable input: receives a gradient after backward().
    pub fn param(&mut self, value: Tensor<S>) -> Var {
        let id = self.nodes.len();
        self.nodes.push(Node { op: Op::Leaf, inputs: vec![], value, requires_grad: true });
        self.grads.push(None);
        Var(id)
    }

    // ── op builders ──────────────────────────────────────────────────

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err("add", ta.shape(), tb.shape()));
        }
        let mut out = ta.clone();
        out.add_assign(tb);
        self.push(Op::Add, vec![a, b], out)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err("mul", ta.shape(), tb.shape()));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| x * y).collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        self.push(Op::Mul, vec![a, b], out)
    }

    pub fn scale(&mut self, a: Var, c: S) -> Result<Var> {
        let ta = self.value(a);
        let data = ta.data().iter().map(|&x| x * c).collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        self.push(Op::Scale(c), vec![a], out)
    }

    /// Sum of all elements, as a scalar tensor.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let total = self.value(a).data().iter().copied().sum();
        self.push(Op::Sum, vec![a], Tensor::scalar(total))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.ndim() != 2 || tb.ndim() != 2 || ta.cols() != tb.rows() {
            return Err(shape_err("matmul", ta.shape(), tb.shape()));
        }
        let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
        let mut out = Tensor::zeros(vec![m, n]);
        mm_nn(ta.data(), tb.data(), out.data_mut(), m, k, n);
        self.push(Op::Matmul, vec![a, b], out)
    }

    /// a * b^T without materializing the transpose.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.ndim() != 2 || tb.ndim() != 2 || ta.cols() != tb.cols() {
            return Err(shape_err("matmul_nt", ta.shape(), tb.shape()));
        }
        let (m, k, q) = (ta.rows(), ta.cols(), tb.rows());
        let mut out = Tensor::zeros(vec![m, q]);
        mm_nt(ta.data(), tb.data(), out.data_mut(), m, k, q);
        self.push(Op::MatmulNT, vec![a, b], out)
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let ta = self.value(a);
        let data = ta.data().iter().map(|&x| if x > S::zero() { x } else { S::zero() }).collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        self.push(Op::Relu, vec![a], out)
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let ta = self.value(a);
        let one = S::one();
        let data = ta.data().iter().map(|&x| one / (one + (-x).exp())).collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        self.push(Op::Sigmoid, vec![a], out)
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        let ta = self.value(a);
        let data = ta.data().iter().map(|&x| x.tanh()).collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        self.push(Op::Tanh, vec![a], out)
    }

    /// x[n,d] + bias[d], broadcast over rows.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (tx, tb) = (self.value(x), self.value(bias));
        if tx.ndim() != 2 || tb.ndim() != 1 || tx.cols() != tb.numel() {
            return Err(shape_err("add_bias", tx.shape(), tb.shape()));
        }
        let d = tx.cols();
        let mut out = tx.clone();
        for row in out.data_mut().chunks_mut(d) {
            for (o, &b) in row.iter_mut().zip(tb.data()) {
                *o += b;
            }
        }
        self.push(Op::AddBias, vec![x, bias], out)
    }

    /// Gather rows `ids` from `table[V,d]` into `[len(ids), d]`.
    pub fn embedding(&mut self, table: Var, ids: &[u32]) -> Result<Var> {
        let tt = self.value(table);
        if tt.ndim() != 2 {
            return Err(shape_err("embedding", tt.shape(), &[]));
        }
        let (v, d) = (tt.rows(), tt.cols());
        if let Some(&bad) = ids.iter().find(|&&id| id as usize >= v) {
            return Err(Error::invalid("embedding", format!("token id {bad} >= table rows {v}")));
        }
        let mut data = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            data.extend_from_slice(&tt.data()[id as usize * d..(id as usize + 1) * d]);
        }
        let out = Tensor::new(vec![ids.len(), d], data)?;
        self.push(Op::Embedding { ids: ids.to_vec() }, vec![table], out)
    }

    /// Mean over rows of x[L,d] where mask is true. Errors when nothing is
    /// left to pool.
    pub fn mean_pool(&mut self, x: Var, mask: &[bool]) -> Result<Var> {
        let tx = self.value(x);
        if tx.ndim() != 2 || mask.len() != tx.rows() {
            return Err(shape_err("mean_pool", tx.shape(), &[mask.len()]));
        }
        let count = mask.iter().filter(|&&m| m).count();
        if count == 0 {
            return Err(Error::EmptySequence);
        }
        let d = tx.cols();
        let inv = S::from_f64_lossy(1.0 / count as f64);
        let mut acc = vec![S::zero(); d];
        for (t, row) in tx.data().chunks(d).enumerate() {
            if mask[t] {
                for (a, &v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
        }
        for a in acc.iter_mut() {
            *a *= inv;
        }
        let out = Tensor::new(vec![d], acc)?;
        self.push(Op::MeanPool { mask: mask.to_vec() }, vec![x], out)
    }

    /// Same-length width-3 convolution of x[L,din] with kernel[3,din,dout],
    /// zero-padded one position on each side. Rows where `mask` is false are
    /// treated as zero input, matching the padding semantics.
    pub fn conv1d(&mut self, x: Var, kernel: Var, mask: Option<&[bool]>) -> Result<Var> {
        let (tx, tk) = (self.value(x), self.value(kernel));
        if tx.ndim() != 2 || tk.ndim() != 3 || tk.shape()[0] != 3 || tk.shape()[1] != tx.cols() {
            return Err(shape_err("conv1d", tx.shape(), tk.shape()));
        }
        if let Some(m) = mask {
            if m.len() != tx.rows() {
                return Err(shape_err("conv1d", tx.shape(), &[m.len()]));
            }
        }
        let (l, din, dout) = (tx.rows(), tk.shape()[1], tk.shape()[2]);
        let mut out = Tensor::zeros(vec![l, dout]);
        for tap in 0..3usize {
            let k_tap = &tk.data()[tap * din * dout..(tap + 1) * din * dout];
            for t in 0..l {
                let s = t as isize + tap as isize - 1;
                if s < 0 || s >= l as isize {
                    continue;
                }
                let s = s as usize;
                if mask.map_or(false, |m| !m[s]) {
                    continue;
                }
                let x_row = &tx.data()[s * din..(s + 1) * din];
                let out_row = &mut out.data_mut()[t * dout..(t + 1) * dout];
                for (i, &xv) in x_row.iter().enumerate() {
                    let k_row = &k_tap[i * dout..(i + 1) * dout];
                    for (o, &kv) in out_row.iter_mut().zip(k_row) {
                        *o += xv * kv;
                    }
                }
            }
        }
        self.push(Op::Conv1d { mask: mask.map(|m| m.to_vec()) }, vec![x, kernel], out)
    }

    /// Mean over the batch of -log softmax(logits)[label], max-stabilized.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let tl = self.value(logits);
        if tl.ndim() != 2 || tl.rows() != labels.len() {
            return Err(shape_err("softmax_cross_entropy", tl.shape(), &[labels.len()]));
        }
        let (b, c) = (tl.rows(), tl.cols());
        if let Some(&bad) = labels.iter().find(|&&y| y >= c) {
            return Err(Error::LabelOutOfRange { label: bad, classes: c });
        }
        let mut probs = Tensor::zeros(vec![b, c]);
        let mut loss = S::zero();
        for (r, &label) in labels.iter().enumerate() {
            let row = tl.row(r);
            let max = row.iter().copied().fold(S::neg_infinity(), S::max);
            let prow = &mut probs.data_mut()[r * c..(r + 1) * c];
            let mut denom = S::zero();
            for (p, &z) in prow.iter_mut().zip(row) {
                *p = (z - max).exp();
                denom += *p;
            }
            for p in prow.iter_mut() {
                *p = *p / denom;
            }
            // -log p[label] = log(denom) - (z[label] - max)
            loss += denom.ln() - (row[label] - max);
        }
        loss = loss / S::from_f64_lossy(b as f64);
        let out = Tensor::scalar(loss);
        self.push(Op::SoftmaxCrossEntropy { labels: labels.to_vec(), probs }, vec![logits], out)
    }

    /// Per-row layer normalization of x[n,d] with gain[d] and shift[d].
    pub fn layer_norm(&mut self, x: Var, gain: Var, shift: Var) -> Result<Var> {
        let (tx, tg, ts) = (self.value(x), self.value(gain), self.value(shift));
        if tx.ndim() != 2 || tg.numel() != tx.cols() || ts.numel() != tx.cols() {
            return Err(shape_err("layer_norm", tx.shape(), tg.shape()));
        }
        let (n, d) = (tx.rows(), tx.cols());
        let eps = S::from_f64_lossy(1e-5);
        let inv_d = S::from_f64_lossy(1.0 / d as f64);
        let mut xhat = Tensor::zeros(vec![n, d]);
        let mut inv_std = Vec::with_capacity(n);
        let mut out = Tensor::zeros(vec![n, d]);
        for r in 0..n {
            let row = tx.row(r);
            let mean = row.iter().copied().sum::<S>() * inv_d;
            let mut var = S::zero();
            for &v in row {
                let c = v - mean;
                var += c * c;
            }
            var = var * inv_d;
            let inv = (var + eps).sqrt().recip();
            inv_std.push(inv);
            let xh = &mut xhat.data_mut()[r * d..(r + 1) * d];
            for (x_out, &v) in xh.iter_mut().zip(row) {
                *x_out = (v - mean) * inv;
            }
            let o = &mut out.data_mut()[r * d..(r + 1) * d];
            for j in 0..d {
                o[j] = xh[j] * tg.data()[j] + ts.data()[j];
            }
        }
        self.push(Op::LayerNorm { xhat, inv_std }, vec![x, gain, shift], out)
    }

    /// Row-wise softmax over scores[n,L]; columns with mask=false get zero
    /// weight and the remainder renormalizes over the valid columns.
    pub fn masked_softmax(&mut self, scores: Var, mask: &[bool]) -> Result<Var> {
        let ts = self.value(scores);
        if ts.ndim() != 2 || ts.cols() != mask.len() {
            return Err(shape_err("masked_softmax", ts.shape(), &[mask.len()]));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::EmptySequence);
        }
        let (n, l) = (ts.rows(), ts.cols());
        let mut out = Tensor::zeros(vec![n, l]);
        for r in 0..n {
            let row = ts.row(r);
            let max = row
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(&v, _)| v)
                .fold(S::neg_infinity(), S::max);
            let orow = &mut out.data_mut()[r * l..(r + 1) * l];
            let mut denom = S::zero();
            for t in 0..l {
                if mask[t] {
                    orow[t] = (row[t] - max).exp();
                    denom += orow[t];
                }
            }
            for o in orow.iter_mut() {
                *o = *o / denom;
            }
        }
        self.push(Op::MaskedSoftmax { mask: mask.to_vec() }, vec![scores], out)
    }

    /// Columns [start, start+width) of x[n,d].
    pub fn slice_cols(&mut self, x: Var, start: usize, width: usize) -> Result<Var> {
        let tx = self.value(x);
        if tx.ndim() != 2 || start + width > tx.cols() {
            return Err(Error::invalid(
                "slice_cols",
                format!("range {}..{} out of {:?}", start, start + width, tx.shape()),
            ));
        }
        let (n, d) = (tx.rows(), tx.cols());
        let mut data = Vec::with_capacity(n * width);
        for r in 0..n {
            data.extend_from_slice(&tx.data()[r * d + start..r * d + start + width]);
        }
        let out = Tensor::new(vec![n, width], data)?;
        self.push(Op::SliceCols { start }, vec![x], out)
    }

    /// Rows [start, start+count) of x[n,d].
    pub fn slice_rows(&mut self, x: Var, start: usize, count: usize) -> Result<Var> {
        let tx = self.value(x);
        if tx.ndim() != 2 || start + count > tx.rows() {
            return Err(Error::invalid(
                "slice_rows",
                format!("range {}..{} out of {:?}", start, start + count, tx.shape()),
            ));
        }
        let d = tx.cols();
        let data = tx.data()[start * d..(start + count) * d].to_vec();
        let out = Tensor::new(vec![count, d], data)?;
        self.push(Op::SliceRows { start }, vec![x], out)
    }

    /// Concatenate 2-D inputs with equal row counts along columns.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::invalid("concat_cols", "no inputs"));
        }
        let n = self.value(parts[0]).rows();
        let mut total = 0;
        for &p in parts {
            let tp = self.value(p);
            if tp.ndim() != 2 || tp.rows() != n {
                return Err(shape_err("concat_cols", &[n], tp.shape()));
            }
            total += tp.cols();
        }
        let mut data = Vec::with_capacity(n * total);
        for r in 0..n {
            for &p in parts {
                let tp = self.value(p);
                data.extend_from_slice(tp.row(r));
            }
        }
        let out = Tensor::new(vec![n, total], data)?;
        self.push(Op::ConcatCols, parts.to_vec(), out)
    }

    /// Stack 1-D inputs of equal length into a matrix, one per row.
    /// View `x` under a new shape with identical element count.
    pub fn reshape(&mut self, x: Var, shape: Vec<usize>) -> Result<Var> {
        let tx = self.value(x);
        if shape.iter().product::<usize>() != tx.numel() {
            return Err(shape_err("reshape", tx.shape(), &shape));
        }
        let out = Tensor::new(shape, tx.data().to_vec())?;
        self.push(Op::Reshape, vec![x], out)
    }

    pub fn stack_rows(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::invalid("stack_rows", "no inputs"));
        }
        let d = self.value(parts[0]).numel();
        let mut data = Vec::with_capacity(parts.len() * d);
        for &p in parts {
            let tp = self.value(p);
            if tp.ndim() != 1 || tp.numel() != d {
                return Err(shape_err("stack_rows", &[d], tp.shape()));
            }
            data.extend_from_slice(tp.data());
        }
        let out = Tensor::new(vec![parts.len(), d], data)?;
        self.push(Op::StackRows, parts.to_vec(), out)
    }

    // ── backward ─────────────────────────────────────────────────────

    /// Reverse sweep from `loss` (a scalar node), accumulating gradients
    /// into every node that requires them. Nodes are visited strictly in
    /// reverse creation order, which is reverse topological order because
    /// inputs always precede their consumers in the arena.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let lt = &self.nodes[loss.0].value;
        if lt.numel() != 1 {
            return Err(Error::invalid("backward", format!("loss has shape {:?}", lt.shape())));
        }
        self.grads[loss.0] = Some(Tensor::scalar(S::one()));
        for i in (0..self.nodes.len()).rev() {
            if self.grads[i].is_none() || !self.nodes[i].requires_grad {
                continue;
            }
            if matches!(self.nodes[i].op, Op::Leaf) {
                continue;
            }
            if let Some(t) = self.trace.as_mut() {
                t.push(i);
            }
            self.backward_node(i);
        }
        Ok(())
    }

    fn backward_node(&mut self, i: usize) {
        // Inputs of node i always live at indices < i, so a split borrow
        // gives mutable access to their gradient slots while the node's own
        // gradient stays immutable.
        let (left, right) = self.grads.split_at_mut(i);
        let gout = right[0].as_ref().expect("visited node has a gradient");
        let node = &self.nodes[i];
        let input_val = |v: Var| -> &Tensor<S> { &self.nodes[v.0].value };
        let needs = |v: Var| -> bool { self.nodes[v.0].requires_grad };
        let accum = |slot: &mut [Option<Tensor<S>>], v: Var, g: Tensor<S>| {
            match &mut slot[v.0] {
                Some(existing) => existing.add_assign(&g),
                none => *none = Some(g),
            }
        };

        match &node.op {
            Op::Leaf => {}
            Op::Add => {
                for &v in &node.inputs {
                    if needs(v) {
                        accum(left, v, gout.clone());
                    }
                }
            }
            Op::Mul => {
                let (a, b) = (node.inputs[0], node.inputs[1]);
                if needs(a) {
                    let g = zip_map(gout, input_val(b), |g, y| g * y);
                    accum(left, a, g);
                }
                if needs(b) {
                    let g = zip_map(gout, input_val(a), |g, x| g * x);
                    accum(left, b, g);
                }
            }
            Op::Scale(c) => {
                let a = node.inputs[0];
                if needs(a) {
                    let c = *c;
                    let g = map(gout, |g| g * c);
                    accum(left, a, g);
                }
            }
            Op::Sum => {
                let a = node.inputs[0];
                if needs(a) {
                    let g = Tensor::full(input_val(a).shape().to_vec(), gout.item());
                    accum(left, a, g);
                }
            }
            Op::Matmul => {
                let (a, b) = (node.inputs[0], node.inputs[1]);
                let (ta, tb) = (input_val(a), input_val(b));
                let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
                if needs(a) {
                    let mut da = Tensor::zeros(vec![m, k]);
                    mm_nt(gout.data(), tb.data(), da.data_mut(), m, n, k);
                    accum(left, a, da);
                }
                if needs(b) {
                    let mut db = Tensor::zeros(vec![k, n]);
                    mm_tn(ta.data(), gout.data(), db.data_mut(), m, k, n);
                    accum(left, b, db);
                }
            }
            Op::MatmulNT => {
                // out = a * b^T; d_a = g * b, d_b = g^T * a.
                let (a, b) = (node.inputs[0], node.inputs[1]);
                let (ta, tb) = (input_val(a), input_val(b));
                let (m, k, q) = (ta.rows(), ta.cols(), tb.rows());
                if needs(a) {
                    let mut da = Tensor::zeros(vec![m, k]);
                    mm_nn(gout.data(), tb.data(), da.data_mut(), m, q, k);
                    accum(left, a, da);
                }
                if needs(b) {
                    let mut db = Tensor::zeros(vec![q, k]);
                    mm_tn(gout.data(), ta.data(), db.data_mut(), m, q, k);
                    accum(left, b, db);
                }
            }
            Op::Relu => {
                let a = node.inputs[0];
                if needs(a) {
                    let g = zip_map(gout, input_val(a), |g, x| {
                        if x > S::zero() {
                            g
                        } else {
                            S::zero()
                        }
                    });
                    accum(left, a, g);
                }
            }
            Op::Sigmoid => {
                let a = node.inputs[0];
                if needs(a) {
                    let g = zip_map(gout, &node.value, |g, s| g * s * (S::one() - s));
                    accum(left, a, g);
                }
            }
            Op::Tanh => {
                let a = node.inputs[0];
                if needs(a) {
                    let g = zip_map(gout, &node.value, |g, t| g * (S::one() - t * t));
                    accum(left, a, g);
                }
            }
            Op::AddBias => {
                let (x, bias) = (node.inputs[0], node.inputs[1]);
                if needs(x) {
                    accum(left, x, gout.clone());
                }
                if needs(bias) {
                    let d = input_val(bias).numel();
                    let mut db = Tensor::zeros(vec![d]);
                    for row in gout.data().chunks(d) {
                        for (o, &g) in db.data_mut().iter_mut().zip(row) {
                            *o += g;
                        }
                    }
                    accum(left, bias, db);
                }
            }
            Op::Embedding { ids } => {
                let table = node.inputs[0];
                if needs(table) {
                    let tt = input_val(table);
                    let (v, d) = (tt.rows(), tt.cols());
                    let mut dt = Tensor::zeros(vec![v, d]);
                    for (t, &id) in ids.iter().enumerate() {
                        let g_row = &gout.data()[t * d..(t + 1) * d];
                        let dst = &mut dt.data_mut()[id as usize * d..(id as usize + 1) * d];
                        for (o, &g) in dst.iter_mut().zip(g_row) {
                            *o += g;
                        }
                    }
                    accum(left, table, dt);
                }
            }
            Op::MeanPool { mask } => {
                let x = node.inputs[0];
                if needs(x) {
                    let tx = input_val(x);
                    let (l, d) = (tx.rows(), tx.cols());
                    let count = mask.iter().filter(|&&m| m).count();
                    let inv = S::from_f64_lossy(1.0 / count as f64);
                    let mut dx = Tensor::zeros(vec![l, d]);
                    for t in 0..l {
                        if mask[t] {
                            let dst = &mut dx.data_mut()[t * d..(t + 1) * d];
                            for (o, &g) in dst.iter_mut().zip(gout.data()) {
                                *o = g * inv;
                            }
                        }
                    }
                    accum(left, x, dx);
                }
            }
            Op::Conv1d { mask } => {
                let (x, kernel) = (node.inputs[0], node.inputs[1]);
                let (tx, tk) = (input_val(x), input_val(kernel));
                let (l, din, dout) = (tx.rows(), tk.shape()[1], tk.shape()[2]);
                let row_ok = |s: isize| -> Option<usize> {
                    if s < 0 || s >= l as isize {
                        return None;
                    }
                    let s = s as usize;
                    if mask.as_ref().map_or(false, |m| !m[s]) {
                        return None;
                    }
                    Some(s)
                };
                if needs(x) {
                    let mut dx = Tensor::zeros(vec![l, din]);
                    for tap in 0..3usize {
                        let k_tap = &tk.data()[tap * din * dout..(tap + 1) * din * dout];
                        for t in 0..l {
                            let Some(s) = row_ok(t as isize + tap as isize - 1) else { continue };
                            let g_row = &gout.data()[t * dout..(t + 1) * dout];
                            let dx_row = &mut dx.data_mut()[s * din..(s + 1) * din];
                            for (i, o) in dx_row.iter_mut().enumerate() {
                                let k_row = &k_tap[i * dout..(i + 1) * dout];
                                let mut acc = S::zero();
                                for (&kv, &gv) in k_row.iter().zip(g_row) {
                                    acc += kv * gv;
                                }
                                *o += acc;
                            }
                        }
                    }
                    accum(left, x, dx);
                }
                if needs(kernel) {
                    let mut dk = Tensor::zeros(vec![3, din, dout]);
                    for tap in 0..3usize {
                        let dk_tap = &mut dk.data_mut()[tap * din * dout..(tap + 1) * din * dout];
                        for t in 0..l {
                            let Some(s) = row_ok(t as isize + tap as isize - 1) else { continue };
                            let x_row = &tx.data()[s * din..(s + 1) * din];
                            let g_row = &gout.data()[t * dout..(t + 1) * dout];
                            for (i, &xv) in x_row.iter().enumerate() {
                                let dk_row = &mut dk_tap[i * dout..(i + 1) * dout];
                                for (o, &gv) in dk_row.iter_mut().zip(g_row) {
                                    *o += xv * gv;
                                }
                            }
                        }
                    }
                    accum(left, kernel, dk);
                }
            }
            Op::SoftmaxCrossEntropy { labels, probs } => {
                let logits = node.inputs[0];
                if needs(logits) {
                    let (b, c) = (probs.rows(), probs.cols());
                    let scale = gout.item() / S::from_f64_lossy(b as f64);
                    let mut dl = probs.clone();
                    for (r, &label) in labels.iter().enumerate() {
                        dl.data_mut()[r * c + label] -= S::one();
                    }
                    for v in dl.data_mut() {
                        *v *= scale;
                    }
                    accum(left, logits, dl);
                }
            }
            Op::LayerNorm { xhat, inv_std } => {
                let (x, gain, _shift) = (node.inputs[0], node.inputs[1], node.inputs[2]);
                let (n, d) = (xhat.rows(), xhat.cols());
                let inv_d = S::from_f64_lossy(1.0 / d as f64);
                let tg = input_val(gain);
                if needs(x) {
                    let mut dx = Tensor::zeros(vec![n, d]);
                    for r in 0..n {
                        let g_row = gout.row(r);
                        let xh = xhat.row(r);
                        let mut mean_h = S::zero();
                        let mut mean_hx = S::zero();
                        for j in 0..d {
                            let h = g_row[j] * tg.data()[j];
                            mean_h += h;
                            mean_hx += h * xh[j];
                        }
                        mean_h *= inv_d;
                        mean_hx *= inv_d;
                        let inv = inv_std[r];
                        let dst = &mut dx.data_mut()[r * d..(r + 1) * d];
                        for j in 0..d {
                            let h = g_row[j] * tg.data()[j];
                            dst[j] = inv * (h - mean_h - xh[j] * mean_hx);
                        }
                    }
                    accum(left, x, dx);
                }
                if needs(gain) {
                    let mut dg = Tensor::zeros(vec![d]);
                    for r in 0..n {
                        let g_row = gout.row(r);
                        let xh = xhat.row(r);
                        for (j, o) in dg.data_mut().iter_mut().enumerate() {
                            *o += g_row[j] * xh[j];
                        }
                    }
                    accum(left, gain, dg);
                }
                let shift = node.inputs[2];
                if needs(shift) {
                    let mut ds = Tensor::zeros(vec![d]);
                    for r in 0..n {
                        for (o, &g) in ds.data_mut().iter_mut().zip(gout.row(r)) {
                            *o += g;
                        }
                    }
                    accum(left, shift, ds);
                }
            }
            Op::MaskedSoftmax { mask } => {
                let scores = node.inputs[0];
                if needs(scores) {
                    let a = &node.value;
                    let (n, l) = (a.rows(), a.cols());
                    let mut ds = Tensor::zeros(vec![n, l]);
                    for r in 0..n {
                        let a_row = a.row(r);
                        let g_row = gout.row(r);
                        let mut dot = S::zero();
                        for t in 0..l {
                            dot += g_row[t] * a_row[t];
                        }
                        let dst = &mut ds.data_mut()[r * l..(r + 1) * l];
                        for t in 0..l {
                            if mask[t] {
                                dst[t] = a_row[t] * (g_row[t] - dot);
                            }
                        }
                    }
                    accum(left, scores, ds);
                }
            }
            Op::SliceCols { start } => {
                let x = node.inputs[0];
                if needs(x) {
                    let tx = input_val(x);
                    let (n, d) = (tx.rows(), tx.cols());
                    let w = node.value.cols();
                    let mut dx = Tensor::zeros(vec![n, d]);
                    for r in 0..n {
                        let g_row = gout.row(r);
                        dx.data_mut()[r * d + start..r * d + start + w].copy_from_slice(g_row);
                    }
                    accum(left, x, dx);
                }
            }
            Op::SliceRows { start } => {
                let x = node.inputs[0];
                if needs(x) {
                    let tx = input_val(x);
                    let (n, d) = (tx.rows(), tx.cols());
                    let count = node.value.rows();
                    let mut dx = Tensor::zeros(vec![n, d]);
                    dx.data_mut()[start * d..(start + count) * d].copy_from_slice(gout.data());
                    accum(left, x, dx);
                }
            }
            Op::ConcatCols => {
                let inputs = node.inputs.clone();
                let n = node.value.rows();
                let total = node.value.cols();
                let mut offset = 0;
                for v in inputs {
                    let w = input_val(v).cols();
                    if needs(v) {
                        let mut dv = Tensor::zeros(vec![n, w]);
                        for r in 0..n {
                            let src = &gout.data()[r * total + offset..r * total + offset + w];
                            dv.data_mut()[r * w..(r + 1) * w].copy_from_slice(src);
                        }
                        accum(left, v, dv);
                    }
                    offset += w;
                }
            }
            Op::StackRows => {
                let d = node.value.cols();
                for (r, &v) in node.inputs.iter().enumerate() {
                    if needs(v) {
                        let dv = Tensor::vector(&gout.data()[r * d..(r + 1) * d]);
                        accum(left, v, dv);
                    }
                }
            }
            Op::Reshape => {
                let x = node.inputs[0];
                if needs(x) {
                    let shape = input_val(x).shape().to_vec();
                    let dx = Tensor::new(shape, gout.data().to_vec()).expect("same numel");
                    accum(left, x, dx);
                }
            }
        }
    }
}

fn shape_err(op: &'static str, left: &[usize], right: &[usize]) -> Error {
    Error::ShapeMismatch { op, left: left.to_vec(), right: right.to_vec() }
}

fn op_name<S: Scalar>(op: &Op<S>) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::Add => "add",
        Op::Mul => "mul",
        Op::Scale(_) => "scale",
        Op::Sum => "sum",
        Op::Matmul => "matmul",
        Op::MatmulNT => "matmul_nt",
        Op::Relu => "relu",
        Op::Sigmoid => "sigmoid",
        Op::Tanh => "tanh",
        Op::AddBias => "add_bias",
        Op::Embedding { .. } => "embedding",
        Op::MeanPool { .. } => "mean_pool",
        Op::Conv1d { .. } => "conv1d",
        Op::SoftmaxCrossEntropy { .. } => "softmax_cross_entropy",
        Op::LayerNorm { .. } => "layer_norm",
        Op::MaskedSoftmax { .. } => "masked_softmax",
        Op::SliceCols { .. } => "slice_cols",
        Op::SliceRows { .. } => "slice_rows",
        Op::ConcatCols => "concat_cols",
        Op::StackRows => "stack_rows",
        Op::Reshape => "reshape",
    }
}

fn map<S: Scalar>(t: &Tensor<S>, f: impl Fn(S) -> S) -> Tensor<S> {
    Tensor::new(t.shape().to_vec(), t.data().iter().map(|&v| f(v)).collect())
        .expect("shape preserved")
}

fn zip_map<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>, f: impl Fn(S, S) -> S) -> Tensor<S> {
    debug_assert_eq!(a.shape(), b.shape());
    Tensor::new(
        a.shape().to_vec(),
        a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect(),
    )
    .expect("shape preserved")
}
