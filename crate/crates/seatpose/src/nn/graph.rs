//! Tape-based reverse-mode autodiff over `Array2<f64>`.
//!
//! Ops are evaluated eagerly as the graph is built; `backward` replays the
//! tape in reverse and accumulates parameter gradients into a [`ParamStore`].
//! Vectors are represented as single-row matrices and scalars as 1x1.

use ndarray::{concatenate, s, Array2, Axis};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

/// Handle to a parameter in a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(usize);

/// Named trainable matrices with gradient accumulators.
#[derive(Debug, Clone)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Array2<f64>>,
    grads: Vec<Array2<f64>>,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore { names: Vec::new(), values: Vec::new(), grads: Vec::new() }
    }

    pub fn add(&mut self, name: &str, value: Array2<f64>) -> ParamId {
        assert!(
            !self.names.iter().any(|n| n == name),
            "duplicate parameter name {name}"
        );
        let grad = Array2::zeros(value.raw_dim());
        self.names.push(name.to_string());
        self.values.push(value);
        self.grads.push(grad);
        ParamId(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total scalar count across all parameters.
    pub fn n_scalars(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    pub fn value(&self, id: ParamId) -> &Array2<f64> {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.values[id.0]
    }

    pub fn grad(&self, id: ParamId) -> &Array2<f64> {
        &self.grads[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grads {
            g.fill(0.0);
        }
    }

    /// Applies `f` to every (value, grad) pair; used by optimizers.
    pub fn for_each_mut(&mut self, mut f: impl FnMut(usize, &mut Array2<f64>, &Array2<f64>)) {
        for i in 0..self.values.len() {
            f(i, &mut self.values[i], &self.grads[i]);
        }
    }
}

impl Default for ParamStore {
    fn default() -> Self {
        Self::new()
    }
}

/// Geometry of an im2col expansion (zero-padded, strided, valid output grid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Im2ColSpec {
    pub in_h: usize,
    pub in_w: usize,
    pub in_c: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad: usize,
}

impl Im2ColSpec {
    pub fn out_h(&self) -> usize {
        (self.in_h + 2 * self.pad - self.kh) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.in_w + 2 * self.pad - self.kw) / self.stride + 1
    }
}

enum Op {
    /// Constant input; no gradient.
    Value,
    /// Trainable parameter; backward accumulates into the store.
    Param(ParamId),
    /// a(n,k) . b(k,m)
    MatMul(NodeId, NodeId),
    /// a(n,k) . W(k,m) with W constant.
    MatMulConst(NodeId, Array2<f64>),
    /// (n,f) + broadcast row (1,f), row trainable.
    AddRow(NodeId, NodeId),
    /// (n,f) + constant broadcast row (1,f). The row is baked into the
    /// forward value; backward is a passthrough.
    AddRowConst(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    /// Elementwise product with a constant mask of equal shape.
    MulMask(NodeId, Array2<f64>),
    Scale(NodeId, f64),
    Relu(NodeId),
    /// Column-wise concatenation; all inputs share the row count.
    Concat(Vec<NodeId>),
    /// Columns [start, start+len) of the input.
    SliceCols(NodeId, usize, usize),
    /// Tile a (1,f) row to (n,f).
    RepeatRows(NodeId),
    /// Mean over consecutive groups of `group` rows: (n*g, f) -> (n, f).
    GroupMean(NodeId, usize),
    /// Column-wise max over all rows: (n,f) -> (1,f). Argmax rows in aux.
    MaxCols(NodeId),
    /// Patch extraction for convolution; input rows are flat c-major images.
    Im2Col(NodeId, Im2ColSpec),
    /// (n*s, c) -> (n, c*s): regroup conv output pixels back into frame rows.
    SpatialToChannels(NodeId, usize),
    /// Mean of all elements -> (1,1).
    MeanAll(NodeId),
    /// Mean squared error against a constant target -> (1,1).
    MseConst(NodeId, Array2<f64>),
    /// Row-wise softmax. Probabilities cached as the node value.
    Softmax(NodeId),
    /// Mean cross-entropy of row-wise softmax vs class targets -> (1,1).
    SoftmaxCrossEntropy(NodeId, Vec<usize>),
    /// Forward replaces values (already baked into the node), gradient passes
    /// through unchanged.
    StraightThrough(NodeId),
}

struct Node {
    op: Op,
    value: Array2<f64>,
    grad: Option<Array2<f64>>,
    needs_grad: bool,
    /// Argmax rows for MaxCols; softmax probabilities for cross-entropy.
    aux_rows: Vec<usize>,
    aux_mat: Option<Array2<f64>>,
}

/// An eagerly evaluated computation graph.
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn val(&self, id: NodeId) -> &Array2<f64> {
        &self.nodes[id.0].value
    }

    /// Scalar value of a (1,1) node.
    pub fn scalar(&self, id: NodeId) -> f64 {
        let v = &self.nodes[id.0].value;
        assert_eq!(v.dim(), (1, 1), "scalar() on non-scalar node");
        v[(0, 0)]
    }

    fn push(&mut self, op: Op, value: Array2<f64>, needs_grad: bool) -> NodeId {
        self.nodes.push(Node { op, value, grad: None, needs_grad, aux_rows: Vec::new(), aux_mat: None });
        NodeId(self.nodes.len() - 1)
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id.0].needs_grad
    }

    pub fn value(&mut self, v: Array2<f64>) -> NodeId {
        self.push(Op::Value, v, false)
    }

    /// A non-trainable input whose gradient is kept after `backward`; read it
    /// with [`Tape::node_grad`].
    pub fn leaf(&mut self, v: Array2<f64>) -> NodeId {
        self.push(Op::Value, v, true)
    }

    /// Accumulated gradient of a node, available after `backward` for leaves.
    pub fn node_grad(&self, id: NodeId) -> Option<&Array2<f64>> {
        self.nodes[id.0].grad.as_ref()
    }

    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> NodeId {
        self.push(Op::Param(id), store.value(id).clone(), true)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.val(a).dot(self.val(b));
        let ng = self.needs(a) || self.needs(b);
        self.push(Op::MatMul(a, b), v, ng)
    }

    pub fn matmul_const(&mut self, a: NodeId, w: Array2<f64>) -> NodeId {
        let v = self.val(a).dot(&w);
        let ng = self.needs(a);
        self.push(Op::MatMulConst(a, w), v, ng)
    }

    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> NodeId {
        assert_eq!(self.val(row).nrows(), 1, "add_row rhs must be a single row");
        let v = self.val(a) + self.val(row);
        let ng = self.needs(a) || self.needs(row);
        self.push(Op::AddRow(a, row), v, ng)
    }

    pub fn add_row_const(&mut self, a: NodeId, row: Array2<f64>) -> NodeId {
        assert_eq!(row.nrows(), 1, "add_row_const rhs must be a single row");
        let v = self.val(a) + &row;
        let ng = self.needs(a);
        self.push(Op::AddRowConst(a), v, ng)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.val(a) + self.val(b);
        let ng = self.needs(a) || self.needs(b);
        self.push(Op::Add(a, b), v, ng)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.val(a) - self.val(b);
        let ng = self.needs(a) || self.needs(b);
        self.push(Op::Sub(a, b), v, ng)
    }

    pub fn mul_mask(&mut self, a: NodeId, mask: Array2<f64>) -> NodeId {
        let v = self.val(a) * &mask;
        let ng = self.needs(a);
        self.push(Op::MulMask(a, mask), v, ng)
    }

    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        let v = self.val(a) * k;
        let ng = self.needs(a);
        self.push(Op::Scale(a, k), v, ng)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let v = self.val(a).mapv(|x| x.max(0.0));
        let ng = self.needs(a);
        self.push(Op::Relu(a), v, ng)
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty());
        let views: Vec<_> = parts.iter().map(|&p| self.val(p).view()).collect();
        let v = concatenate(Axis(1), &views).expect("concat_cols: row counts differ");
        let ng = parts.iter().any(|&p| self.needs(p));
        self.push(Op::Concat(parts.to_vec()), v, ng)
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let v = self.val(a).slice(s![.., start..start + len]).to_owned();
        let ng = self.needs(a);
        self.push(Op::SliceCols(a, start, len), v, ng)
    }

    pub fn repeat_rows(&mut self, a: NodeId, n: usize) -> NodeId {
        let src = self.val(a);
        assert_eq!(src.nrows(), 1, "repeat_rows input must be a single row");
        let mut v = Array2::zeros((n, src.ncols()));
        for mut r in v.rows_mut() {
            r.assign(&src.row(0));
        }
        let ng = self.needs(a);
        self.push(Op::RepeatRows(a), v, ng)
    }

    pub fn group_mean(&mut self, a: NodeId, group: usize) -> NodeId {
        let src = self.val(a);
        assert!(group > 0 && src.nrows() % group == 0, "group_mean: rows not divisible by group");
        let n = src.nrows() / group;
        let mut v = Array2::zeros((n, src.ncols()));
        for i in 0..n {
            let block = src.slice(s![i * group..(i + 1) * group, ..]);
            v.row_mut(i).assign(&block.mean_axis(Axis(0)).unwrap());
        }
        let ng = self.needs(a);
        self.push(Op::GroupMean(a, group), v, ng)
    }

    pub fn max_cols(&mut self, a: NodeId) -> NodeId {
        let src = self.val(a);
        assert!(src.nrows() > 0);
        let cols = src.ncols();
        let mut v = Array2::zeros((1, cols));
        let mut arg = vec![0usize; cols];
        for c in 0..cols {
            let mut best = src[(0, c)];
            let mut best_r = 0usize;
            for r in 1..src.nrows() {
                if src[(r, c)] > best {
                    best = src[(r, c)];
                    best_r = r;
                }
            }
            v[(0, c)] = best;
            arg[c] = best_r;
        }
        let ng = self.needs(a);
        let id = self.push(Op::MaxCols(a), v, ng);
        self.nodes[id.0].aux_rows = arg;
        id
    }

    pub fn im2col(&mut self, a: NodeId, spec: Im2ColSpec) -> NodeId {
        let src = self.val(a);
        let (oh, ow) = (spec.out_h(), spec.out_w());
        assert_eq!(
            src.ncols(),
            spec.in_c * spec.in_h * spec.in_w,
            "im2col: input width does not match spec"
        );
        let n = src.nrows();
        let patch = spec.in_c * spec.kh * spec.kw;
        let mut v = Array2::zeros((n * oh * ow, patch));
        for f in 0..n {
            for oy in 0..oh {
                for ox in 0..ow {
                    let out_r = f * oh * ow + oy * ow + ox;
                    let mut out_c = 0usize;
                    for ci in 0..spec.in_c {
                        for ky in 0..spec.kh {
                            for kx in 0..spec.kw {
                                let y = (oy * spec.stride + ky) as isize - spec.pad as isize;
                                let x = (ox * spec.stride + kx) as isize - spec.pad as isize;
                                if y >= 0 && x >= 0 && (y as usize) < spec.in_h && (x as usize) < spec.in_w {
                                    let src_c = ci * spec.in_h * spec.in_w + y as usize * spec.in_w + x as usize;
                                    v[(out_r, out_c)] = src[(f, src_c)];
                                }
                                out_c += 1;
                            }
                        }
                    }
                }
            }
        }
        let ng = self.needs(a);
        self.push(Op::Im2Col(a, spec), v, ng)
    }

    pub fn spatial_to_channels(&mut self, a: NodeId, spatial: usize) -> NodeId {
        let src = self.val(a);
        assert!(src.nrows() % spatial == 0, "spatial_to_channels: rows not divisible");
        let n = src.nrows() / spatial;
        let c = src.ncols();
        let mut v = Array2::zeros((n, c * spatial));
        for f in 0..n {
            for sp in 0..spatial {
                for ch in 0..c {
                    v[(f, ch * spatial + sp)] = src[(f * spatial + sp, ch)];
                }
            }
        }
        let ng = self.needs(a);
        self.push(Op::SpatialToChannels(a, spatial), v, ng)
    }

    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let m = self.val(a).mean().unwrap();
        let ng = self.needs(a);
        self.push(Op::MeanAll(a), Array2::from_elem((1, 1), m), ng)
    }

    pub fn mse_const(&mut self, a: NodeId, target: Array2<f64>) -> NodeId {
        let src = self.val(a);
        assert_eq!(src.dim(), target.dim(), "mse_const: shape mismatch");
        let n = src.len() as f64;
        let mut acc = 0.0;
        for (x, t) in src.iter().zip(target.iter()) {
            let d = x - t;
            acc += d * d;
        }
        let ng = self.needs(a);
        self.push(Op::MseConst(a, target), Array2::from_elem((1, 1), acc / n), ng)
    }

    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let v = row_softmax(self.val(a));
        let ng = self.needs(a);
        self.push(Op::Softmax(a), v, ng)
    }

    /// Mean negative log-likelihood of `targets` under row-wise softmax.
    pub fn softmax_cross_entropy(&mut self, logits: NodeId, targets: &[usize]) -> NodeId {
        let src = self.val(logits);
        assert_eq!(src.nrows(), targets.len(), "cross_entropy: target count mismatch");
        let probs = row_softmax(src);
        let mut loss = 0.0;
        for (r, &t) in targets.iter().enumerate() {
            assert!(t < src.ncols(), "cross_entropy: target class out of range");
            loss -= probs[(r, t)].max(1e-300).ln();
        }
        loss /= targets.len() as f64;
        let ng = self.needs(logits);
        let id = self.push(
            Op::SoftmaxCrossEntropy(logits, targets.to_vec()),
            Array2::from_elem((1, 1), loss),
            ng,
        );
        self.nodes[id.0].aux_mat = Some(probs);
        id
    }

    /// Replaces the node's forward value while keeping its gradient path:
    /// backward passes the incoming gradient through to `a` untouched.
    pub fn straight_through(&mut self, a: NodeId, replacement: Array2<f64>) -> NodeId {
        assert_eq!(self.val(a).dim(), replacement.dim(), "straight_through: shape mismatch");
        let ng = self.needs(a);
        self.push(Op::StraightThrough(a), replacement, ng)
    }

    fn add_grad(&mut self, id: NodeId, g: &Array2<f64>) {
        if !self.nodes[id.0].needs_grad {
            return;
        }
        match &mut self.nodes[id.0].grad {
            Some(acc) => *acc += g,
            slot @ None => *slot = Some(g.clone()),
        }
    }

    /// Runs reverse-mode accumulation from a scalar loss node. Parameter
    /// gradients are added into `store` (callers zero them between steps).
    pub fn backward(&mut self, loss: NodeId, store: &mut ParamStore) {
        assert_eq!(self.nodes[loss.0].value.dim(), (1, 1), "backward: loss must be scalar");
        self.nodes[loss.0].grad = Some(Array2::from_elem((1, 1), 1.0));
        for i in (0..=loss.0).rev() {
            if !self.nodes[i].needs_grad {
                continue;
            }
            let Some(g) = self.nodes[i].grad.take() else { continue };
            // Re-borrow pieces of the node to keep the borrow checker happy.
            match &self.nodes[i].op {
                // Leaves keep their gradient readable via node_grad.
                Op::Value => {
                    self.nodes[i].grad = Some(g);
                    continue;
                }
                Op::Param(pid) => {
                    let pid = *pid;
                    store.grads[pid.0] += &g;
                }
                Op::MatMul(a, b) => {
                    let (a, b) = (*a, *b);
                    if self.needs(a) {
                        let da = g.dot(&self.nodes[b.0].value.t());
                        self.add_grad(a, &da);
                    }
                    if self.needs(b) {
                        let db = self.nodes[a.0].value.t().dot(&g);
                        self.add_grad(b, &db);
                    }
                }
                Op::MatMulConst(a, w) => {
                    let a = *a;
                    let da = g.dot(&w.t());
                    self.add_grad(a, &da);
                }
                Op::AddRow(a, row) => {
                    let (a, row) = (*a, *row);
                    if self.needs(row) {
                        let dr = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                        self.add_grad(row, &dr);
                    }
                    self.add_grad(a, &g);
                }
                Op::AddRowConst(a) => {
                    let a = *a;
                    self.add_grad(a, &g);
                }
                Op::Add(a, b) => {
                    let (a, b) = (*a, *b);
                    self.add_grad(a, &g);
                    self.add_grad(b, &g);
                }
                Op::Sub(a, b) => {
                    let (a, b) = (*a, *b);
                    self.add_grad(a, &g);
                    if self.needs(b) {
                        let neg = g.mapv(|x| -x);
                        self.add_grad(b, &neg);
                    }
                }
                Op::MulMask(a, mask) => {
                    let a = *a;
                    let da = &g * mask;
                    self.add_grad(a, &da);
                }
                Op::Scale(a, k) => {
                    let (a, k) = (*a, *k);
                    let da = &g * k;
                    self.add_grad(a, &da);
                }
                Op::Relu(a) => {
                    let a = *a;
                    let mut da = g.clone();
                    for (d, &x) in da.iter_mut().zip(self.nodes[a.0].value.iter()) {
                        if x <= 0.0 {
                            *d = 0.0;
                        }
                    }
                    self.add_grad(a, &da);
                }
                Op::Concat(parts) => {
                    let parts = parts.clone();
                    let mut start = 0usize;
                    for p in parts {
                        let w = self.nodes[p.0].value.ncols();
                        if self.needs(p) {
                            let dp = g.slice(s![.., start..start + w]).to_owned();
                            self.add_grad(p, &dp);
                        }
                        start += w;
                    }
                }
                Op::SliceCols(a, start, len) => {
                    let (a, start, len) = (*a, *start, *len);
                    let dim = self.nodes[a.0].value.raw_dim();
                    let mut da = Array2::zeros(dim);
                    da.slice_mut(s![.., start..start + len]).assign(&g);
                    self.add_grad(a, &da);
                }
                Op::RepeatRows(a) => {
                    let a = *a;
                    let da = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    self.add_grad(a, &da);
                }
                Op::GroupMean(a, group) => {
                    let (a, group) = (*a, *group);
                    let rows = self.nodes[a.0].value.nrows();
                    let mut da = Array2::zeros((rows, g.ncols()));
                    let inv = 1.0 / group as f64;
                    for r in 0..rows {
                        let src = g.row(r / group);
                        let mut dst = da.row_mut(r);
                        dst.assign(&src);
                        dst *= inv;
                    }
                    self.add_grad(a, &da);
                }
                Op::MaxCols(a) => {
                    let a = *a;
                    let arg = self.nodes[i].aux_rows.clone();
                    let mut da = Array2::zeros(self.nodes[a.0].value.raw_dim());
                    for (c, &r) in arg.iter().enumerate() {
                        da[(r, c)] += g[(0, c)];
                    }
                    self.add_grad(a, &da);
                }
                Op::Im2Col(a, spec) => {
                    let (a, spec) = (*a, *spec);
                    let (oh, ow) = (spec.out_h(), spec.out_w());
                    let n = self.nodes[a.0].value.nrows();
                    let mut da = Array2::zeros(self.nodes[a.0].value.raw_dim());
                    for f in 0..n {
                        for oy in 0..oh {
                            for ox in 0..ow {
                                let out_r = f * oh * ow + oy * ow + ox;
                                let mut out_c = 0usize;
                                for ci in 0..spec.in_c {
                                    for ky in 0..spec.kh {
                                        for kx in 0..spec.kw {
                                            let y = (oy * spec.stride + ky) as isize - spec.pad as isize;
                                            let x = (ox * spec.stride + kx) as isize - spec.pad as isize;
                                            if y >= 0
                                                && x >= 0
                                                && (y as usize) < spec.in_h
                                                && (x as usize) < spec.in_w
                                            {
                                                let src_c = ci * spec.in_h * spec.in_w
                                                    + y as usize * spec.in_w
                                                    + x as usize;
                                                da[(f, src_c)] += g[(out_r, out_c)];
                                            }
                                            out_c += 1;
                                        }
                                    }
                                }
                            }
                        }
                    }
                    self.add_grad(a, &da);
                }
                Op::SpatialToChannels(a, spatial) => {
                    let (a, spatial) = (*a, *spatial);
                    let rows = self.nodes[a.0].value.nrows();
                    let c = self.nodes[a.0].value.ncols();
                    let mut da = Array2::zeros((rows, c));
                    let n = rows / spatial;
                    for f in 0..n {
                        for sp in 0..spatial {
                            for ch in 0..c {
                                da[(f * spatial + sp, ch)] = g[(f, ch * spatial + sp)];
                            }
                        }
                    }
                    self.add_grad(a, &da);
                }
                Op::MeanAll(a) => {
                    let a = *a;
                    let dim = self.nodes[a.0].value.raw_dim();
                    let scale = g[(0, 0)] / (dim[0] * dim[1]) as f64;
                    let da = Array2::from_elem(dim, scale);
                    self.add_grad(a, &da);
                }
                Op::MseConst(a, target) => {
                    let a = *a;
                    let n = target.len() as f64;
                    let k = 2.0 * g[(0, 0)] / n;
                    let da = (&self.nodes[a.0].value - target) * k;
                    self.add_grad(a, &da);
                }
                Op::Softmax(a) => {
                    let a = *a;
                    let p = &self.nodes[i].value;
                    let mut da = Array2::zeros(p.raw_dim());
                    for r in 0..p.nrows() {
                        let dot: f64 = (0..p.ncols()).map(|c| g[(r, c)] * p[(r, c)]).sum();
                        for c in 0..p.ncols() {
                            da[(r, c)] = p[(r, c)] * (g[(r, c)] - dot);
                        }
                    }
                    self.add_grad(a, &da);
                }
                Op::SoftmaxCrossEntropy(logits, targets) => {
                    let logits = *logits;
                    let targets = targets.clone();
                    let probs = self.nodes[i].aux_mat.as_ref().unwrap();
                    let scale = g[(0, 0)] / targets.len() as f64;
                    let mut da = probs * scale;
                    for (r, &t) in targets.iter().enumerate() {
                        da[(r, t)] -= scale;
                    }
                    self.add_grad(logits, &da);
                }
                Op::StraightThrough(a) => {
                    let a = *a;
                    self.add_grad(a, &g);
                }
            }
        }
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

/// Numerically stable row-wise softmax.
pub fn row_softmax(x: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(x.raw_dim());
    for (r, row) in x.rows().into_iter().enumerate() {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (c, &v) in row.iter().enumerate() {
            let e = (v - m).exp();
            out[(r, c)] = e;
            z += e;
        }
        for c in 0..row.len() {
            out[(r, c)] /= z;
        }
    }
    out
}
