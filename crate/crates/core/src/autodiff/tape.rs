use super::tensor::Tensor;
use crate::error::{invalid, Error, Result};
use crate::interp::split_index;
use crate::scalar::Scalar;
use crate::warp::{enforce_strict, solve_offsets, Tessellation};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op<S> {
    Leaf,
    Conv1d {
        input: Var,
        kernel: Var,
        bias: Var,
    },
    Linear {
        input: Var,
        weight: Var,
        bias: Var,
    },
    Relu(Var),
    Exp(Var),
    Clamp {
        input: Var,
        lo: S,
        hi: S,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, S),
    SubScalar(Var, Var),
    DivScalar(Var, Var),
    Strict(Var),
    Sum(Var),
    Mean(Var),
    MeanOverTime(Var),
    Slice {
        input: Var,
        start: usize,
    },
    Gather {
        signal: Var,
        pos: Var,
        split: Vec<(usize, S)>,
    },
    SquaredNorm(Var),
    Cpa {
        slopes: Var,
        offset0: Var,
        x: Var,
        tess: Tessellation<S>,
        cells: Vec<usize>,
        clamped: Vec<S>,
        inside: Vec<bool>,
    },
}

#[derive(Debug)]
struct Node<S> {
    value: Tensor<S>,
    op: Op<S>,
    requires_grad: bool,
}

/// Records a forward computation for one reverse sweep.
///
/// Operations are appended in evaluation order and the backward pass walks
/// them in exact reverse, so gradient accumulation order is fixed.
#[derive(Debug, Default)]
pub struct Tape<S> {
    nodes: Vec<Node<S>>,
    non_finite: Option<String>,
}

/// Gradients of one backward pass, indexed by [`Var`].
#[derive(Debug)]
pub struct Gradients<S> {
    grads: Vec<Option<Vec<S>>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn get(&self, v: Var) -> Option<&[S]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    /// Gradient of `v`, or zeros of length `len` when `v` is disconnected.
    pub fn get_or_zeros(&self, v: Var, len: usize) -> Vec<S> {
        self.get(v)
            .map_or_else(|| vec![S::zero(); len], <[S]>::to_vec)
    }
}

fn shape_err<T>(op: &str, detail: String) -> Result<T> {
    invalid(format!("{op}: {detail}"))
}

impl<S: Scalar> Tape<S> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            non_finite: None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Leaf that receives a gradient.
    pub fn param(&mut self, value: Tensor<S>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf without gradient.
    pub fn constant(&mut self, value: Tensor<S>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor<S> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn data(&self, v: Var) -> &[S] {
        self.nodes[v.0].value.data()
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor<S>, op: Op<S>, requires_grad: bool) -> Var {
        if self.non_finite.is_none() && !value.is_finite() {
            self.non_finite = Some(format!(
                "non-finite value produced by node {} ({})",
                self.nodes.len(),
                op_name(&op)
            ));
        }
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_op(&mut self, value: Tensor<S>, op: Op<S>, inputs: &[Var]) -> Var {
        let rg = inputs.iter().any(|&v| self.needs(v));
        self.push(value, op, rg)
    }

    /// Errors if any recorded value was NaN or infinite.
    pub fn ensure_finite(&self) -> Result<()> {
        match &self.non_finite {
            Some(msg) => Err(Error::Numeric(msg.clone())),
            None => Ok(()),
        }
    }

    /// Same-padded 1-D cross-correlation: `[Cin, T] * [Cout, Cin, K] + [Cout] -> [Cout, T]`.
    pub fn conv1d(&mut self, input: Var, kernel: Var, bias: Var) -> Result<Var> {
        let (ish, ksh, bsh) = (self.shape(input), self.shape(kernel), self.shape(bias));
        if ish.len() != 2 || ksh.len() != 3 || bsh.len() != 1 {
            return shape_err("conv1d", format!("ranks {ish:?} {ksh:?} {bsh:?}"));
        }
        let (cin, t) = (ish[0], ish[1]);
        let (cout, kcin, k) = (ksh[0], ksh[1], ksh[2]);
        if kcin != cin || bsh[0] != cout {
            return shape_err(
                "conv1d",
                format!("input {ish:?} kernel {ksh:?} bias {bsh:?}"),
            );
        }
        if k % 2 == 0 {
            return shape_err("conv1d", format!("kernel size {k} must be odd"));
        }
        let pad = (k - 1) / 2;
        let x = self.data(input);
        let w = self.data(kernel);
        let b = self.data(bias);
        let mut out = vec![S::zero(); cout * t];
        for o in 0..cout {
            let row = &mut out[o * t..(o + 1) * t];
            row.fill(b[o]);
            for c in 0..cin {
                let xr = &x[c * t..(c + 1) * t];
                for kk in 0..k {
                    let wv = w[(o * cin + c) * k + kk];
                    // out[tt] += wv * x[tt + kk - pad]
                    let lo = pad.saturating_sub(kk);
                    let hi = (t + pad).saturating_sub(kk).min(t);
                    for tt in lo..hi {
                        row[tt] += wv * xr[tt + kk - pad];
                    }
                }
            }
        }
        let value = Tensor::new(&[cout, t], out)?;
        Ok(self.push_op(
            value,
            Op::Conv1d {
                input,
                kernel,
                bias,
            },
            &[input, kernel, bias],
        ))
    }

    /// `W x + b` for `x: [n]`, `W: [m, n]`, `b: [m]`.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let (ish, wsh, bsh) = (self.shape(input), self.shape(weight), self.shape(bias));
        if ish.len() != 1
            || wsh.len() != 2
            || bsh.len() != 1
            || wsh[1] != ish[0]
            || bsh[0] != wsh[0]
        {
            return shape_err(
                "linear",
                format!("input {ish:?} weight {wsh:?} bias {bsh:?}"),
            );
        }
        let (m, n) = (wsh[0], wsh[1]);
        let x = self.data(input);
        let w = self.data(weight);
        let b = self.data(bias);
        let out: Vec<S> = (0..m)
            .map(|i| {
                let mut acc = b[i];
                for (wv, xv) in w[i * n..(i + 1) * n].iter().zip(x) {
                    acc += *wv * *xv;
                }
                acc
            })
            .collect();
        let value = Tensor::vector(out);
        Ok(self.push_op(
            value,
            Op::Linear {
                input,
                weight,
                bias,
            },
            &[input, weight, bias],
        ))
    }

    fn unary(&mut self, input: Var, op: Op<S>, f: impl Fn(S) -> S) -> Var {
        let v = self.value(input);
        let value =
            Tensor::new(v.shape(), v.data().iter().map(|&x| f(x)).collect()).expect("same shape");
        self.push_op(value, op, &[input])
    }

    pub fn relu(&mut self, input: Var) -> Var {
        self.unary(input, Op::Relu(input), |x| {
            if x > S::zero() {
                x
            } else {
                S::zero()
            }
        })
    }

    pub fn exp(&mut self, input: Var) -> Var {
        self.unary(input, Op::Exp(input), S::exp)
    }

    pub fn clamp(&mut self, input: Var, lo: S, hi: S) -> Var {
        self.unary(input, Op::Clamp { input, lo, hi }, |x| x.max(lo).min(hi))
    }

    pub fn scale(&mut self, input: Var, factor: S) -> Var {
        self.unary(input, Op::Scale(input, factor), |x| x * factor)
    }

    fn binary(
        &mut self,
        a: Var,
        b: Var,
        name: &str,
        op: Op<S>,
        f: impl Fn(S, S) -> S,
    ) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return shape_err(name, format!("{:?} vs {:?}", self.shape(a), self.shape(b)));
        }
        let out = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(&x, &y)| f(x, y))
            .collect();
        let value = Tensor::new(self.shape(a), out)?;
        Ok(self.push_op(value, op, &[a, b]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, "add", Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, "sub", Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, "mul", Op::Mul(a, b), |x, y| x * y)
    }

    fn check_scalar(&self, name: &str, s: Var) -> Result<S> {
        let v = self.value(s);
        if v.len() != 1 {
            return shape_err(
                name,
                format!("expected one-element tensor, got {:?}", v.shape()),
            );
        }
        Ok(v.item())
    }

    /// `x - s` with one-element `s` broadcast over `x`.
    pub fn sub_scalar(&mut self, x: Var, s: Var) -> Result<Var> {
        let sv = self.check_scalar("sub_scalar", s)?;
        let v = self.value(x);
        let value = Tensor::new(v.shape(), v.data().iter().map(|&e| e - sv).collect())?;
        Ok(self.push_op(value, Op::SubScalar(x, s), &[x, s]))
    }

    /// `x / s` with one-element `s` broadcast over `x`.
    pub fn div_scalar(&mut self, x: Var, s: Var) -> Result<Var> {
        let sv = self.check_scalar("div_scalar", s)?;
        let v = self.value(x);
        let value = Tensor::new(v.shape(), v.data().iter().map(|&e| e / sv).collect())?;
        Ok(self.push_op(value, Op::DivScalar(x, s), &[x, s]))
    }

    /// Separates equal neighbours of a rank-1 warp by single ulps (see
    /// [`enforce_strict`]). The gradient passes straight through.
    pub fn strict(&mut self, x: Var) -> Result<Var> {
        let v = self.value(x);
        if v.shape().len() != 1 {
            return shape_err("strict", format!("expected a vector, got {:?}", v.shape()));
        }
        let mut data = v.data().to_vec();
        enforce_strict(&mut data);
        let value = Tensor::new(v.shape(), data)?;
        Ok(self.push_op(value, Op::Strict(x), &[x]))
    }

    pub fn sum(&mut self, input: Var) -> Var {
        let s: S = self.data(input).iter().copied().sum();
        self.push_op(Tensor::scalar(s), Op::Sum(input), &[input])
    }

    pub fn mean(&mut self, input: Var) -> Var {
        let d = self.data(input);
        let s = d.iter().copied().sum::<S>() / S::from_usize_lossy(d.len());
        self.push_op(Tensor::scalar(s), Op::Mean(input), &[input])
    }

    pub fn squared_norm(&mut self, input: Var) -> Var {
        let s: S = self.data(input).iter().map(|&x| x * x).sum();
        self.push_op(Tensor::scalar(s), Op::SquaredNorm(input), &[input])
    }

    /// Global average pooling over time: `[C, T] -> [C]`.
    pub fn mean_over_time(&mut self, input: Var) -> Result<Var> {
        let sh = self.shape(input);
        if sh.len() != 2 {
            return shape_err("mean_over_time", format!("expected [C, T], got {sh:?}"));
        }
        let t = sh[1];
        let tn = S::from_usize_lossy(t);
        let out = self
            .data(input)
            .chunks(t)
            .map(|row| row.iter().copied().sum::<S>() / tn)
            .collect();
        Ok(self.push_op(Tensor::vector(out), Op::MeanOverTime(input), &[input]))
    }

    /// Contiguous flat sub-range `[start, start + len)` as a vector.
    pub fn slice(&mut self, input: Var, start: usize, len: usize) -> Result<Var> {
        let d = self.data(input);
        if len == 0 || start + len > d.len() {
            return shape_err("slice", format!("range {start}+{len} outside {}", d.len()));
        }
        let value = Tensor::vector(d[start..start + len].to_vec());
        Ok(self.push_op(value, Op::Slice { input, start }, &[input]))
    }

    /// Linear-interpolation gather: `signal: [C, T]`, `pos: [P]` (continuous
    /// sample indices) `-> [C, P]`.
    pub fn gather(&mut self, signal: Var, pos: Var) -> Result<Var> {
        let ssh = self.shape(signal);
        let psh = self.shape(pos);
        if ssh.len() != 2 || psh.len() != 1 || ssh[1] < 2 {
            return shape_err("gather", format!("signal {ssh:?} positions {psh:?}"));
        }
        let (c, t) = (ssh[0], ssh[1]);
        let p = psh[0];
        let split: Vec<(usize, S)> = self.data(pos).iter().map(|&x| split_index(x, t)).collect();
        let s = self.data(signal);
        let mut out = Vec::with_capacity(c * p);
        for ch in 0..c {
            let row = &s[ch * t..(ch + 1) * t];
            out.extend(split.iter().map(|&(i0, w)| {
                if w == S::zero() {
                    row[i0]
                } else if w == S::one() {
                    row[i0 + 1]
                } else {
                    row[i0] + w * (row[i0 + 1] - row[i0])
                }
            }));
        }
        let value = Tensor::new(&[c, p], out)?;
        Ok(self.push_op(value, Op::Gather { signal, pos, split }, &[signal, pos]))
    }

    /// Continuous piecewise-affine velocity `v(x)` evaluated at each entry of
    /// `x` (clamped into `[0, 1]`), from post-activation `slopes` and the
    /// first cell's offset.
    pub fn cpa_velocity(
        &mut self,
        slopes: Var,
        offset0: Var,
        x: Var,
        tess: &Tessellation<S>,
    ) -> Result<Var> {
        if self.shape(slopes) != [tess.n_cells()] {
            return shape_err(
                "cpa_velocity",
                format!(
                    "slopes {:?} for {} cells",
                    self.shape(slopes),
                    tess.n_cells()
                ),
            );
        }
        let b0 = self.check_scalar("cpa_velocity", offset0)?;
        if self.shape(x).len() != 1 {
            return shape_err("cpa_velocity", format!("positions {:?}", self.shape(x)));
        }
        let a = self.data(slopes).to_vec();
        let offsets = solve_offsets(tess, &a, b0)?;
        let (zero, one) = (S::zero(), S::one());
        let xs = self.data(x);
        let inside: Vec<bool> = xs.iter().map(|&v| v >= zero && v <= one).collect();
        let clamped: Vec<S> = xs.iter().map(|&v| v.max(zero).min(one)).collect();
        let cells: Vec<usize> = clamped.iter().map(|&v| tess.cell_of(v)).collect();
        let out = clamped
            .iter()
            .zip(&cells)
            .map(|(&v, &c)| a[c] * v + offsets[c])
            .collect();
        let value = Tensor::vector(out);
        let op = Op::Cpa {
            slopes,
            offset0,
            x,
            tess: tess.clone(),
            cells,
            clamped,
            inside,
        };
        Ok(self.push_op(value, op, &[slopes, offset0, x]))
    }

    /// Discrete branch decisions (ReLU masks, clamp masks, cell and
    /// interpolation indices). Two evaluations with equal signatures lie in
    /// the same smooth piece of the computation.
    pub fn branch_signature(&self) -> Vec<u64> {
        let mut sig = Vec::new();
        for node in &self.nodes {
            match &node.op {
                Op::Relu(input) => {
                    sig.extend(self.data(*input).iter().map(|&v| u64::from(v > S::zero())))
                }
                Op::Clamp { input, lo, hi } => sig.extend(self.data(*input).iter().map(|&v| {
                    if v < *lo {
                        0
                    } else if v > *hi {
                        2
                    } else {
                        1
                    }
                })),
                Op::Gather { split, .. } => sig.extend(split.iter().map(|&(i, _)| i as u64)),
                Op::Cpa { cells, inside, .. } => {
                    sig.extend(cells.iter().map(|&c| c as u64));
                    sig.extend(inside.iter().map(|&b| u64::from(b)));
                }
                _ => {}
            }
        }
        sig
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients<S>> {
        if self.value(loss).len() != 1 {
            return invalid(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            ));
        }
        self.backward_seeded(&[(loss, vec![S::one()])])
    }

    /// Reverse sweep from arbitrary output cotangents.
    pub fn backward_seeded(&self, seeds: &[(Var, Vec<S>)]) -> Result<Gradients<S>> {
        self.ensure_finite()?;
        let mut grads: Vec<Option<Vec<S>>> = (0..self.nodes.len()).map(|_| None).collect();
        for (v, seed) in seeds {
            if seed.len() != self.value(*v).len() {
                return invalid(format!(
                    "seed of length {} for node of {} values",
                    seed.len(),
                    self.value(*v).len()
                ));
            }
            let g = acc(&mut grads, *v, seed.len());
            for (gi, &si) in g.iter_mut().zip(seed) {
                *gi += si;
            }
        }
        for idx in (0..self.nodes.len()).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else {
                continue;
            };
            self.propagate(&node.op, &node.value, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, op: &Op<S>, out: &Tensor<S>, g: &[S], grads: &mut [Option<Vec<S>>]) {
        match op {
            Op::Leaf => {}
            Op::Conv1d {
                input,
                kernel,
                bias,
            } => {
                let ish = self.shape(*input);
                let ksh = self.shape(*kernel);
                let (cin, t) = (ish[0], ish[1]);
                let (cout, k) = (ksh[0], ksh[2]);
                let pad = (k - 1) / 2;
                let x = self.data(*input);
                let w = self.data(*kernel);
                if self.needs(*bias) {
                    let gb = acc(grads, *bias, cout);
                    for o in 0..cout {
                        gb[o] += g[o * t..(o + 1) * t].iter().copied().sum::<S>();
                    }
                }
                if self.needs(*kernel) {
                    let gw = acc(grads, *kernel, cout * cin * k);
                    for o in 0..cout {
                        let go = &g[o * t..(o + 1) * t];
                        for c in 0..cin {
                            let xr = &x[c * t..(c + 1) * t];
                            for kk in 0..k {
                                let lo = pad.saturating_sub(kk);
                                let hi = (t + pad).saturating_sub(kk).min(t);
                                let mut s = S::zero();
                                for tt in lo..hi {
                                    s += go[tt] * xr[tt + kk - pad];
                                }
                                gw[(o * cin + c) * k + kk] += s;
                            }
                        }
                    }
                }
                if self.needs(*input) {
                    let gx = acc(grads, *input, cin * t);
                    for o in 0..cout {
                        let go = &g[o * t..(o + 1) * t];
                        for c in 0..cin {
                            let gxr = &mut gx[c * t..(c + 1) * t];
                            for kk in 0..k {
                                let wv = w[(o * cin + c) * k + kk];
                                let lo = pad.saturating_sub(kk);
                                let hi = (t + pad).saturating_sub(kk).min(t);
                                for tt in lo..hi {
                                    gxr[tt + kk - pad] += wv * go[tt];
                                }
                            }
                        }
                    }
                }
            }
            Op::Linear {
                input,
                weight,
                bias,
            } => {
                let wsh = self.shape(*weight);
                let (m, n) = (wsh[0], wsh[1]);
                if self.needs(*bias) {
                    let gb = acc(grads, *bias, m);
                    for (a, &b) in gb.iter_mut().zip(g) {
                        *a += b;
                    }
                }
                if self.needs(*weight) {
                    let x = self.data(*input);
                    let gw = acc(grads, *weight, m * n);
                    for i in 0..m {
                        for j in 0..n {
                            gw[i * n + j] += g[i] * x[j];
                        }
                    }
                }
                if self.needs(*input) {
                    let w = self.data(*weight);
                    let gx = acc(grads, *input, n);
                    for i in 0..m {
                        for j in 0..n {
                            gx[j] += w[i * n + j] * g[i];
                        }
                    }
                }
            }
            Op::Relu(input) => {
                let x = self.data(*input);
                let gx = acc(grads, *input, x.len());
                for ((a, &xi), &gi) in gx.iter_mut().zip(x).zip(g) {
                    if xi > S::zero() {
                        *a += gi;
                    }
                }
            }
            Op::Exp(input) => {
                let gx = acc(grads, *input, out.len());
                for ((a, &yi), &gi) in gx.iter_mut().zip(out.data()).zip(g) {
                    *a += gi * yi;
                }
            }
            Op::Clamp { input, lo, hi } => {
                let x = self.data(*input);
                let gx = acc(grads, *input, x.len());
                for ((a, &xi), &gi) in gx.iter_mut().zip(x).zip(g) {
                    if xi >= *lo && xi <= *hi {
                        *a += gi;
                    }
                }
            }
            Op::Add(a, b) => {
                for v in [*a, *b] {
                    if self.needs(v) {
                        add_into(acc(grads, v, g.len()), g, S::one());
                    }
                }
            }
            Op::Sub(a, b) => {
                if self.needs(*a) {
                    add_into(acc(grads, *a, g.len()), g, S::one());
                }
                if self.needs(*b) {
                    add_into(acc(grads, *b, g.len()), g, -S::one());
                }
            }
            Op::Mul(a, b) => {
                let (av, bv) = (self.data(*a), self.data(*b));
                if self.needs(*a) {
                    let ga = acc(grads, *a, g.len());
                    for ((d, &gi), &y) in ga.iter_mut().zip(g).zip(bv) {
                        *d += gi * y;
                    }
                }
                if self.needs(*b) {
                    let gb = acc(grads, *b, g.len());
                    for ((d, &gi), &x) in gb.iter_mut().zip(g).zip(av) {
                        *d += gi * x;
                    }
                }
            }
            Op::Scale(input, f) => add_into(acc(grads, *input, g.len()), g, *f),
            Op::SubScalar(x, s) => {
                if self.needs(*x) {
                    add_into(acc(grads, *x, g.len()), g, S::one());
                }
                if self.needs(*s) {
                    let total: S = g.iter().copied().sum();
                    acc(grads, *s, 1)[0] -= total;
                }
            }
            Op::DivScalar(x, s) => {
                let sv = self.data(*s)[0];
                if self.needs(*x) {
                    add_into(acc(grads, *x, g.len()), g, S::one() / sv);
                }
                if self.needs(*s) {
                    // d(x/s)/ds = -(x/s)/s
                    let total: S = g.iter().zip(out.data()).map(|(&gi, &yi)| gi * yi).sum();
                    acc(grads, *s, 1)[0] -= total / sv;
                }
            }
            Op::Strict(x) => add_into(acc(grads, *x, g.len()), g, S::one()),
            Op::Sum(input) => {
                let n = self.value(*input).len();
                let gx = acc(grads, *input, n);
                for a in gx.iter_mut() {
                    *a += g[0];
                }
            }
            Op::Mean(input) => {
                let n = self.value(*input).len();
                let share = g[0] / S::from_usize_lossy(n);
                let gx = acc(grads, *input, n);
                for a in gx.iter_mut() {
                    *a += share;
                }
            }
            Op::SquaredNorm(input) => {
                let x = self.data(*input);
                let gx = acc(grads, *input, x.len());
                let two = S::lit(2.0);
                for (a, &xi) in gx.iter_mut().zip(x) {
                    *a += two * xi * g[0];
                }
            }
            Op::MeanOverTime(input) => {
                let t = self.shape(*input)[1];
                let tn = S::from_usize_lossy(t);
                let gx = acc(grads, *input, g.len() * t);
                for (row, &gc) in gx.chunks_mut(t).zip(g) {
                    let share = gc / tn;
                    for a in row.iter_mut() {
                        *a += share;
                    }
                }
            }
            Op::Slice { input, start } => {
                let n = self.value(*input).len();
                let gx = acc(grads, *input, n);
                add_into(&mut gx[*start..*start + g.len()], g, S::one());
            }
            Op::Gather { signal, pos, split } => {
                let ssh = self.shape(*signal);
                let (c, t) = (ssh[0], ssh[1]);
                let p = split.len();
                if self.needs(*signal) {
                    let gs = acc(grads, *signal, c * t);
                    for ch in 0..c {
                        let gr = &g[ch * p..(ch + 1) * p];
                        let row = &mut gs[ch * t..(ch + 1) * t];
                        for (&(i0, w), &gi) in split.iter().zip(gr) {
                            row[i0] += (S::one() - w) * gi;
                            row[i0 + 1] += w * gi;
                        }
                    }
                }
                if self.needs(*pos) {
                    let s = self.data(*signal);
                    let gp = acc(grads, *pos, p);
                    for ch in 0..c {
                        let row = &s[ch * t..(ch + 1) * t];
                        let gr = &g[ch * p..(ch + 1) * p];
                        for ((d, &(i0, _)), &gi) in gp.iter_mut().zip(split).zip(gr) {
                            *d += gi * (row[i0 + 1] - row[i0]);
                        }
                    }
                }
            }
            Op::Cpa {
                slopes,
                offset0,
                x,
                tess,
                cells,
                clamped,
                inside,
            } => {
                let a = self.data(*slopes);
                if self.needs(*x) {
                    let gx = acc(grads, *x, g.len());
                    for j in 0..g.len() {
                        if inside[j] {
                            gx[j] += g[j] * a[cells[j]];
                        }
                    }
                }
                if self.needs(*offset0) {
                    let total: S = g.iter().copied().sum();
                    acc(grads, *offset0, 1)[0] += total;
                }
                if self.needs(*slopes) {
                    // v(x) = b_0 + sum_i a_i |[0, x] ∩ cell_i|
                    let n = tess.n_cells();
                    let mut beyond = vec![S::zero(); n];
                    let mut within = vec![S::zero(); n];
                    for j in 0..g.len() {
                        let c = cells[j];
                        within[c] += g[j] * (clamped[j] - tess.left(c));
                        if c > 0 {
                            beyond[c - 1] += g[j];
                        }
                    }
                    let ga = acc(grads, *slopes, n);
                    let mut suffix = S::zero();
                    for i in (0..n).rev() {
                        suffix += beyond[i];
                        ga[i] += within[i] + suffix * (tess.right(i) - tess.left(i));
                    }
                }
            }
        }
    }
}

fn acc<S: Scalar>(grads: &mut [Option<Vec<S>>], v: Var, len: usize) -> &mut Vec<S> {
    grads[v.0].get_or_insert_with(|| vec![S::zero(); len])
}

fn add_into<S: Scalar>(dst: &mut [S], src: &[S], factor: S) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += factor * s;
    }
}

fn op_name<S>(op: &Op<S>) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::Conv1d { .. } => "conv1d",
        Op::Linear { .. } => "linear",
        Op::Relu(_) => "relu",
        Op::Exp(_) => "exp",
        Op::Clamp { .. } => "clamp",
        Op::Add(..) => "add",
        Op::Sub(..) => "sub",
        Op::Mul(..) => "mul",
        Op::Scale(..) => "scale",
        Op::SubScalar(..) => "sub_scalar",
        Op::DivScalar(..) => "div_scalar",
        Op::Strict(..) => "strict",
        Op::Sum(_) => "sum",
        Op::Mean(_) => "mean",
        Op::MeanOverTime(_) => "mean_over_time",
        Op::Slice { .. } => "slice",
        Op::Gather { .. } => "gather",
        Op::SquaredNorm(_) => "squared_norm",
        Op::Cpa { .. } => "cpa_velocity",
    }
}
