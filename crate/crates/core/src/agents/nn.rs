use std::fmt::Debug;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AgentError;

/// Scalar type of a network: `f32` for training, `f64` for gradient checks.
pub trait Real: Float + Debug + Default + Send + Sync + 'static {
    fn of(v: f64) -> Self;
    fn as_f64(self) -> f64;
    /// `C ← A·B + beta·C` where A is m×k, B is k×n, C is m×n, each given with
    /// (row stride, column stride).
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: &[Self],
        a_strides: (usize, usize),
        b: &[Self],
        b_strides: (usize, usize),
        beta: Self,
        c: &mut [Self],
        c_strides: (usize, usize),
    );
}

fn span(rows: usize, cols: usize, (rs, cs): (usize, usize)) -> usize {
    if rows == 0 || cols == 0 {
        0
    } else {
        (rows - 1) * rs + (cols - 1) * cs + 1
    }
}

macro_rules! impl_real {
    ($t:ty, $gemm:path) => {
        impl Real for $t {
            #[inline]
            fn of(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                a: &[Self],
                a_strides: (usize, usize),
                b: &[Self],
                b_strides: (usize, usize),
                beta: Self,
                c: &mut [Self],
                c_strides: (usize, usize),
            ) {
                assert!(a.len() >= span(m, k, a_strides), "gemm: A too short");
                assert!(b.len() >= span(k, n, b_strides), "gemm: B too short");
                assert!(c.len() >= span(m, n, c_strides), "gemm: C too short");
                // SAFETY: the asserts above bound every index the kernel touches.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        1.0,
                        a.as_ptr(),
                        a_strides.0 as isize,
                        a_strides.1 as isize,
                        b.as_ptr(),
                        b_strides.0 as isize,
                        b_strides.1 as isize,
                        beta,
                        c.as_mut_ptr(),
                        c_strides.0 as isize,
                        c_strides.1 as isize,
                    );
                }
            }
        }
    };
}

impl_real!(f32, matrixmultiply::sgemm);
impl_real!(f64, matrixmultiply::dgemm);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl ImageShape {
    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One convolution; padding is `kernel / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvSpec {
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Tanh,
    Identity,
}

/// Architecture: optional conv encoder on the image, whose flattened output is
/// concatenated with the vector input and fed through a ReLU trunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSpec {
    pub image: Option<ImageShape>,
    pub conv: Vec<ConvSpec>,
    pub vector_dim: usize,
    pub trunk: Vec<usize>,
    pub out_dim: usize,
    pub output: OutputActivation,
    /// Hidden layers draw from U(±gain/√fan_in).
    pub init_gain: f64,
    /// Bound of the uniform init of the output layer.
    pub output_init: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ConvLayer {
    in_c: usize,
    out_c: usize,
    k: usize,
    stride: usize,
    pad: usize,
    in_h: usize,
    in_w: usize,
    out_h: usize,
    out_w: usize,
    w: usize,
    b: usize,
}

impl ConvLayer {
    fn patch(&self) -> usize {
        self.in_c * self.k * self.k
    }
    fn positions(&self) -> usize {
        self.out_h * self.out_w
    }
    fn in_len(&self) -> usize {
        self.in_c * self.in_h * self.in_w
    }
    fn out_len(&self) -> usize {
        self.out_c * self.positions()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    w: usize,
    b: usize,
}

/// Shape and slot of one parameter tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSlot {
    pub dims: Vec<usize>,
    pub offset: usize,
}

impl TensorSlot {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Input batch: `n` samples, channel-major images and row-major vectors.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a, T> {
    pub n: usize,
    pub image: Option<&'a [T]>,
    pub vector: &'a [T],
}

/// Activations retained by [`Network::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache<T> {
    n: usize,
    cols: Vec<Vec<T>>,
    conv_out: Vec<Vec<T>>,
    dense_in: Vec<Vec<T>>,
    output: Vec<T>,
}

impl<T: Real> Cache<T> {
    pub fn output(&self) -> &[T] {
        &self.output
    }
}

/// Feed-forward network with all parameters in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    spec: NetSpec,
    convs: Vec<ConvLayer>,
    dense: Vec<DenseLayer>,
    pub params: Vec<T>,
}

fn relu_mask<T: Real>(grad: &mut [T], activation: &[T]) {
    for (g, a) in grad.iter_mut().zip(activation) {
        if *a <= T::zero() {
            *g = T::zero();
        }
    }
}

impl<T: Real> Network<T> {
    fn layout(spec: &NetSpec) -> Result<(Vec<ConvLayer>, Vec<DenseLayer>, usize), AgentError> {
        let mut offset = 0;
        let mut convs = Vec::new();
        let mut flat = 0;
        match (&spec.image, spec.conv.is_empty()) {
            (Some(img), _) => {
                if img.is_empty() {
                    return Err(AgentError::Spec("image shape has a zero dimension".into()));
                }
                let (mut c, mut h, mut w) = (img.channels, img.height, img.width);
                for cs in &spec.conv {
                    if cs.kernel == 0 || cs.stride == 0 || cs.out_channels == 0 {
                        return Err(AgentError::Spec("conv layers need positive sizes".into()));
                    }
                    let pad = cs.kernel / 2;
                    if h + 2 * pad < cs.kernel || w + 2 * pad < cs.kernel {
                        return Err(AgentError::Spec("conv kernel larger than its input".into()));
                    }
                    let out_h = (h + 2 * pad - cs.kernel) / cs.stride + 1;
                    let out_w = (w + 2 * pad - cs.kernel) / cs.stride + 1;
                    let layer = ConvLayer {
                        in_c: c,
                        out_c: cs.out_channels,
                        k: cs.kernel,
                        stride: cs.stride,
                        pad,
                        in_h: h,
                        in_w: w,
                        out_h,
                        out_w,
                        w: offset,
                        b: offset + cs.out_channels * c * cs.kernel * cs.kernel,
                    };
                    offset = layer.b + cs.out_channels;
                    convs.push(layer);
                    (c, h, w) = (cs.out_channels, out_h, out_w);
                }
                flat = c * h * w;
            }
            (None, false) => return Err(AgentError::Spec("conv layers given without an image".into())),
            (None, true) => {}
        }
        let mut dense = Vec::new();
        let mut in_dim = flat + spec.vector_dim;
        if in_dim == 0 || spec.out_dim == 0 || spec.trunk.contains(&0) {
            return Err(AgentError::Spec("dense layers need positive widths".into()));
        }
        for out_dim in spec.trunk.iter().copied().chain([spec.out_dim]) {
            let layer = DenseLayer {
                in_dim,
                out_dim,
                w: offset,
                b: offset + in_dim * out_dim,
            };
            offset = layer.b + out_dim;
            dense.push(layer);
            in_dim = out_dim;
        }
        Ok((convs, dense, offset))
    }

    /// Fan-in uniform initialization.
    pub fn new<R: Rng + ?Sized>(spec: NetSpec, rng: &mut R) -> Result<Self, AgentError> {
        let (convs, dense, count) = Self::layout(&spec)?;
        let mut params = vec![T::zero(); count];
        let mut fill = |from: usize, to: usize, bound: f64, rng: &mut R| {
            for p in &mut params[from..to] {
                *p = T::of(bound * (2.0 * rng.random::<f64>() - 1.0));
            }
        };
        for l in &convs {
            let bound = spec.init_gain / (l.patch() as f64).sqrt();
            fill(l.w, l.b + l.out_c, bound, rng);
        }
        let last = dense.len() - 1;
        for (i, l) in dense.iter().enumerate() {
            let bound = if i == last {
                spec.output_init
            } else {
                spec.init_gain / (l.in_dim as f64).sqrt()
            };
            fill(l.w, l.b + l.out_dim, bound, rng);
        }
        Ok(Self {
            spec,
            convs,
            dense,
            params,
        })
    }

    /// All-zero parameters.
    pub fn zeros(spec: NetSpec) -> Result<Self, AgentError> {
        let (convs, dense, count) = Self::layout(&spec)?;
        Ok(Self {
            spec,
            convs,
            dense,
            params: vec![T::zero(); count],
        })
    }

    pub fn from_params(spec: NetSpec, params: Vec<T>) -> Result<Self, AgentError> {
        let (convs, dense, count) = Self::layout(&spec)?;
        if params.len() != count {
            return Err(AgentError::ShapeMismatch {
                expected: count,
                got: params.len(),
            });
        }
        Ok(Self {
            spec,
            convs,
            dense,
            params,
        })
    }

    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Copy with parameters converted to another scalar type.
    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            spec: self.spec.clone(),
            convs: self.convs.clone(),
            dense: self.dense.clone(),
            params: self.params.iter().map(|p| U::of(p.as_f64())).collect(),
        }
    }

    /// Weight and bias tensors in storage order.
    pub fn tensor_slots(&self) -> Vec<TensorSlot> {
        let mut slots = Vec::new();
        for l in &self.convs {
            slots.push(TensorSlot {
                dims: vec![l.out_c, l.in_c, l.k, l.k],
                offset: l.w,
            });
            slots.push(TensorSlot {
                dims: vec![l.out_c],
                offset: l.b,
            });
        }
        for l in &self.dense {
            slots.push(TensorSlot {
                dims: vec![l.out_dim, l.in_dim],
                offset: l.w,
            });
            slots.push(TensorSlot {
                dims: vec![l.out_dim],
                offset: l.b,
            });
        }
        slots
    }

    fn flat_features(&self) -> usize {
        self.convs.last().map_or(0, ConvLayer::out_len)
    }

    fn check(&self, input: &Batch<T>) -> Result<(), AgentError> {
        let mismatch = |expected, got| Err(AgentError::ShapeMismatch { expected, got });
        if input.vector.len() != input.n * self.spec.vector_dim {
            return mismatch(input.n * self.spec.vector_dim, input.vector.len());
        }
        match (&self.spec.image, input.image) {
            (Some(shape), Some(img)) if img.len() != input.n * shape.len() => mismatch(input.n * shape.len(), img.len()),
            (Some(shape), None) => mismatch(input.n * shape.len(), 0),
            (None, Some(img)) => mismatch(0, img.len()),
            _ => Ok(()),
        }
    }

    pub fn forward(&self, input: &Batch<T>) -> Result<Cache<T>, AgentError> {
        self.check(input)?;
        let n = input.n;
        let mut cols_all = Vec::with_capacity(self.convs.len());
        let mut conv_out = Vec::with_capacity(self.convs.len());
        if let Some(image) = input.image {
            let mut current: Vec<T> = image.to_vec();
            for l in &self.convs {
                let (kk, p) = (l.patch(), l.positions());
                let mut cols = vec![T::zero(); n * kk * p];
                let mut out = vec![T::zero(); n * l.out_len()];
                for s in 0..n {
                    let src = &current[s * l.in_len()..(s + 1) * l.in_len()];
                    let col = &mut cols[s * kk * p..(s + 1) * kk * p];
                    im2col(l, src, col);
                    let dst = &mut out[s * l.out_len()..(s + 1) * l.out_len()];
                    for (c, row) in dst.chunks_mut(p).enumerate() {
                        row.fill(self.params[l.b + c]);
                    }
                    T::gemm(
                        l.out_c,
                        kk,
                        p,
                        &self.params[l.w..l.b],
                        (kk, 1),
                        col,
                        (p, 1),
                        T::one(),
                        dst,
                        (p, 1),
                    );
                }
                out.iter_mut().for_each(|v| *v = v.max(T::zero()));
                cols_all.push(cols);
                conv_out.push(out.clone());
                current = out;
            }
        }

        let flat = self.flat_features();
        let vd = self.spec.vector_dim;
        let mut x = Vec::with_capacity(n * (flat + vd));
        for s in 0..n {
            if let Some(last) = conv_out.last() {
                x.extend_from_slice(&last[s * flat..(s + 1) * flat]);
            }
            x.extend_from_slice(&input.vector[s * vd..(s + 1) * vd]);
        }
        let mut dense_in = Vec::with_capacity(self.dense.len());
        let last = self.dense.len() - 1;
        for (i, l) in self.dense.iter().enumerate() {
            let mut z = Vec::with_capacity(n * l.out_dim);
            for _ in 0..n {
                z.extend_from_slice(&self.params[l.b..l.b + l.out_dim]);
            }
            // z = x·Wᵀ + b with W stored out×in
            T::gemm(
                n,
                l.in_dim,
                l.out_dim,
                &x,
                (l.in_dim, 1),
                &self.params[l.w..l.b],
                (1, l.in_dim),
                T::one(),
                &mut z,
                (l.out_dim, 1),
            );
            if i < last {
                z.iter_mut().for_each(|v| *v = v.max(T::zero()));
            } else if self.spec.output == OutputActivation::Tanh {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            dense_in.push(x);
            x = z;
        }
        Ok(Cache {
            n,
            cols: cols_all,
            conv_out,
            dense_in,
            output: x,
        })
    }

    pub fn predict(&self, input: &Batch<T>) -> Result<Vec<T>, AgentError> {
        Ok(self.forward(input)?.output)
    }

    /// Accumulate parameter gradients of `Σ d_out · output` into `grads` and
    /// return the gradient with respect to the vector input.
    pub fn backward(&self, cache: &Cache<T>, d_out: &[T], grads: &mut [T]) -> Result<Vec<T>, AgentError> {
        let n = cache.n;
        if d_out.len() != n * self.spec.out_dim {
            return Err(AgentError::ShapeMismatch {
                expected: n * self.spec.out_dim,
                got: d_out.len(),
            });
        }
        if grads.len() != self.params.len() {
            return Err(AgentError::ShapeMismatch {
                expected: self.params.len(),
                got: grads.len(),
            });
        }
        let mut d = d_out.to_vec();
        if self.spec.output == OutputActivation::Tanh {
            for (g, y) in d.iter_mut().zip(&cache.output) {
                *g = *g * (T::one() - *y * *y);
            }
        }
        for (i, l) in self.dense.iter().enumerate().rev() {
            let x = &cache.dense_in[i];
            // dW (out×in) += dᵀ·x
            T::gemm(
                l.out_dim,
                n,
                l.in_dim,
                &d,
                (1, l.out_dim),
                x,
                (l.in_dim, 1),
                T::one(),
                &mut grads[l.w..l.b],
                (l.in_dim, 1),
            );
            let gb = &mut grads[l.b..l.b + l.out_dim];
            for row in d.chunks(l.out_dim) {
                for (g, v) in gb.iter_mut().zip(row) {
                    *g = *g + *v;
                }
            }
            let mut dx = vec![T::zero(); n * l.in_dim];
            T::gemm(
                n,
                l.out_dim,
                l.in_dim,
                &d,
                (l.out_dim, 1),
                &self.params[l.w..l.b],
                (l.in_dim, 1),
                T::zero(),
                &mut dx,
                (l.in_dim, 1),
            );
            if i > 0 {
                relu_mask(&mut dx, x);
            }
            d = dx;
        }

        let flat = self.flat_features();
        let vd = self.spec.vector_dim;
        let width = flat + vd;
        let mut d_vector = Vec::with_capacity(n * vd);
        for s in 0..n {
            d_vector.extend_from_slice(&d[s * width + flat..(s + 1) * width]);
        }
        if self.convs.is_empty() {
            return Ok(d_vector);
        }

        let mut d_conv = Vec::with_capacity(n * flat);
        for s in 0..n {
            d_conv.extend_from_slice(&d[s * width..s * width + flat]);
        }
        for (i, l) in self.convs.iter().enumerate().rev() {
            relu_mask(&mut d_conv, &cache.conv_out[i]);
            let (kk, p) = (l.patch(), l.positions());
            let mut d_in = if i > 0 { vec![T::zero(); n * l.in_len()] } else { Vec::new() };
            let mut d_cols = vec![T::zero(); kk * p];
            for s in 0..n {
                let ds = &d_conv[s * l.out_len()..(s + 1) * l.out_len()];
                let cols = &cache.cols[i][s * kk * p..(s + 1) * kk * p];
                // dW (out_c×kk) += dOut (out_c×p) · colsᵀ (p×kk)
                T::gemm(
                    l.out_c,
                    p,
                    kk,
                    ds,
                    (p, 1),
                    cols,
                    (1, p),
                    T::one(),
                    &mut grads[l.w..l.b],
                    (kk, 1),
                );
                for (c, row) in ds.chunks(p).enumerate() {
                    let sum = row.iter().fold(T::zero(), |a, b| a + *b);
                    grads[l.b + c] = grads[l.b + c] + sum;
                }
                if i > 0 {
                    T::gemm(
                        kk,
                        l.out_c,
                        p,
                        &self.params[l.w..l.b],
                        (1, kk),
                        ds,
                        (p, 1),
                        T::zero(),
                        &mut d_cols,
                        (p, 1),
                    );
                    col2im(l, &d_cols, &mut d_in[s * l.in_len()..(s + 1) * l.in_len()]);
                }
            }
            d_conv = d_in;
        }
        Ok(d_vector)
    }
}

fn im2col<T: Real>(l: &ConvLayer, src: &[T], cols: &mut [T]) {
    let p = l.positions();
    for c in 0..l.in_c {
        for ky in 0..l.k {
            for kx in 0..l.k {
                let row = ((c * l.k + ky) * l.k + kx) * p;
                for oy in 0..l.out_h {
                    let iy = (oy * l.stride + ky) as isize - l.pad as isize;
                    for ox in 0..l.out_w {
                        let ix = (ox * l.stride + kx) as isize - l.pad as isize;
                        cols[row + oy * l.out_w + ox] = if iy >= 0
                            && ix >= 0
                            && (iy as usize) < l.in_h
                            && (ix as usize) < l.in_w
                        {
                            src[(c * l.in_h + iy as usize) * l.in_w + ix as usize]
                        } else {
                            T::zero()
                        };
                    }
                }
            }
        }
    }
}

fn col2im<T: Real>(l: &ConvLayer, cols: &[T], dst: &mut [T]) {
    let p = l.positions();
    for c in 0..l.in_c {
        for ky in 0..l.k {
            for kx in 0..l.k {
                let row = ((c * l.k + ky) * l.k + kx) * p;
                for oy in 0..l.out_h {
                    let iy = (oy * l.stride + ky) as isize - l.pad as isize;
                    if iy < 0 || iy as usize >= l.in_h {
                        continue;
                    }
                    for ox in 0..l.out_w {
                        let ix = (ox * l.stride + kx) as isize - l.pad as isize;
                        if ix < 0 || ix as usize >= l.in_w {
                            continue;
                        }
                        let di = (c * l.in_h + iy as usize) * l.in_w + ix as usize;
                        dst[di] = dst[di] + cols[row + oy * l.out_w + ox];
                    }
                }
            }
        }
    }
}

/// Adaptive-moment optimizer over a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f32>,
    v: Vec<f32>,
    t: i32,
}

impl Adam {
    pub fn new(size: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; size],
            v: vec![0.0; size],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f32], grads: &[f32]) {
        self.t += 1;
        let (b1, b2) = (self.beta1 as f32, self.beta2 as f32);
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let step = (self.lr * c2.sqrt() / c1) as f32;
        let eps = (self.eps * c2.sqrt()) as f32;
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= step * *m / (v.sqrt() + eps);
        }
    }
}
