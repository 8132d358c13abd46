//! A small convolutional network stack with hand-written backpropagation.
//!
//! Activations are stored channel-last: a `(h, w, c)` tensor is a flat
//! row-major buffer indexed `(y * w + x) * c + ch`. Convolutions are valid
//! (no padding); pooling windows tile the input and floor odd remainders.

mod arch;
mod checkpoint;
mod gradcheck;
mod kernels;
mod network;
mod optim;
mod train;

use std::fmt;

use num_traits::Float;

use crate::error::{Error, Result};

pub use arch::{build_char_cnn, build_combinatorial_cnn};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use gradcheck::{gradcheck_suite, LayerCheck, GRADCHECK_TOLERANCE};
pub use network::{Grads, InputSpec, LayerParams, ModelParams, Network, Trace};
pub use optim::{Optimizer, OptimizerKind};
pub use train::{
    bce_loss, evaluate, metrics_csv_row, predict, train, train_with, write_metrics_csv, EpochRecord,
    TrainConfig, TrainOutcome, METRICS_CSV_HEADER, PROB_CLAMP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub h: usize,
    pub w: usize,
    pub c: usize,
}

impl Shape {
    pub fn new(h: usize, w: usize, c: usize) -> Self {
        Shape { h, w, c }
    }

    pub fn len(&self) -> usize {
        self.h * self.w * self.c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.h, self.w, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerSpec {
    Conv2d {
        filters: usize,
        kernel: (usize, usize),
        stride: usize,
    },
    MaxPool2d {
        size: (usize, usize),
    },
    Relu,
    Flatten,
    Dense {
        units: usize,
    },
    Sigmoid,
}

impl LayerSpec {
    pub fn conv(filters: usize, kh: usize, kw: usize) -> Self {
        LayerSpec::Conv2d {
            filters,
            kernel: (kh, kw),
            stride: 1,
        }
    }

    pub fn pool(ph: usize, pw: usize) -> Self {
        LayerSpec::MaxPool2d { size: (ph, pw) }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::MaxPool2d { .. } => "maxpool2d",
            LayerSpec::Relu => "relu",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Sigmoid => "sigmoid",
        }
    }

    pub fn has_params(&self) -> bool {
        matches!(self, LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. })
    }

    /// Output shape for `input`; `index` is only used in error messages.
    pub fn output_shape(&self, input: Shape, index: usize) -> Result<Shape> {
        let err = |detail: String| Error::Shape {
            layer: index,
            kind: self.kind(),
            detail,
        };
        match *self {
            LayerSpec::Conv2d {
                filters,
                kernel: (kh, kw),
                stride,
            } => {
                if filters == 0 || kh == 0 || kw == 0 || stride == 0 {
                    return Err(err("filters, kernel and stride must be positive".into()));
                }
                if input.h < kh || input.w < kw {
                    return Err(err(format!("kernel {kh}x{kw} does not fit input {input}")));
                }
                Ok(Shape::new(
                    (input.h - kh) / stride + 1,
                    (input.w - kw) / stride + 1,
                    filters,
                ))
            }
            LayerSpec::MaxPool2d { size: (ph, pw) } => {
                if ph == 0 || pw == 0 {
                    return Err(err("pool size must be positive".into()));
                }
                if input.h < ph || input.w < pw {
                    return Err(err(format!("pool {ph}x{pw} does not fit input {input}")));
                }
                Ok(Shape::new(input.h / ph, input.w / pw, input.c))
            }
            LayerSpec::Relu | LayerSpec::Sigmoid => Ok(input),
            LayerSpec::Flatten => Ok(Shape::new(1, 1, input.len())),
            LayerSpec::Dense { units } => {
                if units == 0 {
                    return Err(err("units must be positive".into()));
                }
                Ok(Shape::new(1, 1, units))
            }
        }
    }

    /// (weight, bias) lengths for layers with parameters.
    pub fn param_lens(&self, input: Shape) -> Option<(usize, usize)> {
        match *self {
            LayerSpec::Conv2d {
                filters,
                kernel: (kh, kw),
                ..
            } => Some((kh * kw * input.c * filters, filters)),
            LayerSpec::Dense { units } => Some((input.len() * units, units)),
            _ => None,
        }
    }

    /// Inputs feeding each output unit, for He initialization.
    pub fn fan_in(&self, input: Shape) -> usize {
        match *self {
            LayerSpec::Conv2d { kernel: (kh, kw), .. } => kh * kw * input.c,
            LayerSpec::Dense { .. } => input.len(),
            _ => 0,
        }
    }
}

/// Floating-point element type of a network.
pub trait Real:
    Float
    + Default
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + std::ops::AddAssign
    + std::ops::MulAssign
    + std::iter::Sum
{
    fn of(x: f64) -> Self;

    fn as_f64(self) -> f64;

    /// C ← A·B + beta·C with arbitrary strides; C is row-major `m × n`.
    ///
    /// # Safety
    /// Every strided index of `a`, `b` and `c` must be in bounds.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Real for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }

    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, 1.0, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }

    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, 1.0, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_rules() {
        let s = Shape::new(56, 56, 56);
        let s1 = LayerSpec::conv(32, 1, 1).output_shape(s, 0).unwrap();
        assert_eq!(s1, Shape::new(56, 56, 32));
        let s2 = LayerSpec::conv(16, 3, 3).output_shape(s1, 1).unwrap();
        assert_eq!(s2, Shape::new(54, 54, 16));
        assert_eq!(LayerSpec::pool(2, 2).output_shape(Shape::new(25, 25, 8), 2).unwrap(), Shape::new(12, 12, 8));
        assert_eq!(LayerSpec::Flatten.output_shape(Shape::new(2, 3, 4), 3).unwrap(), Shape::new(1, 1, 24));
        let strided = LayerSpec::Conv2d { filters: 2, kernel: (3, 3), stride: 2 };
        assert_eq!(strided.output_shape(Shape::new(7, 8, 1), 0).unwrap(), Shape::new(3, 3, 2));
        match LayerSpec::conv(8, 3, 3).output_shape(Shape::new(2, 2, 4), 4) {
            Err(Error::Shape { layer: 4, kind: "conv2d", .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
