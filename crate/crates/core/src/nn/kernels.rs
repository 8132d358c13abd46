//! Per-layer forward and backward kernels over channel-last buffers.

use super::{Real, Shape};

/// C ← A·B + beta·C; A is `m × k` and B is `k × n` under the given
/// (row, column) strides, C is row-major `m × n`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn matmul<T: Real>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    (rsa, csa): (usize, usize),
    b: &[T],
    (rsb, csb): (usize, usize),
    c: &mut [T],
    beta: T,
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(c.len() >= m * n);
    if k == 0 {
        c[..m * n].iter_mut().for_each(|x| *x *= beta);
        return;
    }
    assert!((m - 1) * rsa + (k - 1) * csa < a.len());
    assert!((k - 1) * rsb + (n - 1) * csb < b.len());
    // SAFETY: the asserts above bound every index gemm touches.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ConvGeom {
    pub input: Shape,
    pub output: Shape,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
}

impl ConvGeom {
    pub fn patch_len(&self) -> usize {
        self.kh * self.kw * self.input.c
    }

    /// 1×1 stride-1 convolutions read the input directly as the patch matrix.
    pub fn pointwise(&self) -> bool {
        self.kh == 1 && self.kw == 1 && self.stride == 1
    }
}

fn im2col<T: Real>(g: &ConvGeom, input: &[T], cols: &mut Vec<T>) {
    let (o, i) = (g.output, g.input);
    let k = g.patch_len();
    let run = g.kw * i.c;
    cols.resize(o.h * o.w * k, T::zero());
    for oy in 0..o.h {
        for ox in 0..o.w {
            let row = (oy * o.w + ox) * k;
            for ky in 0..g.kh {
                let src = ((oy * g.stride + ky) * i.w + ox * g.stride) * i.c;
                let dst = row + ky * run;
                cols[dst..dst + run].copy_from_slice(&input[src..src + run]);
            }
        }
    }
}

fn col2im_add<T: Real>(g: &ConvGeom, dcols: &[T], dinput: &mut [T]) {
    let (o, i) = (g.output, g.input);
    let k = g.patch_len();
    let run = g.kw * i.c;
    dinput.iter_mut().for_each(|x| *x = T::zero());
    for oy in 0..o.h {
        for ox in 0..o.w {
            let row = (oy * o.w + ox) * k;
            for ky in 0..g.kh {
                let dst = ((oy * g.stride + ky) * i.w + ox * g.stride) * i.c;
                let src = row + ky * run;
                for (d, &s) in dinput[dst..dst + run].iter_mut().zip(&dcols[src..src + run]) {
                    *d += s;
                }
            }
        }
    }
}

/// Weight layout is `(kh·kw·c_in) × filters`, row-major, patch order (ky, kx, c).
pub(crate) fn conv_forward<T: Real>(
    g: &ConvGeom,
    input: &[T],
    weight: &[T],
    bias: &[T],
    cols: &mut Vec<T>,
    out: &mut [T],
) {
    let rows = g.output.h * g.output.w;
    let f = g.output.c;
    let k = g.patch_len();
    for row in out.chunks_exact_mut(f) {
        row.copy_from_slice(bias);
    }
    let patches: &[T] = if g.pointwise() {
        input
    } else {
        im2col(g, input, cols);
        cols
    };
    matmul(rows, k, f, patches, (k, 1), weight, (f, 1), out, T::one());
}

/// Accumulates weight and bias gradients; writes the input gradient when
/// `dinput` is given.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv_backward<T: Real>(
    g: &ConvGeom,
    input: &[T],
    cols: &[T],
    weight: &[T],
    dout: &[T],
    dweight: &mut [T],
    dbias: &mut [T],
    dinput: Option<&mut [T]>,
    dcols: &mut Vec<T>,
) {
    let rows = g.output.h * g.output.w;
    let f = g.output.c;
    let k = g.patch_len();
    let patches = if g.pointwise() { input } else { cols };
    matmul(k, rows, f, patches, (1, k), dout, (f, 1), dweight, T::one());
    for row in dout.chunks_exact(f) {
        for (b, &d) in dbias.iter_mut().zip(row) {
            *b += d;
        }
    }
    if let Some(dinput) = dinput {
        if g.pointwise() {
            matmul(rows, f, k, dout, (f, 1), weight, (1, f), dinput, T::zero());
        } else {
            dcols.resize(rows * k, T::zero());
            matmul(rows, f, k, dout, (f, 1), weight, (1, f), dcols, T::zero());
            col2im_add(g, dcols, dinput);
        }
    }
}

pub(crate) fn maxpool_forward<T: Real>(
    input: &[T],
    ishape: Shape,
    (ph, pw): (usize, usize),
    out: &mut [T],
    argmax: &mut Vec<u32>,
) {
    let oh = ishape.h / ph;
    let ow = ishape.w / pw;
    let c = ishape.c;
    argmax.resize(oh * ow * c, 0);
    for oy in 0..oh {
        for ox in 0..ow {
            for ch in 0..c {
                let mut best = T::neg_infinity();
                let mut at = 0usize;
                for ky in 0..ph {
                    for kx in 0..pw {
                        let idx = ((oy * ph + ky) * ishape.w + ox * pw + kx) * c + ch;
                        if input[idx] > best {
                            best = input[idx];
                            at = idx;
                        }
                    }
                }
                let o = (oy * ow + ox) * c + ch;
                out[o] = best;
                argmax[o] = at as u32;
            }
        }
    }
}

pub(crate) fn maxpool_backward<T: Real>(dout: &[T], argmax: &[u32], dinput: &mut [T]) {
    dinput.iter_mut().for_each(|x| *x = T::zero());
    for (&d, &at) in dout.iter().zip(argmax) {
        dinput[at as usize] += d;
    }
}

/// Weight layout is `inputs × units`, row-major.
pub(crate) fn dense_forward<T: Real>(input: &[T], weight: &[T], bias: &[T], out: &mut [T]) {
    out.copy_from_slice(bias);
    let units = bias.len();
    matmul(1, input.len(), units, input, (input.len(), 1), weight, (units, 1), out, T::one());
}

pub(crate) fn dense_backward<T: Real>(
    input: &[T],
    weight: &[T],
    dout: &[T],
    dweight: &mut [T],
    dbias: &mut [T],
    dinput: Option<&mut [T]>,
) {
    let units = dout.len();
    let n = input.len();
    matmul(n, 1, units, input, (1, 1), dout, (units, 1), dweight, T::one());
    for (b, &d) in dbias.iter_mut().zip(dout) {
        *b += d;
    }
    if let Some(dinput) = dinput {
        matmul(n, units, 1, weight, (units, 1), dout, (1, 1), dinput, T::zero());
    }
}

pub(crate) fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_with_transposed_operand() {
        // A = [[1,2],[3,4]], B = A^T read from A's storage
        let a = [1.0f64, 2.0, 3.0, 4.0];
        let mut c = [0.0f64; 4];
        matmul(2, 2, 2, &a, (2, 1), &a, (1, 2), &mut c, 0.0);
        assert_eq!(c, [5.0, 11.0, 11.0, 25.0]);
    }

    #[test]
    fn conv_matches_direct_sum() {
        let input_shape = Shape::new(4, 5, 2);
        let g = ConvGeom {
            input: input_shape,
            output: Shape::new(2, 2, 3),
            kh: 2,
            kw: 3,
            stride: 2,
        };
        let input: Vec<f64> = (0..input_shape.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let weight: Vec<f64> = (0..g.patch_len() * 3).map(|i| (i as f64 * 0.11).cos()).collect();
        let bias = [0.1, -0.2, 0.3];
        let mut out = vec![0.0; g.output.len()];
        let mut cols = Vec::new();
        conv_forward(&g, &input, &weight, &bias, &mut cols, &mut out);
        for oy in 0..2 {
            for ox in 0..2 {
                for f in 0..3 {
                    let mut s = bias[f];
                    for ky in 0..2 {
                        for kx in 0..3 {
                            for c in 0..2 {
                                let x = input[((oy * 2 + ky) * 5 + ox * 2 + kx) * 2 + c];
                                s += x * weight[((ky * 3 + kx) * 2 + c) * 3 + f];
                            }
                        }
                    }
                    assert!((out[(oy * 2 + ox) * 3 + f] - s).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pool_floors_and_routes_gradient() {
        let shape = Shape::new(3, 3, 1);
        let input = [1.0f32, 5.0, 0.0, 2.0, 3.0, 0.0, 9.0, 9.0, 9.0];
        let mut out = [0.0f32; 1];
        let mut argmax = Vec::new();
        maxpool_forward(&input, shape, (2, 2), &mut out, &mut argmax);
        assert_eq!(out, [5.0]);
        let mut dinput = [1.0f32; 9];
        maxpool_backward(&[2.0], &argmax, &mut dinput);
        assert_eq!(dinput, [0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
