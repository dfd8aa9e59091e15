//! Differentiable building blocks: 3x3x3 convolution (zero padding 1),
//! SoftSign, 2x average pooling, 2x nearest upsampling, channel concat.

use super::tensor::{Scalar, Tensor};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("shape mismatch: {0}")]
    Mismatch(String),
    #[error("pooling needs an even side length, got {0}")]
    OddSide(usize),
}

pub const KERNEL_VOLUME: usize = 27;

/// Columns per GEMM chunk; keeps the im2col buffer small.
const CHUNK_COLUMNS: usize = 8192;

fn z_chunk(n: usize) -> usize {
    (CHUNK_COLUMNS / (n * n)).clamp(1, n)
}

/// Shifted copy of one row: `dst[x] = src[x + dx]`, zero outside.
#[inline]
fn shift_copy<T: Scalar>(dst: &mut [T], src: &[T], dx: isize) {
    let n = dst.len();
    match dx {
        -1 => {
            dst[0] = T::ZERO;
            dst[1..].copy_from_slice(&src[..n - 1]);
        }
        0 => dst.copy_from_slice(src),
        _ => {
            dst[..n - 1].copy_from_slice(&src[1..]);
            dst[n - 1] = T::ZERO;
        }
    }
}

/// Reverse of `shift_copy`: `dst[x + dx] += src[x]`.
#[inline]
fn shift_add<T: Scalar>(dst: &mut [T], src: &[T], dx: isize) {
    let n = dst.len();
    match dx {
        -1 => {
            for x in 1..n {
                dst[x - 1] += src[x];
            }
        }
        0 => {
            for x in 0..n {
                dst[x] += src[x];
            }
        }
        _ => {
            for x in 0..n - 1 {
                dst[x + 1] += src[x];
            }
        }
    }
}

fn offsets(kk: usize) -> (isize, isize, isize) {
    ((kk / 9) as isize - 1, ((kk / 3) % 3) as isize - 1, (kk % 3) as isize - 1)
}

/// im2col for z-planes `z0..z1`: row `ci * 27 + kk`, column = point index
/// within the chunk.
fn im2col<T: Scalar>(input: &Tensor<T>, z0: usize, z1: usize, cols: &mut [T]) {
    let n = input.n;
    let width = (z1 - z0) * n * n;
    for ci in 0..input.channels {
        let chan = input.channel(ci);
        for kk in 0..KERNEL_VOLUME {
            let (dz, dy, dx) = offsets(kk);
            let row = &mut cols[(ci * KERNEL_VOLUME + kk) * width..][..width];
            for z in z0..z1 {
                let sz = z as isize + dz;
                for y in 0..n {
                    let sy = y as isize + dy;
                    let dst = &mut row[((z - z0) * n + y) * n..][..n];
                    if sz < 0 || sz >= n as isize || sy < 0 || sy >= n as isize {
                        dst.fill(T::ZERO);
                    } else {
                        shift_copy(dst, &chan[(sz as usize * n + sy as usize) * n..][..n], dx);
                    }
                }
            }
        }
    }
}

fn col2im_add<T: Scalar>(cols: &[T], z0: usize, z1: usize, grad_in: &mut Tensor<T>) {
    let n = grad_in.n;
    let width = (z1 - z0) * n * n;
    for ci in 0..grad_in.channels {
        let chan = grad_in.channel_mut(ci);
        for kk in 0..KERNEL_VOLUME {
            let (dz, dy, dx) = offsets(kk);
            let row = &cols[(ci * KERNEL_VOLUME + kk) * width..][..width];
            for z in z0..z1 {
                let sz = z as isize + dz;
                if sz < 0 || sz >= n as isize {
                    continue;
                }
                for y in 0..n {
                    let sy = y as isize + dy;
                    if sy < 0 || sy >= n as isize {
                        continue;
                    }
                    let src = &row[((z - z0) * n + y) * n..][..n];
                    shift_add(&mut chan[(sz as usize * n + sy as usize) * n..][..n], src, dx);
                }
            }
        }
    }
}

fn check_conv<T: Scalar>(input: &Tensor<T>, weight: &[T], bias: &[T]) -> Result<usize, ShapeError> {
    let cout = bias.len();
    if weight.len() != cout * input.channels * KERNEL_VOLUME {
        return Err(ShapeError::Mismatch(format!(
            "kernel has {} values, expected {} x {} x 27",
            weight.len(),
            cout,
            input.channels
        )));
    }
    if input.n == 0 {
        return Err(ShapeError::Mismatch("empty input".into()));
    }
    Ok(cout)
}

/// Same-size 3D cross-correlation. `weight` is `[cout][cin][dz][dy][dx]`.
pub fn conv3d_forward<T: Scalar>(input: &Tensor<T>, weight: &[T], bias: &[T]) -> Result<Tensor<T>, ShapeError> {
    let cout = check_conv(input, weight, bias)?;
    let (n, cin) = (input.n, input.channels);
    let p = input.spatial();
    let rows = cin * KERNEL_VOLUME;
    let mut out = Tensor::zeros(cout, n);
    for co in 0..cout {
        out.channel_mut(co).fill(bias[co]);
    }
    let zc = z_chunk(n);
    let mut cols = vec![T::ZERO; rows * zc * n * n];
    let mut z0 = 0;
    while z0 < n {
        let z1 = (z0 + zc).min(n);
        let width = (z1 - z0) * n * n;
        im2col(input, z0, z1, &mut cols);
        T::gemm(
            cout,
            rows,
            width,
            T::ONE,
            weight,
            rows as isize,
            1,
            &cols,
            width as isize,
            1,
            T::ONE,
            &mut out.data[z0 * n * n..],
            p as isize,
            1,
        );
        z0 = z1;
    }
    Ok(out)
}

/// Gradients of a convolution. Adds the kernel and bias gradients into
/// `grad_weight` / `grad_bias` and returns the input gradient when
/// `want_input` is set.
pub fn conv3d_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    weight: &[T],
    grad_weight: &mut [T],
    grad_bias: &mut [T],
    want_input: bool,
) -> Result<Option<Tensor<T>>, ShapeError> {
    let cout = check_conv(input, weight, grad_bias)?;
    if grad_out.channels != cout || grad_out.n != input.n || grad_weight.len() != weight.len() {
        return Err(ShapeError::Mismatch("gradient shapes do not match the convolution".into()));
    }
    let (n, cin) = (input.n, input.channels);
    let p = input.spatial();
    let rows = cin * KERNEL_VOLUME;
    for co in 0..cout {
        let mut s = T::ZERO;
        for &g in grad_out.channel(co) {
            s += g;
        }
        grad_bias[co] += s;
    }
    let mut grad_in = want_input.then(|| Tensor::zeros(cin, n));
    let zc = z_chunk(n);
    let mut cols = vec![T::ZERO; rows * zc * n * n];
    let mut gcols = if want_input { vec![T::ZERO; rows * zc * n * n] } else { Vec::new() };
    let mut z0 = 0;
    while z0 < n {
        let z1 = (z0 + zc).min(n);
        let width = (z1 - z0) * n * n;
        let g = &grad_out.data[z0 * n * n..];
        im2col(input, z0, z1, &mut cols);
        T::gemm(
            cout,
            width,
            rows,
            T::ONE,
            g,
            p as isize,
            1,
            &cols,
            1,
            width as isize,
            T::ONE,
            grad_weight,
            rows as isize,
            1,
        );
        if let Some(gi) = grad_in.as_mut() {
            T::gemm(
                rows,
                cout,
                width,
                T::ONE,
                weight,
                1,
                rows as isize,
                g,
                p as isize,
                1,
                T::ZERO,
                &mut gcols,
                width as isize,
                1,
            );
            col2im_add(&gcols, z0, z1, gi);
        }
        z0 = z1;
    }
    Ok(grad_in)
}

pub fn softsign<T: Scalar>(x: T) -> T {
    x / (T::ONE + x.abs())
}

pub fn softsign_inplace<T: Scalar>(t: &mut Tensor<T>) {
    t.data.iter_mut().for_each(|v| *v = softsign(*v));
}

/// Backward through SoftSign given its output `y`:
/// `dy/dx = 1/(1+|x|)^2 = (1-|y|)^2`.
pub fn softsign_backward_from_output<T: Scalar>(grad: &mut Tensor<T>, y: &Tensor<T>) {
    for (g, &v) in grad.data.iter_mut().zip(&y.data) {
        let d = T::ONE - v.abs();
        *g *= d * d;
    }
}

pub fn avg_pool2<T: Scalar>(input: &Tensor<T>) -> Result<Tensor<T>, ShapeError> {
    let n = input.n;
    if n % 2 != 0 {
        return Err(ShapeError::OddSide(n));
    }
    let h = n / 2;
    let mut out = Tensor::zeros(input.channels, h);
    let eighth = T::from_f64(0.125);
    for c in 0..input.channels {
        let src = input.channel(c);
        let dst = out.channel_mut(c);
        for z in 0..n {
            for y in 0..n {
                let row = &src[(z * n + y) * n..][..n];
                let drow = &mut dst[((z / 2) * h + y / 2) * h..][..h];
                for x in 0..h {
                    drow[x] += (row[2 * x] + row[2 * x + 1]) * eighth;
                }
            }
        }
    }
    Ok(out)
}

/// Adjoint of `avg_pool2`: each coarse gradient spread as 1/8 over its
/// 2x2x2 block.
pub fn avg_pool2_backward<T: Scalar>(grad_out: &Tensor<T>) -> Tensor<T> {
    let mut g = upsample2(grad_out);
    let eighth = T::from_f64(0.125);
    g.data.iter_mut().for_each(|v| *v *= eighth);
    g
}

pub fn upsample2<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let h = input.n;
    let n = 2 * h;
    let mut out = Tensor::zeros(input.channels, n);
    for c in 0..input.channels {
        let src = input.channel(c);
        let dst = out.channel_mut(c);
        for z in 0..n {
            for y in 0..n {
                let srow = &src[((z / 2) * h + y / 2) * h..][..h];
                let drow = &mut dst[(z * n + y) * n..][..n];
                for x in 0..n {
                    drow[x] = srow[x / 2];
                }
            }
        }
    }
    out
}

/// Adjoint of `upsample2`: sum over each 2x2x2 block.
pub fn upsample2_backward<T: Scalar>(grad_out: &Tensor<T>) -> Result<Tensor<T>, ShapeError> {
    let mut g = avg_pool2(grad_out)?;
    let eight = T::from_f64(8.0);
    g.data.iter_mut().for_each(|v| *v *= eight);
    Ok(g)
}

pub fn concat<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>, ShapeError> {
    if a.n != b.n {
        return Err(ShapeError::Mismatch(format!("concat of sides {} and {}", a.n, b.n)));
    }
    let mut data = Vec::with_capacity(a.data.len() + b.data.len());
    data.extend_from_slice(&a.data);
    data.extend_from_slice(&b.data);
    Ok(Tensor::from_vec(a.channels + b.channels, a.n, data))
}

/// Splits a gradient of `concat(a, b)` back into the parts.
pub fn split<T: Scalar>(t: &Tensor<T>, first: usize) -> (Tensor<T>, Tensor<T>) {
    let cut = first * t.spatial();
    (
        Tensor::from_vec(first, t.n, t.data[..cut].to_vec()),
        Tensor::from_vec(t.channels - first, t.n, t.data[cut..].to_vec()),
    )
}
