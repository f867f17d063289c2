//! Dense kernels behind `linear` and its adjoints.
//!
//! Tall products go to `matrixmultiply`, which reads any strides and so
//! never needs a transposed copy. A single recurrent step has only a handful
//! of rows, where packing costs more than it saves; those use the loops
//! here. On either path an output row depends only on the matching input
//! row, never on which other rows share the batch.

const LANES: usize = 8;

/// Row counts from which the packed kernel wins.
const PACKED_MIN_ROWS: usize = 16;

#[inline(always)]
fn finish(acc: &[f64; LANES], a: &[f64], b: &[f64]) -> f64 {
    let body = a.len() / LANES * LANES;
    let mut tail = 0.0;
    for (x, y) in a[body..].iter().zip(&b[body..]) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; LANES];
    for (x, y) in a.chunks_exact(LANES).zip(b.chunks_exact(LANES)) {
        for k in 0..LANES {
            acc[k] += x[k] * y[k];
        }
    }
    finish(&acc, a, b)
}

/// Dot products of one row of `a` against two rows of `b`, sharing loads;
/// bitwise equal to two calls of [`dot`].
#[inline(always)]
fn dot2(a: &[f64], b0: &[f64], b1: &[f64]) -> [f64; 2] {
    let mut acc = [[0.0; LANES]; 2];
    for ((x, y0), y1) in a.chunks_exact(LANES).zip(b0.chunks_exact(LANES)).zip(b1.chunks_exact(LANES)) {
        for k in 0..LANES {
            acc[0][k] += x[k] * y0[k];
            acc[1][k] += x[k] * y1[k];
        }
    }
    [finish(&acc[0], a, b0), finish(&acc[1], a, b1)]
}

#[allow(clippy::too_many_arguments)]
fn dgemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    assert!(m > 0 && k > 0 && n > 0);
    assert!((m - 1) * rsa + (k - 1) * csa < a.len());
    assert!((k - 1) * rsb + (n - 1) * csb < b.len());
    assert_eq!(c.len(), m * n);
    // SAFETY: the assertions above bound the largest strided offset of a and
    // b inside their slices, and c is a dense row-major m x n block.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
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
        );
    }
}

/// `out[b, r] = bias[r] + <weight[r, :], input[b, :]>`
pub(crate) fn affine_forward(
    input: &[f64],
    batch: usize,
    in_dim: usize,
    weight: &[f64],
    out_dim: usize,
    bias: Option<&[f64]>,
    out: &mut [f64],
) {
    debug_assert_eq!(input.len(), batch * in_dim);
    debug_assert_eq!(weight.len(), out_dim * in_dim);
    debug_assert_eq!(out.len(), batch * out_dim);
    if batch >= PACKED_MIN_ROWS {
        dgemm(batch, in_dim, out_dim, input, (in_dim, 1), weight, (1, in_dim), 0.0, out);
    } else {
        let rows: Vec<&[f64]> = weight.chunks_exact(in_dim).collect();
        for (x, o) in input.chunks_exact(in_dim).zip(out.chunks_exact_mut(out_dim)) {
            let mut pairs = rows.chunks_exact(2);
            for (r, pair) in pairs.by_ref().enumerate() {
                let [v0, v1] = dot2(x, pair[0], pair[1]);
                o[2 * r] = v0;
                o[2 * r + 1] = v1;
            }
            if let [last] = pairs.remainder() {
                o[out_dim - 1] = dot(x, last);
            }
        }
    }
    if let Some(bias) = bias {
        for row in out.chunks_exact_mut(out_dim) {
            for (o, b) in row.iter_mut().zip(bias) {
                *o += *b;
            }
        }
    }
}

#[inline]
pub(crate) fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `d_input[b, :] = sum_r d_out[b, r] * weight[r, :]`
pub(crate) fn affine_backward_input(
    d_out: &[f64],
    batch: usize,
    out_dim: usize,
    weight: &[f64],
    in_dim: usize,
    d_input: &mut [f64],
) {
    debug_assert_eq!(d_out.len(), batch * out_dim);
    debug_assert_eq!(d_input.len(), batch * in_dim);
    if batch >= PACKED_MIN_ROWS {
        dgemm(batch, out_dim, in_dim, d_out, (out_dim, 1), weight, (in_dim, 1), 0.0, d_input);
        return;
    }
    d_input.fill(0.0);
    for (r, row) in weight.chunks_exact(in_dim).enumerate() {
        for (bi, dx) in d_input.chunks_exact_mut(in_dim).enumerate() {
            let g = d_out[bi * out_dim + r];
            if g != 0.0 {
                axpy(dx, g, row);
            }
        }
    }
}

/// `d_weight[r, :] += sum_b d_out[b, r] * input[b, :]` summed over every
/// `(d_out, input)` pair.
pub(crate) fn accumulate_weight_grad(
    pairs: &[(&[f64], &[f64])],
    out_dim: usize,
    in_dim: usize,
    d_weight: &mut [f64],
) {
    debug_assert_eq!(d_weight.len(), out_dim * in_dim);
    let stacked: (Vec<f64>, Vec<f64>);
    let (g, x) = match pairs {
        [] => return,
        [(g, x)] => (*g, *x),
        _ => {
            stacked = (
                pairs.iter().flat_map(|(g, _)| g.iter().copied()).collect(),
                pairs.iter().flat_map(|(_, x)| x.iter().copied()).collect(),
            );
            (stacked.0.as_slice(), stacked.1.as_slice())
        }
    };
    let rows = g.len() / out_dim;
    debug_assert_eq!(x.len(), rows * in_dim);
    dgemm(out_dim, rows, in_dim, g, (1, out_dim), x, (in_dim, 1), 1.0, d_weight);
}
